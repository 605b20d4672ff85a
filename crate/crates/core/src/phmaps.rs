//! Positively homogeneous maps `Phi: F* -> E*` and the composition operators
//! `C_Phi f = f o Phi` they induce between spaces of positively homogeneous
//! functions.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, Error, Result};
use crate::estimate::{Budget, Method, NormEstimate, Witness};
use crate::fblnorm::{fbl_lower, fbl_upper_value};
use crate::homfn::HomFn;
use crate::rng::{derive, seeded};
use crate::spaces::{dot, Functional, NormSpec, Space, Vector};
use crate::summing::{p_value, top_singular, weak_p_of};

/// The shape of a map.
#[derive(Clone, Debug, PartialEq)]
pub enum PhKind {
    /// Multiplication by a `dim E x dim F` matrix `M`; this is `S*` for the
    /// operator `S = M^T: E -> F`.
    Adjoint(Vec<Vec<f64>>),
    /// Coordinatewise absolute value in the fixed basis (source and target coincide).
    Modulus,
    /// `y* -> f(y*) x0*`.
    RankOne { f: HomFn, x0: Functional },
    /// `outer o inner`.
    Composite { outer: Box<PhMap>, inner: Box<PhMap> },
    /// `Phi(y*)(e_i) = action[i](y*)`, extended linearly in the `E` argument.
    Tabulated(Vec<HomFn>),
}

/// A positively homogeneous map from the dual of `source` (F) to the dual of
/// `target` (E).
#[derive(Clone, Debug, PartialEq)]
pub struct PhMap {
    kind: PhKind,
    source: Space,
    target: Space,
}

impl PhMap {
    /// `y* -> M y*` with `M` of shape `dim E x dim F`.
    pub fn adjoint(matrix: Vec<Vec<f64>>, source: Space, target: Space) -> Result<PhMap> {
        if matrix.len() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: target.dim(),
                got: matrix.len(),
            });
        }
        for row in &matrix {
            if row.len() != source.dim() {
                return Err(Error::DimensionMismatch {
                    expected: source.dim(),
                    got: row.len(),
                });
            }
            if row.iter().any(|a| !a.is_finite()) {
                return Err(Error::InvalidInput("matrix entries must be finite".into()));
            }
        }
        Ok(PhMap {
            kind: PhKind::Adjoint(matrix),
            source,
            target,
        })
    }

    /// The adjoint of `S: E -> F` given as a `dim F x dim E` matrix.
    pub fn adjoint_of(s: &[Vec<f64>], e: Space, f: Space) -> Result<PhMap> {
        let rows = s.len();
        let cols = s.first().map_or(0, Vec::len);
        if s.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged matrix".into()));
        }
        let m = (0..cols).map(|j| (0..rows).map(|i| s[i][j]).collect()).collect();
        PhMap::adjoint(m, f, e)
    }

    pub fn identity(space: Space) -> PhMap {
        let n = space.dim();
        let m = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        PhMap {
            kind: PhKind::Adjoint(m),
            source: space.clone(),
            target: space,
        }
    }

    /// `y* -> |y*|` coordinatewise. This depends on the basis by design.
    pub fn modulus(space: Space) -> PhMap {
        PhMap {
            kind: PhKind::Modulus,
            source: space.clone(),
            target: space,
        }
    }

    pub fn rank_one(f: HomFn, x0: Functional, source: Space, target: Space) -> Result<PhMap> {
        f.validate(&source)?;
        target.check_functional(&x0)?;
        Ok(PhMap {
            kind: PhKind::RankOne { f, x0 },
            source,
            target,
        })
    }

    /// `outer o inner`; the target of `inner` must be the source of `outer`.
    pub fn composite(outer: PhMap, inner: PhMap) -> Result<PhMap> {
        if inner.target != outer.source {
            return Err(Error::InvalidInput(
                "composite: inner target differs from outer source".into(),
            ));
        }
        Ok(PhMap {
            source: inner.source.clone(),
            target: outer.target.clone(),
            kind: PhKind::Composite {
                outer: Box::new(outer),
                inner: Box::new(inner),
            },
        })
    }

    pub fn tabulated(action: Vec<HomFn>, source: Space, target: Space) -> Result<PhMap> {
        if action.len() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: target.dim(),
                got: action.len(),
            });
        }
        for h in &action {
            h.validate(&source)?;
        }
        Ok(PhMap {
            kind: PhKind::Tabulated(action),
            source,
            target,
        })
    }

    pub fn kind(&self) -> &PhKind {
        &self.kind
    }

    /// The space `F` whose dual is the domain.
    pub fn source(&self) -> &Space {
        &self.source
    }

    /// The space `E` whose dual is the codomain.
    pub fn target(&self) -> &Space {
        &self.target
    }

    /// Matrix of the map when it is an adjoint (composites of adjoints included).
    pub fn adjoint_matrix(&self) -> Option<Vec<Vec<f64>>> {
        match &self.kind {
            PhKind::Adjoint(m) => Some(m.clone()),
            PhKind::Composite { outer, inner } => {
                let a = outer.adjoint_matrix()?;
                let b = inner.adjoint_matrix()?;
                Some(matmul(&a, &b))
            }
            _ => None,
        }
    }

    /// True when the map is linear by construction.
    pub fn is_linear(&self) -> bool {
        self.adjoint_matrix().is_some()
    }

    pub fn apply(&self, y: &Functional) -> Result<Functional> {
        self.source.check_functional(y)?;
        Ok(match &self.kind {
            PhKind::Adjoint(m) => Functional(m.iter().map(|row| dot(row, &y.0)).collect()),
            PhKind::Modulus => Functional(y.0.iter().map(|a| a.abs()).collect()),
            PhKind::RankOne { f, x0 } => x0.scaled(f.eval(&self.source, y)?),
            PhKind::Composite { outer, inner } => outer.apply(&inner.apply(y)?)?,
            PhKind::Tabulated(action) => {
                let mut out = Vec::with_capacity(action.len());
                for h in action {
                    out.push(h.eval(&self.source, y)?);
                }
                Functional(out)
            }
        })
    }

    /// The inverse of an adjoint with invertible square matrix.
    pub fn inverse(&self) -> Result<PhMap> {
        let m = self
            .adjoint_matrix()
            .ok_or_else(|| Error::Unsupported("inverse of a non-adjoint map".into()))?;
        let n = m.len();
        if n != self.source.dim() {
            return Err(Error::InvalidInput("inverse needs a square matrix".into()));
        }
        let a = DMatrix::from_fn(n, n, |i, j| m[i][j]);
        let inv = a
            .try_inverse()
            .ok_or_else(|| Error::Numerical("matrix is singular".into()))?;
        let rows = (0..n).map(|i| (0..n).map(|j| inv[(i, j)]).collect()).collect();
        PhMap::adjoint(rows, self.target.clone(), self.source.clone())
    }
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = b.len();
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..n).map(|j| (0..k).map(|l| row[l] * b[l][j]).sum()).collect())
        .collect()
}

fn transpose_apply(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| m.iter().zip(x).map(|(row, xi)| row[j] * xi).sum())
        .collect()
}

/// `||S|| = ||S*||` for `S* = M`, with a functional `y*` in the unit ball of
/// `F*` attaining `||M y*|| = ||S||`.
fn adjoint_norm(m: &[Vec<f64>], source: &Space, target: &Space) -> Result<(f64, Functional, Method)> {
    if let Ok(ext) = target.extreme_points() {
        // ||S|| = max over ext(B_E) of ||M^T x||_F
        let mut best = -1.0;
        let mut arg = Functional::zeros(source.dim());
        for x in ext {
            let sx = Vector(transpose_apply(m, &x.0));
            let v = source.norm_of(&sx.0);
            if v > best {
                best = v;
                arg = source.norming_functional(&sx)?;
            }
        }
        return Ok((best, arg, Method::ExactVertices));
    }
    if let Ok(ext) = source.dual_extreme_points() {
        let mut best = -1.0;
        let mut arg = ext[0].clone();
        for y in ext {
            let my: Vec<f64> = m.iter().map(|row| dot(row, &y.0)).collect();
            let v = target.dual_norm_of(&my);
            if v > best {
                best = v;
                arg = y;
            }
        }
        return Ok((best, arg, Method::ExactVertices));
    }
    let rows: Vec<Functional> = m.iter().map(|r| Functional(r.clone())).collect();
    // both spaces Euclidean: the largest singular value of M
    let (s, v) = top_singular(&rows);
    Ok((s, Functional(v.0), Method::ExactSpectral))
}

/// `sup_{x in B_E} sum_i |x_i| u_i`.
fn weighted_coordinate_sup(space: &Space, u: &[f64]) -> f64 {
    if u.iter().any(|a| !a.is_finite()) {
        return f64::INFINITY;
    }
    match space.spec() {
        NormSpec::Polyhedral(_) => space
            .extreme_points()
            .map(|ext| {
                ext.iter()
                    .map(|v| v.0.iter().zip(u).map(|(a, b)| a.abs() * b).sum::<f64>())
                    .fold(0.0, f64::max)
            })
            .unwrap_or(f64::INFINITY),
        // the l1, l2 and linf norms are unconditional, so this is the dual norm of u
        _ => space.dual_norm_of(u),
    }
}

/// Certified upper bound on `||Phi||_p`, infinite when no structural bound applies.
pub fn phi_upper(phi: &PhMap, p: f64) -> f64 {
    match &phi.kind {
        PhKind::Adjoint(m) => adjoint_norm(m, &phi.source, &phi.target)
            .map(|r| r.0)
            .unwrap_or(f64::INFINITY),
        PhKind::Modulus => {
            let u: Vec<f64> = (0..phi.target.dim())
                .map(|i| phi.target.norm_of(&Vector::unit(phi.target.dim(), i).0))
                .collect();
            weighted_coordinate_sup(&phi.target, &u)
        }
        PhKind::Tabulated(action) => {
            let u: Vec<f64> = action
                .iter()
                .map(|h| fbl_upper_value(&phi.source, h, p))
                .collect();
            weighted_coordinate_sup(&phi.target, &u)
        }
        PhKind::RankOne { f, x0 } => {
            let n = phi.target.dual_norm_of(&x0.0);
            if n == 0.0 {
                0.0
            } else {
                fbl_upper_value(&phi.source, f, p) * n
            }
        }
        PhKind::Composite { outer, inner } => {
            if let Some(m) = phi.adjoint_matrix() {
                return adjoint_norm(&m, &phi.source, &phi.target)
                    .map(|r| r.0)
                    .unwrap_or(f64::INFINITY);
            }
            phi_upper(outer, p) * phi_upper(inner, p)
        }
    }
}

/// Estimate of `||Phi||_p = sup { ||(Phi y_j*)||_{p,weak} : ||(y_j*)||_{p,weak} <= 1 }`.
///
/// Adjoints are exact (`||Phi||_p = ||S||`). Otherwise the lower bound comes
/// from source tuples drawn from extreme points, coordinate functionals and
/// sphere samples, each rescaled by a certified upper bound on its weak
/// p-norm; the upper bound is [`phi_upper`].
pub fn phi_p_norm(phi: &PhMap, p: f64, budget: &Budget, seed: u64) -> Result<NormEstimate> {
    check_exponent(p)?;
    if let Some(m) = phi.adjoint_matrix() {
        let (v, y, method) = adjoint_norm(&m, &phi.source, &phi.target)?;
        return Ok(NormEstimate::exact(v, method, Some(Witness::Tuple(vec![y]))));
    }
    let upper = phi_upper(phi, p);
    let (lower, tuple) = phi_search(phi, p, budget, seed)?;
    Ok(NormEstimate {
        lower,
        upper: upper.max(lower),
        method: if upper.is_finite() {
            Method::Bracket
        } else {
            Method::SearchLower
        },
        witness: tuple.map(Witness::Tuple),
    })
}

/// Value of a source tuple: `||(Phi y_j*)||_{p,weak} / ||(y_j*)||_{p,weak}`,
/// with the tuple rescaled to be feasible.
fn tuple_ratio(
    phi: &PhMap,
    tuple: &[Functional],
    p: f64,
    budget: &Budget,
    seed: u64,
) -> Result<Option<(f64, Vec<Functional>)>> {
    let w = weak_p_of(&phi.source, tuple, p, budget, seed)?.upper;
    if !(w.is_finite() && w > 0.0) {
        return Ok(None);
    }
    let scaled: Vec<Functional> = tuple.iter().map(|y| y.scaled(1.0 / w)).collect();
    let mut images = Vec::with_capacity(scaled.len());
    for y in &scaled {
        images.push(phi.apply(y)?);
    }
    let v = weak_p_of(&phi.target, &images, p, budget, seed)?;
    Ok(Some((v.lower, scaled)))
}

fn phi_search(
    phi: &PhMap,
    p: f64,
    budget: &Budget,
    seed: u64,
) -> Result<(f64, Option<Vec<Functional>>)> {
    let f = &phi.source;
    let mut pool: Vec<Functional> = f.unit_coordinate_functionals();
    if let Ok(ext) = f.half_dual_extreme_points() {
        pool.extend(ext.into_iter().take(64));
    }
    pool.extend(f.sample_dual_sphere(budget.samples, derive(seed, 20)));
    let mut best = 0.0;
    let mut arg: Option<Vec<Functional>> = None;
    let consider = |t: Vec<Functional>, best: &mut f64, arg: &mut Option<Vec<Functional>>| -> Result<()> {
        if let Some((v, s)) = tuple_ratio(phi, &t, p, budget, seed)? {
            if v > *best {
                *best = v;
                *arg = Some(s);
            }
        }
        Ok(())
    };
    for y in &pool {
        consider(vec![y.clone()], &mut best, &mut arg)?;
    }
    let coords = f.unit_coordinate_functionals();
    consider(coords.clone(), &mut best, &mut arg)?;
    if let Ok(ext) = f.half_dual_extreme_points() {
        if ext.len() <= budget.tuple_max.max(1) * 2 {
            consider(ext, &mut best, &mut arg)?;
        }
    }
    let mut rng = seeded(derive(seed, 21));
    use rand::Rng as _;
    for size in [2usize, 4, 8] {
        if size > budget.tuple_max {
            break;
        }
        for _ in 0..budget.restarts {
            let t: Vec<Functional> = (0..size)
                .map(|_| pool[rng.random_range(0..pool.len())].clone())
                .collect();
            consider(t, &mut best, &mut arg)?;
        }
    }
    Ok((best, arg))
}

/// `f o Phi`, a function on `F*` when `f` lives on `E*`.
pub fn compose_op(phi: &PhMap, f: HomFn) -> Result<HomFn> {
    f.validate(&phi.target)?;
    Ok(HomFn::Composed {
        arg: Box::new(f),
        map: Box::new(phi.clone()),
    })
}

/// The map determined by the images of the basis vectors `e_i` of `E` under a
/// lattice homomorphism: `Phi(y*)(e_i) = action[i](y*)`.
pub fn extract_phi(
    space_e: &Space,
    space_f: &Space,
    action: &BTreeMap<usize, HomFn>,
) -> Result<PhMap> {
    let n = space_e.dim();
    if let Some(k) = action.keys().find(|k| **k >= n) {
        return Err(Error::InvalidInput(format!(
            "generator image given for e_{k}, but dim E = {n}"
        )));
    }
    let mut images = Vec::with_capacity(n);
    for i in 0..n {
        let h = action.get(&i).ok_or_else(|| {
            Error::InvalidInput(format!("missing generator image for basis vector e_{i}"))
        })?;
        images.push(h.clone());
    }
    PhMap::tabulated(images, space_f.clone(), space_e.clone())
}

/// Sampled deviations from linearity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearityReport {
    /// `max ||Phi(u + v) - Phi u - Phi v||`.
    pub additivity_defect: f64,
    /// `max ||Phi(-u) + Phi u||`.
    pub homogeneity_defect: f64,
    /// `max ||Phi(u + v) - Phi u - Phi v|| / (||u|| + ||v||)`.
    pub quasilinearity_ratio: f64,
    /// Certified upper bound on `||Phi||_p` at `p = 1`, when one is known.
    #[serde(default)]
    pub phi_upper: Option<f64>,
    /// `quasilinearity_ratio <= 2 ||Phi||_1` (`None` without an upper bound).
    pub quasilinear_bound_holds: Option<bool>,
    pub pairs: usize,
}

fn probe_points(space: &Space, samples: usize, seed: u64) -> Vec<Functional> {
    let mut pts = space.unit_coordinate_functionals();
    let mut rng = seeded(derive(seed, 30));
    use rand::Rng as _;
    for y in space.sample_dual_sphere(samples, seed) {
        let r: f64 = rng.random_range(0.05..1.0);
        pts.push(y.scaled(r));
    }
    pts
}

pub fn linearity_report(phi: &PhMap, samples: usize, seed: u64) -> Result<LinearityReport> {
    let pts = probe_points(&phi.source, samples.max(1), seed);
    let e = &phi.target;
    let f = &phi.source;
    let mut add: f64 = 0.0;
    let mut hom: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    let mut pairs = 0;
    let images: Vec<Functional> = pts.iter().map(|u| phi.apply(u)).collect::<Result<_>>()?;
    for (i, u) in pts.iter().enumerate() {
        let neg = phi.apply(&u.scaled(-1.0))?;
        hom = hom.max(e.dual_norm_of(&neg.add(&images[i]).0));
        let j = (i * 7 + 3) % pts.len();
        for (k, v) in [(j, &pts[j]), ((i + 1) % pts.len(), &pts[(i + 1) % pts.len()])] {
            let s = phi.apply(&u.add(v))?;
            let d = e.dual_norm_of(&s.sub(&images[i]).sub(&images[k]).0);
            add = add.max(d);
            let denom = f.dual_norm_of(&u.0) + f.dual_norm_of(&v.0);
            if denom > 0.0 {
                ratio = ratio.max(d / denom);
            }
            pairs += 1;
        }
    }
    let upper = phi_upper(phi, 1.0);
    let phi_upper = upper.is_finite().then_some(upper);
    Ok(LinearityReport {
        additivity_defect: add,
        homogeneity_defect: hom,
        quasilinearity_ratio: ratio,
        quasilinear_bound_holds: phi_upper.map(|u| ratio <= 2.0 * u * (1.0 + 1e-9) + 1e-12),
        phi_upper,
        pairs,
    })
}

/// Both directions of `||C_Phi|| = ||Phi||_p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompNormReport {
    pub p: f64,
    pub phi: NormEstimate,
    /// Largest `fbl_lower(C_Phi delta_x) / ||x||` over probed `x`: a lower
    /// bound on `||C_Phi||`.
    pub cphi_lower: f64,
    /// The value of the `||Phi||_p` witness tuple re-evaluated through the
    /// functions `C_Phi delta_x`, maximized over `x`.
    pub delta_reproduction: f64,
    /// `fbl_lower(C_Phi f) <= ||Phi||_p upper * fbl_upper(f)` on every probed `f`.
    pub upper_direction_holds: bool,
    /// `delta_reproduction` matches `phi.lower` within `1e-6` relative.
    pub lower_direction_holds: bool,
    /// `cphi_lower` and `phi.lower` agree within `1e-3` relative.
    pub directions_agree: bool,
    pub worst_upper_case: Option<(f64, f64)>,
}

fn probe_vectors(space: &Space, seed: u64) -> Vec<Vector> {
    let mut xs: Vec<Vector> = match space.half_extreme_points() {
        Ok(e) => e.into_iter().take(16).collect(),
        Err(_) => Vec::new(),
    };
    xs.extend((0..space.dim()).map(|i| Vector::unit(space.dim(), i)));
    xs.extend(space.sample_sphere(8, seed));
    xs
}

pub fn comp_norm_identity_check(
    phi: &PhMap,
    p: f64,
    budget: &Budget,
    seed: u64,
) -> Result<CompNormReport> {
    let est = phi_p_norm(phi, p, budget, seed)?;
    let e = &phi.target;
    let mut xs = probe_vectors(e, derive(seed, 40));
    // vectors norming the witness images attain ||C_Phi delta_x|| = ||Phi||_p for adjoints
    if let Some(Witness::Tuple(t)) = &est.witness {
        for y in t.iter().take(4) {
            let image = phi.apply(y)?;
            if !image.is_zero() {
                xs.push(e.norming_vector(&image)?);
            }
        }
    }

    let mut cphi_lower: f64 = 0.0;
    let mut upper_ok = true;
    let mut worst = None;
    let mut worst_gap = f64::NEG_INFINITY;
    let mut fs: Vec<HomFn> = Vec::new();
    for x in &xs {
        fs.push(HomFn::Delta(x.clone()));
    }
    if xs.len() >= 2 {
        fs.push(HomFn::Delta(xs[0].clone()).abs().max(HomFn::Delta(xs[1].clone()).abs()));
        fs.push(HomFn::Delta(xs[0].clone()).min(HomFn::Delta(xs[1].clone()).scale(0.5)));
    }
    for (k, f) in fs.iter().enumerate() {
        let composed = compose_op(phi, f.clone())?;
        let lo = fbl_lower(&phi.source, &composed, p, budget, derive(seed, 41 + k as u64))?.lower;
        let fu = fbl_upper_value(e, f, p);
        if k < xs.len() {
            let n = e.norm_of(&xs[k].0);
            if n > 0.0 {
                cphi_lower = cphi_lower.max(lo / n);
            }
        }
        let rhs = est.upper * fu;
        if rhs.is_finite() {
            let ok = lo <= rhs * (1.0 + 1e-9) + 1e-9;
            upper_ok &= ok;
            if lo - rhs > worst_gap {
                worst_gap = lo - rhs;
                worst = Some((lo, rhs));
            }
        }
    }

    let mut reproduction: f64 = 0.0;
    if let Some(Witness::Tuple(t)) = &est.witness {
        let images: Vec<Functional> = t.iter().map(|y| phi.apply(y)).collect::<Result<_>>()?;
        let mut cands = xs.clone();
        if !images.is_empty() {
            if let Some(Witness::Vector(v)) = weak_p_of(e, &images, p, budget, seed)?.witness {
                cands.push(v);
            }
        }
        for x in &cands {
            let n = e.norm_of(&x.0);
            if n == 0.0 {
                continue;
            }
            let cd = compose_op(phi, HomFn::Delta(x.scaled(1.0 / n)))?;
            let mut s = 0.0;
            for y in t {
                s += cd.eval(&phi.source, y)?.abs().powf(p);
            }
            reproduction = reproduction.max(s.powf(1.0 / p));
        }
    }
    let rel = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12);
    Ok(CompNormReport {
        p,
        lower_direction_holds: rel(reproduction, est.lower, 1e-6) || est.lower == 0.0,
        directions_agree: rel(cphi_lower, est.lower, 1e-3),
        upper_direction_holds: upper_ok,
        worst_upper_case: worst,
        cphi_lower,
        delta_reproduction: reproduction,
        phi: est,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PMonotonicityReport {
    pub p: f64,
    pub q: f64,
    pub phi_p: NormEstimate,
    pub phi_q: NormEstimate,
    /// `phi_q.lower <= phi_p.upper` up to tolerance.
    pub passed: bool,
    /// `phi_q.lower <= phi_p.lower`, informational only.
    pub lower_vs_lower: bool,
}

/// Checks `||Phi||_q <= ||Phi||_p` for `p < q` as far as the bounds allow.
pub fn p_monotonicity_check(
    phi: &PhMap,
    p: f64,
    q: f64,
    budget: &Budget,
    seed: u64,
) -> Result<PMonotonicityReport> {
    check_exponent(p)?;
    check_exponent(q)?;
    if p >= q {
        return Err(Error::InvalidInput(format!("need p < q, got p = {p}, q = {q}")));
    }
    let a = phi_p_norm(phi, p, budget, seed)?;
    let b = phi_p_norm(phi, q, budget, seed)?;
    Ok(PMonotonicityReport {
        p,
        q,
        passed: b.lower <= a.upper + 1e-6 * a.upper.max(1.0),
        lower_vs_lower: b.lower <= a.lower + 1e-6 * a.lower.max(1.0),
        phi_p: a,
        phi_q: b,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    /// `min ||Phi u - Phi v|| / ||u - v||` over probed pairs.
    pub min_ratio: f64,
    pub pairs: usize,
    pub collision_count: usize,
    /// Pairs with (numerically) equal images, at most 64 listed.
    pub collisions: Vec<(Functional, Functional)>,
}

/// Probes injectivity on sphere samples, coordinate functionals and their
/// antipodes.
pub fn injectivity_probe(phi: &PhMap, samples: usize, seed: u64) -> Result<InjectivityReport> {
    let f = &phi.source;
    let mut pts = f.unit_coordinate_functionals();
    pts.extend(f.sample_dual_sphere(samples.max(2), seed));
    let n = pts.len();
    for i in 0..n {
        pts.push(pts[i].scaled(-1.0));
    }
    let images: Vec<Functional> = pts.iter().map(|u| phi.apply(u)).collect::<Result<_>>()?;
    let mut min_ratio = f64::INFINITY;
    let mut collisions = Vec::new();
    let mut count = 0;
    let mut pairs = 0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let du = f.dual_norm_of(&pts[i].sub(&pts[j]).0);
            if du <= 1e-12 {
                continue;
            }
            let di = phi.target.dual_norm_of(&images[i].sub(&images[j]).0);
            pairs += 1;
            min_ratio = min_ratio.min(di / du);
            if di <= 1e-12 {
                count += 1;
                if collisions.len() < 64 {
                    collisions.push((pts[i].clone(), pts[j].clone()));
                }
            }
        }
    }
    Ok(InjectivityReport {
        min_ratio,
        pairs,
        collision_count: count,
        collisions,
    })
}

/// `sum_j |x*(v)|^p` style helper reused by the verify suite.
pub fn image_p_value(phi: &PhMap, tuple: &[Functional], x: &Vector, p: f64) -> Result<f64> {
    let images: Vec<Functional> = tuple.iter().map(|y| phi.apply(y)).collect::<Result<_>>()?;
    Ok(p_value(&images, x, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y(c: &[f64]) -> Functional {
        Functional(c.to_vec())
    }

    #[test]
    fn apply_examples() {
        let l2 = Space::l2(2);
        let id = PhMap::identity(l2.clone());
        assert_eq!(id.apply(&y(&[1.0, -2.0])).unwrap(), y(&[1.0, -2.0]));
        let m = PhMap::modulus(l2.clone());
        assert_eq!(m.apply(&y(&[1.0, -2.0])).unwrap(), y(&[1.0, 2.0]));
        let r = PhMap::rank_one(HomFn::NormFn, y(&[1.0, 0.0]), l2.clone(), l2.clone()).unwrap();
        assert_eq!(r.apply(&y(&[3.0, 4.0])).unwrap(), y(&[5.0, 0.0]));
        assert!(id.apply(&y(&[1.0])).is_err());
    }

    #[test]
    fn adjoint_norms() {
        let b = Budget::default();
        let id = PhMap::identity(Space::l1(2));
        let e = phi_p_norm(&id, 1.0, &b, 0).unwrap();
        assert_eq!((e.lower, e.upper), (1.0, 1.0));
        let d = PhMap::adjoint(vec![vec![2.0, 0.0], vec![0.0, 1.0]], Space::l2(2), Space::l2(2))
            .unwrap();
        let e = phi_p_norm(&d, 2.0, &b, 0).unwrap();
        assert!((e.lower - 2.0).abs() < 1e-12);
        assert_eq!(e.method, Method::ExactSpectral);
    }

    #[test]
    fn modulus_norm_on_l1() {
        let b = Budget::default();
        for n in 1..=4 {
            let m = PhMap::modulus(Space::l1(n));
            let e = phi_p_norm(&m, 1.0, &b, 0).unwrap();
            assert!((e.upper - 1.0).abs() < 1e-12);
            assert!((e.lower - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn composition_examples() {
        let l2 = Space::l2(2);
        let s = vec![vec![1.0, 2.0], vec![0.0, -1.0]];
        let phi = PhMap::adjoint_of(&s, l2.clone(), l2.clone()).unwrap();
        let x = Vector(vec![0.5, 1.5]);
        let sx = Vector(vec![0.5 + 3.0, -1.5]);
        let c = compose_op(&phi, HomFn::Delta(x)).unwrap();
        for yy in l2.sample_dual_sphere(50, 1) {
            let a = c.eval(&l2, &yy).unwrap();
            let b = pairing_v(&yy, &sx);
            assert!((a - b).abs() < 1e-12);
        }
        let m = PhMap::modulus(l2.clone());
        let c = compose_op(&m, HomFn::delta(vec![0.0, 1.0])).unwrap();
        let abs = HomFn::delta(vec![0.0, 1.0]).abs();
        for yy in l2.sample_dual_sphere(50, 2) {
            assert_eq!(c.eval(&l2, &yy).unwrap(), abs.eval(&l2, &yy).unwrap());
        }
    }

    fn pairing_v(f: &Functional, v: &Vector) -> f64 {
        dot(&f.0, &v.0)
    }

    #[test]
    fn extraction() {
        let l2 = Space::l2(2);
        let mut action = BTreeMap::new();
        action.insert(0, HomFn::delta(vec![0.0, 1.0]));
        action.insert(1, HomFn::delta(vec![1.0, 0.0]));
        let phi = extract_phi(&l2, &l2, &action).unwrap();
        assert_eq!(phi.apply(&y(&[3.0, -7.0])).unwrap(), y(&[-7.0, 3.0]));
        action.remove(&1);
        let err = extract_phi(&l2, &l2, &action).unwrap_err();
        assert!(err.to_string().contains("e_1"));
    }

    #[test]
    fn linearity_examples() {
        let l2 = Space::l2(3);
        let phi = PhMap::adjoint(
            vec![vec![1.0, 2.0, 0.0], vec![0.0, 1.0, -1.0], vec![3.0, 0.0, 1.0]],
            l2.clone(),
            l2.clone(),
        )
        .unwrap();
        let r = linearity_report(&phi, 200, 0).unwrap();
        assert!(r.additivity_defect <= 1e-12 && r.homogeneity_defect <= 1e-12);
        let m = PhMap::modulus(Space::l1(3));
        let r = linearity_report(&m, 200, 0).unwrap();
        assert!((r.homogeneity_defect - 2.0).abs() < 1e-12);
        assert_eq!(r.quasilinear_bound_holds, Some(true));
    }

    #[test]
    fn inverse_and_injectivity() {
        let l2 = Space::l2(2);
        let phi = PhMap::adjoint(vec![vec![2.0, 1.0], vec![1.0, 1.0]], l2.clone(), l2.clone())
            .unwrap();
        let inv = phi.inverse().unwrap();
        let f = HomFn::delta(vec![1.0, -1.0]).abs().max(HomFn::delta(vec![0.3, 2.0]));
        let g = compose_op(&phi, compose_op(&inv, f.clone()).unwrap()).unwrap();
        for yy in l2.sample_dual_sphere(100, 3) {
            assert!((g.eval(&l2, &yy).unwrap() - f.eval(&l2, &yy).unwrap()).abs() < 1e-12);
        }
        assert!(injectivity_probe(&phi, 20, 0).unwrap().min_ratio > 0.0);
        let m = injectivity_probe(&PhMap::modulus(l2.clone()), 20, 0).unwrap();
        assert!(m.collisions.contains(&(y(&[1.0, 0.0]), y(&[-1.0, 0.0]))));
        let zero = PhMap::tabulated(vec![HomFn::zero(), HomFn::zero()], l2.clone(), l2).unwrap();
        let z = injectivity_probe(&zero, 10, 0).unwrap();
        assert_eq!(z.collision_count, z.pairs);
    }
}
