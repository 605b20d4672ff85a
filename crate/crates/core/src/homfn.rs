//! Positively homogeneous functions on `E*` as expression trees.
//!
//! Every node evaluates pointwise. The lattice operations `Sup`, `Inf` and
//! `Abs` are pointwise max, min and modulus, so a tree built from evaluation
//! functionals `Delta(x)` with these nodes is an element of the vector lattice
//! generated by the `delta_x`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, Error, Result};
use crate::estimate::{Budget, Method, NormEstimate, Witness};
use crate::phmaps::PhMap;
use crate::rng::{derive, seeded};
use crate::spaces::{dot, gaussian_direction, pairing, Functional, Space, Vector};

/// Relative tolerance used to decide whether a point lies on a ray.
pub const RAY_TOL: f64 = 1e-12;

/// A finite positive measure on the unit ball of `E`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<(f64, Vector)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(f64, Vector)>) -> Result<Self> {
        for (w, _) in &atoms {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "measure weights must be finite and nonnegative, got {w}"
                )));
            }
        }
        Ok(DiscreteMeasure { atoms })
    }

    /// Unit point mass at `x`.
    pub fn dirac(x: Vector) -> Self {
        DiscreteMeasure {
            atoms: vec![(1.0, x)],
        }
    }

    pub fn atoms(&self) -> &[(f64, Vector)] {
        &self.atoms
    }

    /// Total mass.
    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|(w, _)| w).sum()
    }

    /// Checks dimensions and that every atom lies in the closed unit ball.
    pub fn check_in_ball(&self, space: &Space) -> Result<()> {
        for (_, x) in &self.atoms {
            let n = space.norm(x)?;
            if n > 1.0 + 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "measure atom {:?} has norm {n} > 1",
                    x.0
                )));
            }
        }
        Ok(())
    }
}

/// A positively homogeneous function on the dual of some [`Space`].
///
/// The tree does not own its space; the space is passed to [`HomFn::eval`].
/// `Composed` is the exception that carries the map, and through it the space
/// its argument lives on.
#[derive(Clone, Debug, PartialEq)]
pub enum HomFn {
    /// `x* -> x*(x)`.
    Delta(Vector),
    /// `x* -> ||x*||`.
    NormFn,
    Scale(f64, Box<HomFn>),
    Sum(Vec<HomFn>),
    Sup(Vec<HomFn>),
    Inf(Vec<HomFn>),
    Abs(Box<HomFn>),
    /// `t` on the open ray `{t d : t > 0}`, zero elsewhere.
    Ray(Functional),
    /// `x* -> (sum_i w_i |x*(x_i)|^p)^(1/p)`.
    Mu { measure: DiscreteMeasure, p: f64 },
    /// `y* -> arg(map(y*))`.
    Composed { arg: Box<HomFn>, map: Box<PhMap> },
}

/// Coarse curvature class of a tree, used to decide when a maximum over
/// extreme points is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Curvature {
    Linear,
    Convex,
    Concave,
    Unknown,
}

impl Curvature {
    fn flip(self) -> Self {
        match self {
            Curvature::Convex => Curvature::Concave,
            Curvature::Concave => Curvature::Convex,
            c => c,
        }
    }

    fn is_convex(self) -> bool {
        matches!(self, Curvature::Linear | Curvature::Convex)
    }

    fn is_concave(self) -> bool {
        matches!(self, Curvature::Linear | Curvature::Concave)
    }
}

impl HomFn {
    pub fn delta(x: impl Into<Vector>) -> HomFn {
        HomFn::Delta(x.into())
    }

    /// The zero function.
    pub fn zero() -> HomFn {
        HomFn::Sum(Vec::new())
    }

    pub fn abs(self) -> HomFn {
        HomFn::Abs(Box::new(self))
    }

    pub fn scale(self, c: f64) -> HomFn {
        HomFn::Scale(c, Box::new(self))
    }

    pub fn sup(children: Vec<HomFn>) -> HomFn {
        HomFn::Sup(children)
    }

    pub fn inf(children: Vec<HomFn>) -> HomFn {
        HomFn::Inf(children)
    }

    pub fn sum(children: Vec<HomFn>) -> HomFn {
        HomFn::Sum(children)
    }

    pub fn ray(direction: impl Into<Functional>) -> HomFn {
        HomFn::Ray(direction.into())
    }

    pub fn mu(measure: DiscreteMeasure, p: f64) -> Result<HomFn> {
        check_exponent(p)?;
        Ok(HomFn::Mu { measure, p })
    }

    /// `self v other`.
    pub fn max(self, other: HomFn) -> HomFn {
        HomFn::Sup(vec![self, other])
    }

    /// `self ^ other`.
    pub fn min(self, other: HomFn) -> HomFn {
        HomFn::Inf(vec![self, other])
    }

    /// Pointwise value at `x`.
    pub fn eval(&self, space: &Space, x: &Functional) -> Result<f64> {
        space.check_functional(x)?;
        self.eval_in(space, x)
    }

    fn eval_in(&self, space: &Space, x: &Functional) -> Result<f64> {
        Ok(match self {
            HomFn::Delta(v) => {
                space.check_vector(v)?;
                pairing(x, v)
            }
            HomFn::NormFn => space.dual_norm_of(&x.0),
            HomFn::Scale(c, g) => c * g.eval_in(space, x)?,
            HomFn::Sum(cs) => {
                let mut s = 0.0;
                for c in cs {
                    s += c.eval_in(space, x)?;
                }
                s
            }
            HomFn::Sup(cs) => {
                let mut it = cs.iter();
                let first = it
                    .next()
                    .ok_or_else(|| Error::InvalidInput("sup of no arguments".into()))?;
                let mut m = first.eval_in(space, x)?;
                for c in it {
                    m = m.max(c.eval_in(space, x)?);
                }
                m
            }
            HomFn::Inf(cs) => {
                let mut it = cs.iter();
                let first = it
                    .next()
                    .ok_or_else(|| Error::InvalidInput("inf of no arguments".into()))?;
                let mut m = first.eval_in(space, x)?;
                for c in it {
                    m = m.min(c.eval_in(space, x)?);
                }
                m
            }
            HomFn::Abs(g) => g.eval_in(space, x)?.abs(),
            HomFn::Ray(d) => {
                space.check_functional(d)?;
                ray_value(d, x)
            }
            HomFn::Mu { measure, p } => {
                check_exponent(*p)?;
                let mut s = 0.0;
                for (w, a) in measure.atoms() {
                    space.check_vector(a)?;
                    s += w * pairing(x, a).abs().powf(*p);
                }
                s.powf(1.0 / p)
            }
            HomFn::Composed { arg, map } => {
                let y = map.apply(x)?;
                arg.eval_in(map.target(), &y)?
            }
        })
    }

    /// Curvature class, conservative: `Unknown` whenever convexity is not evident.
    pub fn curvature(&self) -> Curvature {
        match self {
            HomFn::Delta(_) => Curvature::Linear,
            HomFn::NormFn | HomFn::Mu { .. } => Curvature::Convex,
            HomFn::Ray(_) => Curvature::Unknown,
            HomFn::Scale(c, g) => {
                if *c >= 0.0 {
                    g.curvature()
                } else {
                    g.curvature().flip()
                }
            }
            HomFn::Sum(cs) => {
                let k: Vec<Curvature> = cs.iter().map(HomFn::curvature).collect();
                if k.iter().all(|c| *c == Curvature::Linear) {
                    Curvature::Linear
                } else if k.iter().all(|c| c.is_convex()) {
                    Curvature::Convex
                } else if k.iter().all(|c| c.is_concave()) {
                    Curvature::Concave
                } else {
                    Curvature::Unknown
                }
            }
            HomFn::Sup(cs) => {
                if cs.len() == 1 {
                    cs[0].curvature()
                } else if cs.iter().all(|c| c.curvature().is_convex()) {
                    Curvature::Convex
                } else {
                    Curvature::Unknown
                }
            }
            HomFn::Inf(cs) => {
                if cs.len() == 1 {
                    cs[0].curvature()
                } else if cs.iter().all(|c| c.curvature().is_concave()) {
                    Curvature::Concave
                } else {
                    Curvature::Unknown
                }
            }
            HomFn::Abs(g) => match g.curvature() {
                Curvature::Linear => Curvature::Convex,
                _ => Curvature::Unknown,
            },
            HomFn::Composed { arg, map } => {
                if map.is_linear() {
                    arg.curvature()
                } else {
                    Curvature::Unknown
                }
            }
        }
    }

    /// True when the tree contains a ray indicator outside composed subtrees.
    pub fn contains_ray(&self) -> bool {
        let mut found = false;
        self.walk(&mut |n| {
            if matches!(n, HomFn::Ray(_)) {
                found = true;
            }
        });
        found || self.contains_composed_ray()
    }

    fn contains_composed_ray(&self) -> bool {
        let mut found = false;
        self.walk(&mut |n| {
            if let HomFn::Composed { arg, .. } = n {
                found |= arg.contains_ray();
            }
        });
        found
    }

    /// Visits every node of this tree that lives on the same space (does not
    /// descend into the arguments of composed nodes).
    pub fn walk(&self, visit: &mut dyn FnMut(&HomFn)) {
        visit(self);
        match self {
            HomFn::Scale(_, g) | HomFn::Abs(g) => g.walk(visit),
            HomFn::Sum(cs) | HomFn::Sup(cs) | HomFn::Inf(cs) => {
                for c in cs {
                    c.walk(visit);
                }
            }
            _ => {}
        }
    }

    /// Vectors `x` of the `Delta(x)` leaves and measure atoms. Leaves under a
    /// composed adjoint are pulled back: `delta_x o S* = delta_{Sx}`.
    pub fn delta_vectors(&self) -> Vec<Vector> {
        let mut out = Vec::new();
        self.walk(&mut |n| match n {
            HomFn::Delta(v) => out.push(v.clone()),
            HomFn::Mu { measure, .. } => {
                out.extend(measure.atoms().iter().map(|(_, a)| a.clone()))
            }
            HomFn::Composed { arg, map } => {
                if let Some(m) = map.adjoint_matrix() {
                    for v in arg.delta_vectors() {
                        let cols = map.source().dim();
                        let sx = (0..cols)
                            .map(|j| m.iter().zip(&v.0).map(|(row, x)| row[j] * x).sum())
                            .collect();
                        out.push(Vector(sx));
                    }
                }
            }
            _ => {}
        });
        out
    }

    /// Checks leaf dimensions, exponents and nonempty lattice nodes against
    /// `space`, including the arguments of composed nodes.
    pub fn validate(&self, space: &Space) -> Result<()> {
        match self {
            HomFn::Delta(v) => space.check_vector(v),
            HomFn::NormFn => Ok(()),
            HomFn::Scale(c, g) => {
                if !c.is_finite() {
                    return Err(Error::InvalidInput(format!("scale factor {c} is not finite")));
                }
                g.validate(space)
            }
            HomFn::Abs(g) => g.validate(space),
            HomFn::Sum(cs) => cs.iter().try_for_each(|c| c.validate(space)),
            HomFn::Sup(cs) | HomFn::Inf(cs) => {
                if cs.is_empty() {
                    return Err(Error::InvalidInput("sup/inf needs at least one argument".into()));
                }
                cs.iter().try_for_each(|c| c.validate(space))
            }
            HomFn::Ray(d) => space.check_functional(d),
            HomFn::Mu { measure, p } => {
                check_exponent(*p)?;
                measure.atoms().iter().try_for_each(|(_, a)| space.check_vector(a))
            }
            HomFn::Composed { arg, map } => {
                if map.source() != space {
                    return Err(Error::InvalidInput(
                        "composed map source differs from the function's space".into(),
                    ));
                }
                arg.validate(map.target())
            }
        }
    }

    /// Directions of the ray indicators.
    pub fn ray_directions(&self) -> Vec<Functional> {
        let mut out = Vec::new();
        self.walk(&mut |n| {
            if let HomFn::Ray(d) = n {
                out.push(d.clone());
            }
        });
        out
    }

    /// True when the tree is the zero function by construction.
    pub fn is_structurally_zero(&self) -> bool {
        match self {
            HomFn::Delta(v) => v.is_zero(),
            HomFn::NormFn => false,
            HomFn::Scale(c, g) => *c == 0.0 || g.is_structurally_zero(),
            HomFn::Sum(cs) => cs.iter().all(HomFn::is_structurally_zero),
            HomFn::Sup(cs) | HomFn::Inf(cs) => {
                !cs.is_empty() && cs.iter().all(HomFn::is_structurally_zero)
            }
            HomFn::Abs(g) => g.is_structurally_zero(),
            HomFn::Ray(d) => d.is_zero(),
            HomFn::Mu { measure, .. } => measure
                .atoms()
                .iter()
                .all(|(w, a)| *w == 0.0 || a.is_zero()),
            HomFn::Composed { arg, .. } => arg.is_structurally_zero(),
        }
    }

    /// Maximum of `|f(lambda x) - lambda f(x)|` over seeded samples.
    pub fn homogeneity_defect(&self, space: &Space, samples: usize, seed: u64) -> Result<f64> {
        let mut err = None;
        let d = homogeneity_defect_of(
            |x| match self.eval(space, x) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            },
            space,
            samples,
            seed,
        );
        match err {
            Some(e) => Err(e),
            None => Ok(d),
        }
    }
}

fn ray_value(d: &Functional, x: &Functional) -> f64 {
    let nd = d.euclid();
    let nx = x.euclid();
    if nd == 0.0 || nx == 0.0 {
        return 0.0;
    }
    let dist = d
        .0
        .iter()
        .zip(&x.0)
        .map(|(a, b)| (b / nx - a / nd).powi(2))
        .sum::<f64>()
        .sqrt();
    if dist <= RAY_TOL {
        nx / nd
    } else {
        0.0
    }
}

/// Positive-homogeneity defect of an arbitrary evaluator: the largest
/// `|eval(lambda x) - lambda eval(x)|` over seeded `x` on the dual sphere and
/// `lambda` in `[0, 10]`. Every tenth sample uses `lambda = 0`.
pub fn homogeneity_defect_of(
    mut eval: impl FnMut(&Functional) -> f64,
    space: &Space,
    samples: usize,
    seed: u64,
) -> f64 {
    let xs = space.sample_dual_sphere(samples, seed);
    let mut rng = seeded(derive(seed, 1));
    let mut worst: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let lambda = if i % 10 == 0 {
            0.0
        } else {
            rng.random_range(0.0..10.0)
        };
        let d = (eval(&x.scaled(lambda)) - lambda * eval(x)).abs();
        worst = if d.is_nan() { f64::NAN } else { worst.max(d) };
    }
    worst
}

/// Candidate points of the dual ball for maximizing `|f|`.
fn dual_candidates(f: &HomFn, space: &Space, budget: &Budget, seed: u64) -> Vec<Functional> {
    let mut out = space.unit_coordinate_functionals();
    if let Ok(ext) = space.half_dual_extreme_points() {
        out.extend(ext.into_iter().take(4096));
    }
    for d in f.ray_directions() {
        let n = space.dual_norm_of(&d.0);
        if n > 0.0 {
            out.push(d.scaled(1.0 / n));
        }
    }
    for v in f.delta_vectors() {
        if let Ok(g) = space.norming_functional(&v) {
            out.push(g);
        }
    }
    out.extend(space.sample_dual_sphere(budget.samples.max(1) * 4, seed));
    out
}

/// Estimate of `sup { |f(x*)| : ||x*|| <= 1 }`.
///
/// The maximum over dual-ball extreme points is exact (and reported as
/// `exact_vertices`) when the tree is evidently convex or concave and the dual
/// ball is a polytope. Otherwise the lower bound comes from sampling plus local
/// ascent and the upper bound is either the same value (`heuristic_tight`) or
/// infinite when the tree contains a ray indicator that sampling can miss.
pub fn uniform_norm_ball(
    f: &HomFn,
    space: &Space,
    budget: &Budget,
    seed: u64,
) -> Result<NormEstimate> {
    if f.is_structurally_zero() {
        return Ok(NormEstimate::exact(0.0, Method::HeuristicTight, None));
    }
    let curv = f.curvature();
    if space.is_polytopal() && (curv.is_convex() || curv.is_concave()) {
        if let Ok(ext) = space.dual_extreme_points() {
            let mut best = 0.0;
            let mut arg = ext[0].clone();
            for x in ext {
                let v = f.eval(space, &x)?.abs();
                if v > best {
                    best = v;
                    arg = x;
                }
            }
            return Ok(NormEstimate::exact(
                best,
                Method::ExactVertices,
                Some(Witness::Functional(arg)),
            ));
        }
    }
    let cands = dual_candidates(f, space, budget, seed);
    let mut scored: Vec<(f64, Functional)> = Vec::with_capacity(cands.len());
    for x in cands {
        let v = f.eval(space, &x)?.abs();
        scored.push((v, x));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut best, mut arg) = scored[0].clone();
    let mut rng = seeded(derive(seed, 2));
    for (start_v, start) in scored.iter().take(budget.restarts.max(1)) {
        let (v, x) = local_ascent(
            |x| f.eval(space, x).map(f64::abs).unwrap_or(0.0),
            space,
            start.clone(),
            *start_v,
            budget.steps,
            &mut rng,
        );
        if v > best {
            best = v;
            arg = x;
        }
    }
    let upper = if f.contains_ray() { f64::INFINITY } else { best };
    let method = if f.contains_ray() {
        Method::SearchLower
    } else {
        Method::HeuristicTight
    };
    Ok(NormEstimate {
        lower: best,
        upper,
        method,
        witness: Some(Witness::Functional(arg)),
    })
}

/// Random-direction hill climbing on the dual sphere.
pub(crate) fn local_ascent(
    mut objective: impl FnMut(&Functional) -> f64,
    space: &Space,
    start: Functional,
    start_value: f64,
    steps: usize,
    rng: &mut crate::rng::Rng,
) -> (f64, Functional) {
    let mut x = start;
    let mut v = start_value;
    let mut eta = 0.1;
    for _ in 0..steps {
        let w = gaussian_direction(rng, space.dim());
        let wn = space.dual_norm_of(&w);
        let y: Vec<f64> = x.0.iter().zip(&w).map(|(a, b)| a + eta * b / wn).collect();
        let n = space.dual_norm_of(&y);
        if n == 0.0 {
            continue;
        }
        let y = Functional(y.into_iter().map(|a| a / n).collect());
        let vy = objective(&y);
        if vy > v {
            v = vy;
            x = y;
            eta = (eta * 1.5).min(0.5);
        } else {
            eta *= 0.8;
            if eta < 1e-9 {
                eta = 0.1;
            }
        }
    }
    (v, x)
}

/// The lattice expression over a one-dimensional space that agrees with the
/// positively homogeneous function taking the values `f1 = f(1)` and
/// `fm1 = f(-1)`.
pub fn dim1_representation(f1: f64, fm1: f64) -> HomFn {
    let right = HomFn::delta(vec![f1]);
    let left = HomFn::delta(vec![-fm1]);
    if f1 == -fm1 {
        right
    } else if f1 > -fm1 {
        right.max(left)
    } else {
        right.min(left)
    }
}

/// Parameters of [`classify_finite_dim`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Probe {
    /// Random anchor points on the dual sphere.
    pub samples: usize,
    /// Perturbation radii, largest first.
    pub radii: Vec<f64>,
    /// Jumps at least this large that persist across radii mark a discontinuity.
    pub jump_threshold: f64,
    /// Sampled values above this magnitude flag the function as unbounded.
    pub bound_cap: f64,
    /// Random perturbation directions per anchor and radius.
    pub directions: usize,
    pub seed: u64,
}

impl Default for Probe {
    fn default() -> Self {
        Probe {
            samples: 256,
            radii: vec![1e-1, 1e-2, 1e-3, 1e-4],
            jump_threshold: 1e-3,
            bound_cap: 1e12,
            directions: 8,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuityClass {
    ContinuousOnSphere,
    BoundedDiscontinuous,
    UnboundedFlag,
}

/// Outcome of the continuity probe. It is evidence from finitely many
/// samples, not a proof.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: ContinuityClass,
    /// Largest sampled `|f|` on the anchors.
    pub sup_sampled: f64,
    /// Empirical modulus of continuity `(r, omega(r))`.
    pub modulus: Vec<(f64, f64)>,
    /// Anchor with the most persistent jump, when discontinuous.
    pub jump_point: Option<Functional>,
    /// Size of that jump at the smallest radius.
    pub jump: f64,
}

/// Finite-dimensional continuity probe of `f` restricted to the dual ball.
///
/// Anchors are the ray directions of the tree (as given when inside the dual
/// ball), the dual-ball extreme points, and seeded sphere samples. For each
/// anchor `a` and radius `r` the local jump is the largest `|f(a + r w / 2) - f(a)|`
/// over random unit directions `w`. A point is discontinuous when its jump is
/// at least the threshold at every radius and does not shrink by more than half
/// from the largest to the smallest radius.
pub fn classify_finite_dim(f: &HomFn, space: &Space, probe: &Probe) -> Result<Classification> {
    let mut anchors: Vec<Functional> = Vec::new();
    for d in f.ray_directions() {
        let n = space.dual_norm_of(&d.0);
        if n > 0.0 {
            anchors.push(if n <= 1.0 { d.clone() } else { d.scaled(1.0 / n) });
        }
    }
    if let Ok(ext) = space.dual_extreme_points() {
        anchors.extend(ext.into_iter().take(1024));
    }
    anchors.extend(space.sample_dual_sphere(probe.samples, probe.seed));

    let mut sup: f64 = 0.0;
    for a in &anchors {
        let v = f.eval(space, a)?;
        if !v.is_finite() || v.abs() > probe.bound_cap {
            return Ok(Classification {
                class: ContinuityClass::UnboundedFlag,
                sup_sampled: v.abs(),
                modulus: Vec::new(),
                jump_point: Some(a.clone()),
                jump: f64::INFINITY,
            });
        }
        sup = sup.max(v.abs());
    }

    let mut rng = seeded(derive(probe.seed, 3));
    let mut modulus = vec![0.0f64; probe.radii.len()];
    let mut jump_point = None;
    let mut jump: f64 = 0.0;
    for a in &anchors {
        let fa = f.eval(space, a)?;
        let mut local = Vec::with_capacity(probe.radii.len());
        for (k, r) in probe.radii.iter().enumerate() {
            let mut m: f64 = 0.0;
            for _ in 0..probe.directions {
                let w = gaussian_direction(&mut rng, space.dim());
                let wn = space.dual_norm_of(&w);
                let y = Functional(
                    a.0.iter()
                        .zip(&w)
                        .map(|(x, d)| x + 0.5 * r * d / wn)
                        .collect(),
                );
                m = m.max((f.eval(space, &y)? - fa).abs());
            }
            modulus[k] = modulus[k].max(m);
            local.push(m);
        }
        if let (Some(first), Some(last)) = (local.first(), local.last()) {
            let persistent = local.iter().all(|j| *j >= probe.jump_threshold) && *last >= 0.5 * first;
            if persistent && *last > jump {
                jump = *last;
                jump_point = Some(a.clone());
            }
        }
    }
    let class = if jump_point.is_some() {
        ContinuityClass::BoundedDiscontinuous
    } else {
        ContinuityClass::ContinuousOnSphere
    };
    Ok(Classification {
        class,
        sup_sampled: sup,
        modulus: probe.radii.iter().copied().zip(modulus).collect(),
        jump_point,
        jump,
    })
}

/// Inner product helper re-exported for tests and witnesses.
pub fn pair(x: &Functional, v: &Vector) -> f64 {
    dot(&x.0, &v.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(c: &[f64]) -> Functional {
        Functional(c.to_vec())
    }

    #[test]
    fn eval_examples() {
        let l1 = Space::l1(2);
        let d = HomFn::delta(vec![1.0, 2.0]);
        assert_eq!(d.eval(&l1, &x(&[3.0, -1.0])).unwrap(), 1.0);

        let f = HomFn::delta(vec![1.0, 0.0])
            .abs()
            .max(HomFn::delta(vec![0.0, 1.0]).abs());
        assert_eq!(f.eval(&l1, &x(&[0.3, -0.8])).unwrap(), 0.8);

        let l2 = Space::l2(2);
        let r = HomFn::ray(vec![0.5, 0.0]);
        assert_eq!(r.eval(&l2, &x(&[1.0, 0.0])).unwrap(), 2.0);
        assert_eq!(r.eval(&l2, &x(&[1.0, 0.001])).unwrap(), 0.0);
        assert_eq!(r.eval(&l2, &x(&[-1.0, 0.0])).unwrap(), 0.0);

        let mu = DiscreteMeasure::new(vec![
            (1.0, Vector(vec![1.0, 0.0])),
            (1.0, Vector(vec![0.0, 1.0])),
        ])
        .unwrap();
        let m = HomFn::mu(mu, 2.0).unwrap();
        assert!((m.eval(&l2, &x(&[3.0, 4.0])).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn eval_errors() {
        let l2 = Space::l2(2);
        assert!(HomFn::NormFn.eval(&l2, &x(&[1.0])).is_err());
        assert!(HomFn::delta(vec![1.0]).eval(&l2, &x(&[1.0, 0.0])).is_err());
        let bad = HomFn::Mu {
            measure: DiscreteMeasure::dirac(Vector(vec![1.0, 0.0])),
            p: 0.5,
        };
        assert_eq!(
            bad.eval(&l2, &x(&[1.0, 0.0])),
            Err(Error::InvalidExponent(0.5))
        );
        assert!(HomFn::mu(DiscreteMeasure::dirac(Vector(vec![1.0, 0.0])), 0.9).is_err());
        assert!(DiscreteMeasure::new(vec![(-1.0, Vector(vec![1.0, 0.0]))]).is_err());
        assert!(HomFn::Sup(vec![]).eval(&l2, &x(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn homogeneity_defects() {
        let l2 = Space::l2(3);
        let f = HomFn::delta(vec![1.0, -2.0, 0.5])
            .abs()
            .min(HomFn::delta(vec![0.0, 1.0, 1.0]))
            .max(HomFn::delta(vec![3.0, 0.0, 0.0]).scale(-0.5));
        assert!(f.homogeneity_defect(&l2, 2000, 1).unwrap() <= 1e-9);
        assert!(HomFn::NormFn.homogeneity_defect(&l2, 2000, 2).unwrap() <= 1e-12);
        // an evaluator that adds one cannot vanish at the origin
        let bad = homogeneity_defect_of(
            |y| HomFn::NormFn.eval(&l2, y).unwrap() + 1.0,
            &l2,
            100,
            3,
        );
        assert!(bad >= 0.9);
    }

    #[test]
    fn uniform_norm_examples() {
        let b = Budget::default();
        let l1 = Space::l1(2);
        let d = HomFn::delta(vec![1.0, -2.0]);
        let e = uniform_norm_ball(&d, &l1, &b, 0).unwrap();
        assert_eq!(e.method, Method::ExactVertices);
        assert!((e.lower - 3.0).abs() < 1e-12);

        let l2 = Space::l2(3);
        let e = uniform_norm_ball(&HomFn::NormFn, &l2, &b, 0).unwrap();
        assert!((e.lower - 1.0).abs() < 1e-9);

        let f = HomFn::delta(vec![1.0, 0.0])
            .abs()
            .max(HomFn::delta(vec![0.0, 1.0]).abs());
        let e = uniform_norm_ball(&f, &l1, &b, 0).unwrap();
        assert!((e.lower - 1.0).abs() < 1e-9);
        assert!(e.is_exact());

        // Euclidean delta: ascent reaches the norm
        let d = HomFn::delta(vec![1.0, -2.0, 2.0]);
        let e = uniform_norm_ball(&d, &l2, &b, 4).unwrap();
        assert!((e.lower - 3.0).abs() < 3e-2, "{}", e.lower);
        assert_eq!(e.method, Method::HeuristicTight);
    }

    #[test]
    fn uniform_norm_of_min_is_not_at_vertices() {
        // |x1| ^ |x2| on the l1 dual ball (E = linf) peaks at (1/2, 1/2), not at a vertex.
        let linf = Space::linf(2);
        let f = HomFn::delta(vec![1.0, 0.0])
            .abs()
            .min(HomFn::delta(vec![0.0, 1.0]).abs());
        let e = uniform_norm_ball(&f, &linf, &Budget::default(), 9).unwrap();
        assert_eq!(e.method, Method::HeuristicTight);
        assert!(e.lower > 0.45 && e.lower <= 0.5 + 1e-12, "{}", e.lower);
    }

    #[test]
    fn ray_trees_have_no_certified_upper() {
        let l2 = Space::l2(2);
        let e = uniform_norm_ball(&HomFn::ray(vec![0.5, 0.0]), &l2, &Budget::light(), 1).unwrap();
        assert!((e.lower - 2.0).abs() < 1e-9);
        assert!(e.upper.is_infinite());
    }

    #[test]
    fn dim1_examples() {
        let s = Space::l2(1);
        let f = dim1_representation(2.0, 1.0);
        assert_eq!(
            f,
            HomFn::Sup(vec![HomFn::delta(vec![2.0]), HomFn::delta(vec![-1.0])])
        );
        assert_eq!(f.eval(&s, &x(&[-1.0])).unwrap(), 1.0);
        assert_eq!(f.eval(&s, &x(&[1.0])).unwrap(), 2.0);
        assert_eq!(dim1_representation(1.0, -1.0), HomFn::delta(vec![1.0]));
        let z = dim1_representation(0.0, 0.0);
        for t in [-3.0, 0.0, 2.5] {
            assert_eq!(z.eval(&s, &x(&[t])).unwrap(), 0.0);
        }
        let g = dim1_representation(-1.0, -2.0);
        assert!(matches!(g, HomFn::Inf(_)));
        assert_eq!(g.eval(&s, &x(&[1.0])).unwrap(), -1.0);
        assert_eq!(g.eval(&s, &x(&[-1.0])).unwrap(), -2.0);
    }

    #[test]
    fn classification_examples() {
        let l2 = Space::l2(2);
        let p = Probe::default();
        let c = classify_finite_dim(&HomFn::delta(vec![1.0, 2.0]), &l2, &p).unwrap();
        assert_eq!(c.class, ContinuityClass::ContinuousOnSphere);
        let c = classify_finite_dim(&HomFn::NormFn, &l2, &p).unwrap();
        assert_eq!(c.class, ContinuityClass::ContinuousOnSphere);
        let c = classify_finite_dim(&HomFn::ray(vec![0.5, 0.0]), &l2, &p).unwrap();
        assert_eq!(c.class, ContinuityClass::BoundedDiscontinuous);
        assert!((c.jump - 1.0).abs() < 1e-12);
        assert_eq!(c.jump_point, Some(x(&[0.5, 0.0])));
        let huge = HomFn::delta(vec![1e13, 0.0]);
        let c = classify_finite_dim(&huge, &l2, &p).unwrap();
        assert_eq!(c.class, ContinuityClass::UnboundedFlag);
    }

    #[test]
    fn curvature_classes() {
        let d = HomFn::delta(vec![1.0]);
        assert_eq!(d.curvature(), Curvature::Linear);
        assert_eq!(d.clone().abs().curvature(), Curvature::Convex);
        assert_eq!(d.clone().abs().scale(-1.0).curvature(), Curvature::Concave);
        assert_eq!(
            d.clone().abs().min(d.clone()).curvature(),
            Curvature::Unknown
        );
        assert_eq!(HomFn::ray(vec![1.0]).curvature(), Curvature::Unknown);
    }
}
