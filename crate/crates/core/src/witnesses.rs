//! Finite realizations of separating constructions: suprema of scaled
//! evaluation functionals, a divergent witness on `l_2^N`, a series of
//! moduli over a basis with a kernel solver, the gap construction that keeps
//! an ideal function away from the lattice generated by a subspace, and
//! functions induced by discrete measures.
//!
//! Every certificate value is recomputable from raw evaluations.

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{check_exponent, Error, Result};
use crate::estimate::Budget;
use crate::homfn::{DiscreteMeasure, HomFn};
use crate::spaces::{dot, Functional, Space, Vector};
use crate::summing::weak_p_of;

/// Largest dimension for which the witness functions are materialized as
/// trees; above it the report carries certificates only.
pub const TREE_DIM_CAP: usize = 512;

/// A construction together with its numerical certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub construction: String,
    pub space: Space,
    pub parameters: Value,
    /// `(label, value)` pairs in construction order.
    pub certificate: Vec<(String, f64)>,
    #[serde(serialize_with = "serialize_opt_fn")]
    pub f: Option<HomFn>,
}

fn serialize_opt_fn<S: serde::Serializer>(f: &Option<HomFn>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match f {
        Some(f) => crate::ast::as_ast::serialize(f, s),
        None => s.serialize_none(),
    }
}

impl WitnessReport {
    /// The certificate value with this label.
    pub fn get(&self, label: &str) -> Option<f64> {
        self.certificate
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| *v)
    }
}

/// `sup_n |delta_{s_n x_n}|`.
pub fn sup_deltas(space: &Space, vectors: &[Vector], scales: &[f64]) -> Result<HomFn> {
    if vectors.len() != scales.len() {
        return Err(Error::InvalidInput(format!(
            "{} vectors but {} scales",
            vectors.len(),
            scales.len()
        )));
    }
    let mut terms = Vec::with_capacity(vectors.len());
    for (x, s) in vectors.iter().zip(scales) {
        space.check_vector(x)?;
        if !(s.is_finite() && *s >= 0.0) {
            return Err(Error::InvalidInput(format!("scale {s} must be finite and nonnegative")));
        }
        terms.push(HomFn::Delta(x.scaled(*s)).abs());
    }
    Ok(match terms.len() {
        0 => HomFn::zero(),
        1 => terms.pop().expect("one term"),
        _ => HomFn::Sup(terms),
    })
}

/// Weights `a_n = ||x_n*||` and scales `s_n` of the divergent witness.
///
/// For `p < 2`: `a_n = n^(-1/p)` and `s_n = log(n + 1)^(-1/p)`, so
/// `sum_n s_n^p a_n^p = sum_n 1 / (n log(n + 1))` diverges while `(a_n)` lies in
/// `l_r`, `r = 2p / (2 - p)`. For `p >= 2`: `a_n = 1` and `s_n = n^(-1/(2p))`.
fn divergence_sequences(p: f64, n: usize) -> (f64, f64) {
    let k = n as f64;
    if p < 2.0 {
        (k.powf(-1.0 / p), (k + 1.0).ln().powf(-1.0 / p))
    } else {
        (1.0, k.powf(-1.0 / (2.0 * p)))
    }
}

/// `L(m) = (sum_{k <= m} s_k^p |x_k*(x_k)|^p)^(1/p)` for the divergent witness.
pub fn divergence_partial_sum(p: f64, m: usize) -> f64 {
    (1..=m)
        .map(|k| {
            let (a, s) = divergence_sequences(p, k);
            (s * a).powf(p)
        })
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Exact weak p-norm of the orthogonal tuple `(a_n e_n*)_{n <= N}` on `l_2^N`.
fn divergence_k(p: f64, n: usize) -> f64 {
    if p >= 2.0 {
        (1..=n).map(|k| divergence_sequences(p, k).0).fold(0.0, f64::max)
    } else {
        let r = 2.0 * p / (2.0 - p);
        (1..=n)
            .map(|k| divergence_sequences(p, k).0.powf(r))
            .sum::<f64>()
            .powf(1.0 / r)
    }
}

/// The truncated witness `f = sup_n |delta_{s_n e_n}|` on `l_2^N` built from a
/// weakly p-summable sequence `x_n* = a_n e_n*`; its FBL^p norm is at least
/// `L(N) / K`, and `L(m)` is unbounded in `m`.
pub fn divergence_witness(n: usize, p: f64, seed: u64) -> Result<WitnessReport> {
    let checkpoints: Vec<usize> = [10, 100, 1000].into_iter().filter(|m| *m < n).chain([n]).collect();
    divergence_witness_at(n, p, seed, &checkpoints)
}

/// [`divergence_witness`] with caller-chosen checkpoints `m <= N` for `L(m)`.
pub fn divergence_witness_at(n: usize, p: f64, seed: u64, checkpoints: &[usize]) -> Result<WitnessReport> {
    check_exponent(p)?;
    if n < 2 {
        return Err(Error::InvalidInput(format!("truncation N = {n} must be at least 2")));
    }
    if let Some(m) = checkpoints.iter().find(|m| **m == 0 || **m > n) {
        return Err(Error::InvalidInput(format!("checkpoint {m} outside 1..={n}")));
    }
    let space = Space::l2(n);
    let k = divergence_k(p, n);
    let mut certificate = vec![("K".to_string(), k)];
    // one pass over the partial sums
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut acc = 0.0;
    let mut next = 1;
    for m in &sorted {
        while next <= *m {
            let (a, s) = divergence_sequences(p, next);
            acc += (s * a).powf(p);
            next += 1;
        }
        certificate.push((format!("L({m})"), acc.powf(1.0 / p)));
    }
    let last = certificate.last().expect("at least one checkpoint").1;
    certificate.push(("L(N)/K".to_string(), last / k));
    let f = if n <= TREE_DIM_CAP {
        let vectors: Vec<Vector> = (0..n).map(|i| Vector::unit(n, i)).collect();
        let scales: Vec<f64> = (1..=n).map(|i| divergence_sequences(p, i).1).collect();
        Some(sup_deltas(&space, &vectors, &scales)?)
    } else {
        None
    };
    Ok(WitnessReport {
        construction: "divergence".into(),
        space,
        parameters: json!({
            "N": n,
            "p": p,
            "seed": seed,
            "checkpoints": sorted,
            "weights": if p < 2.0 { "a_n = n^(-1/p)" } else { "a_n = 1" },
            "scales": if p < 2.0 { "s_n = log(n+1)^(-1/p)" } else { "s_n = n^(-1/(2p))" },
        }),
        certificate,
        f,
    })
}

/// The normalized tuple `(a_n e_n* / K)_{n <= m}` on `l_2^N`; feasible for the
/// FBL^p norm, and the divergent witness takes the value `L(m) / K` on it.
pub fn divergence_tuple(n: usize, p: f64, m: usize) -> Vec<Functional> {
    let k = divergence_k(p, n);
    (1..=m.min(n))
        .map(|i| Functional::unit(n, i - 1).scaled(divergence_sequences(p, i).0 / k))
        .collect()
}

fn basis_matrix(basis: &[Vector]) -> DMatrix<f64> {
    let n = basis[0].dim();
    DMatrix::from_fn(n, basis.len(), |i, j| basis[j].0[i])
}

fn check_basis(space: &Space, basis: &[Vector]) -> Result<()> {
    if basis.is_empty() {
        return Err(Error::InvalidInput("empty basis".into()));
    }
    for b in basis {
        space.check_vector(b)?;
        let nb = space.norm_of(&b.0);
        if (nb - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("basis vector has norm {nb}, expected 1")));
        }
    }
    let sv = basis_matrix(basis).singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if basis.len() > space.dim() || smin <= 1e-9 * smax.max(1.0) {
        return Err(Error::InvalidInput("basis vectors are linearly dependent".into()));
    }
    Ok(())
}

/// `f = sum_n |delta_{b_n}| / 2^n` over normalized, independent `b_1, b_2, ...`.
pub fn series_witness(space: &Space, basis: &[Vector]) -> Result<HomFn> {
    check_basis(space, basis)?;
    let mut w = 1.0;
    Ok(HomFn::Sum(
        basis
            .iter()
            .map(|b| {
                w *= 0.5;
                HomFn::Delta(b.clone()).abs().scale(w)
            })
            .collect(),
    ))
}

/// Coordinate functionals `b_k*` of a basis of the whole space:
/// `b_k*(b_n) = 1` if `k = n`, else `0`.
pub fn coordinate_functionals(space: &Space, basis: &[Vector]) -> Result<Vec<Functional>> {
    check_basis(space, basis)?;
    if basis.len() != space.dim() {
        return Err(Error::InvalidInput(format!(
            "need {} basis vectors, got {}",
            space.dim(),
            basis.len()
        )));
    }
    let inv = basis_matrix(basis)
        .try_inverse()
        .ok_or_else(|| Error::Numerical("basis matrix is singular".into()))?;
    Ok((0..basis.len())
        .map(|k| Functional(inv.row(k).iter().copied().collect()))
        .collect())
}

/// A nonzero `x* = sum_k t_k b_k*` vanishing on every obstacle `x_j`.
///
/// With `m` obstacles and `m + 1` functionals the homogeneous system
/// `sum_k b_k*(x_j) t_k = 0` has a nontrivial solution; it is taken as the
/// right singular vector of the smallest singular value, normalized to
/// `||t||_2 = 1` with its first nonzero entry positive.
pub fn kernel_witness(space: &Space, obstacles: &[Vector], basis_funcs: &[Functional]) -> Result<Functional> {
    let m = obstacles.len();
    if basis_funcs.len() != m + 1 {
        return Err(Error::InvalidInput(format!(
            "{} obstacles need {} functionals, got {}",
            m,
            m + 1,
            basis_funcs.len()
        )));
    }
    for x in obstacles {
        space.check_vector(x)?;
    }
    for b in basis_funcs {
        space.check_functional(b)?;
    }
    if m == 0 {
        return Ok(basis_funcs[0].clone());
    }
    let a = DMatrix::from_fn(m + 1, m + 1, |j, k| {
        if j < m {
            dot(&basis_funcs[k].0, &obstacles[j].0)
        } else {
            0.0
        }
    });
    let svd = a.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
    let mut t: Vec<f64> = vt.row(k).iter().copied().collect();
    let nt = t.iter().map(|a| a * a).sum::<f64>().sqrt();
    let sign = t.iter().find(|a| a.abs() > 1e-12).map_or(1.0, |a| a.signum());
    for a in &mut t {
        *a *= sign / nt;
    }
    let mut x = vec![0.0; space.dim()];
    for (tk, b) in t.iter().zip(basis_funcs) {
        for (xi, bi) in x.iter_mut().zip(&b.0) {
            *xi += tk * bi;
        }
    }
    let x = Functional(x);
    if space.dual_norm_of(&x.0) <= 1e-12 {
        return Err(Error::Numerical("basis functionals are linearly dependent".into()));
    }
    let residual = obstacles
        .iter()
        .map(|o| dot(&x.0, &o.0).abs())
        .fold(0.0, f64::max);
    if residual > 1e-9 {
        return Err(Error::Numerical(format!("kernel residual {residual} exceeds 1e-9")));
    }
    Ok(x)
}

/// Checks that `h` depends only on evaluations at vectors of
/// `W_m = span(e_1, ..., e_{m-1})`, the common kernel of `x_n*` for `n >= m`.
fn check_supported(h: &HomFn, m: usize) -> Result<()> {
    let mut err = None;
    h.walk(&mut |node| {
        let bad = match node {
            HomFn::NormFn | HomFn::Ray(_) | HomFn::Composed { .. } => {
                Some("h may only use delta, mu, scale, sum, sup, inf and abs nodes".to_string())
            }
            HomFn::Delta(v) => outside(v, m),
            HomFn::Mu { measure, .. } => measure.atoms().iter().find_map(|(_, a)| outside(a, m)),
            _ => None,
        };
        if let Some(b) = bad {
            err.get_or_insert(b);
        }
    });
    match err {
        Some(e) => Err(Error::InvalidInput(e)),
        None => Ok(()),
    }
}

fn outside(v: &Vector, m: usize) -> Option<String> {
    let start = m.saturating_sub(1);
    v.0.iter().enumerate().skip(start).find(|(_, a)| **a != 0.0).map(|(i, _)| {
        format!(
            "h uses a vector with nonzero coordinate {} (1-based), outside W_{m} = span(e_1..e_{})",
            i + 1,
            m as i64 - 1
        )
    })
}

/// The gap construction on `E = l_2^N` for `p < q`:
/// `x_1 = e_1`, `x_{n+1}* = n^(-1/q) e_{n+1}*`, `s_n = n^(1/q - 1/p)`,
/// `f = |delta_{x_1}| ^ sup_n s_n |delta_{x_{n+1}}|`, and the functionals
/// `z_j* = m^(-1/p) e_1* + x_{m+j}*` for `j = 1..m`.
///
/// For every `h` built from evaluations at vectors of `W_m`,
/// `h(z_j*) = m^(-1/p) h(x_1*)`, which yields
/// `||f - h|| >= (K + 2)^(-1) (sum_j |f(z_j*) - m^(-1/p) f(x_1*)|^p)^(1/p)`
/// with `K` the weak p-norm of `(x_2*, ..., x_N*)`.
pub fn gap_witness(n: usize, p: f64, q: f64, m: usize, h: Option<&HomFn>) -> Result<WitnessReport> {
    check_exponent(p)?;
    check_exponent(q)?;
    if q <= p {
        return Err(Error::InvalidInput(format!("need q > p, got p = {p}, q = {q}")));
    }
    if m == 0 {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    if n < 2 * m + 2 {
        return Err(Error::InvalidInput(format!("need N >= 2m + 2 = {}, got {n}", 2 * m + 2)));
    }
    let space = Space::l2(n);
    let zero = HomFn::zero();
    let h = h.unwrap_or(&zero);
    h.validate(&space)?;
    check_supported(h, m)?;

    let xstar = |k: usize| -> Functional {
        // x_k* for k >= 2
        Functional::unit(n, k - 1).scaled(((k - 1) as f64).powf(-1.0 / q))
    };
    let x1 = Functional::unit(n, 0);
    let g_terms: Vec<HomFn> = (1..n)
        .map(|i| {
            let s = (i as f64).powf(1.0 / q - 1.0 / p);
            HomFn::Delta(Vector::unit(n, i)).abs().scale(s)
        })
        .collect();
    let f = HomFn::Delta(Vector::unit(n, 0)).abs().min(HomFn::Sup(g_terms));

    let rest: Vec<Functional> = (2..=n).map(xstar).collect();
    let budget = Budget::default();
    let k = weak_p_of(&space, &rest, p, &budget, 0)?.upper;
    let c = (m as f64).powf(-1.0 / p);
    let z: Vec<Functional> = (1..=m).map(|j| x1.scaled(c).add(&xstar(m + j))).collect();
    let weak_z = weak_p_of(&space, &z, p, &budget, 0)?.upper;

    let f_x1 = f.eval(&space, &x1)?;
    let h_x1 = h.eval(&space, &x1)?;
    let mut certificate = vec![("K".to_string(), k), ("f(x_1*)".to_string(), f_x1)];
    let mut sum = 0.0;
    let mut direct = 0.0;
    let mut identity_defect: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    for (j, zj) in z.iter().enumerate() {
        let fz = f.eval(&space, zj)?;
        let hz = h.eval(&space, zj)?;
        let floor = c.min(((m + j) as f64).powf(-1.0 / p));
        certificate.push((format!("f(z_{}*)", j + 1), fz));
        certificate.push((format!("floor_{}", j + 1), floor));
        min_margin = min_margin.min(fz - floor);
        identity_defect = identity_defect.max((hz - c * h_x1).abs());
        sum += (fz - c * f_x1).abs().powf(p);
        direct += (fz - hz).abs().powf(p);
    }
    let bound = sum.powf(1.0 / p) / (k + 2.0);
    certificate.push(("weak_p(z)".to_string(), weak_z));
    certificate.push(("h_identity_defect".to_string(), identity_defect));
    certificate.push(("floor_margin".to_string(), min_margin));
    certificate.push(("bound".to_string(), bound));
    certificate.push(("direct_bound".to_string(), direct.powf(1.0 / p) / weak_z));
    certificate.push((
        "uniform_floor".to_string(),
        2f64.powf(-(p + 1.0) / p) / (k + 2.0),
    ));
    Ok(WitnessReport {
        construction: "gap".into(),
        space,
        parameters: json!({
            "N": n,
            "p": p,
            "q": q,
            "m": m,
            "h": crate::ast::homfn_to_json(h),
        }),
        certificate,
        f: if n <= TREE_DIM_CAP { Some(f) } else { None },
    })
}

/// The function `x* -> (sum_i w_i |x*(x_i)|^p)^(1/p)` of a discrete measure on
/// the unit ball.
pub fn mu_induced(space: &Space, measure: DiscreteMeasure, p: f64) -> Result<HomFn> {
    check_exponent(p)?;
    measure.check_in_ball(space)?;
    HomFn::mu(measure, p)
}
