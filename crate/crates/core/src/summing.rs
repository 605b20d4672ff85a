//! Weak p-summing norms of finite tuples of functionals:
//! `||(x_j*)||_{p,weak} = sup_{||x|| <= 1} (sum_j |x_j*(x)|^p)^(1/p)`.

use std::sync::Mutex;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, Error, Result};
use crate::estimate::{Budget, Method, NormEstimate, Witness};
use crate::rng::derive;
use crate::spaces::{dot, Functional, Space, Vector};

/// Default largest tuple accepted by [`weak_1_norm_signs`].
pub const SIGN_CAP: usize = 20;

/// A nonempty tuple of functionals of a common dimension.
///
/// Tuples are immutable; exact weak-norm values are cached per space and exponent.
#[derive(Debug)]
pub struct FuncTuple {
    funcs: Vec<Functional>,
    cache: Mutex<Vec<(Space, u64, NormEstimate)>>,
}

impl Clone for FuncTuple {
    fn clone(&self) -> Self {
        FuncTuple {
            funcs: self.funcs.clone(),
            cache: Mutex::new(self.cache.lock().expect("cache lock").clone()),
        }
    }
}

impl PartialEq for FuncTuple {
    fn eq(&self, other: &Self) -> bool {
        self.funcs == other.funcs
    }
}

impl Serialize for FuncTuple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.funcs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FuncTuple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let funcs = Vec::<Functional>::deserialize(d)?;
        FuncTuple::new(funcs).map_err(serde::de::Error::custom)
    }
}

impl FuncTuple {
    pub fn new(funcs: Vec<Functional>) -> Result<Self> {
        let first = funcs.first().ok_or(Error::EmptyTuple)?;
        let dim = first.dim();
        for f in &funcs {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: f.dim(),
                });
            }
        }
        Ok(FuncTuple {
            funcs,
            cache: Mutex::new(Vec::new()),
        })
    }

    pub fn funcs(&self) -> &[Functional] {
        &self.funcs
    }

    pub fn len(&self) -> usize {
        self.funcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.funcs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.funcs[0].dim()
    }

    /// Weak p-norm, using the cache for exact values.
    pub fn weak_p_norm(
        &self,
        space: &Space,
        p: f64,
        budget: &Budget,
        seed: u64,
    ) -> Result<NormEstimate> {
        check_exponent(p)?;
        let key = p.to_bits();
        if let Some((_, _, e)) = self
            .cache
            .lock()
            .expect("cache lock")
            .iter()
            .find(|(s, k, _)| *k == key && s == space)
        {
            return Ok(e.clone());
        }
        let e = weak_p_of(space, &self.funcs, p, budget, seed)?;
        if e.is_exact() {
            self.cache
                .lock()
                .expect("cache lock")
                .push((space.clone(), key, e.clone()));
        }
        Ok(e)
    }
}

/// `(sum_j |x_j*(x)|^p)^(1/p)`.
pub fn p_value(funcs: &[Functional], x: &Vector, p: f64) -> f64 {
    funcs
        .iter()
        .map(|f| dot(&f.0, &x.0).abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Weak p-summing norm of `t` over `space`.
///
/// Exact when the unit ball of `E` has enumerable extreme points
/// (`exact_vertices`), for one functional (`exact_singleton`), and on Euclidean
/// spaces for `p = 2` (`exact_spectral`), mutually orthogonal functionals
/// (`exact_orthogonal`) or `p = 1` with at most [`SIGN_CAP`] functionals
/// (`exact_signs`). Otherwise a multistart ascent gives the lower bound and a
/// structural inequality gives a finite upper bound.
pub fn weak_p_norm(
    space: &Space,
    t: &FuncTuple,
    p: f64,
    budget: &Budget,
    seed: u64,
) -> Result<NormEstimate> {
    t.weak_p_norm(space, p, budget, seed)
}

pub(crate) fn weak_p_of(
    space: &Space,
    funcs: &[Functional],
    p: f64,
    budget: &Budget,
    seed: u64,
) -> Result<NormEstimate> {
    check_exponent(p)?;
    if funcs.is_empty() {
        return Err(Error::EmptyTuple);
    }
    for f in funcs {
        space.check_functional(f)?;
    }
    if funcs.len() == 1 {
        let n = space.dual_norm_of(&funcs[0].0);
        let v = space.norming_vector(&funcs[0])?;
        return Ok(NormEstimate::exact(
            n,
            Method::ExactSingleton,
            Some(Witness::Vector(v)),
        ));
    }
    if space.is_polytopal() {
        if let Ok(ext) = space.half_extreme_points() {
            return Ok(vertex_max(funcs, &ext, p));
        }
    } else {
        if p == 2.0 {
            return Ok(spectral(funcs));
        }
        if let Some(e) = orthogonal(funcs, p) {
            return Ok(e);
        }
        if p == 1.0 && funcs.len() <= SIGN_CAP {
            return weak_1_norm_signs(space, funcs);
        }
    }
    Ok(search(space, funcs, p, budget, seed))
}

/// A certified upper bound on the weak p-norm without search: the exact
/// value wherever one of the closed forms applies, otherwise the structural
/// inequality.
pub(crate) fn weak_p_upper(space: &Space, funcs: &[Functional], p: f64) -> Result<f64> {
    check_exponent(p)?;
    if funcs.is_empty() {
        return Err(Error::EmptyTuple);
    }
    for f in funcs {
        space.check_functional(f)?;
    }
    if funcs.len() == 1 {
        return Ok(space.dual_norm_of(&funcs[0].0));
    }
    if space.is_polytopal() {
        if let Ok(ext) = space.half_extreme_points() {
            return Ok(vertex_max(funcs, &ext, p).upper);
        }
    } else {
        if p == 2.0 {
            return Ok(top_singular(funcs).0);
        }
        if let Some(e) = orthogonal(funcs, p) {
            return Ok(e.upper);
        }
        if p == 1.0 && funcs.len() <= 12 {
            return Ok(weak_1_norm_signs(space, funcs)?.upper);
        }
    }
    Ok(structural_upper(space, funcs, p))
}

fn vertex_max(funcs: &[Functional], ext: &[Vector], p: f64) -> NormEstimate {
    let mut best = -1.0;
    let mut arg = &ext[0];
    for v in ext {
        let val = p_value(funcs, v, p);
        if val > best {
            best = val;
            arg = v;
        }
    }
    NormEstimate::exact(best, Method::ExactVertices, Some(Witness::Vector(arg.clone())))
}

fn matrix(funcs: &[Functional]) -> DMatrix<f64> {
    let n = funcs[0].dim();
    DMatrix::from_fn(funcs.len(), n, |i, j| funcs[i].0[j])
}

/// Largest singular value of the matrix with rows `funcs`, and a right
/// singular vector for it.
pub(crate) fn top_singular(funcs: &[Functional]) -> (f64, Vector) {
    let svd = matrix(funcs).svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, -1.0), |acc, (i, s)| if *s > acc.1 { (i, *s) } else { acc });
    let v = Vector(vt.row(k).iter().copied().collect());
    (s, v)
}

fn spectral(funcs: &[Functional]) -> NormEstimate {
    let (s, v) = top_singular(funcs);
    NormEstimate::exact(s, Method::ExactSpectral, Some(Witness::Vector(v)))
}

/// Closed form for pairwise orthogonal functionals on a Euclidean space:
/// `max_j ||x_j*||` for `p >= 2` and the `l_r` norm of `(||x_j*||)` with
/// `r = 2p / (2 - p)` for `p < 2`.
fn orthogonal(funcs: &[Functional], p: f64) -> Option<NormEstimate> {
    let norms: Vec<f64> = funcs.iter().map(Functional::euclid).collect();
    for i in 0..funcs.len() {
        for j in i + 1..funcs.len() {
            if dot(&funcs[i].0, &funcs[j].0).abs() > 1e-12 * norms[i] * norms[j] {
                return None;
            }
        }
    }
    let dim = funcs[0].dim();
    let mut x = vec![0.0; dim];
    let value = if p >= 2.0 {
        let k = (0..norms.len())
            .fold(0, |b, i| if norms[i] > norms[b] { i } else { b });
        if norms[k] > 0.0 {
            for (xi, fi) in x.iter_mut().zip(&funcs[k].0) {
                *xi = fi / norms[k];
            }
        }
        norms[k]
    } else {
        let r = 2.0 * p / (2.0 - p);
        // the maximizer puts weight ||x_j*||^(p/(2-p)) on the direction of x_j*
        let c: Vec<f64> = norms.iter().map(|a| a.powf(p / (2.0 - p))).collect();
        let cn = c.iter().map(|a| a * a).sum::<f64>().sqrt();
        if cn > 0.0 {
            for (j, f) in funcs.iter().enumerate() {
                if norms[j] > 0.0 {
                    for (xi, fi) in x.iter_mut().zip(&f.0) {
                        *xi += c[j] / cn * fi / norms[j];
                    }
                }
            }
        }
        norms.iter().map(|a| a.powf(r)).sum::<f64>().powf(1.0 / r)
    };
    if x.iter().all(|a| *a == 0.0) {
        x[0] = 1.0;
    }
    Some(NormEstimate::exact(
        value,
        Method::ExactOrthogonal,
        Some(Witness::Vector(Vector(x))),
    ))
}

/// Finite upper bound valid on any space:
/// `(sum_j ||x_j*||^p)^(1/p)`, improved on Euclidean spaces through the
/// largest singular value.
fn structural_upper(space: &Space, funcs: &[Functional], p: f64) -> f64 {
    let crude = funcs
        .iter()
        .map(|f| space.dual_norm_of(&f.0).powf(p))
        .sum::<f64>()
        .powf(1.0 / p);
    if !space.is_l2() {
        return crude;
    }
    let (s, _) = top_singular(funcs);
    if p >= 2.0 {
        crude.min(s)
    } else {
        let m = funcs.len() as f64;
        crude.min(m.powf(1.0 / p - 0.5) * s)
    }
}

/// Multistart ascent on the convex objective `x -> sum_j |x_j*(x)|^p` over
/// the unit ball: each step moves to the point of the ball norming the
/// gradient, which never decreases a convex objective.
fn search(space: &Space, funcs: &[Functional], p: f64, budget: &Budget, seed: u64) -> NormEstimate {
    let mut starts: Vec<Vector> = funcs
        .iter()
        .filter_map(|f| space.norming_vector(f).ok())
        .collect();
    if space.is_l2() {
        starts.push(top_singular(funcs).1);
    }
    starts.extend(space.sample_sphere(budget.restarts.max(1), derive(seed, 10)));
    let mut best = -1.0;
    let mut arg = starts[0].clone();
    for s in starts {
        let (v, x) = ascend(space, funcs, p, s, budget.steps);
        if v > best {
            best = v;
            arg = x;
        }
    }
    NormEstimate {
        lower: best,
        upper: structural_upper(space, funcs, p).max(best),
        method: Method::SearchLower,
        witness: Some(Witness::Vector(arg)),
    }
}

fn ascend(space: &Space, funcs: &[Functional], p: f64, start: Vector, steps: usize) -> (f64, Vector) {
    let mut x = start;
    let mut v = p_value(funcs, &x, p);
    for _ in 0..steps {
        let mut g = vec![0.0; x.dim()];
        for f in funcs {
            let a = dot(&f.0, &x.0);
            let w = a.abs().powf(p - 1.0) * a.signum();
            for (gi, fi) in g.iter_mut().zip(&f.0) {
                *gi += w * fi;
            }
        }
        let Ok(y) = space.norming_vector(&Functional(g)) else {
            break;
        };
        let vy = p_value(funcs, &y, p);
        if vy <= v * (1.0 + 1e-15) {
            if vy > v {
                v = vy;
                x = y;
            }
            break;
        }
        v = vy;
        x = y;
    }
    (v, x)
}

/// `sup_eps ||sum_j eps_j x_j*||` over sign patterns, with the default cap.
pub fn weak_1_norm_signs(space: &Space, funcs: &[Functional]) -> Result<NormEstimate> {
    weak_1_norm_signs_capped(space, funcs, SIGN_CAP)
}

/// Signed-sum form of the weak 1-norm. The first sign is fixed to `+` since
/// `eps` and `-eps` give the same norm; patterns are scanned with `+` before
/// `-` in each position and the first maximizer is kept.
pub fn weak_1_norm_signs_capped(
    space: &Space,
    funcs: &[Functional],
    cap: usize,
) -> Result<NormEstimate> {
    let m = funcs.len();
    if m == 0 {
        return Err(Error::EmptyTuple);
    }
    if m > cap || m > 62 {
        return Err(Error::CapExceeded { size: m, cap });
    }
    for f in funcs {
        space.check_functional(f)?;
    }
    let dim = space.dim();
    let mut best = -1.0;
    let mut best_mask = 0u64;
    let mut sum = vec![0.0; dim];
    for mask in 0..(1u64 << (m - 1)) {
        sum.iter_mut().for_each(|s| *s = 0.0);
        for (j, f) in funcs.iter().enumerate() {
            let neg = j > 0 && (mask >> (m - 1 - j)) & 1 == 1;
            for (s, a) in sum.iter_mut().zip(&f.0) {
                if neg {
                    *s -= a;
                } else {
                    *s += a;
                }
            }
        }
        let v = space.dual_norm_of(&sum);
        if v > best {
            best = v;
            best_mask = mask;
        }
    }
    let signs = (0..m)
        .map(|j| {
            if j > 0 && (best_mask >> (m - 1 - j)) & 1 == 1 {
                -1
            } else {
                1
            }
        })
        .collect();
    Ok(NormEstimate::exact(
        best,
        Method::ExactSigns,
        Some(Witness::Signs(signs)),
    ))
}

/// Value reproduced by a sign-pattern witness.
pub fn signed_sum_norm(space: &Space, funcs: &[Functional], signs: &[i8]) -> f64 {
    let mut sum = vec![0.0; space.dim()];
    for (f, e) in funcs.iter().zip(signs) {
        for (s, a) in sum.iter_mut().zip(&f.0) {
            *s += f64::from(*e) * a;
        }
    }
    space.dual_norm_of(&sum)
}

/// Outcome of comparing weak norms at two exponents `p < q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub p: f64,
    pub q: f64,
    pub weak_p: NormEstimate,
    pub weak_q: NormEstimate,
    /// `weak_q.lower <= weak_p.upper` up to tolerance.
    pub passed: bool,
    /// Both sides exact, so `passed` decides the inequality itself.
    pub conclusive: bool,
}

/// Checks `||t||_{q,weak} <= ||t||_{p,weak}` for `p < q`.
pub fn weak_p_monotonicity_check(
    space: &Space,
    t: &FuncTuple,
    p: f64,
    q: f64,
    budget: &Budget,
    seed: u64,
) -> Result<MonotonicityReport> {
    check_exponent(p)?;
    check_exponent(q)?;
    if p >= q {
        return Err(Error::InvalidInput(format!("need p < q, got p = {p}, q = {q}")));
    }
    let wp = t.weak_p_norm(space, p, budget, seed)?;
    let wq = t.weak_p_norm(space, q, budget, seed)?;
    let passed = wq.lower <= wp.upper * (1.0 + 1e-9) + 1e-9;
    Ok(MonotonicityReport {
        p,
        q,
        conclusive: wp.is_exact() && wq.is_exact(),
        weak_p: wp,
        weak_q: wq,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fs(rows: &[&[f64]]) -> Vec<Functional> {
        rows.iter().map(|r| Functional(r.to_vec())).collect()
    }

    fn tuple(rows: &[&[f64]]) -> FuncTuple {
        FuncTuple::new(fs(rows)).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(FuncTuple::new(vec![]), Err(Error::EmptyTuple));
        assert!(FuncTuple::new(fs(&[&[1.0], &[1.0, 2.0]])).is_err());
        let t = tuple(&[&[1.0, 0.0]]);
        let b = Budget::default();
        assert_eq!(
            weak_p_norm(&Space::l1(2), &t, 0.5, &b, 0),
            Err(Error::InvalidExponent(0.5))
        );
        assert!(weak_p_norm(&Space::l1(3), &t, 1.0, &b, 0).is_err());
    }

    #[test]
    fn examples() {
        let b = Budget::default();
        let t = tuple(&[&[3.0, -4.0]]);
        for p in [1.0, 1.5, 2.0, 7.0] {
            let e = weak_p_norm(&Space::l2(2), &t, p, &b, 0).unwrap();
            assert_eq!(e.lower, 5.0);
            assert_eq!(e.method, Method::ExactSingleton);
        }
        let t = tuple(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let e = weak_p_norm(&Space::l1(2), &t, 1.0, &b, 0).unwrap();
        assert_eq!((e.lower, e.upper, e.method), (1.0, 1.0, Method::ExactVertices));
        let e = weak_p_norm(&Space::l2(2), &t, 2.0, &b, 0).unwrap();
        assert!((e.lower - 1.0).abs() < 1e-12);
        let s = weak_1_norm_signs(&Space::l1(2), t.funcs()).unwrap();
        assert_eq!(s.lower, 1.0);
        let s = weak_1_norm_signs(&Space::l2(2), &fs(&[&[1.0, 1.0], &[1.0, -1.0]])).unwrap();
        assert!((s.lower - 2.0).abs() < 1e-12);
        assert_eq!(s.witness, Some(Witness::Signs(vec![1, 1])));
    }

    #[test]
    fn witnesses_reproduce() {
        let b = Budget::default();
        let funcs = fs(&[&[1.0, 2.0, 0.5], &[-0.3, 1.0, 2.0], &[0.7, 0.0, -1.0]]);
        let t = FuncTuple::new(funcs.clone()).unwrap();
        for space in [Space::l1(3), Space::l2(3), Space::linf(3)] {
            for p in [1.0, 1.5, 2.0, 3.0] {
                let e = weak_p_norm(&space, &t, p, &b, 5).unwrap();
                assert!(e.lower <= e.upper + 1e-12);
                match e.witness.unwrap() {
                    Witness::Vector(v) => {
                        assert!(space.norm(&v).unwrap() <= 1.0 + 1e-12);
                        assert!((p_value(&funcs, &v, p) - e.lower).abs() <= 1e-9);
                    }
                    Witness::Signs(s) => {
                        assert!((signed_sum_norm(&space, &funcs, &s) - e.lower).abs() <= 1e-9)
                    }
                    w => panic!("unexpected witness {w:?}"),
                }
            }
        }
    }

    #[test]
    fn euclidean_tiers_agree() {
        // orthogonal rows: closed form against sign enumeration and search
        let funcs = fs(&[&[3.0, 0.0, 0.0], &[0.0, 0.0, 4.0]]);
        let l2 = Space::l2(3);
        let b = Budget::default();
        let e = weak_p_of(&l2, &funcs, 1.0, &b, 0).unwrap();
        assert_eq!(e.method, Method::ExactOrthogonal);
        assert!((e.lower - 5.0).abs() < 1e-12);
        let s = weak_1_norm_signs(&l2, &funcs).unwrap();
        assert!((s.lower - 5.0).abs() < 1e-12);
        let e = weak_p_of(&l2, &funcs, 3.0, &b, 0).unwrap();
        assert!((e.lower - 4.0).abs() < 1e-12);
        let r = 2.0 * 1.5 / 0.5;
        let want = (3f64.powf(r) + 4f64.powf(r)).powf(1.0 / r);
        let e = weak_p_of(&l2, &funcs, 1.5, &b, 0).unwrap();
        assert!((e.lower - want).abs() < 1e-12);
        let searched = search(&l2, &funcs, 1.5, &b, 0);
        assert!((searched.lower - want).abs() < 1e-9);
    }

    #[test]
    fn search_is_bracketed() {
        let funcs = fs(&[&[1.0, 2.0, 0.5], &[-0.3, 1.0, 2.0], &[0.7, 0.0, -1.0]]);
        let l2 = Space::l2(3);
        let e = weak_p_of(&l2, &funcs, 1.5, &Budget::default(), 1).unwrap();
        assert_eq!(e.method, Method::SearchLower);
        assert!(e.upper.is_finite() && e.lower <= e.upper);
        // p = 2 search agrees with the spectral value
        let s = search(&l2, &funcs, 2.0, &Budget::default(), 1);
        let (sigma, _) = top_singular(&funcs);
        assert!((s.lower - sigma).abs() < 1e-9);
    }

    #[test]
    fn sign_cap() {
        let funcs: Vec<Functional> = (0..25).map(|i| Functional(vec![i as f64, 1.0])).collect();
        assert_eq!(
            weak_1_norm_signs(&Space::l1(2), &funcs),
            Err(Error::CapExceeded { size: 25, cap: 20 })
        );
    }

    #[test]
    fn monotonicity() {
        let t = tuple(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = weak_p_monotonicity_check(&Space::l1(2), &t, 1.0, 2.0, &Budget::default(), 0)
            .unwrap();
        assert!(r.passed && r.conclusive);
        assert!(weak_p_monotonicity_check(&Space::l1(2), &t, 2.0, 1.0, &Budget::default(), 0)
            .is_err());
    }

    #[test]
    fn cache_keeps_exact_values() {
        let t = tuple(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = Budget::default();
        let a = t.weak_p_norm(&Space::l1(2), 1.0, &b, 0).unwrap();
        assert_eq!(t.cache.lock().unwrap().len(), 1);
        assert_eq!(t.weak_p_norm(&Space::l1(2), 1.0, &b, 9).unwrap(), a);
        let c = t.clone();
        assert_eq!(c, t);
    }
}
