//! Brackets for the FBL^p norm
//! `||f|| = sup { (sum_j |f(x_j*)|^p)^(1/p) : ||(x_j*)||_{p,weak} <= 1 }`.
//!
//! Lower bounds come from explicit feasible tuples (the witness), upper
//! bounds from structural inequalities on the expression tree.

use rand::Rng as _;
use statrs::function::gamma::ln_gamma;

use crate::error::{check_exponent, Error, Result};
use crate::estimate::{Budget, Method, NormEstimate, Witness};
use crate::homfn::{uniform_norm_ball, HomFn};
use crate::phmaps::phi_upper;
use crate::rng::{derive, seeded};
use crate::spaces::{Functional, NormSpec, Space};
use crate::summing::weak_p_upper;

/// `(sum_j |f(x_j*)|^p)^(1/p)`.
pub fn tuple_value(space: &Space, f: &HomFn, tuple: &[Functional], p: f64) -> Result<f64> {
    let mut s = 0.0;
    for x in tuple {
        s += f.eval(space, x)?.abs().powf(p);
    }
    Ok(s.powf(1.0 / p))
}

/// Certified lower bound on `||f||_{FBL^p}` by witness-tuple search.
pub fn fbl_lower(space: &Space, f: &HomFn, p: f64, budget: &Budget, seed: u64) -> Result<NormEstimate> {
    fbl_lower_with(space, f, p, budget, seed, &[])
}

/// [`fbl_lower`] with extra candidate tuples. Each injected tuple is rescaled
/// to be feasible before it is scored, so any tuple may be passed.
pub fn fbl_lower_with(
    space: &Space,
    f: &HomFn,
    p: f64,
    budget: &Budget,
    seed: u64,
    injected: &[Vec<Functional>],
) -> Result<NormEstimate> {
    Searcher::new(space, f, p, budget, seed, true)?.run(injected)
}

/// The search with the feasibility rescaling switched off. Only the mutation
/// checks of the verify suite use it.
pub(crate) fn fbl_lower_unscaled(
    space: &Space,
    f: &HomFn,
    p: f64,
    budget: &Budget,
    seed: u64,
) -> Result<NormEstimate> {
    Searcher::new(space, f, p, budget, seed, false)?.run(&[])
}

struct Searcher<'a> {
    space: &'a Space,
    f: &'a HomFn,
    p: f64,
    budget: &'a Budget,
    seed: u64,
    rescale: bool,
    best: f64,
    best_tuple: Vec<Functional>,
    best_raw: Vec<Functional>,
}

impl<'a> Searcher<'a> {
    fn new(
        space: &'a Space,
        f: &'a HomFn,
        p: f64,
        budget: &'a Budget,
        seed: u64,
        rescale: bool,
    ) -> Result<Self> {
        check_exponent(p)?;
        f.validate(space)?;
        Ok(Searcher {
            space,
            f,
            p,
            budget,
            seed,
            rescale,
            best: 0.0,
            best_tuple: Vec::new(),
            best_raw: Vec::new(),
        })
    }

    /// Value of the feasible rescaling of `tuple`, or `None` when no finite
    /// certified weak-norm bound is available.
    fn score(&self, tuple: &[Functional]) -> Result<Option<(f64, f64)>> {
        if tuple.is_empty() {
            return Ok(None);
        }
        let s = tuple_value(self.space, self.f, tuple, self.p)?;
        if s == 0.0 {
            return Ok(Some((0.0, 1.0)));
        }
        if !self.rescale {
            return Ok(Some((s, 1.0)));
        }
        let w = weak_p_upper(self.space, tuple, self.p)?;
        if !(w.is_finite() && w > 0.0) {
            return Ok(None);
        }
        Ok(Some((s / w, w)))
    }

    /// Scores `tuple` and keeps it if it improves the best value.
    fn offer(&mut self, tuple: &[Functional]) -> Result<f64> {
        match self.score(tuple)? {
            Some((v, w)) => {
                if v > self.best {
                    self.best = v;
                    self.best_tuple = tuple.iter().map(|x| x.scaled(1.0 / w)).collect();
                    self.best_raw = tuple.to_vec();
                }
                Ok(v)
            }
            None => Ok(0.0),
        }
    }

    fn pool(&self) -> Vec<Functional> {
        let space = self.space;
        let mut pool = space.unit_coordinate_functionals();
        if let Ok(ext) = space.half_dual_extreme_points() {
            pool.extend(ext.into_iter().take(64));
        }
        for d in self.f.ray_directions() {
            let n = space.dual_norm_of(&d.0);
            if n > 0.0 {
                pool.push(d.scaled(1.0 / n));
            }
        }
        for v in self.f.delta_vectors().into_iter().take(64) {
            if let Ok(g) = space.norming_functional(&v) {
                pool.push(g);
            }
        }
        pool.extend(space.sample_dual_sphere(self.budget.samples, derive(self.seed, 50)));
        let negated: Vec<Functional> = pool.iter().map(|x| x.scaled(-1.0)).collect();
        pool.extend(negated);
        pool
    }

    fn run(mut self, injected: &[Vec<Functional>]) -> Result<NormEstimate> {
        if self.f.is_structurally_zero() {
            return Ok(NormEstimate::zero());
        }
        let pool = self.pool();
        let mut singles: Vec<(f64, usize)> = Vec::with_capacity(pool.len());
        for (i, x) in pool.iter().enumerate() {
            let v = self.offer(std::slice::from_ref(x))?;
            singles.push((v, i));
        }
        for t in injected {
            self.offer(t)?;
        }
        singles.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let top: Vec<Functional> = singles
            .iter()
            .take(48)
            .map(|(_, i)| pool[*i].clone())
            .collect();

        self.frames()?;
        self.greedy(&top)?;
        self.random_subsets(&pool)?;
        self.refine(&pool)?;

        if self.best == 0.0 {
            return Ok(NormEstimate {
                lower: 0.0,
                upper: f64::INFINITY,
                method: Method::SearchLower,
                witness: None,
            });
        }
        Ok(NormEstimate {
            lower: self.best,
            upper: f64::INFINITY,
            method: Method::SearchLower,
            witness: Some(Witness::Tuple(self.best_tuple)),
        })
    }

    /// Coordinate frames, the full set of dual extreme points, and random
    /// orthonormal frames on Euclidean spaces.
    fn frames(&mut self) -> Result<()> {
        let space = self.space;
        let n = space.dim();
        let cap = self.budget.tuple_max.max(8);
        if n <= cap {
            self.offer(&space.unit_coordinate_functionals())?;
        }
        if let Ok(ext) = space.half_dual_extreme_points() {
            if ext.len() <= cap {
                self.offer(&ext)?;
            }
        }
        if space.is_l2() {
            let mut rng = seeded(derive(self.seed, 51));
            for _ in 0..self.budget.restarts {
                let k = n.min(self.budget.tuple_max.max(1));
                let frame = orthonormal_frame(&mut rng, n, k);
                self.offer(&frame)?;
            }
        }
        Ok(())
    }

    /// Grows a tuple from the best singleton, adding whichever top candidate
    /// improves the value most.
    fn greedy(&mut self, top: &[Functional]) -> Result<()> {
        let Some(first) = top.first() else {
            return Ok(());
        };
        let mut cur = vec![first.clone()];
        let mut cur_v = self.offer(&cur)?;
        while cur.len() < self.budget.tuple_max {
            let mut best: Option<(f64, usize)> = None;
            for (i, x) in top.iter().enumerate() {
                let mut t = cur.clone();
                t.push(x.clone());
                let v = self.offer(&t)?;
                if v > cur_v && best.is_none_or(|b| v > b.0) {
                    best = Some((v, i));
                }
            }
            match best {
                Some((v, i)) => {
                    cur.push(top[i].clone());
                    cur_v = v;
                }
                None => break,
            }
        }
        Ok(())
    }

    fn random_subsets(&mut self, pool: &[Functional]) -> Result<()> {
        let mut rng = seeded(derive(self.seed, 52));
        for size in [2usize, 4, 8] {
            if size > self.budget.tuple_max {
                break;
            }
            for _ in 0..self.budget.restarts {
                let t: Vec<Functional> = (0..size)
                    .map(|_| pool[rng.random_range(0..pool.len())].clone())
                    .collect();
                self.offer(&t)?;
            }
        }
        Ok(())
    }

    /// Coordinate-wise local moves on the best tuple: rescale one member,
    /// perturb it, replace it by a pool element, or append a pool element.
    fn refine(&mut self, pool: &[Functional]) -> Result<()> {
        if self.best_raw.is_empty() {
            return Ok(());
        }
        let mut rng = seeded(derive(self.seed, 53));
        let mut cur = self.best_raw.clone();
        let mut cur_v = self.score(&cur)?.map_or(0.0, |s| s.0);
        let mut eta = 0.3;
        let steps = self.budget.steps / 5 + self.budget.restarts;
        for _ in 0..steps {
            let j = rng.random_range(0..cur.len());
            let mut t = cur.clone();
            match rng.random_range(0..4) {
                0 => {
                    let c = [0.5, 0.8, 1.25, 2.0][rng.random_range(0..4)];
                    t[j] = t[j].scaled(c);
                }
                1 => {
                    let scale = self.space.dual_norm_of(&t[j].0).max(1e-12);
                    let g = crate::spaces::gaussian_direction(&mut rng, self.space.dim());
                    let gn = self.space.dual_norm_of(&g);
                    t[j] = Functional(
                        t[j].0
                            .iter()
                            .zip(&g)
                            .map(|(a, b)| a + eta * scale * b / gn)
                            .collect(),
                    );
                }
                2 => t[j] = pool[rng.random_range(0..pool.len())].clone(),
                _ => {
                    if t.len() < self.budget.tuple_max {
                        t.push(pool[rng.random_range(0..pool.len())].clone());
                    } else if t.len() > 1 {
                        t.remove(j);
                    }
                }
            }
            let v = self.offer(&t)?;
            if v > cur_v {
                cur = t;
                cur_v = v;
                eta = (eta * 1.5).min(1.0);
            } else {
                eta = (eta * 0.9).max(1e-4);
            }
        }
        Ok(())
    }
}

fn orthonormal_frame(rng: &mut crate::rng::Rng, n: usize, k: usize) -> Vec<Functional> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(k);
    while out.len() < k {
        let mut g = crate::spaces::gaussian_direction(rng, n);
        for q in &out {
            let c: f64 = g.iter().zip(q).map(|(a, b)| a * b).sum();
            for (a, b) in g.iter_mut().zip(q) {
                *a -= c * b;
            }
        }
        let nrm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nrm > 1e-8 {
            out.push(g.into_iter().map(|a| a / nrm).collect());
        }
    }
    out.into_iter().map(Functional).collect()
}

/// `E|u_1|^p` for `u` uniform on the Euclidean sphere of `R^n`.
fn sphere_moment(n: usize, p: f64) -> f64 {
    let n = n as f64;
    (ln_gamma(n / 2.0) + ln_gamma((p + 1.0) / 2.0)
        - 0.5 * std::f64::consts::PI.ln()
        - ln_gamma((n + p) / 2.0))
    .exp()
}

/// Certified upper bound on the FBL^p norm of the norm function `x* -> ||x*||`.
fn norm_fn_upper(space: &Space, p: f64) -> f64 {
    let n = space.dim();
    // x* = sum_i x*(e_i) e_i*
    let coords: f64 = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            space.norm_of(&e) * space.dual_norm_of(&e)
        })
        .sum();
    let other = match space.spec() {
        // averaging |x*(u)|^p over the sphere: sum_j ||x_j*||^p <= weak^p / E|u_1|^p
        // rounded outward to cover the ln_gamma error
        NormSpec::L2 => sphere_moment(n, p).powf(-1.0 / p) * (1.0 + 1e-12),
        // ||x*|| <= (sum over half the vertices v of |x*(v)|^p)^(1/p)
        NormSpec::L1 => (n as f64).powf(1.0 / p),
        NormSpec::Linf => 2f64.powf((n as f64 - 1.0) / p),
        NormSpec::Polyhedral(v) => (v.len() as f64 / 2.0).powf(1.0 / p),
    };
    coords.min(other)
}

/// Structural upper bound on `||f||_{FBL^p}`; infinite when no bound applies.
pub fn fbl_upper_value(space: &Space, f: &HomFn, p: f64) -> f64 {
    match f {
        HomFn::Delta(x) => space.norm_of(&x.0),
        HomFn::NormFn => norm_fn_upper(space, p),
        HomFn::Scale(c, g) => {
            if *c == 0.0 {
                0.0
            } else {
                c.abs() * fbl_upper_value(space, g, p)
            }
        }
        HomFn::Abs(g) => fbl_upper_value(space, g, p),
        HomFn::Sup(cs) | HomFn::Inf(cs) if cs.len() == 1 => fbl_upper_value(space, &cs[0], p),
        // |g v h| and |g ^ h| are both at most |g| + |h|
        HomFn::Sum(cs) | HomFn::Sup(cs) | HomFn::Inf(cs) => {
            cs.iter().map(|c| fbl_upper_value(space, c, p)).sum()
        }
        HomFn::Ray(d) => {
            let n = space.dual_norm_of(&d.0);
            if n == 0.0 {
                0.0
            } else {
                1.0 / n
            }
        }
        HomFn::Mu { measure, p: pm } => {
            let crude: f64 = measure
                .atoms()
                .iter()
                .map(|(w, x)| w.powf(1.0 / pm) * space.norm_of(&x.0))
                .sum();
            if *pm == p {
                let tight = measure
                    .atoms()
                    .iter()
                    .map(|(w, x)| w * space.norm_of(&x.0).powf(p))
                    .sum::<f64>()
                    .powf(1.0 / p);
                tight.min(crude)
            } else {
                crude
            }
        }
        HomFn::Composed { arg, map } => {
            let a = fbl_upper_value(map.target(), arg, p);
            if a == 0.0 {
                0.0
            } else {
                phi_upper(map, p) * a
            }
        }
    }
}

/// Structural upper bound packaged as an estimate. For `Delta(x)` the bound is
/// the exact value `||x||` and is reported as both ends.
pub fn fbl_upper(space: &Space, f: &HomFn, p: f64) -> Result<NormEstimate> {
    check_exponent(p)?;
    f.validate(space)?;
    let u = fbl_upper_value(space, f, p);
    let lower = match f {
        HomFn::Delta(x) => space.norm_of(&x.0),
        _ => 0.0,
    };
    Ok(NormEstimate {
        lower,
        upper: u,
        method: Method::StructuralUpper,
        witness: None,
    })
}

/// Joins [`fbl_lower`] (with the uniform-norm witness injected as a singleton)
/// and [`fbl_upper`], failing with a consistency violation if they cross.
pub fn fbl_bracket(space: &Space, f: &HomFn, p: f64, budget: &Budget, seed: u64) -> Result<NormEstimate> {
    check_exponent(p)?;
    f.validate(space)?;
    if f.is_structurally_zero() {
        return Ok(NormEstimate::zero());
    }
    let uniform = uniform_norm_ball(f, space, budget, derive(seed, 60))?;
    let injected: Vec<Vec<Functional>> = match &uniform.witness {
        Some(Witness::Functional(x)) => vec![vec![x.clone()]],
        _ => Vec::new(),
    };
    let lo = fbl_lower_with(space, f, p, budget, seed, &injected)?;
    let up = fbl_upper_value(space, f, p);
    if lo.lower > up + 1e-6 * up {
        return Err(Error::ConsistencyViolation {
            lower: lo.lower,
            upper: up,
        });
    }
    if lo.lower < uniform.lower - 1e-9 {
        return Err(Error::ConsistencyViolation {
            lower: uniform.lower,
            upper: lo.lower,
        });
    }
    // a crossing inside the tolerance is rounding in the witness value
    Ok(NormEstimate {
        lower: lo.lower.min(up),
        upper: up,
        method: Method::Bracket,
        witness: lo.witness,
    })
}

/// Reweights a tuple that is feasible for exponent `q` into one for `p < q`
/// whose FBL^p value is at least its FBL^q value: `x_j* -> lambda_j x_j*`
/// with `lambda_j = |f(x_j*)|^(q/r)` and `1/r = 1/p - 1/q`.
pub fn p_transfer(space: &Space, f: &HomFn, tuple: &[Functional], p: f64, q: f64) -> Result<Vec<Functional>> {
    check_exponent(p)?;
    check_exponent(q)?;
    if p >= q {
        return Err(Error::InvalidInput(format!("need p < q, got p = {p}, q = {q}")));
    }
    let r = p * q / (q - p);
    let mut out = Vec::with_capacity(tuple.len());
    for x in tuple {
        let v = f.eval(space, x)?.abs();
        if v > 0.0 {
            out.push(x.scaled(v.powf(q / r)));
        }
    }
    Ok(out)
}
