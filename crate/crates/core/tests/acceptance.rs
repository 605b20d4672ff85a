//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the lines always print; exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::time::Instant;

use fblab::rng::{seeded, Rng};
use fblab::verify::{random_lattice_expr, run_suite, verify_suite, Mutant, Mutation};
use fblab::witnesses::{
    coordinate_functionals, divergence_witness_at, gap_witness, kernel_witness, series_witness,
};
use fblab::{
    comp_norm_identity_check, compose_op, dim1_representation, extract_phi, fbl_lower, fbl_lower_with,
    fbl_upper, linearity_report, p_monotonicity_check, phi_p_norm, phi_upper, uniform_norm_ball, weak_1_norm_signs,
    Budget, DiscreteMeasure, FuncTuple, Functional, HomFn, PhMap, Space, Vector, Witness,
};
use nalgebra::DMatrix;
use rand::Rng as _;

type Outcome = Result<String, String>;

fn gauss(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            // Box-Muller
            let u: f64 = rng.random_range(f64::EPSILON..1.0);
            let v: f64 = rng.random();
            (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
        })
        .collect()
}

// independent norm oracles
fn l1(v: &[f64]) -> f64 {
    v.iter().map(|a| a.abs()).sum()
}
fn l2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}
fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}

/// `(space, norm, dual norm)` for the three classical norms.
fn classical(n: usize) -> [(Space, fn(&[f64]) -> f64, fn(&[f64]) -> f64); 3] {
    [(Space::l1(n), l1, linf), (Space::l2(n), l2, l2), (Space::linf(n), linf, l1)]
}

fn c1_delta_isometry() -> Outcome {
    let mut rng = seeded(1);
    let budget = Budget::light();
    let mut worst: f64 = 1.0;
    for n in [2, 3, 5] {
        for (s, norm, _) in classical(n) {
            for _ in 0..50 {
                let x = gauss(&mut rng, n);
                let want = norm(&x);
                let f = HomFn::delta(x.clone());
                for p in [1.0, 2.0] {
                    let up = fbl_upper(&s, &f, p).map_err(|e| e.to_string())?.upper;
                    if up != s.norm(&Vector(x.clone())).unwrap() || (up - want).abs() > 1e-12 * want {
                        return Err(format!("{s:?} x = {x:?} p = {p}: upper {up} vs ||x|| {want}"));
                    }
                    let lo = fbl_lower(&s, &f, p, &budget, rng.random()).map_err(|e| e.to_string())?.lower;
                    if lo < 0.99 * want {
                        return Err(format!("{s:?} x = {x:?} p = {p}: lower {lo} < 0.99 * {want}"));
                    }
                    worst = worst.min(lo / want);
                }
            }
        }
    }
    Ok(format!("900 cases, min lower/||x|| = {worst:.6}"))
}

fn c2_norm_function() -> Outcome {
    let budget = Budget::default();
    let mut out = Vec::new();
    // column-sum oracle on l_1^n at p = 1: n; trace oracle on l_2^n at p = 2: sqrt(n)
    for (s, p, oracle, lo, hi) in [
        (Space::l1(2), 1.0, 2.0, 1.99, 2.0),
        (Space::l2(2), 2.0, 2f64.sqrt(), 1.40, 1.4143),
    ] {
        let l = fbl_lower(&s, &HomFn::NormFn, p, &budget, 0).map_err(|e| e.to_string())?.lower;
        let u = fbl_upper(&s, &HomFn::NormFn, p).map_err(|e| e.to_string())?.upper;
        if !(lo <= l && l <= u && u <= hi && l <= oracle + 1e-12 && oracle <= u + 1e-12) {
            return Err(format!("{s:?} p = {p}: [{l}, {u}] vs [{lo}, {hi}], oracle {oracle}"));
        }
        out.push(format!("[{l:.6}, {u:.6}]"));
    }
    Ok(out.join(" and "))
}

/// Brute-force weak 1-norm over the vertices of the unit ball.
fn weak1_vertices(kind: usize, n: usize, t: &[Vec<f64>]) -> f64 {
    let eval = |x: &[f64]| t.iter().map(|f| f.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().abs()).sum::<f64>();
    let mut best: f64 = 0.0;
    if kind == 0 {
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            best = best.max(eval(&e));
        }
    } else {
        for mask in 0..(1u32 << n) {
            let v: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
            best = best.max(eval(&v));
        }
    }
    best
}

fn c3_sign_formula() -> Outcome {
    let mut rng = seeded(3);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let n = rng.random_range(1..6);
        let kind = i % 2;
        let s = if kind == 0 { Space::l1(n) } else { Space::linf(n) };
        let m = rng.random_range(1..5);
        let t: Vec<Vec<f64>> = (0..m).map(|_| gauss(&mut rng, n)).collect();
        let funcs: Vec<Functional> = t.iter().cloned().map(Functional).collect();
        let signs = weak_1_norm_signs(&s, &funcs).map_err(|e| e.to_string())?.lower;
        let w = FuncTuple::new(funcs)
            .and_then(|ft| ft.weak_p_norm(&s, 1.0, &Budget::default(), 0))
            .map_err(|e| e.to_string())?;
        let oracle = weak1_vertices(kind, n, &t);
        let d = (signs - w.lower).abs().max((signs - w.upper).abs());
        if d > 1e-9 || (signs - oracle).abs() > 1e-9 {
            return Err(format!("{s:?} t = {t:?}: signs {signs}, weak [{}, {}], oracle {oracle}", w.lower, w.upper));
        }
        worst = worst.max(d);
    }
    Ok(format!("200 tuples, max |signs - weak_1| = {worst:.2e}"))
}

fn spaces_cycle() -> Vec<Space> {
    fblab::verify::test_spaces()
}

fn c4_norm_domination() -> Outcome {
    let mut rng = seeded(4);
    let spaces = spaces_cycle();
    let budget = Budget::light();
    let mut min_gap = f64::INFINITY;
    for i in 0..100 {
        let s = &spaces[i % spaces.len()];
        let f = random_lattice_expr(&mut rng, s, 3, s.dim());
        let u = uniform_norm_ball(&f, s, &budget, rng.random()).map_err(|e| e.to_string())?;
        let injected = match &u.witness {
            Some(Witness::Functional(x)) => vec![vec![x.clone()]],
            _ => vec![],
        };
        let p = [1.0, 2.0][i % 2];
        let l = fbl_lower_with(s, &f, p, &budget, rng.random(), &injected).map_err(|e| e.to_string())?;
        if l.lower < u.lower - 1e-9 {
            return Err(format!("{s:?} p = {p}: fbl_lower {} < uniform {}", l.lower, u.lower));
        }
        min_gap = min_gap.min(l.lower - u.lower);
    }
    Ok(format!("100 expressions, min(fbl_lower - uniform) = {min_gap:.3e}"))
}

fn c5_ideal_upper_bound() -> Outcome {
    let mut rng = seeded(5);
    let spaces = spaces_cycle();
    let budget = Budget::light();
    let mut max_ratio: f64 = 0.0;
    for i in 0..100 {
        let s = &spaces[i % spaces.len()];
        let n = s.dim();
        let k = rng.random_range(1..4);
        let xs: Vec<Vec<f64>> = (0..k).map(|_| gauss(&mut rng, n)).collect();
        let dominator = HomFn::Sum(xs.iter().map(|x| HomFn::delta(x.clone()).abs()).collect());
        let g = random_lattice_expr(&mut rng, s, 2, n);
        // |f| <= sum_k |delta_{x_k}| by construction
        let f = match i % 3 {
            0 => dominator.clone().min(g.abs()),
            1 => HomFn::Sum(
                xs.iter()
                    .map(|x| HomFn::delta(x.clone()).scale(rng.random_range(-1.0..1.0)))
                    .collect(),
            ),
            _ => HomFn::Sup(xs.iter().map(|x| HomFn::delta(x.clone())).collect()).min(g.abs()),
        };
        let bound: f64 = xs.iter().map(|x| s.norm(&Vector(x.clone())).unwrap()).sum();
        for x in s.sample_dual_sphere(50, rng.random()) {
            let (a, b) = (f.eval(s, &x).unwrap().abs(), dominator.eval(s, &x).unwrap());
            if a > b + 1e-12 {
                return Err(format!("domination fails at {:?}", x.0));
            }
        }
        let l = fbl_lower(s, &f, [1.0, 2.0][i % 2], &budget, rng.random()).map_err(|e| e.to_string())?;
        if l.lower > bound + 1e-9 {
            return Err(format!("{s:?}: fbl_lower {} > sum ||x_k|| {bound}", l.lower));
        }
        max_ratio = max_ratio.max(l.lower / bound);
    }
    Ok(format!("100 functions, max fbl_lower / sum ||x_k|| = {max_ratio:.4}"))
}

fn c6_dim1() -> Outcome {
    let mut rng = seeded(6);
    let s = Space::l2(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f1: f64 = rng.random_range(-10.0..10.0);
        let fm1: f64 = rng.random_range(-10.0..10.0);
        let h = dim1_representation(f1, fm1);
        for i in 0..1000 {
            let t = -10.0 + 20.0 * i as f64 / 999.0;
            let want = if t >= 0.0 { t * f1 } else { -t * fm1 };
            let got = h.eval(&s, &Functional(vec![t])).unwrap();
            let d = (got - want).abs();
            if d > 1e-12 {
                return Err(format!("f(1) = {f1}, f(-1) = {fm1}, t = {t}: {got} vs {want}"));
            }
            worst = worst.max(d);
        }
    }
    Ok(format!("10^5 grid evaluations, max error {worst:.1e}"))
}

fn c7_divergence() -> Outcome {
    let checkpoints = [10, 100, 625, 1000, 5000, 10_000];
    let start = Instant::now();
    let r = divergence_witness_at(10_000, 2.0, 7, &checkpoints).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let mut prev = 0.0;
    for m in checkpoints {
        let l = r.get(&format!("L({m})")).ok_or("missing checkpoint")?;
        let oracle = (1..=m).map(|k| (k as f64).powf(-0.5)).sum::<f64>().sqrt();
        if (l - oracle).abs() > 1e-9 * oracle || l <= prev {
            return Err(format!("L({m}) = {l}, oracle {oracle}, previous {prev}"));
        }
        prev = l;
    }
    let (a, b) = (r.get("L(10000)").unwrap(), r.get("L(625)").unwrap());
    if a < 2.0 * b || took.as_secs_f64() >= 5.0 {
        return Err(format!("L(10^4) = {a}, 2 L(625) = {}, {took:?}", 2.0 * b));
    }
    Ok(format!("L(10^4) / L(625) = {:.4}, {:.0} ms", a / b, took.as_secs_f64() * 1e3))
}

fn c8_kernel() -> Outcome {
    let mut rng = seeded(8);
    let mut min_f: f64 = f64::INFINITY;
    let mut max_res: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..13);
        let s = Space::l2(n);
        let basis: Vec<Vector> = (0..n)
            .map(|_| {
                let v = gauss(&mut rng, n);
                let nv = l2(&v);
                Vector(v.iter().map(|a| a / nv).collect())
            })
            .collect();
        let m = rng.random_range(0..n);
        let obstacles: Vec<Vector> = (0..m).map(|_| Vector(gauss(&mut rng, n))).collect();
        let f = series_witness(&s, &basis).map_err(|e| e.to_string())?;
        let b = coordinate_functionals(&s, &basis).map_err(|e| e.to_string())?;
        let x = kernel_witness(&s, &obstacles, &b[..m + 1]).map_err(|e| e.to_string())?;
        let res = obstacles
            .iter()
            .map(|o| o.0.iter().zip(&x.0).map(|(a, b)| a * b).sum::<f64>().abs())
            .fold(0.0, f64::max);
        // f(x*) = sum_n |x*(b_n)| / 2^n
        let fx: f64 = basis
            .iter()
            .enumerate()
            .map(|(k, bk)| bk.0.iter().zip(&x.0).map(|(a, b)| a * b).sum::<f64>().abs() / 2f64.powi(k as i32 + 1))
            .sum();
        let lib = f.eval(&s, &x).unwrap();
        if res > 1e-9 || fx <= 1e-6 || (lib - fx).abs() > 1e-12 {
            return Err(format!("n = {n}, m = {m}: residual {res}, f(x*) = {fx} (library {lib})"));
        }
        min_f = min_f.min(fx);
        max_res = max_res.max(res);
    }
    Ok(format!("100 instances, max residual {max_res:.1e}, min f(x*) {min_f:.3e}"))
}

fn c9_gap() -> Outcome {
    let mut rng = seeded(9);
    let mut min_slack = f64::INFINITY;
    for m in [2usize, 4, 8] {
        let n = 2 * m + 8;
        let s = Space::l2(n);
        // K for the orthogonal tuple (n^(-1/2) e_{n+1}*) at p = 1 is (sum 1/n)^(1/2)
        let k_oracle = (1..n).map(|j| 1.0 / j as f64).sum::<f64>().sqrt();
        let floor = 0.25 / (k_oracle + 2.0);
        for _ in 0..50 {
            let h = random_lattice_expr(&mut rng, &s, 3, m - 1);
            let r = gap_witness(n, 1.0, 2.0, m, Some(&h)).map_err(|e| e.to_string())?;
            let k = r.get("K").unwrap();
            if (k - k_oracle).abs() > 1e-9 {
                return Err(format!("m = {m}: K = {k}, oracle {k_oracle}"));
            }
            // recompute the bound from raw evaluations
            let f = r.f.as_ref().ok_or("witness not materialized")?;
            let c = 1.0 / m as f64;
            let x1 = Functional::unit(n, 0);
            let (fx, hx) = (f.eval(&s, &x1).unwrap(), h.eval(&s, &x1).unwrap());
            let mut sum = 0.0;
            for j in 1..=m {
                let mut z = vec![0.0; n];
                z[0] = c;
                z[m + j - 1] = 1.0 / ((m + j - 1) as f64).sqrt();
                let z = Functional(z);
                let hz = h.eval(&s, &z).unwrap();
                if (hz - c * hx).abs() > 1e-9 {
                    return Err(format!("m = {m}: h(z_{j}*) = {hz} vs {}", c * hx));
                }
                sum += (f.eval(&s, &z).unwrap() - c * fx).abs();
            }
            let bound = sum / (k + 2.0);
            let reported = r.get("bound").unwrap();
            if (bound - reported).abs() > 1e-12 || bound < floor - 1e-6 {
                return Err(format!("m = {m}: bound {bound} (reported {reported}) vs floor {floor}"));
            }
            min_slack = min_slack.min(bound - floor);
        }
    }
    Ok(format!("150 cases, min(bound - floor) = {min_slack:.4}"))
}

fn c10_extraction() -> Outcome {
    let mut rng = seeded(10);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let (ne, nf) = (rng.random_range(1..5), rng.random_range(1..5));
        let e = classical(ne)[i % 3].0.clone();
        let f = classical(nf)[(i + 1) % 3].0.clone();
        // S: E -> F, dim F x dim E
        let s: Vec<Vec<f64>> = (0..nf).map(|_| gauss(&mut rng, ne)).collect();
        let phi = PhMap::adjoint_of(&s, e.clone(), f.clone()).map_err(|e| e.to_string())?;
        let action: BTreeMap<usize, HomFn> = (0..ne)
            .map(|j| (j, compose_op(&phi, HomFn::delta(Vector::unit(ne, j))).unwrap()))
            .collect();
        let ext = extract_phi(&e, &f, &action).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let y = gauss(&mut rng, nf);
            let got = ext.apply(&Functional(y.clone())).unwrap();
            for j in 0..ne {
                let want: f64 = (0..nf).map(|r| y[r] * s[r][j]).sum();
                let d = (got.0[j] - want).abs();
                if d > 1e-12 * want.abs().max(1.0) {
                    return Err(format!("S = {s:?}, y* = {y:?}: {} vs {want}", got.0[j]));
                }
                worst = worst.max(d);
            }
        }
    }
    let n = 3;
    let e = Space::l2(n);
    let modulus = PhMap::modulus(e.clone());
    let action: BTreeMap<usize, HomFn> = (0..n)
        .map(|j| (j, compose_op(&modulus, HomFn::delta(Vector::unit(n, j))).unwrap()))
        .collect();
    let ext = extract_phi(&e, &e, &action).map_err(|e| e.to_string())?;
    for _ in 0..1000 {
        let y = gauss(&mut rng, n);
        let got = ext.apply(&Functional(y.clone())).unwrap();
        if got.0.iter().zip(&y).any(|(a, b)| *a != b.abs()) {
            return Err(format!("modulus at {y:?}: {:?}", got.0));
        }
    }
    Ok(format!("20 adjoints (max error {worst:.1e}), modulus exact on 10^3 samples"))
}

/// Operator norm of `S` between classical spaces, from extreme points of
/// `B_E` when `E` is polytopal and from the top singular value on `l_2 -> l_2`.
fn op_norm(s: &[Vec<f64>], ek: usize, fnorm: fn(&[f64]) -> f64, ne: usize) -> f64 {
    let apply = |x: &[f64]| -> Vec<f64> { s.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect() };
    match ek {
        0 => (0..ne)
            .map(|j| {
                let mut e = vec![0.0; ne];
                e[j] = 1.0;
                fnorm(&apply(&e))
            })
            .fold(0.0, f64::max),
        2 => (0..(1u32 << ne))
            .map(|mask| {
                let v: Vec<f64> = (0..ne).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
                fnorm(&apply(&v))
            })
            .fold(0.0, f64::max),
        _ => {
            let m = DMatrix::from_fn(s.len(), ne, |i, j| s[i][j]);
            m.singular_values().max()
        }
    }
}

fn c11_comp_norm() -> Outcome {
    let mut rng = seeded(11);
    let budget = Budget::default();
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let ne = rng.random_range(1..4);
        let nf = rng.random_range(1..4);
        // pairs with an oracle: polytopal E, or l_2 -> l_2
        let (ek, fk) = [(0, 0), (0, 1), (0, 2), (2, 0), (2, 1), (2, 2), (1, 1)][i % 7];
        let (e, _, _) = classical(ne)[ek].clone();
        let (f, fnorm, _) = classical(nf)[fk].clone();
        let s: Vec<Vec<f64>> = (0..nf).map(|_| gauss(&mut rng, ne)).collect();
        let oracle = op_norm(&s, ek, fnorm, ne);
        let phi = PhMap::adjoint_of(&s, e.clone(), f.clone()).map_err(|e| e.to_string())?;
        for p in [1.0, 2.0] {
            let est = phi_p_norm(&phi, p, &budget, rng.random()).map_err(|e| e.to_string())?;
            let rep = comp_norm_identity_check(&phi, p, &budget, rng.random()).map_err(|e| e.to_string())?;
            let rel = |v: f64| (v - oracle).abs() / oracle.max(1e-300);
            let d = rel(est.lower).max(rel(est.upper)).max(rel(rep.cphi_lower));
            if d > 1e-3 || !rep.upper_direction_holds {
                return Err(format!(
                    "{e:?} -> {f:?}, S = {s:?}, p = {p}: ||Phi||_p [{}, {}], C_Phi lower {}, oracle {oracle}",
                    est.lower, est.upper, rep.cphi_lower
                ));
            }
            worst = worst.max(d);
        }
    }
    Ok(format!("20 maps x 2 exponents, max relative deviation {worst:.2e}"))
}

/// A seeded family covering every map kind.
fn phmap_family(rng: &mut Rng) -> Vec<PhMap> {
    let mut v = Vec::new();
    for n in [2, 3] {
        for (e, _, _) in classical(n) {
            for (f, _, _) in classical(n) {
                let m: Vec<Vec<f64>> = (0..n).map(|_| gauss(rng, n)).collect();
                v.push(PhMap::adjoint(m, f.clone(), e.clone()).unwrap());
                let x0 = Functional(gauss(rng, n));
                let g = random_lattice_expr(rng, &f, 1, n);
                v.push(PhMap::rank_one(g, x0, f.clone(), e.clone()).unwrap());
            }
            v.push(PhMap::modulus(e.clone()));
            let m: Vec<Vec<f64>> = (0..n).map(|_| gauss(rng, n)).collect();
            let a = PhMap::adjoint(m, e.clone(), e.clone()).unwrap();
            v.push(PhMap::composite(PhMap::modulus(e.clone()), a.clone()).unwrap());
            let action = (0..n).map(|_| random_lattice_expr(rng, &e, 1, n)).collect();
            v.push(PhMap::tabulated(action, e.clone(), e.clone()).unwrap());
        }
    }
    v
}

fn c12_p_monotonicity() -> Outcome {
    let mut rng = seeded(12);
    let family = phmap_family(&mut rng);
    let budget = Budget::light();
    for phi in &family {
        let r = p_monotonicity_check(phi, 1.0, 2.0, &budget, rng.random()).map_err(|e| e.to_string())?;
        if !r.passed {
            return Err(format!("{:?}: ||Phi||_2 lower {} > ||Phi||_1 upper {}", phi.kind(), r.phi_q.lower, r.phi_p.upper));
        }
    }
    Ok(format!("{} maps", family.len()))
}

fn c13_quasilinearity() -> Outcome {
    let mut rng = seeded(13);
    let family = phmap_family(&mut rng);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for phi in &family {
        let up = phi_upper(phi, 2.0).min(phi_upper(phi, 1.0));
        if !up.is_finite() {
            continue;
        }
        let r = linearity_report(phi, 5000, rng.random()).map_err(|e| e.to_string())?;
        if r.pairs < 10_000 || r.quasilinearity_ratio > 2.0 * up * (1.0 + 1e-9) + 1e-12 {
            return Err(format!("{:?}: ratio {} vs 2 * {up} over {} pairs", phi.kind(), r.quasilinearity_ratio, r.pairs));
        }
        worst = worst.max(r.quasilinearity_ratio / (2.0 * up));
        checked += 1;
    }
    Ok(format!("{checked} bounded maps, max ratio / (2 ||Phi||_p) = {worst:.4}"))
}

fn c14_measure_bound() -> Outcome {
    let mut rng = seeded(14);
    let spaces = spaces_cycle();
    let budget = Budget::light();
    let mut max_ratio: f64 = 0.0;
    for i in 0..50 {
        let s = &spaces[i % spaces.len()];
        let k = rng.random_range(1..5);
        let atoms: Vec<(f64, Vector)> = (0..k)
            .map(|_| {
                let x = s.sample_sphere(1, rng.random()).remove(0);
                (rng.random_range(0.3..1.5), x.scaled(rng.random_range(0.2..1.0)))
            })
            .collect();
        let mass: f64 = atoms.iter().map(|(w, _)| w).sum();
        let atoms = if mass < 1.0 {
            atoms.into_iter().map(|(w, x)| (w / mass, x)).collect()
        } else {
            atoms
        };
        let mass: f64 = atoms.iter().map(|(w, _)| w).sum();
        let p = [1.0, 2.0, 1.5][i % 3];
        let f = HomFn::mu(DiscreteMeasure::new(atoms).unwrap(), p).unwrap();
        let l = fbl_lower(s, &f, p, &budget, rng.random()).map_err(|e| e.to_string())?;
        if l.lower > mass + 1e-6 {
            return Err(format!("{s:?} p = {p}: fbl_lower {} > ||mu|| {mass}", l.lower));
        }
        max_ratio = max_ratio.max(l.lower / mass);
    }
    Ok(format!("50 measures, max fbl_lower / ||mu|| = {max_ratio:.4}"))
}

fn c15_mutations() -> Outcome {
    let real = verify_suite(15);
    if !real.passed() {
        let names: Vec<_> = real.failures().map(|c| c.name.clone()).collect();
        return Err(format!("unmutated build fails {names:?}"));
    }
    let mut caught = Vec::new();
    for m in Mutation::ALL {
        let r = run_suite(15, &Mutant(m));
        let first = r.failures().next().map(|c| c.name.clone());
        match first {
            Some(name) => caught.push(format!("{m:?} by {name}")),
            None => return Err(format!("{m:?} survived")),
        }
    }
    Ok(caught.join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 15] = [
        ("delta isometry", c1_delta_isometry),
        ("norm function values", c2_norm_function),
        ("sign formula oracle", c3_sign_formula),
        ("norm domination", c4_norm_domination),
        ("ideal upper bound", c5_ideal_upper_bound),
        ("dim-1 completeness", c6_dim1),
        ("divergence witness", c7_divergence),
        ("kernel witness", c8_kernel),
        ("gap witness", c9_gap),
        ("phi extraction", c10_extraction),
        ("composition norm identity", c11_comp_norm),
        ("p-monotonicity", c12_p_monotonicity),
        ("quasi-linearity bound", c13_quasilinearity),
        ("measure bound", c14_measure_bound),
        ("mutation sensitivity", c15_mutations),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(d) => println!("criterion {:>2} {name}: PASS ({d}) [{ms} ms]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({d}) [{ms} ms]", i + 1);
            }
        }
    }
    println!("{} of 15 criteria passed", 15 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
