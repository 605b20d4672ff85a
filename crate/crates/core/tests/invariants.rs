use fblab::ast::{homfn_from_json, homfn_to_json};
use fblab::rng::seeded;
use fblab::verify::{random_lattice_expr, test_spaces};
use fblab::{fbl_bracket, fbl_upper, pairing, Budget, FuncTuple, Functional, HomFn, Space, Vector};
use proptest::prelude::*;

fn coords(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}

fn space_and_dim() -> impl Strategy<Value = Space> {
    (0..test_spaces().len()).prop_map(|i| test_spaces()[i].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pairing_is_bounded_by_norms(s in space_and_dim(), seed in any::<u64>()) {
        use rand::Rng as _;
        let mut rng = seeded(seed);
        let n = s.dim();
        let f = Functional((0..n).map(|_| rng.random_range(-5.0..5.0)).collect());
        let v = Vector((0..n).map(|_| rng.random_range(-5.0..5.0)).collect());
        let bound = s.dual_norm(&f).unwrap() * s.norm(&v).unwrap();
        prop_assert!(pairing(&f, &v).abs() <= bound * (1.0 + 1e-9) + 1e-300);
    }

    #[test]
    fn norms_are_absolutely_homogeneous(v in coords(3), lambda in -8.0..8.0f64) {
        for s in [Space::l1(3), Space::l2(3), Space::linf(3)] {
            let a = s.norm(&Vector(v.clone()).scaled(lambda)).unwrap();
            let b = lambda.abs() * s.norm(&Vector(v.clone())).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn lattice_operations_are_pointwise(s in space_and_dim(), seed in any::<u64>(), x in coords(4)) {
        let mut rng = seeded(seed);
        let f = random_lattice_expr(&mut rng, &s, 3, s.dim());
        let g = random_lattice_expr(&mut rng, &s, 3, s.dim());
        let x = Functional(x[..s.dim()].to_vec());
        let (a, b) = (f.eval(&s, &x).unwrap(), g.eval(&s, &x).unwrap());
        prop_assert_eq!(f.clone().max(g.clone()).eval(&s, &x).unwrap(), a.max(b));
        prop_assert_eq!(f.clone().min(g).eval(&s, &x).unwrap(), a.min(b));
        prop_assert_eq!(f.abs().eval(&s, &x).unwrap(), a.abs());
    }

    #[test]
    fn positive_homogeneity(s in space_and_dim(), seed in any::<u64>(), x in coords(4), t in 0.0..20.0f64) {
        let mut rng = seeded(seed);
        let f = random_lattice_expr(&mut rng, &s, 3, s.dim()).max(HomFn::NormFn);
        let x = Functional(x[..s.dim()].to_vec());
        let a = f.eval(&s, &x.scaled(t)).unwrap();
        let b = t * f.eval(&s, &x).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
    }

    #[test]
    fn ast_round_trip(s in space_and_dim(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let f = random_lattice_expr(&mut rng, &s, 4, s.dim()).min(HomFn::NormFn.scale(2.0));
        let back = homfn_from_json(&homfn_to_json(&f), &s).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn weak_norm_scales(s in space_and_dim(), seed in any::<u64>(), lambda in -4.0..4.0f64) {
        use rand::Rng as _;
        prop_assume!(s.is_polytopal());
        let mut rng = seeded(seed);
        let m = rng.random_range(1..5);
        let t: Vec<Functional> = (0..m)
            .map(|_| Functional((0..s.dim()).map(|_| rng.random_range(-3.0..3.0)).collect()))
            .collect();
        let ts: Vec<Functional> = t.iter().map(|x| x.scaled(lambda)).collect();
        for p in [1.0, 1.5, 2.0] {
            let a = FuncTuple::new(t.clone()).unwrap().weak_p_norm(&s, p, &Budget::light(), 0).unwrap();
            let b = FuncTuple::new(ts.clone()).unwrap().weak_p_norm(&s, p, &Budget::light(), 0).unwrap();
            prop_assert!((b.lower - lambda.abs() * a.lower).abs() <= 1e-9 * b.lower.max(1.0));
        }
    }

    #[test]
    fn delta_upper_is_the_norm(s in space_and_dim(), x in coords(4), p in 1.0..4.0f64) {
        let x = Vector(x[..s.dim()].to_vec());
        let u = fbl_upper(&s, &HomFn::Delta(x.clone()), p).unwrap();
        prop_assert_eq!(u.upper, s.norm(&x).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bracket_is_consistent(s in space_and_dim(), seed in any::<u64>(), p in 1.0..3.0f64) {
        let mut rng = seeded(seed);
        let f = random_lattice_expr(&mut rng, &s, 2, s.dim());
        let e = fbl_bracket(&s, &f, p, &Budget::light(), seed).unwrap();
        prop_assert!(e.lower <= e.upper);
    }
}
