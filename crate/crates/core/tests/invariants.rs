use geomlab::harmonic::{hp_norm, kk_member, HarmonicFunction};
use geomlab::lattice_convex::{check_eq3, complex_convexity_inequalities, krivine_constant};
use geomlab::moduli::{delta_phi, monotonicity_modulus, ModulusConfig};
use geomlab::random::{expect_real, ConvexGauge, ExpectConfig, SymmetricRv};
use geomlab::report::Status;
use geomlab::series::{check_scaling_monotone, check_submartingale, series_expectation, thm13_verify, RandomizedSeries};
use geomlab::space::{make_lp, pconvexify, Field, KotheLattice, NormedSpace, Young};
use proptest::prelude::*;

fn vec_of(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, d)
}

fn space_strategy() -> impl Strategy<Value = NormedSpace> {
    prop_oneof![
        (1usize..5, prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0), Just(f64::INFINITY)])
            .prop_map(|(d, p)| make_lp(d, p, Field::Real).unwrap()),
        (1usize..4).prop_map(|d| NormedSpace::Kothe(KotheLattice::orlicz(vec![1.0; d], Young::Exp).unwrap())),
        (1usize..4).prop_map(|d| NormedSpace::Kothe(KotheLattice::top_k_lorentz(vec![1.0; d], vec![1.0; d]).unwrap())),
    ]
}

fn lattice_strategy() -> impl Strategy<Value = KotheLattice> {
    prop_oneof![
        (2usize..5, prop_oneof![Just(1.0), Just(2.0), Just(4.0), Just(f64::INFINITY)])
            .prop_map(|(d, p)| KotheLattice::lp(d, p).unwrap()),
        (2usize..5).prop_map(|d| KotheLattice::orlicz(vec![0.5; d], Young::Power { p: 3.0 }).unwrap()),
        (2usize..5).prop_map(|d| {
            let mut c = vec![0.0; d];
            c[0] = 1.0;
            c[1] = 1.0;
            KotheLattice::top_k_lorentz(vec![1.0; d], c).unwrap()
        }),
    ]
}

fn gauge() -> impl Strategy<Value = ConvexGauge> {
    prop_oneof![
        Just(ConvexGauge::AbsoluteValue),
        (1.2f64..4.0).prop_map(|p| ConvexGauge::power(p).unwrap()),
    ]
}

fn series_strategy() -> impl Strategy<Value = RandomizedSeries> {
    (space_strategy(), 1usize..6).prop_flat_map(|(space, n)| {
        let d = space.real_dim();
        (vec_of(d), prop::collection::vec(vec_of(d), n)).prop_map(move |(x0, steps)| {
            RandomizedSeries::uniform(space.clone(), x0, steps, SymmetricRv::rademacher()).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expectations_form_a_submartingale(series in series_strategy(), phi in gauge()) {
        let r = check_submartingale(&series, &phi, &ExpectConfig::default(), 1e-10).unwrap();
        prop_assert!(r.max_violation <= 1e-10, "{:?}", r.expectations);
    }

    #[test]
    fn quadrature_laws_keep_the_submartingale(space in space_strategy(), seed in 0u64..1000) {
        let d = space.real_dim();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let x0 = space.random_vector(&mut rng);
        let steps = vec![space.random_vector(&mut rng), space.random_vector(&mut rng)];
        prop_assert_eq!(x0.len(), d);
        let rvs = vec![SymmetricRv::cos_theta(64).unwrap(), SymmetricRv::uniform(16).unwrap()];
        let s = RandomizedSeries::new(space, x0, steps, rvs).unwrap();
        let r = check_submartingale(&s, &ConvexGauge::power(2.0).unwrap(), &ExpectConfig::default(), 1e-10).unwrap();
        prop_assert!(r.max_violation <= 1e-10);
    }

    #[test]
    fn scaling_is_even_convex_increasing(space in space_strategy(), seed in 0u64..1000, phi in gauge()) {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let x = space.random_vector(&mut rng);
        let y = space.random_vector(&mut rng);
        let grid: Vec<f64> = (-10..=10).map(|k| k as f64 * 0.2).collect();
        let r = check_scaling_monotone(&space, &x, &y, &phi, SymmetricRv::rademacher(), &grid, &ExpectConfig::default(), 1e-10).unwrap();
        prop_assert_eq!(r.evenness_violation, 0.0);
        prop_assert!(r.monotone_violation <= 1e-10 && r.convexity_violation <= 1e-10, "{:?}", r);
    }

    #[test]
    fn strict_gain_for_strictly_convex_gauges(a in -3.0f64..3.0, b in prop_oneof![-2.0f64..-1e-3, 1e-3f64..2.0], p in 1.1f64..4.0) {
        let phi = ConvexGauge::power(p).unwrap();
        let e = expect_real(&[SymmetricRv::rademacher()], &|r| phi.eval((a + r[0].re * b).abs()), &ExpectConfig::default()).unwrap();
        prop_assert!(e.value > phi.eval(a.abs()));
    }

    #[test]
    fn expectation_is_symmetric_and_monotone(c in -2.0f64..2.0, k in 0.0f64..3.0) {
        let rv = SymmetricRv::cos_theta(32).unwrap();
        let cfg = ExpectConfig::default();
        let g = |t: f64| (c + t).abs().powi(3) + t;
        let plus = expect_real(&[rv], &|r| g(r[0].re), &cfg).unwrap().value;
        let minus = expect_real(&[rv], &|r| g(-r[0].re), &cfg).unwrap().value;
        prop_assert_eq!(plus.to_bits(), minus.to_bits());
        let bigger = expect_real(&[rv], &|r| g(r[0].re) + k, &cfg).unwrap().value;
        prop_assert!(bigger >= plus);
    }

    #[test]
    fn rademacher_shift_identity(space in space_strategy(), seed in 0u64..1000, n in 2usize..6, phi in gauge()) {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| space.random_vector(&mut rng)).collect();
        let zero = vec![0.0; space.real_dim()];
        let cfg = ExpectConfig::default();
        let all = RandomizedSeries::uniform(space.clone(), zero, xs.clone(), SymmetricRv::rademacher()).unwrap();
        let fixed = RandomizedSeries::uniform(space, xs[0].clone(), xs[1..].to_vec(), SymmetricRv::rademacher()).unwrap();
        let a = series_expectation(&all, &phi, &cfg).unwrap().value;
        let b = series_expectation(&fixed, &phi, &cfg).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn gain_bound_holds_on_unit_tuples(space in space_strategy(), seed in 0u64..1000, n in 2usize..5) {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| space.random_unit(&mut rng)).collect();
        let r = thm13_verify(&space, &xs, &ConvexGauge::power(2.0).unwrap(), &vec![SymmetricRv::rademacher(); n - 1], &ExpectConfig::default(), 1e-10).unwrap();
        prop_assert!(r.status != Status::Violation, "{:?}", r);
        if r.status == Status::Pass {
            prop_assert!(r.delta > 0.0 || r.vacuous);
        }
    }

    #[test]
    fn lattice_norms_are_monotone(lattice in lattice_strategy(), seed in 0u64..1000) {
        let (excess, gap) = geomlab::space::check_lattice_monotone(&lattice, 50, seed);
        prop_assert!(excess <= 1e-12);
        prop_assert!(gap <= 1e-12);
    }

    #[test]
    fn pconvexification_matches_base(lattice in lattice_strategy(), p in 1.5f64..4.0, u in vec_of(4)) {
        let u = &u[..lattice.atoms().min(4)];
        if u.len() == lattice.atoms() {
            let s = pconvexify(&lattice, p).unwrap();
            let base = lattice.norm(&s.to_base(u));
            prop_assert_eq!(s.norm(u).powf(p).to_bits(), base.powf(1.0 / p).powf(p).to_bits());
        }
    }

    #[test]
    fn axioms_hold_for_generated_spaces(space in space_strategy(), seed in 0u64..1000) {
        prop_assert!(space.check_axioms(100, seed).holds(1e-10));
    }

    #[test]
    fn eq3_chain_holds_stepwise(lattice in lattice_strategy(), p in prop_oneof![Just(1.5), Just(2.0), Just(3.0)], seed in 0u64..1000) {
        let c = krivine_constant(p).unwrap().c;
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let space = NormedSpace::Kothe(lattice.clone());
        let u = space.random_unit(&mut rng);
        let v = space.random_unit(&mut rng);
        let r = check_eq3(&lattice, p, &u, &v, c, 1e-9).unwrap();
        prop_assert_eq!(r.status, Status::Pass, "{:?}", r);
    }

    #[test]
    fn circle_chain_holds(lattice in lattice_strategy(), seed in 0u64..1000) {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let space = geomlab::space::complexify(&lattice).unwrap();
        let x = space.random_vector(&mut rng);
        let y = space.random_vector(&mut rng);
        let r = complex_convexity_inequalities(&lattice, &x, &y, 1e-6).unwrap();
        prop_assert_eq!(r.status, Status::Pass, "{:?}", r);
    }

    #[test]
    fn circle_means_grow_with_radius(seed in 0u64..1000, p in 1.0f64..4.0) {
        let space = make_lp(2, 3.0, Field::Real).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let x = space.random_vector(&mut rng);
        let y = space.random_vector(&mut rng);
        let f = kk_member(&space, &x, 1 + (seed % 4) as u32, &y).unwrap();
        let h = hp_norm(&f, p, None, 64).unwrap();
        prop_assert!(h.monotone_violation <= 1e-10, "{:?}", h.means);
        let c = HarmonicFunction::constant(&space, &x).unwrap();
        prop_assert!(hp_norm(&c, p, None, 64).unwrap().value <= h.value + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn moduli_grow_with_epsilon(d in 2usize..4, p in prop_oneof![Just(1.5), Just(2.0), Just(4.0)], seed in 0u64..100) {
        let space = make_lp(d, p, Field::Real).unwrap();
        let mut cfg = ModulusConfig::default().without_oracle().with_seed(seed);
        cfg.search.starts = 8;
        let phi = ConvexGauge::power(2.0).unwrap();
        let values: Vec<f64> = [0.2, 0.5, 0.8]
            .iter()
            .map(|&e| delta_phi(&space, &phi, &SymmetricRv::rademacher(), e, &cfg).unwrap().value)
            .collect();
        prop_assert!(values.windows(2).all(|w| w[1] >= w[0] - 1e-4), "{values:?}");
        let lattice = KotheLattice::lp(d, p).unwrap();
        let m: Vec<f64> = [0.2, 0.5, 0.8]
            .iter()
            .map(|&e| monotonicity_modulus(&lattice, 1.0, e, &cfg).unwrap().value)
            .collect();
        prop_assert!(m.windows(2).all(|w| w[1] >= w[0] - 1e-4), "{m:?}");
    }
}
