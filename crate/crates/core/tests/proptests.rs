//! Property tests for invariants of the index helpers, algebra, schedule,
//! predicates and config.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nlkg_kam::config::RunConfig;
use nlkg_kam::hamalg::{parse_hamiltonian, poisson_bracket, write_hamiltonian, Meta};
use nlkg_kam::indices::{decreasing_rearrangement, floor_index, momentum, weight, ExponentMap, ModeVec};
use nlkg_kam::kam::{rho0, schedule_params};
use nlkg_kam::resonance::{
    check_nr_basic, check_nr_main, check_nr_with_b, nr_threshold, FrequencySample, IntegerVector,
};
use nlkg_kam::verify::{max_rel_diff, random_hamiltonian};

fn meta() -> Meta {
    Meta {
        sigma: 3.0,
        r: 1.5,
        c: 1.0,
        n_max: 5,
        d_max: 8,
    }
}

fn exponent_map() -> impl Strategy<Value = ExponentMap> {
    prop::collection::vec((-6i32..=6, 1u32..4), 0..5).prop_map(|p| ExponentMap::from_pairs(p))
}

fn integer_vector() -> impl Strategy<Value = IntegerVector> {
    prop::collection::vec((-6i32..=6, -3i32..=3), 1..5)
        .prop_filter_map("|ℓ| ≥ 3", |pairs| {
            let v = IntegerVector::new(pairs).ok()?;
            (v.l1() >= 3).then_some(v)
        })
}

fn omega(seed: u64) -> ModeVec<f64> {
    FrequencySample::draw(1.0, 6, &mut ChaCha8Rng::seed_from_u64(seed)).omega
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn weight_even_and_monotone(n in -1_000_000i64..1_000_000, sigma in 2.01f64..=3.0) {
        prop_assert_eq!(weight(n, sigma), weight(-n, sigma));
        prop_assert!(weight(n.abs() + 1, sigma) >= weight(n, sigma));
        if n.abs() <= 1024 {
            prop_assert_eq!(weight(n, sigma), weight(0, sigma));
            prop_assert_eq!(floor_index(n), 1024);
        }
    }

    #[test]
    fn rearrangement_sorted(items in prop::collection::vec((-3000i64..3000, 0u64..4), 0..8)) {
        let r = decreasing_rearrangement(items.iter().copied());
        prop_assert_eq!(r.len() as u64, items.iter().map(|&(_, m)| m).sum::<u64>());
        prop_assert!(r.values().windows(2).all(|w| w[0] >= w[1]));
        if !r.is_empty() {
            prop_assert_eq!(r.nth_star(1), items.iter().filter(|&&(_, m)| m > 0).map(|&(n, _)| n.unsigned_abs()).max().unwrap());
        }
        prop_assert_eq!(r.nth_star(r.len() + 1), 0);
    }

    #[test]
    fn momentum_antisymmetric(k in exponent_map(), kp in exponent_map()) {
        prop_assert_eq!(momentum(&k, &kp), -momentum(&kp, &k));
        prop_assert_eq!(momentum(&k, &k), 0);
    }

    #[test]
    fn threshold_monotone_in_gamma(ell in integer_vector(), g1 in -20f64..0.0, g2 in -20f64..0.0) {
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        let a = nr_threshold(&ell, 10f64.powf(lo)).unwrap();
        let b = nr_threshold(&ell, 10f64.powf(hi)).unwrap();
        prop_assert!(a.log_value <= b.log_value);
    }

    #[test]
    fn predicates_symmetric_under_negation(ell in integer_vector(), seed in 0u64..1000, e in -3f64..120.0, b in -50i64..50) {
        let w = omega(seed);
        let gamma = 10f64.powf(e);
        let neg = ell.negated();
        prop_assert_eq!(check_nr_main(&ell, &w, gamma).unwrap(), check_nr_main(&neg, &w, gamma).unwrap());
        prop_assert_eq!(check_nr_basic(&ell, &w, gamma), check_nr_basic(&neg, &w, gamma));
        prop_assert_eq!(
            check_nr_with_b(&ell, b, &w, gamma.min(1.0), 1.0).unwrap(),
            check_nr_with_b(&neg, -b, &w, gamma.min(1.0), 1.0).unwrap()
        );
        prop_assert_eq!(ell.momentum(), -neg.momentum());
    }

    #[test]
    fn threshold_shrinks_with_entries(n in -6i32..=6, l in 1i32..5) {
        let small = IntegerVector::new([(n, l), (7, 1), (8, 1)]).unwrap();
        let big = IntegerVector::new([(n, l + 1), (7, 1), (8, 1)]).unwrap();
        let lt = |v: &IntegerVector| nr_threshold(v, 1.0).unwrap().log_value;
        prop_assert!(lt(&big) <= lt(&small));
    }

    #[test]
    fn draws_in_box(seed in any::<u64>(), c in 1f64..50.0, n_max in 0u32..12) {
        let s = FrequencySample::draw(c, n_max, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(s.in_box());
    }

    #[test]
    fn schedule_recursions(s in 0u32..6, e in -9f64..-1.0) {
        let eps0 = 10f64.powf(e);
        let a = schedule_params(s, eps0).unwrap();
        let b = a.next();
        prop_assert!((b.rho - (a.rho + 3.0 * a.delta)).abs() <= 1e-15 * b.rho);
        prop_assert!((b.eps.ln() - 1.5 * a.eps.ln()).abs() <= 1e-12 * b.eps.ln().abs());
        prop_assert!((b.eta / (a.eta * a.lambda / 20.0) - 1.0).abs() < 1e-12);
        prop_assert!((a.lambda.ln() - 0.01 * a.eps.ln()).abs() <= 1e-12 * a.eps.ln().abs());
        prop_assert!(a.rho >= rho0() && a.rho < 2.0 * rho0());
        prop_assert!(b.d > a.d);
    }

    #[test]
    fn text_round_trip(seed in any::<u64>(), terms in 0usize..30, allow_j in any::<bool>()) {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hamiltonian(&mut g, meta(), terms, 1, 8, allow_j);
        let text = write_hamiltonian(&h);
        let back = parse_hamiltonian(&text).unwrap();
        prop_assert_eq!(write_hamiltonian(&back), text);
        prop_assert_eq!(back, h);
    }

    #[test]
    fn bracket_antisymmetric(seed in any::<u64>()) {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        let f = random_hamiltonian(&mut g, meta(), 6, 2, 4, false);
        let h = random_hamiltonian(&mut g, meta(), 6, 2, 4, false);
        let fh = poisson_bracket(&f, &h).unwrap();
        let hf = poisson_bracket(&h, &f).unwrap();
        prop_assert!(max_rel_diff(&fh, &hf.scaled(Complex64::new(-1.0, 0.0))) <= 1e-12);
    }

    #[test]
    fn config_round_trip(c in 1f64..100.0, e in -9f64..-1.0, seed in 0u64..100, n_max in 2u32..6, steps in 1u32..5) {
        let text = format!(r#"{{"c":{c},"eps":{},"V":{{"seed":{seed}}},"N_max":{n_max},"steps":{steps}}}"#, 10f64.powf(e));
        let cfg = RunConfig::from_json(&text).unwrap();
        let again = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        prop_assert_eq!(again, cfg);
    }
}
