//! Brackets, canonical forms and norms against independent evaluations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nlkg_kam::hamalg::{
    norm, norm_plus, poisson_bracket, Form, Hamiltonian, Meta, Monomial, NormContext, RawTerm, Var,
};
use nlkg_kam::indices::{weight, ExponentMap, ModeVec};
use nlkg_kam::verify::{random_coeff, random_hamiltonian, random_monomial};

fn meta(n_max: u32, d_max: u32) -> Meta {
    Meta {
        sigma: 3.0,
        r: 1.5,
        c: 1.0,
        n_max,
        d_max,
    }
}

fn random_point(g: &mut ChaCha8Rng, n_max: u32, scale: f64) -> ModeVec<Complex64> {
    ModeVec::from_fn(n_max, |_| {
        Complex64::new(g.random_range(-1.0..1.0), g.random_range(-1.0..1.0)) * scale
    })
}

fn random_i0(g: &mut ChaCha8Rng, n_max: u32) -> ModeVec<f64> {
    ModeVec::from_fn(n_max, |_| g.random_range(0.0..0.3))
}

/// Wirtinger derivatives of `H(z, conj z)` by central differences.
fn fd_gradient(h: &Hamiltonian, z: &ModeVec<Complex64>, i0: &ModeVec<f64>, var: Var) -> ModeVec<Complex64> {
    let step = 1e-5;
    z.map(|n, _| {
        let at = |dz: Complex64| {
            let mut w = z.clone();
            w[n] += dz;
            h.evaluate(&w, i0)
        };
        let dx = (at(Complex64::new(step, 0.0)) - at(Complex64::new(-step, 0.0))) / (2.0 * step);
        let dy = (at(Complex64::new(0.0, step)) - at(Complex64::new(0.0, -step))) / (2.0 * step);
        match var {
            Var::Z => 0.5 * (dx - Complex64::i() * dy),
            Var::ZBar => 0.5 * (dx + Complex64::i() * dy),
        }
    })
}

#[test]
fn bracket_matches_finite_difference_definition() {
    let mut g = ChaCha8Rng::seed_from_u64(21);
    let m = meta(3, 8);
    for _ in 0..40 {
        let a = random_hamiltonian(&mut g, m, 4, 1, 4, true);
        let b = random_hamiltonian(&mut g, m, 4, 1, 4, true);
        let ab = poisson_bracket(&a, &b).unwrap();
        let z = random_point(&mut g, 3, 0.8);
        let i0 = random_i0(&mut g, 3);
        let (az, azb) = (fd_gradient(&a, &z, &i0, Var::Z), fd_gradient(&a, &z, &i0, Var::ZBar));
        let (bz, bzb) = (fd_gradient(&b, &z, &i0, Var::Z), fd_gradient(&b, &z, &i0, Var::ZBar));
        let mut expected = Complex64::new(0.0, 0.0);
        for (n, _) in z.iter() {
            expected += Complex64::i() * (azb[n] * bz[n] - az[n] * bzb[n]);
        }
        let got = ab.evaluate(&z, &i0);
        let scale = a.max_abs_coeff() * b.max_abs_coeff();
        assert!((got - expected).norm() <= 1e-6 * scale, "{got} vs {expected}");
    }
}

#[test]
fn symbolic_gradient_matches_finite_differences() {
    let mut g = ChaCha8Rng::seed_from_u64(22);
    let m = meta(3, 8);
    for _ in 0..30 {
        let h = random_hamiltonian(&mut g, m, 6, 1, 6, true);
        let z = random_point(&mut g, 3, 0.8);
        let i0 = random_i0(&mut g, 3);
        for var in [Var::Z, Var::ZBar] {
            let sym = h.gradient(&z, &i0, var);
            let fd = fd_gradient(&h, &z, &i0, var);
            for (n, s) in sym.iter() {
                assert!((s - fd[n]).norm() <= 1e-7 * h.max_abs_coeff(), "{s} vs {}", fd[n]);
            }
        }
    }
}

#[test]
fn canonical_forms_evaluate_like_the_raw_sum() {
    let mut g = ChaCha8Rng::seed_from_u64(23);
    let m = meta(3, 8);
    for _ in 0..50 {
        let raw: Vec<RawTerm> = (0..5)
            .map(|_| {
                let mono = random_monomial(&mut g, 3, 1, 8, false);
                let mut k = mono.k.clone();
                let mut kp = mono.kp.clone();
                // add diagonal pairs, the part canonicalization rewrites
                if g.random_bool(0.7) {
                    let n = g.random_range(-3..=3);
                    if mono.degree() <= 6 {
                        k.add(n, 1);
                        kp.add(n, 1);
                    }
                }
                RawTerm {
                    coeff: random_coeff(&mut g),
                    k,
                    kp,
                }
            })
            .collect();
        let h = Hamiltonian::canonicalize(m, &raw).unwrap();
        h.validate().unwrap();
        let expanded = h.expand_j().unwrap();
        assert!(expanded.iter().all(|(mono, _)| mono.b.is_empty()));
        let z = random_point(&mut g, 3, 0.9);
        let i0 = random_i0(&mut g, 3);
        let mut direct = Complex64::new(0.0, 0.0);
        for t in &raw {
            let mut v = t.coeff;
            for (n, e) in t.k.iter() {
                v *= z[n].powu(e);
            }
            for (n, e) in t.kp.iter() {
                v *= z[n].conj().powu(e);
            }
            direct += v;
        }
        for form in [&h, &expanded] {
            let got = form.evaluate(&z, &i0);
            assert!((got - direct).norm() <= 1e-13 * direct.norm().max(1.0), "{got} vs {direct}");
        }
        assert!(expanded.canonical().iter().all(|(mono, _)| mono.is_canonical()));
    }
}

fn em(p: &[(i32, u32)]) -> ExponentMap {
    ExponentMap::from_pairs(p.iter().copied())
}

#[test]
fn bracket_with_normal_form_multiplies_by_divisor() {
    let m = meta(4, 8);
    let lambda = ModeVec::from_fn(4, |n| (1.0 + (n * n) as f64 + 0.1 * n as f64).sqrt());
    let n = nlkg_kam::nlkg::normal_form_hamiltonian(&lambda, m).unwrap();
    let mut g = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..50 {
        let mono = random_monomial(&mut g, 4, 1, 6, true);
        let c = random_coeff(&mut g);
        let f = Hamiltonian::from_terms(m, Form::Canonical, [(mono.clone(), c)]).unwrap();
        let br = poisson_bracket(&n, &f).unwrap();
        let omega: f64 = mono.k.iter().map(|(j, e)| e as f64 * lambda[j]).sum::<f64>()
            - mono.kp.iter().map(|(j, e)| e as f64 * lambda[j]).sum::<f64>();
        let expected = Complex64::i() * omega * c;
        if omega == 0.0 {
            assert!(br.is_zero());
            continue;
        }
        assert_eq!(br.len(), 1, "{mono}");
        assert!((br.get(&mono) - expected).norm() <= 1e-14 * expected.norm());
    }
    let z = Hamiltonian::from_terms(m, Form::Canonical, [(Monomial::zz(em(&[(2, 1), (-2, 1)]), em(&[])), Complex64::new(1.0, 0.0))]).unwrap();
    let br = poisson_bracket(&n, &z).unwrap();
    assert!(br.len() == 1);
}

#[test]
fn momentum_is_closed_under_brackets() {
    let mut g = ChaCha8Rng::seed_from_u64(25);
    let m = meta(5, 10);
    for _ in 0..100 {
        let a = random_hamiltonian(&mut g, m, 5, 1, 6, true);
        let b = random_hamiltonian(&mut g, m, 5, 1, 6, true);
        let ab = poisson_bracket(&a, &b).unwrap();
        assert!(ab.iter().all(|(mono, _)| mono.momentum() == 0));
        ab.validate().unwrap();
    }
}

/// `Σ_a e^{−δ Σ a_n ln^σ⌊n⌋}` over `|a| ≤ D_max` supported in `|n| ≤ N_max`,
/// in log space.
fn log_amplitude_sum(n_max: u32, d_max: u32, sigma: f64, delta: f64) -> f64 {
    // coefficients of Π_n 1/(1 − x_n) up to total degree d_max, grouped by weight
    let mut states: Vec<(u32, f64)> = vec![(0, 0.0)];
    for n in -(n_max as i64)..=n_max as i64 {
        let w = delta * weight(n, sigma);
        let mut next = Vec::new();
        for &(deg, lw) in &states {
            for e in 0..=(d_max - deg) {
                next.push((deg + e, lw - e as f64 * w));
            }
        }
        states = next;
    }
    let top = states.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    top + states.iter().map(|s| (s.1 - top).exp()).sum::<f64>().ln()
}

#[test]
fn amplitude_sum_bound() {
    for sigma in [2.1, 2.5, 3.0] {
        for delta in [1e-4, 1e-3, 1e-2, 0.1, 1.0] {
            let lhs = log_amplitude_sum(3, 8, sigma, delta);
            let rhs = (18.0 / delta) * (4.0 / delta).powf(1.0 / (sigma - 1.0)).exp();
            assert!(lhs <= rhs, "σ={sigma} δ={delta}: {lhs} > {rhs}");
        }
    }
}

#[test]
fn norms_on_pure_j_and_scaling() {
    let m = meta(3, 8);
    let j0 = Hamiltonian::from_terms(m, Form::Canonical, [(Monomial::new(em(&[]), em(&[(0, 1)]), em(&[]), em(&[])), Complex64::new(1.0, 0.0))]).unwrap();
    for c in [1.0, 7.0] {
        for rho in [1e-3, 0.05] {
            let ctx = NormContext::new(3.0, rho, 1.5, c).unwrap();
            assert_eq!(norm(&j0, &ctx), 1.0);
        }
    }
    let mut g = ChaCha8Rng::seed_from_u64(26);
    let h = random_hamiltonian(&mut g, m, 10, 2, 8, true);
    let ctx = NormContext::new(3.0, 0.01, 1.5, 1.0).unwrap();
    // exact up to the rounding of the scaled coefficients
    let scaled = norm(&h.scaled(Complex64::new(2.5, 0.0)), &ctx);
    assert!((scaled - 2.5 * norm(&h, &ctx)).abs() <= 4.0 * f64::EPSILON * scaled);
    assert_eq!(norm(&h.scaled(Complex64::new(-4.0, 0.0)), &ctx), 4.0 * norm(&h, &ctx));
    // larger ρ weighs high weights down
    let lower = ctx.with_rho(0.02).unwrap();
    assert!(norm(&h, &lower) <= norm(&h, &ctx));
    let hp = h.expand_j().unwrap();
    assert!(norm_plus(&hp, &lower).unwrap() <= norm_plus(&hp, &ctx).unwrap());
    assert!(norm_plus(&h, &ctx).is_err() || h.iter().all(|(mono, _)| mono.b.is_empty()));
}
