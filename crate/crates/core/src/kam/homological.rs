use num_complex::Complex64;

use super::KamError;
use crate::hamalg::{
    norm, poisson_bracket, term_log_weight, Form, HamError, Hamiltonian, Meta, Monomial, NormContext,
};
use crate::indices::{ExponentMap, ModeVec};
use crate::resonance::{small_divisor, IntegerVector};

#[derive(Clone, Debug)]
pub struct HomologicalSolution {
    pub f: Hamiltonian,
    /// `[R⁰]`: terms of `R⁰` with `k = k' = 0`.
    pub r0_res: Hamiltonian,
    /// `[R¹]`.
    pub r1_res: Hamiltonian,
    /// Smallest `|Σ ℓ_n λ_n|` met, `+∞` if `F = 0`.
    pub min_divisor: f64,
}

fn is_resonant(m: &Monomial) -> bool {
    m.k.is_empty() && m.kp.is_empty()
}

/// Terms with `k = k' = 0`.
pub fn resonant_part(h: &Hamiltonian) -> Hamiltonian {
    Hamiltonian::from_terms(*h.meta(), h.form(), h.iter().filter(|(m, _)| is_resonant(m)).map(|(m, c)| (m.clone(), *c)))
        .expect("subset of a valid Hamiltonian")
}

/// The `λ̃_n` of a diagonal normal form: coefficients of the bare `J_n` terms.
/// Constant terms (`b = k = k' = 0`) are ignored.
pub fn effective_frequencies(n: &Hamiltonian) -> Result<ModeVec<f64>, KamError> {
    let meta = n.meta();
    let mut lambda = ModeVec::filled(meta.n_max, 0.0);
    for (m, c) in n.iter() {
        if !is_resonant(m) || m.b.total() > 1 || (m.b.total() == 1 && !m.a.is_empty()) {
            return Err(HamError::RepresentationError(format!("normal form is not diagonal: term {m}")).into());
        }
        if let Some((j, _)) = m.b.iter().next() {
            if c.im.abs() > 1e-14 * c.norm() {
                return Err(HamError::RepresentationError(format!("complex frequency at mode {j}")).into());
            }
            lambda[j] += c.re;
        }
    }
    Ok(lambda)
}

/// `Σ_n (k_n − k'_n) λ_n`.
pub fn divisor(k: &ExponentMap, kp: &ExponentMap, lambda: &ModeVec<f64>) -> f64 {
    match IntegerVector::from_exponents(k, kp) {
        Some(ell) => small_divisor(&ell, lambda),
        None => 0.0,
    }
}

/// `{J_0, z_0} / z_0`: the factor the bracket with a `J_n` produces.
fn bracket_phase(meta: Meta) -> Result<Complex64, HamError> {
    let one = Complex64::new(1.0, 0.0);
    let z0 = Monomial::zz(ExponentMap::single(0, 1), ExponentMap::new());
    let j0 = Monomial::new(ExponentMap::new(), ExponentMap::single(0, 1), ExponentMap::new(), ExponentMap::new());
    let j = Hamiltonian::from_terms(meta, Form::Canonical, [(j0, one)])?;
    let z = Hamiltonian::from_terms(meta, Form::Canonical, [(z0.clone(), one)])?;
    Ok(poisson_bracket(&j, &z)?.get(&z0))
}

/// Solves `{N, F} + R⁰ + R¹ − [R⁰] − [R¹] = 0` term by term.
///
/// Divisors below `gamma_floor` raise `SmallDivisor`, except for `|ℓ| ≤ 2`
/// with `|divisor| ≥ 1`. An exactly vanishing divisor is always rejected.
pub fn solve_homological(
    n: &Hamiltonian,
    r0: &Hamiltonian,
    r1: &Hamiltonian,
    gamma_floor: f64,
) -> Result<HomologicalSolution, KamError> {
    let lambda = effective_frequencies(n)?;
    let meta = *n.meta();
    if r0.meta() != &meta || r1.meta() != &meta {
        return Err(HamError::MetadataMismatch.into());
    }
    for h in [r0, r1] {
        if h.form() != Form::Canonical {
            return Err(HamError::RepresentationError("homological equation needs canonical form".into()).into());
        }
    }
    let phase = bracket_phase(meta)?;
    let mut terms = Vec::new();
    let mut min_divisor = f64::INFINITY;
    for (m, c) in r0.iter().chain(r1.iter()) {
        if is_resonant(m) {
            continue;
        }
        let ell = IntegerVector::from_exponents(&m.k, &m.kp)
            .ok_or_else(|| HamError::RepresentationError(format!("term {m} is not canonical")))?;
        let omega = small_divisor(&ell, &lambda);
        let exempt = ell.l1() <= 2 && omega.abs() >= 1.0;
        if omega == 0.0 || (!exempt && omega.abs() < gamma_floor) {
            return Err(KamError::SmallDivisor {
                ell,
                divisor: omega,
                floor: gamma_floor,
            });
        }
        min_divisor = min_divisor.min(omega.abs());
        terms.push((m.clone(), -*c / (phase * omega)));
    }
    Ok(HomologicalSolution {
        f: Hamiltonian::from_terms(meta, Form::Canonical, terms)?,
        r0_res: resonant_part(r0),
        r1_res: resonant_part(r1),
        min_divisor,
    })
}

/// Largest per-term relative size of `{N, F} + R⁰ + R¹ − [R⁰] − [R¹]`,
/// measured against the matching coefficient of `R⁰ + R¹` (or its largest
/// coefficient for terms absent from it).
pub fn homological_residual(
    n: &Hamiltonian,
    sol: &HomologicalSolution,
    r0: &Hamiltonian,
    r1: &Hamiltonian,
) -> Result<f64, KamError> {
    let r = r0.add(r1)?;
    let e = poisson_bracket(n, &sol.f)?
        .add(&r)?
        .sub(&sol.r0_res)?
        .sub(&sol.r1_res)?;
    let scale = r.max_abs_coeff();
    Ok(e.iter()
        .map(|(m, c)| {
            let s = r.get(m).norm();
            c.norm() / if s > 0.0 { s } else { scale }
        })
        .fold(0.0, f64::max))
}

fn amplitude_power(a: &ExponentMap, i0: &ModeVec<f64>) -> f64 {
    a.iter().map(|(n, e)| i0[n].powi(e as i32)).product()
}

/// `Δλ_n = Σ_a R_{a e_n 0 0} I(0)^a`; terms of any other shape are ignored.
pub fn frequency_shift(r1_res: &Hamiltonian, i0: &ModeVec<f64>) -> ModeVec<f64> {
    let mut shift = ModeVec::filled(i0.n_max(), 0.0);
    for (m, c) in r1_res.iter() {
        if !is_resonant(m) || m.b.total() != 1 {
            continue;
        }
        let (n, _) = m.b.iter().next().expect("|b| = 1");
        shift[n] += c.re * amplitude_power(&m.a, i0);
    }
    shift
}

/// `(c/√(c²+n²)) ‖[R¹]‖ K` per mode, with
/// `K = max_n Σ_a e^{−w(a, e_n)} ⟨n/c⟩ I(0)^a` read off the norm weights.
pub fn shift_bound(r1_res: &Hamiltonian, i0: &ModeVec<f64>, ctx: &NormContext) -> ModeVec<f64> {
    let c = ctx.c;
    let angle = |n: i32| (1.0 + (n as f64 / c).powi(2)).sqrt();
    let mut k_n = ModeVec::filled(i0.n_max(), 0.0);
    for (m, _) in r1_res.iter() {
        if !is_resonant(m) || m.b.total() != 1 {
            continue;
        }
        let (n, _) = m.b.iter().next().expect("|b| = 1");
        k_n[n] += (-term_log_weight(m, ctx)).exp() * angle(n) * amplitude_power(&m.a, i0);
    }
    let k = k_n.max_abs();
    let r = norm(r1_res, ctx);
    ModeVec::from_fn(i0.n_max(), |n| r * k / angle(n))
}
