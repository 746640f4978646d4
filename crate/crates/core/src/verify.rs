//! The property suite: one check per acceptance criterion, shared by the
//! `verify` subcommand and the acceptance tests.

use std::f64::consts::{E, SQRT_2};
use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::hamalg::{
    norm, norm_plus, parse_hamiltonian, poisson_bracket, write_hamiltonian, Form, Hamiltonian, Meta, Monomial,
    NormContext, TermClass,
};
use crate::indices::{decreasing_rearrangement, weight, ModeVec};
use crate::kam::{
    homological_residual, run_kam_with, solve_homological, KamEngine, KamError, KamOptions, KamReport, KamStatus,
};
use crate::nlkg::{build_hamiltonian, draw_potential, frequencies, normal_form_hamiltonian, quartic_raw_terms, ModelParams};
use crate::resonance::{estimate_resonant_measure_multi, fit_log_slope, EllBudget, IntegerVector, MeasureEstimate};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Reduced sample sizes; runtime budgets are not enforced.
    pub quick: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: 0, quick: false }
    }
}

impl SuiteOptions {
    fn size(&self, full: usize, quick: usize) -> usize {
        if self.quick {
            quick
        } else {
            full
        }
    }

    fn budget(&self, seconds: f64) -> Option<f64> {
        (!self.quick).then_some(seconds)
    }
}

fn outcome(id: u32, name: &str, passed: bool, detail: String, start: Instant, budget: Option<f64>) -> CheckOutcome {
    let seconds = start.elapsed().as_secs_f64();
    CheckOutcome {
        id,
        name: name.to_string(),
        passed: passed && budget.map_or(true, |b| seconds < b),
        detail,
        seconds,
        budget_seconds: budget,
    }
}

fn fixture_rng(seed: u64, index: u64) -> ChaCha8Rng {
    rng::substream(seed, rng::STREAM_FIXTURES, index)
}

/// Random canonical monomial with zero momentum, degree in
/// `min_degree..=max_degree`, `|n| ≤ n_max`.
pub fn random_monomial<R: Rng>(g: &mut R, n_max: u32, min_degree: u32, max_degree: u32, allow_j: bool) -> Monomial {
    let nm = n_max as i32;
    loop {
        let mut m = Monomial::default();
        let target = g.random_range(min_degree.max(1)..=max_degree);
        while m.degree() < target {
            let n = g.random_range(-nm..=nm);
            let room = target - m.degree();
            match g.random_range(0..4) {
                0 if room >= 2 => m.a.add(n, 1),
                1 if allow_j && room >= 2 => m.b.add(n, 1),
                2 => m.k.add(n, 1),
                3 => m.kp.add(n, 1),
                _ => {}
            }
        }
        if m.momentum() == 0 && m.is_canonical() && m.degree() >= min_degree {
            return m;
        }
    }
}

/// Coefficient with log-uniform modulus in `[1e-3, 1]` and uniform phase.
pub fn random_coeff<R: Rng>(g: &mut R) -> Complex64 {
    let r = 10f64.powf(-3.0 * g.random::<f64>());
    Complex64::from_polar(r, g.random::<f64>() * std::f64::consts::TAU)
}

pub fn random_hamiltonian<R: Rng>(
    g: &mut R,
    meta: Meta,
    terms: usize,
    min_degree: u32,
    max_degree: u32,
    allow_j: bool,
) -> Hamiltonian {
    let form = if allow_j { Form::Canonical } else { Form::Expanded };
    let list: Vec<_> = (0..terms)
        .map(|_| (random_monomial(g, meta.n_max, min_degree, max_degree.min(meta.d_max), allow_j), random_coeff(g)))
        .collect();
    Hamiltonian::from_terms(meta, form, list).expect("generated terms are valid")
}

/// Largest `|x_m − y_m| / max(|x_m|, |y_m|)` over the union of supports,
/// with terms below `floor · scale` compared absolutely.
pub fn max_rel_diff(x: &Hamiltonian, y: &Hamiltonian) -> f64 {
    let scale = x.max_abs_coeff().max(y.max_abs_coeff()).max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for (m, _) in x.iter().chain(y.iter()) {
        let (a, b) = (x.get(m), y.get(m));
        let d = (a - b).norm();
        let s = a.norm().max(b.norm()).max(1e-3 * scale);
        worst = worst.max(d / s);
    }
    worst
}

/// Criterion 1: exact homological residual on random fixtures.
pub fn check_homological(opts: &SuiteOptions) -> CheckOutcome {
    let start = Instant::now();
    let count = opts.size(50, 10);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for i in 0..count {
        let mut g = fixture_rng(opts.seed, 100 + i as u64);
        let c = if i % 2 == 0 { 1.0 } else { 10.0 };
        let p = ModelParams {
            c,
            v: ModeVec::from_fn(4, |_| g.random::<f64>()),
            eps: 10f64.powf(-2.0 - 6.0 * g.random::<f64>()),
            sigma: 3.0,
            r: 1.5,
            n_max: 4,
            d_max: 8,
        };
        let mut run = || -> Result<f64, KamError> {
            let (n, quartic) = build_hamiltonian(&p)?;
            let extra = random_hamiltonian(&mut g, p.meta(), 40, 4, 8, true).scaled(Complex64::new(p.eps, 0.0));
            let r = quartic.add(&extra)?;
            let (r0, r1, _) = r.split();
            let sol = solve_homological(&n, &r0, &r1, 0.0)?;
            homological_residual(&n, &sol, &r0, &r1)
        };
        match run() {
            Ok(e) => worst = worst.max(e),
            Err(e) => failures.push(format!("fixture {i}: {e}")),
        }
    }
    let passed = failures.is_empty() && worst <= 1e-12;
    let mut detail = format!("{count} fixtures, max relative residual {worst:.2e} (tol 1e-12)");
    if !failures.is_empty() {
        write!(detail, "; errors: {}", failures.join("; ")).unwrap();
    }
    outcome(1, "homological residual", passed, detail, start, opts.budget(10.0))
}

fn bracket_meta() -> Meta {
    Meta {
        sigma: 3.0,
        r: 1.5,
        c: 1.0,
        n_max: 3,
        d_max: 8,
    }
}

/// Criterion 2: antisymmetry, Jacobi identity and the canonical versus
/// expanded bracket.
pub fn check_bracket_algebra(opts: &SuiteOptions) -> CheckOutcome {
    let start = Instant::now();
    let count = opts.size(1000, 100);
    let meta = bracket_meta();
    let one = |g: &mut ChaCha8Rng| {
        Hamiltonian::from_terms(meta, Form::Canonical, [(random_monomial(g, 3, 1, 4, true), random_coeff(g))]).unwrap()
    };
    let (mut anti, mut jacobi, mut oracle): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut errors = Vec::new();
    let mut g = fixture_rng(opts.seed, 200);
    for _ in 0..count {
        let (a, b, c) = (one(&mut g), one(&mut g), one(&mut g));
        let res = (|| -> Result<(), KamError> {
            let ab = poisson_bracket(&a, &b)?;
            let ba = poisson_bracket(&b, &a)?;
            anti = anti.max(ab.add(&ba)?.max_abs_coeff());
            let j = poisson_bracket(&a, &poisson_bracket(&b, &c)?)?
                .add(&poisson_bracket(&b, &poisson_bracket(&c, &a)?)?)?
                .add(&poisson_bracket(&c, &ab)?)?;
            jacobi = jacobi.max(j.max_abs_coeff());
            let expanded = poisson_bracket(&a.expand_j()?, &b.expand_j()?)?.canonical();
            oracle = oracle.max(max_rel_diff(&ab, &expanded));
            Ok(())
        })();
        if let Err(e) = res {
            errors.push(e.to_string());
        }
    }
    let passed = errors.is_empty() && anti <= 1e-10 && jacobi <= 1e-10 && oracle <= 1e-12;
    let mut detail = format!(
        "{count} triples: antisymmetry {anti:.2e}, Jacobi {jacobi:.2e} (tol 1e-10), canonical vs expanded {oracle:.2e} (tol 1e-12)"
    );
    if !errors.is_empty() {
        write!(detail, "; errors: {}", errors.join("; ")).unwrap();
    }
    outcome(2, "bracket algebra", passed, detail, start, opts.budget(30.0))
}

/// Random zero-momentum multi-index as `(|n|, multiplicity)` pairs, with
/// modes up to `n_bound` so that `⌊n⌋` varies.
fn random_multi_index<R: Rng>(g: &mut R, n_bound: i64) -> Vec<(i64, u64)> {
    loop {
        let mut entries: Vec<(i64, u64)> = Vec::new();
        let mut momentum = 0i64;
        let slots = g.random_range(1..=9);
        for _ in 0..slots {
            let n = g.random_range(-n_bound..=n_bound);
            match g.random_range(0..3) {
                // I(0)_n or J_n: weight 2, no momentum
                0 => entries.push((n, 2)),
                1 => {
                    entries.push((n, 1));
                    momentum += n;
                }
                _ => {
                    entries.push((n, 1));
                    momentum -= n;
                }
            }
        }
        if momentum != 0 {
            // one more z or z̄ factor cancels the momentum
            entries.push((momentum, 1));
        }
        let degree: u64 = entries.iter().map(|e| e.1).sum();
        if degree >= 2 {
            return entries;
        }
    }
}

/// `(Σ w_n ln^σ⌊n⌋ − 2 ln^σ⌊n₁*⌋, ½ Σ_{i≥3} ln^σ⌊n_i*⌋)`.
pub fn lemma_sides(multi: &[(i64, u64)], sigma: f64) -> (f64, f64) {
    let rear = decreasing_rearrangement(multi.iter().copied());
    let lhs: f64 = multi.iter().map(|&(n, w)| w as f64 * weight(n, sigma)).sum::<f64>()
        - 2.0 * weight(rear.nth_star(1) as i64, sigma);
    (lhs, 0.5 * rear.tail_weight(3, sigma))
}

/// `ln` of the bracket-norm constant `(1/δ₁) exp{(1000/δ₂) exp{(100/δ₂)^{1/(σ−1)}}}`.
pub fn log_bracket_constant(sigma: f64, d1: f64, d2: f64) -> f64 {
    -d1.ln() + 1000.0 / d2 * (100.0 / d2).powf(1.0 / (sigma - 1.0)).exp()
}

/// `ln` of `exp{3(6/δ)^{1/(σ−1)} exp{(6/δ)^{1/σ}}}`.
pub fn log_equivalence_constant(sigma: f64, delta: f64) -> f64 {
    3.0 * (6.0 / delta).powf(1.0 / (sigma - 1.0)) * (6.0 / delta).powf(1.0 / sigma).exp()
}

/// `ln(64/(e²δ²))`.
pub fn log_plus_constant(delta: f64) -> f64 {
    (64.0 / (E * E * delta * delta)).ln()
}

fn le_log(lhs: f64, log_rhs: f64) -> bool {
    lhs == 0.0 || lhs.ln() <= log_rhs + 1e-12 * log_rhs.abs().max(1.0)
}

/// Criterion 3: the rearrangement inequality, the bracket-norm bound and
/// the two norm equivalences.
pub fn check_norm_lemmas(opts: &SuiteOptions) -> CheckOutcome {
    let start = Instant::now();
    let sigmas = [2.1, 2.5, 3.0];
    let mut g = fixture_rng(opts.seed, 300);
    let indices = opts.size(10_000, 1000);
    let mut v21 = 0;
    for i in 0..indices {
        let multi = random_multi_index(&mut g, 5000);
        let (lhs, rhs) = lemma_sides(&multi, sigmas[i % 3]);
        if lhs < rhs - 1e-12 * rhs.abs().max(1.0) {
            v21 += 1;
        }
    }
    let pairs = opts.size(100, 20);
    let (mut v24, mut v27a, mut v27b) = (0, 0, 0);
    let mut errors = Vec::new();
    let lim = 3.0 - 2.0 * SQRT_2;
    for i in 0..pairs {
        let sigma = sigmas[i % 3];
        let c = if i % 2 == 0 { 1.0 } else { 10.0 };
        let meta = Meta {
            sigma,
            r: 1.5,
            c,
            n_max: 3,
            d_max: 8,
        };
        let rho = 10f64.powf(-3.0 + 2.3 * g.random::<f64>());
        let cap = (rho / 4.0).min(lim);
        let d1 = cap * (0.01 + 0.98 * g.random::<f64>());
        let d2 = cap * (0.01 + 0.98 * g.random::<f64>());
        let delta = rho * (0.01 + 0.98 * g.random::<f64>());
        let r1 = random_hamiltonian(&mut g, meta, 6, 2, 4, false);
        let r2 = random_hamiltonian(&mut g, meta, 6, 2, 4, false);
        let h = random_hamiltonian(&mut g, meta, 6, 2, 4, true);
        let res = (|| -> Result<(), KamError> {
            let ctx = NormContext::new(sigma, rho, 1.5, c)?;
            let b = poisson_bracket(&r1, &r2)?;
            let lhs = norm_plus(&b, &ctx)?;
            let rhs = log_bracket_constant(sigma, d1, d2)
                + norm_plus(&r1, &ctx.with_rho(rho - d1)?)?.ln()
                + norm_plus(&r2, &ctx.with_rho(rho - d2)?)?.ln();
            if !le_log(lhs, rhs) {
                v24 += 1;
            }
            let lower = ctx.with_rho(rho - delta)?;
            let hp = h.expand_j()?;
            if !le_log(norm(&h, &ctx), log_equivalence_constant(sigma, delta) + norm_plus(&hp, &lower)?.ln()) {
                v27a += 1;
            }
            if !le_log(norm_plus(&hp, &ctx)?, log_plus_constant(delta) + norm(&h, &lower).ln()) {
                v27b += 1;
            }
            Ok(())
        })();
        if let Err(e) = res {
            errors.push(e.to_string());
        }
    }
    let passed = errors.is_empty() && v21 + v24 + v27a + v27b == 0;
    let mut detail = format!(
        "violations: rearrangement {v21}/{indices}, bracket bound {v24}/{pairs}, ‖·‖ ≤ C‖·‖⁺ {v27a}/{pairs}, ‖·‖⁺ ≤ C‖·‖ {v27b}/{pairs}"
    );
    if !errors.is_empty() {
        write!(detail, "; errors: {}", errors.join("; ")).unwrap();
    }
    outcome(3, "norm lemmas", passed, detail, start, None)
}

/// The decay fixture: `N_max = 3`, `D_max = 8`, `c = 1`, `ε = 10⁻⁶`,
/// `σ = 3`, `r = 1.5`, `V` drawn from `seed`.
pub fn decay_fixture(seed: u64) -> ModelParams {
    ModelParams {
        c: 1.0,
        v: draw_potential(3, seed),
        eps: 1e-6,
        sigma: 3.0,
        r: 1.5,
        n_max: 3,
        d_max: 8,
    }
}

/// The seeded KAM runs shared by criteria 4 to 6, and their wall time.
pub struct KamRuns {
    pub reports: Vec<KamReport>,
    pub seconds: f64,
}

pub fn kam_runs(opts: &SuiteOptions) -> Result<KamRuns, KamError> {
    let start = Instant::now();
    let count = opts.size(20, 3);
    let reports = (0..count as u64)
        .map(|i| {
            let seed = opts.seed.wrapping_add(i);
            run_kam_with(
                &decay_fixture(seed),
                KamOptions {
                    gamma: 1e-3,
                    steps: 3,
                    seed,
                    ..KamOptions::default()
                },
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(KamRuns {
        reports,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn setup_failure(id: u32, name: &str, e: &KamError) -> CheckOutcome {
    CheckOutcome {
        id,
        name: name.into(),
        passed: false,
        detail: format!("setup failed: {e}"),
        seconds: 0.0,
        budget_seconds: None,
    }
}

/// Criterion 4: completion rate and per-step decay exponents.
pub fn check_kam_decay(opts: &SuiteOptions, runs: &KamRuns) -> CheckOutcome {
    let start = Instant::now();
    let total = runs.reports.len();
    let completed: Vec<&KamReport> = runs.reports.iter().filter(|r| r.status == KamStatus::Completed).collect();
    let small = runs.reports.iter().filter(|r| r.status == KamStatus::SmallDivisor).count();
    let slow: Vec<String> = completed
        .iter()
        .filter(|r| r.decay_exponents.len() != 3 || r.decay_exponents.iter().any(|e| !(*e >= 1.3)))
        .map(|r| format!("seed {}: {:?}", r.options.seed, r.decay_exponents))
        .collect();
    let min_exp = completed
        .iter()
        .flat_map(|r| r.decay_exponents.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let rate = completed.len() as f64 / total as f64;
    let in_time = opts.quick || runs.seconds < 300.0;
    let passed = rate >= 0.9 && slow.is_empty() && in_time;
    let mut detail = format!(
        "{}/{total} runs completed ({small} small divisor), min decay exponent {min_exp:.3} (need 1.3), {:.1}s (budget 300s)",
        completed.len(),
        runs.seconds
    );
    if !slow.is_empty() {
        write!(detail, "; below 1.3: {}", slow.join("; ")).unwrap();
    }
    let mut out = outcome(4, "KAM decay", passed, detail, start, None);
    out.seconds = runs.seconds;
    out.budget_seconds = opts.budget(300.0);
    out
}

/// Criterion 5: frequency-shift and parameter-drift bounds at every step.
pub fn check_frequency_control(opts: &SuiteOptions, runs: &KamRuns) -> CheckOutcome {
    let start = Instant::now();
    let mut violations = Vec::new();
    let mut steps = 0;
    for r in &runs.reports {
        for t in &r.trace {
            steps += 1;
            for (ok, what) in [
                (t.vtilde_delta_ok, "‖Ṽ_{s+1} − Ṽ_s‖"),
                (t.vstar_delta_ok, "‖V*_{s+1} − V*_s‖"),
                (t.shift_bound_ok, "shift bound"),
            ] {
                if !ok {
                    violations.push(format!("seed {} step {}: {what}", r.options.seed, t.s));
                }
            }
        }
        if r.status == KamStatus::Completed && !r.vstar_target_ok {
            violations.push(format!("seed {}: ‖V* − T‖ = {:.2e}", r.options.seed, r.vstar_target_inf));
        }
    }
    let max_shift = runs
        .reports
        .iter()
        .flat_map(|r| r.trace.iter().map(|t| t.shift_inf))
        .fold(0.0, f64::max);
    let passed = violations.is_empty();
    let mut detail = format!("{steps} steps checked, max shift {max_shift:.2e}, {} violations", violations.len());
    if !passed {
        write!(detail, ": {}", violations.join("; ")).unwrap();
    }
    let _ = opts;
    outcome(5, "frequency control", passed, detail, start, None)
}

/// Criterion 6: torus residual on the decay fixture and in the `ε = 0` limit.
pub fn check_torus_residual(opts: &SuiteOptions, runs: &KamRuns) -> CheckOutcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for r in runs.reports.iter().filter(|r| r.status == KamStatus::Completed) {
        match &r.torus {
            Some(t) => {
                worst = worst.max(t.residual / t.bound);
                if !t.ok {
                    bad.push(format!("seed {}: {:.2e} > {:.2e}", r.options.seed, t.residual, t.bound));
                }
            }
            None => bad.push(format!("seed {}: no residual", r.options.seed)),
        }
    }
    let zero = ModelParams {
        eps: 0.0,
        ..decay_fixture(opts.seed)
    };
    let limit = run_kam_with(
        &zero,
        KamOptions {
            steps: 3,
            seed: opts.seed,
            ..KamOptions::default()
        },
    );
    let limit_residual = match &limit {
        Ok(rep) => rep.torus_residual.unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    };
    let passed = bad.is_empty() && limit_residual <= 1e-14;
    let mut detail =
        format!("max residual/(10 ε₀) = {worst:.2e}; ε = 0 residual {limit_residual:.2e} (tol 1e-14)");
    if !bad.is_empty() {
        write!(detail, "; {}", bad.join("; ")).unwrap();
    }
    outcome(6, "torus residual", passed, detail, start, None)
}

/// The budget of criterion 7.
pub fn measure_budget() -> EllBudget {
    EllBudget {
        max_support: 3,
        max_height: 3,
        max_n3star: 8,
        n_max: None,
    }
}

pub const MEASURE_GAMMAS: [f64; 3] = [1e-6, 1e-9, 1e-12];

/// Result of the resonant-measure experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureScaling {
    pub estimates: Vec<MeasureEstimate>,
    pub slope: Option<f64>,
    pub slope_ok: bool,
    pub stderr_ok: bool,
}

pub fn measure_scaling(samples: usize, seed: u64) -> Result<MeasureScaling, crate::resonance::ResonanceError> {
    let estimates = estimate_resonant_measure_multi(1.0, &MEASURE_GAMMAS, &measure_budget(), samples, seed)?;
    let slope = fit_log_slope(&estimates);
    Ok(MeasureScaling {
        slope_ok: slope.is_some_and(|s| (0.2..=0.5).contains(&s)),
        stderr_ok: estimates.iter().all(|e| e.stderr < 0.2 * e.fraction || e.fraction < 1e-3),
        estimates,
        slope,
    })
}

impl MeasureScaling {
    /// True when every fraction is exactly 0, so that no slope exists.
    pub fn all_fractions_zero(&self) -> bool {
        self.slope.is_none() && self.estimates.iter().all(|e| e.fraction == 0.0)
    }
}

pub fn measure_samples(opts: &SuiteOptions) -> usize {
    opts.size(10_000, 500)
}

/// Criterion 7: `γ^{1/3}` scaling of the resonant fraction.
pub fn check_measure_scaling(opts: &SuiteOptions) -> CheckOutcome {
    let start = Instant::now();
    let m = measure_scaling(measure_samples(opts), opts.seed);
    measure_outcome(opts, &m, start)
}

pub fn measure_outcome(
    opts: &SuiteOptions,
    m: &Result<MeasureScaling, crate::resonance::ResonanceError>,
    start: Instant,
) -> CheckOutcome {
    let samples = measure_samples(opts);
    match m {
        Ok(m) => {
            let fr: Vec<String> = m
                .estimates
                .iter()
                .map(|e| format!("γ={:.0e}: {:.3e}±{:.1e}", e.gamma, e.fraction, e.stderr))
                .collect();
            let slope = m.slope.map_or("undefined (fewer than two positive fractions)".to_string(), |s| format!("{s:.3}"));
            let detail = format!(
                "{} ℓ vectors, {samples} samples; {}; slope {slope} (need [0.2, 0.5])",
                m.estimates[0].budget,
                fr.join(", ")
            );
            outcome(7, "measure scaling", m.slope_ok && m.stderr_ok, detail, start, opts.budget(600.0))
        }
        Err(e) => outcome(7, "measure scaling", false, e.to_string(), start, None),
    }
}

fn scan(h: &Hamiltonian, what: &str, out: &mut Vec<String>) -> usize {
    for (m, _) in h.iter() {
        if m.momentum() != 0 {
            out.push(format!("{what}: momentum {} at {m}", m.momentum()));
        }
    }
    if let Err(e) = h.validate() {
        out.push(format!("{what}: {e}"));
    }
    h.len()
}

fn degenerate_divisors(h: &Hamiltonian, what: &str, out: &mut Vec<String>) {
    for (m, _) in h.iter() {
        if let Some(ell) = IntegerVector::from_exponents(&m.k, &m.kp) {
            if ell.is_degenerate_pair() {
                out.push(format!("{what}: degenerate divisor index {ell}"));
            }
        }
    }
}

/// Criterion 8: zero momentum everywhere in the pipeline, no degenerate
/// divisor index, byte-identical round trips.
pub fn check_structure(opts: &SuiteOptions) -> CheckOutcome {
    let start = Instant::now();
    let mut problems = Vec::new();
    let mut scanned = 0usize;
    let run = (|| -> Result<(), KamError> {
        let p = decay_fixture(opts.seed);
        let raw = quartic_raw_terms(&p);
        for t in &raw {
            if crate::indices::momentum(&t.k, &t.kp) != 0 {
                problems.push(format!("raw quartic term with momentum {}", crate::indices::momentum(&t.k, &t.kp)));
            }
        }
        let engine = KamEngine::new(p.clone(), KamOptions::default())?;
        let (mut state, mut r) = engine.initial_state()?;
        degenerate_divisors(&r, "R_0", &mut problems);
        for s in 0..3 {
            scanned += scan(&state.n, &format!("N_{s}"), &mut problems);
            scanned += scan(&r, &format!("R_{s}"), &mut problems);
            let out = engine.step_full(&state, &r)?;
            scanned += scan(&out.generator, &format!("F_{s}"), &mut problems);
            degenerate_divisors(&out.generator, &format!("F_{s}"), &mut problems);
            for class in TermClass::ALL {
                scan(&out.r.class_part(class), &format!("R_{}", s + 1), &mut problems);
            }
            state = out.state;
            r = out.r;
        }
        scanned += scan(&state.n, "N_3", &mut problems);
        scanned += scan(&r, "R_3", &mut problems);
        // frequencies of the fixture keep every quartic divisor away from 0
        let lambda = frequencies(&p).lambda;
        let n = normal_form_hamiltonian(&lambda, p.meta())?;
        let (_, quartic) = build_hamiltonian(&p)?;
        let (r0, r1, _) = quartic.split();
        solve_homological(&n, &r0, &r1, 0.0)?;
        Ok(())
    })();
    if let Err(e) = run {
        problems.push(format!("pipeline: {e}"));
    }
    let mut g = fixture_rng(opts.seed, 800);
    let mut round_trip_failures = 0;
    for i in 0..100 {
        let meta = Meta {
            sigma: [2.1, 2.5, 3.0][i % 3],
            r: 1.0 + g.random::<f64>(),
            c: 1.0 + 20.0 * g.random::<f64>(),
            n_max: 3 + (i % 4) as u32,
            d_max: 8,
        };
        let h = random_hamiltonian(&mut g, meta, 1 + i % 30, 1, 8, i % 2 == 0)
            .scaled(Complex64::new(10f64.powi(-(i as i32 % 200)), 0.0));
        let text = write_hamiltonian(&h);
        match parse_hamiltonian(&text) {
            Ok(back) if back == h && write_hamiltonian(&back) == text => {}
            _ => round_trip_failures += 1,
        }
    }
    if round_trip_failures > 0 {
        problems.push(format!("{round_trip_failures}/100 round trips differ"));
    }
    let passed = problems.is_empty();
    let mut detail = format!("{scanned} pipeline terms scanned, 100 round trips, {} problems", problems.len());
    if !passed {
        write!(detail, ": {}", problems.iter().take(10).cloned().collect::<Vec<_>>().join("; ")).unwrap();
    }
    outcome(8, "structural guarantees", passed, detail, start, None)
}

/// All eight checks in order.
pub fn run_suite(opts: &SuiteOptions) -> Vec<CheckOutcome> {
    let mut out = vec![check_homological(opts), check_bracket_algebra(opts), check_norm_lemmas(opts)];
    match kam_runs(opts) {
        Ok(runs) => {
            out.push(check_kam_decay(opts, &runs));
            out.push(check_frequency_control(opts, &runs));
            out.push(check_torus_residual(opts, &runs));
        }
        Err(e) => {
            out.push(setup_failure(4, "KAM decay", &e));
            out.push(setup_failure(5, "frequency control", &e));
            out.push(setup_failure(6, "torus residual", &e));
        }
    }
    out.push(check_measure_scaling(opts));
    out.push(check_structure(opts));
    out
}

pub fn format_line(c: &CheckOutcome) -> String {
    format!(
        "criterion {} {:<22} {}  {:>7.2}s  {}",
        c.id,
        c.name,
        if c.passed { "PASS" } else { "FAIL" },
        c.seconds,
        c.detail
    )
}

pub fn format_table(checks: &[CheckOutcome]) -> String {
    let mut s = String::new();
    for c in checks {
        writeln!(s, "{}", format_line(c)).unwrap();
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    writeln!(s, "{passed}/{} passed", checks.len()).unwrap();
    s
}
