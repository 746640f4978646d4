use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::frequency::{invert_frequency_map, jacobian_defect, vtilde_from_lambda, AffineMap};
use super::homological::{frequency_shift, resonant_part, shift_bound, solve_homological, HomologicalSolution};
use super::schedule::{rho0, schedule_params, Schedule};
use super::KamError;
use crate::hamalg::{lie_terms, norm, Form, GradientField, Hamiltonian, LieOptions, Meta, Monomial, NormContext, Var};
use crate::indices::{weight, ExponentMap, ModeVec};
use crate::nlkg::{
    build_hamiltonian, frequencies, initial_amplitudes, motion_residual, torus_trajectory,
    ModelParams,
};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KamOptions {
    pub gamma: f64,
    pub steps: u32,
    pub seed: u64,
    /// Finite-difference step of the frequency-map Jacobian.
    pub fd_step: f64,
    pub newton_tol: f64,
    pub phase_points: usize,
    pub rk4_steps: usize,
    pub torus_points: usize,
}

impl Default for KamOptions {
    fn default() -> Self {
        KamOptions {
            gamma: 1e-3,
            steps: 3,
            seed: 0,
            fd_step: 1e-7,
            newton_tol: 1e-13,
            phase_points: 32,
            rk4_steps: 16,
            torus_points: 8,
        }
    }
}

/// `N_s + R_s` evaluated along the pipeline at one parameter vector.
#[derive(Clone, Debug)]
struct Stage {
    n: Hamiltonian,
    lambda: ModeVec<f64>,
    r: Hamiltonian,
}

struct Transformed {
    next: Stage,
    sol: HomologicalSolution,
    shift: ModeVec<f64>,
    brackets: usize,
}

#[derive(Clone, Debug)]
pub struct IterationState {
    pub schedule: Schedule,
    /// Normal form `N_s`; its bare `J_n` coefficients are `λ̃_{s,n}(V*_s)`.
    pub n: Hamiltonian,
    pub lambda: ModeVec<f64>,
    /// Local model of `V ↦ Ṽ_s(V)` around `V*_{s−1}` (identity at `s = 0`).
    pub vtilde: AffineMap,
    pub vstar: ModeVec<f64>,
    pub target: ModeVec<f64>,
    /// `(‖R⁰‖, ‖R¹‖, ‖R²‖)` at the input of each completed step.
    pub norm_trace: Vec<[f64; 3]>,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub s: u32,
    pub rho: f64,
    pub eps: f64,
    pub norm_r0: f64,
    pub norm_r1: f64,
    pub norm_r2: f64,
    /// `‖R⁰‖ ≤ ε_s`, `‖R¹‖ ≤ ε_s^{0.6}`, `‖R²‖ ≤ (1+d_s)ε₀`.
    pub pre_ok: [bool; 3],
    pub next_norm_r0: f64,
    pub next_norm_r1: f64,
    pub next_norm_r2: f64,
    pub post_ok: [bool; 3],
    pub shift_inf: f64,
    pub shift_bound_ok: bool,
    pub vtilde_delta_inf: f64,
    pub vtilde_delta_ok: bool,
    pub vstar_delta_inf: f64,
    pub vstar_delta_ok: bool,
    pub newton_iterations: usize,
    /// The Jacobian is the identity because `I(0)` underflows (no finite
    /// differences were taken).
    pub jacobian_identity: bool,
    pub jacobian_defect: f64,
    pub range_exit: bool,
    /// Sampled `sup |Φ(z) − z|` over the phase domain; a lower bound of the
    /// true sup.
    pub phi_size: f64,
    pub phi_ok: bool,
    pub min_divisor: f64,
    pub brackets: usize,
    pub terms: usize,
    pub vstar: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KamStatus {
    Completed,
    SmallDivisor,
    NormBlowup,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusCheck {
    pub residual: f64,
    pub bound: f64,
    pub ok: bool,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KamReport {
    pub params: ModelParams,
    pub options: KamOptions,
    pub eps0: f64,
    pub trace: Vec<StepRecord>,
    /// `‖R⁰_s‖_{ρ_s}` for `s = 0..=S`.
    pub r0_norms: Vec<f64>,
    /// `ln‖R⁰_{s+1}‖ / ln‖R⁰_s‖`; `+∞` (JSON `null`) once the norm is exactly 0.
    pub decay_exponents: Vec<f64>,
    pub vstar_trajectory: Vec<Vec<f64>>,
    pub vstar_target_inf: f64,
    pub vstar_target_ok: bool,
    pub torus_residual: Option<f64>,
    pub torus: Option<TorusCheck>,
    pub status: KamStatus,
    pub failed_step: Option<u32>,
    pub error_message: Option<String>,
    #[serde(skip)]
    pub error: Option<KamError>,
}

fn bits(v: &ModeVec<f64>) -> Vec<u64> {
    v.as_slice().iter().map(|x| x.to_bits()).collect()
}

fn j_term(n: i32) -> Monomial {
    Monomial::new(ExponentMap::new(), ExponentMap::single(n, 1), ExponentMap::new(), ExponentMap::new())
}

/// `R_+ = Σ_{m≥1} [Q_m + m P_m]/(m+1)! + Σ_{n≥0} S_n/n!` with
/// `P_m = (R⁰+R¹)^{(m)}`, `Q_m = ([R⁰]+[R¹])^{(m)}`, `S_n = (R²)^{(n)}`,
/// all brackets with `F` and truncated at `D_max`. Returns `R_+` and the
/// number of brackets evaluated.
pub fn regrouped_remainder(
    r: &Hamiltonian,
    sol: &HomologicalSolution,
    ctx: NormContext,
) -> Result<(Hamiltonian, usize), KamError> {
    let (r0, r1, r2) = r.split();
    let mut lie = LieOptions::new(ctx);
    lie.tail_tol = Some(0.0);
    let a = r0.add(&r1)?;
    let ares = sol.r0_res.add(&sol.r1_res)?;
    let (p, _, _) = lie_terms(&a, &sol.f, &lie)?;
    let (q, _, _) = lie_terms(&ares, &sol.f, &lie)?;
    let (s, _, _) = lie_terms(&r2, &sol.f, &lie)?;
    let mut out = Hamiltonian::zero(*r.meta());
    let mut fact = 1.0;
    for m in 1..p.len().max(q.len()) {
        fact *= (m + 1) as f64;
        if let Some(pm) = p.get(m) {
            out = out.add_scaled(pm, Complex64::new(m as f64 / fact, 0.0))?;
        }
        if let Some(qm) = q.get(m) {
            out = out.add_scaled(qm, Complex64::new(1.0 / fact, 0.0))?;
        }
    }
    let mut fact = 1.0;
    for (n, sn) in s.iter().enumerate() {
        if n > 0 {
            fact *= n as f64;
        }
        out = out.add_scaled(sn, Complex64::new(1.0 / fact, 0.0))?;
    }
    Ok((out, p.len() + q.len() + s.len() - 3))
}

fn class_norms(r: &Hamiltonian, ctx: &NormContext) -> [f64; 3] {
    let (a, b, c) = r.split();
    [norm(&a, ctx), norm(&b, ctx), norm(&c, ctx)]
}

pub struct StepOutput {
    pub state: IterationState,
    /// `R_{s+1}` at `V*_{s+1}`.
    pub r: Hamiltonian,
    pub record: StepRecord,
    pub generator: Hamiltonian,
}

pub struct KamEngine {
    params: ModelParams,
    opts: KamOptions,
    meta: Meta,
    i0: ModeVec<f64>,
    eps0: f64,
    cache: Mutex<HashMap<(Vec<u64>, u32), Arc<Stage>>>,
    transforms: AtomicUsize,
}

impl KamEngine {
    /// `params.v` is the target `T`; `ε₀` is measured as `‖R‖_{ρ₀}` there.
    pub fn new(params: ModelParams, opts: KamOptions) -> Result<Self, KamError> {
        params.validate()?;
        if !(opts.gamma >= 0.0) {
            return Err(KamError::InvalidSchedule(format!("gamma = {} must be nonnegative", opts.gamma)));
        }
        let meta = params.meta();
        let (_, r) = build_hamiltonian(&params)?;
        let eps0 = norm(&r, &NormContext::new(meta.sigma, rho0(), meta.r, meta.c)?);
        schedule_params(0, eps0)?;
        Ok(KamEngine {
            i0: initial_amplitudes(&params),
            params,
            opts,
            meta,
            eps0,
            cache: Mutex::new(HashMap::new()),
            transforms: AtomicUsize::new(0),
        })
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn i0(&self) -> &ModeVec<f64> {
        &self.i0
    }

    pub fn target(&self) -> &ModeVec<f64> {
        &self.params.v
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn options(&self) -> &KamOptions {
        &self.opts
    }

    /// Number of Lie transforms evaluated so far.
    pub fn transforms(&self) -> usize {
        self.transforms.load(Ordering::Relaxed)
    }

    pub fn schedule(&self, s: u32) -> Schedule {
        schedule_params(s, self.eps0).expect("eps0 validated at construction")
    }

    fn ctx(&self, rho: f64) -> Result<NormContext, KamError> {
        Ok(NormContext::new(self.meta.sigma, rho, self.meta.r, self.meta.c)?)
    }

    fn build_stage(&self, v: &ModeVec<f64>) -> Result<Stage, KamError> {
        let p = self.params.with_potential(v.clone());
        let (n, r) = build_hamiltonian(&p)?;
        Ok(Stage {
            n,
            lambda: frequencies(&p).lambda,
            r,
        })
    }

    fn transform(&self, stage: &Stage, sched: &Schedule) -> Result<Transformed, KamError> {
        self.transforms.fetch_add(1, Ordering::Relaxed);
        let (r0, r1, _) = stage.r.split();
        let sol = solve_homological(&stage.n, &r0, &r1, self.opts.gamma * sched.lambda)?;
        let (r_next, brackets) = regrouped_remainder(&stage.r, &sol, self.ctx(sched.rho)?)?;
        let shift = frequency_shift(&sol.r1_res, &self.i0);
        let lambda = stage.lambda.map(|n, &l| l + shift[n]);
        let shift_terms = Hamiltonian::from_terms(
            self.meta,
            Form::Canonical,
            shift.iter().map(|(n, &d)| (j_term(n), Complex64::new(d, 0.0))),
        )?;
        let n = stage.n.add(&sol.r0_res)?.add(&shift_terms)?;
        Ok(Transformed {
            next: Stage { n, lambda, r: r_next },
            sol,
            shift,
            brackets,
        })
    }

    /// `(N_s, R_s)` along the pipeline started at `v`.
    fn stage(&self, v: &ModeVec<f64>, s: u32) -> Result<Arc<Stage>, KamError> {
        let key = (bits(v), s);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let stage = if s == 0 {
            self.build_stage(v)?
        } else {
            let prev = self.stage(v, s - 1)?;
            self.transform(&prev, &self.schedule(s - 1))?.next
        };
        let stage = Arc::new(stage);
        self.cache.lock().unwrap().insert(key, stage.clone());
        Ok(stage)
    }

    /// `Ṽ_{s+1}(v)`: needs `R_s(v)` and its resonant `|b| = 1` part only.
    fn vtilde_next(&self, v: &ModeVec<f64>, s: u32) -> Result<ModeVec<f64>, KamError> {
        let stage = self.stage(v, s)?;
        let shift = frequency_shift(&resonant_part(&stage.r.split().1), &self.i0);
        Ok(vtilde_from_lambda(self.meta.c, &stage.lambda.map(|n, &l| l + shift[n])))
    }

    /// One-sided finite differences of `Ṽ_{s+1}` at `center`, stepping inward
    /// from the upper edge of the box.
    fn jacobian_next(&self, center: &ModeVec<f64>, value: &ModeVec<f64>, s: u32) -> Result<Vec<Vec<f64>>, KamError> {
        let k = center.len();
        let cols: Vec<Vec<f64>> = (0..k)
            .into_par_iter()
            .map(|m| {
                let mut v = center.clone();
                let x = v.as_slice()[m];
                let h = if x + self.opts.fd_step > 1.0 { -self.opts.fd_step } else { self.opts.fd_step };
                v.as_mut_slice()[m] = x + h;
                let h = v.as_slice()[m] - x;
                let f = self.vtilde_next(&v, s)?;
                Ok(f.as_slice().iter().zip(value.as_slice()).map(|(a, b)| (a - b) / h).collect())
            })
            .collect::<Result<_, KamError>>()?;
        Ok((0..k).map(|i| (0..k).map(|j| cols[j][i]).collect()).collect())
    }

    /// With `I(0) = 0` in floating point, the shift only sees bare `J_n`
    /// terms, which have degree 2; remainders of degree at least 4 keep
    /// every later shift at 0 for all `V`, so `Ṽ_{s+1}` is the identity.
    fn amplitude_free(&self, r: &Hamiltonian) -> bool {
        self.i0.iter().all(|(_, &x)| x == 0.0) && r.iter().all(|(m, _)| m.degree() >= 4)
    }

    pub fn initial_state(&self) -> Result<(IterationState, Hamiltonian), KamError> {
        let t = self.params.v.clone();
        let stage = self.stage(&t, 0)?;
        Ok((
            IterationState {
                schedule: self.schedule(0),
                n: stage.n.clone(),
                lambda: stage.lambda.clone(),
                vtilde: AffineMap::identity(t.clone()),
                vstar: t.clone(),
                target: t,
                norm_trace: Vec::new(),
                gamma: self.opts.gamma,
            },
            stage.r.clone(),
        ))
    }

    /// `max_n |Φ_F(z) − z|_n e^{r ln^σ⌊n⌋}` over seeded points of `D_s`.
    fn phi_size(&self, f: &Hamiltonian, sched: &Schedule) -> f64 {
        if f.is_zero() {
            return 0.0;
        }
        let (r, sigma) = (self.meta.r, self.meta.sigma);
        let scale = ModeVec::from_fn(self.meta.n_max, |n| r * weight(n as i64, sigma));
        let mut g = rng::substream(self.opts.seed, rng::STREAM_PHASE_POINTS, sched.s as u64);
        let grad = GradientField::new(f, &self.i0);
        if grad.is_zero() {
            return 0.0;
        }
        let field = |z: &ModeVec<Complex64>| grad.eval(z, Var::ZBar).map(|_, d| -Complex64::i() * d);
        let axpy = |z: &ModeVec<Complex64>, k: &ModeVec<Complex64>, h: f64| z.map(|n, x| x + k[n] * h);
        let dt = 1.0 / self.opts.rk4_steps as f64;
        let mut worst: f64 = 0.0;
        for _ in 0..self.opts.phase_points {
            let z0 = scale.map(|_, &w| {
                let u = 0.5 + sched.d + g.random::<f64>() * (0.5 - 2.0 * sched.d);
                let theta = g.random::<f64>() * std::f64::consts::TAU;
                Complex64::from_polar(u * (-w).exp(), theta)
            });
            // a vanishing field leaves RK4 stationary
            if field(&z0).iter().all(|(_, v)| *v == Complex64::new(0.0, 0.0)) {
                continue;
            }
            // integrate the displacement w = z − z0 so that it is not lost
            // against |z0|
            let at = |w: &ModeVec<Complex64>| z0.map(|n, x| x + w[n]);
            let mut w = ModeVec::filled(self.meta.n_max, Complex64::new(0.0, 0.0));
            for _ in 0..self.opts.rk4_steps {
                let k1 = field(&at(&w));
                let k2 = field(&at(&axpy(&w, &k1, dt / 2.0)));
                let k3 = field(&at(&axpy(&w, &k2, dt / 2.0)));
                let k4 = field(&at(&axpy(&w, &k3, dt)));
                w = w.map(|n, x| x + (k1[n] + k2[n] * 2.0 + k3[n] * 2.0 + k4[n]) * (dt / 6.0));
            }
            for (n, x) in w.iter() {
                worst = worst.max(x.norm() * scale[n].exp());
            }
        }
        worst
    }

    /// One iteration of the lemma on `N_s + R`.
    pub fn step(&self, state: &IterationState, r: &Hamiltonian) -> Result<(IterationState, Hamiltonian, StepRecord), KamError> {
        self.step_full(state, r).map(|o| (o.state, o.r, o.record))
    }

    /// [`KamEngine::step`], also returning the generator `F_s`.
    pub fn step_full(&self, state: &IterationState, r: &Hamiltonian) -> Result<StepOutput, KamError> {
        let sched = state.schedule;
        let next = sched.next();
        let ctx = self.ctx(sched.rho)?;
        let ctx_next = self.ctx(next.rho)?;
        let input = class_norms(r, &ctx);
        let pre_ok = [
            input[0] <= sched.eps,
            input[1] <= sched.eps.powf(0.6),
            input[2] <= (1.0 + sched.d) * sched.eps0,
        ];

        let stage = Stage {
            n: state.n.clone(),
            lambda: state.lambda.clone(),
            r: r.clone(),
        };
        let tr = self.transform(&stage, &sched)?;
        self.cache
            .lock()
            .unwrap()
            .entry((bits(&state.vstar), sched.s + 1))
            .or_insert_with(|| Arc::new(tr.next.clone()));

        let out = class_norms(&tr.next.r, &ctx_next);
        let post_bounds = [next.eps, next.eps.powf(0.6), (1.0 + next.d) * next.eps0];
        let names = ["‖R⁰_{s+1}‖", "‖R¹_{s+1}‖", "‖R²_{s+1}‖"];
        for i in 0..3 {
            if out[i] > 10.0 * post_bounds[i] {
                return Err(KamError::NormBlowup {
                    quantity: names[i].into(),
                    value: out[i],
                    bound: post_bounds[i],
                });
            }
        }
        let post_ok = [out[0] <= post_bounds[0], out[1] <= post_bounds[1], out[2] <= post_bounds[2]];

        let bound = shift_bound(&tr.sol.r1_res, &self.i0, &ctx);
        let shift_bound_ok = tr.shift.iter().all(|(n, d)| d.abs() <= bound[n] * (1.0 + 1e-12));

        let vt_prev = vtilde_from_lambda(self.meta.c, &state.lambda);
        let vt_next = vtilde_from_lambda(self.meta.c, &tr.next.lambda);
        let vtilde_delta_inf = vt_next.max_abs_diff(&vt_prev);
        let half = sched.eps.sqrt();

        let amplitude_free = self.amplitude_free(&stage.r);
        let jac = if amplitude_free {
            AffineMap::identity(state.vstar.clone()).jacobian
        } else {
            self.jacobian_next(&state.vstar, &vt_next, sched.s)?
        };
        let map = AffineMap {
            center: state.vstar.clone(),
            value: vt_next,
            jacobian: jac,
        };
        let defect = jacobian_defect(&map.jacobian);
        let inv = invert_frequency_map(&map, &state.target, &state.vstar, self.opts.newton_tol)?;
        let vstar_delta_inf = inv.vstar.max_abs_diff(&state.vstar);

        let next_stage = if bits(&inv.vstar) == bits(&state.vstar) {
            tr.next.clone()
        } else {
            (*self.stage(&inv.vstar, sched.s + 1)?).clone()
        };
        let phi_size = self.phi_size(&tr.sol.f, &sched);

        let mut norm_trace = state.norm_trace.clone();
        norm_trace.push(input);
        let record = StepRecord {
            s: sched.s,
            rho: sched.rho,
            eps: sched.eps,
            norm_r0: input[0],
            norm_r1: input[1],
            norm_r2: input[2],
            pre_ok,
            next_norm_r0: out[0],
            next_norm_r1: out[1],
            next_norm_r2: out[2],
            post_ok,
            shift_inf: tr.shift.max_abs(),
            shift_bound_ok,
            vtilde_delta_inf,
            vtilde_delta_ok: vtilde_delta_inf <= half,
            vstar_delta_inf,
            vstar_delta_ok: vstar_delta_inf <= 2.0 * half,
            newton_iterations: inv.iterations,
            jacobian_identity: amplitude_free,
            jacobian_defect: defect,
            range_exit: inv.range_exit,
            phi_size,
            phi_ok: phi_size <= half,
            min_divisor: tr.sol.min_divisor,
            brackets: tr.brackets,
            terms: next_stage.r.len(),
            vstar: inv.vstar.as_slice().to_vec(),
        };
        let new_state = IterationState {
            schedule: next,
            n: next_stage.n,
            lambda: next_stage.lambda,
            vtilde: map,
            vstar: inv.vstar,
            target: state.target.clone(),
            norm_trace,
            gamma: state.gamma,
        };
        Ok(StepOutput {
            state: new_state,
            r: next_stage.r,
            record,
            generator: tr.sol.f,
        })
    }

    /// `max_t motion_residual(N_S + R_S, z(t))` at `t = 0, 1, …` on the
    /// unperturbed torus with frequencies `λ(T)`.
    pub fn torus_residual(&self, state: &IterationState, r: &Hamiltonian) -> Result<f64, KamError> {
        let h = state.n.add(r)?;
        let omega = frequencies(&self.params).lambda;
        let mut worst: f64 = 0.0;
        for t in 0..self.opts.torus_points {
            let z = torus_trajectory(&omega, &self.i0, t as f64);
            worst = worst.max(motion_residual(&h, &z, &omega, &self.i0)?);
        }
        Ok(worst)
    }
}

pub fn kam_step(
    engine: &KamEngine,
    state: &IterationState,
    r: &Hamiltonian,
) -> Result<(IterationState, Hamiltonian, StepRecord), KamError> {
    engine.step(state, r)
}

fn status_of(e: &KamError) -> KamStatus {
    match e.root() {
        KamError::SmallDivisor { .. } => KamStatus::SmallDivisor,
        KamError::NormBlowup { .. } => KamStatus::NormBlowup,
        _ => KamStatus::Failed,
    }
}

/// Runs `opts.steps` iterations from `build_hamiltonian`. Step failures are
/// recorded in the report; only setup errors are returned as `Err`.
pub fn run_kam_with(params: &ModelParams, opts: KamOptions) -> Result<KamReport, KamError> {
    if opts.steps < 1 {
        return Err(KamError::InvalidSchedule("at least one step is required".into()));
    }
    let engine = KamEngine::new(params.clone(), opts)?;
    let (mut state, mut r) = engine.initial_state()?;
    let mut report = KamReport {
        params: params.clone(),
        options: opts,
        eps0: engine.eps0(),
        trace: Vec::new(),
        r0_norms: Vec::new(),
        decay_exponents: Vec::new(),
        vstar_trajectory: vec![state.vstar.as_slice().to_vec()],
        vstar_target_inf: 0.0,
        vstar_target_ok: true,
        torus_residual: None,
        torus: None,
        status: KamStatus::Completed,
        failed_step: None,
        error_message: None,
        error: None,
    };
    for s in 0..opts.steps {
        match engine.step(&state, &r) {
            Ok((st, rn, rec)) => {
                report.vstar_trajectory.push(rec.vstar.clone());
                report.trace.push(rec);
                state = st;
                r = rn;
            }
            Err(e) => {
                report.status = status_of(&e);
                report.failed_step = Some(s);
                let e = KamError::AtStep {
                    step: s,
                    source: Box::new(e),
                };
                report.error_message = Some(e.to_string());
                report.error = Some(e);
                break;
            }
        }
    }
    report.r0_norms = report.trace.iter().map(|t| t.norm_r0).collect();
    if report.status == KamStatus::Completed {
        let ctx = engine.ctx(state.schedule.rho)?;
        report.r0_norms.push(class_norms(&r, &ctx)[0]);
        let residual = engine.torus_residual(&state, &r)?;
        let bound = if engine.eps0() > 0.0 { 10.0 * engine.eps0() } else { 1e-14 };
        report.torus_residual = Some(residual);
        report.torus = Some(TorusCheck {
            residual,
            bound,
            ok: residual <= bound,
            points: opts.torus_points,
        });
    }
    report.decay_exponents = report
        .r0_norms
        .windows(2)
        .map(|w| if w[1] == 0.0 { f64::INFINITY } else { w[1].ln() / w[0].ln() })
        .collect();
    report.vstar_target_inf = state.vstar.max_abs_diff(&state.target);
    report.vstar_target_ok = report.vstar_target_inf <= engine.eps0().powf(0.4);
    Ok(report)
}

/// Like [`run_kam_with`] with default options, turning a failed step into
/// an error.
pub fn run_kam(params: &ModelParams, gamma: f64, s_max: u32) -> Result<KamReport, KamError> {
    let report = run_kam_with(
        params,
        KamOptions {
            gamma,
            steps: s_max,
            ..KamOptions::default()
        },
    )?;
    match &report.error {
        Some(e) => Err(e.clone()),
        None => Ok(report),
    }
}
