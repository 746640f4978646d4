use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use super::KamError;

/// `ρ₀ = (3 − 2√2)/100`.
pub fn rho0() -> f64 {
    (3.0 - 2.0 * SQRT_2) / 100.0
}

/// Parameters of the `s`-th iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub s: u32,
    pub eps0: f64,
    pub delta: f64,
    pub rho: f64,
    pub eps: f64,
    pub lambda: f64,
    pub eta: f64,
    pub d: f64,
}

fn delta(s: u32) -> f64 {
    let x = s as f64 + 4.0;
    let l = x.ln();
    rho0() / (x * l * l)
}

/// `ε₀^{(3/2)^s}` computed as `exp((3/2)^s ln ε₀)`.
fn eps_at(s: u32, eps0: f64) -> f64 {
    if eps0 == 0.0 || s == 0 {
        return eps0;
    }
    (1.5f64.powi(s as i32) * eps0.ln()).exp()
}

/// `ε₀ = 0` is accepted and gives the unperturbed schedule with `ε_s = 0`.
pub fn schedule_params(s: u32, eps0: f64) -> Result<Schedule, KamError> {
    if !(0.0..1.0).contains(&eps0) {
        return Err(KamError::InvalidSchedule(format!("eps0 = {eps0} outside [0, 1)")));
    }
    let mut rho = rho0();
    let mut eta = eps_at(0, eps0).powf(0.01);
    let mut d = 0.0;
    for j in 0..s {
        rho += 3.0 * delta(j);
        eta *= eps_at(j, eps0).powf(0.01) / 20.0;
        let k = (j + 1) as f64;
        d += 1.0 / (PI * PI * k * k);
    }
    let eps = eps_at(s, eps0);
    Ok(Schedule {
        s,
        eps0,
        delta: delta(s),
        rho,
        eps,
        lambda: eps.powf(0.01),
        eta,
        d,
    })
}

impl Schedule {
    pub fn next(&self) -> Schedule {
        schedule_params(self.s + 1, self.eps0).expect("eps0 already validated")
    }
}
