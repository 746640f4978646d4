//! Numeric gradients of a Hamiltonian at fixed `I(0)`, prepared once for
//! repeated evaluation.

use num_complex::Complex64;
use smallvec::SmallVec;

use super::dd::CAcc;
use super::hamiltonian::Hamiltonian;
use super::monomial::Var;
use crate::indices::ModeVec;

struct Term {
    coeff: Complex64,
    // (mode, b, k, k')
    factors: SmallVec<[(i32, u32, u32, u32); 8]>,
}

/// `∂H/∂z_n` or `∂H/∂z̄_n` with the `I(0)^a` factors folded into the
/// coefficients; terms whose amplitude factor vanishes are skipped.
pub struct GradientField {
    n_max: u32,
    i0: ModeVec<f64>,
    terms: Vec<Term>,
}

#[inline]
fn cpow(x: Complex64, e: u32) -> Complex64 {
    match e {
        0 => Complex64::new(1.0, 0.0),
        1 => x,
        _ => x.powu(e),
    }
}

impl GradientField {
    pub fn new(h: &Hamiltonian, i0: &ModeVec<f64>) -> Self {
        let terms = h
            .iter()
            .filter_map(|(m, &c)| {
                let amp: f64 = m.a.iter().map(|(n, e)| i0[n].powi(e as i32)).product();
                let coeff = c * amp;
                if coeff == Complex64::new(0.0, 0.0) {
                    return None;
                }
                let mut factors: SmallVec<[(i32, u32, u32, u32); 8]> = SmallVec::new();
                for n in m.var_modes() {
                    factors.push((n, m.b.get(n), m.k.get(n), m.kp.get(n)));
                }
                Some(Term { coeff, factors })
            })
            .collect();
        GradientField {
            n_max: h.meta().n_max,
            i0: i0.clone(),
            terms,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, z: &ModeVec<Complex64>, var: Var) -> ModeVec<Complex64> {
        let mut acc: ModeVec<CAcc> = ModeVec::filled(self.n_max, CAcc::default());
        let one = Complex64::new(1.0, 0.0);
        let mut vals: SmallVec<[Complex64; 8]> = SmallVec::new();
        let mut ders: SmallVec<[Complex64; 8]> = SmallVec::new();
        let mut suffix: SmallVec<[Complex64; 9]> = SmallVec::new();
        for t in &self.terms {
            vals.clear();
            ders.clear();
            for &(n, b, k, kp) in &t.factors {
                let x = z[n];
                let xc = x.conj();
                let j = Complex64::new(x.norm_sqr() - self.i0[n], 0.0);
                let zk = cpow(x, k);
                let zkp = cpow(xc, kp);
                let jb = cpow(j, b);
                vals.push(jb * zk * zkp);
                let (own, own_e, other) = match var {
                    Var::ZBar => (kp, xc, x),
                    Var::Z => (k, x, xc),
                };
                let mut d = Complex64::new(0.0, 0.0);
                if b > 0 {
                    d += cpow(j, b - 1) * (b as f64) * other * zk * zkp;
                }
                if own > 0 {
                    let rest = match var {
                        Var::ZBar => zk * cpow(own_e, own - 1),
                        Var::Z => cpow(own_e, own - 1) * zkp,
                    };
                    d += jb * rest * own as f64;
                }
                ders.push(d);
            }
            suffix.clear();
            suffix.resize(vals.len() + 1, one);
            for i in (0..vals.len()).rev() {
                suffix[i] = suffix[i + 1] * vals[i];
            }
            let mut prefix = one;
            for (i, &(n, ..)) in t.factors.iter().enumerate() {
                let g = ders[i] * prefix * suffix[i + 1];
                acc[n].add_scaled_mul(1.0, t.coeff, g);
                prefix *= vals[i];
            }
        }
        acc.map(|_, a| a.value())
    }
}
