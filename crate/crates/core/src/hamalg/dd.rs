//! Double-double accumulation for coefficient sums.

use num_complex::Complex64;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        let lo = self.lo + e;
        let (hi, lo) = two_sum(s, lo);
        self.hi = hi;
        self.lo = lo;
    }

    /// Adds `m·x·y`, keeping the product error of `x·y` exactly.
    #[inline]
    pub fn add_prod3(&mut self, m: f64, x: f64, y: f64) {
        let (p, e) = two_prod(x, y);
        let (q, f) = two_prod(m, p);
        self.add(q);
        self.add(f + m * e);
    }

    #[inline]
    pub fn add_prod(&mut self, x: f64, y: f64) {
        let (p, e) = two_prod(x, y);
        self.add(p);
        self.add(e);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// Complex double-double accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CAcc {
    re: Dd,
    im: Dd,
}

impl CAcc {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    /// Adds `m·x` for real `m`.
    #[inline]
    pub fn add_scaled(&mut self, m: f64, x: Complex64) {
        self.re.add_prod(m, x.re);
        self.im.add_prod(m, x.im);
    }

    /// Adds `m·x·y` for real `m`.
    #[inline]
    pub fn add_scaled_mul(&mut self, m: f64, x: Complex64, y: Complex64) {
        self.re.add_prod3(m, x.re, y.re);
        self.re.add_prod3(-m, x.im, y.im);
        self.im.add_prod3(m, x.re, y.im);
        self.im.add_prod3(m, x.im, y.re);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}
