//! Gauss series in extended binary precision.
//!
//! Used when every double-precision representation of `₂F₁` cancels: the
//! working precision is raised until it exceeds the observed cancellation
//! (largest term over the sum) by a safety margin.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

use super::Complex;
use crate::error::{Error, Result};

type Float = FBig<HalfEven, 2>;

const START_BITS: usize = 128;
const MARGIN_BITS: usize = 64;
const MAX_BITS: usize = 8192;

#[derive(Clone)]
struct Wide {
    re: Float,
    im: Float,
}

fn lift(x: f64, bits: usize) -> Float {
    Float::try_from(x)
        .expect("finite input")
        .with_precision(bits)
        .value()
}

fn log2_abs(x: &Float) -> f64 {
    let r = x.repr();
    if r.significand().is_zero() {
        return f64::NEG_INFINITY;
    }
    (r.exponent() + r.digits() as isize) as f64
}

impl Wide {
    fn new(z: Complex, bits: usize) -> Self {
        Self {
            re: lift(z.re, bits),
            im: lift(z.im, bits),
        }
    }

    fn shifted(&self, n: &Float) -> Self {
        Self {
            re: &self.re + n,
            im: self.im.clone(),
        }
    }

    fn add_assign(&mut self, o: &Self) {
        self.re = &self.re + &o.re;
        self.im = &self.im + &o.im;
    }

    fn mul(&self, o: &Self) -> Self {
        Self {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn div(&self, o: &Self) -> Self {
        let d = &o.re * &o.re + &o.im * &o.im;
        Self {
            re: (&self.re * &o.re + &self.im * &o.im) / &d,
            im: (&self.im * &o.re - &self.re * &o.im) / &d,
        }
    }

    /// `log₂ |z|` to within about one bit; `−∞` for zero.
    fn log2_norm(&self) -> f64 {
        log2_abs(&self.re).max(log2_abs(&self.im))
    }

    fn to_complex(&self) -> Complex {
        Complex::new(self.re.to_f64().value(), self.im.to_f64().value())
    }
}

struct Pass {
    sum: Complex,
    /// `log₂` of the largest term and of the sum.
    max_term: f64,
    total: f64,
    terms: usize,
}

fn pass(
    a: Complex,
    b: Complex,
    c: Complex,
    z: Complex,
    bits: usize,
    max_terms: usize,
) -> Result<Pass> {
    let (a, b, c, z) = (
        Wide::new(a, bits),
        Wide::new(b, bits),
        Wide::new(c, bits),
        Wide::new(z, bits),
    );
    let one = lift(1.0, bits);
    let mut term = Wide::new(Complex::new(1.0, 0.0), bits);
    let mut sum = term.clone();
    let mut max_term = 0.0f64;
    let mut n = lift(0.0, bits);
    let mut quiet = 0;
    for k in 0..max_terms {
        let next = &n + &one;
        let num = a.shifted(&n).mul(&b.shifted(&n)).mul(&z);
        let mut den = c.shifted(&n);
        den.re = &den.re * &next;
        den.im = &den.im * &next;
        term = term.mul(&num.div(&den));
        sum.add_assign(&term);
        n = next;
        let t = term.log2_norm();
        max_term = max_term.max(t);
        let s = sum.log2_norm();
        if t == f64::NEG_INFINITY || t + 62.0 <= s {
            quiet += 1;
            if t == f64::NEG_INFINITY || quiet >= 2 {
                return Ok(Pass {
                    sum: sum.to_complex(),
                    max_term,
                    total: s,
                    terms: k + 1,
                });
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Convergence { terms: max_terms })
}

/// Gauss series `Σ (a)ₙ(b)ₙ/((c)ₙ n!) zⁿ` for `|z| < 1`, returned with its
/// estimated relative error and the number of terms used.
pub(crate) fn gauss_series_wide(
    a: Complex,
    b: Complex,
    c: Complex,
    z: Complex,
    max_terms: usize,
) -> Result<(Complex, f64, usize)> {
    let mut bits = START_BITS;
    loop {
        let p = pass(a, b, c, z, bits, max_terms)?;
        if !p.total.is_finite() {
            return Err(Error::Convergence { terms: p.terms });
        }
        let lost = (p.max_term - p.total + 2.0).max(0.0).ceil() as usize;
        if bits >= lost + MARGIN_BITS {
            let rounding = (p.terms as f64) * (-((bits - lost) as f64)).exp2();
            return Ok((p.sum, f64::EPSILON + rounding, p.terms));
        }
        bits = lost + 2 * MARGIN_BITS;
        if bits > MAX_BITS {
            return Err(Error::Convergence { terms: p.terms });
        }
    }
}
