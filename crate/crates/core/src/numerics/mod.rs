//! Complex arithmetic helpers, log-gamma and the Gauss hypergeometric function.
//!
//! Everything here is a pure function of its arguments.

mod gamma;
mod hypergeometric;
mod wide;

pub use gamma::{ln_gamma, POLE_TOL};
pub use hypergeometric::{
    hyp2f1, hyp2f1_derivative, hyp2f1_euler, hyp2f1_inverse, hyp2f1_pfaff, hyp2f1_series,
    Hyp2F1Params, DEGENERACY_TOL, SERIES_MAX_TERMS, SERIES_TOL,
};

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

pub const I: Complex = Complex::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// Principal logarithm with `Im ∈ (−π, π]`.
///
/// `num_complex` returns `−π` for a negative real with a `−0.0` imaginary
/// part; that case is folded onto `+π` here.
pub fn principal_ln(z: Complex) -> Complex {
    let mut arg = z.im.atan2(z.re);
    if arg <= -std::f64::consts::PI {
        arg = std::f64::consts::PI;
    }
    Complex::new(z.norm().ln(), arg)
}

/// `base^exponent = exp(exponent · Log base)` on the principal branch.
pub fn principal_pow(base: Complex, exponent: Complex) -> Result<Complex> {
    if base == Complex::new(0.0, 0.0) {
        if exponent.re > 0.0 {
            return Ok(Complex::new(0.0, 0.0));
        }
        return Err(Error::Domain(format!(
            "0 raised to exponent with Re = {} <= 0",
            exponent.re
        )));
    }
    Ok((exponent * principal_ln(base)).exp())
}

/// Distance-based test for a non-positive integer.
pub(crate) fn is_nonpositive_integer(z: Complex, tol: f64) -> bool {
    z.im.abs() <= tol && z.re <= tol && (z.re - z.re.round()).abs() <= tol
}

pub(crate) fn is_integer(z: Complex, tol: f64) -> bool {
    z.im.abs() <= tol && (z.re - z.re.round()).abs() <= tol
}
