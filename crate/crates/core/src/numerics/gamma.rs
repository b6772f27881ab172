use super::{is_nonpositive_integer, principal_ln, Complex};
use crate::error::{Error, Result};

/// Arguments closer than this to a non-positive integer are treated as poles.
pub const POLE_TOL: f64 = 1e-12;

// Lanczos approximation, g = 607/128, 15 terms.
const LANCZOS_G_HALF: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_1;
const LANCZOS: [f64; 14] = [
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_88e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

const MAX_SHIFT: usize = 10_000;

/// Principal branch of `log Γ(z)`.
///
/// Left of `Re z = 1/2` the value is pulled in from the right half-plane with
/// `log Γ(z) = log Γ(z + n) − Σ Log(z + k)`, which stays on the principal
/// branch (unlike the reflection formula).
pub fn ln_gamma(z: Complex) -> Result<Complex> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("ln_gamma of non-finite {z}")));
    }
    if is_nonpositive_integer(z, POLE_TOL) {
        return Err(Error::Pole { re: z.re, im: z.im });
    }
    if z.re >= 0.5 {
        return Ok(lanczos(z));
    }
    let shift = (0.5 - z.re).ceil() as usize;
    if shift <= MAX_SHIFT {
        let mut acc = Complex::new(0.0, 0.0);
        for k in 0..shift {
            acc += principal_ln(z + k as f64);
        }
        return Ok(lanczos(z + shift as f64) - acc);
    }
    // far left: reflection, branch not tracked
    let pi = std::f64::consts::PI;
    let s = (z * pi).sin();
    Ok(Complex::new(pi.ln(), 0.0) - principal_ln(s) - lanczos(1.0 - z))
}

fn lanczos(z: Complex) -> Complex {
    let x = z;
    let tmp = x + LANCZOS_G_HALF;
    let tmp = (x + 0.5) * principal_ln(tmp) - tmp;
    let mut ser = Complex::new(LANCZOS_C0, 0.0);
    let mut y = x;
    for c in LANCZOS {
        y += 1.0;
        ser += c / y;
    }
    // Γ(x) = Γ(x+1)/x
    tmp + principal_ln(ser * SQRT_2PI / x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;

    #[test]
    fn half_and_one() {
        let v = ln_gamma(c(0.5, 0.0)).unwrap();
        assert!((v.re - 0.572_364_942_924_700_1).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
        let one = ln_gamma(c(1.0, 0.0)).unwrap();
        assert!(one.norm() < 1e-15);
        let two = ln_gamma(c(2.0, 0.0)).unwrap();
        assert!(two.norm() < 1e-15);
    }

    #[test]
    fn factorials() {
        let mut f = 1.0f64;
        for n in 1..30 {
            f *= n as f64;
            let v = ln_gamma(c(n as f64 + 1.0, 0.0)).unwrap();
            assert!((v.re - f.ln()).abs() <= 1e-13 * f.ln().max(1.0), "n = {n}");
        }
    }

    #[test]
    fn poles_are_errors() {
        for n in 0..5 {
            assert!(matches!(
                ln_gamma(c(-(n as f64), 0.0)),
                Err(Error::Pole { .. })
            ));
        }
        assert!(ln_gamma(c(-3.0 + 1e-13, 0.0)).is_err());
        assert!(ln_gamma(c(-3.0 + 1e-6, 0.0)).is_ok());
    }

    #[test]
    fn principal_branch_against_mpmath() {
        // mpmath.loggamma
        let v = ln_gamma(c(-2.5, 3.0)).unwrap();
        assert!((v - c(-7.478_236_042_050_315, -5.726_104_271_910_387)).norm() < 1e-12);
        let v = ln_gamma(c(30.0, -40.0)).unwrap();
        assert!((v - c(49.232_808_494_070_3, -143.834_795_822_664_83)).norm() < 2e-12);
        let v = ln_gamma(c(1.0, 1.0)).unwrap();
        assert!((v - c(-0.650_923_199_301_856_3, -0.301_640_320_467_533_2)).norm() < 1e-14);
    }
}
