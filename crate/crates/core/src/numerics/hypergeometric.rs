//! Gauss hypergeometric function `₂F₁(a, b; c; z)` for complex arguments.
//!
//! The plain Gauss series is exact in principle but, for negative `z` and the
//! large parameters that appear in the matching problem, it suffers from
//! massive cancellation. [`hyp2f1`] therefore evaluates every applicable
//! representation (direct series, the two Pfaff maps, Euler, and the `1/z`
//! and `1 − z` connection formulas) and keeps the one with the smallest
//! estimated rounding error. If even the best of them has lost too many
//! digits, the series is summed again in extended precision.

use super::gamma::ln_gamma;
use super::wide::gauss_series_wide;
use super::{is_integer, is_nonpositive_integer, principal_ln, Complex, POLE_TOL};
use crate::error::{Error, Result};

pub const SERIES_TOL: f64 = 1e-16;
pub const SERIES_MAX_TERMS: usize = 10_000;
/// `b − a` (or `c − a − b`) this close to an integer makes the connection
/// formulas unusable without limit forms.
pub const DEGENERACY_TOL: f64 = 1e-10;

const SERIES_RADIUS: f64 = 0.95;
const CONNECTION_RADIUS: f64 = 1.05;
const ACCEPT_ERR: f64 = 1e-14;
/// Above this estimated error the extended-precision series takes over.
const WIDE_ERR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1Params {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub z: Complex,
}

impl Hyp2F1Params {
    pub fn new(a: Complex, b: Complex, c: Complex, z: Complex) -> Self {
        Self { a, b, c, z }
    }

    fn check_c(&self) -> Result<()> {
        if is_nonpositive_integer(self.c, POLE_TOL) {
            return Err(Error::Pole {
                re: self.c.re,
                im: self.c.im,
            });
        }
        Ok(())
    }
}

/// A value with its estimated relative rounding error.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Estimate {
    pub value: Complex,
    pub rel_err: f64,
    pub terms: usize,
}

fn gauss_series(a: Complex, b: Complex, c: Complex, z: Complex) -> Result<Estimate> {
    if is_nonpositive_integer(c, POLE_TOL) {
        return Err(Error::Pole { re: c.re, im: c.im });
    }
    let mut term = Complex::new(1.0, 0.0);
    let mut sum = term;
    let mut max_term = 1.0f64;
    let mut quiet = 0;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        let t = term.norm();
        max_term = max_term.max(t);
        if t == 0.0 {
            return Ok(finish(sum, max_term, n + 1));
        }
        if t <= SERIES_TOL * sum.norm() {
            quiet += 1;
            if quiet >= 2 {
                return Ok(finish(sum, max_term, n + 1));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Convergence {
        terms: SERIES_MAX_TERMS,
    })
}

fn wide_series(a: Complex, b: Complex, c: Complex, z: Complex) -> Result<Estimate> {
    let (value, rel_err, terms) = gauss_series_wide(a, b, c, z, SERIES_MAX_TERMS)?;
    Ok(Estimate {
        value,
        rel_err,
        terms,
    })
}

fn finish(sum: Complex, max_term: f64, terms: usize) -> Estimate {
    let s = sum.norm();
    let rel_err = if s > 0.0 {
        f64::EPSILON * max_term / s
    } else {
        f64::INFINITY
    };
    Estimate {
        value: sum,
        rel_err,
        terms,
    }
}

/// `(1 − z)^s` with the absolute error of its exponent.
fn one_minus_pow(z: Complex, s: Complex) -> (Complex, f64) {
    let e = s * principal_ln(1.0 - z);
    (e.exp(), f64::EPSILON * (1.0 + e.norm()))
}

/// Direct Gauss series. Requires `|z| < 0.95`.
pub fn hyp2f1_series(p: Hyp2F1Params) -> Result<Complex> {
    p.check_c()?;
    if p.z.norm() >= SERIES_RADIUS {
        return Err(Error::Domain(format!(
            "series requires |z| < {SERIES_RADIUS}, got |z| = {}",
            p.z.norm()
        )));
    }
    gauss_series(p.a, p.b, p.c, p.z).map(|e| e.value)
}

#[cfg(test)]
pub(crate) fn series_estimate(p: Hyp2F1Params) -> Result<Estimate> {
    p.check_c()?;
    gauss_series(p.a, p.b, p.c, p.z)
}

fn euler(a: Complex, b: Complex, c: Complex, z: Complex) -> Result<Estimate> {
    let inner = gauss_series(c - a, c - b, c, z)?;
    let (pre, pre_err) = one_minus_pow(z, c - a - b);
    Ok(Estimate {
        value: pre * inner.value,
        rel_err: inner.rel_err + pre_err,
        terms: inner.terms,
    })
}

/// `₂F₁(a,b;c;z) = (1 − z)^{c−a−b} ₂F₁(c−a, c−b; c; z)`. Requires `|z| < 0.95`.
pub fn hyp2f1_euler(p: Hyp2F1Params) -> Result<Complex> {
    p.check_c()?;
    if p.z.norm() >= SERIES_RADIUS {
        return Err(Error::Domain(format!(
            "Euler transform requires |z| < {SERIES_RADIUS}"
        )));
    }
    euler(p.a, p.b, p.c, p.z).map(|e| e.value)
}

type Series = fn(Complex, Complex, Complex, Complex) -> Result<Estimate>;

fn pfaff_with(series: Series, a: Complex, b: Complex, c: Complex, z: Complex) -> Result<Estimate> {
    let w = z / (z - 1.0);
    let inner = series(a, c - b, c, w)?;
    let (pre, pre_err) = one_minus_pow(z, -a);
    Ok(Estimate {
        value: pre * inner.value,
        rel_err: inner.rel_err + pre_err,
        terms: inner.terms,
    })
}

fn pfaff(a: Complex, b: Complex, c: Complex, z: Complex) -> Result<Estimate> {
    pfaff_with(gauss_series, a, b, c, z)
}

/// `₂F₁(a,b;c;z) = (1 − z)^{−a} ₂F₁(a, c−b; c; z/(z−1))`. Requires
/// `|z/(z−1)| < 0.95`.
pub fn hyp2f1_pfaff(p: Hyp2F1Params) -> Result<Complex> {
    p.check_c()?;
    let w = p.z / (p.z - 1.0);
    if w.norm() >= SERIES_RADIUS {
        return Err(Error::Domain(format!(
            "Pfaff transform requires |z/(z-1)| < {SERIES_RADIUS}"
        )));
    }
    pfaff(p.a, p.b, p.c, p.z).map(|e| e.value)
}

/// `exp(ln Γ(n₁) + ln Γ(n₂) − ln Γ(d₁) − ln Γ(d₂) + extra)` with its error.
/// A pole in a denominator makes the whole factor vanish exactly.
fn gamma_factor(
    num: [Complex; 2],
    den: [Complex; 2],
    extra: Complex,
) -> Result<Option<(Complex, f64)>> {
    for d in den {
        if is_nonpositive_integer(d, POLE_TOL) {
            return Ok(None);
        }
    }
    let mut log = extra;
    let mut scale = extra.norm();
    for n in num {
        let g = ln_gamma(n)?;
        scale += g.norm();
        log += g;
    }
    for d in den {
        let g = ln_gamma(d)?;
        scale += g.norm();
        log -= g;
    }
    Ok(Some((log.exp(), f64::EPSILON * (1.0 + scale))))
}

fn combine(terms: &[(Complex, f64)]) -> Estimate {
    let value: Complex = terms.iter().map(|t| t.0).sum();
    let abs_err: f64 = terms.iter().map(|t| t.0.norm() * t.1).sum();
    let v = value.norm();
    Estimate {
        value,
        rel_err: if v > 0.0 { abs_err / v } else { f64::INFINITY },
        terms: 0,
    }
}

fn inverse(a: Complex, b: Complex, c: Complex, z: Complex) -> Result<Estimate> {
    if is_integer(b - a, DEGENERACY_TOL) {
        return Err(Error::DegenerateParams("b - a"));
    }
    let log_mz = principal_ln(-z);
    let zi = 1.0 / z;
    let mut parts = Vec::with_capacity(2);
    for (first, second) in [(a, b), (b, a)] {
        let Some((factor, ferr)) =
            gamma_factor([c, second - first], [second, c - first], -first * log_mz)?
        else {
            continue;
        };
        let inner = best_small(first, 1.0 + first - c, 1.0 + first - second, zi)?;
        parts.push((factor * inner.value, ferr + inner.rel_err));
    }
    Ok(combine(&parts))
}

/// Two-term `1/z` connection formula, valid for `|z| > 1.05` off `[1, ∞)`;
/// the inner functions at `1/z` go through the small-argument evaluator.
pub fn hyp2f1_inverse(p: Hyp2F1Params) -> Result<Complex> {
    p.check_c()?;
    if p.z.norm() <= CONNECTION_RADIUS {
        return Err(Error::Domain(format!(
            "1/z connection requires |z| > {CONNECTION_RADIUS}"
        )));
    }
    on_cut(p.z)?;
    inverse(p.a, p.b, p.c, p.z).map(|e| e.value)
}

fn one_minus(a: Complex, b: Complex, c: Complex, z: Complex) -> Result<Estimate> {
    let s = c - a - b;
    if is_integer(s, DEGENERACY_TOL) {
        return Err(Error::DegenerateParams("c - a - b"));
    }
    let y = 1.0 - z;
    let mut parts = Vec::with_capacity(2);
    if let Some((f, ferr)) = gamma_factor([c, s], [c - a, c - b], Complex::new(0.0, 0.0))? {
        let inner = best_small(a, b, 1.0 - s, y)?;
        parts.push((f * inner.value, ferr + inner.rel_err));
    }
    let log_y = principal_ln(y);
    if let Some((f, ferr)) = gamma_factor([c, -s], [a, b], s * log_y)? {
        let inner = best_small(c - a, c - b, 1.0 + s, y)?;
        parts.push((f * inner.value, ferr + inner.rel_err));
    }
    Ok(combine(&parts))
}

fn on_cut(z: Complex) -> Result<()> {
    if z.re >= 1.0 && z.im.abs() <= 1e-14 * z.norm().max(1.0) {
        return Err(Error::Domain(format!(
            "z = {z} lies on the branch cut [1, inf)"
        )));
    }
    Ok(())
}

struct Selector {
    best: Option<Estimate>,
    first_err: Option<Error>,
    degenerate: Option<Error>,
}

impl Selector {
    fn new() -> Self {
        Self {
            best: None,
            first_err: None,
            degenerate: None,
        }
    }

    fn consider(&mut self, r: Result<Estimate>) {
        match r {
            Ok(e) if e.value.re.is_finite() && e.value.im.is_finite() => {
                if self.best.is_none_or(|b| e.rel_err < b.rel_err) {
                    self.best = Some(e);
                }
            }
            Ok(_) => {
                self.first_err
                    .get_or_insert(Error::Convergence { terms: 0 });
            }
            Err(e @ Error::DegenerateParams(_)) => {
                self.degenerate.get_or_insert(e);
            }
            Err(e) => {
                self.first_err.get_or_insert(e);
            }
        }
    }

    fn good_enough(&self) -> bool {
        self.best.is_some_and(|b| b.rel_err < ACCEPT_ERR)
    }

    fn finish(self) -> Result<Estimate> {
        if let Some(b) = self.best {
            return Ok(b);
        }
        Err(self
            .degenerate
            .or(self.first_err)
            .unwrap_or(Error::Convergence { terms: 0 }))
    }
}

/// Best of the representations that only need a convergent series at `z`
/// or `z/(z−1)`.
fn best_small(a: Complex, b: Complex, c: Complex, z: Complex) -> Result<Estimate> {
    select(a, b, c, z, false)
}

fn select(a: Complex, b: Complex, c: Complex, z: Complex, connect: bool) -> Result<Estimate> {
    if is_nonpositive_integer(c, POLE_TOL) {
        return Err(Error::Pole { re: c.re, im: c.im });
    }
    let r = z.norm();
    let w = z / (z - 1.0);
    let mut sel = Selector::new();
    if r < SERIES_RADIUS {
        sel.consider(gauss_series(a, b, c, z));
        if sel.good_enough() {
            return sel.finish();
        }
    }
    if connect && r > CONNECTION_RADIUS {
        sel.consider(inverse(a, b, c, z));
        if sel.good_enough() {
            return sel.finish();
        }
    }
    if w.norm() < SERIES_RADIUS {
        sel.consider(pfaff(a, b, c, z));
        sel.consider(pfaff(b, a, c, z));
    }
    if r < SERIES_RADIUS {
        sel.consider(euler(a, b, c, z));
    }
    if connect && (1.0 - z).norm() < SERIES_RADIUS {
        sel.consider(one_minus(a, b, c, z));
    }
    if sel.best.is_none() && r < 1.0 {
        // neighbourhood of e^{±iπ/3}: nothing better than the slow series
        sel.consider(gauss_series(a, b, c, z));
    }
    if !sel.best.is_some_and(|b| b.rel_err < WIDE_ERR) {
        if r < SERIES_RADIUS {
            sel.consider(wide_series(a, b, c, z));
        } else if w.norm() < SERIES_RADIUS {
            sel.consider(pfaff_with(wide_series, a, b, c, z));
        }
    }
    sel.finish()
}

pub(crate) fn hyp2f1_estimate(p: Hyp2F1Params) -> Result<Estimate> {
    p.check_c()?;
    let zero = Complex::new(0.0, 0.0);
    if p.z == zero || p.a == zero || p.b == zero {
        return Ok(Estimate {
            value: Complex::new(1.0, 0.0),
            rel_err: 0.0,
            terms: 0,
        });
    }
    on_cut(p.z)?;
    select(p.a, p.b, p.c, p.z, true)
}

/// `₂F₁(a, b; c; z)` on the principal sheet (cut along `[1, ∞)`).
pub fn hyp2f1(p: Hyp2F1Params) -> Result<Complex> {
    hyp2f1_estimate(p).map(|e| e.value)
}

/// `d/dz ₂F₁(a, b; c; z) = (ab/c) ₂F₁(a+1, b+1; c+1; z)`.
pub fn hyp2f1_derivative(p: Hyp2F1Params) -> Result<Complex> {
    p.check_c()?;
    let zero = Complex::new(0.0, 0.0);
    if p.a == zero || p.b == zero {
        return Ok(zero);
    }
    let f = hyp2f1(Hyp2F1Params::new(p.a + 1.0, p.b + 1.0, p.c + 1.0, p.z))?;
    Ok(p.a * p.b / p.c * f)
}
