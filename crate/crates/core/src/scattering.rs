//! Continuum solution: wave coefficients, the matching-point function stack,
//! amplitude ratios and transmission/reflection probabilities.
//!
//! The left solution is written in `z = −(p/q)e^{α(x+L)}` and the right one in
//! `y = −(p/q)e^{−α(x−L)}`; both meet at `t₀ = −(p/q)e^{αL}`. Every
//! hypergeometric function at `t₀` is continued to `1/t₀` with the two-term
//! connection formula, giving
//!
//! `M = S_a N_a (−t₀)^{−a} + S_b N_b (−t₀)^{−b}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{hyp2f1, ln_gamma, principal_ln, Complex, Hyp2F1Params, POLE_TOL};
use crate::potential::{PotentialParams, SideParams, UnitSystem};
use crate::settings::{BranchConvention, NuBranch, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveCoefficients {
    pub energy: f64,
    /// `μ = ik`.
    pub mu: Complex,
    /// Dimensionless wave number `√(E² − M²c⁴)/(αħc)`.
    pub k: f64,
    pub nu: Complex,
    pub lambda: Complex,
    pub t0: f64,
    pub omega0_sq: Complex,
    pub omega1_sq: Complex,
    pub omega2_sq: Complex,
}

impl WaveCoefficients {
    /// `ln(−t₀) = ln(p/q) + αL`, exact even when `t₀` itself would overflow.
    pub fn ln_neg_t0(&self) -> f64 {
        (-self.t0).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringResult {
    pub energy: f64,
    pub t: f64,
    pub r: f64,
    pub d1_over_a1: Complex,
    pub b1_over_a1: Complex,
}

/// Energy-dependent quantities shared by the continuum and bound problems.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Common {
    /// `(E² − M²c⁴)/(αħc)²`.
    pub eps: f64,
    pub nu: Complex,
    pub lambda: Complex,
    pub omega: [Complex; 3],
    pub t0: f64,
    pub ln_neg_t0: f64,
}

fn symmetric_half(params: &PotentialParams) -> Result<&SideParams> {
    if !params.is_symmetric() {
        return Err(Error::InvalidParams(
            "the matching problem is solved for symmetric potentials only".into(),
        ));
    }
    Ok(params.right())
}

pub(crate) fn common(
    energy: f64,
    mass: f64,
    params: &PotentialParams,
    units: &UnitSystem,
    branch: NuBranch,
) -> Result<Common> {
    let s = symmetric_half(params)?;
    if !(mass > 0.0) {
        return Err(Error::InvalidParams("mass must be positive".into()));
    }
    if s.p / s.q <= 0.0 {
        return Err(Error::InvalidParams(
            "p/q must be positive: the potential would have a pole".into(),
        ));
    }
    let mc2 = units.rest_energy(mass);
    let scale = (s.alpha * units.hbar_c()).powi(2);
    let eps = (energy * energy - mc2 * mc2) / scale;
    let g = 2.0 * (energy + mc2) / scale;
    let (q, p) = (s.q, s.p);
    let v0 = params.v0();

    let omega0 = eps;
    let omega1 = -2.0 * eps
        + g * ((s.v1 - 2.0 * s.v2 / q) / q
            - s.xi * (s.a / q - s.b / p)
            - 2.0 * s.eta * s.c / q * (s.c / q - s.d / p));
    let omega2 = eps - g * s.plateau(v0);

    let radicand = 0.25
        + g * ((s.v2 + s.eta * s.c * s.c) / (q * q) - s.eta * s.d / p * (2.0 * s.c / q - s.d / p));
    let root = Complex::new(radicand, 0.0).sqrt();
    let nu = match branch {
        NuBranch::Plus => 0.5 + root,
        NuBranch::Minus => 0.5 - root,
    };
    let lambda = Complex::new(0.0, 1.0) * Complex::new(omega2, 0.0).sqrt();

    let ln_neg_t0 = (p / q).ln() + s.alpha * s.l;
    if ln_neg_t0 <= 0.0 {
        return Err(Error::MatchingPoint(ln_neg_t0.exp()));
    }
    Ok(Common {
        eps,
        nu,
        lambda,
        omega: [omega0.into(), omega1.into(), omega2.into()],
        t0: -ln_neg_t0.exp(),
        ln_neg_t0,
    })
}

/// `μ, ν, λ, k, t₀` for a continuum energy `E > Mc²`.
pub fn wave_coefficients(
    energy: f64,
    mass: f64,
    params: &PotentialParams,
    units: &UnitSystem,
) -> Result<WaveCoefficients> {
    wave_coefficients_with(energy, mass, params, units, NuBranch::Plus)
}

pub fn wave_coefficients_with(
    energy: f64,
    mass: f64,
    params: &PotentialParams,
    units: &UnitSystem,
    branch: NuBranch,
) -> Result<WaveCoefficients> {
    let mc2 = units.rest_energy(mass);
    if !(energy > mc2) {
        return Err(Error::Domain(format!(
            "continuum requires E > Mc^2 = {mc2}, got E = {energy}"
        )));
    }
    let c = common(energy, mass, params, units, branch)?;
    let k = c.eps.sqrt();
    Ok(WaveCoefficients {
        energy,
        mu: Complex::new(0.0, k),
        k,
        nu: c.nu,
        lambda: c.lambda,
        t0: c.t0,
        omega0_sq: c.omega[0],
        omega1_sq: c.omega[1],
        omega2_sq: c.omega[2],
    })
}

/// `(a, b, c)` of the four functions at the matching point, in order
/// `M₁ … M₄`.
pub(crate) fn m_parameters(mu: Complex, nu: Complex, lambda: Complex) -> [[Complex; 3]; 4] {
    [
        [mu + nu + lambda, mu + nu - lambda, 1.0 + 2.0 * mu],
        [-mu + nu + lambda, -mu + nu - lambda, 1.0 - 2.0 * mu],
        [
            1.0 + mu + nu + lambda,
            1.0 + mu + nu - lambda,
            2.0 + 2.0 * mu,
        ],
        [
            1.0 - mu + nu + lambda,
            1.0 - mu + nu - lambda,
            2.0 - 2.0 * mu,
        ],
    ]
}

/// `ln(Γ(c)Γ(b−a) / (Γ(b)Γ(c−a)))`, or `None` when a denominator gamma has
/// a pole and the ratio vanishes.
fn ln_s(a: Complex, b: Complex, c: Complex) -> Result<Option<Complex>> {
    let small = |z: Complex| {
        z.im.abs() <= POLE_TOL && z.re <= POLE_TOL && (z.re - z.re.round()).abs() <= POLE_TOL
    };
    if small(b) || small(c - a) {
        return Ok(None);
    }
    Ok(Some(
        ln_gamma(c)? + ln_gamma(b - a)? - ln_gamma(b)? - ln_gamma(c - a)?,
    ))
}

/// The two connection terms of one function: `(a, b)` and `(b, a)` orders.
fn ordered(p: [Complex; 3]) -> [[Complex; 3]; 2] {
    let [a, b, c] = p;
    [[a, b, c], [b, a, c]]
}

fn n_value(a: Complex, b: Complex, c: Complex, inv_t0: f64) -> Result<Complex> {
    hyp2f1(Hyp2F1Params::new(
        a,
        1.0 + a - c,
        1.0 + a - b,
        Complex::new(inv_t0, 0.0),
    ))
}

/// `N₁ … N₈`: the hypergeometric functions at `1/t₀`.
pub fn n_functions(coeffs: &WaveCoefficients) -> Result<[Complex; 8]> {
    if coeffs.t0.abs() <= 1.0 {
        return Err(Error::MatchingPoint(coeffs.t0.abs()));
    }
    let mut out = [Complex::new(0.0, 0.0); 8];
    let inv = 1.0 / coeffs.t0;
    for (j, p) in m_parameters(coeffs.mu, coeffs.nu, coeffs.lambda)
        .into_iter()
        .enumerate()
    {
        for (i, [a, b, c]) in ordered(p).into_iter().enumerate() {
            out[2 * j + i] = n_value(a, b, c, inv)?;
        }
    }
    Ok(out)
}

/// `S₁ … S₈`: the gamma ratios of the connection formula.
pub fn s_functions(coeffs: &WaveCoefficients) -> Result<[Complex; 8]> {
    let mut out = [Complex::new(0.0, 0.0); 8];
    for (j, p) in m_parameters(coeffs.mu, coeffs.nu, coeffs.lambda)
        .into_iter()
        .enumerate()
    {
        for (i, [a, b, c]) in ordered(p).into_iter().enumerate() {
            out[2 * j + i] = ln_s(a, b, c)?.map_or(Complex::new(0.0, 0.0), |l| l.exp());
        }
    }
    Ok(out)
}

/// Phase-and-modulus factor standing for `(−1)^w t₀^w`.
fn power_log(w: Complex, ln_neg_t0: f64, branch: BranchConvention) -> Complex {
    match branch {
        BranchConvention::NegatedBase => w * ln_neg_t0,
        BranchConvention::Principal => w * Complex::new(ln_neg_t0, 2.0 * PI),
    }
}

/// `M₁ … M₄` divided by the common positive factor `e^{shift}`, chosen so
/// that the largest connection term has unit modulus, together with the sum
/// of the moduli of the two terms of each function.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MStack {
    pub m: [Complex; 4],
    pub size: [f64; 4],
    pub shift: f64,
}

pub(crate) fn m_stack(
    mu: Complex,
    nu: Complex,
    lambda: Complex,
    ln_neg_t0: f64,
    branch: BranchConvention,
) -> Result<MStack> {
    if ln_neg_t0 <= 0.0 {
        return Err(Error::MatchingPoint(ln_neg_t0.exp()));
    }
    let inv_t0 = -(-ln_neg_t0).exp();
    let mut logs: Vec<(usize, Complex)> = Vec::with_capacity(8);
    for (j, p) in m_parameters(mu, nu, lambda).into_iter().enumerate() {
        for [a, b, c] in ordered(p) {
            let Some(ls) = ln_s(a, b, c)? else { continue };
            let n = n_value(a, b, c, inv_t0)?;
            if n == Complex::new(0.0, 0.0) {
                continue;
            }
            logs.push((j, ls + principal_ln(n) + power_log(-a, ln_neg_t0, branch)));
        }
    }
    let shift = logs
        .iter()
        .map(|t| t.1.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::Domain("no finite connection term".into()));
    }
    let mut m = [Complex::new(0.0, 0.0); 4];
    let mut size = [0.0; 4];
    for (j, l) in logs {
        let term = (l - shift).exp();
        m[j] += term;
        size[j] += term.norm();
    }
    Ok(MStack { m, size, shift })
}

/// `M₁ … M₄`, the four hypergeometric functions at the matching point.
pub fn m_functions(coeffs: &WaveCoefficients, branch: BranchConvention) -> Result<[Complex; 4]> {
    let st = m_stack(
        coeffs.mu,
        coeffs.nu,
        coeffs.lambda,
        coeffs.ln_neg_t0(),
        branch,
    )?;
    let unscale = st.shift.exp();
    Ok(st.m.map(|v| v * unscale))
}

/// Weights of the derivative bracket: `(μ/t₀ − ν/(1−t₀))` and
/// `((μ+ν)² − λ²)/(1+2μ)`.
pub(crate) fn derivative_weights(
    mu: Complex,
    nu: Complex,
    lambda: Complex,
    t0: f64,
) -> (Complex, Complex) {
    (
        mu / t0 - nu / (1.0 - t0),
        ((mu + nu) * (mu + nu) - lambda * lambda) / (1.0 + 2.0 * mu),
    )
}

/// `(D₁/A₁, B₁/A₁)`.
pub fn amplitude_ratios(
    coeffs: &WaveCoefficients,
    branch: BranchConvention,
) -> Result<(Complex, Complex)> {
    let (mu, nu, lambda, t0) = (coeffs.mu, coeffs.nu, coeffs.lambda, coeffs.t0);
    let ln_t = coeffs.ln_neg_t0();
    let st = m_stack(mu, nu, lambda, ln_t, branch)?;
    let [m1, m2, m3, m4] = st.m;
    let (w1, w3) = derivative_weights(mu, nu, lambda, t0);
    let (w2, w4) = derivative_weights(-mu, nu, lambda, t0);
    let num = w1 * m1 + w3 * m3;
    let den = w2 * m2 + w4 * m4;
    let den_scale = w2.norm() * st.size[1] + w4.norm() * st.size[3];
    if m2.norm() <= 1e-300 * st.size[1].max(1e-300) || den.norm() <= 1e-300 * den_scale.max(1e-300)
    {
        return Err(Error::ResonanceDenominator(den.norm()));
    }
    let factor = match branch {
        BranchConvention::NegatedBase => (2.0 * mu * ln_t).exp(),
        BranchConvention::Principal => (2.0 * mu * Complex::new(ln_t, PI)).exp(),
    } * 0.5;
    let a = m1 / m2;
    let b = num / den;
    let (d1, b1) = (factor * (a - b), -factor * (a + b));
    if !(d1.re.is_finite() && d1.im.is_finite() && b1.re.is_finite() && b1.im.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite amplitude ratio at E = {}",
            coeffs.energy
        )));
    }
    Ok((d1, b1))
}

/// `T = |D₁/A₁|²`, `R = |B₁/A₁|²` with default settings.
pub fn transmission_reflection(
    energy: f64,
    mass: f64,
    params: &PotentialParams,
    units: &UnitSystem,
) -> Result<ScatteringResult> {
    let settings = SolverSettings {
        units: *units,
        ..SolverSettings::default()
    };
    transmission_reflection_with(energy, mass, params, &settings)
}

pub fn transmission_reflection_with(
    energy: f64,
    mass: f64,
    params: &PotentialParams,
    settings: &SolverSettings,
) -> Result<ScatteringResult> {
    let coeffs = wave_coefficients_with(energy, mass, params, &settings.units, settings.nu_branch)?;
    let (d, b) = amplitude_ratios(&coeffs, settings.branch)?;
    Ok(ScatteringResult {
        energy,
        t: d.norm_sqr(),
        r: b.norm_sqr(),
        d1_over_a1: d,
        b1_over_a1: b,
    })
}

/// Energy nudge applied when an energy lands on a numerical singularity.
pub const SINGULAR_NUDGE: f64 = 1e-9;

/// Like [`transmission_reflection_with`], but retries at `E + SINGULAR_NUDGE`
/// when `E` hits a pole or resonance denominator. The flag reports the retry.
pub fn transmission_reflection_perturbed(
    energy: f64,
    mass: f64,
    params: &PotentialParams,
    settings: &SolverSettings,
) -> Result<(ScatteringResult, bool)> {
    match transmission_reflection_with(energy, mass, params, settings) {
        Err(e) if e.is_numerical_singularity() => {
            transmission_reflection_with(energy + SINGULAR_NUDGE, mass, params, settings)
                .map(|r| (r, true))
        }
        other => other.map(|r| (r, false)),
    }
}

/// `(−w)^μ (1 − w)^ν ₂F₁(μ+ν+λ, μ+ν−λ; 1+2μ; w)` for `w < 0`, with the
/// power of `−w` taken on the positive real base `e^{ln(−w)}`.
pub(crate) fn basis(mu: Complex, nu: Complex, lambda: Complex, ln_neg_w: f64) -> Result<Complex> {
    let w = -ln_neg_w.exp();
    let f = hyp2f1(Hyp2F1Params::new(
        mu + nu + lambda,
        mu + nu - lambda,
        1.0 + 2.0 * mu,
        Complex::new(w, 0.0),
    ))?;
    let ln_pre = mu * ln_neg_w + nu * principal_ln(Complex::new(1.0 - w, 0.0));
    Ok(f * ln_pre.exp())
}

/// `ln(−z)` for the left half (`x ≤ 0`) or `ln(−y)` for the right half.
pub(crate) fn ln_neg_coordinate(s: &SideParams, x: f64) -> f64 {
    (s.p / s.q).ln() + s.alpha * (s.l - x.abs())
}

/// Scattering solution with `A₁ = 1` and no wave incoming from the right.
pub fn scattering_wavefunction(
    x: f64,
    coeffs: &WaveCoefficients,
    ratios: (Complex, Complex),
    params: &PotentialParams,
) -> Result<Complex> {
    let s = symmetric_half(params)?;
    let ln_w = ln_neg_coordinate(s, x);
    let (mu, nu, lambda) = (coeffs.mu, coeffs.nu, coeffs.lambda);
    let (d, b) = ratios;
    if x <= 0.0 {
        Ok(basis(mu, nu, lambda, ln_w)? + b * basis(-mu, nu, lambda, ln_w)?)
    } else {
        Ok(d * basis(-mu, nu, lambda, ln_w)?)
    }
}
