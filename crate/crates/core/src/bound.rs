//! Bound states of a symmetric well, `−Mc² < E < Mc²`.
//!
//! With `μ = K > 0` the solution that decays at `x → −∞` is
//! `(−z)^K (1−z)^ν ₂F₁(K+ν+λ, K+ν−λ; 1+2K; z)` and its mirror image on the
//! right. Odd states need it to vanish at the matching point, even states
//! need its derivative to vanish there.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::Complex;
use crate::potential::{PotentialParams, UnitSystem};
use crate::scattering::{basis, common, derivative_weights, ln_neg_coordinate, m_stack};
use crate::settings::{NuBranch, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCoefficients {
    pub energy: f64,
    /// `K = √(M²c⁴ − E²)/(αħc)`.
    pub kappa: f64,
    /// `μ = K`.
    pub mu: Complex,
    pub nu: Complex,
    pub lambda: Complex,
    pub t0: f64,
    ln_neg_t0: f64,
}

impl BoundCoefficients {
    pub fn ln_neg_t0(&self) -> f64 {
        self.ln_neg_t0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    pub parity: Parity,
    pub nodes: usize,
    pub condition_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub states: Vec<BoundState>,
    pub params: PotentialParams,
    pub mass: f64,
}

/// Everything the condition functions need besides the energy.
#[derive(Debug, Clone, Copy)]
pub struct BoundContext {
    pub params: PotentialParams,
    pub mass: f64,
    pub settings: SolverSettings,
}

impl BoundContext {
    pub fn new(params: PotentialParams, mass: f64, settings: SolverSettings) -> Self {
        Self {
            params,
            mass,
            settings,
        }
    }
}

pub fn bound_coefficients(
    energy: f64,
    mass: f64,
    params: &PotentialParams,
    units: &UnitSystem,
) -> Result<BoundCoefficients> {
    bound_coefficients_with(energy, mass, params, units, NuBranch::Plus)
}

pub fn bound_coefficients_with(
    energy: f64,
    mass: f64,
    params: &PotentialParams,
    units: &UnitSystem,
    branch: NuBranch,
) -> Result<BoundCoefficients> {
    let mc2 = units.rest_energy(mass);
    if !(energy.abs() < mc2) {
        return Err(Error::Domain(format!(
            "bound states require |E| < Mc^2 = {mc2}, got E = {energy}"
        )));
    }
    let c = common(energy, mass, params, units, branch)?;
    let kappa = (-c.eps).sqrt();
    Ok(BoundCoefficients {
        energy,
        kappa,
        mu: Complex::new(kappa, 0.0),
        nu: c.nu,
        lambda: c.lambda,
        t0: c.t0,
        ln_neg_t0: c.ln_neg_t0,
    })
}

fn real_part(v: Complex) -> Result<f64> {
    if v.im.abs() > 1e-6 * v.re.abs() + 1e-12 {
        return Err(Error::ComplexResidual { re: v.re, im: v.im });
    }
    Ok(v.re)
}

/// Both quantization residuals `(even, odd)`, each divided by the sum of the
/// moduli of its terms so that it lies in `[−1, 1]`.
pub fn conditions(energy: f64, ctx: &BoundContext) -> Result<(f64, f64)> {
    let s = &ctx.settings;
    let b = bound_coefficients_with(energy, ctx.mass, &ctx.params, &s.units, s.nu_branch)?;
    let st = m_stack(b.mu, b.nu, b.lambda, b.ln_neg_t0, s.branch)?;
    let (w1, w3) = derivative_weights(b.mu, b.nu, b.lambda, b.t0);
    let even_scale = w1.norm() * st.size[0] + w3.norm() * st.size[2];
    let even = (w1 * st.m[0] + w3 * st.m[2]) / even_scale;
    let odd = st.m[0] / st.size[0];
    Ok((real_part(even)?, real_part(odd)?))
}

/// Residual of the even (symmetric) quantization condition.
pub fn even_condition(energy: f64, ctx: &BoundContext) -> Result<f64> {
    conditions(energy, ctx).map(|c| c.0)
}

/// Residual of the odd (antisymmetric) quantization condition.
pub fn odd_condition(energy: f64, ctx: &BoundContext) -> Result<f64> {
    conditions(energy, ctx).map(|c| c.1)
}

fn condition(parity: Parity, energy: f64, ctx: &BoundContext) -> Result<f64> {
    match parity {
        Parity::Even => even_condition(energy, ctx),
        Parity::Odd => odd_condition(energy, ctx),
    }
}

/// Bisection down to `settings.bisection_width`, then Newton with a
/// central-difference slope. Newton steps that leave the bracket fall back to
/// bisection.
pub fn refine_root(
    parity: Parity,
    mut lo: f64,
    mut hi: f64,
    ctx: &BoundContext,
) -> Result<(f64, f64)> {
    let s = &ctx.settings;
    let f = |e: f64| condition(parity, e, ctx);
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok((lo, 0.0));
    }
    if f_hi == 0.0 {
        return Ok((hi, 0.0));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoBracket);
    }
    let bisect = |lo: &mut f64, hi: &mut f64, f_lo: &mut f64, width: f64| -> Result<()> {
        while *hi - *lo > width {
            let mid = 0.5 * (*lo + *hi);
            let fm = f(mid)?;
            if fm == 0.0 {
                *lo = mid;
                *hi = mid;
                break;
            }
            if fm.signum() == f_lo.signum() {
                *lo = mid;
                *f_lo = fm;
            } else {
                *hi = mid;
            }
        }
        Ok(())
    };
    bisect(&mut lo, &mut hi, &mut f_lo, s.bisection_width)?;

    let mut e = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..50 {
        let fe = f(e)?;
        let slope = (f(e + s.newton_h)? - f(e - s.newton_h)?) / (2.0 * s.newton_h);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let step = fe / slope;
        let next = e - step;
        if !(next >= lo && next <= hi) {
            break;
        }
        e = next;
        if step.abs() < s.root_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        bisect(&mut lo, &mut hi, &mut f_lo, s.root_tol)?;
        e = 0.5 * (lo + hi);
    }
    let residual = f(e)?;
    if residual.abs() > s.residual_tol {
        return Err(Error::NonConvergedRoot {
            energy: e,
            residual,
        });
    }
    Ok((e, residual))
}

/// Energy grid strictly inside `(−Mc², Mc²)`.
pub fn scan_grid(mass: f64, settings: &SolverSettings) -> Vec<f64> {
    let mc2 = settings.units.rest_energy(mass);
    let lo = -mc2 * (1.0 - settings.edge_margin);
    let hi = mc2 * (1.0 - settings.edge_margin);
    let n = ((hi - lo) / settings.scan_step).ceil() as usize;
    (0..=n)
        .map(|i| lo + i as f64 * (hi - lo) / n as f64)
        .collect()
}

/// Scan for sign changes of both conditions, refine every bracket and count
/// nodes. States are returned in increasing energy.
pub fn scan_spectrum(
    params: &PotentialParams,
    mass: f64,
    settings: &SolverSettings,
) -> Result<Spectrum> {
    settings.validate()?;
    let ctx = BoundContext::new(*params, mass, *settings);
    let grid = scan_grid(mass, settings);
    let values: Vec<Option<(f64, f64)>> = grid
        .par_iter()
        .map(|&e| match conditions(e, &ctx) {
            Ok(v) => Ok(Some(v)),
            Err(err) if err.is_numerical_singularity() => Ok(None),
            Err(err) => Err(err),
        })
        .collect::<Result<_>>()?;

    let mut brackets = Vec::new();
    for i in 1..grid.len() {
        let (Some(a), Some(b)) = (values[i - 1], values[i]) else {
            continue;
        };
        if a.0.signum() != b.0.signum() {
            brackets.push((Parity::Even, grid[i - 1], grid[i]));
        }
        if a.1.signum() != b.1.signum() {
            brackets.push((Parity::Odd, grid[i - 1], grid[i]));
        }
    }
    if brackets.is_empty() {
        return Err(Error::NoBracket);
    }

    let mut states: Vec<BoundState> = brackets
        .par_iter()
        .map(|&(parity, lo, hi)| {
            let (energy, residual) = refine_root(parity, lo, hi, &ctx)?;
            let mut state = BoundState {
                energy,
                parity,
                nodes: 0,
                condition_residual: residual,
            };
            state.nodes = count_nodes(&sample_wavefunction(&state, &ctx, NODE_SAMPLES)?);
            Ok(state)
        })
        .collect::<Result<_>>()?;
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(Spectrum {
        states,
        params: *params,
        mass,
    })
}

const NODE_SAMPLES: usize = 4001;

/// Unnormalized complex wavefunction; `B₁ = 1` on the left, `D₁ = ±1` on
/// the right.
pub fn bound_wavefunction_complex(
    state: &BoundState,
    x: f64,
    ctx: &BoundContext,
) -> Result<Complex> {
    let s = &ctx.settings;
    let b = bound_coefficients_with(state.energy, ctx.mass, &ctx.params, &s.units, s.nu_branch)?;
    let ln_w = ln_neg_coordinate(ctx.params.right(), x);
    let v = basis(b.mu, b.nu, b.lambda, ln_w)?;
    Ok(if x > 0.0 { v * state.parity.sign() } else { v })
}

/// Real unnormalized wavefunction.
pub fn bound_wavefunction(state: &BoundState, x: f64, ctx: &BoundContext) -> Result<f64> {
    bound_wavefunction_complex(state, x, ctx).map(|v| v.re)
}

/// Default sampling window: the well plus `10/α` on each side.
pub fn default_window(params: &PotentialParams) -> (f64, f64) {
    let half = params.extent() + 10.0 / params.right().alpha;
    (-half, half)
}

/// Window wide enough for `φ` to decay by `e^{−20}` outside the well.
pub fn state_window(state: &BoundState, ctx: &BoundContext) -> Result<(f64, f64)> {
    let s = &ctx.settings;
    let b = bound_coefficients_with(state.energy, ctx.mass, &ctx.params, &s.units, s.nu_branch)?;
    let alpha = ctx.params.right().alpha;
    let half = ctx.params.extent() + (10.0 / alpha).max(20.0 / (b.kappa * alpha));
    Ok((-half, half))
}

/// `n` uniform samples of the wavefunction over [`default_window`].
pub fn sample_wavefunction(
    state: &BoundState,
    ctx: &BoundContext,
    n: usize,
) -> Result<Vec<(f64, f64)>> {
    let (a, b) = default_window(&ctx.params);
    (0..n)
        .map(|i| {
            let x = a + (b - a) * i as f64 / (n - 1) as f64;
            Ok((x, bound_wavefunction(state, x, ctx)?))
        })
        .collect()
}

/// Strict sign changes, ignoring samples below `1e-9·max|φ|`.
pub fn count_nodes(samples: &[(f64, f64)]) -> usize {
    let max = samples.iter().fold(0.0f64, |m, s| m.max(s.1.abs()));
    let floor = 1e-9 * max;
    let mut last = 0.0f64;
    let mut nodes = 0;
    for &(_, v) in samples {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && v.signum() != last {
            nodes += 1;
        }
        last = v.signum();
    }
    nodes
}

/// Scale samples to unit `∫φ² dx` (trapezoid rule).
pub fn normalize(samples: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let norm: f64 = samples
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 * w[0].1 + w[1].1 * w[1].1))
        .sum();
    if norm <= 0.0 {
        return samples.to_vec();
    }
    let k = norm.sqrt().recip();
    samples.iter().map(|&(x, v)| (x, v * k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn well() -> BoundContext {
        BoundContext::new(
            PotentialParams::reference_well(),
            2.0,
            SolverSettings::default(),
        )
    }

    #[test]
    fn coefficient_examples() {
        let p = PotentialParams::reference_well();
        let b = bound_coefficients(0.0, 2.0, &p, &UnitSystem::NATURAL).unwrap();
        assert!((b.kappa - 1.0).abs() < 1e-15);
        let b = bound_coefficients(-1.998, 2.0, &p, &UnitSystem::NATURAL).unwrap();
        assert!((b.kappa - 0.044_710_177_812_216_33).abs() < 1e-12);
        assert!((b.nu.re - 1.012_804_787_419_150_4).abs() < 1e-12);
        // λ² is real; λ itself is imaginary for this well
        assert!((b.lambda * b.lambda).im.abs() < 1e-12);
        assert!((b.lambda.im.abs() - 0.053_336_197_839_741_08).abs() < 1e-12);
        assert!(bound_coefficients(2.0, 2.0, &p, &UnitSystem::NATURAL).is_err());
        let near = bound_coefficients(1.999_999_999, 2.0, &p, &UnitSystem::NATURAL).unwrap();
        assert!(near.kappa < 1e-4);
    }

    #[test]
    fn known_roots() {
        let ctx = well();
        let cases = [
            (Parity::Even, -1.998_018_021_442_545, -1.9985, -1.9975),
            (Parity::Odd, -1.979_414_066_721_950, -1.9800, -1.9788),
            (Parity::Odd, -0.427_549_625_568_363_9, -0.4285, -0.4265),
            (Parity::Odd, 1.804_498_543_257_412, 1.8035, 1.8055),
            (Parity::Even, 1.942_701_490_987_229, 1.9420, 1.9435),
        ];
        for (parity, expected, lo, hi) in cases {
            let (e, r) = refine_root(parity, lo, hi, &ctx).unwrap();
            assert!((e - expected).abs() < 1e-9, "{parity:?} {e} vs {expected}");
            assert!(r.abs() < 1e-6);
        }
    }

    #[test]
    fn conditions_are_real_and_bounded() {
        let ctx = well();
        for e in [-1.99, -1.5, -0.3, 0.7, 1.95] {
            let (even, odd) = conditions(e, &ctx).unwrap();
            assert!(even.abs() <= 1.0 && odd.abs() <= 1.0);
        }
    }

    #[test]
    fn node_counting() {
        let flat: Vec<_> = (0..100).map(|i| (i as f64, 1.0 + i as f64)).collect();
        assert_eq!(count_nodes(&flat), 0);
        let sine: Vec<_> = (0..1000)
            .map(|i| {
                let x = 3.0 * std::f64::consts::PI * (i as f64 + 0.5) / 1000.0;
                (x, x.sin())
            })
            .collect();
        assert_eq!(count_nodes(&sine), 2);
        let noisy = vec![(0.0, 1.0), (1.0, -1e-12), (2.0, 1e-12), (3.0, 1.0)];
        assert_eq!(count_nodes(&noisy), 0);
    }

    #[test]
    fn normalization() {
        let s: Vec<_> = (0..=1000).map(|i| (i as f64 * 0.001, 2.0)).collect();
        let n = normalize(&s);
        let total: f64 = n
            .windows(2)
            .map(|w| 0.5 * 0.001 * (w[0].1.powi(2) + w[1].1.powi(2)))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ground_state_shape() {
        let ctx = well();
        let (e, r) = refine_root(Parity::Even, -1.9985, -1.9975, &ctx).unwrap();
        let state = BoundState {
            energy: e,
            parity: Parity::Even,
            nodes: 0,
            condition_residual: r,
        };
        let samples = sample_wavefunction(&state, &ctx, 2001).unwrap();
        assert_eq!(count_nodes(&samples), 0);
        let centre = bound_wavefunction(&state, 0.0, &ctx).unwrap();
        let max = samples.iter().fold(0.0f64, |m, s| m.max(s.1.abs()));
        assert!((centre.abs() - max).abs() <= 1e-6 * max);
        for &(x, _) in samples.iter().step_by(50) {
            let v = bound_wavefunction_complex(&state, x, &ctx).unwrap();
            assert!(v.im.abs() <= 1e-8 * max, "x = {x}");
        }
    }
}
