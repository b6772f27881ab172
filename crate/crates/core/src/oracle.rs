//! Direct integration of `φ'' + Q(x) φ = 0` with
//! `Q = [(E² − M²c⁴) − 2(E + Mc²)V(x)]/(ħc)²`.
//!
//! This path uses only the potential and plain arithmetic, so it can check
//! the closed-form results independently.

use std::ops::{Add, Mul};

use rayon::prelude::*;

use crate::bound::{count_nodes, BoundState, Parity, Spectrum};
use crate::error::{Error, Result};
use crate::numerics::Complex;
use crate::potential::{PotentialParams, UnitSystem};
use crate::scattering::ScatteringResult;
use crate::settings::SolverSettings;

/// Fraction of the resolution bound used as the default step.
pub const STEP_FACTOR: f64 = 0.2;
/// Asymptotic cutoff, in units of the diffuseness `1/α`, beyond the edge `L`.
pub const CUTOFF: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub grid: Vec<f64>,
    pub phi: Vec<Complex>,
    pub dphi: Vec<Complex>,
    pub energy: f64,
    pub params: PotentialParams,
}

/// Fixed-step classical RK4 for `y'' = −q(x) y` from `x0` to `x1` in `n`
/// steps (either direction). `visit` sees every point, starting with `x0`.
pub fn rk4_linear<T, Q, F>(q: Q, x0: f64, x1: f64, n: usize, y: T, dy: T, mut visit: F) -> (T, T)
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    Q: Fn(f64) -> f64,
    F: FnMut(f64, T, T),
{
    let h = (x1 - x0) / n as f64;
    let (mut y, mut dy) = (y, dy);
    visit(x0, y, dy);
    let mut q0 = q(x0);
    for i in 0..n {
        let x = x0 + i as f64 * h;
        let qm = q(x + 0.5 * h);
        let q1 = q(x + h);
        let k1y = dy;
        let k1d = y * -q0;
        let y2 = y + k1y * (0.5 * h);
        let k2y = dy + k1d * (0.5 * h);
        let k2d = y2 * -qm;
        let y3 = y + k2y * (0.5 * h);
        let k3y = dy + k2d * (0.5 * h);
        let k3d = y3 * -qm;
        let y4 = y + k3y * h;
        let k4y = dy + k3d * h;
        let k4d = y4 * -q1;
        y = y + (k1y + k2y * 2.0 + k3y * 2.0 + k4y) * (h / 6.0);
        dy = dy + (k1d + k2d * 2.0 + k3d * 2.0 + k4d) * (h / 6.0);
        q0 = q1;
        visit(x0 + (i + 1) as f64 * h, y, dy);
    }
    (y, dy)
}

fn local_q<'a>(
    energy: f64,
    mass: f64,
    params: &'a PotentialParams,
    units: &UnitSystem,
) -> impl Fn(f64) -> f64 + 'a {
    let mc2 = units.rest_energy(mass);
    let hc2 = units.hbar_c().powi(2);
    let free = energy * energy - mc2 * mc2;
    let coupling = 2.0 * (energy + mc2);
    move |x| (free - coupling * params.evaluate(x)) / hc2
}

/// Largest step allowed on `[a, b]`: `min(0.01/α, 0.05/k_max)`, with `k_max`
/// the largest local `√|Q|` on a dense sample.
pub fn step_bound(
    energy: f64,
    mass: f64,
    params: &PotentialParams,
    units: &UnitSystem,
    a: f64,
    b: f64,
) -> f64 {
    let q = local_q(energy, mass, params, units);
    let n = 4000;
    let k_max = (0..=n)
        .map(|i| q(a + (b - a) * i as f64 / n as f64).abs().sqrt())
        .fold(0.0f64, f64::max);
    let by_edge = 0.01 / params.alpha_max();
    if k_max > 0.0 {
        by_edge.min(0.05 / k_max)
    } else {
        by_edge
    }
}

fn steps_for(a: f64, b: f64, step: f64) -> usize {
    ((b - a).abs() / step).ceil().max(1.0) as usize
}

/// Integrate from `x_start` to `x_end` (either direction) and record every
/// point, ordered by increasing `x`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_kg(
    energy: f64,
    mass: f64,
    params: &PotentialParams,
    units: &UnitSystem,
    x_start: f64,
    x_end: f64,
    step: f64,
    initial: (Complex, Complex),
) -> Result<OdeSolution> {
    let bound = step_bound(
        energy,
        mass,
        params,
        units,
        x_start.min(x_end),
        x_start.max(x_end),
    );
    if !(step > 0.0 && step <= bound) {
        return Err(Error::StepSize { step, bound });
    }
    let n = steps_for(x_start, x_end, step);
    let mut grid = Vec::with_capacity(n + 1);
    let mut phi = Vec::with_capacity(n + 1);
    let mut dphi = Vec::with_capacity(n + 1);
    rk4_linear(
        local_q(energy, mass, params, units),
        x_start,
        x_end,
        n,
        initial.0,
        initial.1,
        |x, y, dy| {
            grid.push(x);
            phi.push(y);
            dphi.push(dy);
        },
    );
    if x_end < x_start {
        grid.reverse();
        phi.reverse();
        dphi.reverse();
    }
    Ok(OdeSolution {
        grid,
        phi,
        dphi,
        energy,
        params: *params,
    })
}

/// Half-width of the integration domain.
pub fn cutoff(params: &PotentialParams) -> f64 {
    params.extent() + CUTOFF / params.left().alpha.min(params.right().alpha)
}

/// `T` and `R` by integrating a pure outgoing wave backwards from the right
/// and decomposing the result on the left.
pub fn oracle_transmission(
    energy: f64,
    mass: f64,
    params: &PotentialParams,
    units: &UnitSystem,
) -> Result<ScatteringResult> {
    let x = cutoff(params);
    let step = STEP_FACTOR * step_bound(energy, mass, params, units, -x, x);
    oracle_transmission_step(energy, mass, params, units, step)
}

pub fn oracle_transmission_step(
    energy: f64,
    mass: f64,
    params: &PotentialParams,
    units: &UnitSystem,
    step: f64,
) -> Result<ScatteringResult> {
    let mc2 = units.rest_energy(mass);
    if !(energy > mc2) {
        return Err(Error::Domain(format!(
            "continuum requires E > Mc^2 = {mc2}"
        )));
    }
    let k = (energy * energy - mc2 * mc2).sqrt() / units.hbar_c();
    let x = cutoff(params);
    let ik = Complex::new(0.0, k);
    let start = (ik * x).exp();
    let (phi, dphi) = rk4_linear(
        local_q(energy, mass, params, units),
        x,
        -x,
        steps_for(x, -x, step),
        start,
        ik * start,
        |_, _, _| {},
    );
    // φ = a e^{ikx} + b e^{−ikx} at x = −X
    let a = 0.5 * (phi + dphi / ik) * (ik * x).exp();
    let b = 0.5 * (phi - dphi / ik) * (-ik * x).exp();
    Ok(ScatteringResult {
        energy,
        t: 1.0 / a.norm_sqr(),
        r: (b / a).norm_sqr(),
        d1_over_a1: 1.0 / a,
        b1_over_a1: b / a,
    })
}

/// Decaying solutions integrated inwards to `x = 0` from both sides.
#[derive(Debug, Clone, Copy)]
struct Shot {
    left: (f64, f64),
    right: (f64, f64),
    scale: f64,
}

impl Shot {
    /// Wronskian at the origin divided by the amplitudes of both sides; a
    /// sine of the angle between them.
    fn wronskian(&self) -> f64 {
        let (l, dl) = self.left;
        let (r, dr) = self.right;
        let s = self.scale;
        (l * dr - dl * r) / (s * l.hypot(dl / s) * r.hypot(dr / s))
    }

    fn parity(&self) -> Parity {
        let (r, dr) = self.right;
        if r.abs() >= (dr / self.scale).abs() {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

struct Shooter<'a> {
    params: &'a PotentialParams,
    mass: f64,
    units: UnitSystem,
    x: f64,
    step: f64,
}

impl<'a> Shooter<'a> {
    fn new(params: &'a PotentialParams, mass: f64, units: UnitSystem) -> Self {
        let x = cutoff(params);
        let mc2 = units.rest_energy(mass);
        let step = STEP_FACTOR
            * [-mc2, 0.0, mc2]
                .into_iter()
                .map(|e| step_bound(e, mass, params, &units, -x, x))
                .fold(f64::INFINITY, f64::min);
        Self {
            params,
            mass,
            units,
            x,
            step,
        }
    }

    fn kappa(&self, energy: f64) -> f64 {
        let mc2 = self.units.rest_energy(self.mass);
        (mc2 * mc2 - energy * energy).max(0.0).sqrt() / self.units.hbar_c()
    }

    fn side<F: FnMut(f64, f64, f64)>(&self, energy: f64, from: f64, visit: F) -> (f64, f64) {
        let kappa = self.kappa(energy);
        let q = local_q(energy, self.mass, self.params, &self.units);
        let slope = if from < 0.0 { kappa } else { -kappa };
        rk4_renormalized(q, from, 0.0, steps_for(from, 0.0, self.step), slope, visit)
    }

    fn shoot(&self, energy: f64) -> Shot {
        Shot {
            left: self.side(energy, -self.x, |_, _, _| {}),
            right: self.side(energy, self.x, |_, _, _| {}),
            scale: self.params.alpha_max(),
        }
    }

    /// Left and right solutions joined at the origin, ordered in `x`.
    fn assemble(&self, energy: f64) -> Vec<(f64, f64)> {
        let mut left = Vec::new();
        let mut right = Vec::new();
        let l0 = self.side(energy, -self.x, |x, y, _| left.push((x, y)));
        let r0 = self.side(energy, self.x, |x, y, _| right.push((x, y)));
        // scale the right half to meet the left one at the origin, using
        // whichever of φ and φ' is larger
        let k = if l0.0.abs() * self.params.alpha_max() >= l0.1.abs() {
            l0.0 / r0.0
        } else {
            l0.1 / r0.1
        };
        right.reverse();
        left.extend(right.into_iter().skip(1).map(|(x, y)| (x, y * k)));
        left
    }
}

/// RK4 for a real solution starting at `(1, slope)`, rescaled whenever it
/// grows large. `visit` receives the rescaled values, which differ from the
/// true ones by a piecewise-constant positive factor fixed up at the end.
fn rk4_renormalized<Q, F>(q: Q, x0: f64, x1: f64, n: usize, slope: f64, mut visit: F) -> (f64, f64)
where
    Q: Fn(f64) -> f64,
    F: FnMut(f64, f64, f64),
{
    const CHUNK: usize = 256;
    let h = (x1 - x0) / n as f64;
    let (mut y, mut dy) = (1.0, slope);
    let mut done = 0;
    let mut samples: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut factor = 1.0f64;
    while done < n {
        let m = CHUNK.min(n - done);
        let a = x0 + done as f64 * h;
        let b = x0 + (done + m) as f64 * h;
        let skip = usize::from(done > 0);
        let mut i = 0;
        let r = rk4_linear(&q, a, b, m, y, dy, |x, v, dv| {
            if i >= skip {
                samples.push((x, v, dv, factor));
            }
            i += 1;
        });
        y = r.0;
        dy = r.1;
        let size = y.abs().max(dy.abs());
        if size > 1e100 {
            y /= size;
            dy /= size;
            factor *= size;
        }
        done += m;
    }
    // express every sample in the units of the final segment
    for (x, v, dv, f) in samples {
        let k = f / factor;
        visit(x, v * k, dv * k);
    }
    (y, dy)
}

/// Eigenvalues from sign changes of the normalized Wronskian on the same
/// grid as the analytic scan, refined by bisection.
pub fn oracle_spectrum(
    params: &PotentialParams,
    mass: f64,
    settings: &SolverSettings,
) -> Result<Spectrum> {
    settings.validate()?;
    let shooter = Shooter::new(params, mass, settings.units);
    let mc2 = settings.units.rest_energy(mass);
    let lo = -mc2 * (1.0 - settings.edge_margin);
    let hi = mc2 * (1.0 - settings.edge_margin);
    let n = ((hi - lo) / settings.scan_step).ceil() as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|i| lo + i as f64 * (hi - lo) / n as f64)
        .collect();
    let w: Vec<f64> = grid
        .par_iter()
        .map(|&e| shooter.shoot(e).wronskian())
        .collect();
    let brackets: Vec<(f64, f64, f64)> = (1..grid.len())
        .filter(|&i| w[i - 1].signum() != w[i].signum())
        .map(|i| (grid[i - 1], grid[i], w[i - 1]))
        .collect();
    if brackets.is_empty() {
        return Err(Error::NoBracket);
    }
    let mut states: Vec<BoundState> = brackets
        .par_iter()
        .map(|&(mut a, mut b, mut fa)| {
            while b - a > settings.root_tol {
                let mid = 0.5 * (a + b);
                let fm = shooter.shoot(mid).wronskian();
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                } else if fm.signum() == fa.signum() {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            let e = 0.5 * (a + b);
            let shot = shooter.shoot(e);
            BoundState {
                energy: e,
                parity: shot.parity(),
                nodes: count_nodes(&shooter.assemble(e)),
                condition_residual: shot.wronskian(),
            }
        })
        .collect();
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(Spectrum {
        states,
        params: *params,
        mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::SideParams;

    fn free() -> PotentialParams {
        let mut s = SideParams::REFERENCE;
        for n in ["V1", "V2", "A", "B", "C", "D"] {
            s.set(n, 0.0).unwrap();
        }
        PotentialParams::symmetric(s).unwrap()
    }

    #[test]
    fn free_plane_wave() {
        let k = 3.0;
        let wavelength = 2.0 * std::f64::consts::PI / k;
        let x1 = 100.0 * wavelength;
        let n = (x1 / (STEP_FACTOR * 0.05 / k)).ceil() as usize;
        let i = Complex::new(0.0, 1.0);
        let mut worst = 0.0f64;
        rk4_linear(
            |_| k * k,
            0.0,
            x1,
            n,
            Complex::new(1.0, 0.0),
            i * k,
            |x, y, _| {
                worst = worst.max((y - (i * k * x).exp()).norm());
            },
        );
        assert!(worst < 1e-7, "{worst}");
    }

    #[test]
    fn constant_barrier_growth_rate() {
        let kappa: f64 = 1.7;
        let (y, _) = rk4_linear(|_| -kappa * kappa, 0.0, 5.0, 5000, 1.0, kappa, |_, _, _| {});
        assert!((y.ln() / 5.0 - kappa).abs() < 1e-10);
    }

    #[test]
    fn free_transmission_is_one() {
        let r = oracle_transmission(5.0, 2.0, &free(), &UnitSystem::NATURAL).unwrap();
        assert!((r.t - 1.0).abs() < 1e-7);
        assert!(r.r < 1e-7);
    }

    #[test]
    fn step_bound_enforced() {
        let p = PotentialParams::reference_barrier();
        let e = integrate_kg(
            34.75,
            2.0,
            &p,
            &UnitSystem::NATURAL,
            -1.0,
            1.0,
            0.1,
            (1.0.into(), 0.0.into()),
        );
        assert!(matches!(e, Err(Error::StepSize { .. })));
    }

    #[test]
    fn wronskian_is_constant() {
        let p = PotentialParams::reference_barrier();
        let u = UnitSystem::NATURAL;
        let x = cutoff(&p);
        // above the barrier top, so neither solution grows exponentially
        let step = 0.5 * step_bound(40.0, 2.0, &p, &u, -x, x);
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        let a = integrate_kg(40.0, 2.0, &p, &u, -x, x, step, (one, zero)).unwrap();
        let b = integrate_kg(40.0, 2.0, &p, &u, -x, x, step, (zero, one)).unwrap();
        let w0 = a.phi[0] * b.dphi[0] - a.dphi[0] * b.phi[0];
        for i in (0..a.grid.len()).step_by(997) {
            let w = a.phi[i] * b.dphi[i] - a.dphi[i] * b.phi[i];
            assert!((w - w0).norm() < 1e-7 * w0.norm());
        }
    }

    #[test]
    fn recorded_grid_is_increasing() {
        let p = PotentialParams::reference_barrier();
        let u = UnitSystem::NATURAL;
        let step = step_bound(10.0, 2.0, &p, &u, -2.0, 2.0);
        let s = integrate_kg(10.0, 2.0, &p, &u, 2.0, -2.0, step, (1.0.into(), 0.0.into())).unwrap();
        assert!(s.grid.windows(2).all(|w| w[0] < w[1]));
        assert!(s.phi.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
    }

    #[test]
    fn barrier_conserves_flux() {
        let p = PotentialParams::reference_barrier();
        for e in [10.0, 34.75, 45.0] {
            let r = oracle_transmission(e, 2.0, &p, &UnitSystem::NATURAL).unwrap();
            assert!((r.t + r.r - 1.0).abs() < 1e-6, "E = {e}");
        }
    }
}
