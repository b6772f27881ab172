//! Self-check suites behind `kgws verify`.

use std::f64::consts::PI;

use crate::bound::{scan_spectrum, Parity, Spectrum};
use crate::error::{Error, Result};
use crate::numerics::{
    c, hyp2f1, hyp2f1_derivative, hyp2f1_euler, hyp2f1_pfaff, hyp2f1_series, ln_gamma,
    principal_ln, real, Complex, Hyp2F1Params,
};
use crate::oracle::{oracle_spectrum, oracle_transmission};
use crate::potential::PotentialParams;
use crate::scattering::{transmission_reflection_perturbed, ScatteringResult};
use crate::settings::{NuBranch, SolverSettings};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            passed: ok,
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn rel(a: Complex, b: Complex) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Points of the additive golden-ratio sequence in `[0, 1)`: deterministic
/// and evenly spread.
pub fn golden_points(n: usize, seed: f64) -> Vec<f64> {
    let g = 0.618_033_988_749_894_9;
    (1..=n).map(|i| (seed + i as f64 * g).fract()).collect()
}

fn log1_closed(z: Complex) -> Complex {
    -principal_ln(1.0 - z) / z
}

/// Closed forms, symmetry, transformation consistency, derivative and gamma
/// reflection.
pub fn special_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let p = |a: Complex, b: Complex, cc: Complex, z: Complex| Hyp2F1Params::new(a, b, cc, z);

    let zs = [
        real(0.5),
        real(-0.5),
        real(-0.97),
        real(-3.0),
        c(0.3, 0.4),
        c(-2.0, 5.0),
        c(0.6, -0.6),
    ];
    let mut worst = 0.0f64;
    for z in zs {
        let v = hyp2f1(p(real(1.0), real(1.0), real(2.0), z))?;
        worst = worst.max(rel(v, log1_closed(z)));
    }
    out.push(Check::at_most("2F1(1,1;2;z) = -ln(1-z)/z", worst, 1e-10));

    let mut worst = 0.0f64;
    for z in [c(-40.0, 0.0), c(3.0, 7.0), c(-1.2, -0.4)] {
        // (1 − z)^{−a} = ₂F₁(a, b; b; z)
        let a = c(0.3, 0.2);
        let v = hyp2f1(p(a, real(1.7), real(1.7), z))?;
        worst = worst.max(rel(v, (-a * principal_ln(1.0 - z)).exp()));
    }
    out.push(Check::at_most("2F1(a,b;b;z) = (1-z)^-a", worst, 1e-10));
    let refused = matches!(
        hyp2f1(p(real(1.0), real(1.0), real(2.0), real(-50.0))),
        Err(Error::DegenerateParams(_))
    );
    out.push(Check::holds("integer b-a refused at |z| > 1.05", refused));

    let z0 = hyp2f1(p(c(3.0, 2.0), c(-1.5, 0.2), c(0.3, 7.0), real(0.0)))?;
    out.push(Check::at_most("2F1(a,b;c;0) = 1", (z0 - 1.0).norm(), 0.0));
    let a0 = hyp2f1_series(p(real(0.0), real(4.3), real(1.7), real(0.9)))?;
    out.push(Check::at_most("2F1(0,b;c;z) = 1", (a0 - 1.0).norm(), 0.0));

    let mut sym = 0.0f64;
    let mut euler = 0.0f64;
    let mut pfaff = 0.0f64;
    let mut deriv = 0.0f64;
    let pts = golden_points(60, 0.1);
    for (i, t) in pts.iter().enumerate() {
        let a = c(0.2 + 2.0 * t, 0.7 * (i as f64 * 0.37).sin());
        let b = c(1.3 - t, 0.5 * t);
        let cc = c(2.1 + t, -0.3);
        let angle = 2.0 * PI * pts[(i * 7) % pts.len()];
        let radius = [0.3, 0.6, 0.9, 2.5, 20.0][i % 5];
        let z = Complex::from_polar(radius, angle);
        if (z.im.abs() < 1e-3 && z.re >= 1.0) || (z - 1.0).norm() < 0.1 {
            continue;
        }
        let f = hyp2f1(p(a, b, cc, z))?;
        sym = sym.max(rel(hyp2f1(p(b, a, cc, z))?, f));
        if (0.5..0.95).contains(&radius) {
            euler = euler.max(rel(
                hyp2f1_euler(p(a, b, cc, z))?,
                hyp2f1_series(p(a, b, cc, z))?,
            ));
        }
        let w = z / (z - 1.0);
        if w.norm() < 0.95 && radius < 0.95 {
            pfaff = pfaff.max(rel(
                hyp2f1_pfaff(p(a, b, cc, z))?,
                hyp2f1_series(p(a, b, cc, z))?,
            ));
        }
        let h = 1e-6 * z.norm().max(1.0);
        let fd = (hyp2f1(p(a, b, cc, z + h))? - hyp2f1(p(a, b, cc, z - h))?) / (2.0 * h);
        deriv = deriv.max(rel(hyp2f1_derivative(p(a, b, cc, z))?, fd));
    }
    out.push(Check::at_most("symmetry a <-> b", sym, 1e-13));
    out.push(Check::at_most("Euler transform vs series", euler, 1e-11));
    out.push(Check::at_most("Pfaff transform vs series", pfaff, 1e-11));
    out.push(Check::at_most(
        "derivative vs central difference",
        deriv,
        1e-5,
    ));

    let mut refl = 0.0f64;
    for (i, t) in golden_points(50, 0.3).iter().enumerate() {
        let z = c(-6.0 + 12.0 * t, 3.0 * (i as f64 * 1.3).cos());
        if z.im.abs() < 0.05 && (z.re - z.re.round()).abs() < 0.05 {
            continue;
        }
        let lhs = (ln_gamma(z)? + ln_gamma(1.0 - z)?).exp();
        let rhs = PI / (z * PI).sin();
        refl = refl.max(rel(lhs, rhs));
    }
    out.push(Check::at_most("gamma reflection", refl, 1e-11));
    Ok(out)
}

/// `N` evenly spaced energies in `(Mc², 30·Mc²]`.
pub fn energy_sweep(mass: f64, settings: &SolverSettings, n: usize) -> Vec<f64> {
    let mc2 = settings.units.rest_energy(mass);
    let lo = mc2 + 1e-3;
    let hi = 30.0 * mc2;
    (1..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

/// `|T_a − T_o|/T_o` where `T_o > 1e-6`, otherwise `|T_a − T_o|`.
pub fn oracle_deviation(analytic: &ScatteringResult, oracle: &ScatteringResult) -> f64 {
    let d = (analytic.t - oracle.t).abs();
    if oracle.t > 1e-6 {
        d / oracle.t
    } else {
        d
    }
}

/// Conservation over a 500-point sweep, oracle agreement at 20 energies and
/// ν-branch invariance at 50 energies.
pub fn scatter_suite(
    params: &PotentialParams,
    mass: f64,
    settings: &SolverSettings,
) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let sweep = energy_sweep(mass, settings, 500);
    let mut worst = 0.0f64;
    for &e in &sweep {
        let (r, _) = transmission_reflection_perturbed(e, mass, params, settings)?;
        worst = worst.max((r.t + r.r - 1.0).abs());
    }
    out.push(Check::at_most(
        "max |T+R-1| over 500 energies",
        worst,
        settings.conservation_tol,
    ));

    let mut dev = 0.0f64;
    for &e in energy_sweep(mass, settings, 20).iter() {
        let (a, _) = transmission_reflection_perturbed(e, mass, params, settings)?;
        let o = oracle_transmission(e, mass, params, &settings.units)?;
        dev = dev.max(oracle_deviation(&a, &o));
    }
    out.push(Check::at_most(
        "analytic vs ODE T at 20 energies",
        dev,
        1e-4,
    ));

    let minus = SolverSettings {
        nu_branch: NuBranch::Minus,
        ..*settings
    };
    let (lo, hi) = (sweep[0], sweep[sweep.len() - 1]);
    let mut branch = 0.0f64;
    for t in golden_points(50, 0.5) {
        let e = lo + (hi - lo) * t;
        let (a, _) = transmission_reflection_perturbed(e, mass, params, settings)?;
        let (b, _) = transmission_reflection_perturbed(e, mass, params, &minus)?;
        branch = branch.max((a.t - b.t).abs()).max((a.r - b.r).abs());
    }
    out.push(Check::at_most(
        "nu branch swap, 50 energies",
        branch,
        settings.conservation_tol,
    ));
    Ok(out)
}

/// Structure of a spectrum: node count equals index, parity alternates from
/// even, energies increase strictly inside `(−Mc², Mc²)`.
pub fn spectrum_structure(s: &Spectrum, mc2: f64) -> bool {
    s.states.iter().enumerate().all(|(n, st)| {
        let parity = if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        };
        st.nodes == n && st.parity == parity && st.energy.abs() < mc2
    }) && s.states.windows(2).all(|w| w[0].energy < w[1].energy)
}

/// Analytic spectrum against the shooting oracle.
pub fn bound_suite(
    params: &PotentialParams,
    mass: f64,
    settings: &SolverSettings,
) -> Result<Vec<Check>> {
    let mc2 = settings.units.rest_energy(mass);
    let empty = |r: Result<Spectrum>| match r {
        Err(Error::NoBracket) => Ok(Spectrum {
            states: Vec::new(),
            params: *params,
            mass,
        }),
        other => other,
    };
    let a = empty(scan_spectrum(params, mass, settings))?;
    let o = empty(oracle_spectrum(params, mass, settings))?;
    let mut out = vec![
        Check::holds(
            format!(
                "state count {} (analytic) = {} (oracle)",
                a.states.len(),
                o.states.len()
            ),
            a.states.len() == o.states.len(),
        ),
        Check::holds(
            "analytic nodes, parity and ordering",
            spectrum_structure(&a, mc2),
        ),
        Check::holds(
            "oracle nodes, parity and ordering",
            spectrum_structure(&o, mc2),
        ),
    ];
    let dev = a
        .states
        .iter()
        .zip(&o.states)
        .map(|(x, y)| (x.energy - y.energy).abs())
        .fold(0.0f64, f64::max);
    out.push(Check::at_most(
        "max |E_analytic - E_oracle| (GeV)",
        dev,
        1e-5,
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_suite_passes() {
        let checks = special_suite().unwrap();
        for c in &checks {
            eprintln!("{} {:e} {:e}", c.name, c.value, c.tolerance);
        }
        assert!(all_passed(&checks));
    }

    #[test]
    fn golden_points_in_unit_interval() {
        let pts = golden_points(100, 0.25);
        assert!(pts.iter().all(|t| (0.0..1.0).contains(t)));
    }
}
