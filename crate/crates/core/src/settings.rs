//! Tolerances, scan grids and branch choices shared by the solvers.

use crate::error::{Error, Result};
use crate::potential::UnitSystem;

/// Sign in front of the square root in `ν = 1/2 ± √(1/4 + …)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NuBranch {
    #[default]
    Plus,
    Minus,
}

/// How the products `(−1)^w t₀^w` in the matching formulas are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchConvention {
    /// `(−t₀)^w` with `−t₀ > 0`; the basis is read as `(−z)^{±μ}`.
    #[default]
    NegatedBase,
    /// `(−1)^w` and `t₀^w` as separate principal powers. Breaks flux
    /// conservation; kept as a negative control.
    Principal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub units: UnitSystem,
    /// Energy grid spacing of the bound-state scan, GeV.
    pub scan_step: f64,
    /// Final Newton step size for eigenvalues, GeV.
    pub root_tol: f64,
    /// Bracket width at which bisection hands over to Newton, GeV.
    pub bisection_width: f64,
    /// Central-difference step for the Newton derivative, GeV.
    pub newton_h: f64,
    /// Band-edge margin as a fraction of `Mc²`.
    pub edge_margin: f64,
    pub series_tol: f64,
    pub conservation_tol: f64,
    /// Bound on the normalized quantization residual at an accepted root.
    pub residual_tol: f64,
    pub nu_branch: NuBranch,
    pub branch: BranchConvention,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            units: UnitSystem::NATURAL,
            scan_step: 0.005,
            root_tol: 1e-10,
            bisection_width: 1e-6,
            newton_h: 1e-7,
            edge_margin: 1e-6,
            series_tol: crate::numerics::SERIES_TOL,
            conservation_tol: 1e-8,
            residual_tol: 1e-6,
            nu_branch: NuBranch::Plus,
            branch: BranchConvention::NegatedBase,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("scan_step", self.scan_step),
            ("root_tol", self.root_tol),
            ("bisection_width", self.bisection_width),
            ("newton_h", self.newton_h),
            ("edge_margin", self.edge_margin),
            ("series_tol", self.series_tol),
            ("conservation_tol", self.conservation_tol),
            ("residual_tol", self.residual_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        UnitSystem::new(self.units.hbar, self.units.c)?;
        Ok(())
    }
}
