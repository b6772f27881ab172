//! The q-deformed Woods-Saxon potential and its parameter file format.

use std::fmt;

use crate::error::{Error, Result};

/// Free parameters of one half of the potential.
///
/// Energies are in GeV, `C` and `D` in √GeV, `alpha` in 1/length and `l` in
/// length (natural units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideParams {
    pub v1: f64,
    pub v2: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub q: f64,
    pub p: f64,
    pub xi: f64,
    pub eta: f64,
    pub alpha: f64,
    pub l: f64,
}

/// Names accepted by [`SideParams::get`] and [`SideParams::set`], in file order.
pub const PARAM_NAMES: [&str; 12] = [
    "alpha", "L", "V1", "V2", "A", "B", "C", "D", "q", "p", "xi", "eta",
];

impl SideParams {
    /// Reference half-parameters: together they form a symmetric barrier.
    pub const REFERENCE: SideParams = SideParams {
        v1: 1.0,
        v2: 0.2,
        a: 0.1,
        b: 1.0,
        c: 0.1,
        d: 10.0,
        q: 0.8,
        p: 8.0,
        xi: 5.0,
        eta: 10.0,
        alpha: 2.0,
        l: 4.0,
    };

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "alpha" => self.alpha,
            "L" => self.l,
            "V1" => self.v1,
            "V2" => self.v2,
            "A" => self.a,
            "B" => self.b,
            "C" => self.c,
            "D" => self.d,
            "q" => self.q,
            "p" => self.p,
            "xi" => self.xi,
            "eta" => self.eta,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "alpha" => &mut self.alpha,
            "L" => &mut self.l,
            "V1" => &mut self.v1,
            "V2" => &mut self.v2,
            "A" => &mut self.a,
            "B" => &mut self.b,
            "C" => &mut self.c,
            "D" => &mut self.d,
            "q" => &mut self.q,
            "p" => &mut self.p,
            "xi" => &mut self.xi,
            "eta" => &mut self.eta,
            _ => return Err(Error::InvalidParams(format!("unknown parameter `{name}`"))),
        };
        *slot = value;
        Ok(())
    }

    fn validate(&self, side: &str) -> Result<()> {
        for name in PARAM_NAMES {
            let v = self.get(name).unwrap_or(f64::NAN);
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{side} {name} is not finite")));
            }
        }
        if self.q == 0.0 {
            return Err(Error::DivisionByZero("q = 0"));
        }
        if self.p == 0.0 {
            return Err(Error::DivisionByZero("p = 0"));
        }
        if self.alpha <= 0.0 {
            return Err(Error::InvalidParams(format!("{side} alpha must be > 0")));
        }
        if self.l < 0.0 {
            return Err(Error::InvalidParams(format!("{side} L must be >= 0")));
        }
        Ok(())
    }

    /// `V₀ = (V₁ − ξA)/q − (V₂ + ηC²)/q²`, the offset that makes the far tail vanish.
    pub fn v0(&self) -> Result<f64> {
        if self.q == 0.0 {
            return Err(Error::DivisionByZero("q = 0"));
        }
        let q = self.q;
        Ok((self.v1 - self.xi * self.a) / q - (self.v2 + self.eta * self.c * self.c) / (q * q))
    }

    /// Height of the flat region far inside the barrier (the `e → ∞` limit).
    pub fn plateau(&self, v0: f64) -> f64 {
        v0 + self.xi * self.b / self.p + self.eta * self.d * self.d / (self.p * self.p)
    }

    /// Value of one bracket of the potential for `e = exp(arg)`.
    ///
    /// For positive `arg` everything is rewritten in `u = e^{−arg}` so that
    /// no overflow can occur.
    fn bracket(&self, v0: f64, arg: f64) -> f64 {
        let (inv_den, ab, cd) = if arg > 0.0 {
            let u = (-arg).exp();
            let den = self.q * u + self.p;
            (
                u / den,
                (self.a * u + self.b) / den,
                (self.c * u + self.d) / den,
            )
        } else {
            let e = arg.exp();
            let den = self.q + self.p * e;
            (
                1.0 / den,
                (self.a + self.b * e) / den,
                (self.c + self.d * e) / den,
            )
        };
        v0 - self.v1 * inv_den + self.v2 * inv_den * inv_den + self.xi * ab + self.eta * cd * cd
    }
}

/// `(Ṽ₀, V₀)` for the left and right halves.
pub fn derive_v0(left: &SideParams, right: &SideParams) -> Result<(f64, f64)> {
    Ok((left.v0()?, right.v0()?))
}

/// Full 26-parameter potential. The two `V₀` values are derived on
/// construction and cannot be set independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialParams {
    left: SideParams,
    right: SideParams,
    left_v0: f64,
    right_v0: f64,
}

impl PotentialParams {
    pub fn new(left: SideParams, right: SideParams) -> Result<Self> {
        left.validate("tilde")?;
        right.validate("right")?;
        let (left_v0, right_v0) = derive_v0(&left, &right)?;
        Ok(Self {
            left,
            right,
            left_v0,
            right_v0,
        })
    }

    pub fn symmetric(half: SideParams) -> Result<Self> {
        Self::new(half, half)
    }

    /// The reference barrier.
    pub fn reference_barrier() -> Self {
        Self::symmetric(SideParams::REFERENCE).expect("reference parameters are valid")
    }

    /// The reference barrier with `A = 3.5 GeV`, which turns it into a well.
    pub fn reference_well() -> Self {
        Self::reference_barrier()
            .with_param("A", 3.5)
            .expect("valid well")
    }

    pub fn left(&self) -> &SideParams {
        &self.left
    }

    pub fn right(&self) -> &SideParams {
        &self.right
    }

    pub fn left_v0(&self) -> f64 {
        self.left_v0
    }

    pub fn v0(&self) -> f64 {
        self.right_v0
    }

    pub fn is_symmetric(&self) -> bool {
        self.left == self.right
    }

    /// Copy with one free parameter changed on both sides; `V₀` is re-derived.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut left = self.left;
        let mut right = self.right;
        left.set(name, value)?;
        right.set(name, value)?;
        Self::new(left, right)
    }

    /// Tilde and plain halves exchanged, i.e. the mirror image `V(−x)`.
    pub fn mirrored(&self) -> Self {
        Self {
            left: self.right,
            right: self.left,
            left_v0: self.right_v0,
            right_v0: self.left_v0,
        }
    }

    /// `V(x)`; at `x = 0` the two halves are averaged.
    pub fn evaluate(&self, x: f64) -> f64 {
        let left = || {
            self.left
                .bracket(self.left_v0, self.left.alpha * (x + self.left.l))
        };
        let right = || {
            self.right
                .bracket(self.right_v0, -self.right.alpha * (x - self.right.l))
        };
        if x < 0.0 {
            left()
        } else if x > 0.0 {
            right()
        } else {
            0.5 * (left() + right())
        }
    }

    /// Largest `α` of the two halves; sets the finest spatial scale.
    pub fn alpha_max(&self) -> f64 {
        self.left.alpha.max(self.right.alpha)
    }

    pub fn extent(&self) -> f64 {
        self.left.l.max(self.right.l)
    }

    /// Lowest value of the potential among the tails and the two plateaus.
    pub fn depth_hint(&self) -> f64 {
        let vs = [
            0.0,
            self.left.plateau(self.left_v0),
            self.right.plateau(self.right_v0),
            self.evaluate(0.0),
        ];
        vs.into_iter().fold(f64::INFINITY, f64::min)
    }
}

impl Default for PotentialParams {
    fn default() -> Self {
        Self::reference_barrier()
    }
}

/// `ħ` and `c`; energies are in GeV and the default is natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hbar: f64,
    pub c: f64,
}

impl UnitSystem {
    pub const NATURAL: UnitSystem = UnitSystem { hbar: 1.0, c: 1.0 };

    pub fn new(hbar: f64, c: f64) -> Result<Self> {
        if !(hbar > 0.0 && c > 0.0) {
            return Err(Error::InvalidParams("hbar and c must be positive".into()));
        }
        Ok(Self { hbar, c })
    }

    pub fn hbar_c(&self) -> f64 {
        self.hbar * self.c
    }

    /// Rest energy `Mc²`.
    pub fn rest_energy(&self, mass: f64) -> f64 {
        mass * self.c * self.c
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::NATURAL
    }
}

/// Contents of a parameter file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamFile {
    pub params: PotentialParams,
    pub mass: Option<f64>,
}

impl fmt::Display for SideParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for name in PARAM_NAMES {
            writeln!(f, "{name} = {}", self.get(name).unwrap_or(f64::NAN))?;
        }
        Ok(())
    }
}

/// Parse `key = value` lines. All twelve symmetric keys are required;
/// `tilde_<key>` lines override the left half and `mass` is optional.
/// `#` starts a comment.
pub fn parse_param_file(text: &str) -> Result<ParamFile> {
    let mut right: [Option<f64>; 12] = [None; 12];
    let mut tilde: [Option<f64>; 12] = [None; 12];
    let mut mass = None;
    let index = |key: &str| PARAM_NAMES.iter().position(|n| *n == key);
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Config {
            line: line_no,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| err(format!("`{}` is not a number", value.trim())))?;
        let slot = if key == "mass" {
            &mut mass
        } else if let Some(j) = index(key) {
            &mut right[j]
        } else if let Some(j) = key.strip_prefix("tilde_").and_then(index) {
            &mut tilde[j]
        } else {
            return Err(err(format!("unknown key `{key}`")));
        };
        if slot.is_some() {
            return Err(err(format!("duplicate key `{key}`")));
        }
        *slot = Some(value);
    }
    let mut half = SideParams::REFERENCE;
    for (j, name) in PARAM_NAMES.iter().enumerate() {
        let v = right[j].ok_or_else(|| Error::Config {
            line: 0,
            message: format!("missing key `{name}`"),
        })?;
        half.set(name, v)?;
    }
    let mut left = half;
    for (j, name) in PARAM_NAMES.iter().enumerate() {
        if let Some(v) = tilde[j] {
            left.set(name, v)?;
        }
    }
    if let Some(m) = mass {
        if !(m > 0.0) {
            return Err(Error::Config {
                line: 0,
                message: "mass must be positive".into(),
            });
        }
    }
    let params = PotentialParams::new(left, half).map_err(|e| Error::Config {
        line: 0,
        message: e.to_string(),
    })?;
    Ok(ParamFile { params, mass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_v0() {
        let p = PotentialParams::reference_barrier();
        assert_eq!(p.v0(), 0.15625);
        assert_eq!(p.left_v0(), 0.15625);
    }

    #[test]
    fn v0_trivial_cases() {
        let mut s = SideParams::REFERENCE;
        for n in ["V1", "V2", "A", "B", "C", "D", "xi", "eta"] {
            s.set(n, 0.0).unwrap();
        }
        assert_eq!(s.v0().unwrap(), 0.0);
        s.v1 = 1.0;
        s.q = 2.0;
        assert_eq!(s.v0().unwrap(), 0.5);
        s.q = 0.0;
        assert!(matches!(s.v0(), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut s = SideParams::REFERENCE;
        s.p = 0.0;
        assert!(PotentialParams::symmetric(s).is_err());
        let mut s = SideParams::REFERENCE;
        s.alpha = -1.0;
        assert!(PotentialParams::symmetric(s).is_err());
        let mut s = SideParams::REFERENCE;
        s.l = -0.1;
        assert!(PotentialParams::symmetric(s).is_err());
    }

    #[test]
    fn tails_vanish() {
        for p in [
            PotentialParams::reference_barrier(),
            PotentialParams::reference_well(),
        ] {
            let x = p.extent() + 40.0 / p.alpha_max();
            assert!(p.evaluate(x).abs() < 1e-10);
            assert!(p.evaluate(-x).abs() < 1e-10);
            assert_eq!(p.evaluate(1e6), p.evaluate(1e6));
            assert!(p.evaluate(-1e6).abs() < 1e-12);
        }
    }

    #[test]
    fn origin_and_plateaus() {
        let p = PotentialParams::reference_barrier();
        let plateau = p.right().plateau(p.v0());
        assert!((plateau - 16.40625).abs() < 1e-12);
        // e^{αL} = e^8 ≫ 1: V(0) sits on the plateau
        assert!((p.evaluate(0.0) - plateau).abs() < 1e-2);
        let w = PotentialParams::reference_well();
        assert!((w.v0() + 21.09375).abs() < 1e-12);
        assert!((w.depth_hint() + 4.84375).abs() < 1e-3);
    }

    #[test]
    fn large_arguments_do_not_overflow() {
        let p = PotentialParams::reference_barrier();
        assert!(p.evaluate(400.0).is_finite());
        assert!(p.evaluate(-400.0).is_finite());
        let mut s = SideParams::REFERENCE;
        s.alpha = 500.0;
        let p = PotentialParams::symmetric(s).unwrap();
        assert!(p.evaluate(0.0).is_finite());
    }

    #[test]
    fn mirrored_is_reflection() {
        let mut l = SideParams::REFERENCE;
        l.v1 = 2.0;
        l.alpha = 1.3;
        let p = PotentialParams::new(l, SideParams::REFERENCE).unwrap();
        let m = p.mirrored();
        for x in [-5.0, -1.0, 0.3, 2.0, 7.0] {
            assert_eq!(p.evaluate(x), m.evaluate(-x));
        }
    }

    #[test]
    fn parses_file() {
        let text = "# barrier\nalpha = 2\nL = 4\nV1 = 1\nV2 = 0.2\nA = 0.1\nB = 1\nC = 0.1\n\
                    D = 10\nq = 0.8\np = 8\nxi = 5\neta = 10\nmass = 2 # GeV\n";
        let f = parse_param_file(text).unwrap();
        assert_eq!(f.params, PotentialParams::reference_barrier());
        assert_eq!(f.mass, Some(2.0));
        let asym = format!("{text}tilde_V1 = 3\n");
        let f = parse_param_file(&asym).unwrap();
        assert_eq!(f.params.left().v1, 3.0);
        assert!(!f.params.is_symmetric());
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = parse_param_file("alpha = 2\nL = four\n").unwrap_err();
        assert_eq!(
            e,
            Error::Config {
                line: 2,
                message: "`four` is not a number".into()
            }
        );
        let e = parse_param_file("alpha = 2\n\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 3, .. }));
        let e = parse_param_file("alpha 2\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 1, .. }));
        let e = parse_param_file("alpha = 2\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 0, .. }));
    }
}
