//! `kgws` command line: CSV front end for the library.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::bound::{
    bound_wavefunction, normalize, scan_spectrum, state_window, BoundContext, Spectrum,
};
use crate::error::Error;
use crate::potential::{parse_param_file, PotentialParams, PARAM_NAMES};
use crate::scattering::{transmission_reflection_perturbed, ScatteringResult};
use crate::settings::{BranchConvention, SolverSettings};
use crate::verify::{all_passed, bound_suite, scatter_suite, special_suite, Check};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

pub const DEFAULT_MASS: f64 = 2.0;

#[derive(Debug, Parser)]
#[command(
    name = "kgws",
    version,
    about = "Klein-Gordon equation with the q-deformed Woods-Saxon potential"
)]
pub struct Cli {
    /// Parameter file (`key = value`); the reference barrier when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Particle mass in GeV; overrides the config file.
    #[arg(long, global = true)]
    pub mass: Option<f64>,

    /// Output file, `-` for stdout.
    #[arg(long, global = true, default_value = "-")]
    pub output: String,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate V(x).
    Potential {
        #[arg(long, default_value = "-10:10:401", allow_hyphen_values = true)]
        xrange: Grid,
    },
    /// Transmission and reflection over an energy or parameter sweep.
    Scatter {
        /// `<name>=<start>:<stop>:<step>`, name is `energy` or a parameter.
        #[arg(long, allow_hyphen_values = true)]
        sweep: SweepSpec,
        /// Fixed energy in GeV for parameter sweeps.
        #[arg(long)]
        energy: Option<f64>,
    },
    /// Bound-state spectrum.
    Bound,
    /// Bound-state wavefunction.
    Wavefunction {
        #[arg(long)]
        state: usize,
        /// Defaults to a window where the state has decayed by e^-20.
        #[arg(long, allow_hyphen_values = true)]
        xrange: Option<Grid>,
        /// Scale to unit integral of phi^2 over the grid.
        #[arg(long)]
        normalize: bool,
    },
    /// Self-checks against the ODE oracle and special-function identities.
    Verify {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Evaluate the connection powers on the wrong branch (negative control).
        #[arg(long)]
        corrupt_branch: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Scatter,
    Bound,
    Special,
}

/// `start:stop:n` with `n ≥ 2` points, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let h = (self.stop - self.start) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.start + i as f64 * h).collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected <start>:<stop>:<n>, got `{s}`"));
        };
        let start = parse_f64(a)?;
        let stop = parse_f64(b)?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| format!("bad point count `{n}`"))?;
        if n < 2 || !(start < stop) {
            return Err(format!("need start < stop and n >= 2, got `{s}`"));
        }
        Ok(Self { start, stop, n })
    }
}

/// `name=start:stop:step`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepSpec {
    pub fn is_energy(&self) -> bool {
        self.name == "energy"
    }

    /// `start + i·step` up to `stop` inclusive (with a small slack for rounding).
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, range) = s
            .split_once('=')
            .ok_or_else(|| format!("expected <name>=<start>:<stop>:<step>, got `{s}`"))?;
        let name = name.trim();
        if name != "energy" && !PARAM_NAMES.contains(&name) {
            return Err(format!(
                "unknown sweep parameter `{name}` (expected energy or one of {})",
                PARAM_NAMES.join(", ")
            ));
        }
        let parts: Vec<&str> = range.split(':').collect();
        let [a, b, h] = parts[..] else {
            return Err(format!("expected <start>:<stop>:<step>, got `{range}`"));
        };
        let (start, stop, step) = (parse_f64(a)?, parse_f64(b)?, parse_f64(h)?);
        if !(step > 0.0) || !(start < stop) {
            return Err(format!("need start < stop and step > 0, got `{range}`"));
        }
        Ok(Self {
            name: name.to_string(),
            start,
            stop,
            step,
        })
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite number `{s}`"))
    }
}

/// A failed run: exit code and message for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config { .. } | Error::InvalidParams(_) => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::config(format!("i/o: {e}"))
    }
}

/// Parameters, mass and settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: PotentialParams,
    pub mass: f64,
    pub settings: SolverSettings,
}

impl RunConfig {
    pub fn load(config: Option<&PathBuf>, mass: Option<f64>) -> Result<Self, Failure> {
        let (params, file_mass) = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
                let pf = parse_param_file(&text).map_err(|e| Failure {
                    code: EXIT_CONFIG,
                    message: format!("{}: {e}", path.display()),
                })?;
                (pf.params, pf.mass)
            }
            None => (PotentialParams::reference_barrier(), None),
        };
        let mass = mass.or(file_mass).unwrap_or(DEFAULT_MASS);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Failure::config(format!(
                "mass must be positive, got {mass}"
            )));
        }
        let settings = SolverSettings::default();
        settings.validate()?;
        Ok(Self {
            params,
            mass,
            settings,
        })
    }
}

/// Number in the CSV output: 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// RFC-4180 quoting for free-text fields.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("kgws: {f}");
            f.code
        }
    }
}

/// Execute a parsed command line. `Ok` carries the exit code (verification
/// failures are reported, not errors).
pub fn run(cli: &Cli) -> Result<i32, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Failure::config("--jobs must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
    let cfg = RunConfig::load(cli.config.as_ref(), cli.mass)?;
    let mut out: Box<dyn Write + Send> = if cli.output == "-" {
        Box::new(BufWriter::new(io::stdout()))
    } else {
        let file = File::create(&cli.output)
            .map_err(|e| Failure::config(format!("{}: {e}", cli.output)))?;
        Box::new(BufWriter::new(file))
    };
    let code = pool.install(|| dispatch(&cli.command, &cfg, &mut out))?;
    out.flush()?;
    Ok(code)
}

fn dispatch(command: &Command, cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Potential { xrange } => cmd_potential(cfg, xrange, out),
        Command::Scatter { sweep, energy } => cmd_scatter(cfg, sweep, *energy, out),
        Command::Bound => cmd_bound(cfg, out),
        Command::Wavefunction {
            state,
            xrange,
            normalize,
        } => cmd_wavefunction(cfg, *state, xrange.as_ref(), *normalize, out),
        Command::Verify {
            mode,
            corrupt_branch,
        } => cmd_verify(cfg, *mode, *corrupt_branch, out),
    }
    .map(|c| c.unwrap_or(EXIT_OK))
}

type CmdResult = Result<Option<i32>, Failure>;

pub fn cmd_potential(cfg: &RunConfig, grid: &Grid, out: &mut dyn Write) -> CmdResult {
    writeln!(out, "x,V")?;
    for x in grid.points() {
        writeln!(out, "{},{}", num(x), num(cfg.params.evaluate(x)))?;
    }
    Ok(None)
}

struct Row {
    value: f64,
    result: Option<ScatteringResult>,
    note: String,
}

pub fn cmd_scatter(
    cfg: &RunConfig,
    sweep: &SweepSpec,
    energy: Option<f64>,
    out: &mut dyn Write,
) -> CmdResult {
    let fixed = match (sweep.is_energy(), energy) {
        (true, Some(_)) => {
            return Err(Failure::config(
                "--energy cannot be combined with an energy sweep",
            ))
        }
        (true, None) => None,
        (false, Some(e)) => Some(e),
        (false, None) => {
            return Err(Failure::config(format!(
                "sweeping `{}` requires a fixed --energy",
                sweep.name
            )))
        }
    };
    if !cfg.params.is_symmetric() {
        return Err(
            Error::InvalidParams("scattering requires a symmetric potential".into()).into(),
        );
    }
    let rows: Vec<Row> = sweep
        .points()
        .into_par_iter()
        .map(|value| {
            let computed = match fixed {
                None => {
                    transmission_reflection_perturbed(value, cfg.mass, &cfg.params, &cfg.settings)
                }
                Some(e) => cfg.params.with_param(&sweep.name, value).and_then(|p| {
                    transmission_reflection_perturbed(e, cfg.mass, &p, &cfg.settings)
                }),
            };
            match computed {
                Ok((r, nudged)) => Row {
                    value,
                    result: Some(r),
                    note: if nudged {
                        format!("singular point; energy evaluated at {}", num(r.energy))
                    } else {
                        String::new()
                    },
                },
                Err(e) => Row {
                    value,
                    result: None,
                    note: e.to_string(),
                },
            }
        })
        .collect();
    writeln!(out, "sweep_value,T,R,T_plus_R,note")?;
    for row in rows {
        let (t, r) = row.result.map_or((f64::NAN, f64::NAN), |s| (s.t, s.r));
        writeln!(
            out,
            "{},{},{},{},{}",
            num(row.value),
            num(t),
            num(r),
            num(t + r),
            csv_field(&row.note)
        )?;
    }
    Ok(None)
}

fn spectrum(cfg: &RunConfig) -> Result<Option<Spectrum>, Failure> {
    match scan_spectrum(&cfg.params, cfg.mass, &cfg.settings) {
        Ok(s) => Ok(Some(s)),
        Err(Error::NoBracket) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_bound(cfg: &RunConfig, out: &mut dyn Write) -> CmdResult {
    writeln!(out, "n,parity,E_n,residual,nodes")?;
    let Some(s) = spectrum(cfg)? else {
        eprintln!(
            "kgws: no bound states: neither quantization condition changes sign in (-Mc^2, Mc^2)"
        );
        return Ok(None);
    };
    for (n, st) in s.states.iter().enumerate() {
        writeln!(
            out,
            "{n},{},{},{},{}",
            st.parity.as_str(),
            num(st.energy),
            num(st.condition_residual),
            st.nodes
        )?;
    }
    Ok(None)
}

pub fn cmd_wavefunction(
    cfg: &RunConfig,
    index: usize,
    xrange: Option<&Grid>,
    norm: bool,
    out: &mut dyn Write,
) -> CmdResult {
    let states = spectrum(cfg)?.map(|s| s.states).unwrap_or_default();
    let Some(state) = states.get(index) else {
        return Err(Failure::config(format!(
            "state {index} out of range: the spectrum has {} states",
            states.len()
        )));
    };
    let ctx = BoundContext::new(cfg.params, cfg.mass, cfg.settings);
    let grid = match xrange {
        Some(g) => *g,
        None => {
            let (a, b) = state_window(state, &ctx)?;
            Grid {
                start: a,
                stop: b,
                n: 2001,
            }
        }
    };
    let samples = grid
        .points()
        .into_par_iter()
        .map(|x| bound_wavefunction(state, x, &ctx).map(|v| (x, v)))
        .collect::<crate::Result<Vec<_>>>()?;
    let samples = if norm { normalize(&samples) } else { samples };
    writeln!(out, "x,phi")?;
    for (x, v) in samples {
        writeln!(out, "{},{}", num(x), num(v))?;
    }
    Ok(None)
}

pub fn cmd_verify(cfg: &RunConfig, mode: Mode, corrupt: bool, out: &mut dyn Write) -> CmdResult {
    let mut settings = cfg.settings;
    if corrupt {
        settings.branch = BranchConvention::Principal;
    }
    let checks: Vec<Check> = match mode {
        Mode::Special => special_suite()?,
        Mode::Scatter => scatter_suite(&cfg.params, cfg.mass, &settings)?,
        Mode::Bound => bound_suite(&cfg.params, cfg.mass, &settings)?,
    };
    writeln!(out, "check,value,tolerance,status")?;
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{},{},{},{status}",
            csv_field(&c.name),
            num(c.value),
            num(c.tolerance)
        )?;
        eprintln!(
            "{status} {}: {:e} (tolerance {:e})",
            c.name, c.value, c.tolerance
        );
    }
    Ok(Some(if all_passed(&checks) {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_spec_parses() {
        let s: SweepSpec = "alpha=0.5:10:0.5".parse().unwrap();
        assert_eq!(s.name, "alpha");
        assert_eq!(s.points().len(), 20);
        assert_eq!(*s.points().last().unwrap(), 10.0);
        assert!("energy=2.1:60:0.1"
            .parse::<SweepSpec>()
            .unwrap()
            .is_energy());
    }

    #[test]
    fn sweep_spec_rejects_bad_input() {
        for bad in [
            "zeta=0:1:0.1",
            "alpha=1:0:0.1",
            "alpha=0:1:0",
            "alpha=0:1",
            "alpha0:1:0.1",
            "L=0:x:1",
        ] {
            assert!(bad.parse::<SweepSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn grid_includes_endpoints() {
        let g: Grid = "-2:2:5".parse().unwrap();
        assert_eq!(g.points(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!("0:1:1".parse::<Grid>().is_err());
        assert!("1:0:3".parse::<Grid>().is_err());
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a, b"), "\"a, b\"");
        assert_eq!(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
    }

    #[test]
    fn numbers_have_17_significant_digits() {
        assert_eq!(num(0.15625), "1.5625000000000000e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(
            Failure::from(Error::Config {
                line: 3,
                message: "x".into()
            })
            .code,
            EXIT_CONFIG
        );
        assert_eq!(Failure::from(Error::NoBracket).code, EXIT_NUMERICAL);
    }
}
