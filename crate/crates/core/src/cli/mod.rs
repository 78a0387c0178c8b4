//! The `skm` command-line harness: configuration, suite dispatch, reports and exit codes.

mod output;
mod suites;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::chart_atlas::WeightPair;
use crate::error::{GeomError, Result};
use crate::gibbons_hawking::{EstimateRegion, GHConfig, DEFAULT_EPS_SPLIT};
use crate::kummer_gluing::GluingSchedule;
use crate::report::{all_pass, Check};
use crate::tensor::DerivativeScheme;

pub use output::{fmt_f64, to_json, Table};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    VerifyRicci,
    VerifyKahler,
    Holonomy,
    GhCompare,
    GhCurl,
    GluingScan,
    FixedPoints,
    AdmissibleP,
    ModuliDims,
    G2Torsion,
    G2Algebra,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::VerifyRicci,
        Suite::VerifyKahler,
        Suite::Holonomy,
        Suite::GhCompare,
        Suite::GhCurl,
        Suite::GluingScan,
        Suite::FixedPoints,
        Suite::AdmissibleP,
        Suite::ModuliDims,
        Suite::G2Torsion,
        Suite::G2Algebra,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::VerifyRicci => "verify-ricci",
            Suite::VerifyKahler => "verify-kahler",
            Suite::Holonomy => "holonomy",
            Suite::GhCompare => "gh-compare",
            Suite::GhCurl => "gh-curl",
            Suite::GluingScan => "gluing-scan",
            Suite::FixedPoints => "fixed-points",
            Suite::AdmissibleP => "admissible-p",
            Suite::ModuliDims => "moduli-dims",
            Suite::G2Torsion => "g2-torsion",
            Suite::G2Algebra => "g2-algebra",
        }
    }

    /// Slope suites also write a convergence table.
    pub fn has_table(self) -> bool {
        matches!(self, Suite::GluingScan | Suite::G2Torsion)
    }

    fn default_grid(self) -> Option<usize> {
        match self {
            Suite::VerifyRicci | Suite::VerifyKahler => Some(20),
            Suite::GhCompare => Some(15),
            Suite::GhCurl => Some(20),
            Suite::GluingScan | Suite::G2Torsion => Some(EstimateRegion::default().n_radial),
            _ => None,
        }
    }

    fn default_tol(self) -> Option<f64> {
        match self {
            Suite::VerifyRicci | Suite::GhCompare => Some(1e-6),
            Suite::VerifyKahler | Suite::GhCurl => Some(1e-8),
            Suite::Holonomy => Some(1e-4),
            Suite::GluingScan => Some(0.2),
            Suite::G2Torsion => Some(0.3),
            Suite::G2Algebra => Some(1e-12),
            Suite::FixedPoints | Suite::AdmissibleP | Suite::ModuliDims => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Fd,
    Ad,
}

impl SchemeName {
    pub fn scheme(self) -> DerivativeScheme {
        match self {
            SchemeName::Fd => DerivativeScheme::default(),
            SchemeName::Ad => DerivativeScheme::ad(),
        }
    }
}

/// Everything a suite reads. Loaded from a JSON file, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub k: u32,
    pub l: u32,
    /// Decreasing sweep of the gluing parameter.
    pub t: Vec<f64>,
    /// Grid resolution; its meaning depends on the suite. `None` selects the suite default.
    pub grid: Option<usize>,
    /// Main tolerance of the suite. `None` selects the suite default.
    pub tol: Option<f64>,
    pub scheme: SchemeName,
    pub seed: u64,
    /// Largest order searched by `admissible-p`.
    pub max: u32,
    pub eps_split: f64,
    /// Configuration for `gh-curl`; defaults to masses `k, l` at `∓e₁` with period `4π`.
    pub gh: Option<GHConfig>,
    pub schedule: GluingSchedule,
    pub loops: usize,
    pub ode_tol: f64,
    pub points: usize,
    pub lattices: usize,
    /// Repeat slope sweeps on the doubled grid.
    pub doubling: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            k: 1,
            l: 2,
            t: vec![0.1, 0.05, 0.025],
            grid: None,
            tol: None,
            scheme: SchemeName::Fd,
            seed: 0,
            max: 12,
            eps_split: DEFAULT_EPS_SPLIT,
            gh: None,
            schedule: GluingSchedule::default(),
            loops: 10,
            ode_tol: 1e-8,
            points: 1000,
            lattices: 20,
            doubling: true,
        }
    }
}

fn config_err(msg: impl Into<String>) -> GeomError {
    GeomError::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_err(format!("config file: {e}")))
    }

    pub fn weights(&self) -> Result<WeightPair> {
        WeightPair::new(self.k, self.l)
    }

    pub fn grid_or_default(&self, suite: Suite) -> usize {
        self.grid.or(suite.default_grid()).unwrap_or(0)
    }

    pub fn tol_or_default(&self, suite: Suite) -> f64 {
        self.tol.or(suite.default_tol()).unwrap_or(0.0)
    }

    /// Fill in suite defaults so the echo in the report is complete.
    pub fn resolved(mut self, suite: Suite) -> Self {
        self.grid = self.grid.or(suite.default_grid());
        self.tol = self.tol.or(suite.default_tol());
        self
    }

    pub fn validate(&self, suite: Suite) -> Result<()> {
        self.weights()?;
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(config_err(format!("tolerance must be positive, got {tol}")));
            }
        }
        if let Some(grid) = self.grid {
            if grid < 2 {
                return Err(config_err(format!("grid must have at least 2 points per axis, got {grid}")));
            }
        }
        if !(self.eps_split > 0.0 && self.eps_split.is_finite()) {
            return Err(config_err("eps_split must be positive"));
        }
        if !(self.ode_tol > 0.0 && self.ode_tol.is_finite()) {
            return Err(config_err("ode_tol must be positive"));
        }
        if self.loops == 0 || self.points == 0 || self.lattices == 0 {
            return Err(config_err("loops, points and lattices must be nonzero"));
        }
        if suite == Suite::AdmissibleP && self.max < 3 {
            return Err(config_err(format!("max must be at least 3, got {}", self.max)));
        }
        if suite.has_table() {
            if self.t.len() < 3 {
                return Err(config_err(format!("a slope fit needs at least 3 t values, got {}", self.t.len())));
            }
            if self.t.iter().any(|t| !(*t > 0.0 && t.is_finite())) || self.t.windows(2).any(|w| w[1] >= w[0]) {
                return Err(config_err("t values must be positive and strictly decreasing"));
            }
            self.schedule.validate()?;
        }
        Ok(())
    }
}

/// Checks plus suite-specific data and an optional convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutput {
    pub checks: Vec<Check>,
    pub data: Value,
    pub table: Option<Table>,
}

/// Run one suite on a validated configuration.
pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Result<SuiteOutput> {
    cfg.validate(suite)?;
    suites::dispatch(suite, cfg)
}

/// The report as a JSON value. `seconds` is the only run-dependent field.
pub fn report_value(suite: Suite, cfg: &RunConfig, out: &SuiteOutput, seconds: f64) -> Value {
    json!({
        "suite": suite.name(),
        "config": serde_json::to_value(cfg.clone().resolved(suite)).expect("config serializes"),
        "checks": out.checks,
        "pass": all_pass(&out.checks),
        "seed": cfg.seed,
        "data": out.data,
        "timing": { "seconds": seconds },
        "versions": { "skm": env!("CARGO_PKG_VERSION") },
    })
}

fn error_report(suite: Suite, cfg: &RunConfig, err: &GeomError, seconds: f64) -> Value {
    let mut v = report_value(suite, cfg, &SuiteOutput { checks: vec![], data: Value::Null, table: None }, seconds);
    v["pass"] = Value::Bool(false);
    v["error"] = Value::String(err.to_string());
    v
}

#[derive(Debug, Parser)]
#[command(name = "skm", version, about = "Run numerical verification suites and write JSON/CSV reports")]
pub struct Args {
    pub suite: Suite,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub l: Option<u32>,
    /// Comma-separated decreasing list, e.g. 0.1,0.05,0.025
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Option<Vec<f64>>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeName>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest order for admissible-p
    #[arg(long)]
    pub max: Option<u32>,
    /// Directory for `<suite>.json` and, for slope suites, `<suite>.csv`
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Args {
    pub fn to_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
                RunConfig::from_json(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(l) = self.l {
            cfg.l = l;
        }
        if let Some(t) = &self.t {
            cfg.t = t.clone();
        }
        if self.grid.is_some() {
            cfg.grid = self.grid;
        }
        if self.tol.is_some() {
            cfg.tol = self.tol;
        }
        if let Some(s) = self.scheme {
            cfg.scheme = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = self.max {
            cfg.max = m;
        }
        Ok(cfg)
    }
}

fn write_outputs(dir: &Path, suite: Suite, report: &Value, table: Option<&Table>) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{}.json", suite.name())), to_json(report))?;
    if let Some(t) = table {
        std::fs::write(dir.join(format!("{}.csv", suite.name())), t.to_csv())?;
    }
    Ok(())
}

/// Exit code for a failed run.
pub fn exit_code(err: &GeomError) -> i32 {
    if err.is_config() {
        EXIT_CONFIG
    } else if matches!(err, GeomError::NoSingleConstant(_)) {
        EXIT_CHECK_FAILED
    } else {
        EXIT_NUMERICAL
    }
}

/// Parse `argv`, run the suite, print the report to stdout and return the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    let cfg = match args.to_config().and_then(|c| c.validate(args.suite).map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("skm: {e}");
            return EXIT_CONFIG;
        }
    };
    let start = Instant::now();
    let result = run_suite(args.suite, &cfg);
    let seconds = start.elapsed().as_secs_f64();
    let (report, table, code) = match &result {
        Ok(out) => {
            let code = if all_pass(&out.checks) { EXIT_PASS } else { EXIT_CHECK_FAILED };
            (report_value(args.suite, &cfg, out, seconds), out.table.as_ref(), code)
        }
        Err(e) => {
            eprintln!("skm: {e}");
            if e.is_config() {
                return EXIT_CONFIG;
            }
            (error_report(args.suite, &cfg, e, seconds), None, exit_code(e))
        }
    };
    print!("{}", to_json(&report));
    if let Some(dir) = &args.out {
        if let Err(e) = write_outputs(dir, args.suite, &report, table) {
            eprintln!("skm: cannot write reports to {}: {e}", dir.display());
            return EXIT_CONFIG;
        }
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_match_the_command_line() {
        for s in Suite::ALL {
            assert_eq!(s.to_possible_value().unwrap().get_name(), s.name());
            assert_eq!(serde_json::to_value(s).unwrap(), s.name());
        }
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate(Suite::GluingScan).is_ok());
        cfg.t = vec![0.1, 0.05];
        assert!(cfg.validate(Suite::GluingScan).unwrap_err().is_config());
        assert!(cfg.validate(Suite::VerifyRicci).is_ok());
        cfg.tol = Some(0.0);
        assert!(cfg.validate(Suite::VerifyRicci).is_err());
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&GeomError::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&GeomError::NoSingleConstant(1.0)), EXIT_CHECK_FAILED);
        assert_eq!(exit_code(&GeomError::StepTooLarge(1.0)), EXIT_NUMERICAL);
    }
}
