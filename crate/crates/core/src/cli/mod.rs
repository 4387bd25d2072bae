//! Command-line front end: `verify`, `run` and `sweep`.
//!
//! Exit codes: 0 on success, 1 for configuration or I/O problems, 2 when a
//! numerical consistency check fails.

pub mod config;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::bases::{BasisKind, OperatorBasis};
use crate::maps::CatMapSpec;
use crate::otoc::{otoc_re_series, EntropySeries, OtocSeries, Scenario};
use crate::relevance::{counts_from_series, footprint, relevance_report, FootprintMap, RelevanceReport};
use crate::Error;

pub use config::{ConfigError, RunConfig};

/// Largest sum-rule residual `verify` accepts.
pub const VERIFY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "catmap-otoc", version, about = "OTOCs and relevant operators of coupled quantum cat maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check `1 - Σ C_M(t) = S_L(t)` and write residuals.csv.
    Verify(Args),
    /// Write entropy, OTOC, relevance and footprint artifacts.
    Run(Args),
    /// Count relevant operators for several t0 and write counts_vs_t0.csv.
    Sweep(Args),
}

/// Flags shared by every subcommand; they override values from `--config`.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Args {
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Preset name(s): HH, HE, EH, EE-fixed, EE-offcenter (comma separated).
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Basis kind(s): pauli, translation, reflection, kirkwood (comma separated).
    #[arg(long, value_name = "KIND")]
    pub basis: Option<String>,
    /// Dimension of each factor (default 64, or 65 for reflections).
    #[arg(long)]
    pub n: Option<String>,
    /// Number of map steps.
    #[arg(long)]
    pub tmax: Option<String>,
    /// Integration times, comma separated.
    #[arg(long, value_name = "LIST")]
    pub t0: Option<String>,
    /// Share of the entropy area the relevant set must cover.
    #[arg(long)]
    pub fraction: Option<String>,
    /// Area rule: unit (plain sum) or trapezoid.
    #[arg(long)]
    pub quadrature: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<String>,
    /// Also write footprint.svg.
    #[arg(long)]
    pub svg: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NumericalConsistency(_) | Error::DegenerateWindow(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn io_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Reads `--config` (if any) and applies the remaining flags on top.
pub fn resolve_config(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            RunConfig::from_text(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    let flags: [(&str, &Option<String>); 9] = [
        ("preset", &args.preset),
        ("basis", &args.basis),
        ("n", &args.n),
        ("tmax", &args.tmax),
        ("t0", &args.t0),
        ("fraction", &args.fraction),
        ("quadrature", &args.quadrature),
        ("out", &args.out),
        ("threads", &args.threads),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)
                .map_err(|m| CliError::Config(format!("--{key}: {m}")))?;
        }
    }
    if args.svg {
        cfg.emit.svg = true;
    }
    Ok(cfg)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<(), CliError> {
    let args = match command {
        Command::Verify(a) | Command::Run(a) | Command::Sweep(a) => a,
    };
    let cfg = resolve_config(args)?;
    let job = || match command {
        Command::Verify(_) => cmd_verify(&cfg),
        Command::Run(_) => cmd_run(&cfg),
        Command::Sweep(_) => cmd_sweep(&cfg),
    };
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(job),
        None => job(),
    }
}

struct Computed {
    scenario: Scenario,
    basis: OperatorBasis,
    series: OtocSeries,
    entropy: EntropySeries,
}

impl Computed {
    fn n(&self) -> usize {
        self.basis.space().dim()
    }

    fn tag(&self) -> String {
        format!("{}_{}", self.scenario.name, self.basis.kind().name())
    }
}

/// Builds every requested scenario and computes its series, in parallel
/// across scenarios. Results keep the configuration order.
fn compute_all(cfg: &RunConfig) -> Result<Vec<Computed>, CliError> {
    let scenarios = cfg.scenarios()?;
    // fail fast on unavailable bases before any evolution starts
    let bases: Vec<OperatorBasis> = scenarios
        .iter()
        .map(|sc| sc.basis().map_err(CliError::from))
        .collect::<Result<_, _>>()?;
    scenarios
        .into_par_iter()
        .zip(bases)
        .map(|(scenario, basis)| {
            log::info!(
                "{} / {} basis, N={}, t_max={}",
                scenario.name,
                basis.kind(),
                basis.space().dim(),
                scenario.t_max
            );
            let (series, entropy) = otoc_re_series(&scenario, &basis)?;
            Ok(Computed {
                scenario,
                basis,
                series,
                entropy,
            })
        })
        .collect()
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    output::write_text(&path, text).map_err(|e| io_err(&path, e))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<(), CliError> {
    let done = compute_all(cfg)?;
    ensure_dir(&cfg.out)?;
    let mut table = String::from(output::RESIDUALS_HEADER);
    table.push('\n');
    let mut worst: f64 = 0.0;
    for c in &done {
        let max = output::residuals_rows(
            &mut table,
            &c.scenario.name,
            c.basis.kind().name(),
            c.n(),
            &c.series,
            &c.entropy,
        );
        let verdict = if max < VERIFY_TOLERANCE { "ok" } else { "FAILED" };
        println!(
            "{:<13} {:<11} N={:<3} max |1 - sum C - S_L| = {max:.3e}  {verdict}",
            c.scenario.name,
            c.basis.kind().name(),
            c.n()
        );
        worst = worst.max(max);
    }
    write(&cfg.out, "residuals.csv", &table)?;
    if worst < VERIFY_TOLERANCE {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "largest residual {worst:e} is not below {VERIFY_TOLERANCE:e}"
        )))
    }
}

/// Map whose unstable direction is drawn: the observed factor's map if it is
/// hyperbolic, otherwise the partner's. With no hyperbolic factor the
/// observed map is passed on, and the footprint records a warning.
fn overlay_map(sc: &Scenario) -> CatMapSpec {
    let (obs, other) = match sc.observed {
        crate::torus::Subsystem::First => (sc.coupled.map1, sc.coupled.map2),
        crate::torus::Subsystem::Second => (sc.coupled.map2, sc.coupled.map1),
    };
    if !obs.is_hyperbolic() && other.is_hyperbolic() {
        other
    } else {
        obs
    }
}

/// Side length of the square that holds footprint coordinates.
fn footprint_period(kind: BasisKind, n: usize, remap_odd: bool) -> f64 {
    match kind {
        BasisKind::Reflection if !(remap_odd && n % 2 == 1) => 0.5,
        _ => 1.0,
    }
}

fn write_footprint(cfg: &RunConfig, c: &Computed, report: &RelevanceReport, dir: &Path) -> Result<FootprintMap, CliError> {
    let map = overlay_map(&c.scenario);
    let fp = footprint(report, &c.basis, Some(&map), cfg.remap_odd)?;
    if cfg.emit.csv {
        write(dir, "footprint.csv", &output::footprint_csv(&fp))?;
    }
    if cfg.emit.svg {
        let title = format!(
            "{} {} N={} t0={} ({} relevant)",
            c.scenario.name,
            c.basis.kind().name(),
            c.n(),
            report.t0,
            report.n_relevant
        );
        let period = footprint_period(c.basis.kind(), c.n(), cfg.remap_odd);
        write(dir, "footprint.svg", &svg::footprint_svg(&fp, period, &title))?;
    }
    Ok(fp)
}

pub fn cmd_run(cfg: &RunConfig) -> Result<(), CliError> {
    let done = compute_all(cfg)?;
    let many = done.len() > 1;
    for c in &done {
        let dir = if many { cfg.out.join(c.tag()) } else { cfg.out.clone() };
        ensure_dir(&dir)?;
        if cfg.emit.csv {
            write(&dir, "entropy.csv", &output::entropy_csv(&c.entropy))?;
            write(&dir, "otoc.csv", &output::otoc_csv(&c.series))?;
        }
        if cfg.t0.is_empty() {
            log::info!("{}: no t0 given, relevance stage skipped", c.tag());
            continue;
        }
        let reports: Vec<RelevanceReport> = cfg
            .t0
            .iter()
            .map(|&t0| relevance_report(&c.series, &c.entropy, t0, cfg.fraction, cfg.quadrature))
            .collect::<Result<_, _>>()?;
        for r in &reports {
            println!(
                "{:<13} {:<11} N={:<3} t0={:<3} n_relevant={} of {}",
                c.scenario.name,
                c.basis.kind().name(),
                c.n(),
                r.t0,
                r.n_relevant,
                c.series.len()
            );
        }
        if cfg.emit.json {
            let text = output::relevance_json(&c.scenario.name, c.basis.kind().name(), c.n(), &c.series, &reports)
                .map_err(|e| CliError::Io(e.to_string()))?;
            write(&dir, "relevance.json", &text)?;
        }
        if cfg.emit.csv {
            write(&dir, "partial_sums.csv", &output::partial_sums_csv(&c.series, &c.entropy, &reports))?;
        }
        let last = reports.last().expect("t0 list is non-empty");
        if c.basis.kind() == BasisKind::Pauli {
            log::info!("{}: Pauli labels have no phase-space footprint", c.tag());
        } else {
            // a missing overlay is logged by `footprint` itself
            write_footprint(cfg, c, last, &dir)?;
        }
    }
    Ok(())
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.t0.is_empty() {
        return Err(CliError::Config("sweep needs a non-empty t0 list".into()));
    }
    let done = compute_all(cfg)?;
    let mut rows = Vec::new();
    for c in &done {
        let counts = counts_from_series(&c.series, &c.entropy, &cfg.t0, cfg.fraction, cfg.quadrature)?;
        for (t0, n_relevant) in counts {
            println!(
                "{:<13} {:<11} N={:<3} t0={t0:<3} n_relevant={n_relevant}",
                c.scenario.name,
                c.basis.kind().name(),
                c.n()
            );
            rows.push(output::CountRow {
                scenario: c.scenario.name.clone(),
                basis: c.basis.kind().name(),
                t0,
                n_relevant,
                basis_size: c.series.len(),
            });
        }
    }
    ensure_dir(&cfg.out)?;
    write(&cfg.out, "counts_vs_t0.csv", &output::counts_csv(&rows))
}
