//! Command-line front end: `analyze`, `mi-scan` and `correlate`.
//!
//! Exit codes: 0 success, 2 no order found, 1 error.

pub mod analysis;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{pauli, HermitianMatrix};
use crate::mi::{default_distances, min_block_scan, BlockScan};
use crate::orderparam::OrderOperator;
use analysis::{analyze, AnalysisReport, ProfileWithMode, ToolInfo, SCHEMA_VERSION};
use config::{Config, GroundStateInfo, RawConfig, Source};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_ORDER: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "spinorder", version, about = "Detect long-range order in spin chains from block mutual information")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Block scan, order-operator construction, correlations and modes
    Analyze(CommandArgs),
    /// Mutual information table MI(m, r)
    MiScan(CommandArgs),
    /// Connected correlation profile of a given operator and its mode
    Correlate(CommandArgs),
}

#[derive(Debug, clap::Args)]
pub struct CommandArgs {
    /// JSON config with the same keys as the flags; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub raw: RawConfig,
}

impl CommandArgs {
    fn resolve(self) -> Result<Config> {
        let file = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        Config::resolve(file.overridden_by(self.raw))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiScanReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub descriptor: String,
    pub source: Source,
    pub ground_state: Option<GroundStateInfo>,
    pub scan: BlockScan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelateReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub descriptor: String,
    pub source: Source,
    pub ground_state: Option<GroundStateInfo>,
    pub operator: OrderOperator,
    pub correlation: ProfileWithMode,
}

/// Named operators or a JSON file holding `{"dim", "re", "im"}`.
pub fn load_operator(spec: &str) -> Result<OrderOperator> {
    let matrix = match spec.trim().to_ascii_lowercase().as_str() {
        "sigma_z" | "z" => pauli::z(),
        "sigma_x" | "x" => pauli::x(),
        "sigma_y" | "y" => pauli::y(),
        "dimer" => HermitianMatrix::identity(4).add(&pauli::dot().scaled(2.0 / 3.0))?,
        _ => {
            let path = Path::new(spec);
            if !path.is_file() {
                return Err(invalid(format!(
                    "unknown operator `{spec}` (expected sigma_z, sigma_x, sigma_y, dimer or a JSON file)"
                )));
            }
            serde_json::from_str(&std::fs::read_to_string(path)?)?
        }
    };
    let label = Path::new(spec)
        .file_stem()
        .map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
    OrderOperator::new(label, matrix)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

pub fn run_analyze(cfg: &Config) -> Result<(AnalysisReport, i32)> {
    let (state, ground_state) = cfg.prepare_state()?;
    let analysis = analyze(&state, &cfg.thresholds)?;
    let code = if analysis.order_found { EXIT_OK } else { EXIT_NO_ORDER };
    let report = AnalysisReport {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo::current(),
        descriptor: cfg.source.descriptor(),
        source: cfg.source.clone(),
        lanczos_seed: cfg.lanczos.seed,
        lanczos_tol: cfg.lanczos.tol,
        ground_state,
        analysis,
    };
    ensure_dir(&cfg.out_dir)?;
    if cfg.format.json() {
        output::write_json(&cfg.out_dir.join("report.json"), &report)?;
    }
    if cfg.format.csv() {
        output::write_analysis_tables(&cfg.out_dir, &report.analysis)?;
    }
    Ok((report, code))
}

pub fn run_mi_scan(cfg: &Config) -> Result<(MiScanReport, i32)> {
    let (state, ground_state) = cfg.prepare_state()?;
    let scan = min_block_scan(&state, cfg.thresholds.max_block, cfg.thresholds.mi_threshold)?;
    let code = if scan.min_block.is_some() { EXIT_OK } else { EXIT_NO_ORDER };
    let report = MiScanReport {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo::current(),
        descriptor: cfg.source.descriptor(),
        source: cfg.source.clone(),
        ground_state,
        scan,
    };
    ensure_dir(&cfg.out_dir)?;
    if cfg.format.json() {
        output::write_json(&cfg.out_dir.join("mi_scan.json"), &report)?;
    }
    if cfg.format.csv() {
        output::write_mi_table(&cfg.out_dir.join("mi_table.csv"), &report.scan)?;
    }
    Ok((report, code))
}

pub fn run_correlate(cfg: &Config) -> Result<(CorrelateReport, i32)> {
    let spec = cfg
        .operator
        .as_deref()
        .ok_or_else(|| invalid("correlate needs --operator"))?;
    let operator = load_operator(spec)?;
    let (state, ground_state) = cfg.prepare_state()?;
    let distances = default_distances(state.n_sites(), operator.block_size);
    if distances.is_empty() {
        return Err(invalid("operator block is too large for the chain"));
    }
    let profile = crate::orderparam::correlation_profile(&state, &operator, 0, &distances)?;
    let mode = crate::orderparam::extract_mode(&profile.distances, &profile.connected)?;
    let report = CorrelateReport {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo::current(),
        descriptor: cfg.source.descriptor(),
        source: cfg.source.clone(),
        ground_state,
        operator,
        correlation: ProfileWithMode { profile, mode },
    };
    ensure_dir(&cfg.out_dir)?;
    if cfg.format.json() {
        output::write_json(&cfg.out_dir.join("correlate.json"), &report)?;
    }
    if cfg.format.csv() {
        output::write_correlation(&cfg.out_dir.join("correlation.csv"), &report.correlation)?;
        output::write_mode(&cfg.out_dir.join("mode.csv"), &report.correlation)?;
    }
    Ok((report, EXIT_OK))
}

fn fmt_k(k: Option<f64>) -> String {
    match k {
        None => "none".to_string(),
        Some(k) if k == 0.0 => "0".to_string(),
        Some(k) if (k - std::f64::consts::PI).abs() < 1e-12 => "π".to_string(),
        Some(k) => format!("{k:.6}"),
    }
}

fn summarize_analysis(r: &AnalysisReport) {
    let a = &r.analysis;
    println!("{}", r.descriptor);
    if let Some(g) = &r.ground_state {
        println!("ground energy {:.12} ({} Lanczos steps, residual {:.1e})", g.energy, g.iterations, g.residual);
    }
    match a.min_block {
        Some(m) => println!("minimum block size {m}"),
        None => println!("no block up to size {} has non-vanishing MI", a.thresholds.max_block),
    }
    for c in &a.correlations {
        println!("{}: mode {}", c.profile.label, fmt_k(c.mode.k));
    }
    println!("verdict: {}", a.verdict.description);
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Analyze(args) => args.resolve().and_then(|cfg| run_analyze(&cfg)).map(|(r, code)| {
            summarize_analysis(&r);
            code
        }),
        Command::MiScan(args) => args.resolve().and_then(|cfg| run_mi_scan(&cfg)).map(|(r, code)| {
            println!("{}", r.descriptor);
            match r.scan.min_block {
                Some(m) => println!("minimum block size {m}"),
                None => println!("no block up to size {} has non-vanishing MI", r.scan.max_block),
            }
            code
        }),
        Command::Correlate(args) => args.resolve().and_then(|cfg| run_correlate(&cfg)).map(|(r, code)| {
            println!("{}", r.descriptor);
            println!("{}: mode {}", r.operator.label, fmt_k(r.correlation.mode.k));
            code
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
