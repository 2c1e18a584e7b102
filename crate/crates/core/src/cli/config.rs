//! Run configuration: JSON file merged with command-line flags (flags win).

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hilbert::StateVector;
use crate::mi::DEFAULT_MI_THRESHOLD;
use crate::models::{
    dimer_superposition, ghz_state, lanczos_ground_state, neel_ghz_state, polarized_state, Boundary,
    GroundStateResult, LanczosOptions, ModelPreset, Sector, SpinChainModel,
};
use crate::orderparam::{DEFAULT_OFFDIAG_EPS, DEFAULT_RANK_EPS};

pub const DEFAULT_MAX_BLOCK: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

impl OutputFormat {
    pub fn json(self) -> bool {
        matches!(self, Self::Json | Self::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Self::Csv | Self::Both)
    }
}

/// Every key is optional; used for both the config file and the flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    /// Hamiltonian: heisenberg, xxz(Δ), majumdar_ghosh, or a model JSON file
    #[arg(long)]
    pub model: Option<String>,
    /// Analytic state: ghz, neel_ghz, dimer, polarized
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long)]
    pub sites: Option<usize>,
    /// periodic or open (model presets only)
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long)]
    pub max_block: Option<usize>,
    #[arg(long)]
    pub mi_threshold: Option<f64>,
    #[arg(long)]
    pub rank_eps: Option<f64>,
    #[arg(long)]
    pub offdiag_eps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Lanczos residual tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// correlate only: sigma_z, sigma_x, sigma_y, dimer, or an operator JSON file
    #[arg(long)]
    pub operator: Option<String>,
}

impl RawConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overridden_by(self, over: RawConfig) -> RawConfig {
        RawConfig {
            model: over.model.or(self.model),
            state: over.state.or(self.state),
            sites: over.sites.or(self.sites),
            boundary: over.boundary.or(self.boundary),
            max_block: over.max_block.or(self.max_block),
            mi_threshold: over.mi_threshold.or(self.mi_threshold),
            rank_eps: over.rank_eps.or(self.rank_eps),
            offdiag_eps: over.offdiag_eps.or(self.offdiag_eps),
            seed: over.seed.or(self.seed),
            tol: over.tol.or(self.tol),
            out_dir: over.out_dir.or(self.out_dir),
            format: over.format.or(self.format),
            operator: over.operator.or(self.operator),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticState {
    Ghz,
    NeelGhz,
    Dimer,
    Polarized,
}

impl FromStr for AnalyticState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "ghz" => Ok(Self::Ghz),
            "neel_ghz" | "neel" => Ok(Self::NeelGhz),
            "dimer" | "majumdar_ghosh" => Ok(Self::Dimer),
            "polarized" | "up" => Ok(Self::Polarized),
            other => Err(invalid(format!(
                "unknown state `{other}` (expected ghz, neel_ghz, dimer or polarized)"
            ))),
        }
    }
}

impl AnalyticState {
    pub fn build(self, n: usize) -> Result<StateVector> {
        match self {
            Self::Ghz => ghz_state(n),
            Self::NeelGhz => neel_ghz_state(n),
            Self::Dimer => dimer_superposition(n),
            Self::Polarized => polarized_state(n),
        }
    }
}

/// What the analysis runs on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    State { state: AnalyticState, n_sites: usize },
    Model { descriptor: String, model: SpinChainModel },
}

impl Source {
    pub fn n_sites(&self) -> usize {
        match self {
            Self::State { n_sites, .. } => *n_sites,
            Self::Model { model, .. } => model.n_sites,
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            Self::State { state, n_sites } => format!("{} state, N={n_sites}", serde_json::to_value(state).unwrap().as_str().unwrap()),
            Self::Model { descriptor, model } => format!("{descriptor} ground state, N={}", model.n_sites),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub max_block: usize,
    pub mi_threshold: f64,
    pub rank_eps: f64,
    pub offdiag_eps: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            max_block: DEFAULT_MAX_BLOCK,
            mi_threshold: DEFAULT_MI_THRESHOLD,
            rank_eps: DEFAULT_RANK_EPS,
            offdiag_eps: DEFAULT_OFFDIAG_EPS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateInfo {
    pub energy: f64,
    pub energy_per_site: f64,
    pub iterations: usize,
    pub residual: f64,
    pub sector: Sector,
}

impl From<&GroundStateResult> for GroundStateInfo {
    fn from(g: &GroundStateResult) -> Self {
        Self {
            energy: g.energy,
            energy_per_site: g.energy / g.state.n_sites() as f64,
            iterations: g.iterations,
            residual: g.residual,
            sector: g.sector,
        }
    }
}

/// A validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub source: Source,
    pub thresholds: Thresholds,
    pub lanczos: LanczosOptions,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub operator: Option<String>,
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(invalid(format!("--{name} must be a positive number, got {x}")))
    }
}

impl Config {
    pub fn resolve(raw: RawConfig) -> Result<Self> {
        let boundary = match raw.boundary.as_deref().map(str::to_ascii_lowercase).as_deref() {
            None | Some("periodic") => Boundary::Periodic,
            Some("open") => Boundary::Open,
            Some(other) => return Err(invalid(format!("unknown boundary `{other}`"))),
        };
        let source = match (raw.model, raw.state) {
            (Some(_), Some(_)) => return Err(invalid("give either --model or --state, not both")),
            (None, None) => return Err(invalid("one of --model or --state is required")),
            (None, Some(s)) => {
                let n = raw.sites.ok_or_else(|| invalid("--sites is required"))?;
                Source::State {
                    state: s.parse()?,
                    n_sites: n,
                }
            }
            (Some(m), None) => match m.parse::<ModelPreset>() {
                Ok(preset) => {
                    let n = raw.sites.ok_or_else(|| invalid("--sites is required"))?;
                    Source::Model {
                        descriptor: preset.to_string(),
                        model: SpinChainModel::from_preset(&preset, n, boundary)?,
                    }
                }
                Err(preset_err) => {
                    let path = Path::new(&m);
                    if !path.is_file() {
                        return Err(preset_err);
                    }
                    let model = SpinChainModel::from_json(&std::fs::read_to_string(path)?)?;
                    if let Some(n) = raw.sites {
                        if n != model.n_sites {
                            return Err(invalid(format!(
                                "--sites {n} disagrees with the model file ({} sites)",
                                model.n_sites
                            )));
                        }
                    }
                    let descriptor = path
                        .file_stem()
                        .map_or_else(|| "model".to_string(), |s| s.to_string_lossy().into_owned());
                    Source::Model { descriptor, model }
                }
            },
        };
        let defaults = Thresholds::default();
        let thresholds = Thresholds {
            max_block: raw.max_block.unwrap_or(defaults.max_block),
            mi_threshold: positive("mi-threshold", raw.mi_threshold.unwrap_or(defaults.mi_threshold))?,
            rank_eps: positive("rank-eps", raw.rank_eps.unwrap_or(defaults.rank_eps))?,
            offdiag_eps: positive("offdiag-eps", raw.offdiag_eps.unwrap_or(defaults.offdiag_eps))?,
        };
        if thresholds.max_block == 0 {
            return Err(invalid("--max-block must be at least 1"));
        }
        let lanczos = LanczosOptions {
            tol: positive("tol", raw.tol.unwrap_or(LanczosOptions::default().tol))?,
            seed: raw.seed.unwrap_or(0),
            ..LanczosOptions::default()
        };
        Ok(Self {
            source,
            thresholds,
            lanczos,
            out_dir: raw.out_dir.unwrap_or_else(|| PathBuf::from(".")),
            format: raw.format.unwrap_or(OutputFormat::Both),
            operator: raw.operator,
        })
    }

    /// The state to analyze, with solver diagnostics for model inputs.
    pub fn prepare_state(&self) -> Result<(StateVector, Option<GroundStateInfo>)> {
        match &self.source {
            Source::State { state, n_sites } => Ok((state.build(*n_sites)?, None)),
            Source::Model { model, .. } => {
                let gs = lanczos_ground_state(model, &self.lanczos)?;
                let info = GroundStateInfo::from(&gs);
                Ok((gs.state, Some(info)))
            }
        }
    }
}
