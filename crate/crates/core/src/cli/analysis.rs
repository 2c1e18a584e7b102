//! The full scheme on one state: block scan, spectra, operator construction,
//! correlation profiles and modes.

use serde::{Deserialize, Serialize};

use super::config::{GroundStateInfo, Source, Thresholds};
use crate::error::Result;
use crate::hilbert::{joint_rdm, partial_trace, Block, StateVector};
use crate::linalg::eigh;
use crate::mi::{default_distances, min_block_scan, von_neumann_entropy, BlockScan, DecayVerdict};
use crate::orderparam::{
    construct_diagonal, construct_offdiagonal, correlation_profile, detect_offdiagonal_pairs, extract_mode,
    reference_distance, CorrelationProfile, DiagonalOrder, ModeResult, OffDiagonalOrder, OrderOperator,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: DecayVerdict,
    pub description: String,
}

impl From<DecayVerdict> for Verdict {
    fn from(kind: DecayVerdict) -> Self {
        Self {
            kind,
            description: kind.describe().to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceBlocks {
    pub distance: usize,
    pub block_a: Vec<usize>,
    pub block_b: Vec<usize>,
    /// Eigenvalues of the block-`a` RDM, descending.
    pub spectrum: Vec<f64>,
    pub entropy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileWithMode {
    pub profile: CorrelationProfile,
    pub mode: ModeResult,
}

/// Everything the scheme produces for one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub n_sites: usize,
    pub thresholds: Thresholds,
    pub mi_scan: BlockScan,
    pub min_block: Option<usize>,
    pub verdict: Verdict,
    pub reference: Option<ReferenceBlocks>,
    pub diagonal: Option<DiagonalOrder>,
    /// Weight selection for more than two units maximizes the connected
    /// correlation between the reference blocks.
    pub diagonal_rule_note: Option<String>,
    pub offdiagonal: Option<OffDiagonalOrder>,
    pub correlations: Vec<ProfileWithMode>,
    pub order_found: bool,
}

impl Analysis {
    pub fn correlation(&self, label: &str) -> Option<&ProfileWithMode> {
        self.correlations.iter().find(|c| c.profile.label == label)
    }
}

/// Full report: analysis plus the inputs that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub descriptor: String,
    pub source: Source,
    pub lanczos_seed: u64,
    pub lanczos_tol: f64,
    pub ground_state: Option<GroundStateInfo>,
    pub analysis: Analysis,
}

fn profile_with_mode(state: &StateVector, op: &OrderOperator, distances: &[usize]) -> Result<ProfileWithMode> {
    let profile = correlation_profile(state, op, 0, distances)?;
    let mode = extract_mode(&profile.distances, &profile.connected)?;
    Ok(ProfileWithMode { profile, mode })
}

pub fn analyze(state: &StateVector, thresholds: &Thresholds) -> Result<Analysis> {
    let n = state.n_sites();
    let mi_scan = min_block_scan(state, thresholds.max_block, thresholds.mi_threshold)?;
    let min_block = mi_scan.min_block;
    let mut out = Analysis {
        n_sites: n,
        thresholds: *thresholds,
        verdict: mi_scan.decay().into(),
        mi_scan,
        min_block,
        reference: None,
        diagonal: None,
        diagonal_rule_note: None,
        offdiagonal: None,
        correlations: Vec::new(),
        order_found: false,
    };
    let Some(m) = min_block else {
        return Ok(out);
    };

    let r = reference_distance(n, m);
    let a = Block::contiguous(0, m, n)?;
    let b = Block::contiguous(r, m, n)?;
    let rho_a = partial_trace(state, &a)?;
    let rho_b = partial_trace(state, &b)?;
    let joint = joint_rdm(state, &a, &b)?;
    out.reference = Some(ReferenceBlocks {
        distance: r,
        block_a: a.sites().to_vec(),
        block_b: b.sites().to_vec(),
        spectrum: eigh(rho_a.matrix())?.values().to_vec(),
        entropy: von_neumann_entropy(&rho_a)?,
    });

    let distances = default_distances(n, m);
    let diagonal = construct_diagonal(&rho_a, &joint, thresholds.rank_eps)?;
    let mut diagonal_order = false;
    if let DiagonalOrder::Found { spec, operator } = &diagonal {
        if spec.rule == crate::orderparam::WeightRule::MaxCorrelation {
            out.diagonal_rule_note = Some(
                "more than two spectral groups: weights chosen to maximize the connected correlation at the reference distance"
                    .to_string(),
            );
        }
        diagonal_order = spec.admits_order;
        out.correlations.push(profile_with_mode(state, operator, &distances)?);
    }
    out.diagonal = Some(diagonal);

    let pairs = detect_offdiagonal_pairs(&rho_a, &rho_b, &joint, thresholds.offdiag_eps)?;
    let offdiagonal = construct_offdiagonal(&pairs, &rho_a, &joint)?;
    if let OffDiagonalOrder::Found { x, y, .. } = &offdiagonal {
        out.correlations.push(profile_with_mode(state, x, &distances)?);
        out.correlations.push(profile_with_mode(state, y, &distances)?);
    }
    let offdiagonal_order = matches!(offdiagonal, OffDiagonalOrder::Found { .. });
    out.offdiagonal = Some(offdiagonal);
    out.order_found = diagonal_order || offdiagonal_order;
    if !out.order_found {
        out.verdict = DecayVerdict::NoOrder.into();
    }
    Ok(out)
}
