//! Block–block mutual information, distance profiles, the minimum-block-size
//! scan and the overlap-probability matrix between joint and product
//! eigenbases.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hilbert::{joint_rdm, partial_trace, Block, DensityMatrix, StateVector, MAX_BLOCK_SITES};
use crate::linalg::{eigh, entropy_bits, C64};

/// MI (bits) above which a value counts as non-vanishing.
pub const DEFAULT_MI_THRESHOLD: f64 = 1e-3;

/// `MI(r_long) / MI(r_long/2)` at or above this is read as saturation.
pub const SATURATION_RATIO: f64 = 0.8;

pub fn von_neumann_entropy(rdm: &DensityMatrix) -> Result<f64> {
    entropy_bits(eigh(rdm.matrix())?.values())
}

/// `S(ρ_a) + S(ρ_b) − S(ρ_ab)` in bits.
pub fn mutual_information(state: &StateVector, a: &Block, b: &Block) -> Result<f64> {
    let joint = joint_rdm(state, a, b)?;
    let sa = von_neumann_entropy(&partial_trace(state, a)?)?;
    let sb = von_neumann_entropy(&partial_trace(state, b)?)?;
    Ok(sa + sb - von_neumann_entropy(&joint)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiVerdict {
    Vanishing,
    NonVanishing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MIProfile {
    pub block_size: usize,
    pub anchor: usize,
    pub distances: Vec<usize>,
    pub values: Vec<f64>,
    pub long_distance: usize,
    pub threshold: f64,
    pub verdict: MiVerdict,
}

impl MIProfile {
    pub fn at(&self, r: usize) -> Option<f64> {
        self.distances.iter().position(|&d| d == r).map(|k| self.values[k])
    }

    pub fn long_distance_value(&self) -> f64 {
        self.at(self.long_distance).unwrap_or(0.0)
    }
}

/// Consecutive distances starting at `m` (adjacent blocks) through `⌊N/2⌋`,
/// extended by one when that leaves an odd count and the blocks still fit.
pub fn default_distances(n_sites: usize, m: usize) -> Vec<usize> {
    let half = n_sites / 2;
    if m == 0 || m > half {
        return Vec::new();
    }
    let mut d: Vec<usize> = (m..=half).collect();
    if d.len() % 2 == 1 && half + 1 + m <= n_sites {
        d.push(half + 1);
    }
    d
}

fn check_fit(n: usize, m: usize, anchor: usize, r: usize) -> Result<()> {
    if r < m {
        return Err(invalid(format!("distance {r} makes blocks of size {m} overlap")));
    }
    if anchor + r + m > n {
        return Err(invalid(format!(
            "blocks of size {m} at {anchor} and {} do not fit on {n} sites",
            anchor + r
        )));
    }
    Ok(())
}

/// MI between `[anchor, anchor+m)` and `[anchor+r, anchor+r+m)` for each `r`.
pub fn mi_profile(
    state: &StateVector,
    m: usize,
    anchor: usize,
    distances: &[usize],
    threshold: f64,
) -> Result<MIProfile> {
    let n = state.n_sites();
    if m == 0 || 2 * m > MAX_BLOCK_SITES {
        return Err(Error::Capacity {
            what: "joint block sites",
            got: 2 * m,
            limit: MAX_BLOCK_SITES,
        });
    }
    if distances.is_empty() {
        return Err(invalid("no distances requested"));
    }
    let mut sorted = distances.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &r in &sorted {
        check_fit(n, m, anchor, r)?;
    }
    let a = Block::contiguous(anchor, m, n)?;
    let sa = von_neumann_entropy(&partial_trace(state, &a)?)?;
    let mut values = Vec::with_capacity(sorted.len());
    for &r in &sorted {
        let b = Block::contiguous(anchor + r, m, n)?;
        let sb = von_neumann_entropy(&partial_trace(state, &b)?)?;
        let sab = von_neumann_entropy(&joint_rdm(state, &a, &b)?)?;
        values.push(sa + sb - sab);
    }
    let half = n / 2;
    let long_distance = *sorted
        .iter()
        .min_by_key(|&&r| (r.abs_diff(half), std::cmp::Reverse(r)))
        .unwrap();
    let long = values[sorted.iter().position(|&r| r == long_distance).unwrap()];
    Ok(MIProfile {
        block_size: m,
        anchor,
        distances: sorted,
        values,
        long_distance,
        threshold,
        verdict: if long > threshold {
            MiVerdict::NonVanishing
        } else {
            MiVerdict::Vanishing
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayVerdict {
    /// MI saturates at long distance.
    LongRangeOrder,
    /// MI is non-vanishing but still decaying at the largest distance.
    LongRangeCorrelation,
    NoOrder,
}

impl DecayVerdict {
    pub fn describe(&self) -> &'static str {
        match self {
            Self::LongRangeOrder => "long-range order",
            Self::LongRangeCorrelation => "long-range correlation (algebraic decay)",
            Self::NoOrder => "no order",
        }
    }
}

/// Compares MI at the long distance with MI at roughly half that distance,
/// same parity.
pub fn classify_decay(profile: &MIProfile) -> DecayVerdict {
    if profile.verdict == MiVerdict::Vanishing {
        return DecayVerdict::NoOrder;
    }
    let long = profile.long_distance;
    let far = profile.long_distance_value();
    let near = profile
        .distances
        .iter()
        .zip(&profile.values)
        .filter(|(&r, _)| r < long && r % 2 == long % 2)
        .min_by_key(|(&r, _)| (2 * r).abs_diff(long))
        .map(|(_, &v)| v);
    match near {
        Some(near) if near > 0.0 && far / near < SATURATION_RATIO => DecayVerdict::LongRangeCorrelation,
        _ => DecayVerdict::LongRangeOrder,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockScan {
    pub threshold: f64,
    pub max_block: usize,
    /// One profile per block size `1..=max_block`.
    pub profiles: Vec<MIProfile>,
    pub min_block: Option<usize>,
}

impl BlockScan {
    pub fn profile(&self, m: usize) -> Option<&MIProfile> {
        self.profiles.iter().find(|p| p.block_size == m)
    }

    pub fn decay(&self) -> DecayVerdict {
        self.min_block
            .and_then(|m| self.profile(m))
            .map_or(DecayVerdict::NoOrder, classify_decay)
    }
}

/// Smallest block size whose MI at distance `⌊N/2⌋` exceeds `threshold`.
/// Profiles for every size up to `max_m` are kept for reporting.
pub fn min_block_scan(state: &StateVector, max_m: usize, threshold: f64) -> Result<BlockScan> {
    let n = state.n_sites();
    if max_m == 0 {
        return Err(invalid("maximum block size must be positive"));
    }
    if 2 * max_m > MAX_BLOCK_SITES {
        return Err(Error::Capacity {
            what: "joint block sites",
            got: 2 * max_m,
            limit: MAX_BLOCK_SITES,
        });
    }
    let mut profiles = Vec::new();
    for m in 1..=max_m {
        let distances = default_distances(n, m);
        if distances.is_empty() {
            break;
        }
        profiles.push(mi_profile(state, m, 0, &distances, threshold)?);
    }
    let min_block = profiles
        .iter()
        .find(|p| p.verdict == MiVerdict::NonVanishing)
        .map(|p| p.block_size);
    Ok(BlockScan {
        threshold,
        max_block: max_m,
        profiles,
        min_block,
    })
}

/// `P[(μ′ν′), b] = |⟨Φ_b | φ_μ′ ⊗ φ_ν′⟩|²`, rows in product order `μ′·d_b + ν′`,
/// columns over joint eigenvectors in descending eigenvalue order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PMatrix {
    pub dim_a: usize,
    pub dim_b: usize,
    pub data: Vec<f64>,
}

impl PMatrix {
    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim() + col]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data.chunks(self.dim()).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|c| (0..d).map(|r| self.get(r, c)).sum()).collect()
    }

    /// Every row has one entry within `tol` of 1.
    pub fn is_permutation(&self, tol: f64) -> bool {
        self.data
            .chunks(self.dim())
            .all(|r| r.iter().filter(|&&x| (x - 1.0).abs() <= tol).count() == 1)
    }
}

pub fn p_matrix(rdm_a: &DensityMatrix, rdm_b: &DensityMatrix, rdm_joint: &DensityMatrix) -> Result<PMatrix> {
    let (da, db) = (rdm_a.dim(), rdm_b.dim());
    if rdm_joint.dim() != da * db {
        return Err(invalid(format!(
            "joint dimension {} is not {da}·{db}",
            rdm_joint.dim()
        )));
    }
    let ea = eigh(rdm_a.matrix())?;
    let eb = eigh(rdm_b.matrix())?;
    let ej = eigh(rdm_joint.matrix())?;
    let d = da * db;
    let mut data = vec![0.0; d * d];
    for mu in 0..da {
        for nu in 0..db {
            let prod: Vec<C64> = ea
                .vector(mu)
                .iter()
                .flat_map(|x| eb.vector(nu).iter().map(move |y| x * y))
                .collect();
            let row = mu * db + nu;
            for col in 0..d {
                let amp: C64 = ej.vector(col).iter().zip(&prod).map(|(u, v)| u.conj() * v).sum();
                data[row * d + col] = amp.norm_sqr();
            }
        }
    }
    let p = PMatrix { dim_a: da, dim_b: db, data };
    let worst = p
        .row_sums()
        .into_iter()
        .chain(p.col_sums())
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max);
    if worst > 1e-10 {
        return Err(invalid(format!("overlap matrix is not doubly stochastic (defect {worst:e})")));
    }
    Ok(p)
}
