//! Order operators built from entanglement spectra: diagonal operators from
//! the eigenvalues of a block RDM, off-diagonal operators from coherences of
//! the joint RDM, connected correlation profiles and their dominant mode.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hilbert::{
    joint_rdm, one_point_full, partial_trace, two_point_full, Block, DensityMatrix, StateVector,
};
use crate::linalg::{degenerate_groups, eigh, expectation, kron, EigenDecomposition, HermitianMatrix, C64, ZERO};
use crate::mi::p_matrix;

pub const DEFAULT_RANK_EPS: f64 = 1e-10;
pub const DEFAULT_OFFDIAG_EPS: f64 = 1e-8;

/// Connected correlations at or below this count as zero.
const CORRELATION_FLOOR: f64 = 1e-10;

pub fn rank_of(rdm: &DensityMatrix, eps: f64) -> Result<usize> {
    Ok(eigh(rdm.matrix())?.values().iter().filter(|&&p| p > eps).count())
}

/// A Hermitian operator on one block, in the block's computational basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderOperator {
    pub label: String,
    pub block_size: usize,
    pub matrix: HermitianMatrix,
}

impl OrderOperator {
    pub fn new(label: impl Into<String>, matrix: HermitianMatrix) -> Result<Self> {
        let dim = matrix.dim();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(invalid(format!("operator dimension {dim} is not 2^m with m ≥ 1")));
        }
        Ok(Self {
            label: label.into(),
            block_size: dim.trailing_zeros() as usize,
            matrix,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    /// Two units: the traceless condition fixes the weights up to scale.
    TwoUnits,
    /// More units: the traceless direction of largest connected correlation.
    MaxCorrelation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalOrderSpec {
    pub rank: usize,
    /// All eigenvalues of the block RDM, descending.
    pub spectrum: Vec<f64>,
    /// Units sharing one weight, as index lists into the support modes.
    pub groups: Vec<Vec<usize>>,
    /// True when the whole support was one degenerate group and was split
    /// into individual eigenvectors.
    pub split_degenerate: bool,
    /// One weight per support mode, normalized to `max |w| = 1`.
    pub weights: Vec<f64>,
    pub rule: WeightRule,
    /// Connected correlation of the operator between the two blocks used for
    /// construction.
    pub reference_correlation: f64,
    pub admits_order: bool,
}

impl DiagonalOrderSpec {
    /// Factor that sets the weight of the most probable mode to −1.
    pub fn unit_leading_factor(&self) -> f64 {
        -1.0 / self.weights[0]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiagonalOrder {
    /// Rank-1 block: the block is uncorrelated with everything else.
    NoOrder { rank: usize },
    Found {
        spec: DiagonalOrderSpec,
        operator: OrderOperator,
    },
}

/// Product of two block vectors, index `μ·d_b + ν`.
fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// `⟨φ_μ φ_ν|ρ_ab|φ_μ φ_ν⟩` for every pair, with the same basis on both blocks.
fn product_diagonal(basis: &[Vec<C64>], joint: &HermitianMatrix) -> Vec<Vec<f64>> {
    basis
        .iter()
        .map(|u| {
            basis
                .iter()
                .map(|v| {
                    let w = kron_vec(u, v);
                    joint.matrix_element(&w, &w).re
                })
                .collect()
        })
        .collect()
}

/// Diagonal order operator `O = Σ_μ w_μ |φ_μ⟩⟨φ_μ|` over the support of `ρ_i`.
///
/// `rdm_joint` is the joint RDM of block `i` and a second block of the same
/// size; its diagonal in the eigenbasis of `ρ_i` fixes the weights when the
/// spectrum has more than two distinct values.
pub fn construct_diagonal(rdm_i: &DensityMatrix, rdm_joint: &DensityMatrix, eps: f64) -> Result<DiagonalOrder> {
    let d = rdm_i.dim();
    if rdm_joint.dim() != d * d {
        return Err(invalid(format!(
            "joint dimension {} is not {d}²",
            rdm_joint.dim()
        )));
    }
    let eig = eigh(rdm_i.matrix())?;
    let spectrum = eig.values().to_vec();
    let rank = spectrum.iter().filter(|&&p| p > eps).count();
    if rank < 2 {
        return Ok(DiagonalOrder::NoOrder { rank });
    }
    let support: Vec<Vec<C64>> = eig.vectors()[..rank].to_vec();
    let p = &spectrum[..rank];

    let ranges = degenerate_groups(p);
    let split_degenerate = ranges.len() == 1;
    let groups: Vec<Vec<usize>> = if split_degenerate {
        (0..rank).map(|k| vec![k]).collect()
    } else {
        ranges.iter().map(|r| r.clone().collect()).collect()
    };

    let q_full = product_diagonal(eig.vectors(), rdm_joint.matrix());
    let p_j: Vec<f64> = (0..d).map(|nu| (0..d).map(|mu| q_full[mu][nu]).sum()).collect();
    let units = groups.len();
    let mass: Vec<f64> = groups.iter().map(|g| g.iter().map(|&k| p[k]).sum()).collect();
    let mut c = vec![vec![0.0; units]; units];
    for (a, ga) in groups.iter().enumerate() {
        for (b, gb) in groups.iter().enumerate() {
            c[a][b] = ga
                .iter()
                .flat_map(|&mu| gb.iter().map(move |&nu| (mu, nu)))
                .map(|(mu, nu)| q_full[mu][nu] - p[mu] * p_j[nu])
                .sum();
        }
    }

    let (mut unit_w, rule) = if units == 2 {
        (vec![mass[1], -mass[0]], WeightRule::TwoUnits)
    } else {
        (max_correlation_weights(&c, &mass, &groups)?, WeightRule::MaxCorrelation)
    };

    let scale = unit_w.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    unit_w.iter_mut().for_each(|w| *w /= scale);
    // Sign: the most probable unit negative, or the first mode positive when
    // a degenerate spectrum was split.
    let lead = unit_w.iter().copied().find(|w| w.abs() > 1e-12).unwrap_or(1.0);
    let flip = if split_degenerate { lead < 0.0 } else { lead > 0.0 };
    if flip {
        unit_w.iter_mut().for_each(|w| *w = -*w);
    }

    let mut weights = vec![0.0; rank];
    for (g, w) in groups.iter().zip(&unit_w) {
        for &k in g {
            weights[k] = *w;
        }
    }
    let reference_correlation: f64 = (0..units)
        .flat_map(|a| (0..units).map(move |b| (a, b)))
        .map(|(a, b)| unit_w[a] * unit_w[b] * c[a][b])
        .sum();

    let matrix = HermitianMatrix::from_spectral(&weights, &support);
    let operator = OrderOperator::new("diagonal", matrix)?;
    Ok(DiagonalOrder::Found {
        spec: DiagonalOrderSpec {
            rank,
            spectrum,
            groups,
            split_degenerate,
            weights,
            rule,
            reference_correlation,
            admits_order: reference_correlation.abs() > CORRELATION_FLOOR,
        },
        operator,
    })
}

/// Unit weights `W` maximizing `|WᵀCW| / WᵀGW` subject to `Σ W_a P_a = 0`,
/// with `G` the unit sizes.
fn max_correlation_weights(c: &[Vec<f64>], mass: &[f64], groups: &[Vec<usize>]) -> Result<Vec<f64>> {
    let n = mass.len();
    let g: Vec<f64> = groups.iter().map(|x| (x.len() as f64).sqrt()).collect();
    let pc: Vec<f64> = mass.iter().zip(&g).map(|(m, s)| m / s).collect();
    let pn: f64 = pc.iter().map(|x| x * x).sum();
    let project = |v: &mut Vec<f64>| {
        let t: f64 = v.iter().zip(&pc).map(|(a, b)| a * b).sum::<f64>() / pn;
        v.iter_mut().zip(&pc).for_each(|(a, b)| *a -= t * b);
    };
    let mut qcq = vec![vec![0.0; n]; n];
    for (a, row) in qcq.iter_mut().enumerate() {
        for (b, x) in row.iter_mut().enumerate() {
            *x = 0.5 * (c[a][b] + c[b][a]) / (g[a] * g[b]);
        }
    }
    // Q C' Q, applied column by column then row by row.
    for b in 0..n {
        let mut col: Vec<f64> = (0..n).map(|a| qcq[a][b]).collect();
        project(&mut col);
        (0..n).for_each(|a| qcq[a][b] = col[a]);
    }
    for row in qcq.iter_mut() {
        project(row);
    }
    let eig: EigenDecomposition = eigh(&HermitianMatrix::from_real_rows(&qcq)?)?;
    let vals = eig.values();
    let top = vals[0].abs().max(vals[n - 1].abs());
    let mut v = if top <= CORRELATION_FLOOR {
        // Nothing correlates; fall back to the most probable unit against the rest.
        let mut w = vec![mass[0]; n];
        w[0] = -(1.0 - mass[0]);
        return Ok(w);
    } else {
        let k = if vals[0].abs() >= vals[n - 1].abs() - 1e-12 * top { 0 } else { n - 1 };
        eig.vector(k).iter().map(|z| z.re).collect::<Vec<f64>>()
    };
    project(&mut v);
    Ok(v.iter().zip(&g).map(|(x, s)| x / s).collect())
}

/// A coherence of the joint RDM between modes `μ` and `ν` of the block basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffDiagonalPair {
    pub mu: usize,
    pub nu: usize,
    /// `⟨φ_μ φ_μ|ρ|φ_ν φ_ν⟩`
    pub double_flip: C64,
    /// `⟨φ_μ φ_ν|ρ|φ_ν φ_μ⟩`
    pub exchange: C64,
}

/// Pairs `μ < ν` for which either coherence exceeds `eps` in modulus, with
/// elements taken in the product of the two block eigenbases.
pub fn detect_offdiagonal_pairs(
    rdm_a: &DensityMatrix,
    rdm_b: &DensityMatrix,
    rdm_joint: &DensityMatrix,
    eps: f64,
) -> Result<Vec<OffDiagonalPair>> {
    let d = rdm_a.dim();
    if rdm_b.dim() != d || rdm_joint.dim() != d * d {
        return Err(invalid("blocks must have equal size and match the joint RDM"));
    }
    let ea = eigh(rdm_a.matrix())?;
    let eb = eigh(rdm_b.matrix())?;
    let joint = rdm_joint.matrix();
    let mut pairs = Vec::new();
    for mu in 0..d {
        for nu in mu + 1..d {
            let double_flip = joint.matrix_element(
                &kron_vec(ea.vector(mu), eb.vector(mu)),
                &kron_vec(ea.vector(nu), eb.vector(nu)),
            );
            let exchange = joint.matrix_element(
                &kron_vec(ea.vector(mu), eb.vector(nu)),
                &kron_vec(ea.vector(nu), eb.vector(mu)),
            );
            if double_flip.norm() > eps || exchange.norm() > eps {
                pairs.push(OffDiagonalPair {
                    mu,
                    nu,
                    double_flip,
                    exchange,
                });
            }
        }
    }
    Ok(pairs)
}

/// `Σ_pairs w |φ_μ⟩⟨φ_ν| + w* |φ_ν⟩⟨φ_μ|` with `φ` the eigenbasis of `rdm_a`.
pub fn offdiagonal_operator(pairs: &[OffDiagonalPair], weight: C64, rdm_a: &DensityMatrix) -> Result<HermitianMatrix> {
    if pairs.is_empty() {
        return Err(invalid("no off-diagonal pairs"));
    }
    let eig = eigh(rdm_a.matrix())?;
    let d = rdm_a.dim();
    let mut data = vec![ZERO; d * d];
    for pair in pairs {
        let (u, v) = (eig.vector(pair.mu), eig.vector(pair.nu));
        for r in 0..d {
            for s in 0..d {
                data[r * d + s] += weight * u[r] * v[s].conj() + weight.conj() * v[r] * u[s].conj();
            }
        }
    }
    HermitianMatrix::new(d, data)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffDiagonalOrderSpec {
    pub pairs: Vec<OffDiagonalPair>,
    /// `⟨OˣOˣ⟩`, `⟨OʸOʸ⟩`, `⟨OˣOʸ⟩` between the construction blocks.
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OffDiagonalOrder {
    NoOrder,
    Found {
        spec: OffDiagonalOrderSpec,
        /// Weight 1 on every pair.
        x: OrderOperator,
        /// Weight −i on every pair; `σʸ` for the pair ⟨0,1⟩ of a spin.
        y: OrderOperator,
    },
}

/// Two-point value `tr(ρ_ab · A⊗B)`.
pub fn two_point(joint: &DensityMatrix, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    expectation(&kron(a, b), joint.matrix())
}

/// `tr(ρ_ab · (A⊗B + B⊗A)/2)`: the symmetrized product, real for any pair of
/// Hermitian operators.
fn sym_two_point(joint: &DensityMatrix, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    let ab = two_point_raw(joint, a, b);
    let ba = two_point_raw(joint, b, a);
    Ok(0.5 * (ab + ba).re)
}

fn two_point_raw(joint: &DensityMatrix, a: &HermitianMatrix, b: &HermitianMatrix) -> C64 {
    let (da, db) = (a.dim(), b.dim());
    let d = da * db;
    let rho = joint.matrix();
    let mut acc = ZERO;
    // tr(ρ (A⊗B)) = Σ ρ[(r s),(r' s')] A[r' r] B[s' s]
    for r in 0..da {
        for s in 0..db {
            for r2 in 0..da {
                for s2 in 0..db {
                    acc += rho.get(r * db + s, r2 * db + s2) * a.get(r2, r) * b.get(s2, s);
                }
            }
        }
    }
    debug_assert_eq!(d, rho.dim());
    acc
}

pub fn construct_offdiagonal(
    pairs: &[OffDiagonalPair],
    rdm_a: &DensityMatrix,
    rdm_joint: &DensityMatrix,
) -> Result<OffDiagonalOrder> {
    if pairs.is_empty() {
        return Ok(OffDiagonalOrder::NoOrder);
    }
    let x = offdiagonal_operator(pairs, C64::new(1.0, 0.0), rdm_a)?;
    let y = offdiagonal_operator(pairs, C64::new(0.0, -1.0), rdm_a)?;
    let spec = OffDiagonalOrderSpec {
        pairs: pairs.to_vec(),
        xx: two_point(rdm_joint, &x, &x)?,
        yy: two_point(rdm_joint, &y, &y)?,
        xy: sym_two_point(rdm_joint, &x, &y)?,
    };
    Ok(OffDiagonalOrder::Found {
        spec,
        x: OrderOperator::new("offdiagonal_x", x)?,
        y: OrderOperator::new("offdiagonal_y", y)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationProfile {
    pub label: String,
    pub block_size: usize,
    pub anchor: usize,
    pub distances: Vec<usize>,
    /// `⟨O_i O_{i+r}⟩ − ⟨O_i⟩⟨O_{i+r}⟩` from the joint RDM.
    pub connected: Vec<f64>,
    /// `⟨O_i O_{i+r}⟩`
    pub full: Vec<f64>,
    pub mean_anchor: f64,
    pub mean_partner: Vec<f64>,
    /// Connected correlation applying the operators to the full state.
    pub connected_full_state: Vec<f64>,
    /// `Σ O_μμ O_νν ⟨φ_μ ψ_ν|ρ|φ_μ ψ_ν⟩` through the overlap matrix; equals
    /// `full` when the operator is diagonal in both block eigenbases.
    pub p_contraction_joint: Vec<f64>,
    /// `Σ O_μμ O_νν p_μ p_ν`
    pub p_contraction_product: Vec<f64>,
    /// The operator is diagonal in both block eigenbases at every distance.
    pub p_contraction_exact: Vec<bool>,
}

fn diag_in(op: &HermitianMatrix, eig: &EigenDecomposition) -> (Vec<f64>, bool) {
    let rotated = op
        .in_basis(eig.vectors())
        .expect("eigenbasis matches operator dimension");
    let d = rotated.dim();
    let off = (0..d)
        .flat_map(|r| (0..d).map(move |s| (r, s)))
        .filter(|(r, s)| r != s)
        .map(|(r, s)| rotated.get(r, s).norm())
        .fold(0.0, f64::max);
    (rotated.diagonal(), off <= 1e-10)
}

pub fn correlation_profile(
    state: &StateVector,
    op: &OrderOperator,
    anchor: usize,
    distances: &[usize],
) -> Result<CorrelationProfile> {
    let n = state.n_sites();
    let m = op.block_size;
    let o = &op.matrix;
    let mut rs = distances.to_vec();
    rs.sort_unstable();
    rs.dedup();
    if rs.is_empty() {
        return Err(invalid("no distances requested"));
    }
    for &r in &rs {
        if r < m || anchor + r + m > n {
            return Err(invalid(format!(
                "blocks of size {m} at {anchor} and {} do not fit without overlap on {n} sites",
                anchor + r
            )));
        }
    }
    let a = Block::contiguous(anchor, m, n)?;
    let rho_a = partial_trace(state, &a)?;
    let mean_anchor = expectation(o, rho_a.matrix())?;
    let eig_a = eigh(rho_a.matrix())?;
    let (diag_a, exact_a) = diag_in(o, &eig_a);
    let full_anchor = one_point_full(state, o, &a)?;

    let mut out = CorrelationProfile {
        label: op.label.clone(),
        block_size: m,
        anchor,
        distances: rs.clone(),
        connected: Vec::new(),
        full: Vec::new(),
        mean_anchor,
        mean_partner: Vec::new(),
        connected_full_state: Vec::new(),
        p_contraction_joint: Vec::new(),
        p_contraction_product: Vec::new(),
        p_contraction_exact: Vec::new(),
    };
    for &r in &rs {
        let b = Block::contiguous(anchor + r, m, n)?;
        let rho_b = partial_trace(state, &b)?;
        let joint = joint_rdm(state, &a, &b)?;
        let full = two_point(&joint, o, o)?;
        let mean_b = expectation(o, rho_b.matrix())?;
        out.full.push(full);
        out.mean_partner.push(mean_b);
        out.connected.push(full - mean_anchor * mean_b);

        let via_state = two_point_full(state, o, &a, o, &b)? - full_anchor * one_point_full(state, o, &b)?;
        out.connected_full_state.push(via_state);

        let eig_b = eigh(rho_b.matrix())?;
        let (diag_b, exact_b) = diag_in(o, &eig_b);
        let pm = p_matrix(&rho_a, &rho_b, &joint)?;
        let eig_j = eigh(joint.matrix())?;
        let q = eig_j.values();
        let db = diag_b.len();
        let mut via_joint = 0.0;
        let mut via_product = 0.0;
        for (mu, wa) in diag_a.iter().enumerate() {
            for (nu, wb) in diag_b.iter().enumerate() {
                let row = mu * db + nu;
                let q_row: f64 = (0..pm.dim()).map(|c| pm.get(row, c) * q[c]).sum();
                via_joint += wa * wb * q_row;
                via_product += wa * wb * eig_a.values()[mu] * eig_b.values()[nu];
            }
        }
        out.p_contraction_joint.push(via_joint);
        out.p_contraction_product.push(via_product);
        out.p_contraction_exact.push(exact_a && exact_b);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    /// `None` for an all-zero profile.
    pub k: Option<f64>,
    /// `2π/k`; `None` when `k` is zero or absent.
    pub wavelength: Option<f64>,
    pub momenta: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

/// Dominant momentum of `C(r)` on the grid `2πm′/R`, folded into `[0, π]`.
pub fn extract_mode(distances: &[usize], values: &[f64]) -> Result<ModeResult> {
    let len = values.len();
    if distances.len() != len {
        return Err(invalid("distances and values differ in length"));
    }
    if len < 4 {
        return Err(invalid(format!("mode extraction needs at least 4 points, got {len}")));
    }
    if distances.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(invalid("mode extraction needs consecutive distances"));
    }
    let momenta: Vec<f64> = (0..=len / 2).map(|m| 2.0 * PI * m as f64 / len as f64).collect();
    let magnitudes: Vec<f64> = momenta
        .iter()
        .map(|&k| {
            distances
                .iter()
                .zip(values)
                .map(|(&r, &c)| C64::from_polar(c, -k * r as f64))
                .sum::<C64>()
                .norm()
        })
        .collect();
    let peak = magnitudes.iter().fold(0.0f64, |m, &x| m.max(x));
    let scale = values.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if scale <= 1e-14 {
        return Ok(ModeResult {
            k: None,
            wavelength: None,
            momenta,
            magnitudes,
        });
    }
    let idx = magnitudes
        .iter()
        .position(|&x| x >= peak - 1e-12 * peak)
        .unwrap();
    let k = momenta[idx];
    Ok(ModeResult {
        k: Some(k),
        wavelength: (k > 0.0).then(|| 2.0 * PI / k),
        momenta,
        magnitudes,
    })
}

/// `⌊N/2⌋`, lowered to even when the block size is even.
pub fn reference_distance(n_sites: usize, m: usize) -> usize {
    let r = n_sites / 2;
    if m.is_multiple_of(2) && r % 2 == 1 {
        r - 1
    } else {
        r
    }
}
