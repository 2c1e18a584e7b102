//! Spin-1/2 chain Hilbert space and reduced density matrices.
//!
//! Basis encoding: index `b ∈ [0, 2^N)`, bit `s` of `b` is the state of site
//! `s` (0 = ↑, 1 = ↓). Inside a block the local index is A-major: the first
//! site of the block is the most significant local bit, so a two-site block
//! has the local basis `{↑↑, ↑↓, ↓↑, ↓↓}` and `partial_trace(a ++ b)` equals
//! the layout produced by [`crate::linalg::kron`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{HermitianMatrix, C64, ZERO};

pub const MAX_SITES: usize = 24;
/// Largest block (or block pair) that can be reduced: 2^8 = 256 states.
pub const MAX_BLOCK_SITES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinBasis {
    n_sites: usize,
}

impl SpinBasis {
    pub fn new(n_sites: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(invalid("chain must have at least one site"));
        }
        if n_sites > MAX_SITES {
            return Err(Error::Capacity {
                what: "number of sites",
                got: n_sites,
                limit: MAX_SITES,
            });
        }
        Ok(Self { n_sites })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// `true` if `site` is ↓ in basis state `b`.
    #[inline]
    pub fn is_down(b: usize, site: usize) -> bool {
        (b >> site) & 1 == 1
    }
}

/// Normalized amplitude vector over the full `2^N` basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    basis: SpinBasis,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(n_sites: usize, amps: Vec<C64>) -> Result<Self> {
        let basis = SpinBasis::new(n_sites)?;
        if amps.len() != basis.dim() {
            return Err(invalid(format!(
                "expected {} amplitudes for {n_sites} sites, got {}",
                basis.dim(),
                amps.len()
            )));
        }
        let norm = norm_sqr(&amps);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(invalid(format!("state has squared norm {norm}, expected 1")));
        }
        Ok(Self { basis, amps })
    }

    /// Normalizes `amps`; fails on a zero vector.
    pub fn normalized(n_sites: usize, mut amps: Vec<C64>) -> Result<Self> {
        let norm = norm_sqr(&amps).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::new(n_sites, amps)
    }

    pub fn basis_state(n_sites: usize, index: usize) -> Result<Self> {
        let basis = SpinBasis::new(n_sites)?;
        if index >= basis.dim() {
            return Err(invalid(format!("basis index {index} out of range")));
        }
        let mut amps = vec![ZERO; basis.dim()];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(n_sites, amps)
    }

    /// Tensor product of single-site states, site 0 first.
    pub fn product(sites: &[[C64; 2]]) -> Result<Self> {
        let n = sites.len();
        let dim = SpinBasis::new(n)?.dim();
        let amps = (0..dim)
            .map(|b| {
                sites
                    .iter()
                    .enumerate()
                    .map(|(s, local)| local[(b >> s) & 1])
                    .product()
            })
            .collect();
        Self::normalized(n, amps)
    }

    pub fn n_sites(&self) -> usize {
        self.basis.n_sites()
    }

    pub fn basis(&self) -> SpinBasis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &[C64]) -> C64 {
        self.amps.iter().zip(other).map(|(a, b)| a.conj() * b).sum()
    }
}

pub(crate) fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Ordered set of distinct sites.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    sites: Vec<usize>,
}

impl Block {
    pub fn new(sites: Vec<usize>, n_sites: usize) -> Result<Self> {
        if sites.is_empty() {
            return Err(invalid("block must contain at least one site"));
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(format!("block sites {sites:?} must be strictly increasing")));
        }
        if let Some(&s) = sites.iter().find(|&&s| s >= n_sites) {
            return Err(invalid(format!("site {s} outside a chain of {n_sites} sites")));
        }
        Ok(Self { sites })
    }

    /// `len` adjacent sites starting at `start`.
    pub fn contiguous(start: usize, len: usize, n_sites: usize) -> Result<Self> {
        Self::new((start..start + len).collect(), n_sites)
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn local_dim(&self) -> usize {
        1 << self.sites.len()
    }

    pub fn overlaps(&self, other: &Block) -> bool {
        self.sites.iter().any(|s| other.sites.contains(s))
    }
}

/// Reduced density matrix together with the sites it describes.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    sites: Vec<usize>,
}

impl DensityMatrix {
    /// Checks trace 1 and positivity.
    pub fn new(matrix: HermitianMatrix, sites: Vec<usize>) -> Result<Self> {
        if matrix.dim() != 1 << sites.len() {
            return Err(invalid("density matrix dimension does not match its site list"));
        }
        let tr = matrix.trace();
        if (tr - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("density matrix has trace {tr}")));
        }
        let eig = crate::linalg::eigh(&matrix)?;
        if let Some(&min) = eig.values().last() {
            if min < -1e-12 {
                return Err(invalid(format!("density matrix has eigenvalue {min:e}")));
            }
        }
        Ok(Self { matrix, sites })
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Offsets of each local configuration of `sites` inside a global index.
fn local_offsets(sites: &[usize]) -> Vec<usize> {
    let m = sites.len();
    (0..1usize << m)
        .map(|l| {
            sites
                .iter()
                .enumerate()
                .filter(|&(k, _)| (l >> (m - 1 - k)) & 1 == 1)
                .map(|(_, &s)| 1usize << s)
                .sum()
        })
        .collect()
}

/// Reduces onto an arbitrary ordered list of distinct sites.
fn reduce(state: &StateVector, sites: &[usize]) -> Result<HermitianMatrix> {
    let m = sites.len();
    if m > MAX_BLOCK_SITES {
        return Err(Error::Capacity {
            what: "reduced block size (sites)",
            got: m,
            limit: MAX_BLOCK_SITES,
        });
    }
    let d = 1usize << m;
    let mask: usize = sites.iter().map(|&s| 1usize << s).sum();
    let offsets = local_offsets(sites);
    let amps = state.amplitudes();

    let mut rho = vec![ZERO; d * d];
    let mut buf = vec![ZERO; d];
    for base in (0..amps.len()).filter(|b| b & mask == 0) {
        let mut any = false;
        for (slot, &off) in buf.iter_mut().zip(&offsets) {
            *slot = amps[base | off];
            any |= *slot != ZERO;
        }
        if !any {
            continue;
        }
        for i in 0..d {
            let bi = buf[i];
            if bi == ZERO {
                continue;
            }
            let row = &mut rho[i * d..(i + 1) * d];
            for (r, bj) in row.iter_mut().zip(&buf) {
                *r += bi * bj.conj();
            }
        }
    }
    Ok(HermitianMatrix::symmetrized(d, rho))
}

/// `ρ_A = tr_{Ā} |Ψ⟩⟨Ψ|` in the block's local basis.
pub fn partial_trace(state: &StateVector, block: &Block) -> Result<DensityMatrix> {
    check_block(state, block)?;
    let matrix = reduce(state, block.sites())?;
    Ok(DensityMatrix {
        matrix,
        sites: block.sites().to_vec(),
    })
}

/// `ρ_{A∪B}` with A-major local ordering.
pub fn joint_rdm(state: &StateVector, a: &Block, b: &Block) -> Result<DensityMatrix> {
    check_block(state, a)?;
    check_block(state, b)?;
    if a.overlaps(b) {
        return Err(invalid(format!(
            "blocks {:?} and {:?} overlap",
            a.sites(),
            b.sites()
        )));
    }
    let sites: Vec<usize> = a.sites().iter().chain(b.sites()).copied().collect();
    let matrix = reduce(state, &sites)?;
    Ok(DensityMatrix { matrix, sites })
}

/// Embeds `op` on the block's sites (identity elsewhere) and applies it.
/// The result is not normalized.
pub fn apply_local_operator(state: &StateVector, op: &HermitianMatrix, block: &Block) -> Result<Vec<C64>> {
    apply_local_to_amplitudes(state.amplitudes(), state.n_sites(), op, block)
}

pub fn apply_local_to_amplitudes(
    amps: &[C64],
    n_sites: usize,
    op: &HermitianMatrix,
    block: &Block,
) -> Result<Vec<C64>> {
    if op.dim() != block.local_dim() {
        return Err(invalid(format!(
            "operator dimension {} does not match block of {} sites",
            op.dim(),
            block.len()
        )));
    }
    if amps.len() != 1 << n_sites || block.sites().iter().any(|&s| s >= n_sites) {
        return Err(invalid("block does not fit the state"));
    }
    let d = op.dim();
    let mask: usize = block.sites().iter().map(|&s| 1usize << s).sum();
    let offsets = local_offsets(block.sites());
    let mut out = vec![ZERO; amps.len()];
    let mut buf = vec![ZERO; d];
    for base in (0..amps.len()).filter(|b| b & mask == 0) {
        for (slot, &off) in buf.iter_mut().zip(&offsets) {
            *slot = amps[base | off];
        }
        for (i, &off) in offsets.iter().enumerate() {
            out[base | off] = (0..d).map(|j| op.get(i, j) * buf[j]).sum();
        }
    }
    Ok(out)
}

/// `⟨Ψ|O_A O_B|Ψ⟩` evaluated on the full state.
pub fn two_point_full(
    state: &StateVector,
    op_a: &HermitianMatrix,
    a: &Block,
    op_b: &HermitianMatrix,
    b: &Block,
) -> Result<f64> {
    let n = state.n_sites();
    let ob = apply_local_operator(state, op_b, b)?;
    let oab = apply_local_to_amplitudes(&ob, n, op_a, a)?;
    Ok(state.overlap(&oab).re)
}

/// `⟨Ψ|O_A|Ψ⟩` evaluated on the full state.
pub fn one_point_full(state: &StateVector, op: &HermitianMatrix, block: &Block) -> Result<f64> {
    let o = apply_local_operator(state, op, block)?;
    Ok(state.overlap(&o).re)
}

fn check_block(state: &StateVector, block: &Block) -> Result<()> {
    if let Some(&s) = block.sites().iter().find(|&&s| s >= state.n_sites()) {
        return Err(invalid(format!(
            "site {s} outside a chain of {} sites",
            state.n_sites()
        )));
    }
    if block.len() > MAX_BLOCK_SITES {
        return Err(Error::Capacity {
            what: "block size (sites)",
            got: block.len(),
            limit: MAX_BLOCK_SITES,
        });
    }
    Ok(())
}
