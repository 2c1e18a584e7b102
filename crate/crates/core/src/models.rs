//! Spin-chain Hamiltonians, a matrix-free Lanczos ground-state solver and the
//! analytic reference states (GHZ, Néel-GHZ, valence-bond dimer).
//!
//! Hamiltonians use spin operators `S = σ/2`:
//! `H = Σ_bonds Jx SˣSˣ + Jy SʸSʸ + Jz SᶻSᶻ`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hilbert::{SpinBasis, StateVector, MAX_SITES};
use crate::linalg::{C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 5]", into = "[f64; 5]")]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl From<[f64; 5]> for Bond {
    fn from(b: [f64; 5]) -> Self {
        Bond {
            i: b[0] as usize,
            j: b[1] as usize,
            jx: b[2],
            jy: b[3],
            jz: b[4],
        }
    }
}

impl From<Bond> for [f64; 5] {
    fn from(b: Bond) -> Self {
        [b.i as f64, b.j as f64, b.jx, b.jy, b.jz]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

/// `{"n_sites": N, "bonds": [[i, j, Jx, Jy, Jz], ...], "boundary": "periodic"}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinChainModel {
    pub n_sites: usize,
    pub bonds: Vec<Bond>,
    pub boundary: Boundary,
}

impl SpinChainModel {
    pub fn new(n_sites: usize, bonds: Vec<Bond>, boundary: Boundary) -> Result<Self> {
        let model = Self {
            n_sites,
            bonds,
            boundary,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        SpinBasis::new(self.n_sites)?;
        for b in &self.bonds {
            if b.i >= self.n_sites || b.j >= self.n_sites || b.i == b.j {
                return Err(invalid(format!(
                    "bond ({}, {}) is not a pair of distinct sites in 0..{}",
                    b.i, b.j, self.n_sites
                )));
            }
            if ![b.jx, b.jy, b.jz].iter().all(|x| x.is_finite()) {
                return Err(invalid("bond couplings must be finite"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    /// Bonds `(s, s + range)` with uniform couplings; wraps on a ring.
    fn uniform(n: usize, range: usize, j: (f64, f64, f64), boundary: Boundary) -> Vec<Bond> {
        let last = match boundary {
            Boundary::Periodic => n,
            Boundary::Open => n.saturating_sub(range),
        };
        (0..last)
            .map(|s| Bond {
                i: s,
                j: (s + range) % n,
                jx: j.0,
                jy: j.1,
                jz: j.2,
            })
            .collect()
    }

    pub fn heisenberg(n: usize, boundary: Boundary) -> Result<Self> {
        Self::xxz(n, 1.0, boundary)
    }

    pub fn xxz(n: usize, delta: f64, boundary: Boundary) -> Result<Self> {
        if n < 2 {
            return Err(invalid("a chain needs at least two sites"));
        }
        let mut bonds = Self::uniform(n, 1, (1.0, 1.0, delta), boundary);
        if n == 2 && boundary == Boundary::Periodic {
            bonds.truncate(1);
        }
        Self::new(n, bonds, boundary)
    }

    /// Nearest-neighbour J₁ = 1 plus next-nearest J₂ = 1/2.
    pub fn majumdar_ghosh(n: usize, boundary: Boundary) -> Result<Self> {
        if n < 4 {
            return Err(invalid("Majumdar-Ghosh chain needs at least four sites"));
        }
        let mut bonds = Self::uniform(n, 1, (1.0, 1.0, 1.0), boundary);
        bonds.extend(Self::uniform(n, 2, (0.5, 0.5, 0.5), boundary));
        Self::new(n, bonds, boundary)
    }

    pub fn from_preset(preset: &ModelPreset, n: usize, boundary: Boundary) -> Result<Self> {
        match *preset {
            ModelPreset::Heisenberg => Self::heisenberg(n, boundary),
            ModelPreset::Xxz(delta) => Self::xxz(n, delta, boundary),
            ModelPreset::MajumdarGhosh => Self::majumdar_ghosh(n, boundary),
        }
    }

    /// All bonds have Jx = Jy, so total Sᶻ is conserved.
    pub fn conserves_sz(&self) -> bool {
        self.bonds.iter().all(|b| b.jx == b.jy)
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }
}

/// Named Hamiltonians: `heisenberg`, `xxz(Δ)` (also `xxz:Δ`), `majumdar_ghosh`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelPreset {
    Heisenberg,
    Xxz(f64),
    MajumdarGhosh,
}

impl FromStr for ModelPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "heisenberg" => return Ok(Self::Heisenberg),
            "majumdar_ghosh" | "majumdar-ghosh" | "mg" => return Ok(Self::MajumdarGhosh),
            _ => {}
        }
        let arg = s
            .strip_prefix("xxz(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("xxz:"));
        match arg.map(str::parse::<f64>) {
            Some(Ok(delta)) if delta.is_finite() => Ok(Self::Xxz(delta)),
            _ => Err(invalid(format!(
                "unknown model `{s}` (expected heisenberg, xxz(Δ) or majumdar_ghosh)"
            ))),
        }
    }
}

impl fmt::Display for ModelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Heisenberg => write!(f, "heisenberg"),
            Self::Xxz(d) => write!(f, "xxz({d})"),
            Self::MajumdarGhosh => write!(f, "majumdar_ghosh"),
        }
    }
}

/// Amplitude of `Jx SˣSˣ + Jy SʸSʸ` between a configuration and its
/// two-spin-flipped partner.
#[inline]
fn flip_amplitude(b: &Bond, aligned: bool) -> f64 {
    if aligned {
        0.25 * (b.jx - b.jy)
    } else {
        0.25 * (b.jx + b.jy)
    }
}

/// `H|v⟩` on the full `2^N` space.
pub fn apply_hamiltonian(model: &SpinChainModel, v: &[C64]) -> Result<Vec<C64>> {
    if v.len() != model.dim() {
        return Err(invalid(format!(
            "vector length {} does not match 2^{}",
            v.len(),
            model.n_sites
        )));
    }
    let mut out = vec![ZERO; v.len()];
    for (b, slot) in out.iter_mut().enumerate() {
        let mut acc = ZERO;
        for bond in &model.bonds {
            let aligned = ((b >> bond.i) ^ (b >> bond.j)) & 1 == 0;
            let zz = if aligned { 0.25 } else { -0.25 };
            acc += v[b] * (bond.jz * zz);
            let amp = flip_amplitude(bond, aligned);
            if amp != 0.0 {
                acc += v[b ^ ((1 << bond.i) | (1 << bond.j))] * amp;
            }
        }
        *slot = acc;
    }
    Ok(out)
}

/// Configurations with a fixed number of ↓ spins, in ascending index order.
#[derive(Clone, Debug)]
pub struct SzSector {
    n_sites: usize,
    n_down: usize,
    states: Vec<usize>,
    binom: Vec<Vec<usize>>,
}

impl SzSector {
    pub fn new(n_sites: usize, n_down: usize) -> Result<Self> {
        SpinBasis::new(n_sites)?;
        if n_down > n_sites {
            return Err(invalid("more down spins than sites"));
        }
        let mut binom = vec![vec![0usize; n_sites + 2]; n_sites + 1];
        for n in 0..=n_sites {
            binom[n][0] = 1;
            for k in 1..=n {
                binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0 };
            }
        }
        let states = (0..1usize << n_sites)
            .filter(|b| b.count_ones() as usize == n_down)
            .collect();
        Ok(Self {
            n_sites,
            n_down,
            states,
            binom,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn n_down(&self) -> usize {
        self.n_down
    }

    /// Position of `b` in [`Self::states`] (combinatorial number system).
    #[inline]
    pub fn rank(&self, mut b: usize) -> usize {
        let mut r = 0;
        let mut k = 1;
        while b != 0 {
            let pos = b.trailing_zeros() as usize;
            r += self.binom[pos][k];
            b &= b - 1;
            k += 1;
        }
        r
    }

    pub fn embed(&self, v: &[f64]) -> Vec<C64> {
        let mut amps = vec![ZERO; 1 << self.n_sites];
        for (&s, &x) in self.states.iter().zip(v) {
            amps[s] = C64::new(x, 0.0);
        }
        amps
    }
}

/// Real symmetric operator used by the Lanczos driver.
trait RealOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

struct FullSpace<'a>(&'a SpinChainModel);

impl RealOperator for FullSpace<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (b, slot) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for bond in &self.0.bonds {
                let aligned = ((b >> bond.i) ^ (b >> bond.j)) & 1 == 0;
                acc += bond.jz * if aligned { 0.25 } else { -0.25 } * x[b];
                let amp = flip_amplitude(bond, aligned);
                if amp != 0.0 {
                    acc += amp * x[b ^ ((1 << bond.i) | (1 << bond.j))];
                }
            }
            *slot = acc;
        }
    }
}

struct SectorSpace<'a> {
    model: &'a SpinChainModel,
    sector: &'a SzSector,
}

impl RealOperator for SectorSpace<'_> {
    fn dim(&self) -> usize {
        self.sector.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (idx, &b) in self.sector.states().iter().enumerate() {
            let mut acc = 0.0;
            for bond in &self.model.bonds {
                let aligned = ((b >> bond.i) ^ (b >> bond.j)) & 1 == 0;
                acc += bond.jz * if aligned { 0.25 } else { -0.25 } * x[idx];
                if !aligned {
                    let partner = b ^ ((1 << bond.i) | (1 << bond.j));
                    acc += 0.5 * (bond.jx + bond.jy) * 0.5 * x[self.sector.rank(partner)];
                }
            }
            y[idx] = acc;
        }
    }
}

/// Which part of the Hilbert space the solver searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Full,
    /// Fixed number of ↓ spins; requires an Sᶻ-conserving model.
    Magnetization { n_down: usize },
}

impl Sector {
    /// Sᶻ = 0 for conserving models on even chains, the full space otherwise.
    pub fn default_for(model: &SpinChainModel) -> Self {
        if model.conserves_sz() && model.n_sites.is_multiple_of(2) {
            Sector::Magnetization {
                n_down: model.n_sites / 2,
            }
        } else {
            Sector::Full
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanczosOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub sector: Option<Sector>,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 300,
            seed: 0,
            sector: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub energy: f64,
    pub state: StateVector,
    pub iterations: usize,
    pub residual: f64,
    pub sector: Sector,
}

/// Lowest eigenpair by Lanczos with full reorthogonalization.
pub fn lanczos_ground_state(model: &SpinChainModel, opts: &LanczosOptions) -> Result<GroundStateResult> {
    model.validate()?;
    if model.n_sites > MAX_SITES {
        return Err(Error::Capacity {
            what: "number of sites",
            got: model.n_sites,
            limit: MAX_SITES,
        });
    }
    let sector = opts.sector.unwrap_or_else(|| Sector::default_for(model));
    match sector {
        Sector::Full => {
            let (energy, x, iterations, residual) = lanczos(&FullSpace(model), opts)?;
            let amps = x.into_iter().map(|a| C64::new(a, 0.0)).collect();
            Ok(GroundStateResult {
                energy,
                state: StateVector::normalized(model.n_sites, amps)?,
                iterations,
                residual,
                sector,
            })
        }
        Sector::Magnetization { n_down } => {
            if !model.conserves_sz() {
                return Err(invalid("sector restriction requires Jx = Jy on every bond"));
            }
            let sz = SzSector::new(model.n_sites, n_down)?;
            let op = SectorSpace { model, sector: &sz };
            let (energy, x, iterations, residual) = lanczos(&op, opts)?;
            Ok(GroundStateResult {
                energy,
                state: StateVector::normalized(model.n_sites, sz.embed(&x))?,
                iterations,
                residual,
                sector,
            })
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lanczos(op: &dyn RealOperator, opts: &LanczosOptions) -> Result<(f64, Vec<f64>, usize, f64)> {
    let n = op.dim();
    if n == 0 {
        return Err(invalid("empty Hilbert space"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= norm);

    let max_iter = opts.max_iter.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut best_residual = f64::INFINITY;

    for j in 0..max_iter {
        op.apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = dot(&w, &w).sqrt();

        let (theta, s) = tridiagonal_lowest(&alpha, &beta);
        let estimate = b * s.last().unwrap().abs();
        let exhausted = j + 1 == max_iter || b < 1e-12 * (1.0 + theta.abs());
        if estimate < 0.5 * opts.tol || exhausted {
            let mut x = vec![0.0; n];
            for (coef, v) in s.iter().zip(&basis) {
                x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += coef * vi);
            }
            let xn = dot(&x, &x).sqrt();
            x.iter_mut().for_each(|v| *v /= xn);
            op.apply(&x, &mut w);
            let energy = dot(&x, &w);
            let residual = w
                .iter()
                .zip(&x)
                .map(|(hx, xi)| (hx - energy * xi).powi(2))
                .sum::<f64>()
                .sqrt();
            best_residual = best_residual.min(residual);
            if residual <= opts.tol {
                return Ok((energy, x, j + 1, residual));
            }
            if exhausted {
                break;
            }
        }
        if b == 0.0 {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Err(Error::Convergence {
        iterations: alpha.len(),
        residual: best_residual,
    })
}

/// Lowest eigenpair of the symmetric tridiagonal matrix with diagonal `alpha`
/// and off-diagonal `beta`: Sturm bisection for the value, shifted inverse
/// iteration for the vector.
fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    if k == 1 {
        return (alpha[0], vec![1.0]);
    }
    let off = |i: usize| if i < beta.len() { beta[i].abs() } else { 0.0 };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = off(i) + if i > 0 { off(i - 1) } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    let count_below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..k {
            let b2 = if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 };
            d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * scale;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if count_below(mid) >= 1 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let theta = 0.5 * (a + b);

    // T - σI with σ just below θ is positive definite, so LDLᵀ needs no pivoting.
    let sigma = theta - 1e-10 * scale;
    let mut d = vec![0.0; k];
    let mut l = vec![0.0; k];
    d[0] = alpha[0] - sigma;
    for i in 1..k {
        l[i] = beta[i - 1] / d[i - 1];
        d[i] = alpha[i] - sigma - l[i] * beta[i - 1];
    }
    let mut x = vec![1.0; k];
    for _ in 0..4 {
        for i in 1..k {
            x[i] -= l[i] * x[i - 1];
        }
        for i in 0..k {
            x[i] /= d[i];
        }
        for i in (0..k - 1).rev() {
            x[i] -= l[i + 1] * x[i + 1];
        }
        let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    (theta, x)
}

/// `(|↑↑⋯↑⟩ + |↓↓⋯↓⟩)/√2`.
pub fn ghz_state(n: usize) -> Result<StateVector> {
    if n < 2 {
        return Err(invalid("GHZ state needs at least two sites"));
    }
    let dim = SpinBasis::new(n)?.dim();
    let mut amps = vec![ZERO; dim];
    amps[0] = C64::new(1.0, 0.0);
    amps[dim - 1] = C64::new(1.0, 0.0);
    StateVector::normalized(n, amps)
}

/// `(|↑↓⋯↑↓⟩ + |↓↑⋯↓↑⟩)/√2`.
pub fn neel_ghz_state(n: usize) -> Result<StateVector> {
    require_even(n, "Néel-GHZ")?;
    let dim = SpinBasis::new(n)?.dim();
    let odd: usize = (0..n).filter(|s| s % 2 == 1).map(|s| 1 << s).sum();
    let mut amps = vec![ZERO; dim];
    amps[odd] = C64::new(1.0, 0.0);
    amps[odd ^ (dim - 1)] = C64::new(1.0, 0.0);
    StateVector::normalized(n, amps)
}

/// Fully polarized `|↑↑⋯↑⟩`.
pub fn polarized_state(n: usize) -> Result<StateVector> {
    StateVector::basis_state(n, 0)
}

fn require_even(n: usize, what: &str) -> Result<()> {
    if !n.is_multiple_of(2) || n < 4 {
        return Err(invalid(format!("{what} state needs an even number of sites ≥ 4, got {n}")));
    }
    Ok(())
}

/// Product of singlets `[i,j] = (|↑_i↓_j⟩ − |↓_i↑_j⟩)/√2` over the given pairs.
fn singlet_covering(n: usize, pairs: &[(usize, usize)]) -> Vec<f64> {
    let mut psi = vec![0.0; 1 << n];
    let amp = 0.5f64.powf(pairs.len() as f64 / 2.0);
    for choice in 0..1usize << pairs.len() {
        let mut idx = 0;
        let mut sign = 1.0;
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if (choice >> k) & 1 == 0 {
                idx |= 1 << j;
            } else {
                idx |= 1 << i;
                sign = -sign;
            }
        }
        psi[idx] += sign * amp;
    }
    psi
}

/// The two nearest-neighbour valence-bond coverings of a ring:
/// `[0,1][2,3]⋯` and `[N−1,0][1,2]⋯[N−3,N−2]`.
pub fn dimer_coverings(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    require_even(n, "dimer")?;
    SpinBasis::new(n)?;
    let first: Vec<_> = (0..n / 2).map(|k| (2 * k, 2 * k + 1)).collect();
    let second: Vec<_> = std::iter::once((n - 1, 0))
        .chain((0..n / 2 - 1).map(|k| (2 * k + 1, 2 * k + 2)))
        .collect();
    Ok((singlet_covering(n, &first), singlet_covering(n, &second)))
}

/// Symmetric superposition of the two dimer coverings, renormalized
/// (the coverings overlap by `2^{1−N/2}`).
pub fn dimer_superposition(n: usize) -> Result<StateVector> {
    let (a, b) = dimer_coverings(n)?;
    let amps = a.iter().zip(&b).map(|(x, y)| C64::new(x + y, 0.0)).collect();
    StateVector::normalized(n, amps)
}
