//! Dense complex Hermitian linear algebra.
//!
//! Everything here works on small matrices (reduced density matrices and
//! local operators, dimension ≤ 256), stored row-major. The eigensolver is a
//! cyclic complex Jacobi method: slow asymptotically, but accurate to machine
//! precision and bitwise reproducible for identical input.

use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type C64 = Complex64;

/// Elementwise tolerance for `a[i][j] == conj(a[j][i])`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues closer than this are reported as one degenerate group.
pub const DEGENERACY_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// A square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl HermitianMatrix {
    /// Validates Hermiticity and symmetrizes away the residual rounding.
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("matrix dimension must be positive"));
        }
        if data.len() != dim * dim {
            return Err(invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("matrix has non-finite entries"));
        }
        let scale = data.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..dim {
            for j in i..dim {
                let dev = (data[i * dim + j] - data[j * dim + i].conj()).norm();
                if dev > HERMITIAN_TOL * scale {
                    return Err(invalid(format!(
                        "matrix is not Hermitian: |a[{i}][{j}] - conj(a[{j}][{i}])| = {dev:.3e}"
                    )));
                }
            }
        }
        Ok(Self::symmetrized(dim, data))
    }

    /// Builds from an arbitrary generator and projects onto the Hermitian part.
    /// Callers guarantee the generator is Hermitian up to rounding.
    pub(crate) fn symmetrized(dim: usize, mut data: Vec<C64>) -> Self {
        for i in 0..dim {
            data[i * dim + i].im = 0.0;
            for j in (i + 1)..dim {
                let avg = (data[i * dim + j] + data[j * dim + i].conj()) * 0.5;
                data[i * dim + j] = avg;
                data[j * dim + i] = avg.conj();
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0; dim])
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * dim + i] = C64::new(d, 0.0);
        }
        m
    }

    /// Convenience constructor for real symmetric input given as rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(invalid("matrix rows must all have length equal to the row count"));
            }
            data.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self::new(dim, data)
    }

    /// `Σ_k weights[k] |v_k⟩⟨v_k|` with real weights.
    pub fn from_spectral(weights: &[f64], vectors: &[Vec<C64>]) -> Self {
        let dim = vectors.first().map_or(0, Vec::len);
        let mut data = vec![ZERO; dim * dim];
        for (&w, v) in weights.iter().zip(vectors) {
            if w == 0.0 {
                continue;
            }
            for i in 0..dim {
                let vi = v[i] * w;
                for j in 0..dim {
                    data[i * dim + j] += vi * v[j].conj();
                }
            }
        }
        Self::symmetrized(dim, data)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> Result<f64> {
        let eig = eigh(self)?;
        Ok(eig.values().iter().fold(0.0, |acc: f64, v| acc.max(v.abs())))
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// `M|v⟩`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum())
            .collect()
    }

    /// `⟨u|M|v⟩`.
    pub fn matrix_element(&self, u: &[C64], v: &[C64]) -> C64 {
        let mv = self.apply(v);
        u.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Matrix of this operator in the orthonormal basis given by `basis`
    /// (entry `(a, b)` is `⟨basis_a|M|basis_b⟩`).
    pub fn in_basis(&self, basis: &[Vec<C64>]) -> Result<Self> {
        if basis.len() != self.dim || basis.iter().any(|v| v.len() != self.dim) {
            return Err(invalid("basis must have dim vectors of length dim"));
        }
        let images: Vec<Vec<C64>> = basis.iter().map(|v| self.apply(v)).collect();
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for a in 0..n {
            for b in 0..n {
                data[a * n + b] = basis[a].iter().zip(&images[b]).map(|(x, y)| x.conj() * y).sum();
            }
        }
        Ok(Self::symmetrized(n, data))
    }

    /// `U M U†` for a unitary given row-major.
    pub fn conjugated_by(&self, unitary: &[C64]) -> Result<Self> {
        let n = self.dim;
        if unitary.len() != n * n {
            return Err(invalid("unitary dimension does not match matrix"));
        }
        let mut tmp = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let u = unitary[i * n + k];
                if u == ZERO {
                    continue;
                }
                for j in 0..n {
                    tmp[i * n + j] += u * self.data[k * n + j];
                }
            }
        }
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n).map(|k| tmp[i * n + k] * unitary[j * n + k].conj()).sum();
            }
        }
        Ok(Self::symmetrized(n, out))
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(invalid(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }
}

/// Wire form: `{"dim": n, "re": [[..]], "im": [[..]]}`.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    dim: usize,
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

impl TryFrom<MatrixRepr> for HermitianMatrix {
    type Error = crate::error::Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        let n = r.dim;
        if r.re.len() != n || r.re.iter().any(|row| row.len() != n) {
            return Err(invalid("`re` must be a dim x dim array"));
        }
        if let Some(im) = &r.im {
            if im.len() != n || im.iter().any(|row| row.len() != n) {
                return Err(invalid("`im` must be a dim x dim array"));
            }
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let im = r.im.as_ref().map_or(0.0, |m| m[i][j]);
                data.push(C64::new(r.re[i][j], im));
            }
        }
        HermitianMatrix::new(n, data)
    }
}

impl From<HermitianMatrix> for MatrixRepr {
    fn from(m: HermitianMatrix) -> Self {
        let n = m.dim;
        let re = (0..n).map(|i| (0..n).map(|j| m.get(i, j).re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m.get(i, j).im).collect()).collect();
        MatrixRepr { dim: n, re, im: Some(im) }
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues descending.
///
/// Within a degenerate group (consecutive values closer than
/// [`DEGENERACY_TOL`]) the individual vectors are an arbitrary orthonormal
/// choice; they are ordered by the position of their largest component so the
/// output is reproducible, which means values inside a group may be out of
/// order by less than the tolerance.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    values: Vec<f64>,
    vectors: Vec<Vec<C64>>,
}

impl EigenDecomposition {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> &[C64] {
        &self.vectors[k]
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        HermitianMatrix::from_spectral(&self.values, &self.vectors)
    }

    /// Index ranges of degenerate groups.
    pub fn groups(&self) -> Vec<Range<usize>> {
        degenerate_groups(&self.values)
    }
}

pub(crate) fn degenerate_groups(values: &[f64]) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || (values[k - 1] - values[k]).abs() >= DEGENERACY_TOL {
            groups.push(start..k);
            start = k;
        }
    }
    groups
}

fn off_diagonal_norm(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi eigensolver.
pub fn eigh(m: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    if m.hermiticity_defect() > HERMITIAN_TOL * m.as_slice().iter().map(|z| z.norm()).fold(1.0, f64::max) {
        return Err(invalid("eigh requires a Hermitian matrix"));
    }
    let mut a = m.as_slice().to_vec();
    let mut v = vec![ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = ONE;
    }

    let target = 1e-12 * n as f64 * m.frobenius_norm().max(1.0);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, n) < target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a, n) >= target {
        return Err(crate::error::Error::Convergence {
            iterations: MAX_SWEEPS,
            residual: off_diagonal_norm(&a, n),
        });
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| {
            let mut col: Vec<C64> = (0..n).map(|i| v[i * n + k]).collect();
            fix_phase(&mut col);
            (a[k * n + k].re, col)
        })
        .collect();
    // Stable: equal values keep their column order.
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).expect("finite eigenvalues"));

    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    for g in degenerate_groups(&values) {
        if g.len() > 1 {
            pairs[g].sort_by_key(|p| leading_index(&p.1));
        }
    }
    let (values, vectors) = pairs.into_iter().unzip();
    Ok(EigenDecomposition { values, vectors })
}

fn rotate(a: &mut [C64], v: &mut [C64], n: usize, p: usize, q: usize) {
    let b = a[p * n + q];
    let mag = b.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    if mag < f64::EPSILON * 1e-6 * (app.abs() + aqq.abs()) {
        a[p * n + q] = ZERO;
        a[q * n + p] = ZERO;
        return;
    }
    let phase = b / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau.abs() > 1e100 {
        0.5 / tau
    } else {
        let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
        sign / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // U = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * u_pp + akq * u_qp;
        a[k * n + q] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[q * n + k] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[p * n + q] = ZERO;
    a[q * n + p] = ZERO;
    a[p * n + p] = C64::new(app - t * mag, 0.0);
    a[q * n + q] = C64::new(aqq + t * mag, 0.0);

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * u_pp + vkq * u_qp;
        v[k * n + q] = vkp * u_pq + vkq * u_qq;
    }
}

/// Index of the largest-modulus component; ties go to the lowest index.
fn leading_index(v: &[C64]) -> usize {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag + 1e-12 {
            best = i;
            best_mag = mag;
        }
    }
    best
}

fn fix_phase(v: &mut [C64]) {
    let lead = v[leading_index(v)];
    let mag = lead.norm();
    if mag == 0.0 {
        return;
    }
    let rot = lead.conj() / mag;
    for z in v.iter_mut() {
        *z *= rot;
    }
}

/// Von Neumann entropy in bits of a probability spectrum.
pub fn entropy_bits(p: &[f64]) -> Result<f64> {
    if let Some(bad) = p.iter().find(|&&x| !(x >= -1e-12)) {
        return Err(invalid(format!("probability {bad:e} is negative")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(invalid(format!("probabilities sum to {total}, not 1")));
    }
    let s: f64 = p
        .iter()
        .filter(|&&x| x > 0.0 && x < 1.0)
        .map(|&x| -x * x.log2())
        .sum();
    Ok(s.max(0.0))
}

/// Tensor product with index `μ·dim(b) + ν`.
pub fn kron(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    let (na, nb) = (a.dim(), b.dim());
    let n = na * nb;
    let mut data = vec![ZERO; n * n];
    for i in 0..na {
        for j in 0..na {
            let aij = a.get(i, j);
            if aij == ZERO {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    data[(i * nb + k) * n + (j * nb + l)] = aij * b.get(k, l);
                }
            }
        }
    }
    HermitianMatrix { dim: n, data }
}

/// `tr(ρ M)`, real by Hermiticity.
pub fn expectation(m: &HermitianMatrix, rho: &HermitianMatrix) -> Result<f64> {
    if m.dim() != rho.dim() {
        return Err(invalid(format!(
            "operator dimension {} does not match density matrix dimension {}",
            m.dim(),
            rho.dim()
        )));
    }
    let n = m.dim();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += rho.get(i, j) * m.get(j, i);
        }
    }
    if acc.im.abs() > 1e-10 {
        return Err(invalid(format!("trace has imaginary residue {:.3e}", acc.im)));
    }
    Ok(acc.re)
}

pub mod pauli {
    //! Pauli matrices in the `{↑, ↓}` basis (↑ first, σᶻ|↑⟩ = +|↑⟩).
    use super::{HermitianMatrix, C64, ZERO};

    pub fn identity() -> HermitianMatrix {
        HermitianMatrix::identity(2)
    }

    pub fn x() -> HermitianMatrix {
        HermitianMatrix::symmetrized(2, vec![ZERO, C64::new(1.0, 0.0), C64::new(1.0, 0.0), ZERO])
    }

    pub fn y() -> HermitianMatrix {
        HermitianMatrix::symmetrized(2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO])
    }

    pub fn z() -> HermitianMatrix {
        HermitianMatrix::from_real_diagonal(&[1.0, -1.0])
    }

    /// `σ_a · σ_b` on two sites, as a 4×4 matrix.
    pub fn dot() -> HermitianMatrix {
        let xx = super::kron(&x(), &x());
        let yy = super::kron(&y(), &y());
        let zz = super::kron(&z(), &z());
        xx.add(&yy).and_then(|m| m.add(&zz)).expect("same dimensions")
    }
}
