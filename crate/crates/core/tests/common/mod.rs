//! Reference computations for tests, built independently of the library's
//! own kernels: dense Hamiltonians from Pauli Kronecker products, brute-force
//! partial traces and closed-form dimer quantities.
#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use spinorder::models::SpinChainModel;

type C = Complex64;

fn pauli(which: char) -> Matrix2<C> {
    let (o, l, i) = (C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 1.0));
    match which {
        'x' => Matrix2::new(o, l, l, o),
        'y' => Matrix2::new(o, -i, i, o),
        'z' => Matrix2::new(l, o, o, -l),
        _ => unreachable!(),
    }
}

/// `(Jx σˣσˣ + Jy σʸσʸ + Jz σᶻσᶻ)/4` on two sites; index `2·s_i + s_j`, `s = 1` for ↓.
pub fn bond_matrix(jx: f64, jy: f64, jz: f64) -> [[f64; 4]; 4] {
    let mut h = DMatrix::<C>::zeros(4, 4);
    for (j, p) in [(jx, 'x'), (jy, 'y'), (jz, 'z')] {
        let s = pauli(p);
        h += s.kronecker(&s) * C::new(j / 4.0, 0.0);
    }
    let mut out = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            assert!(h[(r, c)].im.abs() < 1e-15);
            out[r][c] = h[(r, c)].re;
        }
    }
    out
}

/// Dense Hamiltonian on the configurations with `n_down` ↓ spins (all
/// configurations when `None`), plus the configuration list.
pub fn dense_hamiltonian(model: &SpinChainModel, n_down: Option<usize>) -> (DMatrix<f64>, Vec<usize>) {
    let n = model.n_sites;
    let configs: Vec<usize> = (0..1usize << n)
        .filter(|b| n_down.is_none_or(|k| b.count_ones() as usize == k))
        .collect();
    let index: HashMap<usize, usize> = configs.iter().enumerate().map(|(k, &b)| (b, k)).collect();
    let mut h = DMatrix::<f64>::zeros(configs.len(), configs.len());
    for bond in &model.bonds {
        let hb = bond_matrix(bond.jx, bond.jy, bond.jz);
        for (col, &b) in configs.iter().enumerate() {
            let l = 2 * ((b >> bond.i) & 1) + ((b >> bond.j) & 1);
            for (l2, row) in hb.iter().enumerate() {
                let amp = row[l];
                if amp == 0.0 {
                    continue;
                }
                let mut b2 = b & !((1 << bond.i) | (1 << bond.j));
                b2 |= (l2 >> 1) << bond.i;
                b2 |= (l2 & 1) << bond.j;
                let r = *index.get(&b2).expect("bond leaves the sector");
                h[(r, col)] += amp;
            }
        }
    }
    (h, configs)
}

/// Lowest eigenpair of a dense block; the vector is embedded in `2^N`.
pub fn dense_lowest(model: &SpinChainModel, n_down: Option<usize>) -> (f64, Vec<f64>) {
    let (h, configs) = dense_hamiltonian(model, n_down);
    let eig = h.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let mut full = vec![0.0; 1 << model.n_sites];
    for (row, &b) in configs.iter().enumerate() {
        full[b] = eig.eigenvectors[(row, k)];
    }
    (eig.eigenvalues[k], full)
}

/// Global ground energy: minimum over magnetization sectors for
/// Sᶻ-conserving models, full space otherwise.
pub fn dense_ground_energy(model: &SpinChainModel) -> f64 {
    if model.conserves_sz() {
        (0..=model.n_sites)
            .map(|k| dense_lowest(model, Some(k)).0)
            .fold(f64::INFINITY, f64::min)
    } else {
        dense_lowest(model, None).0
    }
}

/// `ρ[l, l'] = Σ_env ψ(l, env) ψ*(l', env)`, block sites most significant first.
pub fn rdm_oracle(amps: &[C], n: usize, sites: &[usize]) -> DMatrix<C> {
    let m = sites.len();
    let local = |b: usize| -> usize { sites.iter().fold(0, |acc, &s| (acc << 1) | ((b >> s) & 1)) };
    let with_local = |env: usize, l: usize| -> usize {
        sites
            .iter()
            .enumerate()
            .fold(env, |acc, (k, &s)| acc | (((l >> (m - 1 - k)) & 1) << s))
    };
    let mask: usize = sites.iter().map(|s| 1 << s).sum();
    let mut rho = DMatrix::<C>::zeros(1 << m, 1 << m);
    for b in 0..1usize << n {
        if amps[b].norm() == 0.0 {
            continue;
        }
        let env = b & !mask;
        for l2 in 0..1usize << m {
            let b2 = with_local(env, l2);
            rho[(local(b), l2)] += amps[b] * amps[b2].conj();
        }
    }
    rho
}

pub fn entropy_oracle(rho: &DMatrix<C>) -> f64 {
    // Real symmetric embedding [[Re, −Im], [Im, Re]] doubles every eigenvalue.
    let d = rho.nrows();
    let mut big = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for r in 0..d {
        for c in 0..d {
            let z = rho[(r, c)];
            big[(r, c)] = z.re;
            big[(r + d, c + d)] = z.re;
            big[(r, c + d)] = -z.im;
            big[(r + d, c)] = z.im;
        }
    }
    let mut ev: Vec<f64> = big.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev.iter()
        .step_by(2)
        .filter(|&&p| p > 1e-15)
        .map(|&p| -p * p.log2())
        .sum()
}

pub fn mi_oracle(amps: &[C], n: usize, a: &[usize], b: &[usize]) -> f64 {
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    entropy_oracle(&rdm_oracle(amps, n, a)) + entropy_oracle(&rdm_oracle(amps, n, b))
        - entropy_oracle(&rdm_oracle(amps, n, &ab))
}

/// `⟨σᶻ_0 σᶻ_r⟩` from probabilities.
pub fn zz_oracle(amps: &[C], r: usize) -> f64 {
    amps.iter()
        .enumerate()
        .map(|(b, a)| {
            let s = if ((b ^ (b >> r)) & 1) == 0 { 1.0 } else { -1.0 };
            s * a.norm_sqr()
        })
        .sum()
}

/// Overlap `2^{1−N/2}` of the two nearest-neighbour singlet coverings.
pub fn covering_overlap(n: usize) -> f64 {
    2f64.powi(1 - (n as i32) / 2)
}

/// Singlet weight of a covered pair in the normalized sum of both coverings:
/// `(5/4 + 2s)/(2 + 2s)` with `s` the covering overlap.
pub fn dimer_singlet_weight(n: usize) -> f64 {
    let s = covering_overlap(n);
    (1.25 + 2.0 * s) / (2.0 + 2.0 * s)
}

pub fn to_complex(v: &[f64]) -> Vec<C> {
    v.iter().map(|&x| C::new(x, 0.0)).collect()
}

pub mod props {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use spinorder::hilbert::{joint_rdm, partial_trace, Block, StateVector};
    use spinorder::linalg::{eigh, expectation, pauli, HermitianMatrix};
    use spinorder::mi::{mutual_information, p_matrix};
    use spinorder::models::{
        dimer_superposition, ghz_state, lanczos_ground_state, neel_ghz_state, Boundary, LanczosOptions, SpinChainModel,
    };
    use spinorder::orderparam::{
        construct_diagonal, construct_offdiagonal, correlation_profile, detect_offdiagonal_pairs, DiagonalOrder,
        OffDiagonalOrder, OrderOperator, DEFAULT_OFFDIAG_EPS, DEFAULT_RANK_EPS,
    };

    use super::C;

    pub fn random_product(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let sites: Vec<[C; 2]> = (0..n)
            .map(|_| {
                let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
                let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                [C::new((theta / 2.0).cos(), 0.0), C::from_polar((theta / 2.0).sin(), phi)]
            })
            .collect();
        StateVector::product(&sites).unwrap()
    }

    /// Random complex superposition of configurations with at most `max_down` ↓ spins.
    pub fn random_low_sz(n: usize, max_down: u32, rng: &mut ChaCha8Rng) -> StateVector {
        let amps = (0..1usize << n)
            .map(|b| {
                if b.count_ones() <= max_down {
                    C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                } else {
                    C::new(0.0, 0.0)
                }
            })
            .collect();
        StateVector::normalized(n, amps).unwrap()
    }

    pub fn xxz_ground(n: usize, delta: f64) -> StateVector {
        let model = SpinChainModel::xxz(n, delta, Boundary::Periodic).unwrap();
        lanczos_ground_state(&model, &LanczosOptions::default()).unwrap().state
    }

    /// Fixed corpus: product states, low-Sᶻ superpositions, the analytic
    /// states and XXZ ground states.
    pub fn corpus() -> Vec<(String, StateVector)> {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut out = Vec::new();
        for k in 0..20 {
            let n = 6 + k % 3;
            out.push((format!("product#{k} N={n}"), random_product(n, &mut rng)));
        }
        for k in 0..20 {
            let n = 6 + k % 3;
            let max_down = 1 + (k % 2) as u32;
            out.push((format!("low-sz#{k} N={n}"), random_low_sz(n, max_down, &mut rng)));
        }
        for n in [8, 10] {
            out.push((format!("ghz N={n}"), ghz_state(n).unwrap()));
            out.push((format!("neel-ghz N={n}"), neel_ghz_state(n).unwrap()));
            out.push((format!("dimer N={n}"), dimer_superposition(n).unwrap()));
        }
        for n in [8, 10] {
            for delta in [0.5, 1.0, 2.0] {
                out.push((format!("xxz({delta}) N={n}"), xxz_ground(n, delta)));
            }
        }
        out
    }

    /// Worst-case deviation of each checked property on one state.
    #[derive(Clone, Copy, Debug, Default)]
    pub struct Violations {
        pub rdm_trace: f64,
        /// Most negative RDM eigenvalue, as a positive number (0 if none).
        pub rdm_negativity: f64,
        pub mi_negativity: f64,
        pub mi_asymmetry: f64,
        pub p_matrix_sums: f64,
        pub rank_one_mi: f64,
        pub zero_mode_correlation: f64,
        pub traceless: f64,
        pub hermiticity: f64,
        pub two_route: f64,
    }

    impl Violations {
        pub fn max(self, o: Self) -> Self {
            Self {
                rdm_trace: self.rdm_trace.max(o.rdm_trace),
                rdm_negativity: self.rdm_negativity.max(o.rdm_negativity),
                mi_negativity: self.mi_negativity.max(o.mi_negativity),
                mi_asymmetry: self.mi_asymmetry.max(o.mi_asymmetry),
                p_matrix_sums: self.p_matrix_sums.max(o.p_matrix_sums),
                rank_one_mi: self.rank_one_mi.max(o.rank_one_mi),
                zero_mode_correlation: self.zero_mode_correlation.max(o.zero_mode_correlation),
                traceless: self.traceless.max(o.traceless),
                hermiticity: self.hermiticity.max(o.hermiticity),
                two_route: self.two_route.max(o.two_route),
            }
        }

        /// `(name, worst, tolerance)` for every property.
        pub fn table(&self) -> Vec<(&'static str, f64, f64)> {
            vec![
                ("RDM trace = 1", self.rdm_trace, 1e-12),
                ("RDM eigenvalues >= -1e-12", self.rdm_negativity, 1e-12),
                ("MI >= -1e-10", self.mi_negativity, 1e-10),
                ("MI symmetric", self.mi_asymmetry, 1e-10),
                ("P-matrix rows and columns sum to 1", self.p_matrix_sums, 1e-10),
                ("rank-1 block has zero MI", self.rank_one_mi, 1e-10),
                ("zero-eigenvalue modes uncorrelated", self.zero_mode_correlation, 1e-10),
                ("constructed operators traceless against rho_i", self.traceless, 1e-10),
                ("constructed operators Hermitian", self.hermiticity, 1e-12),
                ("two-route correlation agreement", self.two_route, 1e-10),
            ]
        }

        pub fn failures(&self) -> Vec<String> {
            self.table()
                .into_iter()
                .filter(|(_, worst, tol)| !(worst <= tol))
                .map(|(name, worst, tol)| format!("{name}: {worst:e} > {tol:e}"))
                .collect()
        }
    }

    fn block_pairs(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
        vec![
            (vec![0], vec![1]),
            (vec![0], vec![n / 2]),
            (vec![1], vec![n - 1]),
            (vec![0, 1], vec![3, 4]),
            (vec![1, 2], vec![n - 2, n - 1]),
        ]
    }

    pub fn check(state: &StateVector) -> Violations {
        let n = state.n_sites();
        let mut v = Violations::default();
        for (sa, sb) in block_pairs(n) {
            let a = Block::new(sa.clone(), n).unwrap();
            let b = Block::new(sb.clone(), n).unwrap();
            let ra = partial_trace(state, &a).unwrap();
            let rb = partial_trace(state, &b).unwrap();
            let joint = joint_rdm(state, &a, &b).unwrap();
            for rho in [&ra, &rb, &joint] {
                v.rdm_trace = v.rdm_trace.max((rho.matrix().trace() - 1.0).abs());
                let low = eigh(rho.matrix()).unwrap().values().iter().copied().fold(0.0, f64::min);
                v.rdm_negativity = v.rdm_negativity.max(-low);
            }
            let ab = mutual_information(state, &a, &b).unwrap();
            let ba = mutual_information(state, &b, &a).unwrap();
            v.mi_negativity = v.mi_negativity.max(-ab).max(-ba).max(0.0);
            v.mi_asymmetry = v.mi_asymmetry.max((ab - ba).abs());

            let p = p_matrix(&ra, &rb, &joint).unwrap();
            for s in p.row_sums().into_iter().chain(p.col_sums()) {
                v.p_matrix_sums = v.p_matrix_sums.max((s - 1.0).abs());
            }

            let ea = eigh(ra.matrix()).unwrap();
            let eb = eigh(rb.matrix()).unwrap();
            if ea.values().iter().filter(|&&x| x > DEFAULT_RANK_EPS).count() == 1 {
                v.rank_one_mi = v.rank_one_mi.max(ab.abs());
            }
            for (mu, &pm) in ea.values().iter().enumerate() {
                if pm >= 1e-12 {
                    continue;
                }
                for nu in 0..eb.dim() {
                    let w: Vec<C> = ea
                        .vector(mu)
                        .iter()
                        .flat_map(|x| eb.vector(nu).iter().map(move |y| x * y))
                        .collect();
                    let q = joint.matrix().matrix_element(&w, &w).re;
                    v.zero_mode_correlation = v.zero_mode_correlation.max(q.abs());
                }
            }

            if sa.len() != sb.len() {
                continue;
            }
            let mut ops: Vec<HermitianMatrix> = Vec::new();
            if let DiagonalOrder::Found { operator, .. } = construct_diagonal(&ra, &joint, DEFAULT_RANK_EPS).unwrap() {
                ops.push(operator.matrix);
            }
            let pairs = detect_offdiagonal_pairs(&ra, &rb, &joint, DEFAULT_OFFDIAG_EPS).unwrap();
            if let OffDiagonalOrder::Found { x, y, .. } = construct_offdiagonal(&pairs, &ra, &joint).unwrap() {
                for op in [x.matrix, y.matrix] {
                    v.traceless = v.traceless.max(op.trace().abs());
                    ops.push(op);
                }
            }
            for op in &ops {
                v.traceless = v.traceless.max(expectation(op, ra.matrix()).unwrap().abs());
                v.hermiticity = v.hermiticity.max(op.hermiticity_defect());
            }
            if sa == [0] || sa == [0, 1] {
                let m = sa.len();
                let z = if m == 1 {
                    pauli::z()
                } else {
                    spinorder::linalg::kron(&pauli::z(), &pauli::x())
                };
                ops.push(z);
                let distances: Vec<usize> = (m..=n - m).collect();
                for op in ops {
                    let op = OrderOperator::new("check", op).unwrap();
                    let prof = correlation_profile(state, &op, 0, &distances).unwrap();
                    for (x, y) in prof.connected.iter().zip(&prof.connected_full_state) {
                        v.two_route = v.two_route.max((x - y).abs());
                    }
                }
            }
        }
        v
    }
}
