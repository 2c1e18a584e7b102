//! Acceptance criteria, one PASS/FAIL line per check. Exits non-zero if any
//! check fails.

mod common;

use std::f64::consts::PI;
use std::process::Command;

use spinorder::cli::analysis::{analyze, Analysis};
use spinorder::cli::config::Thresholds;
use spinorder::hilbert::{joint_rdm, partial_trace, Block, StateVector};
use spinorder::linalg::{eigh, pauli, HermitianMatrix};
use spinorder::mi::{min_block_scan, mutual_information, von_neumann_entropy, DEFAULT_MI_THRESHOLD};
use spinorder::models::{
    dimer_superposition, ghz_state, lanczos_ground_state, neel_ghz_state, Boundary, LanczosOptions, SpinChainModel,
};
use spinorder::orderparam::{correlation_profile, DiagonalOrder, OffDiagonalOrder, OrderOperator};

struct Suite {
    failed: Vec<String>,
    passed: usize,
}

impl Suite {
    fn check(&mut self, criterion: u32, name: &str, ok: bool, detail: String) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag} [{criterion}] {name}: {detail}");
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(format!("[{criterion}] {name}"));
        }
    }

    fn close(&mut self, criterion: u32, name: &str, got: f64, want: f64, tol: f64) {
        let dev = (got - want).abs();
        self.check(
            criterion,
            name,
            dev <= tol,
            format!("got {got:.6e}, want {want:.6e}, |dev| {dev:.2e} (tol {tol:.0e})"),
        );
    }
}

fn op_dist(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    a.sub(b).unwrap().operator_norm().unwrap()
}

fn ground(n: usize) -> StateVector {
    let model = SpinChainModel::heisenberg(n, Boundary::Periodic).unwrap();
    let opts = LanczosOptions {
        seed: 7,
        ..Default::default()
    };
    lanczos_ground_state(&model, &opts).unwrap().state
}

fn block(start: usize, m: usize, n: usize) -> Block {
    Block::contiguous(start, m, n).unwrap()
}

fn diagonal(a: &Analysis) -> (&spinorder::orderparam::DiagonalOrderSpec, &OrderOperator) {
    match a.diagonal.as_ref().expect("analysis reached construction") {
        DiagonalOrder::Found { spec, operator } => (spec, operator),
        DiagonalOrder::NoOrder { rank } => panic!("no diagonal order (rank {rank})"),
    }
}

fn criterion_1(s: &mut Suite) {
    let n = 12;
    let g = ghz_state(n).unwrap();
    let worst_s = (0..n)
        .map(|i| (von_neumann_entropy(&partial_trace(&g, &block(i, 1, n)).unwrap()).unwrap() - 1.0).abs())
        .fold(0.0, f64::max);
    s.check(1, "GHZ N=12 S(rho_i) = 1 at every site", worst_s <= 1e-10, format!("worst |dev| {worst_s:.2e} (tol 1e-10)"));
    let mut worst_mi = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let mi = mutual_information(&g, &block(i, 1, n), &block(j, 1, n)).unwrap();
            worst_mi = worst_mi.max((mi - 1.0).abs());
        }
    }
    s.check(1, "GHZ N=12 S(i|j) = 1 for every pair", worst_mi <= 1e-10, format!("worst |dev| {worst_mi:.2e} (tol 1e-10)"));
    let a = analyze(&g, &Thresholds::default()).unwrap();
    let (_, op) = diagonal(&a);
    let d = op_dist(&op.matrix, &pauli::z()).min(op_dist(&op.matrix, &pauli::z().scaled(-1.0)));
    s.check(1, "GHZ diagonal operator = ±sigma_z", d <= 1e-10, format!("distance {d:.2e} (tol 1e-10)"));
    let k = a.correlations[0].mode.k;
    s.check(1, "GHZ mode k = 0", k == Some(0.0), format!("k = {k:?}"));
}

fn criterion_2(s: &mut Suite) {
    let n = 12;
    let st = neel_ghz_state(n).unwrap();
    let a = analyze(&st, &Thresholds::default()).unwrap();
    let c = &a.correlations[0];
    let worst = c
        .profile
        .distances
        .iter()
        .zip(&c.profile.connected)
        .map(|(&r, &v)| (v - if r % 2 == 0 { 1.0 } else { -1.0 }).abs())
        .fold(0.0, f64::max);
    s.check(2, "Neel-GHZ C(r) = +1 even, -1 odd", worst <= 1e-10, format!("worst |dev| {worst:.2e} over r={:?} (tol 1e-10)", c.profile.distances));
    s.check(2, "Neel-GHZ mode k = pi", c.mode.k == Some(PI), format!("k = {:?}", c.mode.k));
}

fn criterion_3(s: &mut Suite) {
    let n = 16;
    let d = dimer_superposition(n).unwrap();
    let scan = min_block_scan(&d, 3, DEFAULT_MI_THRESHOLD).unwrap();
    s.check(3, "dimer N=16 min_block_scan = 2", scan.min_block == Some(2), format!("got {:?}", scan.min_block));
    let single = scan.profile(1).unwrap();
    let worst = single
        .distances
        .iter()
        .zip(&single.values)
        .filter(|(&r, _)| r >= 2)
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    s.check(3, "dimer single-site MI at r >= 2 <= 1e-2", worst <= 1e-2, format!("max {worst:.3e}"));

    let rho = partial_trace(&d, &block(0, 2, n)).unwrap();
    let p = eigh(rho.matrix()).unwrap().values().to_vec();
    let ideal = [0.625, 0.125, 0.125, 0.125];
    let dev = p.iter().zip(&ideal).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    s.check(3, "dimer two-site spectrum ~ (5/8, 1/8, 1/8, 1/8)", dev <= 0.02, format!("{p:.6?}, max |dev| {dev:.2e} (tol 0.02)"));
    let entropy = von_neumann_entropy(&rho).unwrap();
    s.close(3, "dimer S(rho_i) ~ 3 - (5/8) log2 5", entropy, 3.0 - 0.625 * 5f64.log2(), 0.02);

    let pair = scan.profile(2).unwrap();
    let even: Vec<(usize, f64)> = pair
        .distances
        .iter()
        .zip(&pair.values)
        .filter(|(&r, _)| r % 2 == 0 && r >= 4)
        .map(|(&r, &v)| (r, v))
        .collect();
    let worst = even.iter().map(|(_, v)| (v - 0.2690).abs()).fold(0.0, f64::max);
    s.check(
        3,
        "dimer even-distance MI (separated blocks) ~ 0.2690",
        worst <= 0.02,
        format!("{even:.5?}, max |dev| {worst:.2e} (tol 0.02)"),
    );

    let a = analyze(&d, &Thresholds::default()).unwrap();
    let (spec, op) = diagonal(&a);
    let target = HermitianMatrix::identity(4).add(&pauli::dot().scaled(2.0 / 3.0)).unwrap();
    // Both normalized to max |eigenvalue| = 1.
    let target_n = target.scaled(1.0 / target.operator_norm().unwrap());
    let dist = op_dist(&op.matrix, &target_n);
    s.check(3, "dimer operator ~ 1 + (2/3) sigma.sigma (normalized)", dist <= 0.05, format!("operator-norm distance {dist:.3e} (tol 0.05)"));

    let unit = OrderOperator::new("dimer", op.matrix.scaled(spec.unit_leading_factor())).unwrap();
    let distances: Vec<usize> = (2..=9).collect();
    let prof = correlation_profile(&d, &unit, 0, &distances).unwrap();
    let mut worst_even = 0.0f64;
    let mut worst_odd = 0.0f64;
    for (&r, &v) in prof.distances.iter().zip(&prof.full) {
        if r < 4 {
            continue;
        }
        if r % 2 == 0 {
            worst_even = worst_even.max((v - 0.625).abs());
        } else {
            worst_odd = worst_odd.max((v - 0.5).abs());
        }
    }
    let listing: Vec<String> = prof.distances.iter().zip(&prof.full).map(|(r, v)| format!("{r}:{v:.5}")).collect();
    s.check(3, "dimer <OO> ~ 5/8 at even r", worst_even <= 0.02, format!("[{}], max |dev| {worst_even:.3e} (tol 0.02)", listing.join(" ")));
    s.check(3, "dimer <OO> ~ 1/2 at odd r", worst_odd <= 0.02, format!("max |dev| {worst_odd:.3e} (tol 0.02)"));
    let k = a.correlations[0].mode.k;
    s.check(3, "dimer mode k = pi", k == Some(PI), format!("k = {k:?}"));
}

fn heisenberg_checks(s: &mut Suite, n: usize, full: bool) {
    let st = ground(n);
    let tag = format!("Heisenberg N={n}");
    let distances: Vec<usize> = (1..=n / 2).collect();
    let prof = |m: HermitianMatrix| correlation_profile(&st, &OrderOperator::new("p", m).unwrap(), 0, &distances).unwrap();
    let (zz, xx, yy) = (prof(pauli::z()), prof(pauli::x()), prof(pauli::y()));
    s.close(4, &format!("{tag} <sz sz>(1)"), zz.full[0], -0.59084, 0.01);
    s.close(4, &format!("{tag} <sz sz>(2)"), zz.full[1], 0.242716, 0.02);

    let rdm = joint_rdm(&st, &block(0, 1, n), &block(5, 1, n)).unwrap();
    let (u, w, z) = (rdm.matrix().get(0, 0).re, rdm.matrix().get(1, 1).re, rdm.matrix().get(1, 2).re);
    let mi5 = mutual_information(&st, &block(0, 1, n), &block(5, 1, n)).unwrap();
    s.close(4, &format!("{tag} MI(r=5)"), mi5, 0.031, 0.01);
    if !full {
        return;
    }
    let alt = zz.full[..4].windows(2).all(|p| p[0] * p[1] < 0.0);
    s.check(4, &format!("{tag} signs alternate through r=4"), alt, format!("{:.5?}", &zz.full[..4]));
    let su2 = (0..distances.len())
        .map(|k| (xx.full[k] - zz.full[k]).abs().max((yy.full[k] - zz.full[k]).abs()))
        .fold(0.0, f64::max);
    s.check(4, &format!("{tag} <sx sx> = <sy sy> = <sz sz>"), su2 <= 1e-8, format!("max |dev| {su2:.2e} (tol 1e-8)"));
    s.close(4, &format!("{tag} r=5 u"), u, 0.219, 0.02);
    s.close(4, &format!("{tag} r=5 w"), w, 0.281, 0.02);
    s.close(4, &format!("{tag} r=5 |z|"), z.abs(), 0.062, 0.02);
    s.close(4, &format!("{tag} r=5 u = w - |z|"), u, w - z.abs(), 1e-8);

    let a = analyze(&st, &Thresholds::default()).unwrap();
    match a.offdiagonal.as_ref().unwrap() {
        OffDiagonalOrder::Found { spec, x, y } => {
            let dx = op_dist(&x.matrix, &pauli::x());
            let dy = op_dist(&y.matrix, &pauli::y());
            s.check(
                4,
                &format!("{tag} off-diagonal pair detected, operators sigma_x / sigma_y"),
                spec.pairs.len() == 1 && dx <= 1e-10 && dy <= 1e-10,
                format!("pairs {:?}, |Ox - sx| {dx:.1e}, |Oy - sy| {dy:.1e}, <OxOy> {:.1e}", spec.pairs.iter().map(|p| (p.mu, p.nu)).collect::<Vec<_>>(), spec.xy),
            );
        }
        OffDiagonalOrder::NoOrder => s.check(4, &format!("{tag} off-diagonal pair detected"), false, "none".into()),
    }
    let (_, op) = diagonal(&a);
    let dz = op_dist(&op.matrix, &pauli::z());
    s.check(4, &format!("{tag} diagonal operator sigma_z"), dz <= 1e-10, format!("distance {dz:.1e}"));
    let modes: Vec<_> = a.correlations.iter().map(|c| (c.profile.label.clone(), c.mode.k)).collect();
    s.check(4, &format!("{tag} all modes pi"), modes.iter().all(|(_, k)| *k == Some(PI)), format!("{modes:?}"));
    s.check(
        4,
        &format!("{tag} verdict is long-range correlation"),
        a.verdict.kind == spinorder::mi::DecayVerdict::LongRangeCorrelation,
        a.verdict.description.clone(),
    );
}

fn criterion_4(s: &mut Suite) {
    // Finite-size reference from dense diagonalization at N=12.
    let model = SpinChainModel::heisenberg(12, Boundary::Periodic).unwrap();
    let (_, v) = common::dense_lowest(&model, Some(6));
    let dense = common::to_complex(&v);
    println!(
        "info [4] dense N=12: <sz sz>(1) = {:.6}, (2) = {:.6}",
        common::zz_oracle(&dense, 1),
        common::zz_oracle(&dense, 2)
    );
    heisenberg_checks(s, 16, true);
    heisenberg_checks(s, 20, false);
}

fn criterion_5(s: &mut Suite) {
    let corpus = common::props::corpus();
    s.check(5, "corpus size >= 50", corpus.len() >= 50, format!("{} states", corpus.len()));
    let worst = corpus
        .iter()
        .map(|(_, st)| common::props::check(st))
        .fold(common::props::Violations::default(), |a, b| a.max(b));
    for (name, got, tol) in worst.table() {
        s.check(5, name, got <= tol, format!("worst {got:.2e} (tol {tol:.0e})"));
    }
}

fn criterion_6(s: &mut Suite) {
    for n in [4, 8, 12] {
        let model = SpinChainModel::heisenberg(n, Boundary::Periodic).unwrap();
        let gs = lanczos_ground_state(&model, &LanczosOptions::default()).unwrap();
        let oracle = common::dense_ground_energy(&model);
        s.close(6, &format!("Lanczos vs dense ED, Heisenberg ring N={n}"), gs.energy, oracle, 1e-8);
    }
    let ring4 = SpinChainModel::heisenberg(4, Boundary::Periodic).unwrap();
    let e4 = lanczos_ground_state(&ring4, &LanczosOptions::default()).unwrap().energy;
    s.close(6, "N=4 ring energy = -2", e4, -2.0, 1e-8);

    let bin = env!("CARGO_BIN_EXE_spinorder");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut reports = Vec::new();
    for dir in &dirs {
        let status = Command::new(bin)
            .args(["analyze", "--model", "heisenberg", "--sites", "12", "--seed", "7", "--format", "json", "--out-dir"])
            .arg(dir.path())
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        reports.push(std::fs::read(dir.path().join("report.json")).unwrap());
    }
    s.check(
        6,
        "same seed gives byte-identical reports",
        reports[0] == reports[1],
        format!("{} bytes", reports[0].len()),
    );
}

fn main() {
    let mut s = Suite {
        failed: Vec::new(),
        passed: 0,
    };
    criterion_1(&mut s);
    criterion_2(&mut s);
    criterion_3(&mut s);
    criterion_4(&mut s);
    criterion_5(&mut s);
    criterion_6(&mut s);
    println!("\n{} passed, {} failed", s.passed, s.failed.len());
    for f in &s.failed {
        println!("  failed: {f}");
    }
    if !s.failed.is_empty() {
        std::process::exit(1);
    }
}
