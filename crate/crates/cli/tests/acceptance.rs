//! The acceptance gate: eleven numbered criteria, one test each. Every test
//! prints a single `C<n> PASS`/`C<n> FAIL` line describing the measured
//! values before asserting, so a full run doubles as a scoreboard.
//!
//! Criteria 4, 5 and 8 contain clauses that the numeric oracle contradicts
//! (the quoted locations/values trace to formula slips quantified in the
//! `validate` registry); those tests fail by design rather than bending the
//! assertions — see the per-clause output for which clause is red.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssh2d_core::circuit::{resonance_frequency, tbr_sweep};
use ssh2d_core::exceptional::scan_discriminant_zeros;
use ssh2d_core::model::{bloch_consistency_report, build_bloch, symmetry_residuals, Boundary};
use ssh2d_core::{CircuitParams, ModelParams, Momentum};
use ssh2d_core::spectrum::{closed_form_pieces, fermi_gap, kx_line, FormulaSet};
use ssh2d_core::topology::{
    berry_curvature, nernst, zak_map, zak_phase, CurvatureMethod, Direction, TransportMode,
    ZakMode,
};
use ssh2d_core::{eig, exceptional, topology, validate, C64};
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

struct Criterion {
    id: &'static str,
    clauses: Vec<(String, bool)>,
}

impl Criterion {
    fn new(id: &'static str) -> Self {
        Self { id, clauses: Vec::new() }
    }

    fn clause(&mut self, ok: bool, detail: String) {
        self.clauses.push((detail, ok));
    }

    /// Print the scoreboard line and assert.
    fn finish(self) {
        let ok = self.clauses.iter().all(|(_, p)| *p);
        let details: Vec<String> = self
            .clauses
            .iter()
            .map(|(d, p)| format!("[{}] {}", if *p { "pass" } else { "FAIL" }, d))
            .collect();
        println!("{} {}: {}", self.id, if ok { "PASS" } else { "FAIL" }, details.join("; "));
        assert!(ok, "{} failed: {}", self.id, details.join("; "));
    }
}

fn random_params(rng: &mut ChaCha8Rng, mu: f64) -> ModelParams {
    let hop = |rng: &mut ChaCha8Rng| rng.gen_range(0.1..2.0);
    let (u, t1, v, t2) = (hop(rng), hop(rng), hop(rng), hop(rng));
    if rng.gen_bool(0.5) {
        ModelParams::uniform(u, t1, v, t2, mu, rng.gen_range(0.0..1.0))
    } else {
        ModelParams::two_gain(u, t1, v, t2, mu, rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))
    }
}

fn random_k(rng: &mut ChaCha8Rng) -> Momentum {
    Momentum::new(rng.gen_range(-PI..PI), rng.gen_range(-PI..PI))
}

#[test]
fn c01_oracle_integrity() {
    let mut c = Criterion::new("C1");
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let mu = rng.gen_range(-0.5..0.5);
        let p = random_params(&mut rng, mu);
        let e = eig::eigen(&build_bloch(&p, random_k(&mut rng)));
        worst = worst.max(e.residuals.iter().cloned().fold(0.0, f64::max));
    }
    let secs = start.elapsed().as_secs_f64();
    c.clause(worst < 1e-9, format!("max residual {worst:.3e} < 1e-9 over 1e4 samples"));
    c.clause(secs < 10.0, format!("runtime {secs:.2}s < 10s"));
    c.finish();
}

#[test]
fn c02_trace_and_closed_form_identity() {
    let mut c = Criterion::new("C2");
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst_sq = 0.0f64;
    let mut worst_sum = 0.0f64;
    for _ in 0..10_000 {
        let hop = |rng: &mut ChaCha8Rng| rng.gen_range(0.1..2.0);
        let p = ModelParams::uniform(
            hop(&mut rng),
            hop(&mut rng),
            hop(&mut rng),
            hop(&mut rng),
            0.0,
            rng.gen_range(0.0..1.0),
        );
        let k = random_k(&mut rng);
        let pieces = closed_form_pieces(&p, k, FormulaSet::Corrected).unwrap();
        let e = eig::eigen(&build_bloch(&p, k));
        let sum_sq: C64 = e.values.iter().map(|z| z * z).sum();
        let sum: C64 = e.values.iter().sum();
        worst_sq = worst_sq.max((sum_sq - 4.0 * pieces.a).norm());
        worst_sum = worst_sum.max(sum.norm());
    }
    c.clause(worst_sq < 1e-9, format!("max |sum E^2 - 4A| {worst_sq:.3e} < 1e-9"));
    c.clause(worst_sum < 1e-12, format!("max |sum E| {worst_sum:.3e} < 1e-12"));
    c.finish();
}

#[test]
fn c03_symmetry_suite() {
    let mut c = Criterion::new("C3");
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_phs = 0.0f64;
    let mut worst_spectral = 0.0f64;
    for _ in 0..1_000 {
        let p = random_params(&mut rng, 0.0);
        let k = random_k(&mut rng);
        worst_phs = worst_phs.max(symmetry_residuals(&p, k)["phs"]);
        worst_spectral = worst_spectral.max(ssh2d_core::model::spectral_phs_distance(&p, k));
    }
    c.clause(worst_phs < 1e-12, format!("max PHS residual {worst_phs:.3e} < 1e-12"));
    c.clause(
        worst_spectral < 1e-9,
        format!("max spectral PHS distance {worst_spectral:.3e} < 1e-9"),
    );
    c.finish();
}

fn so_medians(p: &ModelParams) -> (f64, f64) {
    let m = 32usize;
    let mut m1 = Vec::new();
    let mut m2 = Vec::new();
    for j in 0..m {
        for i in 0..m {
            let k = Momentum::new(
                -PI + 2.0 * PI * (i as f64 + 0.5) / m as f64,
                -PI + 2.0 * PI * (j as f64 + 0.5) / m as f64,
            );
            let so = exceptional::self_orthogonality(p, k).unwrap();
            m1.push(so.n1.norm());
            m2.push(so.n2.norm());
        }
    }
    m1.sort_by(|a, b| a.partial_cmp(b).unwrap());
    m2.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (m1[m1.len() / 2], m2[m2.len() / 2])
}

#[test]
fn c04_exceptional_points() {
    let mut c = Criterion::new("C4");
    let start = Instant::now();

    // PT-symmetric parameter set.
    let pt = ModelParams::uniform(1.0, 1.0, 0.75, 0.75, 0.0, 0.77);
    let roots = scan_discriminant_zeros(&pt, 0.0, (-PI, PI), 2048, FormulaSet::Corrected).unwrap();
    let root_kxs: Vec<f64> = roots.iter().map(|r| r.kx).collect();
    let in_window = root_kxs.iter().any(|&x| (x.abs() - 2.2).abs() <= 0.1);
    c.clause(
        in_window,
        format!("PT J-zero at |akx| = 2.2 +- 0.1 (measured roots {root_kxs:?})"),
    );
    let (med1, med2) = so_medians(&pt);
    let mut ratio_ok = !roots.is_empty();
    let mut ratios = Vec::new();
    for r in &roots {
        let so = exceptional::self_orthogonality(&pt, Momentum::new(r.kx, r.ky)).unwrap();
        let (r1, r2) = (so.n1.norm() / med1, so.n2.norm() / med2);
        ratios.push((r1, r2));
        ratio_ok &= r1 < 1e-3 && r2 < 1e-3;
    }
    c.clause(
        ratio_ok,
        format!("|N1|,|N2| at PT roots < 1e-3 of medians (ratios {ratios:?})"),
    );

    // PT-broken parameter set.
    let broken = ModelParams::uniform(1.0, 0.8, 0.75, 0.6, 0.0, 0.75);
    let broots =
        scan_discriminant_zeros(&broken, 0.0, (-PI, PI), 2048, FormulaSet::Corrected).unwrap();
    let bkxs: Vec<f64> = broots.iter().map(|r| r.kx).collect();
    let b_window = bkxs.iter().any(|&x| (x.abs() - 1.7).abs() <= 0.1);
    c.clause(b_window, format!("broken J-zero at |akx| = 1.7 +- 0.1 (roots {bkxs:?})"));
    let (bm1, bm2) = so_medians(&broken);
    let mut b_ratio_ok = false;
    for r in &broots {
        if (r.kx.abs() - 1.7).abs() <= 0.1 {
            let so = exceptional::self_orthogonality(&broken, Momentum::new(r.kx, r.ky)).unwrap();
            b_ratio_ok |= so.n1.norm() / bm1 > 0.1 && so.n2.norm() / bm2 > 0.1;
        }
    }
    c.clause(b_ratio_ok, "broken-set |N1|,|N2| at root > 0.1 of medians".to_string());

    let secs = start.elapsed().as_secs_f64();
    c.clause(secs < 30.0, format!("runtime {secs:.2}s < 30s"));
    c.finish();
}

#[test]
fn c05_insulator_conductor_gap() {
    let mut c = Criterion::new("C5");
    let insulating = ModelParams::uniform(1.0, 1.0, 0.75, 0.75, 0.0, 0.77);
    let line = kx_line(&insulating, 0.0, 2001);
    let g77 = fermi_gap(&insulating, &line).unwrap();
    c.clause(g77 > 0.05, format!("gap(gamma=0.77) = {g77:.4} > 0.05"));
    let conducting = ModelParams::uniform(1.0, 1.0, 0.75, 0.75, 0.0, 0.59);
    let g59 = fermi_gap(&conducting, &kx_line(&conducting, 0.0, 2001)).unwrap();
    c.clause(g59 < 1e-2, format!("gap(gamma=0.59) = {g59:.4} < 1e-2"));
    c.finish();
}

#[test]
fn c06_zak_quantization() {
    let mut c = Criterion::new("C6");
    let start = Instant::now();
    let mode = ZakMode::Determinant;

    let topo = ModelParams::hermitian(0.5, 0.5, 1.0, 1.0, 0.0);
    let zx = zak_phase(&topo, Direction::X, 0.0, 1024, mode).unwrap();
    let zy = zak_phase(&topo, Direction::Y, 0.0, 1024, mode).unwrap();
    c.clause(
        (zx.phase - PI).abs() / PI < 0.0021,
        format!("topological phi_x = {:.5} within 0.0021*pi of pi", zx.phase),
    );
    let dy = zy.phase.min(2.0 * PI - zy.phase);
    c.clause(dy < 0.01, format!("topological phi_y = {:.5} within 0.01 of 0", zy.phase));

    let trivial = ModelParams::hermitian(2.0, 2.0, 1.0, 1.0, 0.0);
    let tx = zak_phase(&trivial, Direction::X, 0.0, 1024, mode).unwrap();
    let dx = tx.phase.min(2.0 * PI - tx.phase);
    c.clause(dx < 0.01, format!("trivial phi_x = {:.5} within 0.01 of 0", tx.phase));

    for gamma in [0.0, 0.5] {
        let template = ModelParams::uniform(0.5, 0.5, 1.0, 1.0, 0.0, gamma);
        let rows = zak_map(&template, (0.3, 3.0), 7, 1024, mode).unwrap();
        let mut worst = 0.0f64;
        for row in &rows {
            for phi in [row.phi_x, row.phi_y].into_iter().flatten() {
                let d = phi.min((2.0 * PI - phi).abs()).min((phi - PI).abs()) / PI;
                worst = worst.max(d);
            }
        }
        c.clause(
            worst < 0.01,
            format!("gamma={gamma}: sweep quantized to {{0,pi}} within 0.01*pi (worst {worst:.2e})"),
        );
    }
    let secs = start.elapsed().as_secs_f64();
    c.clause(secs < 120.0, format!("runtime {secs:.2}s < 2min"));
    c.finish();
}

#[test]
fn c07_curvature_cross_validation() {
    let mut c = Criterion::new("C7");
    let p = ModelParams::hermitian(1.0, 1.0, 0.23, 0.5, 0.0);
    let mut worst_fd = 0.0f64;
    let mut worst_cf = 0.0f64;
    let mut worst_sum = 0.0f64;
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let m = 10usize;
    for j in 0..m {
        for i in 0..m {
            let k = Momentum::new(
                -PI + 2.0 * PI * (i as f64 + 0.5) / m as f64,
                -PI + 2.0 * PI * (j as f64 + 0.5) / m as f64,
            );
            let kubo: Vec<_> = (0..4)
                .map(|band| berry_curvature(&p, k, band, CurvatureMethod::Kubo).unwrap())
                .collect();
            // Exact band touchings exist at these parameters; every method
            // flags them (regularization / refusal), so comparisons are
            // meaningful only away from them.
            if kubo.iter().any(|c| c.regularized) {
                skipped += 1;
                continue;
            }
            let mut band_sum = 0.0f64;
            let mut point_ok = true;
            for band in 0..4 {
                let fd = berry_curvature(&p, k, band, CurvatureMethod::FiniteDifference).unwrap();
                let scale = 1.0 + kubo[band].value.abs();
                worst_fd = worst_fd.max((kubo[band].value - fd.value).abs() / scale);
                match berry_curvature(&p, k, band, CurvatureMethod::ClosedFormDerivatives) {
                    Ok(cf) => {
                        worst_cf = worst_cf.max((kubo[band].value - cf.value).abs() / scale)
                    }
                    Err(_) => point_ok = false,
                }
                band_sum += kubo[band].value;
            }
            worst_sum = worst_sum.max(band_sum.abs());
            if point_ok {
                checked += 1;
            } else {
                skipped += 1;
            }
        }
    }
    c.clause(
        checked >= 90,
        format!("{checked}/100 regular k compared ({skipped} at band touchings)"),
    );
    c.clause(worst_fd < 1e-4, format!("kubo vs finite-difference rel {worst_fd:.2e} < 1e-4"));
    c.clause(worst_cf < 1e-4, format!("kubo vs closed-form-derivative rel {worst_cf:.2e} < 1e-4"));
    c.clause(worst_sum < 1e-8, format!("pointwise band sum {worst_sum:.2e} < 1e-8"));
    // The derivative formulas agree with the oracle once evaluated with the
    // corrected eigenvector set, so a clean registry entry is the "every
    // disagreement logged" condition.
    let entries = validate::run_checks(
        &p,
        &CircuitParams::new(1e-4, 1e-4, 1e-8, 1.0, 3e4),
        &["eigenvector-corrected"],
    )
    .unwrap();
    c.clause(
        !entries[0].flagged(),
        format!("no unlogged closed-form disagreement (residual {:.2e})", entries[0].magnitude),
    );
    c.finish();
}

#[test]
fn c08_transport() {
    let mut c = Criterion::new("C8");
    let start = Instant::now();
    for v in [0.23, 0.35] {
        let p = ModelParams::hermitian(1.0, 1.0, v, 0.5, 0.0);
        let hall = topology::anomalous_hall(&p, 0.0, 128, None).unwrap();
        let hall2 = topology::anomalous_hall(&p, 0.0, 256, None).unwrap();
        let drift = (hall.sigma_ah - hall2.sigma_ah).abs();
        c.clause(
            (hall.sigma_ah - 0.1).abs() <= 0.05,
            format!("v={v}: sigma_AH = {:.3e} within 0.1 +- 0.05", hall.sigma_ah),
        );
        c.clause(drift < 1e-3, format!("v={v}: grid-doubling drift {drift:.2e} < 1e-3"));
    }
    let matched = ModelParams::hermitian(1.0, 1.0, 0.5, 0.5, 0.0);
    let hall = topology::anomalous_hall(&matched, 0.0, 128, None).unwrap();
    let ner = nernst(&matched, 0.0, 0.05, 128, TransportMode::NernstLowT).unwrap();
    c.clause(
        hall.sigma_ah.abs() < 1e-6 && ner.alpha_xy.abs() < 1e-6,
        format!("v=t2: sigma_AH {:.1e}, alpha_xy {:.1e} < 1e-6", hall.sigma_ah, ner.alpha_xy),
    );
    let mut alphas = Vec::new();
    for ratio in [0.3f64, 0.6, 1.0, 1.5, 2.0] {
        let p = ModelParams::hermitian(ratio * 0.5, ratio * 0.5, 0.5, 0.5, 0.0);
        let n = nernst(&p, 0.0, 0.05, 96, TransportMode::NernstLowT).unwrap();
        alphas.push(n.alpha_xy);
    }
    let decreasing = alphas.windows(2).all(|w| w[1] < w[0]);
    c.clause(decreasing, format!("alpha_xy strictly decreasing over ratios: {alphas:?}"));
    let secs = start.elapsed().as_secs_f64();
    c.clause(secs < 300.0, format!("runtime {secs:.2}s < 5min"));
    c.finish();
}

#[test]
fn c09_circuit() {
    let mut c = Criterion::new("C9");
    let w: f64 = resonance_frequency(1e-2, 1e-2, 1e-8).unwrap();
    c.clause((w - 1e5).abs() / 1e5 < 1e-12, format!("omega* = {w:.6e} (rel 1e-12 of 1e5)"));

    let template = CircuitParams::new(1e-4, 1e-4, 1e-8, 1.0, 3e4);
    let sweeps = tbr_sweep(&template, &[1.0, 50.0], (5e3, 2e5), 2048, 0.0, 0.0).unwrap();
    let near = sweeps[0]
        .crossings
        .iter()
        .any(|cr| (cr.omega - 3e4).abs() <= 0.2 * 3e4);
    c.clause(
        near,
        format!(
            "R=1: branch zero within 3e4 +- 20% (crossings {:?})",
            sweeps[0].crossings.iter().map(|cr| cr.omega).collect::<Vec<_>>()
        ),
    );
    let lower_zero = sweeps[1].crossings.iter().any(|cr| cr.branch < 2);
    c.clause(!lower_zero, "R=50: no (E1,E2) zero".to_string());

    let entries = validate::run_checks(
        &ModelParams::uniform(1.0, 1.0, 0.75, 0.75, 0.0, 0.77),
        &template,
        &["circuit-closed-form"],
    )
    .unwrap();
    c.clause(
        entries[0].flagged() && entries[0].magnitude.is_finite(),
        format!("closed-form vs oracle mismatch logged (magnitude {:.3})", entries[0].magnitude),
    );
    c.finish();
}

#[test]
fn c10_realspace_bloch_consistency() {
    let mut c = Criterion::new("C10");
    let start = Instant::now();
    let p = ModelParams::uniform(1.0, 0.8, 0.75, 0.6, 0.0, 0.75);
    for n in [2usize, 4, 8] {
        let rep = bloch_consistency_report(&p, n, n, Boundary::Pbc).unwrap();
        c.clause(
            rep.max_distance < 1e-9,
            format!("N={n}: PBC vs Bloch-union distance {:.2e} < 1e-9", rep.max_distance),
        );
    }
    let secs = start.elapsed().as_secs_f64();
    c.clause(secs < 30.0, format!("runtime {secs:.2}s < 30s"));
    c.finish();
}

#[test]
fn c11_determinism_across_thread_counts() {
    let mut c = Criterion::new("C11");
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().unwrap();
    for (cfg, csv) in [("band_lines.json", "bands.csv"), ("curvature_transport.json", "berry.csv")]
    {
        let command = if cfg.starts_with("band") { "bands" } else { "berry" };
        let mut bodies = Vec::new();
        for threads in ["1", "4"] {
            let out_dir = tmp.path().join(format!("{command}-{threads}"));
            let status = Command::new(env!("CARGO_BIN_EXE_ssh2d"))
                .args([
                    command,
                    "--config",
                    configs.join(cfg).to_str().unwrap(),
                    "--out",
                    out_dir.to_str().unwrap(),
                ])
                .env("SSH2D_THREADS", threads)
                .stdout(std::process::Stdio::null())
                .status()
                .unwrap();
            assert!(status.success());
            bodies.push(std::fs::read_to_string(out_dir.join(csv)).unwrap());
        }
        c.clause(bodies[0] == bodies[1], format!("{command}: byte-identical across 1 vs 4 threads"));
    }
    c.finish();
}
