use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssh2d_core::eig::eigen;
use ssh2d_core::model::{
    bloch_consistency_report, build_bloch, build_real_space, spectral_phs_distance,
    symmetry_residuals, Boundary, ModelError, ModelParams, Momentum,
};

type P = ModelParams<f64>;

fn fig_pt_params(gamma: f64) -> P {
    P::uniform(1.0, 1.0, 0.75, 0.75, 0.0, gamma)
}

fn random_params(rng: &mut ChaCha8Rng, mu: f64) -> P {
    let mut p = P::uniform(
        rng.gen_range(0.2..2.0),
        rng.gen_range(0.2..2.0),
        rng.gen_range(0.2..2.0),
        rng.gen_range(0.2..2.0),
        mu,
        rng.gen_range(0.0..1.0),
    );
    p.a = 1.0;
    p
}

fn random_k(rng: &mut ChaCha8Rng) -> Momentum<f64> {
    Momentum::new(
        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
    )
}

#[test]
fn bloch_entries_at_gamma_point() {
    let p = fig_pt_params(0.77);
    let h = build_bloch(&p, Momentum::new(0.0, 0.0));
    assert!((h[(0, 0)] - C64::new(0.0, 0.77)).norm() < 1e-15);
    assert!((h[(1, 1)] - C64::new(0.0, -0.77)).norm() < 1e-15);
    assert!((h[(2, 2)] - C64::new(0.0, -0.77)).norm() < 1e-15);
    assert!((h[(3, 3)] - C64::new(0.0, 0.77)).norm() < 1e-15);
    assert!((h[(0, 1)] - C64::new(2.0, 0.0)).norm() < 1e-15);
    assert!((h[(0, 3)] - C64::new(1.5, 0.0)).norm() < 1e-15);
    // Always-zero entries.
    for (i, j) in [(0, 2), (2, 0), (1, 3), (3, 1)] {
        assert_eq!(h[(i, j)], C64::new(0.0, 0.0));
    }
}

#[test]
fn destructive_interference_at_pi_pi() {
    let p = P::hermitian(0.8, 0.8, 0.3, 0.3, 0.0);
    let h = build_bloch(&p, Momentum::new(std::f64::consts::PI, std::f64::consts::PI));
    assert!(h.max_abs() < 1e-14, "matrix should vanish, max {:e}", h.max_abs());
}

#[test]
fn periodicity_in_both_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let two_pi = 2.0 * std::f64::consts::PI;
    for _ in 0..1000 {
        let mu = rng.gen_range(-0.5..0.5);
        let p = random_params(&mut rng, mu);
        let k = random_k(&mut rng);
        let h = build_bloch(&p, k);
        let hx = build_bloch(&p, Momentum::new(k.kx + two_pi / p.a, k.ky));
        let hy = build_bloch(&p, Momentum::new(k.kx, k.ky + two_pi / p.a));
        assert!(h.max_diff(&hx) < 1e-12);
        assert!(h.max_diff(&hy) < 1e-12);
    }
}

#[test]
fn hermitian_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let mu = rng.gen_range(-0.5..0.5);
        let mut p = random_params(&mut rng, mu);
        p.gains = [0.0; 4];
        let k = random_k(&mut rng);
        let h = build_bloch(&p, k);
        assert!(h.max_diff(&h.adjoint()) < 1e-14);
    }
}

#[test]
fn momentum_reduction_idempotent() {
    let k: Momentum<f64> = Momentum::new(7.5, -12.0);
    let r1 = k.reduced(1.0);
    let r2 = r1.reduced(1.0);
    assert!((r1.kx - r2.kx).abs() < 1e-15);
    assert!((r1.ky - r2.ky).abs() < 1e-15);
    assert!(r1.kx.abs() <= std::f64::consts::PI + 1e-12);
    assert!(r1.ky.abs() <= std::f64::consts::PI + 1e-12);
}

#[test]
fn phs_identity_both_gain_patterns_at_zero_mu() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..1000 {
        let k = random_k(&mut rng);
        let uni = random_params(&mut rng, 0.0);
        let res = symmetry_residuals(&uni, k);
        assert!(res["phs"] < 1e-12, "uniform phs {:e}", res["phs"]);

        let two = P::two_gain(
            rng.gen_range(0.2..2.0),
            rng.gen_range(0.2..2.0),
            rng.gen_range(0.2..2.0),
            rng.gen_range(0.2..2.0),
            0.0,
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
        );
        let res = symmetry_residuals(&two, k);
        assert!(res["phs"] < 1e-12, "two-gain phs {:e}", res["phs"]);
    }
}

#[test]
fn phs_broken_by_chemical_potential() {
    let mut p = fig_pt_params(0.77);
    p.mu = 0.3;
    let res = symmetry_residuals(&p, Momentum::new(0.4, -1.1));
    // The diagonal defect is 2*mu.
    assert!(res["phs"] > 0.1, "phs {:e}", res["phs"]);
    assert!((res["phs"] - 0.6).abs() < 1e-12);
}

#[test]
fn chiral_symmetry_generically_broken() {
    let p = fig_pt_params(0.77);
    let res = symmetry_residuals(&p, Momentum::new(0.3, 0.7));
    assert!(res["chiral"] > 0.0);
}

#[test]
fn spectral_phs_multiset_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..50 {
        let p = random_params(&mut rng, 0.0);
        let k = random_k(&mut rng);
        let d = spectral_phs_distance(&p, k);
        assert!(d < 1e-9, "spectral phs distance {d:e}");
    }
}

#[test]
fn real_space_dimensions_and_errors() {
    let p = fig_pt_params(0.5);
    let rs = build_real_space(&p, 3, 2, Boundary::Obc).unwrap();
    assert_eq!(rs.dim(), 24);
    assert_eq!(rs.matrix.rows(), 24);
    assert!(matches!(build_real_space(&p, 0, 2, Boundary::Pbc), Err(ModelError::EmptyLattice)));
    // At most 5 nonzero entries per row (4 bonds + on-site).
    for i in 0..rs.dim() {
        let nnz = (0..rs.dim())
            .filter(|&j| rs.matrix[(i, j)].norm() > 0.0)
            .count();
        assert!(nnz <= 5, "row {i} has {nnz} nonzeros");
    }
}

#[test]
fn obc_is_pbc_without_wrap_bonds() {
    let p = fig_pt_params(0.3);
    let pbc = build_real_space(&p, 3, 3, Boundary::Pbc).unwrap();
    let obc = build_real_space(&p, 3, 3, Boundary::Obc).unwrap();
    for i in 0..obc.dim() {
        for j in 0..obc.dim() {
            let d = obc.matrix[(i, j)];
            let pval = pbc.matrix[(i, j)];
            // Every OBC entry is present in PBC with the same value.
            if d.norm() > 0.0 {
                assert!((d - pval).norm() < 1e-15);
            }
        }
    }
}

#[test]
fn single_cell_pbc_equals_bloch_at_zero() {
    let p = fig_pt_params(0.77);
    let rs = build_real_space(&p, 1, 1, Boundary::Pbc).unwrap();
    let h0 = build_bloch(&p, Momentum::new(0.0, 0.0));
    assert!(rs.matrix.max_diff(&h0) < 1e-14);
}

#[test]
fn consistency_small_grids() {
    let p = fig_pt_params(0.77);
    for n in [2usize, 4] {
        let rep = bloch_consistency_report(&p, n, n, Boundary::Pbc).unwrap();
        assert!(rep.max_distance < 1e-9, "n={n}: {:e}", rep.max_distance);
        assert_eq!(rep.rows.len(), n * n);
        for row in &rep.rows {
            assert!(!row.solver_flag);
        }
    }
}

#[test]
fn consistency_hermitian_spectra_real() {
    let p = P::hermitian(1.0, 0.7, 0.4, 0.9, 0.0);
    let rep = bloch_consistency_report(&p, 4, 4, Boundary::Pbc).unwrap();
    for row in &rep.rows {
        for e in &row.matched {
            assert!(e.im.abs() < 1e-10, "imag part {:e}", e.im);
        }
    }
}

#[test]
fn consistency_rejects_obc() {
    let p = fig_pt_params(0.77);
    assert!(matches!(
        bloch_consistency_report(&p, 4, 4, Boundary::Obc),
        Err(ModelError::ConsistencyNeedsPbc)
    ));
}

#[test]
fn pbc_spectrum_matches_bloch_union_various_sizes() {
    let p = P::uniform(1.0, 0.8, 0.75, 0.6, 0.0, 0.75);
    for n in [2usize, 4, 8] {
        let rep = bloch_consistency_report(&p, n, n, Boundary::Pbc).unwrap();
        assert!(rep.max_distance < 1e-9, "n={n}: {:e}", rep.max_distance);
    }
}

#[test]
fn real_space_eigensolver_handles_256() {
    let p = fig_pt_params(0.77);
    let rs = build_real_space(&p, 8, 8, Boundary::Pbc).unwrap();
    let e = eigen(&rs.matrix);
    assert!(e.converged);
    assert!(e.max_residual() < 1e-9, "residual {:e}", e.max_residual());
}
