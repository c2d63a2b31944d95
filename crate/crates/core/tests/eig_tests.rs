use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssh2d_core::eig::{eigen, matching_distance};
use ssh2d_core::mat::CMat;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMat<f64> {
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    m
}

#[test]
fn diagonal_matrix_is_exact() {
    let z = C64::new(0.0, 0.0);
    let m = CMat::from_rows(&[
        &[C64::new(3.0, 1.0), z, z],
        &[z, C64::new(-2.0, 0.0), z],
        &[z, z, C64::new(0.5, -4.0)],
    ]);
    let e = eigen(&m);
    assert!(e.converged);
    let expect = [C64::new(-2.0, 0.0), C64::new(0.5, -4.0), C64::new(3.0, 1.0)];
    for (a, b) in e.values.iter().zip(expect.iter()) {
        assert!((a - b).norm() < 1e-14, "{a} vs {b}");
    }
    assert!(e.max_residual() < 1e-13);
}

#[test]
fn four_site_ring_spectrum() {
    // Alternating-bond four-ring with both effective bonds equal to 2:
    // spectrum {4, 0, 0, -4}.
    let z = C64::new(0.0, 0.0);
    let two = C64::new(2.0, 0.0);
    let m = CMat::from_rows(&[
        &[z, two, z, two],
        &[two, z, two, z],
        &[z, two, z, two],
        &[two, z, two, z],
    ]);
    let e = eigen(&m);
    let expect = [
        C64::new(-4.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(4.0, 0.0),
    ];
    assert!(matching_distance(&e.values, &expect) < 1e-12);
    assert!(e.max_residual() < 1e-12);
    assert!(e.has_degeneracy());
}

#[test]
fn random_residuals_small_4x4() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = random_matrix(&mut rng, 4);
        let e = eigen(&m);
        assert!(e.converged);
        worst = worst.max(e.max_residual());
    }
    assert!(worst < 1e-10, "worst residual {worst:e}");
}

#[test]
fn random_residuals_various_sizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2usize, 3, 5, 8, 16, 32] {
        for _ in 0..5 {
            let m = random_matrix(&mut rng, n);
            let e = eigen(&m);
            assert!(e.converged, "n={n}");
            assert!(e.max_residual() < 1e-9, "n={n}: {:e}", e.max_residual());
        }
    }
}

#[test]
fn identity_shift_moves_eigenvalues_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = random_matrix(&mut rng, 4);
    let mu = C64::new(0.37, 0.0);
    let shifted = m.add_scaled(&CMat::identity(4), -mu);
    let e0 = eigen(&m);
    let e1 = eigen(&shifted);
    let moved: Vec<C64> = e0.values.iter().map(|l| l - mu).collect();
    assert!(matching_distance(&moved, &e1.values) < 1e-11);
    // Same eigenvectors up to phase: compare overlap magnitudes.
    for (v0, v1) in e0.vectors.iter().zip(e1.vectors.iter()) {
        let ov = ssh2d_core::mat::vdot(v0, v1).norm();
        assert!((ov - 1.0).abs() < 1e-8, "overlap {ov}");
    }
}

#[test]
fn defective_jordan_block_flags_degeneracy_and_coalescence() {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let lam = C64::new(0.3, -0.2);
    let m = CMat::from_rows(&[&[lam, o], &[z, lam]]);
    let e = eigen(&m);
    assert!(e.has_degeneracy());
    // Eigenvectors coalesce for a Jordan block.
    let ov = ssh2d_core::mat::vdot(&e.vectors[0], &e.vectors[1]).norm();
    assert!(ov > 0.99, "coalescence overlap {ov}");
    // The flagged cluster still has an orthonormal near-invariant basis.
    let basis = &e.cluster_bases[0];
    assert_eq!(basis.len(), 2);
    let cross = ssh2d_core::mat::vdot(&basis[0], &basis[1]).norm();
    assert!(cross < 1e-10, "cluster basis not orthonormal: {cross}");
}

#[test]
fn hermitian_degeneracy_keeps_orthogonal_vectors() {
    // Hermitian with an exact double eigenvalue: vectors must stay orthogonal.
    let z = C64::new(0.0, 0.0);
    let m = CMat::from_rows(&[
        &[C64::new(1.0, 0.0), z, z],
        &[z, C64::new(1.0, 0.0), z],
        &[z, z, C64::new(2.0, 0.0)],
    ]);
    let e = eigen(&m);
    assert!(e.has_degeneracy());
    let ov = ssh2d_core::mat::vdot(&e.vectors[0], &e.vectors[1]).norm();
    assert!(ov < 1e-8, "unexpected coalescence {ov}");
}

#[test]
fn matching_distance_detects_mismatch() {
    let a = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let b = [C64::new(0.0, 0.0), C64::new(1.5, 0.0)];
    let d = matching_distance(&a, &b);
    assert!((d - 0.5).abs() < 1e-15);
    let c = [C64::new(0.0, 0.0)];
    assert!(matching_distance(&a, &c).is_infinite());
}

#[test]
fn vectors_are_unit_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let m = random_matrix(&mut rng, 6);
    let e = eigen(&m);
    for v in &e.vectors {
        let n = ssh2d_core::mat::vec_norm(v);
        assert!((n - 1.0).abs() < 1e-12);
    }
}
