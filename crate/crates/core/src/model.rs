//! Momentum-space and real-space Hamiltonians of the four-site (A,B,C,D) unit
//! cell with staggered imaginary on-site potentials, plus quantitative symmetry
//! diagnostics.

use crate::eig::{self, matching_assignment};
use crate::mat::{sigma0, sigma_x, sigma_y, sigma_z, CMat};
use crate::scalar::{c, cis, cr, r, Real};
use num_complex::Complex;
use std::collections::BTreeMap;

/// Full parameter set of the lattice model. Hoppings `u`, `t1` act along x,
/// `v`, `t2` along y; `gains` are the four on-site imaginary potentials
/// (γ_A, γ_B, γ_C, γ_D); `mu` is the chemical potential and `a` the lattice
/// constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<R: Real> {
    pub u: R,
    pub t1: R,
    pub v: R,
    pub t2: R,
    pub mu: R,
    pub a: R,
    pub gains: [R; 4],
}

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum ModelError {
    #[error("lattice constant must be positive, got {0}")]
    BadLatticeConstant(String),
    #[error("non-finite parameter: {0}")]
    NonFinite(String),
    #[error("lattice sizes must be at least 1")]
    EmptyLattice,
    #[error("real-space/Bloch consistency is defined only for periodic boundaries")]
    ConsistencyNeedsPbc,
    #[error("operation requires the uniform gain pattern (γ, -γ, -γ, γ)")]
    UniformGainRequired,
}

impl<R: Real> ModelParams<R> {
    /// Uniform gain pattern (γ, −γ, −γ, γ): the standard non-Hermitian model.
    pub fn uniform(u: R, t1: R, v: R, t2: R, mu: R, gamma: R) -> Self {
        Self { u, t1, v, t2, mu, a: R::one(), gains: [gamma, -gamma, -gamma, gamma] }
    }

    /// Two-gain pattern (γ₁, −γ₁, γ₂, −γ₂): the primed model variant.
    pub fn two_gain(u: R, t1: R, v: R, t2: R, mu: R, g1: R, g2: R) -> Self {
        Self { u, t1, v, t2, mu, a: R::one(), gains: [g1, -g1, g2, -g2] }
    }

    /// Hermitian model (no gain/loss).
    pub fn hermitian(u: R, t1: R, v: R, t2: R, mu: R) -> Self {
        Self { u, t1, v, t2, mu, a: R::one(), gains: [R::zero(); 4] }
    }

    /// Check the type invariants.
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.a > R::zero()) {
            return Err(ModelError::BadLatticeConstant(format!("{}", self.a)));
        }
        for (name, val) in [
            ("u", self.u),
            ("t1", self.t1),
            ("v", self.v),
            ("t2", self.t2),
            ("mu", self.mu),
        ] {
            if !val.is_finite() {
                return Err(ModelError::NonFinite(name.into()));
            }
        }
        for g in self.gains {
            if !g.is_finite() {
                return Err(ModelError::NonFinite("gains".into()));
            }
        }
        Ok(())
    }

    /// True when the gains follow the uniform pattern (γ, −γ, −γ, γ).
    pub fn is_uniform_gain(&self) -> bool {
        let g = self.gains[0];
        let tol = R::from_f64(1e-12).unwrap() * (R::one() + g.abs());
        (self.gains[1] + g).abs() <= tol
            && (self.gains[2] + g).abs() <= tol
            && (self.gains[3] - g).abs() <= tol
    }

    /// The uniform gain magnitude γ, or an error for other patterns.
    pub fn uniform_gamma(&self) -> Result<R, ModelError> {
        if self.is_uniform_gain() {
            Ok(self.gains[0])
        } else {
            Err(ModelError::UniformGainRequired)
        }
    }
}

/// Wavenumber pair; all operations are 2π/a-periodic in each component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Momentum<R: Real> {
    pub kx: R,
    pub ky: R,
}

impl<R: Real> Momentum<R> {
    pub fn new(kx: R, ky: R) -> Self {
        Self { kx, ky }
    }

    /// Canonical reduction of both components to (−π/a, π/a]. Idempotent.
    pub fn reduced(self, a: R) -> Self {
        let period = R::from_f64(2.0).unwrap() * R::PI() / a;
        let reduce = |k: R| {
            let mut x = k - (k / period).round() * period;
            let half = period / R::from_f64(2.0).unwrap();
            if x <= -half {
                x += period;
            }
            if x > half {
                x -= period;
            }
            x
        };
        Self { kx: reduce(self.kx), ky: reduce(self.ky) }
    }
}

/// 4x4 Bloch matrix in the (A,B,C,D) basis:
///
/// ```text
/// | iγ_A−μ        u+t1 e^{iakx}   0              t2+v e^{−iaky} |
/// | u+t1 e^{−iakx} iγ_B−μ         v+t2 e^{iaky}  0              |
/// | 0             v+t2 e^{−iaky}  iγ_C−μ         t1+u e^{iakx}  |
/// | t2+v e^{iaky}  0              t1+u e^{−iakx} iγ_D−μ         |
/// ```
pub fn build_bloch<R: Real>(p: &ModelParams<R>, k: Momentum<R>) -> CMat<R> {
    let zero = Complex::new(R::zero(), R::zero());
    let ex = cis(p.a * k.kx);
    let ey = cis(p.a * k.ky);
    let s = cr(p.u) + cr(p.t1) * ex; // (1,2)
    let pp = cr(p.t2) + cr(p.v) * ey.conj(); // (1,4)
    let q = cr(p.v) + cr(p.t2) * ey; // (2,3)
    let rr = cr(p.t1) + cr(p.u) * ex; // (3,4)
    let diag = |g: R| c(-p.mu, g);
    CMat::from_rows(&[
        &[diag(p.gains[0]), s, zero, pp],
        &[s.conj(), diag(p.gains[1]), q, zero],
        &[zero, q.conj(), diag(p.gains[2]), rr],
        &[pp.conj(), zero, rr.conj(), diag(p.gains[3])],
    ])
}

/// Analytic derivative of the Bloch matrix with respect to `kx`.
pub fn bloch_dkx<R: Real>(p: &ModelParams<R>, k: Momentum<R>) -> CMat<R> {
    let zero = Complex::new(R::zero(), R::zero());
    let ia = c(R::zero(), p.a);
    let ex = cis(p.a * k.kx);
    let ds = cr(p.t1) * ex * ia; // d/dkx of (1,2)
    let dr = cr(p.u) * ex * ia; // d/dkx of (3,4)
    CMat::from_rows(&[
        &[zero, ds, zero, zero],
        &[ds.conj(), zero, zero, zero],
        &[zero, zero, zero, dr],
        &[zero, zero, dr.conj(), zero],
    ])
}

/// Analytic derivative of the Bloch matrix with respect to `ky`.
pub fn bloch_dky<R: Real>(p: &ModelParams<R>, k: Momentum<R>) -> CMat<R> {
    let zero = Complex::new(R::zero(), R::zero());
    let ia = c(R::zero(), p.a);
    let ey = cis(p.a * k.ky);
    let dp = -cr(p.v) * ey.conj() * ia; // d/dky of (1,4)
    let dq = cr(p.t2) * ey * ia; // d/dky of (2,3)
    CMat::from_rows(&[
        &[zero, zero, zero, dp],
        &[zero, zero, dq, zero],
        &[zero, dq.conj(), zero, zero],
        &[dp.conj(), zero, zero, zero],
    ])
}

/// Residual norms of the symmetry identities at one momentum. Keys:
///
/// * `phs` — particle-hole, `P H*(k) P⁻¹ + H(−k)` with `P = σ0 ⊗ σz`
/// * `trs` — time reversal, `U H*(k) U⁻¹ − H(−k)` with `U = i σ0 ⊗ σy`
/// * `trs-swapped` — same with the tensor factors exchanged (`i σy ⊗ σ0`)
/// * `chiral` — `C H(k) C⁻¹ + H(k)` with `C = σy ⊗ σy`
/// * `chiral-mirror` — `M H(k) M⁻¹ + H(k)` with `M = σx ⊗ σz`
/// * `chiral-mirror-swapped` — same with the factors exchanged (`σz ⊗ σx`)
pub fn symmetry_residuals<R: Real>(p: &ModelParams<R>, k: Momentum<R>) -> BTreeMap<String, R> {
    let h_k = build_bloch(p, k);
    let h_mk = build_bloch(p, Momentum::new(-k.kx, -k.ky));
    let mut out = BTreeMap::new();

    let p_op = sigma0::<R>().kron(&sigma_z());
    let lhs = p_op.matmul(&h_k.conj()).matmul(&p_op);
    out.insert("phs".into(), lhs.add_scaled(&h_mk, cr(R::one())).max_abs());

    let iu = c(R::zero(), R::one());
    for (name, u_op) in [
        ("trs", sigma0::<R>().kron(&sigma_y()).scaled(iu)),
        ("trs-swapped", sigma_y::<R>().kron(&sigma0()).scaled(iu)),
    ] {
        let lhs = u_op.matmul(&h_k.conj()).matmul(&u_op.adjoint());
        out.insert(name.into(), lhs.add_scaled(&h_mk, -cr(R::one())).max_abs());
    }

    for (name, m_op) in [
        ("chiral", sigma_y::<R>().kron(&sigma_y())),
        ("chiral-mirror", sigma_x::<R>().kron(&sigma_z())),
        ("chiral-mirror-swapped", sigma_z::<R>().kron(&sigma_x())),
    ] {
        let lhs = m_op.matmul(&h_k).matmul(&m_op.adjoint());
        out.insert(name.into(), lhs.add_scaled(&h_k, cr(R::one())).max_abs());
    }
    out
}

/// Spectral particle-hole check: matching distance between the eigenvalues of
/// `H(−k)` and the negated conjugates of the eigenvalues of `H(k)`.
pub fn spectral_phs_distance<R: Real>(p: &ModelParams<R>, k: Momentum<R>) -> R {
    let e_k = eig::eigen(&build_bloch(p, k));
    let e_mk = eig::eigen(&build_bloch(p, Momentum::new(-k.kx, -k.ky)));
    let negated: Vec<Complex<R>> = e_k.values.iter().map(|l| -l.conj()).collect();
    eig::matching_distance(&negated, &e_mk.values)
}

/// Boundary condition for finite lattices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Pbc,
    Obc,
}

/// Finite-lattice Hamiltonian with its site indexing.
#[derive(Clone, Debug)]
pub struct RealSpaceHamiltonian<R: Real> {
    pub matrix: CMat<R>,
    pub boundary: Boundary,
    pub nx: usize,
    pub ny: usize,
}

impl<R: Real> RealSpaceHamiltonian<R> {
    /// Row index of sublattice `subl` (0..4 for A,B,C,D) in cell `(cx, cy)`.
    /// Cells are row-major with x fastest.
    pub fn site_index(&self, cx: usize, cy: usize, subl: usize) -> usize {
        debug_assert!(cx < self.nx && cy < self.ny && subl < 4);
        4 * (cy * self.nx + cx) + subl
    }

    pub fn dim(&self) -> usize {
        4 * self.nx * self.ny
    }
}

const A: usize = 0;
const B: usize = 1;
const CS: usize = 2;
const D: usize = 3;

/// Assemble the finite-lattice Hamiltonian.
///
/// Intra-cell bonds: u (A–B), t1 (C–D), v (B–C), t2 (D–A). Inter-cell bonds:
/// t1 (A at R to B at R+x), u (C at R to D at R+x), t2 (B at R to C at R+y),
/// v (D at R to A at R+y). On-site terms iγ_P − μ. Wrap bonds only for PBC.
pub fn build_real_space<R: Real>(
    p: &ModelParams<R>,
    nx: usize,
    ny: usize,
    bc: Boundary,
) -> Result<RealSpaceHamiltonian<R>, ModelError> {
    if nx == 0 || ny == 0 {
        return Err(ModelError::EmptyLattice);
    }
    p.validate()?;
    let dim = 4 * nx * ny;
    let mut h = CMat::zeros(dim, dim);
    let idx = |cx: usize, cy: usize, s: usize| 4 * (cy * nx + cx) + s;
    let bond = |h: &mut CMat<R>, i: usize, j: usize, amp: R| {
        h[(i, j)] = h[(i, j)] + cr(amp);
        h[(j, i)] = h[(j, i)] + cr(amp);
    };
    for cy in 0..ny {
        for cx in 0..nx {
            for s in 0..4 {
                let i = idx(cx, cy, s);
                h[(i, i)] = h[(i, i)] + c(-p.mu, p.gains[s]);
            }
            bond(&mut h, idx(cx, cy, A), idx(cx, cy, B), p.u);
            bond(&mut h, idx(cx, cy, CS), idx(cx, cy, D), p.t1);
            bond(&mut h, idx(cx, cy, B), idx(cx, cy, CS), p.v);
            bond(&mut h, idx(cx, cy, D), idx(cx, cy, A), p.t2);
            let xr = if cx + 1 < nx {
                Some(cx + 1)
            } else if bc == Boundary::Pbc {
                Some(0)
            } else {
                None
            };
            if let Some(cx1) = xr {
                bond(&mut h, idx(cx, cy, A), idx(cx1, cy, B), p.t1);
                bond(&mut h, idx(cx, cy, CS), idx(cx1, cy, D), p.u);
            }
            let yr = if cy + 1 < ny {
                Some(cy + 1)
            } else if bc == Boundary::Pbc {
                Some(0)
            } else {
                None
            };
            if let Some(cy1) = yr {
                bond(&mut h, idx(cx, cy, B), idx(cx, cy1, CS), p.t2);
                bond(&mut h, idx(cx, cy, D), idx(cx, cy1, A), p.v);
            }
        }
    }
    Ok(RealSpaceHamiltonian { matrix: h, boundary: bc, nx, ny })
}

/// One row of the real-space/Bloch consistency table.
#[derive(Clone, Debug)]
pub struct ConsistencyRow<R: Real> {
    pub kx: R,
    pub ky: R,
    /// Bloch eigenvalues at this momentum (sorted).
    pub bloch: Vec<Complex<R>>,
    /// Real-space eigenvalues assigned to this momentum.
    pub matched: Vec<Complex<R>>,
    /// Max deviation within this row.
    pub max_dev: R,
    /// True when either eigensolve failed to converge.
    pub solver_flag: bool,
}

/// Full consistency report.
#[derive(Clone, Debug)]
pub struct ConsistencyReport<R: Real> {
    pub rows: Vec<ConsistencyRow<R>>,
    /// Max deviation of the global assignment.
    pub max_distance: R,
}

/// Pair each discrete momentum of the commensurate grid with real-space
/// eigenvalues by a globally greedy closest-pair assignment and report the
/// deviations. Defined only for periodic boundaries.
pub fn bloch_consistency_report<R: Real>(
    p: &ModelParams<R>,
    nx: usize,
    ny: usize,
    bc: Boundary,
) -> Result<ConsistencyReport<R>, ModelError> {
    if bc != Boundary::Pbc {
        return Err(ModelError::ConsistencyNeedsPbc);
    }
    if nx < 2 || ny < 2 {
        return Err(ModelError::EmptyLattice);
    }
    let rs = build_real_space(p, nx, ny, Boundary::Pbc)?;
    let rs_eig = eig::eigen(&rs.matrix);

    let two_pi = R::from_f64(2.0).unwrap() * R::PI();
    let mut union: Vec<Complex<R>> = Vec::with_capacity(4 * nx * ny);
    let mut kpoints: Vec<(R, R, bool)> = Vec::with_capacity(nx * ny);
    for m in 0..nx {
        for n in 0..ny {
            let kx = two_pi * r::<R>(m as f64) / (r::<R>(nx as f64) * p.a);
            let ky = two_pi * r::<R>(n as f64) / (r::<R>(ny as f64) * p.a);
            let e = eig::eigen(&build_bloch(p, Momentum::new(kx, ky)));
            kpoints.push((kx, ky, !e.converged));
            union.extend(e.values.iter().cloned());
        }
    }
    let assign = matching_assignment(&union, &rs_eig.values);
    let max_distance = union
        .iter()
        .enumerate()
        .map(|(i, b)| (*b - rs_eig.values[assign[i]]).norm())
        .fold(R::zero(), R::max);

    let mut rows = Vec::with_capacity(kpoints.len());
    for (ki, (kx, ky, flag)) in kpoints.iter().enumerate() {
        let bloch: Vec<Complex<R>> = union[4 * ki..4 * ki + 4].to_vec();
        let matched: Vec<Complex<R>> =
            (0..4).map(|j| rs_eig.values[assign[4 * ki + j]]).collect();
        let max_dev = bloch
            .iter()
            .zip(matched.iter())
            .map(|(a, b)| (*a - *b).norm())
            .fold(R::zero(), R::max);
        rows.push(ConsistencyRow {
            kx: *kx,
            ky: *ky,
            bloch,
            matched,
            max_dev,
            solver_flag: *flag || !rs_eig.converged,
        });
    }
    Ok(ConsistencyReport { rows, max_distance })
}
