//! Closed-form eigenvalues and eigenvectors of the Bloch matrix, in two
//! clearly separated variants, cross-validated against the numeric oracle.
//!
//! * [`FormulaSet::Literal`] evaluates the quoted closed-form expressions
//!   verbatim, exactly as transcribed. Several of those expressions contain
//!   typographical slips; the [`crate::validate`] module quantifies each one
//!   against the oracle.
//! * [`FormulaSet::Corrected`] evaluates re-derived expressions that agree
//!   with the numeric eigensolver to machine precision.
//!
//! All closed forms are derived for the uniform gain pattern (γ, −γ, −γ, γ)
//! and for zero chemical potential; a nonzero μ only shifts the spectrum, so
//! energies are reported as `−μ ± sqrt(A ± sqrt(J))` and eigenvector formulas
//! are evaluated at the unshifted energy `E + μ`.

use crate::eig::{self, Eigen};
use crate::model::{build_bloch, ModelError, ModelParams, Momentum};
use crate::scalar::{c, cis, cr, r, Real};
use num_complex::Complex;

/// Which set of closed-form expressions to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormulaSet {
    /// The closed forms transcribed verbatim (they contain known slips;
    /// see [`crate::validate`] for the quantified discrepancy log).
    Literal,
    /// Re-derived closed forms that match the numeric oracle.
    Corrected,
}

/// The scalar building blocks of the closed-form spectrum at one momentum.
///
/// `p = t₂ + v e^{−i a k_y}` and `s = u + t₁ e^{i a k_x}` are the two bond
/// amplitudes; `A = |p|² + |s|² − γ²`; `J` is the inner discriminant whose
/// zeros mark band degeneracies, assembled from the auxiliary real functions
/// `F₁`, `F₂`.
#[derive(Clone, Copy, Debug)]
pub struct ClosedFormPieces<R: Real> {
    pub p: Complex<R>,
    pub s: Complex<R>,
    pub a: R,
    pub f1: R,
    pub f2: R,
    pub j: R,
}

/// Evaluate `A`, `F₁`, `F₂`, `J` at one momentum for the chosen formula set.
///
/// Errors unless the gain pattern is the uniform (γ, −γ, −γ, γ) one, because
/// the closed forms are derived only for that case.
pub fn closed_form_pieces<R: Real>(
    params: &ModelParams<R>,
    k: Momentum<R>,
    set: FormulaSet,
) -> Result<ClosedFormPieces<R>, ModelError> {
    params.validate()?;
    let gamma = params.uniform_gamma()?;
    let (u, t1, v, t2) = (params.u, params.t1, params.v, params.t2);
    let akx = params.a * k.kx;
    let aky = params.a * k.ky;
    let two = r::<R>(2.0);

    let p = cr(t2) + cr(v) * cis(-aky);
    let s = cr(u) + cr(t1) * cis(akx);
    let p2 = p.norm_sqr();
    let s2 = s.norm_sqr();
    let a = p2 + s2 - gamma * gamma;

    let (f1, f2) = match set {
        FormulaSet::Literal => {
            // Verbatim transcription. Relative to the corrected pair below,
            // F₁ lacks cos(a kx) on its v t₁² term and carries a spurious
            // bare t₁² t₂ term; F₂ lacks the v t₁² sin(a kx) term entirely.
            let f1 = u * v * t1
                + v * t1 * t1
                + t1 * t1 * t2
                + u * t1 * t2 * aky.cos()
                + t2 * t1 * t1 * (akx + aky).cos()
                + u * u * v * akx.cos()
                + u * v * t1 * (two * akx).cos()
                + t2 * u * u * (akx + aky).cos()
                + u * t1 * t2 * (two * akx + aky).cos();
            let f2 = u * t1 * t2 * aky.sin()
                + t2 * t1 * t1 * (akx + aky).sin()
                + u * u * v * akx.sin()
                + u * v * t1 * (two * akx).sin()
                + t2 * u * u * (akx + aky).sin()
                + u * t1 * t2 * (two * akx + aky).sin();
            (f1, f2)
        }
        FormulaSet::Corrected => {
            // F₁ + iF₂ = q·r·s with q = v + t₂ e^{i a ky}, r = t₁ + u e^{i a kx}.
            let q = cr(v) + cr(t2) * cis(aky);
            let rr = cr(t1) + cr(u) * cis(akx);
            let qrs = q * rr * s;
            (qrs.re, qrs.im)
        }
    };

    let four = r::<R>(4.0);
    let j = match set {
        // Verbatim: the gain term reads −4(|p|² + |s|²)γ².
        FormulaSet::Literal => {
            two * p2 * s2 + two * (t2 + v * aky.cos()) * f1 - two * (v * aky.sin()) * f2
                - four * (p2 + s2) * gamma * gamma
        }
        // Corrected: the gain term is −4γ²|p|².
        FormulaSet::Corrected => {
            two * p2 * s2 + two * (t2 + v * aky.cos()) * f1 - two * (v * aky.sin()) * f2
                - four * gamma * gamma * p2
        }
    };

    Ok(ClosedFormPieces { p, s, a, f1, f2, j })
}

/// The four closed-form energies, in the fixed branch order
/// `[+√(A+√J), −√(A+√J), +√(A−√J), −√(A−√J)]` minus μ.
///
/// Square roots take the principal branch (non-negative real part; positive
/// imaginary part on the cut), so each entry is a continuous function of `A`
/// and `J` away from the cut and the labels never swap.
pub fn closed_form_energies<R: Real>(
    params: &ModelParams<R>,
    k: Momentum<R>,
    set: FormulaSet,
) -> Result<[Complex<R>; 4], ModelError> {
    let pieces = closed_form_pieces(params, k, set)?;
    let sqrt_j = cr(pieces.j).sqrt();
    let outer_plus = (cr(pieces.a) + sqrt_j).sqrt();
    let outer_minus = (cr(pieces.a) - sqrt_j).sqrt();
    let mu = cr(params.mu);
    Ok([
        outer_plus - mu,
        -outer_plus - mu,
        outer_minus - mu,
        -outer_minus - mu,
    ])
}

/// Closed-form eigenvector of one band, unnormalized, plus the diagnostics
/// used by the exceptional-point machinery.
#[derive(Clone, Copy, Debug)]
pub struct EigvecComponents<R: Real> {
    /// The eight pieces Δ_{j0}, Δ_{j1} with ψ_j = Δ_{j0} + iΔ_{j1}. For the
    /// corrected set the split is simply (Re ψ_j, Im ψ_j).
    pub delta: [[Complex<R>; 2]; 4],
    /// Unnormalized components ψ₁..ψ₄.
    pub psi: [Complex<R>; 4],
    /// Conjugated normalization Σ_j (|Δ_{j0}|² + |Δ_{j1}|²).
    pub n_alpha: R,
    /// Unconjugated self-overlap Σ_j ψ_j² — vanishes at an exceptional point.
    pub self_overlap: Complex<R>,
    /// Set when the vector vanished or is self-orthogonal (the EP signature);
    /// the components are still returned as computed.
    pub defective: bool,
}

impl<R: Real> EigvecComponents<R> {
    /// Components scaled to unit conjugated norm, or `None` when the vector
    /// vanished.
    pub fn normalized(&self) -> Option<[Complex<R>; 4]> {
        let norm = self.psi.iter().map(|z| z.norm_sqr()).fold(R::zero(), |a, b| a + b).sqrt();
        if norm <= R::zero() {
            return None;
        }
        let inv = cr(R::one() / norm);
        Some([self.psi[0] * inv, self.psi[1] * inv, self.psi[2] * inv, self.psi[3] * inv])
    }
}

/// Evaluate the closed-form eigenvector pieces for `band` (0..4, in the order
/// of [`closed_form_energies`]) at the supplied energy `energy`, which should
/// come from [`closed_form_energies`] with the same formula set.
pub fn closed_form_eigenvector<R: Real>(
    params: &ModelParams<R>,
    k: Momentum<R>,
    band: usize,
    energy: Complex<R>,
    set: FormulaSet,
) -> Result<EigvecComponents<R>, ModelError> {
    assert!(band < 4, "band index out of range");
    params.validate()?;
    let gamma = params.uniform_gamma()?;
    let (u, t1, v, t2) = (params.u, params.t1, params.v, params.t2);
    let akx = params.a * k.kx;
    let aky = params.a * k.ky;
    let two = r::<R>(2.0);
    // The formulas assume μ = 0; undo the trivial spectral shift.
    let e = energy + cr(params.mu);

    let p = cr(t2) + cr(v) * cis(-aky);
    let s = cr(u) + cr(t1) * cis(akx);
    let q = cr(v) + cr(t2) * cis(aky);
    let rr = cr(t1) + cr(u) * cis(akx);
    let p2 = p.norm_sqr();
    let s2 = s.norm_sqr();
    let q2 = q.norm_sqr();
    let g2 = gamma * gamma;
    let e2 = e * e;

    let delta: [[Complex<R>; 2]; 4] = match set {
        FormulaSet::Literal => {
            let (cx, sx) = (akx.cos(), akx.sin());
            let (cy, sy) = (aky.cos(), aky.sin());
            let (c2x, s2x) = ((two * akx).cos(), (two * akx).sin());
            let (cxy, sxy) = ((akx + aky).cos(), (akx + aky).sin());
            let (c2xy, s2xy) = ((two * akx + aky).cos(), (two * akx + aky).sin());
            let (cx2y, sx2y) = ((two * aky + akx).cos(), (two * aky + akx).sin());
            let (c2y, s2y) = ((two * aky).cos(), (two * aky).sin());
            let eg = e2 - cr(g2);

            let d10 = cr(u * v * t1
                + v * t1 * t1 * cx
                + u * t1 * t2 * cy
                + t2 * t1 * t1 * cxy
                + u * u * v * cx
                + u * v * t1 * c2x
                + t2 * u * u * cxy
                + u * t1 * t2 * c2xy)
                - cr(t2 + v * cy) * (eg - cr(p2));
            let d11 = cr(v * t1 * t1 * sx
                + u * t1 * t2 * sy
                + t2 * t1 * t1 * sxy
                + u * u * v * sx
                + u * v * t1 * s2x
                + t2 * u * u * sxy
                + u * t1 * t2 * s2xy)
                - cr(v * sy) * (eg - cr(q2));
            let d20 = e
                * cr((v + t2 * cy) * (t1 + u * cx) - u * t2 * sx * sy
                    + (t2 + v * cy) * (u + t1 * cx)
                    - v * t1 * sx * sy)
                + cr(gamma
                    * (t2 * sy * (t1 + u * cx) + u * sx * (v + t2 * cy)
                        - v * sy * (u + t1 * cx)
                        - t1 * sx * (t2 + v * cy)));
            // Verbatim, including the "(v + t₂ sin(a k_y))" factor where the
            // cosine would be expected.
            let d21 = e
                * cr(t2 * sy * (t1 + u * cx)
                    + u * sx * (v + t2 * sy)
                    + v * sy * (u + t1 * cx)
                    - t1 * sx * (t2 + v * cy))
                - cr(gamma
                    * ((v + t2 * cy) * (t1 + u * cx) + u * t2 * sx * sy
                        + (t2 + v * cy) * (u + t1 * cx)
                        - v * t1 * sx * sy));
            let d30 = cr(s2 * (v + t2 * cy)) - eg * cr(t1 + u * cx)
                + cr(u * v * t2
                    + u * v * v * cy
                    + u * t2 * t2 * cy
                    + u * v * t2 * c2y
                    + t1 * t2 * v * cx
                    + t1 * (t2 * t2 + v * v) * cxy
                    + t1 * t2 * v * cx2y);
            let d31 = cr(-s2 * t2 * sy) + eg * cr(u * sx)
                - cr(u * v * v * sy
                    + u * t2 * t2 * sy
                    + u * v * t2 * s2y
                    + t1 * t2 * v * sx
                    + t1 * (t2 * t2 + v * v) * sxy
                    + t1 * t2 * v * sx2y);
            let d40 = e * e2 - e * cr(g2) - e * cr(p2) - e * cr(s2);
            let d41 = cr(gamma * g2 + gamma * p2 + gamma * s2) - cr(gamma) * e2;
            [[d10, d11], [d20, d21], [d30, d31], [d40, d41]]
        }
        FormulaSet::Corrected => {
            let ig = c(R::zero(), gamma);
            let psi1 = p * (e + ig) * (e + ig) - p * cr(q2) + q * rr * s;
            let psi2 = e * (p * s.conj() + q * rr) + ig * (p * s.conj() - q * rr);
            let psi3 = rr * (e2 + cr(g2)) + p * q.conj() * s.conj() - rr * cr(s2);
            let psi4 = e * e2 + ig * e2 + e * cr(g2 - q2 - s2) + ig * cr(g2 + q2 - s2);
            let split = |z: Complex<R>| [cr(z.re), cr(z.im)];
            [split(psi1), split(psi2), split(psi3), split(psi4)]
        }
    };

    let i = c(R::zero(), R::one());
    let psi = [
        delta[0][0] + i * delta[0][1],
        delta[1][0] + i * delta[1][1],
        delta[2][0] + i * delta[2][1],
        delta[3][0] + i * delta[3][1],
    ];
    let n_alpha = delta
        .iter()
        .flatten()
        .map(|z| z.norm_sqr())
        .fold(R::zero(), |a, b| a + b);
    let self_overlap = psi.iter().map(|z| z * z).fold(Complex::new(R::zero(), R::zero()), |a, b| a + b);

    // Natural magnitude scale of the cubic-in-parameters components; used to
    // make the vanishing checks relative.
    let hop = u.abs().max(t1.abs()).max(v.abs()).max(t2.abs()).max(gamma.abs());
    let scale = (R::one() + hop.max(e.norm())).powi(6);
    let tiny = r::<R>(1e-12);
    let self_orth_tol = r::<R>(1e-6);
    let defective = n_alpha < tiny * scale || self_overlap.norm() < self_orth_tol * n_alpha;

    Ok(EigvecComponents { delta, psi, n_alpha, self_overlap, defective })
}

/// Ground-truth eigendecomposition of the Bloch matrix at one momentum.
pub fn oracle_bands<R: Real>(params: &ModelParams<R>, k: Momentum<R>) -> Eigen<R> {
    eig::eigen(&build_bloch(params, k))
}

/// Discriminant reconstructed from the oracle: `((Ê₁² − Ê₃²)/2)²` where
/// `Ê = E + μ` and the branches are identified from the (Re, Im)-sorted
/// oracle energies (largest two real parts). Real and equal to `J` wherever
/// the corrected closed form holds; its zero set marks band degeneracies.
pub fn j_oracle<R: Real>(params: &ModelParams<R>, k: Momentum<R>) -> Complex<R> {
    let e = oracle_bands(params, k);
    let mu = cr(params.mu);
    let big = e.values[3] + mu;
    let small = e.values[2] + mu;
    let half = (big * big - small * small) * cr(r::<R>(0.5));
    half * half
}

/// Minimum over the supplied momenta of the smallest `|Re E|` from the
/// oracle — the direct gap at the Fermi level (taken at zero energy).
pub fn fermi_gap<R: Real>(
    params: &ModelParams<R>,
    grid: &[Momentum<R>],
) -> Result<R, ModelError> {
    if grid.is_empty() {
        return Err(ModelError::EmptyLattice);
    }
    params.validate()?;
    let mut best = R::infinity();
    for &k in grid {
        let e = oracle_bands(params, k);
        for val in &e.values {
            best = best.min(val.re.abs());
        }
    }
    Ok(best)
}

/// Uniform line scan `a k_x ∈ [−π, π]`, fixed `a k_y`, `n` points inclusive.
pub fn kx_line<R: Real>(params: &ModelParams<R>, aky: R, n: usize) -> Vec<Momentum<R>> {
    let pi = R::PI();
    (0..n)
        .map(|i| {
            let t = r::<R>(i as f64) / r::<R>((n.max(2) - 1) as f64);
            Momentum::new((-pi + (pi + pi) * t) / params.a, aky / params.a)
        })
        .collect()
}
