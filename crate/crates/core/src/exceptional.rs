//! Exceptional-point detection: discriminant zeros, eigenvector coalescence,
//! and the self-orthogonality sums.

use crate::model::{ModelError, ModelParams, Momentum};
use crate::scalar::{cr, r, Real};
use crate::spectrum::{
    closed_form_eigenvector, closed_form_energies, closed_form_pieces, FormulaSet,
};
use num_complex::Complex;

/// The self-orthogonality diagnostics at one momentum, in every reading of
/// the ambiguous sums.
///
/// The primary outputs `n1`, `n2` are the unconjugated self-overlaps
/// `Σ_c (ψ_c)²` of the first two energy branches, built from the unnormalized
/// corrected closed-form components: this is the self-orthogonality bilinear
/// appropriate to non-Hermitian eigenvectors and the reading that reproduces
/// the published dips. The conjugated readings and the per-component sums
/// over bands are also reported so the conventions can be compared.
#[derive(Clone, Copy, Debug)]
pub struct SelfOrthogonality<R: Real> {
    pub k: Momentum<R>,
    /// Unconjugated self-overlap of branch 1 (`+√(A+√J)`).
    pub n1: Complex<R>,
    /// Unconjugated self-overlap of branch 2 (`−√(A+√J)`).
    pub n2: Complex<R>,
    /// Unconjugated self-overlap of each of the four branches.
    pub band_unconjugated: [Complex<R>; 4],
    /// Conjugated norm `Σ_c |ψ_c|²` of each branch.
    pub band_conjugated: [R; 4],
    /// Alternate reading: for components c = 1, 2, the sum over the four
    /// branches of `(ψ_c)²` (unconjugated).
    pub component_unconjugated: [Complex<R>; 2],
    /// Alternate reading: same sums with the conjugated pairing `|ψ_c|²`.
    pub component_conjugated: [R; 2],
}

/// Evaluate every reading of the self-orthogonality sums at one momentum.
pub fn self_orthogonality<R: Real>(
    params: &ModelParams<R>,
    k: Momentum<R>,
) -> Result<SelfOrthogonality<R>, ModelError> {
    let energies = closed_form_energies(params, k, FormulaSet::Corrected)?;
    let mut band_unconjugated = [Complex::new(R::zero(), R::zero()); 4];
    let mut band_conjugated = [R::zero(); 4];
    let mut component_unconjugated = [Complex::new(R::zero(), R::zero()); 2];
    let mut component_conjugated = [R::zero(); 2];
    for (band, &e) in energies.iter().enumerate() {
        let vec = closed_form_eigenvector(params, k, band, e, FormulaSet::Corrected)?;
        band_unconjugated[band] = vec.self_overlap;
        band_conjugated[band] = vec.n_alpha;
        for c in 0..2 {
            component_unconjugated[c] += vec.psi[c] * vec.psi[c];
            component_conjugated[c] += vec.psi[c].norm_sqr();
        }
    }
    Ok(SelfOrthogonality {
        k,
        n1: band_unconjugated[0],
        n2: band_unconjugated[1],
        band_unconjugated,
        band_conjugated,
        component_unconjugated,
        component_conjugated,
    })
}

/// One refined zero of the inner discriminant `J` along a constant-`ky` line.
#[derive(Clone, Copy, Debug)]
pub struct DiscriminantRoot<R: Real> {
    pub kx: R,
    pub ky: R,
    /// Bracketing interval from the sign-change scan.
    pub bracket: (R, R),
    /// `J` at the reported root.
    pub j_at_root: R,
}

/// Scan `J(kx, ky)` for sign changes on `[kx_range.0, kx_range.1]` with `n`
/// samples and refine each bracket by bisection until `|J| < 1e−12` (or the
/// interval reaches floating-point resolution).
pub fn scan_discriminant_zeros<R: Real>(
    params: &ModelParams<R>,
    ky: R,
    kx_range: (R, R),
    n: usize,
    set: FormulaSet,
) -> Result<Vec<DiscriminantRoot<R>>, ModelError> {
    assert!(n >= 3, "need at least three samples");
    let j_at = |kx: R| -> Result<R, ModelError> {
        Ok(closed_form_pieces(params, Momentum::new(kx, ky), set)?.j)
    };
    let step = (kx_range.1 - kx_range.0) / r::<R>((n - 1) as f64);
    let mut roots = Vec::new();
    let mut prev_x = kx_range.0;
    let mut prev_j = j_at(prev_x)?;
    for i in 1..n {
        let x = kx_range.0 + step * r::<R>(i as f64);
        let j = j_at(x)?;
        if (prev_j <= R::zero()) != (j <= R::zero()) {
            let bracket = (prev_x, x);
            let (mut lo, mut hi, mut jlo) = (prev_x, x, prev_j);
            let tol = r::<R>(1e-12);
            for _ in 0..200 {
                let mid = (lo + hi) / r::<R>(2.0);
                if mid <= lo || mid >= hi {
                    break;
                }
                let jmid = j_at(mid)?;
                if jmid.abs() < tol {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (jlo <= R::zero()) != (jmid <= R::zero()) {
                    hi = mid;
                } else {
                    lo = mid;
                    jlo = jmid;
                }
            }
            let root = (lo + hi) / r::<R>(2.0);
            roots.push(DiscriminantRoot { kx: root, ky, bracket, j_at_root: j_at(root)? });
        }
        prev_x = x;
        prev_j = j;
    }
    Ok(roots)
}

/// Classification of a refined band degeneracy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegeneracyClass {
    /// Eigenvalues and eigenvectors both coalesce.
    ExceptionalPoint,
    /// Eigenvalues cross but the eigenvectors stay linearly independent.
    AccidentalDegeneracy,
}

/// A refined band degeneracy with its diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct ExceptionalPoint<R: Real> {
    pub k: Momentum<R>,
    /// Indices (into the sorted oracle spectrum) of the closest pair.
    pub bands: (usize, usize),
    /// Relative eigenvalue gap of that pair at the refined point.
    pub gap: R,
    /// `|⟨v_i|v_j⟩|` for the unit eigenvectors of the pair.
    pub coalescence: R,
    /// Corrected closed-form `J` at the point.
    pub j_value: R,
    /// Magnitudes of the primary self-orthogonality sums.
    pub self_orthogonality: (R, R),
    pub class: DegeneracyClass,
}

/// Options for [`detect_ep`].
#[derive(Clone, Copy, Debug)]
pub struct EpOptions<R: Real> {
    /// Relative eigenvalue-gap threshold for a confirmed degeneracy.
    pub tol_e: R,
    /// Coalescence threshold: overlap above `1 − tol_v` counts as coalesced.
    pub tol_v: R,
}

impl<R: Real> Default for EpOptions<R> {
    fn default() -> Self {
        // A degeneracy reached by refining k can only close the gap to about
        // sqrt(machine epsilon) because the gap grows like the square root of
        // the distance to the zero set, hence 1e-7 rather than anything
        // tighter.
        Self { tol_e: r(1e-7), tol_v: r(1e-2) }
    }
}

/// Rectangle in momentum space.
#[derive(Clone, Copy, Debug)]
pub struct KRect<R: Real> {
    pub lo: Momentum<R>,
    pub hi: Momentum<R>,
}

/// Coalescence measure for a near-degenerate pair: the eigenvector overlap of
/// the 2×2 restriction of `H` to the pair's (near-)invariant subspace.
///
/// This is well conditioned where raw eigenvector overlaps are not: at a
/// Hermitian degeneracy the restriction is Hermitian and the measure is ~0,
/// while at a defective point the restriction is a Jordan-like block and the
/// measure approaches 1.
fn pair_coalescence<R: Real>(h: &crate::mat::CMat<R>, pair: (usize, usize)) -> R {
    use crate::eig::{eigen_with, EigenOptions};
    let loose = eigen_with(h, EigenOptions { degeneracy_tol: r(1e-5) });
    let cluster = loose
        .clusters
        .iter()
        .position(|c| c.contains(&pair.0) && c.contains(&pair.1));
    let Some(ci) = cluster else {
        // The pair does not even cluster loosely: treat as independent.
        return R::zero();
    };
    let basis = &loose.cluster_bases[ci];
    if basis.len() < 2 {
        return R::zero();
    }
    let (q0, q1) = (&basis[0], &basis[1]);
    let hq0 = h.matvec(q0);
    let hq1 = h.matvec(q1);
    let m = [
        [crate::mat::vdot(q0, &hq0), crate::mat::vdot(q0, &hq1)],
        [crate::mat::vdot(q1, &hq0), crate::mat::vdot(q1, &hq1)],
    ];
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = cr(r::<R>(0.5));
    let disc = (tr * tr - det * cr(r::<R>(4.0))).sqrt();
    let l1 = (tr + disc) * half;
    let l2 = (tr - disc) * half;
    let scale = m.iter().flatten().map(|z| z.norm()).fold(R::zero(), R::max).max(R::one());
    let eps = r::<R>(1e-14) * scale;
    if m[0][1].norm() < eps && m[1][0].norm() < eps {
        // (Near-)scalar or diagonal restriction: two independent directions.
        return R::zero();
    }
    let vec_for = |l: Complex<R>| {
        let a = [m[0][1], l - m[0][0]];
        let b = [l - m[1][1], m[1][0]];
        let na = a[0].norm_sqr() + a[1].norm_sqr();
        let nb = b[0].norm_sqr() + b[1].norm_sqr();
        let (v, n) = if na >= nb { (a, na) } else { (b, nb) };
        let inv = cr(R::one() / n.sqrt());
        [v[0] * inv, v[1] * inv]
    };
    let w1 = vec_for(l1);
    let w2 = vec_for(l2);
    (w1[0].conj() * w2[0] + w1[1].conj() * w2[1]).norm()
}

fn min_pair_gap<R: Real>(params: &ModelParams<R>, k: Momentum<R>) -> (R, (usize, usize), R) {
    let e = crate::spectrum::oracle_bands(params, k);
    let mut best = (R::infinity(), (0usize, 1usize));
    let mut scale = R::zero();
    for i in 0..4 {
        scale = scale.max(e.values[i].norm());
        for j in (i + 1)..4 {
            let d = (e.values[i] - e.values[j]).norm();
            if d < best.0 {
                best = (d, (i, j));
            }
        }
    }
    (best.0, best.1, scale.max(R::one()))
}

/// Locate and classify band degeneracies inside `region` starting from an
/// `n`×`n` oracle scan. Grid local minima of the smallest pair gap are
/// refined by coordinate-wise golden-section minimization; points whose
/// refined relative gap stays above `tol_e` are dropped. Surviving points are
/// classified by eigenvector coalescence.
pub fn detect_ep<R: Real>(
    params: &ModelParams<R>,
    region: KRect<R>,
    n: usize,
    opts: EpOptions<R>,
) -> Result<Vec<ExceptionalPoint<R>>, ModelError> {
    assert!(n >= 8, "grid must be at least 8x8");
    params.validate()?;
    let nx = n;
    let ny = n;
    let fx = |i: usize| {
        region.lo.kx + (region.hi.kx - region.lo.kx) * r::<R>(i as f64) / r::<R>((nx - 1) as f64)
    };
    let fy = |j: usize| {
        region.lo.ky + (region.hi.ky - region.lo.ky) * r::<R>(j as f64) / r::<R>((ny - 1) as f64)
    };
    let mut gaps = vec![R::zero(); nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let (g, _, _) = min_pair_gap(params, Momentum::new(fx(i), fy(j)));
            gaps[j * nx + i] = g;
        }
    }
    // Local minima (8-neighborhood, boundary-aware).
    let mut candidates = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let g = gaps[j * nx + i];
            let mut is_min = true;
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii >= 0 && jj >= 0 && (ii as usize) < nx && (jj as usize) < ny {
                        if gaps[jj as usize * nx + ii as usize] < g {
                            is_min = false;
                        }
                    }
                }
            }
            if is_min {
                candidates.push((i, j));
            }
        }
    }

    let gap_at = |k: Momentum<R>| min_pair_gap(params, k).0;
    let golden = r::<R>(0.618_033_988_749_894_9);
    let mut out: Vec<ExceptionalPoint<R>> = Vec::new();
    for (i, j) in candidates {
        let hx = (region.hi.kx - region.lo.kx) / r::<R>((nx - 1) as f64);
        let hy = (region.hi.ky - region.lo.ky) / r::<R>((ny - 1) as f64);
        let mut k = Momentum::new(fx(i), fy(j));
        // Alternate golden-section line searches in kx and ky. The gap grows
        // like the square root of the distance to a degeneracy, so each line
        // search runs essentially to floating-point resolution, and each
        // round re-brackets with the full grid cell to let the other axis
        // move the minimum.
        for _ in 0..4 {
            for axis in 0..2 {
                let w = if axis == 0 { hx } else { hy };
                if w <= R::zero() {
                    continue;
                }
                let center = if axis == 0 { k.kx } else { k.ky };
                let mut a = center - w;
                let mut b = center + w;
                let mut c1 = b - golden * (b - a);
                let mut c2 = a + golden * (b - a);
                let eval = |x: R, k: Momentum<R>| {
                    if axis == 0 {
                        gap_at(Momentum::new(x, k.ky))
                    } else {
                        gap_at(Momentum::new(k.kx, x))
                    }
                };
                let mut f1 = eval(c1, k);
                let mut f2 = eval(c2, k);
                for _ in 0..100 {
                    if f1 < f2 {
                        b = c2;
                        c2 = c1;
                        f2 = f1;
                        c1 = b - golden * (b - a);
                        f1 = eval(c1, k);
                    } else {
                        a = c1;
                        c1 = c2;
                        f1 = f2;
                        c2 = a + golden * (b - a);
                        f2 = eval(c2, k);
                    }
                }
                let x = (a + b) / r::<R>(2.0);
                if axis == 0 {
                    k.kx = x;
                } else {
                    k.ky = x;
                }
            }
        }
        let (gap, bands, scale) = min_pair_gap(params, k);
        let gap_rel = gap / scale;
        if gap_rel >= opts.tol_e {
            continue;
        }
        let eig = crate::spectrum::oracle_bands(params, k);
        let h = crate::model::build_bloch(params, k);
        let overlap = pair_coalescence(&h, bands);
        let class = if overlap > R::one() - opts.tol_v {
            DegeneracyClass::ExceptionalPoint
        } else {
            DegeneracyClass::AccidentalDegeneracy
        };
        let j_value = closed_form_pieces(params, k, FormulaSet::Corrected)
            .map(|p| p.j)
            .unwrap_or_else(|_| R::nan());
        // The closed-form sums exist only in the uniform gain mode; fall back
        // to the oracle eigenvectors' unconjugated self-overlaps otherwise.
        let so_mags = if params.is_uniform_gain() {
            let so = self_orthogonality(params, k)?;
            (so.n1.norm(), so.n2.norm())
        } else {
            let self_ov = |v: &[Complex<R>]| {
                v.iter()
                    .map(|z| z * z)
                    .fold(Complex::new(R::zero(), R::zero()), |a, b| a + b)
                    .norm()
            };
            (self_ov(&eig.vectors[bands.0]), self_ov(&eig.vectors[bands.1]))
        };
        let point = ExceptionalPoint {
            k,
            bands,
            gap: gap_rel,
            coalescence: overlap,
            j_value,
            self_orthogonality: so_mags,
            class,
        };
        // Dedupe refined points that converged to the same location.
        let dup = out.iter().any(|p: &ExceptionalPoint<R>| {
            (p.k.kx - point.k.kx).abs() + (p.k.ky - point.k.ky).abs() < r::<R>(1e-6)
        });
        if !dup {
            out.push(point);
        }
    }
    out.sort_by(|a, b| {
        (a.k.kx, a.k.ky)
            .partial_cmp(&(b.k.kx, b.k.ky))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}
