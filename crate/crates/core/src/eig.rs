//! Dense complex eigensolver: Householder reduction to Hessenberg form followed
//! by shifted QR iteration with accumulated unitary transforms, then eigenvector
//! recovery by back-substitution on the triangular factor.
//!
//! This is the ground-truth oracle for every closed-form expression in the
//! crate, so it reports per-pair residuals honestly instead of assuming
//! convergence, and it flags (near-)degenerate eigenvalue clusters rather than
//! hiding them.

use crate::mat::{vdot, vec_norm, CMat};
use crate::scalar::Real;
use num_complex::Complex;

/// Eigendecomposition of a dense complex matrix.
#[derive(Clone, Debug)]
pub struct Eigen<R: Real> {
    /// Eigenvalues sorted by (real part, imaginary part) ascending.
    pub values: Vec<Complex<R>>,
    /// Unit-norm right eigenvectors, parallel to `values`.
    pub vectors: Vec<Vec<Complex<R>>>,
    /// `‖A v − λ v‖∞` per pair.
    pub residuals: Vec<R>,
    /// False when the QR iteration hit its sweep budget; values are best-effort.
    pub converged: bool,
    /// Indices (into `values`) of clusters closer than the degeneracy tolerance.
    pub clusters: Vec<Vec<usize>>,
    /// Orthonormal near-invariant basis per cluster (best effort, from the
    /// unitary Schur vectors), parallel to `clusters`.
    pub cluster_bases: Vec<Vec<Vec<Complex<R>>>>,
}

impl<R: Real> Eigen<R> {
    /// Largest residual over all pairs.
    pub fn max_residual(&self) -> R {
        self.residuals.iter().cloned().fold(R::zero(), R::max)
    }

    /// True when any eigenvalue pair is flagged as (near-)degenerate.
    pub fn has_degeneracy(&self) -> bool {
        !self.clusters.is_empty()
    }
}

/// Complex Givens rotation that zeroes the second component of `(a, b)`.
/// Returns `(c, s)` with `c` real so that
/// `[c s; -conj(s) c] [a; b] = [r; 0]`.
fn givens<R: Real>(a: Complex<R>, b: Complex<R>) -> (R, Complex<R>) {
    let zero = Complex::new(R::zero(), R::zero());
    if b == zero {
        return (R::one(), zero);
    }
    let na = a.norm();
    let nb = b.norm();
    if na == R::zero() {
        return (R::zero(), b.conj() / nb);
    }
    let r = (na * na + nb * nb).sqrt();
    let c = na / r;
    let s = (a / na) * b.conj() / r;
    (c, s)
}

/// Reduce `a` to upper Hessenberg form `h` with unitary `q` (`a = q h q^H`).
fn hessenberg<R: Real>(a: &CMat<R>) -> (CMat<R>, CMat<R>) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = CMat::identity(n);
    let zero = Complex::new(R::zero(), R::zero());
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the subdiagonal.
        let mut x: Vec<Complex<R>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = vec_norm(&x);
        if xnorm <= R::epsilon() {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() > R::zero() { x0 / x0.norm() } else { Complex::new(R::one(), R::zero()) };
        let alpha = -phase * xnorm;
        x[0] = x[0] - alpha;
        let vnorm = vec_norm(&x);
        if vnorm <= R::epsilon() {
            continue;
        }
        for v in &mut x {
            *v = *v / vnorm;
        }
        // Left: rows k+1..n of columns k..n.
        for j in k..n {
            let mut dot = zero;
            for (t, v) in x.iter().enumerate() {
                dot = dot + v.conj() * h[(k + 1 + t, j)];
            }
            let two = Complex::new(R::from_f64(2.0).unwrap(), R::zero());
            for (t, v) in x.iter().enumerate() {
                h[(k + 1 + t, j)] = h[(k + 1 + t, j)] - two * *v * dot;
            }
        }
        // Right: columns k+1..n of all rows; same for the accumulated q.
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let mut dot = zero;
                for (t, v) in x.iter().enumerate() {
                    dot = dot + m[(i, k + 1 + t)] * *v;
                }
                let two = Complex::new(R::from_f64(2.0).unwrap(), R::zero());
                for (t, v) in x.iter().enumerate() {
                    m[(i, k + 1 + t)] = m[(i, k + 1 + t)] - two * dot * v.conj();
                }
            }
        }
    }
    // Clean the area below the subdiagonal.
    for i in 2..n {
        for j in 0..i - 1 {
            h[(i, j)] = zero;
        }
    }
    (h, q)
}

/// Wilkinson shift: the eigenvalue of the trailing 2x2 block closest to the
/// bottom-right entry.
fn wilkinson_shift<R: Real>(a: Complex<R>, b: Complex<R>, c: Complex<R>, d: Complex<R>) -> Complex<R> {
    let two = Complex::new(R::from_f64(2.0).unwrap(), R::zero());
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - two * two * det).sqrt();
    let l1 = (tr + disc) / two;
    let l2 = (tr - disc) / two;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Schur decomposition `a = q t q^H` with `t` upper triangular.
/// Returns `(t, q, converged)`.
fn schur<R: Real>(a: &CMat<R>) -> (CMat<R>, CMat<R>, bool) {
    let n = a.rows();
    let (mut t, mut q) = hessenberg(a);
    if n <= 1 {
        return (t, q, true);
    }
    let eps = R::epsilon();
    let zero = Complex::new(R::zero(), R::zero());
    let mut hi = n - 1;
    let mut iter_this = 0usize;
    let mut total: usize = 0;
    let budget = 80 * n;
    let mut converged = true;
    loop {
        // Deflate negligible subdiagonals.
        let mut l = hi;
        while l > 0 {
            let small = eps * (t[(l - 1, l - 1)].norm() + t[(l, l)].norm() + R::min_positive_value());
            if t[(l, l - 1)].norm() <= small {
                t[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            // t[(hi, hi-1)] is negligible (or hi == 0): eigenvalue converged.
            if hi == 0 {
                break;
            }
            hi -= 1;
            iter_this = 0;
            continue;
        }
        let lo = l;
        total += 1;
        iter_this += 1;
        if total > budget {
            converged = false;
            break;
        }
        // Shift choice; occasional exceptional shift to break cycles.
        let mu = if iter_this % 14 == 13 {
            let off = t[(hi, hi - 1)].norm() + t[(lo + 1, lo)].norm();
            t[(hi, hi)] + Complex::new(R::from_f64(1.5).unwrap() * off, R::zero())
        } else {
            wilkinson_shift(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)])
        };
        for d in lo..=hi {
            t[(d, d)] = t[(d, d)] - mu;
        }
        // QR sweep on the active window via Givens rotations.
        let mut rots: Vec<(R, Complex<R>)> = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let (c, s) = givens(t[(i, i)], t[(i + 1, i)]);
            rots.push((c, s));
            for j in i..n {
                let x = t[(i, j)];
                let y = t[(i + 1, j)];
                t[(i, j)] = Complex::new(c, R::zero()) * x + s * y;
                t[(i + 1, j)] = -s.conj() * x + Complex::new(c, R::zero()) * y;
            }
        }
        for (idx, (c, s)) in rots.iter().enumerate() {
            let i = lo + idx;
            let top = (i + 2).min(hi + 1);
            for r in 0..top {
                let x = t[(r, i)];
                let y = t[(r, i + 1)];
                t[(r, i)] = x * Complex::new(*c, R::zero()) + y * s.conj();
                t[(r, i + 1)] = -x * *s + y * Complex::new(*c, R::zero());
            }
            for r in 0..n {
                let x = q[(r, i)];
                let y = q[(r, i + 1)];
                q[(r, i)] = x * Complex::new(*c, R::zero()) + y * s.conj();
                q[(r, i + 1)] = -x * *s + y * Complex::new(*c, R::zero());
            }
        }
        for d in lo..=hi {
            t[(d, d)] = t[(d, d)] + mu;
        }
    }
    (t, q, converged)
}

/// Eigenvectors of an upper-triangular matrix by back-substitution. Near-zero
/// pivots are floored (direction preserved) so defective matrices yield
/// coalescing vectors instead of NaNs.
fn triangular_eigvecs<R: Real>(t: &CMat<R>) -> Vec<Vec<Complex<R>>> {
    let n = t.rows();
    let zero = Complex::new(R::zero(), R::zero());
    let scale = t.max_abs().max(R::one());
    let floor = R::epsilon() * scale;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let lam = t[(k, k)];
        let mut y = vec![zero; n];
        y[k] = Complex::new(R::one(), R::zero());
        for j in (0..k).rev() {
            let mut acc = zero;
            for l in j + 1..=k {
                acc = acc + t[(j, l)] * y[l];
            }
            let mut den = t[(j, j)] - lam;
            if den.norm() < floor {
                den = Complex::new(floor, R::zero());
            }
            y[j] = -acc / den;
        }
        out.push(y);
    }
    out
}

/// Options for [`eigen_with`].
#[derive(Clone, Copy, Debug)]
pub struct EigenOptions<R: Real> {
    /// Relative tolerance for flagging eigenvalue clusters as degenerate.
    pub degeneracy_tol: R,
}

impl<R: Real> Default for EigenOptions<R> {
    fn default() -> Self {
        Self { degeneracy_tol: R::from_f64(1e-9).unwrap() }
    }
}

/// Full eigendecomposition with default options.
pub fn eigen<R: Real>(a: &CMat<R>) -> Eigen<R> {
    eigen_with(a, EigenOptions::default())
}

/// Full eigendecomposition.
pub fn eigen_with<R: Real>(a: &CMat<R>, opts: EigenOptions<R>) -> Eigen<R> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "square matrix required");
    let (t, q, converged) = schur(a);
    let tri = triangular_eigvecs(&t);

    let mut values: Vec<Complex<R>> = (0..n).map(|i| t[(i, i)]).collect();
    let mut vectors: Vec<Vec<Complex<R>>> = tri
        .iter()
        .map(|y| {
            let v = q.matvec(y);
            let nv = vec_norm(&v);
            v.into_iter().map(|x| x / nv).collect::<Vec<_>>()
        })
        .collect();

    // Sort by (Re, Im) ascending.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let a = values[i];
        let b = values[j];
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    values = order.iter().map(|&i| values[i]).collect();
    vectors = order.iter().map(|&i| vectors[i].clone()).collect();

    let residuals: Vec<R> = values
        .iter()
        .zip(vectors.iter())
        .map(|(lam, v)| {
            let av = a.matvec(v);
            let mut m = R::zero();
            for (x, y) in av.iter().zip(v.iter()) {
                let d = (*x - *lam * *y).norm();
                if d > m {
                    m = d;
                }
            }
            m
        })
        .collect();

    // Degeneracy clusters on the sorted eigenvalues.
    let scale = values.iter().map(|v| v.norm()).fold(R::zero(), R::max).max(R::one());
    let tol = opts.degeneracy_tol * scale;
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let mut group = vec![i];
        for j in i + 1..n {
            if !used[j] && (values[j] - values[i]).norm() <= tol {
                group.push(j);
            }
        }
        if group.len() > 1 {
            for &g in &group {
                used[g] = true;
            }
            clusters.push(group);
        }
    }

    // Best-effort orthonormal near-invariant basis per cluster, greedily chosen
    // from the unitary Schur vectors by smallest `(A - λ̄)x` residual.
    let mut cluster_bases = Vec::with_capacity(clusters.len());
    for group in &clusters {
        let m = group.len();
        let mut lam_bar = Complex::new(R::zero(), R::zero());
        for &g in group {
            lam_bar = lam_bar + values[g];
        }
        lam_bar = lam_bar / Complex::new(R::from_usize(m).unwrap(), R::zero());
        let mut chosen: Vec<Vec<Complex<R>>> = Vec::with_capacity(m);
        let mut pool: Vec<Vec<Complex<R>>> = (0..n).map(|c| (0..n).map(|r| q[(r, c)]).collect()).collect();
        for _ in 0..m {
            let mut best: Option<(R, usize, Vec<Complex<R>>)> = None;
            for (pi, cand) in pool.iter().enumerate() {
                // Orthogonalise against already-chosen directions.
                let mut w = cand.clone();
                for ch in &chosen {
                    let ov = vdot(ch, &w);
                    for (wi, ci) in w.iter_mut().zip(ch.iter()) {
                        *wi = *wi - ov * *ci;
                    }
                }
                let nw = vec_norm(&w);
                if nw < R::from_f64(1e-8).unwrap() {
                    continue;
                }
                let w: Vec<Complex<R>> = w.into_iter().map(|x| x / nw).collect();
                let aw = a.matvec(&w);
                let mut res = R::zero();
                for (x, y) in aw.iter().zip(w.iter()) {
                    res = res + (*x - lam_bar * *y).norm_sqr();
                }
                let res = res.sqrt();
                if best.as_ref().map_or(true, |(b, _, _)| res < *b) {
                    best = Some((res, pi, w));
                }
            }
            if let Some((_, pi, w)) = best {
                pool.remove(pi);
                chosen.push(w);
            }
        }
        cluster_bases.push(chosen);
    }

    Eigen { values, vectors, residuals, converged, clusters, cluster_bases }
}

/// Max deviation of an optimal-style assignment between two equal-size complex
/// multisets, built by repeatedly pairing the globally closest remaining
/// values. Returns infinity on size mismatch.
pub fn matching_distance<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> R {
    if a.len() != b.len() {
        return R::infinity();
    }
    let n = a.len();
    let mut used_a = vec![false; n];
    let mut used_b = vec![false; n];
    let mut worst = R::zero();
    for _ in 0..n {
        let mut best: Option<(R, usize, usize)> = None;
        for i in 0..n {
            if used_a[i] {
                continue;
            }
            for j in 0..n {
                if used_b[j] {
                    continue;
                }
                let d = (a[i] - b[j]).norm();
                if best.as_ref().map_or(true, |(bd, _, _)| d < *bd) {
                    best = Some((d, i, j));
                }
            }
        }
        let (d, i, j) = best.expect("non-empty");
        used_a[i] = true;
        used_b[j] = true;
        if d > worst {
            worst = d;
        }
    }
    worst
}

/// Pair each entry of `a` with a distinct entry of `b` (same greedy rule as
/// [`matching_distance`]); returns `assign[i] = j` mapping indices of `a` to `b`.
pub fn matching_assignment<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> Vec<usize> {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut used_a = vec![false; n];
    let mut used_b = vec![false; n];
    let mut assign = vec![0usize; n];
    for _ in 0..n {
        let mut best: Option<(R, usize, usize)> = None;
        for i in 0..n {
            if used_a[i] {
                continue;
            }
            for j in 0..n {
                if used_b[j] {
                    continue;
                }
                let d = (a[i] - b[j]).norm();
                if best.as_ref().map_or(true, |(bd, _, _)| d < *bd) {
                    best = Some((d, i, j));
                }
            }
        }
        let (_, i, j) = best.expect("non-empty");
        used_a[i] = true;
        used_b[j] = true;
        assign[i] = j;
    }
    assign
}
