//! Dense row-major complex matrix with just the operations the eigensolver and
//! the physics modules need. Kept deliberately small; no BLAS dependency.

use crate::scalar::Real;
use num_complex::Complex;

/// Dense complex matrix, row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<R: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<R>>,
}

impl<R: Real> CMat<R> {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::new(R::zero(), R::zero()); rows * cols] }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(R::one(), R::zero());
        }
        m
    }

    /// Build from nested row slices (panics on ragged input).
    pub fn from_rows(rows: &[&[Complex<R>]]) -> Self {
        let nr = rows.len();
        let nc = if nr == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(nr * nc);
        for row in rows {
            assert_eq!(row.len(), nc, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: nr, cols: nc, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex<R>] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = v.conj();
        }
        out
    }

    /// Transpose without conjugation.
    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Matrix product.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik.re == R::zero() && aik.im == R::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + aik * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[Complex<R>]) -> Vec<Complex<R>> {
        assert_eq!(self.cols, x.len(), "shape mismatch");
        let mut out = vec![Complex::new(R::zero(), R::zero()); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex::new(R::zero(), R::zero());
            for j in 0..self.cols {
                acc = acc + self[(i, j)] * x[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Entrywise sum with `other` scaled by `w`.
    pub fn add_scaled(&self, other: &Self, w: Complex<R>) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a = *a + w * *b;
        }
        out
    }

    /// Scale every entry.
    pub fn scaled(&self, w: Complex<R>) -> Self {
        let mut out = self.clone();
        for a in &mut out.data {
            *a = *a * w;
        }
        out
    }

    /// Max-norm of the entrywise difference.
    pub fn max_diff(&self, other: &Self) -> R {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let mut m = R::zero();
        for (a, b) in self.data.iter().zip(other.data.iter()) {
            let d = (*a - *b).norm();
            if d > m {
                m = d;
            }
        }
        m
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> R {
        let mut m = R::zero();
        for a in &self.data {
            let d = a.norm();
            if d > m {
                m = d;
            }
        }
        m
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for p in 0..other.rows {
                    for q in 0..other.cols {
                        out[(i * other.rows + p, j * other.cols + q)] = a * other[(p, q)];
                    }
                }
            }
        }
        out
    }
}

impl<R: Real> std::ops::Index<(usize, usize)> for CMat<R> {
    type Output = Complex<R>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<R> {
        &self.data[i * self.cols + j]
    }
}

impl<R: Real> std::ops::IndexMut<(usize, usize)> for CMat<R> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<R> {
        &mut self.data[i * self.cols + j]
    }
}

/// 2x2 Pauli matrices and identity, used to assemble symmetry operators.
pub fn sigma0<R: Real>() -> CMat<R> {
    let o = Complex::new(R::one(), R::zero());
    let z = Complex::new(R::zero(), R::zero());
    CMat::from_rows(&[&[o, z], &[z, o]])
}

pub fn sigma_x<R: Real>() -> CMat<R> {
    let o = Complex::new(R::one(), R::zero());
    let z = Complex::new(R::zero(), R::zero());
    CMat::from_rows(&[&[z, o], &[o, z]])
}

pub fn sigma_y<R: Real>() -> CMat<R> {
    let i = Complex::new(R::zero(), R::one());
    let z = Complex::new(R::zero(), R::zero());
    CMat::from_rows(&[&[z, -i], &[i, z]])
}

pub fn sigma_z<R: Real>() -> CMat<R> {
    let o = Complex::new(R::one(), R::zero());
    let z = Complex::new(R::zero(), R::zero());
    CMat::from_rows(&[&[o, z], &[z, -o]])
}

/// Euclidean norm of a complex vector.
pub fn vec_norm<R: Real>(x: &[Complex<R>]) -> R {
    let mut acc = R::zero();
    for v in x {
        acc = acc + v.norm_sqr();
    }
    acc.sqrt()
}

/// Conjugated inner product `<a|b>`.
pub fn vdot<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> Complex<R> {
    assert_eq!(a.len(), b.len());
    let mut acc = Complex::new(R::zero(), R::zero());
    for (x, y) in a.iter().zip(b.iter()) {
        acc = acc + x.conj() * *y;
    }
    acc
}

/// Unconjugated bilinear form `sum_i a_i b_i`.
pub fn bilinear<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> Complex<R> {
    assert_eq!(a.len(), b.len());
    let mut acc = Complex::new(R::zero(), R::zero());
    for (x, y) in a.iter().zip(b.iter()) {
        acc = acc + *x * *y;
    }
    acc
}
