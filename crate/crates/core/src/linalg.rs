//! Small dense complex matrices and the handful of decompositions the
//! physics needs (Hermitian eigensolve, PSD projection, matrix square root).
//!
//! Everything here targets matrices of dimension ≲ 12, so clarity wins over
//! asymptotics: the eigensolver is a cyclic complex Jacobi iteration.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{C, Real};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Build from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<C<T>>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik.norm_sqr() == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
                    acc + self[(i, j)] * v[j]
                })
            })
            .collect()
    }

    pub fn scale(&self, factor: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).fold(Complex::new(T::zero(), T::zero()), |acc, i| {
            acc + self[(i, i)]
        })
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|a| a.norm())
            .fold(T::zero(), |m, v| if v > m { v } else { m })
    }

    /// max |(self − other)_{ij}|
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.sub(other).max_abs()
    }

    /// ‖T†T − I‖_max; zero for exactly unitary matrices.
    pub fn unitarity_defect(&self) -> T {
        assert_eq!(self.rows, self.cols, "unitarity needs a square matrix");
        self.adjoint()
            .mul(self)
            .max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.rows == self.cols && self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Outer product |v⟩⟨w|.
    pub fn outer(v: &[C<T>], w: &[C<T>]) -> Self {
        let mut out = Self::zeros(v.len(), w.len());
        for i in 0..v.len() {
            for j in 0..w.len() {
                out[(i, j)] = v[i] * w[j].conj();
            }
        }
        out
    }

    /// Kronecker product, row-major block layout.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] =
                            self[(i, j)] * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// ⟨v|M|v⟩ as a complex number.
    pub fn quadratic_form(&self, v: &[C<T>]) -> C<T> {
        let mv = self.mul_vec(v);
        v.iter()
            .zip(&mv)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (vi, mvi)| {
                acc + vi.conj() * mvi
            })
    }

    /// Row-major `[re, im]` pairs, for JSON emission.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.data
            .iter()
            .map(|a| {
                [
                    a.re.to_f64().unwrap_or(f64::NAN),
                    a.im.to_f64().unwrap_or(f64::NAN),
                ]
            })
            .collect()
    }

    pub fn from_pairs(rows: usize, cols: usize, pairs: &[[f64; 2]]) -> Result<Self> {
        if pairs.len() != rows * cols {
            return Err(Error::Input(format!(
                "expected {} matrix entries, got {}",
                rows * cols,
                pairs.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            data: pairs
                .iter()
                .map(|[re, im]| Complex::new(T::of(*re), T::of(*im)))
                .collect(),
        })
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for CMat<T> {
    type Output = C<T>;
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMat<T>,
}

/// Cyclic complex Jacobi iteration. Input must be Hermitian; the symmetric
/// part is what gets diagonalised.
pub fn hermitian_eigen<T: Real>(matrix: &CMat<T>) -> HermitianEigen<T> {
    assert_eq!(matrix.rows(), matrix.cols(), "eigensolve needs square input");
    let n = matrix.rows();
    // Work on the Hermitian average so tiny asymmetries cannot drift.
    let mut a = matrix.add(&matrix.adjoint()).scale(Complex::new(T::half(), T::zero()));
    let mut v = CMat::identity(n);

    let scale = a.max_abs().max(T::one());
    let tol = T::epsilon() * scale * T::of(n as f64);

    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g <= tol {
                    continue;
                }
                let alpha = a[(p, p)].re;
                let beta = a[(q, q)].re;
                let phi = apq / Complex::new(g, T::zero());
                let tau = (alpha - beta) / (T::two() * g);
                // Smaller-magnitude root of t² − 2τt − 1 = 0.
                let t = if tau >= T::zero() {
                    -T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;

                // Plane rotation combined with the phase that makes the
                // pivot real: columns (p, q) of J are
                //   (c, -conj(phi)·s) and (s, conj(phi)·c).
                let mut j = CMat::identity(n);
                j[(p, p)] = Complex::new(c, T::zero());
                j[(p, q)] = Complex::new(s, T::zero());
                j[(q, p)] = phi.conj() * Complex::new(-s, T::zero());
                j[(q, q)] = phi.conj() * Complex::new(c, T::zero());

                a = j.adjoint().mul(&a).mul(&j);
                v = v.mul(&j);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("NaN eigenvalue"));

    let mut vectors = CMat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(diag[src]);
        for r in 0..n {
            vectors[(r, dst)] = v[(r, src)];
        }
    }
    HermitianEigen { values, vectors }
}

/// Rebuild Σ f(λ_i) |v_i⟩⟨v_i| from an eigendecomposition.
fn rebuild<T: Real>(eig: &HermitianEigen<T>, f: impl Fn(T) -> T) -> CMat<T> {
    let n = eig.values.len();
    let mut out = CMat::zeros(n, n);
    for (k, &lambda) in eig.values.iter().enumerate() {
        let fl = f(lambda);
        if fl == T::zero() {
            continue;
        }
        let col: Vec<C<T>> = (0..n).map(|r| eig.vectors[(r, k)]).collect();
        out = out.add(&CMat::outer(&col, &col).scale(Complex::new(fl, T::zero())));
    }
    out
}

/// Principal square root of a Hermitian PSD matrix; negative eigenvalues
/// within the floor are clipped to zero.
pub fn sqrt_psd<T: Real>(matrix: &CMat<T>) -> CMat<T> {
    let eig = hermitian_eigen(matrix);
    rebuild(&eig, |l| if l > T::zero() { l.sqrt() } else { T::zero() })
}

/// Result of clipping a Hermitian matrix onto the PSD cone.
pub struct PsdProjection<T: Real> {
    pub matrix: CMat<T>,
    /// Σ|clipped eigenvalues| — trace-norm distance moved by the clip.
    pub distance: T,
}

/// Hermitize, clip negative eigenvalues, optionally rescale the trace back
/// to `target_trace`.
pub fn project_psd<T: Real>(matrix: &CMat<T>, target_trace: Option<T>) -> PsdProjection<T> {
    let eig = hermitian_eigen(matrix);
    let distance = eig
        .values
        .iter()
        .filter(|l| **l < T::zero())
        .fold(T::zero(), |acc, l| acc + l.abs());
    let mut clipped = rebuild(&eig, |l| l.max(T::zero()));
    if let Some(target) = target_trace {
        let tr = clipped.trace().re;
        if tr > T::zero() {
            clipped = clipped.scale(Complex::new(target / tr, T::zero()));
        }
    }
    PsdProjection {
        matrix: clipped,
        distance,
    }
}

/// Largest singular value, via the spectrum of T†T.
pub fn max_singular_value<T: Real>(matrix: &CMat<T>) -> T {
    let gram = matrix.adjoint().mul(matrix);
    let eig = hermitian_eigen(&gram);
    eig.values
        .last()
        .copied()
        .unwrap_or(T::zero())
        .max(T::zero())
        .sqrt()
}
