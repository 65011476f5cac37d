//! Dense complex matrices and the small linear-algebra kit the rest of the
//! crate builds on: tensor products, a cyclic Jacobi eigensolver for Hermitian
//! matrices, spectral norms, PSD square roots, and partial trace / partial
//! transpose over a bipartite splitting.
//!
//! Matrices are square and row-major.  The dimensions in play are products of
//! local dimensions up to around ten, so the implementations favour clarity
//! and verifiable accuracy over asymptotic speed.  The eigensolver is a
//! cyclic Jacobi iteration with complex plane rotations; on the matrices this
//! crate produces it reconstructs its input to roughly 1e-14.

use num_complex::Complex64;
use std::ops::{Index, IndexMut};
use thiserror::Error;

/// Maximum number of full Jacobi sweeps before giving up.
const MAX_JACOBI_SWEEPS: usize = 60;

/// Errors produced by the matrix kit.
#[derive(Debug, Error)]
pub enum LinalgError {
    /// Input rows do not form a square matrix.
    #[error("row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    /// A matrix entry is NaN or infinite.
    #[error("non-finite entry at ({row}, {col})")]
    NotFinite { row: usize, col: usize },
    /// Matrix is not Hermitian within the requested tolerance.
    #[error("not Hermitian (max |a_ij - conj(a_ji)| = {residual:.3e}, tolerance {tol:.3e})")]
    NotHermitian { residual: f64, tol: f64 },
    /// Matrix has an eigenvalue below the allowed tolerance for positivity.
    #[error("not positive semi-definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    /// Dimensions of the operands are inconsistent.
    #[error("dimension mismatch in {context}: got {got}, expected {expected}")]
    DimensionMismatch {
        context: &'static str,
        got: usize,
        expected: usize,
    },
    /// The Jacobi iteration failed to flatten the off-diagonal mass.
    #[error("eigensolver did not converge (off-diagonal residual {residual:.3e})")]
    ConvergenceFailure { residual: f64 },
}

/// Which factor of a bipartite space an operation acts on or keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// A dense square matrix over `Complex64`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// The all-zero matrix of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    /// The identity matrix of the given dimension.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build a matrix entry by entry from a closure over (row, column).
    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(dim: usize, mut f: F) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from explicit rows, rejecting ragged shapes and non-finite entries.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self, LinalgError> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(LinalgError::NotSquare {
                    row: i,
                    len: row.len(),
                    expected: dim,
                });
            }
            for (j, z) in row.iter().enumerate() {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(LinalgError::NotFinite { row: i, col: j });
                }
                entries.push(*z);
            }
        }
        Ok(ComplexMatrix { dim, entries })
    }

    /// Rank-one matrix |u⟩⟨v| from two vectors of equal length.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Result<Self, LinalgError> {
        if u.len() != v.len() {
            return Err(LinalgError::DimensionMismatch {
                context: "outer product",
                got: v.len(),
                expected: u.len(),
            });
        }
        let dim = u.len();
        Ok(Self::from_fn(dim, |i, j| u[i] * v[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entrywise sum.  Panics on dimension mismatch; validated entry points
    /// check dimensions before arithmetic.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix addition dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Entrywise difference.  Panics on dimension mismatch.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix subtraction dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Multiply every entry by a real scalar.
    pub fn scale(&self, s: f64) -> Self {
        self.scale_c(Complex64::new(s, 0.0))
    }

    /// Multiply every entry by a complex scalar.
    pub fn scale_c(&self, s: Complex64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * s).collect(),
        }
    }

    /// Matrix product.  Panics on dimension mismatch.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.entries[i * n + k];
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += aik * other.entries[k * n + j];
                }
            }
        }
        out
    }

    /// k-th matrix power by repeated multiplication (k is tiny here).
    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.dim);
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    /// Transpose without conjugation.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&self) -> Self {
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Tr(self · other) without forming the product.  Panics on mismatch.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim, "trace product dimension mismatch");
        let n = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.entries[i * n + j] * other.entries[j * n + i];
            }
        }
        acc
    }

    /// Matrix-vector product.  Panics on mismatch.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "matrix-vector dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[i * n + j] * v[j]).sum())
            .collect()
    }

    /// ⟨v| self |v⟩.  Panics on mismatch.
    pub fn quadratic_form(&self, v: &[Complex64]) -> Complex64 {
        let av = self.mul_vec(v);
        v.iter().zip(&av).map(|(x, y)| x.conj() * y).sum()
    }

    /// Column j as a vector.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference |self - other|.  Panics on mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "matrix comparison dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// max |a_ij - conj(a_ji)|: zero exactly when the matrix is Hermitian.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let r = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// The exact Hermitian part (self + self†)/2 with a real diagonal.
    fn hermitian_part(&self) -> Self {
        let mut m = Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5);
        for i in 0..self.dim {
            m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        }
        m
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

/// Kronecker product a ⊗ b with the first factor owning the coarse index:
/// entry ((i_a·n + i_b), (j_a·n + j_b)) = a(i_a, j_a) · b(i_b, j_b).
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = (a.dim(), b.dim());
    ComplexMatrix::from_fn(m * n, |row, col| {
        let (ia, ib) = (row / n, row % n);
        let (ja, jb) = (col / n, col % n);
        a[(ia, ja)] * b[(ib, jb)]
    })
}

/// Eigenvalues (ascending) and matching orthonormal eigenvector columns of a
/// Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub eigenvalues: Vec<f64>,
    /// Column k is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl Eigensystem {
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }
}

/// Diagonalize a Hermitian matrix by cyclic Jacobi sweeps with complex plane
/// rotations.
///
/// The input must be Hermitian within `tol` (checked first); the iteration
/// then runs on its exact Hermitian part.  Eigenvalues come back ascending
/// with eigenvector columns in matching order.
pub fn hermitian_eigensystem(h: &ComplexMatrix, tol: f64) -> Result<Eigensystem, LinalgError> {
    let residual = h.hermiticity_residual();
    if residual > tol {
        return Err(LinalgError::NotHermitian { residual, tol });
    }
    let n = h.dim();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);
    let target = 1e-14 * scale;

    for _ in 0..MAX_JACOBI_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q, scale);
            }
        }
    }

    let final_off = off_diagonal_norm(&a);
    if final_off > 1e-11 * scale {
        return Err(LinalgError::ConvergenceFailure {
            residual: final_off,
        });
    }

    // Sort ascending, permuting the eigenvector columns alongside.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    Ok(Eigensystem {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            acc += a[(i, j)].norm_sqr();
        }
    }
    (2.0 * acc).sqrt()
}

/// One complex Jacobi rotation zeroing the (p, q) entry of the Hermitian
/// work matrix `a`, accumulated into `v`.
///
/// With a_pq = r·e^{iφ}, the rotation U is the identity outside rows/columns
/// p and q, where it equals [[c, s·e^{iφ}], [−s·e^{−iφ}, c]]; the classic
/// smaller-angle root t = sign(τ)/(|τ| + √(1+τ²)), τ = (a_qq − a_pp)/(2r),
/// annihilates the pivot of U† a U.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, scale: f64) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r <= 1e-2 * f64::EPSILON * scale {
        return;
    }
    let phase = apq / r;
    let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let sp = phase * s;

    let n = a.dim();
    // Right-multiply by U (mixes columns p and q).
    for i in 0..n {
        let x = a[(i, p)];
        let y = a[(i, q)];
        a[(i, p)] = c * x - sp.conj() * y;
        a[(i, q)] = sp * x + c * y;
    }
    // Left-multiply by U† (mixes rows p and q).
    for j in 0..n {
        let x = a[(p, j)];
        let y = a[(q, j)];
        a[(p, j)] = c * x - sp * y;
        a[(q, j)] = sp.conj() * x + c * y;
    }
    // The pivot is zero by construction and the diagonal stays real;
    // re-impose both exactly to keep rounding noise from accumulating.
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    // Accumulate the same column mix into the eigenvector matrix.
    for i in 0..n {
        let x = v[(i, p)];
        let y = v[(i, q)];
        v[(i, p)] = c * x - sp.conj() * y;
        v[(i, q)] = sp * x + c * y;
    }
}

/// Largest singular value, computed as sqrt of the top eigenvalue of a†a.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    let gram = a.adjoint().matmul(a);
    // a†a is Hermitian by construction, so the tolerance never trips.
    let eig = hermitian_eigensystem(&gram, 1e-8).expect("Gram matrix is Hermitian");
    eig.max_eigenvalue().max(0.0).sqrt()
}

/// The PSD square root V·diag(√λ)·V† of a Hermitian matrix.
///
/// `tol` bounds both the allowed hermiticity residual and the negative
/// eigenvalue mass: eigenvalues below −tol are rejected, eigenvalues in
/// [−tol, 0) are clamped to zero as arithmetic noise.
pub fn psd_sqrt(p: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix, LinalgError> {
    let eig = hermitian_eigensystem(p, tol)?;
    let min = eig.min_eigenvalue();
    if min < -tol {
        return Err(LinalgError::NotPsd {
            min_eigenvalue: min,
        });
    }
    let n = p.dim();
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let v = &eig.eigenvectors;
    let mut out = ComplexMatrix::zeros(n);
    for k in 0..n {
        if roots[k] == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = v[(i, k)] * roots[k];
            for j in 0..n {
                out[(i, j)] += vik * v[(j, k)].conj();
            }
        }
    }
    Ok(out.hermitian_part())
}

fn check_bipartite(m: &ComplexMatrix, dims: (usize, usize), context: &'static str) -> Result<(), LinalgError> {
    let (da, db) = dims;
    if da == 0 || db == 0 || m.dim() != da * db {
        return Err(LinalgError::DimensionMismatch {
            context,
            got: m.dim(),
            expected: da * db,
        });
    }
    Ok(())
}

/// Trace out one factor of a bipartite operator, keeping the other.
///
/// The composite index convention matches [`tensor_product`]: row a·d_B + b.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<ComplexMatrix, LinalgError> {
    check_bipartite(m, dims, "partial trace")?;
    let (da, db) = dims;
    let out = match keep {
        Subsystem::A => ComplexMatrix::from_fn(da, |a, a2| {
            (0..db).map(|b| m[(a * db + b, a2 * db + b)]).sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(db, |b, b2| {
            (0..da).map(|a| m[(a * db + b, a * db + b2)]).sum()
        }),
    };
    Ok(out)
}

/// Transpose one factor of a bipartite operator, leaving the other alone.
pub fn partial_transpose(
    m: &ComplexMatrix,
    dims: (usize, usize),
    subsystem: Subsystem,
) -> Result<ComplexMatrix, LinalgError> {
    check_bipartite(m, dims, "partial transpose")?;
    let (da, db) = dims;
    let out = ComplexMatrix::from_fn(da * db, |row, col| {
        let (a, b) = (row / db, row % db);
        let (a2, b2) = (col / db, col % db);
        match subsystem {
            Subsystem::A => m[(a2 * db + b, a * db + b2)],
            Subsystem::B => m[(a * db + b2, a2 * db + b)],
        }
    });
    Ok(out)
}
