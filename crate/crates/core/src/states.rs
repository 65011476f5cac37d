//! Kets and bipartite density matrices: validated constructors for the
//! states the detector is run on.
//!
//! Density matrices carry their bipartite splitting `(d_A, d_B)` with them
//! (use `d_B = 1` for a single system) so partial operations can never be
//! called with a silently wrong reshape.

use crate::linalg::{
    hermitian_eigensystem, partial_trace, ComplexMatrix, LinalgError, Subsystem,
};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Shared validation tolerance for norms, hermiticity, positivity and traces.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum StateError {
    /// Ket norm is not 1 within tolerance.
    #[error("ket is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    /// Vector or matrix dimensions do not line up.
    #[error("dimension mismatch in {context}: got {got}, expected {expected}")]
    DimensionMismatch {
        context: &'static str,
        got: usize,
        expected: usize,
    },
    /// A pairing that should be a bijection on 0..d−1 is not.
    #[error("pairing is not a permutation of 0..{dim}")]
    NotPermutation { dim: usize },
    /// A supplied basis is not orthonormal within tolerance.
    #[error("basis is not orthonormal (worst residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },
    /// A scalar parameter is outside its allowed range.
    #[error("parameter {name} = {value} outside [{low}, {high}]")]
    RangeError {
        name: &'static str,
        value: f64,
        low: f64,
        high: f64,
    },
    /// The matrix fails one of the density-matrix invariants.
    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: Vec<Complex64>,
}

impl Ket {
    /// Wrap amplitudes that are already normalized within [`STATE_TOL`].
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        let norm = norm_of(&amplitudes);
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(StateError::NotNormalized { norm });
        }
        Ok(Ket { amplitudes })
    }

    /// Normalize an arbitrary nonzero vector into a ket.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        let norm = norm_of(&amplitudes);
        if norm < 1e-12 {
            return Err(StateError::NotNormalized { norm });
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Ok(Ket { amplitudes })
    }

    /// The computational basis ket |i⟩ in the given dimension.
    pub fn basis_state(dim: usize, i: usize) -> Result<Self, StateError> {
        if i >= dim {
            return Err(StateError::DimensionMismatch {
                context: "basis state index",
                got: i,
                expected: dim,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(Ket { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// ⟨self|other⟩ with the conjugation on `self`.
    pub fn inner(&self, other: &Ket) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// The product ket self ⊗ other, coarse index on `self`.
    pub fn tensor(&self, other: &Ket) -> Ket {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ket { amplitudes }
    }

    /// The rank-one projector |self⟩⟨self|.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
            .expect("outer product of equal-length vectors")
    }
}

fn norm_of(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A validated density matrix with its bipartite splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: (usize, usize),
}

impl DensityMatrix {
    /// Validate hermiticity, positivity and unit trace, all within
    /// [`STATE_TOL`], and check that the splitting multiplies out to the
    /// matrix dimension.
    pub fn new(matrix: ComplexMatrix, dims: (usize, usize)) -> Result<Self, StateError> {
        let (da, db) = dims;
        if da == 0 || db == 0 || matrix.dim() != da * db {
            return Err(StateError::DimensionMismatch {
                context: "density matrix splitting",
                got: matrix.dim(),
                expected: da * db,
            });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(StateError::TraceNotOne { trace: trace.re });
        }
        // hermitian_eigensystem re-checks hermiticity and yields the spectrum.
        let eig = hermitian_eigensystem(&matrix, STATE_TOL)?;
        let min = eig.min_eigenvalue();
        if min < -STATE_TOL {
            return Err(StateError::Linalg(LinalgError::NotPsd {
                min_eigenvalue: min,
            }));
        }
        Ok(DensityMatrix { matrix, dims })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// Total Hilbert-space dimension d_A · d_B.
    pub fn total_dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Reduced state on one subsystem.
    pub fn reduced(&self, keep: Subsystem) -> Result<ComplexMatrix, StateError> {
        Ok(partial_trace(&self.matrix, self.dims, keep)?)
    }
}

/// |k⟩⟨k| as a density matrix with the given splitting.
pub fn pure_state(k: &Ket, dims: (usize, usize)) -> Result<DensityMatrix, StateError> {
    DensityMatrix::new(k.projector(), dims)
}

fn check_orthonormal(basis: &[Ket], dim: usize) -> Result<(), StateError> {
    let mut worst = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        if a.dim() != dim {
            return Err(StateError::DimensionMismatch {
                context: "basis ket",
                got: a.dim(),
                expected: dim,
            });
        }
        for (j, b) in basis.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.inner(b) - expected).norm());
        }
    }
    if worst > STATE_TOL {
        return Err(StateError::NotOrthonormal { residual: worst });
    }
    Ok(())
}

/// The maximally entangled ket (1/√d) Σ_i basis_a[i] ⊗ basis_b[pairing(i)].
///
/// Both bases must be orthonormal in the same dimension and `pairing` a
/// bijection on 0..d−1.  With standard bases and the identity pairing this is
/// the usual diagonal maximally entangled state; other pairings produce the
/// cross-paired states adapted to particular measurement suites.
pub fn paired_entangled(
    basis_a: &[Ket],
    basis_b: &[Ket],
    pairing: &[usize],
) -> Result<Ket, StateError> {
    let d = basis_a.len();
    if d == 0 || basis_b.len() != d {
        return Err(StateError::DimensionMismatch {
            context: "paired bases",
            got: basis_b.len(),
            expected: d,
        });
    }
    check_orthonormal(basis_a, basis_a[0].dim())?;
    check_orthonormal(basis_b, basis_b[0].dim())?;
    if basis_a[0].dim() != d || basis_b[0].dim() != d {
        return Err(StateError::DimensionMismatch {
            context: "paired basis dimension",
            got: basis_a[0].dim().max(basis_b[0].dim()),
            expected: d,
        });
    }
    if pairing.len() != d {
        return Err(StateError::NotPermutation { dim: d });
    }
    let mut seen = vec![false; d];
    for &p in pairing {
        if p >= d || seen[p] {
            return Err(StateError::NotPermutation { dim: d });
        }
        seen[p] = true;
    }

    let scale = 1.0 / (d as f64).sqrt();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); d * d];
    for (t, &p) in pairing.iter().enumerate() {
        let a = basis_a[t].amplitudes();
        let b = basis_b[p].amplitudes();
        for i in 0..d {
            for j in 0..d {
                amplitudes[i * d + j] += scale * a[i] * b[j];
            }
        }
    }
    Ket::new(amplitudes)
}

/// The one-parameter mixture (1−s)·sep + s·|psi⟩⟨psi|.
pub fn werner_mixture(
    sep: &DensityMatrix,
    psi: &Ket,
    s: f64,
) -> Result<DensityMatrix, StateError> {
    if !(0.0..=1.0).contains(&s) {
        return Err(StateError::RangeError {
            name: "s",
            value: s,
            low: 0.0,
            high: 1.0,
        });
    }
    if psi.dim() != sep.total_dim() {
        return Err(StateError::DimensionMismatch {
            context: "mixture ket",
            got: psi.dim(),
            expected: sep.total_dim(),
        });
    }
    let matrix = sep
        .matrix()
        .scale(1.0 - s)
        .add(&psi.projector().scale(s));
    DensityMatrix::new(matrix, sep.dims())
}

/// The completely mixed state I/d with the given splitting.
pub fn completely_mixed(dims: (usize, usize)) -> DensityMatrix {
    let d = dims.0 * dims.1;
    DensityMatrix::new(ComplexMatrix::identity(d).scale(1.0 / d as f64), dims)
        .expect("I/d is a valid density matrix")
}

/// The classically correlated two-qutrit state (1/3) Σ_i |ii⟩⟨ii|.
///
/// Separable by construction: it is an equal mixture of the three product
/// states |i⟩⊗|i⟩.
pub fn classically_correlated_qutrit() -> DensityMatrix {
    let d = 3;
    let mut m = ComplexMatrix::zeros(d * d);
    for i in 0..d {
        let ket = Ket::basis_state(d, i).expect("index in range");
        let prod = ket.tensor(&ket);
        m = m.add(&prod.projector().scale(1.0 / d as f64));
    }
    DensityMatrix::new(m, (d, d)).expect("valid by construction")
}

/// A random separable state together with the decomposition that proves it.
#[derive(Debug, Clone)]
pub struct SeparableState {
    pub density: DensityMatrix,
    /// Mixture terms (weight, factor on A, factor on B); weights sum to 1.
    pub terms: Vec<(f64, Ket, Ket)>,
}

/// Draw a random pure ket from the unitarily invariant measure by
/// normalizing independent standard complex Gaussians.
fn random_ket(rng: &mut ChaCha8Rng, dim: usize) -> Ket {
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(k) = Ket::normalized(v) {
            return k;
        }
    }
}

/// A convex mixture Σ_n q(n) |a_n⟩⟨a_n| ⊗ |b_n⟩⟨b_n| with random pure
/// factors and random simplex weights, deterministic for a given seed.
///
/// The decomposition is retained on the result so property tests can compare
/// mixture-term quantities against the mixed state itself.
pub fn random_separable(
    d_a: usize,
    d_b: usize,
    n_terms: usize,
    seed: u64,
) -> Result<SeparableState, StateError> {
    if n_terms == 0 {
        return Err(StateError::RangeError {
            name: "n_terms",
            value: 0.0,
            low: 1.0,
            high: f64::INFINITY,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Exponential samples normalized to the simplex give a flat Dirichlet.
    let mut weights: Vec<f64> = (0..n_terms)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        weights = vec![1.0 / n_terms as f64; n_terms];
    } else {
        for w in weights.iter_mut() {
            *w /= total;
        }
    }

    let mut matrix = ComplexMatrix::zeros(d_a * d_b);
    let mut terms = Vec::with_capacity(n_terms);
    for &w in &weights {
        let a = random_ket(&mut rng, d_a);
        let b = random_ket(&mut rng, d_b);
        let prod = a.tensor(&b);
        matrix = matrix.add(&prod.projector().scale(w));
        terms.push((w, a, b));
    }
    let density = DensityMatrix::new(matrix, (d_a, d_b))?;
    Ok(SeparableState { density, terms })
}
