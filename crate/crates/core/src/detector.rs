//! Entanglement detection by separability-bound violation.
//!
//! Given a suite of total-system measurements and a bound B on the sum of
//! largest outcome probabilities over separable states, any state with
//! Σ_t max_k p_k^{(t)} > B is certified entangled.  The verdict is
//! one-sided: staying at or below the bound proves nothing.
//!
//! Alongside the evaluator this module provides a bisection for white-noise
//! robustness thresholds, a partial-transpose check as an independent
//! reference criterion, and a see-saw ascent over product states that
//! empirically probes how sharp a bound is.

use crate::bounds::BoundValue;
use crate::linalg::{
    hermitian_eigensystem, partial_trace, partial_transpose, tensor_product, ComplexMatrix,
    LinalgError, Subsystem,
};
use crate::measurements::{max_probability, MeasurementError, Povm, ARGMAX_TIE};
use crate::states::{DensityMatrix, Ket, StateError};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// A probability sum must exceed the bound by more than this to count as a
/// violation; smaller excesses are treated as numerical noise.
pub const VIOLATION_MARGIN: f64 = 1e-9;
/// Default bracket width at which the threshold bisection stops.
pub const BISECT_TOL: f64 = 1e-8;
/// Partial-transpose eigenvalues below −this certify entanglement.
pub const PPT_MARGIN: f64 = 1e-10;

const MAX_SEESAW_ITERS: usize = 500;
const SEESAW_CONV_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error("detection suite is empty")]
    EmptySuite,
    #[error("dimension mismatch in {context}: got {got}, expected {expected}")]
    DimensionMismatch {
        context: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("no sign change on [0, 1]: margin {margin_low:.3e} at 0, {margin_high:.3e} at 1")]
    NoSignChange { margin_low: f64, margin_high: f64 },
    #[error("parameter {name} = {value} outside [{low}, {high}]")]
    RangeError {
        name: &'static str,
        value: f64,
        low: f64,
        high: f64,
    },
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Per-measurement outcome of an evaluation.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub name: String,
    pub p_max: f64,
    /// Every outcome label within the tie window of the maximum.
    pub argmax: Vec<String>,
}

/// Result of testing one state against one bound.
#[derive(Debug, Clone)]
pub struct DetectionReport {
    pub per_measurement: Vec<MeasurementRecord>,
    pub sum_pmax: f64,
    pub bound: BoundValue,
    /// sum_pmax − bound; positive beyond [`VIOLATION_MARGIN`] certifies
    /// entanglement.
    pub margin: f64,
    pub violated: bool,
}

/// Evaluate the sum of largest outcome probabilities of `suite` on `state`
/// and compare it against `bound`.
pub fn evaluate(
    state: &DensityMatrix,
    suite: &[Povm],
    bound: &BoundValue,
) -> Result<DetectionReport, DetectorError> {
    if suite.is_empty() {
        return Err(DetectorError::EmptySuite);
    }
    let mut per_measurement = Vec::with_capacity(suite.len());
    let mut sum_pmax = 0.0;
    for povm in suite {
        if povm.dim() != state.total_dim() {
            return Err(DetectorError::DimensionMismatch {
                context: "detection suite",
                got: povm.dim(),
                expected: state.total_dim(),
            });
        }
        let (p_max, argmax) = max_probability(povm, state)?;
        sum_pmax += p_max;
        per_measurement.push(MeasurementRecord {
            name: povm.name().to_string(),
            p_max,
            argmax,
        });
    }
    let margin = sum_pmax - bound.value;
    Ok(DetectionReport {
        per_measurement,
        sum_pmax,
        bound: *bound,
        margin,
        violated: margin > VIOLATION_MARGIN,
    })
}

/// Indices of the suite measurements that are informative on `target`:
/// those whose largest outcome probability exceeds the flat value
/// 1/(outcome count).  Useful for trimming a display to the measurements
/// that actually see the state.
pub fn select_informative(
    suite: &[Povm],
    target: &DensityMatrix,
) -> Result<Vec<usize>, DetectorError> {
    let mut keep = Vec::new();
    for (t, povm) in suite.iter().enumerate() {
        let (p_max, _) = max_probability(povm, target)?;
        if p_max > 1.0 / povm.n_outcomes() as f64 + ARGMAX_TIE {
            keep.push(t);
        }
    }
    Ok(keep)
}

/// Outcome of a white-noise robustness bisection.
#[derive(Debug, Clone)]
pub struct ThresholdResult {
    /// Midpoint of the final bracket: the mixing weight where the
    /// probability sum crosses the bound.
    pub s_star: f64,
    /// Final bracket (no violation at the low end, violation at the high
    /// end).
    pub bracket: (f64, f64),
    pub bound: BoundValue,
    pub iterations: usize,
}

/// Bisect the mixing parameter of a state family for the point where the
/// probability sum starts violating the bound.  The family must not violate
/// at s = 0 and must violate at s = 1, otherwise [`DetectorError::NoSignChange`]
/// reports the margins at both endpoints.
pub fn threshold_bisect<F>(
    family: F,
    suite: &[Povm],
    bound: &BoundValue,
    tol: f64,
) -> Result<ThresholdResult, DetectorError>
where
    F: Fn(f64) -> Result<DensityMatrix, StateError>,
{
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(DetectorError::RangeError {
            name: "tol",
            value: tol,
            low: f64::MIN_POSITIVE,
            high: 1.0,
        });
    }
    let low = evaluate(&family(0.0)?, suite, bound)?;
    let high = evaluate(&family(1.0)?, suite, bound)?;
    if low.violated || !high.violated {
        return Err(DetectorError::NoSignChange {
            margin_low: low.margin,
            margin_high: high.margin,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if evaluate(&family(mid)?, suite, bound)?.violated {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(ThresholdResult {
        s_star: 0.5 * (lo + hi),
        bracket: (lo, hi),
        bound: *bound,
        iterations,
    })
}

/// Result of the partial-transpose criterion.
#[derive(Debug, Clone, Copy)]
pub struct PptReport {
    pub min_eigenvalue: f64,
    /// True when the smallest eigenvalue is below −[`PPT_MARGIN`].
    pub certified_entangled: bool,
}

/// Partial-transpose criterion: a negative eigenvalue of the partially
/// transposed state certifies entanglement.
pub fn ppt_check(state: &DensityMatrix) -> Result<PptReport, DetectorError> {
    let pt = partial_transpose(state.matrix(), state.dims(), Subsystem::B)?;
    let eig = hermitian_eigensystem(&pt, 1e-9)?;
    let min_eigenvalue = eig.min_eigenvalue();
    Ok(PptReport {
        min_eigenvalue,
        certified_entangled: min_eigenvalue < -PPT_MARGIN,
    })
}

/// Best product state found by the see-saw ascent.
#[derive(Debug, Clone)]
pub struct SeesawResult {
    pub best_sum: f64,
    pub ket_a: Ket,
    pub ket_b: Ket,
}

fn random_ket(dim: usize, rng: &mut ChaCha8Rng) -> Result<Ket, DetectorError> {
    let amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    Ok(Ket::normalized(amps)?)
}

/// Outcome probabilities on a product ket, one argmax per measurement
/// (ties resolved toward the lowest index).
fn pick_outcomes(suite: &[Povm], joint: &[Complex64]) -> Vec<usize> {
    suite
        .iter()
        .map(|povm| {
            let mut best = 0usize;
            let mut best_p = f64::NEG_INFINITY;
            for (k, el) in povm.elements().iter().enumerate() {
                let p = el.quadratic_form(joint).re;
                if p > best_p {
                    best_p = p;
                    best = k;
                }
            }
            best
        })
        .collect()
}

fn sum_of_maxima(suite: &[Povm], joint: &[Complex64]) -> f64 {
    suite
        .iter()
        .map(|povm| {
            povm.elements()
                .iter()
                .map(|el| el.quadratic_form(joint).re)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum()
}

/// For fixed outcome picks and a fixed ket on the other side, the optimal
/// local ket is the top eigenvector of the summed effective operator
/// Σ_t Tr_other[(fixed projector on the other factor) · M_{k_t}].
fn best_local_ket(
    suite: &[Povm],
    picks: &[usize],
    fixed: &Ket,
    dims: (usize, usize),
    side: Subsystem,
) -> Result<Ket, DetectorError> {
    let (da, db) = dims;
    let (keep_dim, sandwich) = match side {
        Subsystem::A => (
            da,
            tensor_product(&ComplexMatrix::identity(da), &fixed.projector()),
        ),
        Subsystem::B => (
            db,
            tensor_product(&fixed.projector(), &ComplexMatrix::identity(db)),
        ),
    };
    let mut f = ComplexMatrix::zeros(keep_dim);
    for (povm, &k) in suite.iter().zip(picks) {
        let big = sandwich.matmul(&povm.elements()[k]);
        f = f.add(&partial_trace(&big, dims, side)?);
    }
    let f = f.add(&f.adjoint()).scale(0.5);
    let eig = hermitian_eigensystem(&f, 1e-9)?;
    Ok(Ket::normalized(eig.eigenvector(keep_dim - 1))?)
}

/// Alternating maximization of the probability sum over product kets
/// |α⟩⊗|β⟩: pick the best outcome per measurement, optimize α by a top
/// eigenvector, re-pick, optimize β, repeat until the gain drops below
/// 1e-12 (at most 500 rounds), restarting from fresh random kets.  The
/// result is a lower bound on the true product-state maximum and never
/// exceeds any valid separability bound for the suite.
pub fn seesaw_max_product(
    suite: &[Povm],
    dims: (usize, usize),
    restarts: usize,
    seed: u64,
) -> Result<SeesawResult, DetectorError> {
    if suite.is_empty() {
        return Err(DetectorError::EmptySuite);
    }
    let (da, db) = dims;
    if da < 1 || db < 1 {
        return Err(DetectorError::RangeError {
            name: "dims",
            value: da.min(db) as f64,
            low: 1.0,
            high: f64::INFINITY,
        });
    }
    for povm in suite {
        if povm.dim() != da * db {
            return Err(DetectorError::DimensionMismatch {
                context: "see-saw suite",
                got: povm.dim(),
                expected: da * db,
            });
        }
    }
    if restarts < 1 {
        return Err(DetectorError::RangeError {
            name: "restarts",
            value: 0.0,
            low: 1.0,
            high: f64::INFINITY,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<SeesawResult> = None;
    for _ in 0..restarts {
        let mut a = random_ket(da, &mut rng)?;
        let mut b = random_ket(db, &mut rng)?;
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..MAX_SEESAW_ITERS {
            let joint = a.tensor(&b);
            let picks = pick_outcomes(suite, joint.amplitudes());
            a = best_local_ket(suite, &picks, &b, dims, Subsystem::A)?;
            let joint = a.tensor(&b);
            let picks = pick_outcomes(suite, joint.amplitudes());
            b = best_local_ket(suite, &picks, &a, dims, Subsystem::B)?;
            let joint = a.tensor(&b);
            let objective = sum_of_maxima(suite, joint.amplitudes());
            if objective - prev < SEESAW_CONV_TOL {
                prev = prev.max(objective);
                break;
            }
            prev = objective;
        }
        let better = match &best {
            Some(r) => prev > r.best_sum,
            None => true,
        };
        if better {
            best = Some(SeesawResult {
                best_sum: prev,
                ket_a: a,
                ket_b: b,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}
