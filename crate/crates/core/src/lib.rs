//! Entanglement detection for bipartite quantum states from sums of maximal
//! outcome probabilities.
//!
//! The crate builds local unbiased measurements (mutually unbiased bases and
//! their smoothed, non-projective relatives), composes a pair of local POVMs
//! into a single measurement on the total system by grouping outcome pairs
//! into non-intersecting subsets, and compares the sum of maximal outcome
//! probabilities over a suite of such measurements against closed-form
//! separability bounds.  A separable state can never push the sum above the
//! bound, so a violation certifies entanglement.
//!
//! Module map:
//!
//! * [`linalg`] — dense complex matrices, tensor products, a Jacobi
//!   eigensolver, spectral norms, PSD square roots, partial trace/transpose;
//! * [`states`] — kets and density matrices: paired maximally entangled
//!   states, Werner-type mixtures, seeded random separable states;
//! * [`measurements`] — POVMs, generalized Pauli operators, prime-dimension
//!   unbiased basis sets, smoothed unbiased measurements, probabilities;
//! * [`composer`] — partition families over outcome grids and the composed
//!   total-system POVMs they induce, including the two-qutrit suite;
//! * [`bounds`] — the separability bounds the detector compares against;
//! * [`detector`] — evaluation, threshold bisection, a partial-transpose
//!   comparator, and a see-saw product-state maximizer.

pub mod bounds;
pub mod composer;
pub mod detector;
pub mod linalg;
pub mod measurements;
pub mod states;

pub use bounds::{BoundKind, BoundValue};
pub use composer::PartitionFamily;
pub use detector::{DetectionReport, PptReport, SeesawResult, ThresholdResult};
pub use linalg::{ComplexMatrix, Subsystem};
pub use measurements::{MubSet, MumSet, Povm};
pub use states::{DensityMatrix, Ket, SeparableState};
