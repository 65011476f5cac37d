//! POVMs and their unbiased families.
//!
//! A POVM is a list of PSD elements summing to the identity; probabilities
//! are p_i = Tr(M_i ρ).  On top of that this module builds the special
//! families the detector needs:
//!
//! * complete sets of d+1 mutually unbiased bases for prime d, generated from
//!   the clock/shift operator pairs via spectral projectors;
//! * smoothed unbiased measurements: depolarized rank-one projectors
//!   P_i = μ|e_i⟩⟨e_i| + (1−μ)I/d, whose pairwise trace pattern is governed
//!   by the efficiency parameter κ = μ² + (1−μ²)/d ∈ (1/d, 1].
//!
//! Constructors validate at tolerance 1e-10; the `certify` methods recompute
//! every residual so callers (and the CLI validator) can report them.

use crate::linalg::{hermitian_eigensystem, ComplexMatrix, LinalgError};
use crate::states::{DensityMatrix, Ket, StateError};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Validation tolerance for POVM/basis invariants.
pub const POVM_TOL: f64 = 1e-10;
/// Probabilities this far outside [0, 1] are clamped as float noise;
/// anything further out is treated as an invalid input.
pub const PROB_CLAMP: f64 = 1e-10;
/// Probabilities within this window of the maximum count as tied argmaxes.
pub const ARGMAX_TIE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeasurementError {
    #[error("dimension must be prime for the unbiased-basis construction, got {0}")]
    NotPrime(usize),
    #[error("basis is not orthonormal (worst residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },
    #[error("parameter {name} = {value} outside ({low}, {high}]")]
    RangeError {
        name: &'static str,
        value: f64,
        low: f64,
        high: f64,
    },
    #[error("element {index} is not Hermitian (residual {residual:.3e})")]
    ElementNotHermitian { index: usize, residual: f64 },
    #[error("element {index} is not PSD (min eigenvalue {min_eigenvalue:.3e})")]
    ElementNotPsd { index: usize, min_eigenvalue: f64 },
    #[error("elements do not sum to the identity (residual {residual:.3e})")]
    CompletenessViolation { residual: f64 },
    #[error("bases {first} and {second} are not unbiased (worst |overlap|^2 deviation {residual:.3e})")]
    NotUnbiased {
        first: usize,
        second: usize,
        residual: f64,
    },
    #[error("element trace is {trace}, expected 1")]
    ElementTraceNotOne { trace: f64 },
    #[error("pairwise traces deviate from the efficiency pattern by {residual:.3e} (kappa {kappa})")]
    EfficiencyMismatch { kappa: f64, residual: f64 },
    #[error("probability {value} outside the clamping window around [0, 1]")]
    ProbabilityOutOfRange { value: f64 },
    #[error("dimension mismatch in {context}: got {got}, expected {expected}")]
    DimensionMismatch {
        context: &'static str,
        got: usize,
        expected: usize,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// A validated positive operator-valued measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<ComplexMatrix>,
    labels: Vec<String>,
    name: String,
}

/// Residuals of the POVM invariants, as recomputed by [`Povm::certify`].
#[derive(Debug, Clone, Copy)]
pub struct PovmReport {
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub completeness_residual: f64,
}

impl PovmReport {
    pub fn ok(&self) -> bool {
        self.hermiticity_residual <= POVM_TOL
            && self.min_eigenvalue >= -POVM_TOL
            && self.completeness_residual <= POVM_TOL
    }
}

impl Povm {
    /// Validate elements (Hermitian, PSD, complete) and wrap them up.
    /// Labels default to the outcome indices when `None`.
    pub fn new(
        dim: usize,
        elements: Vec<ComplexMatrix>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, MeasurementError> {
        if elements.is_empty() {
            return Err(MeasurementError::DimensionMismatch {
                context: "POVM element count",
                got: 0,
                expected: 1,
            });
        }
        for (i, el) in elements.iter().enumerate() {
            if el.dim() != dim {
                return Err(MeasurementError::DimensionMismatch {
                    context: "POVM element",
                    got: el.dim(),
                    expected: dim,
                });
            }
            let res = el.hermiticity_residual();
            if res > POVM_TOL {
                return Err(MeasurementError::ElementNotHermitian {
                    index: i,
                    residual: res,
                });
            }
            let eig = hermitian_eigensystem(el, POVM_TOL)?;
            if eig.min_eigenvalue() < -POVM_TOL {
                return Err(MeasurementError::ElementNotPsd {
                    index: i,
                    min_eigenvalue: eig.min_eigenvalue(),
                });
            }
        }
        let mut sum = ComplexMatrix::zeros(dim);
        for el in &elements {
            sum = sum.add(el);
        }
        let completeness = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if completeness > POVM_TOL {
            return Err(MeasurementError::CompletenessViolation {
                residual: completeness,
            });
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != elements.len() {
                    return Err(MeasurementError::DimensionMismatch {
                        context: "label count",
                        got: l.len(),
                        expected: elements.len(),
                    });
                }
                l
            }
            None => (0..elements.len()).map(|i| i.to_string()).collect(),
        };
        Ok(Povm {
            dim,
            elements,
            labels,
            name: "M".to_string(),
        })
    }

    /// Attach a display name used in detection reports.
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Replace the outcome labels (must match the outcome count).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, MeasurementError> {
        if labels.len() != self.elements.len() {
            return Err(MeasurementError::DimensionMismatch {
                context: "label count",
                got: labels.len(),
                expected: self.elements.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Recompute every invariant residual.
    pub fn certify(&self) -> PovmReport {
        let mut herm = 0.0f64;
        let mut min_eig = f64::INFINITY;
        let mut sum = ComplexMatrix::zeros(self.dim);
        for el in &self.elements {
            herm = herm.max(el.hermiticity_residual());
            if let Ok(eig) = hermitian_eigensystem(el, 1.0) {
                min_eig = min_eig.min(eig.min_eigenvalue());
            }
            sum = sum.add(el);
        }
        PovmReport {
            hermiticity_residual: herm,
            min_eigenvalue: min_eig,
            completeness_residual: sum.max_abs_diff(&ComplexMatrix::identity(self.dim)),
        }
    }
}

/// A set of pairwise mutually unbiased orthonormal bases.
#[derive(Debug, Clone, PartialEq)]
pub struct MubSet {
    dim: usize,
    bases: Vec<Vec<Ket>>,
}

/// Residuals of the unbiased-basis invariants.
#[derive(Debug, Clone, Copy)]
pub struct MubReport {
    /// Worst |⟨e_i|e_j⟩ − δ_ij| within a basis.
    pub orthonormality_residual: f64,
    /// Worst | |⟨e_i|f_j⟩|² − 1/d | across distinct bases.
    pub unbiasedness_residual: f64,
}

impl MubReport {
    pub fn ok(&self) -> bool {
        self.orthonormality_residual <= POVM_TOL && self.unbiasedness_residual <= POVM_TOL
    }
}

impl MubSet {
    pub fn new(dim: usize, bases: Vec<Vec<Ket>>) -> Result<Self, MeasurementError> {
        if bases.is_empty() {
            return Err(MeasurementError::DimensionMismatch {
                context: "basis count",
                got: 0,
                expected: 1,
            });
        }
        for basis in &bases {
            if basis.len() != dim {
                return Err(MeasurementError::DimensionMismatch {
                    context: "basis size",
                    got: basis.len(),
                    expected: dim,
                });
            }
            for k in basis {
                if k.dim() != dim {
                    return Err(MeasurementError::DimensionMismatch {
                        context: "basis ket",
                        got: k.dim(),
                        expected: dim,
                    });
                }
            }
        }
        let set = MubSet { dim, bases };
        let report = set.certify();
        if report.orthonormality_residual > POVM_TOL {
            return Err(MeasurementError::NotOrthonormal {
                residual: report.orthonormality_residual,
            });
        }
        if report.unbiasedness_residual > POVM_TOL {
            // Locate the worst pair for the error message.
            let (mut wf, mut ws, mut worst) = (0, 0, 0.0f64);
            for a in 0..set.bases.len() {
                for b in (a + 1)..set.bases.len() {
                    let r = set.pair_unbiasedness_residual(a, b);
                    if r > worst {
                        worst = r;
                        wf = a;
                        ws = b;
                    }
                }
            }
            return Err(MeasurementError::NotUnbiased {
                first: wf,
                second: ws,
                residual: worst,
            });
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_bases(&self) -> usize {
        self.bases.len()
    }

    pub fn bases(&self) -> &[Vec<Ket>] {
        &self.bases
    }

    pub fn basis(&self, index: usize) -> &[Ket] {
        &self.bases[index]
    }

    fn pair_unbiasedness_residual(&self, a: usize, b: usize) -> f64 {
        let target = 1.0 / self.dim as f64;
        let mut worst = 0.0f64;
        for e in &self.bases[a] {
            for f in &self.bases[b] {
                worst = worst.max((e.inner(f).norm_sqr() - target).abs());
            }
        }
        worst
    }

    /// Recompute every invariant residual.
    pub fn certify(&self) -> MubReport {
        let mut ortho = 0.0f64;
        for basis in &self.bases {
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    ortho = ortho.max((a.inner(b) - expected).norm());
                }
            }
        }
        let mut unbias = 0.0f64;
        for a in 0..self.bases.len() {
            for b in (a + 1)..self.bases.len() {
                unbias = unbias.max(self.pair_unbiasedness_residual(a, b));
            }
        }
        MubReport {
            orthonormality_residual: ortho,
            unbiasedness_residual: unbias,
        }
    }
}

/// A set of mutually unbiased measurements: one POVM per basis direction,
/// trace-one elements, cross traces 1/d, and same-POVM traces following the
/// efficiency pattern Tr(P_i P_j) = δ_ij κ + (1−δ_ij)(1−κ)/(d−1).
#[derive(Debug, Clone, PartialEq)]
pub struct MumSet {
    dim: usize,
    kappa: f64,
    povms: Vec<Povm>,
}

/// Residuals of the unbiased-measurement trace conditions.
#[derive(Debug, Clone, Copy)]
pub struct MumReport {
    /// Worst |Tr(P_i) − 1|.
    pub trace_residual: f64,
    /// Worst |Tr(P_i Q_j) − 1/d| across distinct POVMs.
    pub cross_residual: f64,
    /// Worst deviation of same-POVM traces from the κ pattern.
    pub efficiency_residual: f64,
    pub kappa: f64,
}

impl MumReport {
    pub fn ok(&self) -> bool {
        self.trace_residual <= POVM_TOL
            && self.cross_residual <= POVM_TOL
            && self.efficiency_residual <= POVM_TOL
    }
}

impl MumSet {
    pub fn new(dim: usize, kappa: f64, povms: Vec<Povm>) -> Result<Self, MeasurementError> {
        let low = 1.0 / dim as f64;
        if !(kappa > low && kappa <= 1.0) {
            return Err(MeasurementError::RangeError {
                name: "kappa",
                value: kappa,
                low,
                high: 1.0,
            });
        }
        for p in &povms {
            if p.dim() != dim || p.n_outcomes() != dim {
                return Err(MeasurementError::DimensionMismatch {
                    context: "unbiased measurement",
                    got: p.dim().max(p.n_outcomes()),
                    expected: dim,
                });
            }
        }
        let set = MumSet { dim, kappa, povms };
        let report = set.certify();
        if report.trace_residual > POVM_TOL {
            return Err(MeasurementError::ElementTraceNotOne {
                trace: 1.0 + report.trace_residual,
            });
        }
        if report.cross_residual > POVM_TOL || report.efficiency_residual > POVM_TOL {
            return Err(MeasurementError::EfficiencyMismatch {
                kappa,
                residual: report.cross_residual.max(report.efficiency_residual),
            });
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn povms(&self) -> &[Povm] {
        &self.povms
    }

    /// Recompute the trace conditions against the stored κ.
    pub fn certify(&self) -> MumReport {
        let d = self.dim as f64;
        let mut trace_res = 0.0f64;
        let mut cross_res = 0.0f64;
        let mut eff_res = 0.0f64;
        let off_target = if self.dim > 1 {
            (1.0 - self.kappa) / (d - 1.0)
        } else {
            0.0
        };
        for (s, p) in self.povms.iter().enumerate() {
            for el in p.elements() {
                trace_res = trace_res.max((el.trace().re - 1.0).abs().max(el.trace().im.abs()));
            }
            for (t, q) in self.povms.iter().enumerate() {
                for (i, pi) in p.elements().iter().enumerate() {
                    for (j, qj) in q.elements().iter().enumerate() {
                        let tr = pi.trace_product(qj);
                        if s == t {
                            let target = if i == j { self.kappa } else { off_target };
                            eff_res = eff_res.max((tr.re - target).abs().max(tr.im.abs()));
                        } else {
                            cross_res = cross_res.max((tr.re - 1.0 / d).abs().max(tr.im.abs()));
                        }
                    }
                }
            }
        }
        MumReport {
            trace_residual: trace_res,
            cross_residual: cross_res,
            efficiency_residual: eff_res,
            kappa: self.kappa,
        }
    }
}

/// The primitive d-th root of unity e^{i 2π/d}.
pub fn root_of_unity(d: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / d as f64)
}

/// The clock and shift pair: Z = diag(1, ω, …, ω^{d−1}) and X|i⟩ = |i+1 mod d⟩,
/// which obey the commutation rule ZX = ωXZ.
pub fn generalized_pauli(d: usize) -> Result<(ComplexMatrix, ComplexMatrix), MeasurementError> {
    if d < 2 {
        return Err(MeasurementError::RangeError {
            name: "d",
            value: d as f64,
            low: 2.0,
            high: f64::INFINITY,
        });
    }
    let w = root_of_unity(d);
    let z = ComplexMatrix::from_fn(d, |i, j| {
        if i == j {
            w.powu(i as u32)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let x = ComplexMatrix::from_fn(d, |i, j| {
        if i == (j + 1) % d {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok((z, x))
}

fn is_prime(d: usize) -> bool {
    if d < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= d {
        if d % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Eigenbasis of a unitary whose d-th power is a scalar μ·I, without a
/// general eigensolver: the group-algebra sums
/// P_k = (1/d) Σ_n λ_k^{−n} B^n with λ_k = e^{i·arg(μ)/d}·ω^k are the
/// spectral projectors, and each is rank one for the operators used here.
/// Kets come back ordered by k (the power of ω in the eigenvalue), with the
/// first nonvanishing amplitude made real positive.
fn unitary_eigenbasis(b: &ComplexMatrix, d: usize) -> Result<Vec<Ket>, MeasurementError> {
    let w = root_of_unity(d);
    let mut powers = Vec::with_capacity(d + 1);
    powers.push(ComplexMatrix::identity(d));
    for n in 1..=d {
        powers.push(powers[n - 1].matmul(b));
    }
    let mu = powers[d][(0, 0)];
    let scalar_residual = powers[d].max_abs_diff(&ComplexMatrix::identity(d).scale_c(mu));
    assert!(
        scalar_residual < 1e-10,
        "operator power B^d is not scalar (residual {scalar_residual:.3e})"
    );
    let zeta = Complex64::from_polar(1.0, mu.arg() / d as f64);

    let mut kets = Vec::with_capacity(d);
    for k in 0..d {
        let lambda = zeta * w.powu(k as u32);
        let lambda_inv = lambda.conj();
        let mut proj = ComplexMatrix::zeros(d);
        for (n, bn) in powers.iter().take(d).enumerate() {
            proj = proj.add(&bn.scale_c(lambda_inv.powu(n as u32) / d as f64));
        }
        // The projector is rank one; its largest column is the desired ket.
        let best_col = (0..d)
            .max_by(|&a, &c| {
                let na: f64 = (0..d).map(|i| proj[(i, a)].norm_sqr()).sum();
                let nc: f64 = (0..d).map(|i| proj[(i, c)].norm_sqr()).sum();
                na.partial_cmp(&nc).unwrap()
            })
            .unwrap();
        let col = proj.column(best_col);
        let mut ket = Ket::normalized(col)?;
        // Fix the global phase: first amplitude above the noise floor real positive.
        if let Some(first) = ket.amplitudes().iter().find(|a| a.norm() > 1e-8) {
            let phase = first / first.norm();
            let amps = ket
                .amplitudes()
                .iter()
                .map(|a| a * phase.conj())
                .collect::<Vec<_>>();
            ket = Ket::new(amps)?;
        }
        // Internal consistency: the extracted ket is an eigenvector.
        let action = b.mul_vec(ket.amplitudes());
        let worst = action
            .iter()
            .zip(ket.amplitudes())
            .map(|(l, r)| (l - lambda * r).norm())
            .fold(0.0, f64::max);
        assert!(
            worst < 1e-10,
            "spectral projector produced a non-eigenvector (residual {worst:.3e})"
        );
        kets.push(ket);
    }
    Ok(kets)
}

/// A complete set of d+1 mutually unbiased bases for prime d.
///
/// Basis 0 is the standard (clock-operator) basis; the remaining d bases are
/// the eigenbases of the shift operator X and of the products Z X^m for
/// m = 1..d−1.  Within each basis, kets are ordered by the power of ω in
/// their eigenvalue.
pub fn prime_mub_set(d: usize) -> Result<MubSet, MeasurementError> {
    if !is_prime(d) {
        return Err(MeasurementError::NotPrime(d));
    }
    let (z, x) = generalized_pauli(d)?;
    let mut bases = Vec::with_capacity(d + 1);
    bases.push(
        (0..d)
            .map(|i| Ket::basis_state(d, i))
            .collect::<Result<Vec<_>, _>>()?,
    );
    bases.push(unitary_eigenbasis(&x, d)?);
    for m in 1..d {
        let op = z.matmul(&x.pow(m));
        bases.push(unitary_eigenbasis(&op, d)?);
    }
    MubSet::new(d, bases)
}

/// Rank-one projective POVM from an orthonormal basis.
pub fn basis_to_povm(basis: &[Ket]) -> Result<Povm, MeasurementError> {
    if basis.is_empty() {
        return Err(MeasurementError::DimensionMismatch {
            context: "basis size",
            got: 0,
            expected: 1,
        });
    }
    let dim = basis[0].dim();
    if basis.len() != dim {
        return Err(MeasurementError::DimensionMismatch {
            context: "basis size",
            got: basis.len(),
            expected: dim,
        });
    }
    let mut worst = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.inner(b) - expected).norm());
        }
    }
    if worst > POVM_TOL {
        return Err(MeasurementError::NotOrthonormal { residual: worst });
    }
    let elements = basis.iter().map(|k| k.projector()).collect();
    Povm::new(dim, elements, None)
}

/// Smooth a set of unbiased bases into unbiased measurements by mixing each
/// rank-one projector with the maximally mixed element:
/// P_i = μ|e_i⟩⟨e_i| + (1−μ)I/d, giving efficiency κ = μ² + (1−μ²)/d.
///
/// μ = 1 keeps the projective measurements (κ = 1); μ → 0 is excluded since
/// κ = 1/d corresponds to the trivial measurement.
pub fn smooth_mum(mubs: &MubSet, mu: f64) -> Result<MumSet, MeasurementError> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(MeasurementError::RangeError {
            name: "mu",
            value: mu,
            low: 0.0,
            high: 1.0,
        });
    }
    let d = mubs.dim();
    let background = ComplexMatrix::identity(d).scale((1.0 - mu) / d as f64);
    let mut povms = Vec::with_capacity(mubs.n_bases());
    for (b, basis) in mubs.bases().iter().enumerate() {
        let elements: Vec<ComplexMatrix> = basis
            .iter()
            .map(|k| k.projector().scale(mu).add(&background))
            .collect();
        povms.push(Povm::new(d, elements, None)?.with_name(format!("B{b}")));
    }
    let kappa = mu * mu + (1.0 - mu * mu) / d as f64;
    MumSet::new(d, kappa, povms)
}

/// Outcome probabilities p_i = Tr(M_i ρ), clamped to [0, 1] within the
/// noise window [`PROB_CLAMP`].
pub fn measure(povm: &Povm, rho: &DensityMatrix) -> Result<Vec<f64>, MeasurementError> {
    if povm.dim() != rho.total_dim() {
        return Err(MeasurementError::DimensionMismatch {
            context: "measurement",
            got: rho.total_dim(),
            expected: povm.dim(),
        });
    }
    povm.elements()
        .iter()
        .map(|el| {
            let p = el.trace_product(rho.matrix());
            if p.im.abs() > PROB_CLAMP {
                return Err(MeasurementError::ProbabilityOutOfRange { value: p.im });
            }
            let v = p.re;
            if v < -PROB_CLAMP || v > 1.0 + PROB_CLAMP {
                return Err(MeasurementError::ProbabilityOutOfRange { value: v });
            }
            Ok(v.clamp(0.0, 1.0))
        })
        .collect()
}

/// The largest outcome probability and every label within [`ARGMAX_TIE`]
/// of it.
pub fn max_probability(
    povm: &Povm,
    rho: &DensityMatrix,
) -> Result<(f64, Vec<String>), MeasurementError> {
    let probs = measure(povm, rho)?;
    let max = probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let argmax = probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= max - ARGMAX_TIE)
        .map(|(i, _)| povm.labels()[i].clone())
        .collect();
    Ok((max, argmax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{completely_mixed, random_separable};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn w3() -> Complex64 {
        root_of_unity(3)
    }

    #[test]
    fn generalized_pauli_qutrit_matrices() {
        let (z, x) = generalized_pauli(3).unwrap();
        let w = w3();
        // Clock: diag(1, ω, ω²).
        assert!((z[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((z[(1, 1)] - w).norm() < 1e-15);
        assert!((z[(2, 2)] - w * w).norm() < 1e-15);
        assert!(z[(0, 1)].norm() < 1e-15);
        // Shift: |0⟩→|1⟩→|2⟩→|0⟩, i.e. ones at (1,0), (2,1), (0,2).
        for (i, j) in [(1, 0), (2, 1), (0, 2)] {
            assert!((x[(i, j)] - c(1.0, 0.0)).norm() < 1e-15);
        }
        assert!(x[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn generalized_pauli_qubit_matrices() {
        let (z, x) = generalized_pauli(2).unwrap();
        assert!((z[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((z[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((x[(0, 1)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((x[(1, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn clock_shift_commutation_rule() {
        for d in [2usize, 3, 5, 7] {
            let (z, x) = generalized_pauli(d).unwrap();
            let w = root_of_unity(d);
            let lhs = z.matmul(&x);
            let rhs = x.matmul(&z).scale_c(w);
            assert!(lhs.max_abs_diff(&rhs) < 1e-14, "d = {d}");
        }
    }

    #[test]
    fn prime_mub_set_rejects_composite_dimensions() {
        for d in [0usize, 1, 4, 6, 9] {
            assert!(matches!(prime_mub_set(d), Err(MeasurementError::NotPrime(_))), "d = {d}");
        }
    }

    #[test]
    fn prime_mub_set_invariants_hold_for_small_primes() {
        for d in [2usize, 3, 5, 7] {
            let set = prime_mub_set(d).unwrap();
            assert_eq!(set.n_bases(), d + 1);
            let report = set.certify();
            assert!(report.ok(), "d = {d}: {report:?}");
        }
    }

    #[test]
    fn prime_mub_set_qubit_bases_are_the_pauli_eigenbases() {
        let set = prime_mub_set(2).unwrap();
        let r = 1.0 / 2.0f64.sqrt();
        // Standard basis.
        assert!((set.basis(0)[0].amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-12);
        // Shift (σ_x) eigenbasis ordered by eigenvalue +1, −1.
        let xb = set.basis(1);
        assert!((xb[0].amplitudes()[0] - c(r, 0.0)).norm() < 1e-12);
        assert!((xb[0].amplitudes()[1] - c(r, 0.0)).norm() < 1e-12);
        assert!((xb[1].amplitudes()[0] - c(r, 0.0)).norm() < 1e-12);
        assert!((xb[1].amplitudes()[1] - c(-r, 0.0)).norm() < 1e-12);
        // ZX has (ZX)² = −I; its eigenbasis is the σ_y pair (1, ±i)/√2.
        let yb = set.basis(2);
        assert!((yb[0].amplitudes()[0] - c(r, 0.0)).norm() < 1e-12);
        assert!((yb[0].amplitudes()[1] - c(0.0, r)).norm() < 1e-12);
        assert!((yb[1].amplitudes()[1] - c(0.0, -r)).norm() < 1e-12);
    }

    /// The four qutrit bases in the exact layout used throughout the
    /// two-qutrit scheme, including the eigenvalue ordering 1, ω, ω².
    fn expected_qutrit_bases() -> Vec<Vec<Vec<Complex64>>> {
        let w = w3();
        let ws = w.conj();
        let r = 1.0 / 3.0f64.sqrt();
        let one = c(1.0, 0.0);
        let scale = |v: [Complex64; 3]| v.iter().map(|z| z * r).collect::<Vec<_>>();
        vec![
            vec![
                vec![one, c(0.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), one, c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 0.0), one],
            ],
            vec![
                scale([one, one, one]),
                scale([one, ws, w]),
                scale([one, w, ws]),
            ],
            vec![
                scale([one, w, one]),
                scale([one, one, w]),
                scale([w, one, one]),
            ],
            vec![
                scale([one, one, ws]),
                scale([ws, one, one]),
                scale([one, ws, one]),
            ],
        ]
    }

    #[test]
    fn prime_mub_set_qutrit_matches_reference_tables_up_to_phase() {
        let set = prime_mub_set(3).unwrap();
        let expected = expected_qutrit_bases();
        for (b, basis) in expected.iter().enumerate() {
            for (k, amps) in basis.iter().enumerate() {
                let reference = Ket::new(amps.clone()).unwrap();
                let overlap = set.basis(b)[k].inner(&reference).norm();
                assert!(
                    (overlap - 1.0).abs() < 1e-10,
                    "basis {b} ket {k}: |overlap| = {overlap}"
                );
            }
        }
    }

    #[test]
    fn prime_mub_set_qutrit_kets_are_ordered_by_eigenvalue() {
        // Basis m+1 must consist of eigenvectors of the m-th operator in the
        // listing [X, ZX, ZX²], with eigenvalue ω^k at position k.
        let set = prime_mub_set(3).unwrap();
        let (z, x) = generalized_pauli(3).unwrap();
        let ops = [x.clone(), z.matmul(&x), z.matmul(&x.pow(2))];
        let w = w3();
        for (m, op) in ops.iter().enumerate() {
            for k in 0..3 {
                let ket = &set.basis(m + 1)[k];
                let action = op.mul_vec(ket.amplitudes());
                let lambda = w.powu(k as u32);
                let worst = action
                    .iter()
                    .zip(ket.amplitudes())
                    .map(|(l, r)| (l - lambda * r).norm())
                    .fold(0.0, f64::max);
                assert!(worst < 1e-12, "operator {m} ket {k}: residual {worst}");
            }
        }
    }

    #[test]
    fn prime_mub_set_five_dimensional_overlaps() {
        let set = prime_mub_set(5).unwrap();
        let target = 1.0 / 5.0f64.sqrt();
        for a in 0..6 {
            for b in (a + 1)..6 {
                for e in set.basis(a) {
                    for f in set.basis(b) {
                        assert!((e.inner(f).norm() - target).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn basis_to_povm_standard_and_fourier() {
        let set = prime_mub_set(3).unwrap();
        let standard = basis_to_povm(set.basis(0)).unwrap();
        for (i, el) in standard.elements().iter().enumerate() {
            assert!((el[(i, i)] - c(1.0, 0.0)).norm() < 1e-14);
        }
        let fourier = basis_to_povm(set.basis(1)).unwrap();
        for el in fourier.elements() {
            for i in 0..3 {
                assert!((el[(i, i)].re - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn basis_to_povm_rejects_non_orthonormal_input() {
        let k = Ket::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        match basis_to_povm(&[k.clone(), k]) {
            Err(MeasurementError::NotOrthonormal { residual }) => assert!(residual > 0.9),
            other => panic!("expected NotOrthonormal, got {other:?}"),
        }
    }

    #[test]
    fn smooth_mum_projective_limit() {
        let mubs = prime_mub_set(3).unwrap();
        let mums = smooth_mum(&mubs, 1.0).unwrap();
        assert!((mums.kappa() - 1.0).abs() < 1e-15);
        for (povm, basis) in mums.povms().iter().zip(mubs.bases()) {
            for (el, ket) in povm.elements().iter().zip(basis) {
                assert!(el.max_abs_diff(&ket.projector()) < 1e-14);
            }
        }
    }

    #[test]
    fn smooth_mum_half_mixing_traces() {
        let mubs = prime_mub_set(3).unwrap();
        let mums = smooth_mum(&mubs, 0.5).unwrap();
        // κ = 0.25 + 0.75/3 = 0.5, and the brute-forced traces agree.
        assert!((mums.kappa() - 0.5).abs() < 1e-15);
        let report = mums.certify();
        assert!(report.trace_residual < 1e-12);
        assert!(report.cross_residual < 1e-12);
        assert!(report.efficiency_residual < 1e-12);
        // Spot-check one same-POVM diagonal trace by hand.
        let p0 = &mums.povms()[0].elements()[0];
        assert!((p0.trace_product(p0).re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn smooth_mum_kappa_matches_brute_force_on_grid() {
        for d in [2usize, 3] {
            let mubs = prime_mub_set(d).unwrap();
            for step in 1..=10 {
                let mu = step as f64 / 10.0;
                let mums = smooth_mum(&mubs, mu).unwrap();
                let p = &mums.povms()[0].elements()[0];
                let brute = p.trace_product(p).re;
                assert!(
                    (brute - mums.kappa()).abs() < 1e-12,
                    "d = {d}, mu = {mu}: brute {brute} vs stored {}",
                    mums.kappa()
                );
            }
        }
    }

    #[test]
    fn smooth_mum_rejects_out_of_range_mixing() {
        let mubs = prime_mub_set(3).unwrap();
        assert!(matches!(
            smooth_mum(&mubs, 0.0),
            Err(MeasurementError::RangeError { .. })
        ));
        assert!(matches!(
            smooth_mum(&mubs, 1.2),
            Err(MeasurementError::RangeError { .. })
        ));
    }

    #[test]
    fn mum_set_rejects_mismatched_kappa() {
        let mubs = prime_mub_set(3).unwrap();
        let mums = smooth_mum(&mubs, 0.5).unwrap();
        let wrong = MumSet::new(3, mums.kappa() + 0.01, mums.povms().to_vec());
        assert!(matches!(
            wrong,
            Err(MeasurementError::EfficiencyMismatch { .. })
        ));
    }

    #[test]
    fn measure_on_completely_mixed_returns_element_traces() {
        let mubs = prime_mub_set(3).unwrap();
        let mums = smooth_mum(&mubs, 0.7).unwrap();
        let rho = completely_mixed((3, 1));
        for povm in mums.povms() {
            let probs = measure(povm, &rho).unwrap();
            for p in &probs {
                assert!((p - 1.0 / 3.0).abs() < 1e-13);
            }
            let total: f64 = probs.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_sums_to_one_for_random_inputs() {
        let mubs = prime_mub_set(3).unwrap();
        for seed in 0..20u64 {
            let rho = random_separable(3, 1, 3, seed).unwrap().density;
            for basis in mubs.bases() {
                let povm = basis_to_povm(basis).unwrap();
                let probs = measure(&povm, &rho).unwrap();
                let total: f64 = probs.iter().sum();
                assert!((total - 1.0).abs() < 1e-12);
                for p in probs {
                    assert!((0.0..=1.0).contains(&p));
                }
            }
        }
    }

    #[test]
    fn measure_rejects_dimension_mismatch() {
        let mubs = prime_mub_set(3).unwrap();
        let povm = basis_to_povm(mubs.basis(0)).unwrap();
        let rho = completely_mixed((2, 1));
        assert!(matches!(
            measure(&povm, &rho),
            Err(MeasurementError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn max_probability_reports_all_tied_labels() {
        let mubs = prime_mub_set(2).unwrap();
        let povm = basis_to_povm(mubs.basis(0)).unwrap();
        let (value, labels) = max_probability(&povm, &completely_mixed((2, 1))).unwrap();
        assert!((value - 0.5).abs() < 1e-13);
        assert_eq!(labels.len(), 2);
    }

    #[test]
    fn max_probability_is_convex_in_the_state() {
        let mubs = prime_mub_set(3).unwrap();
        let povm = basis_to_povm(mubs.basis(1)).unwrap();
        for seed in 0..15u64 {
            let rho = random_separable(3, 1, 2, 2 * seed).unwrap().density;
            let sigma = random_separable(3, 1, 2, 2 * seed + 1).unwrap().density;
            for lam in [0.25, 0.5, 0.9] {
                let blended = rho
                    .matrix()
                    .scale(lam)
                    .add(&sigma.matrix().scale(1.0 - lam));
                let blended = DensityMatrix::new(blended, (3, 1)).unwrap();
                let (pb, _) = max_probability(&povm, &blended).unwrap();
                let (pr, _) = max_probability(&povm, &rho).unwrap();
                let (ps, _) = max_probability(&povm, &sigma).unwrap();
                assert!(pb <= lam * pr + (1.0 - lam) * ps + 1e-10);
            }
        }
    }
}
