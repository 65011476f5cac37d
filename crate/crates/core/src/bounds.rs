//! Closed-form separability bounds on sums of largest outcome probabilities.
//!
//! For a suite of N composed measurements built from local unbiased bases
//! (or their smoothed counterparts) on a pair of d-level systems, every
//! separable state obeys Σ_t max_k p_k^{(t)} ≤ B(N, d).  This module holds
//! the bound formulas:
//!
//! * [`mub_bound`] — (N/d)(1 + (d−1)/√N) for projective unbiased bases;
//! * [`pairwise_mub_bound`] — 1 + √((N² − N)/d), tighter for small N in
//!   large dimensions;
//! * [`mum_bound`] — (N/d)(1 + √((d−1)(κd−1)/N)) for smoothed measurements
//!   with efficiency κ;
//! * [`qutrit_three_bound`] — the refined constant 1 + (2/√3)·cos(π/18) for
//!   three aligned two-qutrit measurements;
//! * [`overlap_sum_bound`] — the operator-norm form 1 + √(Σ_{s≠t} c_st²)
//!   computed from the measurements themselves, which reproduces the
//!   pairwise formula on unbiased bases.
//!
//! A bound value greater than or equal to the suite size N is vacuous
//! (probabilities already sum to at most N); the interesting regime is
//! bounds strictly below the algebraic maximum.

use crate::linalg::{psd_sqrt, spectral_norm, LinalgError};
use crate::measurements::Povm;
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("parameter {name} = {value} outside [{low}, {high}]")]
    RangeError {
        name: &'static str,
        value: f64,
        low: f64,
        high: f64,
    },
    #[error("selection index {index} out of range for {len} measurements")]
    SelectionOutOfRange { index: usize, len: usize },
    #[error("selected measurements act on different dimensions ({got} vs {expected})")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("the three-measurement qutrit constant needs n = 3, d = 3 (got n = {n}, d = {d})")]
    QutritThreeInapplicable { n: usize, d: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which formula produced a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Complete-set formula for projective unbiased bases.
    Mub,
    /// Pairwise-overlap formula for projective unbiased bases.
    PairwiseMub,
    /// Smoothed-measurement formula at efficiency κ.
    Mum,
    /// Refined constant for the three aligned two-qutrit measurements.
    QutritThree,
    /// Operator-norm overlap sum evaluated on explicit measurements.
    OverlapSum,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundKind::Mub => "mub",
            BoundKind::PairwiseMub => "pairwise-mub",
            BoundKind::Mum => "mum",
            BoundKind::QutritThree => "qutrit-three",
            BoundKind::OverlapSum => "overlap-sum",
        };
        f.write_str(s)
    }
}

/// A separability bound together with the parameters it was computed for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    pub kind: BoundKind,
    /// Number of measurements in the suite the bound applies to.
    pub n: usize,
    /// Local dimension.
    pub d: usize,
    /// Efficiency parameter, present only for smoothed measurements.
    pub kappa: Option<f64>,
}

fn check_nd(n: usize, d: usize) -> Result<(), BoundError> {
    if n < 1 {
        return Err(BoundError::RangeError {
            name: "n",
            value: n as f64,
            low: 1.0,
            high: f64::INFINITY,
        });
    }
    if d < 2 {
        return Err(BoundError::RangeError {
            name: "d",
            value: d as f64,
            low: 2.0,
            high: f64::INFINITY,
        });
    }
    Ok(())
}

/// Separable-state bound (N/d)(1 + (d−1)/√N) for N composed measurements
/// from projective unbiased bases in local dimension d.
pub fn mub_bound(n: usize, d: usize) -> Result<BoundValue, BoundError> {
    check_nd(n, d)?;
    let (nf, df) = (n as f64, d as f64);
    Ok(BoundValue {
        value: (nf / df) * (1.0 + (df - 1.0) / nf.sqrt()),
        kind: BoundKind::Mub,
        n,
        d,
        kappa: None,
    })
}

/// Separable-state bound 1 + √((N² − N)/d) built from pairwise basis
/// overlaps alone.
pub fn pairwise_mub_bound(n: usize, d: usize) -> Result<BoundValue, BoundError> {
    check_nd(n, d)?;
    let (nf, df) = (n as f64, d as f64);
    Ok(BoundValue {
        value: 1.0 + ((nf * nf - nf) / df).sqrt(),
        kind: BoundKind::PairwiseMub,
        n,
        d,
        kappa: None,
    })
}

/// Separable-state bound (N/d)(1 + √((d−1)(κd−1)/N)) for N smoothed
/// unbiased measurements with efficiency κ ∈ (1/d, 1].  At κ = 1 this
/// coincides with [`mub_bound`]; as κ → 1/d it collapses to the trivial
/// value N/d (which drops below 1 when N < d — no clamping is applied).
pub fn mum_bound(n: usize, d: usize, kappa: f64) -> Result<BoundValue, BoundError> {
    check_nd(n, d)?;
    let (nf, df) = (n as f64, d as f64);
    let low = 1.0 / df;
    if !(kappa > low && kappa <= 1.0) {
        return Err(BoundError::RangeError {
            name: "kappa",
            value: kappa,
            low,
            high: 1.0,
        });
    }
    Ok(BoundValue {
        value: (nf / df) * (1.0 + ((df - 1.0) * (kappa * df - 1.0) / nf).sqrt()),
        kind: BoundKind::Mum,
        n,
        d,
        kappa: Some(kappa),
    })
}

/// The refined separable-state constant 1 + (2/√3)·cos(π/18) for the three
/// aligned two-qutrit measurements (standard⊗shift, shift⊗standard and the
/// matched product-eigenbasis pair composed cyclically).  Numerically
/// ≈ 2.1371580, strictly below the generic three-basis value 1 + 2/√3.
pub fn qutrit_three_bound() -> BoundValue {
    BoundValue {
        value: 1.0 + (2.0 / 3.0f64.sqrt()) * (PI / 18.0).cos(),
        kind: BoundKind::QutritThree,
        n: 3,
        d: 3,
        kappa: None,
    }
}

/// Operator-norm overlap bound 1 + √(Σ_{s≠t} c_st²) where
/// c_st = max_{i,j} ‖√M_i^{(s)} √M_j^{(t)}‖_∞ runs over ordered pairs of
/// distinct selected measurements.  On projective unbiased bases every
/// c_st² equals 1/d and the value reduces to [`pairwise_mub_bound`].
pub fn overlap_sum_bound(povms: &[Povm], selection: &[usize]) -> Result<BoundValue, BoundError> {
    if selection.is_empty() {
        return Err(BoundError::RangeError {
            name: "selection",
            value: 0.0,
            low: 1.0,
            high: f64::INFINITY,
        });
    }
    for &s in selection {
        if s >= povms.len() {
            return Err(BoundError::SelectionOutOfRange {
                index: s,
                len: povms.len(),
            });
        }
    }
    let dim = povms[selection[0]].dim();
    for &s in selection {
        if povms[s].dim() != dim {
            return Err(BoundError::DimensionMismatch {
                got: povms[s].dim(),
                expected: dim,
            });
        }
    }
    // Square roots of every selected element, computed once.
    let mut sqrts = Vec::with_capacity(selection.len());
    for &s in selection {
        let roots = povms[s]
            .elements()
            .iter()
            .map(|el| psd_sqrt(el, 1e-10))
            .collect::<Result<Vec<_>, _>>()?;
        sqrts.push(roots);
    }
    let mut sum = 0.0f64;
    for (s, rs) in sqrts.iter().enumerate() {
        for (t, rt) in sqrts.iter().enumerate() {
            if s == t {
                continue;
            }
            let mut worst = 0.0f64;
            for a in rs {
                for b in rt {
                    worst = worst.max(spectral_norm(&a.matmul(b)));
                }
            }
            sum += worst * worst;
        }
    }
    Ok(BoundValue {
        value: 1.0 + sum.sqrt(),
        kind: BoundKind::OverlapSum,
        n: selection.len(),
        d: dim,
        kappa: None,
    })
}

/// The smallest applicable bound for an N-measurement suite in local
/// dimension d.  With `kappa` below 1 only the smoothed-measurement formula
/// applies; otherwise the two projective formulas compete, plus the refined
/// qutrit constant when the caller asserts the suite is the aligned triple
/// (`qutrit_three_applicable`, which requires n = 3, d = 3).  Ties keep the
/// earlier candidate in the order [mub, pairwise, qutrit-three].
pub fn best_bound(
    n: usize,
    d: usize,
    kappa: Option<f64>,
    qutrit_three_applicable: bool,
) -> Result<BoundValue, BoundError> {
    if let Some(k) = kappa {
        if k < 1.0 {
            return mum_bound(n, d, k);
        }
    }
    if qutrit_three_applicable && (n != 3 || d != 3) {
        return Err(BoundError::QutritThreeInapplicable { n, d });
    }
    let mut candidates = vec![mub_bound(n, d)?, pairwise_mub_bound(n, d)?];
    if qutrit_three_applicable {
        candidates.push(qutrit_three_bound());
    }
    let mut best = candidates[0];
    for c in &candidates[1..] {
        if c.value < best.value {
            best = *c;
        }
    }
    Ok(best)
}
