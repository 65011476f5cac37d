//! Composition of local POVMs into total-system measurements.
//!
//! Two local POVMs with m and n outcomes induce an m×n grid of product
//! operators M_i ⊗ N_j.  A partition of that grid into subsets defines a
//! coarse-grained measurement on the joint system: one element per subset,
//! Λ_k = Σ_{(i,j)∈ϖ(k)} M_i ⊗ N_j.
//!
//! When every subset touches each row and each column at most once, the
//! largest outcome probability of the composed measurement on a product
//! state can never exceed either local maximum — the structural fact the
//! separability bounds rest on.  Families violating that condition can be
//! built too (flagged non-compliant), and the tests include the standard
//! counterexample showing why the condition matters.

use crate::linalg::{tensor_product, ComplexMatrix};
use crate::measurements::{MeasurementError, Povm};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ComposerError {
    #[error("no subsets given")]
    EmptyFamily,
    #[error("subset {subset} is empty")]
    EmptySubset { subset: usize },
    #[error("pair ({},{}) outside the {}×{} outcome grid", pair.0, pair.1, shape.0, shape.1)]
    PairOutOfRange {
        pair: (usize, usize),
        shape: (usize, usize),
    },
    #[error("subsets do not partition the outcome grid: pair ({},{}) {problem}", pair.0, pair.1)]
    NotAPartition {
        pair: (usize, usize),
        problem: &'static str,
    },
    #[error("subset {subset} uses a row or column twice")]
    IntersectingPairs { subset: usize },
    #[error("partition shape {}×{} does not match the outcome counts {}×{}", family.0, family.1, povms.0, povms.1)]
    ShapeMismatch {
        family: (usize, usize),
        povms: (usize, usize),
    },
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
}

/// A partition of an m×n outcome grid into labelled subsets.
///
/// `compliant` records whether every subset uses each row index and each
/// column index at most once; only compliant families carry the product-state
/// probability guarantee.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionFamily {
    shape: (usize, usize),
    subsets: Vec<Vec<(usize, usize)>>,
    compliant: bool,
}

impl PartitionFamily {
    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn subsets(&self) -> &[Vec<(usize, usize)>] {
        &self.subsets
    }

    pub fn n_subsets(&self) -> usize {
        self.subsets.len()
    }

    pub fn compliant(&self) -> bool {
        self.compliant
    }
}

fn subset_intersects(subset: &[(usize, usize)]) -> bool {
    for (a, &(ra, ca)) in subset.iter().enumerate() {
        for &(rb, cb) in subset.iter().skip(a + 1) {
            if ra == rb || ca == cb {
                return true;
            }
        }
    }
    false
}

/// Build a partition family over an m×n outcome grid.
///
/// The subsets must always tile the grid exactly (every pair once).  With
/// `enforce` set, each subset must additionally use every row and column at
/// most once; without it such subsets are allowed and the family is merely
/// flagged non-compliant.
pub fn make_partition(
    shape: (usize, usize),
    subsets: Vec<Vec<(usize, usize)>>,
    enforce: bool,
) -> Result<PartitionFamily, ComposerError> {
    let (m, n) = shape;
    if subsets.is_empty() {
        return Err(ComposerError::EmptyFamily);
    }
    for (k, subset) in subsets.iter().enumerate() {
        if subset.is_empty() {
            return Err(ComposerError::EmptySubset { subset: k });
        }
        for &pair in subset {
            if pair.0 >= m || pair.1 >= n {
                return Err(ComposerError::PairOutOfRange { pair, shape });
            }
        }
    }
    let mut seen = vec![false; m * n];
    for subset in &subsets {
        for &(i, j) in subset {
            let idx = i * n + j;
            if seen[idx] {
                return Err(ComposerError::NotAPartition {
                    pair: (i, j),
                    problem: "appears twice",
                });
            }
            seen[idx] = true;
        }
    }
    if let Some(idx) = seen.iter().position(|&s| !s) {
        return Err(ComposerError::NotAPartition {
            pair: (idx / n, idx % n),
            problem: "is missing",
        });
    }
    let mut compliant = true;
    for (k, subset) in subsets.iter().enumerate() {
        if subset_intersects(subset) {
            if enforce {
                return Err(ComposerError::IntersectingPairs { subset: k });
            }
            compliant = false;
        }
    }
    Ok(PartitionFamily {
        shape,
        subsets,
        compliant,
    })
}

/// The diagonal-striping partition of a d×d grid: subset k collects the
/// pairs (i, j) with i + j ≡ k (mod d).  Always compliant.
pub fn cyclic_partition(d: usize) -> PartitionFamily {
    let subsets = (0..d)
        .map(|k| (0..d).map(|i| (i, (k + d - i) % d)).collect())
        .collect();
    PartitionFamily {
        shape: (d, d),
        subsets,
        compliant: true,
    }
}

/// Coarse-grain the product of two local POVMs along a partition family:
/// element k is Σ_{(i,j)∈ϖ(k)} M_i ⊗ N_j.  Labels are the subset indices;
/// the name combines the local names.
pub fn compose_povm(
    p: &Povm,
    q: &Povm,
    family: &PartitionFamily,
) -> Result<Povm, ComposerError> {
    let povm_shape = (p.n_outcomes(), q.n_outcomes());
    if family.shape() != povm_shape {
        return Err(ComposerError::ShapeMismatch {
            family: family.shape(),
            povms: povm_shape,
        });
    }
    let dim = p.dim() * q.dim();
    let mut elements = Vec::with_capacity(family.n_subsets());
    for subset in family.subsets() {
        let mut el = ComplexMatrix::zeros(dim);
        for &(i, j) in subset {
            el = el.add(&tensor_product(&p.elements()[i], &q.elements()[j]));
        }
        elements.push(el);
    }
    let labels = (0..family.n_subsets()).map(|k| k.to_string()).collect();
    let composed = Povm::new(dim, elements, Some(labels))?
        .with_name(format!("{}⊗{}", p.name(), q.name()));
    Ok(composed)
}

/// The four composed two-qutrit measurements used throughout the detection
/// examples, built from the complete qutrit basis set [standard, X, ZX, ZX²]:
///
/// * Z⊗X — standard basis on A, shift eigenbasis on B;
/// * X⊗Z — the reverse;
/// * ZX⊗ZX and ZX²⊗ZX² — the same product eigenbasis on both sides;
///
/// each coarse-grained along the cyclic partition, outcomes labelled by the
/// total eigenvalue ω^k.
pub fn qutrit_suite() -> Result<Vec<Povm>, ComposerError> {
    let mubs = crate::measurements::prime_mub_set(3)?;
    let povm = |b: usize, name: &str| -> Result<Povm, ComposerError> {
        Ok(crate::measurements::basis_to_povm(mubs.basis(b))?.with_name(name))
    };
    let z = povm(0, "Z")?;
    let x = povm(1, "X")?;
    let zx = povm(2, "ZX")?;
    let zx2 = povm(3, "ZX²")?;
    let family = cyclic_partition(3);
    let pairs = [(&z, &x), (&x, &z), (&zx, &zx), (&zx2, &zx2)];
    let omega_labels: Vec<String> = (0..3).map(|k| format!("ω^{k}")).collect();
    pairs
        .iter()
        .map(|(a, b)| {
            Ok(compose_povm(a, b, &family)?
                .with_labels(omega_labels.clone())?)
        })
        .collect()
}
