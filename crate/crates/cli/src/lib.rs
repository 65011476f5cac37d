//! File formats and loaders for the `fgsep` command line tool.
//!
//! Every on-disk object is a single JSON document tagged by `kind`.  Complex
//! numbers are `[re, im]` pairs; matrices are row-major arrays of such pairs.
//! Loading always round-trips through the validated constructors of the core
//! crate, so a file that loads is a file whose invariants hold.

use fgsep::bounds::{best_bound, mum_bound, overlap_sum_bound, qutrit_three_bound, BoundValue};
use fgsep::composer::{make_partition, PartitionFamily};
use fgsep::linalg::{hermitian_eigensystem, ComplexMatrix};
use fgsep::measurements::{MubSet, MumSet, Povm};
use fgsep::states::{pure_state, DensityMatrix, Ket};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

/// Tolerance used when reporting validation residuals (matches the core
/// constructors).
pub const REPORT_TOL: f64 = 1e-10;

#[derive(Debug)]
pub enum CliError {
    /// Malformed invocation, unreadable or unparsable input, wrong file
    /// kind for the command, incompatible dimensions.  Exit code 2.
    Usage(String),
    /// A file parsed but its invariants do not hold.  Exit code 1.
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 1,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Validation(m) => write!(f, "invalid: {m}"),
        }
    }
}

pub type Pair = (f64, f64);
pub type Rows = Vec<Vec<Pair>>;

fn to_pair(z: Complex64) -> Pair {
    (z.re, z.im)
}

fn from_pair(p: Pair) -> Complex64 {
    Complex64::new(p.0, p.1)
}

pub fn matrix_to_rows(m: &ComplexMatrix) -> Rows {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| to_pair(m[(i, j)])).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &Rows) -> Result<ComplexMatrix, CliError> {
    let converted = rows
        .iter()
        .map(|r| r.iter().map(|&p| from_pair(p)).collect())
        .collect();
    ComplexMatrix::from_rows(converted).map_err(|e| CliError::validation(e.to_string()))
}

pub fn ket_to_pairs(k: &Ket) -> Vec<Pair> {
    k.amplitudes().iter().map(|&z| to_pair(z)).collect()
}

pub fn pairs_to_ket(amps: &[Pair]) -> Result<Ket, CliError> {
    Ket::new(amps.iter().map(|&p| from_pair(p)).collect())
        .map_err(|e| CliError::validation(e.to_string()))
}

/// Serialized form of one POVM (dimension comes from the enclosing file).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmData {
    pub name: String,
    pub labels: Vec<String>,
    pub elements: Vec<Rows>,
}

impl PovmData {
    pub fn from_povm(p: &Povm) -> Self {
        PovmData {
            name: p.name().to_string(),
            labels: p.labels().to_vec(),
            elements: p.elements().iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn to_povm(&self, dim: usize) -> Result<Povm, CliError> {
        let elements = self
            .elements
            .iter()
            .map(rows_to_matrix)
            .collect::<Result<Vec<_>, _>>()?;
        let povm = Povm::new(dim, elements, Some(self.labels.clone()))
            .map_err(|e| CliError::validation(e.to_string()))?;
        Ok(povm.with_name(self.name.clone()))
    }
}

/// One JSON document: a state, a ket, a measurement, a basis set, a smoothed
/// measurement set, or a partition family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatrixFile {
    State {
        dims: (usize, usize),
        matrix: Rows,
    },
    Ket {
        dims: (usize, usize),
        amplitudes: Vec<Pair>,
    },
    Povm {
        dim: usize,
        #[serde(flatten)]
        data: PovmData,
    },
    Mubset {
        dim: usize,
        bases: Vec<Vec<Vec<Pair>>>,
    },
    Mumset {
        dim: usize,
        kappa: f64,
        povms: Vec<PovmData>,
    },
    Partition {
        shape: (usize, usize),
        subsets: Vec<Vec<(usize, usize)>>,
        compliant: bool,
    },
}

impl MatrixFile {
    pub fn kind(&self) -> &'static str {
        match self {
            MatrixFile::State { .. } => "state",
            MatrixFile::Ket { .. } => "ket",
            MatrixFile::Povm { .. } => "povm",
            MatrixFile::Mubset { .. } => "mubset",
            MatrixFile::Mumset { .. } => "mumset",
            MatrixFile::Partition { .. } => "partition",
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("cannot parse {}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = self.to_json()?;
        std::fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::usage(format!("cannot serialize: {e}")))?;
        text.push('\n');
        Ok(text)
    }

    // --- constructors from core types ---------------------------------------

    pub fn from_density(state: &DensityMatrix) -> Self {
        MatrixFile::State {
            dims: state.dims(),
            matrix: matrix_to_rows(state.matrix()),
        }
    }

    pub fn from_ket(k: &Ket, dims: (usize, usize)) -> Self {
        MatrixFile::Ket {
            dims,
            amplitudes: ket_to_pairs(k),
        }
    }

    pub fn from_povm(p: &Povm) -> Self {
        MatrixFile::Povm {
            dim: p.dim(),
            data: PovmData::from_povm(p),
        }
    }

    pub fn from_mubset(set: &MubSet) -> Self {
        MatrixFile::Mubset {
            dim: set.dim(),
            bases: set
                .bases()
                .iter()
                .map(|basis| basis.iter().map(ket_to_pairs).collect())
                .collect(),
        }
    }

    pub fn from_mumset(set: &MumSet) -> Self {
        MatrixFile::Mumset {
            dim: set.dim(),
            kappa: set.kappa(),
            povms: set.povms().iter().map(PovmData::from_povm).collect(),
        }
    }

    pub fn from_partition(family: &PartitionFamily) -> Self {
        MatrixFile::Partition {
            shape: family.shape(),
            subsets: family.subsets().to_vec(),
            compliant: family.compliant(),
        }
    }

    // --- conversions to validated core types --------------------------------

    /// A density matrix, accepting both `state` files and `ket` files
    /// (kets become pure states).
    pub fn to_density(&self) -> Result<DensityMatrix, CliError> {
        match self {
            MatrixFile::State { dims, matrix } => {
                let m = rows_to_matrix(matrix)?;
                DensityMatrix::new(m, *dims).map_err(|e| CliError::validation(e.to_string()))
            }
            MatrixFile::Ket { dims, amplitudes } => {
                let k = pairs_to_ket(amplitudes)?;
                pure_state(&k, *dims).map_err(|e| CliError::validation(e.to_string()))
            }
            other => Err(CliError::usage(format!(
                "expected a state or ket file, found kind \"{}\"",
                other.kind()
            ))),
        }
    }

    pub fn to_povm(&self) -> Result<Povm, CliError> {
        match self {
            MatrixFile::Povm { dim, data } => data.to_povm(*dim),
            other => Err(CliError::usage(format!(
                "expected a povm file, found kind \"{}\"",
                other.kind()
            ))),
        }
    }

    pub fn to_mubset(&self) -> Result<MubSet, CliError> {
        match self {
            MatrixFile::Mubset { dim, bases } => {
                let kets = bases
                    .iter()
                    .map(|basis| basis.iter().map(|a| pairs_to_ket(a)).collect())
                    .collect::<Result<Vec<Vec<_>>, _>>()?;
                MubSet::new(*dim, kets).map_err(|e| CliError::validation(e.to_string()))
            }
            other => Err(CliError::usage(format!(
                "expected a mubset file, found kind \"{}\"",
                other.kind()
            ))),
        }
    }

    pub fn to_mumset(&self) -> Result<MumSet, CliError> {
        match self {
            MatrixFile::Mumset { dim, kappa, povms } => {
                let povms = povms
                    .iter()
                    .map(|p| p.to_povm(*dim))
                    .collect::<Result<Vec<_>, _>>()?;
                MumSet::new(*dim, *kappa, povms).map_err(|e| CliError::validation(e.to_string()))
            }
            other => Err(CliError::usage(format!(
                "expected a mumset file, found kind \"{}\"",
                other.kind()
            ))),
        }
    }

    pub fn to_partition(&self) -> Result<PartitionFamily, CliError> {
        match self {
            MatrixFile::Partition {
                shape,
                subsets,
                compliant,
            } => {
                let family = make_partition(*shape, subsets.clone(), false)
                    .map_err(|e| CliError::validation(e.to_string()))?;
                if family.compliant() != *compliant {
                    return Err(CliError::validation(format!(
                        "stored compliance flag {} does not match the subsets (actual {})",
                        compliant,
                        family.compliant()
                    )));
                }
                Ok(family)
            }
            other => Err(CliError::usage(format!(
                "expected a partition file, found kind \"{}\"",
                other.kind()
            ))),
        }
    }
}

/// Outcome of `validate`: one line per checked invariant plus a verdict.
pub struct ValidationOutcome {
    pub ok: bool,
    pub lines: Vec<String>,
}

fn density_report(dims: (usize, usize), matrix: &Rows) -> Result<ValidationOutcome, CliError> {
    let m = rows_to_matrix(matrix)?;
    let mut lines = Vec::new();
    let mut ok = true;
    if m.dim() != dims.0 * dims.1 {
        lines.push(format!(
            "dimension: matrix is {}×{} but dims are {}×{}",
            m.dim(),
            m.dim(),
            dims.0,
            dims.1
        ));
        return Ok(ValidationOutcome { ok: false, lines });
    }
    let herm = m.hermiticity_residual();
    lines.push(format!("hermiticity residual: {herm:.3e}"));
    ok &= herm <= REPORT_TOL;
    let trace = m.trace();
    let trace_dev = (trace.re - 1.0).abs().max(trace.im.abs());
    lines.push(format!("trace deviation: {trace_dev:.3e}"));
    ok &= trace_dev <= REPORT_TOL;
    if herm <= 1e-8 {
        let eig = hermitian_eigensystem(&m, 1e-8)
            .map_err(|e| CliError::validation(e.to_string()))?;
        lines.push(format!("min eigenvalue: {:.3e}", eig.min_eigenvalue()));
        ok &= eig.min_eigenvalue() >= -REPORT_TOL;
    } else {
        ok = false;
    }
    Ok(ValidationOutcome { ok, lines })
}

/// Recompute every invariant of a parsed file and report the residuals.
pub fn validate_file(file: &MatrixFile) -> Result<ValidationOutcome, CliError> {
    match file {
        MatrixFile::State { dims, matrix } => density_report(*dims, matrix),
        MatrixFile::Ket { dims, amplitudes } => {
            let mut lines = Vec::new();
            let mut ok = amplitudes.len() == dims.0 * dims.1;
            if !ok {
                lines.push(format!(
                    "dimension: {} amplitudes but dims are {}×{}",
                    amplitudes.len(),
                    dims.0,
                    dims.1
                ));
            }
            let norm: f64 = amplitudes
                .iter()
                .map(|(re, im)| re * re + im * im)
                .sum::<f64>()
                .sqrt();
            let dev = (norm - 1.0).abs();
            lines.push(format!("norm deviation: {dev:.3e}"));
            ok &= dev <= REPORT_TOL;
            Ok(ValidationOutcome { ok, lines })
        }
        MatrixFile::Povm { dim, data } => {
            let elements = data
                .elements
                .iter()
                .map(rows_to_matrix)
                .collect::<Result<Vec<_>, _>>()?;
            // Build without the validating constructor so a broken POVM
            // still yields a full residual report.
            let mut lines = Vec::new();
            let mut ok = data.labels.len() == elements.len();
            if !ok {
                lines.push(format!(
                    "labels: {} labels for {} elements",
                    data.labels.len(),
                    elements.len()
                ));
            }
            let mut herm = 0.0f64;
            let mut min_eig = f64::INFINITY;
            let mut sum = ComplexMatrix::zeros(*dim);
            for el in &elements {
                if el.dim() != *dim {
                    return Err(CliError::validation(format!(
                        "element is {}×{} but dim is {dim}",
                        el.dim(),
                        el.dim()
                    )));
                }
                herm = herm.max(el.hermiticity_residual());
                if let Ok(eig) = hermitian_eigensystem(el, 1.0) {
                    min_eig = min_eig.min(eig.min_eigenvalue());
                }
                sum = sum.add(el);
            }
            let completeness = sum.max_abs_diff(&ComplexMatrix::identity(*dim));
            lines.push(format!("hermiticity residual: {herm:.3e}"));
            lines.push(format!("min eigenvalue: {min_eig:.3e}"));
            lines.push(format!("completeness residual: {completeness:.3e}"));
            ok &= herm <= REPORT_TOL && min_eig >= -REPORT_TOL && completeness <= REPORT_TOL;
            Ok(ValidationOutcome { ok, lines })
        }
        MatrixFile::Mubset { dim, bases } => {
            let kets = bases
                .iter()
                .map(|basis| basis.iter().map(|a| pairs_to_ket(a)).collect())
                .collect::<Result<Vec<Vec<_>>, _>>()?;
            match MubSet::new(*dim, kets) {
                Ok(set) => {
                    let report = set.certify();
                    Ok(ValidationOutcome {
                        ok: report.ok(),
                        lines: vec![
                            format!(
                                "orthonormality residual: {:.3e}",
                                report.orthonormality_residual
                            ),
                            format!(
                                "unbiasedness residual: {:.3e}",
                                report.unbiasedness_residual
                            ),
                        ],
                    })
                }
                Err(e) => Ok(ValidationOutcome {
                    ok: false,
                    lines: vec![e.to_string()],
                }),
            }
        }
        MatrixFile::Mumset { dim, kappa, povms } => {
            let povms = povms
                .iter()
                .map(|p| p.to_povm(*dim))
                .collect::<Result<Vec<_>, _>>()?;
            match MumSet::new(*dim, *kappa, povms) {
                Ok(set) => {
                    let report = set.certify();
                    Ok(ValidationOutcome {
                        ok: report.ok(),
                        lines: vec![
                            format!("element trace residual: {:.3e}", report.trace_residual),
                            format!("cross trace residual: {:.3e}", report.cross_residual),
                            format!(
                                "efficiency residual vs κ = {}: {:.3e}",
                                report.kappa, report.efficiency_residual
                            ),
                        ],
                    })
                }
                Err(e) => Ok(ValidationOutcome {
                    ok: false,
                    lines: vec![e.to_string()],
                }),
            }
        }
        MatrixFile::Partition {
            shape,
            subsets,
            compliant,
        } => match make_partition(*shape, subsets.clone(), false) {
            Ok(family) => {
                let flag_ok = family.compliant() == *compliant;
                Ok(ValidationOutcome {
                    ok: flag_ok,
                    lines: vec![
                        format!("partitions the {}×{} grid: yes", shape.0, shape.1),
                        format!(
                            "row/column compliant: {} (stored flag: {compliant})",
                            family.compliant()
                        ),
                    ],
                })
            }
            Err(e) => Ok(ValidationOutcome {
                ok: false,
                lines: vec![e.to_string()],
            }),
        },
    }
}

/// Parse a `--bound` token against a measurement suite and state dimensions.
///
/// Tokens: `auto` (smallest closed-form formula), `mub`, `pairwise`,
/// `qutrit3` (three aligned two-qutrit measurements only), `mum:<kappa>`,
/// `generic` (operator-norm overlap bound computed from the measurements).
pub fn resolve_bound(
    token: &str,
    suite: &[Povm],
    dims: (usize, usize),
) -> Result<BoundValue, CliError> {
    let n = suite.len();
    let (da, db) = dims;
    let need_square = |what: &str| -> Result<usize, CliError> {
        if da == db {
            Ok(da)
        } else {
            Err(CliError::usage(format!(
                "bound \"{what}\" needs equal local dimensions, got {da}×{db}"
            )))
        }
    };
    match token {
        "auto" => {
            let d = need_square("auto")?;
            best_bound(n, d, None, false).map_err(|e| CliError::usage(e.to_string()))
        }
        "mub" => {
            let d = need_square("mub")?;
            fgsep::bounds::mub_bound(n, d).map_err(|e| CliError::usage(e.to_string()))
        }
        "pairwise" => {
            let d = need_square("pairwise")?;
            fgsep::bounds::pairwise_mub_bound(n, d).map_err(|e| CliError::usage(e.to_string()))
        }
        "qutrit3" => {
            if n != 3 || dims != (3, 3) {
                return Err(CliError::usage(format!(
                    "bound \"qutrit3\" needs exactly 3 measurements on a 3×3 system, \
                     got {n} on {da}×{db}"
                )));
            }
            Ok(qutrit_three_bound())
        }
        "generic" => {
            let selection: Vec<usize> = (0..n).collect();
            overlap_sum_bound(suite, &selection).map_err(|e| CliError::usage(e.to_string()))
        }
        other => {
            if let Some(kappa_text) = other.strip_prefix("mum:") {
                let kappa: f64 = kappa_text.parse().map_err(|_| {
                    CliError::usage(format!("cannot parse efficiency in \"{other}\""))
                })?;
                let d = need_square("mum")?;
                mum_bound(n, d, kappa).map_err(|e| CliError::usage(e.to_string()))
            } else {
                Err(CliError::usage(format!(
                    "unknown bound \"{other}\" (expected auto, mub, pairwise, qutrit3, \
                     mum:<kappa>, or generic)"
                )))
            }
        }
    }
}
