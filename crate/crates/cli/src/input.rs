//! Transition files.
//!
//! A transition file is TOML with an explicit `schema_version`. It carries
//! either the molecular description
//!
//! ```toml
//! schema_version = "1"
//! n_modes = 2
//! omega_initial = [1000.0, 1400.0]   # cm^-1
//! omega_final = [1600.0, 900.0]      # cm^-1
//! duschinsky = [[0.8, -0.6], [0.6, 0.8]]   # rows, or a flat row-major list
//! displacement = [0.6, -0.9]         # dimensionless
//! ```
//!
//! (with `[displacement_raw] values = [...], conversion = c` standing in for
//! `displacement`, giving `δ_i = c · sqrt(ω'_i) · d_i`), or a precomputed
//! Bogoliubov description
//!
//! ```toml
//! schema_version = "1"
//! n_modes = 2
//! omega_final = [1600.0, 900.0]      # only used to place lines
//! [precomputed]
//! j_matrix = [[1.2, 0.1], [-0.3, 0.9]]
//! delta = [0.6, -0.9]
//! ```
//!
//! An optional `[metadata]` table names the molecule and states.

use std::path::{Path, PathBuf};

use fcf_core::{build_doktorov, DoktorovParameters, VibronicTransition};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MatrixField {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDisplacement {
    values: Vec<f64>,
    conversion: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Precomputed {
    j_matrix: MatrixField,
    delta: Vec<f64>,
}

/// Descriptive fields carried through to reports.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub molecule: Option<String>,
    pub initial_state: Option<String>,
    pub final_state: Option<String>,
    /// Set on fixtures whose numbers are stand-ins for literature data.
    #[serde(default)]
    pub placeholder: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionFile {
    schema_version: String,
    n_modes: usize,
    omega_initial: Option<Vec<f64>>,
    omega_final: Option<Vec<f64>>,
    duschinsky: Option<MatrixField>,
    displacement: Option<Vec<f64>>,
    displacement_raw: Option<RawDisplacement>,
    precomputed: Option<Precomputed>,
    #[serde(default)]
    metadata: Metadata,
}

/// Where the Bogoliubov parameters come from.
#[derive(Debug, Clone, PartialEq)]
pub enum TransitionSource {
    Molecular(VibronicTransition),
    Precomputed(DoktorovParameters),
}

/// A validated transition file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTransition {
    pub source: TransitionSource,
    /// Final-state frequencies used to place lines (cm⁻¹).
    pub omega_final: Vec<f64>,
    pub metadata: Metadata,
}

impl ParsedTransition {
    pub fn n_modes(&self) -> usize {
        self.omega_final.len()
    }

    pub fn doktorov(&self) -> Result<DoktorovParameters> {
        match &self.source {
            TransitionSource::Molecular(t) => build_doktorov(t).map_err(validation_error),
            TransitionSource::Precomputed(p) => Ok(p.clone()),
        }
    }
}

/// Reads and validates a transition file.
pub fn parse_transition(path: impl AsRef<Path>) -> Result<ParsedTransition> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_transition_str(&text, path)
}

/// Parses transition text; `origin` only labels errors.
pub fn parse_transition_str(text: &str, origin: &Path) -> Result<ParsedTransition> {
    let file: TransitionFile = toml::from_str(text).map_err(|e| CliError::Parse {
        path: origin.to_path_buf(),
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    validate(file, origin)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn validate(file: TransitionFile, origin: &Path) -> Result<ParsedTransition> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::Parse {
            path: origin.to_path_buf(),
            line: None,
            message: format!(
                "unsupported schema_version {:?} (expected {SCHEMA_VERSION:?})",
                file.schema_version
            ),
        });
    }
    let n = file.n_modes;
    if n == 0 {
        return Err(CliError::validation("n_modes", "must be positive"));
    }
    let omega_final = file
        .omega_final
        .ok_or_else(|| CliError::validation("omega_final", "missing"))?;
    check_len("omega_final", &omega_final, n)?;

    let molecular_fields = file.omega_initial.is_some()
        || file.duschinsky.is_some()
        || file.displacement.is_some()
        || file.displacement_raw.is_some();

    let source = match (file.precomputed, molecular_fields) {
        (Some(_), true) => {
            return Err(CliError::validation(
                "precomputed",
                "give either the molecular fields or [precomputed], not both",
            ))
        }
        (Some(pre), false) => {
            let j = matrix("precomputed.j_matrix", pre.j_matrix, n)?;
            check_len("precomputed.delta", &pre.delta, n)?;
            for (i, w) in omega_final.iter().enumerate() {
                if !(w.is_finite() && *w > 0.0) {
                    return Err(CliError::validation(
                        "omega_final",
                        format!("frequency {w} of mode {} must be finite and positive", i + 1),
                    ));
                }
            }
            let params = DoktorovParameters::from_j(j, DVector::from_vec(pre.delta))
                .map_err(validation_error)?;
            TransitionSource::Precomputed(params)
        }
        (None, _) => {
            let omega_initial = file
                .omega_initial
                .ok_or_else(|| CliError::validation("omega_initial", "missing"))?;
            check_len("omega_initial", &omega_initial, n)?;
            let u = matrix(
                "duschinsky",
                file.duschinsky
                    .ok_or_else(|| CliError::validation("duschinsky", "missing"))?,
                n,
            )?;
            let delta = match (file.displacement, file.displacement_raw) {
                (Some(_), Some(_)) => {
                    return Err(CliError::validation(
                        "displacement",
                        "give either displacement or [displacement_raw], not both",
                    ))
                }
                (None, None) => return Err(CliError::validation("displacement", "missing")),
                (Some(d), None) => {
                    check_len("displacement", &d, n)?;
                    d
                }
                (None, Some(raw)) => {
                    check_len("displacement_raw.values", &raw.values, n)?;
                    if !raw.conversion.is_finite() {
                        return Err(CliError::validation(
                            "displacement_raw.conversion",
                            "must be finite",
                        ));
                    }
                    raw.values
                        .iter()
                        .zip(&omega_final)
                        .map(|(d, w)| raw.conversion * w.abs().sqrt() * d)
                        .collect()
                }
            };
            let t = VibronicTransition::new(omega_initial, omega_final.clone(), u, DVector::from_vec(delta))
                .map_err(validation_error)?;
            TransitionSource::Molecular(t)
        }
    };

    Ok(ParsedTransition {
        source,
        omega_final,
        metadata: file.metadata,
    })
}

fn check_len(field: &str, values: &[f64], n: usize) -> Result<()> {
    if values.len() != n {
        return Err(CliError::validation(
            field,
            format!("has {} entries, n_modes is {n}", values.len()),
        ));
    }
    Ok(())
}

fn matrix(field: &str, m: MatrixField, n: usize) -> Result<DMatrix<f64>> {
    match m {
        MatrixField::Flat(values) => {
            if values.len() != n * n {
                return Err(CliError::validation(
                    field,
                    format!("flat matrix has {} entries, expected {}", values.len(), n * n),
                ));
            }
            Ok(DMatrix::from_row_slice(n, n, &values))
        }
        MatrixField::Rows(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(CliError::validation(field, format!("must be {n}x{n}")));
            }
            Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
        }
    }
}

fn validation_error(e: fcf_core::Error) -> CliError {
    use fcf_core::Error as E;
    let field = match &e {
        E::NotOrthogonal { .. } => {
            return CliError::validation("duschinsky", format!("duschinsky not orthogonal ({e})"))
        }
        E::SingularJ { .. } => "j_matrix",
        E::InvalidFrequency { .. } => "omega",
        E::NonFinite(what) => what,
        E::DimensionMismatch { what, .. } => what,
        _ => "transition",
    };
    CliError::validation(field, e.to_string())
}

/// Path helper for fixtures shipped with the crate.
pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}
