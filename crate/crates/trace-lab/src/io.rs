//! Operator files and row-oriented output.
//!
//! Operator files are JSON documents carrying a singular value function as
//! decimal strings (log-knots and log-magnitudes, so double-exponential
//! scales survive the trip), an optional finite spectrum, and an optional
//! generator description. When a generator names a catalog entry the reader
//! re-expands it, which restores the parts a flat piece list cannot carry:
//! analytic envelopes, truncation depth, and exact lattice backing.
//!
//! CSV output is UTF-8 with LF line endings, one header row, and 17
//! significant digits on every numeric column.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::gallery::{self, GalleryError};
use crate::logreal::LogReal;
use crate::stepfn::{
    Eigenvalue, GeneratorSpec, ModelDepth, OperatorModel, SpectrumModel, StepFnError, StepFunction,
};

/// Largest piece count written to or accepted from an operator file.
pub const MAX_FILE_PIECES: usize = 100_000;

/// Generator name marking a file as self-contained: the reader must use the
/// stored pieces instead of re-expanding a catalog entry.
pub const CUSTOM_GENERATOR: &str = "custom-file";

/// Errors from operator files and row output. Model shape violations keep
/// their own variant because the command line reports them separately from
/// plain file damage.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot access {path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed operator file {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("bad value in operator file: {0}")]
    Value(String),
    #[error("model violates step function shape: {0}")]
    Model(#[from] StepFnError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error("model has {0} pieces, over the file limit {MAX_FILE_PIECES}")]
    TooLarge(usize),
}

/// Root document of an operator file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub label: String,
    pub mu: MuFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<EigenvalueFile>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorFile>,
}

/// Step function section: parallel decimal-string arrays plus a tail value.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuFile {
    pub knots_log: Vec<String>,
    pub values_logmag: Vec<String>,
    pub tail: String,
}

/// One spectrum entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenvalueFile {
    pub re: f64,
    pub im: f64,
    pub mult: u32,
}

/// Generator description, mirroring [`GeneratorSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorFile {
    pub name: String,
    pub params: BTreeMap<String, serde_json::Value>,
}

impl From<&GeneratorSpec> for GeneratorFile {
    fn from(spec: &GeneratorSpec) -> GeneratorFile {
        GeneratorFile {
            name: spec.name.clone(),
            params: spec.params.clone(),
        }
    }
}

impl From<&GeneratorFile> for GeneratorSpec {
    fn from(file: &GeneratorFile) -> GeneratorSpec {
        GeneratorSpec {
            name: file.name.clone(),
            params: file.params.clone(),
        }
    }
}

/// Flattens a model into its file form. The piece list is materialized, so
/// oversized lattices are refused rather than written.
pub fn model_to_file(model: &OperatorModel) -> Result<OperatorFile, IoError> {
    let n = model.mu.len();
    if n > MAX_FILE_PIECES {
        return Err(IoError::TooLarge(n));
    }
    let knots_log = (0..n).map(|i| model.mu.knot(i).to_decimal_string()).collect();
    let values_logmag = (0..n).map(|i| model.mu.value(i).to_text()).collect();
    let spectrum = model.spectrum.as_ref().map(|s| {
        s.eigenvalues
            .iter()
            .map(|e| EigenvalueFile {
                re: e.re,
                im: e.im,
                mult: e.mult,
            })
            .collect()
    });
    Ok(OperatorFile {
        label: model.label.clone(),
        mu: MuFile {
            knots_log,
            values_logmag,
            tail: model.mu.tail().to_text(),
        },
        spectrum,
        generator: model.generator.as_ref().map(GeneratorFile::from),
    })
}

/// Serializes a model to pretty JSON at `path`.
pub fn write_operator_file(path: &Path, model: &OperatorModel) -> Result<(), IoError> {
    let file = model_to_file(model)?;
    let mut text = serde_json::to_string_pretty(&file).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads an operator model from a file. Catalog generators are re-expanded;
/// self-contained files rebuild the step function from the stored pieces.
pub fn read_operator_file(path: &Path) -> Result<Arc<OperatorModel>, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })?;
    let file: OperatorFile = serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    if let Some(g) = &file.generator {
        if g.name != CUSTOM_GENERATOR {
            return Ok(gallery::expand(&GeneratorSpec::from(g))?);
        }
    }
    if file.mu.knots_log.len() > MAX_FILE_PIECES {
        return Err(IoError::TooLarge(file.mu.knots_log.len()));
    }
    let knots = file
        .mu
        .knots_log
        .iter()
        .map(|s| Dd::parse(s).map_err(|e| IoError::Value(format!("knot {s:?}: {e}"))))
        .collect::<Result<Vec<Dd>, IoError>>()?;
    let values = file
        .mu
        .values_logmag
        .iter()
        .map(|s| LogReal::parse_text(s).map_err(IoError::Value))
        .collect::<Result<Vec<LogReal>, IoError>>()?;
    let tail = LogReal::parse_text(&file.mu.tail).map_err(IoError::Value)?;
    let mu = StepFunction::from_pieces(knots, values, tail)?;
    let spectrum = match &file.spectrum {
        None => None,
        Some(entries) => {
            let mut eigenvalues = Vec::with_capacity(entries.len());
            for (i, e) in entries.iter().enumerate() {
                if !e.re.is_finite() || !e.im.is_finite() {
                    return Err(IoError::Value(format!("eigenvalue {i} is not finite")));
                }
                if e.mult == 0 {
                    return Err(IoError::Value(format!("eigenvalue {i} has multiplicity 0")));
                }
                eigenvalues.push(Eigenvalue {
                    re: e.re,
                    im: e.im,
                    mult: e.mult,
                });
            }
            Some(SpectrumModel::new(eigenvalues))
        }
    };
    Ok(Arc::new(OperatorModel {
        label: file.label,
        mu,
        envelope: None,
        spectrum,
        depth: ModelDepth::Exact,
        generator: file.generator.as_ref().map(GeneratorSpec::from),
    }))
}

/// Header row shared by every CSV the command line writes.
pub const CSV_HEADER: &str = "coord_name,coord_value,value,value_logmag,provenance";

/// Formats one CSV row. Numeric columns carry 17 significant digits; the
/// log-magnitude column carries the full 34-digit text form so values that
/// underflow `f64` stay recoverable.
pub fn csv_row(coord_name: &str, coord_value: f64, value: LogReal, provenance: &str) -> String {
    format!(
        "{},{:.16e},{:.16e},{},{}",
        coord_name,
        coord_value,
        value.to_f64(),
        value.to_text(),
        csv_field(provenance)
    )
}

/// Quotes a CSV field only when it needs it.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
