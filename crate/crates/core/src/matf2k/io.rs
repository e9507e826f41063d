//! Operator matrix files.
//!
//! ```json
//! { "level": 59, "ambient_dim": 4,
//!   "operators": [ { "ell": 3, "k": 1, "kind": "T", "field_degree": 1, "rows": [[1,0],[0,1]] } ] }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MatError, MatF2k, OpKind, OperatorLabel};
use crate::gf2k::BinaryField;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct OperatorEntry {
    pub ell: u32,
    pub k: u32,
    pub kind: OpKind,
    pub field_degree: u32,
    pub rows: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct OperatorFile {
    pub level: u64,
    pub ambient_dim: usize,
    pub operators: Vec<OperatorEntry>,
}

impl OperatorEntry {
    pub fn label(&self) -> OperatorLabel {
        OperatorLabel {
            ell: self.ell,
            k: self.k,
            kind: self.kind,
        }
    }

    pub fn matrix(&self, ambient_dim: usize) -> Result<MatF2k, MatError> {
        let field = BinaryField::new(self.field_degree)?;
        let m = MatF2k::from_values(field, &self.rows)?;
        if m.rows() != ambient_dim || m.cols() != ambient_dim {
            return Err(MatError::DimensionMismatch(format!(
                "{} is {}x{}, ambient dimension is {}",
                self.label(),
                m.rows(),
                m.cols(),
                ambient_dim
            )));
        }
        Ok(m)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Matrix(#[from] MatError),
}

/// Parse an operator file into labelled matrices.
pub fn load_operators(path: &Path) -> Result<(OperatorFile, Vec<(OperatorLabel, MatF2k)>), LoadError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: display.clone(),
        source,
    })?;
    let file: OperatorFile = serde_json::from_str(&text).map_err(|source| LoadError::Json {
        path: display,
        source,
    })?;
    let mats = file
        .operators
        .iter()
        .map(|op| Ok((op.label(), op.matrix(file.ambient_dim)?)))
        .collect::<Result<Vec<_>, MatError>>()?;
    Ok((file, mats))
}
