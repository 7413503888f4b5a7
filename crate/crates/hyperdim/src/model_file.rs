//! JSON model files.
//!
//! ```json
//! {
//!   "space": {"dim": 2, "geometry": "cube"},
//!   "kind": "diffeo",
//!   "branches": [
//!     {"symbol": 0, "domain": {"lo": [0, 0], "hi": [0.333, 1]},
//!      "linear": [[3, 0], [0, 0.25]], "offset": [0, 0]}
//!   ],
//!   "transition": [[1, 1], [1, 1]],
//!   "unstable_dim": 1
//! }
//! ```

use std::path::Path;

use hyperdim_core::linalg::Matrix;
use hyperdim_core::models::{AffineBranch, AmbientSpace, Geometry, ModelKind, ModelSystem, Rect};
use hyperdim_core::symbolic::TransitionMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("cannot read model file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid model: {0}")]
    Core(#[from] hyperdim_core::Error),
    #[error("invalid model: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDto {
    pub dim: usize,
    pub geometry: Geometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDto {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchDto {
    pub symbol: usize,
    pub domain: DomainDto,
    pub linear: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub space: SpaceDto,
    pub kind: ModelKind,
    pub branches: Vec<BranchDto>,
    pub transition: Vec<Vec<u8>>,
    pub unstable_dim: usize,
}

impl ModelDto {
    pub fn from_model(m: &ModelSystem) -> Self {
        Self {
            name: Some(m.name.clone()),
            space: SpaceDto { dim: m.space.dim, geometry: m.space.geometry },
            kind: m.kind,
            branches: m
                .branches
                .iter()
                .map(|b| BranchDto {
                    symbol: b.symbol,
                    domain: DomainDto { lo: b.domain.lo.clone(), hi: b.domain.hi.clone() },
                    linear: b.linear.rows(),
                    offset: b.offset.clone(),
                })
                .collect(),
            transition: m.transition.rows(),
            unstable_dim: m.unstable_dim,
        }
    }

    pub fn into_model(self) -> Result<ModelSystem, ModelFileError> {
        let space = AmbientSpace::new(self.space.dim, self.space.geometry)?;
        let mut branches = Vec::with_capacity(self.branches.len());
        for b in self.branches {
            let linear = Matrix::from_rows(&b.linear)
                .ok_or_else(|| ModelFileError::Shape(format!("branch {}: linear part is not square", b.symbol)))?;
            branches.push(AffineBranch {
                symbol: b.symbol,
                domain: Rect::new(b.domain.lo, b.domain.hi),
                linear,
                offset: b.offset,
            });
        }
        let transition = TransitionMatrix::from_rows(&self.transition)?;
        let name = self.name.unwrap_or_else(|| "file".to_string());
        Ok(ModelSystem::new(name, space, self.kind, branches, self.unstable_dim, transition)?)
    }
}

pub fn parse_model_json(text: &str) -> Result<ModelSystem, ModelFileError> {
    serde_json::from_str::<ModelDto>(text)?.into_model()
}

pub fn load_model(path: &Path) -> Result<ModelSystem, ModelFileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ModelFileError::Io { path: path.display().to_string(), source })?;
    parse_model_json(&text)
}
