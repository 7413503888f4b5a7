//! `--model name:params` grammar.
//!
//! ```text
//! horseshoe[:lambda_u[,lambda_s]]   default 3,0.25
//! doubling[:d]                      default 2
//! cantor[:slope,digits]             default 3,02 (digits kept, one char each)
//! catmap
//! golden
//! ```

use hyperdim_core::models::{
    build_cantor_repeller, build_cat_map, build_doubling_map, build_golden_mean_map, build_linear_horseshoe,
    ModelSystem,
};
use thiserror::Error;

/// Default contraction for horseshoes built from the grammar or a target dimension.
pub const DEFAULT_LAMBDA_S: f64 = 0.25;

#[derive(Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("unknown model `{0}` (expected horseshoe, doubling, cantor, catmap or golden)")]
    UnknownModel(String),
    #[error("bad parameters for `{model}`: {reason}")]
    BadParams { model: String, reason: String },
    #[error(transparent)]
    Core(#[from] hyperdim_core::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Horseshoe { lambda_u: f64, lambda_s: f64 },
    Doubling { d: usize },
    Cantor { slope: usize, kept: Vec<usize> },
    CatMap,
    Golden,
}

impl ModelSpec {
    pub fn parse(s: &str) -> Result<Self, SpecError> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let bad = |reason: &str| SpecError::BadParams { model: name.to_string(), reason: reason.to_string() };
        let floats = |p: &str| -> Result<Vec<f64>, SpecError> {
            p.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad(&format!("`{t}` is not a number")))).collect()
        };
        match name {
            "horseshoe" => {
                let v = params.map(floats).transpose()?.unwrap_or_else(|| vec![3.0]);
                match v.as_slice() {
                    [lu] => Ok(Self::Horseshoe { lambda_u: *lu, lambda_s: DEFAULT_LAMBDA_S }),
                    [lu, ls] => Ok(Self::Horseshoe { lambda_u: *lu, lambda_s: *ls }),
                    _ => Err(bad("expected lambda_u[,lambda_s]")),
                }
            }
            "doubling" => {
                let d = match params {
                    None => 2,
                    Some(p) => p.parse().map_err(|_| bad("expected an integer d >= 2"))?,
                };
                Ok(Self::Doubling { d })
            }
            "cantor" => {
                let Some(p) = params else {
                    return Ok(Self::Cantor { slope: 3, kept: vec![0, 2] });
                };
                let (slope, digits) = p.split_once(',').ok_or_else(|| bad("expected slope,digits"))?;
                let slope: usize = slope.trim().parse().map_err(|_| bad("slope must be an integer"))?;
                let kept = digits
                    .trim()
                    .chars()
                    .map(|c| c.to_digit(36).map(|d| d as usize).ok_or_else(|| bad("digits must be 0-9 or a-z")))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Self::Cantor { slope, kept })
            }
            "catmap" if params.is_none() => Ok(Self::CatMap),
            "golden" if params.is_none() => Ok(Self::Golden),
            "catmap" | "golden" => Err(bad("takes no parameters")),
            other => Err(SpecError::UnknownModel(other.to_string())),
        }
    }

    pub fn build(&self) -> Result<ModelSystem, SpecError> {
        Ok(match self {
            Self::Horseshoe { lambda_u, lambda_s } => build_linear_horseshoe(*lambda_u, *lambda_s)?,
            Self::Doubling { d } => build_doubling_map(*d)?,
            Self::Cantor { slope, kept } => build_cantor_repeller(*slope, kept)?,
            Self::CatMap => build_cat_map()?,
            Self::Golden => build_golden_mean_map()?,
        })
    }
}

pub fn parse_model(s: &str) -> Result<ModelSystem, SpecError> {
    ModelSpec::parse(s)?.build()
}
