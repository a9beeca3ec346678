//! Model and configuration file I/O.
//!
//! Two text formats live here: the statechart-XML subset that carries
//! [`BehaviorModel`]s between tools (see `docs/model-format.md`) and the flat
//! swarm composition config (see `docs/swarm-config.md`). Parsing is strict —
//! unknown elements, attributes, or keys are errors, not warnings — so that a
//! typo in a model file fails loudly instead of silently dropping a
//! transition.

mod config;
mod scxml;

pub use config::{
    parse_swarm_config, ConfigError, CpsType, SwarmComposition, SwarmEntry, CONFIG_VERSION,
};
pub use scxml::{parse_model, serialize_model, BEHAVIOR_NS, FORMAT_VERSION};

use crate::fsm::{BehaviorModel, ValidationError};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelIoError {
    /// The text is not well-formed XML.
    #[error("xml parse error at line {line}, column {col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    /// Well-formed XML that does not fit the model schema.
    #[error("schema error: {message}")]
    Schema { message: String },
    /// Schema-conforming document describing an inconsistent model.
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("cannot read {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

/// A parsed model plus where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub model: BehaviorModel,
    pub source: Option<PathBuf>,
    pub version: String,
}

pub fn load_model_file(path: &Path) -> Result<ModelDocument, ModelIoError> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelIoError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let model = parse_model(&text)?;
    Ok(ModelDocument {
        model,
        source: Some(path.to_path_buf()),
        version: FORMAT_VERSION.to_string(),
    })
}
