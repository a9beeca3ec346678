//! Swarm composition files: which CPS types fly, how many of each, which
//! behavior model each runs, plus per-type parameter overrides.
//!
//! The format is a flat key-value text. Entries are separated by newlines or
//! `;`, `#` starts a comment, and each entry reads
//! `kind: count=N model=FILE [key=value]...`. A `version=1` line may come
//! first; when absent version 1 is assumed, any other version is rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{parse_model, ModelIoError};
use crate::fsm::event::is_valid_ident;
use crate::fsm::{BehaviorModel, Value};

/// Accepted value of the `version=` directive.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CpsType {
    Uav,
    Ugv,
}

impl CpsType {
    pub fn as_str(self) -> &'static str {
        match self {
            CpsType::Uav => "uav",
            CpsType::Ugv => "ugv",
        }
    }

    pub fn parse(s: &str) -> Option<CpsType> {
        match s {
            "uav" => Some(CpsType::Uav),
            "ugv" => Some(CpsType::Ugv),
            _ => None,
        }
    }
}

/// One config entry: `count` machines of `cps_type`, each running `model`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmEntry {
    pub cps_type: CpsType,
    pub count: usize,
    /// Path as written in the file, relative to the config's directory.
    pub model_path: PathBuf,
    pub model: BehaviorModel,
    pub parameters: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmComposition {
    pub version: u32,
    pub entries: Vec<SwarmEntry>,
}

impl SwarmComposition {
    pub fn entry(&self, t: CpsType) -> Option<&SwarmEntry> {
        self.entries.iter().find(|e| e.cps_type == t)
    }

    pub fn count(&self, t: CpsType) -> usize {
        self.entry(t).map_or(0, |e| e.count)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("model {}: {source}", path.display())]
    Model {
        path: PathBuf,
        #[source]
        source: ModelIoError,
    },
    #[error("cannot read {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

fn syntax(line: usize, message: impl std::fmt::Display) -> ConfigError {
    ConfigError::Syntax {
        line,
        message: message.to_string(),
    }
}

/// Parses a composition. Model files are resolved against `base_dir`
/// (normally the directory containing the config file) and must exist and
/// parse — a composition that refers to a broken model is itself broken.
pub fn parse_swarm_config(text: &str, base_dir: &Path) -> Result<SwarmComposition, ConfigError> {
    let mut version: Option<u32> = None;
    let mut entries: Vec<SwarmEntry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let uncommented = raw.split('#').next().unwrap_or("");
        for seg in uncommented.split(';') {
            let seg = seg.trim();
            if seg.is_empty() {
                continue;
            }
            match seg.split_once(':') {
                Some((kind, rest)) => {
                    entries.push(parse_entry(kind.trim(), rest, line_no, base_dir, &entries)?)
                }
                None => {
                    let (key, value) = seg
                        .split_once('=')
                        .ok_or_else(|| syntax(line_no, format!("expected 'kind: ...' or 'version=N', got {seg:?}")))?;
                    if key.trim() != "version" {
                        return Err(syntax(line_no, format!("unknown directive {:?}", key.trim())));
                    }
                    if version.is_some() {
                        return Err(syntax(line_no, "duplicate version directive"));
                    }
                    if !entries.is_empty() {
                        return Err(syntax(line_no, "version must precede swarm entries"));
                    }
                    let v: u32 = value
                        .trim()
                        .parse()
                        .map_err(|_| syntax(line_no, format!("bad version {:?}", value.trim())))?;
                    if v != CONFIG_VERSION {
                        return Err(syntax(line_no, format!("unsupported config version {v}")));
                    }
                    version = Some(v);
                }
            }
        }
    }
    if entries.is_empty() {
        return Err(syntax(text.lines().count().max(1), "no swarm entries"));
    }
    Ok(SwarmComposition {
        version: version.unwrap_or(CONFIG_VERSION),
        entries,
    })
}

fn parse_entry(
    kind: &str,
    rest: &str,
    line_no: usize,
    base_dir: &Path,
    earlier: &[SwarmEntry],
) -> Result<SwarmEntry, ConfigError> {
    let cps_type = CpsType::parse(kind)
        .ok_or_else(|| syntax(line_no, format!("unknown cps type {kind:?}")))?;
    if earlier.iter().any(|e| e.cps_type == cps_type) {
        return Err(syntax(line_no, format!("duplicate entry for {kind:?}")));
    }
    let mut count: Option<usize> = None;
    let mut model_rel: Option<String> = None;
    let mut parameters: BTreeMap<String, Value> = BTreeMap::new();
    for tok in rest.split_whitespace() {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| syntax(line_no, format!("expected key=value, got {tok:?}")))?;
        match key {
            "count" => {
                if count.is_some() {
                    return Err(syntax(line_no, "duplicate count"));
                }
                count = Some(
                    value
                        .parse()
                        .map_err(|_| syntax(line_no, format!("bad count {value:?}")))?,
                );
            }
            "model" => {
                if model_rel.is_some() {
                    return Err(syntax(line_no, "duplicate model"));
                }
                model_rel = Some(value.to_string());
            }
            _ => {
                if !is_valid_ident(key) {
                    return Err(syntax(line_no, format!("bad parameter name {key:?}")));
                }
                if parameters.contains_key(key) {
                    return Err(syntax(line_no, format!("duplicate parameter {key:?}")));
                }
                let parsed = match value.parse::<i64>() {
                    Ok(i) => Value::Int(i),
                    Err(_) => match value.parse::<f64>() {
                        Ok(r) if r.is_finite() => Value::Real(r),
                        _ => {
                            return Err(syntax(
                                line_no,
                                format!("parameter {key:?} must be numeric, got {value:?}"),
                            ))
                        }
                    },
                };
                parameters.insert(key.to_string(), parsed);
            }
        }
    }
    let count = count.ok_or_else(|| syntax(line_no, format!("{kind}: missing count")))?;
    if count == 0 {
        return Err(syntax(line_no, format!("{kind}: count must be at least 1")));
    }
    let model_rel = model_rel.ok_or_else(|| syntax(line_no, format!("{kind}: missing model")))?;
    let full = base_dir.join(&model_rel);
    let model_text = std::fs::read_to_string(&full).map_err(|e| ConfigError::Io {
        path: full.clone(),
        message: e.to_string(),
    })?;
    let model = parse_model(&model_text).map_err(|e| ConfigError::Model {
        path: full,
        source: e,
    })?;
    Ok(SwarmEntry {
        cps_type,
        count,
        model_path: PathBuf::from(model_rel),
        model,
        parameters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn models_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/models")
    }

    #[test]
    fn single_line_example_parses() {
        let comp = parse_swarm_config(
            "uav: count=1 model=sar_uav.scxml; ugv: count=2 model=rescue_ugv.scxml",
            &models_dir(),
        )
        .unwrap();
        assert_eq!(comp.version, 1);
        assert_eq!(comp.count(CpsType::Uav), 1);
        assert_eq!(comp.count(CpsType::Ugv), 2);
        assert_eq!(comp.entries[0].model.name, "UavProcesses");
        assert_eq!(comp.entries[1].model.name, "UgvProcesses");
    }

    #[test]
    fn multi_line_with_version_comments_and_parameters() {
        let text = "# rescue mission\nversion=1\n\nuav: count=4 model=sar_uav.scxml speed=1.5 localRadius=5\nugv: count=2 model=rescue_ugv.scxml # ground crew\n";
        let comp = parse_swarm_config(text, &models_dir()).unwrap();
        let uav = comp.entry(CpsType::Uav).unwrap();
        assert_eq!(uav.count, 4);
        assert_eq!(uav.parameters["speed"], Value::Real(1.5));
        assert_eq!(uav.parameters["localRadius"], Value::Int(5));
        assert!(comp.entry(CpsType::Ugv).unwrap().parameters.is_empty());
    }

    #[test]
    fn rejects_bad_entries() {
        let dir = models_dir();
        let cases: &[(&str, &str)] = &[
            ("uav: count=0 model=sar_uav.scxml", "at least 1"),
            ("uav: model=sar_uav.scxml", "missing count"),
            ("uav: count=2", "missing model"),
            ("cat: count=1 model=sar_uav.scxml", "unknown cps type"),
            (
                "uav: count=1 model=sar_uav.scxml; uav: count=2 model=sar_uav.scxml",
                "duplicate entry",
            ),
            ("uav: count=1 model=sar_uav.scxml name=x", "must be numeric"),
            ("version=2\nuav: count=1 model=sar_uav.scxml", "version"),
            (
                "uav: count=1 model=sar_uav.scxml\nversion=1",
                "must precede",
            ),
            ("", "no swarm entries"),
            ("launch the drones", "expected"),
        ];
        for (text, needle) in cases {
            match parse_swarm_config(text, &dir).unwrap_err() {
                ConfigError::Syntax { message, .. } => {
                    assert!(message.contains(needle), "{text:?} gave {message:?}")
                }
                other => panic!("{text:?} gave {other}"),
            }
        }
    }

    #[test]
    fn missing_model_file_names_the_path() {
        let err =
            parse_swarm_config("uav: count=1 model=ghost.scxml", &models_dir()).unwrap_err();
        match err {
            ConfigError::Io { path, .. } => {
                assert!(path.to_string_lossy().contains("ghost.scxml"))
            }
            other => panic!("expected io error, got {other}"),
        }
    }

    #[test]
    fn broken_model_file_is_wrapped() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("bad.scxml"), "<scxml></wrong>").unwrap();
        let err = parse_swarm_config("uav: count=1 model=bad.scxml", dir.path()).unwrap_err();
        assert!(matches!(err, ConfigError::Model { .. }), "{err}");
        assert!(err.to_string().contains("bad.scxml"));
    }

    #[test]
    fn error_lines_are_one_based_physical_lines() {
        let err = parse_swarm_config(
            "version=1\nuav: count=1 model=sar_uav.scxml\nugv: count=x model=rescue_ugv.scxml",
            &models_dir(),
        )
        .unwrap_err();
        match err {
            ConfigError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("expected syntax error, got {other}"),
        }
    }
}
