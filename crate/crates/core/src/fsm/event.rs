//! Events and payload values.
//!
//! An event carries a name, the id of the sending CPS, a timestamp in ticks,
//! and a list of typed key/value payload entries. The reserved name
//! [`DONE_EVENT`] signals behavior completion; it is the one name exempt from
//! the identifier rule and is never transported over the bus.

use crate::{CpsId, Point};
use thiserror::Error;

/// Internal completion event emitted by behaviors; drives transitions that
/// have no external trigger (for example TakeOff to Loitering).
pub const DONE_EVENT: &str = "__done__";

/// Typed payload value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Str(String),
    Pos(Point),
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Int(_) => ValueKind::Int,
            Value::Real(_) => ValueKind::Real,
            Value::Str(_) => ValueKind::Str,
            Value::Pos(_) => ValueKind::Pos,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_pos(&self) -> Option<Point> {
        match self {
            Value::Pos(p) => Some(*p),
            _ => None,
        }
    }
}

/// Kind tag for declared inputs and outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Int,
    Real,
    Str,
    Pos,
}

impl ValueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::Int => "int",
            ValueKind::Real => "real",
            ValueKind::Str => "string",
            ValueKind::Pos => "position",
        }
    }

    pub fn parse(s: &str) -> Option<ValueKind> {
        match s {
            "int" => Some(ValueKind::Int),
            "real" => Some(ValueKind::Real),
            "string" => Some(ValueKind::Str),
            "position" => Some(ValueKind::Pos),
            _ => None,
        }
    }
}

/// True for names of the form `[A-Za-z][A-Za-z0-9_]*`.
pub fn is_valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// True for event names: identifiers plus the reserved completion event.
pub fn is_valid_event_name(s: &str) -> bool {
    s == DONE_EVENT || is_valid_ident(s)
}

#[derive(Debug, Error, PartialEq)]
pub enum EventError {
    #[error("invalid event name {0:?}")]
    InvalidName(String),
    #[error("duplicate payload key {0:?}")]
    DuplicateKey(String),
    #[error("invalid payload key {0:?}")]
    InvalidKey(String),
}

/// Event instance exchanged between machines.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub name: String,
    pub sender: CpsId,
    pub timestamp: u64,
    pub payload: Vec<(String, Value)>,
}

impl Event {
    /// Validating constructor; payload keys must be unique identifiers.
    pub fn new(
        name: &str,
        sender: CpsId,
        timestamp: u64,
        payload: Vec<(String, Value)>,
    ) -> Result<Event, EventError> {
        if !is_valid_event_name(name) {
            return Err(EventError::InvalidName(name.to_string()));
        }
        for (i, (key, _)) in payload.iter().enumerate() {
            if !is_valid_ident(key) {
                return Err(EventError::InvalidKey(key.clone()));
            }
            if payload[..i].iter().any(|(k, _)| k == key) {
                return Err(EventError::DuplicateKey(key.clone()));
            }
        }
        Ok(Event {
            name: name.to_string(),
            sender,
            timestamp,
            payload,
        })
    }

    pub fn value(&self, key: &str) -> Option<&Value> {
        self.payload.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn name_rule() {
        assert!(is_valid_event_name("launch"));
        assert!(is_valid_event_name("targetFound"));
        assert!(is_valid_event_name(DONE_EVENT));
        assert!(!is_valid_event_name("_private"));
        assert!(!is_valid_event_name("9lives"));
        assert!(!is_valid_event_name(""));
        assert!(!is_valid_event_name("has space"));
    }

    #[test]
    fn duplicate_keys_rejected() {
        let err = Event::new(
            "targetFound",
            1,
            0,
            vec![
                ("targetId".into(), Value::Int(1)),
                ("targetId".into(), Value::Int(2)),
            ],
        )
        .unwrap_err();
        assert_eq!(err, EventError::DuplicateKey("targetId".into()));
    }

    #[test]
    fn lookup_by_key() {
        let e = Event::new("targetFound", 1, 5, vec![("targetId".into(), Value::Int(3))]).unwrap();
        assert_eq!(e.value("targetId"), Some(&Value::Int(3)));
        assert_eq!(e.value("position"), None);
    }
}
