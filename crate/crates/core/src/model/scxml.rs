//! SCXML-subset reader and writer for behavior models.
//!
//! The accepted grammar is deliberately small: `<scxml>`, `<state>`,
//! `<initial>`, `<parallel>`, `<final>`, `<transition>`, plus `<b:input>` and
//! `<b:output>` pin declarations in the behavior namespace. Everything else is
//! rejected rather than skipped, so a hand-edited file cannot silently lose
//! meaning. The writer is canonical — fixed attribute order, two-space
//! indentation, pins before children before transitions — while the reader
//! accepts members of a state in any order, so canonicalizing a file is
//! `serialize_model(&parse_model(text)?)`.

use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::Reader;

use super::ModelIoError;
use crate::fsm::{
    guard_to_string, parse_guard, BehaviorModel, BehaviorType, StateNode, Transition,
    TransitionTarget, ValidationError, ValueKind,
};

/// Value required in the root `version` attribute.
pub const FORMAT_VERSION: &str = "1";
/// Namespace that must be bound to the `b:` prefix on the root element.
pub const BEHAVIOR_NS: &str = "urn:swarmkit:behavior:1";

pub fn parse_model(text: &str) -> Result<BehaviorModel, ModelIoError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);
    let mut b = Builder::default();
    loop {
        let pos = reader.buffer_position();
        match reader.read_event() {
            Err(e) => {
                let (line, col) = line_col(text, reader.buffer_position());
                return Err(ModelIoError::Parse {
                    line,
                    col,
                    message: e.to_string(),
                });
            }
            Ok(XmlEvent::Eof) => break,
            Ok(XmlEvent::Decl(_)) | Ok(XmlEvent::Comment(_)) => {}
            Ok(XmlEvent::Start(e)) => b.open(text, pos, &e, false)?,
            Ok(XmlEvent::Empty(e)) => b.open(text, pos, &e, true)?,
            Ok(XmlEvent::End(e)) => {
                let tag = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                b.close(text, pos, &tag)?;
            }
            Ok(XmlEvent::Text(t)) => {
                let shown = String::from_utf8_lossy(&t);
                return Err(schema(text, pos, format_args!("stray text {:?}", shown)));
            }
            Ok(_) => {
                return Err(schema(text, pos, "unsupported XML construct"));
            }
        }
    }
    b.finish()
}

/// Renders a model in the canonical form. The result always ends in a
/// newline and contains no tabs; parsing it back yields an equal model.
pub fn serialize_model(m: &BehaviorModel) -> String {
    let mut out = String::new();
    out.push_str("<scxml version=\"");
    out.push_str(FORMAT_VERSION);
    out.push_str("\" name=\"");
    esc(&mut out, &m.name);
    out.push_str("\" initial=\"");
    esc(&mut out, &m.initial);
    out.push_str("\" xmlns:b=\"");
    out.push_str(BEHAVIOR_NS);
    out.push_str("\">\n");
    let terminal = m.terminal_id.as_deref();
    for s in &m.states {
        write_state(&mut out, s, 1, terminal);
    }
    if !m.parallel_regions.is_empty() {
        out.push_str("  <parallel>\n");
        for r in &m.parallel_regions {
            write_state(&mut out, r, 2, terminal);
        }
        out.push_str("  </parallel>\n");
    }
    if let Some(t) = terminal {
        out.push_str("  <final id=\"");
        esc(&mut out, t);
        out.push_str("\"/>\n");
    }
    out.push_str("</scxml>\n");
    out
}

fn write_state(out: &mut String, s: &StateNode, depth: usize, terminal: Option<&str>) {
    indent(out, depth);
    out.push_str("<state id=\"");
    esc(out, &s.id);
    out.push_str("\" b:type=\"");
    out.push_str(s.behavior_type.as_str());
    out.push('"');
    if !s.behavior.is_empty() {
        out.push_str(" b:behavior=\"");
        esc(out, &s.behavior);
        out.push('"');
    }
    if let Some(init) = &s.initial {
        out.push_str(" initial=\"");
        esc(out, init);
        out.push('"');
    }
    if s.inputs.is_empty() && s.outputs.is_empty() && s.children.is_empty() && s.transitions.is_empty()
    {
        out.push_str("/>\n");
        return;
    }
    out.push_str(">\n");
    for (name, kind) in &s.inputs {
        write_pin(out, depth + 1, "b:input", name, *kind);
    }
    for (name, kind) in &s.outputs {
        write_pin(out, depth + 1, "b:output", name, *kind);
    }
    for c in &s.children {
        write_state(out, c, depth + 1, terminal);
    }
    for t in &s.transitions {
        indent(out, depth + 1);
        out.push_str("<transition event=\"");
        esc(out, &t.trigger);
        out.push('"');
        if let Some(g) = &t.guard {
            out.push_str(" cond=\"");
            esc(out, &guard_to_string(g));
            out.push('"');
        }
        out.push_str(" target=\"");
        match &t.target {
            TransitionTarget::State(id) => esc(out, id),
            // Validation guarantees a terminal id whenever Terminal is targeted.
            TransitionTarget::Terminal => esc(out, terminal.unwrap_or("terminal")),
        }
        out.push_str("\"/>\n");
    }
    indent(out, depth);
    out.push_str("</state>\n");
}

fn write_pin(out: &mut String, depth: usize, tag: &str, name: &str, kind: ValueKind) {
    indent(out, depth);
    out.push('<');
    out.push_str(tag);
    out.push_str(" name=\"");
    esc(out, name);
    out.push_str("\" type=\"");
    out.push_str(kind.as_str());
    out.push_str("\"/>\n");
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn esc(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
}

fn line_col(text: &str, byte: u64) -> (usize, usize) {
    let byte = (byte as usize).min(text.len());
    let (mut line, mut col) = (1, 1);
    for c in text[..byte].chars() {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn schema(text: &str, pos: u64, msg: impl std::fmt::Display) -> ModelIoError {
    let (line, _) = line_col(text, pos);
    ModelIoError::Schema {
        message: format!("line {line}: {msg}"),
    }
}

#[derive(Default)]
struct Builder {
    name: Option<String>,
    initial: Option<String>,
    seen_root: bool,
    root_closed: bool,
    in_parallel: bool,
    parallel_seen: bool,
    in_final: bool,
    in_initial: bool,
    initial_taken: bool,
    stack: Vec<StateNode>,
    top: Vec<StateNode>,
    regions: Vec<StateNode>,
    terminal: Option<String>,
    violations: Vec<String>,
}

impl Builder {
    fn open(
        &mut self,
        text: &str,
        pos: u64,
        e: &BytesStart,
        empty: bool,
    ) -> Result<(), ModelIoError> {
        let tag = String::from_utf8_lossy(e.name().as_ref()).into_owned();
        if self.root_closed {
            return Err(schema(text, pos, "content after </scxml>"));
        }
        if self.in_final {
            return Err(schema(text, pos, "<final> must be empty"));
        }
        if self.in_initial && tag != "transition" {
            return Err(schema(
                text,
                pos,
                format_args!("unexpected <{tag}> inside <initial>"),
            ));
        }
        if tag != "scxml" && !self.seen_root {
            return Err(schema(text, pos, format_args!("<{tag}> outside <scxml>")));
        }
        match tag.as_str() {
            "scxml" => self.open_root(text, pos, e, empty),
            "state" => self.open_state(text, pos, e, empty),
            "parallel" => self.open_parallel(text, pos, e, empty),
            "final" => self.open_final(text, pos, e, empty),
            "initial" => self.open_initial(text, pos, e, empty),
            "transition" => self.open_transition(text, pos, e, empty),
            "b:input" | "b:output" => self.open_pin(text, pos, e, empty, &tag),
            _ => Err(schema(text, pos, format_args!("unknown element <{tag}>"))),
        }
    }

    fn open_root(
        &mut self,
        text: &str,
        pos: u64,
        e: &BytesStart,
        empty: bool,
    ) -> Result<(), ModelIoError> {
        if self.seen_root {
            return Err(schema(text, pos, "multiple <scxml> elements"));
        }
        let attrs = attr_map(text, pos, e, &["version", "name", "initial", "xmlns:b"])?;
        let version = required(text, pos, &attrs, "scxml", "version")?;
        if version != FORMAT_VERSION {
            return Err(schema(
                text,
                pos,
                format_args!("unsupported format version {version:?}"),
            ));
        }
        let ns = required(text, pos, &attrs, "scxml", "xmlns:b")?;
        if ns != BEHAVIOR_NS {
            return Err(schema(
                text,
                pos,
                format_args!("behavior namespace must be {BEHAVIOR_NS:?}, got {ns:?}"),
            ));
        }
        self.name = Some(required(text, pos, &attrs, "scxml", "name")?);
        self.initial = Some(required(text, pos, &attrs, "scxml", "initial")?);
        self.seen_root = true;
        if empty {
            self.close(text, pos, "scxml")?;
        }
        Ok(())
    }

    fn open_state(
        &mut self,
        text: &str,
        pos: u64,
        e: &BytesStart,
        empty: bool,
    ) -> Result<(), ModelIoError> {
        let attrs = attr_map(text, pos, e, &["id", "b:type", "b:behavior", "initial"])?;
        let id = required(text, pos, &attrs, "state", "id")?;
        let behavior_type = match lookup(&attrs, "b:type") {
            None => {
                return Err(schema(
                    text,
                    pos,
                    format_args!("state {id:?} is missing b:type"),
                ))
            }
            Some(raw) => match BehaviorType::parse(raw) {
                Some(bt) => bt,
                None => {
                    // Recoverable: remember the complaint, keep parsing so all
                    // problems in the file are reported in one pass.
                    self.violations
                        .push(format!("state {id:?}: unknown behavior type {raw:?}"));
                    BehaviorType::HardwareFunction
                }
            },
        };
        self.stack.push(StateNode {
            id,
            behavior_type,
            behavior: lookup(&attrs, "b:behavior").unwrap_or_default().to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            initial: lookup(&attrs, "initial").map(str::to_string),
            children: Vec::new(),
            transitions: Vec::new(),
        });
        if empty {
            self.close(text, pos, "state")?;
        }
        Ok(())
    }

    fn open_parallel(
        &mut self,
        text: &str,
        pos: u64,
        e: &BytesStart,
        empty: bool,
    ) -> Result<(), ModelIoError> {
        if !self.stack.is_empty() || self.in_parallel {
            return Err(schema(text, pos, "<parallel> only allowed at top level"));
        }
        if self.parallel_seen {
            return Err(schema(text, pos, "multiple <parallel> blocks"));
        }
        attr_map(text, pos, e, &[])?;
        self.parallel_seen = true;
        if !empty {
            self.in_parallel = true;
        }
        Ok(())
    }

    fn open_final(
        &mut self,
        text: &str,
        pos: u64,
        e: &BytesStart,
        empty: bool,
    ) -> Result<(), ModelIoError> {
        if !self.stack.is_empty() || self.in_parallel {
            return Err(schema(text, pos, "<final> only allowed at top level"));
        }
        if self.terminal.is_some() {
            return Err(schema(text, pos, "multiple <final> elements"));
        }
        let attrs = attr_map(text, pos, e, &["id"])?;
        self.terminal = Some(required(text, pos, &attrs, "final", "id")?);
        if !empty {
            self.in_final = true;
        }
        Ok(())
    }

    fn open_initial(
        &mut self,
        text: &str,
        pos: u64,
        e: &BytesStart,
        empty: bool,
    ) -> Result<(), ModelIoError> {
        attr_map(text, pos, e, &[])?;
        let parent = match self.stack.last() {
            Some(p) => p,
            None => return Err(schema(text, pos, "<initial> outside <state>")),
        };
        if parent.initial.is_some() {
            return Err(schema(
                text,
                pos,
                format_args!("duplicate initial declaration for state {:?}", parent.id),
            ));
        }
        if empty {
            return Err(schema(text, pos, "<initial> requires a <transition> child"));
        }
        self.in_initial = true;
        self.initial_taken = false;
        Ok(())
    }

    fn open_transition(
        &mut self,
        text: &str,
        pos: u64,
        e: &BytesStart,
        empty: bool,
    ) -> Result<(), ModelIoError> {
        if !empty {
            return Err(schema(text, pos, "<transition> must be self-closing"));
        }
        if self.in_initial {
            if self.initial_taken {
                return Err(schema(text, pos, "multiple <transition> in <initial>"));
            }
            let attrs = attr_map(text, pos, e, &["target"])?;
            let target = required(text, pos, &attrs, "transition", "target")?;
            self.stack
                .last_mut()
                .expect("in_initial implies an open state")
                .initial = Some(target);
            self.initial_taken = true;
            return Ok(());
        }
        let attrs = attr_map(text, pos, e, &["event", "cond", "target"])?;
        let trigger = required(text, pos, &attrs, "transition", "event")?;
        let target = required(text, pos, &attrs, "transition", "target")?;
        let guard = match lookup(&attrs, "cond") {
            None => None,
            Some(c) => match parse_guard(c) {
                Ok(g) => Some(g),
                Err(m) => {
                    return Err(schema(text, pos, format_args!("invalid cond {c:?}: {m}")))
                }
            },
        };
        match self.stack.last_mut() {
            Some(parent) => parent.transitions.push(Transition {
                trigger,
                target: TransitionTarget::State(target),
                guard,
            }),
            None => return Err(schema(text, pos, "<transition> outside <state>")),
        }
        Ok(())
    }

    fn open_pin(
        &mut self,
        text: &str,
        pos: u64,
        e: &BytesStart,
        empty: bool,
        tag: &str,
    ) -> Result<(), ModelIoError> {
        if !empty {
            return Err(schema(text, pos, format_args!("<{tag}> must be self-closing")));
        }
        let attrs = attr_map(text, pos, e, &["name", "type"])?;
        let name = required(text, pos, &attrs, tag, "name")?;
        let ty = required(text, pos, &attrs, tag, "type")?;
        let kind = match ValueKind::parse(&ty) {
            Some(k) => k,
            None => {
                return Err(schema(
                    text,
                    pos,
                    format_args!("unknown payload type {ty:?} on <{tag}>"),
                ))
            }
        };
        match self.stack.last_mut() {
            Some(parent) => {
                if tag == "b:input" {
                    parent.inputs.push((name, kind));
                } else {
                    parent.outputs.push((name, kind));
                }
            }
            None => return Err(schema(text, pos, format_args!("<{tag}> outside <state>"))),
        }
        Ok(())
    }

    fn close(&mut self, text: &str, pos: u64, tag: &str) -> Result<(), ModelIoError> {
        match tag {
            "scxml" => self.root_closed = true,
            "state" => {
                // The reader rejects mismatched end tags, so every </state>
                // matches a pushed node.
                let node = self.stack.pop().expect("balanced state tags");
                if let Some(parent) = self.stack.last_mut() {
                    parent.children.push(node);
                } else if self.in_parallel {
                    self.regions.push(node);
                } else {
                    self.top.push(node);
                }
            }
            "parallel" => self.in_parallel = false,
            "final" => self.in_final = false,
            "initial" => {
                if !self.initial_taken {
                    return Err(schema(text, pos, "<initial> requires a <transition> child"));
                }
                self.in_initial = false;
            }
            _ => {}
        }
        Ok(())
    }

    fn finish(self) -> Result<BehaviorModel, ModelIoError> {
        let (name, initial) = match (self.name, self.initial) {
            (Some(n), Some(i)) => (n, i),
            _ => {
                return Err(ModelIoError::Schema {
                    message: "no <scxml> root element".to_string(),
                })
            }
        };
        if !self.root_closed {
            return Err(ModelIoError::Schema {
                message: "unclosed <scxml>".to_string(),
            });
        }
        if self.top.is_empty() {
            return Err(ModelIoError::Schema {
                message: "model has no states".to_string(),
            });
        }
        let mut model = BehaviorModel {
            name,
            initial,
            states: self.top,
            parallel_regions: self.regions,
            terminal_id: self.terminal,
        };
        if let Some(t) = model.terminal_id.clone() {
            for s in model
                .states
                .iter_mut()
                .chain(model.parallel_regions.iter_mut())
            {
                remap_terminal(s, &t);
            }
        }
        let mut violations = self.violations;
        if let Err(e) = model.validate(None) {
            violations.extend(e.violations);
        }
        if !violations.is_empty() {
            return Err(ModelIoError::Validation(ValidationError { violations }));
        }
        Ok(model)
    }
}

/// Transitions name the final state like any sibling; in the object model the
/// terminal pseudo-state is a distinct target variant.
fn remap_terminal(node: &mut StateNode, terminal: &str) {
    for t in &mut node.transitions {
        if matches!(&t.target, TransitionTarget::State(id) if id == terminal) {
            t.target = TransitionTarget::Terminal;
        }
    }
    for c in &mut node.children {
        remap_terminal(c, terminal);
    }
}

fn attr_map(
    text: &str,
    pos: u64,
    e: &BytesStart,
    allowed: &[&str],
) -> Result<Vec<(String, String)>, ModelIoError> {
    let tag = String::from_utf8_lossy(e.name().as_ref()).into_owned();
    let mut out: Vec<(String, String)> = Vec::new();
    for a in e.attributes() {
        let a = match a {
            Ok(a) => a,
            Err(err) => {
                return Err(schema(
                    text,
                    pos,
                    format_args!("bad attribute on <{tag}>: {err}"),
                ))
            }
        };
        let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
        if !allowed.contains(&key.as_str()) {
            return Err(schema(
                text,
                pos,
                format_args!("unknown attribute {key:?} on <{tag}>"),
            ));
        }
        if out.iter().any(|(k, _)| *k == key) {
            return Err(schema(
                text,
                pos,
                format_args!("duplicate attribute {key:?} on <{tag}>"),
            ));
        }
        let value = match a.normalized_value(quick_xml::XmlVersion::Implicit1_0) {
            Ok(v) => v.into_owned(),
            Err(err) => {
                return Err(schema(
                    text,
                    pos,
                    format_args!("bad value for {key:?} on <{tag}>: {err}"),
                ))
            }
        };
        out.push((key, value));
    }
    Ok(out)
}

fn lookup<'a>(attrs: &'a [(String, String)], key: &str) -> Option<&'a str> {
    attrs
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

fn required(
    text: &str,
    pos: u64,
    attrs: &[(String, String)],
    tag: &str,
    key: &str,
) -> Result<String, ModelIoError> {
    match lookup(attrs, key) {
        Some(v) => Ok(v.to_string()),
        None => Err(schema(
            text,
            pos,
            format_args!("<{tag}> is missing the {key:?} attribute"),
        )),
    }
}
