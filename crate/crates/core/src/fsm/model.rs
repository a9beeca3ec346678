//! Static structure of a behavior model.
//!
//! A model is a two-leveled hierarchy: a main region of top-level states (one
//! of which may be a composite holding a nested machine) plus any number of
//! parallel regions that run concurrently. Transitions target sibling states
//! or the terminal pseudo-state; guards are single-key comparisons on the
//! triggering event's payload.

use super::event::{is_valid_event_name, is_valid_ident, Value, ValueKind, DONE_EVENT};
use std::fmt;
use thiserror::Error;

/// Classification of what a state executes, mirroring the behavior library
/// layering. Only `ComplexBehavior` states may contain child states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BehaviorType {
    ComplexBehavior,
    SwarmBehavior,
    SwarmFunction,
    HardwareFunction,
}

impl BehaviorType {
    pub fn as_str(self) -> &'static str {
        match self {
            BehaviorType::ComplexBehavior => "ComplexBehavior",
            BehaviorType::SwarmBehavior => "SwarmBehavior",
            BehaviorType::SwarmFunction => "SwarmFunction",
            BehaviorType::HardwareFunction => "HardwareFunction",
        }
    }

    pub fn parse(s: &str) -> Option<BehaviorType> {
        match s {
            "ComplexBehavior" => Some(BehaviorType::ComplexBehavior),
            "SwarmBehavior" => Some(BehaviorType::SwarmBehavior),
            "SwarmFunction" => Some(BehaviorType::SwarmFunction),
            "HardwareFunction" => Some(BehaviorType::HardwareFunction),
            _ => None,
        }
    }
}

/// Comparison operator usable in a guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Gt,
}

impl Cmp {
    pub fn as_str(self) -> &'static str {
        match self {
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
            Cmp::Lt => "<",
            Cmp::Gt => ">",
        }
    }

    pub fn parse(s: &str) -> Option<Cmp> {
        match s {
            "==" => Some(Cmp::Eq),
            "!=" => Some(Cmp::Ne),
            "<" => Some(Cmp::Lt),
            ">" => Some(Cmp::Gt),
            _ => None,
        }
    }
}

/// Right-hand side of a guard comparison.
///
/// Besides literals there are two resolvable forms: `self`, the id of the CPS
/// executing the machine, and `@key`, the current blackboard value under
/// `key`. Both exist so that one static model can filter broadcast events by
/// addressee (for example `ugvId == self` on an assignment event).
#[derive(Debug, Clone, PartialEq)]
pub enum GuardOperand {
    Int(i64),
    Real(f64),
    Str(String),
    SelfId,
    Blackboard(String),
}

/// Single-key predicate over the triggering event's payload.
#[derive(Debug, Clone, PartialEq)]
pub struct Guard {
    pub key: String,
    pub op: Cmp,
    pub operand: GuardOperand,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransitionTarget {
    State(String),
    Terminal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub trigger: String,
    pub target: TransitionTarget,
    pub guard: Option<Guard>,
}

/// One state of the hierarchy. `children` is non-empty exactly for composite
/// states, which then carry `initial`; `behavior` is the registry key of the
/// executed behavior and stays empty for pure composite states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateNode {
    pub id: String,
    pub behavior_type: BehaviorType,
    pub behavior: String,
    pub inputs: Vec<(String, ValueKind)>,
    pub outputs: Vec<(String, ValueKind)>,
    pub initial: Option<String>,
    pub children: Vec<StateNode>,
    pub transitions: Vec<Transition>,
}

impl StateNode {
    /// Leaf state executing the named behavior.
    pub fn leaf(id: &str, behavior_type: BehaviorType, behavior: &str) -> StateNode {
        StateNode {
            id: id.to_string(),
            behavior_type,
            behavior: behavior.to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            initial: None,
            children: Vec::new(),
            transitions: Vec::new(),
        }
    }

    /// Composite state holding a nested machine.
    pub fn composite(id: &str, initial: &str, children: Vec<StateNode>) -> StateNode {
        StateNode {
            id: id.to_string(),
            behavior_type: BehaviorType::ComplexBehavior,
            behavior: String::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            initial: Some(initial.to_string()),
            children,
            transitions: Vec::new(),
        }
    }

    pub fn with_transition(mut self, trigger: &str, target: TransitionTarget) -> StateNode {
        self.transitions.push(Transition {
            trigger: trigger.to_string(),
            target,
            guard: None,
        });
        self
    }

    pub fn with_guarded_transition(
        mut self,
        trigger: &str,
        guard: Guard,
        target: TransitionTarget,
    ) -> StateNode {
        self.transitions.push(Transition {
            trigger: trigger.to_string(),
            target,
            guard: Some(guard),
        });
        self
    }

    pub fn is_composite(&self) -> bool {
        !self.children.is_empty()
    }
}

/// Complete behavior model.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorModel {
    pub name: String,
    /// Id of the initially active top-level state of the main region.
    pub initial: String,
    /// Top-level states of the main region, in document order.
    pub states: Vec<StateNode>,
    /// Roots of additional regions running concurrently with the main one.
    pub parallel_regions: Vec<StateNode>,
    /// Id of the terminal pseudo-state, when the model declares one.
    pub terminal_id: Option<String>,
}

/// Resolves behavior names during validation. Implemented by the behavior
/// registry and by parsed registry manifests.
pub trait BehaviorCatalog {
    fn behavior_type(&self, name: &str) -> Option<BehaviorType>;
}

#[derive(Debug, Error, PartialEq)]
#[error("model validation failed: {}", violations.join("; "))]
pub struct ValidationError {
    pub violations: Vec<String>,
}

impl BehaviorModel {
    pub fn new(name: &str, initial: &str, states: Vec<StateNode>) -> BehaviorModel {
        BehaviorModel {
            name: name.to_string(),
            initial: initial.to_string(),
            states,
            parallel_regions: Vec::new(),
            terminal_id: None,
        }
    }

    /// Depth of the state hierarchy (1 for a flat machine, 2 for one level of
    /// nesting, and so on).
    pub fn hierarchy_levels(&self) -> usize {
        fn depth(n: &StateNode) -> usize {
            1 + n.children.iter().map(depth).max().unwrap_or(0)
        }
        self.states
            .iter()
            .chain(self.parallel_regions.iter())
            .map(depth)
            .max()
            .unwrap_or(0)
    }

    /// All states in document order (main region depth-first, then parallel
    /// regions depth-first).
    pub fn states_in_document_order(&self) -> Vec<&StateNode> {
        fn walk<'a>(n: &'a StateNode, out: &mut Vec<&'a StateNode>) {
            out.push(n);
            for c in &n.children {
                walk(c, out);
            }
        }
        let mut out = Vec::new();
        for s in &self.states {
            walk(s, &mut out);
        }
        for r in &self.parallel_regions {
            walk(r, &mut out);
        }
        out
    }

    /// Distinct external event names in document order of first appearance
    /// (the internal completion event is excluded).
    pub fn event_names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for s in self.states_in_document_order() {
            for t in &s.transitions {
                if t.trigger != DONE_EVENT && !out.contains(&t.trigger.as_str()) {
                    out.push(&t.trigger);
                }
            }
        }
        out
    }

    /// Checks every structural invariant and reports all violations at once.
    /// With a catalog, behavior names are also resolved and type-checked.
    pub fn validate(&self, catalog: Option<&dyn BehaviorCatalog>) -> Result<(), ValidationError> {
        let mut v: Vec<String> = Vec::new();

        if !is_valid_ident(&self.name) {
            v.push(format!("model name {:?} is not an identifier", self.name));
        }
        if let Some(t) = &self.terminal_id {
            if !is_valid_ident(t) {
                v.push(format!("terminal id {:?} is not an identifier", t));
            }
        }

        // Global id uniqueness, including the terminal pseudo-state.
        let mut seen: Vec<&str> = self.terminal_id.iter().map(|s| s.as_str()).collect();
        for s in self.states_in_document_order() {
            if seen.contains(&s.id.as_str()) {
                v.push(format!("duplicate state id {:?}", s.id));
            }
            seen.push(&s.id);
        }

        if self.states.is_empty() {
            v.push("main region has no states".to_string());
        } else if !self.states.iter().any(|s| s.id == self.initial) {
            v.push(format!(
                "initial state {:?} is not a top-level state",
                self.initial
            ));
        }

        let top_ids: Vec<&str> = self.states.iter().map(|s| s.id.as_str()).collect();
        for s in &self.states {
            self.validate_node(s, &top_ids, catalog, &mut v);
        }
        for r in &self.parallel_regions {
            // A region root has no siblings, so its own transitions could only
            // target the terminal pseudo-state.
            for t in &r.transitions {
                if let TransitionTarget::State(id) = &t.target {
                    v.push(format!(
                        "parallel region {:?} transition targets {:?} but region roots have no siblings",
                        r.id, id
                    ));
                }
            }
            self.validate_node(r, &[], catalog, &mut v);
        }

        if v.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { violations: v })
        }
    }

    fn validate_node(
        &self,
        node: &StateNode,
        siblings: &[&str],
        catalog: Option<&dyn BehaviorCatalog>,
        v: &mut Vec<String>,
    ) {
        if !is_valid_ident(&node.id) {
            v.push(format!("state id {:?} is not an identifier", node.id));
        }

        match (&node.initial, node.children.is_empty()) {
            (Some(init), false) => {
                if !node.children.iter().any(|c| &c.id == init) {
                    v.push(format!(
                        "state {:?}: initial child {:?} does not exist",
                        node.id, init
                    ));
                }
                if node.behavior_type != BehaviorType::ComplexBehavior {
                    v.push(format!(
                        "state {:?}: only ComplexBehavior states may contain children",
                        node.id
                    ));
                }
            }
            (Some(_), true) => v.push(format!(
                "state {:?}: initial child declared on a leaf state",
                node.id
            )),
            (None, false) => v.push(format!(
                "state {:?}: composite state without an initial child",
                node.id
            )),
            (None, true) => {
                if node.behavior.is_empty() {
                    v.push(format!("leaf state {:?} names no behavior", node.id));
                }
            }
        }

        if !node.behavior.is_empty() {
            if let Some(cat) = catalog {
                match cat.behavior_type(&node.behavior) {
                    None => v.push(format!(
                        "state {:?}: behavior {:?} is not registered",
                        node.id, node.behavior
                    )),
                    Some(bt) if bt != node.behavior_type => v.push(format!(
                        "state {:?}: behavior {:?} is registered as {} but the state declares {}",
                        node.id,
                        node.behavior,
                        bt.as_str(),
                        node.behavior_type.as_str()
                    )),
                    Some(_) => {}
                }
            }
        }

        for (key, _) in node.inputs.iter().chain(node.outputs.iter()) {
            if !is_valid_ident(key) {
                v.push(format!(
                    "state {:?}: declared key {:?} is not an identifier",
                    node.id, key
                ));
            }
        }

        for t in &node.transitions {
            if !is_valid_event_name(&t.trigger) {
                v.push(format!(
                    "state {:?}: invalid trigger name {:?}",
                    node.id, t.trigger
                ));
            }
            match &t.target {
                TransitionTarget::State(id) => {
                    if !siblings.contains(&id.as_str()) && id != &node.id {
                        v.push(format!(
                            "state {:?}: transition target {:?} is not a sibling",
                            node.id, id
                        ));
                    }
                }
                TransitionTarget::Terminal => {
                    if self.terminal_id.is_none() {
                        v.push(format!(
                            "state {:?}: transition targets the terminal pseudo-state but the model declares no terminal id",
                            node.id
                        ));
                    }
                }
            }
            if let Some(g) = &t.guard {
                if !is_valid_ident(&g.key) {
                    v.push(format!(
                        "state {:?}: guard key {:?} is not an identifier",
                        node.id, g.key
                    ));
                }
                if let GuardOperand::Blackboard(k) = &g.operand {
                    if !is_valid_ident(k) {
                        v.push(format!(
                            "state {:?}: guard blackboard reference {:?} is not an identifier",
                            node.id, k
                        ));
                    }
                }
            }
        }

        let child_ids: Vec<&str> = node.children.iter().map(|c| c.id.as_str()).collect();
        for c in &node.children {
            self.validate_node(c, &child_ids, catalog, v);
        }
    }
}

impl fmt::Display for BehaviorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Serializes a guard in the canonical `key op operand` form used by the
/// model file format and the transition log.
pub fn guard_to_string(g: &Guard) -> String {
    let operand = match &g.operand {
        GuardOperand::Int(i) => i.to_string(),
        GuardOperand::Real(r) => format!("{:?}", r),
        GuardOperand::Str(s) => format!("'{}'", s),
        GuardOperand::SelfId => "self".to_string(),
        GuardOperand::Blackboard(k) => format!("@{}", k),
    };
    format!("{} {} {}", g.key, g.op.as_str(), operand)
}

/// Parses the `key OP operand` guard syntax ([`guard_to_string`] is its
/// inverse). Operands: an integer or real literal, a `'single-quoted'`
/// string, `self`, or `@key`. Whitespace around the three parts is free.
pub fn parse_guard(s: &str) -> Result<Guard, String> {
    let s = s.trim();
    let (op_at, op) = match s
        .match_indices(|c| c == '=' || c == '!' || c == '<' || c == '>')
        .next()
    {
        Some((i, _)) => {
            let two = s.get(i..i + 2);
            match two.and_then(Cmp::parse) {
                Some(op) => (i..i + 2, op),
                None => match s.get(i..i + 1).and_then(Cmp::parse) {
                    Some(op) => (i..i + 1, op),
                    None => return Err(format!("bad comparison operator in guard '{s}'")),
                },
            }
        }
        None => return Err(format!("guard '{s}' has no comparison operator")),
    };
    let key = s[..op_at.start].trim();
    let rest = s[op_at.end..].trim();
    if !is_valid_ident(key) {
        return Err(format!("bad guard key '{key}'"));
    }
    if rest.is_empty() {
        return Err(format!("guard '{s}' has no operand"));
    }
    let operand = if rest == "self" {
        GuardOperand::SelfId
    } else if let Some(bb) = rest.strip_prefix('@') {
        if !is_valid_ident(bb) {
            return Err(format!("bad blackboard reference '@{bb}'"));
        }
        GuardOperand::Blackboard(bb.to_string())
    } else if rest.starts_with('\'') {
        match rest.strip_prefix('\'').and_then(|r| r.strip_suffix('\'')) {
            Some(inner) if !inner.contains('\'') => GuardOperand::Str(inner.to_string()),
            _ => return Err(format!("bad string literal {rest}")),
        }
    } else if let Ok(i) = rest.parse::<i64>() {
        GuardOperand::Int(i)
    } else if let Ok(r) = rest.parse::<f64>() {
        if !r.is_finite() {
            return Err(format!("non-finite real literal '{rest}'"));
        }
        GuardOperand::Real(r)
    } else {
        return Err(format!("bad guard operand '{rest}'"));
    };
    Ok(Guard {
        key: key.to_string(),
        op,
        operand,
    })
}

/// Evaluates a guard against an event payload value, the executing machine's
/// owner id, and its blackboard. A guard whose key is absent from the payload
/// never matches; the same holds for an absent blackboard reference.
pub fn guard_holds(
    guard: &Guard,
    payload_value: Option<&Value>,
    owner: crate::CpsId,
    blackboard: &std::collections::BTreeMap<String, Value>,
) -> bool {
    let left = match payload_value {
        Some(v) => v,
        None => return false,
    };
    let right = match &guard.operand {
        GuardOperand::Int(i) => Value::Int(*i),
        GuardOperand::Real(r) => Value::Real(*r),
        GuardOperand::Str(s) => Value::Str(s.clone()),
        GuardOperand::SelfId => Value::Int(owner as i64),
        GuardOperand::Blackboard(k) => match blackboard.get(k) {
            Some(v) => v.clone(),
            None => return false,
        },
    };
    compare(left, &right, guard.op)
}

fn compare(left: &Value, right: &Value, op: Cmp) -> bool {
    use std::cmp::Ordering;
    let ord: Option<Ordering> = match (left, right) {
        (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
        (Value::Real(a), Value::Real(b)) => a.partial_cmp(b),
        (Value::Int(a), Value::Real(b)) => (*a as f64).partial_cmp(b),
        (Value::Real(a), Value::Int(b)) => a.partial_cmp(&(*b as f64)),
        (Value::Str(a), Value::Str(b)) => Some(a.cmp(b)),
        (Value::Pos(a), Value::Pos(b)) => {
            return match op {
                Cmp::Eq => a == b,
                Cmp::Ne => a != b,
                _ => false,
            }
        }
        _ => None,
    };
    match (ord, op) {
        (Some(o), Cmp::Eq) => o == Ordering::Equal,
        (Some(o), Cmp::Ne) => o != Ordering::Equal,
        (Some(o), Cmp::Lt) => o == Ordering::Less,
        (Some(o), Cmp::Gt) => o == Ordering::Greater,
        (None, Cmp::Ne) => true,
        (None, _) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn single_state_model() -> BehaviorModel {
        BehaviorModel::new(
            "Root",
            "Idle",
            vec![StateNode::leaf("Idle", BehaviorType::HardwareFunction, "Idle")],
        )
    }

    #[test]
    fn minimal_model_validates() {
        single_state_model().validate(None).unwrap();
    }

    #[test]
    fn all_violations_reported_at_once() {
        let mut m = single_state_model();
        m.initial = "Nowhere".into();
        m.states.push(StateNode::leaf("Idle", BehaviorType::HardwareFunction, "Idle"));
        m.states[1].transitions.push(Transition {
            trigger: "go".into(),
            target: TransitionTarget::State("Missing".into()),
            guard: None,
        });
        let err = m.validate(None).unwrap_err();
        assert!(err.violations.len() >= 3, "violations: {:?}", err.violations);
        assert!(err.violations.iter().any(|s| s.contains("duplicate state id")));
        assert!(err.violations.iter().any(|s| s.contains("initial state")));
        assert!(err.violations.iter().any(|s| s.contains("not a sibling")));
    }

    #[test]
    fn composite_requires_complex_type() {
        let mut child = StateNode::leaf("A", BehaviorType::SwarmBehavior, "Coverage");
        child.transitions.push(Transition {
            trigger: "go".into(),
            target: TransitionTarget::State("A".into()),
            guard: None,
        });
        let mut comp = StateNode::composite("C", "A", vec![child]);
        comp.behavior_type = BehaviorType::SwarmBehavior;
        let m = BehaviorModel::new("Root", "C", vec![comp]);
        let err = m.validate(None).unwrap_err();
        assert!(err
            .violations
            .iter()
            .any(|s| s.contains("only ComplexBehavior states may contain children")));
    }

    #[test]
    fn guard_self_and_blackboard_operands() {
        let bb: BTreeMap<String, Value> = [("targetId".to_string(), Value::Int(4))].into();
        let self_guard = Guard {
            key: "ugvId".into(),
            op: Cmp::Eq,
            operand: GuardOperand::SelfId,
        };
        assert!(guard_holds(&self_guard, Some(&Value::Int(9)), 9, &bb));
        assert!(!guard_holds(&self_guard, Some(&Value::Int(9)), 3, &bb));

        let bb_guard = Guard {
            key: "targetId".into(),
            op: Cmp::Eq,
            operand: GuardOperand::Blackboard("targetId".into()),
        };
        assert!(guard_holds(&bb_guard, Some(&Value::Int(4)), 0, &bb));
        assert!(!guard_holds(&bb_guard, Some(&Value::Int(5)), 0, &bb));
        // Absent key or absent blackboard entry never matches.
        assert!(!guard_holds(&bb_guard, None, 0, &bb));
        let empty = BTreeMap::new();
        assert!(!guard_holds(&bb_guard, Some(&Value::Int(4)), 0, &empty));
    }

    #[test]
    fn guard_numeric_promotion() {
        let g = Guard {
            key: "x".into(),
            op: Cmp::Lt,
            operand: GuardOperand::Real(2.5),
        };
        let bb = BTreeMap::new();
        assert!(guard_holds(&g, Some(&Value::Int(2)), 0, &bb));
        assert!(!guard_holds(&g, Some(&Value::Int(3)), 0, &bb));
    }

    #[test]
    fn event_names_skip_done_and_duplicates() {
        let mut a = StateNode::leaf("A", BehaviorType::HardwareFunction, "Idle");
        a.transitions.push(Transition {
            trigger: "go".into(),
            target: TransitionTarget::State("B".into()),
            guard: None,
        });
        let mut b = StateNode::leaf("B", BehaviorType::HardwareFunction, "Idle");
        b.transitions.push(Transition {
            trigger: DONE_EVENT.into(),
            target: TransitionTarget::State("A".into()),
            guard: None,
        });
        b.transitions.push(Transition {
            trigger: "go".into(),
            target: TransitionTarget::State("A".into()),
            guard: None,
        });
        let m = BehaviorModel::new("Root", "A", vec![a, b]);
        assert_eq!(m.event_names(), vec!["go"]);
    }

    #[test]
    fn guard_text_round_trips_all_operand_kinds() {
        let guards = [
            "finder == self",
            "targetId == @targetId",
            "count != 3",
            "altitude < 2.5",
            "name == 'alpha'",
            "score > 1e300",
        ];
        for text in guards {
            let g = parse_guard(text).unwrap();
            assert_eq!(guard_to_string(&g), text, "canonical form differs");
            assert_eq!(parse_guard(&guard_to_string(&g)).unwrap(), g);
        }
        // Sloppy spacing normalizes; literals keep their numeric kind.
        let g = parse_guard("  k==7 ").unwrap();
        assert_eq!(g.operand, GuardOperand::Int(7));
        assert_eq!(guard_to_string(&g), "k == 7");
        assert_eq!(parse_guard("k == 7.0").unwrap().operand, GuardOperand::Real(7.0));
        for bad in ["", "k", "k ==", "== 3", "k ~ 3", "k == 'a", "k == @", "9k == 3"] {
            assert!(parse_guard(bad).is_err(), "accepted {bad:?}");
        }
    }
}
