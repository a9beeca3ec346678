//! Executable instance of a behavior model.
//!
//! Semantics:
//! * Run-to-completion: the caller feeds one event at a time from its FIFO
//!   queue; a dispatch fires at most one transition in the whole machine.
//! * Priority: regions are tried in document order (main region first); inside
//!   a region, transitions of the outermost active state are tried before
//!   nested ones, so an abort on an enclosing composite preempts whatever runs
//!   inside it. Within one state, document order decides; first match wins.
//! * Firing merges the event payload into the flat blackboard
//!   (last-writer-wins per key) before the target state is entered.
//! * A transition to the terminal pseudo-state terminates the whole machine.
//! * Behaviors emit events through [`StepReport`]; the harness routes them
//!   (locally and over the bus). The machine never dispatches its own
//!   emissions, which keeps local and remote event paths symmetric.

use super::event::{Event, Value};
use super::model::{
    guard_holds, BehaviorCatalog, BehaviorModel, StateNode, TransitionTarget, ValidationError,
};
use crate::CpsId;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MachineStatus {
    Running,
    Terminated,
}

/// Result of dispatching one event.
#[derive(Debug, Clone, PartialEq)]
pub enum TransitionOutcome {
    /// A leaf-level transition fired.
    Fired { from: String, to: String },
    /// A transition on a composite state fired, terminating its active
    /// subtree. `terminated` is the composite's path, `from` the active leaf
    /// that was cut off.
    Preempted {
        from: String,
        terminated: String,
        to: String,
    },
    /// No transition matched; state and blackboard are unchanged.
    Ignored,
}

impl TransitionOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            TransitionOutcome::Fired { .. } => "fired",
            TransitionOutcome::Preempted { .. } => "preempted",
            TransitionOutcome::Ignored => "ignored",
        }
    }
}

/// Event produced by a behavior tick; the harness stamps sender and
/// timestamp when routing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub name: String,
    pub payload: Vec<(String, Value)>,
}

/// Blackboard writes and emissions produced by one behavior tick.
#[derive(Debug, Clone, Default)]
pub struct TickOutput {
    pub writes: Vec<(String, Value)>,
    pub emissions: Vec<Emission>,
}

/// Failure signaled by a behavior tick. The machine stays Running; the
/// harness logs the fault.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("behavior {behavior} fault: {message}")]
pub struct BehaviorFault {
    pub behavior: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct StepFault {
    pub state: String,
    pub fault: BehaviorFault,
}

/// Aggregated result of stepping every active region once.
#[derive(Debug, Clone, Default)]
pub struct StepReport {
    pub emissions: Vec<Emission>,
    pub faults: Vec<StepFault>,
}

/// Executes the behavior of one active leaf state. The simulator implements
/// this per agent: it resolves the behavior in the registry, supplies world
/// access, and captures motion commands on the side.
pub trait TickRunner {
    fn tick(
        &mut self,
        leaf: &StateNode,
        ticks_in_state: u64,
        blackboard: &BTreeMap<String, Value>,
    ) -> Result<TickOutput, BehaviorFault>;
}

#[derive(Debug, Clone)]
struct RegionState {
    /// Active path as child indices. Main region: first index selects a
    /// top-level state. Parallel region: indices descend from the region
    /// root, empty when the root itself is the active leaf.
    path: Vec<usize>,
    entered_tick: u64,
}

/// Live machine: active configuration per region plus the flat blackboard.
#[derive(Debug, Clone)]
pub struct MachineInstance {
    model: Arc<BehaviorModel>,
    id: String,
    owner: CpsId,
    status: MachineStatus,
    regions: Vec<RegionState>,
    blackboard: BTreeMap<String, Value>,
}

/// Validates the model (against a behavior catalog when given) and returns an
/// instance resting in its initial configuration. `id` names the machine in
/// logs; `owner` is the id of the CPS executing it and resolves `self` in
/// guards.
pub fn build_machine(
    model: Arc<BehaviorModel>,
    catalog: Option<&dyn BehaviorCatalog>,
    id: &str,
    owner: CpsId,
) -> Result<MachineInstance, ValidationError> {
    model.validate(catalog)?;
    let mut regions = Vec::with_capacity(1 + model.parallel_regions.len());
    let top = model
        .states
        .iter()
        .position(|s| s.id == model.initial)
        .expect("validated initial");
    let mut main_path = vec![top];
    descend_initial(&model.states[top], &mut main_path);
    regions.push(RegionState {
        path: main_path,
        entered_tick: 0,
    });
    for root in &model.parallel_regions {
        let mut path = Vec::new();
        descend_initial(root, &mut path);
        regions.push(RegionState {
            path,
            entered_tick: 0,
        });
    }
    Ok(MachineInstance {
        model,
        id: id.to_string(),
        owner,
        status: MachineStatus::Running,
        regions,
        blackboard: BTreeMap::new(),
    })
}

/// Extends `path` with the initial-child chain below `node`.
fn descend_initial(node: &StateNode, path: &mut Vec<usize>) {
    let mut cur = node;
    while let Some(init) = &cur.initial {
        let idx = cur
            .children
            .iter()
            .position(|c| &c.id == init)
            .expect("validated initial child");
        path.push(idx);
        cur = &cur.children[idx];
    }
}

/// Nodes of region `r` from outermost to the node addressed by `path`.
/// Parallel regions include their root as the first element.
fn chain_of<'m>(model: &'m BehaviorModel, r: usize, path: &[usize]) -> Vec<&'m StateNode> {
    let mut chain = Vec::with_capacity(path.len() + 1);
    let mut nodes: &'m [StateNode];
    if r == 0 {
        nodes = &model.states;
    } else {
        let root = &model.parallel_regions[r - 1];
        chain.push(root);
        nodes = &root.children;
    }
    for &idx in path {
        let node = &nodes[idx];
        chain.push(node);
        nodes = &node.children;
    }
    chain
}

/// Slash-joined path string, model name first.
fn path_string_of(model: &BehaviorModel, r: usize, path: &[usize]) -> String {
    let mut out = model.name.clone();
    for node in chain_of(model, r, path) {
        out.push('/');
        out.push_str(&node.id);
    }
    out
}

impl MachineInstance {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn owner(&self) -> CpsId {
        self.owner
    }

    pub fn model(&self) -> &Arc<BehaviorModel> {
        &self.model
    }

    pub fn status(&self) -> MachineStatus {
        self.status
    }

    pub fn blackboard(&self) -> &BTreeMap<String, Value> {
        &self.blackboard
    }

    /// Presets a blackboard entry; intended for scenario setup in tests.
    pub fn seed_blackboard(&mut self, key: &str, value: Value) {
        self.blackboard.insert(key.to_string(), value);
    }

    /// Active leaf path per region, document-ordered (main region first).
    /// Empty once the machine has terminated.
    pub fn active_configuration(&self) -> Vec<String> {
        if self.status == MachineStatus::Terminated {
            return Vec::new();
        }
        (0..self.regions.len())
            .map(|r| path_string_of(&self.model, r, &self.regions[r].path))
            .collect()
    }

    fn terminal_string(&self) -> String {
        match &self.model.terminal_id {
            Some(t) => format!("{}/{}", self.model.name, t),
            None => format!("{}/terminal", self.model.name),
        }
    }

    /// Feeds one event through the machine. At most one transition fires; a
    /// non-matching event returns `Ignored` and changes nothing. Dispatching
    /// to a terminated machine is a no-op returning `Ignored`.
    pub fn dispatch_event(&mut self, event: &Event, tick: u64) -> TransitionOutcome {
        if self.status != MachineStatus::Running {
            return TransitionOutcome::Ignored;
        }
        let model = self.model.clone();
        for r in 0..self.regions.len() {
            let path = self.regions[r].path.clone();
            let chain = chain_of(&model, r, &path);
            let mut hit: Option<(usize, usize)> = None;
            'search: for (depth, node) in chain.iter().enumerate() {
                for (ti, t) in node.transitions.iter().enumerate() {
                    if t.trigger != event.name {
                        continue;
                    }
                    let ok = match &t.guard {
                        None => true,
                        Some(g) => {
                            guard_holds(g, event.value(&g.key), self.owner, &self.blackboard)
                        }
                    };
                    if ok {
                        hit = Some((depth, ti));
                        break 'search;
                    }
                }
            }
            let (depth, ti) = match hit {
                Some(h) => h,
                None => continue,
            };

            // Entries of `path` that address the fired node (parallel-region
            // roots sit in the chain before the first path entry).
            let fired_entries = if r == 0 { depth + 1 } else { depth };
            let preempts = depth < chain.len() - 1;
            let from = path_string_of(&model, r, &path);
            let terminated = path_string_of(&model, r, &path[..fired_entries]);
            let target = chain[depth].transitions[ti].target.clone();

            for (k, v) in &event.payload {
                self.blackboard.insert(k.clone(), v.clone());
            }

            let to = match target {
                TransitionTarget::Terminal => {
                    self.status = MachineStatus::Terminated;
                    for region in &mut self.regions {
                        region.path.clear();
                    }
                    self.terminal_string()
                }
                TransitionTarget::State(target_id) => {
                    // Validation guarantees State targets never fire on a
                    // parallel-region root, so a parent scope always exists.
                    let siblings: &[StateNode] = if r == 0 && depth == 0 {
                        &model.states
                    } else {
                        &chain[depth - 1].children
                    };
                    let t_idx = siblings
                        .iter()
                        .position(|s| s.id == target_id)
                        .expect("validated sibling target");
                    let mut new_path = path[..fired_entries - 1].to_vec();
                    new_path.push(t_idx);
                    descend_initial(&siblings[t_idx], &mut new_path);
                    let to = path_string_of(&model, r, &new_path);
                    self.regions[r].path = new_path;
                    self.regions[r].entered_tick = tick;
                    to
                }
            };

            return if preempts {
                TransitionOutcome::Preempted {
                    from,
                    terminated,
                    to,
                }
            } else {
                TransitionOutcome::Fired { from, to }
            };
        }
        TransitionOutcome::Ignored
    }

    /// Runs every active leaf behavior once via `runner`. Writes apply to the
    /// blackboard immediately (region order), emissions and faults are
    /// collected for the harness. Terminated machines report nothing.
    pub fn step(&mut self, tick: u64, runner: &mut dyn TickRunner) -> StepReport {
        let mut report = StepReport::default();
        if self.status != MachineStatus::Running {
            return report;
        }
        let model = self.model.clone();
        for r in 0..self.regions.len() {
            let path = &self.regions[r].path;
            let leaf = match chain_of(&model, r, path).last() {
                Some(leaf) => *leaf,
                None => continue,
            };
            if leaf.behavior.is_empty() {
                continue;
            }
            let ticks_in_state = tick.saturating_sub(self.regions[r].entered_tick);
            match runner.tick(leaf, ticks_in_state, &self.blackboard) {
                Ok(out) => {
                    for (k, v) in out.writes {
                        self.blackboard.insert(k, v);
                    }
                    report.emissions.extend(out.emissions);
                }
                Err(fault) => report.faults.push(StepFault {
                    state: path_string_of(&model, r, &self.regions[r].path),
                    fault,
                }),
            }
        }
        report
    }
}
