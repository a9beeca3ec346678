//! Hierarchical event-driven state machines.
//!
//! A [`BehaviorModel`] is the static description (states, transitions,
//! guards); a [`MachineInstance`] executes it. Concurrency is cooperative:
//! the machine never spawns threads, the surrounding harness drives it with
//! [`MachineInstance::dispatch_event`] and [`MachineInstance::step`].

pub mod event;
pub mod machine;
pub mod model;

pub use event::{Event, EventError, Value, ValueKind, DONE_EVENT};
pub use machine::{
    build_machine, BehaviorFault, Emission, MachineInstance, MachineStatus, StepFault, StepReport,
    TickOutput, TickRunner, TransitionOutcome,
};
pub use model::{
    guard_to_string, parse_guard, BehaviorCatalog, BehaviorModel, BehaviorType, Cmp, Guard,
    GuardOperand, StateNode, Transition, TransitionTarget, ValidationError,
};

use crate::CpsId;

/// One dispatch, as logged by the simulator. Serialization is a fixed-column
/// CSV row so logs diff cleanly across runs and implementations.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRecord {
    pub tick: u64,
    pub agent: CpsId,
    pub event: String,
    pub outcome: TransitionOutcome,
}

impl TransitionRecord {
    /// `tick,agent,event,outcome,from,terminated,to` — empty fields where the
    /// outcome has no value for them.
    pub fn to_csv_row(&self) -> String {
        let (from, terminated, to): (&str, &str, &str) = match &self.outcome {
            TransitionOutcome::Fired { from, to } => (from, "", to),
            TransitionOutcome::Preempted {
                from,
                terminated,
                to,
            } => (from, terminated, to),
            TransitionOutcome::Ignored => ("", "", ""),
        };
        format!(
            "{},{},{},{},{},{},{}",
            self.tick,
            self.agent,
            self.event,
            self.outcome.label(),
            from,
            terminated,
            to
        )
    }

    pub const CSV_HEADER: &'static str = "tick,agent,event,outcome,from,terminated,to";
}
