//! Deterministic grid-world simulation of a cooperating vehicle swarm.
//!
//! The world is a rectangle of unit patches. Aerial vehicles launch from the
//! south edge, sweep the area with their sensor footprint, and announce what
//! they find; ground rovers drive out and rescue it. Every agent executes a
//! behavior model (`fsm`) over the stock behavior library (`behaviors`), and
//! all coordination flows through the event bus (`bus`) — the simulator owns
//! only the clock, the bodies, and the physics.
//!
//! One tick processes, in this order: event dispatch in ascending agent-id
//! order, behavior steps against the pre-move snapshot, motion, target
//! mobility, detection, table edits, event routing, coverage stamping,
//! logging. A run is single-threaded and bit-reproducible from its seed;
//! runs with different seeds share nothing and may execute in parallel.

mod config;
mod logs;
mod run;
mod world;

pub use config::{
    parse_world_config, serialize_world_config, TargetFraction, TargetMobility, WorldConfig,
};
pub use logs::{FaultRecord, PositionRecord, RunLogs};
pub use run::{
    drive_coverage, drive_sar, run_coverage, run_sar, RunReport, RunResult, TargetOutcome,
};
pub use world::{AgentBlueprint, SwarmModels, TargetBody, TargetPhase, World};

use crate::CpsId;
use thiserror::Error;

/// Agent id of the command station. It never has a body or a machine; it
/// injects mission events (`launch`, `missionStart`, `missionAbort`) and is
/// the implied reader of telemetry.
pub const STATION_ID: CpsId = 0;

/// The models shipped with the toolkit, in their canonical serialized form.
pub mod assets {
    pub const SAR_UAV_XML: &str = include_str!("../../assets/models/sar_uav.scxml");
    pub const RESCUE_UGV_XML: &str = include_str!("../../assets/models/rescue_ugv.scxml");
    pub const MINIMAL_XML: &str = include_str!("../../assets/models/minimal.scxml");
}

#[derive(Debug, Error)]
pub enum SimError {
    /// World-config text that does not parse.
    #[error("world config line {line}: {message}")]
    Parse { line: usize, message: String },
    /// A value (or combination) outside the supported range.
    #[error("invalid world config: {0}")]
    Config(String),
    /// A swarm model that does not fit the behavior library.
    #[error("model rejected: {0}")]
    Model(#[from] crate::fsm::ValidationError),
    /// The run ended — tick cap reached, or every machine terminated — with
    /// goals outstanding. The partial result reports unreached times as ∞
    /// (`None`); callers must keep it apart from completed runs.
    #[error("run ended after {} of {cap} ticks with goals outstanding", report.result.total_ticks)]
    TickCapExceeded { cap: u64, report: Box<RunReport> },
}
