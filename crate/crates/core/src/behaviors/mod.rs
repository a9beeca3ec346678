//! Reusable behavior library.
//!
//! A behavior is a plain function ticked once per simulation step while its
//! state is active. Behaviors are pure with respect to the world: they read a
//! snapshot ([`TickCtx`]) and describe effects ([`BehaviorOutput`]) — motion,
//! blackboard writes, emitted events, target-table edits — which the harness
//! applies. This keeps every behavior unit-testable without a simulator and
//! keeps simulation order effects out of the library.
//!
//! Coordination between agents runs entirely over broadcast events; see
//! [`events`] for the shared vocabulary. Each agent keeps a local table of
//! known targets ([`TargetKnowledge`]) maintained by the `targetMonitoring`
//! behavior from the events it hears, which is what prevents two agents from
//! claiming the same target: for simultaneous finds, everyone's table settles
//! on the announcer with the lowest id, and the others abandon.

mod uav;
mod ugv;

use crate::fsm::{BehaviorCatalog, BehaviorFault, BehaviorType, Emission, Event, Value};
use crate::rng::SimRng;
use crate::{CpsId, Point, Scalar, TargetId};
use std::collections::BTreeMap;

/// Architecture layer a behavior (or infrastructure piece) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    SwarmComplex,
    SwarmBehaviors,
    SwarmFunctions,
    Communication,
    HardwareFunctions,
}

impl Layer {
    pub fn as_str(&self) -> &'static str {
        match self {
            Layer::SwarmComplex => "swarm-complex",
            Layer::SwarmBehaviors => "swarm-behaviors",
            Layer::SwarmFunctions => "swarm-functions",
            Layer::Communication => "communication",
            Layer::HardwareFunctions => "hardware-functions",
        }
    }
}

pub fn layer_of(bt: BehaviorType) -> Layer {
    match bt {
        BehaviorType::ComplexBehavior => Layer::SwarmComplex,
        BehaviorType::SwarmBehavior => Layer::SwarmBehaviors,
        BehaviorType::SwarmFunction => Layer::SwarmFunctions,
        BehaviorType::HardwareFunction => Layer::HardwareFunctions,
    }
}

/// Event names and payload keys shared by the stock behaviors and models.
pub mod events {
    pub const LAUNCH: &str = "launch";
    pub const MISSION_START: &str = "missionStart";
    pub const MISSION_ABORT: &str = "missionAbort";
    pub const TARGET_FOUND: &str = "targetFound";
    pub const TARGET_ASSIGNED: &str = "targetAssigned";
    pub const TARGET_UPDATE: &str = "targetUpdate";
    pub const TARGET_LOST: &str = "targetLost";
    pub const TARGET_RESCUED: &str = "targetRescued";

    pub const KEY_TARGET_ID: &str = "targetId";
    pub const KEY_POSITION: &str = "position";
    pub const KEY_LAST_POSITION: &str = "lastPosition";
    pub const KEY_FINDER: &str = "finder";
    pub const KEY_UGV_ID: &str = "ugvId";
    pub const KEY_ALTITUDE: &str = "altitude";
}

/// What an agent knows about a target, from events alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKnowledge {
    /// Announced by `finder`; no rover assigned yet. For simultaneous
    /// announcements the lowest sender id wins the entry.
    Detected { finder: CpsId },
    Assigned,
    Rescued,
}

/// Edit to the agent-local target table, applied by the harness after the
/// step so that every behavior in a tick reads the same table snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableOp {
    Detected { target: TargetId, finder: CpsId },
    Assigned { target: TargetId },
    Rescued { target: TargetId },
    Evict { target: TargetId },
}

pub fn apply_table_ops(table: &mut BTreeMap<TargetId, TargetKnowledge>, ops: &[TableOp]) {
    for op in ops {
        match *op {
            // First announcement wins; later finders must not displace it.
            TableOp::Detected { target, finder } => {
                table
                    .entry(target)
                    .or_insert(TargetKnowledge::Detected { finder });
            }
            TableOp::Assigned { target } => {
                table.insert(target, TargetKnowledge::Assigned);
            }
            TableOp::Rescued { target } => {
                table.insert(target, TargetKnowledge::Rescued);
            }
            // A lost target becomes announceable again — unless it is already
            // rescued, which is final.
            TableOp::Evict { target } => {
                if table.get(&target) != Some(&TargetKnowledge::Rescued) {
                    table.remove(&target);
                }
            }
        }
    }
}

/// Static world geometry plus the positions of targets that still exist
/// (rescued targets are gone). Behaviors must limit themselves to targets
/// inside their own field of view.
#[derive(Debug, Clone, Copy)]
pub struct WorldView<'a> {
    pub width: u32,
    pub height: u32,
    pub fov_radius: i64,
    pub targets: &'a [(TargetId, Point)],
}

impl WorldView<'_> {
    /// Targets visible from `pos`: within `fov_radius` patches (Chebyshev).
    pub fn visible_from(&self, pos: Point) -> impl Iterator<Item = (TargetId, Point)> + '_ {
        let own = pos.patch();
        let r = self.fov_radius;
        self.targets
            .iter()
            .copied()
            .filter(move |(_, p)| crate::geom::chebyshev(own, p.patch()) <= r)
    }
}

/// A ground rover as seen by a selecting UAV: id, position, and whether its
/// machine currently rests in its initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoverView {
    pub id: CpsId,
    pub position: Point,
    pub idle: bool,
}

/// Everything a behavior may read during one tick. `inbox` holds the events
/// dispatched to this agent this tick (whether or not they fired a
/// transition); `table` is the pre-step target-knowledge snapshot.
pub struct TickCtx<'a> {
    pub owner: CpsId,
    pub tick: u64,
    pub ticks_in_state: u64,
    pub position: Point,
    pub heading: Scalar,
    pub altitude: Scalar,
    pub home: Point,
    pub speed: Scalar,
    pub blackboard: &'a BTreeMap<String, Value>,
    pub params: &'a BTreeMap<String, Value>,
    pub table: &'a BTreeMap<TargetId, TargetKnowledge>,
    pub inbox: &'a [Event],
    pub world: WorldView<'a>,
    pub rovers: &'a [RoverView],
    pub rng: &'a mut SimRng,
}

impl TickCtx<'_> {
    /// Numeric lookup with the usual precedence: blackboard, then the agent's
    /// parameter store, then `default`.
    pub fn real_setting(&self, key: &str, default: Scalar) -> Scalar {
        for source in [self.blackboard, self.params] {
            match source.get(key) {
                Some(Value::Real(v)) => return *v,
                Some(Value::Int(v)) => return *v as Scalar,
                _ => {}
            }
        }
        default
    }

    pub fn bb_int(&self, key: &str) -> Option<i64> {
        match self.blackboard.get(key) {
            Some(Value::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn bb_pos(&self, key: &str) -> Option<Point> {
        match self.blackboard.get(key) {
            Some(Value::Pos(p)) => Some(*p),
            _ => None,
        }
    }
}

/// Requested body update; absent fields stay as they are. Positions are
/// absolute — behaviors do their own integration so that tests can check
/// trajectories without a world.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Motion {
    pub position: Option<Point>,
    pub heading: Option<Scalar>,
    pub altitude: Option<Scalar>,
}

/// Effects of one behavior tick.
#[derive(Debug, Clone, Default)]
pub struct BehaviorOutput {
    pub writes: Vec<(String, Value)>,
    pub emissions: Vec<Emission>,
    pub motion: Motion,
    pub table_ops: Vec<TableOp>,
}

impl BehaviorOutput {
    pub fn emit(&mut self, name: &str, payload: Vec<(String, Value)>) {
        self.emissions.push(Emission {
            name: name.to_string(),
            payload,
        });
    }
}

pub type BehaviorFn = fn(&mut TickCtx) -> Result<BehaviorOutput, BehaviorFault>;

pub struct BehaviorSpec {
    pub name: &'static str,
    pub behavior_type: BehaviorType,
    pub run: BehaviorFn,
}

/// Name-indexed behavior set; doubles as the catalog models validate against.
pub struct BehaviorRegistry {
    specs: BTreeMap<&'static str, BehaviorSpec>,
}

impl BehaviorRegistry {
    pub fn empty() -> Self {
        BehaviorRegistry {
            specs: BTreeMap::new(),
        }
    }

    /// The stock library: everything the shipped aerial and ground models use.
    pub fn standard() -> Self {
        let mut reg = BehaviorRegistry::empty();
        for spec in uav::specs().into_iter().chain(ugv::specs()) {
            reg.register(spec);
        }
        reg
    }

    pub fn register(&mut self, spec: BehaviorSpec) {
        self.specs.insert(spec.name, spec);
    }

    pub fn get(&self, name: &str) -> Option<&BehaviorSpec> {
        self.specs.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.specs.keys().copied()
    }

    /// `name,type,layer` rows, one per behavior, sorted by name.
    pub fn manifest(&self) -> String {
        let mut out = String::from("name,type,layer\n");
        for spec in self.specs.values() {
            out.push_str(&format!(
                "{},{},{}\n",
                spec.name,
                spec.behavior_type.as_str(),
                layer_of(spec.behavior_type).as_str()
            ));
        }
        out
    }
}

impl BehaviorCatalog for BehaviorRegistry {
    fn behavior_type(&self, name: &str) -> Option<BehaviorType> {
        self.specs.get(name).map(|s| s.behavior_type)
    }
}

pub use uav::{clamp_in, select_rover, step_toward};
