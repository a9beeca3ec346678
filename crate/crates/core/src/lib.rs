//! Engineering toolkit for swarms of cyber-physical systems: hierarchical
//! state-machine models, a behavior library, model file I/O, template code
//! generation, an event bus with a binary wire format, a deterministic
//! grid-world simulator, and statistics for simulation campaigns.
//!
//! Determinism rules used throughout: seeded ChaCha8 random streams (one
//! stream per agent, stream id = agent id), `BTreeMap` instead of `HashMap`
//! wherever iteration order can leak into results, and fixed agent ordering
//! inside every simulation tick.

pub mod behaviors;
pub mod bus;
pub mod fsm;
pub mod geom;
pub mod model;
pub mod rng;
pub mod scalar;

/// Scalar type used by the shipped simulator and file formats. The geometry
/// and statistics modules are generic over [`scalar::Real`]; everything that
/// touches the wire format or on-disk logs is pinned to `f64`.
pub type Scalar = f64;

/// 2-D point in patch units, concrete instantiation used across the toolkit.
pub type Point = geom::Vec2<Scalar>;

/// Identifier of a cyber-physical system (agent). Id 0 is reserved for the
/// command and control station.
pub type CpsId = u64;

/// Identifier of a simulated rescue target.
pub type TargetId = u32;
