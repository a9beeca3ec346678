//! Event broadcast, telemetry, and remote parameters between swarm members.
//!
//! The bus is the only way machines influence each other: behaviors emit
//! events, the harness broadcasts them, subscribers drain their mailboxes on
//! the next tick. Delivery is fire-and-forget — no acks, no retransmission —
//! with an optional seeded Bernoulli loss knob and a fixed delivery delay for
//! robustness experiments. Defaults (`loss = 0`, `delay = 0`) make transport
//! a no-op concern.
//!
//! All operations take `&self` and are thread-safe; in simulation the tick
//! loop drives the bus synchronously, so the lock is never contended there.

pub mod wire;

use std::collections::{BTreeMap, VecDeque};
use std::sync::{Mutex, MutexGuard};

use rand::Rng;
use thiserror::Error;

use crate::fsm::{Event, Value};
use crate::rng::{stream, SimRng, BUS_STREAM};
use crate::{CpsId, Point};

pub use wire::{decode_event, encode_event, FrameError, WIRE_MAGIC, WIRE_VERSION};

#[derive(Debug, Clone, Copy)]
pub struct BusConfig {
    /// Probability that any single delivery is independently dropped.
    pub loss: f64,
    /// Ticks between send and delivery.
    pub delay: u64,
    /// Telemetry samples retained per sender.
    pub telemetry_depth: usize,
}

impl Default for BusConfig {
    fn default() -> Self {
        BusConfig {
            loss: 0.0,
            delay: 0,
            telemetry_depth: 16,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BusError {
    #[error("bus is closed")]
    Closed,
    #[error("unknown sender {0}")]
    UnknownSender(CpsId),
    #[error("unknown owner {0}")]
    UnknownOwner(CpsId),
    #[error("owner {owner} has no parameter {key:?}")]
    UnknownKey { owner: CpsId, key: String },
    #[error("telemetry from {sender} went backwards: {have} then {got}")]
    StaleTelemetry { sender: CpsId, have: u64, got: u64 },
}

/// Position report a CPS publishes each tick for the command station.
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetrySample {
    pub sender: CpsId,
    pub timestamp: u64,
    pub position: Point,
    pub active_state: String,
}

/// One delivery attempt, as logged for every (event, subscriber) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BusLogRecord {
    pub timestamp: u64,
    pub sender: CpsId,
    pub event: String,
    pub subscriber: CpsId,
    pub delivered: bool,
}

impl BusLogRecord {
    pub const CSV_HEADER: &'static str = "timestamp,sender,event,subscriber,outcome";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.timestamp,
            self.sender,
            self.event,
            self.subscriber,
            if self.delivered { "delivered" } else { "dropped" }
        )
    }
}

pub struct SwarmBus {
    inner: Mutex<Inner>,
}

struct Inner {
    open: bool,
    config: BusConfig,
    rng: SimRng,
    // Mailbox entries are (deliver_at, event); a fixed delay keeps the queue
    // sorted by construction, so draining from the front preserves FIFO.
    mailboxes: BTreeMap<CpsId, VecDeque<(u64, Event)>>,
    log: Vec<BusLogRecord>,
    telemetry: BTreeMap<CpsId, VecDeque<TelemetrySample>>,
    parameters: BTreeMap<CpsId, BTreeMap<String, Value>>,
}

impl SwarmBus {
    pub fn new(seed: u64, config: BusConfig) -> SwarmBus {
        SwarmBus {
            inner: Mutex::new(Inner {
                open: true,
                config,
                rng: stream(seed, BUS_STREAM),
                mailboxes: BTreeMap::new(),
                log: Vec::new(),
                telemetry: BTreeMap::new(),
                parameters: BTreeMap::new(),
            }),
        }
    }

    pub fn with_seed(seed: u64) -> SwarmBus {
        SwarmBus::new(seed, BusConfig::default())
    }

    /// Registers `id` as a subscriber and parameter owner. Idempotent.
    pub fn subscribe(&self, id: CpsId) {
        let mut g = self.lock();
        g.mailboxes.entry(id).or_default();
        g.parameters.entry(id).or_default();
    }

    pub fn subscribers(&self) -> Vec<CpsId> {
        self.lock().mailboxes.keys().copied().collect()
    }

    /// Queues `event` for every subscriber except the sender and returns how
    /// many copies survived the loss knob. Loss is drawn per delivery in
    /// ascending subscriber order so a seeded run is reproducible.
    pub fn broadcast(&self, event: &Event) -> Result<usize, BusError> {
        let mut g = self.lock();
        if !g.open {
            return Err(BusError::Closed);
        }
        let deliver_at = event.timestamp.saturating_add(g.config.delay);
        let ids: Vec<CpsId> = g.mailboxes.keys().copied().collect();
        let mut delivered = 0;
        for id in ids {
            if id == event.sender {
                continue;
            }
            let keep = g.config.loss <= 0.0 || g.rng.gen::<f64>() >= g.config.loss;
            g.log.push(BusLogRecord {
                timestamp: event.timestamp,
                sender: event.sender,
                event: event.name.clone(),
                subscriber: id,
                delivered: keep,
            });
            if keep {
                g.mailboxes
                    .get_mut(&id)
                    .expect("id came from the key set")
                    .push_back((deliver_at, event.clone()));
                delivered += 1;
            }
        }
        Ok(delivered)
    }

    /// Removes and returns the events for `id` whose delivery tick has come.
    /// Draining still works on a closed bus so shutdown can flush mailboxes.
    pub fn drain(&self, id: CpsId, now: u64) -> Result<Vec<Event>, BusError> {
        let mut g = self.lock();
        let mb = g
            .mailboxes
            .get_mut(&id)
            .ok_or(BusError::UnknownSender(id))?;
        let mut out = Vec::new();
        while mb.front().is_some_and(|(at, _)| *at <= now) {
            out.push(mb.pop_front().expect("front checked").1);
        }
        Ok(out)
    }

    pub fn publish_telemetry(&self, sample: TelemetrySample) -> Result<(), BusError> {
        let mut g = self.lock();
        if !g.open {
            return Err(BusError::Closed);
        }
        let depth = g.config.telemetry_depth.max(1);
        let ring = g.telemetry.entry(sample.sender).or_default();
        if let Some(last) = ring.back() {
            if sample.timestamp < last.timestamp {
                return Err(BusError::StaleTelemetry {
                    sender: sample.sender,
                    have: last.timestamp,
                    got: sample.timestamp,
                });
            }
        }
        ring.push_back(sample);
        while ring.len() > depth {
            ring.pop_front();
        }
        Ok(())
    }

    pub fn latest_telemetry(&self, sender: CpsId) -> Result<TelemetrySample, BusError> {
        self.lock()
            .telemetry
            .get(&sender)
            .and_then(|r| r.back())
            .cloned()
            .ok_or(BusError::UnknownSender(sender))
    }

    /// Oldest-first retained samples for `sender`.
    pub fn telemetry_history(&self, sender: CpsId) -> Result<Vec<TelemetrySample>, BusError> {
        self.lock()
            .telemetry
            .get(&sender)
            .map(|r| r.iter().cloned().collect())
            .ok_or(BusError::UnknownSender(sender))
    }

    /// Returns the previous value under the key, if any.
    pub fn set_parameter(
        &self,
        owner: CpsId,
        key: &str,
        value: Value,
    ) -> Result<Option<Value>, BusError> {
        let mut g = self.lock();
        if !g.open {
            return Err(BusError::Closed);
        }
        let params = g
            .parameters
            .get_mut(&owner)
            .ok_or(BusError::UnknownOwner(owner))?;
        Ok(params.insert(key.to_string(), value))
    }

    pub fn get_parameter(&self, owner: CpsId, key: &str) -> Result<Value, BusError> {
        let g = self.lock();
        let params = g.parameters.get(&owner).ok_or(BusError::UnknownOwner(owner))?;
        params.get(key).cloned().ok_or_else(|| BusError::UnknownKey {
            owner,
            key: key.to_string(),
        })
    }

    pub fn close(&self) {
        self.lock().open = false;
    }

    pub fn is_open(&self) -> bool {
        self.lock().open
    }

    pub fn log_records(&self) -> Vec<BusLogRecord> {
        self.lock().log.clone()
    }

    pub fn log_csv(&self) -> String {
        let g = self.lock();
        let mut out = String::from(BusLogRecord::CSV_HEADER);
        out.push('\n');
        for rec in &g.log {
            out.push_str(&rec.to_csv_row());
            out.push('\n');
        }
        out
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().expect("bus lock poisoned")
    }
}
