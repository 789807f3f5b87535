//! Message passing between vision, tracker, guidance and the chasers.

pub mod transport;
pub mod wire;

use std::collections::BTreeMap;

use thiserror::Error;

pub use transport::{Channel, InProcess, Lossy, Transport, TransportConfig, TransportKind, Udp};
pub use wire::{
    canonical_f64, CommandBody, CommandMsg, DetectionMsg, TrackedBody, TrackerMsg, WireDetection, WireMessage,
    SCHEMA_VERSION,
};

/// Tracker data older than this is flagged stale.
pub const TRACKER_STALE_AFTER_S: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("decode error at byte {offset}: {reason}")]
    Decode { offset: usize, reason: String },
    #[error("unsupported schema version {0}")]
    UnsupportedVersion(u64),
    #[error("transport error: {0}")]
    Transport(String),
}

/// Counters of what the receiving side threw away.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct NetStats {
    pub decode_errors: u64,
    pub duplicates: u64,
    pub out_of_order: u64,
    pub stale_tracker_cycles: u64,
    pub transport_errors: u64,
}

/// Per-chaser command filter: accepts strictly increasing sequence numbers.
#[derive(Debug, Clone, Default)]
pub struct CommandReceiver {
    last_seq: Option<u64>,
    pub duplicates: u64,
    pub out_of_order: u64,
}

impl CommandReceiver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn accept(&mut self, msg: &CommandMsg) -> bool {
        match self.last_seq {
            Some(last) if msg.seq == last => {
                self.duplicates += 1;
                false
            }
            Some(last) if msg.seq < last => {
                self.out_of_order += 1;
                false
            }
            _ => {
                self.last_seq = Some(msg.seq);
                true
            }
        }
    }
}

/// Latest known state per tracked body, with arrival time.
#[derive(Debug, Clone, Default)]
pub struct TrackerView {
    bodies: BTreeMap<String, (u64, TrackedBody, f64)>,
}

impl TrackerView {
    /// Folds in a message received at `now`. Older timestamps than what is
    /// held are ignored.
    pub fn update(&mut self, msg: &TrackerMsg, now: f64) {
        for b in &msg.bodies {
            match self.bodies.get(&b.id) {
                Some((ts, _, _)) if *ts > msg.timestamp_us => {}
                _ => {
                    self.bodies.insert(b.id.clone(), (msg.timestamp_us, b.clone(), now));
                }
            }
        }
    }

    pub fn get(&self, id: &str) -> Option<&TrackedBody> {
        self.bodies.get(id).map(|(_, b, _)| b)
    }

    pub fn is_stale(&self, id: &str, now: f64) -> bool {
        match self.bodies.get(id) {
            Some((_, _, at)) => now - at > TRACKER_STALE_AFTER_S,
            None => true,
        }
    }
}

/// Typed publish/receive over a transport. Undecodable datagrams and socket
/// failures are counted in `stats`, never raised.
pub struct Bus {
    transport: Box<dyn Transport>,
    pub stats: NetStats,
}

impl Bus {
    pub fn new(transport: Box<dyn Transport>) -> Self {
        Bus {
            transport,
            stats: NetStats::default(),
        }
    }

    pub fn publish<M: WireMessage + Clone>(&mut self, ch: Channel, msg: &M) {
        if self.transport.send(ch, &msg.encode()).is_err() {
            self.stats.transport_errors += 1;
        }
    }

    pub fn receive<M: WireMessage>(&mut self, ch: Channel) -> Vec<M> {
        let datagrams = match self.transport.deliver(ch) {
            Ok(d) => d,
            Err(_) => {
                self.stats.transport_errors += 1;
                return Vec::new();
            }
        };
        let mut out = Vec::new();
        for d in datagrams {
            match M::decode(&d) {
                Ok(m) => out.push(m),
                Err(_) => self.stats.decode_errors += 1,
            }
        }
        out
    }
}
