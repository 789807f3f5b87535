//! Datagram transports. Every transport carries encoded message bytes, so a
//! run behaves identically over the in-process queue and loopback UDP when
//! nothing is lost.

use std::collections::{BTreeMap, VecDeque};
use std::net::{SocketAddr, UdpSocket};
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NetError;

pub const DEFAULT_DETECTION_ADDR: &str = "127.0.0.1:47001";
pub const DEFAULT_TRACKER_ADDR: &str = "127.0.0.1:47002";
/// Chaser `i` listens on this port + `i`.
pub const DEFAULT_COMMAND_BASE_ADDR: &str = "127.0.0.1:48001";

pub const ENV_DETECTION_ADDR: &str = "RDV_DETECTION_ADDR";
pub const ENV_TRACKER_ADDR: &str = "RDV_TRACKER_ADDR";
pub const ENV_COMMAND_BASE_ADDR: &str = "RDV_COMMAND_BASE_ADDR";

const MAX_DATAGRAM: usize = 65_507;
const FLUSH_MARKER: &[u8] = b"\x00flush:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    Detections,
    Tracker,
    Command(usize),
}

pub trait Transport {
    fn send(&mut self, ch: Channel, bytes: &[u8]) -> Result<(), NetError>;

    /// Everything that arrived on `ch` since the last call, in arrival order.
    fn deliver(&mut self, ch: Channel) -> Result<Vec<Vec<u8>>, NetError>;
}

#[derive(Debug, Default)]
pub struct InProcess {
    queues: BTreeMap<Channel, VecDeque<Vec<u8>>>,
}

impl InProcess {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Transport for InProcess {
    fn send(&mut self, ch: Channel, bytes: &[u8]) -> Result<(), NetError> {
        self.queues.entry(ch).or_default().push_back(bytes.to_vec());
        Ok(())
    }

    fn deliver(&mut self, ch: Channel) -> Result<Vec<Vec<u8>>, NetError> {
        Ok(self
            .queues
            .get_mut(&ch)
            .map(|q| q.drain(..).collect())
            .unwrap_or_default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    #[default]
    InProcess,
    Udp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportConfig {
    pub kind: TransportKind,
    pub detection_addr: String,
    pub tracker_addr: String,
    pub command_base_addr: String,
    /// Probability each datagram is dropped.
    pub loss: f64,
    /// Probability each datagram is delivered twice.
    pub duplicate: f64,
    /// Probability each adjacent pair in a delivery batch is swapped.
    pub reorder: f64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig {
            kind: TransportKind::InProcess,
            detection_addr: DEFAULT_DETECTION_ADDR.into(),
            tracker_addr: DEFAULT_TRACKER_ADDR.into(),
            command_base_addr: DEFAULT_COMMAND_BASE_ADDR.into(),
            loss: 0.0,
            duplicate: 0.0,
            reorder: 0.0,
        }
    }
}

impl TransportConfig {
    /// Replaces addresses with any set environment overrides.
    pub fn apply_env_overrides(&mut self) {
        if let Ok(v) = std::env::var(ENV_DETECTION_ADDR) {
            self.detection_addr = v;
        }
        if let Ok(v) = std::env::var(ENV_TRACKER_ADDR) {
            self.tracker_addr = v;
        }
        if let Ok(v) = std::env::var(ENV_COMMAND_BASE_ADDR) {
            self.command_base_addr = v;
        }
    }

    /// All addresses on port 0, so the OS picks free ports.
    pub fn ephemeral_udp() -> Self {
        TransportConfig {
            kind: TransportKind::Udp,
            detection_addr: "127.0.0.1:0".into(),
            tracker_addr: "127.0.0.1:0".into(),
            command_base_addr: "127.0.0.1:0".into(),
            ..TransportConfig::default()
        }
    }

    pub fn is_lossless(&self) -> bool {
        self.loss == 0.0 && self.duplicate == 0.0 && self.reorder == 0.0
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, p) in [
            ("loss", self.loss),
            ("duplicate", self.duplicate),
            ("reorder", self.reorder),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("transport.{name} must be a probability"));
            }
        }
        for (name, a) in [
            ("detection_addr", &self.detection_addr),
            ("tracker_addr", &self.tracker_addr),
            ("command_base_addr", &self.command_base_addr),
        ] {
            a.parse::<SocketAddr>()
                .map_err(|e| format!("transport.{name} {a:?}: {e}"))?;
        }
        Ok(())
    }

    /// Builds the configured transport for `n_chasers` command channels.
    pub fn open(&self, n_chasers: usize, seed: u64) -> Result<Box<dyn Transport>, NetError> {
        let base: Box<dyn Transport> = match self.kind {
            TransportKind::InProcess => Box::new(InProcess::new()),
            TransportKind::Udp => Box::new(Udp::bind(self, n_chasers)?),
        };
        if self.is_lossless() {
            Ok(base)
        } else {
            Ok(Box::new(Lossy::new(
                base,
                self.loss,
                self.duplicate,
                self.reorder,
                seed,
            )))
        }
    }
}

fn parse_addr(s: &str) -> Result<SocketAddr, NetError> {
    s.parse()
        .map_err(|e| NetError::Transport(format!("bad address {s:?}: {e}")))
}

/// Loopback UDP: one bound socket per channel plus a sending socket.
#[derive(Debug)]
pub struct Udp {
    sender: UdpSocket,
    receivers: BTreeMap<Channel, UdpSocket>,
    flush_count: u64,
}

impl Udp {
    pub fn bind(cfg: &TransportConfig, n_chasers: usize) -> Result<Self, NetError> {
        let io = |e: std::io::Error| NetError::Transport(e.to_string());
        let bind = |addr: SocketAddr| -> Result<UdpSocket, NetError> {
            let s = UdpSocket::bind(addr).map_err(|e| NetError::Transport(format!("bind {addr}: {e}")))?;
            s.set_read_timeout(Some(Duration::from_secs(2))).map_err(io)?;
            Ok(s)
        };
        let mut receivers = BTreeMap::new();
        receivers.insert(Channel::Detections, bind(parse_addr(&cfg.detection_addr)?)?);
        receivers.insert(Channel::Tracker, bind(parse_addr(&cfg.tracker_addr)?)?);
        let base = parse_addr(&cfg.command_base_addr)?;
        for i in 0..n_chasers {
            let mut addr = base;
            if base.port() != 0 {
                let port = u16::try_from(base.port() as usize + i)
                    .map_err(|_| NetError::Transport("command port range overflows".into()))?;
                addr.set_port(port);
            }
            receivers.insert(Channel::Command(i), bind(addr)?);
        }
        let local = receivers[&Channel::Detections].local_addr().map_err(io)?;
        let mut sender_addr = local;
        sender_addr.set_port(0);
        let sender = UdpSocket::bind(sender_addr).map_err(io)?;
        Ok(Udp {
            sender,
            receivers,
            flush_count: 0,
        })
    }

    pub fn local_addr(&self, ch: Channel) -> Option<SocketAddr> {
        self.receivers.get(&ch).and_then(|s| s.local_addr().ok())
    }

    fn socket(&self, ch: Channel) -> Result<&UdpSocket, NetError> {
        self.receivers
            .get(&ch)
            .ok_or_else(|| NetError::Transport(format!("no such channel {ch:?}")))
    }
}

impl Transport for Udp {
    fn send(&mut self, ch: Channel, bytes: &[u8]) -> Result<(), NetError> {
        if bytes.len() > MAX_DATAGRAM {
            return Err(NetError::Transport(format!(
                "datagram of {} bytes too large",
                bytes.len()
            )));
        }
        let to = self
            .socket(ch)?
            .local_addr()
            .map_err(|e| NetError::Transport(e.to_string()))?;
        self.sender
            .send_to(bytes, to)
            .map_err(|e| NetError::Transport(e.to_string()))?;
        Ok(())
    }

    /// Sends a flush marker after whatever is queued and reads until it comes
    /// back, so a delivery sees every datagram sent before it.
    fn deliver(&mut self, ch: Channel) -> Result<Vec<Vec<u8>>, NetError> {
        self.flush_count += 1;
        let mut marker = FLUSH_MARKER.to_vec();
        marker.extend_from_slice(self.flush_count.to_string().as_bytes());
        self.send(ch, &marker)?;
        let sock = self.socket(ch)?;
        let mut out = Vec::new();
        let mut buf = vec![0u8; MAX_DATAGRAM];
        loop {
            let (n, _) = sock
                .recv_from(&mut buf)
                .map_err(|e| NetError::Transport(format!("receive on {ch:?}: {e}")))?;
            let d = &buf[..n];
            if d == marker.as_slice() {
                return Ok(out);
            }
            if d.starts_with(FLUSH_MARKER) {
                continue;
            }
            out.push(d.to_vec());
        }
    }
}

/// Wraps a transport with seeded loss, duplication and reordering applied at
/// delivery.
pub struct Lossy {
    inner: Box<dyn Transport>,
    loss: f64,
    duplicate: f64,
    reorder: f64,
    rng: ChaCha8Rng,
}

impl Lossy {
    pub fn new(inner: Box<dyn Transport>, loss: f64, duplicate: f64, reorder: f64, seed: u64) -> Self {
        Lossy {
            inner,
            loss,
            duplicate,
            reorder,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x6c6f_7373),
        }
    }
}

impl Transport for Lossy {
    fn send(&mut self, ch: Channel, bytes: &[u8]) -> Result<(), NetError> {
        self.inner.send(ch, bytes)
    }

    fn deliver(&mut self, ch: Channel) -> Result<Vec<Vec<u8>>, NetError> {
        let mut out = Vec::new();
        for d in self.inner.deliver(ch)? {
            if self.rng.random::<f64>() < self.loss {
                continue;
            }
            if self.rng.random::<f64>() < self.duplicate {
                out.push(d.clone());
            }
            out.push(d);
        }
        if out.len() > 1 && self.reorder > 0.0 {
            if self.reorder >= 1.0 {
                out.shuffle(&mut self.rng);
            } else {
                for i in 0..out.len() - 1 {
                    if self.rng.random::<f64>() < self.reorder {
                        out.swap(i, i + 1);
                    }
                }
            }
        }
        Ok(out)
    }
}
