//! Wire messages. Each datagram is one UTF-8 line of canonical JSON: object
//! keys sorted, floats rounded to 9 significant digits, terminated by `\n`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::NetError;
use crate::vision::DetectionClass;

pub const SCHEMA_VERSION: u32 = 1;

/// Rounds to 9 significant digits. Values already at that precision are
/// returned unchanged, so canonicalization is idempotent.
pub fn canonical_f64(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

fn canonical3(v: [f64; 3]) -> [f64; 3] {
    v.map(canonical_f64)
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

pub trait WireMessage: Serialize + DeserializeOwned + Sized {
    /// Rounds every float to its wire precision.
    fn canonicalize(&mut self);

    fn schema_version(&self) -> u32;

    /// Structural invariants beyond what the JSON shape enforces.
    fn check(&self) -> Result<(), String>;

    fn encode(&self) -> Vec<u8>
    where
        Self: Clone,
    {
        let mut m = self.clone();
        m.canonicalize();
        let value = serde_json::to_value(&m).expect("wire messages always serialize");
        let mut out = serde_json::to_vec(&value).expect("json values always serialize");
        out.push(b'\n');
        out
    }

    fn decode(bytes: &[u8]) -> Result<Self, NetError> {
        let body = match bytes.split_last() {
            Some((b'\n', body)) => body,
            _ => {
                return Err(NetError::Decode {
                    offset: bytes.len(),
                    reason: "missing newline terminator".into(),
                })
            }
        };
        let text = std::str::from_utf8(body).map_err(|e| NetError::Decode {
            offset: e.valid_up_to(),
            reason: "invalid utf-8".into(),
        })?;
        if let Some(pos) = text.find('\n') {
            return Err(NetError::Decode {
                offset: pos,
                reason: "embedded newline".into(),
            });
        }
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| json_error(text, &e))?;
        match value.get("schema_version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(NetError::UnsupportedVersion(v)),
            None => {
                return Err(NetError::Decode {
                    offset: 0,
                    reason: "missing or non-integer schema_version".into(),
                })
            }
        }
        let msg: Self = serde_json::from_str(text).map_err(|e| json_error(text, &e))?;
        msg.check().map_err(|reason| NetError::Decode { offset: 0, reason })?;
        Ok(msg)
    }
}

/// Byte offset of a serde_json error position (1-based line/column).
fn json_error(text: &str, e: &serde_json::Error) -> NetError {
    let mut offset = 0usize;
    for (i, line) in text.split('\n').enumerate() {
        if i + 1 == e.line() {
            offset += e.column().saturating_sub(1).min(line.len());
            break;
        }
        offset += line.len() + 1;
    }
    NetError::Decode {
        offset: offset.min(text.len()),
        reason: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireDetection {
    pub class: DetectionClass,
    /// P1..P5, camera frame, meters.
    pub points: [[f64; 3]; 5],
}

/// Vision to guidance: one frame of detections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionMsg {
    pub schema_version: u32,
    pub timestamp_us: u64,
    pub detections: Vec<WireDetection>,
}

impl DetectionMsg {
    pub fn new(timestamp_us: u64, detections: Vec<WireDetection>) -> Self {
        let mut m = DetectionMsg {
            schema_version: SCHEMA_VERSION,
            timestamp_us,
            detections,
        };
        m.canonicalize();
        m
    }
}

impl WireMessage for DetectionMsg {
    fn canonicalize(&mut self) {
        for d in &mut self.detections {
            d.points = d.points.map(canonical3);
        }
    }

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn check(&self) -> Result<(), String> {
        if self.detections.iter().any(|d| !all_finite(d.points.as_flattened())) {
            return Err("non-finite point".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackedBody {
    pub id: String,
    /// Tracker frame, meters.
    pub position: [f64; 3],
    /// Tracker frame, m/s.
    pub velocity: [f64; 3],
}

/// Tracker to guidance: rigid-body states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerMsg {
    pub schema_version: u32,
    pub timestamp_us: u64,
    pub bodies: Vec<TrackedBody>,
}

impl TrackerMsg {
    pub fn new(timestamp_us: u64, bodies: Vec<TrackedBody>) -> Self {
        let mut m = TrackerMsg {
            schema_version: SCHEMA_VERSION,
            timestamp_us,
            bodies,
        };
        m.canonicalize();
        m
    }
}

impl WireMessage for TrackerMsg {
    fn canonicalize(&mut self) {
        for b in &mut self.bodies {
            b.position = canonical3(b.position);
            b.velocity = canonical3(b.velocity);
        }
    }

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn check(&self) -> Result<(), String> {
        let mut ids: Vec<&str> = self.bodies.iter().map(|b| b.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err("duplicate body id".into());
        }
        if self
            .bodies
            .iter()
            .any(|b| !all_finite(&b.position) || !all_finite(&b.velocity))
        {
            return Err("non-finite body state".into());
        }
        Ok(())
    }
}

/// Payload of a command: a relative move (drone frame, cm and cm/s) or a
/// landing order. Serialized as an object or the string `"land"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandBody {
    Move { dx: i32, dy: i32, dz: i32, speed: i32 },
    Land,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveRepr {
    dx: i32,
    dy: i32,
    dz: i32,
    speed: i32,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BodyRepr {
    Move(MoveRepr),
    Keyword(String),
}

impl Serialize for CommandBody {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            CommandBody::Move { dx, dy, dz, speed } => BodyRepr::Move(MoveRepr { dx, dy, dz, speed }),
            CommandBody::Land => BodyRepr::Keyword("land".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CommandBody {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match BodyRepr::deserialize(d)? {
            BodyRepr::Move(m) => Ok(CommandBody::Move {
                dx: m.dx,
                dy: m.dy,
                dz: m.dz,
                speed: m.speed,
            }),
            BodyRepr::Keyword(k) if k == "land" => Ok(CommandBody::Land),
            BodyRepr::Keyword(k) => Err(serde::de::Error::custom(format!("unknown command keyword {k:?}"))),
        }
    }
}

/// Guidance to one chaser. `seq` increases strictly per chaser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandMsg {
    pub schema_version: u32,
    pub seq: u64,
    pub chaser_id: String,
    #[serde(rename = "move")]
    pub body: CommandBody,
}

impl CommandMsg {
    pub fn new(seq: u64, chaser_id: impl Into<String>, body: CommandBody) -> Self {
        CommandMsg {
            schema_version: SCHEMA_VERSION,
            seq,
            chaser_id: chaser_id.into(),
            body,
        }
    }
}

impl WireMessage for CommandMsg {
    fn canonicalize(&mut self) {}

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn check(&self) -> Result<(), String> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_detection_list_round_trips() {
        let m = DetectionMsg::new(0, vec![]);
        let bytes = m.encode();
        assert_eq!(DetectionMsg::decode(&bytes).unwrap(), m);
        assert_eq!(bytes.last(), Some(&b'\n'));
    }

    #[test]
    fn keys_are_sorted() {
        let m = CommandMsg::new(
            3,
            "drone1",
            CommandBody::Move {
                dx: 20,
                dy: 0,
                dz: -20,
                speed: 100,
            },
        );
        let s = String::from_utf8(m.encode()).unwrap();
        assert_eq!(
            s,
            "{\"chaser_id\":\"drone1\",\"move\":{\"dx\":20,\"dy\":0,\"dz\":-20,\"speed\":100},\"schema_version\":1,\"seq\":3}\n"
        );
        let land = CommandMsg::new(4, "drone1", CommandBody::Land);
        let s = String::from_utf8(land.encode()).unwrap();
        assert!(s.contains("\"move\":\"land\""));
        assert_eq!(CommandMsg::decode(s.as_bytes()).unwrap(), land);
    }

    #[test]
    fn floats_limited_to_nine_digits() {
        let m = TrackerMsg::new(
            1,
            vec![TrackedBody {
                id: "a".into(),
                position: [std::f64::consts::PI, -1.0 / 3.0, 1e-12],
                velocity: [0.0; 3],
            }],
        );
        let s = String::from_utf8(m.encode()).unwrap();
        assert!(s.contains("3.14159265"), "{s}");
        assert!(!s.contains("3.141592653"), "{s}");
        assert_eq!(TrackerMsg::decode(s.as_bytes()).unwrap(), m);
    }

    #[test]
    fn truncated_payload_is_decode_error() {
        let m = DetectionMsg::new(
            5,
            vec![WireDetection {
                class: DetectionClass::Body,
                points: [[1.0, 2.0, 3.0]; 5],
            }],
        );
        let bytes = m.encode();
        for cut in 0..bytes.len() {
            assert!(matches!(
                DetectionMsg::decode(&bytes[..cut]),
                Err(NetError::Decode { .. })
            ));
        }
        // dropping a middle chunk but keeping the terminator
        let mut broken = bytes[..bytes.len() / 2].to_vec();
        broken.push(b'\n');
        match DetectionMsg::decode(&broken) {
            Err(NetError::Decode { offset, .. }) => assert!(offset <= broken.len()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_version_rejected() {
        let s = b"{\"bodies\":[],\"schema_version\":2,\"timestamp_us\":0}\n";
        assert_eq!(TrackerMsg::decode(s), Err(NetError::UnsupportedVersion(2)));
    }

    #[test]
    fn wrong_point_count_rejected() {
        let s = b"{\"detections\":[{\"class\":\"body\",\"points\":[[0,0,0],[0,0,0]]}],\"schema_version\":1,\"timestamp_us\":0}\n";
        assert!(matches!(DetectionMsg::decode(s), Err(NetError::Decode { .. })));
    }

    #[test]
    fn unknown_class_rejected() {
        let s = b"{\"detections\":[{\"class\":\"antenna\",\"points\":[[0,0,0],[0,0,0],[0,0,0],[0,0,0],[0,0,0]]}],\"schema_version\":1,\"timestamp_us\":0}\n";
        assert!(matches!(DetectionMsg::decode(s), Err(NetError::Decode { .. })));
    }

    #[test]
    fn duplicate_tracker_ids_rejected() {
        let s = b"{\"bodies\":[{\"id\":\"a\",\"position\":[0,0,0],\"velocity\":[0,0,0]},{\"id\":\"a\",\"position\":[0,0,0],\"velocity\":[0,0,0]}],\"schema_version\":1,\"timestamp_us\":0}\n";
        assert!(matches!(TrackerMsg::decode(s), Err(NetError::Decode { .. })));
    }

    #[test]
    fn decode_error_offset_points_at_problem() {
        let s = b"{\"seq\":1,\"schema_version\":1,\"chaser_id\":\"a\",\"move\":\"hover\"}\n";
        assert!(matches!(CommandMsg::decode(s), Err(NetError::Decode { .. })));
        let s = b"{\"seq\":1,,}\n";
        match CommandMsg::decode(s) {
            Err(NetError::Decode { offset, .. }) => assert_eq!(offset, 9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn canonicalization_is_idempotent() {
        for x in [1.0 / 7.0, -2.5e-8, 123456789.123, 6.02214076e23, 0.1 + 0.2] {
            let c = canonical_f64(x);
            assert_eq!(canonical_f64(c), c);
            assert!((c - x).abs() <= x.abs() * 1e-8);
        }
    }
}
