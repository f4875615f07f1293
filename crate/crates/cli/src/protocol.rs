//! Wire format: JSON text frames for commands and replies, binary frames for
//! simulation output.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const FRAME_MAGIC: u32 = 0x4D4E_4341;
pub const FRAME_HEADER_BYTES: usize = 20;

pub const COMMANDS: [&str; 14] = [
    "hello",
    "set_model",
    "set_graft_model",
    "set_mesh",
    "set_subdivision",
    "play",
    "pause",
    "reset",
    "set_speed",
    "set_orientation",
    "set_vis_mode",
    "brush",
    "query_state",
    "screenshot_request",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Command {
    #[serde(default)]
    pub id: Value,
    pub cmd: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Reply {
    /// Sent once when a session opens.
    Hello { models: Vec<ModelInfo>, meshes: Vec<String> },
    Ack { id: Value, cmd: String, result: Value },
    Error { id: Value, message: String },
}

impl Reply {
    pub fn id(&self) -> Option<&Value> {
        match self {
            Reply::Hello { .. } => None,
            Reply::Ack { id, .. } | Reply::Error { id, .. } => Some(id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub name: String,
    pub lineage_id: String,
    pub parent_id: Option<String>,
    pub layout: String,
    pub channels: usize,
}

/// One binary frame of per-vertex output.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMessage {
    pub step_counter: u32,
    pub steps_per_sec: f32,
    pub cells: u32,
    pub channel_count: u32,
    pub payload: Vec<f32>,
}

impl FrameMessage {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FRAME_HEADER_BYTES + 4 * self.payload.len());
        out.extend_from_slice(&FRAME_MAGIC.to_le_bytes());
        out.extend_from_slice(&self.step_counter.to_le_bytes());
        out.extend_from_slice(&self.steps_per_sec.to_le_bytes());
        out.extend_from_slice(&self.cells.to_le_bytes());
        out.extend_from_slice(&self.channel_count.to_le_bytes());
        for v in &self.payload {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, String> {
        if bytes.len() < FRAME_HEADER_BYTES {
            return Err(format!("frame of {} bytes is shorter than its header", bytes.len()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        if word(0) != FRAME_MAGIC {
            return Err(format!("bad frame magic {:#x}", word(0)));
        }
        let (cells, channel_count) = (word(12), word(16));
        let body = &bytes[FRAME_HEADER_BYTES..];
        if body.len() != 4 * cells as usize * channel_count as usize {
            return Err(format!("payload of {} bytes for {cells}x{channel_count}", body.len()));
        }
        Ok(FrameMessage {
            step_counter: word(4),
            steps_per_sec: f32::from_bits(word(8)),
            cells,
            channel_count,
            payload: body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_round_trip() {
        let f = FrameMessage {
            step_counter: 7,
            steps_per_sec: 31.5,
            cells: 2,
            channel_count: 3,
            payload: vec![0.0, 0.5, 1.0, -1.0, 2.0, 3.25],
        };
        let bytes = f.encode();
        assert_eq!(&bytes[..4], &[0x41, 0x43, 0x4E, 0x4D]);
        assert_eq!(bytes.len(), 20 + 24);
        assert_eq!(FrameMessage::decode(&bytes).unwrap(), f);
        assert!(FrameMessage::decode(&bytes[..30]).is_err());
    }

    #[test]
    fn command_json() {
        let c: Command = serde_json::from_str(r#"{"id": 3, "cmd": "play"}"#).unwrap();
        assert_eq!(c.id, 3);
        assert!(c.params.is_null());
        let r = Reply::Error { id: "x".into(), message: "m".into() };
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["type"], "error");
        assert_eq!(v["id"], "x");
    }
}
