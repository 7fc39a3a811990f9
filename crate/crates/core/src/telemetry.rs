//! Wire format of the live telemetry / teleop channel.

use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::config::Mode;
use crate::kinematics::Twist;
use crate::pipeline::{ClassFractions, FrameResult};
use crate::sim::TickRecord;
use crate::vision::mask_png_bytes;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseMsg {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XyMsg {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadingMsg {
    pub raw: f64,
    pub filtered: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CmdMsg {
    pub vx: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavMsg {
    pub waypoint_index: usize,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegMsg {
    pub frame: usize,
    pub fractions: ClassFractions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask_png_base64: Option<String>,
}

/// Server-to-client state frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateFrame {
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub tick: u64,
    pub t: f64,
    pub mode: Mode,
    pub truth: PoseMsg,
    pub fused: PoseMsg,
    pub gps: XyMsg,
    pub heading: HeadingMsg,
    pub cmd: CmdMsg,
    pub nav: NavMsg,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seg: Option<SegMsg>,
}

impl StateFrame {
    pub fn new(r: &TickRecord, seg: Option<&FrameResult>, include_mask: bool) -> Self {
        let pose = |p: crate::kinematics::Pose2D| PoseMsg {
            x: p.x,
            y: p.y,
            theta: p.theta,
        };
        Self {
            kind: "state",
            tick: r.tick,
            t: r.t,
            mode: r.mode,
            truth: pose(r.truth),
            fused: pose(r.fused),
            gps: XyMsg {
                x: r.gps_xy.0,
                y: r.gps_xy.1,
            },
            heading: HeadingMsg {
                raw: r.heading_raw,
                filtered: r.heading_filtered,
            },
            cmd: CmdMsg {
                vx: r.cmd.vx,
                omega: r.cmd.omega,
            },
            nav: NavMsg {
                waypoint_index: r.waypoint_index,
                done: r.done,
            },
            seg: seg.map(|f| SegMsg {
                frame: f.index,
                fractions: f.fractions,
                mask_png_base64: include_mask
                    .then(|| base64::engine::general_purpose::STANDARD.encode(mask_png_bytes(&f.mask))),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state frame serializes")
    }
}

/// Client-to-server commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ClientMessage {
    Twist { vx: f64, omega: f64 },
    Mode { value: Mode },
}

impl ClientMessage {
    pub fn twist(&self) -> Option<Twist> {
        match *self {
            ClientMessage::Twist { vx, omega } => Some(Twist::new(vx, omega)),
            ClientMessage::Mode { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ServerMessage {
    Error { reason: String },
}

/// Parses one client text message. The error is the reason string sent
/// back to the client.
pub fn parse_client_message(text: &str) -> Result<ClientMessage, String> {
    let msg: ClientMessage = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if let ClientMessage::Twist { vx, omega } = msg {
        if !(vx.is_finite() && omega.is_finite()) {
            return Err("twist components must be finite".into());
        }
    }
    Ok(msg)
}

pub fn error_reply(reason: impl Into<String>) -> String {
    serde_json::to_string(&ServerMessage::Error { reason: reason.into() }).expect("error serializes")
}
