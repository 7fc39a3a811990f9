//! Skid-steer locomotion model.
//!
//! Each side's front and rear wheels are driven at the same speed, so the
//! platform behaves like a differential drive: forward speed and yaw rate
//! are commanded, lateral velocity only appears through slip and is never
//! commanded.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::estimation::wrap_angle;

/// Below this yaw rate the pose update uses the straight-line limit.
const STRAIGHT_LINE_OMEGA: f64 = 1e-9;

/// Tolerance for the left/right wheel pairs to count as locked together.
const SIDE_PAIR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    /// Heading in (-pi, pi].
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }
}

/// Body-frame velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist {
    /// Forward speed, m/s.
    pub vx: f64,
    /// Lateral speed, m/s. Always 0 for commands.
    pub vy: f64,
    /// Yaw rate, rad/s.
    pub omega: f64,
}

impl Twist {
    pub fn new(vx: f64, omega: f64) -> Self {
        Self { vx, vy: 0.0, omega }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Symmetric clamp to the platform limits. Non-finite components become 0.
    pub fn clamped(self, v_max: f64, omega_max: f64) -> Self {
        let clamp = |v: f64, lim: f64| if v.is_finite() { v.clamp(-lim, lim) } else { 0.0 };
        Self {
            vx: clamp(self.vx, v_max),
            vy: 0.0,
            omega: clamp(self.omega, omega_max),
        }
    }
}

/// Wheel angular speeds in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WheelSpeeds {
    pub front_left: f64,
    pub rear_left: f64,
    pub front_right: f64,
    pub rear_right: f64,
}

impl WheelSpeeds {
    pub fn from_sides(left: f64, right: f64) -> Self {
        Self {
            front_left: left,
            rear_left: left,
            front_right: right,
            rear_right: right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotGeometry {
    pub wheel_radius: f64,
    pub track_width: f64,
}

impl RobotGeometry {
    pub fn new(wheel_radius: f64, track_width: f64) -> Result<Self> {
        let g = Self {
            wheel_radius,
            track_width,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wheel_radius > 0.0 && self.wheel_radius.is_finite()) {
            return Err(Error::invalid("wheel_radius must be > 0"));
        }
        if !(self.track_width > 0.0 && self.track_width.is_finite()) {
            return Err(Error::invalid("track_width must be > 0"));
        }
        Ok(())
    }
}

impl Default for RobotGeometry {
    fn default() -> Self {
        Self {
            wheel_radius: 0.1,
            track_width: 0.6,
        }
    }
}

/// Inverse kinematics: body twist to per-wheel speeds. `vy` is ignored.
pub fn twist_to_wheel_speeds(t: &Twist, g: &RobotGeometry) -> Result<WheelSpeeds> {
    g.validate()?;
    ensure_finite(t.vx, "twist.vx")?;
    ensure_finite(t.omega, "twist.omega")?;
    let half_track = 0.5 * g.track_width;
    let left = (t.vx - t.omega * half_track) / g.wheel_radius;
    let right = (t.vx + t.omega * half_track) / g.wheel_radius;
    Ok(WheelSpeeds::from_sides(left, right))
}

/// Forward kinematics. Fails if a side's front and rear wheels disagree.
pub fn wheel_speeds_to_twist(w: &WheelSpeeds, g: &RobotGeometry) -> Result<Twist> {
    g.validate()?;
    for (v, name) in [
        (w.front_left, "front_left"),
        (w.rear_left, "rear_left"),
        (w.front_right, "front_right"),
        (w.rear_right, "rear_right"),
    ] {
        ensure_finite(v, name)?;
    }
    if (w.front_left - w.rear_left).abs() > SIDE_PAIR_TOLERANCE {
        return Err(Error::InconsistentWheels(format!(
            "left pair {} vs {}",
            w.front_left, w.rear_left
        )));
    }
    if (w.front_right - w.rear_right).abs() > SIDE_PAIR_TOLERANCE {
        return Err(Error::InconsistentWheels(format!(
            "right pair {} vs {}",
            w.front_right, w.rear_right
        )));
    }
    let left = 0.5 * (w.front_left + w.rear_left);
    let right = 0.5 * (w.front_right + w.rear_right);
    Ok(Twist {
        vx: g.wheel_radius * (left + right) / 2.0,
        vy: 0.0,
        omega: g.wheel_radius * (right - left) / g.track_width,
    })
}

/// Advances `p` by holding `t` for `dt` seconds along the exact unicycle arc.
pub fn integrate_pose(p: &Pose2D, t: &Twist, dt: f64) -> Result<Pose2D> {
    ensure_finite(p.x, "pose.x")?;
    ensure_finite(p.y, "pose.y")?;
    ensure_finite(p.theta, "pose.theta")?;
    ensure_finite(t.vx, "twist.vx")?;
    ensure_finite(t.omega, "twist.omega")?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
    }

    let (vx, omega, theta) = (t.vx, t.omega, p.theta);
    if omega.abs() < STRAIGHT_LINE_OMEGA {
        return Ok(Pose2D::new(
            p.x + vx * theta.cos() * dt,
            p.y + vx * theta.sin() * dt,
            theta + omega * dt,
        ));
    }
    let theta_end = theta + omega * dt;
    let radius = vx / omega;
    Ok(Pose2D::new(
        p.x + radius * (theta_end.sin() - theta.sin()),
        p.y + radius * (theta.cos() - theta_end.cos()),
        theta_end,
    ))
}
