//! Row-coverage waypoints and a proportional go-to-goal controller.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::estimation::wrap_angle;
use crate::kinematics::{Pose2D, Twist};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
}

impl Waypoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerParams {
    /// Capture radius, meters.
    pub tolerance: f64,
    pub k_v: f64,
    pub k_omega: f64,
    pub v_max: f64,
    pub omega_max: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            tolerance: 0.2,
            k_v: 0.8,
            k_omega: 2.0,
            v_max: 0.5,
            omega_max: 1.0,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.tolerance, "tolerance"),
            (self.k_v, "k_v"),
            (self.k_omega, "k_omega"),
            (self.v_max, "v_max"),
            (self.omega_max, "omega_max"),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Distance to `w` and heading error towards it. At zero distance the error
/// is defined as 0.
pub fn bearing_distance(p: &Pose2D, w: &Waypoint) -> (f64, f64) {
    let (dx, dy) = (w.x - p.x, w.y - p.y);
    let d = dx.hypot(dy);
    if d < 1e-9 {
        return (d, 0.0);
    }
    (d, wrap_angle(dy.atan2(dx) - p.theta))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavState {
    waypoints: Vec<Waypoint>,
    current_index: usize,
    done: bool,
    params: ControllerParams,
}

impl NavState {
    pub fn new(waypoints: Vec<Waypoint>, params: ControllerParams) -> Result<Self> {
        params.validate()?;
        for w in &waypoints {
            ensure_finite(w.x, "waypoint.x")?;
            ensure_finite(w.y, "waypoint.y")?;
        }
        let done = waypoints.is_empty();
        Ok(Self {
            waypoints,
            current_index: 0,
            done,
            params,
        })
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn current_index(&self) -> usize {
        self.current_index
    }

    pub fn current(&self) -> Option<&Waypoint> {
        self.waypoints.get(self.current_index)
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn params(&self) -> &ControllerParams {
        &self.params
    }

    /// One control tick. Advances at most one waypoint per call.
    pub fn controller_step(&mut self, p: &Pose2D) -> Twist {
        if self.done {
            return Twist::zero();
        }
        let (mut d, mut e_theta) = bearing_distance(p, &self.waypoints[self.current_index]);
        if d < self.params.tolerance {
            self.current_index += 1;
            if self.current_index >= self.waypoints.len() {
                self.done = true;
                return Twist::zero();
            }
            (d, e_theta) = bearing_distance(p, &self.waypoints[self.current_index]);
        }
        let c = &self.params;
        let omega = (c.k_omega * e_theta).clamp(-c.omega_max, c.omega_max);
        let vx = (c.k_v * d).clamp(0.0, c.v_max) * e_theta.cos().max(0.0);
        Twist::new(vx, omega)
    }
}

/// Serpentine coverage: row `i` runs along `heading` (alternating direction),
/// rows are stacked `row_spacing` apart to the left of `heading`.
pub fn generate_row_waypoints(
    rows: usize,
    row_length: f64,
    row_spacing: f64,
    origin: Waypoint,
    heading: f64,
) -> Result<Vec<Waypoint>> {
    if rows == 0 {
        return Err(Error::invalid("rows must be >= 1"));
    }
    if !(row_length > 0.0 && row_length.is_finite()) {
        return Err(Error::invalid("row_length must be > 0"));
    }
    if !(row_spacing > 0.0 && row_spacing.is_finite()) {
        return Err(Error::invalid("row_spacing must be > 0"));
    }
    ensure_finite(heading, "heading")?;
    ensure_finite(origin.x, "origin.x")?;
    ensure_finite(origin.y, "origin.y")?;

    let (s, c) = heading.sin_cos();
    let to_world = |along: f64, across: f64| {
        Waypoint::new(origin.x + along * c - across * s, origin.y + along * s + across * c)
    };
    let mut out = Vec::with_capacity(2 * rows);
    for i in 0..rows {
        let across = i as f64 * row_spacing;
        let (start, end) = if i % 2 == 0 {
            (0.0, row_length)
        } else {
            (row_length, 0.0)
        };
        out.push(to_world(start, across));
        out.push(to_world(end, across));
    }
    Ok(out)
}
