//! Heading filters and pose fusion.

mod filters;
mod kalman;
mod median;
mod position;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{Pose2D, Twist};

pub use filters::{
    filter_registry, FilterParams, FilterRegistry, HeadingFilter, KalmanFilter, MovingMedian,
    Passthrough,
};
pub use kalman::Kalman1D;
pub use median::MedianFilter;
pub use position::PositionKalman;

/// Wraps an angle to the half-open interval (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    if !a.is_finite() {
        return a;
    }
    let mut r = a % TAU;
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusedPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub timestamp: f64,
}

impl FusedPose {
    pub fn pose(&self) -> Pose2D {
        Pose2D::new(self.x, self.y, self.theta)
    }
}

/// Position from the latest GPS fix, heading from one filter update with
/// the magnetometer sample.
pub fn fuse_pose(
    gps_xy: Option<(f64, f64)>,
    heading_filter: &mut dyn HeadingFilter,
    mag: f64,
    t: f64,
) -> Result<FusedPose> {
    let (x, y) = gps_xy.ok_or(Error::NoPositionReference)?;
    let theta = wrap_angle(heading_filter.update(mag));
    Ok(FusedPose {
        x,
        y,
        theta,
        timestamp: t,
    })
}

/// Stateful fusion used by the sim loop, where GPS and magnetometer arrive
/// at different rates. Position is the latest fix unless a
/// [`PositionKalman`] is attached.
pub struct PoseFuser {
    gps_xy: Option<(f64, f64)>,
    heading: Box<dyn HeadingFilter>,
    heading_estimate: Option<f64>,
    position: Option<PositionKalman>,
}

impl PoseFuser {
    pub fn new(heading: Box<dyn HeadingFilter>) -> Self {
        Self {
            gps_xy: None,
            heading,
            heading_estimate: None,
            position: None,
        }
    }

    pub fn with_position_filter(mut self, position: PositionKalman) -> Self {
        self.position = Some(position);
        self
    }

    pub fn on_gps(&mut self, xy: (f64, f64)) {
        self.gps_xy = Some(xy);
        if let Some(p) = self.position.as_mut() {
            p.update(xy);
        }
    }

    /// Dead-reckons the position filter over `dt` with the applied twist.
    /// No-op without a position filter or before the first heading.
    pub fn on_odometry(&mut self, twist: &Twist, dt: f64) -> Result<()> {
        match (self.position.as_mut(), self.heading_estimate) {
            (Some(p), Some(theta)) => p.predict(theta, twist, dt),
            _ => Ok(()),
        }
    }

    pub fn on_heading(&mut self, mag: f64) -> f64 {
        let h = wrap_angle(self.heading.update(mag));
        self.heading_estimate = Some(h);
        h
    }

    pub fn gps_xy(&self) -> Option<(f64, f64)> {
        self.gps_xy
    }

    pub fn heading(&self) -> Option<f64> {
        self.heading_estimate
    }

    pub fn filter_name(&self) -> &'static str {
        self.heading.name()
    }

    pub fn pose(&self, t: f64) -> Result<FusedPose> {
        let xy = match &self.position {
            Some(p) => p.estimate(),
            None => self.gps_xy,
        };
        let (x, y) = xy.ok_or(Error::NoPositionReference)?;
        let theta = self
            .heading_estimate
            .ok_or(Error::Empty("no heading sample"))?;
        Ok(FusedPose {
            x,
            y,
            theta,
            timestamp: t,
        })
    }
}
