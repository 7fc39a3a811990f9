//! Simulated IMU and GPS.
//!
//! Every noisy channel follows the first-order Gauss-Markov model
//!
//! ```text
//! Y(t) = Y' + B + N_y
//! dB/dt = -B / tau + N_B
//! ```
//!
//! where `Y'` is ground truth, `B` a slowly wandering bias and `N_y`, `N_B`
//! white Gaussian noise. The bias SDE is discretised with Euler-Maruyama.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::estimation::wrap_angle;
use crate::kinematics::{Pose2D, Twist};

/// Mean Earth radius used by the local projection, meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Static noise description of one channel, as found in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseParams {
    /// Initial bias `B(0)`.
    pub bias: f64,
    /// Bias correlation time, seconds.
    pub tau: f64,
    /// Standard deviation of the additive white noise.
    pub sigma_y: f64,
    /// Standard deviation density of the bias driving noise.
    pub sigma_b: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            bias: 0.0,
            tau: 50.0,
            sigma_y: 0.0,
            sigma_b: 0.0,
        }
    }
}

impl NoiseParams {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid("tau must be > 0"));
        }
        if !(self.sigma_y >= 0.0 && self.sigma_y.is_finite()) {
            return Err(Error::invalid("sigma_y must be >= 0"));
        }
        if !(self.sigma_b >= 0.0 && self.sigma_b.is_finite()) {
            return Err(Error::invalid("sigma_b must be >= 0"));
        }
        ensure_finite(self.bias, "bias")
    }
}

/// One noisy sensor channel owning its own random stream.
#[derive(Debug, Clone)]
pub struct NoiseChannel {
    bias: f64,
    tau: f64,
    sigma_y: f64,
    sigma_b: f64,
    rng: ChaCha8Rng,
}

impl NoiseChannel {
    /// Builds a channel drawing from sub-stream `stream` of `seed`. Channels
    /// built from the same seed with different streams are independent.
    pub fn new(params: NoiseParams, seed: u64, stream: u64) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(Self {
            bias: params.bias,
            tau: params.tau,
            sigma_y: params.sigma_y,
            sigma_b: params.sigma_b,
            rng,
        })
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// One Euler-Maruyama step of the bias process.
    pub fn step_bias(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
        }
        let eta: f64 = StandardNormal.sample(&mut self.rng);
        self.bias += dt * (-self.bias / self.tau) + dt.sqrt() * self.sigma_b * eta;
        Ok(())
    }

    /// Measures `truth` through this channel.
    pub fn sample(&mut self, truth: f64) -> f64 {
        let eta: f64 = StandardNormal.sample(&mut self.rng);
        truth + self.bias + self.sigma_y * eta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuReading {
    pub gyro_z: f64,
    /// Magnetometer heading, wrapped to (-pi, pi].
    pub heading_mag: f64,
    pub timestamp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsReading {
    pub lat: f64,
    pub lon: f64,
    pub alt: f64,
    pub timestamp: f64,
}

/// Reference point of the local equirectangular projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeoOrigin {
    pub lat0: f64,
    pub lon0: f64,
    pub earth_radius: f64,
}

impl Default for GeoOrigin {
    fn default() -> Self {
        Self {
            lat0: 0.0,
            lon0: 0.0,
            earth_radius: EARTH_RADIUS_M,
        }
    }
}

impl GeoOrigin {
    pub fn new(lat0: f64, lon0: f64) -> Result<Self> {
        let o = Self {
            lat0,
            lon0,
            earth_radius: EARTH_RADIUS_M,
        };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lat0.abs() < 90.0) {
            return Err(Error::invalid("lat0 must be within (-90, 90)"));
        }
        if !(self.lon0.abs() <= 180.0) {
            return Err(Error::invalid("lon0 must be within [-180, 180]"));
        }
        if !(self.earth_radius > 0.0 && self.earth_radius.is_finite()) {
            return Err(Error::invalid("earth_radius must be > 0"));
        }
        Ok(())
    }

    fn meters_per_degree(&self) -> f64 {
        self.earth_radius * std::f64::consts::PI / 180.0
    }

    /// Local XY meters to (lat, lon) degrees.
    pub fn to_geodetic(&self, x: f64, y: f64) -> (f64, f64) {
        let m = self.meters_per_degree();
        let lat = self.lat0 + y / m;
        let lon = self.lon0 + x / (m * self.lat0.to_radians().cos());
        (lat, lon)
    }

    /// (lat, lon) degrees to local XY meters.
    pub fn to_local(&self, lat: f64, lon: f64) -> (f64, f64) {
        let m = self.meters_per_degree();
        let x = m * (lon - self.lon0) * self.lat0.to_radians().cos();
        let y = m * (lat - self.lat0);
        (x, y)
    }
}

pub fn gps_to_local_xy(g: &GpsReading, origin: &GeoOrigin) -> (f64, f64) {
    origin.to_local(g.lat, g.lon)
}

/// Reads gyro and magnetometer from ground truth. The channels must already
/// be stepped to time `t`.
pub fn simulate_imu(
    pose: &Pose2D,
    twist: &Twist,
    gyro: &mut NoiseChannel,
    mag: &mut NoiseChannel,
    t: f64,
) -> ImuReading {
    ImuReading {
        gyro_z: gyro.sample(twist.omega),
        heading_mag: wrap_angle(mag.sample(pose.theta)),
        timestamp: t,
    }
}

/// Noise is added in the local frame (meters) and then projected.
pub fn simulate_gps(
    pose: &Pose2D,
    origin: &GeoOrigin,
    x_ch: &mut NoiseChannel,
    y_ch: &mut NoiseChannel,
    t: f64,
) -> GpsReading {
    let x = x_ch.sample(pose.x);
    let y = y_ch.sample(pose.y);
    let (lat, lon) = origin.to_geodetic(x, y);
    GpsReading {
        lat: lat.clamp(-90.0, 90.0),
        lon,
        alt: 0.0,
        timestamp: t,
    }
}
