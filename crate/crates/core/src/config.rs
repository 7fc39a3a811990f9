//! World configuration (JSON).
//!
//! Only `seed` and `field` are required; every other section falls back to
//! defaults. Unknown keys are rejected so typos do not silently vanish.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::FilterParams;
use crate::kinematics::RobotGeometry;
use crate::navigation::{ControllerParams, Waypoint};
use crate::sensors::{GeoOrigin, NoiseParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldConfig {
    pub seed: u64,
    pub field: FieldConfig,
    #[serde(default)]
    pub robot: RobotConfig,
    #[serde(default)]
    pub sensors: SensorsConfig,
    #[serde(default)]
    pub filters: FiltersConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub camera: CameraConfig,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub teleop: TeleopConfig,
    #[serde(default)]
    pub telemetry: TelemetryConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub rows: usize,
    pub row_length: f64,
    pub row_spacing: f64,
    #[serde(default)]
    pub origin: Waypoint,
    #[serde(default)]
    pub heading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotConfig {
    pub wheel_radius: f64,
    pub track_width: f64,
    pub v_max: f64,
    pub omega_max: f64,
    pub k_v: f64,
    pub k_omega: f64,
    pub tolerance: f64,
}

impl Default for RobotConfig {
    fn default() -> Self {
        let g = RobotGeometry::default();
        let c = ControllerParams::default();
        Self {
            wheel_radius: g.wheel_radius,
            track_width: g.track_width,
            v_max: c.v_max,
            omega_max: c.omega_max,
            k_v: c.k_v,
            k_omega: c.k_omega,
            tolerance: c.tolerance,
        }
    }
}

impl RobotConfig {
    pub fn geometry(&self) -> RobotGeometry {
        RobotGeometry {
            wheel_radius: self.wheel_radius,
            track_width: self.track_width,
        }
    }

    pub fn controller(&self) -> ControllerParams {
        ControllerParams {
            tolerance: self.tolerance,
            k_v: self.k_v,
            k_omega: self.k_omega,
            v_max: self.v_max,
            omega_max: self.omega_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorChannelConfig {
    #[serde(default)]
    pub noise: NoiseParams,
    pub rate_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorsConfig {
    pub gyro: SensorChannelConfig,
    pub mag: SensorChannelConfig,
    pub gps: SensorChannelConfig,
    pub geo_origin: GeoOrigin,
}

impl Default for SensorsConfig {
    fn default() -> Self {
        Self {
            gyro: SensorChannelConfig {
                noise: NoiseParams {
                    bias: 0.0,
                    tau: 50.0,
                    sigma_y: 0.01,
                    sigma_b: 0.001,
                },
                rate_hz: 50.0,
            },
            mag: SensorChannelConfig {
                noise: NoiseParams {
                    bias: 0.0,
                    tau: 50.0,
                    sigma_y: 0.05,
                    sigma_b: 0.002,
                },
                rate_hz: 20.0,
            },
            gps: SensorChannelConfig {
                noise: NoiseParams {
                    bias: 0.0,
                    tau: 50.0,
                    sigma_y: 0.5,
                    sigma_b: 0.01,
                },
                rate_hz: 5.0,
            },
            geo_origin: GeoOrigin::default(),
        }
    }
}

impl SensorsConfig {
    /// Same rates, every channel noise-free.
    pub fn noiseless() -> Self {
        let mut s = Self::default();
        for ch in [&mut s.gyro, &mut s.mag, &mut s.gps] {
            ch.noise = NoiseParams::noiseless();
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiltersConfig {
    /// Registry name of the filter whose output drives navigation.
    pub heading: String,
    pub median_window: usize,
    pub kalman_q: f64,
    pub kalman_r: f64,
    pub position: PositionMode,
    /// Position process noise, m^2/s.
    pub position_q: f64,
    /// Position measurement variance, m^2.
    pub position_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositionMode {
    /// Latest GPS fix as is.
    Raw,
    /// Odometry prediction with per-axis Kalman correction on each fix.
    #[default]
    Kalman,
}

impl Default for FiltersConfig {
    fn default() -> Self {
        let p = FilterParams::default();
        Self {
            heading: "kalman".to_owned(),
            median_window: p.median_window,
            kalman_q: p.kalman_q,
            kalman_r: p.kalman_r,
            position: PositionMode::Kalman,
            position_q: 0.01,
            position_r: 0.25,
        }
    }
}

impl FiltersConfig {
    pub fn params(&self) -> FilterParams {
        FilterParams {
            median_window: self.median_window,
            kalman_q: self.kalman_q,
            kalman_r: self.kalman_r,
            angular: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt: f64,
    /// Seconds of simulated time.
    pub duration: f64,
    /// End the run early once the route is finished (auto mode).
    pub stop_when_done: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            duration: 600.0,
            stop_when_done: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
pub enum CameraSource {
    Synthetic {
        #[serde(default = "default_cam_width")]
        width: usize,
        #[serde(default = "default_cam_height")]
        height: usize,
        #[serde(default = "default_weed_fraction")]
        weed_fraction: f64,
    },
    Directory {
        path: PathBuf,
    },
}

fn default_cam_width() -> usize {
    64
}

fn default_cam_height() -> usize {
    48
}

fn default_weed_fraction() -> f64 {
    0.02
}

impl Default for CameraSource {
    fn default() -> Self {
        CameraSource::Synthetic {
            width: default_cam_width(),
            height: default_cam_height(),
            weed_fraction: default_weed_fraction(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraConfig {
    pub enabled: bool,
    /// Seconds between frames.
    pub interval: f64,
    pub source: CameraSource,
    /// Registry name of the segmenter (`segnet` or `otsu`).
    pub segmenter: String,
    /// Checkpoint for the `segnet` segmenter.
    pub checkpoint: Option<PathBuf>,
    /// Per-component Gaussian pixel noise (8-bit units).
    pub pixel_noise: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            interval: 1.0,
            source: CameraSource::default(),
            segmenter: "otsu".to_owned(),
            checkpoint: None,
            pixel_noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Auto,
    Teleop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TeleopConfig {
    /// Teleop commands fall back to zero after this many seconds of silence.
    pub deadman: f64,
}

impl Default for TeleopConfig {
    fn default() -> Self {
        Self { deadman: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TelemetryConfig {
    pub rate_hz: f64,
    pub include_mask_png: bool,
}

impl Default for TelemetryConfig {
    fn default() -> Self {
        Self {
            rate_hz: 10.0,
            include_mask_png: false,
        }
    }
}

fn positive(v: f64, field: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{field} must be > 0")))
    }
}

fn non_negative(v: f64, field: &str) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{field} must be >= 0")))
    }
}

impl WorldConfig {
    /// Config with every optional section at its default.
    pub fn minimal(seed: u64, field: FieldConfig) -> Self {
        Self {
            seed,
            field,
            robot: RobotConfig::default(),
            sensors: SensorsConfig::default(),
            filters: FiltersConfig::default(),
            sim: SimConfig::default(),
            camera: CameraConfig::default(),
            mode: Mode::default(),
            teleop: TeleopConfig::default(),
            telemetry: TelemetryConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.field;
        if f.rows == 0 {
            return Err(Error::Config("field.rows must be >= 1".into()));
        }
        positive(f.row_length, "field.row_length")?;
        positive(f.row_spacing, "field.row_spacing")?;
        if !(f.heading.is_finite() && f.origin.x.is_finite() && f.origin.y.is_finite()) {
            return Err(Error::Config("field.origin and field.heading must be finite".into()));
        }

        let r = &self.robot;
        positive(r.wheel_radius, "robot.wheel_radius")?;
        positive(r.track_width, "robot.track_width")?;
        positive(r.v_max, "robot.v_max")?;
        positive(r.omega_max, "robot.omega_max")?;
        positive(r.k_v, "robot.k_v")?;
        positive(r.k_omega, "robot.k_omega")?;
        positive(r.tolerance, "robot.tolerance")?;

        let s = &self.sim;
        positive(s.dt, "sim.dt")?;
        non_negative(s.duration, "sim.duration")?;

        for (ch, name) in [
            (&self.sensors.gyro, "sensors.gyro"),
            (&self.sensors.mag, "sensors.mag"),
            (&self.sensors.gps, "sensors.gps"),
        ] {
            positive(ch.rate_hz, &format!("{name}.rate_hz"))?;
            if ch.rate_hz > 1.0 / s.dt + 1e-9 {
                return Err(Error::Config(format!(
                    "{name}.rate_hz must be <= 1/sim.dt ({})",
                    1.0 / s.dt
                )));
            }
            ch.noise
                .validate()
                .map_err(|e| Error::Config(format!("{name}.noise: {e}")))?;
        }
        self.sensors
            .geo_origin
            .validate()
            .map_err(|e| Error::Config(format!("sensors.geo_origin: {e}")))?;

        let fl = &self.filters;
        if fl.median_window == 0 {
            return Err(Error::Config("filters.median_window must be >= 1".into()));
        }
        non_negative(fl.kalman_q, "filters.kalman_q")?;
        positive(fl.kalman_r, "filters.kalman_r")?;
        non_negative(fl.position_q, "filters.position_q")?;
        positive(fl.position_r, "filters.position_r")?;

        positive(self.camera.interval, "camera.interval")?;
        non_negative(self.camera.pixel_noise, "camera.pixel_noise")?;
        if let CameraSource::Synthetic {
            width,
            height,
            weed_fraction,
        } = self.camera.source
        {
            if width == 0 || height == 0 || width % 4 != 0 || height % 4 != 0 {
                return Err(Error::Config(
                    "camera.source width and height must be non-zero multiples of 4".into(),
                ));
            }
            if !(0.0..0.5).contains(&weed_fraction) {
                return Err(Error::Config("camera.source.weed_fraction must be in [0, 0.5)".into()));
            }
        }
        non_negative(self.teleop.deadman, "teleop.deadman")?;
        positive(self.telemetry.rate_hz, "telemetry.rate_hz")?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: WorldConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn load_config(path: &Path) -> Result<WorldConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    WorldConfig::from_json(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
