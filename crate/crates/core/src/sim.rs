//! Fixed-step simulation loop.
//!
//! Per tick: dead-reckon the position estimate, step sensor biases, sample whichever sensors are due, update
//! heading filters and fusion, pick a command (controller or teleop), run
//! the camera if due, record, then integrate truth over `dt`.

use serde::{Deserialize, Serialize};

use crate::config::{Mode, PositionMode, WorldConfig};
use crate::error::Result;
use crate::estimation::{filter_registry, HeadingFilter, PoseFuser, PositionKalman};
use crate::kinematics::{integrate_pose, twist_to_wheel_speeds, Pose2D, RobotGeometry, Twist, WheelSpeeds};
use crate::navigation::{generate_row_waypoints, ControllerParams, NavState, Waypoint};
use crate::pipeline::{ClassFractions, FrameResult, SegmentationPipeline};
use crate::segnet::SegNetParams;
use crate::sensors::{gps_to_local_xy, simulate_gps, simulate_imu, GeoOrigin, NoiseChannel};

const GYRO_STREAM: u64 = 1;
const MAG_STREAM: u64 = 2;
const GPS_X_STREAM: u64 = 3;
const GPS_Y_STREAM: u64 = 4;

/// Everything logged for one tick. Sensor values are the latest sample,
/// held between sample instants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    pub t: f64,
    pub mode: Mode,
    pub truth: Pose2D,
    pub fused: Pose2D,
    pub gps_xy: (f64, f64),
    pub gyro_z: f64,
    pub heading_raw: f64,
    /// Output of the configured heading filter, the one fused into the pose.
    pub heading_filtered: f64,
    pub heading_median: f64,
    pub heading_kalman: f64,
    pub cmd: Twist,
    pub wheels: WheelSpeeds,
    pub waypoint_index: usize,
    pub done: bool,
    /// Camera frame processed on this tick.
    pub seg: Option<SegSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegSample {
    pub frame: usize,
    pub fractions: ClassFractions,
}

/// Tick index `k` samples a `rate_hz` sensor when the count of elapsed
/// periods changes. Tick 0 always samples.
fn due(k: u64, dt: f64, rate_hz: f64) -> bool {
    if k == 0 {
        return true;
    }
    let periods = |k: u64| (k as f64 * dt * rate_hz + 1e-9).floor();
    periods(k) != periods(k - 1)
}

fn tick_count(duration: f64, dt: f64) -> u64 {
    (duration / dt + 1e-9).floor() as u64
}

pub struct Simulation {
    cfg: WorldConfig,
    geometry: RobotGeometry,
    limits: ControllerParams,
    origin: GeoOrigin,
    truth: Pose2D,
    cmd: Twist,
    gyro: NoiseChannel,
    mag: NoiseChannel,
    gps_x: NoiseChannel,
    gps_y: NoiseChannel,
    fuser: PoseFuser,
    median: Box<dyn HeadingFilter>,
    kalman: Box<dyn HeadingFilter>,
    nav: NavState,
    mode: Mode,
    teleop: Twist,
    teleop_at: Option<f64>,
    tick: u64,
    gyro_z: f64,
    heading_raw: f64,
    heading_median: f64,
    heading_kalman: f64,
    camera: Option<SegmentationPipeline>,
    camera_every: u64,
    last_frame: Option<FrameResult>,
}

impl Simulation {
    pub fn new(cfg: &WorldConfig) -> Result<Self> {
        Self::with_segnet(cfg, None)
    }

    /// Like [`Simulation::new`] with in-memory network parameters for the
    /// camera, instead of `camera.checkpoint`.
    pub fn with_segnet(cfg: &WorldConfig, params: Option<SegNetParams>) -> Result<Self> {
        cfg.validate()?;
        let f = &cfg.field;
        let waypoints = generate_row_waypoints(f.rows, f.row_length, f.row_spacing, f.origin, f.heading)?;
        let limits = cfg.robot.controller();
        let nav = NavState::new(waypoints, limits)?;

        let reg = filter_registry();
        let fp = cfg.filters.params();
        let mut fuser = PoseFuser::new(reg.create(&cfg.filters.heading, &fp)?);
        if cfg.filters.position == PositionMode::Kalman {
            fuser = fuser.with_position_filter(PositionKalman::new(cfg.filters.position_q, cfg.filters.position_r)?);
        }
        let median = reg.create("median", &fp)?;
        let kalman = reg.create("kalman", &fp)?;

        let s = &cfg.sensors;
        let camera = if cfg.camera.enabled {
            Some(SegmentationPipeline::from_config(&cfg.camera, cfg.seed, params)?)
        } else {
            None
        };
        let camera_every = ((cfg.camera.interval / cfg.sim.dt).round() as u64).max(1);

        Ok(Self {
            geometry: cfg.robot.geometry(),
            limits,
            origin: s.geo_origin,
            truth: Pose2D::new(f.origin.x, f.origin.y, f.heading),
            cmd: Twist::zero(),
            gyro: NoiseChannel::new(s.gyro.noise, cfg.seed, GYRO_STREAM)?,
            mag: NoiseChannel::new(s.mag.noise, cfg.seed, MAG_STREAM)?,
            gps_x: NoiseChannel::new(s.gps.noise, cfg.seed, GPS_X_STREAM)?,
            gps_y: NoiseChannel::new(s.gps.noise, cfg.seed, GPS_Y_STREAM)?,
            fuser,
            median,
            kalman,
            nav,
            mode: cfg.mode,
            teleop: Twist::zero(),
            teleop_at: None,
            tick: 0,
            gyro_z: 0.0,
            heading_raw: 0.0,
            heading_median: 0.0,
            heading_kalman: 0.0,
            camera,
            camera_every,
            last_frame: None,
            cfg: cfg.clone(),
        })
    }

    pub fn config(&self) -> &WorldConfig {
        &self.cfg
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    /// Simulated time of the next tick.
    pub fn time(&self) -> f64 {
        self.tick as f64 * self.cfg.sim.dt
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn truth(&self) -> Pose2D {
        self.truth
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        self.nav.waypoints()
    }

    pub fn is_done(&self) -> bool {
        self.nav.is_done()
    }

    pub fn last_frame(&self) -> Option<&FrameResult> {
        self.last_frame.as_ref()
    }

    pub fn camera_exhausted(&self) -> bool {
        self.camera.as_ref().is_some_and(|c| c.is_exhausted())
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    /// Latest teleop command, clamped to the robot limits. It stays in
    /// force until replaced or until the dead-man timeout runs out.
    pub fn set_teleop(&mut self, twist: Twist) {
        self.teleop = twist.clamped(self.limits.v_max, self.limits.omega_max);
        self.teleop_at = Some(self.time());
    }

    fn teleop_command(&self, t: f64) -> Twist {
        match self.teleop_at {
            Some(at) if t - at <= self.cfg.teleop.deadman + 1e-9 => self.teleop,
            _ => Twist::zero(),
        }
    }

    pub fn step(&mut self) -> Result<TickRecord> {
        let k = self.tick;
        let dt = self.cfg.sim.dt;
        let t = self.time();
        let rates = (
            self.cfg.sensors.gyro.rate_hz,
            self.cfg.sensors.mag.rate_hz,
            self.cfg.sensors.gps.rate_hz,
        );

        if k > 0 {
            self.fuser.on_odometry(&self.cmd, dt)?;
            for ch in [&mut self.gyro, &mut self.mag, &mut self.gps_x, &mut self.gps_y] {
                ch.step_bias(dt)?;
            }
        }

        if due(k, dt, rates.0) || due(k, dt, rates.1) {
            let imu = simulate_imu(&self.truth, &self.cmd, &mut self.gyro, &mut self.mag, t);
            if due(k, dt, rates.0) {
                self.gyro_z = imu.gyro_z;
            }
            if due(k, dt, rates.1) {
                self.heading_raw = imu.heading_mag;
                self.fuser.on_heading(imu.heading_mag);
                self.heading_median = self.median.update(imu.heading_mag);
                self.heading_kalman = self.kalman.update(imu.heading_mag);
            }
        }
        if due(k, dt, rates.2) {
            let fix = simulate_gps(&self.truth, &self.origin, &mut self.gps_x, &mut self.gps_y, t);
            self.fuser.on_gps(gps_to_local_xy(&fix, &self.origin));
        }

        let fused = self.fuser.pose(t)?.pose();
        let cmd = match self.mode {
            Mode::Auto => self.nav.controller_step(&fused),
            Mode::Teleop => self.teleop_command(t),
        };
        self.cmd = cmd;
        let wheels = twist_to_wheel_speeds(&cmd, &self.geometry)?;

        let mut seg = None;
        if let Some(cam) = self.camera.as_mut() {
            if k % self.camera_every == 0 {
                if let Some(frame) = cam.process_next()? {
                    seg = Some(SegSample {
                        frame: frame.index,
                        fractions: frame.fractions,
                    });
                    self.last_frame = Some(frame);
                }
            }
        }

        let record = TickRecord {
            tick: k,
            t,
            mode: self.mode,
            truth: self.truth,
            fused,
            gps_xy: self.fuser.gps_xy().expect("gps sampled on tick 0"),
            gyro_z: self.gyro_z,
            heading_raw: self.heading_raw,
            heading_filtered: fused.theta,
            heading_median: self.heading_median,
            heading_kalman: self.heading_kalman,
            cmd,
            wheels,
            waypoint_index: self.nav.current_index(),
            done: self.nav.is_done(),
            seg,
        };

        self.truth = integrate_pose(&self.truth, &cmd, dt)?;
        self.tick += 1;
        Ok(record)
    }
}

/// Runs for `sim.duration`, or until the route is done when
/// `sim.stop_when_done` is set and the robot drives itself.
pub fn run_simulation(cfg: &WorldConfig) -> Result<Vec<TickRecord>> {
    let mut sim = Simulation::new(cfg)?;
    run_to_end(&mut sim)
}

pub fn run_to_end(sim: &mut Simulation) -> Result<Vec<TickRecord>> {
    let n = tick_count(sim.cfg.sim.duration, sim.cfg.sim.dt);
    let mut out = Vec::with_capacity(n.min(1 << 20) as usize);
    while sim.tick < n {
        let rec = sim.step()?;
        let stop = rec.done && rec.mode == Mode::Auto && sim.cfg.sim.stop_when_done;
        out.push(rec);
        if stop {
            break;
        }
    }
    Ok(out)
}
