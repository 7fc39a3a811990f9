//! Desk-scale workbench for a small skid-steer agriculture robot.
//!
//! The crate covers the whole robot loop without any middleware: a kinematic
//! model with exact arc integration, IMU/GPS simulation with first-order
//! Gauss-Markov bias, heading filters, boustrophedon row navigation, a
//! 10-channel vegetation representation and a small encoder-decoder network
//! for soil/crop/weed segmentation, plus the metrics used to evaluate it.
//!
//! Interchangeable algorithms (heading filters, segmentation losses,
//! segmenters) sit behind traits and are looked up by name in a
//! [`registry::Registry`], so configs and the CLI can choose them at runtime.

pub mod config;
pub mod error;
pub mod estimation;
pub mod kinematics;
pub mod metrics;
pub mod navigation;
pub mod pipeline;
pub mod plot;
pub mod registry;
pub mod segnet;
pub mod sensors;
pub mod sim;
pub mod telemetry;
pub mod vision;

pub use error::{Error, Result};
pub use estimation::wrap_angle;
