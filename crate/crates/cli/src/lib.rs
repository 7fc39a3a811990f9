//! Command-line front end and the telemetry/teleop server for `agrobench`.

pub mod commands;
pub mod server;
