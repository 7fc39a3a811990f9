//! CSV and JSONL logs of a run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sim::TickRecord;

pub const HEADING_COLUMNS: [&str; 4] = ["t", "raw", "median_filtered", "kalman_filtered"];
pub const TRAJECTORY_COLUMNS: [&str; 7] = ["t", "truth_x", "truth_y", "fused_x", "fused_y", "gps_x", "gps_y"];

pub fn heading_csv(records: &[TickRecord]) -> String {
    let mut s = HEADING_COLUMNS.join(",");
    s.push('\n');
    for r in records {
        let _ = writeln!(s, "{},{},{},{}", r.t, r.heading_raw, r.heading_median, r.heading_kalman);
    }
    s
}

pub fn trajectory_csv(records: &[TickRecord]) -> String {
    let mut s = TRAJECTORY_COLUMNS.join(",");
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.t, r.truth.x, r.truth.y, r.fused.x, r.fused.y, r.gps_xy.0, r.gps_xy.1
        );
    }
    s
}

/// One row per processed camera frame.
pub fn segmentation_csv(records: &[TickRecord]) -> String {
    let mut s = String::from("tick,t,frame,soil,crop,weed\n");
    for r in records {
        if let Some(seg) = r.seg {
            let f = seg.fractions;
            let _ = writeln!(s, "{},{},{},{},{},{}", r.tick, r.t, seg.frame, f.soil, f.crop, f.weed);
        }
    }
    s
}

pub fn ticks_jsonl(records: &[TickRecord]) -> Result<String> {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct PlotFiles {
    pub heading: PathBuf,
    pub trajectory: PathBuf,
    pub ticks: PathBuf,
}

/// Writes `heading.csv`, `trajectory.csv` and `ticks.jsonl` into `out_dir`,
/// creating it if needed.
pub fn emit_plot_data(records: &[TickRecord], out_dir: &Path) -> Result<PlotFiles> {
    if records.is_empty() {
        return Err(Error::Empty("tick records"));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = PlotFiles {
        heading: out_dir.join("heading.csv"),
        trajectory: out_dir.join("trajectory.csv"),
        ticks: out_dir.join("ticks.jsonl"),
    };
    let write = |p: &Path, body: String| fs::write(p, body).map_err(|e| Error::io(p, e));
    write(&files.heading, heading_csv(records))?;
    write(&files.trajectory, trajectory_csv(records))?;
    write(&files.ticks, ticks_jsonl(records)?)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{FieldConfig, WorldConfig};
    use crate::sim::run_simulation;

    fn records() -> Vec<TickRecord> {
        let mut c = WorldConfig::minimal(
            2,
            FieldConfig {
                rows: 1,
                row_length: 3.0,
                row_spacing: 1.0,
                origin: Default::default(),
                heading: 0.0,
            },
        );
        c.sim.duration = 1.0;
        run_simulation(&c).unwrap()
    }

    #[test]
    fn heading_csv_shape() {
        let recs = records();
        let csv = heading_csv(&recs);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "t,raw,median_filtered,kalman_filtered");
        assert_eq!(lines.len(), recs.len() + 1);
        assert!(lines.iter().all(|l| l.split(',').count() == 4));
    }

    #[test]
    fn values_round_trip_through_text() {
        let recs = records();
        let csv = trajectory_csv(&recs);
        let row: Vec<f64> = csv.lines().nth(7).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        let r = &recs[6];
        assert_eq!(row, vec![r.t, r.truth.x, r.truth.y, r.fused.x, r.fused.y, r.gps_xy.0, r.gps_xy.1]);
    }

    #[test]
    fn empty_records_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_plot_data(&[], dir.path()).is_err());
    }

    #[test]
    fn unwritable_directory() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_plot_data(&records(), &blocker.join("out")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
