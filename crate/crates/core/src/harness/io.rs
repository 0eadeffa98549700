use std::fs;
use std::path::Path;

use super::{ExperimentResult, ExperimentSpec, PointResult};
use crate::config::RisConfig;
use crate::error::Result;

pub const TRIAL_COLUMNS: [&str; 10] = [
    "sweep_id",
    "M",
    "mode",
    "architecture",
    "group_size",
    "trial",
    "seed",
    "sum_rate_bps_hz",
    "iterations",
    "wall_ms",
];

pub const AGGREGATE_COLUMNS: [&str; 9] = [
    "sweep_id",
    "M",
    "mode",
    "architecture",
    "group_size",
    "trials",
    "mean_rate",
    "std_rate",
    "ci95_halfwidth",
];

pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    parse_spec(&fs::read_to_string(path)?)
}

fn key(c: &RisConfig) -> [String; 4] {
    [
        c.elements().to_string(),
        c.mode().label(),
        c.architecture().label().to_string(),
        c.group_size_antennas().to_string(),
    ]
}

// f64 Display is the shortest round-trip form, so persisted values re-parse
// to the exact in-memory numbers
fn num(x: f64) -> String {
    format!("{x}")
}

fn write_trials(points: &[PointResult], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRIAL_COLUMNS)?;
    for p in points {
        let [m, mode, arch, gs] = key(&p.config);
        for t in &p.trials {
            w.write_record([
                p.sweep_id.to_string(),
                m.clone(),
                mode.clone(),
                arch.clone(),
                gs.clone(),
                t.trial.to_string(),
                t.seed.to_string(),
                num(t.sum_rate),
                t.iterations.to_string(),
                num(t.wall_ms),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_aggregate(points: &[PointResult], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(AGGREGATE_COLUMNS)?;
    for p in points {
        let Some(s) = &p.summary else { continue };
        let [m, mode, arch, gs] = key(&p.config);
        w.write_record([
            p.sweep_id.to_string(),
            m,
            mode,
            arch,
            gs,
            s.n.to_string(),
            num(s.mean),
            num(s.std),
            num(s.ci95),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `trials.csv`, `aggregate.csv` and the `result.json` mirror into
/// `dir` (created if needed). Points that failed appear only in the JSON,
/// with their error.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_trials(&result.points, &dir.join("trials.csv"))?;
    write_aggregate(&result.points, &dir.join("aggregate.csv"))?;
    fs::write(dir.join("result.json"), serde_json::to_string_pretty(result)?)?;
    Ok(())
}
