//! Seeded Monte-Carlo experiments over `(M, mode, architecture)` sweeps.
//!
//! Every trial derives its seeds from a stable 64-bit hash of the master
//! seed and its coordinates, so results do not depend on thread count or
//! execution order, and adding trials leaves existing ones untouched.

mod io;
mod presets;
mod seeds;
mod stats;

use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{self, ChannelRealization, SceneConfig};
use crate::config::{Architecture, Mode, RisConfig};
use crate::error::{Error, Result};
use crate::optimizer::{self, pairing::incident_field, OptimizerParams, Precoder};
use crate::state::ScatteringState;

pub use io::{load_spec, parse_spec, write_outputs, AGGREGATE_COLUMNS, TRIAL_COLUMNS};
pub use presets::{
    complexity_table, element_reduction_probe, power_gain_ratio, preset_rate_sweep, preset_power_gain,
    ComplexityRow, RateSweepSide, ReductionProbe,
};
pub use seeds::{channel_seed, child_seed};
pub use stats::Summary;

/// What each trial measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Jointly optimized sum-rate.
    #[default]
    SumRate,
    /// Single-user received power from the closed-form optimum of the
    /// reflective surface (no iterative solve).
    ClosedFormPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub m_values: Vec<usize>,
    pub mode: Mode,
    pub architecture: Architecture,
}

fn default_trials() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub scene: SceneConfig,
    pub sweeps: Vec<SweepSpec>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub params: OptimizerParams,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub metric: Metric,
    /// Start each architecture from the final point of the next poorer one
    /// at the same `(M, mode)` and trial (same channel), so richer feasible
    /// sets never end below poorer ones.
    #[serde(default)]
    pub warm_start: bool,
    /// When false, wall times are written as 0 and outputs are bit-identical
    /// across runs.
    #[serde(default = "default_true")]
    pub record_timing: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub sweep_id: usize,
    pub config: RisConfig,
}

impl ExperimentSpec {
    pub fn new(scene: SceneConfig, sweeps: Vec<SweepSpec>) -> Self {
        ExperimentSpec {
            scene,
            sweeps,
            trials: default_trials(),
            master_seed: 0,
            params: OptimizerParams::default(),
            output: None,
            metric: Metric::default(),
            warm_start: false,
            record_timing: true,
        }
    }

    /// Sweep points in order: sweeps as listed, `M` values within each.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let mut out = Vec::new();
        for s in &self.sweeps {
            if s.m_values.is_empty() {
                return Err(Error::InvalidConfig("sweep with no M values".into()));
            }
            for &m in &s.m_values {
                let config = RisConfig::new(m, s.mode, s.architecture)?;
                out.push(SweepPoint {
                    sweep_id: out.len(),
                    config,
                });
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.sweeps.is_empty() {
            return Err(Error::InvalidConfig("no sweeps given".into()));
        }
        self.params.check()?;
        for p in self.points()? {
            self.scene.check(&p.config)?;
            if self.metric == Metric::ClosedFormPower {
                closed_form_supported(&self.scene, &p.config)?;
            }
        }
        Ok(())
    }
}

fn closed_form_supported(scene: &SceneConfig, config: &RisConfig) -> Result<()> {
    let fixed = matches!(
        config.architecture(),
        Architecture::SingleConnected | Architecture::GroupConnected(_) | Architecture::FullyConnected
    );
    if scene.users != 1 || config.mode() != Mode::Reflective || !fixed {
        return Err(Error::InvalidConfig(format!(
            "closed-form power needs one user and a reflective fixed-group surface, got {config} with {} users",
            scene.users
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub sum_rate: f64,
    pub iterations: usize,
    pub wall_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub received_power: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub sweep_id: usize,
    pub config: RisConfig,
    pub trials: Vec<TrialRecord>,
    pub summary: Option<Summary>,
    pub wall_ms: f64,
    pub error: Option<String>,
}

impl PointResult {
    pub fn rates(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.sum_rate).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub points: Vec<PointResult>,
}

impl ExperimentResult {
    pub fn failed_points(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }

    pub fn point(&self, config: &RisConfig) -> Option<&PointResult> {
        self.points.iter().find(|p| &p.config == config)
    }
}

/// Closed-form optimum received power of a reflective group-connected
/// surface for one user: `P (sum_g ||h_g|| ||g_g||)^2`, with `g` the incident
/// field along the dominant transmit direction.
pub fn closed_form_power(ch: &ChannelRealization, config: &RisConfig, tx_power: f64) -> f64 {
    let g = incident_field(&ch.g);
    let h = &ch.h[0];
    let size = config.canonical().group_size_antennas();
    let amplitude: f64 = (0..config.elements() / size)
        .map(|grp| {
            let r = grp * size..(grp + 1) * size;
            let hn: f64 = r.clone().map(|i| h[i].norm_sqr()).sum::<f64>().sqrt();
            let gn: f64 = r.map(|i| g[i].norm_sqr()).sum::<f64>().sqrt();
            hn * gn
        })
        .sum();
    tx_power * amplitude * amplitude
}

struct Outcome {
    record: TrialRecord,
    final_point: Option<(ScatteringState, Precoder)>,
}

fn run_point_trial(
    spec: &ExperimentSpec,
    point: &SweepPoint,
    trial: usize,
    warm: Option<&(ScatteringState, Precoder)>,
) -> Result<Outcome> {
    let start = Instant::now();
    let seed = child_seed(spec.master_seed, point.sweep_id as u64, trial as u64);
    let cfg = &point.config;
    let mut ch_rng = ChaCha8Rng::seed_from_u64(channel_seed(
        spec.master_seed,
        cfg.elements() as u64,
        cfg.sectors() as u64,
        trial as u64,
    ));
    let ch = channel::realize(&spec.scene, cfg, &mut ch_rng)?;
    let elapsed = |s: Instant| {
        if spec.record_timing {
            s.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        }
    };
    match spec.metric {
        Metric::ClosedFormPower => {
            let power = closed_form_power(&ch, cfg, spec.scene.tx_power);
            Ok(Outcome {
                record: TrialRecord {
                    trial,
                    seed,
                    sum_rate: (1.0 + power / ch.noise_power).log2(),
                    iterations: 0,
                    wall_ms: elapsed(start),
                    received_power: Some(power),
                },
                final_point: None,
            })
        }
        Metric::SumRate => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let result = match warm {
                Some((state, w)) => {
                    let eff = state.effective_matrices();
                    let lifted = ScatteringState::from_effective(cfg, &eff, None, None)?;
                    optimizer::solve_from(&ch, lifted, w.clone(), spec.scene.tx_power, &spec.params)?
                }
                None => optimizer::solve(&ch, cfg, &spec.scene, &spec.params, &mut rng)?,
            };
            Ok(Outcome {
                record: TrialRecord {
                    trial,
                    seed,
                    sum_rate: result.final_rate(),
                    iterations: result.iterations_used,
                    wall_ms: elapsed(start),
                    received_power: None,
                },
                final_point: Some((result.final_state, result.final_precoder)),
            })
        }
    }
}

/// Index of the warm-start predecessor of every point: the latest earlier
/// point at the same `(M, mode)` whose feasible set nests in this one.
fn predecessors(points: &[SweepPoint]) -> Vec<Option<usize>> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| (0..i).rev().find(|&j| points[j].config.nests_in(&p.config) && points[j].config != p.config))
        .collect()
}

/// Runs every trial of every sweep point. Trials run in parallel on
/// `threads` workers (all cores when `None`); the result does not depend on
/// the thread count.
pub fn run(spec: &ExperimentSpec, threads: Option<usize>) -> Result<ExperimentResult> {
    spec.validate()?;
    let points = spec.points()?;
    let preds = if spec.warm_start && spec.metric == Metric::SumRate {
        predecessors(&points)
    } else {
        vec![None; points.len()]
    };

    let per_trial = |t: usize| -> Vec<std::result::Result<TrialRecord, String>> {
        let mut finals: Vec<Option<(ScatteringState, Precoder)>> = vec![None; points.len()];
        let mut out = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            let warm = preds[i].and_then(|j| finals[j].as_ref());
            match run_point_trial(spec, p, t, warm) {
                Ok(o) => {
                    finals[i] = o.final_point;
                    out.push(Ok(o.record));
                }
                Err(e) => out.push(Err(e.to_string())),
            }
        }
        out
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let by_trial: Vec<Vec<std::result::Result<TrialRecord, String>>> =
        pool.install(|| (0..spec.trials).into_par_iter().map(per_trial).collect());

    let results = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut trials = Vec::with_capacity(spec.trials);
            let mut error = None;
            for row in &by_trial {
                match &row[i] {
                    Ok(r) => trials.push(r.clone()),
                    Err(e) => {
                        error.get_or_insert_with(|| e.clone());
                    }
                }
            }
            let wall_ms = trials.iter().map(|t| t.wall_ms).sum();
            let (trials, summary) = if error.is_some() {
                (Vec::new(), None)
            } else {
                let rates: Vec<f64> = trials.iter().map(|t| t.sum_rate).collect();
                (trials, Some(Summary::of(&rates)))
            };
            PointResult {
                sweep_id: p.sweep_id,
                config: p.config,
                trials,
                summary,
                wall_ms,
                error,
            }
        })
        .collect();
    Ok(ExperimentResult {
        spec: spec.clone(),
        points: results,
    })
}
