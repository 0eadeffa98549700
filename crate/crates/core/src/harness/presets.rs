use serde::{Deserialize, Serialize};

use super::{run, ExperimentResult, ExperimentSpec, Metric, SweepSpec};
use crate::channel::SceneConfig;
use crate::complexity::circuit_complexity;
use crate::config::{Architecture, Mode, RisConfig};
use crate::error::{Error, Result};
use crate::optimizer::OptimizerParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateSweepSide {
    Reflective,
    FullSpace,
}

fn sweep(m_values: &[usize], mode: Mode, architecture: Architecture) -> SweepSpec {
    SweepSpec {
        m_values: m_values.to_vec(),
        mode,
        architecture,
    }
}

/// Sum-rate versus surface size. Architectures are listed poorest first and
/// warm-started along that chain.
pub fn preset_rate_sweep(side: RateSweepSide) -> ExperimentSpec {
    use Architecture::*;
    let ms = [16, 32, 64];
    let sweeps = match side {
        RateSweepSide::Reflective => [SingleConnected, GroupConnected(2), GroupConnected(4), FullyConnected]
            .into_iter()
            .map(|a| sweep(&ms, Mode::Reflective, a))
            .collect(),
        RateSweepSide::FullSpace => {
            let mut v: Vec<SweepSpec> = [SingleConnected, GroupConnected(4), FullyConnected]
                .into_iter()
                .map(|a| sweep(&ms, Mode::Hybrid, a))
                .collect();
            v.extend(
                [SingleConnected, GroupConnected(8), FullyConnected]
                    .into_iter()
                    .map(|a| sweep(&ms, Mode::MultiSector(4), a)),
            );
            v
        }
    };
    let mut spec = ExperimentSpec::new(SceneConfig::default(), sweeps);
    spec.trials = 20;
    spec.warm_start = true;
    spec
}

/// Single-user, single-antenna Rayleigh scene at `M = 64` comparing the
/// closed-form optimum power of fully- and single-connected surfaces.
pub fn preset_power_gain() -> ExperimentSpec {
    let scene = SceneConfig {
        tx_antennas: 1,
        users: 1,
        rician_factor: 0.0,
        ..SceneConfig::default()
    };
    let mut spec = ExperimentSpec::new(
        scene,
        vec![
            sweep(&[64], Mode::Reflective, Architecture::SingleConnected),
            sweep(&[64], Mode::Reflective, Architecture::FullyConnected),
        ],
    );
    spec.trials = 500;
    spec.metric = Metric::ClosedFormPower;
    spec
}

fn mean_power(result: &ExperimentResult, arch: Architecture) -> Result<f64> {
    let p = result
        .points
        .iter()
        .find(|p| p.config.architecture() == arch)
        .ok_or_else(|| Error::InvalidConfig(format!("no {} point in the result", arch.label())))?;
    let powers: Vec<f64> = p.trials.iter().filter_map(|t| t.received_power).collect();
    if powers.is_empty() {
        return Err(Error::InvalidConfig("result carries no received powers".into()));
    }
    Ok(powers.iter().sum::<f64>() / powers.len() as f64)
}

/// `mean(fully) / mean(single)` of received power from a power-gain run.
pub fn power_gain_ratio(result: &ExperimentResult) -> Result<f64> {
    Ok(mean_power(result, Architecture::FullyConnected)? / mean_power(result, Architecture::SingleConnected)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub elements: usize,
    pub mode: String,
    pub architecture: String,
    pub group_size: usize,
    pub components: u64,
}

/// Circuit complexity of the fixed architectures of every mode, with the
/// group sizes used in the sum-rate presets.
pub fn complexity_table(m_values: &[usize]) -> Result<Vec<ComplexityRow>> {
    use Architecture::*;
    let mut rows = Vec::new();
    for &m in m_values {
        for (mode, group) in [(Mode::Reflective, 4), (Mode::Hybrid, 4), (Mode::MultiSector(4), 8)] {
            for arch in [SingleConnected, GroupConnected(group), FullyConnected] {
                let cfg = RisConfig::new(m, mode, arch)?;
                rows.push(ComplexityRow {
                    elements: m,
                    mode: mode.label(),
                    architecture: arch.label().to_string(),
                    group_size: cfg.group_size_antennas(),
                    components: circuit_complexity(&cfg)?,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionProbe {
    pub reference_elements: usize,
    pub reference_rate: f64,
    /// Smallest 6-sector surface matching the 3-sector reference, if any.
    pub matching_elements: Option<usize>,
    /// `(M, mean rate)` of every 6-sector size evaluated.
    pub candidates: Vec<(usize, f64)>,
}

impl ReductionProbe {
    /// `1 - M_match / M_ref`; zero when no smaller surface matches.
    pub fn reduction(&self) -> f64 {
        match self.matching_elements {
            Some(m) => 1.0 - m as f64 / self.reference_elements as f64,
            None => 0.0,
        }
    }
}

/// Finds the smallest cell-wise single-connected 6-sector surface whose mean
/// rate reaches that of a 3-sector surface with 48 elements. Uses six users
/// so both sector counts divide the user count.
pub fn element_reduction_probe(
    trials: usize,
    master_seed: u64,
    params: OptimizerParams,
    threads: Option<usize>,
) -> Result<ReductionProbe> {
    const REFERENCE: usize = 48;
    let scene = SceneConfig {
        users: 6,
        ..SceneConfig::default()
    };
    let arch = Architecture::SingleConnected;
    let mut spec = ExperimentSpec::new(scene, vec![sweep(&[REFERENCE], Mode::MultiSector(3), arch)]);
    spec.trials = trials;
    spec.master_seed = master_seed;
    spec.params = params;
    let mean_of = |spec: &ExperimentSpec| -> Result<f64> {
        let res = run(spec, threads)?;
        let p = &res.points[0];
        match (&p.error, &p.summary) {
            (None, Some(s)) => Ok(s.mean),
            (Some(e), _) => Err(Error::InvalidConfig(format!("probe point failed: {e}"))),
            _ => Err(Error::InvalidConfig("probe point produced no summary".into())),
        }
    };
    let reference_rate = mean_of(&spec)?;
    let mut candidates = Vec::new();
    let mut matching_elements = None;
    for m in (6..=REFERENCE).step_by(6) {
        spec.sweeps = vec![sweep(&[m], Mode::MultiSector(6), arch)];
        let rate = mean_of(&spec)?;
        candidates.push((m, rate));
        if rate >= reference_rate {
            matching_elements = Some(m);
            break;
        }
    }
    Ok(ReductionProbe {
        reference_elements: REFERENCE,
        reference_rate,
        matching_elements,
        candidates,
    })
}
