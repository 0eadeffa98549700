//! Projected-gradient ascent on the scattering blocks.

use num_complex::Complex64;

use super::rate::{check_inputs, BlockObjective};
use super::{OptimizerParams, Precoder};
use crate::channel::ChannelRealization;
use crate::error::Result;
use crate::linalg::{self, CMatrix};
use crate::state::ScatteringState;

fn frob_norm(blocks: &[CMatrix]) -> f64 {
    blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
}

/// Up to `params.inner_steps` projected-gradient steps with backtracking.
/// A step is accepted only if the rate does not decrease and the
/// sufficient-increase test `R(V') >= R(V) + c Re<grad, V' - V>` holds.
/// Permutation and pairing are held fixed.
pub fn ris_update(
    ch: &ChannelRealization,
    state: &ScatteringState,
    w: &Precoder,
    params: &OptimizerParams,
) -> Result<ScatteringState> {
    check_inputs(ch, state, w)?;
    params.check()?;
    let objective = BlockObjective::new(ch, state, w);
    let mut blocks = state.blocks().to_vec();
    let (mut rate, mut grad) = objective.rate_and_gradient(&blocks);
    let block_norm = frob_norm(&blocks);
    // step measured relative to ||V|| / ||grad||, so it is invariant to
    // channel scaling
    let mut rel_step = params.initial_step;

    for _ in 0..params.inner_steps {
        let grad_norm = frob_norm(&grad);
        if !(grad_norm > 0.0) || !grad_norm.is_finite() || !rate.is_finite() {
            break;
        }
        let mut accepted = None;
        let mut tau = rel_step;
        for _ in 0..params.max_backtracks {
            let t = Complex64::from(tau * block_norm / grad_norm);
            let raw: Vec<CMatrix> = blocks.iter().zip(&grad).map(|(v, g)| v + g * t).collect();
            if let Ok(candidate) = state.reproject(&raw) {
                let cand_blocks = candidate.into_blocks();
                let cand_rate = objective.rate(&cand_blocks);
                let predicted: f64 = blocks
                    .iter()
                    .zip(&cand_blocks)
                    .zip(&grad)
                    .map(|((v, c), g)| linalg::real_inner(g, &(c - v)))
                    .sum();
                if cand_rate >= rate && cand_rate >= rate + params.sufficient_increase * predicted {
                    accepted = Some((cand_blocks, cand_rate));
                    break;
                }
            }
            tau *= params.shrink;
        }
        let Some((next, next_rate)) = accepted else {
            break;
        };
        let gain = next_rate - rate;
        blocks = next;
        let (r, g) = objective.rate_and_gradient(&blocks);
        rate = r;
        grad = g;
        rel_step = (tau / params.shrink).min(params.initial_step);
        if gain <= 1e-14 * rate.abs() {
            break;
        }
    }
    state.with_blocks(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{realize, SceneConfig};
    use crate::config::{Architecture, Mode, RisConfig};
    use crate::optimizer::{precoder::matched_filter, sum_rate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_precoder_leaves_state_unchanged() {
        let cfg = RisConfig::new(8, Mode::Reflective, Architecture::GroupConnected(4)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = realize(&SceneConfig::default(), &cfg, &mut rng).unwrap();
        let st = ScatteringState::random_feasible(&cfg, &mut rng).unwrap();
        let out = ris_update(&ch, &st, &Precoder::zeros(4, 4), &OptimizerParams::default()).unwrap();
        assert_eq!(out, st);
    }

    #[test]
    fn improves_and_stays_feasible() {
        let configs = [
            RisConfig::new(16, Mode::Reflective, Architecture::SingleConnected).unwrap(),
            RisConfig::new(16, Mode::Hybrid, Architecture::GroupConnected(4)).unwrap(),
            RisConfig::new(16, Mode::MultiSector(4), Architecture::FullyConnected).unwrap(),
            RisConfig::new(16, Mode::Reflective, Architecture::NonDiagonal).unwrap(),
        ];
        for (i, cfg) in configs.into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(40 + i as u64);
            let ch = realize(&SceneConfig::default(), &cfg, &mut rng).unwrap();
            let st = ScatteringState::random_feasible(&cfg, &mut rng).unwrap();
            let w = matched_filter(&ch, &st, 1.0).unwrap();
            let before = sum_rate(&ch, &st, &w).unwrap();
            let out = ris_update(&ch, &st, &w, &OptimizerParams::default()).unwrap();
            let after = sum_rate(&ch, &out, &w).unwrap();
            assert!(after > before, "{cfg}: {after} <= {before}");
            assert!(out.validate(1e-9).unwrap().passed);
            assert_eq!(out.pairing(), st.pairing());
        }
    }
}
