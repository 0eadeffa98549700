use rand::Rng;

use super::pairing::pair_antennas;
use super::precoder::{matched_filter, precoder_update};
use super::rate::{effective_channels, rate_from_effective};
use super::{select_grouping, OptimizerParams, Precoder, SolveResult};
use crate::channel::{ChannelRealization, SceneConfig};
use crate::config::RisConfig;
use crate::error::{Error, Result};
use crate::optimizer::ris::ris_update;
use crate::state::ScatteringState;

fn current_rate(ch: &ChannelRealization, state: &ScatteringState, w: &Precoder) -> f64 {
    let a = effective_channels(ch, &state.effective_matrices());
    rate_from_effective(&a, &w.w, ch.noise_power)
}

/// Full solve from a random start: Haar-random state, then (once) the
/// channel-adaptive grouping for dynamic architectures or the optimal pairing
/// for single-user non-diagonal ones, then matched filters with equal power.
pub fn solve<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    config: &RisConfig,
    scene: &SceneConfig,
    params: &OptimizerParams,
    rng: &mut R,
) -> Result<SolveResult> {
    scene.check(config)?;
    let mut state = ScatteringState::random_feasible(config, rng)?;
    if config.is_dynamic() {
        let perm = select_grouping(ch, config)?;
        state = state.with_cell_permutation(perm)?;
    }
    if config.is_non_diagonal() && ch.users() == 1 {
        state = pair_antennas(ch, config)?.to_state(config)?;
    }
    let w0 = matched_filter(ch, &state, scene.tx_power)?;
    solve_from(ch, state, w0, scene.tx_power, params)
}

/// Alternating optimization from a given start until the relative rate
/// change drops below `rel_tolerance` or `max_outer_iterations` is reached.
pub fn solve_from(
    ch: &ChannelRealization,
    state: ScatteringState,
    w: Precoder,
    tx_power: f64,
    params: &OptimizerParams,
) -> Result<SolveResult> {
    params.check()?;
    if !w.satisfies_power(tx_power, 1e-9 * tx_power.max(1.0)) {
        return Err(Error::InvalidConfig(format!(
            "initial precoder power {} exceeds {tx_power}",
            w.power()
        )));
    }
    let mut state = state;
    let mut w = w;
    let mut rate = current_rate(ch, &state, &w);
    let mut trajectory = vec![rate];
    let mut iterations = 0;
    for _ in 0..params.max_outer_iterations {
        iterations += 1;
        let w_next = precoder_update(ch, &state, &w, tx_power)?;
        let state_next = ris_update(ch, &state, &w_next, params)?;
        let next = current_rate(ch, &state_next, &w_next);
        if next < rate {
            // both sub-steps are monotone; only rounding can land here
            trajectory.push(rate);
            break;
        }
        w = w_next;
        state = state_next;
        let change = next - rate;
        rate = next;
        trajectory.push(rate);
        if change <= params.rel_tolerance * rate.abs() {
            break;
        }
    }
    Ok(SolveResult {
        rate_trajectory: trajectory,
        final_state: state,
        final_precoder: w,
        iterations_used: iterations,
    })
}
