use std::time::{Duration, Instant};

use bdris_core::channel::{self, SceneConfig};
use bdris_core::harness::closed_form_power;
use bdris_core::linalg::CMatrix;
use bdris_core::optimizer::grouping::{equal_partitions, partition_to_permutation};
use bdris_core::optimizer::pairing::{best_pairing, pairing_objective, rank_matching_bound};
use bdris_core::optimizer::{
    matched_filter, pair_antennas, ris_update, select_grouping_with, solve, solve_from, sum_rate, GroupingMode,
    OptimizerParams, Precoder,
};
use bdris_core::state::FEASIBILITY_TOL;
use bdris_core::{Architecture, ChannelRealization, Mode, RisConfig, ScatteringState};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn single_user_los() -> SceneConfig {
    SceneConfig {
        users: 1,
        rician_factor: f64::INFINITY,
        ..SceneConfig::default()
    }
}

fn rate_of_power(power: f64, noise: f64) -> f64 {
    (1.0 + power / noise).log2()
}

#[test]
fn single_connected_reaches_phase_alignment() {
    let scene = single_user_los();
    let cfg = RisConfig::new(16, Mode::Reflective, Architecture::SingleConnected).unwrap();
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = channel::realize(&scene, &cfg, &mut rng).unwrap();
        let res = solve(&ch, &cfg, &scene, &OptimizerParams::default(), &mut rng).unwrap();
        let oracle = rate_of_power(closed_form_power(&ch, &cfg, scene.tx_power), scene.noise_power);
        assert!((res.final_rate() / oracle - 1.0).abs() < 0.01, "{} vs {oracle}", res.final_rate());
    }
}

#[test]
fn fully_connected_reaches_matched_rotation() {
    let scene = single_user_los();
    let cfg = RisConfig::new(16, Mode::Reflective, Architecture::FullyConnected).unwrap();
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let ch = channel::realize(&scene, &cfg, &mut rng).unwrap();
        let res = solve(&ch, &cfg, &scene, &OptimizerParams::default(), &mut rng).unwrap();
        // received power |a^H w|^2 from the final design
        let eff = res.final_state.effective_matrices();
        let a = ch.g.adjoint() * eff.phi[0].adjoint() * &ch.h[0];
        let power = a.dotc(&res.final_precoder.w.column(0)).norm_sqr();
        let oracle = scene.tx_power * ch.h[0].norm_squared() * ch.g.norm_squared();
        assert!((power / oracle - 1.0).abs() < 0.01, "{power} vs {oracle}");
    }
}

#[test]
fn two_element_grid_search() {
    // reflective single-connected M = 2, one antenna, one user: grid over
    // 256 phases per element with the matched-filter rate
    let scene = SceneConfig {
        tx_antennas: 1,
        users: 1,
        ..SceneConfig::default()
    };
    let cfg = RisConfig::new(2, Mode::Reflective, Architecture::SingleConnected).unwrap();
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = channel::realize(&scene, &cfg, &mut rng).unwrap();
        let res = solve(&ch, &cfg, &scene, &OptimizerParams::default(), &mut rng).unwrap();
        let step = std::f64::consts::TAU / 256.0;
        let mut grid_best: f64 = 0.0;
        for a in 0..256 {
            for b in 0..256 {
                let phi = [Complex64::from_polar(1.0, a as f64 * step), Complex64::from_polar(1.0, b as f64 * step)];
                let s: Complex64 = (0..2).map(|i| ch.h[0][i].conj() * phi[i] * ch.g[(i, 0)]).sum();
                grid_best = grid_best.max(rate_of_power(scene.tx_power * s.norm_sqr(), scene.noise_power));
            }
        }
        // the grid is within cos(step/2)^2 of the continuum in power
        let slack = rate_of_power(0.0, 1.0) + (1.0 / (step / 2.0).cos().powi(2)).log2();
        assert!(res.final_rate() >= grid_best - 1e-9, "{} < {grid_best}", res.final_rate());
        assert!(res.final_rate() <= grid_best + slack + 1e-9);
    }
}

#[test]
fn pairing_matches_exhaustive_involutions() {
    fn involutions(m: usize) -> Vec<Vec<usize>> {
        equal_partitions(m, 2)
            .into_iter()
            .map(|p| {
                let mut s = vec![0; m];
                for pair in p {
                    s[pair[0]] = pair[1];
                    s[pair[1]] = pair[0];
                }
                s
            })
            .collect()
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for m in [4, 6, 8] {
        let all = involutions(m);
        for _ in 0..50 {
            let a: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            let best = all.iter().map(|s| pairing_objective(&a, &b, s)).fold(f64::NEG_INFINITY, f64::max);
            let sigma = best_pairing(&a, &b).unwrap();
            assert!((pairing_objective(&a, &b, &sigma) - best).abs() < 1e-12);
            assert!(best <= rank_matching_bound(&a, &b) + 1e-12);
        }
    }
}

#[test]
fn paired_state_delivers_the_pairing_objective() {
    let scene = SceneConfig {
        users: 1,
        tx_antennas: 1,
        ..SceneConfig::default()
    };
    let cfg = RisConfig::new(8, Mode::Reflective, Architecture::NonDiagonal).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ch = channel::realize(&scene, &cfg, &mut rng).unwrap();
    let p = pair_antennas(&ch, &cfg).unwrap();
    let state = p.to_state(&cfg).unwrap();
    assert!(state.validate(FEASIBILITY_TOL).unwrap().passed);
    let g: Vec<f64> = ch.g.column(0).iter().map(|z| z.norm()).collect();
    let h: Vec<f64> = ch.h[0].iter().map(|z| z.norm()).collect();
    let amp = pairing_objective(&g, &h, &p.sigma);
    let w = Precoder::new(CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)));
    let rate = sum_rate(&ch, &state, &w).unwrap();
    assert!((rate - rate_of_power(amp * amp, scene.noise_power)).abs() < 1e-9);
    // multi-user pairing is out of scope
    let multi = channel::realize(&SceneConfig::default(), &cfg, &mut rng).unwrap();
    assert!(pair_antennas(&multi, &cfg).is_err());
}

#[test]
fn greedy_grouping_is_near_exhaustive() {
    let scene = SceneConfig::default();
    let cfg = RisConfig::new(8, Mode::Reflective, Architecture::DynamicGroupConnected(2)).unwrap();
    let params = OptimizerParams::default();
    let mut ratios = Vec::new();
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = channel::realize(&scene, &cfg, &mut rng).unwrap();
        let start = ScatteringState::random_feasible(&cfg, &mut rng).unwrap();
        let rate_for = |perm: Vec<usize>| {
            let s = start.with_cell_permutation(perm).unwrap();
            let w = matched_filter(&ch, &s, scene.tx_power).unwrap();
            solve_from(&ch, s, w, scene.tx_power, &params).unwrap().final_rate()
        };
        let greedy = rate_for(select_grouping_with(&ch, &cfg, GroupingMode::Greedy).unwrap());
        let best = equal_partitions(8, 2)
            .iter()
            .map(|p| rate_for(partition_to_permutation(p)))
            .fold(f64::NEG_INFINITY, f64::max);
        ratios.push(greedy / best);
    }
    assert!(ratios.iter().all(|&r| r >= 0.9), "{ratios:?}");
}

#[test]
fn identity_permutation_reproduces_fixed_grouping() {
    let scene = SceneConfig::default();
    let fixed = RisConfig::new(16, Mode::Hybrid, Architecture::GroupConnected(4)).unwrap();
    let dynamic = fixed.with_architecture(Architecture::DynamicGroupConnected(4)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ch = channel::realize(&scene, &fixed, &mut rng).unwrap();
    let s_fixed = ScatteringState::random_feasible(&fixed, &mut rng).unwrap();
    let s_dyn = ScatteringState::from_parts(dynamic, s_fixed.blocks().to_vec(), Some((0..8).collect()), None).unwrap();
    assert_eq!(s_fixed.effective_matrices(), s_dyn.effective_matrices());
    let w = matched_filter(&ch, &s_fixed, scene.tx_power).unwrap();
    let params = OptimizerParams::default();
    let a = solve_from(&ch, s_fixed, w.clone(), scene.tx_power, &params).unwrap();
    let b = solve_from(&ch, s_dyn, w, scene.tx_power, &params).unwrap();
    assert_eq!(a.rate_trajectory, b.rate_trajectory);
}

#[test]
fn scaling_channels_leaves_rates_unchanged() {
    // channels x2 scale the cascade by 4, i.e. received power by 16
    let scene = SceneConfig::default();
    let cfg = RisConfig::new(16, Mode::Reflective, Architecture::GroupConnected(4)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let ch = channel::realize(&scene, &cfg, &mut rng).unwrap();
    let mut scaled = ch.scaled(2.0);
    scaled.noise_power *= 16.0;
    let params = OptimizerParams::default();
    let a = solve(&ch, &cfg, &scene, &params, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let b = solve(&scaled, &cfg, &scene, &params, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert!((a.final_rate() - b.final_rate()).abs() < 1e-6);
}

fn all_combos() -> Vec<RisConfig> {
    use Architecture::*;
    let mut v = Vec::new();
    for (mode, group) in [(Mode::Reflective, 4), (Mode::Hybrid, 4), (Mode::MultiSector(4), 8)] {
        for arch in [SingleConnected, GroupConnected(group), FullyConnected, DynamicGroupConnected(group)] {
            v.push(RisConfig::new(16, mode, arch).unwrap());
        }
    }
    v.push(RisConfig::new(16, Mode::Reflective, NonDiagonal).unwrap());
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solve_is_monotone_and_feasible(
        cfg in proptest::sample::select(all_combos()),
        seed in any::<u64>(),
        users in proptest::sample::select(vec![1usize, 4]),
    ) {
        let scene = SceneConfig { users, ..SceneConfig::default() };
        prop_assume!(scene.check(&cfg).is_ok());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = channel::realize(&scene, &cfg, &mut rng).unwrap();
        let params = OptimizerParams { max_outer_iterations: 15, ..OptimizerParams::default() };
        let res = solve(&ch, &cfg, &scene, &params, &mut rng).unwrap();
        for w in res.rate_trajectory.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-6);
        }
        prop_assert!(res.final_state.validate(FEASIBILITY_TOL).unwrap().passed);
        prop_assert!(res.final_precoder.satisfies_power(scene.tx_power, 1e-9));
        let again = sum_rate(&ch, &res.final_state, &res.final_precoder).unwrap();
        prop_assert!((again - res.final_rate()).abs() < 1e-9);
    }
}

fn time_ris_steps(ch: &ChannelRealization, cfg: &RisConfig, seed: u64) -> Duration {
    let params = OptimizerParams {
        inner_steps: 5,
        ..OptimizerParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state = ScatteringState::random_feasible(cfg, &mut rng).unwrap();
    let w = matched_filter(ch, &state, 1.0).unwrap();
    (0..3)
        .map(|_| {
            let t = Instant::now();
            let _ = ris_update(ch, &state, &w, &params).unwrap();
            t.elapsed()
        })
        .min()
        .unwrap()
}

#[test]
fn ris_step_cost_grows_no_faster_than_cubic_over_groups() {
    // time(G1) / time(G2) <= 2 * (M^3/G1^2) / (M^3/G2^2), for fewer groups G1
    let scene = SceneConfig::default();
    let m = 64;
    let base = RisConfig::new(m, Mode::Reflective, Architecture::GroupConnected(4)).unwrap();
    let ch = channel::realize(&scene, &base, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let groups_of = |gs: usize| (m / gs) as f64;
    let t_small = time_ris_steps(&ch, &base, 1).as_secs_f64();
    for gs in [16, 64] {
        let cfg = RisConfig::new(m, Mode::Reflective, Architecture::GroupConnected(gs)).unwrap();
        let t = time_ris_steps(&ch, &cfg, 1).as_secs_f64();
        let predicted = (groups_of(4) / groups_of(gs)).powi(2);
        assert!(t / t_small <= 2.0 * predicted, "group {gs}: ratio {} > 2 x {predicted}", t / t_small);
    }
}
