//! Weighted-MMSE precoder update under a total power constraint.

use nalgebra::Cholesky;
use num_complex::Complex64;

use super::rate::{check_inputs, effective_channels, rate_from_effective};
use super::Precoder;
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::state::ScatteringState;

/// Maximum number of bracket doublings for the power multiplier.
pub const MAX_DOUBLINGS: usize = 200;
/// Relative width at which the multiplier bisection stops.
pub const BISECTION_REL_TOL: f64 = 1e-10;
/// Allowed rate loss of one update (numerical slack only).
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Matched filters `sqrt(P/K) a_k / ||a_k||` (zero for users with no channel).
pub fn matched_filter(ch: &ChannelRealization, state: &ScatteringState, tx_power: f64) -> Result<Precoder> {
    let a = effective_channels(ch, &state.effective_matrices());
    Ok(matched_filter_from(&a, ch.tx_antennas(), tx_power))
}

pub(crate) fn matched_filter_from(a: &[CVector], n: usize, tx_power: f64) -> Precoder {
    let per_user = (tx_power / a.len() as f64).sqrt();
    let mut w = CMatrix::zeros(n, a.len());
    for (k, ak) in a.iter().enumerate() {
        let norm = ak.norm();
        if norm > 0.0 {
            w.set_column(k, &(ak * Complex64::from(per_user / norm)));
        }
    }
    Precoder::new(w)
}

/// One weighted-MMSE step: MMSE receive scalars and weights at `w`, then the
/// precoder minimizing the weighted MSE subject to `sum ||w_k||^2 <= P`.
/// The result never has a lower sum-rate than `w` (beyond `MONOTONE_SLACK`);
/// if numerics would make it so, `w` is returned unchanged.
pub fn precoder_update(
    ch: &ChannelRealization,
    state: &ScatteringState,
    w: &Precoder,
    tx_power: f64,
) -> Result<Precoder> {
    check_inputs(ch, state, w)?;
    let a = effective_channels(ch, &state.effective_matrices());
    precoder_update_from(&a, w, tx_power, ch.noise_power)
}

pub(crate) fn precoder_update_from(a: &[CVector], w: &Precoder, tx_power: f64, noise: f64) -> Result<Precoder> {
    let n = w.w.nrows();
    let users = a.len();
    if tx_power <= 0.0 {
        return Ok(Precoder::zeros(n, users));
    }

    // receive scalars u_k and weights 1/e_k
    let mut a_mat = CMatrix::zeros(n, n);
    let mut rhs = CMatrix::zeros(n, users);
    for k in 0..users {
        let s: Vec<Complex64> = (0..users).map(|j| a[k].dotc(&w.w.column(j))).collect();
        let total: f64 = s.iter().map(|c| c.norm_sqr()).sum::<f64>() + noise;
        let u = s[k] / total;
        let mse = 1.0 - s[k].norm_sqr() / total;
        let weight = 1.0 / mse.max(f64::MIN_POSITIVE);
        a_mat += (&a[k] * a[k].adjoint()) * Complex64::from(weight * u.norm_sqr());
        rhs.set_column(k, &(&a[k] * (u * weight)));
    }
    if rhs.iter().all(|c| c.norm() == 0.0) {
        return Ok(Precoder::zeros(n, users));
    }

    let solve = |mu: f64| -> Option<CMatrix> {
        let mut m = a_mat.clone();
        for i in 0..n {
            m[(i, i)] += mu;
        }
        let chol = Cholesky::new(m)?;
        let x = chol.solve(&rhs);
        x.iter().all(|c| c.re.is_finite() && c.im.is_finite()).then_some(x)
    };
    let power = |x: &CMatrix| x.norm_squared();

    // without the multiplier `a_mat` is singular whenever K < N (Cholesky
    // would still "succeed"), so take the minimum-norm solution instead
    let unconstrained = {
        let svd = a_mat.clone().svd(true, true);
        let smax = svd.singular_values.max();
        svd.solve(&rhs, 1e-12 * smax)
            .ok()
            .filter(|x| {
                let resid = (&a_mat * x - &rhs).norm();
                resid <= 1e-9 * rhs.norm() && x.iter().all(|c| c.re.is_finite() && c.im.is_finite())
            })
            .filter(|x| power(x) <= tx_power)
    };
    let mut candidate = match unconstrained {
        Some(x) => x,
        None => {
            let trace: f64 = (0..n).map(|i| a_mat[(i, i)].re).sum();
            let mut hi = (trace / n as f64 * 1e-8).max(1e-300);
            let mut doublings = 0;
            let mut hi_sol = loop {
                if let Some(x) = solve(hi) {
                    if power(&x) <= tx_power {
                        break x;
                    }
                }
                doublings += 1;
                if doublings > MAX_DOUBLINGS {
                    return Err(Error::BisectionFailure(format!(
                        "no feasible multiplier after {MAX_DOUBLINGS} doublings"
                    )));
                }
                hi *= 2.0;
            };
            let mut lo = 0.0;
            while hi - lo > BISECTION_REL_TOL * hi {
                let mid = 0.5 * (lo + hi);
                match solve(mid) {
                    Some(x) if power(&x) <= tx_power => {
                        hi = mid;
                        hi_sol = x;
                    }
                    _ => lo = mid,
                }
            }
            // active constraint: land exactly on the power budget
            let p = power(&hi_sol);
            if p > 0.0 {
                hi_sol *= Complex64::from((tx_power / p).sqrt());
            }
            hi_sol
        }
    };
    if power(&candidate) > tx_power {
        let p = power(&candidate);
        candidate *= Complex64::from((tx_power / p).sqrt());
    }

    let old = rate_from_effective(a, &w.w, noise);
    let new = rate_from_effective(a, &candidate, noise);
    if new + MONOTONE_SLACK < old || !new.is_finite() {
        return Ok(w.clone());
    }
    Ok(Precoder::new(candidate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_channels(n: usize, users: usize, seed: u64) -> Vec<CVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..users)
            .map(|_| CVector::from_fn(n, |_, _| linalg::complex_gaussian(&mut rng)))
            .collect()
    }

    #[test]
    fn single_user_gets_matched_filter() {
        let a = random_channels(4, 1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w0 = Precoder::new(linalg::gaussian_matrix(4, 1, &mut rng).scale(0.1));
        // every step stays along a_1; the iteration reaches the full budget
        let mut w = w0;
        for _ in 0..50 {
            w = precoder_update_from(&a, &w, 2.0, 0.5).unwrap();
            let along = a[0].dotc(&w.w.column(0)).norm() / a[0].norm();
            assert!((along - w.power().sqrt()).abs() < 1e-9);
        }
        // the matched filter up to a common phase
        let phase = a[0].dotc(&w.w.column(0));
        let phase = phase / phase.norm();
        let expect = &a[0] * (phase * 2f64.sqrt() / a[0].norm());
        assert!(linalg::max_abs_diff(&w.w, &CMatrix::from_columns(&[expect])) < 1e-8);
    }

    #[test]
    fn orthogonal_users_get_scaled_matched_filters() {
        // a_k along distinct canonical directions, rotated by a common unitary
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = linalg::haar_semi_unitary(4, 4, &mut rng);
        let gains = [1.0, 0.5, 2.0];
        let a: Vec<CVector> = (0..3).map(|k| q.column(k).into_owned() * Complex64::from(gains[k])).collect();
        let mut w = matched_filter_from(&a, 4, 1.0);
        for _ in 0..5 {
            w = precoder_update_from(&a, &w, 1.0, 0.1).unwrap();
        }
        for k in 0..3 {
            let col = w.w.column(k).into_owned();
            let along = a[k].dotc(&col) / Complex64::from(a[k].norm_squared());
            let residual = &col - &a[k] * along;
            assert!(residual.norm() < 1e-9 * col.norm().max(1e-300), "user {k} not a matched filter");
            for j in 0..3 {
                if j != k {
                    assert!(a[j].dotc(&col).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn power_constraint_is_active() {
        for seed in 0..10 {
            let a = random_channels(4, 4, 100 + seed);
            let w0 = matched_filter_from(&a, 4, 1.0);
            let w = precoder_update_from(&a, &w0, 1.0, 0.01).unwrap();
            assert!((w.power() - 1.0).abs() < 1e-8, "power {}", w.power());
        }
    }

    #[test]
    fn update_is_monotone() {
        for seed in 0..20 {
            let a = random_channels(3, 4, 200 + seed);
            let mut w = matched_filter_from(&a, 3, 2.0);
            let mut prev = rate_from_effective(&a, &w.w, 0.05);
            for _ in 0..15 {
                w = precoder_update_from(&a, &w, 2.0, 0.05).unwrap();
                let r = rate_from_effective(&a, &w.w, 0.05);
                assert!(r >= prev - MONOTONE_SLACK, "{r} < {prev}");
                assert!(w.power() <= 2.0 * (1.0 + 1e-9));
                prev = r;
            }
        }
    }

    #[test]
    fn zero_power_gives_zero_precoder() {
        let a = random_channels(4, 2, 5);
        let w0 = matched_filter_from(&a, 4, 1.0);
        let w = precoder_update_from(&a, &w0, 0.0, 1.0).unwrap();
        assert_eq!(w.power(), 0.0);
    }
}
