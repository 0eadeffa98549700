//! Sum-rate evaluation.
//!
//! [`sum_rate`] works on the assembled effective matrices. The optimizer's
//! inner loop uses [`BlockObjective`] instead, which evaluates the rate and
//! its gradient directly on the scattering blocks with the precoder fixed.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use super::Precoder;
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::state::{BlockPlacement, EffectiveMatrices, ScatteringState};

/// Feasibility tolerance applied by [`sum_rate`].
pub const RATE_FEASIBILITY_TOL: f64 = 1e-6;

/// Effective transmit-side channels `a_k = G^H Phi_{l_k}^H h_k`, so that user
/// `k` receives `a_k^H w` from precoding vector `w`.
pub fn effective_channels(ch: &ChannelRealization, eff: &EffectiveMatrices) -> Vec<CVector> {
    ch.h
        .iter()
        .zip(&ch.sector_of_user)
        .map(|(h, &l)| ch.g.adjoint() * (eff.phi[l].adjoint() * h))
        .collect()
}

/// `sum_k log2(1 + SINR_k)` for the given effective channels.
pub fn rate_from_effective(a: &[CVector], w: &CMatrix, noise: f64) -> f64 {
    let users = a.len();
    let mut total = 0.0;
    for k in 0..users {
        let mut signal = 0.0;
        let mut interference = 0.0;
        for j in 0..w.ncols() {
            let s = a[k].dotc(&w.column(j)).norm_sqr();
            if j == k {
                signal = s;
            } else {
                interference += s;
            }
        }
        total += (1.0 + signal / (interference + noise)).log2();
    }
    total
}

fn check_dims(ch: &ChannelRealization, state: &ScatteringState, w: &Precoder) -> Result<()> {
    let cfg = state.config();
    if ch.sector_size() != cfg.sector_size() {
        return Err(Error::ShapeMismatch(format!(
            "channel has {} RIS antennas per sector, state has {}",
            ch.sector_size(),
            cfg.sector_size()
        )));
    }
    if ch.sector_of_user.iter().any(|&l| l >= cfg.sectors()) {
        return Err(Error::ShapeMismatch("user assigned to a missing sector".into()));
    }
    if w.w.shape() != (ch.tx_antennas(), ch.users()) {
        return Err(Error::ShapeMismatch(format!(
            "precoder is {:?}, expected {:?}",
            w.w.shape(),
            (ch.tx_antennas(), ch.users())
        )));
    }
    Ok(())
}

/// Sum-rate in bits/s/Hz of `state` and precoder `w` on channel `ch`.
pub fn sum_rate(ch: &ChannelRealization, state: &ScatteringState, w: &Precoder) -> Result<f64> {
    check_dims(ch, state, w)?;
    let report = state.validate(RATE_FEASIBILITY_TOL)?;
    if !report.passed {
        return Err(Error::Infeasible {
            deviation: report.max_deviation(),
            tolerance: RATE_FEASIBILITY_TOL,
        });
    }
    let a = effective_channels(ch, &state.effective_matrices());
    Ok(rate_from_effective(&a, &w.w, ch.noise_power))
}

pub(crate) fn check_inputs(ch: &ChannelRealization, state: &ScatteringState, w: &Precoder) -> Result<()> {
    check_dims(ch, state, w)
}

/// Sum-rate as a function of the scattering blocks with the precoder fixed.
pub(crate) struct BlockObjective<'a> {
    ch: &'a ChannelRealization,
    /// `x_j = G w_j`, the incident field for stream `j`.
    incident: Vec<CVector>,
    placements: Vec<BlockPlacement>,
    sectors: usize,
    cells_per_block: usize,
}

impl<'a> BlockObjective<'a> {
    pub fn new(ch: &'a ChannelRealization, state: &ScatteringState, w: &Precoder) -> Self {
        let incident = (0..w.w.ncols()).map(|j| &ch.g * w.w.column(j)).collect();
        BlockObjective {
            ch,
            incident,
            placements: state.placements(),
            sectors: state.config().sectors(),
            cells_per_block: state.config().cells_per_group(),
        }
    }

    /// `z[k][j] = h_k^H Phi_{l_k} x_j`.
    fn cross_gains(&self, blocks: &[CMatrix]) -> Vec<Vec<Complex64>> {
        let ms = self.ch.sector_size();
        let k = self.cells_per_block;
        let streams = self.incident.len();
        // scattered[l][j] = Phi_l x_j, only for sectors hosting users
        let mut used = vec![false; self.sectors];
        for &l in &self.ch.sector_of_user {
            used[l] = true;
        }
        let mut scattered: Vec<Vec<CVector>> = vec![Vec::new(); self.sectors];
        for l in (0..self.sectors).filter(|&l| used[l]) {
            scattered[l] = (0..streams)
                .map(|j| {
                    let x = &self.incident[j];
                    let mut y = CVector::zeros(ms);
                    for (v, pl) in blocks.iter().zip(&self.placements) {
                        for a in 0..k {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for b in 0..k {
                                acc += v[(l * k + a, b)] * x[pl.in_cells[b]];
                            }
                            y[pl.out_cells[a]] += acc;
                        }
                    }
                    y
                })
                .collect();
        }
        self.ch
            .h
            .iter()
            .zip(&self.ch.sector_of_user)
            .map(|(h, &l)| scattered[l].iter().map(|y| h.dotc(y)).collect())
            .collect()
    }

    fn rate_from_gains(&self, z: &[Vec<Complex64>]) -> f64 {
        let noise = self.ch.noise_power;
        z.iter()
            .enumerate()
            .map(|(k, row)| {
                let total: f64 = row.iter().map(|c| c.norm_sqr()).sum::<f64>() + noise;
                let signal = row[k].norm_sqr();
                (total / (total - signal)).log2()
            })
            .sum()
    }

    pub fn rate(&self, blocks: &[CMatrix]) -> f64 {
        self.rate_from_gains(&self.cross_gains(blocks))
    }

    /// Rate and its gradient `2 dR/dV*` with respect to every block.
    pub fn rate_and_gradient(&self, blocks: &[CMatrix]) -> (f64, Vec<CMatrix>) {
        let z = self.cross_gains(blocks);
        let rate = self.rate_from_gains(&z);
        let noise = self.ch.noise_power;
        let ms = self.ch.sector_size();

        // y_k = sum_j c_kj z_kj conj(x_j)
        let y: Vec<CVector> = z
            .iter()
            .enumerate()
            .map(|(k, row)| {
                let total: f64 = row.iter().map(|c| c.norm_sqr()).sum::<f64>() + noise;
                let rest = total - row[k].norm_sqr();
                let mut acc = CVector::zeros(ms);
                for (j, zkj) in row.iter().enumerate() {
                    let c = if j == k { 1.0 / total } else { 1.0 / total - 1.0 / rest };
                    let s = zkj * c;
                    for (dst, x) in acc.iter_mut().zip(self.incident[j].iter()) {
                        *dst += s * x.conj();
                    }
                }
                acc
            })
            .collect();

        let k = self.cells_per_block;
        let scale = 2.0 / LN_2;
        let grads = blocks
            .iter()
            .zip(&self.placements)
            .map(|(v, pl)| {
                let mut g = CMatrix::zeros(v.nrows(), v.ncols());
                for (user, h) in self.ch.h.iter().enumerate() {
                    let l = self.ch.sector_of_user[user];
                    for a in 0..k {
                        let hv = h[pl.out_cells[a]] * scale;
                        for b in 0..k {
                            g[(l * k + a, b)] += hv * y[user][pl.in_cells[b]];
                        }
                    }
                }
                g
            })
            .collect();
        (rate, grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{realize, SceneConfig};
    use crate::config::{Architecture, Mode, RisConfig};
    use crate::linalg;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(cfg: RisConfig, users: usize, seed: u64) -> (ChannelRealization, ScatteringState, Precoder) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = SceneConfig {
            users,
            ..Default::default()
        };
        let ch = realize(&scene, &cfg, &mut rng).unwrap();
        let st = ScatteringState::random_feasible(&cfg, &mut rng).unwrap();
        let w = Precoder::new(linalg::gaussian_matrix(scene.tx_antennas, users, &mut rng).scale(0.5));
        (ch, st, w)
    }

    #[test]
    fn zero_precoder_gives_zero_rate() {
        let cfg = RisConfig::new(8, Mode::Reflective, Architecture::FullyConnected).unwrap();
        let (ch, st, _) = setup(cfg, 4, 1);
        let w = Precoder::zeros(4, 4);
        assert_eq!(sum_rate(&ch, &st, &w).unwrap(), 0.0);
    }

    #[test]
    fn unit_snr_single_user() {
        let cfg = RisConfig::new(1, Mode::Reflective, Architecture::SingleConnected).unwrap();
        let ch = ChannelRealization {
            g: CMatrix::from_element(1, 1, Complex64::new(0.6, 0.0)),
            h: vec![CVector::from_element(1, Complex64::new(0.0, 1.0 / 0.6))],
            sector_of_user: vec![0],
            noise_power: 1.0,
        };
        let st = ScatteringState::from_parts(cfg, vec![CMatrix::identity(1, 1)], None, None).unwrap();
        // |g|^2 = 1 with w = sqrt(P) = 1
        let w = Precoder::new(CMatrix::identity(1, 1));
        assert!((sum_rate(&ch, &st, &w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_state_rejected() {
        let cfg = RisConfig::new(2, Mode::Reflective, Architecture::SingleConnected).unwrap();
        let (ch, _, w) = setup(cfg, 4, 2);
        let st = ScatteringState::from_parts(cfg, vec![CMatrix::identity(1, 1).scale(1.1); 2], None, None).unwrap();
        assert!(matches!(sum_rate(&ch, &st, &w), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn block_objective_matches_dense_rate() {
        let configs = [
            RisConfig::new(8, Mode::Reflective, Architecture::GroupConnected(2)).unwrap(),
            RisConfig::new(8, Mode::Hybrid, Architecture::GroupConnected(4)).unwrap(),
            RisConfig::new(16, Mode::MultiSector(4), Architecture::DynamicGroupConnected(8)).unwrap(),
            RisConfig::new(8, Mode::Reflective, Architecture::NonDiagonal).unwrap(),
        ];
        for (i, cfg) in configs.into_iter().enumerate() {
            let (ch, st, w) = setup(cfg, 4, 10 + i as u64);
            let dense = sum_rate(&ch, &st, &w).unwrap();
            let obj = BlockObjective::new(&ch, &st, &w);
            let blockwise = obj.rate(st.blocks());
            assert!((dense - blockwise).abs() < 1e-10 * dense.max(1.0), "{cfg}: {dense} vs {blockwise}");
        }
    }

    /// Central finite differences on the real and imaginary part of every
    /// block entry; independent of the analytic gradient path.
    #[test]
    fn gradient_matches_finite_differences() {
        let configs = [
            RisConfig::new(6, Mode::Reflective, Architecture::GroupConnected(3)).unwrap(),
            RisConfig::new(8, Mode::Hybrid, Architecture::DynamicGroupConnected(4)).unwrap(),
            RisConfig::new(8, Mode::MultiSector(4), Architecture::SingleConnected).unwrap(),
        ];
        for (i, cfg) in configs.into_iter().enumerate() {
            let (ch, st, w) = setup(cfg, 4, 20 + i as u64);
            let obj = BlockObjective::new(&ch, &st, &w);
            let (_, grad) = obj.rate_and_gradient(st.blocks());
            let eps = 1e-6;
            for g in 0..st.blocks().len() {
                for idx in 0..st.blocks()[g].len() {
                    let mut fd = Complex64::new(0.0, 0.0);
                    for (unit, slot) in [(Complex64::new(1.0, 0.0), 0), (Complex64::new(0.0, 1.0), 1)] {
                        let mut plus = st.blocks().to_vec();
                        let mut minus = st.blocks().to_vec();
                        plus[g][idx] += unit * eps;
                        minus[g][idx] -= unit * eps;
                        let d = (obj.rate(&plus) - obj.rate(&minus)) / (2.0 * eps);
                        if slot == 0 {
                            fd.re = d;
                        } else {
                            fd.im = d;
                        }
                    }
                    let an = grad[g][idx];
                    let scale = an.norm().max(1e-3);
                    assert!((an - fd).norm() / scale < 1e-4, "{cfg} block {g}[{idx}]: {an} vs {fd}");
                }
            }
        }
    }

    /// Term-by-term SINR transcription on a 2x2x2 instance.
    #[test]
    fn matches_direct_sinr_transcription() {
        let cfg = RisConfig::new(2, Mode::Reflective, Architecture::FullyConnected).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let ch = ChannelRealization {
            g: linalg::gaussian_matrix(2, 2, &mut rng),
            h: (0..2)
                .map(|_| CVector::from_fn(2, |_, _| linalg::complex_gaussian(&mut rng)))
                .collect(),
            sector_of_user: vec![0, 0],
            noise_power: 0.3,
        };
        let st = ScatteringState::random_feasible(&cfg, &mut rng).unwrap();
        let w = Precoder::new(linalg::gaussian_matrix(2, 2, &mut rng));
        let phi = st.effective_matrices().phi[0].clone();
        let mut expected = 0.0;
        for k in 0..2 {
            let mut gains = [0.0; 2];
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..2 {
                    for n in 0..2 {
                        for t in 0..2 {
                            acc += ch.h[k][m].conj() * phi[(m, n)] * ch.g[(n, t)] * w.w[(t, j)];
                        }
                    }
                }
                gains[j] = acc.norm_sqr();
            }
            let sinr = gains[k] / (gains[1 - k] + 0.3);
            expected += (1.0 + sinr).log2();
        }
        let got = sum_rate(&ch, &st, &w).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }
}
