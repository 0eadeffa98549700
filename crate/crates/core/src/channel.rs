//! Propagation scenario: Rician small-scale fading on both hops, free-space
//! path loss, ideal-sector RIS antenna gains and a blocked direct link.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Mode, RisConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Scenario parameters. Powers are in watts, distances in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub tx_antennas: usize,
    pub users: usize,
    pub carrier_frequency: f64,
    pub d_tx_ris: f64,
    pub d_ris_user: f64,
    /// Linear Rician factor; `f64::INFINITY` gives pure line of sight.
    pub rician_factor: f64,
    pub tx_power: f64,
    pub noise_power: f64,
    pub path_loss_exponent: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            tx_antennas: 4,
            users: 4,
            carrier_frequency: 2.4e9,
            d_tx_ris: 100.0,
            d_ris_user: 10.0,
            rician_factor: 1.0,
            tx_power: 1.0,
            noise_power: 1e-11,
            path_loss_exponent: 2.0,
        }
    }
}

impl SceneConfig {
    pub fn check(&self, config: &RisConfig) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.tx_antennas == 0 || self.users == 0 {
            return bad("transmit antennas and users must be positive".into());
        }
        let positive = [
            ("carrier_frequency", self.carrier_frequency),
            ("d_tx_ris", self.d_tx_ris),
            ("d_ris_user", self.d_ris_user),
            ("noise_power", self.noise_power),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.rician_factor >= 0.0) {
            return bad(format!("rician_factor must be >= 0, got {}", self.rician_factor));
        }
        if !(self.tx_power >= 0.0) || !self.tx_power.is_finite() {
            return bad(format!("tx_power must be >= 0, got {}", self.tx_power));
        }
        if !(self.path_loss_exponent >= 0.0) {
            return bad("path_loss_exponent must be >= 0".into());
        }
        if self.users % config.sectors() != 0 {
            return bad(format!(
                "{} users cannot be spread evenly over {} sectors",
                self.users,
                config.sectors()
            ));
        }
        Ok(())
    }
}

/// One channel draw. `g` maps the transmitter onto the sector facing it
/// (`M_s x N`); `h[k]` is the channel from the RIS antennas of sector
/// `sector_of_user[k]` to user `k`, entering the received signal as
/// `h[k]^H Phi_l G w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub g: CMatrix,
    pub h: Vec<CVector>,
    pub sector_of_user: Vec<usize>,
    pub noise_power: f64,
}

/// Friis free-space gain at the 1 m reference times `d^-exponent`.
pub fn path_loss(d: f64, f: f64, exponent: f64) -> Result<f64> {
    if !(d >= 1.0) {
        return Err(Error::Domain(format!("path loss needs d >= 1 m, got {d}")));
    }
    if !(f > 0.0) {
        return Err(Error::Domain(format!("carrier frequency must be positive, got {f}")));
    }
    let reference = SPEED_OF_LIGHT / (4.0 * PI * f);
    Ok(reference * reference * d.powf(-exponent))
}

/// Ideal-sector gain of one RIS antenna covering `4*pi/L` of the sphere,
/// with a half-space floor of 2.
pub fn antenna_gain(mode: Mode) -> f64 {
    mode.sectors().max(2) as f64
}

/// Large-scale power gains `(transmitter -> RIS, RIS -> user)`. Transmitter
/// and user antennas are isotropic.
pub fn large_scale_gains(scene: &SceneConfig, mode: Mode) -> Result<(f64, f64)> {
    let ga = antenna_gain(mode);
    let f = scene.carrier_frequency;
    let e = scene.path_loss_exponent;
    Ok((
        path_loss(scene.d_tx_ris, f, e)? * ga,
        path_loss(scene.d_ris_user, f, e)? * ga,
    ))
}

/// Sector (0-based) of user `k` (0-based): `ceil((k+1) L / K) - 1`.
pub fn user_sector(k: usize, users: usize, sectors: usize) -> usize {
    k * sectors / users
}

/// Half-wavelength uniform linear array response.
pub fn steering_vector(n: usize, angle: f64) -> CVector {
    let s = PI * angle.sin();
    CVector::from_fn(n, |i, _| Complex64::from_polar(1.0, s * i as f64))
}

fn rician_weights(kappa: f64) -> (f64, f64) {
    if kappa.is_infinite() {
        (1.0, 0.0)
    } else {
        ((kappa / (1.0 + kappa)).sqrt(), (1.0 / (1.0 + kappa)).sqrt())
    }
}

fn draw_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-PI / 2.0..PI / 2.0)
}

/// Draws one realization. The draw order (transmitter-side angles, RIS
/// angle, `G` scatter, then per user: angle, scatter) is fixed.
pub fn realize<R: Rng + ?Sized>(
    scene: &SceneConfig,
    config: &RisConfig,
    rng: &mut R,
) -> Result<ChannelRealization> {
    config.check()?;
    scene.check(config)?;
    let ms = config.sector_size();
    let n = scene.tx_antennas;
    let (gain_g, gain_h) = large_scale_gains(scene, config.mode())?;
    let (w_los, w_nlos) = rician_weights(scene.rician_factor);

    let aod = draw_angle(rng);
    let aoa = draw_angle(rng);
    let los = steering_vector(ms, aoa) * steering_vector(n, aod).adjoint();
    let scatter = linalg::gaussian_matrix(ms, n, rng);
    let g = (los * Complex64::from(w_los) + scatter * Complex64::from(w_nlos))
        * Complex64::from(gain_g.sqrt());

    let mut h = Vec::with_capacity(scene.users);
    for _ in 0..scene.users {
        let aod = draw_angle(rng);
        let los = steering_vector(ms, aod);
        let scatter = CVector::from_fn(ms, |_, _| linalg::complex_gaussian(rng));
        h.push((los * Complex64::from(w_los) + scatter * Complex64::from(w_nlos)) * Complex64::from(gain_h.sqrt()));
    }
    let sector_of_user = (0..scene.users)
        .map(|k| user_sector(k, scene.users, config.sectors()))
        .collect();
    Ok(ChannelRealization {
        g,
        h,
        sector_of_user,
        noise_power: scene.noise_power,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelJson {
    g: Vec<Vec<[f64; 2]>>,
    h: Vec<Vec<[f64; 2]>>,
    sector_of_user: Vec<usize>,
    noise_power: f64,
}

fn pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl ChannelRealization {
    pub fn users(&self) -> usize {
        self.h.len()
    }

    pub fn tx_antennas(&self) -> usize {
        self.g.ncols()
    }

    pub fn sector_size(&self) -> usize {
        self.g.nrows()
    }

    /// JSON object with `g` (row-major), `h`, `sector_of_user` and
    /// `noise_power`; complex entries are `[re, im]` pairs.
    pub fn to_json(&self) -> Result<String> {
        let doc = ChannelJson {
            g: (0..self.g.nrows())
                .map(|i| (0..self.g.ncols()).map(|j| pair(&self.g[(i, j)])).collect())
                .collect(),
            h: self.h.iter().map(|v| v.iter().map(pair).collect()).collect(),
            sector_of_user: self.sector_of_user.clone(),
            noise_power: self.noise_power,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ChannelJson = serde_json::from_str(text)?;
        let rows = doc.g.len();
        let cols = doc.g.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || doc.g.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("g must be a non-empty rectangular matrix".into()));
        }
        if doc.h.len() != doc.sector_of_user.len() || doc.h.iter().any(|v| v.len() != rows) {
            return Err(Error::Parse("h must hold one length-M_s vector per user".into()));
        }
        let c = |p: &[f64; 2]| Complex64::new(p[0], p[1]);
        Ok(ChannelRealization {
            g: CMatrix::from_fn(rows, cols, |i, j| c(&doc.g[i][j])),
            h: doc
                .h
                .iter()
                .map(|v| CVector::from_iterator(rows, v.iter().map(c)))
                .collect(),
            sector_of_user: doc.sector_of_user,
            noise_power: doc.noise_power,
        })
    }

    /// Same realization with every channel multiplied by `c` (the effective
    /// cascade scales by `c^2`).
    pub fn scaled(&self, c: f64) -> Self {
        let s = Complex64::from(c);
        ChannelRealization {
            g: &self.g * s,
            h: self.h.iter().map(|v| v * s).collect(),
            sector_of_user: self.sector_of_user.clone(),
            noise_power: self.noise_power,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Architecture;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn friis_reference_values() {
        let p1 = path_loss(1.0, 2.4e9, 2.0).unwrap();
        assert!((p1 - 9.8814e-5).abs() / 9.8814e-5 < 1e-4, "{p1}");
        assert!((10.0 * p1.log10() + 40.05).abs() < 0.01);
        let p100 = path_loss(100.0, 2.4e9, 2.0).unwrap();
        assert!((p100 / p1 - 1e-4).abs() < 1e-15);
        let p0 = path_loss(37.0, 1e9, 0.0).unwrap();
        let r = SPEED_OF_LIGHT / (4.0 * PI * 1e9);
        assert!((p0 - r * r).abs() < 1e-18);
        assert!(matches!(path_loss(0.5, 2.4e9, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn gains_per_mode() {
        assert_eq!(antenna_gain(Mode::Reflective), 2.0);
        assert_eq!(antenna_gain(Mode::Hybrid), 2.0);
        assert_eq!(antenna_gain(Mode::MultiSector(4)), 4.0);
    }

    #[test]
    fn sector_assignment_is_even() {
        let assign = |users, l| (0..users).map(|k| user_sector(k, users, l)).collect::<Vec<_>>();
        assert_eq!(assign(4, 1), vec![0, 0, 0, 0]);
        assert_eq!(assign(4, 2), vec![0, 0, 1, 1]);
        assert_eq!(assign(4, 4), vec![0, 1, 2, 3]);
        assert_eq!(assign(6, 3), vec![0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn pure_los_has_constant_modulus() {
        let scene = SceneConfig {
            rician_factor: f64::INFINITY,
            ..Default::default()
        };
        let cfg = RisConfig::new(8, Mode::Reflective, Architecture::SingleConnected).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = realize(&scene, &cfg, &mut rng).unwrap();
        let (gg, gh) = large_scale_gains(&scene, cfg.mode()).unwrap();
        for z in ch.g.iter() {
            assert!((z.norm() - gg.sqrt()).abs() < 1e-12 * gg.sqrt());
        }
        for v in &ch.h {
            for z in v.iter() {
                assert!((z.norm() - gh.sqrt()).abs() < 1e-12 * gh.sqrt());
            }
        }
    }

    #[test]
    fn scene_rejects_uneven_users() {
        let scene = SceneConfig::default();
        let cfg = RisConfig::new(24, Mode::MultiSector(3), Architecture::SingleConnected).unwrap();
        assert!(scene.check(&cfg).is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = RisConfig::new(4, Mode::Hybrid, Architecture::SingleConnected).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ch = realize(&SceneConfig::default(), &cfg, &mut rng).unwrap();
        let back = ChannelRealization::from_json(&ch.to_json().unwrap()).unwrap();
        assert_eq!(back, ch);
    }
}
