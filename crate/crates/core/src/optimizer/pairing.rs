//! Antenna pairing for the non-diagonal architecture (single user).
//!
//! Every antenna is linked to exactly one other antenna, so `sigma` is a
//! fixed-point-free involution and `Phi[sigma(i), i] = e^{j theta_i}`. With the
//! phases co-phasing every path, the received amplitude is
//! `sum_i |h_{sigma(i)}| |g_i|`; a pair `{i, j}` contributes
//! `|g_i||h_j| + |g_j||h_i|`, so the best pairing is a maximum-weight perfect
//! matching on these weights.

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::config::RisConfig;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::state::ScatteringState;

/// Largest antenna count solved exactly (subset dynamic program); larger
/// arrays use sorted seeding plus pairwise exchange.
pub const EXACT_PAIRING_MAX: usize = 20;

const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub sigma: Vec<usize>,
    pub phases: Vec<f64>,
}

impl Pairing {
    /// The scattering state realizing this pairing.
    pub fn to_state(&self, config: &RisConfig) -> Result<ScatteringState> {
        let blocks = self
            .phases
            .iter()
            .map(|&t| CMatrix::from_element(1, 1, Complex64::from_polar(1.0, t)))
            .collect();
        ScatteringState::from_parts(*config, blocks, None, Some(self.sigma.clone()))
    }
}

/// Co-phased amplitude `sum_i b[sigma(i)] * a[i]`.
pub fn pairing_objective(incident: &[f64], departure: &[f64], sigma: &[usize]) -> f64 {
    sigma.iter().enumerate().map(|(i, &j)| departure[j] * incident[i]).sum()
}

/// Upper bound over all permutations: both magnitude lists sorted and
/// matched rank to rank.
pub fn rank_matching_bound(incident: &[f64], departure: &[f64]) -> f64 {
    let mut a = incident.to_vec();
    let mut b = departure.to_vec();
    a.sort_by(|x, y| y.total_cmp(x));
    b.sort_by(|x, y| y.total_cmp(x));
    a.iter().zip(&b).map(|(x, y)| x * y).sum()
}

fn pair_weight(a: &[f64], b: &[f64], i: usize, j: usize) -> f64 {
    a[i] * b[j] + a[j] * b[i]
}

fn exact_matching(a: &[f64], b: &[f64]) -> Vec<usize> {
    let m = a.len();
    let full = (1usize << m) - 1;
    let mut memo = vec![f64::NAN; 1 << m];
    fn best(mask: usize, full: usize, a: &[f64], b: &[f64], memo: &mut [f64]) -> f64 {
        if mask == full {
            return 0.0;
        }
        if !memo[mask].is_nan() {
            return memo[mask];
        }
        let i = (!mask).trailing_zeros() as usize;
        let mut value = f64::NEG_INFINITY;
        for j in i + 1..a.len() {
            if mask & (1 << j) == 0 {
                let v = pair_weight(a, b, i, j) + best(mask | (1 << i) | (1 << j), full, a, b, memo);
                value = value.max(v);
            }
        }
        memo[mask] = value;
        value
    }
    let mut sigma = vec![usize::MAX; m];
    let mut mask = 0usize;
    while mask != full {
        let target = best(mask, full, a, b, &mut memo);
        let i = (!mask).trailing_zeros() as usize;
        // smallest partner reaching the optimum gives the lexicographically
        // smallest sigma
        let j = (i + 1..m)
            .filter(|&j| mask & (1 << j) == 0)
            .find(|&j| {
                let v = pair_weight(a, b, i, j) + best(mask | (1 << i) | (1 << j), full, a, b, &mut memo);
                v >= target - TIE_TOL * target.abs()
            })
            .expect("optimum is attained");
        sigma[i] = j;
        sigma[j] = i;
        mask |= (1 << i) | (1 << j);
    }
    sigma
}

fn heuristic_matching(a: &[f64], b: &[f64]) -> Vec<usize> {
    let m = a.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| (a[y] + b[y]).total_cmp(&(a[x] + b[x])));
    let mut sigma = vec![0; m];
    for p in order.chunks(2) {
        sigma[p[0]] = p[1];
        sigma[p[1]] = p[0];
    }
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..m {
            for k in 0..m {
                let (j, l) = (sigma[i], sigma[k]);
                if k == i || k == j || i > j || k > l {
                    continue;
                }
                let now = pair_weight(a, b, i, j) + pair_weight(a, b, k, l);
                let alt1 = pair_weight(a, b, i, k) + pair_weight(a, b, j, l);
                let alt2 = pair_weight(a, b, i, l) + pair_weight(a, b, j, k);
                if alt1 > now * (1.0 + TIE_TOL) && alt1 >= alt2 {
                    sigma[i] = k;
                    sigma[k] = i;
                    sigma[j] = l;
                    sigma[l] = j;
                    improved = true;
                } else if alt2 > now * (1.0 + TIE_TOL) {
                    sigma[i] = l;
                    sigma[l] = i;
                    sigma[j] = k;
                    sigma[k] = j;
                    improved = true;
                }
            }
        }
    }
    sigma
}

/// Best pairing for incident magnitudes `a` and departure magnitudes `b`.
pub fn best_pairing(incident: &[f64], departure: &[f64]) -> Result<Vec<usize>> {
    let m = incident.len();
    if m != departure.len() || m == 0 || m % 2 != 0 {
        return Err(Error::ShapeMismatch(format!(
            "pairing needs two equal even-length magnitude lists, got {} and {}",
            m,
            departure.len()
        )));
    }
    Ok(if m <= EXACT_PAIRING_MAX {
        exact_matching(incident, departure)
    } else {
        heuristic_matching(incident, departure)
    })
}

/// Incident field used for pairing: `G v` with `v` the dominant right
/// singular vector of `G` (the optimal single-user transmit direction when
/// `G` has rank one; `v = 1` for a single transmit antenna).
pub fn incident_field(g: &CMatrix) -> CVector {
    if g.ncols() == 1 {
        return g.column(0).into_owned();
    }
    let svd = g.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^H");
    let imax = svd.singular_values.imax();
    let v = vt.row(imax).adjoint();
    g * v
}

/// Pairing and co-phasing phases for a single-user non-diagonal surface.
pub fn pair_antennas(ch: &ChannelRealization, config: &RisConfig) -> Result<Pairing> {
    if !config.is_non_diagonal() {
        return Err(Error::UnsupportedArchitecture(format!(
            "antenna pairing needs the non-diagonal architecture, got {config}"
        )));
    }
    if ch.users() != 1 {
        return Err(Error::UnsupportedArchitecture(format!(
            "antenna pairing is single-user only, got {} users",
            ch.users()
        )));
    }
    if ch.sector_size() != config.elements() {
        return Err(Error::ShapeMismatch("channel does not match the configuration".into()));
    }
    let g = incident_field(&ch.g);
    let h = &ch.h[0];
    let a: Vec<f64> = g.iter().map(|z| z.norm()).collect();
    let b: Vec<f64> = h.iter().map(|z| z.norm()).collect();
    let sigma = best_pairing(&a, &b)?;
    let phases = sigma
        .iter()
        .enumerate()
        .map(|(i, &j)| h[j].arg() - g[i].arg())
        .collect();
    Ok(Pairing { sigma, phases })
}
