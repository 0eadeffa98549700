//! C ABI for `bdris-core`.
//!
//! Objects live behind opaque handles created by `*_new`/`*_realize`/`*_solve`
//! and released with the matching `*_free`. Every fallible call returns a
//! [`BdrisStatus`]; on failure `bdris_last_error_message` describes it.
//! Matrices cross the boundary as separate real and imaginary `double`
//! arrays in column-major order.

#![allow(clippy::missing_safety_doc)]

mod error;

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use bdris_core::linalg::CMatrix;
use bdris_core::optimizer::{self, OptimizerParams, Precoder};
use bdris_core::{circuit_complexity, channel, Architecture, ChannelRealization, Mode, RisConfig, SceneConfig};
use bdris_core::{ScatteringState, SolveResult};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use error::{bdris_last_error_message, BdrisStatus};
use error::{clear_last_error, fail, set_last_error};

/// Surface mode.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdrisMode {
    Reflective = 0,
    Hybrid = 1,
    /// Needs `sectors >= 3`.
    MultiSector = 2,
}

/// Circuit architecture.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdrisArchitecture {
    SingleConnected = 0,
    /// Needs `group_size` in antennas.
    GroupConnected = 1,
    FullyConnected = 2,
    /// Needs `group_size` in antennas.
    DynamicGroupConnected = 3,
    NonDiagonal = 4,
}

/// Scenario parameters; see [`bdris_scene_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdrisScene {
    pub tx_antennas: usize,
    pub users: usize,
    pub carrier_frequency: f64,
    pub d_tx_ris: f64,
    pub d_ris_user: f64,
    pub rician_factor: f64,
    pub tx_power: f64,
    pub noise_power: f64,
    pub path_loss_exponent: f64,
}

impl From<SceneConfig> for BdrisScene {
    fn from(s: SceneConfig) -> Self {
        BdrisScene {
            tx_antennas: s.tx_antennas,
            users: s.users,
            carrier_frequency: s.carrier_frequency,
            d_tx_ris: s.d_tx_ris,
            d_ris_user: s.d_ris_user,
            rician_factor: s.rician_factor,
            tx_power: s.tx_power,
            noise_power: s.noise_power,
            path_loss_exponent: s.path_loss_exponent,
        }
    }
}

impl From<BdrisScene> for SceneConfig {
    fn from(s: BdrisScene) -> Self {
        SceneConfig {
            tx_antennas: s.tx_antennas,
            users: s.users,
            carrier_frequency: s.carrier_frequency,
            d_tx_ris: s.d_tx_ris,
            d_ris_user: s.d_ris_user,
            rician_factor: s.rician_factor,
            tx_power: s.tx_power,
            noise_power: s.noise_power,
            path_loss_exponent: s.path_loss_exponent,
        }
    }
}

pub struct BdrisConfig(RisConfig);
pub struct BdrisState(ScatteringState);
pub struct BdrisChannel(ChannelRealization);
pub struct BdrisSolveResult(SolveResult);

fn guard(f: impl FnOnce() -> Result<(), BdrisStatus>) -> BdrisStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BdrisStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_last_error("internal panic");
            BdrisStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, BdrisStatus> {
    p.as_ref().ok_or_else(|| {
        set_last_error("null pointer argument");
        BdrisStatus::NullPointer
    })
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, BdrisStatus> {
    p.as_mut().ok_or_else(|| {
        set_last_error("null output pointer");
        BdrisStatus::NullPointer
    })
}

fn core<T>(r: bdris_core::Result<T>) -> Result<T, BdrisStatus> {
    r.map_err(fail)
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Writes `m` into caller buffers of `len` entries each.
unsafe fn copy_matrix(m: &CMatrix, re: *mut f64, im: *mut f64, len: usize) -> Result<(), BdrisStatus> {
    let n = m.len();
    if len < n {
        set_last_error(format!("buffer holds {len} entries, {n} needed"));
        return Err(BdrisStatus::BufferTooSmall);
    }
    if re.is_null() || im.is_null() {
        set_last_error("null output buffer");
        return Err(BdrisStatus::NullPointer);
    }
    let re = std::slice::from_raw_parts_mut(re, n);
    let im = std::slice::from_raw_parts_mut(im, n);
    for (i, z) in m.iter().enumerate() {
        re[i] = z.re;
        im[i] = z.im;
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bdris_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a configuration from `BdrisMode` and `BdrisArchitecture` codes.
/// `sectors` is read only for `MULTI_SECTOR` and `group_size` only for the
/// two group-connected architectures.
#[no_mangle]
pub unsafe extern "C" fn bdris_config_new(
    elements: usize,
    mode: i32,
    sectors: usize,
    architecture: i32,
    group_size: usize,
    out_config: *mut *mut BdrisConfig,
) -> BdrisStatus {
    guard(|| {
        let slot = out(out_config)?;
        let bad = |what: &str, v: i32| {
            set_last_error(format!("unknown {what} code {v}"));
            BdrisStatus::InvalidConfig
        };
        let mode = match mode {
            m if m == BdrisMode::Reflective as i32 => Mode::Reflective,
            m if m == BdrisMode::Hybrid as i32 => Mode::Hybrid,
            m if m == BdrisMode::MultiSector as i32 => Mode::MultiSector(sectors),
            m => return Err(bad("mode", m)),
        };
        let arch = match architecture {
            a if a == BdrisArchitecture::SingleConnected as i32 => Architecture::SingleConnected,
            a if a == BdrisArchitecture::GroupConnected as i32 => Architecture::GroupConnected(group_size),
            a if a == BdrisArchitecture::FullyConnected as i32 => Architecture::FullyConnected,
            a if a == BdrisArchitecture::DynamicGroupConnected as i32 => {
                Architecture::DynamicGroupConnected(group_size)
            }
            a if a == BdrisArchitecture::NonDiagonal as i32 => Architecture::NonDiagonal,
            a => return Err(bad("architecture", a)),
        };
        *slot = boxed(BdrisConfig(core(RisConfig::new(elements, mode, arch))?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bdris_config_free(config: *mut BdrisConfig) {
    free(config)
}

/// Antennas per sector, the side length of every effective matrix.
#[no_mangle]
pub unsafe extern "C" fn bdris_config_sector_size(config: *const BdrisConfig, out_size: *mut usize) -> BdrisStatus {
    guard(|| {
        *out(out_size)? = borrow(config)?.0.sector_size();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bdris_config_sectors(config: *const BdrisConfig, out_sectors: *mut usize) -> BdrisStatus {
    guard(|| {
        *out(out_sectors)? = borrow(config)?.0.sectors();
        Ok(())
    })
}

/// Number of impedance components of the circuit.
#[no_mangle]
pub unsafe extern "C" fn bdris_circuit_complexity(config: *const BdrisConfig, out_count: *mut u64) -> BdrisStatus {
    guard(|| {
        let cfg = borrow(config)?;
        *out(out_count)? = core(circuit_complexity(&cfg.0))?;
        Ok(())
    })
}

/// Writes the default scenario into `out_scene`.
#[no_mangle]
pub unsafe extern "C" fn bdris_scene_default(out_scene: *mut BdrisScene) -> BdrisStatus {
    guard(|| {
        *out(out_scene)? = SceneConfig::default().into();
        Ok(())
    })
}

/// Haar-random feasible state from `seed`.
#[no_mangle]
pub unsafe extern "C" fn bdris_state_random(
    config: *const BdrisConfig,
    seed: u64,
    out_state: *mut *mut BdrisState,
) -> BdrisStatus {
    guard(|| {
        let cfg = borrow(config)?;
        let slot = out(out_state)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        *slot = boxed(BdrisState(core(ScatteringState::random_feasible(&cfg.0, &mut rng))?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bdris_state_free(state: *mut BdrisState) {
    free(state)
}

/// Checks every feasibility invariant at `tol`; `out_passed` is 1 when all
/// hold, and `out_max_deviation` is the largest deviation found.
#[no_mangle]
pub unsafe extern "C" fn bdris_state_validate(
    state: *const BdrisState,
    tol: f64,
    out_passed: *mut i32,
    out_max_deviation: *mut f64,
) -> BdrisStatus {
    guard(|| {
        let s = borrow(state)?;
        let report = core(s.0.validate(tol))?;
        *out(out_passed)? = report.passed as i32;
        *out(out_max_deviation)? = report.max_deviation();
        Ok(())
    })
}

/// Copies the effective matrix of `sector` (side length from
/// `bdris_config_sector_size`) into `re`/`im`, each of `len` entries.
#[no_mangle]
pub unsafe extern "C" fn bdris_state_effective_matrix(
    state: *const BdrisState,
    sector: usize,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> BdrisStatus {
    guard(|| {
        let s = borrow(state)?;
        let eff = s.0.effective_matrices();
        let phi = eff.phi.get(sector).ok_or_else(|| {
            set_last_error(format!("sector {sector} out of range (L = {})", eff.phi.len()));
            BdrisStatus::ShapeMismatch
        })?;
        copy_matrix(phi, re, im, len)
    })
}

/// Draws a channel for `config` in `scene` from `seed`.
#[no_mangle]
pub unsafe extern "C" fn bdris_channel_realize(
    scene: *const BdrisScene,
    config: *const BdrisConfig,
    seed: u64,
    out_channel: *mut *mut BdrisChannel,
) -> BdrisStatus {
    guard(|| {
        let scene: SceneConfig = (*borrow(scene)?).into();
        let cfg = borrow(config)?;
        let slot = out(out_channel)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        *slot = boxed(BdrisChannel(core(channel::realize(&scene, &cfg.0, &mut rng))?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bdris_channel_free(channel: *mut BdrisChannel) {
    free(channel)
}

/// Sum-rate (bps/Hz) of `state` with the `tx_antennas x users` precoder
/// given column-major in `w_re`/`w_im`.
#[no_mangle]
pub unsafe extern "C" fn bdris_sum_rate(
    channel: *const BdrisChannel,
    state: *const BdrisState,
    w_re: *const f64,
    w_im: *const f64,
    tx_antennas: usize,
    users: usize,
    out_rate: *mut f64,
) -> BdrisStatus {
    guard(|| {
        let ch = borrow(channel)?;
        let s = borrow(state)?;
        let (re, im) = (borrow(w_re)?, borrow(w_im)?);
        let n = tx_antennas * users;
        let re = std::slice::from_raw_parts(re, n);
        let im = std::slice::from_raw_parts(im, n);
        let w = CMatrix::from_iterator(tx_antennas, users, re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)));
        *out(out_rate)? = core(optimizer::sum_rate(&ch.0, &s.0, &Precoder::new(w)))?;
        Ok(())
    })
}

/// Joint optimization with default parameters from a start drawn with
/// `seed`.
#[no_mangle]
pub unsafe extern "C" fn bdris_solve(
    channel: *const BdrisChannel,
    config: *const BdrisConfig,
    scene: *const BdrisScene,
    seed: u64,
    out_result: *mut *mut BdrisSolveResult,
) -> BdrisStatus {
    guard(|| {
        let ch = borrow(channel)?;
        let cfg = borrow(config)?;
        let scene: SceneConfig = (*borrow(scene)?).into();
        let slot = out(out_result)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let res = core(optimizer::solve(&ch.0, &cfg.0, &scene, &OptimizerParams::default(), &mut rng))?;
        *slot = boxed(BdrisSolveResult(res));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bdris_solve_result_free(result: *mut BdrisSolveResult) {
    free(result)
}

#[no_mangle]
pub unsafe extern "C" fn bdris_solve_result_rate(result: *const BdrisSolveResult, out_rate: *mut f64) -> BdrisStatus {
    guard(|| {
        *out(out_rate)? = borrow(result)?.0.final_rate();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bdris_solve_result_iterations(
    result: *const BdrisSolveResult,
    out_iterations: *mut usize,
) -> BdrisStatus {
    guard(|| {
        *out(out_iterations)? = borrow(result)?.0.iterations_used;
        Ok(())
    })
}

/// Copies the rate trajectory (initial point first). Call with `len = 0` to
/// learn the length through `out_len`.
#[no_mangle]
pub unsafe extern "C" fn bdris_solve_result_trajectory(
    result: *const BdrisSolveResult,
    buf: *mut f64,
    len: usize,
    out_len: *mut usize,
) -> BdrisStatus {
    guard(|| {
        let traj = &borrow(result)?.0.rate_trajectory;
        *out(out_len)? = traj.len();
        if len == 0 {
            return Ok(());
        }
        if len < traj.len() {
            set_last_error(format!("buffer holds {len} entries, {} needed", traj.len()));
            return Err(BdrisStatus::BufferTooSmall);
        }
        if buf.is_null() {
            set_last_error("null output buffer");
            return Err(BdrisStatus::NullPointer);
        }
        std::slice::from_raw_parts_mut(buf, traj.len()).copy_from_slice(traj);
        Ok(())
    })
}

/// Copy of the final scattering state as a new handle.
#[no_mangle]
pub unsafe extern "C" fn bdris_solve_result_state(
    result: *const BdrisSolveResult,
    out_state: *mut *mut BdrisState,
) -> BdrisStatus {
    guard(|| {
        let r = borrow(result)?;
        *out(out_state)? = boxed(BdrisState(r.0.final_state.clone()));
        Ok(())
    })
}

/// Copies the final `tx_antennas x users` precoder.
#[no_mangle]
pub unsafe extern "C" fn bdris_solve_result_precoder(
    result: *const BdrisSolveResult,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> BdrisStatus {
    guard(|| copy_matrix(&borrow(result)?.0.final_precoder.w, re, im, len))
}
