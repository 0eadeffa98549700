//! Circuit complexity: number of reconfigurable impedance components.

use crate::config::{Architecture, RisConfig};
use crate::error::{Error, Result};

/// Impedance components needed by `config`.
///
/// A fully-connected network over `g` ports needs `g(g+1)/2` components, so
/// `G = M/g` groups need `(g+1) M / 2`. Single-connected is the group size
/// `L` case: `M` (reflective), `3M/2` (hybrid), `(L+1)M/2` (multi-sector).
/// Dynamic grouping and the non-diagonal architecture have no entry.
pub fn circuit_complexity(config: &RisConfig) -> Result<u64> {
    config.check()?;
    match config.architecture() {
        Architecture::DynamicGroupConnected(_) | Architecture::NonDiagonal => {
            Err(Error::UnsupportedArchitecture(format!(
                "no circuit complexity defined for {}",
                config.architecture().label()
            )))
        }
        _ => {
            let m = config.elements() as u64;
            let g = config.canonical().group_size_antennas() as u64;
            Ok((g + 1) * m / 2)
        }
    }
}
