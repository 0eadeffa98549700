//! The BD-RIS configuration space: element count, mode (how many sectors the
//! surface serves) and inter-cell architecture.
//!
//! Every mode/architecture pair is realized by the same building block: a
//! fully-connected impedance network spanning one group of `K` cells, each
//! cell holding `L` back-to-back antennas. The scattering state of one group
//! is an `(L*K) x K` matrix with orthonormal columns.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Half-space coverage, one sector.
    Reflective,
    /// Reflection plus transmission through the surface (two sectors).
    Hybrid,
    /// `L >= 2` angular sectors.
    MultiSector(usize),
}

impl Mode {
    /// Number of sectors `L` (1 for reflective, 2 for hybrid).
    pub fn sectors(&self) -> usize {
        match *self {
            Mode::Reflective => 1,
            Mode::Hybrid => 2,
            Mode::MultiSector(l) => l,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Mode::Reflective => "reflective".to_string(),
            Mode::Hybrid => "hybrid".to_string(),
            Mode::MultiSector(l) => format!("multi_sector_{l}"),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Inter-cell architecture. Group sizes are counted in antennas, so a group
/// of `g` antennas holds `g / L` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    SingleConnected,
    GroupConnected(usize),
    FullyConnected,
    DynamicGroupConnected(usize),
    /// Antennas linked in pairs through phase shifters (reflective only).
    NonDiagonal,
}

impl Architecture {
    pub fn label(&self) -> &'static str {
        match self {
            Architecture::SingleConnected => "single",
            Architecture::GroupConnected(_) => "group",
            Architecture::FullyConnected => "fully",
            Architecture::DynamicGroupConnected(_) => "dynamic_group",
            Architecture::NonDiagonal => "non_diagonal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RisConfig {
    elements: usize,
    mode: Mode,
    architecture: Architecture,
}

impl RisConfig {
    pub fn new(elements: usize, mode: Mode, architecture: Architecture) -> Result<Self> {
        let cfg = RisConfig {
            elements,
            mode,
            architecture,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Re-runs the structural checks; deserialized configs bypass `new`.
    pub fn check(&self) -> Result<()> {
        let m = self.elements;
        let l = self.mode.sectors();
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if m == 0 {
            return bad("element count must be positive".into());
        }
        if l == 0 || (matches!(self.mode, Mode::MultiSector(_)) && l < 2) {
            return bad(format!("multi-sector mode needs at least 2 sectors, got {l}"));
        }
        if m % l != 0 {
            return bad(format!("sector count {l} does not divide M = {m}"));
        }
        match self.architecture {
            Architecture::GroupConnected(g) | Architecture::DynamicGroupConnected(g) => {
                if g == 0 || m % g != 0 {
                    return bad(format!("group size {g} does not divide M = {m}"));
                }
                if g % l != 0 {
                    return bad(format!("sector count {l} does not divide group size {g}"));
                }
            }
            Architecture::NonDiagonal => {
                if self.mode != Mode::Reflective {
                    return bad("non-diagonal architecture requires reflective mode".into());
                }
                if m % 2 != 0 {
                    return bad(format!("non-diagonal architecture needs even M, got {m}"));
                }
            }
            Architecture::SingleConnected | Architecture::FullyConnected => {}
        }
        Ok(())
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn architecture(&self) -> Architecture {
        self.architecture
    }

    pub fn sectors(&self) -> usize {
        self.mode.sectors()
    }

    /// Number of cells, `M / L`.
    pub fn cells(&self) -> usize {
        self.elements / self.sectors()
    }

    /// Antennas per sector, `M / L`; the dimension of every effective matrix.
    pub fn sector_size(&self) -> usize {
        self.cells()
    }

    /// Antennas per impedance-network group. Non-diagonal pairs antennas, so 2.
    pub fn group_size_antennas(&self) -> usize {
        match self.architecture {
            Architecture::SingleConnected => self.sectors(),
            Architecture::FullyConnected => self.elements,
            Architecture::GroupConnected(g) | Architecture::DynamicGroupConnected(g) => g,
            Architecture::NonDiagonal => 2,
        }
    }

    /// Cells per group, `K = group_size / L`.
    pub fn cells_per_group(&self) -> usize {
        match self.architecture {
            Architecture::NonDiagonal => 1,
            _ => self.group_size_antennas() / self.sectors(),
        }
    }

    /// Number of scattering blocks. Non-diagonal keeps one unit-modulus phase
    /// per incident antenna.
    pub fn num_blocks(&self) -> usize {
        match self.architecture {
            Architecture::NonDiagonal => self.elements,
            _ => self.elements / self.group_size_antennas(),
        }
    }

    /// Number of impedance-network groups `G`.
    pub fn num_groups(&self) -> usize {
        self.elements / self.group_size_antennas()
    }

    /// Rewrites single/fully-connected as the equivalent group-connected form.
    pub fn canonical(&self) -> RisConfig {
        let architecture = match self.architecture {
            Architecture::SingleConnected | Architecture::FullyConnected => {
                Architecture::GroupConnected(self.group_size_antennas())
            }
            other => other,
        };
        RisConfig {
            architecture,
            ..*self
        }
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(self.architecture, Architecture::DynamicGroupConnected(_))
    }

    pub fn is_non_diagonal(&self) -> bool {
        self.architecture == Architecture::NonDiagonal
    }

    pub fn with_architecture(&self, architecture: Architecture) -> Result<RisConfig> {
        RisConfig::new(self.elements, self.mode, architecture)
    }

    /// True when every scattering state of `self` is also feasible for
    /// `richer` (same mode, contiguous groups nested inside richer groups).
    pub fn nests_in(&self, richer: &RisConfig) -> bool {
        if self.elements != richer.elements || self.mode != richer.mode {
            return false;
        }
        let fixed = |c: &RisConfig| {
            matches!(
                c.architecture,
                Architecture::SingleConnected
                    | Architecture::GroupConnected(_)
                    | Architecture::FullyConnected
            )
        };
        fixed(self)
            && fixed(richer)
            && richer.group_size_antennas() % self.group_size_antennas() == 0
    }
}

impl fmt::Display for RisConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "M={} {} {}({})",
            self.elements,
            self.mode,
            self.architecture.label(),
            self.group_size_antennas()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let c = RisConfig::new(32, Mode::MultiSector(4), Architecture::GroupConnected(8)).unwrap();
        assert_eq!(c.cells(), 8);
        assert_eq!(c.cells_per_group(), 2);
        assert_eq!(c.num_groups(), 4);
        assert_eq!(c.num_blocks(), 4);

        let h = RisConfig::new(8, Mode::Hybrid, Architecture::FullyConnected).unwrap();
        assert_eq!(h.cells_per_group(), 4);
        assert_eq!(h.num_blocks(), 1);
    }

    #[test]
    fn rejects_inconsistent_configs() {
        assert!(RisConfig::new(6, Mode::MultiSector(4), Architecture::SingleConnected).is_err());
        assert!(RisConfig::new(16, Mode::Hybrid, Architecture::GroupConnected(3)).is_err());
        assert!(RisConfig::new(16, Mode::MultiSector(4), Architecture::GroupConnected(2)).is_err());
        assert!(RisConfig::new(16, Mode::Hybrid, Architecture::NonDiagonal).is_err());
        assert!(RisConfig::new(5, Mode::Reflective, Architecture::NonDiagonal).is_err());
        assert!(RisConfig::new(0, Mode::Reflective, Architecture::SingleConnected).is_err());
        assert!(RisConfig::new(4, Mode::MultiSector(1), Architecture::SingleConnected).is_err());
    }

    #[test]
    fn canonical_forms() {
        let s = RisConfig::new(8, Mode::Hybrid, Architecture::SingleConnected).unwrap();
        assert_eq!(s.canonical().architecture(), Architecture::GroupConnected(2));
        let f = RisConfig::new(8, Mode::Reflective, Architecture::FullyConnected).unwrap();
        assert_eq!(f.canonical().architecture(), Architecture::GroupConnected(8));
    }

    #[test]
    fn nesting() {
        let single = RisConfig::new(16, Mode::Reflective, Architecture::SingleConnected).unwrap();
        let g2 = single.with_architecture(Architecture::GroupConnected(2)).unwrap();
        let g4 = single.with_architecture(Architecture::GroupConnected(4)).unwrap();
        let full = single.with_architecture(Architecture::FullyConnected).unwrap();
        assert!(single.nests_in(&g2) && g2.nests_in(&g4) && g4.nests_in(&full));
        assert!(!g4.nests_in(&g2));
    }

    #[test]
    fn json_shape() {
        let c = RisConfig::new(16, Mode::MultiSector(4), Architecture::GroupConnected(8)).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(
            s,
            r#"{"elements":16,"mode":{"multi_sector":4},"architecture":{"group_connected":8}}"#
        );
    }
}
