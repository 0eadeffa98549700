//! Scattering states and their feasible sets.
//!
//! A state stores one tall block `V_g` of shape `(L*K) x K` per impedance
//! group. Row `l*K + a` of `V_g` is row `a` of sector `l`'s effective matrix
//! restricted to the group, so stacking `[Phi_1; ...; Phi_L]` over a group's
//! columns gives back `V_g` and `sum_l Phi_l^H Phi_l = I` holds exactly when
//! every block has orthonormal columns.
//!
//! Dynamic grouping relabels which cells a group covers; the non-diagonal
//! architecture keeps one unit-modulus `1 x 1` block per incident antenna
//! and a pairing `sigma` giving the antenna it is re-radiated from.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::config::{Architecture, Mode, RisConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Default feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Which effective-matrix rows and columns a block writes to:
/// `Phi_l[out_cells[a], in_cells[b]] = V[l*K + a, b]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPlacement {
    pub in_cells: Vec<usize>,
    pub out_cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringState {
    config: RisConfig,
    blocks: Vec<CMatrix>,
    cell_permutation: Option<Vec<usize>>,
    pairing: Option<Vec<usize>>,
}

/// The per-sector effective scattering matrices `Phi_1, ..., Phi_L`, each
/// `M_s x M_s`. Sector 0 faces the transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveMatrices {
    pub phi: Vec<CMatrix>,
}

impl EffectiveMatrices {
    pub fn sectors(&self) -> usize {
        self.phi.len()
    }

    /// `sum_l Phi_l^H Phi_l`.
    pub fn gram(&self) -> CMatrix {
        let n = self.phi[0].ncols();
        self.phi
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, p| acc + p.adjoint() * p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub passed: bool,
    pub tolerance: f64,
    pub checks: Vec<InvariantCheck>,
}

impl ValidationReport {
    pub fn violations(&self) -> impl Iterator<Item = &InvariantCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn max_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.deviation).fold(0.0, f64::max)
    }

    pub fn check(&self, name: &str) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Shape `(L*K, K)` of every block of `config`.
pub fn block_shape(config: &RisConfig) -> (usize, usize) {
    let k = config.cells_per_group();
    (config.sectors() * k, k)
}

/// Lexicographically smallest fixed-point-free pairing: `0<->1, 2<->3, ...`.
pub fn adjacent_pairing(m: usize) -> Vec<usize> {
    (0..m).map(|i| i ^ 1).collect()
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &i in p {
        if i >= p.len() || seen[i] {
            return false;
        }
        seen[i] = true;
    }
    true
}

/// Number of indices violating `sigma(sigma(i)) = i, sigma(i) != i`.
fn pairing_defects(sigma: &[usize]) -> usize {
    (0..sigma.len())
        .filter(|&i| {
            let j = sigma[i];
            j >= sigma.len() || j == i || sigma[j] != i
        })
        .count()
}

impl ScatteringState {
    /// Assembles a state from raw parts, checking structure (counts, shapes,
    /// index ranges) but not feasibility; use [`validate`](Self::validate).
    pub fn from_parts(
        config: RisConfig,
        blocks: Vec<CMatrix>,
        cell_permutation: Option<Vec<usize>>,
        pairing: Option<Vec<usize>>,
    ) -> Result<Self> {
        config.check()?;
        let expected = config.num_blocks();
        if blocks.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{config} needs {expected} blocks, got {}",
                blocks.len()
            )));
        }
        let shape = block_shape(&config);
        for (g, b) in blocks.iter().enumerate() {
            if b.shape() != shape {
                return Err(Error::ShapeMismatch(format!(
                    "block {g} is {:?}, expected {:?}",
                    b.shape(),
                    shape
                )));
            }
        }
        match (&cell_permutation, config.is_dynamic()) {
            (Some(p), true) => {
                if p.len() != config.cells() || p.iter().any(|&i| i >= config.cells()) {
                    return Err(Error::ShapeMismatch(format!(
                        "cell permutation must index {} cells",
                        config.cells()
                    )));
                }
            }
            (None, false) => {}
            (Some(_), false) => {
                return Err(Error::ShapeMismatch(
                    "cell permutation given for a fixed architecture".into(),
                ))
            }
            (None, true) => {
                return Err(Error::ShapeMismatch(
                    "dynamic grouping requires a cell permutation".into(),
                ))
            }
        }
        match (&pairing, config.is_non_diagonal()) {
            (Some(s), true) => {
                if s.len() != config.elements() || s.iter().any(|&i| i >= config.elements()) {
                    return Err(Error::ShapeMismatch(format!(
                        "pairing must index {} antennas",
                        config.elements()
                    )));
                }
            }
            (None, false) => {}
            (Some(_), false) => {
                return Err(Error::ShapeMismatch(
                    "pairing given for a non-paired architecture".into(),
                ))
            }
            (None, true) => {
                return Err(Error::ShapeMismatch(
                    "non-diagonal architecture requires a pairing".into(),
                ))
            }
        }
        Ok(ScatteringState {
            config,
            blocks,
            cell_permutation,
            pairing,
        })
    }

    pub fn config(&self) -> &RisConfig {
        &self.config
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.blocks
    }

    pub fn cell_permutation(&self) -> Option<&[usize]> {
        self.cell_permutation.as_deref()
    }

    pub fn pairing(&self) -> Option<&[usize]> {
        self.pairing.as_deref()
    }

    /// Phases `theta_i` of a non-diagonal state (`Phi[sigma(i), i] = e^{j theta_i}`).
    pub fn pairing_phases(&self) -> Option<Vec<f64>> {
        self.pairing
            .as_ref()
            .map(|_| self.blocks.iter().map(|b| b[(0, 0)].arg()).collect())
    }

    /// Cells covered by every block, in block order.
    pub fn placements(&self) -> Vec<BlockPlacement> {
        placements_for(&self.config, self.cell_permutation.as_deref(), self.pairing.as_deref())
    }

    /// Same permutation/pairing with new blocks (shape-checked).
    pub fn with_blocks(&self, blocks: Vec<CMatrix>) -> Result<Self> {
        ScatteringState::from_parts(
            self.config,
            blocks,
            self.cell_permutation.clone(),
            self.pairing.clone(),
        )
    }

    /// Replaces the cell permutation of a dynamically grouped state.
    pub fn with_cell_permutation(&self, perm: Vec<usize>) -> Result<Self> {
        ScatteringState::from_parts(self.config, self.blocks.clone(), Some(perm), None)
    }

    /// Replaces the pairing of a non-diagonal state, keeping per-antenna phases.
    pub fn with_pairing(&self, sigma: Vec<usize>) -> Result<Self> {
        ScatteringState::from_parts(self.config, self.blocks.clone(), None, Some(sigma))
    }

    pub fn validate(&self, tol: f64) -> Result<ValidationReport> {
        // from_parts guarantees shapes, but states may be deserialized or built
        // by hand in tests
        let shape = block_shape(&self.config);
        if self.blocks.len() != self.config.num_blocks()
            || self.blocks.iter().any(|b| b.shape() != shape)
        {
            return Err(Error::ShapeMismatch(format!(
                "blocks do not match {}",
                self.config
            )));
        }
        let mut checks = Vec::new();
        let mut push = |name, deviation: f64| {
            checks.push(InvariantCheck {
                name,
                deviation,
                passed: deviation.is_finite() && deviation <= tol,
            })
        };

        let block_dev = self
            .blocks
            .iter()
            .map(linalg::orthonormality_deviation)
            .fold(0.0, f64::max);
        push("block_orthonormality", block_dev);

        let mut structural_ok = true;
        if let Some(p) = &self.cell_permutation {
            let ok = is_permutation(p);
            structural_ok &= ok;
            push("cell_permutation", if ok { 0.0 } else { 1.0 });
        }
        if let Some(s) = &self.pairing {
            let defects = pairing_defects(s);
            structural_ok &= defects == 0;
            push("pairing_involution", defects as f64);
        }
        if structural_ok {
            let eff = self.effective_matrices();
            push("stack_identity", linalg::identity_deviation(&eff.gram()));
            if self.pairing.is_some() {
                let phi = &eff.phi[0];
                let m = phi.nrows();
                let mut bad = 0usize;
                for i in 0..m {
                    let row = (0..m).filter(|&j| phi[(i, j)].norm() > 0.0).count();
                    let col = (0..m).filter(|&j| phi[(j, i)].norm() > 0.0).count();
                    bad += usize::from(row != 1) + usize::from(col != 1);
                    if phi[(i, i)].norm() > 0.0 {
                        bad += 1;
                    }
                }
                push("phased_permutation", bad as f64);
            }
        }
        let passed = checks.iter().all(|c| c.passed);
        Ok(ValidationReport {
            passed,
            tolerance: tol,
            checks,
        })
    }

    /// Haar-random feasible state. Dynamic grouping gets a uniformly random
    /// cell permutation; non-diagonal gets a uniformly random pairing with
    /// i.i.d. uniform phases.
    pub fn random_feasible<R: Rng + ?Sized>(config: &RisConfig, rng: &mut R) -> Result<Self> {
        config.check()?;
        let (rows, cols) = block_shape(config);
        let blocks: Vec<CMatrix> = (0..config.num_blocks())
            .map(|_| linalg::haar_semi_unitary(rows, cols, rng))
            .collect();
        let cell_permutation = config.is_dynamic().then(|| {
            let mut p: Vec<usize> = (0..config.cells()).collect();
            p.shuffle(rng);
            p
        });
        let pairing = config.is_non_diagonal().then(|| {
            let m = config.elements();
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(rng);
            let mut sigma = vec![0; m];
            for pair in order.chunks(2) {
                sigma[pair[0]] = pair[1];
                sigma[pair[1]] = pair[0];
            }
            sigma
        });
        ScatteringState::from_parts(*config, blocks, cell_permutation, pairing)
    }

    /// Frobenius-nearest feasible state, block by block. Dynamic grouping
    /// uses the identity permutation and non-diagonal the adjacent pairing;
    /// use [`reproject`](Self::reproject) to keep existing combinatorial data.
    pub fn project(config: &RisConfig, raw_blocks: &[CMatrix]) -> Result<Self> {
        let perm = config.is_dynamic().then(|| (0..config.cells()).collect());
        let pairing = config
            .is_non_diagonal()
            .then(|| adjacent_pairing(config.elements()));
        let template = ScatteringState::from_parts(*config, raw_blocks.to_vec(), perm, pairing)?;
        template.reproject(raw_blocks)
    }

    /// Projects `raw_blocks` onto the feasible set, keeping this state's
    /// permutation and pairing.
    pub fn reproject(&self, raw_blocks: &[CMatrix]) -> Result<Self> {
        let shape = block_shape(&self.config);
        if raw_blocks.len() != self.blocks.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} raw blocks, got {}",
                self.blocks.len(),
                raw_blocks.len()
            )));
        }
        let mut out = Vec::with_capacity(raw_blocks.len());
        for (g, raw) in raw_blocks.iter().enumerate() {
            if raw.shape() != shape {
                return Err(Error::ShapeMismatch(format!(
                    "raw block {g} is {:?}, expected {:?}",
                    raw.shape(),
                    shape
                )));
            }
            let v = linalg::polar_factor(raw)
                .map_err(|sigma_min| Error::RankDeficient { block: g, sigma_min })?;
            out.push(v);
        }
        self.with_blocks(out)
    }

    /// Reads the blocks of `config` (with the given permutation or pairing)
    /// out of a set of effective matrices and projects them. Lifting a state
    /// into a richer architecture is exact; restricting it to a poorer one is
    /// the blockwise nearest point.
    pub fn from_effective(
        config: &RisConfig,
        eff: &EffectiveMatrices,
        cell_permutation: Option<Vec<usize>>,
        pairing: Option<Vec<usize>>,
    ) -> Result<Self> {
        config.check()?;
        if eff.sectors() != config.sectors()
            || eff.phi.iter().any(|p| p.shape() != (config.sector_size(), config.sector_size()))
        {
            return Err(Error::ShapeMismatch(format!(
                "effective matrices do not match {config}"
            )));
        }
        let (rows, cols) = block_shape(config);
        let k = config.cells_per_group();
        let raw: Vec<CMatrix> = placements_for(config, cell_permutation.as_deref(), pairing.as_deref())
            .iter()
            .map(|pl| {
                CMatrix::from_fn(rows, cols, |r, b| {
                    let (l, a) = (r / k, r % k);
                    eff.phi[l][(pl.out_cells[a], pl.in_cells[b])]
                })
            })
            .collect();
        let template = ScatteringState::from_parts(*config, raw.clone(), cell_permutation, pairing)?;
        template.reproject(&raw)
    }

    /// Scatters the blocks into the per-sector effective matrices.
    pub fn effective_matrices(&self) -> EffectiveMatrices {
        let ms = self.config.sector_size();
        let l_count = self.config.sectors();
        let k = self.config.cells_per_group();
        let mut phi = vec![CMatrix::zeros(ms, ms); l_count];
        for (v, pl) in self.blocks.iter().zip(self.placements()) {
            for (l, p) in phi.iter_mut().enumerate() {
                for a in 0..k {
                    for b in 0..k {
                        p[(pl.out_cells[a], pl.in_cells[b])] = v[(l * k + a, b)];
                    }
                }
            }
        }
        EffectiveMatrices { phi }
    }

    /// Snaps every phase of a reflective single-connected state to the
    /// nearest of `2^bits` uniformly spaced phases.
    pub fn quantize_phases(&self, bits: u32) -> Result<Self> {
        let single = self.config.mode() == Mode::Reflective
            && !self.config.is_dynamic()
            && !self.config.is_non_diagonal()
            && self.config.group_size_antennas() == 1;
        if !single {
            return Err(Error::UnsupportedArchitecture(format!(
                "phase quantization needs reflective single-connected, got {}",
                self.config
            )));
        }
        if bits == 0 {
            return Err(Error::InvalidConfig("quantization needs at least 1 bit".into()));
        }
        let levels = 2f64.powi(bits.min(1023) as i32);
        let step = std::f64::consts::TAU / levels;
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let theta = b[(0, 0)].arg().rem_euclid(std::f64::consts::TAU);
                let idx = (theta / step).round() % levels;
                CMatrix::from_element(1, 1, Complex64::from_polar(1.0, idx * step))
            })
            .collect();
        self.with_blocks(blocks)
    }

    /// Textual dump of the effective matrices: a `# phi_l` header per sector
    /// followed by comma-separated rows of `re+imj` entries.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.config);
        for (l, phi) in self.effective_matrices().phi.iter().enumerate() {
            let _ = writeln!(out, "# phi_{}", l + 1);
            for i in 0..phi.nrows() {
                let row: Vec<String> = (0..phi.ncols())
                    .map(|j| {
                        let z = phi[(i, j)];
                        let sign = if z.im.is_sign_negative() { '-' } else { '+' };
                        format!("{}{}{}j", z.re, sign, z.im.abs())
                    })
                    .collect();
                let _ = writeln!(out, "{}", row.join(","));
            }
        }
        out
    }
}

pub(crate) fn placements_for(
    config: &RisConfig,
    cell_permutation: Option<&[usize]>,
    pairing: Option<&[usize]>,
) -> Vec<BlockPlacement> {
    if let (Architecture::NonDiagonal, Some(sigma)) = (config.architecture(), pairing) {
        return (0..config.elements())
            .map(|i| BlockPlacement {
                in_cells: vec![i],
                out_cells: vec![sigma[i]],
            })
            .collect();
    }
    let k = config.cells_per_group();
    (0..config.num_blocks())
        .map(|g| {
            let cells: Vec<usize> = (g * k..(g + 1) * k)
                .map(|c| cell_permutation.map_or(c, |p| p[c]))
                .collect();
            BlockPlacement {
                in_cells: cells.clone(),
                out_cells: cells,
            }
        })
        .collect()
}
