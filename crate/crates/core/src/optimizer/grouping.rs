//! Channel-adaptive cell grouping for the dynamically group-connected
//! architecture.
//!
//! Groupings are scored with `sum_k (sum_g ||h_k[g]|| * ||x[g]||)^2`, where `x`
//! is the field incident along the dominant transmit direction of `G` and
//! `[g]` restricts to the cells of group `g`. The inner sum is the largest
//! amplitude a group-connected surface can deliver to user `k` alone, so the
//! score is the sum of single-user power bounds.

use super::pairing::incident_field;
use crate::channel::ChannelRealization;
use crate::config::RisConfig;
use crate::error::{Error, Result};

/// Groupings tie within this relative score margin; ties keep the earlier
/// candidate (identity first).
const TIE_TOL: f64 = 1e-12;

/// Largest cell count for which [`GroupingMode::Exhaustive`] is allowed.
pub const EXHAUSTIVE_MAX_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupingMode {
    Greedy,
    Exhaustive,
}

struct Features {
    /// `|h_k|^2` per user and cell
    dep: Vec<Vec<f64>>,
    /// `|x|^2` per cell
    inc: Vec<f64>,
}

impl Features {
    fn new(ch: &ChannelRealization) -> Self {
        let dep = ch.h.iter().map(|h| h.iter().map(|z| z.norm_sqr()).collect()).collect();
        let inc = incident_field(&ch.g).iter().map(|z| z.norm_sqr()).collect();
        Features { dep, inc }
    }

    fn amplitudes(&self, cells: &[usize]) -> Vec<f64> {
        let xx: f64 = cells.iter().map(|&c| self.inc[c]).sum();
        self.dep
            .iter()
            .map(|d| (cells.iter().map(|&c| d[c]).sum::<f64>() * xx).sqrt())
            .collect()
    }

    fn score(&self, groups: &[Vec<usize>]) -> f64 {
        let mut amp = vec![0.0; self.dep.len()];
        for g in groups {
            for (a, x) in amp.iter_mut().zip(self.amplitudes(g)) {
                *a += x;
            }
        }
        amp.iter().map(|a| a * a).sum()
    }

    fn energy(&self, cell: usize) -> f64 {
        self.dep.iter().map(|d| (d[cell] * self.inc[cell]).sqrt()).sum()
    }
}

/// All partitions of `0..cells` into groups of `group` cells. Each group is
/// ascending and groups are ordered by their smallest member.
pub fn equal_partitions(cells: usize, group: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(remaining: &[usize], group: usize, current: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if remaining.is_empty() {
            out.push(current.clone());
            return;
        }
        let first = remaining[0];
        let rest = &remaining[1..];
        let mut chosen = Vec::with_capacity(group - 1);
        combos(rest, group - 1, 0, &mut chosen, &mut |pick| {
            let mut g = vec![first];
            g.extend_from_slice(pick);
            let left: Vec<usize> = rest.iter().copied().filter(|c| !pick.contains(c)).collect();
            current.push(g);
            rec(&left, group, current, out);
            current.pop();
        });
    }
    fn combos(items: &[usize], k: usize, start: usize, chosen: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if chosen.len() == k {
            f(chosen);
            return;
        }
        for i in start..items.len() {
            chosen.push(items[i]);
            combos(items, k, i + 1, chosen, f);
            chosen.pop();
        }
    }
    assert!(group > 0 && cells % group == 0, "group size must divide the cell count");
    let all: Vec<usize> = (0..cells).collect();
    let mut out = Vec::new();
    rec(&all, group, &mut Vec::new(), &mut out);
    out
}

/// Flattens a partition into the cell permutation consumed by
/// [`ScatteringState`](crate::state::ScatteringState): groups ordered by
/// smallest member, members ascending.
pub fn partition_to_permutation(groups: &[Vec<usize>]) -> Vec<usize> {
    let mut sorted: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| {
            let mut g = g.clone();
            g.sort_unstable();
            g
        })
        .collect();
    sorted.sort_by_key(|g| g[0]);
    sorted.concat()
}

fn identity_partition(cells: usize, group: usize) -> Vec<Vec<usize>> {
    (0..cells / group).map(|g| (g * group..(g + 1) * group).collect()).collect()
}

fn greedy_partition(f: &Features, cells: usize, group: usize) -> Vec<Vec<usize>> {
    let n_groups = cells / group;
    let mut order: Vec<usize> = (0..cells).collect();
    // strongest first; stable sort keeps index order on ties
    order.sort_by(|&a, &b| f.energy(b).total_cmp(&f.energy(a)));

    let mut groups: Vec<Vec<usize>> = vec![Vec::with_capacity(group); n_groups];
    for (i, &cell) in order.iter().enumerate() {
        if i < n_groups {
            // seed round-robin with the strongest cells
            groups[i].push(cell);
            continue;
        }
        let mut best = None;
        let mut best_score = f64::NEG_INFINITY;
        for gi in 0..n_groups {
            if groups[gi].len() == group {
                continue;
            }
            groups[gi].push(cell);
            let s = f.score(&groups);
            groups[gi].pop();
            if s > best_score * (1.0 + TIE_TOL) || best.is_none() {
                best_score = s;
                best = Some(gi);
            }
        }
        groups[best.expect("a group has room")].push(cell);
    }

    // pairwise exchange until no swap improves the score
    let mut current = f.score(&groups);
    let mut improved = true;
    let mut rounds = 0;
    while improved && rounds < 100 {
        improved = false;
        rounds += 1;
        for a in 0..n_groups {
            for b in a + 1..n_groups {
                for i in 0..group {
                    for j in 0..group {
                        let (ca, cb) = (groups[a][i], groups[b][j]);
                        groups[a][i] = cb;
                        groups[b][j] = ca;
                        let after = f.score(&groups);
                        if after > current * (1.0 + TIE_TOL) {
                            current = after;
                            improved = true;
                        } else {
                            groups[a][i] = ca;
                            groups[b][j] = cb;
                        }
                    }
                }
            }
        }
    }
    groups
}

/// Picks the cell grouping for a dynamically group-connected surface.
///
/// `Greedy` seeds one group per strongest cell, fills groups by largest
/// score gain, refines with pairwise exchanges and keeps the fixed grouping
/// if that scores at least as well. `Exhaustive` scores every partition
/// (at most [`EXHAUSTIVE_MAX_CELLS`] cells).
pub fn select_grouping_with(ch: &ChannelRealization, config: &RisConfig, mode: GroupingMode) -> Result<Vec<usize>> {
    if !config.is_dynamic() {
        return Err(Error::UnsupportedArchitecture(format!(
            "grouping selection needs dynamic grouping, got {config}"
        )));
    }
    let cells = config.cells();
    let group = config.cells_per_group();
    if ch.sector_size() != cells {
        return Err(Error::ShapeMismatch("channel does not match the configuration".into()));
    }
    let f = Features::new(ch);
    let identity = identity_partition(cells, group);
    let mut best = identity.clone();
    let mut best_score = f.score(&identity);
    let candidates = match mode {
        GroupingMode::Greedy => vec![greedy_partition(&f, cells, group)],
        GroupingMode::Exhaustive => {
            if cells > EXHAUSTIVE_MAX_CELLS {
                return Err(Error::InvalidConfig(format!(
                    "exhaustive grouping is limited to {EXHAUSTIVE_MAX_CELLS} cells, got {cells}"
                )));
            }
            equal_partitions(cells, group)
        }
    };
    for cand in candidates {
        let s = f.score(&cand);
        if s > best_score * (1.0 + TIE_TOL) {
            best_score = s;
            best = cand;
        }
    }
    Ok(partition_to_permutation(&best))
}

/// Selection score of a cell permutation (consecutive runs of
/// `cells_per_group` cells form the groups).
pub fn grouping_score(ch: &ChannelRealization, config: &RisConfig, perm: &[usize]) -> Result<f64> {
    let cells = config.cells();
    let group = config.cells_per_group();
    if ch.sector_size() != cells || perm.len() != cells {
        return Err(Error::ShapeMismatch("channel or permutation does not match the configuration".into()));
    }
    let groups: Vec<Vec<usize>> = perm.chunks(group).map(<[usize]>::to_vec).collect();
    Ok(Features::new(ch).score(&groups))
}

/// Greedy grouping selection; see [`select_grouping_with`].
pub fn select_grouping(ch: &ChannelRealization, config: &RisConfig) -> Result<Vec<usize>> {
    select_grouping_with(ch, config, GroupingMode::Greedy)
}
