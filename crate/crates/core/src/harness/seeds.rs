//! Stable seed derivation (SplitMix64 finalizer). The constants are fixed so
//! seeds are identical across platforms and releases.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const SOLVER_TAG: u64 = 0x736F_6C76_6572_0001;
const CHANNEL_TAG: u64 = 0x6368_616E_6E65_6C01;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive(tag: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(mix(tag), |acc, &w| mix(acc.wrapping_add(GOLDEN).wrapping_add(mix(w))))
}

/// Seed of the solver stream for trial `trial` of sweep point `sweep_id`.
pub fn child_seed(master: u64, sweep_id: u64, trial: u64) -> u64 {
    derive(SOLVER_TAG, &[master, sweep_id, trial])
}

/// Seed of the channel draw. It depends on `(M, L, trial)` only, so every
/// architecture at the same surface size and mode sees the same channels.
pub fn channel_seed(master: u64, elements: u64, sectors: u64, trial: u64) -> u64 {
    derive(CHANNEL_TAG, &[master, elements, sectors, trial])
}
