//! Deterministic seed derivation.
//!
//! Every source of randomness in this crate is a pure function of a master
//! seed plus a chain of stream tags. Runs are therefore reproducible and
//! independent of scheduling: a worker pool may execute tasks in any order
//! because each task's seed is derived up front from its indices.

/// The 64-bit avalanche mixer from splitmix64 (Vigna's `fmix64` variant).
///
/// Every output bit depends on every input bit, so consecutive tags produce
/// statistically independent seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a chain of stream tags,
/// folding the tags in one at a time.
pub fn derive(master: u64, tags: &[u64]) -> u64 {
    let mut s = mix64(master);
    for &t in tags {
        s = mix64(s ^ mix64(t));
    }
    s
}
