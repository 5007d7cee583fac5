//! Deterministic seed derivation for parallel trials.
//!
//! Every experiment owns one base seed; per-trial generators use seeds
//! derived through a splitmix64 chain so that trial outcomes do not depend
//! on scheduling order and are identical across platforms.

/// One splitmix64 step (Steele, Lea, Flood 2014 constants).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a base seed and a stream path. The path encodes
/// the position of the consumer, e.g. `[ratio_index, trial, purpose]`.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut s = splitmix64(base);
    for &p in path {
        s = splitmix64(s ^ splitmix64(p));
    }
    s
}
