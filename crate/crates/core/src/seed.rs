//! Deterministic per-stage seeds derived from one root seed.

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for a named stage. Stable across platforms and releases.
pub fn stage_seed(root: u64, stage: &str) -> u64 {
    // FNV-1a over the label keeps the mapping independent of std's hasher.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stage.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    mix(root ^ mix(h))
}

pub const STAGE_SIMULATE: &str = "simulate";
pub const STAGE_SAMPLER: &str = "sampler";
