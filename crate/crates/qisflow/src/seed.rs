//! Deterministic seed fan-out. Batch experiments give every run its own
//! generator stream derived from (base seed, run index), so runs are
//! independent in distribution yet exactly reproducible.

/// SplitMix64 finalizer over an index-offset state. Cheap, stateless, and
/// well dispersed even for adjacent indices.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
