//! Stable seed derivation.
//!
//! Seeds are mixed with SplitMix64 rather than `std::hash`, so derived
//! streams do not change between toolchains or platforms.

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of an ordered tuple of coordinates.
pub fn hash_coords(parts: &[u64]) -> u64 {
    parts.iter().fold(0x243F_6A88_85A3_08D3, |h, &p| splitmix64(h ^ splitmix64(p)))
}

/// `base ^ hash(parts)`.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    base ^ hash_coords(parts)
}
