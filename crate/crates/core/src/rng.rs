//! Deterministic stream seeding for multistart sampling.
//!
//! Streams are xorshift128 generators whose seed material comes from a
//! SplitMix64 expansion of `(seed, key)`, so distinct keys give independent
//! streams and results never depend on evaluation order.

use rand_xorshift::XorShiftRng;

/// SplitMix64 step (Steele, Lea & Flood's constants).
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for `(seed, key)`.
pub(crate) fn stream(seed: u64, key: u64) -> XorShiftRng {
    let mut state = seed ^ key.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut bytes = [0u8; 16];
    bytes[..8].copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    bytes[8..].copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    // All-zero seeds would degenerate a xorshift state.
    if bytes.iter().all(|&b| b == 0) {
        bytes[0] = 1;
    }
    use rand::SeedableRng;
    XorShiftRng::from_seed(bytes)
}
