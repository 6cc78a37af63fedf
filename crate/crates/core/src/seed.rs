//! Seed derivation shared by the optimizer and the experiment runner.
//!
//! Derived seeds are a SplitMix64 chain over the inputs, so a seed depends on
//! every coordinate in order and nothing else.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a list of coordinates.
pub fn derive(master: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(splitmix(master), |acc, &c| splitmix(acc ^ splitmix(c)))
}
