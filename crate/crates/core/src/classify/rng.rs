// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded random streams.
//!
//! One root seed fans out into independent ChaCha streams, one per consumer,
//! so the members and the fold shuffler never share state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream reserved for fold assignment.
pub const FOLD_STREAM: u64 = 100;

/// Stream `stream` of the generator rooted at `seed`.
pub fn member_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Deterministically mixes a root seed with a tag (SplitMix64 finalizer).
pub fn derive_seed(root: u64, tag: u64) -> u64 {
    let mut z = root ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
