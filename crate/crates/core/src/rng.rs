//! Seeded random streams.
//!
//! Every random decision in the lab is drawn from a [`Stream`], a ChaCha8
//! generator keyed by a single `u64`. Seeds for individual problems and tries
//! are derived from the campaign master seed with [`derive_seed`], a pure
//! function built from the SplitMix64 finalizer and FNV-1a, so any
//! implementation can reproduce the same streams bit for bit.
//!
//! Integer sampling uses Lemire's multiply-and-reject method on raw 64-bit
//! words and coin flips take the top bit of one word. Both are defined here
//! rather than borrowed from a distribution library so the consumed word
//! sequence never changes under us.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifier written to manifests so a reader knows which generator produced a store.
pub const RNG_ALGORITHM: &str =
    "chacha8 (rand_chacha 0.3, seed_from_u64); seeds: splitmix64-mix chain over fnv1a64(tag)";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const TRY_OFFSET: u64 = 0xD1B5_4A32_D192_ED03;

/// SplitMix64 output finalizer. A bijection on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Derive the seed of one random stream from the campaign master seed.
///
/// ```text
/// z = mix64(master)
/// z = mix64(z ^ fnv1a64(tag))
/// z = mix64(z ^ mix64(problem + 0x9E3779B97F4A7C15))
/// z = mix64(z ^ mix64(try     + 0xD1B54A32D192ED03))
/// ```
///
/// All additions wrap. Campaigns use the tags `"gen"` (formula generation,
/// `try_index = 0`) and `"try"` (one GSAT try).
pub fn derive_seed(master_seed: u64, purpose_tag: &str, problem_index: u64, try_index: u64) -> u64 {
    let mut z = mix64(master_seed);
    z = mix64(z ^ fnv1a64(purpose_tag.as_bytes()));
    z = mix64(z ^ mix64(problem_index.wrapping_add(GOLDEN)));
    mix64(z ^ mix64(try_index.wrapping_add(TRY_OFFSET)))
}

/// A deterministic random stream.
#[derive(Clone, Debug)]
pub struct Stream {
    inner: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Fair coin: the top bit of the next word.
    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// Uniform integer in `0..n`. `n` must be nonzero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let mut m = u128::from(self.next_u64()) * u128::from(n);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                m = u128::from(self.next_u64()) * u128::from(n);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// Uniform `f64` in `[0, 1)` from the top 53 bits.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}
