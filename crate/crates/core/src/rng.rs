//! Deterministic pseudo-random streams for sampling and tail choices.
//!
//! Everything downstream of a seed must be reproducible byte-for-byte, so the
//! crate uses a single tiny generator — SplitMix64 — in two forms: a stateful
//! stream for sampling loops, and a stateless per-index mix for "the k-th
//! choice under seed s" lookups that must not depend on evaluation order.

/// One SplitMix64 step: advances `state` and returns the next output word.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stateless mix of a seed and an index: the k-th draw of the stream seeded
/// at `seed`, computable without generating the first k−1 draws.
pub fn mix(seed: u64, k: u64) -> u64 {
    let mut state = seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    splitmix64(&mut state)
}

/// A seeded SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Stream seeded at `seed`.
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Next raw word.
    pub fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state)
    }

    /// Uniform draw from `0..bound` by rejection, so small bounds are unbiased.
    ///
    /// # Panics
    /// If `bound` is zero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        // Rejection zone: multiples of bound fitting in u64.
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }
}
