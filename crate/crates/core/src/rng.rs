//! Seeded, named random substreams.
//!
//! Every run derives all of its randomness from one 64-bit master seed. Each
//! consumer gets its own ChaCha12 stream (selected via the cipher's stream
//! counter), so adding draws to one consumer never perturbs another and every
//! artifact is bit-reproducible per seed across platforms.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The fixed substream assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Substream {
    /// Special-set initialization (`S_v` Bernoulli draws).
    SpecialSets = 0,
    /// Phase-1 process draws (triangles, apexes, color pairs).
    Phase1 = 1,
    /// Phase-2 completion and resampling draws.
    Phase2 = 2,
    /// Telemetry argument sampling.
    Telemetry = 3,
}

/// The RNG for one named substream of `seed`.
pub fn substream(seed: u64, which: Substream) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn substreams_are_independent_and_reproducible() {
        let mut a1 = substream(7, Substream::Phase1);
        let mut a2 = substream(7, Substream::Phase1);
        let mut b = substream(7, Substream::Phase2);
        let xs1: Vec<u64> = (0..8).map(|_| a1.next_u64()).collect();
        let xs2: Vec<u64> = (0..8).map(|_| a2.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        assert_eq!(xs1, xs2, "same seed + substream must replay identically");
        assert_ne!(xs1, ys, "distinct substreams must differ");
    }

    #[test]
    fn distinct_seeds_differ() {
        let mut a = substream(1, Substream::SpecialSets);
        let mut b = substream(2, Substream::SpecialSets);
        assert_ne!(a.next_u64(), b.next_u64());
    }
}
