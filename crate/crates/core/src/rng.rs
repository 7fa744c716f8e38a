//! Reproducible random streams.
//!
//! Every random quantity in this crate is drawn from ChaCha8
//! ([`rand_chacha::ChaCha8Rng`]), whose output is fixed by its 256-bit key
//! and 64-bit stream number on every platform. A `(seed, index)` pair maps
//! to the key expanded from `seed` by `seed_from_u64` and to stream number
//! `index`, so replicate `i` of an experiment sees the same numbers no matter
//! how replicates are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// Generator for a single seeded run.
pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream `index` derived from `seed`.
pub fn substream(seed: u64, index: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(substream(7, 3), |r, _: u64| Some(r.random::<u64>())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(substream(7, 3), |r, _: u64| Some(r.random::<u64>())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(substream(7, 4), |r, _: u64| Some(r.random::<u64>())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(seeded(1).random::<u64>(), seeded(2).random::<u64>());
    }

    #[test]
    fn pinned_first_output() {
        // Guards against silent generator changes in dependency upgrades.
        let first = seeded(42).random::<u64>();
        assert_eq!(first, 12578764544318200737);
        assert_eq!(first, seeded(42).random::<u64>());
        assert_eq!(substream(42, 0).random::<u64>(), first);
    }
}
