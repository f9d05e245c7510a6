//! Shared fixtures for the criterion benches.

use bandspec_core::SymmetricBandMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random symmetric band matrix of the given order and bandwidth, entries in [-10, 10].
pub fn random_band(order: usize, m: usize, seed: u64) -> SymmetricBandMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bands = (0..=m)
        .map(|k| (0..order - k).map(|_| rng.gen_range(-10.0..10.0)).collect())
        .collect();
    SymmetricBandMatrix::new(bands).expect("bands have consistent lengths")
}
