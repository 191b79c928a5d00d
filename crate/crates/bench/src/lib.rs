//! Input generators shared by the criterion benches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tagscope_core::scaling::random_binary;

/// A seeded pair of random binary series of equal length.
pub fn binary_pair(len: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        random_binary(len, 0.3, &mut rng),
        random_binary(len, 0.3, &mut rng),
    )
}
