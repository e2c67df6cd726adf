//! Fixed benchmark fixtures.

use sparsemorse_core::sampling::{gaussian_instance, trial_rng};
use sparsemorse_core::Instance;

/// Shapes `(m, n, s)` used across the benchmarks, smallest first.
pub const SHAPES: [(usize, usize, usize); 4] = [(4, 6, 2), (6, 8, 3), (8, 10, 3), (10, 12, 4)];

/// Gaussian instance of the given shape; the same seed always gives the same data.
pub fn fixture(m: usize, n: usize, s: usize, seed: u64) -> Instance {
    gaussian_instance(&mut trial_rng(seed, 0), m, n, s).expect("valid shape")
}
