//! Seeded random instances.
//!
//! Every experiment derives one generator per trial from `(seed, trial)`,
//! so results do not depend on how trials are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::model::Instance;

/// Generator for trial `index` of an experiment seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::new(rows, cols, gaussian_vec(rng, rows * cols)).expect("finite samples")
}

/// `(A, b)` with independent standard normal entries.
pub fn gaussian_instance<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    n: usize,
    s: usize,
) -> Result<Instance> {
    let a = gaussian_matrix(rng, m, n);
    let b = gaussian_vec(rng, m);
    Instance::new(a, b, s)
}
