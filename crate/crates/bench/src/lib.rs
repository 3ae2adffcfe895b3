//! Seeded inputs shared by the benchmarks.

use erdim_core::algebra::ComplexMatrix;
use erdim_core::trotter_trn::{build_trn, CoupledModel, TimelineMps};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random Hermitian `h` scaled so `-i h` has unit 1-norm times `scale`.
pub fn generator_like(dim: usize, scale: f64, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = ComplexMatrix::random_hermitian(dim, &mut rng);
    let n = h.norm_1();
    h.scale(erdim_core::C64::new(0.0, -scale / n))
}

/// Timeline network of a qubit and a `dr`-level reservoir over `steps` steps.
pub fn sample_trn(dr: usize, steps: usize, seed: u64) -> TimelineMps {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = CoupledModel::random(2, dr, 1, 0.05, true, &mut rng).expect("valid random model");
    build_trn(&m, 0.1, steps).expect("within size budget")
}
