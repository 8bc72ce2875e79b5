#![allow(dead_code)]

use polysel_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Matrix {
    let data: Vec<f64> = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_col_major(n, p, data).unwrap()
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// The 2x2 design with columns (1, -1) and (0, 1).
pub fn fixture() -> Matrix {
    Matrix::from_rows(&[[1.0, 0.0], [-1.0, 1.0]]).unwrap()
}
