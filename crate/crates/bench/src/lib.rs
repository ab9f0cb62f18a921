//! Shared inputs for the benchmarks.

use trp_core::{sample_matrix, DenseMatrix, EntryDistribution, SeedSpec, Vector};

pub fn gaussian_vector(d: usize, seed: u64) -> Vector {
    Vector::new(gaussian_matrix(d, 1, seed).into_data())
}

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    sample_matrix(&EntryDistribution::Gaussian, rows, cols, &SeedSpec::new(seed))
        .expect("benchmark shapes are valid")
}
