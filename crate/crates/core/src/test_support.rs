//! Shared helpers for unit tests.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::{DensityMatrix, HermitianObservable};
use crate::scalar::RealScalar;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn assert_close<R: RealScalar>(got: R, want: R, tol: R) {
    assert!(
        (got - want).abs() <= tol,
        "got {:?}, want {:?} (tol {:?})",
        got,
        want,
        tol
    );
}

pub fn rand_hermitian<R: RealScalar>(dim: usize, rng: &mut ChaCha8Rng) -> HermitianObservable<R> {
    crate::random::hermitian(dim, rng)
}

pub fn rand_density<R: RealScalar>(
    dim: usize,
    rank: usize,
    rng: &mut ChaCha8Rng,
) -> DensityMatrix<R> {
    crate::random::density(dim, rank, rng)
}
