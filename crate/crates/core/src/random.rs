//! Random instance generators for simulations and property checks.

use rand::Rng;

use crate::matrix::{ComplexMatrix, DensityMatrix, HermitianObservable};
use crate::scalar::{cx, Cx, RealScalar};

/// Standard-normal-ish complex entry from two uniform draws (Box-Muller).
fn gaussian<R: RealScalar, G: Rng + ?Sized>(rng: &mut G) -> R {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen::<f64>();
    R::of((-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos())
}

pub fn complex_gaussian<R: RealScalar, G: Rng + ?Sized>(rng: &mut G) -> Cx<R> {
    cx(gaussian(rng), gaussian(rng))
}

/// Dense matrix with iid complex Gaussian entries.
pub fn matrix<R: RealScalar, G: Rng + ?Sized>(dim: usize, rng: &mut G) -> ComplexMatrix<R> {
    ComplexMatrix::from_fn(dim, |_, _| complex_gaussian(rng))
}

/// Random Hermitian observable, entries O(1).
pub fn hermitian<R: RealScalar, G: Rng + ?Sized>(
    dim: usize,
    rng: &mut G,
) -> HermitianObservable<R> {
    let m = matrix::<R, G>(dim, rng);
    HermitianObservable::new(m.symmetrize()).expect("symmetrized matrix is Hermitian")
}

/// Haar-ish random unit vector.
pub fn unit_vector<R: RealScalar, G: Rng + ?Sized>(dim: usize, rng: &mut G) -> Vec<Cx<R>> {
    loop {
        let v: Vec<Cx<R>> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        let n: R = v.iter().map(|z| z.norm_sqr()).sum::<R>().sqrt();
        if n > R::of(1e-6) {
            return v.into_iter().map(|z| z / crate::scalar::cre(n)).collect();
        }
    }
}

/// Random density matrix of the requested rank (`rank <= dim`), produced as
/// a normalized Gram matrix of `rank` random vectors.
pub fn density<R: RealScalar, G: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut G,
) -> DensityMatrix<R> {
    assert!(rank >= 1 && rank <= dim);
    let mut acc = ComplexMatrix::<R>::zeros(dim);
    for _ in 0..rank {
        let v: Vec<Cx<R>> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        let w: R = R::of(rng.gen_range(0.1..1.0));
        for i in 0..dim {
            for j in 0..dim {
                acc[(i, j)] += v[i] * v[j].conj() * crate::scalar::cre(w);
            }
        }
    }
    DensityMatrix::from_unnormalized(acc).expect("Gram matrix is PSD")
}

/// Random discrete distribution with strictly positive weights.
pub fn distribution<R: RealScalar, G: Rng + ?Sized>(len: usize, rng: &mut G) -> Vec<R> {
    let raw: Vec<R> = (0..len).map(|_| R::of(rng.gen_range(0.05..1.0))).collect();
    let total: R = raw.iter().copied().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Random Kraus family `{A_x}` with `Σ A_x† A_x = I`, built by normalizing
/// iid Gaussian blocks with the inverse square root of their completeness sum.
pub fn kraus_operators<R: RealScalar, G: Rng + ?Sized>(
    dim: usize,
    outcomes: usize,
    rng: &mut G,
) -> Vec<ComplexMatrix<R>> {
    let blocks: Vec<ComplexMatrix<R>> = (0..outcomes).map(|_| matrix(dim, rng)).collect();
    let mut s = ComplexMatrix::<R>::zeros(dim);
    for b in &blocks {
        s = &s + &b.adjoint().matmul(b);
    }
    let sh = HermitianObservable::new(s.symmetrize()).expect("completeness sum is Hermitian");
    let eig = crate::matrix::hermitian_eig(&sh);
    let inv_sqrt = eig.map_eigenvalues(|l| R::one() / l.sqrt());
    blocks.into_iter().map(|b| b.matmul(&inv_sqrt)).collect()
}
