//! Relative entropy functionals used to rank candidate posteriors.
//!
//! Both functionals are maximized (they are nonpositive, zero only at
//! posterior = prior) and both are computed on supports: mass of the first
//! argument outside the support of the second makes the value -inf.

use crate::matrix::{hermitian_eig, support_cutoff, DensityMatrix, MatrixError, Result};
use crate::scalar::RealScalar;

/// Mass threshold beyond which support violation is declared.
pub fn off_support_tol<R: RealScalar>() -> R {
    R::of(1e-10)
}

/// Umegaki quantum relative entropy with the sign used for maximization:
/// `-Tr(ρ log ρ - ρ log φ) <= 0`, and `-inf` when supp(ρ) ⊄ supp(φ).
pub fn umegaki_entropy<R: RealScalar>(rho: &DensityMatrix<R>, phi: &DensityMatrix<R>) -> Result<R> {
    if rho.dim() != phi.dim() {
        return Err(MatrixError::DimensionMismatch {
            context: format!("rho dim {} vs phi dim {}", rho.dim(), phi.dim()),
        });
    }
    let cutoff = support_cutoff::<R>();
    let rho_eig = hermitian_eig(&rho.as_observable());
    let phi_eig = hermitian_eig(&phi.as_observable());

    // Tr(rho log rho) from rho's spectrum, 0 ln 0 = 0.
    let mut tr_rho_log_rho = R::zero();
    for &l in &rho_eig.eigenvalues {
        if l > cutoff {
            tr_rho_log_rho += l * l.ln();
        }
    }

    // Tr(rho log phi) through phi's eigenbasis; accumulate the weight of rho
    // on phi's null space to detect support violations.
    let mut tr_rho_log_phi = R::zero();
    let mut off_support_mass = R::zero();
    for (k, &mu) in phi_eig.eigenvalues.iter().enumerate() {
        let w = phi_eig.eigenvector(k);
        let weight = rho.matrix().sandwich(&w, &w).re;
        if mu > cutoff {
            tr_rho_log_phi += weight * mu.ln();
        } else {
            off_support_mass += weight.max(R::zero());
        }
    }
    if off_support_mass > off_support_tol::<R>() {
        return Ok(R::neg_infinity());
    }
    Ok(-(tr_rho_log_rho - tr_rho_log_phi))
}

/// Classical relative entropy `-Σ p_i ln(p_i/q_i)` with `0 ln 0 = 0`;
/// `-inf` where p has mass outside supp(q).
pub fn classical_relative_entropy<R: RealScalar>(p: &[R], q: &[R]) -> Result<R> {
    if p.len() != q.len() {
        return Err(MatrixError::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let mut s = R::zero();
    for (&pi, &qi) in p.iter().zip(q.iter()) {
        if pi <= R::zero() {
            continue;
        }
        if qi <= R::zero() {
            return Ok(R::neg_infinity());
        }
        s -= pi * (pi / qi).ln();
    }
    Ok(s)
}
