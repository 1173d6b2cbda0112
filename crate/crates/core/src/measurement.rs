//! Measurement calculus on density matrices.
//!
//! A detection is decoherence followed by a probability update. The prior
//! for POVM inference is the block-diagonal state `Σ_x |x><x| ⊗ A_x φ A_x†`;
//! conditioning that joint on pointer data gives the quantum Bayes rule, a
//! data distribution gives the quantum Jeffreys rule, a thermal energy
//! constraint gives the thermal-box variant, and an extra expectation
//! constraint on the system factor gives the canonically modified rules.
//! Each closed-form map here is cross-checked against the generic
//! maximum-entropy solve in the tests.

use thiserror::Error;

use crate::classical::{DiscreteDistribution, SolverOptions};
use crate::matrix::{
    hermitian_eig, kron, partial_trace, support_cutoff, support_decomposition, ComplexMatrix,
    DensityMatrix, HermitianObservable, MatrixError, TraceOver,
};
use crate::quantum::{
    degenerate_limit_update, qmaxent_update, DualSolution, QuantumConstraintSet, QuantumError,
};
use crate::scalar::{cre, Cx, RealScalar};

#[derive(Debug, Error)]
pub enum MeasurementError<R: RealScalar> {
    #[error("Kraus family is incomplete: max |Σ A†A - 1| = {deviation}")]
    IncompleteKraus { deviation: R },
    #[error("zero evidence: outcome {outcome} has probability {probability}")]
    ZeroEvidence { outcome: usize, probability: R },
    #[error("zero prior probability for detected outcome {outcome}")]
    ZeroPriorOutcome { outcome: usize },
    #[error("support violation: data distribution has mass {mass} on zero-probability outcome {outcome}")]
    SupportViolation { outcome: usize, mass: R },
    #[error("projector basis invalid: {context}")]
    InvalidBasis { context: String },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Quantum(#[from] QuantumError<R>),
    #[error("infeasible thermal target {target}: attainable range is ({lo}, {hi})")]
    InfeasibleThermal { target: R, lo: R, hi: R },
}

pub type Result<T, R> = std::result::Result<T, MeasurementError<R>>;

/// Measurement (Kraus) operators `{A_x}` with `Σ_x A_x† A_x = 1`.
#[derive(Debug, Clone)]
pub struct KrausModel<R: RealScalar> {
    operators: Vec<ComplexMatrix<R>>,
    dim_theta: usize,
}

impl<R: RealScalar> KrausModel<R> {
    pub fn new(operators: Vec<ComplexMatrix<R>>) -> Result<Self, R> {
        let dim = match operators.first() {
            Some(m) => m.dim(),
            None => {
                return Err(MeasurementError::InvalidBasis {
                    context: "empty Kraus family".into(),
                })
            }
        };
        let mut sum = ComplexMatrix::<R>::zeros(dim);
        for op in &operators {
            if op.dim() != dim {
                return Err(MeasurementError::DimensionMismatch {
                    context: "ragged Kraus operator dimensions".into(),
                });
            }
            sum = &sum + &op.adjoint().matmul(op);
        }
        let dev = (&sum - &ComplexMatrix::identity(dim)).max_abs();
        if dev > R::of(1e-10) {
            return Err(MeasurementError::IncompleteKraus { deviation: dev });
        }
        Ok(Self {
            operators,
            dim_theta: dim,
        })
    }

    /// Kraus family from a POVM `{E_x}` by the principal square root
    /// `A_x = √E_x` (Hermitian, canonical among the non-unique choices).
    pub fn from_povm(effects: &[HermitianObservable<R>]) -> Result<Self, R> {
        let ops = effects
            .iter()
            .map(|e| {
                let eig = hermitian_eig(e);
                eig.map_eigenvalues(|l| if l > R::zero() { l.sqrt() } else { R::zero() })
            })
            .collect();
        Self::new(ops)
    }

    /// Projective (Lüders) family from an orthonormal basis.
    pub fn projective(basis: &ProjectorBasis<R>) -> Result<Self, R> {
        Self::new(
            basis
                .vectors
                .iter()
                .map(|v| ComplexMatrix::projector(v))
                .collect(),
        )
    }

    pub fn operators(&self) -> &[ComplexMatrix<R>] {
        &self.operators
    }

    pub fn outcomes(&self) -> usize {
        self.operators.len()
    }

    pub fn dim_theta(&self) -> usize {
        self.dim_theta
    }

    /// POVM effect `E_x = A_x† A_x`.
    pub fn effect(&self, x: usize) -> ComplexMatrix<R> {
        self.operators[x].adjoint().matmul(&self.operators[x])
    }
}

/// Orthonormal rank-1 projector family summing to the identity, stored by
/// its unit vectors.
#[derive(Debug, Clone)]
pub struct ProjectorBasis<R: RealScalar> {
    vectors: Vec<Vec<Cx<R>>>,
}

impl<R: RealScalar> ProjectorBasis<R> {
    pub fn new(vectors: Vec<Vec<Cx<R>>>) -> Result<Self, R> {
        let n = vectors.len();
        if n == 0 || vectors.iter().any(|v| v.len() != n) {
            return Err(MeasurementError::InvalidBasis {
                context: "need n orthonormal vectors of length n".into(),
            });
        }
        let tol = R::of(1e-10);
        for i in 0..n {
            for j in 0..n {
                let dot = vectors[i]
                    .iter()
                    .zip(&vectors[j])
                    .map(|(a, b)| a.conj() * *b)
                    .fold(cre(R::zero()), |acc, z| acc + z);
                let want = if i == j { R::one() } else { R::zero() };
                if (dot - cre(want)).norm() > tol {
                    return Err(MeasurementError::InvalidBasis {
                        context: format!("vectors {} and {} not orthonormal", i, j),
                    });
                }
            }
        }
        Ok(Self { vectors })
    }

    pub fn computational(n: usize) -> Self {
        let vectors = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            cre(R::one())
                        } else {
                            cre(R::zero())
                        }
                    })
                    .collect()
            })
            .collect();
        Self { vectors }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[Cx<R>] {
        &self.vectors[i]
    }
}

/// `ρ → Σ_i P_i ρ P_i`: zeroes coherences in the given basis while keeping
/// its diagonal probabilities exactly.
pub fn luders_decohere<R: RealScalar>(
    rho: &DensityMatrix<R>,
    basis: &ProjectorBasis<R>,
) -> Result<DensityMatrix<R>, R> {
    if rho.dim() != basis.len() {
        return Err(MeasurementError::DimensionMismatch {
            context: format!("state dim {} vs basis size {}", rho.dim(), basis.len()),
        });
    }
    let n = rho.dim();
    let mut out = ComplexMatrix::<R>::zeros(n);
    for i in 0..n {
        let v = basis.vector(i);
        let p = rho.matrix().sandwich(v, v).re;
        for a in 0..n {
            for b in 0..n {
                out[(a, b)] += v[a] * v[b].conj() * cre(p);
            }
        }
    }
    Ok(DensityMatrix::new(out.symmetrize())?)
}

/// Collapse of a decohered (diagonal) state onto the detected outcome.
pub fn simple_collapse<R: RealScalar>(
    prior_decohered: &DensityMatrix<R>,
    detected: usize,
) -> Result<DensityMatrix<R>, R> {
    let n = prior_decohered.dim();
    if detected >= n {
        return Err(MeasurementError::DimensionMismatch {
            context: format!("detected outcome {} out of range {}", detected, n),
        });
    }
    let p = prior_decohered.matrix()[(detected, detected)].re;
    if p <= R::zero() {
        return Err(MeasurementError::ZeroPriorOutcome { outcome: detected });
    }
    let mut v = vec![cre(R::zero()); n];
    v[detected] = cre(R::one());
    Ok(DensityMatrix::pure(&v)?)
}

/// Partial (uncertain) collapse: `Σ_x ρ_D(x) |x><x|`.
pub fn partial_collapse<R: RealScalar>(
    prior_decohered: &DensityMatrix<R>,
    data_dist: &DiscreteDistribution<R>,
) -> Result<DensityMatrix<R>, R> {
    let n = prior_decohered.dim();
    if data_dist.len() != n {
        return Err(MeasurementError::DimensionMismatch {
            context: format!("data length {} vs state dim {}", data_dist.len(), n),
        });
    }
    for (x, &w) in data_dist.weights().iter().enumerate() {
        if w > R::zero() && prior_decohered.matrix()[(x, x)].re <= R::zero() {
            return Err(MeasurementError::SupportViolation {
                outcome: x,
                mass: w,
            });
        }
    }
    Ok(DensityMatrix::new(ComplexMatrix::real_diagonal(
        data_dist.weights(),
    ))?)
}

/// Block-diagonal joint prior after the pointer has decohered in the
/// detector: one block `A_x φ A_x†` per outcome. Blocks of negligible trace
/// are dropped (hard-zero outcomes).
#[derive(Debug, Clone)]
pub struct DecoheredJointPrior<R: RealScalar> {
    /// (outcome index, unnormalized block) pairs with trace above threshold.
    blocks: Vec<(usize, ComplexMatrix<R>)>,
    n_outcomes: usize,
    dim_theta: usize,
}

impl<R: RealScalar> DecoheredJointPrior<R> {
    pub fn blocks(&self) -> &[(usize, ComplexMatrix<R>)] {
        &self.blocks
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_outcomes, self.dim_theta)
    }

    pub fn block(&self, outcome: usize) -> Option<&ComplexMatrix<R>> {
        self.blocks
            .iter()
            .find(|(x, _)| *x == outcome)
            .map(|(_, b)| b)
    }

    /// Outcome probabilities `φ(x) = Tr(A_x φ A_x†)` over all outcomes,
    /// zeros included for dropped blocks.
    pub fn outcome_distribution(&self) -> Vec<R> {
        let mut out = vec![R::zero(); self.n_outcomes];
        for (x, b) in &self.blocks {
            out[*x] = b.trace().re;
        }
        out
    }

    /// Assembles the full joint density matrix `Σ_x |x><x| ⊗ block_x`.
    pub fn joint_density(&self) -> Result<DensityMatrix<R>, R> {
        let n = self.n_outcomes * self.dim_theta;
        let mut m = ComplexMatrix::<R>::zeros(n);
        for (x, b) in &self.blocks {
            for i in 0..self.dim_theta {
                for j in 0..self.dim_theta {
                    m[(x * self.dim_theta + i, x * self.dim_theta + j)] = b[(i, j)];
                }
            }
        }
        Ok(DensityMatrix::new(m)?)
    }
}

/// Builds the POVM-inference prior `Σ_x |x><x| ⊗ A_x φ A_x†`.
pub fn build_decohered_joint<R: RealScalar>(
    prior_theta: &DensityMatrix<R>,
    kraus: &KrausModel<R>,
) -> Result<DecoheredJointPrior<R>, R> {
    if kraus.dim_theta() != prior_theta.dim() {
        return Err(MeasurementError::DimensionMismatch {
            context: format!(
                "Kraus dim {} vs prior dim {}",
                kraus.dim_theta(),
                prior_theta.dim()
            ),
        });
    }
    let mut blocks = Vec::new();
    for (x, a) in kraus.operators().iter().enumerate() {
        let block = a
            .matmul(prior_theta.matrix())
            .matmul(&a.adjoint())
            .symmetrize();
        if block.trace().re >= R::of(1e-14) {
            blocks.push((x, block));
        }
    }
    Ok(DecoheredJointPrior {
        blocks,
        n_outcomes: kraus.outcomes(),
        dim_theta: prior_theta.dim(),
    })
}

/// Quantum Bayes rule: the detected block, normalized.
pub fn quantum_bayes<R: RealScalar>(
    joint: &DecoheredJointPrior<R>,
    detected: usize,
) -> Result<DensityMatrix<R>, R> {
    let block = joint
        .block(detected)
        .ok_or(MeasurementError::ZeroEvidence {
            outcome: detected,
            probability: R::zero(),
        })?;
    let p = block.trace().re;
    if p <= R::zero() {
        return Err(MeasurementError::ZeroEvidence {
            outcome: detected,
            probability: p,
        });
    }
    Ok(DensityMatrix::from_unnormalized(block.clone())?)
}

/// Quantum Bayes rule derived through the maximum-entropy machinery: the
/// joint prior is updated with the delta data constraint on the pointer
/// projectors (degenerate-limit solve), then the pointer factor is traced
/// out. Numerically independent of the closed-form Kraus route.
pub fn quantum_bayes_via_maxent<R: RealScalar>(
    joint: &DecoheredJointPrior<R>,
    detected: usize,
    options: SolverOptions<R>,
) -> Result<DensityMatrix<R>, R> {
    let (n_x, d_t) = joint.dims();
    let phi_x = joint.outcome_distribution();
    if detected >= n_x || phi_x[detected] <= R::zero() {
        return Err(MeasurementError::ZeroEvidence {
            outcome: detected,
            probability: phi_x.get(detected).copied().unwrap_or(R::zero()),
        });
    }
    let joint_rho = joint.joint_density()?;
    let eye_t = ComplexMatrix::<R>::identity(d_t);
    let mut observables = Vec::new();
    let mut targets = Vec::new();
    for x in 0..n_x {
        let mut px = ComplexMatrix::<R>::zeros(n_x);
        px[(x, x)] = cre(R::one());
        observables.push(HermitianObservable::new(kron(&px, &eye_t))?);
        targets.push(if x == detected { R::one() } else { R::zero() });
    }
    let cs = QuantumConstraintSet::new(observables, targets)?;
    let (posterior_joint, _) = degenerate_limit_update(&joint_rho, &cs, options)?;
    Ok(partial_trace(&posterior_joint, (n_x, d_t), TraceOver::A)?)
}

/// Quantum Jeffreys rule: `Σ_x ρ_D(x) · block_x / φ(x)`.
pub fn quantum_jeffreys<R: RealScalar>(
    joint: &DecoheredJointPrior<R>,
    data_dist: &DiscreteDistribution<R>,
) -> Result<DensityMatrix<R>, R> {
    let (n_x, d_t) = joint.dims();
    if data_dist.len() != n_x {
        return Err(MeasurementError::DimensionMismatch {
            context: format!("data length {} vs outcomes {}", data_dist.len(), n_x),
        });
    }
    let phi_x = joint.outcome_distribution();
    let mut acc = ComplexMatrix::<R>::zeros(d_t);
    for (x, &w) in data_dist.weights().iter().enumerate() {
        if w <= R::zero() {
            continue;
        }
        match joint.block(x) {
            Some(b) if phi_x[x] > R::zero() => {
                acc = &acc + &b.scale_re(w / phi_x[x]);
            }
            _ => {
                return Err(MeasurementError::SupportViolation {
                    outcome: x,
                    mass: w,
                })
            }
        }
    }
    Ok(DensityMatrix::new(acc.symmetrize())?)
}

/// Thermal-box update: the pointer is captured in a bath and only the energy
/// expectation is constrained. `β` solves `<H> = ∂ lnZ/∂β` with
/// `Z = Σ_n e^{β ε_n} φ(ε_n)` (monotone bisection), and the posterior is the
/// Jeffreys-style reweighting `Σ_n (e^{β ε_n}/Z) A_n φ A_n†`.
pub fn thermal_jeffreys<R: RealScalar>(
    joint: &DecoheredJointPrior<R>,
    energies: &[R],
    target_energy: R,
) -> Result<(R, DensityMatrix<R>), R> {
    let (n_x, d_t) = joint.dims();
    if energies.len() != n_x {
        return Err(MeasurementError::DimensionMismatch {
            context: format!("{} energies vs {} outcomes", energies.len(), n_x),
        });
    }
    let phi = joint.outcome_distribution();
    let lo = energies
        .iter()
        .zip(&phi)
        .filter(|(_, &p)| p > R::zero())
        .map(|(&e, _)| e)
        .fold(R::infinity(), R::min);
    let hi = energies
        .iter()
        .zip(&phi)
        .filter(|(_, &p)| p > R::zero())
        .map(|(&e, _)| e)
        .fold(R::neg_infinity(), R::max);
    if hi > lo {
        if !(target_energy > lo && target_energy < hi) {
            return Err(MeasurementError::InfeasibleThermal {
                target: target_energy,
                lo,
                hi,
            });
        }
    } else if (target_energy - lo).abs() > R::of(1e-9) {
        // Single supported energy level: only its value is attainable.
        return Err(MeasurementError::InfeasibleThermal {
            target: target_energy,
            lo,
            hi,
        });
    }

    // <H>(β), monotone nondecreasing (its derivative is an energy variance).
    let mean_energy = |beta: R| -> R {
        let top = energies
            .iter()
            .zip(&phi)
            .filter(|(_, &p)| p > R::zero())
            .map(|(&e, _)| beta * e)
            .fold(R::neg_infinity(), R::max);
        let mut z = R::zero();
        let mut num = R::zero();
        for (&e, &p) in energies.iter().zip(&phi) {
            if p > R::zero() {
                let w = (beta * e - top).exp() * p;
                z += w;
                num += w * e;
            }
        }
        num / z
    };
    let mut beta = R::zero();
    if hi > lo {
        let mut blo = -R::one();
        let mut bhi = R::one();
        for _ in 0..400 {
            if mean_energy(blo) < target_energy {
                break;
            }
            blo *= R::of(2.0);
        }
        for _ in 0..400 {
            if mean_energy(bhi) > target_energy {
                break;
            }
            bhi *= R::of(2.0);
        }
        for _ in 0..200 {
            beta = (blo + bhi) * R::of(0.5);
            if mean_energy(beta) < target_energy {
                blo = beta;
            } else {
                bhi = beta;
            }
        }
    }

    let top = energies
        .iter()
        .zip(&phi)
        .filter(|(_, &p)| p > R::zero())
        .map(|(&e, _)| beta * e)
        .fold(R::neg_infinity(), R::max);
    let mut z = R::zero();
    for (&e, &p) in energies.iter().zip(&phi) {
        if p > R::zero() {
            z += (beta * e - top).exp() * p;
        }
    }
    let mut acc = ComplexMatrix::<R>::zeros(d_t);
    for (x, b) in joint.blocks() {
        // Each block carries its own φ(ε_n) weight: Σ_n (e^{βε_n}/Z) A φ A†.
        let w = (beta * energies[*x] - top).exp() / z;
        acc = &acc + &b.scale_re(w);
    }
    Ok((beta, DensityMatrix::new(acc.symmetrize())?))
}

/// Canonically modified quantum Bayes/Jeffreys rule:
/// `Σ_x (ρ_D(x)/ζ(x,β)) exp(β f(θ) + log block_x)`, with each block's
/// exponent compressed to the block support (rank-deficient blocks update
/// only where they have support).
pub fn canonical_modified_rule<R: RealScalar>(
    joint: &DecoheredJointPrior<R>,
    f_theta: &HermitianObservable<R>,
    beta: R,
    data_dist: &DiscreteDistribution<R>,
) -> Result<DensityMatrix<R>, R> {
    let (n_x, d_t) = joint.dims();
    if data_dist.len() != n_x {
        return Err(MeasurementError::DimensionMismatch {
            context: format!("data length {} vs outcomes {}", data_dist.len(), n_x),
        });
    }
    if f_theta.dim() != d_t {
        return Err(MeasurementError::DimensionMismatch {
            context: format!("f dim {} vs theta dim {}", f_theta.dim(), d_t),
        });
    }
    let mut acc = ComplexMatrix::<R>::zeros(d_t);
    for (x, &w) in data_dist.weights().iter().enumerate() {
        if w <= R::zero() {
            continue;
        }
        let block = joint.block(x).ok_or(MeasurementError::SupportViolation {
            outcome: x,
            mass: w,
        })?;
        let sd = support_decomposition(block, support_cutoff::<R>())?;
        let log_block = ComplexMatrix::real_diagonal(
            &sd.eigenvalues.iter().map(|l| l.ln()).collect::<Vec<_>>(),
        );
        let f_c = sd.compress(f_theta.matrix());
        let exponent = HermitianObservable::new((&f_c.scale_re(beta) + &log_block).symmetrize())?;
        let eig = hermitian_eig(&exponent);
        let top = *eig.eigenvalues.last().unwrap();
        // G = exp(exponent) and ζ = Tr G, with the top eigenvalue factored
        // out so a strong tilt cannot overflow.
        let g_shifted = eig.map_eigenvalues(|l| (l - top).exp());
        let zeta_shifted = g_shifted.trace().re;
        acc = &acc + &sd.embed(&g_shifted).scale_re(w / zeta_shifted);
    }
    Ok(DensityMatrix::new(acc.symmetrize())?)
}

/// Decoheres an entangled joint state in the x basis and in the θ basis
/// separately and returns the largest diagonal-diagonal discrepancy
/// `max_{x,θ} |<xθ|~φ|xθ> - <xθ|~ϑ|xθ>|`; both decohered joints are built
/// explicitly with projector sandwiches.
pub fn order_symmetry_check<R: RealScalar>(
    joint: &DensityMatrix<R>,
    dims: (usize, usize),
) -> Result<R, R> {
    let (d_x, d_t) = dims;
    if d_x * d_t != joint.dim() {
        return Err(MeasurementError::DimensionMismatch {
            context: format!("factors {}x{} vs dim {}", d_x, d_t, joint.dim()),
        });
    }
    let eye_t = ComplexMatrix::<R>::identity(d_t);
    let eye_x = ComplexMatrix::<R>::identity(d_x);
    let mut dec_x = ComplexMatrix::<R>::zeros(d_x * d_t);
    for x in 0..d_x {
        let mut px = ComplexMatrix::<R>::zeros(d_x);
        px[(x, x)] = cre(R::one());
        let proj = kron(&px, &eye_t);
        dec_x = &dec_x + &proj.matmul(joint.matrix()).matmul(&proj);
    }
    let mut dec_t = ComplexMatrix::<R>::zeros(d_x * d_t);
    for t in 0..d_t {
        let mut pt = ComplexMatrix::<R>::zeros(d_t);
        pt[(t, t)] = cre(R::one());
        let proj = kron(&eye_x, &pt);
        dec_t = &dec_t + &proj.matmul(joint.matrix()).matmul(&proj);
    }
    let mut max_dev = R::zero();
    for i in 0..(d_x * d_t) {
        max_dev = max_dev.max((dec_x[(i, i)].re - dec_t[(i, i)].re).abs());
    }
    Ok(max_dev)
}

/// Report from comparing sequential updates (both orders) against the
/// simultaneous update.
#[derive(Debug, Clone)]
pub struct SequentialReport<R: RealScalar> {
    pub rho_12: DensityMatrix<R>,
    pub rho_21: DensityMatrix<R>,
    pub rho_3: DensityMatrix<R>,
    pub dist_12_21: R,
    pub dist_12_3: R,
    pub dist_21_3: R,
    /// Residuals of constraint set 1 and 2 on (rho_12, rho_21, rho_3).
    pub residuals_cs1: [Vec<R>; 3],
    pub residuals_cs2: [Vec<R>; 3],
    pub duals: [DualSolution<R>; 3],
}

/// Runs `prior --cs1--> ρ¹ --cs2--> ρ^{1,2}`, the opposite order, and the
/// simultaneous update with both sets, reporting max-norm distances and
/// per-set residuals.
pub fn sequential_vs_simultaneous<R: RealScalar>(
    prior: &DensityMatrix<R>,
    cs1: &QuantumConstraintSet<R>,
    cs2: &QuantumConstraintSet<R>,
    options: SolverOptions<R>,
) -> Result<SequentialReport<R>, R> {
    let (rho_1, _) = qmaxent_update(prior, cs1, options)?;
    let (rho_12, dual_12) = qmaxent_update(&rho_1, cs2, options)?;
    let (rho_2, _) = qmaxent_update(prior, cs2, options)?;
    let (rho_21, dual_21) = qmaxent_update(&rho_2, cs1, options)?;
    let (rho_3, dual_3) = qmaxent_update(prior, &cs1.merged(cs2), options)?;

    let dist = |a: &DensityMatrix<R>, b: &DensityMatrix<R>| (a.matrix() - b.matrix()).max_abs();
    Ok(SequentialReport {
        dist_12_21: dist(&rho_12, &rho_21),
        dist_12_3: dist(&rho_12, &rho_3),
        dist_21_3: dist(&rho_21, &rho_3),
        residuals_cs1: [
            cs1.residuals(&rho_12),
            cs1.residuals(&rho_21),
            cs1.residuals(&rho_3),
        ],
        residuals_cs2: [
            cs2.residuals(&rho_12),
            cs2.residuals(&rho_21),
            cs2.residuals(&rho_3),
        ],
        duals: [dual_12, dual_21, dual_3],
        rho_12,
        rho_21,
        rho_3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matrix_exp;
    use crate::random;
    use crate::scalar::cx;
    use crate::test_support::{assert_close, rand_density, rng};
    use rand::Rng;

    fn opts() -> SolverOptions<f64> {
        SolverOptions::default()
    }

    #[test]
    fn luders_keeps_diagonal_zeroes_coherences() {
        let mut r = rng(40);
        let rho = rand_density::<f64>(3, 3, &mut r);
        let basis = ProjectorBasis::computational(3);
        let dec = luders_decohere(&rho, &basis).unwrap();
        for i in 0..3 {
            assert_close(dec.matrix()[(i, i)].re, rho.matrix()[(i, i)].re, 1e-14);
            for j in 0..3 {
                if i != j {
                    assert!(dec.matrix()[(i, j)].norm() < 1e-14);
                }
            }
        }
        // Already-diagonal state is unchanged.
        let again = luders_decohere(&dec, &basis).unwrap();
        assert!((again.matrix() - dec.matrix()).max_abs() < 1e-14);
    }

    #[test]
    fn luders_plus_state_in_z_basis_gives_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure(&[cx(s, 0.0), cx(s, 0.0)]).unwrap();
        let dec = luders_decohere(&plus, &ProjectorBasis::computational(2)).unwrap();
        assert!((dec.matrix() - DensityMatrix::maximally_mixed(2).matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn simple_collapse_cases() {
        let half = DensityMatrix::maximally_mixed(2);
        let post = simple_collapse(&half, 0).unwrap();
        assert_close(post.matrix()[(0, 0)].re, 1.0, 1e-14);

        // Screen mixture, detect x'.
        let screen = DensityMatrix::new(ComplexMatrix::real_diagonal(&[0.2, 0.5, 0.3])).unwrap();
        let post = simple_collapse(&screen, 2).unwrap();
        assert_close(post.matrix()[(2, 2)].re, 1.0, 1e-14);

        // Zero prior outcome is unupdatable.
        let biased = DensityMatrix::new(ComplexMatrix::real_diagonal(&[1.0, 0.0])).unwrap();
        assert!(matches!(
            simple_collapse(&biased, 1),
            Err(MeasurementError::ZeroPriorOutcome { outcome: 1 })
        ));
    }

    #[test]
    fn simple_collapse_matches_degenerate_maxent_solve() {
        let screen = DensityMatrix::new(ComplexMatrix::real_diagonal(&[0.2, 0.5, 0.3])).unwrap();
        let detected = 1usize;
        let direct = simple_collapse(&screen, detected).unwrap();

        let mut observables = Vec::new();
        let mut targets = Vec::new();
        for x in 0..3 {
            let mut e = [0.0; 3];
            e[x] = 1.0;
            observables.push(HermitianObservable::real_diagonal(&e));
            targets.push(if x == detected { 1.0 } else { 0.0 });
        }
        let cs = QuantumConstraintSet::new(observables, targets).unwrap();
        let (post, _) = degenerate_limit_update(&screen, &cs, opts()).unwrap();
        assert!((post.matrix() - direct.matrix()).max_abs() < 1e-8);
    }

    #[test]
    fn partial_collapse_cases_and_maxent_crosscheck() {
        let mut r = rng(41);
        let diag = random::distribution::<f64, _>(4, &mut r);
        let prior = DensityMatrix::new(ComplexMatrix::real_diagonal(&diag)).unwrap();

        // Delta data reduces to simple collapse.
        let delta = DiscreteDistribution::delta(4, 2);
        let pc = partial_collapse(&prior, &delta).unwrap();
        let sc = simple_collapse(&prior, 2).unwrap();
        assert!((pc.matrix() - sc.matrix()).max_abs() < 1e-14);

        // Data equal to the prior diagonal changes nothing.
        let same = DiscreteDistribution::new(diag.clone()).unwrap();
        let pc = partial_collapse(&prior, &same).unwrap();
        assert!((pc.matrix() - prior.matrix()).max_abs() < 1e-14);

        // Random interior data distribution matches the interior MaxEnt solve
        // with projector constraints.
        let data = random::distribution::<f64, _>(4, &mut r);
        let pc =
            partial_collapse(&prior, &DiscreteDistribution::new(data.clone()).unwrap()).unwrap();
        let mut observables = Vec::new();
        for x in 0..4 {
            let mut e = [0.0; 4];
            e[x] = 1.0;
            observables.push(HermitianObservable::real_diagonal(&e));
        }
        let cs = QuantumConstraintSet::new(observables, data).unwrap();
        let (post, _) = qmaxent_update(&prior, &cs, opts()).unwrap();
        assert!((post.matrix() - pc.matrix()).max_abs() < 1e-8);
    }

    #[test]
    fn partial_collapse_support_violation() {
        let prior = DensityMatrix::new(ComplexMatrix::real_diagonal(&[1.0, 0.0])).unwrap();
        let data = DiscreteDistribution::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            partial_collapse(&prior, &data),
            Err(MeasurementError::SupportViolation { outcome: 1, .. })
        ));
    }

    fn footnote_povm_kraus() -> KrausModel<f64> {
        // E1 = 3/4 |+><+| + 1/4 |-><-|, E2 = 1/4 |+><+| + 3/4 |-><-|,
        // A_x = sqrt(E_x).
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [cx(s, 0.0), cx(s, 0.0)];
        let minus = [cx(s, 0.0), cx(-s, 0.0)];
        let pp = ComplexMatrix::projector(&plus);
        let pm = ComplexMatrix::projector(&minus);
        let e1 = &pp.scale_re(0.75) + &pm.scale_re(0.25);
        let e2 = &pp.scale_re(0.25) + &pm.scale_re(0.75);
        KrausModel::from_povm(&[
            HermitianObservable::new(e1).unwrap(),
            HermitianObservable::new(e2).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn decohered_joint_block_traces() {
        // Projective Kraus gives Lüders blocks.
        let basis = ProjectorBasis::computational(2);
        let kraus = KrausModel::projective(&basis).unwrap();
        let prior = DensityMatrix::new(
            ComplexMatrix::from_rows(&[
                vec![cx(0.7, 0.0), cx(0.2, 0.1)],
                vec![cx(0.2, -0.1), cx(0.3, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let joint = build_decohered_joint(&prior, &kraus).unwrap();
        let probs = joint.outcome_distribution();
        assert_close(probs[0], 0.7, 1e-12);
        assert_close(probs[1], 0.3, 1e-12);

        // Footnote POVM with prior 1/2: block traces (1/2, 1/2).
        let joint =
            build_decohered_joint(&DensityMatrix::maximally_mixed(2), &footnote_povm_kraus())
                .unwrap();
        let probs = joint.outcome_distribution();
        assert_close(probs[0], 0.5, 1e-12);
        assert_close(probs[1], 0.5, 1e-12);

        // Random Kraus: traces sum to one; Born rule matches the effects.
        let mut r = rng(42);
        let ops = random::kraus_operators::<f64, _>(3, 4, &mut r);
        let kraus = KrausModel::new(ops).unwrap();
        let prior = rand_density::<f64>(3, 3, &mut r);
        let joint = build_decohered_joint(&prior, &kraus).unwrap();
        let probs = joint.outcome_distribution();
        assert_close(probs.iter().sum::<f64>(), 1.0, 1e-12);
        for x in 0..4 {
            let born = kraus.effect(x).matmul(prior.matrix()).trace().re;
            assert_close(probs[x], born, 1e-12);
        }
    }

    #[test]
    fn incomplete_kraus_rejected() {
        let a = ComplexMatrix::<f64>::identity(2).scale_re(0.5);
        assert!(matches!(
            KrausModel::new(vec![a]),
            Err(MeasurementError::IncompleteKraus { .. })
        ));
    }

    #[test]
    fn quantum_bayes_footnote_povm() {
        // Prior 1/2, detect outcome 1 (effect E1): posterior diagonal
        // (3/4, 1/4) in the x basis.
        let joint =
            build_decohered_joint(&DensityMatrix::maximally_mixed(2), &footnote_povm_kraus())
                .unwrap();
        let post = quantum_bayes(&joint, 0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [cx(s, 0.0), cx(s, 0.0)];
        let minus = [cx(s, 0.0), cx(-s, 0.0)];
        assert_close(post.matrix().sandwich(&plus, &plus).re, 0.75, 1e-12);
        assert_close(post.matrix().sandwich(&minus, &minus).re, 0.25, 1e-12);
    }

    #[test]
    fn quantum_bayes_projective_reduces_to_classical_conditional() {
        let prior = DensityMatrix::new(ComplexMatrix::real_diagonal(&[0.2, 0.5, 0.3])).unwrap();
        let kraus = KrausModel::projective(&ProjectorBasis::computational(3)).unwrap();
        let joint = build_decohered_joint(&prior, &kraus).unwrap();
        let post = quantum_bayes(&joint, 1).unwrap();
        assert_close(post.matrix()[(1, 1)].re, 1.0, 1e-12);
    }

    #[test]
    fn quantum_bayes_preserves_purity_of_pure_prior() {
        let mut r = rng(43);
        let v = random::unit_vector::<f64, _>(2, &mut r);
        let prior = DensityMatrix::pure(&v).unwrap();
        let kraus = footnote_povm_kraus();
        let joint = build_decohered_joint(&prior, &kraus).unwrap();
        let post = quantum_bayes(&joint, 0).unwrap();
        let purity = post.matrix().matmul(post.matrix()).trace().re;
        assert_close(purity, 1.0, 1e-10);
    }

    #[test]
    fn quantum_bayes_triple_agreement() {
        let mut r = rng(44);
        for _ in 0..20 {
            let d = r.gen_range(2..=4);
            let n_out = r.gen_range(2..=4);
            let kraus =
                KrausModel::new(random::kraus_operators::<f64, _>(d, n_out, &mut r)).unwrap();
            let prior = rand_density::<f64>(d, d, &mut r);
            let joint = build_decohered_joint(&prior, &kraus).unwrap();
            let probs = joint.outcome_distribution();
            let detected = (0..n_out)
                .max_by(|&a, &b| probs[a].total_cmp(&probs[b]))
                .unwrap();

            let closed = quantum_bayes(&joint, detected).unwrap();
            let via_maxent = quantum_bayes_via_maxent(&joint, detected, opts()).unwrap();
            assert!(
                (closed.matrix() - via_maxent.matrix()).max_abs() < 1e-8,
                "MaxEnt route disagrees"
            );

            // Brute-force per-entry recomputation.
            let a = &kraus.operators()[detected];
            let mut num = ComplexMatrix::<f64>::zeros(d);
            for i in 0..d {
                for j in 0..d {
                    let mut acc = cx(0.0, 0.0);
                    for p in 0..d {
                        for q in 0..d {
                            acc += a[(i, p)] * prior.matrix()[(p, q)] * a[(j, q)].conj();
                        }
                    }
                    num[(i, j)] = acc;
                }
            }
            let tr = num.trace().re;
            let brute = num.scale_re(1.0 / tr);
            assert!(
                (closed.matrix() - &brute).max_abs() < 1e-8,
                "brute force disagrees"
            );
        }
    }

    #[test]
    fn quantum_jeffreys_cases() {
        let mut r = rng(45);
        let kraus = KrausModel::new(random::kraus_operators::<f64, _>(3, 3, &mut r)).unwrap();
        let prior = rand_density::<f64>(3, 3, &mut r);
        let joint = build_decohered_joint(&prior, &kraus).unwrap();
        let probs = joint.outcome_distribution();

        // Delta reduces to Bayes.
        let post = quantum_jeffreys(&joint, &DiscreteDistribution::delta(3, 1)).unwrap();
        let bayes = quantum_bayes(&joint, 1).unwrap();
        assert!((post.matrix() - bayes.matrix()).max_abs() < 1e-12);

        // No-information data returns the unselected decohered marginal.
        let post =
            quantum_jeffreys(&joint, &DiscreteDistribution::new(probs.clone()).unwrap()).unwrap();
        let mut marginal = ComplexMatrix::<f64>::zeros(3);
        for (_, b) in joint.blocks() {
            marginal = &marginal + b;
        }
        assert!((post.matrix() - &marginal).max_abs() < 1e-12);

        // Weighted-sum oracle on a random data distribution.
        let data = random::distribution::<f64, _>(3, &mut r);
        let post =
            quantum_jeffreys(&joint, &DiscreteDistribution::new(data.clone()).unwrap()).unwrap();
        let mut oracle = ComplexMatrix::<f64>::zeros(3);
        for (x, b) in joint.blocks() {
            oracle = &oracle + &b.scale_re(data[*x] / probs[*x]);
        }
        assert!((post.matrix() - &oracle).max_abs() < 1e-12);
    }

    #[test]
    fn jeffreys_affine_in_data() {
        let mut r = rng(46);
        let kraus = KrausModel::new(random::kraus_operators::<f64, _>(3, 3, &mut r)).unwrap();
        let prior = rand_density::<f64>(3, 3, &mut r);
        let joint = build_decohered_joint(&prior, &kraus).unwrap();
        let d1 = DiscreteDistribution::new(random::distribution::<f64, _>(3, &mut r)).unwrap();
        let d2 = DiscreteDistribution::new(random::distribution::<f64, _>(3, &mut r)).unwrap();
        let lam = 0.3;
        let mix = DiscreteDistribution::new(
            d1.weights()
                .iter()
                .zip(d2.weights())
                .map(|(&a, &b)| lam * a + (1.0 - lam) * b)
                .collect(),
        )
        .unwrap();
        let p1 = quantum_jeffreys(&joint, &d1).unwrap();
        let p2 = quantum_jeffreys(&joint, &d2).unwrap();
        let pm = quantum_jeffreys(&joint, &mix).unwrap();
        let blend = &p1.matrix().scale_re(lam) + &p2.matrix().scale_re(1.0 - lam);
        assert!((pm.matrix() - &blend).max_abs() < 1e-12);
    }

    #[test]
    fn thermal_jeffreys_cases() {
        let mut r = rng(47);
        let kraus = KrausModel::new(random::kraus_operators::<f64, _>(2, 3, &mut r)).unwrap();
        let prior = rand_density::<f64>(2, 2, &mut r);
        let joint = build_decohered_joint(&prior, &kraus).unwrap();
        let phi = joint.outcome_distribution();
        let energies = [0.0, 1.0, 2.5];

        // β = 0 target: mean prior energy; posterior equals Jeffreys with the
        // prior outcome distribution.
        let mean: f64 = energies.iter().zip(&phi).map(|(&e, &p)| e * p).sum();
        let (beta, post) = thermal_jeffreys(&joint, &energies, mean).unwrap();
        assert!(beta.abs() < 1e-8, "beta = {}", beta);
        let qj =
            quantum_jeffreys(&joint, &DiscreteDistribution::new(phi.clone()).unwrap()).unwrap();
        assert!((post.matrix() - qj.matrix()).max_abs() < 1e-8);

        // Target near the ground state: β strongly negative, posterior near
        // the ground block.
        let (beta, post) = thermal_jeffreys(&joint, &energies, 0.001).unwrap();
        assert!(beta < -3.0);
        let ground = quantum_bayes(&joint, 0).unwrap();
        assert!((post.matrix() - ground.matrix()).max_abs() < 0.02);

        // Infeasible target.
        assert!(matches!(
            thermal_jeffreys(&joint, &energies, 3.0),
            Err(MeasurementError::InfeasibleThermal { .. })
        ));
    }

    #[test]
    fn thermal_two_level_matches_logistic_inversion() {
        let mut r = rng(48);
        let kraus = KrausModel::new(random::kraus_operators::<f64, _>(2, 2, &mut r)).unwrap();
        let prior = rand_density::<f64>(2, 2, &mut r);
        let joint = build_decohered_joint(&prior, &kraus).unwrap();
        let phi = joint.outcome_distribution();
        let energies = [0.3, 1.1];
        let target = 0.8;
        let (beta, _) = thermal_jeffreys(&joint, &energies, target).unwrap();
        // Closed form: r = e^{β(ε1-ε0)} φ1/φ0 with <H> = (ε0 + ε1 r)/(1+r).
        let ratio = (target - energies[0]) / (energies[1] - target);
        let beta_oracle = (ratio * phi[0] / phi[1]).ln() / (energies[1] - energies[0]);
        assert_close(beta, beta_oracle, 1e-8);
    }

    #[test]
    fn canonical_rule_reduces_to_jeffreys_at_beta_zero() {
        let mut r = rng(49);
        let kraus = KrausModel::new(random::kraus_operators::<f64, _>(3, 2, &mut r)).unwrap();
        let prior = rand_density::<f64>(3, 3, &mut r);
        let joint = build_decohered_joint(&prior, &kraus).unwrap();
        let f = random::hermitian::<f64, _>(3, &mut r);
        let data = DiscreteDistribution::new(random::distribution::<f64, _>(2, &mut r)).unwrap();
        let canon = canonical_modified_rule(&joint, &f, 0.0, &data).unwrap();
        let qj = quantum_jeffreys(&joint, &data).unwrap();
        assert!((canon.matrix() - qj.matrix()).max_abs() < 1e-10);
    }

    #[test]
    fn canonical_rule_commuting_case_is_exponential_tilt() {
        // Diagonal prior, projective Kraus, diagonal f: per-block scalar
        // reweighting by e^{β f_i}.
        let prior = DensityMatrix::new(ComplexMatrix::real_diagonal(&[0.5, 0.3, 0.2])).unwrap();
        let kraus = KrausModel::projective(&ProjectorBasis::computational(3)).unwrap();
        let joint = build_decohered_joint(&prior, &kraus).unwrap();
        let f = HermitianObservable::real_diagonal(&[1.0, -1.0, 0.5]);
        let beta = 0.7;
        let data = DiscreteDistribution::delta(3, 1);
        let canon = canonical_modified_rule(&joint, &f, beta, &data).unwrap();
        // The rank-1 block renormalizes back to the pure projector.
        assert_close(canon.matrix()[(1, 1)].re, 1.0, 1e-12);

        // A partial-data version tilts per block but blocks stay projectors.
        let data = DiscreteDistribution::new(vec![0.6, 0.4, 0.0]).unwrap();
        let canon = canonical_modified_rule(&joint, &f, beta, &data).unwrap();
        assert_close(canon.matrix()[(0, 0)].re, 0.6, 1e-12);
        assert_close(canon.matrix()[(1, 1)].re, 0.4, 1e-12);
    }

    #[test]
    fn canonical_rule_matches_per_block_exponential_oracle() {
        let mut r = rng(50);
        let kraus = KrausModel::new(random::kraus_operators::<f64, _>(3, 2, &mut r)).unwrap();
        let prior = rand_density::<f64>(3, 3, &mut r);
        let joint = build_decohered_joint(&prior, &kraus).unwrap();
        let f = random::hermitian::<f64, _>(3, &mut r);
        let beta = 0.8;
        let data = DiscreteDistribution::new(random::distribution::<f64, _>(2, &mut r)).unwrap();
        let got = canonical_modified_rule(&joint, &f, beta, &data).unwrap();

        // Independent recomputation: matrix_exp on each block exponent,
        // normalized per block.
        let mut oracle = ComplexMatrix::<f64>::zeros(3);
        for (x, block) in joint.blocks() {
            let w = data.weights()[*x];
            if w <= 0.0 {
                continue;
            }
            let sd = support_decomposition(block, 1e-12).unwrap();
            let log_block = ComplexMatrix::real_diagonal(
                &sd.eigenvalues.iter().map(|l| l.ln()).collect::<Vec<_>>(),
            );
            let exponent = (&sd.compress(f.matrix()).scale_re(beta) + &log_block).symmetrize();
            let g = matrix_exp(&HermitianObservable::new(exponent).unwrap()).unwrap();
            let zeta = g.trace().re;
            oracle = &oracle + &sd.embed(&g).scale_re(w / zeta);
        }
        assert!((got.matrix() - &oracle).max_abs() < 1e-8);
    }

    #[test]
    fn order_symmetry_zero_for_product_and_bell_states() {
        let mut r = rng(51);
        let a = rand_density::<f64>(2, 2, &mut r);
        let b = rand_density::<f64>(2, 2, &mut r);
        let product = DensityMatrix::new(kron(a.matrix(), b.matrix())).unwrap();
        assert!(order_symmetry_check(&product, (2, 2)).unwrap() <= 1e-12);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell =
            DensityMatrix::pure(&[cx(s, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(s, 0.0)]).unwrap();
        assert!(order_symmetry_check(&bell, (2, 2)).unwrap() <= 1e-12);
        // Both decoherence orders give the diagonal (1/2, 0, 0, 1/2).
        let m = bell.matrix();
        assert_close(m[(0, 0)].re, 0.5, 1e-12);
        assert_close(m[(3, 3)].re, 0.5, 1e-12);
    }

    #[test]
    fn order_symmetry_on_random_entangled_states() {
        let mut r = rng(52);
        for _ in 0..25 {
            let rank = r.gen_range(1..=4);
            let joint = rand_density::<f64>(4, rank, &mut r);
            let dev = order_symmetry_check(&joint, (2, 2)).unwrap();
            assert!(dev <= 1e-12, "deviation {}", dev);
        }
    }

    #[test]
    fn sequential_updates_differ_from_simultaneous() {
        let sz = HermitianObservable::real_diagonal(&[1.0, -1.0]);
        let sx = HermitianObservable::new(
            ComplexMatrix::from_rows(&[
                vec![cx(0.0, 0.0), cx(1.0, 0.0)],
                vec![cx(1.0, 0.0), cx(0.0, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let prior = DensityMatrix::maximally_mixed(2);
        let cs1 = QuantumConstraintSet::new(vec![sz.clone()], vec![0.5]).unwrap();
        let cs2 = QuantumConstraintSet::new(vec![sx.clone()], vec![0.5]).unwrap();
        let rep = sequential_vs_simultaneous(&prior, &cs1, &cs2, opts()).unwrap();

        // Last-applied constraint holds; the first generally does not.
        assert!(rep.residuals_cs2[0].iter().all(|r| r.abs() <= 1e-8));
        assert!(rep.residuals_cs1[1].iter().all(|r| r.abs() <= 1e-8));
        assert!(rep.residuals_cs1[0][0].abs() > 1e-3);
        // Simultaneous satisfies both.
        assert!(rep.residuals_cs1[2].iter().all(|r| r.abs() <= 1e-8));
        assert!(rep.residuals_cs2[2].iter().all(|r| r.abs() <= 1e-8));
        // Three distinct posteriors.
        assert!(rep.dist_12_21 > 1e-3);
        assert!(rep.dist_12_3 > 1e-3);
        assert!(rep.dist_21_3 > 1e-3);
    }

    #[test]
    fn sequential_same_constraints_all_agree() {
        let sz = HermitianObservable::real_diagonal(&[1.0, -1.0]);
        let prior = DensityMatrix::maximally_mixed(2);
        let cs = QuantumConstraintSet::new(vec![sz], vec![0.4]).unwrap();
        let rep = sequential_vs_simultaneous(&prior, &cs, &cs, opts()).unwrap();
        assert!(rep.dist_12_21 <= 1e-8);
        assert!(rep.dist_12_3 <= 1e-8);
        assert!(rep.dist_21_3 <= 1e-8);
    }

    #[test]
    fn sequential_commuting_constraints_keep_only_last_target() {
        let sz = HermitianObservable::real_diagonal(&[1.0, -1.0]);
        let prior = DensityMatrix::maximally_mixed(2);
        let cs1 = QuantumConstraintSet::new(vec![sz.clone()], vec![0.2]).unwrap();
        let cs2 = QuantumConstraintSet::new(vec![sz.clone()], vec![0.6]).unwrap();
        let (rho1, _) = qmaxent_update(&prior, &cs1, opts()).unwrap();
        let (rho12, _) = qmaxent_update(&rho1, &cs2, opts()).unwrap();
        assert_close(sz.expectation(rho12.matrix()), 0.6, 1e-8);
        // Diagonal closed form: the second update overwrites the tilt.
        assert_close(rho12.matrix()[(0, 0)].re, 0.8, 1e-8);
    }
}
