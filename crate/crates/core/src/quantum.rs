//! Maximum-entropy updating of density matrices.
//!
//! The posterior has the form `exp(Σ α_i Â_i + ln φ̂)/Z`. Every solve happens
//! inside the prior's support subspace and is embedded back with zeros: a
//! rank-deficient prior can only be updated where it has support, so
//! compressing first avoids the -inf logarithms entirely. Multipliers are
//! found by damped Newton on the residuals with the exact gradient
//! (`∂ lnZ/∂α_i = Tr(ρ(α) Â_i)`) and a finite-difference Hessian, with a
//! gradient/Armijo fallback.
//!
//! Targets that sit exactly on an extreme eigenvalue of a (compressed)
//! observable correspond to an infinitely large Lagrange multiplier. They are
//! rejected as infeasible, but the degenerate limit posterior — the prior
//! restricted to the extremal eigenspace, reweighted by the remaining
//! constraints — is attached to the error as a diagnostic, and is available
//! directly through [`degenerate_limit_update`] for data-style (delta)
//! constraints.

use thiserror::Error;

use crate::classical::{solve_spd, SolverOptions};
use crate::matrix::{
    hermitian_eig, support_cutoff, support_decomposition, ComplexMatrix, DensityMatrix,
    HermitianObservable, MatrixError, SupportDecomposition,
};
use crate::scalar::{cre, cx, RealScalar};

#[derive(Debug, Error)]
pub enum QuantumError<R: RealScalar> {
    #[error("infeasible constraint {index}: target {target} not strictly inside the attainable range [{lo}, {hi}] on the prior support; a target on the boundary would require an infinitely large Lagrange multiplier (degenerate limit posterior attached when boundary = {boundary})")]
    Infeasible {
        index: usize,
        target: R,
        lo: R,
        hi: R,
        boundary: bool,
        /// Degenerate limit posterior for boundary targets.
        degenerate: Option<Box<DensityMatrix<R>>>,
    },
    #[error("dual solve did not converge in {iterations} iterations; max residual {residual}")]
    NonConvergence {
        iterations: usize,
        residual: R,
        residuals: Vec<R>,
    },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("constraint set mismatch: {context}")]
    Mismatch { context: String },
}

pub type Result<T, R> = std::result::Result<T, QuantumError<R>>;

impl<R: RealScalar> QuantumError<R> {
    /// The degenerate posterior attached to a boundary infeasibility, if any.
    pub fn degenerate_posterior(&self) -> Option<&DensityMatrix<R>> {
        match self {
            QuantumError::Infeasible {
                degenerate: Some(b),
                ..
            } => Some(b),
            _ => None,
        }
    }
}

/// Hermitian observables paired with target expectation values.
#[derive(Debug, Clone)]
pub struct QuantumConstraintSet<R: RealScalar> {
    pub observables: Vec<HermitianObservable<R>>,
    pub targets: Vec<R>,
}

impl<R: RealScalar> QuantumConstraintSet<R> {
    pub fn new(observables: Vec<HermitianObservable<R>>, targets: Vec<R>) -> Result<Self, R> {
        if observables.len() != targets.len() {
            return Err(QuantumError::Mismatch {
                context: format!(
                    "{} observables vs {} targets",
                    observables.len(),
                    targets.len()
                ),
            });
        }
        Ok(Self {
            observables,
            targets,
        })
    }

    pub fn empty() -> Self {
        Self {
            observables: vec![],
            targets: vec![],
        }
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    /// Concatenation, used for simultaneous updates.
    pub fn merged(&self, other: &Self) -> Self {
        Self {
            observables: self
                .observables
                .iter()
                .chain(&other.observables)
                .cloned()
                .collect(),
            targets: self.targets.iter().chain(&other.targets).copied().collect(),
        }
    }

    pub fn residuals(&self, rho: &DensityMatrix<R>) -> Vec<R> {
        self.observables
            .iter()
            .zip(&self.targets)
            .map(|(a, &t)| a.expectation(rho.matrix()) - t)
            .collect()
    }
}

/// Multipliers and solve diagnostics.
#[derive(Debug, Clone)]
pub struct DualSolution<R: RealScalar> {
    pub multipliers: Vec<R>,
    pub log_partition: R,
    pub residuals: Vec<R>,
    pub iterations: usize,
}

fn boundary_tol<R: RealScalar>(scale: R) -> R {
    R::of(1e-9) * scale.max(R::one())
}

/// MaxEnt update of a density matrix subject to expectation-value
/// constraints. Boundary targets are rejected (see module docs).
pub fn qmaxent_update<R: RealScalar>(
    prior: &DensityMatrix<R>,
    constraints: &QuantumConstraintSet<R>,
    options: SolverOptions<R>,
) -> Result<(DensityMatrix<R>, DualSolution<R>), R> {
    solve(prior, constraints, options, false)
}

/// Same update, but targets on the attainable boundary are honored through
/// the degenerate limit: the support is restricted to the extremal eigenspace
/// and the remaining constraints are re-solved there. Boundary multipliers
/// are reported as +-inf. This is the executable form of data (delta)
/// constraints.
pub fn degenerate_limit_update<R: RealScalar>(
    prior: &DensityMatrix<R>,
    constraints: &QuantumConstraintSet<R>,
    options: SolverOptions<R>,
) -> Result<(DensityMatrix<R>, DualSolution<R>), R> {
    solve(prior, constraints, options, true)
}

fn solve<R: RealScalar>(
    prior: &DensityMatrix<R>,
    constraints: &QuantumConstraintSet<R>,
    options: SolverOptions<R>,
    allow_boundary: bool,
) -> Result<(DensityMatrix<R>, DualSolution<R>), R> {
    let n = prior.dim();
    for (k, a) in constraints.observables.iter().enumerate() {
        if a.dim() != n {
            return Err(QuantumError::Mismatch {
                context: format!("constraint {} has dim {}, prior has dim {}", k, a.dim(), n),
            });
        }
    }
    let sd = support_decomposition(prior.matrix(), support_cutoff::<R>())?;
    let log_prior =
        ComplexMatrix::real_diagonal(&sd.eigenvalues.iter().map(|l| l.ln()).collect::<Vec<_>>());
    solve_compressed(&sd, log_prior, constraints, options, allow_boundary)
}

/// Core solve on the compressed support. `log_prior` is the (Hermitian)
/// logarithm of the prior expressed in the support basis.
fn solve_compressed<R: RealScalar>(
    sd: &SupportDecomposition<R>,
    log_prior: ComplexMatrix<R>,
    constraints: &QuantumConstraintSet<R>,
    options: SolverOptions<R>,
    allow_boundary: bool,
) -> Result<(DensityMatrix<R>, DualSolution<R>), R> {
    let k_total = constraints.len();
    let compressed: Vec<ComplexMatrix<R>> = constraints
        .observables
        .iter()
        .map(|a| sd.compress(a.matrix()))
        .collect();

    // Classify each constraint against the spectrum of its compressed
    // observable.
    #[derive(Clone, Copy, PartialEq)]
    enum Class {
        Active,
        Inert,
        AtMax,
        AtMin,
    }
    let mut classes = vec![Class::Active; k_total];
    for (k, c) in compressed.iter().enumerate() {
        let h = HermitianObservable::new(c.clone())?;
        let eig = hermitian_eig(&h);
        let lo = eig.eigenvalues[0];
        let hi = *eig.eigenvalues.last().unwrap();
        let t = constraints.targets[k];
        let btol = boundary_tol(hi.abs().max(lo.abs()));
        if t < lo - btol || t > hi + btol {
            return Err(QuantumError::Infeasible {
                index: k,
                target: t,
                lo,
                hi,
                boundary: false,
                degenerate: None,
            });
        }
        if hi - lo <= btol {
            // Constant on the support: no updating power.
            classes[k] = Class::Inert;
        } else if (t - hi).abs() <= btol {
            classes[k] = Class::AtMax;
        } else if (t - lo).abs() <= btol {
            classes[k] = Class::AtMin;
        }
    }

    // Boundary targets: restrict the support to the extremal eigenspace of
    // the first boundary constraint and recurse on the rest.
    if let Some(kb) = classes
        .iter()
        .position(|c| matches!(c, Class::AtMax | Class::AtMin))
    {
        let at_max = matches!(classes[kb], Class::AtMax);
        let h = HermitianObservable::new(compressed[kb].clone())?;
        let eig = hermitian_eig(&h);
        let lo = eig.eigenvalues[0];
        let hi = *eig.eigenvalues.last().unwrap();
        let extreme = if at_max { hi } else { lo };
        let btol = boundary_tol(hi.abs().max(lo.abs()));
        let picked: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&i| (eig.eigenvalues[i] - extreme).abs() <= btol)
            .collect();
        // New support basis: columns of V * W for the extremal eigenvectors W.
        let new_basis: Vec<Vec<crate::scalar::Cx<R>>> = picked
            .iter()
            .map(|&col| {
                let w = eig.eigenvector(col);
                (0..sd.dim)
                    .map(|i| {
                        (0..sd.rank())
                            .map(|a| sd.basis[a][i] * w[a])
                            .fold(cre(R::zero()), |acc, z| acc + z)
                    })
                    .collect()
            })
            .collect();
        let rank = picked.len();
        // Degenerate-limit prior log on the restricted space: W† (ln φ) W.
        let mut new_log = ComplexMatrix::<R>::zeros(rank);
        for (ai, &ca) in picked.iter().enumerate() {
            for (bi, &cb) in picked.iter().enumerate() {
                let wa = eig.eigenvector(ca);
                let wb = eig.eigenvector(cb);
                new_log[(ai, bi)] = log_prior.sandwich(&wa, &wb);
            }
        }
        let sub_sd = SupportDecomposition {
            eigenvalues: vec![R::one(); rank], // placeholder; log carried separately
            basis: new_basis,
            dim: sd.dim,
        };
        let remaining = QuantumConstraintSet {
            observables: constraints
                .observables
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != kb)
                .map(|(_, a)| a.clone())
                .collect(),
            targets: constraints
                .targets
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != kb)
                .map(|(_, &t)| t)
                .collect(),
        };
        let (posterior, inner) =
            solve_compressed(&sub_sd, new_log, &remaining, options, allow_boundary)?;

        let mut multipliers = vec![R::zero(); k_total];
        let mut inner_ms = inner.multipliers.into_iter();
        for (k, slot) in multipliers.iter_mut().enumerate() {
            if k == kb {
                *slot = if at_max {
                    R::infinity()
                } else {
                    R::neg_infinity()
                };
            } else {
                *slot = inner_ms.next().unwrap_or(R::zero());
            }
        }
        let residuals = constraints.residuals(&posterior);
        let dual = DualSolution {
            multipliers,
            log_partition: inner.log_partition,
            residuals,
            iterations: inner.iterations,
        };
        if allow_boundary {
            return Ok((posterior, dual));
        }
        let h0 = HermitianObservable::new(compressed[kb].clone())?;
        let eig0 = hermitian_eig(&h0);
        return Err(QuantumError::Infeasible {
            index: kb,
            target: constraints.targets[kb],
            lo: eig0.eigenvalues[0],
            hi: *eig0.eigenvalues.last().unwrap(),
            boundary: true,
            degenerate: Some(Box::new(posterior)),
        });
    }

    // Inert constraints must already match their targets.
    for (k, class) in classes.iter().enumerate() {
        if matches!(class, Class::Inert) {
            let h = HermitianObservable::new(compressed[k].clone())?;
            let eig = hermitian_eig(&h);
            let val = eig.eigenvalues[0];
            let btol = boundary_tol(val.abs()) + R::of(1e-9);
            if (constraints.targets[k] - val).abs() > btol {
                return Err(QuantumError::Infeasible {
                    index: k,
                    target: constraints.targets[k],
                    lo: val,
                    hi: val,
                    boundary: false,
                    degenerate: None,
                });
            }
        }
    }

    let active: Vec<usize> = (0..k_total)
        .filter(|&k| matches!(classes[k], Class::Active))
        .collect();
    let active_obs: Vec<&ComplexMatrix<R>> = active.iter().map(|&k| &compressed[k]).collect();
    let active_targets: Vec<R> = active.iter().map(|&k| constraints.targets[k]).collect();

    let (rho_c, alpha, ln_z, iterations) =
        newton_dual(&log_prior, &active_obs, &active_targets, options)?;

    let full = sd.embed(&rho_c).symmetrize();
    let posterior = DensityMatrix::new(full)?;
    let mut multipliers = vec![R::zero(); k_total];
    for (slot, &k) in alpha.iter().zip(&active) {
        multipliers[k] = *slot;
    }
    let residuals = constraints.residuals(&posterior);
    Ok((
        posterior,
        DualSolution {
            multipliers,
            log_partition: ln_z,
            residuals,
            iterations,
        },
    ))
}

/// Evaluates ρ(α) = exp(Σ α_k A_k + L)/Z on the compressed space with the
/// exponent shifted by its top eigenvalue before exponentiation.
fn gibbs_state<R: RealScalar>(
    log_prior: &ComplexMatrix<R>,
    obs: &[&ComplexMatrix<R>],
    alpha: &[R],
) -> Result<(ComplexMatrix<R>, R), R> {
    let mut c = log_prior.clone();
    for (a, &al) in obs.iter().zip(alpha) {
        c = &c + &a.scale_re(al);
    }
    let h = HermitianObservable::new(c.symmetrize())?;
    let eig = hermitian_eig(&h);
    let top = *eig.eigenvalues.last().unwrap();
    let weights: Vec<R> = eig.eigenvalues.iter().map(|&l| (l - top).exp()).collect();
    let z: R = weights.iter().copied().sum();
    let m = eig.unitary.dim();
    let mut rho = ComplexMatrix::<R>::zeros(m);
    for (k, &w) in weights.iter().enumerate() {
        let p = w / z;
        for i in 0..m {
            let ui = eig.unitary[(i, k)];
            for j in 0..m {
                rho[(i, j)] += ui * eig.unitary[(j, k)].conj() * cre(p);
            }
        }
    }
    Ok((rho.symmetrize(), top + z.ln()))
}

fn expectations<R: RealScalar>(rho: &ComplexMatrix<R>, obs: &[&ComplexMatrix<R>]) -> Vec<R> {
    obs.iter()
        .map(|a| {
            let mut acc = R::zero();
            for i in 0..rho.dim() {
                for j in 0..rho.dim() {
                    acc += (a[(i, j)] * rho[(j, i)]).re;
                }
            }
            acc
        })
        .collect()
}

fn newton_dual<R: RealScalar>(
    log_prior: &ComplexMatrix<R>,
    obs: &[&ComplexMatrix<R>],
    targets: &[R],
    options: SolverOptions<R>,
) -> Result<(ComplexMatrix<R>, Vec<R>, R, usize), R> {
    let k = obs.len();
    let mut alpha = vec![R::zero(); k];
    if k == 0 {
        let (rho, ln_z) = gibbs_state(log_prior, obs, &alpha)?;
        return Ok((rho, alpha, ln_z, 0));
    }
    let dual = |alpha: &[R], ln_z: R| -> R {
        ln_z - alpha.iter().zip(targets).map(|(&a, &t)| a * t).sum::<R>()
    };

    let mut iterations = 0usize;
    loop {
        if alpha.iter().any(|a| !a.is_finite() || a.abs() > R::of(1e8)) {
            return Err(QuantumError::NonConvergence {
                iterations,
                residual: R::nan(),
                residuals: vec![R::nan(); k],
            });
        }
        let (rho, ln_z) = gibbs_state(log_prior, obs, &alpha)?;
        let grad: Vec<R> = expectations(&rho, obs)
            .iter()
            .zip(targets)
            .map(|(&e, &t)| e - t)
            .collect();
        let res = grad.iter().map(|g| g.abs()).fold(R::zero(), R::max);
        if res <= options.tol {
            return Ok((rho, alpha, ln_z, iterations));
        }
        if iterations >= options.max_iterations {
            return Err(QuantumError::NonConvergence {
                iterations,
                residual: res,
                residuals: grad.clone(),
            });
        }
        iterations += 1;

        // Hessian by symmetric finite differences of the exact gradient;
        // the step scales as ε^(1/3) so the difference quotient stays above
        // the rounding noise of the scalar in use.
        let fd_step = R::epsilon().powf(R::of(1.0 / 3.0));
        let mut hess = vec![R::zero(); k * k];
        for j in 0..k {
            let h = fd_step * (R::one() + alpha[j].abs());
            let mut ap = alpha.clone();
            ap[j] += h;
            let mut am = alpha.clone();
            am[j] -= h;
            let (rp, _) = gibbs_state(log_prior, obs, &ap)?;
            let (rm, _) = gibbs_state(log_prior, obs, &am)?;
            let gp = expectations(&rp, obs);
            let gm = expectations(&rm, obs);
            for i in 0..k {
                hess[i * k + j] = (gp[i] - gm[i]) / (h + h);
            }
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let s = (hess[i * k + j] + hess[j * k + i]) * R::of(0.5);
                hess[i * k + j] = s;
                hess[j * k + i] = s;
            }
        }
        let scale = (0..k).map(|i| hess[i * k + i]).fold(R::zero(), R::max);
        // Ridge above the finite-difference noise floor keeps redundant
        // constraint sets (singular covariance) factorizable.
        let ridge = (scale * R::of(1e-12)).max(R::of(1e-9));
        let direction = solve_spd(&hess, &grad, k, ridge);

        let f0 = dual(&alpha, ln_z);
        let mut stepped = false;
        if let Some(mut step) = direction {
            for s in step.iter_mut() {
                *s = -*s;
            }
            // Trust region: a flat (saturated) Hessian can propose absurd
            // steps; the damped iteration still converges through the cap.
            let step_norm = step.iter().map(|s| s.abs()).fold(R::zero(), R::max);
            let cap = R::of(50.0);
            if step_norm > cap {
                let shrink = cap / step_norm;
                for s in step.iter_mut() {
                    *s *= shrink;
                }
            }
            let slope: R = grad.iter().zip(&step).map(|(&g, &s)| g * s).sum();
            if slope < R::zero() {
                let mut t = R::one();
                for _ in 0..50 {
                    let trial: Vec<R> = alpha.iter().zip(&step).map(|(&a, &s)| a + t * s).collect();
                    let (rho_t, ln_zt) = gibbs_state(log_prior, obs, &trial)?;
                    // Near the optimum the dual improvement drops below
                    // rounding and the Armijo test goes blind; a plain
                    // residual decrease is then the sharper acceptance. Far
                    // from it, only the Armijo decrease is trusted.
                    let res_t = expectations(&rho_t, obs)
                        .iter()
                        .zip(targets)
                        .map(|(&e, &tg)| (e - tg).abs())
                        .fold(R::zero(), R::max);
                    let near_optimum = res <= R::of(1e-4).max(R::epsilon().sqrt() * R::of(100.0));
                    if (near_optimum && res_t < res)
                        || dual(&trial, ln_zt) <= f0 + R::of(1e-4) * t * slope
                    {
                        alpha = trial;
                        stepped = true;
                        break;
                    }
                    t *= R::of(0.5);
                }
            }
        }
        if !stepped {
            // Armijo-damped gradient descent fallback; near the optimum a
            // plain residual decrease is accepted for the same reason as
            // above.
            let gnorm2: R = grad.iter().map(|&g| g * g).sum();
            let mut t = R::one() / (R::one() + gnorm2.sqrt());
            for _ in 0..60 {
                let trial: Vec<R> = alpha.iter().zip(&grad).map(|(&a, &g)| a - t * g).collect();
                let (rho_t, ln_zt) = gibbs_state(log_prior, obs, &trial)?;
                let res_t = expectations(&rho_t, obs)
                    .iter()
                    .zip(targets)
                    .map(|(&e, &tg)| (e - tg).abs())
                    .fold(R::zero(), R::max);
                let near_optimum = res <= R::of(1e-4).max(R::epsilon().sqrt() * R::of(100.0));
                if (near_optimum && res_t < res)
                    || dual(&trial, ln_zt) <= f0 - R::of(1e-4) * t * gnorm2
                {
                    alpha = trial;
                    break;
                }
                t *= R::of(0.5);
            }
        }
    }
}

/// Checks the support containment of a posterior against the prior:
/// true iff `max |(1-P) ρ (1-P)|` is at most `cutoff`, with `P` the prior's
/// support projector. Also returns that off-support mass.
pub fn check_pdmt<R: RealScalar>(
    prior: &DensityMatrix<R>,
    posterior: &DensityMatrix<R>,
    cutoff: R,
) -> Result<(bool, R), R> {
    if prior.dim() != posterior.dim() {
        return Err(QuantumError::Mismatch {
            context: format!(
                "prior dim {} vs posterior dim {}",
                prior.dim(),
                posterior.dim()
            ),
        });
    }
    let sd = support_decomposition(prior.matrix(), support_cutoff::<R>())?;
    let p = sd.projector();
    let q = &ComplexMatrix::identity(prior.dim()) - &p;
    let off = q.matmul(posterior.matrix()).matmul(&q).max_abs();
    Ok((off <= cutoff, off))
}

/// Runs the update with the prior regularized as
/// `φ_ε = normalize(φ + ε (1-P))` for each ε, in the given order.
pub fn epsilon_prior_sweep<R: RealScalar>(
    prior: &DensityMatrix<R>,
    constraints: &QuantumConstraintSet<R>,
    epsilons: &[R],
    options: SolverOptions<R>,
) -> Result<Vec<DensityMatrix<R>>, R> {
    for w in epsilons.windows(2) {
        if !(w[0] > w[1]) {
            return Err(QuantumError::Mismatch {
                context: "epsilons must be positive and strictly descending".into(),
            });
        }
    }
    if let Some(&last) = epsilons.last() {
        if !(last > R::zero()) {
            return Err(QuantumError::Mismatch {
                context: "epsilons must be positive".into(),
            });
        }
    }
    let sd = support_decomposition(prior.matrix(), support_cutoff::<R>())?;
    let complement = &ComplexMatrix::identity(prior.dim()) - &sd.projector();
    let mut out = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let reg = prior.matrix() + &complement.scale_re(eps);
        let reg = DensityMatrix::from_unnormalized(reg)?;
        let (post, _) = qmaxent_update(&reg, constraints, options)?;
        out.push(post);
    }
    Ok(out)
}

/// Closed-form 2x2 solver for a mixed spin-z prior `diag(a, b)` and one
/// constraint `<c_1 1 + c_x σx + c_y σy + c_z σz> = target`.
///
/// The multiplier solves a monotone scalar equation by bisection; the
/// posterior is assembled from the split eigenvalues `λ ± δλ` with
/// `Z = 2 e^λ cosh δλ`.
pub fn spin_2x2_analytic<R: RealScalar>(
    a: R,
    b: R,
    c: [R; 4],
    target: R,
) -> Result<(R, DensityMatrix<R>), R> {
    if !(a > R::zero() && b > R::zero()) || (a + b - R::one()).abs() > R::of(1e-10) {
        return Err(QuantumError::Mismatch {
            context: format!(
                "prior weights a={}, b={} must be positive and sum to 1",
                a, b
            ),
        });
    }
    let [c1, cx_, cy_, cz_] = c;
    let cvec2 = cx_ * cx_ + cy_ * cy_ + cz_ * cz_;
    let cnorm = cvec2.sqrt();
    let log_ratio = (a / b).ln();

    // <c_mu sigma^mu>(alpha); monotone nondecreasing in alpha.
    let expectation = |alpha: R| -> R {
        let f = {
            let u = alpha * cz_ + alpha * cz_ + log_ratio; // 2 alpha c_z + ln(a/b)
            u * u + R::of(4.0) * alpha * alpha * (cx_ * cx_ + cy_ * cy_)
        };
        let g = (alpha + alpha) * cvec2 + cz_ * log_ratio;
        let root = f.sqrt();
        if root < R::of(1e-12) {
            c1 + g * R::of(0.5)
        } else {
            c1 + (root * R::of(0.5)).tanh() * g / root
        }
    };

    if cnorm <= R::of(1e-14) {
        // Pure-identity observable: only its prior expectation is attainable.
        if (target - c1).abs() <= R::of(1e-9) {
            let prior = DensityMatrix::new(ComplexMatrix::real_diagonal(&[a, b]))?;
            return Ok((R::zero(), prior));
        }
        return Err(QuantumError::Infeasible {
            index: 0,
            target,
            lo: c1,
            hi: c1,
            boundary: false,
            degenerate: None,
        });
    }
    let lo_attainable = c1 - cnorm;
    let hi_attainable = c1 + cnorm;
    if !(target > lo_attainable && target < hi_attainable) {
        return Err(QuantumError::Infeasible {
            index: 0,
            target,
            lo: lo_attainable,
            hi: hi_attainable,
            boundary: true,
            degenerate: None,
        });
    }

    // Bracket and bisect the monotone map.
    let mut lo = -R::one();
    let mut hi = R::one();
    for _ in 0..400 {
        if expectation(lo) < target {
            break;
        }
        lo *= R::of(2.0);
    }
    for _ in 0..400 {
        if expectation(hi) > target {
            break;
        }
        hi *= R::of(2.0);
    }
    let mut alpha = (lo + hi) * R::of(0.5);
    for _ in 0..200 {
        alpha = (lo + hi) * R::of(0.5);
        if expectation(alpha) < target {
            lo = alpha;
        } else {
            hi = alpha;
        }
    }

    // Assemble exp(C)/Z from the traceless part of the exponent.
    let mz = alpha * cz_ + log_ratio * R::of(0.5);
    let mx = alpha * cx_;
    let my = alpha * cy_;
    let dl = (mz * mz + mx * mx + my * my).sqrt();
    let m = ComplexMatrix::from_rows(&[
        vec![cx(mz, R::zero()), cx(mx, -my)],
        vec![cx(mx, my), cx(-mz, R::zero())],
    ])
    .map_err(QuantumError::Matrix)?;
    let sinhc = if dl < R::of(1e-12) {
        R::one()
    } else {
        dl.sinh() / dl
    };
    let cosh = dl.cosh();
    let rho = &ComplexMatrix::identity(2).scale_re(cosh) + &m.scale_re(sinhc);
    let rho = rho.scale_re(R::one() / (cosh + cosh));
    Ok((alpha, DensityMatrix::new(rho)?))
}
