//! Maximum-entropy updating of discrete probability distributions.
//!
//! The dual is solved by damped Newton with the exact gradient (constraint
//! residuals) and exact Hessian (covariance of the observables), falling back
//! to bisection when there is a single constraint. Zero prior weights are
//! hard zeros and are never resurrected; targets sitting exactly on the
//! attainable boundary are honored through the degenerate limit, i.e. the
//! posterior concentrates on the extremizing outcomes and the multiplier is
//! reported as +-inf.

use thiserror::Error;

use crate::scalar::RealScalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicalError {
    #[error("invalid distribution: {context}")]
    InvalidDistribution { context: String },
    #[error(
        "infeasible constraint {index}: target {target} outside attainable range [{lo}, {hi}]"
    )]
    Infeasible {
        index: usize,
        target: f64,
        lo: f64,
        hi: f64,
    },
    #[error("dual solve did not converge in {iterations} iterations; max residual {residual}")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("zero evidence: observed marginal has probability 0")]
    ZeroEvidence,
    #[error("support violation: data distribution has mass on a zero-probability outcome {index}")]
    SupportViolation { index: usize },
    #[error("length mismatch: {context}")]
    LengthMismatch { context: String },
}

pub type Result<T> = std::result::Result<T, ClassicalError>;

/// Normalized distribution over finitely many outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution<R: RealScalar> {
    weights: Vec<R>,
}

impl<R: RealScalar> DiscreteDistribution<R> {
    pub fn new(weights: Vec<R>) -> Result<Self> {
        if weights.is_empty() {
            return Err(ClassicalError::InvalidDistribution {
                context: "empty".into(),
            });
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w >= R::zero()) {
                return Err(ClassicalError::InvalidDistribution {
                    context: format!("negative or NaN weight at {}", i),
                });
            }
        }
        let total: R = weights.iter().copied().sum();
        if (total - R::one()).abs() > R::of(1e-10) {
            return Err(ClassicalError::InvalidDistribution {
                context: format!("total {} deviates from 1", total),
            });
        }
        Ok(Self { weights })
    }

    /// Normalizes nonnegative weights.
    pub fn from_unnormalized(weights: Vec<R>) -> Result<Self> {
        let total: R = weights.iter().copied().sum();
        if !(total > R::zero()) {
            return Err(ClassicalError::InvalidDistribution {
                context: "nonpositive total".into(),
            });
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![R::one() / R::of_usize(n); n],
        }
    }

    pub fn delta(n: usize, at: usize) -> Self {
        let mut w = vec![R::zero(); n];
        w[at] = R::one();
        Self { weights: w }
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn expectation(&self, observable: &[R]) -> R {
        self.weights
            .iter()
            .zip(observable)
            .map(|(&w, &a)| w * a)
            .sum()
    }
}

/// Expectation-value constraint `<A> = target` over the outcome space.
#[derive(Debug, Clone)]
pub struct MomentConstraint<R: RealScalar> {
    pub observable: Vec<R>,
    pub target: R,
}

/// Joint distribution over X x Θ, stored row-major over x.
#[derive(Debug, Clone)]
pub struct JointDistribution<R: RealScalar> {
    n_x: usize,
    n_theta: usize,
    table: Vec<R>,
}

impl<R: RealScalar> JointDistribution<R> {
    pub fn new(table: Vec<Vec<R>>) -> Result<Self> {
        let n_x = table.len();
        if n_x == 0 {
            return Err(ClassicalError::InvalidDistribution {
                context: "empty joint".into(),
            });
        }
        let n_theta = table[0].len();
        let mut flat = Vec::with_capacity(n_x * n_theta);
        for row in &table {
            if row.len() != n_theta {
                return Err(ClassicalError::LengthMismatch {
                    context: "ragged joint table".into(),
                });
            }
            for &v in row {
                if !(v >= R::zero()) {
                    return Err(ClassicalError::InvalidDistribution {
                        context: "negative joint entry".into(),
                    });
                }
                flat.push(v);
            }
        }
        let total: R = flat.iter().copied().sum();
        if (total - R::one()).abs() > R::of(1e-10) {
            return Err(ClassicalError::InvalidDistribution {
                context: format!("joint total {} deviates from 1", total),
            });
        }
        Ok(Self {
            n_x,
            n_theta,
            table: flat,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_x, self.n_theta)
    }

    #[inline]
    pub fn get(&self, x: usize, theta: usize) -> R {
        self.table[x * self.n_theta + theta]
    }

    pub fn x_marginal(&self) -> Vec<R> {
        (0..self.n_x)
            .map(|x| (0..self.n_theta).map(|t| self.get(x, t)).sum())
            .collect()
    }

    pub fn theta_marginal(&self) -> Vec<R> {
        (0..self.n_theta)
            .map(|t| (0..self.n_x).map(|x| self.get(x, t)).sum())
            .collect()
    }
}

/// Multipliers and diagnostics from a dual solve.
#[derive(Debug, Clone)]
pub struct DualReport<R: RealScalar> {
    pub multipliers: Vec<R>,
    pub log_partition: R,
    pub residuals: Vec<R>,
    pub iterations: usize,
}

/// Solver knobs shared by the classical and quantum duals.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<R: RealScalar> {
    pub tol: R,
    pub max_iterations: usize,
}

impl<R: RealScalar> Default for SolverOptions<R> {
    fn default() -> Self {
        Self {
            tol: R::of(1e-8),
            max_iterations: 200,
        }
    }
}

fn boundary_tol<R: RealScalar>(scale: R) -> R {
    R::of(1e-9) * scale.max(R::one())
}

/// `posterior_i ∝ prior_i exp(Σ_k α_k A_k(i))` with every `<A_k>` matched to
/// its target. Returns the posterior and the multipliers.
pub fn maxent_update<R: RealScalar>(
    prior: &DiscreteDistribution<R>,
    constraints: &[MomentConstraint<R>],
    options: SolverOptions<R>,
) -> Result<(DiscreteDistribution<R>, DualReport<R>)> {
    let n = prior.len();
    for (k, c) in constraints.iter().enumerate() {
        if c.observable.len() != n {
            return Err(ClassicalError::LengthMismatch {
                context: format!(
                    "constraint {} has {} entries, prior has {}",
                    k,
                    c.observable.len(),
                    n
                ),
            });
        }
    }
    if constraints.is_empty() {
        return Ok((
            prior.clone(),
            DualReport {
                multipliers: vec![],
                log_partition: R::zero(),
                residuals: vec![],
                iterations: 0,
            },
        ));
    }

    // Support = strictly positive prior outcomes; hard zeros stay zero.
    let support: Vec<usize> = (0..n).filter(|&i| prior.weights()[i] > R::zero()).collect();

    // Feasibility against the attainable range on the support. Boundary
    // targets trigger the degenerate-limit path below.
    let mut boundary: Vec<(usize, bool)> = Vec::new(); // (constraint idx, at_max)
    for (k, c) in constraints.iter().enumerate() {
        let lo = support
            .iter()
            .map(|&i| c.observable[i])
            .fold(R::infinity(), R::min);
        let hi = support
            .iter()
            .map(|&i| c.observable[i])
            .fold(R::neg_infinity(), R::max);
        let btol = boundary_tol(hi.abs().max(lo.abs()));
        if c.target < lo - btol || c.target > hi + btol {
            return Err(ClassicalError::Infeasible {
                index: k,
                target: c.target.to_f64().unwrap_or(f64::NAN),
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: hi.to_f64().unwrap_or(f64::NAN),
            });
        }
        if hi - lo <= btol {
            // Constant observable on the support: inert constraint.
            continue;
        }
        if (c.target - hi).abs() <= btol {
            boundary.push((k, true));
        } else if (c.target - lo).abs() <= btol {
            boundary.push((k, false));
        }
    }

    if !boundary.is_empty() {
        return degenerate_boundary_solve(prior, constraints, &boundary, options);
    }

    solve_interior(prior, constraints, &support, options)
}

/// Restricts the support to the extremizing outcomes of each boundary
/// constraint, then re-solves the remaining constraints there. Boundary
/// multipliers are reported as +-inf.
fn degenerate_boundary_solve<R: RealScalar>(
    prior: &DiscreteDistribution<R>,
    constraints: &[MomentConstraint<R>],
    boundary: &[(usize, bool)],
    options: SolverOptions<R>,
) -> Result<(DiscreteDistribution<R>, DualReport<R>)> {
    let n = prior.len();
    let mut keep: Vec<bool> = prior.weights().iter().map(|&w| w > R::zero()).collect();
    for &(k, at_max) in boundary {
        let c = &constraints[k];
        let active: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
        let extreme = if at_max {
            active
                .iter()
                .map(|&i| c.observable[i])
                .fold(R::neg_infinity(), R::max)
        } else {
            active
                .iter()
                .map(|&i| c.observable[i])
                .fold(R::infinity(), R::min)
        };
        let btol = boundary_tol(extreme.abs());
        for i in 0..n {
            if keep[i] && (c.observable[i] - extreme).abs() > btol {
                keep[i] = false;
            }
        }
    }
    let restricted: Vec<R> = prior
        .weights()
        .iter()
        .enumerate()
        .map(|(i, &w)| if keep[i] { w } else { R::zero() })
        .collect();
    let total: R = restricted.iter().copied().sum();
    if !(total > R::zero()) {
        let (k, _) = boundary[0];
        return Err(ClassicalError::Infeasible {
            index: k,
            target: constraints[k].target.to_f64().unwrap_or(f64::NAN),
            lo: f64::NAN,
            hi: f64::NAN,
        });
    }
    let base = DiscreteDistribution::new(restricted.iter().map(|&w| w / total).collect())?;

    let interior: Vec<MomentConstraint<R>> = constraints
        .iter()
        .enumerate()
        .filter(|(k, _)| !boundary.iter().any(|&(b, _)| b == *k))
        .map(|(_, c)| c.clone())
        .collect();
    let (posterior, inner) = maxent_update(&base, &interior, options)?;

    // Reassemble the multiplier vector with inf markers on boundary entries.
    let mut multipliers = vec![R::zero(); constraints.len()];
    let mut inner_iter = inner.multipliers.into_iter();
    for (k, slot) in multipliers.iter_mut().enumerate() {
        if let Some(&(_, at_max)) = boundary.iter().find(|&&(b, _)| b == k) {
            *slot = if at_max {
                R::infinity()
            } else {
                R::neg_infinity()
            };
        } else {
            *slot = inner_iter.next().unwrap_or(R::zero());
        }
    }
    let residuals: Vec<R> = constraints
        .iter()
        .map(|c| posterior.expectation(&c.observable) - c.target)
        .collect();
    Ok((
        posterior,
        DualReport {
            multipliers,
            log_partition: inner.log_partition,
            residuals,
            iterations: inner.iterations,
        },
    ))
}

fn posterior_weights<R: RealScalar>(
    prior: &DiscreteDistribution<R>,
    constraints: &[MomentConstraint<R>],
    alpha: &[R],
) -> (Vec<R>, R) {
    let n = prior.len();
    let mut logits = vec![R::neg_infinity(); n];
    let mut max_logit = R::neg_infinity();
    for i in 0..n {
        let w = prior.weights()[i];
        if w <= R::zero() {
            continue;
        }
        let mut l = w.ln();
        for (c, &a) in constraints.iter().zip(alpha) {
            l += a * c.observable[i];
        }
        logits[i] = l;
        max_logit = max_logit.max(l);
    }
    let mut z = R::zero();
    let mut out = vec![R::zero(); n];
    for i in 0..n {
        if logits[i].is_finite() {
            out[i] = (logits[i] - max_logit).exp();
            z += out[i];
        }
    }
    for o in out.iter_mut() {
        *o /= z;
    }
    (out, max_logit + z.ln())
}

fn solve_interior<R: RealScalar>(
    prior: &DiscreteDistribution<R>,
    constraints: &[MomentConstraint<R>],
    _support: &[usize],
    options: SolverOptions<R>,
) -> Result<(DiscreteDistribution<R>, DualReport<R>)> {
    let k = constraints.len();
    let targets: Vec<R> = constraints.iter().map(|c| c.target).collect();
    let mut alpha = vec![R::zero(); k];

    // Dual objective to minimize: f(α) = ln Z(α) - α·t (convex).
    let eval = |alpha: &[R]| -> (Vec<R>, R, Vec<R>) {
        let (w, ln_z) = posterior_weights(prior, constraints, alpha);
        let grad: Vec<R> = constraints
            .iter()
            .zip(&targets)
            .map(|(c, &t)| {
                w.iter()
                    .zip(&c.observable)
                    .map(|(&wi, &ai)| wi * ai)
                    .sum::<R>()
                    - t
            })
            .collect();
        (w, ln_z, grad)
    };
    let dual = |alpha: &[R], ln_z: R| -> R {
        ln_z - alpha.iter().zip(&targets).map(|(&a, &t)| a * t).sum::<R>()
    };

    let mut iterations = 0usize;
    loop {
        let (w, ln_z, grad) = eval(&alpha);
        let res = grad.iter().map(|g| g.abs()).fold(R::zero(), R::max);
        if res <= options.tol {
            return Ok((
                DiscreteDistribution::new(w)?,
                DualReport {
                    multipliers: alpha,
                    log_partition: ln_z,
                    residuals: grad,
                    iterations,
                },
            ));
        }
        if iterations >= options.max_iterations {
            if k == 1 {
                if let Some(result) = bisect_single(prior, &constraints[0], options, iterations)? {
                    return Ok(result);
                }
            }
            return Err(ClassicalError::NonConvergence {
                iterations,
                residual: res.to_f64().unwrap_or(f64::NAN),
            });
        }
        iterations += 1;

        // Exact Hessian: covariance matrix of the observables.
        let means: Vec<R> = constraints
            .iter()
            .map(|c| w.iter().zip(&c.observable).map(|(&wi, &ai)| wi * ai).sum())
            .collect();
        let mut hess = vec![R::zero(); k * k];
        for a in 0..k {
            for b in a..k {
                let mut cov = R::zero();
                for i in 0..prior.len() {
                    if w[i] > R::zero() {
                        cov += w[i]
                            * (constraints[a].observable[i] - means[a])
                            * (constraints[b].observable[i] - means[b]);
                    }
                }
                hess[a * k + b] = cov;
                hess[b * k + a] = cov;
            }
        }
        let scale = (0..k).map(|i| hess[i * k + i]).fold(R::zero(), R::max);
        let mut step = match solve_spd(&hess, &grad, k, scale * R::of(1e-13)) {
            Some(s) => s,
            None => grad.clone(), // gradient direction fallback
        };
        for s in step.iter_mut() {
            *s = -*s;
        }

        // Backtracking on the dual objective.
        let f0 = dual(&alpha, ln_z);
        let slope: R = grad.iter().zip(&step).map(|(&g, &s)| g * s).sum();
        let mut t = R::one();
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<R> = alpha.iter().zip(&step).map(|(&a, &s)| a + t * s).collect();
            let (_, ln_zt) = posterior_weights(prior, constraints, &trial);
            let ft = dual(&trial, ln_zt);
            if ft <= f0 + R::of(1e-4) * t * slope {
                alpha = trial;
                accepted = true;
                break;
            }
            t *= R::of(0.5);
        }
        if !accepted {
            // Tiny gradient step keeps the iteration moving.
            for (a, &g) in alpha.iter_mut().zip(&grad) {
                *a -= g * R::of(1e-3);
            }
        }
    }
}

/// Monotone-dual bisection for a single constraint, used when Newton stalls.
fn bisect_single<R: RealScalar>(
    prior: &DiscreteDistribution<R>,
    constraint: &MomentConstraint<R>,
    options: SolverOptions<R>,
    prior_iterations: usize,
) -> Result<Option<(DiscreteDistribution<R>, DualReport<R>)>> {
    let cs = std::slice::from_ref(constraint);
    let residual = |a: R| -> R {
        let (w, _) = posterior_weights(prior, cs, &[a]);
        w.iter()
            .zip(&constraint.observable)
            .map(|(&wi, &ai)| wi * ai)
            .sum::<R>()
            - constraint.target
    };
    let mut lo = -R::one();
    let mut hi = R::one();
    for _ in 0..200 {
        if residual(lo) < R::zero() {
            break;
        }
        lo *= R::of(2.0);
    }
    for _ in 0..200 {
        if residual(hi) > R::zero() {
            break;
        }
        hi *= R::of(2.0);
    }
    if !(residual(lo) <= R::zero() && residual(hi) >= R::zero()) {
        return Ok(None);
    }
    for iter in (prior_iterations + 1)..(prior_iterations + 501) {
        let mid = (lo + hi) * R::of(0.5);
        let r = residual(mid);
        if r.abs() <= options.tol {
            let (w, ln_z) = posterior_weights(prior, cs, &[mid]);
            return Ok(Some((
                DiscreteDistribution::new(w)?,
                DualReport {
                    multipliers: vec![mid],
                    log_partition: ln_z,
                    residuals: vec![r],
                    iterations: iter,
                },
            )));
        }
        if r < R::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(None)
}

/// Dense SPD solve by Cholesky with a diagonal ridge; `None` if the matrix
/// resists even after regularization.
pub(crate) fn solve_spd<R: RealScalar>(a: &[R], b: &[R], n: usize, ridge: R) -> Option<Vec<R>> {
    let mut m: Vec<R> = a.to_vec();
    for i in 0..n {
        m[i * n + i] += ridge.max(R::of(1e-300));
    }
    // Cholesky factorization in place: m = L L^T.
    let mut l = vec![R::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i * n + j];
            for p in 0..j {
                s -= l[i * n + p] * l[j * n + p];
            }
            if i == j {
                if s <= R::zero() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // Forward/back substitution.
    let mut y = vec![R::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for p in 0..i {
            s -= l[i * n + p] * y[p];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![R::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for p in (i + 1)..n {
            s -= l[p * n + i] * x[p];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

/// Conditions the joint on an observed `x` through the data-constraint
/// update: the support is restricted to the observed row and renormalized,
/// which is the degenerate limit of the per-x delta constraints.
pub fn bayes_from_maxent<R: RealScalar>(
    joint_prior: &JointDistribution<R>,
    observed_x: usize,
) -> Result<DiscreteDistribution<R>> {
    let (n_x, n_theta) = joint_prior.dims();
    if observed_x >= n_x {
        return Err(ClassicalError::LengthMismatch {
            context: format!("observed x {} out of range {}", observed_x, n_x),
        });
    }
    let evidence = joint_prior.x_marginal()[observed_x];
    if evidence <= R::zero() {
        return Err(ClassicalError::ZeroEvidence);
    }
    let weights: Vec<R> = (0..n_theta)
        .map(|t| joint_prior.get(observed_x, t) / evidence)
        .collect();
    DiscreteDistribution::from_unnormalized(weights)
}

/// Uncertain-data update: `posterior(θ) = Σ_x ρ_D(x) φ(θ|x)`. The
/// multipliers of the underlying marginal constraints have the closed form
/// `e^{α_x} = Z ρ_D(x)/φ(x)`, so the posterior is assembled directly.
pub fn jeffreys_from_maxent<R: RealScalar>(
    joint_prior: &JointDistribution<R>,
    data_marginal: &DiscreteDistribution<R>,
) -> Result<DiscreteDistribution<R>> {
    let (n_x, n_theta) = joint_prior.dims();
    if data_marginal.len() != n_x {
        return Err(ClassicalError::LengthMismatch {
            context: format!(
                "data marginal has {} entries, joint has {}",
                data_marginal.len(),
                n_x
            ),
        });
    }
    let phi_x = joint_prior.x_marginal();
    for x in 0..n_x {
        if data_marginal.weights()[x] > R::zero() && phi_x[x] <= R::zero() {
            return Err(ClassicalError::SupportViolation { index: x });
        }
    }
    let mut weights = vec![R::zero(); n_theta];
    for x in 0..n_x {
        let rd = data_marginal.weights()[x];
        if rd <= R::zero() {
            continue;
        }
        for (t, slot) in weights.iter_mut().enumerate() {
            *slot += rd * joint_prior.get(x, t) / phi_x[x];
        }
    }
    DiscreteDistribution::from_unnormalized(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::{assert_close, rng};
    use rand::Rng;

    fn die_prior() -> DiscreteDistribution<f64> {
        DiscreteDistribution::uniform(6)
    }

    fn die_faces() -> Vec<f64> {
        (1..=6).map(|k| k as f64).collect()
    }

    #[test]
    fn no_constraints_returns_prior() {
        let prior = DiscreteDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let (post, rep) = maxent_update(&prior, &[], SolverOptions::default()).unwrap();
        assert_eq!(post, prior);
        assert!(rep.multipliers.is_empty());
    }

    #[test]
    fn jaynes_die_matches_grid_bisection_oracle() {
        let c = MomentConstraint {
            observable: die_faces(),
            target: 4.5,
        };
        let (post, rep) = maxent_update(
            &die_prior(),
            std::slice::from_ref(&c),
            SolverOptions::default(),
        )
        .unwrap();
        assert_close(post.expectation(&die_faces()), 4.5, 1e-8);

        // Independent oracle: bisection directly on the monotone dual over a
        // bracket found by grid search.
        let mean_at = |alpha: f64| -> f64 {
            let w: Vec<f64> = (1..=6).map(|k| (alpha * k as f64).exp()).collect();
            let z: f64 = w.iter().sum();
            w.iter()
                .zip(1..=6)
                .map(|(wi, k)| wi * k as f64)
                .sum::<f64>()
                / z
        };
        let (mut lo, mut hi) = (-5.0, 5.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mean_at(mid) < 4.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let alpha_oracle = 0.5 * (lo + hi);
        assert_close(rep.multipliers[0], alpha_oracle, 1e-6);
        let z: f64 = (1..=6).map(|k| (alpha_oracle * k as f64).exp() / 6.0).sum();
        for (i, k) in (1..=6).enumerate() {
            let want = (alpha_oracle * k as f64).exp() / 6.0 / z;
            assert_close(post.weights()[i], want, 1e-6);
        }
    }

    #[test]
    fn impossible_die_average_is_infeasible() {
        let c = MomentConstraint {
            observable: die_faces(),
            target: 7.0,
        };
        let err = maxent_update(&die_prior(), &[c], SolverOptions::default()).unwrap_err();
        assert!(matches!(err, ClassicalError::Infeasible { .. }));
    }

    #[test]
    fn boundary_target_concentrates_on_argmax() {
        let c = MomentConstraint {
            observable: die_faces(),
            target: 6.0,
        };
        let (post, rep) = maxent_update(&die_prior(), &[c], SolverOptions::default()).unwrap();
        assert_close(post.weights()[5], 1.0, 1e-12);
        assert!(rep.multipliers[0].is_infinite() && rep.multipliers[0] > 0.0);
    }

    #[test]
    fn satisfied_constraints_give_zero_multipliers() {
        let prior = DiscreteDistribution::new(vec![0.1_f64, 0.2, 0.3, 0.4]).unwrap();
        let obs = vec![1.0, -1.0, 2.0, 0.5];
        let t = prior.expectation(&obs);
        let c = MomentConstraint {
            observable: obs,
            target: t,
        };
        let (post, rep) = maxent_update(&prior, &[c], SolverOptions::default()).unwrap();
        assert!(rep.multipliers[0].abs() <= 1e-6);
        for (p, q) in post.weights().iter().zip(prior.weights()) {
            assert_close(*p, *q, 1e-8);
        }
    }

    #[test]
    fn zero_prior_weights_stay_zero() {
        let prior = DiscreteDistribution::new(vec![0.5, 0.0, 0.5]).unwrap();
        let c = MomentConstraint {
            observable: vec![1.0, 2.0, 3.0],
            target: 2.5,
        };
        let (post, _) = maxent_update(&prior, &[c], SolverOptions::default()).unwrap();
        assert_eq!(post.weights()[1], 0.0);
        assert_close(post.expectation(&[1.0, 2.0, 3.0]), 2.5, 1e-8);
    }

    #[test]
    fn multi_constraint_newton_converges() {
        let mut r = rng(31);
        for _ in 0..20 {
            let n = 8;
            let prior = DiscreteDistribution::from_unnormalized(
                (0..n).map(|_| r.gen_range(0.05..1.0)).collect(),
            )
            .unwrap();
            let a1: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
            let a2: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
            // Interior targets from a random reference distribution.
            let refd = DiscreteDistribution::from_unnormalized(
                (0..n).map(|_| r.gen_range(0.05..1.0)).collect(),
            )
            .unwrap();
            let cs = vec![
                MomentConstraint {
                    observable: a1.clone(),
                    target: refd.expectation(&a1),
                },
                MomentConstraint {
                    observable: a2.clone(),
                    target: refd.expectation(&a2),
                },
            ];
            let (post, rep) = maxent_update(&prior, &cs, SolverOptions::default()).unwrap();
            assert!(rep.residuals.iter().all(|r| r.abs() <= 1e-8));
            assert_close(post.expectation(&a1), cs[0].target, 1e-7);
            assert_close(post.expectation(&a2), cs[1].target, 1e-7);
        }
    }

    #[test]
    fn nonconvergence_reported_when_iterations_exhausted() {
        let c = MomentConstraint {
            observable: die_faces(),
            target: 4.5,
        };
        let err = maxent_update(
            &die_prior(),
            &[c],
            SolverOptions {
                tol: 1e-14,
                max_iterations: 0,
            },
        );
        // Single constraint falls back to bisection, which succeeds even with
        // the Newton budget exhausted, so force the multi-constraint path.
        assert!(err.is_ok());
        let c1 = MomentConstraint {
            observable: die_faces(),
            target: 4.5,
        };
        let c2 = MomentConstraint {
            observable: vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            target: 0.4,
        };
        let err = maxent_update(
            &die_prior(),
            &[c1, c2],
            SolverOptions {
                tol: 1e-15,
                max_iterations: 0,
            },
        )
        .unwrap_err();
        assert!(matches!(err, ClassicalError::NonConvergence { .. }));
    }

    #[test]
    fn dual_monotone_in_alpha() {
        let prior = die_prior();
        let obs = die_faces();
        let cs = [MomentConstraint {
            observable: obs.clone(),
            target: 0.0,
        }];
        let mut prev = f64::NEG_INFINITY;
        for k in -20..=20 {
            let alpha = k as f64 * 0.25;
            let (w, _) = posterior_weights(&prior, &cs, &[alpha]);
            let mean: f64 = w.iter().zip(&obs).map(|(wi, ai)| wi * ai).sum();
            assert!(mean >= prev - 1e-12, "mean must be nondecreasing in alpha");
            prev = mean;
        }
    }

    #[test]
    fn subdomain_independence() {
        // Constraining only outcomes in D leaves conditionals outside D alone.
        let prior = DiscreteDistribution::new(vec![0.1, 0.2, 0.3, 0.25, 0.15]).unwrap();
        let obs = vec![1.0, 2.0, 0.0, 0.0, 0.0]; // touches D = {0, 1} only
        let c = MomentConstraint {
            observable: obs,
            target: 1.7 * 0.2,
        };
        let (post, _) = maxent_update(&prior, &[c], SolverOptions::default()).unwrap();
        for (i, j) in [(2usize, 3usize), (2, 4), (3, 4)] {
            let before = prior.weights()[i] / prior.weights()[j];
            let after = post.weights()[i] / post.weights()[j];
            assert_close(after, before, 1e-10);
        }
    }

    #[test]
    fn subsystem_independence_on_product_prior() {
        // Product joint prior, constraint on factor 1 only: factor-2 marginal
        // is untouched.
        let p1 = [0.3, 0.7];
        let p2 = [0.2, 0.5, 0.3];
        let flat_prior: Vec<f64> = p1
            .iter()
            .flat_map(|&a| p2.iter().map(move |&b| a * b))
            .collect();
        let prior = DiscreteDistribution::new(flat_prior).unwrap();
        let obs: Vec<f64> = (0..6)
            .map(|i| if i / 3 == 0 { 1.0 } else { -1.0 })
            .collect();
        let c = MomentConstraint {
            observable: obs,
            target: 0.1,
        };
        let (post, _) = maxent_update(&prior, &[c], SolverOptions::default()).unwrap();
        for b in 0..3 {
            let marg: f64 = (0..2).map(|a| post.weights()[a * 3 + b]).sum();
            assert_close(marg, p2[b], 1e-10);
        }
    }

    #[test]
    fn bayes_conditional_cases() {
        // Independence: posterior equals the theta prior.
        let joint =
            JointDistribution::new(vec![vec![0.3 * 0.4, 0.3 * 0.6], vec![0.7 * 0.4, 0.7 * 0.6]])
                .unwrap();
        let post = bayes_from_maxent(&joint, 1).unwrap();
        assert_close(post.weights()[0], 0.4, 1e-12);
        assert_close(post.weights()[1], 0.6, 1e-12);

        // Hand conditional.
        let joint = JointDistribution::new(vec![vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
        let post = bayes_from_maxent(&joint, 0).unwrap();
        assert_close(post.weights()[0], 1.0 / 3.0, 1e-12);
        assert_close(post.weights()[1], 2.0 / 3.0, 1e-12);

        // Zero evidence.
        let joint = JointDistribution::new(vec![vec![0.0, 0.0], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            bayes_from_maxent(&joint, 0),
            Err(ClassicalError::ZeroEvidence)
        ));
    }

    #[test]
    fn jeffreys_reduces_and_matches_double_sum() {
        let mut r = rng(17);
        let raw: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..3).map(|_| r.gen_range(0.01..1.0)).collect())
            .collect();
        let total: f64 = raw.iter().flatten().sum();
        let joint = JointDistribution::new(
            raw.iter()
                .map(|row| row.iter().map(|v| v / total).collect())
                .collect(),
        )
        .unwrap();
        let phi_x = joint.x_marginal();

        // Certainty limit reduces to Bayes.
        let delta = DiscreteDistribution::delta(3, 1);
        let jd = jeffreys_from_maxent(&joint, &delta).unwrap();
        let bayes = bayes_from_maxent(&joint, 1).unwrap();
        for (a, b) in jd.weights().iter().zip(bayes.weights()) {
            assert_close(*a, *b, 1e-12);
        }

        // No-information case returns the theta marginal.
        let rho_d = DiscreteDistribution::new(phi_x.clone()).unwrap();
        let jd = jeffreys_from_maxent(&joint, &rho_d).unwrap();
        for (a, b) in jd.weights().iter().zip(joint.theta_marginal().iter()) {
            assert_close(*a, *b, 1e-12);
        }

        // Random data marginal against the explicit double sum.
        let rho_d = DiscreteDistribution::from_unnormalized(
            (0..3).map(|_| r.gen_range(0.05..1.0)).collect(),
        )
        .unwrap();
        let jd = jeffreys_from_maxent(&joint, &rho_d).unwrap();
        for t in 0..3 {
            let mut want = 0.0;
            for x in 0..3 {
                want += rho_d.weights()[x] * joint.get(x, t) / phi_x[x];
            }
            assert_close(jd.weights()[t], want, 1e-12);
        }
    }

    #[test]
    fn jeffreys_support_violation() {
        let joint = JointDistribution::new(vec![vec![0.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let rho_d = DiscreteDistribution::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            jeffreys_from_maxent(&joint, &rho_d),
            Err(ClassicalError::SupportViolation { index: 0 })
        ));
    }
}
