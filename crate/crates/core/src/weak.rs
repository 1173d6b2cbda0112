//! Pointer-coupling measurement inference: strong and weak collapse from
//! position detections, noisy-amplifier (Jeffreys) corrections, weak values
//! with real and imaginary readout, and the Stern-Gerlach position-to-spin
//! posterior. ħ = 1 throughout this module.
//!
//! The entangled state is always computed exactly as the superposition of
//! Gaussians `Σ_n α_n exp(-(d-a_n)²/4Δ²) |a_n>|d>`; the first-order weak-value
//! expansion is used only to predict pointer means, with an explicit
//! weak-regime flag instead of silent approximation.

use rand::Rng;
use thiserror::Error;

use crate::classical::DiscreteDistribution;
use crate::dynamics::LatticeGrid;
use crate::matrix::HermitianObservable;
use crate::scalar::{cre, cx, Cx, RealScalar};

#[derive(Debug, Error)]
pub enum WeakError<R: RealScalar> {
    #[error("pointer grid too small: must span at least 8Δ beyond the extreme eigenvalues (needs [{need_lo}, {need_hi}], has [{have_lo}, {have_hi}])")]
    GridTooSmall {
        need_lo: R,
        need_hi: R,
        have_lo: R,
        have_hi: R,
    },
    #[error("zero likelihood at detection {detection}")]
    ZeroLikelihood { detection: R },
    #[error("signal column {signal} has zero mass")]
    ZeroSignalMass { signal: usize },
    #[error("postselection is orthogonal to the prepared state: |<Ψ'|Ψ>| = {overlap}")]
    OrthogonalPostselection { overlap: R },
    #[error("need at least 2 samples, got {n}")]
    InsufficientSamples { n: usize },
    #[error("degenerate correspondence constant c = {c}")]
    DegenerateCorrespondence { c: R },
    #[error("invalid input: {context}")]
    Invalid { context: String },
}

pub type Result<T, R> = std::result::Result<T, WeakError<R>>;

/// Prepared system `|Ψ> = Σ_n α_n |a_n>` expanded in the eigenbasis of the
/// inferable of interest.
#[derive(Debug, Clone)]
pub struct SystemPrep<R: RealScalar> {
    pub amplitudes: Vec<Cx<R>>,
    pub eigenvalues: Vec<R>,
}

impl<R: RealScalar> SystemPrep<R> {
    pub fn new(amplitudes: Vec<Cx<R>>, eigenvalues: Vec<R>) -> Result<Self, R> {
        if amplitudes.len() != eigenvalues.len() || amplitudes.is_empty() {
            return Err(WeakError::Invalid {
                context: "amplitudes and eigenvalues must have equal nonzero length".into(),
            });
        }
        let norm2: R = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - R::one()).abs() > R::of(1e-10) {
            return Err(WeakError::Invalid {
                context: format!("norm² = {} deviates from 1", norm2),
            });
        }
        for i in 0..eigenvalues.len() {
            for j in (i + 1)..eigenvalues.len() {
                if (eigenvalues[i] - eigenvalues[j]).abs() <= R::of(1e-12) {
                    return Err(WeakError::Invalid {
                        context: format!("eigenvalues {} and {} coincide", i, j),
                    });
                }
            }
        }
        Ok(Self {
            amplitudes,
            eigenvalues,
        })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn probabilities(&self) -> Vec<R> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Gaussian pointer of width Δ sampled on a lattice.
#[derive(Debug, Clone)]
pub struct PointerModel<R: RealScalar> {
    pub width: R,
    pub grid: LatticeGrid<R>,
}

impl<R: RealScalar> PointerModel<R> {
    pub fn new(width: R, grid: LatticeGrid<R>) -> Result<Self, R> {
        if !(width > R::zero()) {
            return Err(WeakError::Invalid {
                context: "Δ must be positive".into(),
            });
        }
        Ok(Self { width, grid })
    }

    /// Grid spanning ±(8Δ + margin) past the extreme eigenvalues with
    /// roughly `points_per_width` samples per Δ.
    pub fn spanning(width: R, eigenvalues: &[R], points_per_width: usize) -> Result<Self, R> {
        let lo = eigenvalues.iter().copied().fold(R::infinity(), R::min);
        let hi = eigenvalues.iter().copied().fold(R::neg_infinity(), R::max);
        let pad = width * R::of(9.0);
        let dx = width / R::of_usize(points_per_width.max(2));
        let span = hi - lo + pad + pad;
        let n = (span / dx).ceil().to_usize().unwrap_or(0).max(8);
        let grid = LatticeGrid::new(n, dx, lo - pad).map_err(|e| WeakError::Invalid {
            context: e.to_string(),
        })?;
        Self::new(width, grid)
    }

    fn check_span(&self, eigenvalues: &[R]) -> Result<(), R> {
        let lo = eigenvalues.iter().copied().fold(R::infinity(), R::min);
        let hi = eigenvalues.iter().copied().fold(R::neg_infinity(), R::max);
        let need_lo = lo - self.width * R::of(8.0);
        let need_hi = hi + self.width * R::of(8.0);
        let have_lo = self.grid.point(0);
        let have_hi = self.grid.point(self.grid.n_points - 1);
        if have_lo > need_lo || have_hi < need_hi {
            return Err(WeakError::GridTooSmall {
                need_lo,
                need_hi,
                have_lo,
                have_hi,
            });
        }
        Ok(())
    }
}

/// Row-stochastic amplification table `q(D|d)`: rows follow the pointer
/// grid, columns are macroscopic signals.
#[derive(Debug, Clone)]
pub struct AmplificationLikelihood<R: RealScalar> {
    table: Vec<Vec<R>>,
    n_signals: usize,
}

impl<R: RealScalar> AmplificationLikelihood<R> {
    pub fn new(table: Vec<Vec<R>>) -> Result<Self, R> {
        let n_signals = match table.first() {
            Some(row) => row.len(),
            None => {
                return Err(WeakError::Invalid {
                    context: "empty table".into(),
                })
            }
        };
        for (i, row) in table.iter().enumerate() {
            if row.len() != n_signals {
                return Err(WeakError::Invalid {
                    context: "ragged table".into(),
                });
            }
            let sum: R = row.iter().copied().sum();
            if row.iter().any(|&v| v < R::zero()) || (sum - R::one()).abs() > R::of(1e-10) {
                return Err(WeakError::Invalid {
                    context: format!("row {} is not a distribution", i),
                });
            }
        }
        Ok(Self { table, n_signals })
    }

    /// Ideal amplification: one signal per pointer site.
    pub fn identity(n: usize) -> Self {
        let table = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { R::one() } else { R::zero() })
                    .collect()
            })
            .collect();
        Self {
            table,
            n_signals: n,
        }
    }

    /// Pixel detector: signal k fires when the pointer lands in the k-th
    /// block of `pixel_width` consecutive sites.
    pub fn pixels(n_sites: usize, pixel_width: usize) -> Self {
        let n_signals = n_sites.div_ceil(pixel_width);
        let table = (0..n_sites)
            .map(|i| {
                (0..n_signals)
                    .map(|k| {
                        if i / pixel_width == k {
                            R::one()
                        } else {
                            R::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Self { table, n_signals }
    }

    pub fn n_signals(&self) -> usize {
        self.n_signals
    }

    pub fn row(&self, d_index: usize) -> &[R] {
        &self.table[d_index]
    }
}

/// Postselected final state `|Ψ'>`.
#[derive(Debug, Clone)]
pub struct PostselectionSpec<R: RealScalar> {
    pub amplitudes: Vec<Cx<R>>,
}

impl<R: RealScalar> PostselectionSpec<R> {
    pub fn new(amplitudes: Vec<Cx<R>>) -> Result<Self, R> {
        let norm2: R = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - R::one()).abs() > R::of(1e-10) {
            return Err(WeakError::Invalid {
                context: format!("postselection norm² = {} deviates from 1", norm2),
            });
        }
        Ok(Self { amplitudes })
    }
}

/// Exact entangled amplitude table `Ψ(n, d) ∝ α_n exp(-(d-a_n)²/4Δ²)` on the
/// pointer grid, globally normalized.
#[derive(Debug, Clone)]
pub struct EntangledPointerState<R: RealScalar> {
    pub system: SystemPrep<R>,
    pub pointer: PointerModel<R>,
    /// `table[n][j]` = amplitude at eigenbranch n, pointer site j.
    pub table: Vec<Vec<Cx<R>>>,
}

pub fn entangle_pointer<R: RealScalar>(
    sys: &SystemPrep<R>,
    pointer: &PointerModel<R>,
) -> Result<EntangledPointerState<R>, R> {
    pointer.check_span(&sys.eigenvalues)?;
    let g = &pointer.grid;
    let four_d2 = R::of(4.0) * pointer.width * pointer.width;
    let mut table: Vec<Vec<Cx<R>>> = sys
        .amplitudes
        .iter()
        .zip(&sys.eigenvalues)
        .map(|(&alpha, &a)| {
            (0..g.n_points)
                .map(|j| {
                    let d = g.point(j) - a;
                    alpha * cre((-d * d / four_d2).exp())
                })
                .collect()
        })
        .collect();
    let norm2: R = table.iter().flatten().map(|z| z.norm_sqr()).sum::<R>() * g.dx;
    let s = norm2.sqrt();
    for row in table.iter_mut() {
        for z in row.iter_mut() {
            *z /= cre(s);
        }
    }
    Ok(EntangledPointerState {
        system: sys.clone(),
        pointer: pointer.clone(),
        table,
    })
}

impl<R: RealScalar> EntangledPointerState<R> {
    /// Marginal over the pointer: recovers `|α_n|²` up to grid truncation.
    pub fn branch_probabilities(&self) -> Vec<R> {
        self.table
            .iter()
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum::<R>() * self.pointer.grid.dx)
            .collect()
    }

    /// Pointer marginal `φ(d_j)` (density).
    pub fn pointer_marginal(&self) -> Vec<R> {
        let n = self.pointer.grid.n_points;
        (0..n)
            .map(|j| self.table.iter().map(|row| row[j].norm_sqr()).sum())
            .collect()
    }

    /// Joint pdf over (branch, site) as a flat vector (branch-major), for
    /// sampling detections.
    pub fn joint_pdf(&self) -> Vec<R> {
        let dx = self.pointer.grid.dx;
        self.table
            .iter()
            .flatten()
            .map(|z| z.norm_sqr() * dx)
            .collect()
    }
}

/// `P(a_n | D)` per the exact Gaussian-mixture formula; `Δ → 0` gives strong
/// collapse onto the eigenvalue nearest `D`.
pub fn posterior_given_detection<R: RealScalar>(
    joint: &EntangledPointerState<R>,
    detection: R,
) -> Result<DiscreteDistribution<R>, R> {
    let two_d2 = R::of(2.0) * joint.pointer.width * joint.pointer.width;
    // Shift by the max exponent so resolved detections cannot underflow.
    let exponents: Vec<R> = joint
        .system
        .eigenvalues
        .iter()
        .zip(joint.system.probabilities())
        .map(|(&a, p)| {
            if p > R::zero() {
                p.ln() - (detection - a) * (detection - a) / two_d2
            } else {
                R::neg_infinity()
            }
        })
        .collect();
    let top = exponents.iter().copied().fold(R::neg_infinity(), R::max);
    if !top.is_finite() {
        return Err(WeakError::ZeroLikelihood { detection });
    }
    let weights: Vec<R> = exponents
        .iter()
        .map(|&e| {
            if e.is_finite() {
                (e - top).exp()
            } else {
                R::zero()
            }
        })
        .collect();
    DiscreteDistribution::from_unnormalized(weights).map_err(|e| WeakError::Invalid {
        context: e.to_string(),
    })
}

/// Noisy-detector posterior (Jeffreys):
/// `P_J(a_n) = Σ_d P(a_n|d) q(d|D)` with `q(d|D)` obtained from the
/// amplification table by conditioning against the pointer marginal.
pub fn posterior_noisy_detector<R: RealScalar>(
    joint: &EntangledPointerState<R>,
    amp: &AmplificationLikelihood<R>,
    signal: usize,
) -> Result<DiscreteDistribution<R>, R> {
    let g = &joint.pointer.grid;
    if amp.table.len() != g.n_points {
        return Err(WeakError::Invalid {
            context: format!(
                "amplification rows {} must match pointer grid {}",
                amp.table.len(),
                g.n_points
            ),
        });
    }
    if signal >= amp.n_signals() {
        return Err(WeakError::ZeroSignalMass { signal });
    }
    let phi_d = joint.pointer_marginal();
    // q(d|D) ∝ q(D|d) φ(d)
    let mut q_cond: Vec<R> = (0..g.n_points)
        .map(|j| amp.row(j)[signal] * phi_d[j])
        .collect();
    let mass: R = q_cond.iter().copied().sum();
    if !(mass > R::zero()) {
        return Err(WeakError::ZeroSignalMass { signal });
    }
    for q in q_cond.iter_mut() {
        *q /= mass;
    }
    let mut post = vec![R::zero(); joint.system.len()];
    for (j, &q) in q_cond.iter().enumerate() {
        if q <= R::zero() {
            continue;
        }
        let p_d = posterior_given_detection(joint, g.point(j))?;
        for (slot, &p) in post.iter_mut().zip(p_d.weights()) {
            *slot += q * p;
        }
    }
    DiscreteDistribution::from_unnormalized(post).map_err(|e| WeakError::Invalid {
        context: e.to_string(),
    })
}

/// Weak value `A_w = <Ψ'|Â|Ψ> / <Ψ'|Ψ>` with Â given in the eigenbasis of
/// the preparation.
pub fn weak_value<R: RealScalar>(
    sys: &SystemPrep<R>,
    observable: &HermitianObservable<R>,
    post: &PostselectionSpec<R>,
) -> Result<Cx<R>, R> {
    if observable.dim() != sys.len() || post.amplitudes.len() != sys.len() {
        return Err(WeakError::Invalid {
            context: "observable and postselection must match the preparation dimension".into(),
        });
    }
    let overlap = post
        .amplitudes
        .iter()
        .zip(&sys.amplitudes)
        .map(|(b, a)| b.conj() * *a)
        .fold(cre(R::zero()), |acc, z| acc + z);
    if overlap.norm() <= R::of(1e-12) {
        return Err(WeakError::OrthogonalPostselection {
            overlap: overlap.norm(),
        });
    }
    let numerator = observable
        .matrix()
        .sandwich(&post.amplitudes, &sys.amplitudes);
    Ok(numerator / overlap)
}

/// Exact postselected pointer distributions plus the first-order weak-value
/// predictions for their means.
#[derive(Debug, Clone)]
pub struct WeakValueReadout<R: RealScalar> {
    pub weak_value: Cx<R>,
    /// Position-readout density on the pointer grid.
    pub position_grid: LatticeGrid<R>,
    pub position_density: Vec<R>,
    /// Momentum-readout density on its own (conjugate) grid.
    pub momentum_grid: LatticeGrid<R>,
    pub momentum_density: Vec<R>,
    /// First-order predictions: position mean → `Re[A_w]`; momentum mean →
    /// `-Im[A_w]/(2Δ²)` (rescale by 1/c for a device with correspondence
    /// p = c·d).
    pub predicted_position_mean: R,
    pub predicted_momentum_mean: R,
    /// Weak-regime validity flag (Δ ≥ 5·max|a_n|·|A_w| heuristic); when
    /// false the exact distributions are still returned.
    pub weak_regime_ok: bool,
}

pub fn weak_value_pointer_distributions<R: RealScalar>(
    sys: &SystemPrep<R>,
    observable: &HermitianObservable<R>,
    post: &PostselectionSpec<R>,
    pointer: &PointerModel<R>,
) -> Result<WeakValueReadout<R>, R> {
    let aw = weak_value(sys, observable, post)?;
    let joint = entangle_pointer(sys, pointer)?;
    let g = pointer.grid;

    // Conditional position amplitude: Σ_n conj(α'_n) Ψ(n, d).
    let cond: Vec<Cx<R>> = (0..g.n_points)
        .map(|j| {
            post.amplitudes
                .iter()
                .zip(&joint.table)
                .map(|(b, row)| b.conj() * row[j])
                .fold(cre(R::zero()), |acc, z| acc + z)
        })
        .collect();
    let mass: R = cond.iter().map(|z| z.norm_sqr()).sum::<R>() * g.dx;
    if !(mass > R::zero()) {
        return Err(WeakError::ZeroLikelihood {
            detection: R::zero(),
        });
    }
    let position_density: Vec<R> = cond.iter().map(|z| z.norm_sqr() / mass).collect();

    // Momentum side: ψ̃(p) = Σ_n conj(α'_n) α_n e^{-Δ²p²} e^{-i p a_n}
    // (continuum transform of the branch Gaussians, evaluated on a p grid
    // spanning ±8 σ_p around the predicted shift).
    let sigma_p = R::one() / (R::of(2.0) * pointer.width);
    let shift = -aw.im / (R::of(2.0) * pointer.width * pointer.width);
    let span = sigma_p * R::of(8.0);
    let p_lo = shift - span;
    let n_p = 1024usize;
    let dp = (span + span) / R::of_usize(n_p);
    let momentum_grid = LatticeGrid::new(n_p, dp, p_lo).map_err(|e| WeakError::Invalid {
        context: e.to_string(),
    })?;
    let d2 = pointer.width * pointer.width;
    let mut momentum_density: Vec<R> = (0..n_p)
        .map(|j| {
            let p = momentum_grid.point(j);
            let envelope = (-d2 * p * p).exp();
            let amp = sys
                .amplitudes
                .iter()
                .zip(&post.amplitudes)
                .zip(&sys.eigenvalues)
                .map(|((&a, &b), &ev)| {
                    let phase = p * ev;
                    b.conj() * a * cx(phase.cos(), phase.sin())
                })
                .fold(cre(R::zero()), |acc, z| acc + z)
                * cre(envelope);
            amp.norm_sqr()
        })
        .collect();
    let pmass: R = momentum_density.iter().copied().sum::<R>() * dp;
    for v in momentum_density.iter_mut() {
        *v /= pmass;
    }

    let a_max = sys
        .eigenvalues
        .iter()
        .map(|a| a.abs())
        .fold(R::zero(), R::max);
    let weak_regime_ok = pointer.width >= R::of(5.0) * a_max * aw.norm();
    Ok(WeakValueReadout {
        weak_value: aw,
        position_grid: g,
        position_density,
        momentum_grid,
        momentum_density,
        predicted_position_mean: aw.re,
        predicted_momentum_mean: shift,
        weak_regime_ok,
    })
}

/// Sample mean and its standard error `Δ/√N` for estimating `Re[A_w]` from
/// position-readout detections. The correspondence constant of the readout
/// device is accepted for interface symmetry with the momentum branch and is
/// only validated here.
pub fn estimate_weak_value_from_samples<R: RealScalar>(
    samples: &[R],
    pointer: &PointerModel<R>,
    c: R,
) -> Result<(R, R), R> {
    if samples.len() < 2 {
        return Err(WeakError::InsufficientSamples { n: samples.len() });
    }
    if !c.is_finite() || c == R::zero() {
        return Err(WeakError::DegenerateCorrespondence { c });
    }
    let n = R::of_usize(samples.len());
    let mean: R = samples.iter().copied().sum::<R>() / n;
    let stderr = pointer.width / n.sqrt();
    Ok((mean, stderr))
}

/// Inverse-CDF draws of grid positions from a lattice density (`pdf · dx`
/// cell masses). Reproducible given the generator state.
pub fn sample_positions<R: RealScalar, G: Rng + ?Sized>(
    grid: &LatticeGrid<R>,
    density: &[R],
    n_samples: usize,
    rng: &mut G,
) -> Vec<R> {
    let mut cdf = Vec::with_capacity(density.len());
    let mut acc = R::zero();
    for &p in density {
        acc += p.max(R::zero()) * grid.dx;
        cdf.push(acc);
    }
    let total = acc;
    (0..n_samples)
        .map(|_| {
            let u = R::of(rng.gen::<f64>()) * total;
            let idx = match cdf.binary_search_by(|probe| probe.partial_cmp(&u).unwrap()) {
                Ok(i) => i,
                Err(i) => i.min(cdf.len() - 1),
            };
            grid.point(idx)
        })
        .collect()
}

/// Draws (branch, pointer position) pairs from the exact joint distribution.
pub fn sample_joint_detections<R: RealScalar, G: Rng + ?Sized>(
    joint: &EntangledPointerState<R>,
    n_samples: usize,
    rng: &mut G,
) -> Vec<(usize, R)> {
    let pdf = joint.joint_pdf();
    let n_d = joint.pointer.grid.n_points;
    let mut cdf = Vec::with_capacity(pdf.len());
    let mut acc = R::zero();
    for &p in &pdf {
        acc += p;
        cdf.push(acc);
    }
    (0..n_samples)
        .map(|_| {
            let u = R::of(rng.gen::<f64>()) * acc;
            let idx = match cdf.binary_search_by(|probe| probe.partial_cmp(&u).unwrap()) {
                Ok(i) => i,
                Err(i) => i.min(cdf.len() - 1),
            };
            (idx / n_d, joint.pointer.grid.point(idx % n_d))
        })
        .collect()
}

/// Stern-Gerlach spin posterior from a screen detection at `z` after flight
/// time `t`:
/// `P(±|z) ∝ |α_±|² exp(-(2Δ²/(1+4Δ⁴t²/m²)) (z ∓ λΔt/m)²)`.
pub fn stern_gerlach_posterior<R: RealScalar>(
    alpha_pm: (Cx<R>, Cx<R>),
    lambda: R,
    delta: R,
    t: R,
    mass: R,
    z: R,
) -> Result<(R, R), R> {
    if !(delta > R::zero() && mass > R::zero()) {
        return Err(WeakError::Invalid {
            context: "Δ and m must be positive".into(),
        });
    }
    let spread = R::one() + R::of(4.0) * delta.powi(4) * t * t / (mass * mass);
    let coeff = R::of(2.0) * delta * delta / spread;
    let displacement = lambda * delta * t / mass;
    let e_plus = alpha_pm.0.norm_sqr().ln() - coeff * (z - displacement) * (z - displacement);
    let e_minus = alpha_pm.1.norm_sqr().ln() - coeff * (z + displacement) * (z + displacement);
    let top = e_plus.max(e_minus);
    let w_plus = (e_plus - top).exp();
    let w_minus = (e_minus - top).exp();
    let total = w_plus + w_minus;
    Ok((w_plus / total, w_minus / total))
}

/// Unitary-device remap for a monotone correspondence `a = c·x`: amplitudes
/// given over the `a` basis become a position density
/// `p(x) = |ψ(c x)|² · |c|` on the rescaled grid.
pub fn unitary_device_remap<R: RealScalar>(
    grid_a: &LatticeGrid<R>,
    amplitudes: &[Cx<R>],
    c: R,
) -> Result<(LatticeGrid<R>, Vec<R>), R> {
    if !c.is_finite() || c.abs() <= R::of(1e-300) {
        return Err(WeakError::DegenerateCorrespondence { c });
    }
    if amplitudes.len() != grid_a.n_points {
        return Err(WeakError::Invalid {
            context: "amplitude count must match the grid".into(),
        });
    }
    let density_a: Vec<R> = amplitudes.iter().map(|z| z.norm_sqr()).collect();
    // x_j = a_j / c; for negative c the order reverses to keep x ascending.
    let n = grid_a.n_points;
    let dx = grid_a.dx / c.abs();
    let (origin, density): (R, Vec<R>) = if c > R::zero() {
        (
            grid_a.origin / c,
            density_a.iter().map(|&p| p * c.abs()).collect(),
        )
    } else {
        let origin = grid_a.point(n - 1) / c;
        (
            origin,
            density_a.iter().rev().map(|&p| p * c.abs()).collect(),
        )
    };
    let grid_x = LatticeGrid::new(n, dx, origin).map_err(|e| WeakError::Invalid {
        context: e.to_string(),
    })?;
    Ok((grid_x, density))
}
