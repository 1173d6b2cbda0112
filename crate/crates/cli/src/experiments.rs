//! Experiment dispatch: each kind maps a validated config onto the library
//! calls, a result table, and a one-line summary.

use anyhow::{anyhow, Context};
use num_complex::Complex;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use eik_core::classical::{maxent_update, DiscreteDistribution, MomentConstraint, SolverOptions};
use eik_core::dynamics::{fp_se_consistency, EDParams, LatticeGrid, WaveState};
use eik_core::jsonio::{constraints_from_json, kraus_from_json};
use eik_core::matrix::{ComplexMatrix, DensityMatrix};
use eik_core::measurement::sequential_vs_simultaneous;
use eik_core::measurement::{build_decohered_joint, quantum_bayes, thermal_jeffreys};
use eik_core::quantum::{qmaxent_update, spin_2x2_analytic};
use eik_core::weak::{
    estimate_weak_value_from_samples, sample_positions, weak_value,
    weak_value_pointer_distributions, PointerModel, PostselectionSpec, SystemPrep,
};

use crate::config::{ExperimentConfig, ExperimentInputs};
use crate::table::ResultTable;

pub struct ExperimentOutcome {
    pub table: ResultTable,
    pub summary: String,
}

fn matrix_rows(label: f64, m: &ComplexMatrix<f64>, table: &mut ResultTable) {
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            table.push(vec![label, i as f64, j as f64, m[(i, j)].re, m[(i, j)].im]);
        }
    }
}

fn matrix_table(m: &ComplexMatrix<f64>) -> ResultTable {
    let mut t = ResultTable::new(
        ["i", "j", "re", "im"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            t.push(vec![i as f64, j as f64, m[(i, j)].re, m[(i, j)].im]);
        }
    }
    t
}

fn fmt_matrix_2x2(m: &ComplexMatrix<f64>) -> String {
    format!(
        "[[{:.4}, {:.4}],[{:.4}, {:.4}]]",
        m[(0, 0)].re,
        m[(0, 1)].re,
        m[(1, 0)].re,
        m[(1, 1)].re
    )
}

pub fn run_experiment(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
    tol_override: Option<f64>,
) -> anyhow::Result<ExperimentOutcome> {
    let mut options = SolverOptions::<f64>::default();
    if let Some(tol) = tol_override {
        options.tol = tol;
    }
    let seed = seed_override.or(config.seed).unwrap_or(0);

    match &config.inputs {
        ExperimentInputs::ClassicalMaxent(c) => {
            let prior =
                DiscreteDistribution::new(c.prior.clone()).map_err(|e| anyhow!("prior: {e}"))?;
            let constraints: Vec<MomentConstraint<f64>> = c
                .constraints
                .iter()
                .map(|k| MomentConstraint {
                    observable: k.observable.clone(),
                    target: k.target,
                })
                .collect();
            let (posterior, report) = maxent_update(&prior, &constraints, options)?;
            let mut table = ResultTable::new(
                ["outcome", "prior", "posterior"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            );
            for (i, (&p, &q)) in prior.weights().iter().zip(posterior.weights()).enumerate() {
                table.push(vec![i as f64, p, q]);
            }
            let summary = format!(
                "classical-maxent: multipliers={:?} max_residual={:.3e} iterations={}",
                report.multipliers,
                report.residuals.iter().fold(0.0f64, |a, r| a.max(r.abs())),
                report.iterations
            );
            Ok(ExperimentOutcome { table, summary })
        }

        ExperimentInputs::Qmaxent(c) => {
            let prior = c.prior.to_density().map_err(|e| anyhow!("prior: {e}"))?;
            let cs = constraints_from_json(&c.constraints)?;
            let (posterior, dual) = qmaxent_update(&prior, &cs, options)?;
            let table = matrix_table(posterior.matrix());
            let summary = format!(
                "qmaxent: multipliers={:?} max_residual={:.3e} lnZ={:.6} iterations={}",
                dual.multipliers,
                dual.residuals.iter().fold(0.0f64, |a, r| a.max(r.abs())),
                dual.log_partition,
                dual.iterations
            );
            Ok(ExperimentOutcome { table, summary })
        }

        ExperimentInputs::Qbr(c) => {
            let prior = c.prior.to_density().map_err(|e| anyhow!("prior: {e}"))?;
            let kraus = kraus_from_json(&c.kraus)?;
            let joint = build_decohered_joint(&prior, &kraus)?;
            let outcome_dist = joint.outcome_distribution();
            let posterior = quantum_bayes(&joint, c.detected)?;
            let table = matrix_table(posterior.matrix());
            let summary = format!(
                "qbr: detected={} outcome_probabilities={:?}",
                c.detected, outcome_dist
            );
            Ok(ExperimentOutcome { table, summary })
        }

        ExperimentInputs::SpinDemo(c) => {
            let (alpha, posterior) = spin_2x2_analytic(c.a, c.b, c.c, c.target)?;
            // Cross-check with the general dual solver.
            let obs = eik_core::matrix::HermitianObservable::new(
                ComplexMatrix::from_rows(&[
                    vec![
                        Complex::new(c.c[0] + c.c[3], 0.0),
                        Complex::new(c.c[1], -c.c[2]),
                    ],
                    vec![
                        Complex::new(c.c[1], c.c[2]),
                        Complex::new(c.c[0] - c.c[3], 0.0),
                    ],
                ])
                .expect("2x2 rows"),
            )
            .map_err(|e| anyhow!("c: {e}"))?;
            let prior = DensityMatrix::new(ComplexMatrix::real_diagonal(&[c.a, c.b]))
                .map_err(|e| anyhow!("a/b: {e}"))?;
            let cs = eik_core::quantum::QuantumConstraintSet::new(vec![obs], vec![c.target])?;
            let (general, dual) = qmaxent_update(&prior, &cs, options)?;
            let gap = (general.matrix() - posterior.matrix()).max_abs();

            let mut table = ResultTable::new(
                ["alpha", "i", "j", "re", "im"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            );
            matrix_rows(alpha, posterior.matrix(), &mut table);
            let summary = format!(
                "spin-demo: alpha ≈ {:.4} posterior={} general_solver_alpha={:.4} agreement={:.2e}",
                alpha,
                fmt_matrix_2x2(posterior.matrix()),
                dual.multipliers[0],
                gap
            );
            Ok(ExperimentOutcome { table, summary })
        }

        ExperimentInputs::EdSim(c) => {
            let grid = LatticeGrid::new(c.grid.n_points, c.grid.dx, c.grid.origin)?;
            let mut params = EDParams::new(c.params.mass, c.params.hbar, c.params.dt)?;
            if let Some(v) = &c.params.potential {
                params = params.with_potential(v.clone());
            }
            if let Some(a) = &c.params.vector_potential {
                params = params.with_vector_potential(a.clone());
            }
            let psi0 = match &c.initial_state {
                crate::config::InitialStateConfig::Gaussian { x0, sigma, p0 } => {
                    WaveState::gaussian_packet(grid, *x0, *sigma, *p0, params.hbar)?
                }
                crate::config::InitialStateConfig::PlaneWave { k } => {
                    WaveState::plane_wave(grid, *k, params.hbar)?
                }
            };
            let report = fp_se_consistency(&psi0, &params, c.n_steps)?;

            let want_rho = c.outputs.contains(&crate::config::EdOutput::Rho);
            let want_dev = c.outputs.contains(&crate::config::EdOutput::Deviation);
            // Re-run to record the density time series at the requested
            // cadence (the consistency pass keeps only its deviation trace).
            let mut headers = vec!["t".to_string()];
            if want_dev {
                headers.push("l1_deviation".to_string());
            }
            if want_rho {
                headers.extend((0..grid.n_points).map(|j| format!("x_{j}")));
            }
            let mut table = ResultTable::new(headers);
            let mut psi = psi0.clone();
            for step in 0..=c.n_steps {
                if step % c.output_every == 0 {
                    let mut row = vec![step as f64 * params.dt];
                    if want_dev {
                        row.push(if step == 0 {
                            0.0
                        } else {
                            report.deviations[step - 1]
                        });
                    }
                    if want_rho {
                        row.extend(psi.density());
                    }
                    table.push(row);
                }
                if step < c.n_steps {
                    psi = eik_core::dynamics::schrodinger_step(&psi, &params)?;
                }
            }
            let summary = format!(
                "ed-sim: steps={} max_fp_se_l1_deviation={:.6e} probability_drift={:.3e}",
                c.n_steps, report.max_l1_deviation, report.probability_drift
            );
            Ok(ExperimentOutcome { table, summary })
        }

        ExperimentInputs::WeakDemo(c) => {
            let amplitudes: Vec<Complex<f64>> = c
                .amplitudes
                .iter()
                .map(|[re, im]| Complex::new(*re, *im))
                .collect();
            let postsel: Vec<Complex<f64>> = c
                .postselection
                .iter()
                .map(|[re, im]| Complex::new(*re, *im))
                .collect();
            let sys = SystemPrep::new(amplitudes, c.eigenvalues.clone())?;
            let post = PostselectionSpec::new(postsel)?;
            // Observable diagonal in the preparation basis: its eigenvalues.
            let obs = eik_core::matrix::HermitianObservable::real_diagonal(&c.eigenvalues);
            let aw = weak_value(&sys, &obs, &post)?;
            let pointer = PointerModel::spanning(c.delta, &sys.eigenvalues, c.points_per_width)?;
            let readout = weak_value_pointer_distributions(&sys, &obs, &post, &pointer)?;

            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples = sample_positions(
                &readout.position_grid,
                &readout.position_density,
                c.n_samples,
                &mut rng,
            );
            let (estimate, stderr) = estimate_weak_value_from_samples(&samples, &pointer, c.c)?;

            let mut table = ResultTable::new(
                ["d", "pdf", "estimate_re", "stderr"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            );
            for (j, &p) in readout.position_density.iter().enumerate() {
                table.push(vec![readout.position_grid.point(j), p, estimate, stderr]);
            }
            let summary = format!(
                "weak-demo: A_w={:.6}{:+.6}i estimate_re={:.6} stderr={:.6} n_samples={} weak_regime_ok={}",
                aw.re, aw.im, estimate, stderr, c.n_samples, readout.weak_regime_ok
            );
            Ok(ExperimentOutcome { table, summary })
        }

        ExperimentInputs::Thermal(c) => {
            let prior = c.prior.to_density().map_err(|e| anyhow!("prior: {e}"))?;
            let kraus = kraus_from_json(&c.kraus)?;
            let joint = build_decohered_joint(&prior, &kraus)?;
            let (beta, posterior) = thermal_jeffreys(&joint, &c.energies, c.target_energy)?;
            let table = matrix_table(posterior.matrix());
            let summary = format!(
                "thermal: beta={:.6} target_energy={} outcome_probabilities={:?}",
                beta,
                c.target_energy,
                joint.outcome_distribution()
            );
            Ok(ExperimentOutcome { table, summary })
        }

        ExperimentInputs::NoncommuteDemo(c) => {
            let prior = c.prior.to_density().map_err(|e| anyhow!("prior: {e}"))?;
            let cs1 = constraints_from_json(&c.constraints1)?;
            let cs2 = constraints_from_json(&c.constraints2)?;
            let report = sequential_vs_simultaneous(&prior, &cs1, &cs2, options)
                .context("sequential/simultaneous updates")?;
            let mut table = ResultTable::new(
                ["which", "i", "j", "re", "im"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            );
            matrix_rows(0.0, report.rho_12.matrix(), &mut table);
            matrix_rows(1.0, report.rho_21.matrix(), &mut table);
            matrix_rows(2.0, report.rho_3.matrix(), &mut table);
            let max_res = |v: &[Vec<f64>]| v.iter().flatten().fold(0.0f64, |a, r| a.max(r.abs()));
            let summary = format!(
                "noncommute-demo: d(12,21)={:.4e} d(12,3)={:.4e} d(21,3)={:.4e} simultaneous_max_residual={:.3e}",
                report.dist_12_21,
                report.dist_12_3,
                report.dist_21_3,
                max_res(&[report.residuals_cs1[2].clone(), report.residuals_cs2[2].clone()])
            );
            Ok(ExperimentOutcome { table, summary })
        }
    }
}
