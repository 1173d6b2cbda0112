//! Experiment configuration: parsing plus field-precise validation.
//!
//! Every experiment kind has its own input schema; validation failures name
//! the offending field so a bad config is diagnosable from the one-line
//! error alone.

// `!(x > 0)` validation guards reject NaN, which `x <= 0` would admit.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::path::PathBuf;

use serde::Deserialize;

use eik_core::jsonio::{ConstraintJson, MatrixJson};

#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config invalid: field `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalMaxentConfig {
    pub prior: Vec<f64>,
    pub constraints: Vec<ClassicalConstraintConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConstraintConfig {
    pub observable: Vec<f64>,
    pub target: f64,
}

impl ClassicalMaxentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.prior.is_empty() {
            return Err(bad("prior", "must be a nonempty array"));
        }
        if self.prior.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(bad("prior", "weights must be finite and nonnegative"));
        }
        for (k, c) in self.constraints.iter().enumerate() {
            if c.observable.len() != self.prior.len() {
                return Err(bad(
                    &format!("constraints[{k}].observable"),
                    format!(
                        "length {} must match prior length {}",
                        c.observable.len(),
                        self.prior.len()
                    ),
                ));
            }
            if !c.target.is_finite() {
                return Err(bad(&format!("constraints[{k}].target"), "must be finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QmaxentConfig {
    pub prior: MatrixJson,
    pub constraints: Vec<ConstraintJson>,
}

impl QmaxentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.prior.dim == 0 {
            return Err(bad("prior.dim", "must be positive"));
        }
        for (k, c) in self.constraints.iter().enumerate() {
            if c.observable.dim != self.prior.dim {
                return Err(bad(
                    &format!("constraints[{k}].observable.dim"),
                    format!("must equal prior.dim = {}", self.prior.dim),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QbrConfig {
    pub prior: MatrixJson,
    pub kraus: Vec<MatrixJson>,
    pub detected: usize,
}

impl QbrConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.kraus.is_empty() {
            return Err(bad("kraus", "must contain at least one operator"));
        }
        if self.detected >= self.kraus.len() {
            return Err(bad(
                "detected",
                format!(
                    "outcome index {} out of range ({} operators)",
                    self.detected,
                    self.kraus.len()
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinDemoConfig {
    pub a: f64,
    pub b: f64,
    pub c: [f64; 4],
    pub target: f64,
}

impl SpinDemoConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.a > 0.0) {
            return Err(bad("a", "must be positive"));
        }
        if !(self.b > 0.0) {
            return Err(bad("b", "must be positive"));
        }
        if (self.a + self.b - 1.0).abs() > 1e-10 {
            return Err(bad("b", "a + b must equal 1"));
        }
        if self.c.iter().any(|v| !v.is_finite()) {
            return Err(bad("c", "components must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_points: usize,
    pub dx: f64,
    pub origin: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdParamsConfig {
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    pub dt: f64,
    #[serde(default)]
    pub potential: Option<Vec<f64>>,
    #[serde(default)]
    pub vector_potential: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialStateConfig {
    Gaussian {
        x0: f64,
        sigma: f64,
        #[serde(default)]
        p0: f64,
    },
    PlaneWave {
        k: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdOutput {
    Rho,
    Deviation,
}

fn default_outputs() -> Vec<EdOutput> {
    vec![EdOutput::Rho, EdOutput::Deviation]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdSimConfig {
    pub grid: GridConfig,
    pub params: EdParamsConfig,
    pub initial_state: InitialStateConfig,
    pub n_steps: usize,
    /// Which column groups to emit (default both).
    #[serde(default = "default_outputs")]
    pub outputs: Vec<EdOutput>,
    /// Record every k-th step in the CSV (default 1).
    #[serde(default = "default_every")]
    pub output_every: usize,
}

fn default_every() -> usize {
    1
}

impl EdSimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid.n_points < 8 {
            return Err(bad("grid.n_points", "must be at least 8"));
        }
        if !(self.grid.dx > 0.0) {
            return Err(bad("grid.dx", "must be positive"));
        }
        if !(self.params.dt > 0.0) {
            return Err(bad("params.dt", "must be positive"));
        }
        if !(self.params.mass > 0.0) {
            return Err(bad("params.mass", "must be positive"));
        }
        if !(self.params.hbar > 0.0) {
            return Err(bad("params.hbar", "must be positive"));
        }
        if let Some(v) = &self.params.potential {
            if v.len() != self.grid.n_points {
                return Err(bad("params.potential", "length must match grid.n_points"));
            }
        }
        if let Some(v) = &self.params.vector_potential {
            if v.len() != self.grid.n_points {
                return Err(bad(
                    "params.vector_potential",
                    "length must match grid.n_points",
                ));
            }
        }
        if self.n_steps == 0 {
            return Err(bad("n_steps", "must be positive"));
        }
        if self.output_every == 0 {
            return Err(bad("output_every", "must be positive"));
        }
        if self.outputs.is_empty() {
            return Err(bad(
                "outputs",
                "must request at least one of rho, deviation",
            ));
        }
        if let InitialStateConfig::Gaussian { sigma, .. } = self.initial_state {
            if !(sigma > 0.0) {
                return Err(bad("initial_state.sigma", "must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakDemoConfig {
    /// Complex amplitudes as [re, im] pairs.
    pub amplitudes: Vec<[f64; 2]>,
    pub eigenvalues: Vec<f64>,
    pub delta: f64,
    pub postselection: Vec<[f64; 2]>,
    pub n_samples: usize,
    /// Momentum-readout correspondence constant (p = c·d).
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "default_ppw")]
    pub points_per_width: usize,
}

fn default_ppw() -> usize {
    24
}

impl WeakDemoConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.amplitudes.is_empty() {
            return Err(bad("amplitudes", "must be nonempty"));
        }
        if self.eigenvalues.len() != self.amplitudes.len() {
            return Err(bad("eigenvalues", "length must match amplitudes"));
        }
        if self.postselection.len() != self.amplitudes.len() {
            return Err(bad("postselection", "length must match amplitudes"));
        }
        if !(self.delta > 0.0) {
            return Err(bad("delta", "must be positive"));
        }
        if self.n_samples < 2 {
            return Err(bad("n_samples", "must be at least 2"));
        }
        if self.c == 0.0 || !self.c.is_finite() {
            return Err(bad("c", "must be finite and nonzero"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub prior: MatrixJson,
    pub kraus: Vec<MatrixJson>,
    pub energies: Vec<f64>,
    pub target_energy: f64,
}

impl ThermalConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.kraus.is_empty() {
            return Err(bad("kraus", "must contain at least one operator"));
        }
        if self.energies.len() != self.kraus.len() {
            return Err(bad("energies", "length must match the Kraus family"));
        }
        if !self.target_energy.is_finite() {
            return Err(bad("target_energy", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoncommuteConfig {
    pub prior: MatrixJson,
    pub constraints1: Vec<ConstraintJson>,
    pub constraints2: Vec<ConstraintJson>,
}

impl NoncommuteConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, cs) in [
            ("constraints1", &self.constraints1),
            ("constraints2", &self.constraints2),
        ] {
            if cs.is_empty() {
                return Err(bad(name, "must contain at least one constraint"));
            }
            for (k, c) in cs.iter().enumerate() {
                if c.observable.dim != self.prior.dim {
                    return Err(bad(
                        &format!("{name}[{k}].observable.dim"),
                        format!("must equal prior.dim = {}", self.prior.dim),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Parsed experiment: a kind-specific payload plus common fields.
#[derive(Debug, Clone)]
pub enum ExperimentInputs {
    ClassicalMaxent(ClassicalMaxentConfig),
    Qmaxent(QmaxentConfig),
    Qbr(QbrConfig),
    SpinDemo(SpinDemoConfig),
    EdSim(EdSimConfig),
    WeakDemo(WeakDemoConfig),
    Thermal(ThermalConfig),
    NoncommuteDemo(NoncommuteConfig),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub inputs: ExperimentInputs,
    pub output_path: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
struct Envelope {
    #[serde(default)]
    output_path: Option<PathBuf>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(flatten)]
    rest: serde_json::Value,
}

/// Parses and validates the config text for the named experiment kind.
pub fn validate_config(kind: &str, raw: &str) -> Result<ExperimentConfig, ConfigError> {
    let envelope: Envelope =
        serde_json::from_str(raw).map_err(|e| bad("<root>", format!("malformed JSON: {e}")))?;
    let body = envelope.rest;
    let parse_err = |e: serde_json::Error| bad("<schema>", e.to_string());
    let inputs = match kind {
        "classical-maxent" => {
            let c: ClassicalMaxentConfig = serde_json::from_value(body).map_err(parse_err)?;
            c.validate()?;
            ExperimentInputs::ClassicalMaxent(c)
        }
        "qmaxent" => {
            let c: QmaxentConfig = serde_json::from_value(body).map_err(parse_err)?;
            c.validate()?;
            ExperimentInputs::Qmaxent(c)
        }
        "qbr" => {
            let c: QbrConfig = serde_json::from_value(body).map_err(parse_err)?;
            c.validate()?;
            ExperimentInputs::Qbr(c)
        }
        "spin-demo" => {
            let c: SpinDemoConfig = serde_json::from_value(body).map_err(parse_err)?;
            c.validate()?;
            ExperimentInputs::SpinDemo(c)
        }
        "ed-sim" => {
            let c: EdSimConfig = serde_json::from_value(body).map_err(parse_err)?;
            c.validate()?;
            ExperimentInputs::EdSim(c)
        }
        "weak-demo" => {
            let c: WeakDemoConfig = serde_json::from_value(body).map_err(parse_err)?;
            c.validate()?;
            ExperimentInputs::WeakDemo(c)
        }
        "thermal" => {
            let c: ThermalConfig = serde_json::from_value(body).map_err(parse_err)?;
            c.validate()?;
            ExperimentInputs::Thermal(c)
        }
        "noncommute-demo" => {
            let c: NoncommuteConfig = serde_json::from_value(body).map_err(parse_err)?;
            c.validate()?;
            ExperimentInputs::NoncommuteDemo(c)
        }
        other => return Err(bad("kind", format!("unknown experiment kind `{other}`"))),
    };
    Ok(ExperimentConfig {
        inputs,
        output_path: envelope.output_path,
        seed: envelope.seed,
    })
}
