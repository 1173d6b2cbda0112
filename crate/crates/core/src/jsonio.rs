//! Wire formats for matrices, distributions, constraint sets, and Kraus
//! families. Matrices travel as `{"dim": n, "re": [[..]], "im": [[..]]}`,
//! row-major; distributions and joints as plain arrays.

use serde::{Deserialize, Serialize};

use crate::classical::{DiscreteDistribution, JointDistribution};
use crate::matrix::{ComplexMatrix, DensityMatrix, HermitianObservable};
use crate::measurement::KrausModel;
use crate::quantum::QuantumConstraintSet;
use crate::scalar::cx;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum JsonError {
    #[error("bad matrix payload: {0}")]
    BadMatrix(String),
    #[error("bad constraint payload: {0}")]
    BadConstraint(String),
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix<f64>) -> Self {
        let n = m.dim();
        let re = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].re).collect())
            .collect();
        let im = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].im).collect())
            .collect();
        Self { dim: n, re, im }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix<f64>, JsonError> {
        let n = self.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(JsonError::BadMatrix(format!(
                "expected {n}x{n} re/im blocks, got {}x? and {}x?",
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(ComplexMatrix::from_fn(n, |i, j| {
            cx(self.re[i][j], self.im[i][j])
        }))
    }

    pub fn to_density(&self) -> Result<DensityMatrix<f64>, JsonError> {
        DensityMatrix::new(self.to_matrix()?).map_err(|e| JsonError::BadMatrix(e.to_string()))
    }

    pub fn to_hermitian(&self) -> Result<HermitianObservable<f64>, JsonError> {
        HermitianObservable::new(self.to_matrix()?).map_err(|e| JsonError::BadMatrix(e.to_string()))
    }
}

/// One `{observable, target}` pair of a constraint set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintJson {
    pub observable: MatrixJson,
    pub target: f64,
}

pub fn constraints_from_json(
    items: &[ConstraintJson],
) -> Result<QuantumConstraintSet<f64>, JsonError> {
    let mut observables = Vec::with_capacity(items.len());
    let mut targets = Vec::with_capacity(items.len());
    for c in items {
        observables.push(c.observable.to_hermitian()?);
        targets.push(c.target);
    }
    QuantumConstraintSet::new(observables, targets)
        .map_err(|e| JsonError::BadConstraint(e.to_string()))
}

pub fn constraints_to_json(cs: &QuantumConstraintSet<f64>) -> Vec<ConstraintJson> {
    cs.observables
        .iter()
        .zip(&cs.targets)
        .map(|(o, &t)| ConstraintJson {
            observable: MatrixJson::from_matrix(o.matrix()),
            target: t,
        })
        .collect()
}

pub fn kraus_from_json(items: &[MatrixJson]) -> Result<KrausModel<f64>, JsonError> {
    let ops = items
        .iter()
        .map(|m| m.to_matrix())
        .collect::<Result<Vec<_>, _>>()?;
    KrausModel::new(ops).map_err(|e| JsonError::BadConstraint(e.to_string()))
}

pub fn kraus_to_json(kraus: &KrausModel<f64>) -> Vec<MatrixJson> {
    kraus
        .operators()
        .iter()
        .map(MatrixJson::from_matrix)
        .collect()
}

pub fn distribution_from_json(weights: &[f64]) -> Result<DiscreteDistribution<f64>, JsonError> {
    DiscreteDistribution::new(weights.to_vec()).map_err(|e| JsonError::BadConstraint(e.to_string()))
}

pub fn joint_from_json(table: &[Vec<f64>]) -> Result<JointDistribution<f64>, JsonError> {
    JointDistribution::new(table.to_vec()).map_err(|e| JsonError::BadConstraint(e.to_string()))
}
