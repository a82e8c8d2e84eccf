//! JSON formats for subspaces and operators.
//!
//! A subspace is `{"weights": [...], "basis": [[row], ...], "p": 1.5}` with
//! one basis row per atom; weights are renormalized to total mass 1 and `p`
//! is optional. An operator is
//!
//! ```json
//! {"matrix": [[row], ...],
//!  "target": "euclidean" | {"weights": [...], "p": 2.0},
//!  "domain": "euclidean" | {"sup_on_points": {"weights": [...], "basis": [[...]]}}}
//! ```
//!
//! with `target` and `domain` defaulting to `"euclidean"`. A Euclidean target
//! of dimension `m` is realized as `L_2` of the uniform measure on `m` atoms.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{DomainNorm, Subspace, WeightedSpace};
use crate::summing::FiniteRankOperator;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub weights: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed instance: {e}")))
    }

    pub fn to_subspace(&self) -> Result<Subspace> {
        let space = WeightedSpace::normalized(self.weights.clone())?;
        Subspace::new(space, rows_to_matrix(&self.basis)?)
    }

    pub fn from_subspace(sub: &Subspace, p: Option<f64>) -> Self {
        InstanceFile {
            weights: sub.space().weights().to_vec(),
            basis: matrix_to_rows(sub.basis()),
            p,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Named(String),
    Space { weights: Vec<f64>, p: f64 },
}

impl Default for TargetSpec {
    fn default() -> Self {
        TargetSpec::Named("euclidean".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsSpec {
    pub weights: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainSpec {
    Named(String),
    SupOnPoints { sup_on_points: PointsSpec },
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec::Named("euclidean".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub matrix: Vec<Vec<f64>>,
    #[serde(default)]
    pub target: TargetSpec,
    #[serde(default)]
    pub domain: DomainSpec,
}

fn check_name(name: &str, what: &str) -> Result<()> {
    if name == "euclidean" {
        Ok(())
    } else {
        Err(Error::invalid(format!("unknown {what} \"{name}\"")))
    }
}

impl OperatorFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed operator: {e}")))
    }

    pub fn to_operator(&self) -> Result<FiniteRankOperator> {
        let matrix = rows_to_matrix(&self.matrix)?;
        let domain = match &self.domain {
            DomainSpec::Named(name) => {
                check_name(name, "domain")?;
                DomainNorm::EuclideanBall {
                    dim: matrix.ncols(),
                }
            }
            DomainSpec::SupOnPoints { sup_on_points } => {
                let space = WeightedSpace::normalized(sup_on_points.weights.clone())?;
                DomainNorm::SupOnPoints(Subspace::new(
                    space,
                    rows_to_matrix(&sup_on_points.basis)?,
                )?)
            }
        };
        match &self.target {
            TargetSpec::Named(name) => {
                check_name(name, "target")?;
                let m = matrix.nrows();
                FiniteRankOperator::new(
                    matrix * (m as f64).sqrt(),
                    domain,
                    WeightedSpace::uniform(m),
                    2.0,
                )
            }
            TargetSpec::Space { weights, p } => FiniteRankOperator::new(
                matrix,
                domain,
                WeightedSpace::normalized(weights.clone())?,
                *p,
            ),
        }
    }
}

pub fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let Some(first) = rows.first() else {
        return Err(Error::invalid("matrix has no rows"));
    };
    if first.is_empty() {
        return Err(Error::invalid("matrix has no columns"));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != first.len()) {
        return Err(Error::DimensionMismatch {
            expected: first.len(),
            found: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(rows.len(), first.len(), |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}
