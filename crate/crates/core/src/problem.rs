use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::cone::FrictionCone;
use crate::error::{ContactError, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;

/// A frictional contact problem `(G, g, mu, R)`.
///
/// `free_velocity` is the free contact velocity already offset by the target
/// velocity (`g = J v_f - c*`). When a compliance is present the solvers work
/// on the damped matrix `G + R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactProblem {
    delassus: DMatrix<f64>,
    free_velocity: DVector<f64>,
    cones: Vec<FrictionCone>,
    compliance: Option<DVector<f64>>,
    effective: DMatrix<f64>,
}

impl ContactProblem {
    pub fn new(delassus: DMatrix<f64>, free_velocity: DVector<f64>, mus: &[f64]) -> Result<Self> {
        Self::with_compliance(delassus, free_velocity, mus, None)
    }

    pub fn with_compliance(
        delassus: DMatrix<f64>,
        free_velocity: DVector<f64>,
        mus: &[f64],
        compliance: Option<DVector<f64>>,
    ) -> Result<Self> {
        let nc = mus.len();
        let dim = 3 * nc;
        if delassus.nrows() != dim || delassus.ncols() != dim {
            return Err(ContactError::Dimension {
                field: "delassus",
                expected: dim * dim,
                actual: delassus.len(),
            });
        }
        if free_velocity.len() != dim {
            return Err(ContactError::Dimension {
                field: "free_velocity",
                expected: dim,
                actual: free_velocity.len(),
            });
        }
        if let Some((i, mu)) = mus.iter().enumerate().find(|(_, m)| !(m.is_finite() && **m >= 0.0)) {
            return Err(ContactError::InvalidArgument(format!(
                "mus[{i}] = {mu} is not a finite nonnegative friction coefficient"
            )));
        }
        if delassus.iter().chain(free_velocity.iter()).any(|v| !v.is_finite()) {
            return Err(ContactError::InvalidArgument("non-finite entry in delassus or free_velocity".into()));
        }
        let scale = delassus.amax().max(f64::MIN_POSITIVE);
        let asym = (&delassus - delassus.transpose()).amax();
        if asym > SYMMETRY_TOL * scale.max(1.0) {
            return Err(ContactError::InvalidArgument(format!(
                "delassus is not symmetric (max asymmetry {asym:e})"
            )));
        }
        if dim > 0 {
            let min_eig = SymmetricEigen::new(delassus.clone()).eigenvalues.min();
            if min_eig < -PSD_TOL * scale.max(1.0) {
                return Err(ContactError::InvalidArgument(format!(
                    "delassus is not positive semidefinite (min eigenvalue {min_eig:e})"
                )));
            }
        }
        if let Some(r) = &compliance {
            if r.len() != dim {
                return Err(ContactError::Dimension { field: "compliance", expected: dim, actual: r.len() });
            }
            if r.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(ContactError::InvalidArgument("compliance entries must be finite and >= 0".into()));
            }
        }
        let mut effective = delassus.clone();
        if let Some(r) = &compliance {
            for k in 0..dim {
                effective[(k, k)] += r[k];
            }
        }
        Ok(Self {
            delassus,
            free_velocity,
            cones: mus.iter().map(|&mu| FrictionCone::new(mu)).collect(),
            compliance,
            effective,
        })
    }

    pub fn empty() -> Self {
        Self::new(DMatrix::zeros(0, 0), DVector::zeros(0), &[]).expect("empty problem is valid")
    }

    pub fn num_contacts(&self) -> usize {
        self.cones.len()
    }

    pub fn dim(&self) -> usize {
        3 * self.cones.len()
    }

    pub fn delassus(&self) -> &DMatrix<f64> {
        &self.delassus
    }

    /// `G + R`, or `G` when no compliance is set.
    pub fn effective_delassus(&self) -> &DMatrix<f64> {
        &self.effective
    }

    pub fn free_velocity(&self) -> &DVector<f64> {
        &self.free_velocity
    }

    pub fn cones(&self) -> &[FrictionCone] {
        &self.cones
    }

    pub fn cone(&self, i: usize) -> FrictionCone {
        self.cones[i]
    }

    pub fn mus(&self) -> Vec<f64> {
        self.cones.iter().map(|c| c.mu).collect()
    }

    pub fn compliance(&self) -> Option<&DVector<f64>> {
        self.compliance.as_ref()
    }

    /// 3x3 block `(i, j)` of the effective matrix.
    pub fn block(&self, i: usize, j: usize) -> Matrix3<f64> {
        self.effective.fixed_view::<3, 3>(3 * i, 3 * j).into_owned()
    }

    pub fn free_velocity_at(&self, i: usize) -> Vector3<f64> {
        self.free_velocity.fixed_rows::<3>(3 * i).into_owned()
    }

    /// Physical contact velocity `c = G lam + g`.
    pub fn contact_velocity(&self, lambda: &DVector<f64>) -> DVector<f64> {
        &self.delassus * lambda + &self.free_velocity
    }

    /// Velocity entering the complementarity conditions, `(G + R) lam + g`.
    pub fn effective_velocity(&self, lambda: &DVector<f64>) -> DVector<f64> {
        &self.effective * lambda + &self.free_velocity
    }

    pub fn check_lambda(&self, lambda: &DVector<f64>) -> Result<()> {
        if lambda.len() != self.dim() {
            return Err(ContactError::Dimension { field: "lambda", expected: self.dim(), actual: lambda.len() });
        }
        Ok(())
    }

    /// Restricts the problem to a single contact, dropping every coupling term.
    pub fn contact_subproblem(&self, i: usize, free_velocity: Vector3<f64>) -> Result<Self> {
        let g = self.delassus.fixed_view::<3, 3>(3 * i, 3 * i).into_owned();
        let r = self.compliance.as_ref().map(|r| DVector::from_column_slice(&r.as_slice()[3 * i..3 * i + 3]));
        Self::with_compliance(
            DMatrix::from_iterator(3, 3, g.iter().copied()),
            DVector::from_column_slice(free_velocity.as_slice()),
            &[self.cones[i].mu],
            r,
        )
    }

    pub fn to_file(&self) -> ProblemFile {
        ProblemFile {
            num_contacts: self.num_contacts(),
            delassus: MatrixRows::Rows(
                (0..self.dim()).map(|r| self.delassus.row(r).iter().copied().collect()).collect(),
            ),
            free_velocity: self.free_velocity.iter().copied().collect(),
            mus: self.mus(),
            compliance: self.compliance.as_ref().map(|r| r.iter().copied().collect()),
        }
    }
}

/// Row-major matrix payload: either a list of rows or one flat list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixRows {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

/// JSON problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub num_contacts: usize,
    pub delassus: MatrixRows,
    pub free_velocity: Vec<f64>,
    pub mus: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compliance: Option<Vec<f64>>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ContactError::InvalidArgument(format!("problem file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem file serializes")
    }

    pub fn into_problem(self) -> Result<ContactProblem> {
        let nc = self.num_contacts;
        let dim = 3 * nc;
        if self.mus.len() != nc {
            return Err(ContactError::Dimension { field: "mus", expected: nc, actual: self.mus.len() });
        }
        if self.free_velocity.len() != dim {
            return Err(ContactError::Dimension {
                field: "free_velocity",
                expected: dim,
                actual: self.free_velocity.len(),
            });
        }
        let flat: Vec<f64> = match self.delassus {
            MatrixRows::Flat(v) => v,
            MatrixRows::Rows(rows) => {
                if rows.len() != dim {
                    return Err(ContactError::Dimension { field: "delassus", expected: dim, actual: rows.len() });
                }
                if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
                    return Err(ContactError::Dimension { field: "delassus row", expected: dim, actual: bad.len() });
                }
                rows.into_iter().flatten().collect()
            }
        };
        if flat.len() != dim * dim {
            return Err(ContactError::Dimension { field: "delassus", expected: dim * dim, actual: flat.len() });
        }
        let compliance = match self.compliance {
            Some(r) if r.len() != dim => {
                return Err(ContactError::Dimension { field: "compliance", expected: dim, actual: r.len() })
            }
            Some(r) => Some(DVector::from_vec(r)),
            None => None,
        };
        ContactProblem::with_compliance(
            DMatrix::from_row_slice(dim, dim, &flat),
            DVector::from_vec(self.free_velocity),
            &self.mus,
            compliance,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_dimensions() {
        let err = ContactProblem::new(DMatrix::identity(3, 3), DVector::zeros(2), &[0.5]).unwrap_err();
        assert_eq!(err.to_string(), "free_velocity: expected 3 entries, got 2");
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        let mut g = DMatrix::identity(3, 3);
        g[(0, 1)] = 0.3;
        assert!(ContactProblem::new(g, DVector::zeros(3), &[0.5]).is_err());
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, 1.0]));
        assert!(ContactProblem::new(g, DVector::zeros(3), &[0.5]).is_err());
    }

    #[test]
    fn compliance_adds_to_the_diagonal() {
        let p = ContactProblem::with_compliance(
            DMatrix::identity(3, 3),
            DVector::zeros(3),
            &[0.5],
            Some(DVector::from_vec(vec![0.5, 0.0, 0.0])),
        )
        .unwrap();
        assert_eq!(p.effective_delassus()[(0, 0)], 1.5);
        assert_eq!(p.delassus()[(0, 0)], 1.0);
    }

    #[test]
    fn file_accepts_flat_and_nested_matrices() {
        let nested = r#"{"num_contacts":1,"delassus":[[1,0,0],[0,1,0],[0,0,1]],"free_velocity":[-1,-2,0],"mus":[0.5]}"#;
        let flat = r#"{"num_contacts":1,"delassus":[1,0,0,0,1,0,0,0,1],"free_velocity":[-1,-2,0],"mus":[0.5]}"#;
        let a = ProblemFile::from_json(nested).unwrap().into_problem().unwrap();
        let b = ProblemFile::from_json(flat).unwrap().into_problem().unwrap();
        assert_eq!(a, b);
        let back = ProblemFile::from_json(&a.to_file().to_json()).unwrap().into_problem().unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn truncated_file_names_the_field() {
        let text = r#"{"num_contacts":1,"delassus":[[1,0,0],[0,1,0],[0,0,1]],"free_velocity":[-1,-2],"mus":[0.5]}"#;
        let err = ProblemFile::from_json(text).unwrap().into_problem().unwrap_err();
        assert!(err.to_string().starts_with("free_velocity: expected 3 entries"));
    }
}
