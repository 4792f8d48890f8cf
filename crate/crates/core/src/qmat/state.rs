use serde::{Deserialize, Serialize};

use super::eigen::HermitianEigen;
use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Negative probabilities down to this are clipped to zero.
pub const PROB_CLIP_TOL: f64 = 1e-12;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(mat, TRACE_TOL)
    }

    /// Validates with a caller-chosen trace/PSD tolerance and stores the
    /// Hermitian part.
    pub fn with_tolerance(mat: ComplexMatrix, tol: f64) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch {
                context: "density matrix must be square",
                expected: mat.rows(),
                found: mat.cols(),
            });
        }
        let defect = mat.hermiticity_defect();
        if defect > HERMITIAN_TOL.max(tol) {
            return Err(Error::NotHermitian { deviation: defect });
        }
        let mat = mat.hermitian_part();
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > tol {
            return Err(Error::TraceNotOne { trace: tr });
        }
        let min = HermitianEigen::new(&mat).min_value();
        if min < -PSD_TOL.max(tol) {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self { mat })
    }

    /// `|ψ><ψ|` after normalizing `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self {
            mat: ComplexMatrix::outer(&v),
        })
    }

    /// Computational basis projector `|k><k|`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(k, k)] = C64::new(1.0, 0.0);
        Self { mat: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            mat: self.mat.kron(&other.mat),
        }
    }

    pub fn purity(&self) -> f64 {
        self.mat.expectation(&self.mat)
    }

    /// Bloch vector `(Tr ρσx, Tr ρσy, Tr ρσz)`; qubits only.
    pub fn bloch_vector(&self) -> Option<[f64; 3]> {
        if self.dim() != 2 {
            return None;
        }
        let [x, y, z] = super::matrix::pauli();
        Some([
            self.mat.expectation(&x),
            self.mat.expectation(&y),
            self.mat.expectation(&z),
        ])
    }
}

impl AsRef<ComplexMatrix> for DensityMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.mat
    }
}

/// Nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbabilityVector {
    weights: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidProbability("empty vector".into()));
        }
        let mut weights = weights;
        for (i, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidProbability(format!("weight {i} is not finite")));
            }
            if *w < -PROB_CLIP_TOL {
                return Err(Error::InvalidProbability(format!("weight {i} = {w} is negative")));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidProbability(format!("weights sum to {s}")));
        }
        Ok(Self { weights })
    }

    /// Clips negatives and rescales to unit sum.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let clipped: Vec<f64> = weights.into_iter().map(|w| w.max(0.0)).collect();
        let s: f64 = clipped.iter().sum();
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::InvalidProbability("no positive mass".into()));
        }
        Ok(Self {
            weights: clipped.into_iter().map(|w| w / s).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().copied()
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}
