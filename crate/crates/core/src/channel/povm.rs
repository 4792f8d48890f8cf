use crate::error::{Error, Result};
use crate::qmat::{pauli, ComplexMatrix, HermitianEigen, C64, HERMITIAN_TOL, PSD_TOL};

/// Tolerance on `‖Σ E_b − I‖_max`.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Positive operator valued measure: PSD elements `0 ≤ E_b ≤ I` summing to `I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .ok_or_else(|| Error::InvalidArgument("POVM needs at least one element".into()))?
            .rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        let mut herm = Vec::with_capacity(elements.len());
        for (index, e) in elements.into_iter().enumerate() {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "POVM element size",
                    expected: dim,
                    found: e.rows().max(e.cols()),
                });
            }
            let defect = e.hermiticity_defect();
            if defect > HERMITIAN_TOL {
                return Err(Error::PovmElementOutOfRange {
                    index,
                    reason: format!("not Hermitian, defect {defect:.3e}"),
                });
            }
            let e = e.hermitian_part();
            let eig = HermitianEigen::new(&e);
            if eig.min_value() < -PSD_TOL {
                return Err(Error::PovmElementOutOfRange {
                    index,
                    reason: format!("min eigenvalue {:.3e}", eig.min_value()),
                });
            }
            let max = eig.values.last().copied().unwrap_or(0.0);
            if max > 1.0 + PSD_TOL {
                return Err(Error::PovmElementOutOfRange {
                    index,
                    reason: format!("max eigenvalue {max:.12}"),
                });
            }
            sum += &e;
            herm.push(e);
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if deviation > COMPLETENESS_TOL {
            return Err(Error::IncompletePovm { deviation });
        }
        Ok(Self { dim, elements: herm })
    }

    /// Skips every check. Only for fault-injection tests of downstream validation.
    #[doc(hidden)]
    pub fn new_unchecked(elements: Vec<ComplexMatrix>) -> Self {
        let dim = elements[0].rows();
        Self { dim, elements }
    }

    /// `{I}`
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            elements: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Projective measurement in the computational basis.
    pub fn computational(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|k| {
                let mut m = ComplexMatrix::zeros(dim, dim);
                m[(k, k)] = C64::new(1.0, 0.0);
                m
            })
            .collect();
        Self { dim, elements }
    }

    /// Qubit projective measurement `{(I ± n·σ)/2}` along the unit Bloch vector `n`.
    pub fn qubit_projective(n: [f64; 3]) -> Result<Self> {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero Bloch direction".into()));
        }
        let u = [n[0] / norm, n[1] / norm, n[2] / norm];
        let plus = bloch_operator(0.5, [u[0] / 2.0, u[1] / 2.0, u[2] / 2.0]);
        let minus = bloch_operator(0.5, [-u[0] / 2.0, -u[1] / 2.0, -u[2] / 2.0]);
        Self::new(vec![plus, minus])
    }

    /// Rank-one POVM `{v_b^† v_b}` from the rows `v_b` of an isometry `V`
    /// (`V^† V = I`). Completeness holds by construction.
    pub fn from_isometry_rows(v: &ComplexMatrix) -> Result<Self> {
        let dim = v.cols();
        let elements = (0..v.rows())
            .map(|b| {
                let row: Vec<C64> = (0..dim).map(|j| v[(b, j)].conj()).collect();
                ComplexMatrix::outer(&row)
            })
            .collect();
        Self::new(elements)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, b: usize) -> &ComplexMatrix {
        &self.elements[b]
    }

    /// Outcome probabilities `Tr[ρ E_b]`.
    pub fn probabilities(&self, rho: &ComplexMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| rho.expectation(e)).collect()
    }

    pub fn completeness_defect(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &self.elements {
            sum += e;
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }

    /// `{E_b ⊗ F_c}` ordered with `b` major.
    pub fn tensor(&self, other: &Povm) -> Povm {
        let elements = self
            .elements
            .iter()
            .flat_map(|a| other.elements.iter().map(move |b| a.kron(b)))
            .collect();
        Povm {
            dim: self.dim * other.dim,
            elements,
        }
    }
}

/// `w0 I + w·σ`
pub fn bloch_operator(w0: f64, w: [f64; 3]) -> ComplexMatrix {
    let [x, y, z] = pauli();
    let mut m = ComplexMatrix::identity(2).scale(w0);
    m += &x.scale(w[0]);
    m += &y.scale(w[1]);
    m += &z.scale(w[2]);
    m
}

/// One qubit POVM element in Bloch form `E = w0 I + w·σ`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct QubitElement {
    pub w0: f64,
    pub w: [f64; 3],
}

impl QubitElement {
    pub fn from_matrix(e: &ComplexMatrix) -> Self {
        let [x, y, z] = pauli();
        Self {
            w0: e.trace().re / 2.0,
            w: [
                e.expectation(&x) / 2.0,
                e.expectation(&y) / 2.0,
                e.expectation(&z) / 2.0,
            ],
        }
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        bloch_operator(self.w0, self.w)
    }

    pub fn bloch_norm(&self) -> f64 {
        self.w.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `0 ≤ E ≤ I` iff `|w| ≤ min(w0, 1 − w0)`.
    pub fn in_effect_set(&self, tol: f64) -> bool {
        self.bloch_norm() <= self.w0.min(1.0 - self.w0) + tol
    }
}

/// Bloch parametrization of a qubit POVM.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct QubitPovmParam {
    pub elements: Vec<QubitElement>,
}

impl QubitPovmParam {
    pub const MEMBERSHIP_TOL: f64 = 1e-12;

    pub fn from_povm(m: &Povm) -> Result<Self> {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch {
                context: "Bloch parametrization needs a qubit POVM",
                expected: 2,
                found: m.dim(),
            });
        }
        Ok(Self {
            elements: m.elements().iter().map(QubitElement::from_matrix).collect(),
        })
    }

    /// Checks G-membership of every element and `Σ w0 = 1`, `Σ w = 0`.
    pub fn validate(&self) -> Result<()> {
        for (index, e) in self.elements.iter().enumerate() {
            if !e.in_effect_set(Self::MEMBERSHIP_TOL) {
                return Err(Error::PovmElementOutOfRange {
                    index,
                    reason: format!("|w| = {:.12} > min(w0, 1-w0) with w0 = {:.12}", e.bloch_norm(), e.w0),
                });
            }
        }
        let s0: f64 = self.elements.iter().map(|e| e.w0).sum();
        let sw: [f64; 3] = std::array::from_fn(|i| self.elements.iter().map(|e| e.w[i]).sum());
        let deviation = (s0 - 1.0).abs().max(sw.iter().map(|c| c.abs()).fold(0.0, f64::max));
        if deviation > COMPLETENESS_TOL {
            return Err(Error::IncompletePovm { deviation });
        }
        Ok(())
    }

    pub fn to_povm(&self) -> Result<Povm> {
        self.validate()?;
        Povm::new(self.elements.iter().map(QubitElement::to_matrix).collect())
    }

    /// Two-outcome POVM `{E, I − E}` from angles; every real input is feasible.
    ///
    /// `w0 = sin²a`, `|w| = sin²r · min(w0, 1 − w0)`, direction `(θ, φ)`.
    /// The projective boundary is reached at finite parameter values.
    pub fn binary_from_angles(a: f64, r: f64, theta: f64, phi: f64) -> Self {
        let w0 = a.sin().powi(2);
        let len = r.sin().powi(2) * w0.min(1.0 - w0);
        let dir = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let w = dir.map(|c| c * len);
        Self {
            elements: vec![
                QubitElement { w0, w },
                QubitElement {
                    w0: 1.0 - w0,
                    w: w.map(|c| -c),
                },
            ],
        }
    }
}
