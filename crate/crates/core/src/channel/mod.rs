//! Completely positive trace-preserving maps in Kraus form.
//!
//! Convention: `Φ(ρ) = Σ_k K_k ρ K_k^†` with `Σ_k K_k^† K_k = I`. A Kraus
//! family written as `Φ(ρ) = Σ A_k^† ρ A_k` corresponds to `A_k = K_k^†`.

mod povm;
mod spec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use povm::{bloch_operator, Povm, QubitElement, QubitPovmParam, COMPLETENESS_TOL};
pub use spec::{load_channel, matrix_from_json, matrix_to_json, ChannelSpec};

use crate::error::{Error, Result};
use crate::qmat::{random, ComplexMatrix, DensityMatrix, HermitianEigen, C64, EIG_ZERO};

/// Tolerance on `‖Σ K^† K − I‖_max` and on output traces.
pub const TP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        for k in &kraus {
            if k.rows() != dim_out || k.cols() != dim_in {
                return Err(Error::DimensionMismatch {
                    context: "Kraus operator shape",
                    expected: dim_out * dim_in,
                    found: k.rows() * k.cols(),
                });
            }
        }
        let ch = Self { dim_in, dim_out, kraus };
        let deviation = ch.trace_preservation_defect();
        if deviation > TP_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(ch)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `‖Σ K^† K − I‖_max`
    pub fn trace_preservation_defect(&self) -> f64 {
        let mut s = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            s += &k.adjoint().matmul(k);
        }
        s.max_abs_diff(&ComplexMatrix::identity(self.dim_in))
    }

    /// Deviation of `Φ(I)` from `(d_in/d_out) I`; zero for unital channels.
    pub fn unitality_defect(&self) -> f64 {
        let out = self.apply_matrix(&ComplexMatrix::identity(self.dim_in));
        let target = ComplexMatrix::identity(self.dim_out).scale(self.dim_in as f64 / self.dim_out as f64);
        out.max_abs_diff(&target)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// `ρ ↦ U ρ U^†`
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::InvalidArgument("unitary must be square".into()));
        }
        Self::new(vec![u])
    }

    /// `ρ ↦ (1 − p) ρ + p I/d`, built from the `d²` Weyl operators.
    pub fn depolarizing(dim: usize, p: f64) -> Result<Self> {
        check_unit_interval("p", p)?;
        let d2 = (dim * dim) as f64;
        let mut kraus = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                let w = if a == 0 && b == 0 { 1.0 - p + p / d2 } else { p / d2 };
                if w > 0.0 {
                    kraus.push(weyl(dim, a, b).scale(w.sqrt()));
                }
            }
        }
        Self::new(kraus)
    }

    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        check_unit_interval("gamma", gamma)?;
        let k0 = real2([[1.0, 0.0], [0.0, (1.0 - gamma).sqrt()]]);
        let k1 = real2([[0.0, gamma.sqrt()], [0.0, 0.0]]);
        Self::new(vec![k0, k1])
    }

    pub fn phase_damping(lambda: f64) -> Result<Self> {
        check_unit_interval("lambda", lambda)?;
        let k0 = real2([[1.0, 0.0], [0.0, (1.0 - lambda).sqrt()]]);
        let k1 = real2([[0.0, 0.0], [0.0, lambda.sqrt()]]);
        Self::new(vec![k0, k1])
    }

    pub fn bit_flip(p: f64) -> Result<Self> {
        check_unit_interval("p", p)?;
        let k0 = real2([[(1.0 - p).sqrt(), 0.0], [0.0, (1.0 - p).sqrt()]]);
        let k1 = real2([[0.0, p.sqrt()], [p.sqrt(), 0.0]]);
        Self::new(vec![k0, k1])
    }

    /// `ρ ↦ I/d` (trace-normalized replacer).
    pub fn completely_noisy(dim: usize) -> Self {
        let s = 1.0 / (dim as f64).sqrt();
        let mut kraus = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut k = ComplexMatrix::zeros(dim, dim);
                k[(i, j)] = C64::new(s, 0.0);
                kraus.push(k);
            }
        }
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus,
        }
    }

    /// CPTP map from a random isometry `C^d → C^{d·r}` sliced into `r` Kraus blocks.
    pub fn random(dim: usize, kraus_rank: usize, seed: u64) -> Result<Self> {
        if kraus_rank == 0 || kraus_rank > dim * dim {
            return Err(Error::InvalidArgument(format!(
                "Kraus rank {kraus_rank} outside 1..={}",
                dim * dim
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random::random_isometry(dim * kraus_rank, dim, &mut rng);
        let kraus = (0..kraus_rank)
            .map(|k| {
                let mut m = ComplexMatrix::zeros(dim, dim);
                for i in 0..dim {
                    for j in 0..dim {
                        m[(i, j)] = v[(k * dim + i, j)];
                    }
                }
                m
            })
            .collect();
        Self::new(kraus)
    }

    /// Linear action on an arbitrary operator, no validation.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += &k.matmul(m).matmul(&k.adjoint());
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                context: "channel input",
                expected: self.dim_in,
                found: rho.dim(),
            });
        }
        DensityMatrix::with_tolerance(self.apply_matrix(rho.as_matrix()), TP_TOL)
    }

    /// Dual map `Φ̂(E) = Σ_k K_k^† E K_k`.
    pub fn dual_apply(&self, e: &ComplexMatrix) -> Result<ComplexMatrix> {
        if e.rows() != self.dim_out || e.cols() != self.dim_out {
            return Err(Error::DimensionMismatch {
                context: "dual channel input",
                expected: self.dim_out,
                found: e.rows(),
            });
        }
        Ok(self.dual_apply_unchecked(e))
    }

    pub(crate) fn dual_apply_unchecked(&self, e: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += &k.adjoint().matmul(e).matmul(k);
        }
        out
    }

    /// `{Φ̂(E_b)}` as a POVM on the input space.
    pub fn dual_povm(&self, m: &Povm) -> Result<Povm> {
        if m.dim() != self.dim_out {
            return Err(Error::DimensionMismatch {
                context: "POVM vs channel output",
                expected: self.dim_out,
                found: m.dim(),
            });
        }
        Povm::new(m.elements().iter().map(|e| self.dual_apply_unchecked(e)).collect())
    }

    /// `Φ_a ⊗ Φ_b` with Kraus set `{A_i ⊗ B_j}`.
    pub fn product(&self, other: &QuantumChannel) -> QuantumChannel {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| a.kron(b)))
            .collect();
        QuantumChannel {
            dim_in: self.dim_in * other.dim_in,
            dim_out: self.dim_out * other.dim_out,
            kraus,
        }
    }

    /// `ρ ↦ U Φ(V ρ V^†) U^†`
    pub fn conjugated(&self, post: &ComplexMatrix, pre: &ComplexMatrix) -> Result<QuantumChannel> {
        QuantumChannel::new(self.kraus.iter().map(|k| post.matmul(k).matmul(pre)).collect())
    }
}

/// Measure-and-prepare channel `Ω(P) = Σ_k R_k Tr(P X_k)`.
pub fn omega_channel(states: &[DensityMatrix], povm: &Povm) -> Result<QuantumChannel> {
    if states.len() != povm.len() {
        return Err(Error::DimensionMismatch {
            context: "prepared states vs POVM elements",
            expected: povm.len(),
            found: states.len(),
        });
    }
    let dim_out = states[0].dim();
    if let Some(s) = states.iter().find(|s| s.dim() != dim_out) {
        return Err(Error::DimensionMismatch {
            context: "prepared state dimension",
            expected: dim_out,
            found: s.dim(),
        });
    }
    let mut kraus = Vec::new();
    for (r, x) in states.iter().zip(povm.elements()) {
        let er = HermitianEigen::new(r.as_matrix());
        let ex = HermitianEigen::new(x);
        for c in 0..er.dim() {
            for a in 0..ex.dim() {
                let w = er.values[c] * ex.values[a];
                if w <= EIG_ZERO * EIG_ZERO {
                    continue;
                }
                let rc = er.vectors.col(c);
                let xa = ex.vectors.col(a);
                let mut k = ComplexMatrix::zeros(dim_out, povm.dim());
                let s = w.sqrt();
                for i in 0..dim_out {
                    for j in 0..povm.dim() {
                        k[(i, j)] = rc[i] * xa[j].conj() * s;
                    }
                }
                kraus.push(k);
            }
        }
    }
    QuantumChannel::new(kraus)
}

/// The quantum-classical channel `P ↦ Σ_b |e_b⟩⟨e_b| Tr[P Φ̂(E_b)]`, output
/// dimension equal to the number of POVM elements.
pub fn measured_channel(ch: &QuantumChannel, m: &Povm) -> Result<QuantumChannel> {
    let dual = ch.dual_povm(m)?;
    let basis: Vec<DensityMatrix> = (0..m.len()).map(|b| DensityMatrix::basis(m.len(), b)).collect();
    omega_channel(&basis, &dual)
}

/// Generalized Pauli `X^a Z^b` on `C^d`.
fn weyl(dim: usize, a: usize, b: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for j in 0..dim {
        let phase = 2.0 * std::f64::consts::PI * (b * j) as f64 / dim as f64;
        m[((j + a) % dim, j)] = C64::from_polar(1.0, phase);
    }
    m
}

fn real2(rows: [[f64; 2]; 2]) -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, rows.iter().flatten().map(|&x| C64::new(x, 0.0)).collect()).expect("2x2")
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}
