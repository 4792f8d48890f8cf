//! Information functionals for an ensemble sent through a channel and read
//! out by a POVM, and the block-diagonal states that express them as
//! relative entropies.
//!
//! System labels: `A` indexes the input alphabet `j`, `B` the measurement
//! outcome `b`, `Q` the channel output space and `R` a reference copy of the
//! input space.

mod blocks;
mod bounds;
mod classical;

pub use blocks::{build_pabq, build_pbr, reductions, BlockDiagonalState, Marginal, Reduced, System};
pub use bounds::{
    entanglement_assisted_quantity, gamma_rho, holevo_entropy_form, holevo_quantity, holevo_relent, omega_qb, omega_ra,
    shannon_relent, shannon_via_relent, uep_objective, uep_relent,
};
pub use classical::{
    classical_mutual_info, conditional_mutual_info, mutual_info_by_entropies, mutual_info_joint_output, ClassicalJoint,
    PROB_ZERO,
};

use crate::channel::{Povm, QuantumChannel};
use crate::error::{Error, Result};
use crate::qmat::{entropy_bits, ComplexMatrix, DensityMatrix, ProbabilityVector};

/// Signal states `ρ_j` sent with prior probabilities `π_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    probs: ProbabilityVector,
    states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(probs: ProbabilityVector, states: Vec<DensityMatrix>) -> Result<Self> {
        if probs.len() != states.len() {
            return Err(Error::DimensionMismatch {
                context: "ensemble weights vs states",
                expected: probs.len(),
                found: states.len(),
            });
        }
        if states.is_empty() {
            return Err(Error::InvalidArgument("ensemble needs at least one state".into()));
        }
        let dim = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                context: "ensemble state dimension",
                expected: dim,
                found: s.dim(),
            });
        }
        Ok(Self { probs, states })
    }

    pub fn uniform(states: Vec<DensityMatrix>) -> Result<Self> {
        Self::new(ProbabilityVector::uniform(states.len()), states)
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn probs(&self) -> &ProbabilityVector {
        &self.probs
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DensityMatrix)> {
        self.probs.iter().zip(&self.states)
    }

    /// `ρ = Σ_j π_j ρ_j`
    pub fn average(&self) -> DensityMatrix {
        DensityMatrix::with_tolerance(self.average_matrix(), 1e-9).expect("convex combination of states")
    }

    pub fn average_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (p, s) in self.iter() {
            acc += &s.as_matrix().scale(p);
        }
        acc
    }

    /// Output ensemble `{π_j, Φ(ρ_j)}`.
    pub fn through(&self, ch: &QuantumChannel) -> Result<Ensemble> {
        let states = self.states.iter().map(|s| ch.apply(s)).collect::<Result<Vec<_>>>()?;
        Ok(Ensemble {
            probs: self.probs.clone(),
            states,
        })
    }
}

fn check_dims(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

/// `S(Tr[ρ E_b]) − Σ_j π_j S(Tr[ρ_j E_b])` in bits.
pub fn mutual_info_q(e: &Ensemble, m: &Povm) -> Result<f64> {
    check_dims("ensemble vs POVM", m.dim(), e.dim())?;
    let mut avg = vec![0.0; m.len()];
    let mut cond = 0.0;
    for (p, s) in e.iter() {
        if p <= PROB_ZERO {
            continue;
        }
        let row = m.probabilities(s.as_matrix());
        for (a, r) in avg.iter_mut().zip(&row) {
            *a += p * r;
        }
        cond += p * entropy_bits(&row);
    }
    Ok(entropy_bits(&avg) - cond)
}

/// `I^q_Φ(E; M)` evaluated on the output ensemble `{π_j, Φ(ρ_j)}`.
pub fn mutual_info_q_channel(ch: &QuantumChannel, e: &Ensemble, m: &Povm) -> Result<f64> {
    check_dims("ensemble vs channel input", ch.dim_in(), e.dim())?;
    check_dims("POVM vs channel output", ch.dim_out(), m.dim())?;
    mutual_info_q(&e.through(ch)?, m)
}

/// Same quantity with the noise moved onto the measurement: `I^q(E; M̂)`.
pub fn mutual_info_q_dual(ch: &QuantumChannel, e: &Ensemble, m: &Povm) -> Result<f64> {
    check_dims("ensemble vs channel input", ch.dim_in(), e.dim())?;
    mutual_info_q(e, &ch.dual_povm(m)?)
}

/// `p(j, b) = π_j Tr[Φ(ρ_j) E_b]`.
pub fn classical_joint(ch: &QuantumChannel, e: &Ensemble, m: &Povm) -> Result<ClassicalJoint> {
    check_dims("ensemble vs channel input", ch.dim_in(), e.dim())?;
    check_dims("POVM vs channel output", ch.dim_out(), m.dim())?;
    let mut table = Vec::with_capacity(e.len() * m.len());
    for (p, s) in e.iter() {
        let out = ch.apply_matrix(s.as_matrix());
        table.extend(m.probabilities(&out).into_iter().map(|q| p * q));
    }
    ClassicalJoint::new(vec![e.len(), m.len()], table)
}
