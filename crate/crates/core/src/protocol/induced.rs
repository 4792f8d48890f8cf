use super::ConditionalPovm;
use crate::channel::{Povm, QuantumChannel};
use crate::error::{Error, Result};
use crate::info::{
    classical_mutual_info, conditional_mutual_info, mutual_info_joint_output, mutual_info_q, ClassicalJoint, Ensemble,
    PROB_ZERO,
};
use crate::qmat::{partial_trace, ComplexMatrix, DensityMatrix, ProbabilityVector};

/// Largest anti-Hermitian part tolerated in a conditional state before it is
/// symmetrized.
const ANTI_HERMITIAN_TOL: f64 = 1e-10;

fn split_dims(e12: &Ensemble, d1: usize) -> Result<(usize, usize)> {
    let d = e12.dim();
    if d1 == 0 || !d.is_multiple_of(d1) {
        return Err(Error::DimensionMismatch {
            context: "bipartite ensemble vs first factor",
            expected: d1,
            found: d,
        });
    }
    Ok((d1, d / d1))
}

/// `{π_j, T₂ρ_j}` for an ensemble on `C^{d₁} ⊗ C^{d₂}`.
pub fn induced_first_ensemble(e12: &Ensemble, d1: usize) -> Result<Ensemble> {
    let (d1, d2) = split_dims(e12, d1)?;
    let states = e12
        .states()
        .iter()
        .map(|s| DensityMatrix::with_tolerance(partial_trace(s.as_matrix(), &[d1, d2], &[0])?, 1e-9))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(e12.probs().clone(), states)
}

/// Ensemble on the second factor after outcome `b` of `m1` on `Φ₁`:
/// `ρ_{j,b} = p(b|j)^{-1} T₁[ρ_j (F_b ⊗ I)]` with weights `p(j|b)`, where
/// `F_b = Φ̂₁(E_b)`. Returns `(None, p(b))` when `p(b) ≤ PROB_ZERO`; signals
/// with `p(b|j) ≤ PROB_ZERO` are dropped.
pub fn induced_second_ensemble(
    e12: &Ensemble,
    ch1: &QuantumChannel,
    m1: &Povm,
    b: usize,
) -> Result<(Option<Ensemble>, f64)> {
    let (d1, d2) = split_dims(e12, ch1.dim_in())?;
    if b >= m1.len() {
        return Err(Error::InvalidArgument(format!(
            "outcome {b} out of range for {} outcomes",
            m1.len()
        )));
    }
    let f = ch1.dual_apply(m1.element(b))?.kron(&ComplexMatrix::identity(d2));
    let mut weights = Vec::with_capacity(e12.len());
    let mut states = Vec::with_capacity(e12.len());
    let mut pb = 0.0;
    for (pj, s) in e12.iter() {
        let x = partial_trace(&s.as_matrix().matmul(&f), &[d1, d2], &[1])?;
        let deviation = x.hermiticity_defect();
        if deviation > ANTI_HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let x = x.hermitian_part();
        let p_bj = x.trace().re;
        pb += pj * p_bj;
        if pj <= PROB_ZERO || p_bj <= PROB_ZERO {
            continue;
        }
        weights.push(pj * p_bj);
        states.push(DensityMatrix::with_tolerance(x.scale(1.0 / p_bj), 1e-9)?);
    }
    if pb <= PROB_ZERO || states.is_empty() {
        return Ok((None, pb.max(0.0)));
    }
    let e = Ensemble::new(ProbabilityVector::normalized(weights)?, states)?;
    Ok((Some(e), pb))
}

/// Both sides of the chain identity for a two-stage measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainIdentity {
    /// `I^q(E₁₂; M̂₁₂)` on the flattened dual POVM.
    pub lhs: f64,
    /// `first + conditional`.
    pub rhs: f64,
    pub gap: f64,
    /// `I^q(E₁; M̂₁)`.
    pub first: f64,
    /// `Σ_b p(b) I^q(E₂(b); M̂₂(b))`.
    pub conditional: f64,
}

/// `I^q(E₁₂; M̂₁₂)` against `I^q(E₁; M̂₁) + Σ_b p(b) I^q(E₂(b); M̂₂(b))`.
pub fn chain_identity_check(
    e12: &Ensemble,
    ch1: &QuantumChannel,
    ch2: &QuantumChannel,
    cp: &ConditionalPovm,
) -> Result<ChainIdentity> {
    check_shapes(e12, ch1, ch2, cp)?;
    let flat = cp.flatten()?;
    let lhs = mutual_info_q(e12, &ch1.product(ch2).dual_povm(&flat)?)?;
    let first = mutual_info_q(&induced_first_ensemble(e12, ch1.dim_in())?, &ch1.dual_povm(cp.first())?)?;
    let mut conditional = 0.0;
    for b in 0..cp.first().len() {
        if let (Some(e2), pb) = induced_second_ensemble(e12, ch1, cp.first(), b)? {
            conditional += pb * mutual_info_q(&e2, &ch2.dual_povm(cp.second(b))?)?;
        }
    }
    let rhs = first + conditional;
    Ok(ChainIdentity {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        first,
        conditional,
    })
}

fn check_shapes(e12: &Ensemble, ch1: &QuantumChannel, ch2: &QuantumChannel, cp: &ConditionalPovm) -> Result<()> {
    let (o1, o2) = cp.dims();
    if o1 != ch1.dim_out() || o2 != ch2.dim_out() {
        return Err(Error::DimensionMismatch {
            context: "conditional POVM vs channel outputs",
            expected: ch1.dim_out() * ch2.dim_out(),
            found: o1 * o2,
        });
    }
    if e12.dim() != ch1.dim_in() * ch2.dim_in() {
        return Err(Error::DimensionMismatch {
            context: "ensemble vs product channel input",
            expected: ch1.dim_in() * ch2.dim_in(),
            found: e12.dim(),
        });
    }
    Ok(())
}

/// The chain rule computed on the classical table `p(j, b, c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalChain {
    pub joint: ClassicalJoint,
    /// `I(J; B, C)`.
    pub total: f64,
    /// `I(J; B)`.
    pub first: f64,
    /// `I(J; C | B)`.
    pub conditional: f64,
    /// `|I(J;B,C) − I(J;B) − I(J;C|B)|`.
    pub residual: f64,
}

/// `p(j,b,c) = π_j Tr[ρ_j (F_b ⊗ F_c^(b))]` with dual elements `F`; branches
/// with fewer outcomes are padded with zero columns.
pub fn classical_chain(
    e12: &Ensemble,
    ch1: &QuantumChannel,
    ch2: &QuantumChannel,
    cp: &ConditionalPovm,
) -> Result<ClassicalChain> {
    check_shapes(e12, ch1, ch2, cp)?;
    let (nb, nc) = (cp.first().len(), cp.max_second_len());
    let f1 = ch1.dual_povm(cp.first())?;
    let f2 = cp
        .seconds()
        .iter()
        .map(|m| ch2.dual_povm(m))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Vec::with_capacity(e12.len() * nb * nc);
    for (pj, s) in e12.iter() {
        for (b, f2b) in f2.iter().enumerate() {
            for c in 0..nc {
                let p = match f2b.elements().get(c) {
                    Some(fc) => pj * s.as_matrix().expectation(&f1.element(b).kron(fc)),
                    None => 0.0,
                };
                table.push(p);
            }
        }
    }
    let joint = ClassicalJoint::new(vec![e12.len(), nb, nc], table)?;
    let total = mutual_info_joint_output(&joint)?;
    let first = classical_mutual_info(&joint.marginal(&[0, 1]))?;
    let conditional = conditional_mutual_info(&joint)?;
    Ok(ClassicalChain {
        residual: (total - first - conditional).abs(),
        joint,
        total,
        first,
        conditional,
    })
}
