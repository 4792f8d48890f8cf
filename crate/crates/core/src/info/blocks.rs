use super::{check_dims, Ensemble};
use crate::channel::{Povm, QuantumChannel};
use crate::error::{Error, Result};
use crate::qmat::{entropy_bits, entropy_psd, matrix_sqrt, ComplexMatrix, DensityMatrix, ProbabilityVector};

const BLOCK_TRACE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum System {
    A,
    B,
    Q,
    R,
}

/// A state `⊕_k |k⟩⟨k| ⊗ X_k` kept as its labeled blocks. `axes` names the
/// classical registers making up a label; `quantum` names the space the
/// blocks act on (`None` when every block is 1×1).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDiagonalState {
    axes: Vec<System>,
    quantum: Option<System>,
    labels: Vec<Vec<usize>>,
    blocks: Vec<ComplexMatrix>,
}

/// Result of tracing out part of a [`BlockDiagonalState`].
#[derive(Clone, Debug, PartialEq)]
pub enum Reduced {
    Block(BlockDiagonalState),
    State(DensityMatrix),
    Probs(ProbabilityVector),
}

impl Reduced {
    pub fn into_block(self) -> Option<BlockDiagonalState> {
        match self {
            Reduced::Block(b) => Some(b),
            _ => None,
        }
    }

    pub fn into_state(self) -> Option<DensityMatrix> {
        match self {
            Reduced::State(s) => Some(s),
            _ => None,
        }
    }

    pub fn into_probs(self) -> Option<ProbabilityVector> {
        match self {
            Reduced::Probs(p) => Some(p),
            _ => None,
        }
    }

    pub fn entropy(&self) -> f64 {
        match self {
            Reduced::Block(b) => b.entropy(),
            Reduced::State(s) => entropy_psd(s.as_matrix()),
            Reduced::Probs(p) => entropy_bits(p.as_slice()),
        }
    }
}

impl BlockDiagonalState {
    pub fn new(
        axes: Vec<System>,
        quantum: Option<System>,
        labels: Vec<Vec<usize>>,
        blocks: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        check_dims("block labels vs blocks", labels.len(), blocks.len())?;
        if let Some(l) = labels.iter().find(|l| l.len() != axes.len()) {
            return Err(Error::DimensionMismatch {
                context: "label arity",
                expected: axes.len(),
                found: l.len(),
            });
        }
        let d = blocks.first().map_or(1, ComplexMatrix::rows);
        if quantum.is_none() && d != 1 {
            return Err(Error::InvalidArgument("classical blocks must be 1x1".into()));
        }
        let mut total = 0.0;
        for b in &blocks {
            check_dims("block dimension", d, b.rows())?;
            let e = crate::qmat::HermitianEigen::new(b);
            if e.min_value() < -crate::qmat::PSD_TOL {
                return Err(Error::NotPositive {
                    min_eigenvalue: e.min_value(),
                });
            }
            total += b.trace().re;
        }
        if (total - 1.0).abs() > BLOCK_TRACE_TOL {
            return Err(Error::TraceNotOne { trace: total });
        }
        Ok(Self {
            axes,
            quantum,
            labels,
            blocks,
        })
    }

    /// Diagonal state over the given classical registers.
    pub fn diagonal(axes: Vec<System>, labels: Vec<Vec<usize>>, weights: &[f64]) -> Result<Self> {
        let blocks = weights
            .iter()
            .map(|&w| ComplexMatrix::from_real_diag(&[w.max(0.0)]))
            .collect();
        Self::new(axes, None, labels, blocks)
    }

    pub fn axes(&self) -> &[System] {
        &self.axes
    }

    pub fn quantum(&self) -> Option<System> {
        self.quantum
    }

    pub fn labels(&self) -> &[Vec<usize>] {
        &self.labels
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn block_dim(&self) -> usize {
        self.blocks.first().map_or(1, ComplexMatrix::rows)
    }

    pub fn block_traces(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.trace().re).collect()
    }

    /// `S` of the direct sum, as the sum of unnormalized block entropies.
    pub fn entropy(&self) -> f64 {
        self.blocks.iter().map(entropy_psd).sum()
    }

    /// Same entropy through `H(traces) + Σ t_k S(X_k / t_k)`.
    pub fn entropy_decomposed(&self) -> f64 {
        let traces = self.block_traces();
        let inner: f64 = self
            .blocks
            .iter()
            .zip(&traces)
            .filter(|(_, &t)| t > super::PROB_ZERO)
            .map(|(b, &t)| t * entropy_psd(&b.scale(1.0 / t)))
            .sum();
        entropy_bits(&traces) + inner
    }

    /// The whole state as one matrix.
    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::direct_sum(&self.blocks)
    }

    /// Trace out every classical register not in `keep` and, unless
    /// `keep_quantum`, the block space.
    pub fn reduce(&self, keep: &[System], keep_quantum: bool) -> Result<Reduced> {
        if let Some(s) = keep.iter().find(|s| !self.axes.contains(s)) {
            return Err(Error::InvalidArgument(format!("no register {s:?} to keep")));
        }
        let pos: Vec<usize> = self
            .axes
            .iter()
            .enumerate()
            .filter(|(_, a)| keep.contains(a))
            .map(|(i, _)| i)
            .collect();
        let axes: Vec<System> = pos.iter().map(|&i| self.axes[i]).collect();
        let mut labels: Vec<Vec<usize>> = Vec::new();
        let mut sums: Vec<ComplexMatrix> = Vec::new();
        for (l, b) in self.labels.iter().zip(&self.blocks) {
            let key: Vec<usize> = pos.iter().map(|&i| l[i]).collect();
            let part = if keep_quantum {
                b.clone()
            } else {
                ComplexMatrix::from_real_diag(&[b.trace().re])
            };
            match labels.iter().position(|k| *k == key) {
                Some(k) => sums[k] += &part,
                None => {
                    labels.push(key);
                    sums.push(part);
                }
            }
        }
        let quantum = if keep_quantum { self.quantum } else { None };
        if axes.is_empty() {
            let m = sums.pop().expect("at least one block");
            return if quantum.is_some() {
                Ok(Reduced::State(DensityMatrix::with_tolerance(m, BLOCK_TRACE_TOL)?))
            } else {
                Ok(Reduced::Probs(ProbabilityVector::new(vec![m.trace().re])?))
            };
        }
        if axes.len() == 1 && quantum.is_none() {
            let n = labels.iter().map(|l| l[0]).max().unwrap_or(0) + 1;
            let mut p = vec![0.0; n];
            for (l, s) in labels.iter().zip(&sums) {
                p[l[0]] = s.trace().re;
            }
            return Ok(Reduced::Probs(ProbabilityVector::new(p)?));
        }
        Ok(Reduced::Block(BlockDiagonalState {
            axes,
            quantum,
            labels,
            blocks: sums,
        }))
    }
}

/// Reduction targets for [`reductions`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Marginal {
    AB,
    A,
    B,
    AQ,
    Q,
    BR,
    R,
}

/// Named marginal of a block-diagonal state, e.g. `P_Q = Φ(ρ)` of `P_ABQ`.
pub fn reductions(s: &BlockDiagonalState, which: Marginal) -> Result<Reduced> {
    let want_quantum = |sys: System| -> Result<()> {
        if s.quantum() == Some(sys) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "state has block space {:?}, not {sys:?}",
                s.quantum()
            )))
        }
    };
    match which {
        Marginal::AB => s.reduce(&[System::A, System::B], false),
        Marginal::A => s.reduce(&[System::A], false),
        Marginal::B => s.reduce(&[System::B], false),
        Marginal::AQ => {
            want_quantum(System::Q)?;
            s.reduce(&[System::A], true)
        }
        Marginal::Q => {
            want_quantum(System::Q)?;
            s.reduce(&[], true)
        }
        Marginal::BR => {
            want_quantum(System::R)?;
            s.reduce(&[System::B], true)
        }
        Marginal::R => {
            want_quantum(System::R)?;
            s.reduce(&[], true)
        }
    }
}

/// `P_ABQ` with blocks `π_j √Φ(ρ_j) E_b √Φ(ρ_j)`, or with `dual_side` the
/// blocks `π_j √ρ_j Φ̂(E_b) √ρ_j` of `P̂_ABQ`.
pub fn build_pabq(ch: &QuantumChannel, e: &Ensemble, m: &Povm, dual_side: bool) -> Result<BlockDiagonalState> {
    check_dims("ensemble vs channel input", ch.dim_in(), e.dim())?;
    check_dims("POVM vs channel output", ch.dim_out(), m.dim())?;
    let effects: Vec<ComplexMatrix> = if dual_side {
        ch.dual_povm(m)?.elements().to_vec()
    } else {
        m.elements().to_vec()
    };
    let mut labels = Vec::new();
    let mut blocks = Vec::new();
    for (j, (p, s)) in e.iter().enumerate() {
        let sigma = if dual_side {
            s.as_matrix().clone()
        } else {
            ch.apply_matrix(s.as_matrix())
        };
        let root = matrix_sqrt(&sigma)?;
        for (b, eb) in effects.iter().enumerate() {
            labels.push(vec![j, b]);
            blocks.push(root.matmul(eb).matmul(&root).hermitian_part().scale(p));
        }
    }
    BlockDiagonalState::new(vec![System::A, System::B], Some(System::Q), labels, blocks)
}

/// `P_BR` with blocks `√ρ Φ̂(E_b) √ρ`.
pub fn build_pbr(ch: &QuantumChannel, rho: &DensityMatrix, m: &Povm) -> Result<BlockDiagonalState> {
    check_dims("state vs channel input", ch.dim_in(), rho.dim())?;
    let dual = ch.dual_povm(m)?;
    let root = matrix_sqrt(rho.as_matrix())?;
    let blocks = dual
        .elements()
        .iter()
        .map(|x| root.matmul(x).matmul(&root).hermitian_part())
        .collect();
    let labels = (0..m.len()).map(|b| vec![b]).collect();
    BlockDiagonalState::new(vec![System::B], Some(System::R), labels, blocks)
}

#[cfg(test)]
mod tests {
    use super::super::classical_joint;
    use super::super::tests::random_instance;
    use super::*;

    #[test]
    fn block_traces_match_joint_table() {
        for seed in 0..50 {
            let (ch, e, m) = random_instance(seed);
            let joint = classical_joint(&ch, &e, &m).unwrap();
            for dual in [false, true] {
                let s = build_pabq(&ch, &e, &m, dual).unwrap();
                for (t, p) in s.block_traces().iter().zip(joint.as_slice()) {
                    assert!((t - p).abs() < 1e-10);
                }
                assert!((s.block_traces().iter().sum::<f64>() - 1.0).abs() < 1e-10);
                assert!((s.entropy() - s.entropy_decomposed()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn both_sides_share_pab() {
        let (ch, e, m) = random_instance(7);
        let a = reductions(&build_pabq(&ch, &e, &m, false).unwrap(), Marginal::AB).unwrap();
        let b = reductions(&build_pabq(&ch, &e, &m, true).unwrap(), Marginal::AB).unwrap();
        let (a, b) = (a.into_block().unwrap(), b.into_block().unwrap());
        assert_eq!(a.labels(), b.labels());
        for (x, y) in a.block_traces().iter().zip(b.block_traces()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn trivial_povm_blocks_are_outputs() {
        let (ch, e, _) = random_instance(4);
        let s = build_pabq(&ch, &e, &Povm::trivial(ch.dim_out()), false).unwrap();
        for ((p, r), blk) in e.iter().zip(s.blocks()) {
            assert!(blk.max_abs_diff(&ch.apply_matrix(r.as_matrix()).scale(p)) < 1e-10);
        }
    }

    #[test]
    fn named_marginals() {
        let (ch, e, m) = random_instance(11);
        let s = build_pabq(&ch, &e, &m, false).unwrap();
        let q = reductions(&s, Marginal::Q).unwrap().into_state().unwrap();
        let out = ch.apply_matrix(&e.average_matrix());
        assert!(q.as_matrix().max_abs_diff(&out) < 1e-10);
        let a = reductions(&s, Marginal::A).unwrap().into_probs().unwrap();
        for (x, y) in a.iter().zip(e.probs().iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        let aq = reductions(&s, Marginal::AQ).unwrap().into_block().unwrap();
        for ((p, r), blk) in e.iter().zip(aq.blocks()) {
            assert!(blk.max_abs_diff(&ch.apply_matrix(r.as_matrix()).scale(p)) < 1e-10);
        }
        let tau = reductions(&s, Marginal::B).unwrap().into_probs().unwrap();
        let expected = m.probabilities(&out);
        for (x, y) in tau.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(reductions(&s, Marginal::R).is_err());
        assert!(reductions(&s, Marginal::BR).is_err());

        let rho = e.average();
        let pbr = build_pbr(&ch, &rho, &m).unwrap();
        let tau_r = reductions(&pbr, Marginal::B).unwrap().into_probs().unwrap();
        for (x, y) in tau_r.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-10);
        }
        let r = reductions(&pbr, Marginal::R).unwrap().into_state().unwrap();
        assert!(r.as_matrix().max_abs_diff(rho.as_matrix()) < 1e-10);
        assert!(reductions(&pbr, Marginal::A).is_err());
    }
}
