//! Conditional (adaptive) product measurements on several channel uses, the
//! ensembles they induce on each factor, and the additivity experiments.

mod experiments;
mod induced;

pub use experiments::{
    additivity_experiment, additivity_experiment_multi, fixed_measurement_additivity, identity_sweep,
    random_binary_povm, random_chain_instance, AdditivityReport, BinaryStrategyFamily, ChainInstance,
    FixedMeasurementReport, IdentitySweep,
};
pub use induced::{
    chain_identity_check, classical_chain, induced_first_ensemble, induced_second_ensemble, ChainIdentity,
    ClassicalChain,
};

use crate::channel::Povm;
use crate::error::{Error, Result};
use crate::qmat::ComplexMatrix;

/// Deepest supported strategy (number of channel uses).
pub const MAX_DEPTH: usize = 3;

fn check_branch(branch: usize, path: &[usize], m: &Povm) -> Result<()> {
    Povm::new(m.elements().to_vec())
        .map(|_| ())
        .map_err(|e| Error::InvalidBranch {
            branch,
            message: format!("outcome path {path:?}: {e}"),
        })
}

/// Two-stage measurement `{E_b ⊗ E_c^(b)}`: `first` on the first factor, then
/// `second[b]` on the second factor once `b` is known.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalPovm {
    first: Povm,
    second: Vec<Povm>,
}

impl ConditionalPovm {
    pub fn new(first: Povm, second: Vec<Povm>) -> Result<Self> {
        let cp = Self::new_unchecked(first, second)?;
        check_branch(0, &[], &cp.first)?;
        for (b, m) in cp.second.iter().enumerate() {
            check_branch(b, &[b], m)?;
        }
        Ok(cp)
    }

    /// Shape checks only; element validity is deferred to [`Self::flatten`].
    pub fn new_unchecked(first: Povm, second: Vec<Povm>) -> Result<Self> {
        if second.len() != first.len() {
            return Err(Error::DimensionMismatch {
                context: "second-stage POVMs per first outcome",
                expected: first.len(),
                found: second.len(),
            });
        }
        let d2 = second[0].dim();
        if let Some(m) = second.iter().find(|m| m.dim() != d2) {
            return Err(Error::DimensionMismatch {
                context: "second-stage POVM size",
                expected: d2,
                found: m.dim(),
            });
        }
        Ok(Self { first, second })
    }

    /// The same second stage whatever the first outcome.
    pub fn product(first: Povm, second: Povm) -> Self {
        let second = vec![second; first.len()];
        Self { first, second }
    }

    pub fn first(&self) -> &Povm {
        &self.first
    }

    pub fn second(&self, b: usize) -> &Povm {
        &self.second[b]
    }

    pub fn seconds(&self) -> &[Povm] {
        &self.second
    }

    /// `(d₁, d₂)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.first.dim(), self.second[0].dim())
    }

    /// Largest second-stage outcome count.
    pub fn max_second_len(&self) -> usize {
        self.second.iter().map(Povm::len).max().unwrap_or(0)
    }

    /// `{E_b ⊗ E_c^(b)}` ordered by `b`, then `c`.
    pub fn flatten(&self) -> Result<Povm> {
        self.to_strategy().flatten()
    }

    pub fn to_strategy(&self) -> AdaptiveStrategy {
        AdaptiveStrategy {
            depth: 2,
            root: StrategyNode {
                povm: self.first.clone(),
                children: self.second.iter().map(|m| StrategyNode::leaf(m.clone())).collect(),
            },
        }
    }

    /// Replaces branch `b` by a scaled copy that is no longer complete.
    #[doc(hidden)]
    pub fn inject_fault(&mut self, b: usize) {
        let bad = self.second[b].elements().iter().map(|e| e.scale(1.01)).collect();
        self.second[b] = Povm::new_unchecked(bad);
    }
}

/// One stage of an adaptive strategy: a POVM and, unless this is the last
/// stage, one sub-strategy per outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyNode {
    pub povm: Povm,
    pub children: Vec<StrategyNode>,
}

impl StrategyNode {
    pub fn leaf(povm: Povm) -> Self {
        Self {
            povm,
            children: Vec::new(),
        }
    }

    fn depth(&self) -> usize {
        1 + self.children.first().map_or(0, StrategyNode::depth)
    }

    fn check(&self, depth: usize, dims: &mut Vec<usize>, level: usize, path: &mut Vec<usize>) -> Result<()> {
        if dims.len() == level {
            dims.push(self.povm.dim());
        } else if dims[level] != self.povm.dim() {
            return Err(Error::DimensionMismatch {
                context: "stage POVM size",
                expected: dims[level],
                found: self.povm.dim(),
            });
        }
        if level + 1 == depth {
            if !self.children.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "strategy path {path:?} is deeper than {depth}"
                )));
            }
            return Ok(());
        }
        if self.children.len() != self.povm.len() {
            return Err(Error::DimensionMismatch {
                context: "sub-strategies per outcome",
                expected: self.povm.len(),
                found: self.children.len(),
            });
        }
        for (b, child) in self.children.iter().enumerate() {
            path.push(b);
            child.check(depth, dims, level + 1, path)?;
            path.pop();
        }
        Ok(())
    }

    fn validate(&self, path: &mut Vec<usize>) -> Result<()> {
        check_branch(path.last().copied().unwrap_or(0), path, &self.povm)?;
        for (b, child) in self.children.iter().enumerate() {
            path.push(b);
            child.validate(path)?;
            path.pop();
        }
        Ok(())
    }

    fn elements(&self) -> Vec<ComplexMatrix> {
        if self.children.is_empty() {
            return self.povm.elements().to_vec();
        }
        self.povm
            .elements()
            .iter()
            .zip(&self.children)
            .flat_map(|(e, child)| child.elements().into_iter().map(move |f| e.kron(&f)))
            .collect()
    }

    fn collect_level<'a>(&'a self, level: usize, out: &mut Vec<&'a Povm>) {
        if level == 0 {
            out.push(&self.povm);
        } else {
            for c in &self.children {
                c.collect_level(level - 1, out);
            }
        }
    }
}

/// Tree of stage POVMs on `H₁ ⊗ … ⊗ H_n`; stage `k` depends on the outcomes
/// of stages `1..k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveStrategy {
    depth: usize,
    root: StrategyNode,
}

impl AdaptiveStrategy {
    pub fn new(root: StrategyNode) -> Result<Self> {
        let depth = root.depth();
        if !(2..=MAX_DEPTH).contains(&depth) {
            return Err(Error::InvalidArgument(format!(
                "strategy depth must be 2..={MAX_DEPTH}, got {depth}"
            )));
        }
        root.check(depth, &mut Vec::new(), 0, &mut Vec::new())?;
        Ok(Self { depth, root })
    }

    /// Every stage uses `m`, whatever the earlier outcomes.
    pub fn uniform(m: &Povm, depth: usize) -> Result<Self> {
        fn build(m: &Povm, left: usize) -> StrategyNode {
            StrategyNode {
                povm: m.clone(),
                children: if left > 1 {
                    vec![build(m, left - 1); m.len()]
                } else {
                    Vec::new()
                },
            }
        }
        Self::new(build(m, depth))
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn root(&self) -> &StrategyNode {
        &self.root
    }

    /// Factor dimensions `d₁, …, d_n`.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = Vec::new();
        let mut node = Some(&self.root);
        while let Some(n) = node {
            dims.push(n.povm.dim());
            node = n.children.first();
        }
        dims
    }

    /// Stage POVMs used at `level` (0-based), one per outcome history.
    pub fn stage_povms(&self, level: usize) -> Vec<&Povm> {
        let mut out = Vec::new();
        self.root.collect_level(level, &mut out);
        out
    }

    /// Joint POVM on the product space, ordered lexicographically by the
    /// outcome tuple.
    pub fn flatten(&self) -> Result<Povm> {
        self.root.validate(&mut Vec::new())?;
        Povm::new(self.root.elements())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{ComplexMatrix, C64};

    fn x_povm() -> Povm {
        Povm::qubit_projective([1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn unconditioned_product_has_four_elements() {
        let z = Povm::computational(2);
        let flat = ConditionalPovm::product(z.clone(), z.clone()).flatten().unwrap();
        assert_eq!(flat.len(), 4);
        assert_eq!(flat, z.tensor(&z));
        assert_eq!(flat, Povm::computational(4));
    }

    #[test]
    fn conditioned_second_stage_sums_to_identity() {
        let z = Povm::computational(2);
        let cp = ConditionalPovm::new(z.clone(), vec![z.clone(), x_povm()]).unwrap();
        let flat = cp.flatten().unwrap();
        assert_eq!(flat.len(), 4);
        let mut sum = ComplexMatrix::zeros(4, 4);
        for e in flat.elements() {
            sum += e;
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        // |1⟩⟨1| ⊗ |+⟩⟨+| has entry ½ at (2,3)
        assert!((flat.element(2)[(2, 3)] - C64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn depth_three_has_eight_elements() {
        let z = Povm::computational(2);
        let s = AdaptiveStrategy::new(StrategyNode {
            povm: z.clone(),
            children: vec![
                StrategyNode {
                    povm: x_povm(),
                    children: vec![StrategyNode::leaf(z.clone()), StrategyNode::leaf(x_povm())],
                },
                AdaptiveStrategy::uniform(&z, 2).unwrap().root().clone(),
            ],
        })
        .unwrap();
        assert_eq!(s.depth(), 3);
        assert_eq!(s.dims(), vec![2, 2, 2]);
        assert_eq!(s.stage_povms(2).len(), 4);
        let flat = s.flatten().unwrap();
        assert_eq!(flat.len(), 8);
        let mut sum = ComplexMatrix::zeros(8, 8);
        for e in flat.elements() {
            sum += e;
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-14);
    }

    #[test]
    fn broken_branch_is_named() {
        let z = Povm::computational(2);
        let mut cp = ConditionalPovm::new(z.clone(), vec![z.clone(), x_povm()]).unwrap();
        cp.inject_fault(1);
        match cp.flatten() {
            Err(Error::InvalidBranch { branch, .. }) => assert_eq!(branch, 1),
            other => panic!("expected a branch error, got {other:?}"),
        }
        let bad = Povm::new_unchecked(vec![ComplexMatrix::identity(2).scale(0.5)]);
        assert!(matches!(
            ConditionalPovm::new(z.clone(), vec![bad, z.clone()]),
            Err(Error::InvalidBranch { branch: 0, .. })
        ));
    }

    #[test]
    fn malformed_trees_are_rejected() {
        let z = Povm::computational(2);
        assert!(ConditionalPovm::new(z.clone(), vec![z.clone()]).is_err());
        assert!(ConditionalPovm::new(z.clone(), vec![z.clone(), Povm::computational(3)]).is_err());
        assert!(AdaptiveStrategy::uniform(&z, 1).is_err());
        assert!(AdaptiveStrategy::uniform(&z, 4).is_err());
        let ragged = StrategyNode {
            povm: z.clone(),
            children: vec![
                StrategyNode::leaf(z.clone()),
                AdaptiveStrategy::uniform(&z, 2).unwrap().root().clone(),
            ],
        };
        assert!(AdaptiveStrategy::new(ragged).is_err());
    }
}
