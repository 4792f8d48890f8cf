use crate::error::{Error, Result};
use crate::qmat::{entropy_bits, PROB_CLIP_TOL, TRACE_TOL};

/// Probabilities below this are dropped from every sum.
pub const PROB_ZERO: f64 = 1e-12;

/// Joint distribution over two or three finite alphabets, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalJoint {
    shape: Vec<usize>,
    table: Vec<f64>,
}

impl ClassicalJoint {
    pub fn new(shape: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::InvalidArgument("joint table needs positive axis sizes".into()));
        }
        let n: usize = shape.iter().product();
        if table.len() != n {
            return Err(Error::DimensionMismatch {
                context: "joint table entries",
                expected: n,
                found: table.len(),
            });
        }
        let mut table = table;
        for (i, p) in table.iter_mut().enumerate() {
            if !p.is_finite() || *p < -PROB_CLIP_TOL {
                return Err(Error::InvalidProbability(format!("entry {i} = {p}")));
            }
            *p = p.max(0.0);
        }
        let s: f64 = table.iter().sum();
        if (s - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidProbability(format!("joint table sums to {s}")));
        }
        Ok(Self { shape, table })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged joint table".into()));
        }
        Self::new(vec![rows.len(), cols], rows.concat())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.table
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.table[self.flat(idx)]
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &s)| acc * s + i)
    }

    fn unflat(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for a in (0..self.shape.len()).rev() {
            idx[a] = k % self.shape[a];
            k /= self.shape[a];
        }
        idx
    }

    /// Marginal on the listed axes (kept in original order).
    pub fn marginal(&self, keep: &[usize]) -> ClassicalJoint {
        let axes: Vec<usize> = (0..self.shape.len()).filter(|a| keep.contains(a)).collect();
        let shape: Vec<usize> = if axes.is_empty() {
            vec![1]
        } else {
            axes.iter().map(|&a| self.shape[a]).collect()
        };
        let mut table = vec![0.0; shape.iter().product()];
        for (k, &p) in self.table.iter().enumerate() {
            let idx = self.unflat(k);
            let t = axes.iter().zip(&shape).fold(0, |acc, (&a, &s)| acc * s + idx[a]);
            table[t] += p;
        }
        ClassicalJoint { shape, table }
    }

    /// Shannon entropy of the whole table in bits.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.table)
    }

    /// Entropy of the marginal on `axes`.
    pub fn entropy_of(&self, axes: &[usize]) -> f64 {
        self.marginal(axes).entropy()
    }
}

/// `Σ p(x,y) log₂ p(x,y)/(p(x)p(y))` by direct summation over a two-axis table.
pub fn classical_mutual_info(joint: &ClassicalJoint) -> Result<f64> {
    if joint.shape().len() != 2 {
        return Err(Error::InvalidArgument(
            "mutual information needs a two-axis table".into(),
        ));
    }
    let px = joint.marginal(&[0]);
    let py = joint.marginal(&[1]);
    let (nx, ny) = (joint.shape()[0], joint.shape()[1]);
    let mut acc = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            let p = joint.get(&[x, y]);
            if p <= PROB_ZERO {
                continue;
            }
            acc += p * (p / (px.as_slice()[x] * py.as_slice()[y])).log2();
        }
    }
    Ok(acc)
}

/// `H(X) + H(Y) − H(X,Y)`.
pub fn mutual_info_by_entropies(joint: &ClassicalJoint) -> Result<f64> {
    if joint.shape().len() != 2 {
        return Err(Error::InvalidArgument(
            "mutual information needs a two-axis table".into(),
        ));
    }
    Ok(joint.entropy_of(&[0]) + joint.entropy_of(&[1]) - joint.entropy())
}

/// `I(J;C|B) = Σ_b p(b) I(J;C | B=b)` for a table indexed `(j, b, c)`.
pub fn conditional_mutual_info(joint: &ClassicalJoint) -> Result<f64> {
    let shape = joint.shape();
    if shape.len() != 3 {
        return Err(Error::InvalidArgument(
            "conditional mutual information needs a (j, b, c) table".into(),
        ));
    }
    let (nj, nb, nc) = (shape[0], shape[1], shape[2]);
    let mut total = 0.0;
    for b in 0..nb {
        let slice: Vec<f64> = (0..nj)
            .flat_map(|j| (0..nc).map(move |c| (j, c)))
            .map(|(j, c)| joint.get(&[j, b, c]))
            .collect();
        let pb: f64 = slice.iter().sum();
        if pb <= PROB_ZERO {
            continue;
        }
        let cond = ClassicalJoint {
            shape: vec![nj, nc],
            table: slice.iter().map(|p| p / pb).collect(),
        };
        total += pb * classical_mutual_info(&cond)?;
    }
    Ok(total)
}

/// `I(J; B,C)` treating `(b, c)` as a single output symbol.
pub fn mutual_info_joint_output(joint: &ClassicalJoint) -> Result<f64> {
    let shape = joint.shape();
    if shape.len() != 3 {
        return Err(Error::InvalidArgument("needs a (j, b, c) table".into()));
    }
    let flat = ClassicalJoint {
        shape: vec![shape[0], shape[1] * shape[2]],
        table: joint.as_slice().to_vec(),
    };
    classical_mutual_info(&flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mutual_info_examples() {
        let prod = ClassicalJoint::from_rows(&[vec![0.12, 0.28], vec![0.18, 0.42]]).unwrap();
        assert!(classical_mutual_info(&prod).unwrap().abs() < 1e-15);
        let corr = ClassicalJoint::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!((classical_mutual_info(&corr).unwrap() - 1.0).abs() < 1e-15);

        let t = ClassicalJoint::from_rows(&[vec![0.3, 0.1], vec![0.2, 0.4]]).unwrap();
        // marginals (.4, .6), (.5, .5); direct summation
        let oracle = 0.3 * (0.3f64 / (0.4 * 0.5)).log2()
            + 0.1 * (0.1f64 / (0.4 * 0.5)).log2()
            + 0.2 * (0.2f64 / (0.6 * 0.5)).log2()
            + 0.4 * (0.4f64 / (0.6 * 0.5)).log2();
        assert!((oracle - 0.124511).abs() < 1e-6);
        assert!((classical_mutual_info(&t).unwrap() - oracle).abs() < 1e-15);
        assert!((mutual_info_by_entropies(&t).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn conditional_examples() {
        // C independent of (J, B)
        let jb = [0.1, 0.2, 0.3, 0.4];
        let c = [0.25, 0.75];
        let table: Vec<f64> = jb.iter().flat_map(|p| c.iter().map(move |q| p * q)).collect();
        let t = ClassicalJoint::new(vec![2, 2, 2], table).unwrap();
        assert!(conditional_mutual_info(&t).unwrap().abs() < 1e-15);

        // J = C, B constant
        let pj = [0.2, 0.3, 0.5];
        let mut table = vec![0.0; 3 * 3];
        for j in 0..3 {
            table[j * 3 + j] = pj[j];
        }
        let t = ClassicalJoint::new(vec![3, 1, 3], table).unwrap();
        let hj = entropy_bits(&pj);
        assert!((conditional_mutual_info(&t).unwrap() - hj).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(ClassicalJoint::from_rows(&[vec![0.5, 0.6]]).is_err());
        assert!(ClassicalJoint::from_rows(&[vec![1.1, -0.1]]).is_err());
        let t = ClassicalJoint::new(vec![2, 2, 2], vec![0.125; 8]).unwrap();
        assert!(classical_mutual_info(&t).is_err());
    }

    proptest! {
        #[test]
        fn chain_rule(raw in proptest::collection::vec(0.0f64..1.0, 8)) {
            let s: f64 = raw.iter().sum();
            prop_assume!(s > 1e-6);
            let t = ClassicalJoint::new(vec![2, 2, 2], raw.iter().map(|x| x / s).collect()).unwrap();
            let lhs = mutual_info_joint_output(&t).unwrap();
            let rhs = classical_mutual_info(&t.marginal(&[0, 1])).unwrap() + conditional_mutual_info(&t).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
            prop_assert!(conditional_mutual_info(&t).unwrap() >= -1e-15);
        }
    }
}
