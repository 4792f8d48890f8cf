//! Unconstrained real parametrizations of pure states, density matrices and
//! POVMs used by the local searches.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{Povm, QuantumChannel};
use crate::qmat::random::{gaussian_c64, random_state_vector};
use crate::qmat::{ComplexMatrix, HermitianEigen, C64};

/// Pure states on `C^d`: Bloch angles `(θ, φ)` for qubits, otherwise a
/// complex vector whose first entry is kept real.
#[derive(Clone, Copy, Debug)]
pub struct StateParam {
    pub dim: usize,
}

impl StateParam {
    pub fn num_params(&self) -> usize {
        if self.dim == 2 {
            2
        } else {
            2 * self.dim - 1
        }
    }

    pub fn vector(&self, x: &[f64]) -> Vec<C64> {
        if self.dim == 2 {
            let (t, p) = (x[0], x[1]);
            return vec![C64::new((t / 2.0).cos(), 0.0), C64::from_polar((t / 2.0).sin(), p)];
        }
        let mut v = Vec::with_capacity(self.dim);
        v.push(C64::new(x[0], 0.0));
        for k in 1..self.dim {
            v.push(C64::new(x[2 * k - 1], x[2 * k]));
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-150 {
            let mut e = vec![C64::new(0.0, 0.0); self.dim];
            e[0] = C64::new(1.0, 0.0);
            return e;
        }
        v.into_iter().map(|z| z / n).collect()
    }

    /// Parameters of `v` up to global phase.
    pub fn params_of(&self, v: &[C64]) -> Vec<f64> {
        let k = v.iter().position(|z| z.norm() > 1e-12).unwrap_or(0);
        let phase = if v[k].norm() > 0.0 {
            v[k].conj() / v[k].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let v: Vec<C64> = v.iter().map(|z| z * phase).collect();
        if self.dim == 2 {
            let theta = 2.0 * v[1].norm().atan2(v[0].norm());
            let phi = if v[0].norm() > 1e-12 {
                (v[1] * v[0].conj()).arg()
            } else {
                0.0
            };
            return vec![theta, phi];
        }
        let mut x = vec![v[0].re];
        for z in &v[1..] {
            x.push(z.re);
            x.push(z.im);
        }
        x
    }

    pub fn random(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        if self.dim == 2 {
            let u: f64 = rng.random();
            let p: f64 = rng.random();
            return vec![(1.0 - 2.0 * u).acos(), 2.0 * std::f64::consts::PI * p];
        }
        self.params_of(&random_state_vector(self.dim, rng))
    }
}

/// A family of POVMs on a fixed space, indexed by real parameters.
pub trait PovmFamily: Sync {
    fn dim(&self) -> usize;
    fn num_params(&self) -> usize;
    /// Elements for parameters `x`; completeness must hold for every `x`.
    fn elements(&self, x: &[f64]) -> Vec<ComplexMatrix>;
    fn random_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;

    /// `Φ̂(E_b)` for every element. Families with product structure can
    /// override this to dualize factor by factor.
    fn dual_elements(&self, ch: &QuantumChannel, x: &[f64]) -> Vec<ComplexMatrix> {
        self.elements(x).iter().map(|e| ch.dual_apply_unchecked(e)).collect()
    }
}

/// Rank-one POVMs `{v_b^† v_b}` from the rows of `V = A (A^†A)^{-1/2}`, `A`
/// an arbitrary `n × d` complex matrix.
#[derive(Clone, Copy, Debug)]
pub struct IsometryFamily {
    pub dim: usize,
    pub outcomes: usize,
}

impl IsometryFamily {
    pub fn new(dim: usize, outcomes: usize) -> Self {
        Self {
            dim,
            outcomes: outcomes.max(dim),
        }
    }

    pub fn isometry(&self, x: &[f64]) -> ComplexMatrix {
        let (n, d) = (self.outcomes, self.dim);
        let data = (0..n * d).map(|k| C64::new(x[2 * k], x[2 * k + 1])).collect();
        let a = ComplexMatrix::from_vec(n, d, data).expect("finite parameters");
        let g = a.adjoint().matmul(&a);
        let inv = HermitianEigen::new(&g).reconstruct_with(|l| 1.0 / l.max(1e-300).sqrt());
        a.matmul(&inv)
    }

    /// Parameters reproducing an existing rank-one POVM given as isometry rows.
    pub fn params_of(&self, v: &ComplexMatrix) -> Vec<f64> {
        v.as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
    }
}

impl PovmFamily for IsometryFamily {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_params(&self) -> usize {
        2 * self.outcomes * self.dim
    }

    fn elements(&self, x: &[f64]) -> Vec<ComplexMatrix> {
        let v = self.isometry(x);
        (0..self.outcomes)
            .map(|b| {
                let row: Vec<C64> = (0..self.dim).map(|j| v[(b, j)].conj()).collect();
                ComplexMatrix::outer(&row)
            })
            .collect()
    }

    fn random_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.outcomes * self.dim)
            .flat_map(|_| {
                let z = gaussian_c64(rng);
                [z.re, z.im]
            })
            .collect()
    }
}

/// A single POVM with no free parameters.
#[derive(Clone, Debug)]
pub struct FixedFamily(pub Povm);

impl PovmFamily for FixedFamily {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn num_params(&self) -> usize {
        0
    }

    fn elements(&self, _: &[f64]) -> Vec<ComplexMatrix> {
        self.0.elements().to_vec()
    }

    fn random_params(&self, _: &mut ChaCha8Rng) -> Vec<f64> {
        Vec::new()
    }
}

/// Full-rank density matrices `W diag(softmax θ) W^†` with `W` the unitary
/// polar factor of an arbitrary complex matrix.
#[derive(Clone, Copy, Debug)]
pub struct DensityParam {
    pub dim: usize,
}

impl DensityParam {
    pub fn num_params(&self) -> usize {
        self.dim + 2 * self.dim * self.dim
    }

    /// Eigenvalues and the unitary.
    pub fn split(&self, x: &[f64]) -> (Vec<f64>, ComplexMatrix) {
        let d = self.dim;
        let lambda = softmax(&x[..d]);
        let w = IsometryFamily { dim: d, outcomes: d }.isometry(&x[d..]);
        (lambda, w)
    }

    pub fn random(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.dim).map(|_| rng.random::<f64>() - 0.5).collect();
        x.extend(
            IsometryFamily {
                dim: self.dim,
                outcomes: self.dim,
            }
            .random_params(rng),
        );
        x
    }
}

pub fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// `log` of weights, floored so that zero weights stay finite.
pub fn logits(w: &[f64]) -> Vec<f64> {
    w.iter().map(|v| v.max(1e-30).ln()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn state_params_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 2..5 {
            let p = StateParam { dim: d };
            for _ in 0..20 {
                let x = p.random(&mut rng);
                assert_eq!(x.len(), p.num_params());
                let v = p.vector(&x);
                let y = p.params_of(&v);
                let w = p.vector(&y);
                let overlap: C64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                assert!((overlap.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn isometry_family_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (d, n) in [(2, 2), (2, 4), (3, 5), (4, 4)] {
            let f = IsometryFamily::new(d, n);
            let x = f.random_params(&mut rng);
            let m = Povm::new(f.elements(&x)).unwrap();
            assert!(m.completeness_defect() < 1e-12);
            assert_eq!(m.len(), n);
        }
    }

    #[test]
    fn density_param_is_a_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = DensityParam { dim: 3 };
        let (l, w) = p.split(&p.random(&mut rng));
        assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(w.adjoint().matmul(&w).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
    }
}
