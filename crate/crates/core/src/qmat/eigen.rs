//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Dimensions in this crate never exceed 16, where Jacobi is both accurate
//! (eigenvectors orthonormal to machine precision) and fast enough.

use super::matrix::{ComplexMatrix, C64, ZERO};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Hermitian part of `m` is decomposed; the anti-Hermitian part is ignored.
    pub fn new(m: &ComplexMatrix) -> Self {
        assert!(m.is_square(), "eigendecomposition needs a square matrix");
        let n = m.rows();
        let mut a = m.hermitian_part();
        let mut v = ComplexMatrix::identity(n);

        if n > 1 {
            let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
            for _ in 0..MAX_SWEEPS {
                let off: f64 = (0..n)
                    .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                    .map(|(i, j)| a[(i, j)].norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                if off <= 1e-15 * scale {
                    break;
                }
                for p in 0..n - 1 {
                    for q in p + 1..n {
                        rotate(&mut a, &mut v, p, q);
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
        let values = order.iter().map(|&i| diag[i]).collect();
        let mut vectors = ComplexMatrix::zeros(n, n);
        for (new_j, &old_j) in order.iter().enumerate() {
            for i in 0..n {
                vectors[(i, new_j)] = v[(i, old_j)];
            }
        }
        Self { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(Λ) V^dag`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            let fk = f(self.values[k]);
            if fk == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * fk;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// One Jacobi step zeroing `a[p][q]`; `a <- U^dag a U`, `v <- v U`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U = D R with D = diag(1, conj(phase)) on (p, q).
    let upp = C64::new(c, 0.0);
    let upq = C64::new(s, 0.0);
    let uqp = phase.conj() * (-s);
    let uqq = phase.conj() * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * upp + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * upp + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::random::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_input_is_sorted() {
        let m = ComplexMatrix::from_real_diag(&[3.0, -1.0, 2.0]);
        let e = HermitianEigen::new(&m);
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_y_eigenvalues() {
        let y = &crate::qmat::pauli()[1];
        let e = HermitianEigen::new(y);
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn round_trip_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 1..=16 {
            let m = random_hermitian(d, &mut rng);
            let e = HermitianEigen::new(&m);
            let back = e.reconstruct_with(|x| x);
            assert!(back.max_abs_diff(&m) < 1e-10, "d={d}");
            let vv = e.vectors.adjoint().matmul(&e.vectors);
            assert!(vv.max_abs_diff(&ComplexMatrix::identity(d)) < 1e-12);
        }
    }
}
