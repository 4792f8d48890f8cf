//! Random test instances. Everything takes an explicit RNG so callers control seeding.

use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{ComplexMatrix, C64};
use super::state::DensityMatrix;

pub fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gaussian_c64(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("finite gaussian entries")
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    gaussian_matrix(d, d, rng).hermitian_part()
}

/// Haar-distributed state vector.
pub fn random_state_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| gaussian_c64(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::pure(&random_state_vector(d, rng)).expect("nonzero gaussian vector")
}

/// Full-rank Ginibre density matrix.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let g = gaussian_matrix(d, d, rng);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / tr)).expect("Ginibre matrix is a valid state")
}

/// PSD matrix of the given rank (not normalized).
pub fn random_psd<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(d, rank, rng);
    g.matmul(&g.adjoint())
}

/// Orthonormalizes the columns of `a` (modified Gram-Schmidt, applied twice).
pub fn orthonormalize_columns(a: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = (a.rows(), a.cols());
    let mut cols_v: Vec<Vec<C64>> = (0..cols).map(|j| a.col(j)).collect();
    for _pass in 0..2 {
        for j in 0..cols {
            for k in 0..j {
                let (head, tail) = cols_v.split_at_mut(j);
                let qk = &head[k];
                let vj = &mut tail[0];
                let proj: C64 = qk.iter().zip(vj.iter()).map(|(q, v)| q.conj() * v).sum();
                for (v, q) in vj.iter_mut().zip(qk) {
                    *v -= proj * q;
                }
            }
            let n = cols_v[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for v in cols_v[j].iter_mut() {
                *v /= n;
            }
        }
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for (j, c) in cols_v.iter().enumerate() {
        for i in 0..rows {
            out[(i, j)] = c[i];
        }
    }
    out
}

/// `rows x cols` isometry (`V^dag V = I`) with Gaussian-orthonormalized columns.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(rows >= cols);
    orthonormalize_columns(&gaussian_matrix(rows, cols, rng))
}

pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    random_isometry(d, d, rng)
}
