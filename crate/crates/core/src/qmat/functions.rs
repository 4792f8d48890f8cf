use super::eigen::HermitianEigen;
use super::matrix::{ComplexMatrix, ZERO};
use super::state::{DensityMatrix, ProbabilityVector, PSD_TOL};
use crate::error::{Error, Result};

/// Eigenvalues at or below this are treated as exact zeros before logs.
pub const EIG_ZERO: f64 = 1e-12;
/// Largest weight an eigenvector of the first relative-entropy argument may
/// carry outside the support of the second before the value is declared infinite.
pub const SUPPORT_LEAK_TOL: f64 = 1e-8;
/// Eigenvalues of the first relative-entropy argument above this are support-checked.
pub const SUPPORT_CHECK_EIG: f64 = 1e-10;

#[inline]
fn xlog2x(x: f64) -> f64 {
    if x <= EIG_ZERO {
        0.0
    } else {
        x * x.log2()
    }
}

/// `-Σ p log₂ p` over raw weights, `0 log 0 = 0`. Weights are not renormalized.
pub fn entropy_bits(weights: &[f64]) -> f64 {
    -weights.iter().map(|&p| xlog2x(p)).sum::<f64>()
}

pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    entropy_bits(p.as_slice())
}

/// `-Tr X log₂ X` for a PSD (not necessarily unit-trace) matrix.
pub fn entropy_psd(m: &ComplexMatrix) -> f64 {
    entropy_bits(&HermitianEigen::new(m).values)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_psd(rho.as_matrix())
}

fn checked_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "square matrix expected",
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let e = HermitianEigen::new(m);
    if e.min_value() < -PSD_TOL {
        return Err(Error::NotPositive {
            min_eigenvalue: e.min_value(),
        });
    }
    Ok(e)
}

/// `Tr[P log₂ P − P log₂ Q]` for PSD `P`, `Q`.
///
/// Fails with [`Error::SupportViolation`] naming the eigenvector of `P` (in
/// ascending eigenvalue order) that is not supported by `Q`.
pub fn relative_entropy(p: &ComplexMatrix, q: &ComplexMatrix) -> Result<f64> {
    if p.rows() != q.rows() {
        return Err(Error::DimensionMismatch {
            context: "relative entropy operands",
            expected: p.rows(),
            found: q.rows(),
        });
    }
    let ep = checked_eigen(p)?;
    let eq = checked_eigen(q)?;
    let n = p.rows();

    // overlap[i][k] = |<p_i|q_k>|²
    let overlap = ep.vectors.adjoint().matmul(&eq.vectors);
    let mut cross = 0.0;
    for i in 0..n {
        let lam = ep.values[i];
        if lam <= EIG_ZERO {
            continue;
        }
        let mut leak = 0.0;
        for k in 0..n {
            let w = overlap[(i, k)].norm_sqr();
            let mu = eq.values[k];
            if mu <= EIG_ZERO {
                leak += w;
            } else {
                cross += lam * w * mu.log2();
            }
        }
        if lam > SUPPORT_CHECK_EIG && leak > SUPPORT_LEAK_TOL {
            return Err(Error::SupportViolation {
                index: i,
                leakage: leak,
            });
        }
    }
    let self_term: f64 = ep.values.iter().map(|&l| xlog2x(l)).sum();
    Ok(self_term - cross)
}

pub fn matrix_sqrt(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = checked_eigen(p)?;
    Ok(e.reconstruct_with(|x| x.max(0.0).sqrt()))
}

/// Pseudo-inverse square root on the support of `p`.
pub fn matrix_pinv_sqrt(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = checked_eigen(p)?;
    Ok(e.reconstruct_with(|x| if x > EIG_ZERO { 1.0 / x.sqrt() } else { 0.0 }))
}

/// Orthogonal projector onto eigenvectors with eigenvalue above [`EIG_ZERO`].
pub fn support_projector(p: &ComplexMatrix) -> ComplexMatrix {
    HermitianEigen::new(p).reconstruct_with(|x| if x > EIG_ZERO { 1.0 } else { 0.0 })
}

/// Reduced matrix on the factors listed in `keep` (0-based, any order; the
/// result keeps the original factor order).
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::DimensionMismatch {
            context: "partial trace operand vs product of factor dimensions",
            expected: total,
            found: m.rows(),
        });
    }
    if dims.contains(&0) {
        return Err(Error::InvalidArgument("factor dimensions must be positive".into()));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::InvalidArgument(format!(
            "kept factor {bad} out of range for {} factors",
            dims.len()
        )));
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|i| keep.contains(i)).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kdims: Vec<usize> = kept.iter().map(|&i| dims[i]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let kd: usize = kdims.iter().product();
    let td: usize = tdims.iter().product();

    // strides[f] = weight of factor f's digit in the full index
    let mut strides = vec![1usize; dims.len()];
    for f in (0..dims.len().saturating_sub(1)).rev() {
        strides[f] = strides[f + 1] * dims[f + 1];
    }
    let offset = |factors: &[usize], fdims: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for pos in (0..factors.len()).rev() {
            off += (idx % fdims[pos]) * strides[factors[pos]];
            idx /= fdims[pos];
        }
        off
    };
    let kofs: Vec<usize> = (0..kd).map(|i| offset(&kept, &kdims, i)).collect();
    let tofs: Vec<usize> = (0..td).map(|t| offset(&traced, &tdims, t)).collect();

    let mut out = ComplexMatrix::zeros(kd, kd);
    for i in 0..kd {
        for j in 0..kd {
            let mut acc = ZERO;
            for &t in &tofs {
                acc += m[(kofs[i] + t, kofs[j] + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}
