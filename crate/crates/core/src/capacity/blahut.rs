use crate::error::{Error, Result};
use crate::qmat::ProbabilityVector;

const KERNEL_TOL: f64 = 1e-9;
const LN2: f64 = std::f64::consts::LN_2;

/// `D(p(·|j) ‖ q)` in nats for every row.
fn divergences(kernel: &[Vec<f64>], q: &[f64]) -> Vec<f64> {
    kernel
        .iter()
        .map(|row| {
            row.iter()
                .zip(q)
                .filter(|(p, _)| **p > 0.0)
                .map(|(p, qb)| p * (p / qb).ln())
                .sum()
        })
        .collect()
}

fn output(kernel: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; kernel[0].len()];
    for (row, wj) in kernel.iter().zip(w) {
        for (qb, p) in q.iter_mut().zip(row) {
            *qb += wj * p;
        }
    }
    q
}

/// Mutual information in bits of input weights `w` through kernel `p(b|j)`.
pub fn kernel_mutual_info(kernel: &[Vec<f64>], w: &[f64]) -> f64 {
    let q = output(kernel, w);
    let d = divergences(kernel, &q);
    w.iter()
        .zip(&d)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / LN2
}

/// Capacity in bits of the classical channel `p(b|j)` and the optimal input
/// weights. Iterates until the upper/lower bound gap drops below `tol` or
/// `max_iters` is reached.
pub fn blahut_arimoto(kernel: &[Vec<f64>], tol: f64, max_iters: usize) -> Result<(f64, ProbabilityVector)> {
    validate_kernel(kernel)?;
    let (value, w, _) = iterate(kernel, tol, max_iters, |_| ());
    Ok((value, ProbabilityVector::normalized(w)?))
}

pub(crate) fn validate_kernel(kernel: &[Vec<f64>]) -> Result<()> {
    let width = kernel.first().map_or(0, Vec::len);
    if kernel.is_empty() || width == 0 {
        return Err(Error::InvalidArgument(
            "kernel needs at least one row and column".into(),
        ));
    }
    for (j, row) in kernel.iter().enumerate() {
        if row.len() != width {
            return Err(Error::DimensionMismatch {
                context: "kernel row length",
                expected: width,
                found: row.len(),
            });
        }
        if row.iter().any(|p| !p.is_finite() || *p < -KERNEL_TOL) {
            return Err(Error::InvalidProbability(format!(
                "kernel row {j} has a negative entry"
            )));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > KERNEL_TOL {
            return Err(Error::InvalidProbability(format!("kernel row {j} sums to {s}")));
        }
    }
    Ok(())
}

/// Runs the iteration on a kernel assumed valid (small negative entries are
/// clipped), calling `observe` with every lower bound in bits.
pub(crate) fn iterate(
    kernel: &[Vec<f64>],
    tol: f64,
    max_iters: usize,
    observe: impl FnMut(f64),
) -> (f64, Vec<f64>, bool) {
    let n = kernel.len();
    iterate_from(kernel, vec![1.0 / n as f64; n], tol, max_iters, observe)
}

/// [`iterate`] started from the weights `w` instead of the uniform ones.
/// Zero weights stay zero under the update.
pub(crate) fn iterate_from(
    kernel: &[Vec<f64>],
    mut w: Vec<f64>,
    tol: f64,
    max_iters: usize,
    mut observe: impl FnMut(f64),
) -> (f64, Vec<f64>, bool) {
    let kernel: Vec<Vec<f64>> = kernel
        .iter()
        .map(|r| {
            let r: Vec<f64> = r.iter().map(|p| p.max(0.0)).collect();
            let s: f64 = r.iter().sum();
            r.into_iter().map(|p| p / s).collect()
        })
        .collect();
    let mut best = 0.0;
    for _ in 0..max_iters.max(1) {
        let q = output(&kernel, &w);
        let d = divergences(&kernel, &q);
        let lower = w.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / LN2;
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / LN2;
        observe(lower);
        best = lower;
        if upper - lower < tol {
            return (lower, w, true);
        }
        let mut z = 0.0;
        for (wj, dj) in w.iter_mut().zip(&d) {
            *wj *= dj.exp();
            z += *wj;
        }
        w.iter_mut().for_each(|x| *x /= z);
    }
    let fin = kernel_mutual_info(&kernel, &w);
    (fin.max(best), w, false)
}
