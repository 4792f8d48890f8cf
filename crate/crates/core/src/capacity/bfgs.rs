//! Quasi-Newton ascent with central-difference gradients.

const FD_STEP: f64 = 1e-6;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 50;

#[derive(Clone, Copy, Debug)]
pub(crate) struct LocalOptions {
    pub max_iters: usize,
    /// Stop once an accepted step improves the objective by less than this.
    pub tol: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
}

pub(crate) fn gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = FD_STEP * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizes `f` from `x0`. Every accepted step strictly increases `f`.
pub(crate) fn maximize(f: impl Fn(&[f64]) -> f64, x0: Vec<f64>, opts: LocalOptions) -> LocalResult {
    let n = x0.len();
    let mut x = x0;
    let mut fx = f(&x);
    if n == 0 {
        return LocalResult {
            x,
            value: fx,
            converged: true,
        };
    }
    let mut g = gradient(&f, &x);
    // inverse Hessian of -f
    let mut h = identity(n);
    let mut small_steps = 0;
    for _ in 0..opts.max_iters {
        let mut d = matvec(&h, &g);
        let mut slope = dot(&g, &d);
        if slope <= 0.0 || !slope.is_finite() {
            h = identity(n);
            d = g.clone();
            slope = dot(&g, &d);
        }
        if slope <= 1e-30 {
            return LocalResult {
                x,
                value: fx,
                converged: true,
            };
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let ft = f(&trial);
            if ft.is_finite() && ft >= fx + ARMIJO_C1 * t * slope && ft > fx {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fn_)) = accepted else {
            if h != identity(n) {
                h = identity(n);
                continue;
            }
            return LocalResult {
                x,
                value: fx,
                converged: true,
            };
        };
        let gn = gradient(&f, &xn);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g.iter().zip(&gn).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            bfgs_update(&mut h, &s, &y, sy);
        }
        let gain = fn_ - fx;
        x = xn;
        fx = fn_;
        g = gn;
        if gain < opts.tol {
            small_steps += 1;
            if small_steps >= 2 {
                return LocalResult {
                    x,
                    value: fx,
                    converged: true,
                };
            }
        } else {
            small_steps = 0;
        }
    }
    LocalResult {
        x,
        value: fx,
        converged: false,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn matvec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| dot(&m[i * n..(i + 1) * n], v)).collect()
}

fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = matvec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_peak() {
        let f = |x: &[f64]| -(x[0] - 1.0).powi(2) - 10.0 * (x[1] + 2.0).powi(2) - 0.5 * x[0] * x[1];
        let r = maximize(
            f,
            vec![5.0, 5.0],
            LocalOptions {
                max_iters: 200,
                tol: 1e-14,
            },
        );
        let g = gradient(&f, &r.x);
        assert!(g.iter().all(|v| v.abs() < 1e-6), "{g:?}");
        assert!(r.converged);
    }

    #[test]
    fn rosenbrock_is_monotone() {
        let f = |x: &[f64]| -(1.0 - x[0]).powi(2) - 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = maximize(
            f,
            vec![-1.2, 1.0],
            LocalOptions {
                max_iters: 500,
                tol: 1e-16,
            },
        );
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{:?}", r.x);
        assert!(r.value > f(&[-1.2, 1.0]));
    }
}
