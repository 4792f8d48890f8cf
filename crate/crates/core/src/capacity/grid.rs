use std::f64::consts::PI;

use super::blahut::iterate;
use crate::channel::{bloch_operator, QuantumChannel, QubitElement};
use crate::error::{Error, Result};

const BA_TOL: f64 = 1e-10;
const BA_ITERS: usize = 5_000;
/// Directions in the output simplex used to pick boundary states for
/// three-outcome POVMs.
const SIMPLEX_DIRECTIONS: usize = 12;

fn bloch(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Bloch vectors of the pure-state grid: `θ = πi/g`, `φ = πk/g`.
fn sphere_grid(g: usize) -> Vec<[f64; 3]> {
    let mut pts = vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
    for i in 1..g {
        for k in 0..2 * g {
            pts.push(bloch(PI * i as f64 / g as f64, PI * k as f64 / g as f64));
        }
    }
    pts
}

/// Grid POVMs as lists of `(w0, w)` Bloch pairs.
fn povm_grid(g: usize, arity: usize) -> Vec<Vec<(f64, [f64; 3])>> {
    let half = |n: [f64; 3]| vec![(0.5, n.map(|c| c / 2.0)), (0.5, n.map(|c| -c / 2.0))];
    let mut out = Vec::new();
    if arity == 2 {
        out.push(half([0.0, 0.0, 1.0]));
        for i in 1..=g / 2 {
            for k in 0..2 * g {
                out.push(half(bloch(PI * i as f64 / g as f64, PI * k as f64 / g as f64)));
            }
        }
        return out;
    }
    // trines: unit vectors 120° apart in the plane normal to `m`
    let steps = (g / 3).max(2);
    for i in 0..=g / 2 {
        let ks = if i == 0 { 1 } else { 2 * g };
        for k in 0..ks {
            let m = bloch(PI * i as f64 / g as f64, PI * k as f64 / g as f64);
            let seed = if m[2].abs() < 0.9 {
                [0.0, 0.0, 1.0]
            } else {
                [1.0, 0.0, 0.0]
            };
            let u = normalize(cross(&m, &seed));
            let v = cross(&m, &u);
            for a in 0..steps {
                let alpha = (2.0 * PI / 3.0) * a as f64 / steps as f64;
                let elems = (0..3)
                    .map(|t| {
                        let ang = alpha + 2.0 * PI * t as f64 / 3.0;
                        let n: [f64; 3] = std::array::from_fn(|c| ang.cos() * u[c] + ang.sin() * v[c]);
                        (1.0 / 3.0, n.map(|c| c / 3.0))
                    })
                    .collect();
                out.push(elems);
            }
        }
    }
    out
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(&a, &a).sqrt();
    a.map(|c| c / n)
}

/// Brute-force `max I^q_Φ(E; M)` for a qubit channel over a deterministic
/// grid of projective (`povm_arity = 2`) or trine (`povm_arity = 3`)
/// measurements. For each grid POVM, candidate signal states are the grid
/// states extremal along directions of the outcome simplex; weights come
/// from Blahut–Arimoto. Every value returned is attained by an explicit
/// ensemble and POVM, so the result is a lower bound on the Shannon capacity.
pub fn qubit_grid_oracle(
    ch: &QuantumChannel,
    grid_density: usize,
    ensemble_size: usize,
    povm_arity: usize,
) -> Result<f64> {
    if ch.dim_in() != 2 || ch.dim_out() != 2 {
        return Err(Error::DimensionMismatch {
            context: "grid oracle needs a qubit channel",
            expected: 2,
            found: ch.dim_in().max(ch.dim_out()),
        });
    }
    if !(2..=3).contains(&ensemble_size) || !(2..=3).contains(&povm_arity) {
        return Err(Error::InvalidArgument(
            "ensemble size and POVM arity must be 2 or 3".into(),
        ));
    }
    if grid_density < 2 {
        return Err(Error::InvalidArgument("grid density must be at least 2".into()));
    }
    let states = sphere_grid(grid_density);
    let directions: Vec<Vec<f64>> = if povm_arity == 2 {
        vec![vec![1.0, -1.0], vec![-1.0, 1.0]]
    } else {
        let u1 = [1.0, -1.0, 0.0].map(|c: f64| c / 2f64.sqrt());
        let u2 = [1.0, 1.0, -2.0].map(|c: f64| c / 6f64.sqrt());
        (0..SIMPLEX_DIRECTIONS)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / SIMPLEX_DIRECTIONS as f64;
                (0..3).map(|b| a.cos() * u1[b] + a.sin() * u2[b]).collect()
            })
            .collect()
    };
    let mut best: f64 = 0.0;
    for povm in povm_grid(grid_density, povm_arity) {
        // p(b|r) = f0_b + f_b · r for the dual elements
        let duals: Vec<QubitElement> = povm
            .iter()
            .map(|(w0, w)| QubitElement::from_matrix(&ch.dual_apply_unchecked(&bloch_operator(*w0, *w))))
            .collect();
        let row = |r: &[f64; 3]| -> Vec<f64> { duals.iter().map(|f| (f.w0 + dot(&f.w, r)).max(0.0)).collect() };
        let mut picks: Vec<usize> = directions
            .iter()
            .map(|c| {
                let lin: [f64; 3] = std::array::from_fn(|i| duals.iter().zip(c).map(|(f, cb)| cb * f.w[i]).sum());
                let mut arg = 0;
                let mut top = f64::NEG_INFINITY;
                for (s, r) in states.iter().enumerate() {
                    let v = dot(&lin, r);
                    if v > top + 1e-15 {
                        top = v;
                        arg = s;
                    }
                }
                arg
            })
            .collect();
        picks.sort_unstable();
        picks.dedup();
        let rows: Vec<Vec<f64>> = picks.iter().map(|&s| row(&states[s])).collect();
        let value = if ensemble_size >= povm_arity || rows.len() <= ensemble_size {
            iterate(&rows, BA_TOL, BA_ITERS, |_| ()).0
        } else {
            let mut v: f64 = 0.0;
            for a in 0..rows.len() {
                for b in a + 1..rows.len() {
                    v = v.max(iterate(&[rows[a].clone(), rows[b].clone()], BA_TOL, BA_ITERS, |_| ()).0);
                }
            }
            v
        };
        best = best.max(value);
    }
    Ok(best)
}
