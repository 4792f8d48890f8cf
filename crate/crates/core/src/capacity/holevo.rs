use rand_chacha::ChaCha8Rng;

use super::bfgs::{maximize, LocalOptions};
use super::param::{logits, softmax, StateParam};
use super::shannon::pure_output;
use super::{best_of_restarts, CapacityResult, OptimizerConfig};
use crate::channel::QuantumChannel;
use crate::error::Result;
use crate::info::{holevo_quantity, Ensemble};
use crate::qmat::{entropy_psd, ComplexMatrix, DensityMatrix, HermitianEigen, ProbabilityVector, C64};

const MAX_SWEEPS: usize = 200;
const WEIGHT_ITERS: usize = 2000;
const POLISH_TOL: f64 = 1e-13;

fn chi(outputs: &[ComplexMatrix], entropies: &[f64], w: &[f64]) -> f64 {
    let d = outputs[0].rows();
    let mut avg = ComplexMatrix::zeros(d, d);
    for (s, p) in outputs.iter().zip(w) {
        avg += &s.scale(*p);
    }
    entropy_psd(&avg) - w.iter().zip(entropies).map(|(p, s)| p * s).sum::<f64>()
}

/// `D(σ_j ‖ σ̄)` in bits for every signal; supports are not checked, a
/// missing direction costs `log₂` of a tiny floor instead of infinity.
fn divergences(outputs: &[ComplexMatrix], entropies: &[f64], w: &[f64]) -> Vec<f64> {
    let d = outputs[0].rows();
    let mut avg = ComplexMatrix::zeros(d, d);
    for (s, p) in outputs.iter().zip(w) {
        avg += &s.scale(*p);
    }
    let log_avg = HermitianEigen::new(&avg).reconstruct_with(|l| l.max(1e-300).log2());
    outputs
        .iter()
        .zip(entropies)
        .map(|(s, h)| -h - s.expectation(&log_avg))
        .collect()
}

/// Exponentiated-gradient ascent on the weights with backtracking; stops when
/// `max_j D(σ_j‖σ̄) − χ` (an upper bound on the remaining gain) is below `tol`.
fn optimize_weights(outputs: &[ComplexMatrix], entropies: &[f64], mut w: Vec<f64>, tol: f64) -> (f64, Vec<f64>) {
    let mut value = chi(outputs, entropies, &w);
    let mut eta = 1.0;
    for _ in 0..WEIGHT_ITERS {
        let g = divergences(outputs, entropies, &w);
        let top = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if top - value < tol {
            break;
        }
        let mut moved = false;
        for _ in 0..60 {
            let mut trial: Vec<f64> = w.iter().zip(&g).map(|(p, gj)| p * (eta * (gj - top)).exp2()).collect();
            let z: f64 = trial.iter().sum();
            trial.iter_mut().for_each(|p| *p /= z);
            let v = chi(outputs, entropies, &trial);
            if v > value {
                w = trial;
                value = v;
                moved = true;
                eta *= 2.0;
                break;
            }
            eta *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (value, w)
}

struct Search<'a> {
    ch: &'a QuantumChannel,
    sp: StateParam,
    states: usize,
}

struct Point {
    xs: Vec<f64>,
    w: Vec<f64>,
    value: f64,
    converged: bool,
}

impl Search<'_> {
    fn outputs(&self, xs: &[f64]) -> (Vec<ComplexMatrix>, Vec<f64>) {
        let outs: Vec<ComplexMatrix> = xs
            .chunks(self.sp.num_params())
            .map(|c| pure_output(self.ch, &self.sp.vector(c)))
            .collect();
        let ent = outs.iter().map(entropy_psd).collect();
        (outs, ent)
    }

    fn value(&self, xs: &[f64], w: &[f64]) -> f64 {
        let (o, e) = self.outputs(xs);
        chi(&o, &e, w)
    }

    fn run(&self, cfg: &OptimizerConfig, rng: &mut ChaCha8Rng) -> Point {
        let weight_tol = cfg.tol * 1e-2;
        let local = LocalOptions {
            max_iters: cfg.max_iters,
            tol: cfg.tol * 1e-2,
        };
        let mut xs: Vec<f64> = (0..self.states).flat_map(|_| self.sp.random(rng)).collect();
        let (o, e) = self.outputs(&xs);
        let (mut value, mut w) = optimize_weights(&o, &e, vec![1.0 / self.states as f64; self.states], weight_tol);
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let r = maximize(|x| self.value(x, &w), xs.clone(), local);
            xs = r.x;
            let (o, e) = self.outputs(&xs);
            let (v, nw) = optimize_weights(&o, &e, w, weight_tol);
            w = nw;
            let gain = v - value;
            value = value.max(v);
            if gain < cfg.tol {
                converged = true;
                break;
            }
        }
        let ns = xs.len();
        let mut x = xs.clone();
        x.extend(logits(&w));
        let r = maximize(
            |x| self.value(&x[..ns], &softmax(&x[ns..])),
            x,
            LocalOptions {
                max_iters: cfg.max_iters,
                tol: POLISH_TOL,
            },
        );
        let pxs = r.x[..ns].to_vec();
        let (o, e) = self.outputs(&pxs);
        let (v, pw) = optimize_weights(&o, &e, softmax(&r.x[ns..]), weight_tol);
        if v >= value {
            Point {
                xs: pxs,
                w: pw,
                value: v,
                converged,
            }
        } else {
            Point {
                xs,
                w,
                value,
                converged,
            }
        }
    }
}

/// Holevo capacity estimate over ensembles of at most
/// `cfg.ensemble_size_cap` pure states.
pub fn holevo_capacity(ch: &QuantumChannel, cfg: &OptimizerConfig) -> Result<CapacityResult> {
    cfg.validate()?;
    let search = Search {
        ch,
        sp: StateParam { dim: ch.dim_in() },
        states: cfg.ensemble_size_cap,
    };
    let (_, best) = best_of_restarts(cfg, |_, rng| {
        let p = search.run(cfg, rng);
        Ok((p.value, p))
    })?;
    let states = best
        .xs
        .chunks(search.sp.num_params())
        .map(|c| {
            let v: Vec<C64> = search.sp.vector(c);
            DensityMatrix::pure(&v)
        })
        .collect::<Result<Vec<_>>>()?;
    let e = Ensemble::new(ProbabilityVector::normalized(best.w)?, states)?;
    let value = holevo_quantity(ch, &e)?;
    Ok(CapacityResult {
        value,
        argmax_ensemble: Some(e),
        argmax_povm: None,
        argmax_rho: None,
        restarts_used: cfg.restarts,
        converged: best.converged,
    })
}
