use rand_chacha::ChaCha8Rng;

use super::bfgs::{maximize, LocalOptions};
use super::blahut::{iterate, iterate_from, kernel_mutual_info};
use super::param::{logits, softmax, FixedFamily, IsometryFamily, PovmFamily, StateParam};
use super::{best_of_restarts, CapacityResult, OptimizerConfig};
use crate::channel::{Povm, QuantumChannel};
use crate::error::{Error, Result};
use crate::info::{mutual_info_q_channel, Ensemble};
use crate::qmat::{ComplexMatrix, DensityMatrix, ProbabilityVector, C64};

const MAX_SWEEPS: usize = 200;
const POLISH_TOL: f64 = 1e-13;
/// Alternation stops once a sweep gains less than this; the joint polish finishes.
const SWEEP_TOL: f64 = 1e-5;
/// Weight updates inside the alternation are warm-started and capped; the
/// uniform share lets rows with vanished weight come back.
const WARM_ITERS: usize = 500;
const WARM_UNIFORM: f64 = 1e-2;
const BA_ITERS: usize = 100_000;
/// Signals below this weight are candidates for replacement.
const DEAD_WEIGHT: f64 = 1e-6;
const DUPLICATE_TOL: f64 = 1e-6;

pub(crate) fn quad(m: &ComplexMatrix, v: &[C64]) -> f64 {
    let d = v.len();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        let mut row = C64::new(0.0, 0.0);
        for k in 0..d {
            row += m[(i, k)] * v[k];
        }
        acc += v[i].conj() * row;
    }
    acc.re
}

pub(crate) fn pure_output(ch: &QuantumChannel, v: &[C64]) -> ComplexMatrix {
    ch.apply_matrix(&ComplexMatrix::outer(v))
}

struct Search<'a, F: PovmFamily> {
    ch: &'a QuantumChannel,
    family: &'a F,
    sp: StateParam,
    states: usize,
}

#[derive(Clone)]
struct Point {
    xs: Vec<f64>,
    xp: Vec<f64>,
    w: Vec<f64>,
    value: f64,
    converged: bool,
}

impl<F: PovmFamily> Search<'_, F> {
    fn vectors(&self, xs: &[f64]) -> Vec<Vec<C64>> {
        xs.chunks(self.sp.num_params()).map(|c| self.sp.vector(c)).collect()
    }

    fn duals(&self, xp: &[f64]) -> Vec<ComplexMatrix> {
        self.family.dual_elements(self.ch, xp)
    }

    fn kernel_from_duals(vs: &[Vec<C64>], duals: &[ComplexMatrix]) -> Vec<Vec<f64>> {
        vs.iter().map(|v| duals.iter().map(|f| quad(f, v)).collect()).collect()
    }

    fn kernel(&self, xs: &[f64], xp: &[f64]) -> Vec<Vec<f64>> {
        Self::kernel_from_duals(&self.vectors(xs), &self.duals(xp))
    }

    fn warm_capacity(&self, kernel: &[Vec<f64>], w: &[f64], tol: f64, max_iters: usize) -> (f64, Vec<f64>) {
        let u = WARM_UNIFORM / w.len() as f64;
        let w0 = w.iter().map(|x| (1.0 - WARM_UNIFORM) * x + u).collect();
        let (v, w, _) = iterate_from(kernel, w0, tol, max_iters, |_| ());
        (v, w)
    }

    fn capacity(&self, kernel: &[Vec<f64>], tol: f64) -> (f64, Vec<f64>) {
        let (v, w, _) = iterate(kernel, tol, BA_ITERS, |_| ());
        (v, w)
    }

    /// Replaces signals that carry no weight or duplicate another signal by the input whose outcome
    /// distribution diverges most from the current output distribution `q`.
    /// A divergence above the current value means adding that input raises
    /// the capacity of the kernel.
    fn reseed(
        &self,
        xs: &mut [f64],
        xp: &[f64],
        w: &[f64],
        value: f64,
        cfg: &OptimizerConfig,
        rng: &mut ChaCha8Rng,
    ) -> bool {
        let k = self.sp.num_params();
        let duals = self.duals(xp);
        let kernel = Self::kernel_from_duals(&self.vectors(xs), &duals);
        // zero weight, or an outcome row already present earlier in the list
        let dead: Vec<usize> = (0..self.states)
            .filter(|&j| {
                w[j] < DEAD_WEIGHT
                    || (0..j).any(|i| {
                        kernel[i]
                            .iter()
                            .zip(&kernel[j])
                            .all(|(a, b)| (a - b).abs() < DUPLICATE_TOL)
                    })
            })
            .collect();
        if dead.is_empty() {
            return false;
        }
        let q: Vec<f64> = (0..duals.len())
            .map(|b| kernel.iter().zip(w).map(|(row, p)| p * row[b]).sum())
            .collect();
        let divergence = |x: &[f64]| -> f64 {
            let v = self.sp.vector(x);
            duals
                .iter()
                .zip(&q)
                .map(|(f, qb)| {
                    let p = quad(f, &v);
                    if p > 0.0 {
                        p * (p / qb.max(1e-300)).log2()
                    } else {
                        0.0
                    }
                })
                .sum()
        };
        let local = LocalOptions {
            max_iters: cfg.max_iters,
            tol: cfg.tol * 1e-2,
        };
        let mut changed = false;
        for j in dead {
            let r = maximize(divergence, self.sp.random(rng), local);
            if r.value > value + cfg.tol {
                xs[j * k..(j + 1) * k].copy_from_slice(&r.x);
                changed = true;
            }
        }
        changed
    }

    fn run(&self, cfg: &OptimizerConfig, rng: &mut ChaCha8Rng) -> Point {
        let (ba_loose, ba_tol) = (cfg.tol, cfg.tol * 1e-2);
        let local = LocalOptions {
            max_iters: cfg.max_iters,
            tol: cfg.tol * 1e-2,
        };
        let mut xs: Vec<f64> = (0..self.states).flat_map(|_| self.sp.random(rng)).collect();
        let mut xp = self.family.random_params(rng);
        let (mut value, mut w) = self.capacity(&self.kernel(&xs, &xp), ba_loose);
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let duals = self.duals(&xp);
            let r = maximize(
                |x| kernel_mutual_info(&Self::kernel_from_duals(&self.vectors(x), &duals), &w),
                xs.clone(),
                local,
            );
            xs = r.x;
            if self.family.num_params() > 0 {
                let vs = self.vectors(&xs);
                let r = maximize(
                    |x| kernel_mutual_info(&Self::kernel_from_duals(&vs, &self.duals(x)), &w),
                    xp.clone(),
                    local,
                );
                xp = r.x;
            }
            let (mut v, mut nw) = self.warm_capacity(&self.kernel(&xs, &xp), &w, ba_loose, WARM_ITERS);
            let mut gain = v - value;
            if self.reseed(&mut xs, &xp, &nw, v, cfg, rng) {
                (v, nw) = self.warm_capacity(&self.kernel(&xs, &xp), &nw, ba_loose, WARM_ITERS);
                gain = gain.max(SWEEP_TOL.max(cfg.tol));
            }
            if v > value {
                value = v;
            }
            w = nw;
            if gain < SWEEP_TOL.max(cfg.tol) {
                converged = true;
                break;
            }
        }
        // joint polish over states, POVM and weight logits
        let (ns, np) = (xs.len(), xp.len());
        let mut x = xs.clone();
        x.extend(&xp);
        x.extend(logits(&w));
        let fixed = (np == 0).then(|| self.duals(&xp));
        let r = maximize(
            |x| {
                let owned;
                let duals = match &fixed {
                    Some(d) => d,
                    None => {
                        owned = self.duals(&x[ns..ns + np]);
                        &owned
                    }
                };
                kernel_mutual_info(
                    &Self::kernel_from_duals(&self.vectors(&x[..ns]), duals),
                    &softmax(&x[ns + np..]),
                )
            },
            x,
            LocalOptions {
                max_iters: cfg.max_iters,
                tol: POLISH_TOL,
            },
        );
        let (pxs, pxp) = (r.x[..ns].to_vec(), r.x[ns..ns + np].to_vec());
        let (v, pw) = self.warm_capacity(&self.kernel(&pxs, &pxp), &softmax(&r.x[ns + np..]), ba_tol, BA_ITERS);
        if v >= value {
            Point {
                xs: pxs,
                xp: pxp,
                w: pw,
                value: v,
                converged,
            }
        } else {
            Point {
                xs,
                xp,
                w,
                value,
                converged,
            }
        }
    }

    fn result(&self, p: Point, cfg: &OptimizerConfig) -> Result<CapacityResult> {
        let states = self
            .vectors(&p.xs)
            .iter()
            .map(|v| DensityMatrix::pure(v))
            .collect::<Result<Vec<_>>>()?;
        let e = Ensemble::new(ProbabilityVector::normalized(p.w)?, states)?;
        let m = Povm::new(self.family.elements(&p.xp))?;
        let value = mutual_info_q_channel(self.ch, &e, &m)?;
        Ok(CapacityResult {
            value,
            argmax_ensemble: Some(e),
            argmax_povm: Some(m),
            argmax_rho: None,
            restarts_used: cfg.restarts,
            converged: p.converged,
        })
    }
}

/// Best `I^q_Φ(E; M)` over ensembles of `states` pure states and POVMs from
/// `family`: alternating state / POVM / weight updates, then a joint polish.
pub fn optimize_mutual_info<F: PovmFamily>(
    ch: &QuantumChannel,
    family: &F,
    states: usize,
    cfg: &OptimizerConfig,
) -> Result<CapacityResult> {
    cfg.validate()?;
    if family.dim() != ch.dim_out() {
        return Err(Error::DimensionMismatch {
            context: "POVM family vs channel output",
            expected: ch.dim_out(),
            found: family.dim(),
        });
    }
    let search = Search {
        ch,
        family,
        sp: StateParam { dim: ch.dim_in() },
        states: states.max(1),
    };
    let (_, best) = best_of_restarts(cfg, |_, rng| {
        let p = search.run(cfg, rng);
        Ok((p.value, p))
    })?;
    search.result(best, cfg)
}

/// Shannon capacity estimate: product inputs, product measurements.
pub fn shannon_capacity(ch: &QuantumChannel, cfg: &OptimizerConfig) -> Result<CapacityResult> {
    let family = IsometryFamily::new(ch.dim_out(), cfg.povm_size_cap);
    optimize_mutual_info(ch, &family, cfg.ensemble_size_cap, cfg)
}

/// `sup_E I^q_Φ(E; M)` for a fixed POVM.
pub fn shannon_fixed_povm(ch: &QuantumChannel, m: &Povm, cfg: &OptimizerConfig) -> Result<CapacityResult> {
    optimize_mutual_info(ch, &FixedFamily(m.clone()), cfg.ensemble_size_cap.max(m.len()), cfg)
}

#[cfg(test)]
mod tests {
    use super::super::tests::quick;
    use super::*;
    use crate::capacity::{holevo_capacity, uep_bound};

    fn h2(p: f64) -> f64 {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }

    #[test]
    fn closed_form_channels() {
        let cfg = quick();
        let r = shannon_capacity(&QuantumChannel::identity(2), &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-3, "{}", r.value);
        let r = shannon_capacity(&QuantumChannel::completely_noisy(2), &cfg).unwrap();
        assert!(r.value.abs() < 1e-6);
        let r = shannon_capacity(&QuantumChannel::bit_flip(0.1).unwrap(), &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
        let r = shannon_capacity(&crate::capacity::grid::tests::bsc(0.1), &cfg).unwrap();
        assert!((r.value - (1.0 - h2(0.1))).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn argmax_reproduces_value() {
        let cfg = quick();
        let ch = QuantumChannel::random(2, 3, 17).unwrap();
        let r = shannon_capacity(&ch, &cfg).unwrap();
        let again = mutual_info_q_channel(
            &ch,
            r.argmax_ensemble.as_ref().unwrap(),
            r.argmax_povm.as_ref().unwrap(),
        )
        .unwrap();
        assert!((again - r.value).abs() < 1e-8);
    }

    #[test]
    fn ordering_on_random_channels() {
        let cfg = quick();
        for seed in 0..4 {
            let ch = QuantumChannel::random(2, 1 + seed as usize, 100 + seed).unwrap();
            let s = shannon_capacity(&ch, &cfg).unwrap().value;
            let h = holevo_capacity(&ch, &cfg).unwrap().value;
            let u = uep_bound(&ch, &cfg).unwrap().value;
            assert!(s <= h + 1e-4, "seed {seed}: shannon {s} holevo {h}");
            assert!(s <= u + 1e-4, "seed {seed}: shannon {s} uep {u}");
        }
    }
}
