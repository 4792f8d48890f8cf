use rand_chacha::ChaCha8Rng;

use super::bfgs::{maximize, LocalOptions};
use super::param::{DensityParam, IsometryFamily, PovmFamily};
use super::{best_of_restarts, CapacityResult, OptimizerConfig};
use crate::channel::{Povm, QuantumChannel};
use crate::error::Result;
use crate::info::{uep_objective, PROB_ZERO};
use crate::qmat::{entropy_bits, entropy_psd, ComplexMatrix, DensityMatrix};

struct Search<'a> {
    ch: &'a QuantumChannel,
    rho: DensityParam,
    povm: IsometryFamily,
}

impl Search<'_> {
    fn state(&self, x: &[f64]) -> (Vec<f64>, ComplexMatrix, ComplexMatrix) {
        let (lambda, w) = self.rho.split(x);
        let wa = w.adjoint();
        let diag = |f: &dyn Fn(f64) -> f64| {
            let v: Vec<f64> = lambda.iter().map(|l| f(*l)).collect();
            w.matmul(&ComplexMatrix::from_real_diag(&v)).matmul(&wa)
        };
        let rho = diag(&|l| l);
        let root = diag(&|l| l.sqrt());
        (lambda, rho, root)
    }

    fn value(&self, x: &[f64]) -> f64 {
        let nr = self.rho.num_params();
        let (lambda, _, root) = self.state(&x[..nr]);
        let mut tau = Vec::with_capacity(self.povm.outcomes);
        let mut blocks = 0.0;
        for e in self.povm.elements(&x[nr..]) {
            let f = self.ch.dual_apply_unchecked(&e);
            let g = root.matmul(&f).matmul(&root).hermitian_part();
            let t = g.trace().re;
            tau.push(t);
            if t > PROB_ZERO {
                blocks += entropy_psd(&g);
            }
        }
        entropy_bits(&lambda) - blocks + entropy_bits(&tau)
    }

    fn run(&self, cfg: &OptimizerConfig, rng: &mut ChaCha8Rng) -> (f64, Vec<f64>, bool) {
        let mut x = self.rho.random(rng);
        x.extend(self.povm.random_params(rng));
        let r = maximize(
            |x| self.value(x),
            x,
            LocalOptions {
                max_iters: cfg.max_iters.max(1) * 2,
                tol: cfg.tol * 1e-3,
            },
        );
        (r.value, r.x, r.converged)
    }
}

/// Estimate of `sup_{ρ, M} [S(ρ) − Σ_b S(√ρ Φ̂(E_b) √ρ) + S(τ)]` over
/// full-rank `ρ` and rank-one POVMs with `cfg.povm_size_cap` outcomes.
pub fn uep_bound(ch: &QuantumChannel, cfg: &OptimizerConfig) -> Result<CapacityResult> {
    cfg.validate()?;
    let search = Search {
        ch,
        rho: DensityParam { dim: ch.dim_in() },
        povm: IsometryFamily::new(ch.dim_out(), cfg.povm_size_cap),
    };
    let (_, (x, converged)) = best_of_restarts(cfg, |_, rng| {
        let (v, x, c) = search.run(cfg, rng);
        Ok((v, (x, c)))
    })?;
    let nr = search.rho.num_params();
    let (_, rho, _) = search.state(&x[..nr]);
    let rho = DensityMatrix::with_tolerance(rho, 1e-9)?;
    let m = Povm::new(search.povm.elements(&x[nr..]))?;
    let value = uep_objective(ch, &rho, &m)?;
    Ok(CapacityResult {
        value,
        argmax_ensemble: None,
        argmax_povm: Some(m),
        argmax_rho: Some(rho),
        restarts_used: cfg.restarts,
        converged,
    })
}
