//! Numerical estimates of the Shannon capacity, the Holevo capacity and the
//! average-input upper bound, plus a deterministic brute-force oracle for
//! qubit channels.
//!
//! All optimizer outputs are values at explicit feasible points, so they are
//! lower bounds on the corresponding suprema.

mod bfgs;
mod blahut;
pub(crate) mod grid;
mod holevo;
pub mod param;
mod shannon;
mod uep;

pub use blahut::{blahut_arimoto, kernel_mutual_info};
pub use grid::qubit_grid_oracle;
pub use holevo::holevo_capacity;
pub use shannon::{optimize_mutual_info, shannon_capacity, shannon_fixed_povm};
pub use uep::uep_bound;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{measured_channel, Povm, QuantumChannel};
use crate::error::{Error, Result};
use crate::info::Ensemble;
use crate::parallel::{map_indexed, Execution};
use crate::qmat::DensityMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    pub ensemble_size_cap: usize,
    pub povm_size_cap: usize,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 500,
            tol: 1e-7,
            seed: 0,
            ensemble_size_cap: 4,
            povm_size_cap: 4,
            execution: Execution::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidArgument("restarts and max_iters must be positive".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.ensemble_size_cap < 2 || self.povm_size_cap < 2 {
            return Err(Error::InvalidArgument(
                "ensemble and POVM size caps must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// Private generator for one restart.
    pub fn restart_rng(&self, restart: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(restart as u64);
        rng
    }
}

#[derive(Clone, Debug)]
pub struct CapacityResult {
    pub value: f64,
    pub argmax_ensemble: Option<Ensemble>,
    pub argmax_povm: Option<Povm>,
    pub argmax_rho: Option<DensityMatrix>,
    pub restarts_used: usize,
    pub converged: bool,
}

/// Runs `cfg.restarts` independent searches and keeps the best; ties go to
/// the lowest restart index.
pub(crate) fn best_of_restarts<T: Send>(
    cfg: &OptimizerConfig,
    run: impl Fn(usize, &mut ChaCha8Rng) -> Result<(f64, T)> + Sync + Send,
) -> Result<(f64, T)> {
    let results = map_indexed(cfg.execution, cfg.restarts, |r| run(r, &mut cfg.restart_rng(r)));
    let mut best: Option<(f64, T)> = None;
    for res in results {
        let (v, t) = res?;
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, t));
        }
    }
    Ok(best.expect("at least one restart"))
}

/// `(sup_E I^q_Φ(E; M), C_Holv(Γ_{Φ,M}))` from two independent optimizers.
pub fn measured_channel_equivalence(ch: &QuantumChannel, m: &Povm, cfg: &OptimizerConfig) -> Result<(f64, f64)> {
    let lhs = shannon_fixed_povm(ch, m, cfg)?.value;
    let rhs = holevo_capacity(&measured_channel(ch, m)?, cfg)?.value;
    Ok((lhs, rhs))
}
