use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{chain_identity_check, classical_chain, AdaptiveStrategy, ConditionalPovm, StrategyNode, MAX_DEPTH};
use crate::capacity::param::PovmFamily;
use crate::capacity::{optimize_mutual_info, shannon_capacity, shannon_fixed_povm, OptimizerConfig};
use crate::channel::{Povm, QuantumChannel, QubitElement, QubitPovmParam};
use crate::error::{Error, Result};
use crate::info::{mutual_info_q_channel, Ensemble};
use crate::parallel::{map_indexed, Execution};
use crate::qmat::random::{random_density, random_pure};
use crate::qmat::{ComplexMatrix, ProbabilityVector};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Slack on the conditional-search upper bound at depth 2 and depth 3.
const UPPER_TOL_PAIR: f64 = 1e-4;
const UPPER_TOL_TRIPLE: f64 = 2e-3;
/// Slack on the product-strategy lower bound.
const LOWER_TOL: f64 = 2e-3;

fn random_angles(rng: &mut ChaCha8Rng) -> [f64; 4] {
    let u: f64 = rng.random();
    [
        rng.random::<f64>() * TWO_PI,
        rng.random::<f64>() * TWO_PI,
        (1.0 - 2.0 * u).acos(),
        rng.random::<f64>() * TWO_PI,
    ]
}

/// `E₀ = sin²α |n⟩⟨n| + sin²β |−n⟩⟨−n|`, `E₁ = I − E₀` with `n = n(θ, φ)`.
/// Smooth in all four angles and feasible everywhere.
fn binary_stage(x: &[f64]) -> QubitPovmParam {
    let (la, lb) = (x[0].sin().powi(2), x[1].sin().powi(2));
    let (t, p) = (x[2], x[3]);
    let n = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
    let w0 = (la + lb) / 2.0;
    let w = n.map(|c| c * (la - lb) / 2.0);
    QubitPovmParam {
        elements: vec![
            QubitElement { w0, w },
            QubitElement {
                w0: 1.0 - w0,
                w: w.map(|c| -c),
            },
        ],
    }
}

fn binary_elements(x: &[f64]) -> [ComplexMatrix; 2] {
    let p = binary_stage(x);
    [p.elements[0].to_matrix(), p.elements[1].to_matrix()]
}

/// Random two-outcome qubit POVM, generally not projective.
pub fn random_binary_povm(rng: &mut ChaCha8Rng) -> Result<Povm> {
    let [a, r, t, p] = random_angles(rng);
    QubitPovmParam::binary_from_angles(a, r, t, p).to_povm()
}

/// An ensemble on two qubits, two qubit channels and a two-stage measurement.
#[derive(Clone, Debug)]
pub struct ChainInstance {
    pub ensemble: Ensemble,
    pub ch1: QuantumChannel,
    pub ch2: QuantumChannel,
    pub cp: ConditionalPovm,
}

/// One to four signals (mostly pure, sometimes mixed), channels of Kraus rank
/// 1–4 and independent two-outcome stages.
pub fn random_chain_instance(rng: &mut ChaCha8Rng) -> Result<ChainInstance> {
    let n = rng.random_range(1..=4);
    let states = (0..n)
        .map(|_| {
            if rng.random_bool(0.25) {
                random_density(4, rng)
            } else {
                random_pure(4, rng)
            }
        })
        .collect();
    let weights = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let ensemble = Ensemble::new(ProbabilityVector::normalized(weights)?, states)?;
    let ch1 = QuantumChannel::random(2, rng.random_range(1..=4), rng.random())?;
    let ch2 = QuantumChannel::random(2, rng.random_range(1..=4), rng.random())?;
    let first = random_binary_povm(rng)?;
    let second = vec![random_binary_povm(rng)?, random_binary_povm(rng)?];
    Ok(ChainInstance {
        ensemble,
        ch1,
        ch2,
        cp: ConditionalPovm::new(first, second)?,
    })
}

/// Worst cases over a batch of random chain instances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentitySweep {
    pub instances: usize,
    /// `max |I^q(E₁₂;M̂₁₂) − I^q(E₁;M̂₁) − Σ_b p(b) I^q(E₂(b);M̂₂(b))|`.
    pub max_quantum_gap: f64,
    /// `max |I(J;B,C) − I(J;B) − I(J;C|B)|` on the classical tables.
    pub max_classical_gap: f64,
    /// Largest disagreement between a quantum term and its classical twin.
    pub max_cross_gap: f64,
}

/// Runs the chain identity on `n` instances; instance `i` draws from stream
/// `i` of `seed`. With `fault` set, one branch of instance 0 is corrupted
/// and the sweep fails.
pub fn identity_sweep(n: usize, seed: u64, exec: Execution, fault: bool) -> Result<IdentitySweep> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one instance".into()));
    }
    let gaps = map_indexed(exec, n, |i| -> Result<(f64, f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut inst = random_chain_instance(&mut rng)?;
        if fault && i == 0 {
            inst.cp.inject_fault(1);
        }
        let q = chain_identity_check(&inst.ensemble, &inst.ch1, &inst.ch2, &inst.cp)?;
        let c = classical_chain(&inst.ensemble, &inst.ch1, &inst.ch2, &inst.cp)?;
        let cross = (q.lhs - c.total)
            .abs()
            .max((q.first - c.first).abs())
            .max((q.conditional - c.conditional).abs());
        Ok((q.gap, c.residual, cross))
    });
    let mut out = IdentitySweep {
        instances: n,
        max_quantum_gap: 0.0,
        max_classical_gap: 0.0,
        max_cross_gap: 0.0,
    };
    for g in gaps {
        let (q, c, x) = g?;
        out.max_quantum_gap = out.max_quantum_gap.max(q);
        out.max_classical_gap = out.max_classical_gap.max(c);
        out.max_cross_gap = out.max_cross_gap.max(x);
    }
    Ok(out)
}

/// Adaptive strategies on `n` qubit outputs whose every stage is a
/// two-outcome qubit POVM. Stage nodes are stored in heap order, four angles
/// each.
#[derive(Clone, Debug)]
pub struct BinaryStrategyFamily {
    channels: Vec<QuantumChannel>,
}

impl BinaryStrategyFamily {
    /// `channels` are the single uses; duals are taken factor by factor, so
    /// the search channel must be their product.
    pub fn new(channels: &[QuantumChannel]) -> Result<Self> {
        if !(2..=MAX_DEPTH).contains(&channels.len()) {
            return Err(Error::InvalidArgument(format!(
                "strategy depth must be 2..={MAX_DEPTH}, got {}",
                channels.len()
            )));
        }
        if let Some(ch) = channels.iter().find(|c| c.dim_out() != 2) {
            return Err(Error::DimensionMismatch {
                context: "binary strategies need qubit outputs",
                expected: 2,
                found: ch.dim_out(),
            });
        }
        Ok(Self {
            channels: channels.to_vec(),
        })
    }

    fn depth(&self) -> usize {
        self.channels.len()
    }

    fn build(
        &self,
        x: &[f64],
        node: usize,
        level: usize,
        map: &dyn Fn(usize, ComplexMatrix) -> ComplexMatrix,
    ) -> Vec<ComplexMatrix> {
        let stage = binary_elements(&x[4 * node..4 * node + 4]).map(|e| map(level, e));
        if level + 1 == self.depth() {
            return stage.to_vec();
        }
        stage
            .iter()
            .enumerate()
            .flat_map(|(b, e)| {
                self.build(x, 2 * node + 1 + b, level + 1, map)
                    .into_iter()
                    .map(move |f| e.kron(&f))
            })
            .collect()
    }

    /// The strategy for parameters `x`.
    pub fn strategy(&self, x: &[f64]) -> Result<AdaptiveStrategy> {
        fn node(f: &BinaryStrategyFamily, x: &[f64], i: usize, level: usize) -> Result<StrategyNode> {
            let povm = binary_stage(&x[4 * i..4 * i + 4]).to_povm()?;
            let children = if level + 1 == f.depth() {
                Vec::new()
            } else {
                (0..2)
                    .map(|b| node(f, x, 2 * i + 1 + b, level + 1))
                    .collect::<Result<_>>()?
            };
            Ok(StrategyNode { povm, children })
        }
        AdaptiveStrategy::new(node(self, x, 0, 0)?)
    }
}

impl PovmFamily for BinaryStrategyFamily {
    fn dim(&self) -> usize {
        1 << self.depth()
    }

    fn num_params(&self) -> usize {
        4 * ((1 << self.depth()) - 1)
    }

    fn elements(&self, x: &[f64]) -> Vec<ComplexMatrix> {
        self.build(x, 0, 0, &|_, e| e)
    }

    fn random_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..(1 << self.depth()) - 1).flat_map(|_| random_angles(rng)).collect()
    }

    fn dual_elements(&self, _: &QuantumChannel, x: &[f64]) -> Vec<ComplexMatrix> {
        self.build(x, 0, 0, &|level, e| self.channels[level].dual_apply_unchecked(&e))
    }
}

/// Outcome of [`additivity_experiment`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdditivityReport {
    pub depth: usize,
    /// Shannon capacity estimate of each use.
    pub capacities: Vec<f64>,
    pub c_sum: f64,
    /// Best `I^q` found over entangled inputs and adaptive binary strategies.
    pub conditional_best: f64,
    /// `I^q` of the product of the single-use optimizers.
    pub product_value: f64,
    pub upper_tol: f64,
    pub lower_tol: f64,
    /// `conditional_best ≤ c_sum + upper_tol`.
    pub upper_ok: bool,
    /// `product_value ≥ c_sum − lower_tol`.
    pub lower_ok: bool,
}

fn product_channel(channels: &[QuantumChannel]) -> QuantumChannel {
    channels[1..].iter().fold(channels[0].clone(), |acc, c| acc.product(c))
}

fn product_ensemble(parts: &[&Ensemble]) -> Result<Ensemble> {
    let mut probs: Vec<f64> = parts[0].probs().as_slice().to_vec();
    let mut states = parts[0].states().to_vec();
    for e in &parts[1..] {
        let mut np = Vec::with_capacity(probs.len() * e.len());
        let mut ns = Vec::with_capacity(probs.len() * e.len());
        for (p, s) in probs.iter().zip(&states) {
            for (q, t) in e.iter() {
                np.push(p * q);
                ns.push(s.tensor(t));
            }
        }
        probs = np;
        states = ns;
    }
    Ensemble::new(ProbabilityVector::normalized(probs)?, states)
}

/// Two channel uses: single-use capacities, the adaptive search on entangled
/// inputs and the product strategy.
pub fn additivity_experiment(
    ch1: &QuantumChannel,
    ch2: &QuantumChannel,
    cfg: &OptimizerConfig,
) -> Result<AdditivityReport> {
    additivity_experiment_multi(&[ch1.clone(), ch2.clone()], cfg)
}

/// [`additivity_experiment`] for two or three uses.
pub fn additivity_experiment_multi(channels: &[QuantumChannel], cfg: &OptimizerConfig) -> Result<AdditivityReport> {
    let family = BinaryStrategyFamily::new(channels)?;
    let single = channels
        .iter()
        .map(|c| shannon_capacity(c, cfg))
        .collect::<Result<Vec<_>>>()?;
    let capacities: Vec<f64> = single.iter().map(|r| r.value).collect();
    let c_sum = capacities.iter().sum::<f64>();
    let joint = product_channel(channels);

    let ensembles: Vec<&Ensemble> = single.iter().filter_map(|r| r.argmax_ensemble.as_ref()).collect();
    let povms: Vec<&Povm> = single.iter().filter_map(|r| r.argmax_povm.as_ref()).collect();
    let e = product_ensemble(&ensembles)?;
    let m = povms[1..].iter().fold(povms[0].clone(), |acc, p| acc.tensor(p));
    let product_value = mutual_info_q_channel(&joint, &e, &m)?;

    let conditional_best = optimize_mutual_info(&joint, &family, cfg.ensemble_size_cap, cfg)?.value;
    let depth = channels.len();
    let upper_tol = if depth == 2 { UPPER_TOL_PAIR } else { UPPER_TOL_TRIPLE };
    Ok(AdditivityReport {
        depth,
        capacities,
        c_sum,
        conditional_best,
        product_value,
        upper_tol,
        lower_tol: LOWER_TOL,
        upper_ok: conditional_best <= c_sum + upper_tol,
        lower_ok: product_value >= c_sum - LOWER_TOL,
    })
}

/// Outcome of [`fixed_measurement_additivity`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedMeasurementReport {
    pub depth: usize,
    /// `sup_E I^q` on `n` uses for the flattened strategy.
    pub joint: f64,
    /// Per stage, the best single-use `sup_E I^q` over that stage's POVMs.
    pub stage_values: Vec<f64>,
    pub stage_sum: f64,
    /// `stage_sum − joint`; nonnegative up to optimizer noise.
    pub gap: f64,
}

/// Compares the `n`-use value of a fixed adaptive measurement with the sum of
/// single-use values of its stages.
pub fn fixed_measurement_additivity(
    ch: &QuantumChannel,
    strategy: &AdaptiveStrategy,
    cfg: &OptimizerConfig,
) -> Result<FixedMeasurementReport> {
    if let Some(&d) = strategy.dims().iter().find(|&&d| d != ch.dim_out()) {
        return Err(Error::DimensionMismatch {
            context: "strategy stage vs channel output",
            expected: ch.dim_out(),
            found: d,
        });
    }
    let depth = strategy.depth();
    let joint = shannon_fixed_povm(&product_channel(&vec![ch.clone(); depth]), &strategy.flatten()?, cfg)?.value;
    let mut seen: Vec<(&Povm, f64)> = Vec::new();
    let mut stage_values = Vec::with_capacity(depth);
    for level in 0..depth {
        let mut best: f64 = 0.0;
        for m in strategy.stage_povms(level) {
            let v = match seen.iter().find(|(p, _)| *p == m) {
                Some((_, v)) => *v,
                None => {
                    let v = shannon_fixed_povm(ch, m, cfg)?.value;
                    seen.push((m, v));
                    v
                }
            };
            best = best.max(v);
        }
        stage_values.push(best);
    }
    let stage_sum = stage_values.iter().sum::<f64>();
    Ok(FixedMeasurementReport {
        depth,
        joint,
        stage_values,
        stage_sum,
        gap: stage_sum - joint,
    })
}
