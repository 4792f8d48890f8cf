//! End-to-end acceptance checks, one test per criterion. Each test writes a
//! single `criterion N: PASS|FAIL` line to stdout (bypassing capture) and
//! then asserts.

use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use qcap_core::capacity::{
    holevo_capacity, measured_channel_equivalence, qubit_grid_oracle, shannon_capacity, uep_bound, OptimizerConfig,
};
use qcap_core::channel::{Povm, QuantumChannel};
use qcap_core::info::{
    classical_mutual_info, conditional_mutual_info, entanglement_assisted_quantity, holevo_entropy_form,
    holevo_quantity, holevo_relent, mutual_info_joint_output, mutual_info_q_channel, shannon_relent,
    shannon_via_relent, uep_objective, uep_relent, ClassicalJoint, Ensemble,
};
use qcap_core::parallel::{map_indexed, Execution};
use qcap_core::protocol::{additivity_experiment, identity_sweep};
use qcap_core::qmat::random::{random_density, random_isometry, random_pure};
use qcap_core::qmat::{DensityMatrix, ProbabilityVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, name: &str, pass: bool, start: Instant, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!(
        "criterion {n:>2}: {verdict} {name} ({detail}) [{:.1}s]\n",
        start.elapsed().as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {n} failed: {detail}");
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn h2(p: f64) -> f64 {
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Random channel on `C^d` (d = 2 or 3), two to four signals (pure or
/// mixed) and a rank-one POVM with `d + 1` outcomes.
fn random_triple(i: usize) -> (QuantumChannel, Ensemble, Povm) {
    let mut r = rng(500, i as u64);
    let d = if i.is_multiple_of(2) { 2 } else { 3 };
    let ch = QuantumChannel::random(d, r.random_range(1..=d * d), r.random()).unwrap();
    let n = r.random_range(2..=4);
    let states = (0..n)
        .map(|_| {
            if r.random_bool(0.3) {
                random_density(d, &mut r)
            } else {
                random_pure(d, &mut r)
            }
        })
        .collect();
    let weights = (0..n).map(|_| 0.05 + r.random::<f64>()).collect();
    let e = Ensemble::new(ProbabilityVector::normalized(weights).unwrap(), states).unwrap();
    let m = Povm::from_isometry_rows(&random_isometry(d + 1, d, &mut r)).unwrap();
    (ch, e, m)
}

/// The 100 random qubit channels shared by the two ordering criteria, with
/// their Shannon, Holevo and U_EP estimates at the default budget.
fn ordering_runs() -> &'static Vec<(f64, f64, f64)> {
    static RUNS: OnceLock<Vec<(f64, f64, f64)>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let cfg = OptimizerConfig::default();
        (0..100)
            .map(|i| {
                let ch = QuantumChannel::random(2, 1 + i % 4, 9000 + i as u64).unwrap();
                (
                    shannon_capacity(&ch, &cfg).unwrap().value,
                    holevo_capacity(&ch, &cfg).unwrap().value,
                    uep_bound(&ch, &cfg).unwrap().value,
                )
            })
            .collect()
    })
}

#[test]
fn criterion_01_quantum_chain_identity() {
    let start = Instant::now();
    let s = identity_sweep(1000, 7, Execution::Parallel, false).unwrap();
    report(
        1,
        "chain identity over 1000 random instances",
        s.max_quantum_gap <= 1e-9,
        start,
        format!("max gap {:.3e}, tol 1e-9", s.max_quantum_gap),
    );
}

#[test]
fn criterion_02_classical_chain_rule() {
    let start = Instant::now();
    let worst = map_indexed(Execution::Parallel, 100, |chunk| {
        let mut r = rng(2, chunk as u64);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let mut t: Vec<f64> = (0..8)
                .map(|_| if r.random_bool(0.1) { 0.0 } else { r.random::<f64>() })
                .collect();
            if t.iter().all(|p| *p == 0.0) {
                t[0] = 1.0;
            }
            let s: f64 = t.iter().sum();
            t.iter_mut().for_each(|p| *p /= s);
            let j = ClassicalJoint::new(vec![2, 2, 2], t).unwrap();
            let total = mutual_info_joint_output(&j).unwrap();
            let first = classical_mutual_info(&j.marginal(&[0, 1])).unwrap();
            let cond = conditional_mutual_info(&j).unwrap();
            worst = worst.max((total - first - cond).abs());
        }
        worst
    })
    .into_iter()
    .fold(0.0, f64::max);
    report(
        2,
        "classical chain rule over 1e5 random 2x2x2 tables",
        worst <= 1e-12,
        start,
        format!("max residual {worst:.3e}, tol 1e-12"),
    );
}

#[test]
fn criterion_03_shannon_below_holevo() {
    let start = Instant::now();
    let runs = ordering_runs();
    let worst = runs.iter().map(|(s, h, _)| s - h).fold(f64::NEG_INFINITY, f64::max);
    report(
        3,
        "shannon <= holevo + 1e-4 on 100 random qubit channels",
        worst <= 1e-4,
        start,
        format!("max shannon - holevo {worst:.3e}"),
    );
}

#[test]
fn criterion_04_shannon_below_uep() {
    let start = Instant::now();
    let runs = ordering_runs();
    let worst = runs.iter().map(|(s, _, u)| s - u).fold(f64::NEG_INFINITY, f64::max);
    report(
        4,
        "shannon <= uep + 1e-4 on 100 random qubit channels",
        worst <= 1e-4,
        start,
        format!("max shannon - uep {worst:.3e}"),
    );
}

#[test]
fn criterion_05_monotonicity() {
    let start = Instant::now();
    let worst = map_indexed(Execution::Parallel, 500, |i| {
        let (ch, e, m) = random_triple(i);
        let ab = shannon_via_relent(&ch, &e, &m).unwrap();
        let aq = holevo_relent(&ch, &e).unwrap();
        let br = uep_relent(&ch, &e.average(), &m).unwrap();
        (ab - aq, ab - br)
    })
    .into_iter()
    .fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |a, b| {
        (a.0.max(b.0), a.1.max(b.1))
    });
    report(
        5,
        "H(P_AB) <= H(P_AQ) and H(P_AB) <= H(P_BR) on 500 triples",
        worst.0 <= 1e-9 && worst.1 <= 1e-9,
        start,
        format!("max excess over AQ {:.3e}, over BR {:.3e}, tol 1e-9", worst.0, worst.1),
    );
}

#[test]
fn criterion_06_conditional_additivity() {
    let start = Instant::now();
    let channels = [
        ("identity", QuantumChannel::identity(2)),
        ("completely-noisy", QuantumChannel::completely_noisy(2)),
        ("bit-flip(0.1)", QuantumChannel::bit_flip(0.1).unwrap()),
        ("depolarizing(0.3)", QuantumChannel::depolarizing(2, 0.3).unwrap()),
        (
            "amplitude-damping(0.5)",
            QuantumChannel::amplitude_damping(0.5).unwrap(),
        ),
    ];
    let cfg = OptimizerConfig::default();
    let mut failures = Vec::new();
    let (mut worst_upper, mut worst_lower) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (n1, c1) in &channels {
        for (n2, c2) in &channels {
            let r = additivity_experiment(c1, c2, &cfg).unwrap();
            worst_upper = worst_upper.max(r.conditional_best - r.c_sum);
            worst_lower = worst_lower.max(r.c_sum - r.product_value);
            if !(r.upper_ok && r.lower_ok) {
                failures.push(format!("{n1} x {n2}"));
            }
        }
    }
    report(
        6,
        "conditional search <= C1+C2+1e-4 and product >= C1+C2-2e-3 on 25 pairs",
        failures.is_empty(),
        start,
        format!("max search - sum {worst_upper:.3e}, max sum - product {worst_lower:.3e}, failing pairs {failures:?}"),
    );
}

#[test]
fn criterion_07_closed_form_values() {
    let start = Instant::now();
    let cfg = OptimizerConfig::default();
    let mut checks: Vec<(String, bool)> = Vec::new();

    let id = QuantumChannel::identity(2);
    for (name, v) in [
        ("shannon", shannon_capacity(&id, &cfg).unwrap().value),
        ("holevo", holevo_capacity(&id, &cfg).unwrap().value),
        ("uep", uep_bound(&id, &cfg).unwrap().value),
    ] {
        checks.push((format!("identity {name} {v:.6}"), (v - 1.0).abs() <= 1e-3));
    }

    let noisy = QuantumChannel::completely_noisy(2);
    for (name, v) in [
        ("shannon", shannon_capacity(&noisy, &cfg).unwrap().value),
        ("holevo", holevo_capacity(&noisy, &cfg).unwrap().value),
        ("uep", uep_bound(&noisy, &cfg).unwrap().value),
    ] {
        checks.push((format!("noisy {name} {v:.2e}"), v.abs() <= 1e-6));
    }
    let mut r = rng(7, 0);
    let uep_zero = (0..50)
        .map(|_| {
            let rho = random_density(2, &mut r);
            let m = Povm::from_isometry_rows(&random_isometry(3, 2, &mut r)).unwrap();
            uep_objective(&noisy, &rho, &m).unwrap().abs()
        })
        .fold(0.0, f64::max);
    checks.push((
        format!("noisy uep objective identically 0 (max {uep_zero:.2e})"),
        uep_zero <= 1e-12,
    ));

    let bf = shannon_capacity(&QuantumChannel::bit_flip(0.1).unwrap(), &cfg)
        .unwrap()
        .value;
    let bsc = 1.0 - h2(0.1);
    checks.push((
        format!("bit-flip(0.1) shannon {bf:.6} vs {bsc:.6}"),
        (bf - 0.531004).abs() <= 2e-3,
    ));

    let s = 0.5f64.sqrt();
    let z = C64::new(0.0, 0.0);
    let psi = [C64::new(s, 0.0), z, z, C64::new(s, 0.0)];
    let ea = entanglement_assisted_quantity(&id, &psi).unwrap();
    checks.push((
        format!("identity entanglement-assisted {ea:.9}"),
        (ea - 2.0).abs() <= 1e-6,
    ));

    let pass = checks.iter().all(|c| c.1);
    let detail = checks
        .iter()
        .map(|(d, ok)| format!("{d}: {}", if *ok { "ok" } else { "FAIL" }))
        .collect::<Vec<_>>()
        .join("; ");
    report(7, "closed-form values", pass, start, detail);
}

#[test]
fn criterion_08_non_unital_gap() {
    let start = Instant::now();
    let cfg = OptimizerConfig::default();
    let ch = QuantumChannel::amplitude_damping(0.5).unwrap();
    let s = shannon_capacity(&ch, &cfg).unwrap().value;
    let h = holevo_capacity(&ch, &cfg).unwrap().value;
    let projective = qubit_grid_oracle(&ch, 50, 2, 2).unwrap();
    let trine = qubit_grid_oracle(&ch, 12, 3, 3).unwrap();
    let best_product = s.max(projective).max(trine);
    let pass = h - s > 1e-3 && h - best_product > 1e-3 && (projective - s).abs() <= 2e-3 && trine <= s + 1e-6;
    report(
        8,
        "amplitude damping 0.5: holevo - shannon > 1e-3",
        pass,
        start,
        format!(
            "holevo {h:.9}, shannon {s:.9}, grid projective {projective:.9}, grid trine {trine:.9}, gap {:.6}",
            h - best_product
        ),
    );
}

#[test]
fn criterion_09_measured_channel_equivalence() {
    let start = Instant::now();
    let cfg = OptimizerConfig::default();
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let mut r = rng(9, i);
        let d = if i % 4 == 3 { 3 } else { 2 };
        let ch = QuantumChannel::random(d, r.random_range(1..=d * d), r.random()).unwrap();
        let outcomes = r.random_range(d..=d + 2);
        let m = Povm::from_isometry_rows(&random_isometry(outcomes, d, &mut r)).unwrap();
        let (lhs, rhs) = measured_channel_equivalence(&ch, &m, &cfg).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    report(
        9,
        "sup_E I^q(E;M) = C_Holv(measured channel) on 20 pairs",
        worst <= 2e-3,
        start,
        format!("max difference {worst:.3e}, tol 2e-3"),
    );
}

#[test]
fn criterion_10_formula_cross_paths() {
    let start = Instant::now();
    let worst = map_indexed(Execution::Parallel, 500, |i| {
        let (ch, e, m) = random_triple(i);
        let shannon = (mutual_info_q_channel(&ch, &e, &m).unwrap() - shannon_relent(&ch, &e, &m).unwrap()).abs();
        let holevo = (holevo_quantity(&ch, &e).unwrap() - holevo_entropy_form(&ch, &e).unwrap()).abs();
        let rho: DensityMatrix = e.average();
        let uep = (uep_objective(&ch, &rho, &m).unwrap() - uep_relent(&ch, &rho, &m).unwrap()).abs();
        [shannon, holevo, uep]
    })
    .into_iter()
    .fold([0.0f64; 3], |a, b| [a[0].max(b[0]), a[1].max(b[1]), a[2].max(b[2])]);
    report(
        10,
        "formula cross-paths on 500 instances",
        worst[0] <= 1e-10 && worst[1] <= 1e-10 && worst[2] <= 1e-9,
        start,
        format!(
            "shannon {:.3e} (tol 1e-10), holevo {:.3e} (tol 1e-10), uep {:.3e} (tol 1e-9)",
            worst[0], worst[1], worst[2]
        ),
    );
}
