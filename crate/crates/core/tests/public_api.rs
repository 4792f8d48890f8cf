use proptest::prelude::*;
use qcap_core::capacity::{holevo_capacity, shannon_fixed_povm, OptimizerConfig};
use qcap_core::channel::{load_channel, measured_channel, ChannelSpec, Povm, QuantumChannel};
use qcap_core::info::{holevo_quantity, mutual_info_q_channel, Ensemble};
use qcap_core::protocol::{chain_identity_check, random_chain_instance, AdaptiveStrategy, ConditionalPovm};
use qcap_core::qmat::random::{random_density, random_isometry, random_pure};
use qcap_core::qmat::{tensor, ProbabilityVector};
use qcap_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_povm(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Povm {
    Povm::from_isometry_rows(&random_isometry(n, d, rng)).unwrap()
}

fn random_ensemble(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Ensemble {
    let states = (0..n).map(|_| random_density(d, rng)).collect();
    let w = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    Ensemble::new(ProbabilityVector::normalized(w).unwrap(), states).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_matches_channel_on_expectations(seed in any::<u64>(), d in 2usize..4, rank in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = QuantumChannel::random(d, rank, seed).unwrap();
        let rho = random_density(d, &mut rng);
        for e in random_povm(d, d + 1, &mut rng).elements() {
            let lhs = ch.apply(&rho).unwrap().as_matrix().expectation(e);
            let rhs = rho.as_matrix().expectation(&ch.dual_apply(e).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-10);
        }
    }

    #[test]
    fn holevo_quantity_bounds_measured_information(seed in any::<u64>(), n in 1usize..5, m in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = QuantumChannel::random(2, 1 + (seed % 4) as usize, seed).unwrap();
        let e = random_ensemble(2, n, &mut rng);
        let povm = random_povm(2, m, &mut rng);
        let iq = mutual_info_q_channel(&ch, &e, &povm).unwrap();
        let chi = holevo_quantity(&ch, &e).unwrap();
        prop_assert!(iq >= -1e-12);
        prop_assert!(iq <= chi + 1e-10, "{} > {}", iq, chi);
    }

    #[test]
    fn product_channel_acts_factorwise(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = QuantumChannel::random(2, 2, seed).unwrap();
        let b = QuantumChannel::random(2, 3, seed ^ 1).unwrap();
        let (r, s) = (random_density(2, &mut rng), random_density(2, &mut rng));
        let joint = a.product(&b).apply_matrix(&tensor(r.as_matrix(), s.as_matrix()));
        let split = tensor(&a.apply_matrix(r.as_matrix()), &b.apply_matrix(s.as_matrix()));
        prop_assert!(joint.max_abs_diff(&split) <= 1e-10);
    }

    #[test]
    fn spec_round_trip(seed in any::<u64>(), rank in 1usize..5) {
        let ch = QuantumChannel::random(2, rank, seed).unwrap();
        let text = ChannelSpec::from_channel(&ch).to_json().to_string();
        let back = load_channel(&text).unwrap();
        prop_assert_eq!(back.kraus().len(), ch.kraus().len());
        for (k, l) in ch.kraus().iter().zip(back.kraus()) {
            prop_assert!(k.max_abs_diff(l) <= 1e-15);
        }
    }

    #[test]
    fn chain_identity_on_random_instances(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_chain_instance(&mut rng).unwrap();
        let c = chain_identity_check(&inst.ensemble, &inst.ch1, &inst.ch2, &inst.cp).unwrap();
        prop_assert!(c.gap <= 1e-9, "gap {}", c.gap);
    }
}

#[test]
fn capacities_of_named_channels_agree_with_closed_forms() {
    let cfg = OptimizerConfig {
        restarts: 6,
        ..OptimizerConfig::default()
    };
    let h2 = |p: f64| -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
    // output Bloch length 1 - p, so the best output eigenvalues are 1 - p/2 and p/2
    let p = 0.3;
    let ch = QuantumChannel::depolarizing(2, p).unwrap();
    let c = holevo_capacity(&ch, &cfg).unwrap().value;
    assert!((c - (1.0 - h2(p / 2.0))).abs() < 1e-6, "{c}");
    // dephasing leaves the z basis intact
    let c = holevo_capacity(&QuantumChannel::phase_damping(0.7).unwrap(), &cfg)
        .unwrap()
        .value;
    assert!((c - 1.0).abs() < 1e-6, "{c}");
}

#[test]
fn fixed_povm_optimum_equals_measured_channel_capacity() {
    let cfg = OptimizerConfig {
        restarts: 6,
        ..OptimizerConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ch = QuantumChannel::random(2, 2, 41).unwrap();
    let m = random_povm(2, 3, &mut rng);
    let a = shannon_fixed_povm(&ch, &m, &cfg).unwrap().value;
    let b = holevo_capacity(&measured_channel(&ch, &m).unwrap(), &cfg)
        .unwrap()
        .value;
    assert!((a - b).abs() < 2e-3, "{a} vs {b}");
}

#[test]
fn adaptive_strategies_flatten_to_complete_povms() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let first = random_povm(2, 2, &mut rng);
    let seconds: Vec<Povm> = (0..2).map(|_| random_povm(2, 3, &mut rng)).collect();
    let cp = ConditionalPovm::new(first, seconds).unwrap();
    let flat = cp.flatten().unwrap();
    assert_eq!(flat.len(), 6);
    assert_eq!(flat.dim(), 4);
    let tree = AdaptiveStrategy::uniform(&Povm::computational(2), 3).unwrap();
    assert_eq!(tree.flatten().unwrap().len(), 8);
}

#[test]
fn malformed_inputs_are_reported() {
    assert!(matches!(load_channel("{"), Err(Error::Parse { .. })));
    assert!(matches!(
        load_channel(r#"{"kind":"bit-flip"}"#),
        Err(Error::Parse { .. })
    ));
    let bad = r#"{"kind":"kraus","kraus":[[[[1,0],[0,0]],[[0,0],[0.5,0]]]]}"#;
    assert!(load_channel(bad).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let psi = random_pure(2, &mut rng);
    let e = Ensemble::new(ProbabilityVector::uniform(1), vec![psi]).unwrap();
    let m = random_povm(3, 3, &mut rng);
    assert!(mutual_info_q_channel(&QuantumChannel::identity(2), &e, &m).is_err());
}
