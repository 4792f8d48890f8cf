use super::blocks::{build_pabq, reductions, BlockDiagonalState, Marginal, System};
use super::{check_dims, Ensemble, PROB_ZERO};
use crate::channel::{omega_channel, Povm, QuantumChannel};
use crate::error::{Error, Result};
use crate::qmat::{
    entropy_bits, entropy_psd, matrix_pinv_sqrt, matrix_sqrt, partial_trace, relative_entropy, support_projector,
    ComplexMatrix, DensityMatrix, C64,
};

/// `S(P_B) − S(P_AB) + S(P_A)` from the block-diagonal construction.
pub fn shannon_via_relent(ch: &QuantumChannel, e: &Ensemble, m: &Povm) -> Result<f64> {
    let s = build_pabq(ch, e, m, false)?;
    let pab = reductions(&s, Marginal::AB)?;
    let pa = reductions(&s, Marginal::A)?;
    let pb = reductions(&s, Marginal::B)?;
    Ok(pb.entropy() - pab.entropy() + pa.entropy())
}

/// `H(P_AB, P_A ⊗ P_B)` as a matrix relative entropy, with `p(j,b)` taken
/// on the input side as `π_j Tr[ρ_j Φ̂(E_b)]`.
pub fn shannon_relent(ch: &QuantumChannel, e: &Ensemble, m: &Povm) -> Result<f64> {
    check_dims("ensemble vs channel input", ch.dim_in(), e.dim())?;
    let dual = ch.dual_povm(m)?;
    let mut pab = Vec::with_capacity(e.len() * m.len());
    let mut tau = vec![0.0; m.len()];
    for (p, s) in e.iter() {
        for (b, x) in dual.elements().iter().enumerate() {
            let v = p * s.as_matrix().expectation(x);
            pab.push(v);
            tau[b] += v;
        }
    }
    let prod: Vec<f64> = e.probs().iter().flat_map(|p| tau.iter().map(move |t| p * t)).collect();
    relative_entropy(
        &ComplexMatrix::from_real_diag(&pab),
        &ComplexMatrix::from_real_diag(&prod),
    )
}

/// `χ = S[Φ(ρ)] − Σ_j π_j S[Φ(ρ_j)]`.
pub fn holevo_quantity(ch: &QuantumChannel, e: &Ensemble) -> Result<f64> {
    check_dims("ensemble vs channel input", ch.dim_in(), e.dim())?;
    let avg = entropy_psd(&ch.apply_matrix(&e.average_matrix()));
    let cond: f64 = e
        .iter()
        .filter(|(p, _)| *p > PROB_ZERO)
        .map(|(p, s)| p * entropy_psd(&ch.apply_matrix(s.as_matrix())))
        .sum();
    Ok(avg - cond)
}

/// `S(P_Q) − S(P_AQ) + S(P_A)` with `P_AQ` built from its blocks `π_j Φ(ρ_j)`.
pub fn holevo_entropy_form(ch: &QuantumChannel, e: &Ensemble) -> Result<f64> {
    check_dims("ensemble vs channel input", ch.dim_in(), e.dim())?;
    let blocks: Vec<ComplexMatrix> = e.iter().map(|(p, s)| ch.apply_matrix(s.as_matrix()).scale(p)).collect();
    let labels = (0..e.len()).map(|j| vec![j]).collect();
    let paq = BlockDiagonalState::new(vec![System::A], Some(System::Q), labels, blocks)?;
    let pq = paq.reduce(&[], true)?;
    let pa = paq.reduce(&[System::A], false)?;
    Ok(pq.entropy() - paq.entropy() + pa.entropy())
}

/// `H(P_AQ, P_A ⊗ P_Q)` as one matrix relative entropy.
pub fn holevo_relent(ch: &QuantumChannel, e: &Ensemble) -> Result<f64> {
    check_dims("ensemble vs channel input", ch.dim_in(), e.dim())?;
    let out = ch.apply_matrix(&e.average_matrix());
    let paq: Vec<ComplexMatrix> = e.iter().map(|(p, s)| ch.apply_matrix(s.as_matrix()).scale(p)).collect();
    let prod: Vec<ComplexMatrix> = e.probs().iter().map(|p| out.scale(p)).collect();
    relative_entropy(&ComplexMatrix::direct_sum(&paq), &ComplexMatrix::direct_sum(&prod))
}

/// `Γ_ρ(P) = √ρ Φ̂(P) √ρ`.
pub fn gamma_rho(ch: &QuantumChannel, rho: &DensityMatrix, p: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims("state vs channel input", ch.dim_in(), rho.dim())?;
    if p.hermiticity_defect() > crate::qmat::HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            deviation: p.hermiticity_defect(),
        });
    }
    let root = matrix_sqrt(rho.as_matrix())?;
    Ok(root.matmul(&ch.dual_apply(p)?).matmul(&root).hermitian_part())
}

/// `S(ρ) − Σ_b S(√ρ Φ̂(E_b) √ρ) + S(τ)`, the quantity maximized by the
/// entanglement-of-purification style upper bound.
pub fn uep_objective(ch: &QuantumChannel, rho: &DensityMatrix, m: &Povm) -> Result<f64> {
    check_dims("state vs channel input", ch.dim_in(), rho.dim())?;
    let dual = ch.dual_povm(m)?;
    let root = matrix_sqrt(rho.as_matrix())?;
    let mut tau = Vec::with_capacity(m.len());
    let mut blocks = 0.0;
    for x in dual.elements() {
        let g = root.matmul(x).matmul(&root).hermitian_part();
        let t = g.trace().re;
        tau.push(t);
        if t > PROB_ZERO {
            blocks += entropy_psd(&g);
        }
    }
    Ok(entropy_psd(rho.as_matrix()) - blocks + entropy_bits(&tau))
}

/// `H(P_BR, P_R ⊗ P_B)` as one matrix relative entropy.
pub fn uep_relent(ch: &QuantumChannel, rho: &DensityMatrix, m: &Povm) -> Result<f64> {
    let mut pbr = Vec::with_capacity(m.len());
    let mut prod = Vec::with_capacity(m.len());
    for e in m.elements() {
        let g = gamma_rho(ch, rho, e)?;
        prod.push(rho.as_matrix().scale(g.trace().re));
        pbr.push(g);
    }
    relative_entropy(&ComplexMatrix::direct_sum(&pbr), &ComplexMatrix::direct_sum(&prod))
}

/// `H(ρ_QR, ρ_Q ⊗ ρ_R)` for `ρ_QR = (Φ ⊗ I)(|Ψ⟩⟨Ψ|)`, `Ψ` on input ⊗ input.
pub fn entanglement_assisted_quantity(ch: &QuantumChannel, psi: &[C64]) -> Result<f64> {
    let d = ch.dim_in();
    check_dims("purification length", d * d, psi.len())?;
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::TraceNotOne { trace: norm });
    }
    let pure = ComplexMatrix::outer(psi);
    let id = ComplexMatrix::identity(d);
    let mut qr = ComplexMatrix::zeros(ch.dim_out() * d, ch.dim_out() * d);
    for k in ch.kraus() {
        let kk = k.kron(&id);
        qr += &kk.matmul(&pure).matmul(&kk.adjoint());
    }
    let dims = [ch.dim_out(), d];
    let q = partial_trace(&qr, &dims, &[0])?;
    let r = partial_trace(&qr, &dims, &[1])?;
    Ok(entropy_psd(&q) + entropy_psd(&r) - entropy_psd(&qr))
}

/// `Ω_QB(P) = Σ_b |b⟩⟨b| Tr(P E_b)`, taking `P_AQ` to `P_AB` block by block.
pub fn omega_qb(m: &Povm) -> Result<QuantumChannel> {
    let basis: Vec<DensityMatrix> = (0..m.len()).map(|b| DensityMatrix::basis(m.len(), b)).collect();
    omega_channel(&basis, m)
}

/// `Ω_RA(P) = Σ_j |j⟩⟨j| Tr(P X_j)` with `X_j = π_j ρ^{-1/2} ρ_j ρ^{-1/2}`,
/// `ρ` the ensemble average. When `ρ` is singular the complement of its
/// support is added to `X_0` so the `X_j` stay complete.
pub fn omega_ra(e: &Ensemble) -> Result<QuantumChannel> {
    let rho = e.average_matrix();
    let inv = matrix_pinv_sqrt(&rho)?;
    let mut xs: Vec<ComplexMatrix> = e
        .iter()
        .map(|(p, s)| inv.matmul(s.as_matrix()).matmul(&inv).hermitian_part().scale(p))
        .collect();
    let support = support_projector(&rho);
    let mut sum = ComplexMatrix::zeros(e.dim(), e.dim());
    for x in &xs {
        sum += x;
    }
    let defect = sum.max_abs_diff(&support);
    if defect > 1e-8 {
        return Err(Error::IncompletePovm { deviation: defect });
    }
    xs[0] += &(&ComplexMatrix::identity(e.dim()) - &support);
    let basis: Vec<DensityMatrix> = (0..e.len()).map(|j| DensityMatrix::basis(e.len(), j)).collect();
    omega_channel(&basis, &Povm::new(xs)?)
}

#[cfg(test)]
mod tests {
    use super::super::tests::{plus, random_instance};
    use super::super::{mutual_info_q_channel, PROB_ZERO};
    use super::*;
    use crate::qmat::random::{random_pure, random_state_vector};
    use crate::qmat::ProbabilityVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h2(p: f64) -> f64 {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }

    #[test]
    fn shannon_forms_agree_with_direct_value() {
        for seed in 0..500 {
            let (ch, e, m) = random_instance(seed);
            let direct = mutual_info_q_channel(&ch, &e, &m).unwrap();
            let ent = shannon_via_relent(&ch, &e, &m).unwrap();
            let rel = shannon_relent(&ch, &e, &m).unwrap();
            assert!((direct - ent).abs() < 1e-10, "seed {seed}: {direct} vs {ent}");
            assert!((direct - rel).abs() < 1e-10, "seed {seed}: {direct} vs {rel}");
        }
        let (_, e, m) = random_instance(2);
        let noisy = QuantumChannel::completely_noisy(e.dim());
        assert!(shannon_via_relent(&noisy, &e, &m).unwrap().abs() < 1e-12);
        let e = Ensemble::uniform(vec![DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)]).unwrap();
        let v = shannon_via_relent(&QuantumChannel::identity(2), &e, &Povm::computational(2)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holevo_examples() {
        let id = QuantumChannel::identity(2);
        let e = Ensemble::uniform(vec![DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)]).unwrap();
        assert!((holevo_quantity(&id, &e).unwrap() - 1.0).abs() < 1e-12);
        let single = Ensemble::uniform(vec![plus()]).unwrap();
        let ad = QuantumChannel::amplitude_damping(0.3).unwrap();
        assert!(holevo_quantity(&ad, &single).unwrap().abs() < 1e-12);

        // average of |0⟩ and |+⟩ has eigenvalues (1 ± 1/√2)/2
        let e = Ensemble::uniform(vec![DensityMatrix::basis(2, 0), plus()]).unwrap();
        let oracle = h2((1.0 + std::f64::consts::FRAC_1_SQRT_2) / 2.0);
        assert!((oracle - 0.600876).abs() < 1e-6);
        assert!((holevo_quantity(&id, &e).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn holevo_forms_agree() {
        for seed in 0..200 {
            let (ch, e, _) = random_instance(seed);
            let chi = holevo_quantity(&ch, &e).unwrap();
            assert!((chi - holevo_entropy_form(&ch, &e).unwrap()).abs() < 1e-10);
            assert!((chi - holevo_relent(&ch, &e).unwrap()).abs() < 1e-9);
            assert!(chi >= -1e-12 && chi <= (ch.dim_out() as f64).log2() + 1e-12);
        }
    }

    #[test]
    fn gamma_rho_examples() {
        let mut r = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..20 {
            let (ch, e, m) = random_instance(seed);
            let rho = e.average();
            let id = ComplexMatrix::identity(ch.dim_out());
            assert!(gamma_rho(&ch, &rho, &id).unwrap().max_abs_diff(rho.as_matrix()) < 1e-10);
            let tau = m.probabilities(&ch.apply_matrix(rho.as_matrix()));
            for (eb, t) in m.elements().iter().zip(&tau) {
                assert!((gamma_rho(&ch, &rho, eb).unwrap().trace().re - t).abs() < 1e-10);
            }
            let mixed = DensityMatrix::maximally_mixed(ch.dim_in());
            let p = crate::qmat::random::random_hermitian(ch.dim_out(), &mut r);
            let want = ch.dual_apply(&p).unwrap().scale(1.0 / ch.dim_in() as f64);
            assert!(gamma_rho(&ch, &mixed, &p).unwrap().max_abs_diff(&want) < 1e-10);
        }
    }

    #[test]
    fn uep_examples() {
        let mut r = ChaCha8Rng::seed_from_u64(9);
        for seed in 0..100 {
            let (ch, e, m) = random_instance(seed);
            let rho = e.average();
            let u = uep_objective(&ch, &rho, &m).unwrap();
            assert!((u - uep_relent(&ch, &rho, &m).unwrap()).abs() < 1e-9, "seed {seed}");
            let noisy = QuantumChannel::completely_noisy(ch.dim_in());
            assert!(uep_objective(&noisy, &rho, &m).unwrap().abs() < 1e-10);
            let pure = random_pure(ch.dim_in(), &mut r);
            assert!(uep_objective(&ch, &pure, &m).unwrap().abs() < 1e-10);
        }
        let v = uep_objective(
            &QuantumChannel::identity(2),
            &DensityMatrix::maximally_mixed(2),
            &Povm::computational(2),
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entanglement_assisted_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [
            C64::new(h, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(h, 0.0),
        ];
        let id = QuantumChannel::identity(2);
        assert!((entanglement_assisted_quantity(&id, &bell).unwrap() - 2.0).abs() < 1e-12);
        let noisy = QuantumChannel::completely_noisy(2);
        assert!(entanglement_assisted_quantity(&noisy, &bell).unwrap().abs() < 1e-12);
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let a = random_state_vector(2, &mut r);
        let b = random_state_vector(2, &mut r);
        let prod: Vec<C64> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        let ad = QuantumChannel::amplitude_damping(0.4).unwrap();
        assert!(entanglement_assisted_quantity(&ad, &prod).unwrap().abs() < 1e-10);
        assert!(entanglement_assisted_quantity(&ad, &a).is_err());
    }

    #[test]
    fn monotonicity_instances() {
        for seed in 0..300 {
            let (ch, e, m) = random_instance(seed);
            let shannon = shannon_relent(&ch, &e, &m).unwrap();
            let chi = holevo_relent(&ch, &e).unwrap();
            let uep = uep_relent(&ch, &e.average(), &m).unwrap();
            assert!(shannon <= chi + 1e-9, "seed {seed}: {shannon} > {chi}");
            assert!(shannon <= uep + 1e-9, "seed {seed}: {shannon} > {uep}");
        }
    }

    #[test]
    fn omega_qb_maps_paq_to_pab() {
        for seed in 0..30 {
            let (ch, e, m) = random_instance(seed);
            let omega = omega_qb(&m).unwrap();
            let joint = super::super::classical_joint(&ch, &e, &m).unwrap();
            for (j, (p, s)) in e.iter().enumerate() {
                let block = omega.apply_matrix(&ch.apply_matrix(s.as_matrix()).scale(p));
                assert!(block.is_diagonal(1e-12));
                for (b, v) in block.diagonal_real().iter().enumerate() {
                    assert!((v - joint.get(&[j, b])).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn omega_ra_maps_pbr_to_pab() {
        let mut r = ChaCha8Rng::seed_from_u64(21);
        for seed in 0..30 {
            let (ch, e, m) = random_instance(seed);
            // a rank-deficient ensemble exercises the support completion
            let e = if seed % 3 == 0 {
                let s = random_pure(e.dim(), &mut r);
                Ensemble::new(ProbabilityVector::new(vec![0.4, 0.6]).unwrap(), vec![s.clone(), s]).unwrap()
            } else {
                e
            };
            let omega = omega_ra(&e).unwrap();
            let rho = e.average();
            let joint = super::super::classical_joint(&ch, &e, &m).unwrap();
            for (b, x) in m.elements().iter().enumerate() {
                let col = omega.apply_matrix(&gamma_rho(&ch, &rho, x).unwrap());
                for (j, v) in col.diagonal_real().iter().enumerate() {
                    assert!((v - joint.get(&[j, b])).abs() < 1e-9, "seed {seed}");
                }
            }
            let pa = omega.apply_matrix(rho.as_matrix()).diagonal_real();
            for (x, y) in pa.iter().zip(e.probs().iter()) {
                assert!((x - y).abs() < 1e-9 && *x > -PROB_ZERO);
            }
        }
    }
}
