use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zenoforge::channels::*;
use zenoforge::lindblad::Superoperator;
use zenoforge::ops::{linalg, tensor, CMatrix, DensityMatrix, HilbertSpace, Operator, C64};

/// Diamond distance between two unitary conjugations: with the eigenvalues
/// of `U†V` spanning an arc of width `w < pi`, the distance is `2 sin(w/2)`.
fn unitary_diamond(u: &Operator, v: &Operator) -> f64 {
    let w = u.matrix().adjoint() * v.matrix();
    let mut angles: Vec<f64> = linalg::eigenvalues(&w).iter().map(|z| z.arg()).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = angles.len();
    let mut largest_gap: f64 = 0.0;
    for k in 0..n {
        let next = if k + 1 < n { angles[k + 1] } else { angles[0] + 2.0 * std::f64::consts::PI };
        largest_gap = largest_gap.max(next - angles[k]);
    }
    let arc = 2.0 * std::f64::consts::PI - largest_gap;
    if arc >= std::f64::consts::PI {
        2.0
    } else {
        2.0 * (arc / 2.0).sin()
    }
}

/// `(E ⊗ id)(|Ω><Ω|)` assembled term by term.
fn choi_direct(e: &Superoperator) -> CMatrix {
    let d = e.dim();
    let mut j = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for k in 0..d {
            let unit = CMatrix::from_fn(d, d, |a, b| if (a, b) == (i, k) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
            j += e.apply_matrix(&unit).kronecker(&unit);
        }
    }
    j / C64::new(d as f64, 0.0)
}

#[test]
fn choi_matches_direct_assembly() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = HilbertSpace::qubits(2);
    let e = random_channel(&s, 2, &mut rng);
    assert!(linalg::max_abs(&(choi(&e).matrix() - choi_direct(&e))) < 1e-14);
}

#[test]
fn composition_law_on_random_qubit_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let q = HilbertSpace::qubits(1);
    for _ in 0..20 {
        let a = random_channel(&q, 2, &mut rng);
        let b = random_channel(&q, 3, &mut rng);
        let direct = choi(&Superoperator::tensor(&a, &b));
        let composed = choi_product(&choi(&a), &choi(&b));
        assert!(linalg::max_abs(&(direct.matrix() - composed.matrix())) < 1e-10);
    }
}

#[test]
fn composition_law_with_unequal_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_channel(&HilbertSpace::single(2), 2, &mut rng);
    let b = random_channel(&HilbertSpace::single(3), 2, &mut rng);
    let direct = choi(&Superoperator::tensor(&a, &b));
    let composed = choi_product(&choi(&a), &choi(&b));
    assert!(linalg::max_abs(&(direct.matrix() - composed.matrix())) < 1e-10);
}

#[test]
fn unitary_choi_is_idempotent_and_random_channels_are_cptp() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = HilbertSpace::qubits(2);
    let u = random_unitary(&s, &mut rng);
    assert!(choi(&Superoperator::from_unitary(&u)).is_unitary_channel(1e-9));
    let e = random_channel(&s, 4, &mut rng);
    let j = choi(&e);
    assert!(j.is_cp(1e-9) && !j.is_unitary_channel(1e-9));
    assert!(linalg::max_abs(&(j.matrix() - j.matrix().adjoint())) < 1e-10);
}

#[test]
fn epsilon2_lower_bound_on_random_channels() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let q = HilbertSpace::qubits(1);
    let s = HilbertSpace::qubits(2);
    for _ in 0..200 {
        let target = random_channel(&s, 1 + rand::Rng::gen_range(&mut rng, 0..4), &mut rng);
        let g = random_unitary(&q, &mut rng);
        let e2 = epsilon2(&target, &g).unwrap();
        let jt = choi(&target);
        let jg = choi(&Superoperator::from_unitary(&g));
        for _ in 0..5 {
            let other = random_channel(&q, 2, &mut rng);
            let product = choi_product(&jg, &choi(&other));
            let lhs = (jt.matrix() - product.matrix()).norm_squared();
            assert!(e2 <= lhs + 1e-12, "{e2} > {lhs}");
        }
    }
}

#[test]
fn unitary_simplification_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let q = HilbertSpace::qubits(1);
    let s = HilbertSpace::qubits(2);
    for _ in 0..20 {
        let t = Superoperator::from_unitary(&random_unitary(&s, &mut rng));
        let g = random_unitary(&q, &mut rng);
        assert!((epsilon2(&t, &g).unwrap() - epsilon2_unitary(&t, &g).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn epsilon1_is_a_rescaled_choi_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let s = HilbertSpace::qubits(2);
    let a = random_channel(&s, 2, &mut rng);
    let b = random_channel(&s, 3, &mut rng);
    let e1 = epsilon1(&a, &b).unwrap();
    let jd = (choi(&a).matrix() - choi(&b).matrix()).norm_squared();
    assert!((e1 - 16.0 * jd).abs() < 1e-10 * e1.max(1.0));
}

#[test]
fn epsilon1_is_invariant_under_common_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s = HilbertSpace::qubits(2);
    let a = random_channel(&s, 2, &mut rng);
    let b = random_channel(&s, 2, &mut rng);
    let w = Superoperator::from_unitary(&random_unitary(&s, &mut rng));
    let before = epsilon1(&a, &b).unwrap();
    let after = epsilon1(&w.compose(&a).unwrap(), &w.compose(&b).unwrap()).unwrap();
    assert!((before - after).abs() < 1e-10);
}

#[test]
fn diamond_bound_dominates_unitary_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for dims in [vec![2], vec![2, 2]] {
        let s = HilbertSpace::new(dims).unwrap();
        for _ in 0..50 {
            let u = random_unitary(&s, &mut rng);
            let v = random_unitary(&s, &mut rng);
            let bound = diamond_upper(&Superoperator::from_unitary(&u), &Superoperator::from_unitary(&v)).unwrap();
            assert!(bound + 1e-12 >= unitary_diamond(&u, &v));
        }
    }
}

#[test]
fn reduced_channel_of_product_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let q = HilbertSpace::qubits(1);
    let u = random_unitary(&q, &mut rng);
    let v = random_unitary(&q, &mut rng);
    let e = Superoperator::from_unitary(&tensor(&u, &v));
    for rho in [DensityMatrix::maximally_mixed(&q), DensityMatrix::basis_state(&q, 1)] {
        let r = reduced_channel(&e, &rho).unwrap();
        assert!(r.max_abs_diff(&Superoperator::from_unitary(&u)) < 1e-12);
        assert!(reduced_error(&e, &u, &rho).unwrap() < 1e-20);
    }
}

#[test]
fn report_serializes_all_fields() {
    let s = HilbertSpace::qubits(2);
    let q = HilbertSpace::qubits(1);
    let id = Superoperator::identity(&s);
    let r = gate_error_report(&id, &id, &Operator::identity(&q), &DensityMatrix::maximally_mixed(&q)).unwrap();
    let json = serde_json::to_value(&r).unwrap();
    for key in ["epsilon1", "epsilon2", "diamond_upper", "reduced_error"] {
        assert!(json.get(key).is_some());
    }
    assert!(!r.non_physical);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reduced_channels_preserve_trace(seed in any::<u64>(), rank in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = HilbertSpace::qubits(2);
        let q = HilbertSpace::qubits(1);
        let e = random_channel(&s, rank, &mut rng);
        let u = random_unitary(&q, &mut rng);
        let rho = DensityMatrix::new(Superoperator::from_unitary(&u).apply(DensityMatrix::basis_state(&q, 0).operator()).unwrap()).unwrap();
        let r = reduced_channel(&e, &rho).unwrap();
        prop_assert!(r.is_trace_preserving(1e-10));
        prop_assert!(choi(&r).is_cp(1e-9));
    }

    #[test]
    fn choi_round_trip_is_exact(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = HilbertSpace::qubits(2);
        let e = random_channel(&s, 2, &mut rng);
        let j = choi(&e);
        let again = choi(&j.to_superoperator(&s).unwrap());
        prop_assert!(linalg::max_abs(&(again.matrix() - j.matrix())) < 1e-12);
        prop_assert!((j.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
    }
}
