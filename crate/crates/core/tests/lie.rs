use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zenoforge::channels::random_unitary;
use zenoforge::lie::*;
use zenoforge::models::{atom_operators, two_qubit_controls};
use zenoforge::ops::{CMatrix, HilbertSpace, Operator, C64};

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> Operator {
    let g = CMatrix::from_fn(d, d, |_, _| C64::new(rand::Rng::gen_range(rng, -1.0..1.0), rand::Rng::gen_range(rng, -1.0..1.0)));
    Operator::from_matrix((&g + g.adjoint()) * C64::new(0.5, 0.0)).unwrap()
}

#[test]
fn commuting_controls_span_only_themselves() {
    let b = lie_closure(&two_qubit_controls()).unwrap();
    assert_eq!(b.len(), 2);
}

#[test]
fn generic_pairs_generate_the_full_unitary_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for d in 2..=4 {
        let gens = [random_hermitian(d, &mut rng), random_hermitian(d, &mut rng)];
        let v = controllability_verdict(&lie_closure(&gens).unwrap());
        assert_eq!(v.dim, d * d);
        assert!(v.equals_u);
    }
}

#[test]
fn atom_controls_are_not_controllable_without_noise() {
    for n in 2..=5 {
        let (_, controls) = atom_operators(n, &vec![1.0; n]).unwrap();
        assert_eq!(closure_dim(&controls).unwrap(), 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dimension_ignores_order_and_basis(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = HilbertSpace::single(3);
        let a = random_hermitian(3, &mut rng);
        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 0.0)]));
        let b = Operator::from_matrix(diag).unwrap();
        let forward = closure_dim(&[a.clone(), b.clone()]).unwrap();
        let backward = closure_dim(&[b.clone(), a.clone()]).unwrap();
        prop_assert_eq!(forward, backward);
        let u = random_unitary(&s, &mut rng);
        let rot = |h: &Operator| Operator::from_matrix(u.matrix() * h.matrix() * u.matrix().adjoint()).unwrap();
        prop_assert_eq!(closure_dim(&[rot(&a), rot(&b)]).unwrap(), forward);
        prop_assert!(forward <= 9);
    }

    #[test]
    fn scaling_generators_leaves_the_span_unchanged(seed in any::<u64>(), k in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_hermitian(2, &mut rng);
        let b = Operator::from_matrix(zenoforge::ops::Axis::Z.matrix()).unwrap();
        prop_assert_eq!(closure_dim(&[a.scale_real(k), b.clone()]).unwrap(), closure_dim(&[a, b]).unwrap());
    }
}
