use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zenoforge::channels::choi;
use zenoforge::grape::*;
use zenoforge::lindblad::{LindbladSpec, Superoperator};
use zenoforge::models::{two_qubit_control_problem, two_qubit_controls, ModelName, Objective};
use zenoforge::ops::{expm, HilbertSpace};

const STEP: f64 = 1e-6;

fn central_difference(sys: &ControlSystem, sched: &PulseSchedule, target: &Target) -> DMatrix<f64> {
    let a = sched.amplitudes();
    DMatrix::from_fn(a.nrows(), a.ncols(), |l, s| {
        let mut plus = a.clone();
        let mut minus = a.clone();
        plus[(l, s)] += STEP;
        minus[(l, s)] -= STEP;
        let fp = objective(sys, &PulseSchedule::new(plus).unwrap(), target).unwrap();
        let fm = objective(sys, &PulseSchedule::new(minus).unwrap(), target).unwrap();
        (fp - fm) / (2.0 * STEP)
    })
}

fn max_relative_deviation(analytic: &DMatrix<f64>, numeric: &DMatrix<f64>) -> f64 {
    let scale = numeric.amax().max(1e-12);
    (analytic - numeric).amax() / scale
}

fn check_gradients(objective: Objective) {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (sys, target) = two_qubit_control_problem(ModelName::TwoQubitAmp, 1.0, &hadamard(), objective, 1.0).unwrap();
    for _ in 0..20 {
        let sched = PulseSchedule::random(2, 6, 1.0, &mut rng).unwrap();
        let (_, grad) = objective_and_gradient(&sys, &sched, &target).unwrap();
        let fd = central_difference(&sys, &sched, &target);
        let dev = max_relative_deviation(&grad, &fd);
        assert!(dev < 1e-5, "{objective:?}: relative deviation {dev:e}");
    }
}

#[test]
fn epsilon1_gradient_matches_finite_differences() {
    check_gradients(Objective::Epsilon1);
}

#[test]
fn epsilon2_gradient_matches_finite_differences() {
    check_gradients(Objective::Epsilon2);
}

#[test]
fn gradient_vanishes_at_the_goal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (sys, _) = two_qubit_control_problem(ModelName::TwoQubitAmp, 2.0, &hadamard(), Objective::Epsilon1, 1.0).unwrap();
    let sched = PulseSchedule::random(2, 4, 1.0, &mut rng).unwrap();
    let goal = propagate_schedule(&sys, &sched).unwrap();
    let (value, grad) = objective_and_gradient(&sys, &sched, &Target::Epsilon1(goal)).unwrap();
    assert!(value < 1e-20);
    assert!(grad.amax() < 1e-8);
}

#[test]
fn single_slice_matches_commutator_exponential() {
    let s = HilbertSpace::qubits(2);
    let [h0, h1] = two_qubit_controls();
    let sys = ControlSystem::new(None, vec![h0.clone(), h1.clone()], LindbladSpec::dissipative(&s, vec![]).unwrap(), 0.7).unwrap();
    let sched = PulseSchedule::new(DMatrix::from_column_slice(2, 1, &[0.4, -1.3])).unwrap();
    let h = &h0.scale_real(0.4) + &h1.scale_real(-1.3);
    let direct = expm(&(Superoperator::hamiltonian(&h).into_matrix() * zenoforge::ops::c(0.7, 0.0))).unwrap();
    let e = propagate_schedule(&sys, &sched).unwrap();
    assert!(zenoforge::ops::linalg::max_abs(&(e.matrix() - direct)) < 1e-12);
}

#[test]
fn splitting_a_constant_slice_changes_nothing() {
    let (sys, _) = two_qubit_control_problem(ModelName::TwoQubitDephasing, 1.5, &hadamard(), Objective::Epsilon2, 1.0).unwrap();
    let one = PulseSchedule::new(DMatrix::from_column_slice(2, 1, &[0.8, 0.3])).unwrap();
    let two = PulseSchedule::new(DMatrix::from_column_slice(2, 2, &[0.8, 0.3, 0.8, 0.3])).unwrap();
    let a = propagate_schedule(&sys, &one).unwrap();
    let b = propagate_schedule(&sys, &two).unwrap();
    assert!(a.max_abs_diff(&b) < 1e-12);
}

#[test]
fn epsilon2_is_bounded_by_rescaled_epsilon1() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = hadamard();
    for name in [ModelName::TwoQubitAmp, ModelName::TwoQubitDephasing] {
        let (sys, t1) = two_qubit_control_problem(name, 3.0, &g, Objective::Epsilon1, 1.0).unwrap();
        let t2 = Target::Epsilon2(g.clone());
        for _ in 0..10 {
            let sched = PulseSchedule::random(2, 8, 1.0, &mut rng).unwrap();
            let e1 = objective(&sys, &sched, &t1).unwrap();
            let e2 = objective(&sys, &sched, &t2).unwrap();
            assert!(e2 <= e1 / 16.0 + 1e-12, "{e2} > {e1}/16");
        }
    }
}

fn quick_options(seed: u64) -> OptimizeOptions {
    OptimizeOptions { slices: 8, restarts: 3, seed, max_iterations: 150, ..OptimizeOptions::default() }
}

#[test]
fn optimization_is_deterministic_and_monotone() {
    let (sys, target) = two_qubit_control_problem(ModelName::TwoQubitAmp, 5.0, &hadamard(), Objective::Epsilon2, 1.0).unwrap();
    let a = optimize(&sys, &target, &quick_options(11)).unwrap();
    let b = optimize(&sys, &target, &quick_options(11)).unwrap();
    assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
    assert_eq!(a.best.amplitudes(), b.best.amplitudes());
    for trace in &a.traces {
        assert!(trace.values.windows(2).all(|w| w[1] <= w[0]));
    }
    assert_eq!(objective(&sys, &a.best, &target).unwrap().to_bits(), a.best_value.to_bits());
}

#[test]
fn without_noise_the_hadamard_stays_out_of_reach() {
    let (sys, target) = two_qubit_control_problem(ModelName::TwoQubitAmp, 0.0, &hadamard(), Objective::Epsilon2, 1.0).unwrap();
    let r = optimize(&sys, &target, &quick_options(2)).unwrap();
    assert!(r.best_value > 1e-2, "noiseless optimum {}", r.best_value);
}

#[test]
fn invalid_inputs_are_rejected() {
    let (sys, target) = two_qubit_control_problem(ModelName::TwoQubitAmp, 1.0, &hadamard(), Objective::Epsilon2, 1.0).unwrap();
    assert!(PulseSchedule::new(DMatrix::from_element(2, 2, f64::NAN)).is_err());
    let wrong = PulseSchedule::zeros(3, 2).unwrap();
    assert!(propagate_schedule(&sys, &wrong).is_err());
    let opts = OptimizeOptions { restarts: 0, ..OptimizeOptions::default() };
    assert!(optimize(&sys, &target, &opts).is_err());
    assert!(gamma_sweep(|g| two_qubit_control_problem(ModelName::TwoQubitAmp, g, &hadamard(), Objective::Epsilon2, 1.0), &[], &hadamard(), &opts).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn propagation_is_cptp(seed in any::<u64>(), gamma in 0.0f64..50.0, slices in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let name = if seed % 2 == 0 { ModelName::TwoQubitAmp } else { ModelName::TwoQubitDephasing };
        let (sys, _) = two_qubit_control_problem(name, gamma, &hadamard(), Objective::Epsilon2, 1.0).unwrap();
        let e = propagate_schedule(&sys, &PulseSchedule::random(2, slices, 1.0, &mut rng).unwrap()).unwrap();
        prop_assert!(e.is_trace_preserving(1e-9));
        prop_assert!(choi(&e).min_eigenvalue() > -1e-8);
    }
}
