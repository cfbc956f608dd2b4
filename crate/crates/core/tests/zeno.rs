use zenoforge::lindblad::{detect_dfs, steady_superprojector, Superoperator};
use zenoforge::models::{atom_operators, two_qubit_amp_spec, two_qubit_controls};
use zenoforge::ops::{expm, linalg, CMatrix, C64};
use zenoforge::zeno::*;

fn amp_setup() -> (Superoperator, Superoperator) {
    let p = steady_superprojector(&two_qubit_amp_spec(1.0).unwrap()).unwrap();
    let k = Superoperator::hamiltonian(&two_qubit_controls()[0]);
    (p, k)
}

#[test]
fn zeno_product_converges_at_first_order() {
    let (p, k) = amp_setup();
    let limit = zeno_limit(&p, &k, 1.0).unwrap();
    let errors: Vec<f64> = [8, 16, 32, 64, 128]
        .iter()
        .map(|&n| linalg::spectral_norm(&(zeno_product(&p, &k, 1.0, n).unwrap().matrix() - limit.matrix())))
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.8..2.2).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn zeno_limit_is_the_projected_unitary_on_the_protected_block() {
    let spec = two_qubit_amp_spec(1.0).unwrap();
    let dfs = detect_dfs(&spec);
    let (p, k) = amp_setup();
    let limit = zeno_limit(&p, &k, 0.8).unwrap();
    let ph = project_hamiltonian(&two_qubit_controls()[0], &dfs, 0).unwrap();
    let block = &dfs.blocks()[0].basis;
    let u = block * expm(&(ph.matrix() * C64::new(0.0, -0.8))).unwrap() * block.adjoint();
    for a in 0..2 {
        for b in 0..2 {
            let rho: CMatrix = block.column(a) * block.column(b).adjoint();
            let evolved = limit.apply_matrix(&rho);
            assert!(linalg::max_abs(&(evolved - &u * &rho * u.adjoint())) < 1e-10);
        }
    }
}

#[test]
fn strong_damping_error_shrinks_inversely_with_rate() {
    let [h0, _] = two_qubit_controls();
    let base = two_qubit_amp_spec(1.0).unwrap().with_hamiltonian(h0).unwrap();
    let errors: Vec<f64> =
        [10.0, 20.0, 40.0, 80.0].iter().map(|&g| strong_damping_error(&base.scale_rates(g).unwrap(), 1.0, 1.0).unwrap()).collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((2.0 / 1.5..=2.0 * 1.5).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn atom_zeno_dynamics_stays_in_the_lower_levels() {
    let (spec, [h0, h1]) = atom_operators(3, &[1.0, 0.5, 2.0]).unwrap();
    let p = steady_superprojector(&spec).unwrap();
    for h in [h0, h1] {
        let limit = zeno_limit(&p, &Superoperator::hamiltonian(&h), 1.3).unwrap();
        let rho = CMatrix::from_fn(4, 4, |a, b| if a == b && a < 3 { C64::new(1.0 / 3.0, 0.0) } else { C64::new(0.0, 0.0) });
        let out = limit.apply_matrix(&rho);
        assert!(out[(3, 3)].norm() < 1e-12);
        assert!((out.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn invalid_arguments_are_rejected() {
    let (p, k) = amp_setup();
    assert!(zeno_product(&p, &k, 1.0, 0).is_err());
    assert!(zeno_product(&p, &k, -1.0, 4).is_err());
    assert!(strong_damping_error(&two_qubit_amp_spec(1.0).unwrap(), 1.0, -0.5).is_err());
}
