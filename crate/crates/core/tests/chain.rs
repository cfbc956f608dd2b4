use proptest::prelude::*;
use zenoforge::chain::*;
use zenoforge::lie::dfs_lie_dimension;
use zenoforge::lindblad::{apply_superprojector, dual_generator};
use zenoforge::ops::{embed, linalg, Axis, CMatrix, Operator};

fn bond(n: usize, k: usize, axis: Axis) -> CMatrix {
    embed(&vec![2; n], k, &axis.matrix()) * embed(&vec![2; n], k + 1, &axis.matrix())
}

#[test]
fn schedule_identities_hold_for_small_chains() {
    for n in 3..=5 {
        let s = generation_schedule(n).unwrap();
        assert!(s.identities.iter().all(|id| id.residual < 1e-9));
        let expected = n * (n - 1) / 2 + n * (n - 1) * (n - 2) / 6;
        assert_eq!(s.inventory_len(), expected);
    }
}

#[test]
fn step_one_on_four_qubits_matches_dense_commutator() {
    let s = generation_schedule(4).unwrap();
    let id = s.identities.iter().find(|id| id.label == "extend-4").unwrap();
    let h23 = heisenberg_coupling(4, 1, 2).into_matrix();
    let chain: CMatrix = (0..3).map(|k| heisenberg_coupling(4, k, k + 1).into_matrix()).sum();
    let lhs = (&h23 * &chain - &chain * &h23) * zenoforge::ops::I;
    assert!(linalg::max_abs(&(lhs - id.rhs.realize(4))) < 1e-9);
}

#[test]
fn four_body_identities_embed() {
    for n in [4, 5] {
        let ids = four_body_identities(n).unwrap();
        assert_eq!(ids.len(), 2);
        assert!(ids.iter().all(|id| id.residual < 1e-9));
    }
    assert!(four_body_identities(3).is_err());
}

#[test]
fn dual_action_matches_dense_generator() {
    let (gx, gy, gz) = (0.3, 1.1, 0.7);
    let n = 3;
    let model = build_chain(n, gx, gy, gz).unwrap();
    let dual = dual_generator(&model.spec);
    let m = dual_action_matrix(gx, gy, gz);
    let axes = Axis::ALL;
    for (col, &ax) in axes.iter().enumerate() {
        let x = bond(n, 0, ax);
        let out = dual.apply_matrix(&x);
        let expected: CMatrix = (0..3).map(|row| bond(n, 0, axes[row]) * zenoforge::ops::c(m[(row, col)], 0.0)).sum();
        assert!(linalg::max_abs(&(out - expected)) < 1e-9);
    }
}

#[test]
fn chain_controls_project_to_heisenberg_form() {
    for n in [3, 4] {
        let model = build_chain(n, 1.0, 1.0, 1.0).unwrap();
        let p0 = apply_superprojector(&model.spec, &model.h0).unwrap();
        let p1 = apply_superprojector(&model.spec, &model.h1).unwrap();
        let heis: CMatrix = (0..n - 1).map(|k| heisenberg_coupling(n, k, k + 1).into_matrix()).sum();
        let third = zenoforge::ops::c(1.0 / 3.0, 0.0);
        assert!(linalg::max_abs(&(p0.matrix() - &heis * third)) < 1e-8);
        assert!(linalg::max_abs(&(p1.matrix() - heisenberg_coupling(n, 0, 1).into_matrix() * third)) < 1e-8);
    }
}

#[test]
fn lie_dimensions_sit_between_su_and_u_sums() {
    for (n, expected) in [(3usize, 4usize), (4, 12), (5, 40)] {
        let model = build_chain(n, 1.0, 1.0, 1.0).unwrap();
        let dims = dfs_lie_dimension(&model.spec, &[model.h0.clone(), model.h1.clone()]).unwrap();
        let got = dims.unital_dim.unwrap();
        assert_eq!(got, expected);
        assert!((sum_dim_su(n as u32) as usize) < got && got < sum_dim_u(n as u32) as usize);
    }
}

#[test]
fn chain_dissipator_is_unital() {
    let model = build_chain(4, 0.5, 1.0, 2.0).unwrap();
    assert!(model.spec.is_unital(1e-12));
    let h = Operator::identity(model.spec.space());
    assert!(apply_superprojector(&model.spec, &h).unwrap().max_abs_diff(&h) < 1e-10);
}

#[test]
fn asymptotic_ratio_band() {
    for n in 16..=24u32 {
        let ratio = sum_dim_u(n) as f64 / asymptotic_dim(n);
        assert!((0.8..=1.1).contains(&ratio), "N={n}: {ratio}");
    }
}

proptest! {
    #[test]
    fn top_multiplet_is_unique(n in 1u32..60) {
        prop_assert_eq!(dfs_dimension(n, n).unwrap(), 1);
    }

    #[test]
    fn dual_action_rows_sum_to_zero(gx in 0.0f64..5.0, gy in 0.0f64..5.0, gz in 0.0f64..5.0) {
        let m = dual_action_matrix(gx, gy, gz);
        for r in 0..3 {
            prop_assert!((m[(r, 0)] + m[(r, 1)] + m[(r, 2)]).abs() < 1e-12);
        }
        if let Some(g) = gamma_bar(gx, gy, gz) {
            prop_assert!(g > 0.0);
        }
    }
}
