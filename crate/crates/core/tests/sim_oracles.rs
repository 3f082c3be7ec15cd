mod common;

use common::*;
use raibfd::numerics::{frobenius_sq, hermitian_eig};
use raibfd::sim::manifold::{modulus_deviation, tangency_residual};
use raibfd::sim::{
    ao_sim, cost_f, p_sim_update, quantize_phases, rcg_minimize, rcg_minimize_observed, AoOptions, LeastSquares,
    Objective, PhaseResolution, RcgOptions,
};
use raibfd::{c64, CMat, CVec};

#[test]
fn p_sim_update_attains_eigenvalue_sum_and_beats_random_subspaces() {
    let mut r = rng(31);
    for (m_t, m_d) in [(8, 3), (6, 2), (4, 4)] {
        let g = random_matrix(&mut r, m_t + 2, m_t);
        let p = p_sim_update(&g, m_d).unwrap();
        assert!((p.adjoint() * &p - CMat::identity(m_d, m_d)).norm() < 1e-10);
        let cost = frobenius_sq(&(&g * &p));
        let eig = hermitian_eig(&(g.adjoint() * &g)).unwrap();
        let floor: f64 = eig.values[..m_d].iter().sum();
        assert!(rel_err(cost, floor) < 1e-10);
        if m_d == m_t {
            assert!(rel_err(cost, frobenius_sq(&g)) < 1e-10);
        }
        for _ in 0..2000 {
            let q = random_semi_unitary(&mut r, m_t, m_d);
            let other = frobenius_sq(&(&g * &q));
            assert!(other - cost >= -1e-9 * cost, "random subspace beat the eigen update");
        }
    }
}

#[test]
fn p_sim_update_finds_the_null_space_of_a_wide_channel() {
    let mut r = rng(35);
    let g = random_matrix(&mut r, 3, 6);
    let p = p_sim_update(&g, 3).unwrap();
    assert!(frobenius_sq(&(&g * &p)) <= 1e-12 * frobenius_sq(&g));
}

#[test]
fn p_sim_update_rejects_oversized_subspace() {
    let g = CMat::identity(3, 3);
    assert!(p_sim_update(&g, 4).is_err());
}

#[test]
fn rcg_keeps_manifold_invariants_on_random_instances() {
    let mut r = rng(32);
    for run in 0..100 {
        let m_ris = 1 + run % 12;
        let rows = 1 + run % 7;
        let c = random_matrix(&mut r, rows, m_ris);
        let b = random_vector(&mut r, rows);
        let problem = LeastSquares::new(c, b).unwrap();
        let d0 = random_phases(&mut r, m_ris);
        let opts = RcgOptions {
            max_iters: 200,
            ..Default::default()
        };
        let mut last = f64::INFINITY;
        let out = rcg_minimize_observed(&problem, &d0, &opts, |view| {
            assert!(modulus_deviation(view.point) <= 1e-12, "run {run}: off manifold");
            let scale_g = 1.0 + view.gradient.camax();
            let scale_c = 1.0 + view.direction.camax();
            assert!(tangency_residual(view.gradient, view.point) <= 1e-10 * scale_g);
            assert!(tangency_residual(view.direction, view.point) <= 1e-10 * scale_c);
            assert!(view.cost <= last, "run {run}: cost increased");
            last = view.cost;
        })
        .unwrap();
        assert!(out.costs.windows(2).all(|w| w[1] <= w[0]));
        assert!((problem.cost(&out.point).unwrap() - out.final_cost()).abs() <= 1e-12 * (1.0 + out.final_cost()));
    }
}

#[test]
fn rcg_scalar_circle_reaches_zero() {
    let problem = LeastSquares::new(
        CMat::from_element(1, 1, c64::new(1.0, 0.0)),
        CVec::from_element(1, c64::new(1.0, 0.0)),
    )
    .unwrap();
    let mut r = rng(33);
    for _ in 0..20 {
        let out = rcg_minimize(&problem, &random_phases(&mut r, 1), &RcgOptions::default()).unwrap();
        assert!(out.final_cost() <= 1e-12);
        assert!((out.point[0] + c64::new(1.0, 0.0)).norm() < 1e-6);
    }
}

#[test]
fn rcg_identity_with_irreducible_residual() {
    let problem = LeastSquares::new(
        CMat::identity(2, 2),
        CVec::from_vec(vec![c64::new(2.0, 0.0), c64::new(0.0, 0.0)]),
    )
    .unwrap();
    let d0 = CVec::from_vec(vec![c64::from_polar(1.0, 0.3), c64::from_polar(1.0, 2.0)]);
    let out = rcg_minimize(&problem, &d0, &RcgOptions::default()).unwrap();
    assert!((out.final_cost() - 2.0).abs() < 1e-10);
}

#[test]
fn quantizer_keeps_grid_points() {
    for bits in 2..=6u8 {
        let n = 1usize << bits;
        let step = 2.0 * std::f64::consts::PI / n as f64;
        let d = CVec::from_fn(n, |k, _| c64::from_polar(1.0, k as f64 * step));
        assert!((quantize_phases(&d, bits) - &d).norm() < 1e-12);
    }
}

#[test]
fn ao_accepted_cost_is_monotone_and_quantization_never_hurts() {
    let mut r = rng(34);
    for trial in 0..12 {
        let ch = random_channels(&mut r, 4, 3, 12, 1, 1, 0.3);
        let resolution = match trial % 3 {
            0 => PhaseResolution::Continuous,
            1 => PhaseResolution::Bits(2),
            _ => PhaseResolution::Bits(4),
        };
        let d0 = random_phases(&mut r, 12);
        let opts = AoOptions {
            max_outer: 20,
            ..Default::default()
        };
        let out = ao_sim(&ch, 2, resolution, &d0, &opts).unwrap();
        let costs: Vec<f64> = out.trace.entries.iter().map(|e| e.cost).collect();
        assert!(
            costs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)),
            "trial {trial}: {costs:?}"
        );
        assert!(modulus_deviation(&out.ris.d) <= 1e-12);
        assert!((p_semi_unitary_residual(&out.p_sim)) < 1e-10);
        // Final reported cost is the cost of the returned state.
        let (c, b) = raibfd::sim::assemble_ls(&ch, &out.p_sim).unwrap();
        assert!(rel_err(cost_f(&c, &b, &out.ris.d), out.trace.final_cost()) < 1e-9);
        if let PhaseResolution::Bits(bits) = resolution {
            assert_eq!(quantize_phases(&out.ris.d, bits), out.ris.d);
            assert!(out.trace.final_cost() <= costs[0]);
        }
    }
}

fn p_semi_unitary_residual(p: &CMat) -> f64 {
    (p.adjoint() * p - CMat::identity(p.ncols(), p.ncols())).norm()
}
