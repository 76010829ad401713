use super::*;
use crate::conformal::{assemble_initial_data, ConformalSolution};
use crate::radial::{build_grid, Dimension, RadialGrid, RadialProfile};
use crate::solver::{fixed_point_solve, smooth_schwarzschild_phi, SolveControls};

fn dim3() -> Dimension {
    Dimension::new(3).unwrap()
}

fn schwarzschild(m_points: usize) -> ConformalSolution {
    let g = build_grid(m_points, 1e4, 1.01).unwrap();
    let phi = smooth_schwarzschild_phi(dim3(), 1.0, &g).unwrap();
    ConformalSolution::from_phi(dim3(), phi).unwrap()
}

fn flat(g: &RadialGrid) -> ConformalSolution {
    ConformalSolution::flat(dim3(), g)
}

#[test]
fn flat_residuals_vanish() {
    let g = build_grid(500, 1e3, 1.03).unwrap();
    let data = assemble_initial_data(&flat(&g)).unwrap();
    let pts = default_points(3);
    let report = residual_report(&data, &pts, H_SCALE).unwrap();
    assert_eq!(report.hamiltonian_sup, 0.0);
    assert_eq!(report.momentum_sup, 0.0);
    assert!(report.convergence_order.is_none());
}

#[test]
fn constant_tau_momentum_vanishes() {
    let g = build_grid(500, 1e3, 1.03).unwrap();
    let one = RadialProfile::constant(&g, 1.0);
    let t = RadialProfile::constant(&g, 0.7);
    let zero = RadialProfile::constant(&g, 0.0);
    let sol = ConformalSolution::from_parts(dim3(), one, t, zero.clone(), zero.clone(), zero).unwrap();
    let data = assemble_initial_data(&sol).unwrap();
    let res = momentum_residual(&data, &default_points(3), H_SCALE).unwrap();
    assert!(res.iter().all(|&v| v < 1e-10));
}

#[test]
fn sample_points_are_deterministic_and_in_range() {
    let a = default_points(4);
    assert_eq!(a, default_points(4));
    assert_eq!(a.len(), 64);
    for x in &a {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((0.1 * (1.0 - 1e-12)..=50.0 * (1.0 + 1e-12)).contains(&r));
    }
}

#[test]
fn out_of_range_point_is_rejected() {
    let g = build_grid(200, 10.0, 1.05).unwrap();
    let data = assemble_initial_data(&flat(&g)).unwrap();
    // a flat solution has zero tails, so it is evaluable everywhere
    assert!(hamiltonian_residual(&data, &[vec![100.0, 0.0, 0.0]], H_SCALE).is_ok());
    // an oscillating τ has no tail model, so evaluation stops at r_max
    let one = RadialProfile::constant(&g, 1.0);
    let tau = RadialProfile::from_fn(&g, |r| r.sin()).unwrap();
    let zero = RadialProfile::constant(&g, 0.0);
    let sol = ConformalSolution::from_parts(dim3(), one, tau, zero.clone(), zero.clone(), zero).unwrap();
    let data = assemble_initial_data(&sol).unwrap();
    assert_eq!(data.reach(), 10.0);
    assert!(matches!(
        hamiltonian_residual(&data, &[vec![9.99, 0.0, 0.0]], H_SCALE),
        Err(crate::Error::EvaluationOutOfRange { .. })
    ));
    assert!(momentum_residual(&data, &[vec![0.0, 9.0, 0.0]], H_SCALE).is_ok());
}

#[test]
fn schwarzschild_exterior_hamiltonian_small() {
    let sol = schwarzschild(4000);
    let data = assemble_initial_data(&sol).unwrap();
    // R_g vanishes outside r = 1, leaving (tr k)² − |k|²; relative to (tr k)²
    // the residual sits at the interpolation floor
    let pts: Vec<Vec<f64>> = sample_points(3, 64, 1.0, 50.0);
    let res = hamiltonian_residual(&data, &pts, H_SCALE).unwrap();
    for (x, v) in pts.iter().zip(&res) {
        let tau = sol.tau.evaluate(x.iter().map(|c| c * c).sum::<f64>().sqrt()).unwrap();
        assert!(v.abs() < 1e-8 * tau * tau, "{v:e} at {x:?}");
    }
    // far enough out the absolute residual is small too
    let far: Vec<Vec<f64>> = sample_points(3, 16, 2.0, 50.0);
    let sup = hamiltonian_residual(&data, &far, H_SCALE)
        .unwrap()
        .iter()
        .fold(0.0_f64, |a, v| a.max(v.abs()));
    assert!(sup < 1e-8, "{sup:e}");
}

#[test]
fn trace_of_k_is_tau() {
    let sol = schwarzschild(2000);
    let data = assemble_initial_data(&sol).unwrap();
    for x in default_points(3) {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        let (g, k) = data.evaluate(&x).unwrap();
        let tr = k.trace() / g.get(0, 0);
        let tau = sol.tau.evaluate(r).unwrap();
        assert!((tr - tau).abs() < 1e-10 * tau.abs().max(1.0));
    }
}

#[test]
fn residuals_converge_under_refinement() {
    let run = |m: usize, h: f64| {
        let data = assemble_initial_data(&schwarzschild(m)).unwrap();
        residual_report(&data, &default_points(3), h).unwrap()
    };
    let coarse = run(1000, H_SCALE);
    let fine = run(2000, H_SCALE / 2.0);
    let (oh, om) = refinement_order(&coarse, &fine);
    assert!(oh >= 2.0, "hamiltonian order {oh}");
    assert!(om >= 2.0, "momentum order {om}");
}

#[test]
fn sphere_area_values() {
    use std::f64::consts::PI;
    assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
    assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
}

#[test]
fn convention_ratios_are_fixed() {
    for n in 3..7 {
        let dim = Dimension::new(n).unwrap();
        let nf = n as f64;
        let a = conventions_from_limit(dim, 0.37);
        let b = conventions_from_flux(dim, -5.1);
        for c in [a, b] {
            assert!((c[1] / c[0] - (nf - 1.0) / 4.0).abs() < 1e-14);
            assert!((c[2] / c[0] - (nf - 1.0) / (nf - 2.0)).abs() < 1e-14);
        }
    }
    // n-dimensional Schwarzschild calibration: L = m(n−2)/2 gives −m
    for n in 3..7 {
        let dim = Dimension::new(n).unwrap();
        let m = 1.3;
        let s = conventions_from_limit(dim, m * (n as f64 - 2.0) / 2.0);
        assert!((s[0] + m).abs() < 1e-14);
    }
}

#[test]
fn flat_mass_is_zero() {
    let g = build_grid(500, 1e3, 1.03).unwrap();
    let data = assemble_initial_data(&flat(&g)).unwrap();
    let m = adm_mass(&data).unwrap();
    assert_eq!(m.mass_standard, MassValue::Finite(0.0));
    assert_eq!(m.mass_paper_radial, MassValue::Finite(0.0));
    assert_eq!(m.mass_paper_surface, Some(MassValue::Finite(0.0)));
    assert!(!m.diverges);
    for f in m.surface.unwrap().flux {
        assert_eq!(f, 0.0);
    }
}

#[test]
fn schwarzschild_mass_both_estimators() {
    let sol = schwarzschild(4000);
    let data = assemble_initial_data(&sol).unwrap();
    let m = adm_mass(&data).unwrap();
    assert!((m.mass_standard.value() + 1.0).abs() < 1e-6, "{:?}", m.mass_standard);
    assert!((m.mass_paper_radial.value() + 0.5).abs() < 1e-6);
    let s = m.surface.as_ref().unwrap();
    assert!((s.conventions[0].value() + 1.0).abs() < 1e-2);
    assert!((m.mass_paper_surface.unwrap().value() + 2.0).abs() < 2e-2);
    // single sphere at r = 1000, closed-form flux contraction
    let flux = surface_flux(&data, 1e3).unwrap();
    let standard = conventions_from_flux(dim3(), flux)[0];
    assert!((standard + 1.0).abs() < 1e-2, "{standard}");
}

#[test]
fn fixed_point_q15_mass_and_tail_limit() {
    let g = build_grid(4000, 1e4, 1.01).unwrap();
    let tau = RadialProfile::from_fn(&g, |r| (1.0 + r * r).powf(-0.75)).unwrap();
    let (sol, _) = fixed_point_solve(dim3(), &tau, &SolveControls::default()).unwrap();
    let m = adm_mass_radial(dim3(), &sol.phi).unwrap();
    assert!(!m.diverges);
    let target = -2.0 / 9.0;
    assert!((m.mass_standard.value() / target - 1.0).abs() < 0.02, "{:?}", m.mass_standard);
    let t = tail_limit_check(dim3(), &sol.phi, 1.0, 1.5).unwrap();
    assert!((t.predicted - 1.0 / 9.0).abs() < 1e-15);
    assert!((t.printed - 1.0 / 3.0).abs() < 1e-15);
    assert!(t.relative_error() < 0.02, "{}", t.measured);
}

#[test]
fn fixed_point_q13_mass_diverges() {
    let g = build_grid(4000, 1e4, 1.01).unwrap();
    let tau = RadialProfile::from_fn(&g, |r| (1.0 + r * r).powf(-0.65)).unwrap();
    let (sol, _) = fixed_point_solve(dim3(), &tau, &SolveControls::default()).unwrap();
    let m = adm_mass_radial(dim3(), &sol.phi).unwrap();
    assert!(m.diverges);
    assert_eq!(m.mass_standard, MassValue::NegInfinity);
    assert_eq!(m.mass_paper_radial, MassValue::NegInfinity);
    assert_eq!(serde_json::to_string(&m.mass_standard).unwrap(), "null");
}

#[test]
fn schwarzschild_tail_limit() {
    let sol = schwarzschild(2000);
    let c = 3.0 / 2f64.sqrt();
    let t = tail_limit_check(dim3(), &sol.phi, c, 1.5).unwrap();
    assert!((t.predicted - 0.5).abs() < 1e-14);
    assert!((t.measured - 0.5).abs() < 1e-8, "{}", t.measured);
}

#[test]
fn flat_tail_limit_is_zero() {
    let g = build_grid(500, 1e3, 1.03).unwrap();
    let t = tail_limit_check(dim3(), &RadialProfile::constant(&g, 1.0), 0.0, 1.5).unwrap();
    assert_eq!(t.measured, 0.0);
    assert_eq!(t.predicted, 0.0);
}

#[test]
fn sparse_tail_is_rejected() {
    let mut nodes: Vec<f64> = (0..64).map(|k| k as f64).collect();
    nodes.extend([300.0, 3000.0, 1e4]);
    let g = RadialGrid::from_nodes(nodes).unwrap();
    let phi = RadialProfile::constant(&g, 1.0);
    assert!(matches!(adm_mass_radial(dim3(), &phi), Err(crate::Error::NoTail(_))));
    assert!(matches!(
        tail_limit_check(dim3(), &phi, 0.0, 1.5),
        Err(crate::Error::NoTail(_))
    ));
}

#[test]
fn schwarzschild_decay() {
    let sol = schwarzschild(4000);
    let data = assemble_initial_data(&sol).unwrap();
    let d = decay_exponents(&data, &DecayWindows::for_r_max(1e4)).unwrap();
    assert!((d.tau_exponent - 1.5).abs() < 0.05, "{}", d.tau_exponent);
    assert!((d.metric_exponent - 1.0).abs() < 0.05, "{}", d.metric_exponent);
    assert!((d.tau_fit.coefficient - 3.0 / 2f64.sqrt()).abs() < 0.02 * 3.0 / 2f64.sqrt());
}

#[test]
fn synthetic_power_law_decay_is_exact() {
    let g = build_grid(2000, 1e4, 1.01).unwrap();
    let n = dim3();
    let e = n.critical_exponent() - 2.0;
    // φ^(N−2) − 1 = r^−2 and τ = r^−1.5 beyond r = 1
    let phi = RadialProfile::from_fn(&g, |r| (1.0 + r.max(1.0).powi(-2)).powf(1.0 / e)).unwrap();
    let tau = RadialProfile::from_fn(&g, |r| r.max(1.0).powf(-1.5)).unwrap();
    let zero = RadialProfile::constant(&g, 0.0);
    let sol = ConformalSolution::from_parts(n, phi, tau, zero.clone(), zero.clone(), zero).unwrap();
    let data = assemble_initial_data(&sol).unwrap();
    let d = decay_exponents(&data, &DecayWindows::for_r_max(1e4)).unwrap();
    assert!((d.metric_exponent - 2.0).abs() < 1e-9, "{}", d.metric_exponent);
    assert!((d.tau_exponent - 1.5).abs() < 1e-12);
    assert!((d.k_exponent - 1.5).abs() < 1e-3);
}

#[test]
fn decay_windows_must_span_enough() {
    let sol = schwarzschild(1000);
    let data = assemble_initial_data(&sol).unwrap();
    let w = DecayWindows {
        tau: (1e3, 1e4),
        ..DecayWindows::for_r_max(1e4)
    };
    assert!(decay_exponents(&data, &w).is_err());
}

#[test]
fn fixed_point_q2_decay() {
    let g = build_grid(4000, 1e4, 1.01).unwrap();
    let tau = RadialProfile::from_fn(&g, |r| 1.0 / (1.0 + r * r)).unwrap();
    let (sol, _) = fixed_point_solve(dim3(), &tau, &SolveControls::default()).unwrap();
    let data = assemble_initial_data(&sol).unwrap();
    let d = decay_exponents(&data, &DecayWindows::for_r_max(1e4)).unwrap();
    assert!((d.k_exponent - 2.0).abs() < 0.1, "{}", d.k_exponent);
    assert!((d.metric_exponent - 2.0).abs() < 0.1, "{}", d.metric_exponent);
    let m = adm_mass_radial(dim3(), &sol.phi).unwrap();
    assert_eq!(m.mass_standard.sign_class(1e-2), 0);
}

#[test]
fn flat_solution_passes_checks() {
    let g = build_grid(500, 1e3, 1.03).unwrap();
    let c = check_solution(&flat(&g));
    assert!(c.passed(), "{:?}", c.failures);
    assert_eq!(c.identity_residual, 0.0);
    assert_eq!(c.lw_identity, 0.0);
    assert_eq!(c.div_w_identity, 0.0);
    assert_eq!(c.lichnerowicz_residual, 0.0);
}

#[test]
fn schwarzschild_solution_passes_checks() {
    let c = check_solution(&schwarzschild(4000));
    assert!(c.passed(), "{:?}", c.failures);
}

#[test]
fn decreasing_phi_fails_monotonicity() {
    let g = build_grid(500, 1e3, 1.03).unwrap();
    let phi = RadialProfile::from_fn(&g, |r| 1.0 + (-r).exp()).unwrap();
    let zero = RadialProfile::constant(&g, 0.0);
    let sol = ConformalSolution::from_parts(dim3(), phi, zero.clone(), zero.clone(), zero.clone(), zero)
        .unwrap();
    let c = check_solution(&sol);
    assert!(!c.monotone);
    assert!(!c.passed());
    assert!(c.identity_residual.is_infinite());
}

#[test]
fn check_outcomes_scale_invariant() {
    // τ_c(r) = c τ(c r) on the grid scaled by 1/c
    let base = build_grid(2000, 1e4, 1.01).unwrap();
    let ctl = SolveControls::default();
    let outcome = |c: f64| {
        let nodes: Vec<f64> = base.nodes().iter().map(|r| r / c).collect();
        let g = RadialGrid::from_nodes(nodes).unwrap();
        let tau = RadialProfile::from_fn(&g, |r| c * (1.0 + (c * r).powi(2)).powf(-0.75)).unwrap();
        let (sol, _) = fixed_point_solve(dim3(), &tau, &ctl).unwrap();
        let chk = check_solution(&sol);
        (chk.monotone, chk.passed())
    };
    let reference = outcome(1.0);
    for c in [0.5, 2.0] {
        assert_eq!(outcome(c), reference);
    }
}
