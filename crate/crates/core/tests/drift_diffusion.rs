use bipolar_relax_core::drift_diffusion::*;
use bipolar_relax_core::*;

#[test]
fn explicit_step_rejects_oversized_dt() {
    let g = Grid::line(1.0, 20).unwrap();
    let law = GasLaw::power_law(1.0, 2.0).unwrap();
    let s = EquilibriumState::uniform(&g, 1.0, 1.0).unwrap();
    let lim = dd_stable_dt(&s, &law, &law, 0.5).unwrap();
    let r = dd_step(&s, &law, &law, 2.0 * lim, &DdOptions::default());
    assert!(matches!(r, Err(Error::Stability { .. })));
}

use bipolar_relax_core::grid::integrate;
use core::f64::consts::PI;

fn law() -> GasLaw {
    GasLaw::power_law(1.0, 2.0).unwrap()
}

fn perturbed(g: &Grid, opts: &DdOptions) -> EquilibriumState {
    let rho = ScalarField::from_fn(g, |x| 1.0 + 0.3 * libm::cos(PI * x[0]));
    let n = ScalarField::from_fn(g, |x| 1.0 - 0.2 * libm::cos(PI * x[0]) + 0.1 * libm::cos(2.0 * PI * x[0]));
    EquilibriumState::new(rho, n, &law(), &law(), opts).unwrap()
}

fn history(s: &EquilibriumState, times: &[f64], opts: &DdOptions) -> Vec<EquilibriumState> {
    let mut out = vec![s.clone()];
    for &t in times {
        let next = dd_advance(out.last().unwrap(), &law(), &law(), t, opts).unwrap();
        out.push(next);
    }
    out
}

fn checkpoints() -> Vec<f64> {
    (1..=10).map(|k| 0.002 * k as f64).collect()
}

#[test]
fn uniform_state_is_stationary() {
    for scheme in [DdScheme::Explicit, DdScheme::Implicit] {
        let opts = DdOptions { scheme, ..DdOptions::default() };
        let g = Grid::new(2, &[1.0, 1.0], &[8, 8]).unwrap();
        let s = EquilibriumState::uniform(&g, 1.0, 1.0).unwrap();
        assert_eq!(s.e_bar1.max_abs(), 0.0);
        assert_eq!(s.u_bar.max_abs(), 0.0);
        let h = history(&s, &checkpoints(), &opts);
        let last = h.last().unwrap();
        assert!(last.rho_bar.zip_map(&s.rho_bar, |a, b| a - b).max_abs() <= 1e-15);
        assert!(last.e_bar1.max_abs() <= 1e-14 && last.e_bar2.max_abs() <= 1e-14);
        assert!(dd_energy_residual(&h, &law(), &law()).unwrap() <= 1e-15);
    }
}

#[test]
fn mass_is_conserved() {
    for scheme in [DdScheme::Explicit, DdScheme::Implicit] {
        let opts = DdOptions { scheme, ..DdOptions::default() };
        let s = perturbed(&Grid::line(1.0, 80).unwrap(), &opts);
        let h = history(&s, &checkpoints(), &opts);
        let (m0, n0) = s.masses();
        for e in &h {
            assert!((integrate(&e.rho_bar) - m0).abs() <= 1e-13 * m0);
            assert!((integrate(&e.n_bar) - n0).abs() <= 1e-13 * n0);
        }
    }
}

#[test]
fn energy_decreases_strictly() {
    let opts = DdOptions::default();
    let s = perturbed(&Grid::line(1.0, 60).unwrap(), &opts);
    let mut cur = s;
    let mut e = dd_energy(&cur, &law(), &law());
    for _ in 0..50 {
        let dt = dd_stable_dt(&cur, &law(), &law(), 0.25).unwrap();
        cur = dd_step(&cur, &law(), &law(), dt, &opts).unwrap();
        let next = dd_energy(&cur, &law(), &law());
        assert!(next < e, "{next} !< {e}");
        e = next;
    }
}

fn energy_residual(n: usize) -> f64 {
    let opts = DdOptions::default();
    let s = perturbed(&Grid::line(1.0, n).unwrap(), &opts);
    dd_energy_residual(&history(&s, &checkpoints(), &opts), &law(), &law()).unwrap()
}

#[test]
fn energy_residual_drops_under_refinement() {
    let r: Vec<f64> = [40, 80, 160].iter().map(|&n| energy_residual(n)).collect();
    for w in r.windows(2) {
        assert!(w[0] / w[1] >= 1.8, "{r:?}");
    }
}

#[test]
fn lifted_residuals_need_three_states() {
    let opts = DdOptions::default();
    let s = perturbed(&Grid::line(1.0, 40).unwrap(), &opts);
    let h = history(&s, &checkpoints()[..2], &opts);
    assert!(lifted_residuals(&h[..2]).is_err());
    let r = lifted_residuals(&h).unwrap();
    assert_eq!(r.len(), 3);
    assert!(r.iter().all(|(a, b)| a.max_abs().is_finite() && b.max_abs().is_finite()));
}

#[test]
fn vacuum_bounds_abort_the_run() {
    let bounds = VacuumBounds { delta: [1.8, 1.8], m_cap: [2.0, 2.0] };
    let opts = DdOptions { bounds: Some(bounds), ..DdOptions::default() };
    let g = Grid::line(1.0, 40).unwrap();
    let s = perturbed(&g, &DdOptions::default());
    assert!(dd_advance(&s, &law(), &law(), 0.01, &opts).is_err());
    let loose = DdOptions {
        bounds: Some(VacuumBounds { delta: [0.1, 0.1], m_cap: [5.0, 5.0] }),
        ..DdOptions::default()
    };
    assert!(dd_advance(&s, &law(), &law(), 0.01, &loose).is_ok());
}

#[test]
fn reconstructed_velocities_match_naive_formula() {
    let g = Grid::line(1.0, 30).unwrap();
    let s = perturbed(&g, &DdOptions::default());
    let (u, v) = reconstruct_velocities(&s, &law(), &law()).unwrap();
    assert_eq!((&u, &v), (&s.u_bar, &s.v_bar));
    let dx = g.dx(0);
    let (r, n, p) = (&s.rho_bar.values, &s.n_bar.values, &s.phi_bar.values);
    assert_eq!((u.comps[0][0], u.comps[0][30]), (0.0, 0.0));
    for k in 1..30 {
        // h'(r) = 2r for k = 1, γ = 2
        let ue = -((2.0 * r[k] + p[k]) - (2.0 * r[k - 1] + p[k - 1])) / dx;
        let ve = -((2.0 * n[k] - p[k]) - (2.0 * n[k - 1] - p[k - 1])) / dx;
        assert!((u.comps[0][k] - ue).abs() <= 1e-12 * (1.0 + ue.abs()));
        assert!((v.comps[0][k] - ve).abs() <= 1e-12 * (1.0 + ve.abs()));
    }
}

#[test]
fn rejects_vacuum_and_backwards_time() {
    let g = Grid::line(1.0, 10).unwrap();
    let z = ScalarField::zeros(&g);
    assert!(EquilibriumState::new(z.clone(), z, &law(), &law(), &DdOptions::default()).is_err());
    let s = EquilibriumState::uniform(&g, 1.0, 1.0).unwrap();
    let later = dd_advance(&s, &law(), &law(), 0.1, &DdOptions::default()).unwrap();
    assert!(dd_advance(&later, &law(), &law(), 0.05, &DdOptions::default()).is_err());
    assert_eq!(dd_advance(&s, &law(), &law(), 0.0, &DdOptions::default()).unwrap(), s);
}
