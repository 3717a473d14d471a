use bipolar_relax_core::euler_poisson::*;
use bipolar_relax_core::*;

fn law() -> GasLaw {
    GasLaw::power_law(1.0, 2.0).unwrap()
}

#[test]
fn stable_dt_formula() {
    let g = Grid::line(1.0, 100).unwrap();
    let s = BipolarHydroState::uniform(&g, 1.0, 1.0, 1.0).unwrap();
    let dt = stable_dt(&s, &law(), &law(), 0.5).unwrap();
    assert!((dt - 0.5 * 0.01 / libm::sqrt(2.0)).abs() < 1e-15);
}

#[test]
fn rejects_oversized_step() {
    let g = Grid::line(1.0, 16).unwrap();
    let s = BipolarHydroState::uniform(&g, 1.0, 1.0, 1.0).unwrap();
    let lim = stable_dt(&s, &law(), &law(), 1.0).unwrap();
    assert!(matches!(
        ep_step(&s, &law(), &law(), 2.0 * lim),
        Err(Error::Stability { .. })
    ));
}

use bipolar_relax_core::grid::{face_mean, integrate};
use bipolar_relax_core::weak::{weak_residual, CosineMode, WeakTest};
use core::f64::consts::PI;

fn perturbed(g: &Grid, eps: f64, amp: f64) -> BipolarHydroState {
    let rho = ScalarField::from_fn(g, |x| 1.0 + 0.3 * libm::cos(PI * x[0]));
    let n = ScalarField::from_fn(g, |x| 1.0 - 0.2 * libm::cos(PI * x[0]));
    let bump = VectorField::from_fn(g, |a, x| if a == 0 { amp * libm::sin(PI * x[0]) } else { 0.0 });
    let m_rho = face_mean(&rho).zip_map(&bump, |r, u| r * u);
    let m_n = face_mean(&n).zip_map(&bump, |r, u| -r * u);
    BipolarHydroState::new(0.0, rho, m_rho, n, m_n, eps, &HydroOptions::default()).unwrap()
}

fn advance(s: &BipolarHydroState, steps: usize) -> Vec<BipolarHydroState> {
    let mut out = vec![s.clone()];
    for _ in 0..steps {
        let cur = out.last().unwrap();
        let dt = stable_dt(cur, &law(), &law(), 0.5).unwrap();
        out.push(ep_step(cur, &law(), &law(), dt).unwrap());
    }
    out
}

fn naive_mass(r: &ScalarField) -> f64 {
    let g = r.grid();
    let mut s = 0.0;
    for c in 0..g.cell_count() {
        s += r.values[c] * g.cell_volume();
    }
    s
}

#[test]
fn uniform_state_is_a_fixed_point() {
    for g in [Grid::line(1.0, 50).unwrap(), Grid::new(2, &[1.0, 1.0], &[8, 12]).unwrap()] {
        let s = BipolarHydroState::uniform(&g, 1.0, 1.0, 0.1).unwrap();
        let h = advance(&s, 20);
        let last = h.last().unwrap();
        assert!(last.rho.zip_map(&s.rho, |a, b| a - b).max_abs() <= 1e-14);
        assert!(last.n.zip_map(&s.n, |a, b| a - b).max_abs() <= 1e-14);
        assert!(last.mom_rho.max_abs() <= 1e-14 && last.mom_n.max_abs() <= 1e-14);
        assert!(last.phi.max_abs() <= 1e-14);
    }
}

#[test]
fn friction_decays_momentum_by_e_per_eps() {
    let g = Grid::line(1.0, 32).unwrap();
    let s = perturbed(&g, 0.5, 0.2);
    let r = relax_momentum(&s, 0.5).unwrap();
    let factor = libm::exp(-1.0);
    for (a, b) in r.mom_rho.comps[0].iter().zip(&s.mom_rho.comps[0]) {
        assert!((a - factor * b).abs() <= 1e-15);
    }
    assert_eq!(r.rho, s.rho);
    assert!((r.t - 0.5).abs() < 1e-15);
    assert!(relax_momentum(&s, -1.0).is_err());
}

#[test]
fn mass_is_conserved_over_100_steps() {
    let g = Grid::line(1.0, 200).unwrap();
    let s = perturbed(&g, 1.0, 0.1);
    let h = advance(&s, 100);
    let last = h.last().unwrap();
    for (r0, r1) in [(&s.rho, &last.rho), (&s.n, &last.n)] {
        let (m0, m1) = (naive_mass(r0), naive_mass(r1));
        assert!(((m1 - m0) / m0).abs() <= 1e-13, "drift {}", (m1 - m0) / m0);
        assert!((integrate(r1) - m1).abs() <= 1e-13);
    }
    assert_eq!(last.floor_mass, 0.0);
}

#[test]
fn stable_dt_shrinks_with_sqrt_eps() {
    let g = Grid::line(1.0, 100).unwrap();
    let a = stable_dt(&BipolarHydroState::uniform(&g, 1.0, 1.0, 1.0).unwrap(), &law(), &law(), 0.5).unwrap();
    let b = stable_dt(&BipolarHydroState::uniform(&g, 1.0, 1.0, 0.01).unwrap(), &law(), &law(), 0.5).unwrap();
    assert!((a / b - 10.0).abs() < 1e-12);
    assert!(stable_dt(&BipolarHydroState::uniform(&g, 1.0, 1.0, 1.0).unwrap(), &law(), &law(), 1.5).is_err());
}

#[test]
fn stable_dt_nonuniform_matches_naive_speed() {
    let g = Grid::line(1.0, 40).unwrap();
    let eps = 0.3;
    let s = perturbed(&g, eps, 0.4);
    let mut speed = 0.0f64;
    for (r, m) in [(&s.rho, &s.mom_rho), (&s.n, &s.mom_n)] {
        let rf = face_mean(r);
        let umax = m.comps[0].iter().zip(&rf.comps[0]).fold(0.0f64, |a, (m, r)| a.max((m / r).abs()));
        // p'(r) = 2r for k = 1, γ = 2
        let cmax = r.values.iter().fold(0.0f64, |a, &x| a.max(libm::sqrt(2.0 * x / eps)));
        speed = speed.max(umax + cmax);
    }
    let dt = stable_dt(&s, &law(), &law(), 0.5).unwrap();
    assert!((dt - 0.5 * g.dx(0) / speed).abs() <= 1e-14 * dt);
}

#[test]
fn total_energy_examples() {
    let g = Grid::line(1.0, 10).unwrap();
    let e = total_energy(&BipolarHydroState::uniform(&g, 1.0, 1.0, 1.0).unwrap(), &law(), &law());
    assert!((e.total - 2.0).abs() < 1e-14);
    assert_eq!((e.kinetic_rho, e.kinetic_n, e.field), (0.0, 0.0, 0.0));
    let e = total_energy(&BipolarHydroState::uniform(&g, 0.0, 0.0, 1.0).unwrap(), &law(), &law());
    assert_eq!(e.total, 0.0);
}

#[test]
fn total_energy_matches_naive_loops() {
    let g = Grid::line(1.0, 30).unwrap();
    let eps = 0.7;
    let s = perturbed(&g, eps, 0.3);
    let n = g.n(0);
    let dx = g.dx(0);
    let mut kin = 0.0;
    for (r, m) in [(&s.rho, &s.mom_rho), (&s.n, &s.mom_n)] {
        // interior faces carry weight dx; wall momenta are zero
        for k in 1..n {
            let rf = 0.5 * (r.values[k - 1] + r.values[k]);
            kin += 0.5 * eps * m.comps[0][k] * m.comps[0][k] / rf * dx;
        }
    }
    let mut internal = 0.0;
    for c in 0..n {
        internal += (s.rho.values[c] * s.rho.values[c] + s.n.values[c] * s.n.values[c]) * dx;
    }
    let mut field = 0.0;
    for k in 1..n {
        let gp = (s.phi.values[k] - s.phi.values[k - 1]) / dx;
        field += 0.5 * gp * gp * dx;
    }
    let e = total_energy(&s, &law(), &law());
    assert!((e.kinetic_rho + e.kinetic_n - kin).abs() <= 1e-14);
    assert!((e.internal_rho + e.internal_n - internal).abs() <= 1e-13);
    assert!((e.field - field).abs() <= 1e-14);
    assert!((e.total - kin - internal - field).abs() <= 1e-13);
}

#[test]
fn dissipation_budget_stationary_and_decaying() {
    let g = Grid::line(1.0, 40).unwrap();
    let h = advance(&BipolarHydroState::uniform(&g, 1.0, 1.0, 0.1).unwrap(), 5);
    let b = dissipation_budget(&h, &law(), &law(), 1e-12).unwrap();
    assert!(b.defect.abs() <= 1e-14 && b.sign_ok);

    assert!(dissipation_budget(&h[..1], &law(), &law(), 1e-12).is_err());
}

fn history_until(s: &BipolarHydroState, t_end: f64) -> Vec<BipolarHydroState> {
    let mut out = vec![s.clone()];
    while out.last().unwrap().t < t_end {
        let cur = out.last().unwrap();
        let dt = stable_dt(cur, &law(), &law(), 0.5).unwrap().min(t_end - cur.t);
        out.push(ep_step(cur, &law(), &law(), dt).unwrap());
    }
    out
}

// Energy decays step by step; the budget defect is a first-order time
// discretization error of the trapezoidal dissipation sum.
#[test]
fn dissipation_budget_defect_is_first_order() {
    let defects: Vec<f64> = [40, 80, 160]
        .iter()
        .map(|&n| {
            let g = Grid::line(1.0, n).unwrap();
            let h = history_until(&perturbed(&g, 0.1, 0.2), 0.05);
            let b = dissipation_budget(&h, &law(), &law(), 1e-12).unwrap();
            assert!(b.sign_ok, "max increase {}", b.max_increase);
            b.defect
        })
        .collect();
    assert!(defects[0] < 1e-3, "{defects:?}");
    for w in defects.windows(2) {
        assert!(w[0] / w[1] >= 1.8, "{defects:?}");
    }
}

#[test]
fn diffusive_rescale_examples() {
    let g = Grid::line(1.0, 8).unwrap();
    let u = VectorField::from_fn(&g, |_, x| libm::sin(PI * x[0]));
    let v = u.map(|x| -2.0 * x);
    let id = diffusive_rescale(1.0, 0.7, &u, &v).unwrap();
    assert_eq!((id.t, id.eps), (0.7, 1.0));
    assert_eq!((id.u.clone(), id.v.clone()), (u.clone(), v.clone()));
    let r = diffusive_rescale(0.1, 2.0, &u, &v).unwrap();
    assert!((r.t - 0.2).abs() < 1e-15 && (r.eps - 0.01).abs() < 1e-17);
    for (a, b) in r.u.comps[0].iter().zip(&u.comps[0]) {
        assert!((a - 10.0 * b).abs() <= 1e-14);
    }
    assert!(diffusive_rescale(0.0, 1.0, &u, &v).is_err());
}

struct Zero;

impl WeakTest for Zero {
    fn scalar(&self, _: [f64; 2]) -> (f64, [f64; 2]) {
        (0.0, [0.0; 2])
    }
    fn vector(&self, _: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        ([0.0; 2], [[0.0; 2]; 2])
    }
}

struct Leaky;

impl WeakTest for Leaky {
    fn scalar(&self, _: [f64; 2]) -> (f64, [f64; 2]) {
        (1.0, [0.0; 2])
    }
    fn vector(&self, _: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        ([1.0, 0.0], [[0.0; 2]; 2])
    }
}

#[test]
fn weak_residual_cases() {
    let g = Grid::line(1.0, 40).unwrap();
    let h = advance(&BipolarHydroState::uniform(&g, 1.0, 1.0, 0.1).unwrap(), 10);
    let bank = [CosineMode::new(&g, [1, 0]), CosineMode::new(&g, [2, 0])];
    let r = weak_residual(&h, &law(), &law(), &bank).unwrap();
    assert!(r.iter().all(|x| *x <= 1e-12), "{r:?}");

    let h = advance(&perturbed(&g, 0.1, 0.2), 10);
    assert_eq!(weak_residual(&h, &law(), &law(), &[Zero]).unwrap(), [0.0; 4]);
    assert!(weak_residual(&h, &law(), &law(), &[Leaky]).is_err());
    assert!(weak_residual(&h[..1], &law(), &law(), &bank).is_err());
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

        #[test]
        fn rescaling_composes(a in 0.05f64..2.0, b in 0.05f64..2.0, t in 0.0f64..5.0) {
            let g = Grid::line(1.0, 6).unwrap();
            let u = VectorField::from_fn(&g, |_, x| libm::sin(PI * x[0]));
            let v = u.map(|x| 0.5 * x);
            let once = diffusive_rescale(a * b, t, &u, &v).unwrap();
            let first = diffusive_rescale(b, t, &u, &v).unwrap();
            let twice = diffusive_rescale(a, first.t, &first.u, &first.v).unwrap();
            prop_assert!((once.t - twice.t).abs() <= 1e-13 * (1.0 + once.t));
            prop_assert!((once.eps - twice.eps * first.eps).abs() <= 1e-13 * once.eps);
            let d = once.u.zip_map(&twice.u, |x, y| x - y).max_abs();
            prop_assert!(d <= 1e-12 * (1.0 + once.u.max_abs()));
        }
    }
}
