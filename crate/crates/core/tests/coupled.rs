use bipolar_relax_core::coupled::*;
use bipolar_relax_core::drift_diffusion::DdOptions;
use bipolar_relax_core::euler_poisson::{total_energy, HydroOptions};
use bipolar_relax_core::*;

fn spec(eps: f64, rho: CosineSeries, n: CosineSeries) -> RunSpec {
    let grid = Grid::line(1.0, 64).unwrap();
    RunSpec {
        grid,
        law1: GasLaw::power_law(1.0, 2.0).unwrap(),
        law2: GasLaw::power_law(1.0, 2.0).unwrap(),
        eps,
        t_final: 0.02,
        cfl: 0.5,
        rho0: rho,
        n0: n,
        well_prepared: true,
        velocity_perturbation: 0.0,
        checkpoint_every: 0.003,
        hydro: HydroOptions::default(),
        dd: DdOptions::default(),
        weak_modes: default_weak_modes(&grid),
    }
}

fn smooth(eps: f64) -> RunSpec {
    spec(
        eps,
        CosineSeries { mean: 1.0, terms: vec![(1, 0, 0.3)] },
        CosineSeries { mean: 1.0, terms: vec![(1, 0, -0.2), (2, 0, 0.1)] },
    )
}

#[test]
fn well_prepared_start_has_zero_relative_energy() {
    let s = smooth(1.0);
    let r = run(&s).unwrap();
    let c0 = &r.checkpoints[0];
    assert!(c0.psi.total <= 1e-12 * c0.energy.total, "{:?}", c0.psi);
    assert!(r.valid && r.floor_mass == 0.0);
    assert!(r.mass_drift.iter().all(|d| *d <= 1e-12), "{:?}", r.mass_drift);
}

#[test]
fn ill_prepared_start_has_positive_relative_energy() {
    let mut s = smooth(0.1);
    s.well_prepared = false;
    s.velocity_perturbation = 0.1;
    let (h, e) = initial_states(&s).unwrap();
    let p = relative_energy::compute_psi(&h, &e, &s.law1, &s.law2).unwrap();
    assert!(p.kin_rho > 0.0 && p.kin_n > 0.0);
}

#[test]
fn uniform_data_gives_constant_series() {
    let s = spec(0.1, CosineSeries::constant(1.0), CosineSeries::constant(1.0));
    let r = run(&s).unwrap();
    let e0 = r.checkpoints[0].energy.total;
    for c in &r.checkpoints {
        assert_eq!(c.psi.total, 0.0);
        assert!((c.energy.total - e0).abs() <= 1e-14);
        assert_eq!((c.jterms.j1, c.jterms.j2, c.jterms.j3, c.jterms.j4), (0.0, 0.0, 0.0, 0.0));
    }
    assert!(r.weak.iter().all(|w| *w <= 1e-12), "{:?}", r.weak);
    assert_eq!(r.energy_defect, 0.0);
}

#[test]
fn checkpoints_land_on_exact_times() {
    let s = smooth(0.1);
    let times = s.checkpoint_times();
    assert_eq!(times.len(), 8);
    assert_eq!(*times.last().unwrap(), 0.02);
    let r = run(&s).unwrap();
    assert_eq!(r.checkpoints.len(), times.len());
    for (c, t) in r.checkpoints.iter().zip(&times) {
        assert_eq!(c.hydro.t, *t);
        assert_eq!(c.eq.t, *t);
        assert_eq!(c.jterms.t, *t);
    }
    assert!(r.min_dt > 0.0 && r.min_dt <= r.max_dt);
    let last = r.checkpoints.last().unwrap();
    assert!((last.energy.total - total_energy(&last.hydro, &s.law1, &s.law2).total).abs() == 0.0);
}

#[test]
fn cosine_series_evaluation() {
    let g = Grid::new(2, &[1.0, 2.0], &[4, 4]).unwrap();
    let s = CosineSeries { mean: 1.0, terms: vec![(1, 1, 0.5)] };
    assert!((s.eval(&g, [0.0, 0.0]) - 1.5).abs() < 1e-15);
    assert!((s.eval(&g, [1.0, 0.0]) - 0.5).abs() < 1e-15);
    assert!((s.eval(&g, [0.5, 1.0]) - 1.0).abs() < 1e-15);
}

#[test]
fn invalid_specs_are_config_errors() {
    let mut s = smooth(0.1);
    s.eps = 0.0;
    assert!(matches!(run(&s).unwrap_err().error, Error::Config(_)));
    let mut s = smooth(0.1);
    s.n0.mean = 2.0;
    assert!(matches!(initial_states(&s), Err(Error::Config(_))));
    let mut s = smooth(0.1);
    s.rho0.terms = vec![(1, 0, 2.0)];
    assert!(matches!(initial_states(&s), Err(Error::Config(_))));
}
