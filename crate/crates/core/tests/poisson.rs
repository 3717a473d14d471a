use bipolar_relax_core::poisson::*;
use bipolar_relax_core::*;
use core::f64::consts::PI;

#[test]
fn zero_data_gives_zero() {
    let g = Grid::line(1.0, 32).unwrap();
    let s = solve_neumann(&ScalarField::zeros(&g), 1e-12).unwrap();
    assert_eq!(s.phi.max_abs(), 0.0);
    assert_eq!(s.iterations, 0);
}

#[test]
fn rejects_charged_data() {
    let g = Grid::line(1.0, 16).unwrap();
    let f = ScalarField::constant(&g, 1.0);
    assert!(matches!(solve_neumann(&f, 1e-10), Err(Error::Compatibility { .. })));
}

#[test]
fn cg_and_line_agree() {
    let g = Grid::line(1.0, 64).unwrap();
    let f = ScalarField::from_fn(&g, |x| libm::cos(PI * x[0]) + 0.3 * libm::cos(3.0 * PI * x[0]));
    let a = solve_neumann(&f, 1e-12).unwrap();
    let b = solve_neumann_line(&f).unwrap();
    for (x, y) in a.phi.values.iter().zip(&b.phi.values) {
        assert!((x - y).abs() < 1e-12);
    }
    assert!(b.residual_norm < 1e-10);
    assert!(a.residual_norm <= 1e-12);
}

#[test]
fn solution_invariants() {
    let g = make2(16, 12);
    let f = ScalarField::from_fn(&g, |x| libm::cos(PI * x[0]) * libm::cos(2.0 * PI * x[1]));
    let s = solve_neumann(&f, 1e-10).unwrap();
    assert!(s.phi.mean().abs() < 1e-12);
    assert_eq!(s.grad_phi.boundary_max_abs(), 0.0);
    assert!(s.residual_norm <= 1e-10);
}

fn make2(nx: usize, ny: usize) -> Grid {
    Grid::new(2, &[1.0, 1.0], &[nx, ny]).unwrap()
}

#[test]
fn gradient_is_pin_invariant() {
    let g = Grid::line(1.0, 40).unwrap();
    let f = ScalarField::from_fn(&g, |x| libm::cos(PI * x[0]));
    let s = solve_neumann_line(&f).unwrap();
    let shifted = s.phi.map(|v| v + 0.25);
    let gs = grid::gradient(&shifted, BoundaryClosure::NeumannZero);
    let g0 = grid::gradient(&s.phi, BoundaryClosure::NeumannZero);
    for (a, b) in gs.comps[0].iter().zip(&g0.comps[0]) {
        assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()) / g.dx(0));
    }
}

#[test]
fn green_symmetry_rejects_diagonal() {
    let g = Grid::line(1.0, 8).unwrap();
    assert!(green_symmetry_defect(&g, 3, 3, 1e-10).is_err());
}

#[test]
fn solver_error_reports_residual() {
    let g = Grid::line(1.0, 64).unwrap();
    let f = ScalarField::from_fn(&g, |x| libm::cos(PI * x[0]));
    match solve_neumann_with(&f, 1e-14, Some(3), None) {
        Err(Error::Solver { iterations, residual }) => {
            assert_eq!(iterations, 3);
            assert!(residual > 1e-14);
        }
        other => panic!("expected solver error, got {other:?}"),
    }
}

fn manufactured_error_1d(n: usize) -> f64 {
    let g = Grid::line(1.0, n).unwrap();
    let f = ScalarField::from_fn(&g, |x| libm::cos(PI * x[0]));
    let s = solve_neumann(&f, 1e-11).unwrap();
    let exact = ScalarField::from_fn(&g, |x| libm::cos(PI * x[0]) / (PI * PI));
    s.phi.zip_map(&exact, |a, b| a - b).max_abs()
}

fn manufactured_error_2d(n: usize) -> f64 {
    let g = make2(n, n);
    let u = |x: [f64; 2]| libm::cos(PI * x[0]) * libm::cos(PI * x[1]);
    let f = ScalarField::from_fn(&g, u);
    let s = solve_neumann(&f, 1e-11).unwrap();
    let exact = ScalarField::from_fn(&g, |x| u(x) / (2.0 * PI * PI));
    s.phi.zip_map(&exact, |a, b| a - b).max_abs()
}

fn assert_second_order(errs: &[f64]) {
    for w in errs.windows(2) {
        let r = libm::log2(w[0] / w[1]);
        assert!((r - 2.0).abs() <= 0.1, "rate {r} from {errs:?}");
    }
}

#[test]
fn manufactured_solution_converges_at_second_order_1d() {
    let errs: Vec<f64> = [16, 32, 64, 128, 256].iter().map(|&n| manufactured_error_1d(n)).collect();
    assert_second_order(&errs);
}

#[test]
fn manufactured_solution_converges_at_second_order_2d() {
    let errs: Vec<f64> = [8, 16, 32, 64].iter().map(|&n| manufactured_error_2d(n)).collect();
    assert_second_order(&errs);
}

#[test]
fn duality_with_cosines() {
    let g = Grid::line(1.0, 64).unwrap();
    let f = ScalarField::from_fn(&g, |x| libm::cos(PI * x[0]));
    let h = ScalarField::from_fn(&g, |x| libm::cos(2.0 * PI * x[0]));
    assert!(duality_residual(&f, &h, 1e-12).unwrap() <= 1e-10);
    let g2 = make2(12, 20);
    let f = ScalarField::from_fn(&g2, |x| libm::cos(PI * x[0]) * libm::cos(PI * x[1]));
    let h = ScalarField::from_fn(&g2, |x| libm::cos(2.0 * PI * x[1]));
    assert!(duality_residual(&f, &h, 1e-12).unwrap() <= 1e-10);
}

#[test]
fn neumann_function_is_symmetric() {
    let g = Grid::line(1.0, 32).unwrap();
    let cols: Vec<ScalarField> = (0..32).map(|j| neumann_column(&g, j, 1e-12).unwrap()).collect();
    for i in 0..32 {
        for j in i + 1..32 {
            let d = (cols[j].values[i] - cols[i].values[j]).abs();
            assert!(d <= 1e-10, "N({i},{j}) defect {d}");
        }
    }
    assert!(green_symmetry_defect(&g, 0, 31, 1e-12).unwrap() <= 1e-10);
}

#[test]
fn neg_laplacian_inverts_the_solver() {
    let g = make2(10, 14);
    let f = ScalarField::from_fn(&g, |x| libm::cos(3.0 * PI * x[0]) + libm::cos(PI * x[1]) * x[0]);
    let f = project_compatible(&f, 1.0).unwrap_or_else(|_| {
        let m = f.mean();
        f.map(|v| v - m)
    });
    let s = solve_neumann(&f, 1e-12).unwrap();
    let back = neg_laplacian(&s.phi);
    assert!(back.zip_map(&f, |a, b| a - b).max_abs() <= 1e-9);
}

#[test]
fn project_compatible_removes_round_off_only() {
    let g = Grid::line(1.0, 10).unwrap();
    let f = ScalarField::from_fn(&g, |x| libm::cos(PI * x[0]) + 1e-14);
    let p = project_compatible(&f, 1.0).unwrap();
    assert!(grid::integrate(&p).abs() <= 1e-15);
    assert!(project_compatible(&ScalarField::constant(&g, 1.0), 1.0).is_err());
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn mean_free(g: &Grid, v: Vec<f64>) -> ScalarField {
        let f = ScalarField::from_values(g, v).unwrap();
        let m = f.mean();
        f.map(|x| x - m)
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

        #[test]
        fn duality_holds_for_random_data(
            f in prop::collection::vec(-1.0f64..1.0, 64),
            h in prop::collection::vec(-1.0f64..1.0, 64),
        ) {
            let g = Grid::line(1.0, 64).unwrap();
            let r = duality_residual(&mean_free(&g, f), &mean_free(&g, h), 1e-12).unwrap();
            prop_assert!(r <= 1e-10);
        }

        #[test]
        fn solver_is_linear(
            f in prop::collection::vec(-1.0f64..1.0, 48),
            h in prop::collection::vec(-1.0f64..1.0, 48),
            a in -3.0f64..3.0,
        ) {
            let g = Grid::new(2, &[1.0, 1.5], &[6, 8]).unwrap();
            let (f, h) = (mean_free(&g, f), mean_free(&g, h));
            let comb = f.zip_map(&h, |x, y| a * x + y);
            let sf = solve_neumann(&f, 1e-12).unwrap().phi;
            let sh = solve_neumann(&h, 1e-12).unwrap().phi;
            let sc = solve_neumann(&comb, 1e-12).unwrap().phi;
            let d = sc.zip_map(&sf.zip_map(&sh, |x, y| a * x + y), |x, y| x - y).max_abs();
            prop_assert!(d <= 1e-9 * (1.0 + sc.max_abs()));
        }
    }
}
