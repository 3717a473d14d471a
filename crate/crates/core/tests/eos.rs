use bipolar_relax_core::eos::*;
use bipolar_relax_core::*;

fn law(k: f64, g: f64) -> GasLaw {
    GasLaw::power_law(k, g).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn pressure_examples() {
    assert_eq!(law(1.0, 2.0).pressure(0.0).unwrap(), 0.0);
    assert_eq!(law(1.0, 2.0).pressure(2.0).unwrap(), 4.0);
    assert!(close(law(0.5, 1.5).pressure(4.0).unwrap(), 4.0, 1e-15));
    assert!(matches!(
        law(1.0, 2.0).pressure(-1.0),
        Err(Error::Domain(_))
    ));
}

#[test]
fn internal_energy_examples() {
    let e = law(1.0, 2.0).internal_energy(1.0).unwrap();
    assert_eq!((e.h, e.h1, e.h2), (1.0, 2.0, 2.0));
    assert_eq!(law(1.0, 2.0).internal_energy_value(0.0).unwrap(), 0.0);
    let e = law(2.0, 3.0).internal_energy(2.0).unwrap();
    // h = k r^γ/(γ-1) = 8, h' = kγ r^{γ-1}/(γ-1) = 12, h'' = kγ r^{γ-2} = 12; r h'' = p'(2) = 24
    assert!(close(e.h, 8.0, 1e-15) && close(e.h1, 12.0, 1e-15) && close(e.h2, 12.0, 1e-15));
    assert!(close(2.0 * e.h2, law(2.0, 3.0).dp(2.0), 1e-15));
    assert!(law(1.0, 2.0).internal_energy(0.0).is_err());
}

#[test]
fn relative_internal_examples() {
    assert!(close(law(1.0, 2.0).relative_internal(3.0, 1.0).unwrap(), 4.0, 1e-15));
    for g in [1.2, 1.4, 2.0, 3.5] {
        assert_eq!(law(1.0, g).relative_internal(1.0, 1.0).unwrap(), 0.0);
    }
    // mpmath, 40 digits: h(2) - h(1) - h'(1) for k = 1, gamma = 1.4
    let v = law(1.0, 1.4).relative_internal(2.0, 1.0).unwrap();
    assert!(close(v, 0.597_539_553_864_471_3, 1e-14));
    assert!(law(1.0, 2.0).relative_internal(1.0, 0.0).is_err());
}

#[test]
fn relative_pressure_examples() {
    assert!(close(law(1.0, 2.0).relative_pressure(3.0, 1.0).unwrap(), 4.0, 1e-15));
    assert_eq!(law(1.0, 1.7).relative_pressure(2.5, 2.5).unwrap(), 0.0);
    assert!(law(1.0, 2.0).relative_pressure(1.0, -1.0).is_err());
    for g in [1.3, 2.0, 2.7] {
        let l = law(1.3, g);
        for i in 1..=50 {
            let r = 10.0 * i as f64 / 50.0;
            for j in 0..=20 {
                let rb = 0.1 + 4.9 * j as f64 / 20.0;
                let p = l.relative_pressure(r, rb).unwrap();
                let h = l.relative_internal(r, rb).unwrap();
                assert!(p <= l.khat * h * (1.0 + 1e-12) + 1e-300);
            }
        }
    }
}

#[test]
fn generic_formula_agrees_away_from_diagonal() {
    struct Plain(GasLaw);
    impl BarotropicLaw for Plain {
        fn p(&self, r: f64) -> f64 { self.0.p(r) }
        fn dp(&self, r: f64) -> f64 { self.0.dp(r) }
        fn d2p(&self, r: f64) -> f64 { self.0.d2p(r) }
        fn h(&self, r: f64) -> f64 { self.0.h(r) }
        fn dh(&self, r: f64) -> f64 { self.0.dh(r) }
        fn d2h(&self, r: f64) -> f64 { self.0.d2h(r) }
        fn exponent(&self) -> f64 { self.0.gamma }
        fn curvature_bound(&self) -> f64 { self.0.khat }
    }
    let l = law(0.7, 1.6);
    let plain = Plain(l);
    for &(r, rb) in &[(0.0, 1.0), (3.0, 0.5), (0.2, 2.0), (1.5, 1.0)] {
        assert!(close(l.h_rel(r, rb), plain.h_rel(r, rb), 1e-12));
        assert!(close(l.p_rel(r, rb), plain.p_rel(r, rb), 1e-12));
    }
}

#[test]
fn lower_bounds_quadratic_law_are_one() {
    let c = law(1.0, 2.0).lower_bound_constants(0.5, 2.0, 10.0, 200).unwrap();
    assert!((c.c_quad - 1.0).abs() < 1e-9, "{c:?}");
    assert!((c.c_power - 1.0).abs() < 1e-9, "{c:?}");
    assert_eq!(c.r_switch, 3.0);
}

#[test]
fn lower_bound_cubic_matches_scan() {
    // h(r|1)/(r-1)^2 = (r + 2)/2 for k = 1, gamma = 3; minimum 1 at r = 0
    let c = law(1.0, 3.0).lower_bound_constants(1.0, 1.0, 10.0, 401).unwrap();
    let oracle = (0..401)
        .map(|i| 2.0 * i as f64 / 400.0)
        .filter(|r| (r - 1.0).abs() >= DIAGONAL_EXCLUSION)
        .map(|r| (r * r * r / 2.0 - 0.5 - 1.5 * (r - 1.0)) / ((r - 1.0) * (r - 1.0)))
        .fold(f64::INFINITY, f64::min);
    assert!((c.c_quad - oracle).abs() < 1e-12);
    assert!((c.c_quad - 1.0).abs() < 1e-12);
}

#[test]
fn lower_bound_rejects_empty_region() {
    assert!(law(1.0, 2.0).lower_bound_constants(0.5, 2.0, 3.0, 200).is_err());
    assert!(law(1.0, 2.0).lower_bound_constants(0.5, 2.0, 10.0, 10).is_err());
}

#[test]
fn rejects_bad_parameters() {
    assert!(GasLaw::new(0.0, 2.0, 1.0).is_err());
    assert!(GasLaw::new(1.0, 1.0, 1.0).is_err());
    assert!(GasLaw::new(1.0, 2.0, 0.0).is_err());
}

fn log_spaced(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (libm::log(lo), libm::log(hi));
    (0..n).map(|i| libm::exp(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn thermodynamic_consistency_on_log_grid() {
    for (k, g) in [(1.0, 2.0), (0.5, 1.4), (2.0, 3.0)] {
        let l = law(k, g);
        for r in log_spaced(1000, 1e-3, 1e3) {
            let e = l.internal_energy(r).unwrap();
            let p = l.pressure(r).unwrap();
            // r h'(r) − h(r) = p(r) and r h''(r) = p'(r)
            assert!(close(r * e.h1 - e.h, p, 1e-10), "k={k} g={g} r={r}");
            assert!(close(r * e.h2, l.dp(r), 1e-10), "k={k} g={g} r={r}");
            assert!(close(e.h1, l.dh(r), 1e-12));
        }
    }
}

#[test]
fn quadratic_law_relative_energy_is_square() {
    let l = law(1.0, 2.0);
    for (r, rb) in [(0.0, 1.0), (3.0, 1.0), (0.5, 2.5)] {
        assert!(close(l.relative_internal(r, rb).unwrap(), (r - rb) * (r - rb), 1e-14));
    }
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

        #[test]
        fn relative_pressure_is_proportional(
            k in 0.1f64..5.0, g in 1.1f64..4.0, r in 0.0f64..10.0, rb in 0.01f64..10.0,
        ) {
            let l = law(k, g);
            let hr = l.relative_internal(r, rb).unwrap();
            let pr = l.relative_pressure(r, rb).unwrap();
            prop_assert!((pr - (g - 1.0) * hr).abs() <= 1e-9 * (1.0 + pr.abs()));
        }

        #[test]
        fn relative_internal_is_non_negative(
            k in 0.1f64..5.0, g in 1.1f64..4.0, r in 0.0f64..10.0, rb in 0.01f64..10.0,
        ) {
            prop_assert!(law(k, g).relative_internal(r, rb).unwrap() >= 0.0);
        }

        #[test]
        fn pressure_scales_with_k(k in 0.1f64..5.0, g in 1.1f64..4.0, r in 0.0f64..10.0) {
            let one = law(1.0, g).pressure(r).unwrap();
            prop_assert!((law(k, g).pressure(r).unwrap() - k * one).abs() <= 1e-12 * (1.0 + k * one));
        }
    }
}
