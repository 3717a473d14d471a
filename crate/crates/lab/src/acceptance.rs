//! The acceptance criteria and invariant suites, with their tolerances.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use bipolar_relax_core::drift_diffusion::{self, EquilibriumState};
use bipolar_relax_core::euler_poisson::{self, BipolarHydroState};
use bipolar_relax_core::grid::{self, BoundaryClosure};
use bipolar_relax_core::{poisson, BarotropicLaw, GasLaw, Grid, ScalarField, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::harness::{self, RunSummary, SweepReport};

/// Pinned tolerances of every criterion.
pub mod tol {
    /// Target and half-width of the fitted ε-slope of `Ψ(t_final)`.
    pub const SLOPE_TARGET: f64 = 2.0;
    pub const SLOPE_HALF_WIDTH: f64 = 0.3;
    /// Minimum convergence rate of the inequality slack per refinement.
    pub const SLACK_RATE_MIN: f64 = 1.0;
    /// Relative mass drift per species.
    pub const MASS_DRIFT: f64 = 1e-10;
    /// Minimum rate of the positive energy defect when it is not zero.
    pub const ENERGY_RATE_MIN: f64 = 1.0;
    /// Minimum reduction factor per refinement (drift-diffusion energy
    /// identity and weak residuals).
    pub const REFINEMENT_FACTOR_MIN: f64 = 1.8;
    /// Manufactured Poisson rate window.
    pub const POISSON_RATE: f64 = 2.0;
    pub const POISSON_RATE_HALF_WIDTH: f64 = 0.1;
    pub const DUALITY: f64 = 1e-10;
    pub const GREEN_SYMMETRY: f64 = 1e-10;
    /// Relative residual of the thermodynamic identities.
    pub const EOS_CONSISTENCY: f64 = 1e-10;
    /// Relative mismatch of `p(r|r̄)` and `(γ−1) h(r|r̄)`.
    pub const RELATIVE_PRESSURE: f64 = 1e-12;
    pub const WELL_BALANCED: f64 = 1e-14;
    /// Relative mismatch of friction-only decay against `e^{−t/ε}`.
    pub const FRICTION_DECAY: f64 = 1e-12;
    /// Discrete adjointness of gradient and divergence.
    pub const ADJOINTNESS: f64 = 1e-12;
    /// Random trials in the randomized suites.
    pub const TRIALS: usize = 100;
}

/// The verdict on one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(id: impl Into<String>, name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }

    fn failed(id: &str, name: &str, why: impl fmt::Display) -> Self {
        Self::new(id, name, false, format!("error: {why}"))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {} {}: {}", self.id, self.name, self.detail)
    }
}

/// Rate `log2(a/b)` of successive halvings.
pub fn rate(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

fn fmt_rates(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", items.join(", "))
}

/// Criterion 1: fitted slope within `2 ± 0.3` and `Ψ(t_final)` decreasing
/// along the (descending) sweep.
pub fn scaling(report: &SweepReport) -> Outcome {
    const ID: &str = "1";
    const NAME: &str = "eps^2 scaling of Psi(t_final)";
    let Some(slope) = report.slope else {
        return Outcome::failed(ID, NAME, report.fit_error.clone().unwrap_or_default());
    };
    let psi: Vec<f64> = report
        .rows
        .iter()
        .map(|r| r.summary.as_ref().map_or(f64::NAN, |s| s.psi_final))
        .collect();
    let all_valid = report.rows.iter().all(|r| r.valid);
    let monotone = psi.windows(2).all(|w| w[1] < w[0]);
    let in_window = (slope - tol::SLOPE_TARGET).abs() <= tol::SLOPE_HALF_WIDTH;
    Outcome::new(
        ID,
        NAME,
        all_valid && monotone && in_window,
        format!(
            "slope {slope:.4} (target {} +- {}), monotone {monotone}, all runs valid {all_valid}, psi {}",
            tol::SLOPE_TARGET,
            tol::SLOPE_HALF_WIDTH,
            fmt_list(&psi)
        ),
    )
}

/// Criterion 2: `δ_num = |slack|` shrinks at rate ≥ 1 per refinement
/// (coarse to fine), so the slack is bounded by a vanishing numerical defect.
pub fn slack(levels: &[RunSummary]) -> Outcome {
    let delta: Vec<f64> = levels.iter().map(|s| s.jterms.slack.abs()).collect();
    let slacks: Vec<f64> = levels.iter().map(|s| s.jterms.slack).collect();
    let rates: Vec<f64> = delta.windows(2).map(|w| rate(w[0], w[1])).collect();
    let pass = levels.len() >= 3 && rates.iter().all(|r| *r >= tol::SLACK_RATE_MIN);
    Outcome::new(
        "2",
        "relative-energy inequality slack",
        pass,
        format!(
            "slack {} rates {} (min {})",
            fmt_list(&slacks),
            fmt_rates(&rates),
            tol::SLACK_RATE_MIN
        ),
    )
}

/// Criterion 3: every lemma bound is certified and holds.
pub fn lemmas(run: &RunSummary) -> Outcome {
    let pass = run.lemmas.len() == 4 && run.lemmas.iter().all(|l| l.certified && l.pass == Some(true));
    let parts: Vec<String> = run
        .lemmas
        .iter()
        .map(|l| match l.rhs {
            Some(rhs) => format!("{} {:.3e} <= {:.3e}", l.lemma, l.lhs, rhs),
            None => format!("{} {:.3e} uncertified", l.lemma, l.lhs),
        })
        .collect();
    Outcome::new("3", "lemma constants", pass, parts.join("; "))
}

/// Criterion 4: mass drift over every run, hydro energy defect and the
/// drift-diffusion energy identity under refinement.
pub fn conservation(all_runs: &[&RunSummary], levels: &[RunSummary]) -> Outcome {
    let drift = all_runs.iter().fold(0.0_f64, |m, s| m.max(s.mass_drift_max()));
    let mass_ok = !all_runs.is_empty() && drift <= tol::MASS_DRIFT;

    let defect: Vec<f64> = levels.iter().map(|s| s.energy_defect.max(0.0)).collect();
    let increase: Vec<f64> = levels.iter().map(|s| s.energy_max_increase).collect();
    let energy_ok = defect.iter().all(|d| *d == 0.0)
        || defect.windows(2).all(|w| rate(w[0], w[1]) >= tol::ENERGY_RATE_MIN);

    let dd: Vec<f64> = levels.iter().map(|s| s.dd_energy_residual).collect();
    let dd_factors: Vec<f64> = dd.windows(2).map(|w| w[0] / w[1]).collect();
    let dd_ok = levels.len() >= 3 && dd_factors.iter().all(|f| *f >= tol::REFINEMENT_FACTOR_MIN);

    Outcome::new(
        "4",
        "conservation and dissipation",
        mass_ok && energy_ok && dd_ok,
        format!(
            "max mass drift {drift:.2e} (<= {:e}); energy defect {} max step increase {}; dd identity residual {} factors {} (>= {})",
            tol::MASS_DRIFT,
            fmt_list(&defect),
            fmt_list(&increase),
            fmt_list(&dd),
            fmt_rates(&dd_factors),
            tol::REFINEMENT_FACTOR_MIN
        ),
    )
}

fn manufactured_rate(dim: usize, sizes: &[usize]) -> Result<(Vec<f64>, f64), bipolar_relax_core::Error> {
    let pi = std::f64::consts::PI;
    let mut errs = Vec::new();
    let mut hs = Vec::new();
    for &n in sizes {
        let g = Grid::new(dim, &[1.0, 1.0][..dim], &[n, n][..dim])?;
        let shape = |x: [f64; 2]| {
            if dim == 1 {
                (pi * x[0]).cos()
            } else {
                (pi * x[0]).cos() * (pi * x[1]).cos()
            }
        };
        let f = ScalarField::from_fn(&g, shape);
        let exact = ScalarField::from_fn(&g, |x| shape(x) / (dim as f64 * pi * pi));
        let sol = poisson::solve_neumann(&f, 1e-11)?;
        let err = sol.phi.zip_map(&exact, |a, b| a - b).max_abs();
        errs.push(err);
        hs.push(1.0 / n as f64);
    }
    let r = log_slope(&hs, &errs);
    Ok((errs, r))
}

fn random_scalar(g: &Grid, rng: &mut ChaCha8Rng) -> ScalarField {
    let values = (0..g.cell_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField::from_values(g, values).expect("one value per cell")
}

fn random_vector(g: &Grid, rng: &mut ChaCha8Rng) -> VectorField {
    let mut f = VectorField::zeros(g);
    for comp in &mut f.comps {
        for v in comp.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    f
}

fn random_mean_zero(g: &Grid, rng: &mut ChaCha8Rng) -> ScalarField {
    let mut f = random_scalar(g, rng);
    let m = f.mean();
    for v in &mut f.values {
        *v -= m;
    }
    f
}

/// Criterion 5: manufactured rates in 1D and 2D, duality on random pairs and
/// the Green symmetry defect on a 32-cell line.
pub fn poisson_suite(seed: u64) -> Outcome {
    const ID: &str = "5";
    const NAME: &str = "Poisson correctness";
    let run = || -> Result<Outcome, bipolar_relax_core::Error> {
        let (e1, r1) = manufactured_rate(1, &[16, 32, 64, 128, 256])?;
        let (e2, r2) = manufactured_rate(2, &[8, 16, 32, 64, 128])?;
        let rates_ok = [r1, r2]
            .iter()
            .all(|r| (r - tol::POISSON_RATE).abs() <= tol::POISSON_RATE_HALF_WIDTH);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grids = [Grid::line(1.0, 64)?, Grid::new(2, &[1.0, 2.0], &[12, 20])?];
        let mut duality = 0.0_f64;
        for trial in 0..tol::TRIALS {
            let g = &grids[trial % 2];
            let f = random_mean_zero(g, &mut rng);
            let h = random_mean_zero(g, &mut rng);
            duality = duality.max(poisson::duality_residual(&f, &h, 1e-12)?);
        }

        let line = Grid::line(1.0, 32)?;
        let mut green = 0.0_f64;
        for i in 0..32 {
            for j in (i + 1)..32 {
                green = green.max(poisson::green_symmetry_defect(&line, i, j, 1e-12)?);
            }
        }
        let pass = rates_ok && duality <= tol::DUALITY && green <= tol::GREEN_SYMMETRY;
        Ok(Outcome::new(
            ID,
            NAME,
            pass,
            format!(
                "1D rate {r1:.3} errors {}; 2D rate {r2:.3} errors {}; duality max {duality:.2e} over {} pairs; green symmetry max {green:.2e}",
                fmt_list(&e1),
                fmt_list(&e2),
                tol::TRIALS
            ),
        ))
    };
    run().unwrap_or_else(|e| Outcome::failed(ID, NAME, e))
}

/// Criterion 6: thermodynamic identities on 1000 log-spaced densities,
/// the γ = 2 lower-bound constants and `p(r|r̄) = (γ−1) h(r|r̄)`.
pub fn eos_suite(seed: u64) -> Outcome {
    const ID: &str = "6";
    const NAME: &str = "EOS certificates";
    let run = || -> Result<Outcome, bipolar_relax_core::Error> {
        let laws = [
            GasLaw::power_law(1.0, 2.0)?,
            GasLaw::power_law(0.5, 1.5)?,
            GasLaw::power_law(2.0, 3.0)?,
            GasLaw::power_law(1.3, 5.0 / 3.0)?,
        ];
        let mut consistency = 0.0_f64;
        let mut curvature_ok = true;
        for law in &laws {
            for s in 0..1000 {
                let r = 10f64.powf(-3.0 + 6.0 * s as f64 / 999.0);
                let e = law.internal_energy(r)?;
                let p = law.pressure(r)?;
                let a = (r * e.h2 - law.dp(r)).abs() / law.dp(r);
                let b = (r * e.h1 - p - e.h).abs() / (p + e.h);
                consistency = consistency.max(a).max(b);
                curvature_ok &= law.d2p(r).abs() <= law.khat * law.dp(r) / r * (1.0 + 1e-12);
            }
        }

        let grid_n = 400;
        let lb = GasLaw::power_law(1.0, 2.0)?.lower_bound_constants(0.5, 2.0, 10.0, grid_n)?;
        let resolution = 1.0 / grid_n as f64;
        let lb_ok = (lb.c_quad - 1.0).abs() <= resolution && (lb.c_power - 1.0).abs() <= resolution;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rel = 0.0_f64;
        for _ in 0..1000 {
            let law = &laws[rng.gen_range(0..laws.len())];
            let r = rng.gen_range(0.0..5.0);
            let rbar = rng.gen_range(0.05..5.0);
            let hr = law.relative_internal(r, rbar)?;
            let pr = law.relative_pressure(r, rbar)?;
            let scale = hr.abs().max(f64::MIN_POSITIVE);
            rel = rel.max((pr - (law.gamma - 1.0) * hr).abs() / ((law.gamma - 1.0) * scale));
        }
        let pass = consistency <= tol::EOS_CONSISTENCY && curvature_ok && lb_ok && rel <= tol::RELATIVE_PRESSURE;
        Ok(Outcome::new(
            ID,
            NAME,
            pass,
            format!(
                "consistency residual {consistency:.2e}; curvature bound {curvature_ok}; gamma=2 c_quad {:.6} c_power {:.6} (1 +- {resolution}); relative pressure mismatch {rel:.2e}",
                lb.c_quad, lb.c_power
            ),
        ))
    };
    run().unwrap_or_else(|e| Outcome::failed(ID, NAME, e))
}

fn hydro_distance(a: &BipolarHydroState, b: &BipolarHydroState) -> f64 {
    let s = |x: &ScalarField, y: &ScalarField| x.zip_map(y, |p, q| p - q).max_abs();
    let v = |x: &VectorField, y: &VectorField| x.zip_map(y, |p, q| p - q).max_abs();
    s(&a.rho, &b.rho)
        .max(s(&a.n, &b.n))
        .max(v(&a.mom_rho, &b.mom_rho))
        .max(v(&a.mom_n, &b.mom_n))
        .max(v(&a.grad_phi, &b.grad_phi))
}

fn equilibrium_distance(a: &EquilibriumState, b: &EquilibriumState) -> f64 {
    let s = |x: &ScalarField, y: &ScalarField| x.zip_map(y, |p, q| p - q).max_abs();
    let v = |x: &VectorField, y: &VectorField| x.zip_map(y, |p, q| p - q).max_abs();
    s(&a.rho_bar, &b.rho_bar)
        .max(s(&a.n_bar, &b.n_bar))
        .max(v(&a.u_bar, &b.u_bar))
        .max(v(&a.v_bar, &b.v_bar))
}

/// Criterion 7: uniform rest states are one-step fixed points of both
/// solvers, and friction alone decays momentum by `e^{−dt/ε}`.
pub fn well_balanced_suite() -> Outcome {
    const ID: &str = "7";
    const NAME: &str = "well-balancedness and stiff limit";
    let run = || -> Result<Outcome, bipolar_relax_core::Error> {
        let law = GasLaw::power_law(1.0, 2.0)?;
        let mut hydro_defect = 0.0_f64;
        let mut dd_defect = 0.0_f64;
        for g in [Grid::line(1.0, 64)?, Grid::new(2, &[1.0, 1.0], &[16, 16])?] {
            for eps in [1.0, 1e-2, 1e-4] {
                let s = BipolarHydroState::uniform(&g, 1.0, 1.0, eps)?;
                let dt = euler_poisson::stable_dt(&s, &law, &law, 0.5)?;
                let next = euler_poisson::ep_step(&s, &law, &law, dt)?;
                hydro_defect = hydro_defect.max(hydro_distance(&s, &next));
            }
            let e = EquilibriumState::uniform(&g, 1.0, 1.0)?;
            let opts = drift_diffusion::DdOptions::default();
            let dt = drift_diffusion::dd_stable_dt(&e, &law, &law, opts.safety)?;
            let next = drift_diffusion::dd_step(&e, &law, &law, dt, &opts)?;
            dd_defect = dd_defect.max(equilibrium_distance(&e, &next));
        }

        // friction only: ε = 0.1, dt = 0.1 scales momentum by e^{-1}
        let g = Grid::line(1.0, 50)?;
        let mut s = BipolarHydroState::uniform(&g, 1.0, 1.0, 0.1)?;
        let x = VectorField::from_fn(&g, |_, p| (std::f64::consts::PI * p[0]).sin());
        s.mom_rho = x.clone();
        s.mom_n = x.map(|m| -0.5 * m);
        s.mom_rho.zero_boundary();
        s.mom_n.zero_boundary();
        let next = euler_poisson::relax_momentum(&s, 0.1)?;
        let target = (-1.0_f64).exp();
        let mut decay = 0.0_f64;
        for (old, new) in [(&s.mom_rho, &next.mom_rho), (&s.mom_n, &next.mom_n)] {
            for (a, b) in old.comps[0].iter().zip(&new.comps[0]) {
                if *a != 0.0 {
                    decay = decay.max((b / a - target).abs() / target);
                }
            }
        }
        let pass = hydro_defect <= tol::WELL_BALANCED && dd_defect <= tol::WELL_BALANCED && decay <= tol::FRICTION_DECAY;
        Ok(Outcome::new(
            ID,
            NAME,
            pass,
            format!(
                "hydro fixed-point defect {hydro_defect:.2e}, drift-diffusion {dd_defect:.2e} (<= {:e}); friction decay mismatch {decay:.2e} (<= {:e})",
                tol::WELL_BALANCED,
                tol::FRICTION_DECAY
            ),
        ))
    };
    run().unwrap_or_else(|e| Outcome::failed(ID, NAME, e))
}

/// Criterion 8: each weak residual drops by ≥ 1.8 per refinement.
pub fn weak(levels: &[RunSummary]) -> Outcome {
    let mut pass = levels.len() >= 3;
    let mut parts = Vec::new();
    for (q, name) in ["rho", "n", "rho u", "n v"].iter().enumerate() {
        let r: Vec<f64> = levels.iter().map(|s| s.weak_residuals[q]).collect();
        let f: Vec<f64> = r.windows(2).map(|w| w[0] / w[1]).collect();
        pass &= f.iter().all(|x| *x >= tol::REFINEMENT_FACTOR_MIN);
        parts.push(format!("{name} {} factors {}", fmt_list(&r), fmt_rates(&f)));
    }
    Outcome::new(
        "8",
        "weak-form residuals",
        pass,
        format!("{} (>= {})", parts.join("; "), tol::REFINEMENT_FACTOR_MIN),
    )
}

fn files_below(root: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(root).expect("below root").to_path_buf());
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Byte-for-byte comparison of two run directories. Returns the differing
/// or missing relative paths.
pub fn compare_dirs(expected: &Path, actual: &Path) -> std::io::Result<Vec<PathBuf>> {
    let want = files_below(expected)?;
    let got = files_below(actual)?;
    let mut diff: Vec<PathBuf> = got.iter().filter(|p| !want.contains(p)).cloned().collect();
    for rel in &want {
        let same = match (fs::read(expected.join(rel)), fs::read(actual.join(rel))) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        };
        if !same {
            diff.push(rel.clone());
        }
    }
    Ok(diff)
}

/// A fresh scratch directory under the system temp dir.
pub fn scratch_dir(tag: &str) -> PathBuf {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos());
    std::env::temp_dir().join(format!("bipolar-relax-{tag}-{}-{nanos}", std::process::id()))
}

/// Criterion 9: re-running the baseline reproduces the golden directory.
pub fn golden(cfg: &RunConfig, golden_dir: &Path) -> Outcome {
    const ID: &str = "9";
    const NAME: &str = "golden-file determinism";
    let out = scratch_dir("golden");
    let result = cfg
        .single_eps()
        .map_err(|e| e.to_string())
        .and_then(|eps| harness::run_single(cfg, eps, Some(&out)).map_err(|e| e.to_string()))
        .and_then(|_| compare_dirs(golden_dir, &out).map_err(|e| e.to_string()));
    let _ = fs::remove_dir_all(&out);
    match result {
        Ok(diff) if diff.is_empty() => Outcome::new(ID, NAME, true, format!("identical to {}", golden_dir.display())),
        Ok(diff) => Outcome::new(ID, NAME, false, format!("differs in {diff:?}")),
        Err(e) => Outcome::failed(ID, NAME, e),
    }
}

/// Gradient/divergence adjointness on random fields with zero wall faces.
pub fn adjointness_suite(seed: u64) -> Outcome {
    const ID: &str = "inv";
    const NAME: &str = "discrete adjointness";
    let run = || -> Result<Outcome, bipolar_relax_core::Error> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grids = [Grid::line(1.0, 37)?, Grid::new(2, &[1.0, 0.5], &[9, 13])?];
        let mut worst = 0.0_f64;
        for trial in 0..tol::TRIALS {
            let g = &grids[trial % 2];
            let s = random_scalar(g, &mut rng);
            let mut f = random_vector(g, &mut rng);
            f.zero_boundary();
            let lhs = grid::integrate(&s.zip_map(&grid::divergence(&f), |a, b| a * b));
            let rhs = -grid::face_dot(&grid::gradient(&s, BoundaryClosure::NeumannZero), &f);
            worst = worst.max((lhs - rhs).abs());
        }
        Ok(Outcome::new(
            ID,
            NAME,
            worst <= tol::ADJOINTNESS,
            format!("max defect {worst:.2e} over {} random pairs", tol::TRIALS),
        ))
    };
    run().unwrap_or_else(|e| Outcome::failed(ID, NAME, e))
}

/// A short coupled run: mass, well-prepared start and energy inequality.
pub fn short_run_suite() -> Outcome {
    const ID: &str = "inv";
    const NAME: &str = "short coupled run";
    let cfg = RunConfig::from_json(SHORT_RUN).expect("built-in config parses");
    match harness::run_single(&cfg, 0.1, None) {
        Ok(run) => {
            let s = &run.summary;
            let scale = s.energy0;
            let pass = s.mass_drift_max() <= tol::MASS_DRIFT
                && s.psi0 <= 1e-12 * scale
                && s.energy_defect <= 0.0
                && s.valid;
            Outcome::new(
                ID,
                NAME,
                pass,
                format!(
                    "mass drift {:.2e}, psi0 {:.2e}, energy defect {:.2e}, valid {}",
                    s.mass_drift_max(),
                    s.psi0,
                    s.energy_defect,
                    s.valid
                ),
            )
        }
        Err(e) => Outcome::failed(ID, NAME, e),
    }
}

const SHORT_RUN: &str = r#"{
  "grid": {"dim": 1, "lengths": [1.0], "cells": [64]},
  "law1": {"k": 1.0, "gamma": 2.0, "khat": 1.0},
  "law2": {"k": 1.0, "gamma": 2.0, "khat": 1.0},
  "eps": 0.1,
  "t_final": 0.02,
  "cfl": 0.5,
  "initial": {
    "rho": {"mean": 1.0, "terms": [[1, 0, 0.3]]},
    "n": {"mean": 1.0, "terms": [[1, 0, -0.2], [2, 0, 0.1]]}
  },
  "checkpoint_every": 0.01,
  "fields": "none"
}"#;

/// The fast invariant suites behind `check`.
pub fn quick_suites(seed: u64) -> Vec<Outcome> {
    vec![
        adjointness_suite(seed),
        poisson_suite(seed),
        eos_suite(seed),
        well_balanced_suite(),
        short_run_suite(),
    ]
}

/// Every acceptance criterion, driven by the baseline configuration: the
/// sweep supplies criterion 1 and the finest refinement level, the two
/// coarser levels are run at `N/4` and `N/2`.
pub fn run_all(cfg: &RunConfig, golden_dir: &Path, threads: usize, seed: u64) -> Vec<Outcome> {
    let mut out = Vec::new();
    let eps_list = match cfg.sweep_eps(&[]) {
        Ok(l) => l,
        Err(e) => return vec![Outcome::failed("1-9", "baseline configuration", e)],
    };
    let base_eps = match cfg.single_eps() {
        Ok(e) => e,
        Err(e) => return vec![Outcome::failed("1-9", "baseline configuration", e)],
    };
    let sweep = match harness::run_sweep(cfg, &eps_list, threads, None) {
        Ok(s) => s,
        Err(e) => return vec![Outcome::failed("1-9", "baseline sweep", e)],
    };
    out.push(scaling(&sweep.report));

    let finest = eps_list
        .iter()
        .position(|e| *e == base_eps)
        .and_then(|k| sweep.runs[k].as_ref().map(|r| r.summary.clone()));
    let mut levels = Vec::new();
    let mut level_error = None;
    for div in [4, 2] {
        match coarsened(cfg, div).and_then(|c| harness::run_single(&c, base_eps, None).map_err(|e| e.to_string())) {
            Ok(r) => levels.push(r.summary),
            Err(e) => level_error = Some(e),
        }
    }
    let finest = match finest {
        Some(f) => Some(f),
        None => harness::run_single(cfg, base_eps, None).ok().map(|r| r.summary),
    };
    match (level_error, finest) {
        (None, Some(f)) => {
            levels.push(f);
            out.push(slack(&levels));
            out.push(lemmas(&levels[2]));
            let all: Vec<&RunSummary> = sweep
                .report
                .rows
                .iter()
                .filter_map(|r| r.summary.as_ref())
                .chain(levels.iter())
                .collect();
            out.push(conservation(&all, &levels));
        }
        (e, _) => {
            let why = e.unwrap_or_else(|| "baseline run failed".into());
            for (id, name) in [("2", "relative-energy inequality slack"), ("3", "lemma constants"), ("4", "conservation and dissipation")] {
                out.push(Outcome::failed(id, name, &why));
            }
        }
    }
    out.push(poisson_suite(seed));
    out.push(eos_suite(seed));
    out.push(well_balanced_suite());
    if levels.len() == 3 {
        out.push(weak(&levels));
    } else {
        out.push(Outcome::failed("8", "weak-form residuals", "refinement levels missing"));
    }
    out.push(golden(cfg, golden_dir));
    out
}

fn coarsened(cfg: &RunConfig, div: usize) -> Result<RunConfig, String> {
    let mut c = cfg.clone();
    for n in &mut c.grid.cells {
        if *n % div != 0 {
            return Err(format!("{n} cells are not divisible by {div}"));
        }
        *n /= div;
    }
    Ok(c)
}
