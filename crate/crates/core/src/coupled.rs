//! Runs the hydro system and the drift-diffusion system side by side.
//!
//! The hydro step size is the CFL step clipped so that every checkpoint is hit
//! exactly; the drift-diffusion solver substeps under its own policy to the
//! end of each hydro step. Both states therefore exist at every hydro step,
//! and all time integrals (J terms, dissipation, weak residuals) are
//! trapezoidal over the hydro steps.

use alloc::vec::Vec;

use crate::drift_diffusion::{self, DdOptions, EquilibriumState};
use crate::eos::GasLaw;
use crate::error::{Error, Result};
use crate::euler_poisson::{self, BipolarHydroState, EnergyBreakdown, HydroOptions, FLOOR_MASS_LIMIT};
use crate::grid::{self, Grid, ScalarField, VectorField};
use crate::relative_energy::{self, JAccumulator, JTerms, PsiBreakdown};
use crate::weak::{self, CosineMode, WeakAccumulator};

/// `mean + Σ a · Π_axis cos(k_axis π x_axis / L_axis)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineSeries {
    pub mean: f64,
    /// `(k_x, k_y, amplitude)`.
    pub terms: Vec<(usize, usize, f64)>,
}

impl CosineSeries {
    pub fn constant(mean: f64) -> Self {
        Self {
            mean,
            terms: Vec::new(),
        }
    }

    pub fn eval(&self, grid: &Grid, x: [f64; 2]) -> f64 {
        let pi = core::f64::consts::PI;
        let mut v = self.mean;
        for &(kx, ky, a) in &self.terms {
            let mut t = a * libm::cos(pi * kx as f64 * x[0] / grid.length(0));
            if grid.dim() == 2 {
                t *= libm::cos(pi * ky as f64 * x[1] / grid.length(1));
            }
            v += t;
        }
        v
    }

    pub fn sample(&self, grid: &Grid) -> ScalarField {
        ScalarField::from_fn(grid, |x| self.eval(grid, x))
    }
}

/// Everything a coupled run needs.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub grid: Grid,
    pub law1: GasLaw,
    pub law2: GasLaw,
    pub eps: f64,
    pub t_final: f64,
    pub cfl: f64,
    pub rho0: CosineSeries,
    pub n0: CosineSeries,
    /// Start the hydro system on the lifted equilibrium (`Ψ(0) = 0`).
    pub well_prepared: bool,
    /// Amplitude `a` of `a sin(π x/L)` added to both initial velocities along
    /// the first axis.
    pub velocity_perturbation: f64,
    pub checkpoint_every: f64,
    pub hydro: HydroOptions,
    pub dd: DdOptions,
    /// Scalar/vector test modes for the weak residuals (`[k_x, k_y]`).
    pub weak_modes: Vec<[usize; 2]>,
}

impl RunSpec {
    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::config("eps must be positive"));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::config("t_final must be positive"));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::config("cfl must lie in (0, 1]"));
        }
        if !(self.checkpoint_every > 0.0) {
            return Err(Error::config("checkpoint_every must be positive"));
        }
        if (self.rho0.mean - self.n0.mean).abs() > 1e-12 * self.rho0.mean.abs().max(1.0) {
            return Err(Error::config("initial densities must have equal means"));
        }
        if !(self.rho0.mean > 0.0) {
            return Err(Error::config("initial mean density must be positive"));
        }
        Ok(())
    }

    /// Checkpoint times `0, Δ, 2Δ, …, T` (the last interval may be shorter).
    pub fn checkpoint_times(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0usize;
        loop {
            let t = k as f64 * self.checkpoint_every;
            if t >= self.t_final * (1.0 - 1e-12) {
                break;
            }
            out.push(t);
            k += 1;
        }
        out.push(self.t_final);
        out
    }
}

/// Both states and their diagnostics at a checkpoint.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub step: usize,
    pub hydro: BipolarHydroState,
    pub eq: EquilibriumState,
    pub psi: PsiBreakdown,
    pub jterms: JTerms,
    pub energy: EnergyBreakdown,
    pub dd_energy: f64,
}

/// Aggregated diagnostics of a finished run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub checkpoints: Vec<Checkpoint>,
    pub accumulator: JAccumulator,
    /// Max over tests of the four weak residuals at the horizon `t_final`.
    pub weak: [f64; 4],
    pub steps: usize,
    pub min_dt: f64,
    pub max_dt: f64,
    /// Largest relative mass drift of `ρ, n, ρ̄, n̄` over all steps.
    pub mass_drift: [f64; 4],
    /// Largest `|∫(ρ − n)| / M` over all steps.
    pub charge_drift: f64,
    /// Largest per-step growth of the hydro energy.
    pub energy_max_increase: f64,
    /// `max_t E(t) − E(0) + ∫₀ᵗ∫ρ|u|² + n|v|²`.
    pub energy_defect: f64,
    /// `max_t |E_dd(t) − E_dd(0) + ∫₀ᵗ∫ρ̄|ū|² + n̄|v̄|²|`.
    pub dd_energy_residual: f64,
    pub floor_mass: f64,
    /// False when the floor added more than [`FLOOR_MASS_LIMIT`] of the mass.
    pub valid: bool,
    /// `(min, max)` of `ρ̄` and `n̄` over the run.
    pub dd_range: [(f64, f64); 2],
}

/// Initial hydro and equilibrium states of a spec.
pub fn initial_states(spec: &RunSpec) -> Result<(BipolarHydroState, EquilibriumState)> {
    spec.validate()?;
    let g = spec.grid;
    let rho0 = spec.rho0.sample(&g);
    let mut n0 = spec.n0.sample(&g);
    // remove round-off charge so both masses agree exactly up to summation
    let shift = (grid::integrate(&rho0) - grid::integrate(&n0)) / g.volume();
    n0 = n0.map(|v| v + shift);
    if rho0.min() <= 0.0 || n0.min() <= 0.0 {
        return Err(Error::config("initial densities must be positive"));
    }
    let eq = EquilibriumState::new(rho0.clone(), n0.clone(), &spec.law1, &spec.law2, &spec.dd)?;
    let (u0, v0) = if spec.well_prepared {
        (eq.u_bar.clone(), eq.v_bar.clone())
    } else {
        (VectorField::zeros(&g), VectorField::zeros(&g))
    };
    let a = spec.velocity_perturbation;
    let bump = VectorField::from_fn(&g, |axis, x| {
        if axis == 0 {
            a * libm::sin(core::f64::consts::PI * x[0] / g.length(0))
        } else {
            0.0
        }
    });
    let mom = |r: &ScalarField, u: &VectorField| {
        grid::face_mean(r).zip_map(&u.zip_map(&bump, |p, q| p + q), |r, u| r * u)
    };
    let hydro = BipolarHydroState::new(
        0.0,
        rho0.clone(),
        mom(&rho0, &u0),
        n0.clone(),
        mom(&n0, &v0),
        spec.eps,
        &spec.hydro,
    )?;
    Ok((hydro, eq))
}

/// Error raised inside a run together with the step at which it happened.
#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub step: usize,
    pub t: f64,
    pub error: Error,
}

impl core::fmt::Display for RunError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "step {} (t = {}): {}", self.step, self.t, self.error)
    }
}

/// Advances both systems to `t_final`.
pub fn run(spec: &RunSpec) -> core::result::Result<RunResult, RunError> {
    let at = |step: usize, t: f64| move |error: Error| RunError { step, t, error };
    let (mut hydro, mut eq) = initial_states(spec).map_err(at(0, 0.0))?;
    let (law1, law2) = (&spec.law1, &spec.law2);
    let times = spec.checkpoint_times();

    let mut acc = JAccumulator::new(&hydro, &eq, law1, law2).map_err(at(0, 0.0))?;
    let modes: Vec<CosineMode> = spec
        .weak_modes
        .iter()
        .map(|&k| CosineMode::new(&spec.grid, k))
        .collect();
    let mut weak_acc =
        WeakAccumulator::new(&modes, spec.t_final, &hydro, law1, law2).map_err(at(0, 0.0))?;

    let (m_rho, m_n) = hydro.masses();
    let (m_rbar, m_nbar) = eq.masses();
    let e0 = euler_poisson::total_energy(&hydro, law1, law2);
    let edd0 = drift_diffusion::dd_energy(&eq, law1, law2);
    let mut result = RunResult {
        checkpoints: Vec::with_capacity(times.len()),
        accumulator: acc.clone(),
        weak: [0.0; 4],
        steps: 0,
        min_dt: f64::INFINITY,
        max_dt: 0.0,
        mass_drift: [0.0; 4],
        charge_drift: 0.0,
        energy_max_increase: f64::NEG_INFINITY,
        energy_defect: 0.0,
        dd_energy_residual: 0.0,
        floor_mass: 0.0,
        valid: true,
        dd_range: [(eq.rho_bar.min(), eq.rho_bar.max()), (eq.n_bar.min(), eq.n_bar.max())],
    };
    let record = |hydro: &BipolarHydroState, eq: &EquilibriumState, acc: &JAccumulator, step: usize| {
        Checkpoint {
            step,
            hydro: hydro.clone(),
            eq: eq.clone(),
            psi: acc.psi(),
            jterms: acc.terms(),
            energy: euler_poisson::total_energy(hydro, law1, law2),
            dd_energy: drift_diffusion::dd_energy(eq, law1, law2),
        }
    };
    result.checkpoints.push(record(&hydro, &eq, &acc, 0));

    let mut e_prev = e0.total;
    let mut step = 0usize;
    for &t_next in &times[1..] {
        while hydro.t < t_next {
            let remaining = t_next - hydro.t;
            let cfl_dt = euler_poisson::stable_dt(&hydro, law1, law2, spec.cfl)
                .map_err(at(step, hydro.t))?;
            let last = remaining <= cfl_dt * (1.0 + 1e-9);
            let dt = if last { remaining } else { cfl_dt };
            let mut next = euler_poisson::ep_step_with(&hydro, law1, law2, dt, &spec.hydro)
                .map_err(at(step, hydro.t))?;
            if last {
                next.t = t_next;
            }
            step += 1;
            eq = drift_diffusion::dd_advance(&eq, law1, law2, next.t, &spec.dd)
                .map_err(at(step, next.t))?;
            hydro = next;
            acc.push(&hydro, &eq).map_err(at(step, hydro.t))?;
            weak_acc.push(&hydro).map_err(at(step, hydro.t))?;

            result.min_dt = result.min_dt.min(dt);
            result.max_dt = result.max_dt.max(dt);
            let (a, b) = hydro.masses();
            let (c, d) = eq.masses();
            let drift = [
                relative_energy::relative_drift(a, m_rho),
                relative_energy::relative_drift(b, m_n),
                relative_energy::relative_drift(c, m_rbar),
                relative_energy::relative_drift(d, m_nbar),
            ];
            for q in 0..4 {
                result.mass_drift[q] = result.mass_drift[q].max(drift[q]);
            }
            result.charge_drift = result.charge_drift.max((a - b).abs() / m_rho);
            let e = euler_poisson::total_energy(&hydro, law1, law2).total;
            result.energy_max_increase = result.energy_max_increase.max(e - e_prev);
            e_prev = e;
            result.energy_defect = result.energy_defect.max(e - e0.total + hydro.dissipated);
            let edd = drift_diffusion::dd_energy(&eq, law1, law2);
            result.dd_energy_residual = result.dd_energy_residual.max((edd - edd0 + eq.dissipated).abs());
            let r = &mut result.dd_range;
            r[0] = (r[0].0.min(eq.rho_bar.min()), r[0].1.max(eq.rho_bar.max()));
            r[1] = (r[1].0.min(eq.n_bar.min()), r[1].1.max(eq.n_bar.max()));
        }
        result.checkpoints.push(record(&hydro, &eq, &acc, step));
    }
    result.steps = step;
    result.floor_mass = hydro.floor_mass;
    result.valid = hydro.floor_mass <= FLOOR_MASS_LIMIT * (m_rho + m_n);
    result.weak = weak_acc.residuals();
    result.accumulator = acc;
    Ok(result)
}

/// Modes of the default weak test bank.
pub fn default_weak_modes(grid: &Grid) -> Vec<[usize; 2]> {
    weak::default_bank(grid).iter().map(|m| m.k).collect()
}
