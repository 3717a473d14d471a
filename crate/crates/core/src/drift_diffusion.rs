//! Bipolar drift-diffusion system
//!
//! ```text
//! ρ̄_t = ∇·(∇p₁(ρ̄) + ρ̄∇φ̄),   n̄_t = ∇·(∇p₂(n̄) − n̄∇φ̄),   −Δφ̄ = ρ̄ − n̄,
//! ```
//!
//! with zero-flux walls, together with the lifted velocities
//! `ū = −∇(h₁′(ρ̄) + φ̄)`, `v̄ = −∇(h₂′(n̄) − φ̄)` and the residual forces
//! `ē₁ = (ρ̄ū)_t + ∇·(ρ̄ū⊗ū)`, `ē₂ = (n̄v̄)_t + ∇·(n̄v̄⊗v̄)`.
//!
//! The flux is `ρ̄_f ū` (face density times the face velocity), so the
//! semi-discrete energy identity holds exactly and the residual of the
//! fully discrete one is purely temporal.

use alloc::vec::Vec;

use crate::eos::{BarotropicLaw, GasLaw};
use crate::error::{Error, Result};
use crate::grid::{self, BoundaryClosure, Grid, ScalarField, VectorField};
use crate::poisson::{self, FieldSolver};
use crate::transport::momentum_convection;

/// Time discretization of the diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DdScheme {
    /// Forward Euler under `dt ≤ safety · h² / max p′`.
    #[default]
    Explicit,
    /// Backward Euler in the diffusion with the coefficient and the drift lagged.
    Implicit,
}

/// Bounds `δ ≤ density ≤ M` assumed for the equilibrium, per species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumBounds {
    pub delta: [f64; 2],
    pub m_cap: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdOptions {
    pub scheme: DdScheme,
    /// Fraction of the parabolic limit `h² / max p′` used by the explicit scheme.
    pub safety: f64,
    /// Step used by the implicit scheme as a multiple of the explicit limit.
    pub implicit_factor: f64,
    /// Densities leaving `[δ/2, 2M]` abort the run.
    pub bounds: Option<VacuumBounds>,
    pub solver: FieldSolver,
    pub poisson_tol: f64,
}

impl Default for DdOptions {
    fn default() -> Self {
        Self {
            scheme: DdScheme::Explicit,
            safety: 0.25,
            implicit_factor: 4.0,
            bounds: None,
            solver: FieldSolver::Auto,
            poisson_tol: poisson::DEFAULT_TOL,
        }
    }
}

/// `(ρ̄, n̄, φ̄)` with the lifted velocities and residual forces.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumState {
    pub t: f64,
    pub rho_bar: ScalarField,
    pub n_bar: ScalarField,
    pub phi_bar: ScalarField,
    pub grad_phi_bar: VectorField,
    pub u_bar: VectorField,
    pub v_bar: VectorField,
    pub e_bar1: VectorField,
    pub e_bar2: VectorField,
    /// `∫₀ᵗ∫ ρ̄|ū|² + n̄|v̄|²`, trapezoidal per step.
    pub dissipated: f64,
}

impl EquilibriumState {
    /// Solves for `φ̄`, lifts the velocities and estimates `ē` at the initial
    /// time by a forward difference over one probe step.
    pub fn new(
        rho_bar: ScalarField,
        n_bar: ScalarField,
        law1: &GasLaw,
        law2: &GasLaw,
        opts: &DdOptions,
    ) -> Result<Self> {
        let mut s = Self::without_residuals(0.0, rho_bar, n_bar, law1, law2, opts)?;
        let dt = dd_stable_dt(&s, law1, law2, opts.safety)?;
        let probe = step_explicit(&s, law1, law2, dt, opts, false)?;
        let (e1, e2) = forward_residuals(&s, &probe, dt);
        s.e_bar1 = e1;
        s.e_bar2 = e2;
        Ok(s)
    }

    /// Uniform densities; a fixed point of every scheme.
    pub fn uniform(grid: &Grid, rho: f64, n: f64) -> Result<Self> {
        let law = GasLaw::power_law(1.0, 2.0)?;
        Self::new(
            ScalarField::constant(grid, rho),
            ScalarField::constant(grid, n),
            &law,
            &law,
            &DdOptions::default(),
        )
    }

    fn without_residuals(
        t: f64,
        rho_bar: ScalarField,
        n_bar: ScalarField,
        law1: &GasLaw,
        law2: &GasLaw,
        opts: &DdOptions,
    ) -> Result<Self> {
        if rho_bar.grid() != n_bar.grid() {
            return Err(Error::domain("fields live on different grids"));
        }
        let g = *rho_bar.grid();
        let charge = rho_bar.zip_map(&n_bar, |a, b| a - b);
        let scale = grid::integrate(&rho_bar) + grid::integrate(&n_bar);
        let sol = poisson::solve_field(&charge, opts.solver, opts.poisson_tol, scale, None)?;
        let (u_bar, v_bar) = lift(&rho_bar, &n_bar, &sol.phi, law1, law2)?;
        Ok(Self {
            t,
            rho_bar,
            n_bar,
            phi_bar: sol.phi,
            grad_phi_bar: sol.grad_phi,
            u_bar,
            v_bar,
            e_bar1: VectorField::zeros(&g),
            e_bar2: VectorField::zeros(&g),
            dissipated: 0.0,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.rho_bar.grid()
    }

    /// `(∫ρ̄, ∫n̄)`.
    pub fn masses(&self) -> (f64, f64) {
        (grid::integrate(&self.rho_bar), grid::integrate(&self.n_bar))
    }

    /// Face fluxes `(ρ̄_f ū, n̄_f v̄)`.
    pub fn fluxes(&self) -> (VectorField, VectorField) {
        (
            grid::face_mean(&self.rho_bar).zip_map(&self.u_bar, |r, u| r * u),
            grid::face_mean(&self.n_bar).zip_map(&self.v_bar, |r, u| r * u),
        )
    }

    /// `∫ ρ̄|ū|² + n̄|v̄|²` at this instant.
    pub fn dissipation_rate(&self) -> f64 {
        let (f1, f2) = self.fluxes();
        grid::face_dot(&f1, &self.u_bar) + grid::face_dot(&f2, &self.v_bar)
    }
}

/// `ū = −∇(h₁′(ρ̄) + φ̄)`, `v̄ = −∇(h₂′(n̄) − φ̄)` with zero wall faces.
fn lift(
    rho_bar: &ScalarField,
    n_bar: &ScalarField,
    phi_bar: &ScalarField,
    law1: &GasLaw,
    law2: &GasLaw,
) -> Result<(VectorField, VectorField)> {
    for (c, &x) in rho_bar.values.iter().chain(&n_bar.values).enumerate() {
        if !(x > 0.0) {
            return Err(Error::domain(alloc::format!(
                "equilibrium density {x:e} at or below zero (entry {c})"
            )));
        }
    }
    let velocity = |r: &ScalarField, law: &GasLaw, sign: f64| {
        let pot = r.zip_map(phi_bar, |x, p| law.dh(x) + sign * p);
        grid::gradient(&pot, BoundaryClosure::NeumannZero).map(|g| -g)
    };
    Ok((velocity(rho_bar, law1, 1.0), velocity(n_bar, law2, -1.0)))
}

/// Lifted velocities of an equilibrium state.
pub fn reconstruct_velocities(
    s: &EquilibriumState,
    law1: &GasLaw,
    law2: &GasLaw,
) -> Result<(VectorField, VectorField)> {
    lift(&s.rho_bar, &s.n_bar, &s.phi_bar, law1, law2)
}

/// `safety · h² / max p′` over both species.
pub fn dd_stable_dt(s: &EquilibriumState, law1: &GasLaw, law2: &GasLaw, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 0.5) {
        return Err(Error::config("parabolic safety factor must lie in (0, 0.5]"));
    }
    let h = s.grid().stability_length();
    let d1 = s.rho_bar.values.iter().fold(0.0f64, |m, &x| m.max(law1.dp(x)));
    let d2 = s.n_bar.values.iter().fold(0.0f64, |m, &x| m.max(law2.dp(x)));
    let d = d1.max(d2);
    Ok(if d > 0.0 { safety * h * h / d } else { safety * h * h })
}

fn check_bounds(r: &ScalarField, species: usize, opts: &DdOptions) -> Result<()> {
    if let Some(b) = opts.bounds {
        let (lower, upper) = (0.5 * b.delta[species], 2.0 * b.m_cap[species]);
        for &x in &r.values {
            if !(x >= lower && x <= upper) {
                return Err(Error::VacuumProximity { value: x, lower, upper });
            }
        }
    }
    Ok(())
}

/// `(f_hi − f_lo)/dt + ∇·(f ⊗ w)` with zero wall faces.
fn residual(f_hi: &VectorField, f_lo: &VectorField, dt: f64, f: &VectorField, w: &VectorField) -> VectorField {
    let conv = momentum_convection(f, w);
    let mut e = f_hi.zip_map(f_lo, |a, b| (a - b) / dt).zip_map(&conv, |a, c| a + c);
    e.zero_boundary();
    e
}

fn forward_residuals(
    old: &EquilibriumState,
    new: &EquilibriumState,
    dt: f64,
) -> (VectorField, VectorField) {
    let (f1_old, f2_old) = old.fluxes();
    let (f1, f2) = new.fluxes();
    (
        residual(&f1, &f1_old, dt, &f1_old, &old.u_bar),
        residual(&f2, &f2_old, dt, &f2_old, &old.v_bar),
    )
}

fn finish_step(
    s: &EquilibriumState,
    rho: ScalarField,
    n: ScalarField,
    law1: &GasLaw,
    law2: &GasLaw,
    dt: f64,
    opts: &DdOptions,
    residuals: bool,
) -> Result<EquilibriumState> {
    check_bounds(&rho, 0, opts)?;
    check_bounds(&n, 1, opts)?;
    let mut out = EquilibriumState::without_residuals(s.t + dt, rho, n, law1, law2, opts)?;
    // backward difference of ρ̄ū plus its convection at the new level
    if residuals {
        let (f1_old, f2_old) = s.fluxes();
        let (f1, f2) = out.fluxes();
        out.e_bar1 = residual(&f1, &f1_old, dt, &f1, &out.u_bar);
        out.e_bar2 = residual(&f2, &f2_old, dt, &f2, &out.v_bar);
    }
    out.dissipated = s.dissipated + 0.5 * dt * (s.dissipation_rate() + out.dissipation_rate());
    Ok(out)
}

fn step_explicit(
    s: &EquilibriumState,
    law1: &GasLaw,
    law2: &GasLaw,
    dt: f64,
    opts: &DdOptions,
    residuals: bool,
) -> Result<EquilibriumState> {
    let (f1, f2) = s.fluxes();
    let rho = s.rho_bar.zip_map(&grid::divergence(&f1), |r, d| r - dt * d);
    let n = s.n_bar.zip_map(&grid::divergence(&f2), |r, d| r - dt * d);
    finish_step(s, rho, n, law1, law2, dt, opts, residuals)
}

/// `x − dt ∇·(D_f ∇x)` with zero wall flux.
fn implicit_operator(x: &ScalarField, diff: &VectorField, dt: f64) -> ScalarField {
    let flux = grid::gradient(x, BoundaryClosure::NeumannZero).zip_map(diff, |g, d| g * d);
    x.zip_map(&grid::divergence(&flux), |a, d| a - dt * d)
}

/// Conjugate gradients for the SPD implicit diffusion operator.
fn implicit_solve(
    b: &ScalarField,
    diff: &VectorField,
    dt: f64,
    guess: &ScalarField,
    tol: f64,
) -> Result<ScalarField> {
    let n = b.values.len();
    let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(x, y)| x * y).sum::<f64>();
    let mut x = guess.clone();
    let ax = implicit_operator(&x, diff, dt);
    let mut r: Vec<f64> = b.values.iter().zip(&ax.values).map(|(p, q)| p - q).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = tol * b.max_abs().max(1.0);
    for it in 0..=(10 * n) {
        if r.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= target {
            return Ok(x);
        }
        if it == 10 * n {
            break;
        }
        let pf = ScalarField::from_values(b.grid(), p.clone())?;
        let ap = implicit_operator(&pf, diff, dt).values;
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x.values[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::Solver {
        residual: r.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        iterations: 10 * n,
    })
}

fn step_implicit(
    s: &EquilibriumState,
    law1: &GasLaw,
    law2: &GasLaw,
    dt: f64,
    opts: &DdOptions,
    residuals: bool,
) -> Result<EquilibriumState> {
    let species = |r: &ScalarField, law: &GasLaw, sign: f64| -> Result<ScalarField> {
        let rf = grid::face_mean(r);
        let diff = rf.map(|x| law.dp(x));
        // lagged drift ±ρ_f∇φ̄ moves to the right-hand side
        let drift = rf.zip_map(&s.grad_phi_bar, |a, g| sign * a * g);
        let rhs = r.zip_map(&grid::divergence(&drift), |a, d| a + dt * d);
        implicit_solve(&rhs, &diff, dt, r, 1e-13)
    };
    let rho = species(&s.rho_bar, law1, 1.0)?;
    let n = species(&s.n_bar, law2, -1.0)?;
    finish_step(s, rho, n, law1, law2, dt, opts, residuals)
}

/// One step of the configured scheme.
///
/// The explicit scheme rejects steps above `0.5 · h² / max p′`.
pub fn dd_step(
    s: &EquilibriumState,
    law1: &GasLaw,
    law2: &GasLaw,
    dt: f64,
    opts: &DdOptions,
) -> Result<EquilibriumState> {
    step(s, law1, law2, dt, opts, true)
}

fn step(
    s: &EquilibriumState,
    law1: &GasLaw,
    law2: &GasLaw,
    dt: f64,
    opts: &DdOptions,
    residuals: bool,
) -> Result<EquilibriumState> {
    if !(dt > 0.0) {
        return Err(Error::domain("dt must be positive"));
    }
    match opts.scheme {
        DdScheme::Explicit => {
            let limit = dd_stable_dt(s, law1, law2, 0.5)?;
            if dt > limit * (1.0 + 1e-12) {
                return Err(Error::Stability { dt, limit });
            }
            step_explicit(s, law1, law2, dt, opts, residuals)
        }
        DdScheme::Implicit => step_implicit(s, law1, law2, dt, opts, residuals),
    }
}

/// Advances to `t_target` with equal substeps under the scheme's step policy;
/// `ē` is refreshed on the final substep only.
pub fn dd_advance(
    s: &EquilibriumState,
    law1: &GasLaw,
    law2: &GasLaw,
    t_target: f64,
    opts: &DdOptions,
) -> Result<EquilibriumState> {
    let span = t_target - s.t;
    if span < 0.0 {
        return Err(Error::domain("cannot advance backwards in time"));
    }
    if span == 0.0 {
        return Ok(s.clone());
    }
    let mut policy = dd_stable_dt(s, law1, law2, opts.safety)?;
    if opts.scheme == DdScheme::Implicit {
        policy *= opts.implicit_factor;
    }
    let steps = libm::ceil(span / policy).max(1.0) as usize;
    let dt = span / steps as f64;
    let mut cur = s.clone();
    for k in 0..steps {
        // ē is only needed where the caller looks: at the end of the advance
        let mut next = step(&cur, law1, law2, dt, opts, k + 1 == steps)?;
        if k + 1 == steps {
            next.t = t_target;
        }
        cur = next;
    }
    Ok(cur)
}

/// `ē₁, ē₂` at every checkpoint from the recorded states alone.
///
/// Interior checkpoints use centred time differences of `ρ̄ū`, the ends
/// one-sided ones; convection uses the same staggered operator as the hydro
/// solver.
pub fn lifted_residuals(history: &[EquilibriumState]) -> Result<Vec<(VectorField, VectorField)>> {
    let len = history.len();
    if len < 3 {
        return Err(Error::domain("lifted residuals need at least three checkpoints"));
    }
    let fluxes: Vec<(VectorField, VectorField)> = history.iter().map(|s| s.fluxes()).collect();
    let mut out = Vec::with_capacity(len);
    for k in 0..len {
        let (lo, hi) = if k == 0 {
            (0, 1)
        } else if k + 1 == len {
            (len - 2, len - 1)
        } else {
            (k - 1, k + 1)
        };
        let dt = history[hi].t - history[lo].t;
        if !(dt > 0.0) {
            return Err(Error::domain("checkpoint times must increase"));
        }
        out.push((
            residual(&fluxes[hi].0, &fluxes[lo].0, dt, &fluxes[k].0, &history[k].u_bar),
            residual(&fluxes[hi].1, &fluxes[lo].1, dt, &fluxes[k].1, &history[k].v_bar),
        ));
    }
    Ok(out)
}

/// `E_dd = ∫ h₁(ρ̄) + h₂(n̄) + ½|∇φ̄|²`.
pub fn dd_energy(s: &EquilibriumState, law1: &GasLaw, law2: &GasLaw) -> f64 {
    grid::integrate(&s.rho_bar.map(|x| law1.h(x)))
        + grid::integrate(&s.n_bar.map(|x| law2.h(x)))
        + 0.5 * grid::face_dot(&s.grad_phi_bar, &s.grad_phi_bar)
}

/// `max_t |E_dd(t) − E_dd(0) + ∫₀ᵗ∫ ρ̄|ū|² + n̄|v̄|²|` with the dissipation
/// integral taken from the per-step trapezoidal sums.
pub fn dd_energy_residual(history: &[EquilibriumState], law1: &GasLaw, law2: &GasLaw) -> Result<f64> {
    if history.len() < 2 {
        return Err(Error::domain("energy residual needs at least two states"));
    }
    let e0 = dd_energy(&history[0], law1, law2);
    let d0 = history[0].dissipated;
    Ok(history.iter().fold(0.0f64, |m, s| {
        m.max((dd_energy(s, law1, law2) - e0 + s.dissipated - d0).abs())
    }))
}
