//! Staggered stiff-relaxation stepper for the scaled bipolar Euler-Poisson
//! system
//!
//! ```text
//! ρ_t + ∇·(ρu) = 0,   ε((ρu)_t + ∇·(ρu⊗u)) + ∇p₁(ρ) = −ρ∇φ − ρu,
//! n_t + ∇·(nv) = 0,   ε((nv)_t + ∇·(nv⊗v)) + ∇p₂(n) = +n∇φ − nv,
//! −Δφ = ρ − n,        u·ν = v·ν = 0,  ∂φ/∂ν = 0.
//! ```
//!
//! Densities live in cells, momenta on faces. One step is
//! transport → Poisson → sources: a central continuity flux and an upwinded
//! convection update, a field re-solve, then the pressure, field and
//! friction forces integrated exactly over the step with the integrating
//! factor `e^{−dt/ε}`. As `ε → 0` the step collapses onto the explicit
//! drift-diffusion scheme of [`crate::drift_diffusion`].

use alloc::vec::Vec;

use crate::eos::{BarotropicLaw, GasLaw};
use crate::error::{Error, Result};
use crate::grid::{self, BoundaryClosure, Grid, ScalarField, VectorField};
use crate::poisson::{self, FieldSolver};
use crate::transport::{face_velocity, momentum_convection};

/// Value assigned to a cell whose density went (slightly) negative.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// Runs whose cumulative floor correction exceeds this fraction of the mass
/// are invalid.
pub const FLOOR_MASS_LIMIT: f64 = 1e-8;

/// Numerical knobs shared by the hydro stepper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroOptions {
    /// Face densities at or below this carry zero velocity.
    pub floor: f64,
    /// Negative densities below `−positivity_tol · mean density` abort the step.
    pub positivity_tol: f64,
    pub solver: FieldSolver,
    pub poisson_tol: f64,
}

impl Default for HydroOptions {
    fn default() -> Self {
        Self {
            floor: DENSITY_FLOOR,
            positivity_tol: 1e-8,
            solver: FieldSolver::Auto,
            poisson_tol: poisson::DEFAULT_TOL,
        }
    }
}

/// `(ρ, ρu, n, nv, φ)` at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct BipolarHydroState {
    pub t: f64,
    pub rho: ScalarField,
    pub mom_rho: VectorField,
    pub n: ScalarField,
    pub mom_n: VectorField,
    pub phi: ScalarField,
    pub grad_phi: VectorField,
    pub eps: f64,
    /// `∫₀ᵗ∫ ρ|u|² + n|v|²`, accumulated by the trapezoidal rule per step.
    pub dissipated: f64,
    /// Mass added by the positivity floor so far (both species).
    pub floor_mass: f64,
}

impl BipolarHydroState {
    /// Builds a state from densities and face momenta and solves for `φ`.
    ///
    /// Wall faces of the momenta are forced to zero.
    pub fn new(
        t: f64,
        rho: ScalarField,
        mut mom_rho: VectorField,
        n: ScalarField,
        mut mom_n: VectorField,
        eps: f64,
        opts: &HydroOptions,
    ) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::config("eps must be positive"));
        }
        if rho.grid() != n.grid() || mom_rho.grid() != rho.grid() || mom_n.grid() != rho.grid() {
            return Err(Error::domain("fields live on different grids"));
        }
        if rho.min() < 0.0 || n.min() < 0.0 {
            return Err(Error::domain("densities must be non-negative"));
        }
        mom_rho.zero_boundary();
        mom_n.zero_boundary();
        let sol = solve_charge(&rho, &n, opts, None)?;
        Ok(Self {
            t,
            rho,
            mom_rho,
            n,
            mom_n,
            phi: sol.0,
            grad_phi: sol.1,
            eps,
            dissipated: 0.0,
            floor_mass: 0.0,
        })
    }

    /// Uniform densities at rest.
    pub fn uniform(grid: &Grid, rho: f64, n: f64, eps: f64) -> Result<Self> {
        Self::new(
            0.0,
            ScalarField::constant(grid, rho),
            VectorField::zeros(grid),
            ScalarField::constant(grid, n),
            VectorField::zeros(grid),
            eps,
            &HydroOptions::default(),
        )
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    /// Face velocities `(u, v)` with the default floor.
    pub fn velocities(&self, floor: f64) -> (VectorField, VectorField) {
        (
            face_velocity(&self.mom_rho, &grid::face_mean(&self.rho), floor),
            face_velocity(&self.mom_n, &grid::face_mean(&self.n), floor),
        )
    }

    /// `(∫ρ, ∫n)`.
    pub fn masses(&self) -> (f64, f64) {
        (grid::integrate(&self.rho), grid::integrate(&self.n))
    }
}

fn solve_charge(
    rho: &ScalarField,
    n: &ScalarField,
    opts: &HydroOptions,
    guess: Option<&ScalarField>,
) -> Result<(ScalarField, VectorField)> {
    let charge = rho.zip_map(n, |a, b| a - b);
    let scale = grid::integrate(rho) + grid::integrate(n);
    let sol = poisson::solve_field(&charge, opts.solver, opts.poisson_tol, scale, guess)?;
    Ok((sol.phi, sol.grad_phi))
}

/// `Σ_faces m²/ρ_f · w`, i.e. `∫ρ|u|²` on the staggered layout.
pub(crate) fn face_kinetic(m: &VectorField, rho_face: &VectorField, floor: f64) -> f64 {
    grid::face_integral(m.grid(), |a, k| {
        let r = rho_face.comps[a][k];
        if r > floor {
            m.comps[a][k] * m.comps[a][k] / r
        } else {
            0.0
        }
    })
}

/// Floors negative cells at [`DENSITY_FLOOR`] and returns the mass added.
fn apply_floor(r: &mut ScalarField, mean: f64, tol: f64) -> Result<f64> {
    let dv = r.grid().cell_volume();
    let mut added = 0.0;
    for (c, v) in r.values.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -tol * mean {
                return Err(Error::Positivity { cell: c, value: *v });
            }
            added += (DENSITY_FLOOR - *v) * dv;
            *v = DENSITY_FLOOR;
        }
    }
    Ok(added)
}

/// Maximum signal speed `|u| + √(p′/ε)` over both species.
fn max_speed(s: &BipolarHydroState, law1: &GasLaw, law2: &GasLaw) -> f64 {
    let (u, v) = s.velocities(DENSITY_FLOOR);
    let sound = |r: &ScalarField, law: &GasLaw| {
        r.values
            .iter()
            .fold(0.0f64, |m, &x| m.max(libm::sqrt(law.dp(x.max(0.0)) / s.eps)))
    };
    (u.max_abs() + sound(&s.rho, law1)).max(v.max_abs() + sound(&s.n, law2))
}

/// `cfl · h / max(|u| + √(p′/ε))`, or `cfl · h` when nothing moves.
pub fn stable_dt(s: &BipolarHydroState, law1: &GasLaw, law2: &GasLaw, cfl: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::config("cfl must lie in (0, 1]"));
    }
    let h = s.grid().stability_length();
    let speed = max_speed(s, law1, law2);
    Ok(if speed > 0.0 { cfl * h / speed } else { cfl * h })
}

/// One step with the default options.
pub fn ep_step(
    s: &BipolarHydroState,
    law1: &GasLaw,
    law2: &GasLaw,
    dt: f64,
) -> Result<BipolarHydroState> {
    ep_step_with(s, law1, law2, dt, &HydroOptions::default())
}

/// One transport → Poisson → source step.
pub fn ep_step_with(
    s: &BipolarHydroState,
    law1: &GasLaw,
    law2: &GasLaw,
    dt: f64,
    opts: &HydroOptions,
) -> Result<BipolarHydroState> {
    let limit = stable_dt(s, law1, law2, 1.0)?;
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::Stability { dt, limit });
    }
    let floor = opts.floor;

    // (a) transport
    let transport = |r: &ScalarField, m: &VectorField| -> (ScalarField, VectorField, f64) {
        let rf = grid::face_mean(r);
        let u = face_velocity(m, &rf, floor);
        let div = grid::divergence(m);
        let r_new = r.zip_map(&div, |a, d| a - dt * d);
        let conv = momentum_convection(m, &u);
        let m_new = m.zip_map(&conv, |a, c| a - dt * c);
        (r_new, m_new, face_kinetic(m, &rf, floor))
    };
    let (mut rho, m_rho, d_rho_old) = transport(&s.rho, &s.mom_rho);
    let (mut n, m_n, d_n_old) = transport(&s.n, &s.mom_n);
    let vol = s.grid().volume();
    let (m1, m2) = s.masses();
    let mut floor_mass = s.floor_mass;
    floor_mass += apply_floor(&mut rho, m1 / vol, opts.positivity_tol)?;
    floor_mass += apply_floor(&mut n, m2 / vol, opts.positivity_tol)?;

    // (b) field
    let (phi, grad_phi) = solve_charge(&rho, &n, opts, Some(&s.phi))?;

    // (c) pressure, field and friction with the integrating factor
    let decay = libm::exp(-dt / s.eps);
    let gain = -libm::expm1(-dt / s.eps);
    let source = |r: &ScalarField, m: &VectorField, law: &GasLaw, sign: f64| {
        let potential = r.zip_map(&phi, |x, p| law.dh(x.max(0.0)) + sign * p);
        let force = grid::gradient(&potential, BoundaryClosure::NeumannZero);
        let rf = grid::face_mean(r);
        let mut out = m.clone();
        for a in 0..r.grid().dim() {
            for k in 0..out.comps[a].len() {
                out.comps[a][k] = decay * m.comps[a][k] - gain * rf.comps[a][k] * force.comps[a][k];
            }
        }
        out.zero_boundary();
        let d = face_kinetic(&out, &rf, floor);
        (out, d)
    };
    let (mom_rho, d_rho) = source(&rho, &m_rho, law1, 1.0);
    let (mom_n, d_n) = source(&n, &m_n, law2, -1.0);

    Ok(BipolarHydroState {
        t: s.t + dt,
        rho,
        mom_rho,
        n,
        mom_n,
        phi,
        grad_phi,
        eps: s.eps,
        dissipated: s.dissipated + 0.5 * dt * (d_rho_old + d_n_old + d_rho + d_n),
        floor_mass,
    })
}

/// The friction-only subsystem `ε m_t = −m` solved exactly over `dt`.
pub fn relax_momentum(s: &BipolarHydroState, dt: f64) -> Result<BipolarHydroState> {
    if !(dt >= 0.0) {
        return Err(Error::domain("dt must be non-negative"));
    }
    let decay = libm::exp(-dt / s.eps);
    let mut out = s.clone();
    out.mom_rho = s.mom_rho.map(|m| m * decay);
    out.mom_n = s.mom_n.map(|m| m * decay);
    out.t += dt;
    Ok(out)
}

/// Energy split into its five non-negative parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub kinetic_rho: f64,
    pub kinetic_n: f64,
    pub internal_rho: f64,
    pub internal_n: f64,
    pub field: f64,
    pub total: f64,
}

/// `∫ ε½ρ|u|² + ε½n|v|² + h₁(ρ) + h₂(n) + ½|∇φ|²`.
///
/// Kinetic parts are face quadratures of `m²/ρ_f`, matching the staggered
/// momentum; the field part uses the stored `∇φ`.
pub fn total_energy(s: &BipolarHydroState, law1: &GasLaw, law2: &GasLaw) -> EnergyBreakdown {
    let kin = |m: &VectorField, r: &ScalarField| {
        0.5 * s.eps * face_kinetic(m, &grid::face_mean(r), DENSITY_FLOOR)
    };
    let internal = |r: &ScalarField, law: &GasLaw| grid::integrate(&r.map(|x| law.h(x.max(0.0))));
    let e = EnergyBreakdown {
        kinetic_rho: kin(&s.mom_rho, &s.rho),
        kinetic_n: kin(&s.mom_n, &s.n),
        internal_rho: internal(&s.rho, law1),
        internal_n: internal(&s.n, law2),
        field: 0.5 * grid::face_dot(&s.grad_phi, &s.grad_phi),
        total: 0.0,
    };
    EnergyBreakdown {
        total: e.kinetic_rho + e.kinetic_n + e.internal_rho + e.internal_n + e.field,
        ..e
    }
}

/// Outcome of [`dissipation_budget`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationBudget {
    /// `max_t E(t) − E(0) + ∫₀ᵗ∫ ρ|u|² + n|v|²`.
    pub defect: f64,
    /// `E` never grew by more than the tolerance between checkpoints.
    pub sign_ok: bool,
    /// Largest growth of `E` between consecutive checkpoints.
    pub max_increase: f64,
}

/// Audits the energy inequality along a run.
///
/// The dissipation integral is the per-step trapezoidal sum carried in
/// [`BipolarHydroState::dissipated`], so checkpoints need not be uniform.
pub fn dissipation_budget(
    history: &[BipolarHydroState],
    law1: &GasLaw,
    law2: &GasLaw,
    tol: f64,
) -> Result<DissipationBudget> {
    if history.len() < 2 {
        return Err(Error::domain("dissipation budget needs at least two states"));
    }
    let energies: Vec<f64> = history.iter().map(|s| total_energy(s, law1, law2).total).collect();
    let e0 = energies[0];
    let d0 = history[0].dissipated;
    let mut defect = f64::NEG_INFINITY;
    for (s, e) in history.iter().zip(&energies) {
        defect = defect.max(e - e0 + (s.dissipated - d0));
    }
    let max_increase = energies
        .windows(2)
        .fold(f64::NEG_INFINITY, |m, w| m.max(w[1] - w[0]));
    Ok(DissipationBudget {
        defect,
        sign_ok: max_increase <= tol,
        max_increase,
    })
}

/// Observational variables of a hyperbolic-scale solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    pub t: f64,
    pub u: VectorField,
    pub v: VectorField,
    pub eps: f64,
}

/// Diffusive scaling: `t = τ t_hyp`, `u = u_hyp / τ`, `v = v_hyp / τ`, `ε = τ²`.
pub fn diffusive_rescale(
    tau: f64,
    t_hyp: f64,
    u_hyp: &VectorField,
    v_hyp: &VectorField,
) -> Result<Rescaled> {
    if !(tau > 0.0) {
        return Err(Error::domain("tau must be positive"));
    }
    Ok(Rescaled {
        t: tau * t_hyp,
        u: u_hyp.map(|x| x / tau),
        v: v_hyp.map(|x| x / tau),
        eps: tau * tau,
    })
}
