//! Relative energy between a hydro state and the lifted equilibrium, the
//! four terms of its evolution inequality, explicit lemma bounds for them
//! and the ε-rate fit.
//!
//! ```text
//! Ψ = ∫ ε½ρ|u−ū|² + ε½n|v−v̄|² + h₁(ρ|ρ̄) + h₂(n|n̄) + ½|∇(φ−φ̄)|²
//! Ψ(t) − Ψ(0) + ∫₀ᵗ∫ ρ|u−ū|² + n|v−v̄|²  ≤  J₁ + J₂ + J₃ + J₄
//! ```
//!
//! Velocity quantities are evaluated on faces, where the momentum lives;
//! density quantities in cells. Time integrals are trapezoidal over every
//! step pushed into a [`JAccumulator`].

use alloc::string::String;
use alloc::vec::Vec;

use crate::drift_diffusion::EquilibriumState;
use crate::eos::{BarotropicLaw, GasLaw};
use crate::error::{Error, Result};
use crate::euler_poisson::{BipolarHydroState, DENSITY_FLOOR};
use crate::grid::{self, ScalarField, VectorField};

/// Tolerance for matching the time stamps of the two states.
pub const TIME_MATCH_TOL: f64 = 1e-12;

/// `Ψ` split into its five parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PsiBreakdown {
    pub t: f64,
    pub kin_rho: f64,
    pub kin_n: f64,
    pub int_rho: f64,
    pub int_n: f64,
    pub field: f64,
    pub total: f64,
}

fn check_aligned(h: &BipolarHydroState, e: &EquilibriumState) -> Result<()> {
    if h.grid() != e.grid() {
        return Err(Error::domain("hydro and equilibrium states use different grids"));
    }
    if (h.t - e.t).abs() > TIME_MATCH_TOL * (1.0 + h.t.abs()) {
        return Err(Error::domain(alloc::format!(
            "state times differ: hydro {} vs equilibrium {}",
            h.t,
            e.t
        )));
    }
    Ok(())
}

/// Face velocity differences `u − ū`, zero where the face density is at the floor.
fn velocity_gap(m: &VectorField, rf: &VectorField, bar: &VectorField) -> VectorField {
    let mut w = bar.clone();
    for a in 0..m.grid().dim() {
        for k in 0..w.comps[a].len() {
            let r = rf.comps[a][k];
            w.comps[a][k] = if r > DENSITY_FLOOR {
                m.comps[a][k] / r - bar.comps[a][k]
            } else {
                0.0
            };
        }
    }
    w
}

/// Per-species face data reused by Ψ and the J terms.
struct Species {
    rf: VectorField,
    w: VectorField,
}

impl Species {
    fn new(m: &VectorField, r: &ScalarField, bar: &VectorField) -> Self {
        let rf = grid::face_mean(r);
        let w = velocity_gap(m, &rf, bar);
        Self { rf, w }
    }

    /// `∫ρ|u−ū|²`.
    fn kinetic(&self) -> f64 {
        grid::face_integral(self.rf.grid(), |a, k| {
            self.rf.comps[a][k] * self.w.comps[a][k] * self.w.comps[a][k]
        })
    }
}

fn relative_internal(r: &ScalarField, rbar: &ScalarField, law: &GasLaw) -> f64 {
    grid::integrate(&r.zip_map(rbar, |x, y| law.h_rel(x.max(0.0), y)))
}

fn psi_from(
    h: &BipolarHydroState,
    e: &EquilibriumState,
    s1: &Species,
    s2: &Species,
    law1: &GasLaw,
    law2: &GasLaw,
) -> PsiBreakdown {
    let dphi = h.grad_phi.zip_map(&e.grad_phi_bar, |a, b| a - b);
    let p = PsiBreakdown {
        t: h.t,
        kin_rho: 0.5 * h.eps * s1.kinetic(),
        kin_n: 0.5 * h.eps * s2.kinetic(),
        int_rho: relative_internal(&h.rho, &e.rho_bar, law1),
        int_n: relative_internal(&h.n, &e.n_bar, law2),
        field: 0.5 * grid::face_dot(&dphi, &dphi),
        total: 0.0,
    };
    PsiBreakdown {
        total: p.kin_rho + p.kin_n + p.int_rho + p.int_n + p.field,
        ..p
    }
}

/// Relative energy of a hydro state with respect to the lifted equilibrium.
///
/// `∇(φ−φ̄)` is the difference of the two stored gradients, which equals the
/// gradient of the re-solved potential difference by linearity.
pub fn compute_psi(
    h: &BipolarHydroState,
    e: &EquilibriumState,
    law1: &GasLaw,
    law2: &GasLaw,
) -> Result<PsiBreakdown> {
    check_aligned(h, e)?;
    let s1 = Species::new(&h.mom_rho, &h.rho, &e.u_bar);
    let s2 = Species::new(&h.mom_n, &h.n, &e.v_bar);
    Ok(psi_from(h, e, &s1, &s2, law1, law2))
}

/// Instantaneous integrands of the inequality at one time level.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JRates {
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
    pub j4: f64,
    /// `∫ρ|u−ū|² + n|v−v̄|²`.
    pub dissipation: f64,
}

impl JRates {
    fn axpy(&mut self, s: f64, o: &JRates) {
        self.j1 += s * o.j1;
        self.j2 += s * o.j2;
        self.j3 += s * o.j3;
        self.j4 += s * o.j4;
        self.dissipation += s * o.dissipation;
    }
}

/// Velocity-gradient data of a lifted velocity.
struct Strain {
    /// `∂_a w_a` per face normal to `a` (mean of the adjacent cells).
    diag_face: VectorField,
    /// `∂_y w_x + ∂_x w_y` per cell (2D only).
    shear: ScalarField,
    /// `∇·w` per cell.
    div: ScalarField,
    max_diag: f64,
    max_shear: f64,
}

fn strain(w: &VectorField) -> Strain {
    let g = *w.grid();
    let dim = g.dim();
    let mut diag_cell = [ScalarField::zeros(&g), ScalarField::zeros(&g)];
    for c in 0..g.cell_count() {
        let (i, j) = g.cell_coords(c);
        diag_cell[0].values[c] = (w.comps[0][g.face(0, i + 1, j)] - w.comps[0][g.face(0, i, j)]) / g.dx(0);
        if dim == 2 {
            diag_cell[1].values[c] = (w.comps[1][g.face(1, i, j + 1)] - w.comps[1][g.face(1, i, j)]) / g.dx(1);
        }
    }
    let div = diag_cell[0].zip_map(&diag_cell[1], |a, b| a + b);
    let mut diag_face = VectorField::zeros(&g);
    for a in 0..dim {
        let fm = grid::face_mean(&diag_cell[a]);
        diag_face.comps[a] = fm.comps[a].clone();
    }
    let mut shear = ScalarField::zeros(&g);
    if dim == 2 {
        let wc = [w.cell_component(0), w.cell_component(1)];
        let (nx, ny) = (g.n(0), g.n(1));
        // centred differences of cell values, one-sided next to the walls
        let d = |f: &ScalarField, axis: usize, i: usize, j: usize| -> f64 {
            let (lo, hi, span) = if axis == 0 {
                let lo = i.saturating_sub(1);
                let hi = (i + 1).min(nx - 1);
                (g.cell(lo, j), g.cell(hi, j), (hi - lo) as f64 * g.dx(0))
            } else {
                let lo = j.saturating_sub(1);
                let hi = (j + 1).min(ny - 1);
                (g.cell(i, lo), g.cell(i, hi), (hi - lo) as f64 * g.dx(1))
            };
            (f.values[hi] - f.values[lo]) / span
        };
        for c in 0..g.cell_count() {
            let (i, j) = g.cell_coords(c);
            shear.values[c] = d(&wc[0], 1, i, j) + d(&wc[1], 0, i, j);
        }
    }
    let max_diag = diag_face.max_abs();
    let max_shear = shear.max_abs();
    Strain {
        diag_face,
        shear,
        div,
        max_diag,
        max_shear,
    }
}

/// `∫ ∇w : ρ g⊗g` on the staggered layout.
fn strain_work(st: &Strain, sp: &Species, r: &ScalarField) -> f64 {
    let g = *r.grid();
    let mut s = grid::face_integral(&g, |a, k| {
        st.diag_face.comps[a][k] * sp.rf.comps[a][k] * sp.w.comps[a][k] * sp.w.comps[a][k]
    });
    if g.dim() == 2 {
        let gx = sp.w.cell_component(0);
        let gy = sp.w.cell_component(1);
        let dv = g.cell_volume();
        for c in 0..g.cell_count() {
            s += st.shear.values[c] * r.values[c] * gx.values[c] * gy.values[c] * dv;
        }
    }
    s
}

/// Sup-norms and ranges collected along a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunNorms {
    /// `max |∂_a ū_a| + max |∂_x ū_y + ∂_y ū_x|`, same for `v̄`.
    pub grad_u_bar: f64,
    pub grad_v_bar: f64,
    pub div_u_bar: f64,
    pub div_v_bar: f64,
    pub u_bar: f64,
    pub v_bar: f64,
    pub e_bar1: f64,
    pub e_bar2: f64,
    /// Smallest face/cell value of `ρ̄`, `n̄`.
    pub delta: [f64; 2],
    /// Largest cell value of `ρ̄`, `n̄`.
    pub m_cap: [f64; 2],
    /// Largest hydro density per species.
    pub hydro_max: [f64; 2],
}

impl RunNorms {
    fn empty() -> Self {
        Self {
            grad_u_bar: 0.0,
            grad_v_bar: 0.0,
            div_u_bar: 0.0,
            div_v_bar: 0.0,
            u_bar: 0.0,
            v_bar: 0.0,
            e_bar1: 0.0,
            e_bar2: 0.0,
            delta: [f64::INFINITY; 2],
            m_cap: [0.0; 2],
            hydro_max: [0.0; 2],
        }
    }
}

/// The four terms of the inequality with the dissipation and the slack.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JTerms {
    pub t: f64,
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
    pub j4: f64,
    pub dissipation: f64,
    /// `Ψ(t) − Ψ(0) + dissipation − (J₁+J₂+J₃+J₄)`.
    pub slack: f64,
}

/// Streaming trapezoidal integration of the J terms, `Ψ` and the run norms.
#[derive(Debug, Clone)]
pub struct JAccumulator {
    law1: GasLaw,
    law2: GasLaw,
    eps: f64,
    dim: usize,
    mass: f64,
    psi0: PsiBreakdown,
    last_t: f64,
    last_rates: JRates,
    last_psi: PsiBreakdown,
    integral: JRates,
    /// `∫₀ᵗ Ψ`.
    psi_integral: f64,
    /// `∫₀ᵗ ∫ ερ|u−ū|² + εn|v−v̄|²`.
    kinetic_integral: f64,
    norms: RunNorms,
}

impl JAccumulator {
    /// Starts the integrals at the common initial time of both states.
    pub fn new(h: &BipolarHydroState, e: &EquilibriumState, law1: &GasLaw, law2: &GasLaw) -> Result<Self> {
        check_aligned(h, e)?;
        let mut acc = Self {
            law1: *law1,
            law2: *law2,
            eps: h.eps,
            dim: h.grid().dim(),
            mass: 0.5 * (grid::integrate(&h.rho) + grid::integrate(&h.n)),
            psi0: PsiBreakdown::default(),
            last_t: h.t,
            last_rates: JRates::default(),
            last_psi: PsiBreakdown::default(),
            integral: JRates::default(),
            psi_integral: 0.0,
            kinetic_integral: 0.0,
            norms: RunNorms::empty(),
        };
        let (rates, psi) = acc.observe(h, e)?;
        acc.psi0 = psi;
        acc.last_rates = rates;
        acc.last_psi = psi;
        Ok(acc)
    }

    /// Adds the next time level; `h.t` must not precede the previous one.
    pub fn push(&mut self, h: &BipolarHydroState, e: &EquilibriumState) -> Result<PsiBreakdown> {
        check_aligned(h, e)?;
        let dt = h.t - self.last_t;
        if dt < 0.0 {
            return Err(Error::domain("time levels must be pushed in order"));
        }
        let (rates, psi) = self.observe(h, e)?;
        let half = 0.5 * dt;
        self.integral.axpy(half, &self.last_rates);
        self.integral.axpy(half, &rates);
        self.psi_integral += half * (self.last_psi.total + psi.total);
        self.kinetic_integral +=
            half * 2.0 * (self.last_psi.kin_rho + self.last_psi.kin_n + psi.kin_rho + psi.kin_n);
        self.last_t = h.t;
        self.last_rates = rates;
        self.last_psi = psi;
        Ok(psi)
    }

    fn observe(&mut self, h: &BipolarHydroState, e: &EquilibriumState) -> Result<(JRates, PsiBreakdown)> {
        let s1 = Species::new(&h.mom_rho, &h.rho, &e.u_bar);
        let s2 = Species::new(&h.mom_n, &h.n, &e.v_bar);
        let psi = psi_from(h, e, &s1, &s2, &self.law1, &self.law2);
        let st1 = strain(&e.u_bar);
        let st2 = strain(&e.v_bar);
        let g = *h.grid();
        let eps = h.eps;

        let j1 = -eps * (strain_work(&st1, &s1, &h.rho) + strain_work(&st2, &s2, &h.n));
        let pressure_work = |div: &ScalarField, r: &ScalarField, rbar: &ScalarField, law: &GasLaw| {
            let dv = g.cell_volume();
            (0..g.cell_count())
                .map(|c| div.values[c] * law.p_rel(r.values[c].max(0.0), rbar.values[c]) * dv)
                .sum::<f64>()
        };
        let j2 = -(pressure_work(&st1.div, &h.rho, &e.rho_bar, &self.law1)
            + pressure_work(&st2.div, &h.n, &e.n_bar, &self.law2));

        let rbf = grid::face_mean(&e.rho_bar);
        let nbf = grid::face_mean(&e.n_bar);
        let j3 = grid::face_integral(&g, |a, k| {
            let dphi = h.grad_phi.comps[a][k] - e.grad_phi_bar.comps[a][k];
            ((s1.rf.comps[a][k] - rbf.comps[a][k]) * e.u_bar.comps[a][k]
                - (s2.rf.comps[a][k] - nbf.comps[a][k]) * e.v_bar.comps[a][k])
                * dphi
        });
        let j4 = -eps
            * grid::face_integral(&g, |a, k| {
                s1.rf.comps[a][k] / rbf.comps[a][k] * e.e_bar1.comps[a][k] * s1.w.comps[a][k]
                    + s2.rf.comps[a][k] / nbf.comps[a][k] * e.e_bar2.comps[a][k] * s2.w.comps[a][k]
            });
        let rates = JRates {
            j1,
            j2,
            j3,
            j4,
            dissipation: s1.kinetic() + s2.kinetic(),
        };

        let n = &mut self.norms;
        n.grad_u_bar = n.grad_u_bar.max(st1.max_diag + st1.max_shear);
        n.grad_v_bar = n.grad_v_bar.max(st2.max_diag + st2.max_shear);
        n.div_u_bar = n.div_u_bar.max(st1.div.max_abs());
        n.div_v_bar = n.div_v_bar.max(st2.div.max_abs());
        n.u_bar = n.u_bar.max(e.u_bar.max_abs());
        n.v_bar = n.v_bar.max(e.v_bar.max_abs());
        n.e_bar1 = n.e_bar1.max(e.e_bar1.max_abs());
        n.e_bar2 = n.e_bar2.max(e.e_bar2.max_abs());
        n.delta[0] = n.delta[0].min(e.rho_bar.min());
        n.delta[1] = n.delta[1].min(e.n_bar.min());
        n.m_cap[0] = n.m_cap[0].max(e.rho_bar.max());
        n.m_cap[1] = n.m_cap[1].max(e.n_bar.max());
        n.hydro_max[0] = n.hydro_max[0].max(h.rho.max());
        n.hydro_max[1] = n.hydro_max[1].max(h.n.max());
        Ok((rates, psi))
    }

    pub fn terms(&self) -> JTerms {
        let i = &self.integral;
        JTerms {
            t: self.last_t,
            j1: i.j1,
            j2: i.j2,
            j3: i.j3,
            j4: i.j4,
            dissipation: i.dissipation,
            slack: self.last_psi.total - self.psi0.total + i.dissipation - (i.j1 + i.j2 + i.j3 + i.j4),
        }
    }

    pub fn psi0(&self) -> PsiBreakdown {
        self.psi0
    }

    pub fn psi(&self) -> PsiBreakdown {
        self.last_psi
    }

    /// `∫₀ᵗ Ψ`.
    pub fn psi_integral(&self) -> f64 {
        self.psi_integral
    }

    /// `∫₀ᵗ∫ ερ|u−ū|² + εn|v−v̄|²`.
    pub fn kinetic_integral(&self) -> f64 {
        self.kinetic_integral
    }

    pub fn norms(&self) -> RunNorms {
        self.norms
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn time(&self) -> f64 {
        self.last_t
    }
}

/// J terms over aligned histories up to time `t`.
pub fn compute_j_terms(
    hydro: &[BipolarHydroState],
    eq: &[EquilibriumState],
    law1: &GasLaw,
    law2: &GasLaw,
    t: f64,
) -> Result<JTerms> {
    if hydro.len() != eq.len() || hydro.is_empty() {
        return Err(Error::domain("histories must be non-empty and of equal length"));
    }
    let mut acc = JAccumulator::new(&hydro[0], &eq[0], law1, law2)?;
    for (h, e) in hydro.iter().zip(eq).skip(1) {
        if h.t > t + TIME_MATCH_TOL * (1.0 + t.abs()) {
            break;
        }
        acc.push(h, e)?;
    }
    if (acc.time() - t).abs() > TIME_MATCH_TOL * (1.0 + t.abs()) {
        return Err(Error::domain("no checkpoint at the requested time"));
    }
    Ok(acc.terms())
}

/// Which inequality term a bound concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    J1,
    J2,
    J3,
    J4,
}

impl Lemma {
    pub const ALL: [Lemma; 4] = [Lemma::J1, Lemma::J2, Lemma::J3, Lemma::J4];

    pub fn name(self) -> &'static str {
        match self {
            Lemma::J1 => "J1",
            Lemma::J2 => "J2",
            Lemma::J3 => "J3",
            Lemma::J4 => "J4",
        }
    }
}

/// Measured term against its explicit bound.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub lemma: Lemma,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub pass: bool,
    pub note: String,
}

/// Grid resolution of the lower-bound constant search behind the J₃ bound.
pub const LOWER_BOUND_GRID: usize = 200;

/// Checks one lemma bound against the accumulated run data.
///
/// * J₁: `C ∫∫ ε(ρ|u−ū|² + n|v−v̄|²)`, `C = ‖∇ū‖ + ‖∇v̄‖`.
/// * J₂: `C ∫Ψ`, `C = (‖∇·ū‖ + ‖∇·v̄‖)(k̂₁ + k̂₂)`.
/// * J₃: `C ∫Ψ`, `C = (‖ū‖ + ‖v̄‖) max(1/(2c₁), 1/(2c₂), 2)` with `cᵢ` the
///   certified lower-bound constants of `hᵢ(r|r̄)` (requires `γᵢ ≥ 2`).
/// * J₄: `½ dissipation + C ε² t`, `C = (d/2) M (‖ē₁‖²/δ₁² + ‖ē₂‖²/δ₂²)`.
pub fn lemma_check(acc: &JAccumulator, lemma: Lemma, tol: f64) -> Result<LemmaCheck> {
    let n = acc.norms();
    let j = acc.terms();
    let (lhs, constant, rhs, note) = match lemma {
        Lemma::J1 => {
            let c = n.grad_u_bar + n.grad_v_bar;
            (j.j1, c, c * acc.kinetic_integral(), String::from("C = |grad u_bar| + |grad v_bar|"))
        }
        Lemma::J2 => {
            let c = (n.div_u_bar + n.div_v_bar) * (acc.law1.khat + acc.law2.khat);
            (j.j2, c, c * acc.psi_integral(), String::from("C = (|div u_bar| + |div v_bar|)(khat1 + khat2)"))
        }
        Lemma::J3 => {
            for law in [&acc.law1, &acc.law2] {
                if law.gamma < 2.0 {
                    return Err(Error::UnsupportedBranch(alloc::format!(
                        "J3 bound is certified for gamma >= 2 only (gamma = {})",
                        law.gamma
                    )));
                }
            }
            let c_of = |law: &GasLaw, s: usize| -> Result<f64> {
                let (delta, m_cap) = (n.delta[s], n.m_cap[s]);
                let r_max = 2.0 * n.hydro_max[s].max(m_cap + 1.0);
                Ok(law.lower_bound_constants(delta, m_cap, r_max, LOWER_BOUND_GRID)?.quadratic())
            };
            let c1 = c_of(&acc.law1, 0)?;
            let c2 = c_of(&acc.law2, 1)?;
            let c = (n.u_bar + n.v_bar) * (0.5 / c1).max(0.5 / c2).max(2.0);
            (j.j3, c, c * acc.psi_integral(), alloc::format!("c1 = {c1:e}, c2 = {c2:e}"))
        }
        Lemma::J4 => {
            let d = acc.dim as f64;
            let c = 0.5 * d * acc.mass
                * (n.e_bar1 * n.e_bar1 / (n.delta[0] * n.delta[0])
                    + n.e_bar2 * n.e_bar2 / (n.delta[1] * n.delta[1]));
            let rhs = 0.5 * j.dissipation + c * acc.eps() * acc.eps() * j.t;
            (j.j4, c, rhs, String::from("rhs = dissipation/2 + C eps^2 t"))
        }
    };
    Ok(LemmaCheck {
        lemma,
        lhs,
        rhs,
        constant,
        pass: lhs <= rhs + tol,
        note,
    })
}

/// All four lemma checks; fails with an unsupported-branch error when the
/// J₃ bound is not certified for the laws in use.
pub fn lemma_bounds_report(acc: &JAccumulator, tol: f64) -> Result<Vec<LemmaCheck>> {
    Lemma::ALL.iter().map(|&l| lemma_check(acc, l, tol)).collect()
}

/// Log-log fit of `Ψ(t)` against `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GronwallFit {
    /// Least-squares slope of `ln Ψ(t)` against `ln ε`.
    pub slope: f64,
    pub intercept: f64,
    /// Smallest `C ≥ 0` with `Ψ(t) ≤ e^{Ct}(Ψ(0) + C ε² t)` at every point.
    pub c_estimate: f64,
    /// The slope over the smallest-ε pair fell below 3/4 of the one over the
    /// largest-ε pair: a numerical floor is flattening the curve.
    pub floor_limited: bool,
    /// Every `Ψ(0)` was at round-off level, so the ε² prediction applies.
    pub applicable: bool,
}

/// `Ψ(0) ≤ WELL_PREPARED_TOL · scale` counts as well prepared.
pub const WELL_PREPARED_TOL: f64 = 1e-12;

/// Fits the ε-rate of `Ψ(t)`; `scale` (e.g. the initial energy) sets the
/// well-prepared threshold.
pub fn gronwall_fit(eps: &[f64], psi_t: &[f64], psi0: &[f64], t: f64, scale: f64) -> Result<GronwallFit> {
    let n = eps.len();
    if n < 3 {
        return Err(Error::domain("rate fit needs at least three eps values"));
    }
    if psi_t.len() != n || psi0.len() != n {
        return Err(Error::domain("eps and psi series differ in length"));
    }
    if eps.iter().chain(psi_t).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Fit(String::from("eps and psi(t) must be positive and finite")));
    }
    if !(t > 0.0) {
        return Err(Error::domain("fit time must be positive"));
    }
    let xs: Vec<f64> = eps.iter().map(|e| libm::log(*e)).collect();
    let ys: Vec<f64> = psi_t.iter().map(|p| libm::log(*p)).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit(String::from("eps values must not all coincide")));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;

    // order by eps to compare the ends of the curve
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eps[a].partial_cmp(&eps[b]).unwrap_or(core::cmp::Ordering::Equal));
    let pair = |a: usize, b: usize| (ys[b] - ys[a]) / (xs[b] - xs[a]);
    let small = pair(idx[0], idx[1]);
    let large = pair(idx[n - 2], idx[n - 1]);
    let applicable = psi0.iter().all(|p| *p <= WELL_PREPARED_TOL * scale);

    Ok(GronwallFit {
        slope,
        intercept,
        c_estimate: gronwall_constant(eps, psi_t, psi0, t)?,
        floor_limited: applicable && small < 0.75 * large,
        applicable,
    })
}

/// Smallest `C ≥ 0` with `Ψ(t) ≤ e^{Ct}(Ψ(0) + C ε² t)` for every point.
pub fn gronwall_constant(eps: &[f64], psi_t: &[f64], psi0: &[f64], t: f64) -> Result<f64> {
    let ok = |c: f64| {
        eps.iter()
            .zip(psi_t)
            .zip(psi0)
            .all(|((e, p), p0)| *p <= libm::exp(c * t) * (p0.max(0.0) + c * e * e * t))
    };
    if ok(0.0) {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while !ok(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Fit(String::from("no Gronwall constant below 1e12")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Largest `|∫ρ − M|/M` style drift between two masses.
pub fn relative_drift(m: f64, m0: f64) -> f64 {
    if m0 == 0.0 {
        m.abs()
    } else {
        ((m - m0) / m0).abs()
    }
}
