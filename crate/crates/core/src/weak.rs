//! Residuals of the weak formulation of the hydro system.
//!
//! For scalar tests `θ(t)c(x)` and vector tests `θ(t)ψ(x)` with `ψ·ν = 0`,
//!
//! ```text
//! R₁ = −∫∫θ′cρ − ∫∫θ∇c·ρu − θ(0)∫cρ₀
//! R₂ = −ε∫∫θ′ψ·ρu − ε∫∫θ∇ψ:ρu⊗u − ∫∫θ(∇·ψ)p₁(ρ) − εθ(0)∫ψ·ρ₀u₀
//!      + ∫∫θψ·ρ∇φ + ∫∫θψ·ρu
//! ```
//!
//! and likewise `R₃`, `R₄` for `n` with the field force reversed. Exact weak
//! solutions give zero; the discrete values measure consistency. The time
//! weight is `θ(t) = (1 − t/T)²` on `[0, T]`.

use alloc::vec::Vec;

use crate::eos::{BarotropicLaw, GasLaw};
use crate::error::{Error, Result};
use crate::euler_poisson::{BipolarHydroState, DENSITY_FLOOR};
use crate::grid::{self, Grid};
use crate::transport::face_velocity;

/// A spatial test pair: a scalar `c` and a vector `ψ` with zero normal trace.
pub trait WeakTest {
    /// `(c(x), ∇c(x))`.
    fn scalar(&self, x: [f64; 2]) -> (f64, [f64; 2]);
    /// `(ψ(x), J)` with `J[a][b] = ∂_b ψ_a`.
    fn vector(&self, x: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]);
}

/// `c = Π_a cos(k_a π x_a / L_a)`, `ψ_a = sin(k_a π x_a / L_a) Π_{b≠a} cos(k_b π x_b / L_b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineMode {
    pub k: [usize; 2],
    pub lengths: [f64; 2],
    pub dim: usize,
}

impl CosineMode {
    pub fn new(grid: &Grid, k: [usize; 2]) -> Self {
        Self {
            k,
            lengths: [grid.length(0), if grid.dim() == 2 { grid.length(1) } else { 1.0 }],
            dim: grid.dim(),
        }
    }

    fn wave(&self, a: usize) -> f64 {
        core::f64::consts::PI * self.k[a] as f64 / self.lengths[a]
    }

    /// `(cos, sin)` of axis `a` at `x`, with the 1D second axis frozen at 1.
    fn trig(&self, a: usize, x: [f64; 2]) -> (f64, f64) {
        if a >= self.dim {
            return (1.0, 0.0);
        }
        let arg = self.wave(a) * x[a];
        (libm::cos(arg), libm::sin(arg))
    }
}

impl WeakTest for CosineMode {
    fn scalar(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        let (c0, s0) = self.trig(0, x);
        let (c1, s1) = self.trig(1, x);
        let grad = [
            -self.wave(0) * s0 * c1,
            if self.dim == 2 { -self.wave(1) * c0 * s1 } else { 0.0 },
        ];
        (c0 * c1, grad)
    }

    fn vector(&self, x: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        let (c0, s0) = self.trig(0, x);
        let (c1, s1) = self.trig(1, x);
        let (w0, w1) = (self.wave(0), self.wave(1));
        if self.dim == 1 {
            return ([s0, 0.0], [[w0 * c0, 0.0], [0.0, 0.0]]);
        }
        (
            [s0 * c1, c0 * s1],
            [[w0 * c0 * c1, -w1 * s0 * s1], [-w0 * s0 * s1, w1 * c0 * c1]],
        )
    }
}

/// `θ(t) = (1 − t/T)²` for `t < T`, zero afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWeight {
    pub horizon: f64,
}

impl TimeWeight {
    pub fn theta(&self, t: f64) -> f64 {
        let s = 1.0 - t / self.horizon;
        if s > 0.0 { s * s } else { 0.0 }
    }

    pub fn dtheta(&self, t: f64) -> f64 {
        let s = 1.0 - t / self.horizon;
        if s > 0.0 { -2.0 * s / self.horizon } else { 0.0 }
    }
}

/// Test-function samples at cell centres and faces.
#[derive(Debug, Clone)]
struct Samples {
    c_cell: Vec<f64>,
    div_cell: Vec<f64>,
    jac_cell: Vec<[[f64; 2]; 2]>,
    /// `∂_a c` and `ψ_a` on faces normal to `a`.
    grad_face: [Vec<f64>; 2],
    psi_face: [Vec<f64>; 2],
}

fn sample<T: WeakTest>(g: &Grid, test: &T) -> Result<Samples> {
    let mut s = Samples {
        c_cell: Vec::with_capacity(g.cell_count()),
        div_cell: Vec::with_capacity(g.cell_count()),
        jac_cell: Vec::with_capacity(g.cell_count()),
        grad_face: [Vec::new(), Vec::new()],
        psi_face: [Vec::new(), Vec::new()],
    };
    for c in 0..g.cell_count() {
        let x = g.cell_center(c);
        s.c_cell.push(test.scalar(x).0);
        let (_, j) = test.vector(x);
        s.div_cell.push(j[0][0] + j[1][1]);
        s.jac_cell.push(j);
    }
    let scale = (0..g.cell_count())
        .map(|c| test.vector(g.cell_center(c)).0)
        .fold(1.0f64, |m, v| m.max(v[0].abs()).max(v[1].abs()));
    for a in 0..g.dim() {
        for k in 0..g.face_count(a) {
            let x = g.face_center(a, k);
            let psi = test.vector(x).0[a];
            if g.is_boundary_face(a, k) && psi.abs() > 1e-12 * scale {
                return Err(Error::domain(alloc::format!(
                    "vector test function has normal trace {psi:e} on a wall"
                )));
            }
            s.grad_face[a].push(test.scalar(x).1[a]);
            s.psi_face[a].push(psi);
        }
    }
    Ok(s)
}

/// `(∫cρ, ∫∇c·m)` and `(∫ψ·m, ∫∇ψ:ρu⊗u, ∫(∇·ψ)p, ∫ψ·ρ∇φ)` per species.
#[derive(Debug, Clone, Copy, Default)]
struct Integrals {
    mass: [f64; 2],
    flux: [f64; 2],
    mom: [f64; 2],
    conv: [f64; 2],
    press: [f64; 2],
    field: [f64; 2],
}

fn integrals(s: &Samples, h: &BipolarHydroState, law1: &GasLaw, law2: &GasLaw) -> Integrals {
    let g = *h.grid();
    let dv = g.cell_volume();
    let mut out = Integrals::default();
    let species = [(&h.rho, &h.mom_rho, law1), (&h.n, &h.mom_n, law2)];
    for (sp, (r, m, law)) in species.into_iter().enumerate() {
        let rf = grid::face_mean(r);
        let u = face_velocity(m, &rf, DENSITY_FLOOR);
        let mut mass = 0.0;
        let mut conv = 0.0;
        let mut press = 0.0;
        // cell-centred momentum flux: normal parts average the face products
        let mc = [m.cell_component(0), m.cell_component(1)];
        let uc = [u.cell_component(0), u.cell_component(1)];
        let mu = m.zip_map(&u, |a, b| a * b);
        let muc = [mu.cell_component(0), mu.cell_component(1)];
        for c in 0..g.cell_count() {
            mass += s.c_cell[c] * r.values[c];
            press += s.div_cell[c] * law.p(r.values[c].max(0.0));
            let j = &s.jac_cell[c];
            let mut t = j[0][0] * muc[0].values[c];
            if g.dim() == 2 {
                t += j[1][1] * muc[1].values[c]
                    + j[0][1] * mc[0].values[c] * uc[1].values[c]
                    + j[1][0] * mc[1].values[c] * uc[0].values[c];
            }
            conv += t;
        }
        out.mass[sp] = mass * dv;
        out.conv[sp] = conv * dv;
        out.press[sp] = press * dv;
        out.flux[sp] = grid::face_integral(&g, |a, k| s.grad_face[a][k] * m.comps[a][k]);
        out.mom[sp] = grid::face_integral(&g, |a, k| s.psi_face[a][k] * m.comps[a][k]);
        out.field[sp] =
            grid::face_integral(&g, |a, k| s.psi_face[a][k] * rf.comps[a][k] * h.grad_phi.comps[a][k]);
    }
    out
}

/// Time integrands of the four residuals at one level: the parts multiplying
/// `θ′` and `θ`.
fn integrands(i: &Integrals, eps: f64) -> ([f64; 4], [f64; 4]) {
    let with_dtheta = [-i.mass[0], -eps * i.mom[0], -i.mass[1], -eps * i.mom[1]];
    let with_theta = [
        -i.flux[0],
        -eps * i.conv[0] - i.press[0] + i.field[0] + i.mom[0],
        -i.flux[1],
        -eps * i.conv[1] - i.press[1] - i.field[1] + i.mom[1],
    ];
    (with_dtheta, with_theta)
}

/// Streaming trapezoidal evaluation of the four residuals for a bank of tests.
#[derive(Debug, Clone)]
pub struct WeakAccumulator {
    weight: TimeWeight,
    law1: GasLaw,
    law2: GasLaw,
    eps: f64,
    samples: Vec<Samples>,
    sums: Vec<[f64; 4]>,
    last_t: f64,
    last: Vec<[f64; 4]>,
}

impl WeakAccumulator {
    /// Samples the tests and records the initial-data terms.
    pub fn new<T: WeakTest>(
        tests: &[T],
        horizon: f64,
        h0: &BipolarHydroState,
        law1: &GasLaw,
        law2: &GasLaw,
    ) -> Result<Self> {
        if !(horizon > h0.t) {
            return Err(Error::domain("test horizon must lie after the initial time"));
        }
        let weight = TimeWeight { horizon };
        let samples = tests
            .iter()
            .map(|t| sample(h0.grid(), t))
            .collect::<Result<Vec<_>>>()?;
        let mut acc = Self {
            weight,
            law1: *law1,
            law2: *law2,
            eps: h0.eps,
            samples,
            sums: Vec::new(),
            last_t: h0.t,
            last: Vec::new(),
        };
        let theta0 = weight.theta(h0.t);
        for k in 0..acc.samples.len() {
            let i = integrals(&acc.samples[k], h0, law1, law2);
            let eps = acc.eps;
            acc.sums.push([
                -theta0 * i.mass[0],
                -eps * theta0 * i.mom[0],
                -theta0 * i.mass[1],
                -eps * theta0 * i.mom[1],
            ]);
            acc.last.push(acc.level(&i, h0.t));
        }
        Ok(acc)
    }

    fn level(&self, i: &Integrals, t: f64) -> [f64; 4] {
        let (a, b) = integrands(i, self.eps);
        let (dth, th) = (self.weight.dtheta(t), self.weight.theta(t));
        [0, 1, 2, 3].map(|q| dth * a[q] + th * b[q])
    }

    /// Adds the next time level.
    pub fn push(&mut self, h: &BipolarHydroState) -> Result<()> {
        let dt = h.t - self.last_t;
        if dt < 0.0 {
            return Err(Error::domain("time levels must be pushed in order"));
        }
        for k in 0..self.samples.len() {
            let i = integrals(&self.samples[k], h, &self.law1, &self.law2);
            let cur = self.level(&i, h.t);
            for q in 0..4 {
                self.sums[k][q] += 0.5 * dt * (self.last[k][q] + cur[q]);
            }
            self.last[k] = cur;
        }
        self.last_t = h.t;
        Ok(())
    }

    /// Max over tests of `|R_q|`, `q = 1..4`.
    pub fn residuals(&self) -> [f64; 4] {
        let mut out = [0.0f64; 4];
        for s in &self.sums {
            for q in 0..4 {
                out[q] = out[q].max(s[q].abs());
            }
        }
        out
    }

    /// Whether the time horizon has been covered.
    pub fn complete(&self) -> bool {
        self.last_t >= self.weight.horizon
    }
}

/// Residuals over a recorded history that must reach the horizon `T`
/// (the last state's time).
pub fn weak_residual<T: WeakTest>(
    history: &[BipolarHydroState],
    law1: &GasLaw,
    law2: &GasLaw,
    tests: &[T],
) -> Result<[f64; 4]> {
    if history.len() < 2 {
        return Err(Error::domain("weak residual needs at least two states"));
    }
    let horizon = history[history.len() - 1].t;
    let mut acc = WeakAccumulator::new(tests, horizon, &history[0], law1, law2)?;
    for h in &history[1..] {
        acc.push(h)?;
    }
    Ok(acc.residuals())
}

/// The default bank: the first three modes along each axis.
pub fn default_bank(grid: &Grid) -> Vec<CosineMode> {
    let mut bank = Vec::new();
    for k in 1..=3 {
        bank.push(CosineMode::new(grid, [k, if grid.dim() == 2 { 1 } else { 0 }]));
        if grid.dim() == 2 {
            bank.push(CosineMode::new(grid, [1, k]));
        }
    }
    bank
}
