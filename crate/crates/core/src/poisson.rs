//! Neumann problem `-Δφ = f`, `∂φ/∂ν = 0`, pinned by `mean(φ) = 0`.
//!
//! The discrete operator is `-divergence(gradient(·, NeumannZero))`, which is
//! symmetric positive semidefinite with the constants as its kernel. Its
//! mean-zero pseudo-inverse is the discrete Neumann function.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{self, BoundaryClosure, Grid, ScalarField, VectorField};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Relative size of `∫f` (against `‖f‖₁`) accepted as round-off.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSolution {
    pub phi: ScalarField,
    pub grad_phi: VectorField,
    /// `max |−Δ_h φ − f|` after mean projection of `f`.
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Which algorithm backs a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldSolver {
    /// Matrix-free conjugate gradients in every dimension.
    ConjugateGradient,
    /// Exact line integration in 1D, conjugate gradients in 2D.
    #[default]
    Auto,
}

/// `-Δ_h φ` with zero-flux walls.
pub fn neg_laplacian(phi: &ScalarField) -> ScalarField {
    grid::divergence(&grid::gradient(phi, BoundaryClosure::NeumannZero)).map(|v| -v)
}

fn l1(f: &ScalarField) -> f64 {
    f.values.iter().map(|v| v.abs()).sum::<f64>() * f.grid().cell_volume()
}

/// Removes the mean of `f` after checking it is round-off sized.
pub fn project_compatible(f: &ScalarField, scale: f64) -> Result<ScalarField> {
    let total = grid::integrate(f);
    if total.abs() > COMPATIBILITY_TOL * scale {
        return Err(Error::Compatibility {
            mean: total / f.grid().volume(),
        });
    }
    let mean = total / f.grid().volume();
    Ok(f.map(|v| v - mean))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

/// Conjugate-gradient solve of `-Δ_h φ = f`.
pub fn solve_neumann(f: &ScalarField, tol: f64) -> Result<PoissonSolution> {
    solve_neumann_with(f, tol, None, None)
}

/// [`solve_neumann`] with an iteration cap (default `10 · cells`) and an
/// optional warm start.
pub fn solve_neumann_with(
    f: &ScalarField,
    tol: f64,
    max_iter: Option<usize>,
    guess: Option<&ScalarField>,
) -> Result<PoissonSolution> {
    let b = project_compatible(f, l1(f))?;
    cg(&b, tol, max_iter, guess)
}

fn cg(
    b: &ScalarField,
    tol: f64,
    max_iter: Option<usize>,
    guess: Option<&ScalarField>,
) -> Result<PoissonSolution> {
    let g = *b.grid();
    let n = g.cell_count();
    let max_iter = max_iter.unwrap_or(10 * n);
    let mut x = match guess {
        Some(s) => s.clone(),
        None => ScalarField::zeros(&g),
    };
    remove_mean(&mut x.values);

    let residual = |x: &ScalarField| -> Vec<f64> {
        let ax = neg_laplacian(x);
        let mut r: Vec<f64> = b.values.iter().zip(&ax.values).map(|(b, a)| b - a).collect();
        remove_mean(&mut r);
        r
    };

    let mut iterations = 0;
    let mut r = residual(&x);
    loop {
        if max_abs(&r) <= tol {
            break;
        }
        // one CG cycle from the current true residual
        let before = iterations;
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        while iterations < max_iter {
            let pf = ScalarField::from_values(&g, p.clone())?;
            let ap = neg_laplacian(&pf).values;
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rr / pap;
            for i in 0..n {
                x.values[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iterations += 1;
            if max_abs(&r) <= 0.5 * tol {
                break;
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
        }
        let recursive = max_abs(&r);
        r = residual(&x);
        let true_res = max_abs(&r);
        if true_res <= tol {
            break;
        }
        // out of budget, no progress, or a round-off floor far above tol
        let floor_hit = recursive <= 0.5 * tol && true_res > 1e3 * tol;
        if iterations >= max_iter || iterations == before || floor_hit {
            return Err(Error::Solver {
                residual: true_res,
                iterations,
            });
        }
    }
    remove_mean(&mut x.values);
    finish(x, b, iterations)
}

fn finish(phi: ScalarField, b: &ScalarField, iterations: usize) -> Result<PoissonSolution> {
    let grad_phi = grid::gradient(&phi, BoundaryClosure::NeumannZero);
    let mut res = grid::divergence(&grad_phi);
    for (r, bv) in res.values.iter_mut().zip(&b.values) {
        *r = -*r - bv;
    }
    Ok(PoissonSolution {
        phi,
        grad_phi,
        residual_norm: res.max_abs(),
        iterations,
    })
}

/// Exact 1D solve by integrating the flux from the left wall.
pub fn solve_neumann_line(f: &ScalarField) -> Result<PoissonSolution> {
    let b = project_compatible(f, l1(f))?;
    line(&b)
}

fn line(b: &ScalarField) -> Result<PoissonSolution> {
    let g = *b.grid();
    if g.dim() != 1 {
        return Err(Error::domain("line solver is one-dimensional"));
    }
    let n = g.n(0);
    let dx = g.dx(0);
    let mut phi = ScalarField::zeros(&g);
    // grad at face k is -dx Σ_{c<k} b_c; φ_k = φ_{k-1} + dx grad_k
    let mut flux = 0.0;
    for k in 1..n {
        flux -= dx * b.values[k - 1];
        phi.values[k] = phi.values[k - 1] + dx * flux;
    }
    remove_mean(&mut phi.values);
    finish(phi, b, 0)
}

/// Solves `-Δφ = f` with the algorithm chosen by `solver`; `scale` sets the
/// compatibility threshold (typically the species mass).
pub fn solve_field(
    f: &ScalarField,
    solver: FieldSolver,
    tol: f64,
    scale: f64,
    guess: Option<&ScalarField>,
) -> Result<PoissonSolution> {
    let b = project_compatible(f, scale.max(l1(f)))?;
    match (solver, b.grid().dim()) {
        (FieldSolver::Auto, 1) => line(&b),
        _ => cg(&b, tol, None, guess),
    }
}

/// `|∫∇φ·∇ψ − ∫fψ|` for `φ = N_h f`, `ψ = N_h g`.
pub fn duality_residual(f: &ScalarField, g: &ScalarField, tol: f64) -> Result<f64> {
    let sf = solve_neumann(f, tol)?;
    let sg = solve_neumann(g, tol)?;
    let fp = project_compatible(f, l1(f))?;
    let lhs = grid::face_dot(&sf.grad_phi, &sg.grad_phi);
    let rhs = grid::integrate(&fp.zip_map(&sg.phi, |a, b| a * b));
    Ok((lhs - rhs).abs())
}

/// Column `j` of the discrete Neumann function: the mean-zero solution of
/// `-Δ_h φ = (1_j − |cell|/|Ω|) / |cell|`.
pub fn neumann_column(grid: &Grid, j: usize, tol: f64) -> Result<ScalarField> {
    if j >= grid.cell_count() {
        return Err(Error::domain("cell index out of range"));
    }
    let dv = grid.cell_volume();
    let uniform = 1.0 / grid.volume();
    let mut f = ScalarField::constant(grid, -uniform);
    f.values[j] += 1.0 / dv;
    Ok(solve_neumann(&f, tol)?.phi)
}

/// `|N_h(i, j) − N_h(j, i)|`.
pub fn green_symmetry_defect(grid: &Grid, i: usize, j: usize, tol: f64) -> Result<f64> {
    if i == j {
        return Err(Error::domain("symmetry defect needs distinct cells"));
    }
    let col_j = neumann_column(grid, j, tol)?;
    let col_i = neumann_column(grid, i, tol)?;
    Ok((col_j.values[i] - col_i.values[j]).abs())
}
