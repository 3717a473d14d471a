//! Uniform box meshes in one or two dimensions and the discrete calculus on them.
//!
//! Scalars live at cell centres, vectors are stored as face-normal components
//! (a MAC layout): axis-0 faces carry the x component, axis-1 faces the y
//! component. With this layout `divergence ∘ gradient` is the standard
//! 3/5-point Laplacian and the two operators are exact negative adjoints of
//! each other whenever the boundary faces of the vector field vanish.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Minimum number of cells along every axis.
pub const MIN_CELLS: usize = 4;

/// Tensor-product mesh of `Ω = [0, L₀] (× [0, L₁])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    lengths: [f64; 2],
    n: [usize; 2],
    dx: [f64; 2],
}

impl Grid {
    pub fn new(dim: usize, lengths: &[f64], n_cells: &[usize]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::config("grid dimension must be 1 or 2"));
        }
        if lengths.len() != dim || n_cells.len() != dim {
            return Err(Error::config("lengths and n_cells must have one entry per axis"));
        }
        let mut g = Grid {
            dim,
            lengths: [1.0; 2],
            n: [1; 2],
            dx: [1.0; 2],
        };
        for a in 0..dim {
            if !(lengths[a] > 0.0 && lengths[a].is_finite()) {
                return Err(Error::config("domain lengths must be positive"));
            }
            if n_cells[a] < MIN_CELLS {
                return Err(Error::config("need at least 4 cells per axis"));
            }
            g.lengths[a] = lengths[a];
            g.n[a] = n_cells[a];
            g.dx[a] = lengths[a] / n_cells[a] as f64;
        }
        Ok(g)
    }

    /// `[0, length]` split into `n` cells.
    pub fn line(length: f64, n: usize) -> Result<Self> {
        Self::new(1, &[length], &[n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn dx(&self, axis: usize) -> f64 {
        self.dx[axis]
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.lengths[axis]
    }

    pub fn cell_count(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx[0] * self.dx[1]
    }

    /// `|Ω|`.
    pub fn volume(&self) -> f64 {
        self.lengths[0] * self.lengths[1]
    }

    /// `(Σ_a dx_a⁻²)^{-1/2}`; equals `dx` in 1D and `dx/√2` on square 2D cells.
    pub fn stability_length(&self) -> f64 {
        let s: f64 = (0..self.dim).map(|a| 1.0 / (self.dx[a] * self.dx[a])).sum();
        1.0 / libm::sqrt(s)
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * self.n[0] + i
    }

    #[inline]
    pub fn cell_coords(&self, c: usize) -> (usize, usize) {
        (c % self.n[0], c / self.n[0])
    }

    pub fn cell_center(&self, c: usize) -> [f64; 2] {
        let (i, j) = self.cell_coords(c);
        [
            (i as f64 + 0.5) * self.dx[0],
            if self.dim == 2 {
                (j as f64 + 0.5) * self.dx[1]
            } else {
                0.0
            },
        ]
    }

    /// Number of faces normal to `axis`.
    pub fn face_count(&self, axis: usize) -> usize {
        if axis >= self.dim {
            return 0;
        }
        match axis {
            0 => (self.n[0] + 1) * self.n[1],
            _ => self.n[0] * (self.n[1] + 1),
        }
    }

    /// Face normal to `axis` sitting on the low side of cell `(i, j)`;
    /// `i = n₀` (resp. `j = n₁`) addresses the high wall.
    #[inline]
    pub fn face(&self, axis: usize, i: usize, j: usize) -> usize {
        match axis {
            0 => j * (self.n[0] + 1) + i,
            _ => j * self.n[0] + i,
        }
    }

    #[inline]
    pub fn face_coords(&self, axis: usize, k: usize) -> (usize, usize) {
        match axis {
            0 => (k % (self.n[0] + 1), k / (self.n[0] + 1)),
            _ => (k % self.n[0], k / self.n[0]),
        }
    }

    pub fn face_center(&self, axis: usize, k: usize) -> [f64; 2] {
        let (i, j) = self.face_coords(axis, k);
        let y = |jj: f64| if self.dim == 2 { jj * self.dx[1] } else { 0.0 };
        match axis {
            0 => [i as f64 * self.dx[0], y(j as f64 + 0.5)],
            _ => [(i as f64 + 0.5) * self.dx[0], y(j as f64)],
        }
    }

    /// Cells on the low and high side of a face; `None` beyond a wall.
    #[inline]
    pub fn face_cells(&self, axis: usize, k: usize) -> (Option<usize>, Option<usize>) {
        let (i, j) = self.face_coords(axis, k);
        let (pos, n) = if axis == 0 { (i, self.n[0]) } else { (j, self.n[1]) };
        let lo = if pos > 0 {
            Some(if axis == 0 { self.cell(i - 1, j) } else { self.cell(i, j - 1) })
        } else {
            None
        };
        let hi = if pos < n { Some(self.cell(i, j)) } else { None };
        (lo, hi)
    }

    #[inline]
    pub fn is_boundary_face(&self, axis: usize, k: usize) -> bool {
        let (i, j) = self.face_coords(axis, k);
        if axis == 0 {
            i == 0 || i == self.n[0]
        } else {
            j == 0 || j == self.n[1]
        }
    }

    /// Quadrature weight of a face (dual-cell volume): `dV` inside, `dV/2` on walls.
    #[inline]
    pub fn face_weight(&self, axis: usize, k: usize) -> f64 {
        if self.is_boundary_face(axis, k) {
            0.5 * self.cell_volume()
        } else {
            self.cell_volume()
        }
    }
}

/// `make_grid` spelled as a free function.
pub fn make_grid(dim: usize, lengths: &[f64], n_cells: &[usize]) -> Result<Grid> {
    Grid::new(dim, lengths, n_cells)
}

/// One value per cell (cell average).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self {
            grid: *grid,
            values: vec![value; grid.cell_count()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::domain("value count does not match cell count"));
        }
        Ok(Self {
            grid: *grid,
            values,
        })
    }

    /// Samples `f` at cell centres.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.cell_count()).map(|c| f(grid.cell_center(c))).collect();
        Self {
            grid: *grid,
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.values.len(), other.values.len());
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Domain average `∫f / |Ω|`.
    pub fn mean(&self) -> f64 {
        integrate(self) / self.grid.volume()
    }
}

/// Face-normal components, one vector per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    pub comps: [Vec<f64>; 2],
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: *grid,
            comps: [vec![0.0; grid.face_count(0)], vec![0.0; grid.face_count(1)]],
        }
    }

    /// Samples component `f(axis, x)` at the centre of every face normal to `axis`.
    pub fn from_fn(grid: &Grid, f: impl Fn(usize, [f64; 2]) -> f64) -> Self {
        let mut v = Self::zeros(grid);
        for a in 0..grid.dim() {
            for k in 0..grid.face_count(a) {
                v.comps[a][k] = f(a, grid.face_center(a, k));
            }
        }
        v
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            comps: [
                self.comps[0].iter().map(|&v| f(v)).collect(),
                self.comps[1].iter().map(|&v| f(v)).collect(),
            ],
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let z = |a: &Vec<f64>, b: &Vec<f64>| -> Vec<f64> {
            a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
        };
        Self {
            grid: self.grid,
            comps: [z(&self.comps[0], &other.comps[0]), z(&self.comps[1], &other.comps[1])],
        }
    }

    /// Sets every wall face to zero.
    pub fn zero_boundary(&mut self) {
        for a in 0..self.grid.dim() {
            for k in 0..self.grid.face_count(a) {
                if self.grid.is_boundary_face(a, k) {
                    self.comps[a][k] = 0.0;
                }
            }
        }
    }

    /// Largest absolute value on wall faces.
    pub fn boundary_max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..self.grid.dim() {
            for k in 0..self.grid.face_count(a) {
                if self.grid.is_boundary_face(a, k) {
                    m = m.max(self.comps[a][k].abs());
                }
            }
        }
        m
    }

    /// Largest absolute face component.
    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cell-centred value of component `axis` (mean of the two bracketing faces).
    pub fn cell_component(&self, axis: usize) -> ScalarField {
        let g = &self.grid;
        let mut out = ScalarField::zeros(g);
        if axis >= g.dim() {
            return out;
        }
        for c in 0..g.cell_count() {
            let (i, j) = g.cell_coords(c);
            let (lo, hi) = if axis == 0 {
                (g.face(0, i, j), g.face(0, i + 1, j))
            } else {
                (g.face(1, i, j), g.face(1, i, j + 1))
            };
            out.values[c] = 0.5 * (self.comps[axis][lo] + self.comps[axis][hi]);
        }
        out
    }
}

/// How [`gradient`] fills the wall faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryClosure {
    /// Homogeneous Neumann: wall faces are exactly zero.
    NeumannZero,
    /// Second-order one-sided difference from the three nearest cells.
    OneSided,
}

/// Face gradient: `(f_R - f_L)/dx` on interior faces, wall faces per `closure`.
pub fn gradient(f: &ScalarField, closure: BoundaryClosure) -> VectorField {
    let g = *f.grid();
    let mut out = VectorField::zeros(&g);
    let v = &f.values;
    for a in 0..g.dim() {
        let inv = 1.0 / g.dx(a);
        let n = g.n(a);
        for k in 0..g.face_count(a) {
            let (lo, hi) = g.face_cells(a, k);
            out.comps[a][k] = match (lo, hi) {
                (Some(l), Some(r)) => (v[r] - v[l]) * inv,
                _ if closure == BoundaryClosure::NeumannZero => 0.0,
                (None, Some(c0)) => {
                    let (i, j) = g.cell_coords(c0);
                    let at = |s: usize| {
                        if a == 0 { v[g.cell(i + s, j)] } else { v[g.cell(i, j + s)] }
                    };
                    (3.0 * (at(1) - at(0)) - (at(2) - at(0))) * inv
                }
                (Some(cl), None) => {
                    let (i, j) = g.cell_coords(cl);
                    let at = |s: usize| {
                        if a == 0 { v[g.cell(i - s, j)] } else { v[g.cell(i, j - s)] }
                    };
                    (3.0 * (at(0) - at(1)) - (at(0) - at(2))) * inv
                }
                (None, None) => unreachable!("face without cells, n = {n}"),
            };
        }
    }
    out
}

/// Cell divergence `Σ_a (F_{a,hi} - F_{a,lo}) / dx_a`.
pub fn divergence(field: &VectorField) -> ScalarField {
    let g = *field.grid();
    let mut out = ScalarField::zeros(&g);
    for c in 0..g.cell_count() {
        let (i, j) = g.cell_coords(c);
        let mut s = (field.comps[0][g.face(0, i + 1, j)] - field.comps[0][g.face(0, i, j)]) / g.dx(0);
        if g.dim() == 2 {
            s += (field.comps[1][g.face(1, i, j + 1)] - field.comps[1][g.face(1, i, j)]) / g.dx(1);
        }
        out.values[c] = s;
    }
    out
}

/// Midpoint rule `Σ f_c dV`.
pub fn integrate(f: &ScalarField) -> f64 {
    f.values.iter().sum::<f64>() * f.grid().cell_volume()
}

/// Face quadrature of `a · b` with the dual-cell weights of [`Grid::face_weight`].
pub fn face_dot(a: &VectorField, b: &VectorField) -> f64 {
    let g = a.grid();
    let mut s = 0.0;
    for ax in 0..g.dim() {
        for k in 0..g.face_count(ax) {
            s += a.comps[ax][k] * b.comps[ax][k] * g.face_weight(ax, k);
        }
    }
    s
}

/// Face quadrature of `Σ_a w_a(face) · f(axis, face)`.
pub fn face_integral(g: &Grid, f: impl Fn(usize, usize) -> f64) -> f64 {
    let mut s = 0.0;
    for ax in 0..g.dim() {
        for k in 0..g.face_count(ax) {
            s += f(ax, k) * g.face_weight(ax, k);
        }
    }
    s
}

/// Arithmetic mean of the two cells sharing each face; wall faces copy the
/// adjacent cell (mirror ghost).
pub fn face_mean(f: &ScalarField) -> VectorField {
    let g = *f.grid();
    let mut out = VectorField::zeros(&g);
    for a in 0..g.dim() {
        for k in 0..g.face_count(a) {
            out.comps[a][k] = match g.face_cells(a, k) {
                (Some(l), Some(r)) => 0.5 * (f.values[l] + f.values[r]),
                (Some(c), None) | (None, Some(c)) => f.values[c],
                (None, None) => 0.0,
            };
        }
    }
    out
}
