//! Momentum convection `∇·(m ⊗ u)` on the staggered layout.
//!
//! Component `a` of the momentum lives on faces normal to `a`. Fluxes are
//! Rusanov-upwinded with the local convective speed only; wall faces are
//! left at zero, which realizes the reflective (mirror) closure.

use crate::grid::VectorField;

/// `∇·(m ⊗ u)` at every face, zero on walls.
pub(crate) fn momentum_convection(m: &VectorField, u: &VectorField) -> VectorField {
    let g = *m.grid();
    let mut out = VectorField::zeros(&g);
    let (nx, ny) = (g.n(0), g.n(1));

    // normal direction: dual cells centred on the primal cells
    for a in 0..g.dim() {
        let inv = 1.0 / g.dx(a);
        let cell_flux = |i: usize, j: usize| -> f64 {
            let (lo, hi) = if a == 0 {
                (g.face(0, i, j), g.face(0, i + 1, j))
            } else {
                (g.face(1, i, j), g.face(1, i, j + 1))
            };
            let (ml, mr) = (m.comps[a][lo], m.comps[a][hi]);
            let (ul, ur) = (u.comps[a][lo], u.comps[a][hi]);
            let s = ul.abs().max(ur.abs());
            0.5 * (ml * ul + mr * ur) - 0.5 * s * (mr - ml)
        };
        for k in 0..g.face_count(a) {
            if g.is_boundary_face(a, k) {
                continue;
            }
            let (i, j) = g.face_coords(a, k);
            let (fl, fr) = if a == 0 {
                (cell_flux(i - 1, j), cell_flux(i, j))
            } else {
                (cell_flux(i, j - 1), cell_flux(i, j))
            };
            out.comps[a][k] = (fr - fl) * inv;
        }
    }
    if g.dim() < 2 {
        return out;
    }

    // tangential direction: fluxes through cell corners (i dx, j dy)
    let corner_x = |i: usize, j: usize| -> f64 {
        // x-momentum carried across the horizontal edge at y = j dy
        if j == 0 || j == ny {
            return 0.0;
        }
        let vc = 0.5 * (u.comps[1][g.face(1, i - 1, j)] + u.comps[1][g.face(1, i, j)]);
        let (mb, mt) = (m.comps[0][g.face(0, i, j - 1)], m.comps[0][g.face(0, i, j)]);
        0.5 * vc * (mb + mt) - 0.5 * vc.abs() * (mt - mb)
    };
    let corner_y = |i: usize, j: usize| -> f64 {
        if i == 0 || i == nx {
            return 0.0;
        }
        let uc = 0.5 * (u.comps[0][g.face(0, i, j - 1)] + u.comps[0][g.face(0, i, j)]);
        let (ml, mr) = (m.comps[1][g.face(1, i - 1, j)], m.comps[1][g.face(1, i, j)]);
        0.5 * uc * (ml + mr) - 0.5 * uc.abs() * (mr - ml)
    };
    let (idx, idy) = (1.0 / g.dx(0), 1.0 / g.dx(1));
    for k in 0..g.face_count(0) {
        if g.is_boundary_face(0, k) {
            continue;
        }
        let (i, j) = g.face_coords(0, k);
        out.comps[0][k] += (corner_x(i, j + 1) - corner_x(i, j)) * idy;
    }
    for k in 0..g.face_count(1) {
        if g.is_boundary_face(1, k) {
            continue;
        }
        let (i, j) = g.face_coords(1, k);
        out.comps[1][k] += (corner_y(i + 1, j) - corner_y(i, j)) * idx;
    }
    out
}

/// `m / max(ρ_f, floor)`, zero where the face density is at or below the floor.
pub(crate) fn face_velocity(m: &VectorField, rho_face: &VectorField, floor: f64) -> VectorField {
    m.zip_map(rho_face, |m, r| if r > floor { m / r } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn uniform_interior_flow_has_no_interior_convection() {
        let g = Grid::line(1.0, 10).unwrap();
        let mut m = VectorField::from_fn(&g, |_, _| 2.0);
        m.zero_boundary();
        let u = m.map(|v| v / 1.0);
        let c = momentum_convection(&m, &u);
        // only faces next to the walls feel the change of flux
        for k in 2..9 {
            assert!(c.comps[0][k].abs() < 1e-12, "{k}: {}", c.comps[0][k]);
        }
        assert_eq!(c.comps[0][0], 0.0);
        assert_eq!(c.comps[0][10], 0.0);
    }
}
