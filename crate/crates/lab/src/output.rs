//! CSV and JSON writers. Every number is rendered with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use bipolar_relax_core::coupled::Checkpoint;
use bipolar_relax_core::drift_diffusion::EquilibriumState;
use bipolar_relax_core::euler_poisson::BipolarHydroState;
use bipolar_relax_core::{Grid, ScalarField, VectorField};
use serde::Serialize;

/// `x` in the fixed 17-significant-digit scientific format.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A comma-separated table built in memory.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut c = Self::default();
        c.line(header.iter().map(|s| s.as_ref().to_string()));
        c
    }

    fn line(&mut self, cells: impl IntoIterator<Item = String>) {
        let mut first = true;
        for cell in cells {
            if !first {
                self.text.push(',');
            }
            self.text.push_str(&cell);
            first = false;
        }
        self.text.push('\n');
    }

    /// A row of numbers.
    pub fn row(&mut self, values: &[f64]) {
        self.line(values.iter().map(|v| num(*v)));
    }

    /// A row of leading integer indices followed by numbers.
    pub fn indexed_row(&mut self, lead: &[f64], index: &[usize], values: &[f64]) {
        let cells = lead
            .iter()
            .map(|v| num(*v))
            .chain(index.iter().map(|i| i.to_string()))
            .chain(values.iter().map(|v| num(*v)));
        self.line(cells);
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, &self.text)
    }
}

const AXES: [&str; 2] = ["x", "y"];

fn index_names(g: &Grid) -> Vec<String> {
    ["i", "j"][..g.dim()].iter().map(|s| s.to_string()).collect()
}

fn index_of(g: &Grid, c: usize) -> Vec<usize> {
    let (i, j) = g.cell_coords(c);
    [i, j][..g.dim()].to_vec()
}

/// Component names `name` (1D) or `name_x, name_y` (2D).
fn vector_names(g: &Grid, name: &str) -> Vec<String> {
    if g.dim() == 1 {
        vec![name.to_string()]
    } else {
        AXES.iter().map(|a| format!("{name}_{a}")).collect()
    }
}

fn cell_components(g: &Grid, f: &VectorField) -> Vec<ScalarField> {
    (0..g.dim()).map(|a| f.cell_component(a)).collect()
}

/// One row per cell: cell index per axis, then the value.
pub fn field_csv(f: &ScalarField) -> Csv {
    let g = f.grid();
    let mut header = index_names(g);
    header.push("value".into());
    let mut csv = Csv::new(&header);
    for c in 0..g.cell_count() {
        csv.indexed_row(&[], &index_of(g, c), &[f.values[c]]);
    }
    csv
}

/// `t, cell indices, rho, n, u, v, phi` with cell-centred velocities.
pub fn hydro_csv(s: &BipolarHydroState, floor: f64) -> Csv {
    let g = s.grid();
    let (u, v) = s.velocities(floor);
    let (u, v) = (cell_components(g, &u), cell_components(g, &v));
    let mut header = vec!["t".to_string()];
    header.extend(index_names(g));
    header.extend(["rho".to_string(), "n".to_string()]);
    header.extend(vector_names(g, "u"));
    header.extend(vector_names(g, "v"));
    header.push("phi".into());
    let mut csv = Csv::new(&header);
    for c in 0..g.cell_count() {
        let mut vals = vec![s.rho.values[c], s.n.values[c]];
        vals.extend(u.iter().map(|f| f.values[c]));
        vals.extend(v.iter().map(|f| f.values[c]));
        vals.push(s.phi.values[c]);
        csv.indexed_row(&[s.t], &index_of(g, c), &vals);
    }
    csv
}

/// The equilibrium checkpoint: densities, potential, `ū, v̄, ē₁, ē₂`.
pub fn equilibrium_csv(s: &EquilibriumState) -> Csv {
    let g = s.grid();
    let vectors = [&s.u_bar, &s.v_bar, &s.e_bar1, &s.e_bar2].map(|f| cell_components(g, f));
    let mut header = vec!["t".to_string()];
    header.extend(index_names(g));
    header.extend(["rho_bar", "n_bar", "phi_bar"].map(String::from));
    for name in ["u_bar", "v_bar", "e_bar1", "e_bar2"] {
        header.extend(vector_names(g, name));
    }
    let mut csv = Csv::new(&header);
    for c in 0..g.cell_count() {
        let mut vals = vec![s.rho_bar.values[c], s.n_bar.values[c], s.phi_bar.values[c]];
        for comps in &vectors {
            vals.extend(comps.iter().map(|f| f.values[c]));
        }
        csv.indexed_row(&[s.t], &index_of(g, c), &vals);
    }
    csv
}

/// `t` plus the six relative-energy columns, one row per checkpoint.
pub fn psi_csv(checkpoints: &[Checkpoint]) -> Csv {
    let mut csv = Csv::new(&["t", "kin_rho", "kin_n", "int_rho", "int_n", "field", "total"]);
    for c in checkpoints {
        let p = &c.psi;
        csv.row(&[p.t, p.kin_rho, p.kin_n, p.int_rho, p.int_n, p.field, p.total]);
    }
    csv
}

/// Cumulative J terms, dissipation and slack, one row per checkpoint.
pub fn jterms_csv(checkpoints: &[Checkpoint]) -> Csv {
    let mut csv = Csv::new(&["t", "j1", "j2", "j3", "j4", "dissipation", "slack"]);
    for c in checkpoints {
        let j = &c.jterms;
        csv.row(&[j.t, j.j1, j.j2, j.j3, j.j4, j.dissipation, j.slack]);
    }
    csv
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    let _ = writeln!(text);
    fs::write(path, text)
}
