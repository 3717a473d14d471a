mod common;

use std::fs;

use bipolar_relax::output::{field_csv, num, Csv};
use bipolar_relax::{run_single, RunConfig};
use bipolar_relax_core::{Grid, ScalarField};

#[test]
fn numbers_carry_seventeen_significant_digits() {
    assert_eq!(num(1.0), "1.0000000000000000e0");
    assert_eq!(num(0.1), "1.0000000000000001e-1");
    for x in [std::f64::consts::PI, -2.5e-300, 1.0 / 3.0, 6.02e23] {
        let s = num(x);
        let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
        assert_eq!(mantissa.len(), 17, "{s}");
        assert_eq!(s.parse::<f64>().unwrap(), x, "round trip of {s}");
    }
}

#[test]
fn csv_rows_follow_the_header() {
    let mut c = Csv::new(&["t", "i", "v"]);
    c.indexed_row(&[0.5], &[3], &[2.0]);
    assert_eq!(c.as_str(), "t,i,v\n5.0000000000000000e-1,3,2.0000000000000000e0\n");
}

#[test]
fn field_csv_indexes_cells_per_axis() {
    let g = Grid::new(2, &[1.0, 1.0], &[4, 5]).unwrap();
    let f = ScalarField::from_fn(&g, |x| x[0] + 10.0 * x[1]);
    let c = field_csv(&f);
    let lines: Vec<&str> = c.as_str().lines().collect();
    assert_eq!(lines.len(), 21);
    assert_eq!(lines[0].split(',').count(), 3);
}

#[test]
fn run_files_use_the_fixed_format() {
    let cfg = RunConfig::from_json(common::SMALL).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    run_single(&cfg, 0.1, Some(tmp.path())).unwrap();
    let psi = fs::read_to_string(tmp.path().join("psi_timeseries.csv")).unwrap();
    assert_eq!(psi.lines().count(), 6);
    let hydro = fs::read_to_string(tmp.path().join("checkpoints/hydro_0000.csv")).unwrap();
    assert_eq!(hydro.lines().next().unwrap(), "t,i,rho,n,u,v,phi");
    let eq = fs::read_to_string(tmp.path().join("checkpoints/equilibrium_0000.csv")).unwrap();
    assert_eq!(eq.lines().next().unwrap().split(',').count(), 9);
    for line in psi.lines().skip(1) {
        for cell in line.split(',') {
            let mantissa = cell.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17, "{cell}");
        }
    }
}
