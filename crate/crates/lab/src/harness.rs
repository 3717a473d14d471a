//! Single runs and ε sweeps, with their on-disk artifacts.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use bipolar_relax_core::coupled::{self, RunError, RunResult};
use bipolar_relax_core::relative_energy::{self, GronwallFit, Lemma};
use bipolar_relax_core::Error;
use serde::Serialize;

use crate::config::{ConfigError, FieldOutput, LawConfig, RunConfig};
use crate::output::{self, Csv};

/// Exit status for a successful command.
pub const EXIT_OK: i32 = 0;
/// Exit status for an unreadable or invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for a numerical failure (typed solver error, failed fit).
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit status for a failed acceptance or invariant check.
pub const EXIT_ACCEPTANCE: i32 = 4;

#[derive(Debug)]
pub enum HarnessError {
    Config(ConfigError),
    Io(io::Error),
    Run(RunError),
    Fit(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io(_) => EXIT_CONFIG,
            HarnessError::Run(_) | HarnessError::Fit(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(e) => write!(f, "{e}"),
            HarnessError::Io(e) => write!(f, "io error: {e}"),
            HarnessError::Run(e) => write!(f, "{} error at {e}", e.error.code()),
            HarnessError::Fit(m) => write!(f, "fit error: {m}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<ConfigError> for HarnessError {
    fn from(e: ConfigError) -> Self {
        HarnessError::Config(e)
    }
}

impl From<io::Error> for HarnessError {
    fn from(e: io::Error) -> Self {
        HarnessError::Io(e)
    }
}

/// One lemma bound as reported. Uncertified branches carry the measured
/// left-hand side only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaRow {
    pub lemma: String,
    pub lhs: f64,
    pub rhs: Option<f64>,
    pub constant: Option<f64>,
    pub certified: bool,
    pub pass: Option<bool>,
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JTermsRow {
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
    pub j4: f64,
    pub dissipation: f64,
    pub slack: f64,
}

/// Scalar diagnostics of one completed run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub eps: f64,
    pub psi0: f64,
    pub psi_final: f64,
    /// Hydro total energy at `t = 0`.
    pub energy0: f64,
    pub jterms: JTermsRow,
    pub lemmas: Vec<LemmaRow>,
    /// Every certified lemma bound holds.
    pub lemmas_pass: bool,
    /// Relative drift of `∫ρ, ∫n, ∫ρ̄, ∫n̄`.
    pub mass_drift: [f64; 4],
    pub charge_drift: f64,
    /// Max over steps of `E(t) − E(0) + ∫∫ρ|u|² + n|v|²`.
    pub energy_defect: f64,
    /// Largest one-step increase of the hydro energy.
    pub energy_max_increase: f64,
    pub dd_energy_residual: f64,
    /// Continuity (ρ, n) then momentum (ρu, nv) weak residuals.
    pub weak_residuals: [f64; 4],
    pub steps: usize,
    pub min_dt: f64,
    pub max_dt: f64,
    pub floor_mass: f64,
    /// Range of `ρ̄` and `n̄` over the run.
    pub dd_range: [[f64; 2]; 2],
    pub valid: bool,
}

impl RunSummary {
    pub fn mass_drift_max(&self) -> f64 {
        self.mass_drift.iter().fold(0.0, |m, v| m.max(*v))
    }
}

/// A finished run with its full history.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub summary: RunSummary,
    pub result: RunResult,
}

#[derive(Debug, Clone, Serialize)]
struct ErrorInfo {
    code: &'static str,
    step: usize,
    t: f64,
    message: String,
}

#[derive(Debug, Clone, Serialize)]
struct GridInfo {
    dim: usize,
    lengths: Vec<f64>,
    cells: Vec<usize>,
    dx: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct DtPolicy {
    hydro: &'static str,
    cfl: f64,
    steps: Option<usize>,
    min_dt: Option<f64>,
    max_dt: Option<f64>,
    drift_diffusion: String,
    dd_safety: f64,
}

#[derive(Debug, Clone, Serialize)]
struct FloorInfo {
    density_floor: f64,
    floor_mass: Option<f64>,
    limit_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
struct Metadata {
    valid: bool,
    grid: GridInfo,
    law1: LawConfig,
    law2: LawConfig,
    eps: f64,
    t_final: f64,
    checkpoint_every: f64,
    well_prepared: bool,
    dt_policy: DtPolicy,
    floor: FloorInfo,
    summary: Option<RunSummary>,
    error: Option<ErrorInfo>,
}

fn lemma_rows(result: &RunResult, tol: f64) -> Result<Vec<LemmaRow>, Error> {
    let acc = &result.accumulator;
    let j = acc.terms();
    let mut rows = Vec::new();
    for lemma in Lemma::ALL {
        match relative_energy::lemma_check(acc, lemma, tol) {
            Ok(c) => rows.push(LemmaRow {
                lemma: lemma.name().into(),
                lhs: c.lhs,
                rhs: Some(c.rhs),
                constant: Some(c.constant),
                certified: true,
                pass: Some(c.pass),
                note: c.note,
            }),
            Err(Error::UnsupportedBranch(note)) => rows.push(LemmaRow {
                lemma: lemma.name().into(),
                lhs: match lemma {
                    Lemma::J1 => j.j1,
                    Lemma::J2 => j.j2,
                    Lemma::J3 => j.j3,
                    Lemma::J4 => j.j4,
                },
                rhs: None,
                constant: None,
                certified: false,
                pass: None,
                note,
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}

fn summarize(result: &RunResult, eps: f64, lemma_tol: f64) -> Result<RunSummary, Error> {
    let acc = &result.accumulator;
    let j = acc.terms();
    let lemmas = lemma_rows(result, lemma_tol)?;
    let r = &result.dd_range;
    Ok(RunSummary {
        eps,
        psi0: acc.psi0().total,
        psi_final: acc.psi().total,
        energy0: result.checkpoints[0].energy.total,
        jterms: JTermsRow {
            j1: j.j1,
            j2: j.j2,
            j3: j.j3,
            j4: j.j4,
            dissipation: j.dissipation,
            slack: j.slack,
        },
        lemmas_pass: lemmas.iter().all(|l| l.pass != Some(false)),
        lemmas,
        mass_drift: result.mass_drift,
        charge_drift: result.charge_drift,
        energy_defect: result.energy_defect,
        energy_max_increase: result.energy_max_increase,
        dd_energy_residual: result.dd_energy_residual,
        weak_residuals: result.weak,
        steps: result.steps,
        min_dt: result.min_dt,
        max_dt: result.max_dt,
        floor_mass: result.floor_mass,
        dd_range: [[r[0].0, r[0].1], [r[1].0, r[1].1]],
        valid: result.valid,
    })
}

fn metadata(cfg: &RunConfig, eps: f64, summary: Option<&RunSummary>, error: Option<ErrorInfo>) -> Metadata {
    let g = &cfg.grid;
    let dd = &cfg.drift_diffusion;
    Metadata {
        valid: error.is_none() && summary.is_some_and(|s| s.valid),
        grid: GridInfo {
            dim: g.dim,
            lengths: g.lengths.clone(),
            cells: g.cells.clone(),
            dx: g.lengths.iter().zip(&g.cells).map(|(l, n)| l / *n as f64).collect(),
        },
        law1: cfg.law1,
        law2: cfg.law2,
        eps,
        t_final: cfg.t_final,
        checkpoint_every: cfg.checkpoint_every,
        well_prepared: cfg.well_prepared,
        dt_policy: DtPolicy {
            hydro: "cfl * h / max(|u| + sqrt(p'/eps)), clipped to land on checkpoints",
            cfl: cfg.cfl,
            steps: summary.map(|s| s.steps),
            min_dt: summary.map(|s| s.min_dt),
            max_dt: summary.map(|s| s.max_dt),
            drift_diffusion: format!("{:?}", dd.scheme).to_lowercase(),
            dd_safety: dd.safety,
        },
        floor: FloorInfo {
            density_floor: cfg.tolerances.floor,
            floor_mass: summary.map(|s| s.floor_mass),
            limit_fraction: bipolar_relax_core::euler_poisson::FLOOR_MASS_LIMIT,
        },
        summary: summary.cloned(),
        error,
    }
}

fn write_run(cfg: &RunConfig, run: &SingleRun, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let r = &run.result;
    output::psi_csv(&r.checkpoints).write(&dir.join("psi_timeseries.csv"))?;
    output::jterms_csv(&r.checkpoints).write(&dir.join("jterms.csv"))?;
    output::write_json(&dir.join("lemma_report.json"), &run.summary.lemmas)?;
    output::write_json(&dir.join("metadata.json"), &metadata(cfg, run.summary.eps, Some(&run.summary), None))?;
    let chosen: Vec<(usize, &coupled::Checkpoint)> = match cfg.fields {
        FieldOutput::All => r.checkpoints.iter().enumerate().collect(),
        FieldOutput::Final => r.checkpoints.iter().enumerate().next_back().into_iter().collect(),
        FieldOutput::None => Vec::new(),
    };
    if chosen.is_empty() {
        return Ok(());
    }
    let cp_dir = dir.join("checkpoints");
    fs::create_dir_all(&cp_dir)?;
    for (k, c) in &chosen {
        output::hydro_csv(&c.hydro, cfg.tolerances.floor).write(&cp_dir.join(format!("hydro_{k:04}.csv")))?;
        output::equilibrium_csv(&c.eq).write(&cp_dir.join(format!("equilibrium_{k:04}.csv")))?;
    }
    let last = r.checkpoints.last().expect("a run has checkpoints");
    let field_dir = dir.join("fields");
    fs::create_dir_all(&field_dir)?;
    let rho_err = last.hydro.rho.zip_map(&last.eq.rho_bar, |a, b| a - b);
    let n_err = last.hydro.n.zip_map(&last.eq.n_bar, |a, b| a - b);
    output::field_csv(&rho_err).write(&field_dir.join("rho_minus_rho_bar.csv"))?;
    output::field_csv(&n_err).write(&field_dir.join("n_minus_n_bar.csv"))?;
    Ok(())
}

/// Runs the coupled problem for one ε; writes the artifacts when `out` is set.
///
/// A failed run still writes `metadata.json` marked invalid, with the typed
/// error code and the step it came from.
pub fn run_single(cfg: &RunConfig, eps: f64, out: Option<&Path>) -> Result<SingleRun, HarnessError> {
    let spec = cfg.spec(eps)?;
    let fail = |e: RunError| -> Result<SingleRun, HarnessError> {
        if let Some(dir) = out {
            fs::create_dir_all(dir)?;
            let info = ErrorInfo {
                code: e.error.code(),
                step: e.step,
                t: e.t,
                message: e.error.to_string(),
            };
            output::write_json(&dir.join("metadata.json"), &metadata(cfg, eps, None, Some(info)))?;
        }
        Err(HarnessError::Run(e))
    };
    let result = match coupled::run(&spec) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let summary = match summarize(&result, eps, cfg.tolerances.lemma) {
        Ok(s) => s,
        Err(error) => {
            return fail(RunError {
                step: result.steps,
                t: cfg.t_final,
                error,
            })
        }
    };
    let run = SingleRun { summary, result };
    if let Some(dir) = out {
        write_run(cfg, &run, dir)?;
    }
    Ok(run)
}

/// One ε of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub valid: bool,
    pub error: Option<String>,
    pub wall_clock_s: f64,
    pub summary: Option<RunSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub t_final: f64,
    pub rows: Vec<SweepRow>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub c_estimate: Option<f64>,
    pub floor_limited: Option<bool>,
    pub applicable: Option<bool>,
    pub fit_error: Option<String>,
}

impl SweepReport {
    fn fit(&mut self) {
        let valid: Vec<&RunSummary> = self.rows.iter().filter(|r| r.valid).filter_map(|r| r.summary.as_ref()).collect();
        let eps: Vec<f64> = valid.iter().map(|s| s.eps).collect();
        let psi_t: Vec<f64> = valid.iter().map(|s| s.psi_final).collect();
        let psi0: Vec<f64> = valid.iter().map(|s| s.psi0).collect();
        let scale = valid.iter().fold(0.0_f64, |m, s| m.max(s.energy0));
        let fit: Result<GronwallFit, String> = if valid.len() < 3 {
            Err(format!("rate fit needs at least three valid runs, found {}", valid.len()))
        } else {
            relative_energy::gronwall_fit(&eps, &psi_t, &psi0, self.t_final, scale).map_err(|e| e.to_string())
        };
        match fit {
            Ok(f) => {
                self.slope = Some(f.slope);
                self.intercept = Some(f.intercept);
                self.c_estimate = Some(f.c_estimate);
                self.floor_limited = Some(f.floor_limited);
                self.applicable = Some(f.applicable);
            }
            Err(e) => self.fit_error = Some(e),
        }
    }

    /// `eps, psi0, psi_final, ln_eps, ln_psi_final, …`, one row per ε.
    pub fn summary_csv(&self) -> Csv {
        let mut csv = Csv::new(&[
            "eps",
            "psi0",
            "psi_final",
            "ln_eps",
            "ln_psi_final",
            "mass_drift",
            "energy_defect",
            "lemmas_pass",
            "valid",
        ]);
        for r in &self.rows {
            let s = r.summary.as_ref();
            let get = |f: fn(&RunSummary) -> f64| s.map_or(f64::NAN, f);
            let psi_final = get(|s| s.psi_final);
            csv.row(&[
                r.eps,
                get(|s| s.psi0),
                psi_final,
                r.eps.ln(),
                psi_final.ln(),
                get(|s| s.mass_drift_max()),
                get(|s| s.energy_defect),
                get(|s| f64::from(u8::from(s.lemmas_pass))),
                f64::from(u8::from(r.valid)),
            ]);
        }
        csv
    }
}

/// A finished sweep: the report plus every successful run in ε order.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub report: SweepReport,
    pub runs: Vec<Option<SingleRun>>,
}

/// Directory of the `k`-th sweep member below `out`.
pub fn sweep_run_dir(out: &Path, k: usize) -> PathBuf {
    out.join(format!("eps_{k:02}"))
}

/// Runs every ε on up to `threads` workers (0 picks the core count) and fits
/// the rate over the valid rows. A failed fit is recorded in the report.
pub fn run_sweep(
    cfg: &RunConfig,
    eps_list: &[f64],
    threads: usize,
    out: Option<&Path>,
) -> Result<SweepOutcome, HarnessError> {
    for e in eps_list {
        cfg.spec(*e)?;
    }
    let threads = match threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        t => t,
    }
    .min(eps_list.len().max(1));
    type Slot = Option<(Result<SingleRun, HarnessError>, f64)>;
    let slots: Mutex<Vec<Slot>> = Mutex::new((0..eps_list.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                if k >= eps_list.len() {
                    break;
                }
                let dir = out.map(|o| sweep_run_dir(o, k));
                let start = Instant::now();
                let r = run_single(cfg, eps_list[k], dir.as_deref());
                let secs = start.elapsed().as_secs_f64();
                slots.lock().expect("no worker panicked")[k] = Some((r, secs));
            });
        }
    });
    let mut rows = Vec::with_capacity(eps_list.len());
    let mut runs = Vec::with_capacity(eps_list.len());
    for (k, slot) in slots.into_inner().expect("no worker panicked").into_iter().enumerate() {
        let (r, secs) = slot.expect("every slot filled");
        match r {
            Ok(run) => {
                rows.push(SweepRow {
                    eps: eps_list[k],
                    valid: run.summary.valid,
                    error: None,
                    wall_clock_s: secs,
                    summary: Some(run.summary.clone()),
                });
                runs.push(Some(run));
            }
            Err(HarnessError::Io(e)) => return Err(HarnessError::Io(e)),
            Err(e) => {
                rows.push(SweepRow {
                    eps: eps_list[k],
                    valid: false,
                    error: Some(e.to_string()),
                    wall_clock_s: secs,
                    summary: None,
                });
                runs.push(None);
            }
        }
    }
    let mut report = SweepReport {
        t_final: cfg.t_final,
        rows,
        slope: None,
        intercept: None,
        c_estimate: None,
        floor_limited: None,
        applicable: None,
        fit_error: None,
    };
    report.fit();
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        report.summary_csv().write(&dir.join("sweep_summary.csv"))?;
        output::write_json(&dir.join("report.json"), &report)?;
    }
    Ok(SweepOutcome { report, runs })
}
