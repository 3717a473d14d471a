//! The `bipolar-relax` command line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::acceptance;
use crate::config::RunConfig;
use crate::harness::{self, HarnessError, EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "bipolar-relax", version, about = "Relaxation-limit laboratory for the bipolar Euler-Poisson system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides the config's `output`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps (0 = one per core). Single runs are sequential.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Seed for the randomized property suites.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One coupled run at the configured `eps`.
    Run(RunArgs),
    /// One run per `eps` in `eps_list` (or `--eps`), then the rate fit.
    Sweep {
        #[command(flatten)]
        args: RunArgs,
        /// Replace the configured `eps_list` (strictly descending).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        eps: Vec<f64>,
    },
    /// The invariant suites; with `--config` also every acceptance criterion.
    Check {
        /// Baseline configuration for the full acceptance run.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Golden run directory compared in the determinism criterion.
        #[arg(long)]
        golden: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn out_dir(args: &RunArgs, cfg: &RunConfig) -> Result<PathBuf, HarnessError> {
    args.out
        .clone()
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| HarnessError::Config(crate::ConfigError("no output directory: pass --out or set `output`".into())))
}

fn report_error(e: &HarnessError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

fn run_cmd(args: &RunArgs) -> Result<i32, HarnessError> {
    let cfg = RunConfig::load(&args.config)?;
    let out = out_dir(args, &cfg)?;
    let eps = cfg.single_eps()?;
    let run = harness::run_single(&cfg, eps, Some(&out))?;
    let s = &run.summary;
    println!(
        "eps {:e}: psi(0) {:.6e} psi(T) {:.6e} slack {:.3e} lemmas {} valid {} -> {}",
        s.eps,
        s.psi0,
        s.psi_final,
        s.jterms.slack,
        if s.lemmas_pass { "pass" } else { "FAIL" },
        s.valid,
        out.display()
    );
    Ok(if s.valid { EXIT_OK } else { EXIT_NUMERICAL })
}

fn sweep_cmd(args: &RunArgs, eps: &[f64]) -> Result<i32, HarnessError> {
    let cfg = RunConfig::load(&args.config)?;
    let out = out_dir(args, &cfg)?;
    let list = cfg.sweep_eps(eps)?;
    let sweep = harness::run_sweep(&cfg, &list, args.threads, Some(&out))?;
    let r = &sweep.report;
    for row in &r.rows {
        match &row.summary {
            Some(s) => println!(
                "eps {:e}: psi(T) {:.6e} valid {} ({:.1} s)",
                row.eps, s.psi_final, row.valid, row.wall_clock_s
            ),
            None => println!("eps {:e}: failed: {}", row.eps, row.error.as_deref().unwrap_or("")),
        }
    }
    match (r.slope, &r.fit_error) {
        (Some(slope), _) => {
            println!(
                "slope {slope:.4}, C {:.4e}, floor limited {}, applicable {} -> {}",
                r.c_estimate.unwrap_or(f64::NAN),
                r.floor_limited.unwrap_or(false),
                r.applicable.unwrap_or(false),
                out.display()
            );
            Ok(if r.rows.iter().all(|row| row.valid) { EXIT_OK } else { EXIT_NUMERICAL })
        }
        (None, e) => Err(HarnessError::Fit(e.clone().unwrap_or_default())),
    }
}

fn check_cmd(config: Option<&Path>, golden: Option<&Path>, threads: usize, seed: u64) -> Result<i32, HarnessError> {
    let outcomes = match config {
        None => acceptance::quick_suites(seed),
        Some(path) => {
            let cfg = RunConfig::load(path)?;
            let golden = golden.map(Path::to_path_buf).unwrap_or_else(|| {
                path.parent().unwrap_or(Path::new(".")).join("golden").join("baseline")
            });
            acceptance::run_all(&cfg, &golden, threads, seed)
        }
    };
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    Ok(if failed == 0 { EXIT_OK } else { EXIT_ACCEPTANCE })
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => run_cmd(args),
        Command::Sweep { args, eps } => sweep_cmd(args, eps),
        Command::Check {
            config,
            golden,
            threads,
            seed,
        } => check_cmd(config.as_deref(), golden.as_deref(), *threads, *seed),
    };
    result.unwrap_or_else(|e| report_error(&e))
}
