//! The JSON run configuration and its conversion into a core [`RunSpec`].

use std::fmt;
use std::path::{Path, PathBuf};

use bipolar_relax_core::coupled::{default_weak_modes, CosineSeries, RunSpec};
use bipolar_relax_core::drift_diffusion::{DdOptions, DdScheme, VacuumBounds};
use bipolar_relax_core::euler_poisson::{HydroOptions, DENSITY_FLOOR};
use bipolar_relax_core::poisson::{FieldSolver, DEFAULT_TOL};
use bipolar_relax_core::{GasLaw, Grid};
use serde::{Deserialize, Serialize};

/// A rejected configuration document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    pub k: f64,
    pub gamma: f64,
    pub khat: f64,
}

impl LawConfig {
    pub fn law(&self) -> Result<GasLaw, ConfigError> {
        GasLaw::new(self.k, self.gamma, self.khat).map_err(|e| bad(e.to_string()))
    }
}

impl From<GasLaw> for LawConfig {
    fn from(l: GasLaw) -> Self {
        Self {
            k: l.k,
            gamma: l.gamma,
            khat: l.khat,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub lengths: Vec<f64>,
    pub cells: Vec<usize>,
}

/// `mean + Σ a cos(kx π x/Lx) cos(ky π y/Ly)` with terms `[kx, ky, a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub mean: f64,
    #[serde(default)]
    pub terms: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub rho: SeriesConfig,
    pub n: SeriesConfig,
    #[serde(default)]
    pub velocity_perturbation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    #[default]
    Auto,
    Cg,
}

impl From<SolverChoice> for FieldSolver {
    fn from(s: SolverChoice) -> Self {
        match s {
            SolverChoice::Auto => FieldSolver::Auto,
            SolverChoice::Cg => FieldSolver::ConjugateGradient,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub poisson: f64,
    pub positivity: f64,
    pub floor: f64,
    /// Added to every lemma right-hand side.
    pub lemma: f64,
    pub solver: SolverChoice,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            poisson: DEFAULT_TOL,
            positivity: 1e-8,
            floor: DENSITY_FLOOR,
            lemma: 0.0,
            solver: SolverChoice::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeChoice {
    #[default]
    Explicit,
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DdConfig {
    pub scheme: SchemeChoice,
    pub safety: f64,
    pub implicit_factor: f64,
    /// Lower density bounds `δ₁, δ₂` enforced on the equilibrium.
    pub delta: Option<[f64; 2]>,
    /// Upper density bounds `M₁, M₂` enforced on the equilibrium.
    pub m_cap: Option<[f64; 2]>,
}

impl Default for DdConfig {
    fn default() -> Self {
        let d = DdOptions::default();
        Self {
            scheme: SchemeChoice::Explicit,
            safety: d.safety,
            implicit_factor: d.implicit_factor,
            delta: None,
            m_cap: None,
        }
    }
}

/// Which checkpoints get full field CSVs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldOutput {
    All,
    #[default]
    Final,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub law1: LawConfig,
    pub law2: LawConfig,
    /// The single-run ε.
    #[serde(default)]
    pub eps: Option<f64>,
    /// The sweep ε values, strictly descending.
    #[serde(default)]
    pub eps_list: Option<Vec<f64>>,
    pub t_final: f64,
    pub cfl: f64,
    pub initial: InitialConfig,
    #[serde(default = "yes")]
    pub well_prepared: bool,
    pub checkpoint_every: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub drift_diffusion: DdConfig,
    #[serde(default)]
    pub fields: FieldOutput,
    /// Weak-form test modes `[kx, ky]`; defaults to the first three cosines.
    #[serde(default)]
    pub weak_modes: Option<Vec<[usize; 2]>>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.grid()?;
        self.law1.law()?;
        self.law2.law()?;
        if let Some(e) = self.eps {
            check_eps(e)?;
        }
        if let Some(list) = &self.eps_list {
            check_eps_list(list)?;
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(bad("t_final must be positive"));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(bad("cfl must lie in (0, 1]"));
        }
        if !(self.checkpoint_every > 0.0) {
            return Err(bad("checkpoint_every must be positive"));
        }
        let (a, b) = (self.initial.rho.mean, self.initial.n.mean);
        if !(a > 0.0) || (a - b).abs() > 1e-12 * a.abs().max(1.0) {
            return Err(bad("initial masses must match: rho.mean == n.mean > 0"));
        }
        let t = &self.tolerances;
        if !(t.poisson > 0.0 && t.positivity >= 0.0 && t.floor > 0.0 && t.lemma >= 0.0) {
            return Err(bad("tolerances must be positive"));
        }
        let d = &self.drift_diffusion;
        if !(d.safety > 0.0 && d.safety <= 0.5 && d.implicit_factor >= 1.0) {
            return Err(bad("drift_diffusion.safety must lie in (0, 0.5] and implicit_factor >= 1"));
        }
        if d.delta.is_some() != d.m_cap.is_some() {
            return Err(bad("drift_diffusion.delta and m_cap must be given together"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        let g = &self.grid;
        if g.lengths.len() != g.dim || g.cells.len() != g.dim {
            return Err(bad("grid.lengths and grid.cells need one entry per dimension"));
        }
        Grid::new(g.dim, &g.lengths, &g.cells).map_err(|e| bad(e.to_string()))
    }

    /// The core run description for one ε.
    pub fn spec(&self, eps: f64) -> Result<RunSpec, ConfigError> {
        check_eps(eps)?;
        let grid = self.grid()?;
        let t = &self.tolerances;
        let d = &self.drift_diffusion;
        let bounds = match (d.delta, d.m_cap) {
            (Some(delta), Some(m_cap)) => Some(VacuumBounds { delta, m_cap }),
            _ => None,
        };
        let series = |s: &SeriesConfig| CosineSeries {
            mean: s.mean,
            terms: s.terms.clone(),
        };
        Ok(RunSpec {
            law1: self.law1.law()?,
            law2: self.law2.law()?,
            eps,
            t_final: self.t_final,
            cfl: self.cfl,
            rho0: series(&self.initial.rho),
            n0: series(&self.initial.n),
            well_prepared: self.well_prepared,
            velocity_perturbation: self.initial.velocity_perturbation,
            checkpoint_every: self.checkpoint_every,
            hydro: HydroOptions {
                floor: t.floor,
                positivity_tol: t.positivity,
                solver: t.solver.into(),
                poisson_tol: t.poisson,
            },
            dd: DdOptions {
                scheme: match d.scheme {
                    SchemeChoice::Explicit => DdScheme::Explicit,
                    SchemeChoice::Implicit => DdScheme::Implicit,
                },
                safety: d.safety,
                implicit_factor: d.implicit_factor,
                bounds,
                solver: t.solver.into(),
                poisson_tol: t.poisson,
            },
            weak_modes: match &self.weak_modes {
                Some(m) => m.clone(),
                None => default_weak_modes(&grid),
            },
            grid,
        })
    }

    /// The configured single-run ε.
    pub fn single_eps(&self) -> Result<f64, ConfigError> {
        self.eps.ok_or_else(|| bad("`eps` is required for a single run"))
    }

    /// The sweep list, with command-line overrides taking precedence.
    pub fn sweep_eps(&self, overrides: &[f64]) -> Result<Vec<f64>, ConfigError> {
        let list = if overrides.is_empty() {
            self.eps_list.clone().ok_or_else(|| bad("`eps_list` is required for a sweep"))?
        } else {
            overrides.to_vec()
        };
        check_eps_list(&list)?;
        Ok(list)
    }
}

fn check_eps(e: f64) -> Result<(), ConfigError> {
    if e > 0.0 && e.is_finite() {
        Ok(())
    } else {
        Err(bad("eps must be positive"))
    }
}

fn check_eps_list(list: &[f64]) -> Result<(), ConfigError> {
    if list.is_empty() {
        return Err(bad("eps_list is empty"));
    }
    for e in list {
        check_eps(*e)?;
    }
    if list.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(bad("eps_list must be strictly descending"));
    }
    Ok(())
}
