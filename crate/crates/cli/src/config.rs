use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use vlab_core::matcore::Window;
use vlab_core::residual::Tier;
use vlab_core::su11::Sector;

use crate::catalog::{Catalog, Suite};
use crate::error::CliError;

/// Frequency used when `--omega` is absent.
pub const DEFAULT_OMEGA: f64 = 0.5;
/// Window size used when `--window` is absent.
pub const DEFAULT_WINDOW: usize = 8;
/// Case (a) spectrum check compares this many eigenvalues and needs `N >= 4` times it.
pub const SPECTRUM_COUNT: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (id, val) = s.split_once('=').ok_or_else(|| format!("expected id=value, got `{s}`"))?;
    let v: f64 = val.parse().map_err(|_| format!("bad tolerance `{val}`"))?;
    Ok((id.to_string(), v))
}

/// Arguments shared by `verify`, `sweep` and `export`.
#[derive(clap::Args, Clone, Debug)]
pub struct CommonArgs {
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Bargmann index.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "g")]
    pub k: Option<f64>,
    /// Singular coupling; sets k = (1 + sqrt(g + 1/4))/2.
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<f64>,
    /// Truncation dimension N.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Leading window size M.
    #[arg(long)]
    pub window: Option<usize>,
    /// Frequency ω in (0, 1); 0.5 when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// Report file; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Tolerance override, `id=value`; repeatable.
    #[arg(long = "tol", value_parser = parse_override)]
    pub tol: Vec<(String, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorSpec {
    K(f64),
    G(f64),
}

/// Validated run parameters. Serializes as the report's `params` echo.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub sector: SectorSpec,
    pub dim: usize,
    pub window: usize,
    pub omega: Option<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub format: Format,
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl SuiteConfig {
    /// `suite_required` is false for `export`, which runs no checks.
    pub fn from_args(a: &CommonArgs, catalog: &Catalog, suite_required: bool) -> Result<Self, CliError> {
        let suite = match (a.suite, suite_required) {
            (Some(s), _) => s,
            (None, true) => return Err(config("--suite is required")),
            (None, false) => Suite::All,
        };
        let sector = match (a.k, a.g) {
            (Some(k), None) => SectorSpec::K(k),
            (None, Some(g)) => SectorSpec::G(g),
            (Some(_), Some(_)) => return Err(config("--k and --g are mutually exclusive")),
            (None, None) => return Err(config("one of --k or --g is required")),
        };
        let dim = a.dim.ok_or_else(|| config("--dim is required"))?;
        let mut tolerances = BTreeMap::new();
        for (id, v) in &a.tol {
            match catalog.get(id) {
                None => return Err(config(format!("--tol: unknown check `{id}`"))),
                Some(e) if e.tier == Tier::ReportOnly => {
                    return Err(config(format!("--tol: `{id}` is report-only and has no tolerance")))
                }
                Some(_) => {}
            }
            if !(v.is_finite() && *v >= 0.0) {
                return Err(config(format!("--tol: tolerance for `{id}` must be finite and nonnegative")));
            }
            tolerances.insert(id.clone(), *v);
        }
        let cfg = SuiteConfig {
            suite,
            sector,
            dim,
            window: a.window.unwrap_or(DEFAULT_WINDOW.min(dim.saturating_sub(1))),
            omega: a.omega,
            tolerances,
            format: a.format,
            report: a.report.clone(),
        };
        cfg.validate_common()?;
        if suite_required {
            cfg.validate_suite()?;
        }
        Ok(cfg)
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self, CliError> {
        let cfg = SuiteConfig { dim, ..self.clone() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self, CliError> {
        let cfg = SuiteConfig { omega: Some(omega), ..self.clone() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sector(&self) -> Result<Sector, CliError> {
        let s = match self.sector {
            SectorSpec::K(k) => Sector::from_k(k, self.dim),
            SectorSpec::G(g) => Sector::from_g(g, self.dim),
        };
        s.map_err(|e| config(e.to_string()))
    }

    pub fn window(&self) -> Window {
        Window::new(self.window).expect("validated window")
    }

    pub fn omega(&self) -> f64 {
        self.omega.unwrap_or(DEFAULT_OMEGA)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.validate_common()?;
        self.validate_suite()
    }

    fn validate_common(&self) -> Result<(), CliError> {
        self.sector()?;
        let (n, m) = (self.dim, self.window);
        if m == 0 || m >= n {
            return Err(config(format!("window {m} must satisfy 0 < M < N = {n}")));
        }
        if let Some(w) = self.omega {
            if !(w > 0.0 && w < 1.0) {
                return Err(config(format!("--omega {w} outside (0, 1)")));
            }
        }
        Ok(())
    }

    /// Checks that every check of the suite can run at this size.
    fn validate_suite(&self) -> Result<(), CliError> {
        let (n, m) = (self.dim, self.window);
        let min_dim = |need: usize, why: &str| -> Result<(), CliError> {
            if n < need {
                return Err(config(format!("suite {} needs N >= {need} ({why}), got {n}", self.suite.name())));
            }
            Ok(())
        };
        let windowed = matches!(self.suite, Suite::Conformal | Suite::Timeops | Suite::Intertwine | Suite::All);
        if windowed && 4 * m > n {
            return Err(config(format!(
                "suite {} needs M <= N/4 (trend tables start at N/4), got M = {m}, N = {n}",
                self.suite.name()
            )));
        }
        match self.suite {
            Suite::Algebra => Ok(()),
            Suite::Coherent => min_dim(8, "trend against N/2"),
            Suite::Conformal | Suite::All => min_dim(4 * SPECTRUM_COUNT, "lowest 10 eigenvalues within N/4"),
            Suite::Timeops => min_dim(16, "trend tables start at N/4"),
            Suite::Intertwine => min_dim(32, "Fock realization at N/4 needs 8 levels"),
        }
    }
}
