use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_MAX_ITER: usize = 20_000;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_GRID: usize = 200;
pub const DEFAULT_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    FitKernel,
    FitMultikernel,
    FitDict,
    FitSpline,
    FitMixed,
    Dual,
    Verify,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::FitKernel => "fit-kernel",
            Task::FitMultikernel => "fit-multikernel",
            Task::FitDict => "fit-dict",
            Task::FitSpline => "fit-spline",
            Task::FitMixed => "fit-mixed",
            Task::Dual => "dual",
            Task::Verify => "verify",
        }
    }
}

/// Every tunable of every task. Each field is optional so the same struct
/// serves for the TOML file, the command-line overrides and the echo in the
/// output document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transforms: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_timing: Option<bool>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        Settings { $($field: $top.$field.or($base.$field)),* }
    };
}

impl Settings {
    /// Fields set in `top` win.
    pub fn overlay(self, top: Settings) -> Settings {
        let base = self;
        overlay!(base, top; input, output, matrix, lambda, lambda1, lambda2, lambdas, kernel, kernels,
            outer, operator, penalty, grid, transforms, norm, seed, max_iter, tol, suite, trials,
            grid_output, no_timing)
    }

    /// Reads a TOML file; relative paths inside it are taken relative to the file.
    pub fn from_toml_file(path: &Path) -> CliResult<Settings> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut settings: Settings = toml::from_str(&text).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            message: format!("invalid config: {e}"),
        })?;
        let dir = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(inner) = p {
                if inner.is_relative() {
                    *inner = dir.join(&*inner);
                }
            }
        };
        fix(&mut settings.input);
        fix(&mut settings.output);
        fix(&mut settings.matrix);
        fix(&mut settings.grid_output);
        if let Some(ts) = &mut settings.transforms {
            for t in ts.iter_mut() {
                if let Some(file) = t.strip_prefix("file:") {
                    let p = Path::new(file);
                    if p.is_relative() {
                        *t = format!("file:{}", dir.join(p).display());
                    }
                }
            }
        }
        Ok(settings)
    }
}

/// Fully resolved configuration of one run; echoed into the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: Task,
    #[serde(flatten)]
    pub settings: Settings,
}

impl RunConfig {
    /// Merges the config file (if any) with flag overrides and fills in defaults.
    pub fn resolve(task: Task, config_file: Option<&Path>, flags: Settings) -> CliResult<RunConfig> {
        let file = match config_file {
            Some(p) => Settings::from_toml_file(p)?,
            None => Settings::default(),
        };
        let mut s = file.overlay(flags);
        s.seed.get_or_insert(0);
        s.no_timing.get_or_insert(false);
        if task != Task::Dual {
            s.max_iter.get_or_insert(DEFAULT_MAX_ITER);
            s.tol.get_or_insert(DEFAULT_TOL);
        }
        match task {
            Task::FitSpline => {
                s.grid.get_or_insert(DEFAULT_GRID);
                s.operator.get_or_insert_with(|| "D".into());
                s.penalty.get_or_insert_with(|| "tv".into());
            }
            Task::FitMultikernel => {
                s.outer.get_or_insert_with(|| "l2".into());
            }
            Task::FitDict => {
                s.transforms.get_or_insert_with(|| vec!["identity".into()]);
            }
            Task::FitMixed => {
                s.transforms.get_or_insert_with(|| vec!["identity".into(), "diff".into()]);
            }
            Task::Verify => {
                s.suite.get_or_insert_with(|| "all".into());
                s.trials.get_or_insert(DEFAULT_TRIALS);
            }
            Task::FitKernel | Task::Dual => {}
        }
        let cfg = RunConfig { task, settings: s };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        let s = &self.settings;
        for (name, value) in [("lambda", s.lambda), ("lambda1", s.lambda1), ("lambda2", s.lambda2)] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::config(format!("--{name} must be a positive number, got {v}")));
                }
            }
        }
        if let Some(ls) = &s.lambdas {
            if ls.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(CliError::config("--lambdas must all be positive"));
            }
        }
        if let Some(t) = s.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::config("--tol must be positive"));
            }
        }
        if self.task != Task::Verify && s.input.is_none() {
            return Err(CliError::config(format!("{} needs an input file", self.task.name())));
        }
        if !matches!(self.task, Task::Verify) && s.output.is_none() {
            return Err(CliError::config(format!("{} needs an output path", self.task.name())));
        }
        Ok(())
    }

    pub fn require<T: Clone>(&self, value: &Option<T>, flag: &str) -> CliResult<T> {
        value
            .clone()
            .ok_or_else(|| CliError::config(format!("{} requires --{flag}", self.task.name())))
    }

    pub fn seed(&self) -> u64 {
        self.settings.seed.unwrap_or(0)
    }

    pub fn max_iter(&self) -> usize {
        self.settings.max_iter.unwrap_or(DEFAULT_MAX_ITER)
    }

    pub fn tol(&self) -> f64 {
        self.settings.tol.unwrap_or(DEFAULT_TOL)
    }
}
