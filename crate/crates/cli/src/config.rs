//! Experiment configuration: schema, loading, dotted-path overrides and
//! validation against the built-in catalogs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use ccmin::energy::catalog::{self, Params};
use ccmin::energy::{Family, ProblemSpec};
use ccmin::grid::{Grid, GridSpec};
use ccmin::solve::{Preconditioner, SolveConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Invalid configuration, tagged with the offending field or source position.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    pub problem: ProblemConfig,
    pub task: TaskConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub family: String,
    pub grid: GridConfig,
    #[serde(default)]
    pub lagrangian: Option<EntryConfig>,
    #[serde(default)]
    pub nonlinearity: Option<EntryConfig>,
    #[serde(default)]
    pub constraint: Option<EntryConfig>,
    #[serde(default)]
    pub components: Option<usize>,
    /// Hardy coefficient.
    #[serde(default)]
    pub mu: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridConfig {
    Line {
        #[serde(default = "default_line_extent")]
        x_max: f64,
        #[serde(default = "default_line_n")]
        n: usize,
    },
    Radial {
        dim: usize,
        #[serde(default = "default_radial_extent")]
        r_max: f64,
        #[serde(default = "default_radial_n")]
        n: usize,
    },
    Cylindrical {
        k: usize,
        dim: usize,
        #[serde(default = "default_cyl_extent")]
        s_max: f64,
        #[serde(default = "default_cyl_extent")]
        w_max: f64,
        #[serde(default = "default_cyl_n")]
        ns: usize,
        #[serde(default = "default_cyl_n")]
        nw: usize,
    },
}

fn default_line_extent() -> f64 {
    40.0
}
fn default_line_n() -> usize {
    4096
}
fn default_radial_extent() -> f64 {
    20.0
}
fn default_radial_n() -> usize {
    2048
}
fn default_cyl_extent() -> f64 {
    20.0
}
fn default_cyl_n() -> usize {
    256
}

impl GridConfig {
    pub fn spec(&self) -> GridSpec {
        match *self {
            GridConfig::Line { x_max, n } => GridSpec::Line { x_max, n },
            GridConfig::Radial { dim, r_max, n } => GridSpec::Radial { dim, r_max, n },
            GridConfig::Cylindrical {
                k,
                dim,
                s_max,
                w_max,
                ns,
                nw,
            } => GridSpec::Cylindrical {
                k,
                dim,
                s_max,
                w_max,
                ns,
                nw,
            },
        }
    }
}

/// A catalog entry by name with its parameter table.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EntryConfig {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MInf {
    #[default]
    Zero,
    Autonomous,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskConfig {
    Solve {
        c: f64,
    },
    Sweep {
        c_list: Vec<f64>,
        /// Problem at infinity for the subadditivity check.
        #[serde(default)]
        m_inf: MInf,
        /// Exponent of the homogeneity bound, in units of `c`.
        #[serde(default)]
        alpha: Option<f64>,
    },
    CertifyChoquard {
        c: f64,
        t_grid: Vec<f64>,
        /// Width of the Gaussian seed `exp(-(r / width)^2)`.
        #[serde(default = "one")]
        seed_width: f64,
    },
    CertifyQuasilinear {
        theta_grid: Vec<f64>,
    },
    Rho0 {
        lo: f64,
        hi: f64,
        #[serde(default = "default_rho0_tol")]
        tol: f64,
    },
    Audit {
        /// Also solve at this level and audit the minimizer.
        #[serde(default)]
        c: Option<f64>,
        #[serde(default = "default_widths")]
        gaussian_widths: Vec<f64>,
    },
    SurgeryDemo {
        c: f64,
        plateau_mass: f64,
        anchor_radius: f64,
        /// Half distance between the two copies in the dip-filling demo.
        dip_offset: f64,
        /// The minimizer is cut off beyond this radius before mass is added far away.
        #[serde(default = "default_truncate")]
        truncate_radius: f64,
        extra_mass: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
}

fn one() -> f64 {
    1.0
}
fn default_rho0_tol() -> f64 {
    1e-8
}
fn default_widths() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_truncate() -> f64 {
    20.0
}
fn default_eps() -> f64 {
    1e-3
}

impl TaskConfig {
    pub fn name(&self) -> &'static str {
        match self {
            TaskConfig::Solve { .. } => "solve",
            TaskConfig::Sweep { .. } => "sweep",
            TaskConfig::CertifyChoquard { .. } => "certify_choquard",
            TaskConfig::CertifyQuasilinear { .. } => "certify_quasilinear",
            TaskConfig::Rho0 { .. } => "rho0",
            TaskConfig::Audit { .. } => "audit",
            TaskConfig::SurgeryDemo { .. } => "surgery_demo",
        }
    }
}

pub const TASKS: [&str; 7] = [
    "solve",
    "sweep",
    "certify_choquard",
    "certify_quasilinear",
    "rho0",
    "audit",
    "surgery_demo",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionerConfig {
    Identity,
    #[default]
    Sobolev,
}

/// Solver settings; absent fields take the library defaults.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub tau0: f64,
    pub backtrack: f64,
    pub stall_tol: f64,
    pub grad_tol: f64,
    pub symmetrize_every: usize,
    pub seed: u64,
    pub preconditioner: PreconditionerConfig,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolveConfig::default();
        SolverConfig {
            max_iters: d.max_iters,
            tau0: d.tau0,
            backtrack: d.backtrack,
            stall_tol: d.stall_tol,
            grad_tol: d.grad_tol,
            symmetrize_every: d.symmetrize_every,
            seed: d.seed,
            preconditioner: PreconditionerConfig::Sobolev,
            record_trace: d.record_trace,
        }
    }
}

impl SolverConfig {
    pub fn to_solve_config(&self) -> SolveConfig {
        SolveConfig {
            max_iters: self.max_iters,
            tau0: self.tau0,
            backtrack: self.backtrack,
            stall_tol: self.stall_tol,
            grad_tol: self.grad_tol,
            symmetrize_every: self.symmetrize_every,
            seed: self.seed,
            preconditioner: match self.preconditioner {
                PreconditionerConfig::Identity => Preconditioner::Identity,
                PreconditionerConfig::Sobolev => Preconditioner::Sobolev,
            },
            record_trace: self.record_trace,
        }
    }
}

// ------------------------------------------------------------------ loading

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Toml,
    Json,
}

fn format_of(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
        _ => Format::Toml,
    }
}

/// Parses `value` as a TOML value (number, boolean, array, quoted string);
/// anything else is taken as a bare string.
fn parse_override_value(value: &str) -> Value {
    match toml::from_str::<toml::Table>(&format!("v = {value}")) {
        Ok(mut t) => {
            serde_json::to_value(t.remove("v").expect("key present")).unwrap_or(Value::Null)
        }
        Err(_) => Value::String(value.to_string()),
    }
}

/// Applies a `dotted.path=value` override, creating intermediate tables.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<(), ConfigError> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| {
        ConfigError::new("--set", format!("`{spec}` is not of the form key=value"))
    })?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::new("--set", format!("bad key path `{path}`")));
    }
    let mut node = root;
    for (i, key) in keys.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| {
            ConfigError::new(
                keys[..i].join("."),
                "is not a table and cannot take sub-keys",
            )
        })?;
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), parse_override_value(raw.trim()));
            return Ok(());
        }
        node = obj
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("loop returns on the last key")
}

/// Reads a TOML or JSON config, applies overrides and deserializes it.
///
/// Without overrides the file is deserialized directly, so errors carry line
/// and column positions; with overrides they name the offending field.
pub fn load(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    parse(&text, format_of(path), overrides).map_err(|e| ConfigError {
        field: e.field,
        message: format!("{} ({})", e.message, path.display()),
    })
}

fn parse(
    text: &str,
    format: Format,
    overrides: &[String],
) -> Result<ExperimentConfig, ConfigError> {
    let invalid = |e: &dyn fmt::Display| {
        ConfigError::new("", format!("invalid config: {}", e.to_string().trim_end()))
    };
    if overrides.is_empty() {
        return match format {
            Format::Toml => toml::from_str(text).map_err(|e| invalid(&e)),
            Format::Json => serde_json::from_str(text).map_err(|e| invalid(&e)),
        };
    }
    let mut value: Value = match format {
        Format::Toml => toml::from_str(text).map_err(|e| invalid(&e))?,
        Format::Json => serde_json::from_str(text).map_err(|e| invalid(&e))?,
    };
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    serde_json::from_value(value).map_err(|e| invalid(&format!("{e} (after --set overrides)")))
}

pub fn parse_toml(text: &str, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    parse(text, Format::Toml, overrides)
}

pub fn parse_json(text: &str, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    parse(text, Format::Json, overrides)
}

// --------------------------------------------------------------- validation

/// A validated experiment, ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub problem: ProblemSpec,
    pub task: TaskConfig,
    pub solve: SolveConfig,
    pub out_dir: PathBuf,
}

fn entry<T>(
    field: &str,
    e: &EntryConfig,
    build: fn(&str, &Params) -> ccmin::Result<T>,
) -> Result<T, ConfigError> {
    build(&e.name, &e.params).map_err(|err| ConfigError::new(field, err))
}

fn check_level(field: &str, c: f64) -> Result<(), ConfigError> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(
            field,
            format!("must be positive and finite, got {c}"),
        ))
    }
}

fn check_list(field: &str, v: &[f64], ascending: bool) -> Result<(), ConfigError> {
    if v.is_empty() {
        return Err(ConfigError::new(field, "must not be empty"));
    }
    for &x in v {
        check_level(field, x)?;
    }
    if ascending && v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::new(field, "must be strictly ascending"));
    }
    Ok(())
}

fn require_family(p: &ProblemSpec, task: &str, family: Family) -> Result<(), ConfigError> {
    if p.family() == family {
        Ok(())
    } else {
        Err(ConfigError::new(
            "task.kind",
            format!("`{task}` needs family `{family}`, got `{}`", p.family()),
        ))
    }
}

/// Resolves names against the catalogs and checks parameter ranges.
pub fn validate(cfg: &ExperimentConfig, out_dir: PathBuf) -> Result<Experiment, ConfigError> {
    let pc = &cfg.problem;
    let family = Family::from_name(&pc.family).map_err(|_| {
        let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
        ConfigError::new(
            "problem.family",
            format!(
                "unknown family `{}` (expected one of {})",
                pc.family,
                names.join(", ")
            ),
        )
    })?;
    let grid = Grid::new(pc.grid.spec()).map_err(|e| ConfigError::new("problem.grid", e))?;
    let mut b = ProblemSpec::builder(family, grid);
    if let Some(e) = &pc.lagrangian {
        b = b.lagrangian(entry("problem.lagrangian", e, catalog::lagrangian)?);
    }
    if let Some(e) = &pc.nonlinearity {
        b = b.nonlinearity(entry("problem.nonlinearity", e, catalog::nonlinearity)?);
    }
    if let Some(e) = &pc.constraint {
        b = b.constraint(entry("problem.constraint", e, catalog::constraint)?);
    }
    if let Some(m) = pc.components {
        b = b.components(m);
    }
    if !(pc.mu.is_finite() && pc.mu >= 0.0) {
        return Err(ConfigError::new(
            "problem.mu",
            format!("must be nonnegative, got {}", pc.mu),
        ));
    }
    let problem = b
        .hardy(pc.mu)
        .build()
        .map_err(|e| ConfigError::new("problem", e))?;

    let solve = cfg.solver.to_solve_config();
    solve
        .validate()
        .map_err(|e| ConfigError::new("solver", e))?;

    let line_single = |task: &str| -> Result<(), ConfigError> {
        if !matches!(problem.grid().spec(), GridSpec::Line { .. }) || problem.components() != 1 {
            return Err(ConfigError::new(
                "task.kind",
                format!("`{task}` needs a single-component problem on a line grid"),
            ));
        }
        Ok(())
    };
    match &cfg.task {
        TaskConfig::Solve { c } => check_level("task.c", *c)?,
        TaskConfig::Sweep { c_list, alpha, .. } => {
            check_list("task.c_list", c_list, true)?;
            if let Some(a) = alpha {
                if !(*a >= 1.0 && a.is_finite()) {
                    return Err(ConfigError::new(
                        "task.alpha",
                        format!("must be at least 1, got {a}"),
                    ));
                }
            }
        }
        TaskConfig::CertifyChoquard {
            c,
            t_grid,
            seed_width,
        } => {
            require_family(&problem, "certify_choquard", Family::Choquard)?;
            check_level("task.c", *c)?;
            check_list("task.t_grid", t_grid, false)?;
            check_level("task.seed_width", *seed_width)?;
        }
        TaskConfig::CertifyQuasilinear { theta_grid } => {
            require_family(&problem, "certify_quasilinear", Family::Quasilinear)?;
            check_list("task.theta_grid", theta_grid, false)?;
        }
        TaskConfig::Rho0 { lo, hi, tol } => {
            require_family(&problem, "rho0", Family::BadialeRolando)?;
            check_level("task.lo", *lo)?;
            check_level("task.hi", *hi)?;
            if hi <= lo {
                return Err(ConfigError::new(
                    "task.hi",
                    format!("must exceed lo = {lo}, got {hi}"),
                ));
            }
            check_level("task.tol", *tol)?;
        }
        TaskConfig::Audit { c, gaussian_widths } => {
            if !matches!(problem.grid().spec(), GridSpec::Radial { dim: 3, .. }) {
                return Err(ConfigError::new(
                    "problem.grid",
                    "`audit` needs a radial grid with dim = 3",
                ));
            }
            if let Some(c) = c {
                check_level("task.c", *c)?;
            }
            check_list("task.gaussian_widths", gaussian_widths, false)?;
        }
        TaskConfig::SurgeryDemo {
            c,
            plateau_mass,
            anchor_radius,
            dip_offset,
            truncate_radius,
            extra_mass,
            eps,
        } => {
            line_single("surgery_demo")?;
            check_level("task.truncate_radius", *truncate_radius)?;
            check_level("task.c", *c)?;
            check_level("task.plateau_mass", *plateau_mass)?;
            check_level("task.anchor_radius", *anchor_radius)?;
            check_level("task.dip_offset", *dip_offset)?;
            check_level("task.extra_mass", *extra_mass)?;
            check_level("task.eps", *eps)?;
        }
    }
    Ok(Experiment {
        problem,
        task: cfg.task.clone(),
        solve,
        out_dir,
    })
}
