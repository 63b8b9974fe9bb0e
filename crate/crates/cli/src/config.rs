//! Run configuration (TOML). Unknown keys are rejected everywhere.

use homlab::cell::CellTolerances;
use homlab::evolve::{Boundary, Field, Grid1D, GridKind};
use homlab::flux::{
    burgers, make_homogeneous_flux, make_linear_flux, make_separable_convex_flux, FluxModel, Polynomial,
};
use homlab::periodic::FourierSeries;
use homlab::shock::ShockOptions;
use homlab::stability::{
    BoundParams, CopropertyParams, DriftParams, EntropyParams, PeriodicParams, ShockStabilityParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub flux: FluxSpec,
    #[serde(default = "GridSpec::default_periodic")]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub experiments: Vec<ExperimentSpec>,
}

/// Flux family and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FluxSpec {
    Burgers,
    /// `A(y, u) = a(y)·u`.
    Linear { coefficient: FourierSeries },
    /// `A(y, u) = V(y) + f(u)`, `f` convex with slopes `−a_minus`, `a_plus`
    /// beyond `±threshold`.
    SeparableConvex {
        potential: FourierSeries,
        a_minus: f64,
        a_plus: f64,
        threshold: f64,
    },
    /// `A(y, u) = Σ c_k u^k`.
    Homogeneous { coefficients: Vec<f64> },
}

impl FluxSpec {
    pub fn build(&self) -> Result<FluxModel, ConfigError> {
        Ok(match self {
            FluxSpec::Burgers => burgers(),
            FluxSpec::Linear { coefficient } => make_linear_flux(coefficient.clone()),
            FluxSpec::SeparableConvex {
                potential,
                a_minus,
                a_plus,
                threshold,
            } => make_separable_convex_flux(potential.clone(), *a_minus, *a_plus, *threshold)
                .map_err(|e| invalid("flux", e.to_string()))?,
            FluxSpec::Homogeneous { coefficients } => make_homogeneous_flux(Polynomial::new(coefficients.clone())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub kind: GridKind,
    #[serde(default)]
    pub x_left: f64,
    #[serde(default = "one")]
    pub x_right: f64,
    pub n_cells: usize,
}

fn one() -> f64 {
    1.0
}

impl GridSpec {
    fn default_periodic() -> Self {
        Self {
            kind: GridKind::Periodic,
            x_left: 0.0,
            x_right: 1.0,
            n_cells: 256,
        }
    }

    pub fn build(&self, key: &str) -> Result<Grid1D, ConfigError> {
        Grid1D::new(self.kind, self.x_left, self.x_right, self.n_cells).map_err(|e| invalid(key, e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default)]
    pub cell: Option<CellTolerances>,
    #[serde(default)]
    pub shock: Option<ShockOptions>,
}

impl ToleranceOverrides {
    pub fn cell(&self) -> CellTolerances {
        self.cell.unwrap_or_default()
    }

    pub fn shock(&self) -> ShockOptions {
        self.shock.unwrap_or_default()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let c = self.cell();
        for (k, v) in [
            ("tolerances.cell.period_tol", c.period_tol),
            ("tolerances.cell.mean_tol", c.mean_tol),
            ("tolerances.cell.residual_tol", c.residual_tol),
            ("tolerances.cell.ode.rtol", c.ode.rtol),
            ("tolerances.cell.ode.atol", c.ode.atol),
        ] {
            positive(k, v)?;
        }
        let s = self.shock();
        for (k, v) in [
            ("tolerances.shock.detect_tol", s.detect_tol),
            ("tolerances.shock.sign_tol", s.sign_tol),
            ("tolerances.shock.mass_tol", s.mass_tol),
            ("tolerances.shock.eps_clamp", s.eps_clamp),
            ("tolerances.shock.rate_floor", s.rate_floor),
            ("tolerances.shock.ode.rtol", s.ode.rtol),
            ("tolerances.shock.ode.atol", s.ode.atol),
        ] {
            positive(k, v)?;
        }
        Ok(())
    }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive, got {v}")))
    }
}

/// Initial data or perturbations, evaluated at cell centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// A Fourier series in `x` (period 1).
    Fourier { series: FourierSeries },
    Constant { value: f64 },
    /// `left` for `x < at`, `right` otherwise.
    Step { at: f64, left: f64, right: f64 },
    /// `base + height·exp(−((x − centre)/width)²)`.
    Bump {
        #[serde(default)]
        base: f64,
        height: f64,
        centre: f64,
        width: f64,
    },
    /// Zero-mass `height·s·exp(−s²)`, `s = (x − centre)/width`.
    Dipole { height: f64, centre: f64, width: f64 },
    /// Four seeded random modes around `mean`, periodic on the grid.
    Random { mean: f64, amplitude: f64 },
}

impl InitialData {
    pub fn field(&self, grid: Grid1D, seed: u64) -> homlab::Result<Field> {
        match self {
            InitialData::Fourier { series } => Field::from_fn(grid, |x| series.value(x)),
            InitialData::Constant { value } => Field::from_fn(grid, |_| *value),
            InitialData::Step { at, left, right } => Field::from_fn(grid, |x| if x < *at { *left } else { *right }),
            InitialData::Bump {
                base,
                height,
                centre,
                width,
            } => Field::from_fn(grid, |x| base + height * (-((x - centre) / width).powi(2)).exp()),
            InitialData::Dipole { height, centre, width } => Field::from_fn(grid, |x| {
                let s = (x - centre) / width;
                height * s * (-s * s).exp()
            }),
            InitialData::Random { mean, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let period = grid.measure();
                let modes: Vec<(f64, f64, f64)> = (1..=4)
                    .map(|k| (k as f64, rng.gen_range(-1.0..1.0) / k as f64, rng.gen_range(0.0..TAU)))
                    .collect();
                Field::from_fn(grid, |x| {
                    mean + amplitude * modes.iter().map(|&(k, c, ph)| c * (TAU * k * x / period + ph).sin()).sum::<f64>()
                })
            }
        }
    }
}

/// Flux constant and end states of a shock: either given roots or a table
/// range searched for `Ā = alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockSpec {
    pub alpha: f64,
    #[serde(default)]
    pub roots: Option<Vec<f64>>,
    #[serde(default = "default_p_range")]
    pub p_range: (f64, f64),
    #[serde(default = "default_table_points")]
    pub table_points: usize,
    /// `U(0)`; the middle of the admissible range when absent.
    #[serde(default)]
    pub xi0: Option<f64>,
}

fn default_p_range() -> (f64, f64) {
    (-4.0, 4.0)
}

fn default_table_points() -> usize {
    41
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentKind {
    /// Comparison, contraction and conservation on seeded random ordered pairs.
    CopropertyCheck {
        #[serde(default = "default_pairs")]
        pairs: usize,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "default_short_t")]
        t_end: f64,
        #[serde(default)]
        params: CopropertyParams,
    },
    PeriodicConvergence {
        initial: InitialData,
        #[serde(default)]
        params: PeriodicParams,
    },
    ShockStability {
        shock: ShockSpec,
        perturbation: InitialData,
        #[serde(default)]
        params: ShockStabilityParams,
    },
    LinearDrift {
        coefficient: FourierSeries,
        initial: InitialData,
        #[serde(default)]
        params: DriftParams,
    },
    WeightedEntropy {
        p: f64,
        initial: InitialData,
        #[serde(default)]
        params: EntropyParams,
    },
    EntropySweep {
        p: f64,
        initial: InitialData,
        amplitudes: Vec<f64>,
        #[serde(default)]
        params: EntropyParams,
    },
    HeatKernel {
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default = "default_heat_t")]
        t_end: f64,
        #[serde(default = "default_heat_dt")]
        max_dt: f64,
        #[serde(default = "default_heat_window")]
        window: (f64, f64),
    },
    UniformBound {
        initial: InitialData,
        #[serde(default = "default_bound_t")]
        t_end: f64,
        #[serde(default)]
        params: BoundParams,
    },
    /// Tabulate `Ā` and check its convexity (and Oleinik when `oleinik` is set).
    CellTable {
        p_min: f64,
        p_max: f64,
        n_points: usize,
        #[serde(default = "default_convexity_tol")]
        convexity_tol: f64,
        #[serde(default)]
        oleinik: Option<OleinikSpec>,
    },
    ShockBuild { shock: ShockSpec },
    GrowthProbe {
        y_range: (f64, f64),
        u_range: (f64, f64),
        #[serde(default = "default_probe_samples")]
        n_samples: usize,
        #[serde(default = "one")]
        m: f64,
        #[serde(default = "one")]
        n: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OleinikSpec {
    pub p_minus: f64,
    pub p_plus: f64,
    pub alpha: f64,
    #[serde(default)]
    pub margin: f64,
}

fn default_pairs() -> usize {
    100
}
fn default_short_t() -> f64 {
    0.5
}
fn default_sigma() -> f64 {
    0.5
}
fn default_heat_t() -> f64 {
    100.0
}
fn default_heat_dt() -> f64 {
    0.05
}
fn default_heat_window() -> (f64, f64) {
    (5.0, 100.0)
}
fn default_bound_t() -> f64 {
    100.0
}
fn default_convexity_tol() -> f64 {
    1e-8
}
fn default_probe_samples() -> usize {
    64
}

/// One `[[experiments]]` entry: optional `name` and `grid` next to the
/// fields of its `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "toml::Table", into = "toml::Table")]
pub struct ExperimentSpec {
    /// Output directory name; `<index>_<kind>` when absent.
    pub name: Option<String>,
    /// Per-experiment grid; the top-level grid when absent.
    pub grid: Option<GridSpec>,
    pub kind: ExperimentKind,
}

impl TryFrom<toml::Table> for ExperimentSpec {
    type Error = String;

    fn try_from(mut table: toml::Table) -> Result<Self, String> {
        let name = match table.remove("name") {
            Some(toml::Value::String(s)) => Some(s),
            Some(other) => return Err(format!("`name` must be a string, got {other}")),
            None => None,
        };
        let grid = table
            .remove("grid")
            .map(|g| g.try_into::<GridSpec>().map_err(|e| format!("in `grid`: {e}")))
            .transpose()?;
        let kind = toml::Value::Table(table).try_into::<ExperimentKind>().map_err(|e| e.to_string())?;
        Ok(Self { name, grid, kind })
    }
}

impl From<ExperimentSpec> for toml::Table {
    fn from(spec: ExperimentSpec) -> Self {
        let mut table = match toml::Value::try_from(&spec.kind) {
            Ok(toml::Value::Table(t)) => t,
            _ => unreachable!("experiment kinds serialise to tables"),
        };
        if let Some(n) = spec.name {
            table.insert("name".into(), toml::Value::String(n));
        }
        if let Some(g) = spec.grid {
            if let Ok(v) = toml::Value::try_from(g) {
                table.insert("grid".into(), v);
            }
        }
        table
    }
}

impl ExperimentKind {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ExperimentKind::CopropertyCheck { .. } => "coproperty_check",
            ExperimentKind::PeriodicConvergence { .. } => "periodic_convergence",
            ExperimentKind::ShockStability { .. } => "shock_stability",
            ExperimentKind::LinearDrift { .. } => "linear_drift",
            ExperimentKind::WeightedEntropy { .. } => "weighted_entropy",
            ExperimentKind::EntropySweep { .. } => "entropy_sweep",
            ExperimentKind::HeatKernel { .. } => "heat_kernel",
            ExperimentKind::UniformBound { .. } => "uniform_bound",
            ExperimentKind::CellTable { .. } => "cell_table",
            ExperimentKind::ShockBuild { .. } => "shock_build",
            ExperimentKind::GrowthProbe { .. } => "growth_probe",
        }
    }
}

impl ExperimentSpec {
    pub fn dir_name(&self, index: usize) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("{index:02}_{}", self.kind.kind_name()))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.flux.build()?;
        self.grid.build("grid")?;
        self.tolerances.validate()?;
        let mut names = std::collections::BTreeSet::new();
        for (i, e) in self.experiments.iter().enumerate() {
            let key = format!("experiments[{i}]");
            let grid = e.grid.unwrap_or(self.grid);
            grid.build(&format!("{key}.grid"))?;
            if let Some(kind) = e.kind.required_grid() {
                if grid.kind != kind {
                    return Err(invalid(
                        format!("{key}.grid"),
                        format!("{} needs a {kind:?} grid", e.kind.kind_name()).to_lowercase(),
                    ));
                }
            }
            let name = e.dir_name(i);
            if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
                return Err(invalid(format!("{key}.name"), "must be a plain directory name"));
            }
            if !names.insert(name.clone()) {
                return Err(invalid(format!("{key}.name"), format!("duplicate experiment name {name:?}")));
            }
            e.kind.validate(&key)?;
        }
        Ok(())
    }
}

impl ExperimentKind {
    /// Grid kind the experiment runs on; `None` when it uses no grid.
    /// `uniform_bound` follows its boundary condition.
    pub fn required_grid(&self) -> Option<GridKind> {
        match self {
            ExperimentKind::CopropertyCheck { .. } | ExperimentKind::PeriodicConvergence { .. } => Some(GridKind::Periodic),
            ExperimentKind::UniformBound { params, .. } => Some(match params.boundary {
                Boundary::Periodic => GridKind::Periodic,
                Boundary::Dirichlet { .. } => GridKind::Line,
            }),
            ExperimentKind::ShockStability { .. }
            | ExperimentKind::LinearDrift { .. }
            | ExperimentKind::WeightedEntropy { .. }
            | ExperimentKind::EntropySweep { .. }
            | ExperimentKind::HeatKernel { .. } => Some(GridKind::Line),
            ExperimentKind::CellTable { .. } | ExperimentKind::ShockBuild { .. } | ExperimentKind::GrowthProbe { .. } => None,
        }
    }

    fn validate(&self, key: &str) -> Result<(), ConfigError> {
        let k = |field: &str| format!("{key}.{field}");
        match self {
            ExperimentKind::CopropertyCheck { pairs, t_end, params, .. } => {
                if *pairs == 0 {
                    return Err(invalid(k("pairs"), "must be at least 1"));
                }
                positive(&k("t_end"), *t_end)?;
                positive(&k("params.contraction_tol"), params.contraction_tol)?;
                positive(&k("params.conservation_tol"), params.conservation_tol)?;
            }
            ExperimentKind::PeriodicConvergence { params, .. } => {
                positive(&k("params.t_end"), params.t_end)?;
                positive(&k("params.record_every"), params.record_every)?;
                positive(&k("params.linf_tol"), params.linf_tol)?;
            }
            ExperimentKind::ShockStability { params, shock, .. } => {
                positive(&k("params.t_end"), params.t_end)?;
                positive(&k("params.record_every"), params.record_every)?;
                positive(&k("params.theta"), params.theta)?;
                positive(&k("params.ledger_tol"), params.ledger_tol)?;
                shock.validate(&k("shock"))?;
            }
            ExperimentKind::LinearDrift { params, .. } => {
                positive(&k("params.t_end"), params.t_end)?;
                positive(&k("params.record_every"), params.record_every)?;
                positive(&k("params.drift_tol"), params.drift_tol)?;
                positive(&k("params.ledger_tol"), params.ledger_tol)?;
            }
            ExperimentKind::WeightedEntropy { params, .. } | ExperimentKind::EntropySweep { params, .. } => {
                positive(&k("params.t_end"), params.t_end)?;
                positive(&k("params.record_every"), params.record_every)?;
                positive(&k("params.smallness"), params.smallness)?;
                positive(&k("params.ledger_tol"), params.ledger_tol)?;
                if let ExperimentKind::EntropySweep { amplitudes, .. } = self {
                    if amplitudes.is_empty() || amplitudes.iter().any(|a| !(*a > 0.0)) {
                        return Err(invalid(k("amplitudes"), "need one or more positive amplitudes"));
                    }
                }
            }
            ExperimentKind::HeatKernel { sigma, t_end, max_dt, window } => {
                positive(&k("sigma"), *sigma)?;
                positive(&k("t_end"), *t_end)?;
                positive(&k("max_dt"), *max_dt)?;
                if !(window.0 > 0.0 && window.0 < window.1) {
                    return Err(invalid(k("window"), "need 0 < start < end"));
                }
            }
            ExperimentKind::UniformBound { t_end, params, .. } => {
                positive(&k("t_end"), *t_end)?;
                positive(&k("params.tol"), params.tol)?;
            }
            ExperimentKind::CellTable {
                p_min,
                p_max,
                n_points,
                convexity_tol,
                ..
            } => {
                if !(p_min < p_max) {
                    return Err(invalid(k("p_max"), "must exceed p_min"));
                }
                if *n_points < 3 {
                    return Err(invalid(k("n_points"), "must be at least 3"));
                }
                positive(&k("convexity_tol"), *convexity_tol)?;
            }
            ExperimentKind::ShockBuild { shock } => shock.validate(&k("shock"))?,
            ExperimentKind::GrowthProbe { n_samples, .. } => {
                if *n_samples < 2 {
                    return Err(invalid(k("n_samples"), "must be at least 2"));
                }
            }
        }
        Ok(())
    }
}

impl ShockSpec {
    fn validate(&self, key: &str) -> Result<(), ConfigError> {
        if let Some(r) = &self.roots {
            if r.len() < 2 {
                return Err(invalid(format!("{key}.roots"), "need at least two roots"));
            }
        }
        if !(self.p_range.0 < self.p_range.1) {
            return Err(invalid(format!("{key}.p_range"), "need p_min < p_max"));
        }
        if self.table_points < 3 {
            return Err(invalid(format!("{key}.table_points"), "must be at least 3"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg = RunConfig::from_toml("[flux]\nfamily = \"burgers\"\n").unwrap();
        assert!(cfg.experiments.is_empty());
        assert_eq!(cfg.grid.n_cells, 256);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::from_toml("fluxx = 1\n[flux]\nfamily = \"burgers\"\n").unwrap_err();
        assert!(err.to_string().contains("fluxx"), "{err}");
        let err = RunConfig::from_toml(
            "[flux]\nfamily = \"burgers\"\n[[experiments]]\nkind = \"heat_kernel\"\nsigmaa = 1.0\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("sigmaa"), "{err}");
    }

    #[test]
    fn unknown_keys_in_library_types_are_named() {
        let err = RunConfig::from_toml(
            "[flux]\nfamily = \"linear\"\ncoefficient = { mean = 1.0, cos = [0.5] }\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("cos"), "{err}");
        let err = RunConfig::from_toml("[flux]\nfamily = \"burgers\"\n[tolerances.cell.ode]\nrtoll = 1e-9\n").unwrap_err();
        assert!(err.to_string().contains("rtoll"), "{err}");
        let cfg = RunConfig::from_toml(
            "[flux]\nfamily = \"linear\"\ncoefficient = { mean = 1.0, terms = [{ k = 1, cos = 0.5, sin = 0.0 }] }\n",
        )
        .unwrap();
        assert_eq!(cfg.flux, FluxSpec::Linear { coefficient: FourierSeries::cosine(1.0, 0.5) });
    }

    #[test]
    fn nonpositive_tolerance_is_rejected() {
        let err = RunConfig::from_toml("[flux]\nfamily = \"burgers\"\n[tolerances.shock]\nmass_tol = -1.0\n").unwrap_err();
        assert!(err.to_string().contains("tolerances.shock.mass_tol"), "{err}");
    }

    #[test]
    fn initial_shapes() {
        let grid = Grid1D::line(-4.0, 4.0, 80).unwrap();
        let d = InitialData::Dipole {
            height: 1.0,
            centre: 0.0,
            width: 1.0,
        }
        .field(grid, 0)
        .unwrap();
        assert!(d.mass().abs() < 1e-12);
        let r1 = InitialData::Random { mean: 0.5, amplitude: 1.0 }.field(grid, 3).unwrap();
        let r2 = InitialData::Random { mean: 0.5, amplitude: 1.0 }.field(grid, 3).unwrap();
        assert_eq!(r1, r2);
    }
}
