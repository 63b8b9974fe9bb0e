//! Monotone finite-volume evolution of `∂_t u + ∂_x A(x,u) − ∂_xx u = 0`.
//!
//! One step is an explicit Engquist–Osher flux update followed by a
//! backward-Euler diffusion solve. Both halves are monotone, so ordered data
//! stay ordered and differences contract in L¹.

use crate::cell::CellSolution;
use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::linalg::{solve_cyclic_tridiagonal, solve_tridiagonal, tridiagonal_residual};
use crate::shock::{cell_value, ShockProfile};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Periodic,
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub kind: GridKind,
    pub x_left: f64,
    pub x_right: f64,
    pub n_cells: usize,
}

impl Grid1D {
    pub fn new(kind: GridKind, x_left: f64, x_right: f64, n_cells: usize) -> Result<Self> {
        if n_cells < 8 {
            return Err(Error::InvalidParameter(format!("n_cells must be >= 8 (got {n_cells})")));
        }
        let len = x_right - x_left;
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::InvalidParameter("need x_left < x_right".into()));
        }
        if kind == GridKind::Periodic && (len - len.round()).abs() > 1e-12 * len.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "a periodic grid must span a whole number of periods (got length {len})"
            )));
        }
        Ok(Self {
            kind,
            x_left,
            x_right,
            n_cells,
        })
    }

    pub fn periodic(n_cells: usize) -> Result<Self> {
        Self::new(GridKind::Periodic, 0.0, 1.0, n_cells)
    }

    pub fn line(x_left: f64, x_right: f64, n_cells: usize) -> Result<Self> {
        Self::new(GridKind::Line, x_left, x_right, n_cells)
    }

    pub fn dx(&self) -> f64 {
        (self.x_right - self.x_left) / self.n_cells as f64
    }

    pub fn measure(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn center(&self, j: usize) -> f64 {
        self.x_left + (j as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.center(j)).collect()
    }

    /// Ghost-cell centres just outside each end.
    pub fn ghost_centers(&self) -> (f64, f64) {
        let h = 0.5 * self.dx();
        (self.x_left - h, self.x_right + h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub grid: Grid1D,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("field values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.centers().into_iter().map(f).collect())
    }

    pub fn from_profile(grid: Grid1D, profile: &dyn StationaryProfile) -> Result<Self> {
        Self::new(grid, profile.sample(&grid.centers())?)
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.dx()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn rows(&self) -> Vec<[f64; 2]> {
        self.grid.centers().into_iter().zip(&self.values).map(|(x, &u)| [x, u]).collect()
    }
}

/// Something that can be sampled as a stationary state.
pub trait StationaryProfile {
    fn sample(&self, xs: &[f64]) -> Result<Vec<f64>>;
}

impl StationaryProfile for ShockProfile {
    fn sample(&self, xs: &[f64]) -> Result<Vec<f64>> {
        ShockProfile::sample(self, xs)
    }
}

impl StationaryProfile for CellSolution {
    fn sample(&self, xs: &[f64]) -> Result<Vec<f64>> {
        Ok(xs.iter().map(|&x| cell_value(self, x)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Boundary {
    Periodic,
    /// Time-constant ghost-cell values.
    Dirichlet { left: f64, right: f64 },
}

/// Ghost values taken from a stationary profile at the ghost-cell centres.
pub fn dirichlet_traces_from_profile(profile: &dyn StationaryProfile, grid: &Grid1D) -> Result<Boundary> {
    if grid.kind != GridKind::Line {
        return Err(Error::InvalidParameter("Dirichlet traces need a line grid".into()));
    }
    let (gl, gr) = grid.ghost_centers();
    let v = profile.sample(&[gl, gr])?;
    Ok(Boundary::Dirichlet { left: v[0], right: v[1] })
}

fn check_boundary(grid: &Grid1D, boundary: &Boundary) -> Result<()> {
    match (grid.kind, boundary) {
        (GridKind::Periodic, Boundary::Periodic) | (GridKind::Line, Boundary::Dirichlet { .. }) => Ok(()),
        _ => Err(Error::InvalidParameter(format!(
            "boundary {boundary:?} does not fit a {:?} grid",
            grid.kind
        ))),
    }
}

/// Interface `k` sits at `x_left + k·dx`. Periodic grids use interfaces
/// `1..=n` (interface `n` wraps to cell 0); line grids use `0..=n` with ghosts.
fn neighbours(values: &[f64], boundary: &Boundary, k: usize) -> (f64, f64) {
    let n = values.len();
    match *boundary {
        Boundary::Periodic => (values[k - 1], values[k % n]),
        Boundary::Dirichlet { left, right } => {
            let l = if k == 0 { left } else { values[k - 1] };
            let r = if k == n { right } else { values[k] };
            (l, r)
        }
    }
}

fn interface_range(n: usize, boundary: &Boundary) -> std::ops::RangeInclusive<usize> {
    match boundary {
        Boundary::Periodic => 1..=n,
        Boundary::Dirichlet { .. } => 0..=n,
    }
}

/// `max |∂_u A|` over every interface position and its two adjacent states.
pub fn max_wave_speed(flux: &FluxModel, grid: &Grid1D, values: &[f64], boundary: &Boundary) -> f64 {
    let dx = grid.dx();
    interface_range(values.len(), boundary)
        .map(|k| {
            let y = grid.x_left + k as f64 * dx;
            let (l, r) = neighbours(values, boundary, k);
            flux.d_u(y, l).abs().max(flux.d_u(y, r).abs())
        })
        .fold(0.0, f64::max)
}

/// Largest admissible step for the given field.
pub fn cfl_bound(flux: &FluxModel, field: &Field, boundary: &Boundary, cfl_number: f64) -> f64 {
    let a = max_wave_speed(flux, &field.grid, &field.values, boundary);
    if a > 0.0 {
        cfl_number * field.grid.dx() / a
    } else {
        f64::INFINITY
    }
}

/// Tolerances and limits of a single step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLimits {
    pub cfl_number: f64,
    pub max_dt: f64,
    /// Residual accepted from the tridiagonal solve, relative to `1 + ‖u‖∞`.
    pub solver_tol: f64,
}

impl Default for StepLimits {
    fn default() -> Self {
        Self {
            cfl_number: 0.45,
            max_dt: f64::INFINITY,
            solver_tol: 1e-10,
        }
    }
}

/// Outcome of one step: the new values and the net mass that entered
/// through the two ends (advective plus diffusive flux, times `dt`).
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub values: Vec<f64>,
    pub inflow: f64,
}

/// Advance one field by `dt`.
pub fn step(flux: &FluxModel, field: &Field, dt: f64, boundary: &Boundary, limits: &StepLimits) -> Result<Field> {
    let out = step_values(flux, &field.grid, &field.values, dt, boundary, limits)?;
    Ok(Field {
        grid: field.grid,
        values: out.values,
    })
}

pub fn step_values(
    flux: &FluxModel,
    grid: &Grid1D,
    values: &[f64],
    dt: f64,
    boundary: &Boundary,
    limits: &StepLimits,
) -> Result<StepOutput> {
    check_boundary(grid, boundary)?;
    if values.len() != grid.n_cells {
        return Err(Error::GridMismatch);
    }
    if !(dt > 0.0) {
        return Err(Error::SolverFailure(format!("time step must be positive (got {dt})")));
    }
    let dx = grid.dx();
    let a = max_wave_speed(flux, grid, values, boundary);
    let bound = if a > 0.0 { limits.cfl_number * dx / a } else { f64::INFINITY }.min(limits.max_dt);
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }
    let n = values.len();
    let fluxes: Vec<f64> = interface_range(n, boundary)
        .map(|k| {
            let (l, r) = neighbours(values, boundary, k);
            flux.eo_flux(grid.x_left + k as f64 * dx, l, r)
        })
        .collect();
    let lam = dt / dx;
    // F_{j-1/2} and F_{j+1/2} for cell j
    let (left_of, right_of): (Box<dyn Fn(usize) -> f64>, Box<dyn Fn(usize) -> f64>) = match boundary {
        Boundary::Periodic => (
            Box::new(|j: usize| fluxes[(j + n - 1) % n]),
            Box::new(|j: usize| fluxes[j]),
        ),
        Boundary::Dirichlet { .. } => (Box::new(|j: usize| fluxes[j]), Box::new(|j: usize| fluxes[j + 1])),
    };
    let mut rhs: Vec<f64> = (0..n).map(|j| values[j] - lam * (right_of(j) - left_of(j))).collect();
    let r = dt / (dx * dx);
    let sub = vec![-r; n];
    let sup = vec![-r; n];
    let diag = vec![1.0 + 2.0 * r; n];
    let (new, inflow) = match *boundary {
        Boundary::Periodic => {
            let x = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs)?;
            check_residual(&sub, &diag, &sup, &x, &rhs, true, limits)?;
            (x, 0.0)
        }
        Boundary::Dirichlet { left, right } => {
            rhs[0] += r * left;
            rhs[n - 1] += r * right;
            let x = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
            check_residual(&sub, &diag, &sup, &x, &rhs, false, limits)?;
            let advective = dt * (fluxes[0] - fluxes[n]);
            let diffusive = lam * ((left - x[0]) + (right - x[n - 1]));
            (x, advective + diffusive)
        }
    };
    Ok(StepOutput { values: new, inflow })
}

fn check_residual(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    x: &[f64],
    rhs: &[f64],
    cyclic: bool,
    limits: &StepLimits,
) -> Result<()> {
    let scale = 1.0 + rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let res = tridiagonal_residual(sub, diag, sup, x, rhs, cyclic);
    if !(res <= limits.solver_tol * scale) {
        return Err(Error::SolverFailure(format!("diffusion solve residual {res:e}")));
    }
    Ok(())
}

/// When observers fire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "every", rename_all = "lowercase")]
pub enum Cadence {
    /// At multiples of this time; steps are shortened to land on them.
    Time(f64),
    /// Every this many steps.
    Steps(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub cfl_number: f64,
    pub max_dt: f64,
    pub boundary: Boundary,
    pub solver_tol: f64,
    pub cadence: Cadence,
    /// Keep a copy of the field at every record.
    pub store_fields: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            cfl_number: 0.45,
            max_dt: f64::INFINITY,
            boundary: Boundary::Periodic,
            solver_tol: 1e-10,
            cadence: Cadence::Time(0.1),
            store_fields: false,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_number > 0.0 && self.cfl_number < 1.0) {
            return Err(Error::InvalidParameter(format!("cfl_number must be in (0,1) (got {})", self.cfl_number)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter("t_end must be finite and >= 0".into()));
        }
        if !(self.max_dt > 0.0) || !(self.solver_tol > 0.0) {
            return Err(Error::InvalidParameter("max_dt and solver_tol must be positive".into()));
        }
        match self.cadence {
            Cadence::Time(dt) if !(dt > 0.0) => Err(Error::InvalidParameter("cadence time must be positive".into())),
            Cadence::Steps(0) => Err(Error::InvalidParameter("cadence steps must be positive".into())),
            _ => Ok(()),
        }
    }

    fn limits(&self) -> StepLimits {
        StepLimits {
            cfl_number: self.cfl_number,
            max_dt: self.max_dt,
            solver_tol: self.solver_tol,
        }
    }
}

/// Snapshot handed to ensemble observers.
pub struct Snapshot<'a> {
    pub t: f64,
    pub step: usize,
    pub fields: &'a [Field],
    /// Net inflow through the ends per member since `t = 0`.
    pub ledgers: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct EnsembleOutcome {
    pub fields: Vec<Field>,
    pub ledgers: Vec<f64>,
    pub t: f64,
    pub steps: usize,
}

/// Evolve several fields on the same grid with a common time step (the
/// smallest admissible for any member), so that discrete comparison and
/// contraction apply between members. The observer runs at `t = 0`, at
/// every cadence point and at `t_end`.
pub fn evolve_ensemble(
    flux: &FluxModel,
    fields: Vec<Field>,
    config: &EvolveConfig,
    observer: &mut dyn FnMut(&Snapshot) -> Result<()>,
) -> Result<EnsembleOutcome> {
    let boundaries = vec![config.boundary; fields.len()];
    evolve_ensemble_with(flux, fields, &boundaries, config, observer)
}

/// As [`evolve_ensemble`] with one boundary per member (`config.boundary`
/// is ignored).
pub fn evolve_ensemble_with(
    flux: &FluxModel,
    fields: Vec<Field>,
    boundaries: &[Boundary],
    config: &EvolveConfig,
    observer: &mut dyn FnMut(&Snapshot) -> Result<()>,
) -> Result<EnsembleOutcome> {
    config.validate()?;
    let Some(first) = fields.first() else {
        return Err(Error::InsufficientData("empty ensemble".into()));
    };
    let grid = first.grid;
    if fields.iter().any(|f| f.grid != grid) || boundaries.len() != fields.len() {
        return Err(Error::GridMismatch);
    }
    for b in boundaries {
        check_boundary(&grid, b)?;
    }
    let limits = config.limits();
    let mut fields = fields;
    let mut ledgers = vec![0.0; fields.len()];
    let mut t = 0.0;
    let mut steps = 0usize;
    observer(&Snapshot {
        t,
        step: 0,
        fields: &fields,
        ledgers: &ledgers,
    })?;
    let mut next_obs = match config.cadence {
        Cadence::Time(every) => every.min(config.t_end),
        Cadence::Steps(_) => config.t_end,
    };
    let time_tol = 1e-12 * config.t_end.max(1.0);
    while t < config.t_end - time_tol {
        let bound = fields
            .iter()
            .zip(boundaries)
            .map(|(f, b)| cfl_bound(flux, f, b, config.cfl_number))
            .fold(config.max_dt, f64::min);
        let target = match config.cadence {
            Cadence::Time(_) => next_obs,
            Cadence::Steps(_) => config.t_end,
        };
        let remaining = target - t;
        let dt = if remaining <= bound * (1.0 + 1e-12) { remaining } else { bound };
        let outs: Vec<Result<StepOutput>> = fields
            .par_iter()
            .zip(boundaries)
            .map(|(f, b)| step_values(flux, &grid, &f.values, dt, b, &limits))
            .collect();
        for (i, out) in outs.into_iter().enumerate() {
            let out = out.map_err(|e| Error::EvolveFailure {
                t,
                source: Box::new(e),
            })?;
            fields[i].values = out.values;
            ledgers[i] += out.inflow;
        }
        steps += 1;
        let landed = (target - (t + dt)).abs() <= time_tol;
        t = if landed { target } else { t + dt };
        let fire = match config.cadence {
            Cadence::Time(every) => {
                if landed {
                    next_obs = (next_obs + every).min(config.t_end);
                    true
                } else {
                    false
                }
            }
            Cadence::Steps(k) => steps % k == 0 || landed,
        };
        if fire {
            observer(&Snapshot {
                t,
                step: steps,
                fields: &fields,
                ledgers: &ledgers,
            })?;
        }
    }
    Ok(EnsembleOutcome {
        fields,
        ledgers,
        t,
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub step: usize,
    pub mass: f64,
    pub ledger: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// Norms of the difference to the reference field, when one was given.
    pub diff: Option<DiffNorms>,
    pub field: Option<Field>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub final_field: Field,
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }
}

/// Evolve a single field, recording norms (and the difference to
/// `reference`, if given) at the configured cadence.
pub fn evolve(flux: &FluxModel, field0: &Field, config: &EvolveConfig, reference: Option<&Field>) -> Result<Trajectory> {
    if let Some(r) = reference {
        if r.grid != field0.grid {
            return Err(Error::GridMismatch);
        }
    }
    let mut records = Vec::new();
    let outcome = evolve_ensemble(flux, vec![field0.clone()], config, &mut |s| {
        let f = &s.fields[0];
        let own = norms_of(&f.values, f.grid.dx());
        records.push(Record {
            t: s.t,
            step: s.step,
            mass: f.mass(),
            ledger: s.ledgers[0],
            l1: own.l1,
            l2: own.l2,
            linf: own.linf,
            diff: reference.map(|r| diff_norms(f, r)).transpose()?,
            field: config.store_fields.then(|| f.clone()),
        });
        Ok(())
    })?;
    Ok(Trajectory {
        records,
        final_field: outcome.fields.into_iter().next().expect("one member"),
        steps: outcome.steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub signed_mass: f64,
}

fn norms_of(d: &[f64], dx: f64) -> DiffNorms {
    DiffNorms {
        l1: d.iter().map(|v| v.abs()).sum::<f64>() * dx,
        l2: (d.iter().map(|v| v * v).sum::<f64>() * dx).sqrt(),
        linf: d.iter().fold(0.0, |m, v| m.max(v.abs())),
        signed_mass: d.iter().sum::<f64>() * dx,
    }
}

/// Discrete norms of `a − b` with cell measure `dx`.
pub fn diff_norms(a: &Field, b: &Field) -> Result<DiffNorms> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let d: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
    Ok(norms_of(&d, a.grid.dx()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{burgers, make_linear_flux};
    use crate::periodic::FourierSeries;

    #[test]
    fn grid_validation() {
        assert!(Grid1D::periodic(4).is_err());
        assert!(Grid1D::new(GridKind::Periodic, 0.0, 1.5, 16).is_err());
        assert!(Grid1D::new(GridKind::Periodic, -1.0, 2.0, 16).is_ok());
        assert!(Grid1D::line(1.0, 0.0, 16).is_err());
    }

    #[test]
    fn constant_state_is_fixed() {
        let g = Grid1D::periodic(32).unwrap();
        let f = Field::new(g, vec![0.7; 32]).unwrap();
        let out = step(&burgers(), &f, 0.01, &Boundary::Periodic, &StepLimits::default()).unwrap();
        assert!(out.values.iter().all(|v| (v - 0.7).abs() < 1e-15));
    }

    #[test]
    fn cfl_enforced() {
        let g = Grid1D::periodic(32).unwrap();
        let f = Field::new(g, vec![2.0; 32]).unwrap();
        let bound = cfl_bound(&burgers(), &f, &Boundary::Periodic, 0.45);
        assert!((bound - 0.45 / 32.0 / 2.0).abs() < 1e-12);
        let err = step(&burgers(), &f, 2.0 * bound, &Boundary::Periodic, &StepLimits::default());
        assert!(matches!(err, Err(Error::CflViolation { .. })));
    }

    #[test]
    fn upwind_against_dense_reference() {
        // a₀ u with a₀ > 0: upwind then (I − r Δ)⁻¹, checked with a dense solve
        let n = 32;
        let a0 = 0.8;
        let g = Grid1D::periodic(n).unwrap();
        let f = Field::from_fn(g, |x| (std::f64::consts::TAU * x).sin() + 0.3 * (3.0 * x).cos()).unwrap();
        let flux = make_linear_flux(FourierSeries::constant(a0));
        let dt = 0.4 / n as f64;
        let got = step(&flux, &f, dt, &Boundary::Periodic, &StepLimits::default()).unwrap();
        let dx = g.dx();
        let lam = dt / dx;
        let r = dt / (dx * dx);
        let star: Vec<f64> = (0..n).map(|j| f.values[j] - lam * a0 * (f.values[j] - f.values[(j + n - 1) % n])).collect();
        let mut m = vec![vec![0.0; n + 1]; n];
        for j in 0..n {
            m[j][j] = 1.0 + 2.0 * r;
            m[j][(j + 1) % n] -= r;
            m[j][(j + n - 1) % n] -= r;
            m[j][n] = star[j];
        }
        // Gauss–Jordan with partial pivoting
        for c in 0..n {
            let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
            m.swap(c, p);
            for rr in 0..n {
                if rr != c {
                    let k = m[rr][c] / m[c][c];
                    for cc in c..=n {
                        m[rr][cc] -= k * m[c][cc];
                    }
                }
            }
        }
        for j in 0..n {
            assert!((got.values[j] - m[j][n] / m[j][j]).abs() < 1e-13);
        }
    }

    #[test]
    fn periodic_mass_conserved() {
        let g = Grid1D::periodic(64).unwrap();
        let f = Field::from_fn(g, |x| 1.5 * (std::f64::consts::TAU * x).sin() + 0.2).unwrap();
        let cfg = EvolveConfig {
            t_end: 0.5,
            ..Default::default()
        };
        let tr = evolve(&burgers(), &f, &cfg, None).unwrap();
        let m0 = tr.records[0].mass;
        for r in &tr.records {
            assert!((r.mass - m0).abs() < 1e-13);
        }
        let times = tr.times();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert!((times.last().unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_horizon_records_initial_only() {
        let g = Grid1D::periodic(16).unwrap();
        let f = Field::new(g, vec![0.0; 16]).unwrap();
        let cfg = EvolveConfig {
            t_end: 0.0,
            ..Default::default()
        };
        let tr = evolve(&burgers(), &f, &cfg, None).unwrap();
        assert_eq!(tr.records.len(), 1);
        assert_eq!(tr.steps, 0);
    }

    #[test]
    fn dirichlet_ledger_accounts_for_mass() {
        let g = Grid1D::line(-5.0, 5.0, 160).unwrap();
        let f = Field::from_fn(g, |x| -(x / 2.0).tanh() + 0.3 * (-x * x).exp()).unwrap();
        let cfg = EvolveConfig {
            t_end: 2.0,
            boundary: Boundary::Dirichlet { left: 0.5, right: -1.0 },
            ..Default::default()
        };
        let tr = evolve(&burgers(), &f, &cfg, None).unwrap();
        for r in &tr.records {
            assert!((r.mass - tr.records[0].mass - r.ledger).abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn diff_norms_basics() {
        let g = Grid1D::line(0.0, 1.0, 10).unwrap();
        let a = Field::new(g, vec![0.0; 10]).unwrap();
        let mut bv = vec![0.0; 10];
        bv[2] = 3.0;
        bv[5] = 3.0;
        let b = Field::new(g, bv).unwrap();
        let d = diff_norms(&b, &a).unwrap();
        assert!((d.l1 - 0.6).abs() < 1e-15 && (d.signed_mass - 0.6).abs() < 1e-15 && d.linf == 3.0);
        assert_eq!(diff_norms(&a, &a).unwrap().l1, 0.0);
        let other = Field::new(Grid1D::line(0.0, 2.0, 10).unwrap(), vec![0.0; 10]).unwrap();
        assert!(matches!(diff_norms(&a, &other), Err(Error::GridMismatch)));
    }
}
