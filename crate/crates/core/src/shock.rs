//! Standing viscous shocks `u' = A(x, u) − α` between two cell solutions.

use crate::cell::{find_rh_pairs, solve_cell_by_mean, CellSolution, CellTolerances, HomogenizedFluxTable};
use crate::error::{End, Error, Result};
use crate::flux::FluxModel;
use crate::ode::{Integrator, OdeOptions};
use crate::roots::{brent, RootOptions};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShockOptions {
    /// Samples per unit length; should divide the cell grid size.
    pub samples_per_period: usize,
    /// Initial half-length in periods.
    pub half_length: u32,
    /// Hard cap for automatic extension.
    pub max_half_length: u32,
    pub detect_tol: f64,
    pub sign_tol: f64,
    /// Relative mass tolerance: `|F| ≤ mass_tol·(1 + ‖u0‖₁)`.
    pub mass_tol: f64,
    pub eps_clamp: f64,
    /// Per-period distances below `rate_floor·(1 + scale)` count as round-off.
    pub rate_floor: f64,
    pub ode: OdeOptions,
}

impl Default for ShockOptions {
    fn default() -> Self {
        Self {
            samples_per_period: 64,
            half_length: 20,
            max_half_length: 200,
            detect_tol: 1e-7,
            sign_tol: 1e-10,
            mass_tol: 1e-8,
            eps_clamp: 1e-12,
            rate_floor: 1e-9,
            ode: OdeOptions {
                rtol: 1e-12,
                atol: 1e-12,
                ..OdeOptions::default()
            },
        }
    }
}

/// A flux constant together with its Rankine–Hugoniot means and cells.
#[derive(Debug, Clone)]
pub struct RhPair {
    pub alpha: f64,
    pub p_minus: f64,
    pub p_plus: f64,
    /// Every mean with `Ā = α` found in range, increasing; cells in the
    /// same order.
    pub roots: Vec<f64>,
    cells: Vec<CellSolution>,
    flux: FluxModel,
}

impl RhPair {
    /// Roots of `Ā = α` over the table range. The outermost pair bounds the
    /// band; all roots are asymptote candidates.
    pub fn from_table(table: &HomogenizedFluxTable, alpha: f64) -> Result<Self> {
        let roots = find_rh_pairs(table, alpha)?;
        if roots.len() < 2 {
            return Err(Error::Precondition(format!(
                "flux constant {alpha} has {} crossing(s) in the table range; a shock needs two",
                roots.len()
            )));
        }
        let cells = roots.iter().map(|&p| table.solve(p)).collect::<Result<Vec<_>>>()?;
        Self::from_cells(table.flux(), alpha, cells)
    }

    /// From explicitly known roots.
    pub fn from_roots(flux: &FluxModel, alpha: f64, roots: &[f64], tol: &CellTolerances) -> Result<Self> {
        let cells = roots
            .iter()
            .map(|&p| solve_cell_by_mean(flux, p, tol))
            .collect::<Result<Vec<_>>>()?;
        Self::from_cells(flux, alpha, cells)
    }

    fn from_cells(flux: &FluxModel, alpha: f64, mut cells: Vec<CellSolution>) -> Result<Self> {
        if cells.len() < 2 {
            return Err(Error::Precondition("a shock needs two end states".into()));
        }
        cells.sort_by(|a, b| a.p.total_cmp(&b.p));
        Ok(Self {
            alpha,
            p_minus: cells[0].p,
            p_plus: cells[cells.len() - 1].p,
            roots: cells.iter().map(|c| c.p).collect(),
            cells,
            flux: flux.clone(),
        })
    }

    pub fn flux(&self) -> &FluxModel {
        &self.flux
    }

    pub fn lower(&self) -> &CellSolution {
        &self.cells[0]
    }

    pub fn upper(&self) -> &CellSolution {
        &self.cells[self.cells.len() - 1]
    }

    pub fn candidates(&self) -> &[CellSolution] {
        &self.cells
    }

    /// Open interval of admissible `u(0)`.
    pub fn xi_range(&self) -> (f64, f64) {
        (self.lower().values[0], self.upper().values[0])
    }
}

/// `v(x)` of a cell at arbitrary `x`, reading the stored sample when `x`
/// falls on the cell grid.
pub fn cell_value(cell: &CellSolution, x: f64) -> f64 {
    let n = cell.n_grid();
    let pos = (x - x.floor()) * n as f64;
    let k = pos.round();
    if (pos - k).abs() < 1e-9 {
        cell.values[(k as usize) % n]
    } else {
        cell.value_at(x)
    }
}

#[derive(Debug, Clone)]
pub struct ShockProfile {
    pub alpha: f64,
    pub xi0: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub q_left: f64,
    pub q_right: f64,
    pub residual_left: f64,
    pub residual_right: f64,
    /// Fitted decay rates; 0 when not resolved.
    pub rate_left: f64,
    pub rate_right: f64,
    /// `max |−u' + A(x, u) − α|` over interior samples (4th-order differences).
    pub stationarity_residual: f64,
    /// Largest band excursion that was clamped.
    pub clamped: f64,
    left_cell: usize,
    right_cell: usize,
    pair: Arc<RhPair>,
    opts: ShockOptions,
}

impl ShockProfile {
    pub fn pair(&self) -> &RhPair {
        &self.pair
    }

    pub fn options(&self) -> &ShockOptions {
        &self.opts
    }

    pub fn half_length(&self) -> f64 {
        -self.grid[0]
    }

    pub fn left_cell(&self) -> &CellSolution {
        &self.pair.cells[self.left_cell]
    }

    pub fn right_cell(&self) -> &CellSolution {
        &self.pair.cells[self.right_cell]
    }

    pub fn asymptote(&self, end: End) -> &CellSolution {
        match end {
            End::Left => self.left_cell(),
            End::Right => self.right_cell(),
        }
    }

    pub fn resolved(&self) -> bool {
        self.residual_left <= self.opts.detect_tol && self.residual_right <= self.opts.detect_tol
    }

    pub fn sup_norm(&self) -> f64 {
        let tails = self.left_cell().values.iter().chain(&self.right_cell().values);
        self.values.iter().chain(tails).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Profile values at arbitrary sorted or unsorted positions, traced from
    /// `u(0) = xi0` (outside the sampled range too).
    pub fn sample(&self, xs: &[f64]) -> Result<Vec<f64>> {
        trace(&self.pair, self.xi0, xs, &self.opts).map(|t| t.0)
    }

    pub fn value_at(&self, x: f64) -> Result<f64> {
        Ok(self.sample(&[x])?[0])
    }

    /// Rows `(x, u, v_lower, v_upper)`.
    pub fn rows(&self) -> Vec<[f64; 4]> {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&x, &u)| [x, u, cell_value(self.pair.lower(), x), cell_value(self.pair.upper(), x)])
            .collect()
    }

    pub fn summary(&self) -> ShockSummary {
        ShockSummary {
            alpha: self.alpha,
            xi0: self.xi0,
            half_length: self.half_length(),
            q_left: self.q_left,
            q_right: self.q_right,
            residual_left: self.residual_left,
            residual_right: self.residual_right,
            rate_left: self.rate_left,
            rate_right: self.rate_right,
            stationarity_residual: self.stationarity_residual,
            p_minus: self.pair.p_minus,
            p_plus: self.pair.p_plus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockSummary {
    pub alpha: f64,
    pub xi0: f64,
    pub half_length: f64,
    pub q_left: f64,
    pub q_right: f64,
    pub residual_left: f64,
    pub residual_right: f64,
    pub rate_left: f64,
    pub rate_right: f64,
    pub stationarity_residual: f64,
    pub p_minus: f64,
    pub p_plus: f64,
}

/// Integrate `u' = A(x,u) − α` from `u(0) = xi0` to every position in `xs`,
/// forward for positive and backward for negative positions. Values are
/// checked against the band `[v(·,p⁻), v(·,p⁺)]`; excursions up to
/// `eps_clamp·(1 + band width)` plus four times the cells' period defects
/// are clamped and the largest one is returned.
fn trace(pair: &RhPair, xi0: f64, xs: &[f64], opts: &ShockOptions) -> Result<(Vec<f64>, f64)> {
    let flux = &pair.flux;
    let alpha = pair.alpha;
    let ode = OdeOptions {
        h_max: opts.ode.h_max.min(1.0 / opts.samples_per_period.max(1) as f64),
        ..opts.ode
    };
    let lo = pair.lower().min();
    let hi = pair.upper().max();
    let slack = 1.0 + (hi - lo);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![f64::NAN; xs.len()];
    let split = order.partition_point(|&i| xs[i] < 0.0);
    let (neg, pos) = order.split_at(split);
    for indices in [pos.to_vec(), neg.iter().rev().copied().collect::<Vec<_>>()] {
        let mut it = Integrator::new(|x, u: &[f64; 1]| [flux.eval(x, u[0]) - alpha], 0.0, [xi0], ode);
        for i in indices {
            let x = xs[i];
            match it.advance_to(x, &mut |u| u[0] < lo - slack || u[0] > hi + slack)? {
                Ok(u) => out[i] = u[0],
                Err(esc) => {
                    return Err(Error::BandEscape {
                        x: esc.at,
                        excess: (lo - esc.state[0]).max(esc.state[0] - hi),
                    })
                }
            }
        }
    }
    // the cells are only accurate to their period defect
    let allowance =
        opts.eps_clamp * slack + 4.0 * (pair.lower().period_defect + pair.upper().period_defect);
    let mut clamped = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let below = cell_value(pair.lower(), x) - out[i];
        let above = out[i] - cell_value(pair.upper(), x);
        let excess = below.max(above);
        if excess > allowance {
            return Err(Error::BandEscape { x, excess });
        }
        if below > 0.0 {
            out[i] += below;
        } else if above > 0.0 {
            out[i] -= above;
        }
        clamped = clamped.max(excess);
    }
    Ok((out, clamped))
}

/// Per-period sup-distances between samples and a cell, ordered from the
/// given end inward. Period `k` holds samples at distance `[k, k+1)` from
/// the end sample.
fn period_distances(xs: &[f64], values: &[f64], cell: &CellSolution, end: End) -> Vec<f64> {
    let (x_first, x_last) = (xs[0], xs[xs.len() - 1]);
    let periods = ((x_last - x_first) + 1e-9).floor() as usize;
    let mut d = vec![0.0f64; periods];
    for (&x, &u) in xs.iter().zip(values) {
        let from_end = match end {
            End::Left => x - x_first,
            End::Right => x_last - x,
        };
        let k = (from_end + 1e-9).floor() as usize;
        if k < periods {
            d[k] = d[k].max((u - cell_value(cell, x)).abs());
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticState {
    pub q: f64,
    pub candidate: usize,
    /// Sup-distance over the last full period.
    pub residual: f64,
    /// The per-period distance to the selected cell does not grow towards
    /// the end over the last three periods.
    pub monotone_tail: bool,
}

/// Pick the candidate cell closest to the samples over the last full
/// period at `end`.
pub fn detect_asymptotic_state(
    xs: &[f64],
    values: &[f64],
    end: End,
    candidates: &[CellSolution],
    detect_tol: f64,
) -> Result<AsymptoticState> {
    let state = closest_candidate(xs, values, end, candidates)?;
    if state.residual > detect_tol {
        return Err(Error::AsymptoteUnresolved {
            end,
            residual: state.residual,
        });
    }
    Ok(state)
}

fn closest_candidate(xs: &[f64], values: &[f64], end: End, candidates: &[CellSolution]) -> Result<AsymptoticState> {
    if xs.len() != values.len() || xs.len() < 2 || xs[xs.len() - 1] - xs[0] < 3.0 - 1e-9 {
        return Err(Error::InsufficientData("asymptote detection needs three whole periods".into()));
    }
    if candidates.is_empty() {
        return Err(Error::InsufficientData("no candidate cells".into()));
    }
    let (candidate, d) = candidates
        .iter()
        .map(|c| period_distances(xs, values, c, end))
        .enumerate()
        .min_by(|a, b| a.1[0].total_cmp(&b.1[0]))
        .expect("non-empty");
    let slack = 1e-12 * (1.0 + d[0]);
    Ok(AsymptoticState {
        q: candidates[candidate].p,
        candidate,
        residual: d[0],
        monotone_tail: d[0] <= d[1] + slack && d[1] <= d[2] + slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignCheck {
    pub abar_left: f64,
    pub abar_right: f64,
    pub admissible: bool,
}

/// `ā = ⟨∂_u A(·, v(·, q))⟩` at both ends; admissible when the left value is
/// non-negative and the right one non-positive (up to `sign_tol`).
pub fn end_state_sign_check(cell_left: &CellSolution, cell_right: &CellSolution, sign_tol: f64) -> SignCheck {
    let abar_left = cell_left.mean_flux_slope();
    let abar_right = cell_right.mean_flux_slope();
    SignCheck {
        abar_left,
        abar_right,
        admissible: abar_left >= -sign_tol && abar_right <= sign_tol,
    }
}

/// Least-squares exponential rate of per-period distances on the side
/// `end` of the origin, over periods where the distance is below 1% of its
/// largest value and above `100·floor`.
fn fit_tail_rate(xs: &[f64], values: &[f64], cell: &CellSolution, end: End, floor: f64) -> Result<f64> {
    // distances measured from the origin outward
    let inward = match end {
        End::Right => End::Left,
        End::Left => End::Right,
    };
    let (sx, sv): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(values)
        .filter(|(&x, _)| match end {
            End::Right => x >= 0.0,
            End::Left => x <= 0.0,
        })
        .map(|(a, b)| (*a, *b))
        .unzip();
    if sx.len() < 2 {
        return Err(Error::InsufficientData("no samples on this side".into()));
    }
    let d = period_distances(&sx, &sv, cell, inward);
    let top = d.iter().copied().fold(0.0, f64::max);
    let window: Vec<(f64, f64)> = d
        .iter()
        .enumerate()
        .skip_while(|(_, &v)| v > 1e-2 * top)
        .take_while(|(_, &v)| v > 100.0 * floor)
        .map(|(k, &v)| (k as f64, v.ln()))
        .collect();
    if window.len() < 5 {
        let hit = d.iter().position(|&v| v <= 100.0 * floor).unwrap_or(d.len()).max(1);
        let lower_bound = if top > 0.0 { ((top / (100.0 * floor)).ln() / hit as f64).max(0.0) } else { 0.0 };
        return Err(Error::RateUnresolved {
            end,
            periods: window.len(),
            lower_bound,
        });
    }
    let n = window.len() as f64;
    let mx = window.iter().map(|w| w.0).sum::<f64>() / n;
    let my = window.iter().map(|w| w.1).sum::<f64>() / n;
    let sxy = window.iter().map(|w| (w.0 - mx) * (w.1 - my)).sum::<f64>();
    let sxx = window.iter().map(|w| (w.0 - mx).powi(2)).sum::<f64>();
    Ok((-sxy / sxx).max(0.0))
}

/// Exponential decay rate per unit length of `|u − v(·,q)|` towards `end`.
pub fn estimate_exponential_rate(profile: &ShockProfile, cell: &CellSolution, end: End) -> Result<f64> {
    let scale = 1.0 + profile.sup_norm();
    fit_tail_rate(&profile.grid, &profile.values, cell, end, profile.opts.rate_floor * scale)
}

/// Build the standing shock through `u(0) = xi0` on `[−L, L]`, extending `L`
/// (doubling, up to the cap) until both ends are resolved.
pub fn build_shock(pair: &RhPair, xi0: f64, opts: &ShockOptions) -> Result<ShockProfile> {
    let pair = Arc::new(pair.clone());
    build_shared(&pair, xi0, opts)
}

fn build_shared(pair: &Arc<RhPair>, xi0: f64, opts: &ShockOptions) -> Result<ShockProfile> {
    let (lo, hi) = pair.xi_range();
    if !(xi0 > lo && xi0 < hi) {
        return Err(Error::Precondition(format!(
            "xi0 = {xi0} must lie strictly between v(0,p-) = {lo} and v(0,p+) = {hi}"
        )));
    }
    if opts.samples_per_period < 4 || opts.half_length < 3 {
        return Err(Error::InvalidParameter("need samples_per_period >= 4 and half_length >= 3".into()));
    }
    let mut half = opts.half_length;
    loop {
        let profile = build_fixed(pair, xi0, half, opts)?;
        if profile.resolved() || half >= opts.max_half_length {
            return Ok(profile);
        }
        half = (2 * half).min(opts.max_half_length);
    }
}

fn build_fixed(pair: &Arc<RhPair>, xi0: f64, half: u32, opts: &ShockOptions) -> Result<ShockProfile> {
    let spp = opts.samples_per_period;
    let n = 2 * half as usize * spp + 1;
    let grid: Vec<f64> = (0..n).map(|i| -(half as f64) + i as f64 / spp as f64).collect();
    let (values, clamped) = trace(pair, xi0, &grid, opts)?;
    let left = closest_candidate(&grid, &values, End::Left, &pair.cells)?;
    let right = closest_candidate(&grid, &values, End::Right, &pair.cells)?;
    let scale = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = opts.rate_floor * scale;
    let rate = |cell: &CellSolution, end| fit_tail_rate(&grid, &values, cell, end, floor).unwrap_or(0.0);
    let rate_left = rate(&pair.cells[left.candidate], End::Left);
    let rate_right = rate(&pair.cells[right.candidate], End::Right);
    let stationarity_residual = profile_residual(&pair.flux, pair.alpha, &grid, &values);
    Ok(ShockProfile {
        alpha: pair.alpha,
        xi0,
        grid,
        values,
        q_left: left.q,
        q_right: right.q,
        residual_left: left.residual,
        residual_right: right.residual,
        rate_left,
        rate_right,
        stationarity_residual,
        clamped,
        left_cell: left.candidate,
        right_cell: right.candidate,
        pair: pair.clone(),
        opts: *opts,
    })
}

/// 4th-order centered residual of `u' = A − α` at interior samples.
fn profile_residual(flux: &FluxModel, alpha: f64, xs: &[f64], u: &[f64]) -> f64 {
    let n = u.len();
    if n < 5 {
        return f64::NAN;
    }
    let h = xs[1] - xs[0];
    (2..n - 2)
        .map(|i| {
            let du = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * h);
            (-du + flux.eval(xs[i], u[i]) - alpha).abs()
        })
        .fold(0.0, f64::max)
}

/// Composite Simpson (odd point count) or trapezoid weights on a uniform grid.
fn uniform_integral(h: f64, f: &[f64]) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    if n % 2 == 1 && n >= 3 {
        let inner: f64 = f[1..n - 1]
            .iter()
            .enumerate()
            .map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v })
            .sum();
        h / 3.0 * (f[0] + f[n - 1] + inner)
    } else {
        h * (0.5 * (f[0] + f[n - 1]) + f[1..n - 1].iter().sum::<f64>())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    /// `∫(U − V)` including tails.
    pub integral: f64,
    pub interior: f64,
    pub tail_left: f64,
    pub tail_right: f64,
}

/// `∫_ℝ (U − V)` for two shocks sampled on the same grid: quadrature over
/// the grid plus geometric tail sums from the fitted decay rates.
pub fn shock_difference_mass(u: &ShockProfile, v: &ShockProfile) -> Result<MassReport> {
    if u.grid.len() != v.grid.len() || u.grid[0] != v.grid[0] || (u.alpha - v.alpha).abs() > 1e-12 {
        return Err(Error::GridMismatch);
    }
    let h = u.grid[1] - u.grid[0];
    let diff: Vec<f64> = u.values.iter().zip(&v.values).map(|(a, b)| a - b).collect();
    let interior = uniform_integral(h, &diff);
    let spp = u.opts.samples_per_period;
    let scale = 1.0 + u.sup_norm().max(v.sup_norm());
    let tail = |end: End| -> Result<f64> {
        let last = match end {
            End::Left => &diff[..=spp],
            End::Right => &diff[diff.len() - 1 - spp..],
        };
        let i_last = uniform_integral(h, last);
        if i_last.abs() <= 1e-14 * scale {
            return Ok(0.0);
        }
        let rate = match end {
            End::Left => u.rate_left.max(v.rate_left),
            End::Right => u.rate_right.max(v.rate_right),
        };
        if rate <= 0.0 {
            return Err(Error::TailUnresolved { end });
        }
        let r = (-rate).exp();
        Ok(i_last * r / (1.0 - r))
    };
    let tail_left = tail(End::Left)?;
    let tail_right = tail(End::Right)?;
    Ok(MassReport {
        integral: interior + tail_left + tail_right,
        interior,
        tail_left,
        tail_right,
    })
}

/// `2|k|·‖U‖∞`, the bound on `|∫(τ_k U − U)|`.
pub fn translate_mass_bound(profile: &ShockProfile, k: i32) -> f64 {
    2.0 * k.unsigned_abs() as f64 * profile.sup_norm()
}

/// Bound check with a relative quadrature allowance of 1e-9 (Burgers
/// attains the bound exactly).
pub fn within_translate_bound(integral: f64, profile: &ShockProfile, k: i32) -> bool {
    integral.abs() <= translate_mass_bound(profile, k) * (1.0 + 1e-9)
}

/// `τ_k U = U(· + k)` on the same grid; a shock of the same flux constant
/// since `A` is 1-periodic.
pub fn translate(profile: &ShockProfile, k: i32) -> Result<ShockProfile> {
    let xi = profile.value_at(k as f64)?;
    let half = profile.half_length().round() as u32;
    build_fixed(&profile.pair, xi, half, &profile.opts)
}

/// Choose the shock `V` with `Σ(u0 − V)·dx = 0` over the cell centres `xs`
/// (spacing `dx`). The mass defect is strictly decreasing in `V(0)`.
pub fn select_zero_mass_shock(
    pair: &RhPair,
    xs: &[f64],
    u0: &[f64],
    dx: f64,
    opts: &ShockOptions,
) -> Result<(ShockProfile, f64)> {
    let (lo, hi) = pair.xi_range();
    let pad = 1e-9 * (hi - lo);
    select_zero_mass_shock_in(pair, xs, u0, dx, (lo + pad, hi - pad), opts)
}

/// As [`select_zero_mass_shock`], searching `V(0)` in `bracket`.
pub fn select_zero_mass_shock_in(
    pair: &RhPair,
    xs: &[f64],
    u0: &[f64],
    dx: f64,
    bracket: (f64, f64),
    opts: &ShockOptions,
) -> Result<(ShockProfile, f64)> {
    if xs.len() != u0.len() || xs.is_empty() {
        return Err(Error::GridMismatch);
    }
    let (lo, hi) = pair.xi_range();
    let (a, b) = bracket;
    if !(lo < a && a < b && b < hi) {
        return Err(Error::InvalidParameter(format!(
            "bracket ({a}, {b}) must lie inside ({lo}, {hi})"
        )));
    }
    let shared = Arc::new(pair.clone());
    let mass_u0: f64 = u0.iter().sum::<f64>() * dx;
    let l1_u0: f64 = u0.iter().map(|v| v.abs()).sum::<f64>() * dx;
    let tol = opts.mass_tol * (1.0 + l1_u0);
    let defect = |xi: f64| -> Result<f64> {
        let (v, _) = trace(&shared, xi, xs, opts)?;
        Ok(mass_u0 - v.iter().sum::<f64>() * dx)
    };
    let fa = defect(a)?;
    let fb = defect(b)?;
    if fa.signum() == fb.signum() && fa != 0.0 && fb != 0.0 {
        return Err(Error::BracketFailure {
            what: "zero-mass shock (achievable defect range)",
            lo: fb,
            hi: fa,
        });
    }
    let root = brent(
        defect,
        a,
        b,
        fa,
        fb,
        &RootOptions {
            xtol: 1e-15 * (1.0 + hi.abs().max(lo.abs())),
            ftol: 0.1 * tol,
            max_iter: 400,
        },
    )?;
    let reach = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).ceil() as u32 + 1;
    let half = reach.max(opts.half_length);
    let v = build_fixed(&shared, root.x, half, opts)?;
    Ok((v, root.fx))
}
