//! Periodic stationary solutions of the 1D cell problem.
//!
//! A cell solution `v(·, p)` is 1-periodic, has mean `p`, and satisfies the
//! first-order form `v' = A(y, v) − α` where `α = Ā(p)`. For a fixed anchor
//! `ξ = v(0)` the period map `α ↦ v(1; ξ, α)` is strictly decreasing, so `α`
//! is found by a bracketed root search; the mean is strictly increasing in
//! `ξ`, which gives the outer search in [`solve_cell_by_mean`].

mod measure;
mod table;

pub use measure::{invariant_measure, InvariantMeasure};
pub use table::{
    check_convexity, check_oleinik, find_rh_pairs, homogenized_flux_table, ConvexityReport, HomogenizedFluxTable,
    OleinikReport,
};

use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::ode::{Integrator, OdeOptions};
use crate::roots::{brent, expand_bracket, RootOptions};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellTolerances {
    /// Bound on `|v(1) − v(0)| / (1 + |v(0)|)`.
    pub period_tol: f64,
    /// Bound on `|⟨v⟩ − p|`.
    pub mean_tol: f64,
    /// Bound on the stationarity residual of the sampled solution.
    pub residual_tol: f64,
    /// Samples per period.
    pub n_grid: usize,
    /// Number of bracket doublings before giving up.
    pub max_doublings: usize,
    pub ode: OdeOptions,
}

impl Default for CellTolerances {
    fn default() -> Self {
        Self {
            period_tol: 1e-9,
            mean_tol: 1e-8,
            residual_tol: 1e-6,
            n_grid: 256,
            max_doublings: 10,
            ode: OdeOptions::default(),
        }
    }
}

/// One periodic stationary solution sampled on `n_grid` uniform points.
#[derive(Debug, Clone)]
pub struct CellSolution {
    pub p: f64,
    pub alpha: f64,
    pub xi0: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `max |−v' + A(y, v) − α|` with `v'` from a 6th-order periodic
    /// difference of the samples.
    pub residual: f64,
    /// `|v(1) − v(0)|` of the final integration.
    pub period_defect: f64,
    flux: FluxModel,
    ode: OdeOptions,
}

impl CellSolution {
    pub fn flux(&self) -> &FluxModel {
        &self.flux
    }

    pub fn n_grid(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Discrete mean of `A(y_i, v_i)`; equals `α` for an exact solution.
    pub fn flux_average(&self) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&y, &v)| self.flux.eval(y, v))
            .sum::<f64>()
            / self.values.len() as f64
    }

    /// Discrete mean of `∂_u A(y, v(y))`.
    pub fn mean_flux_slope(&self) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&y, &v)| self.flux.d_u(y, v))
            .sum::<f64>()
            / self.values.len() as f64
    }

    /// `v(x)` at any real `x` (periodic extension), re-integrated from the
    /// nearest sample.
    pub fn value_at(&self, x: f64) -> f64 {
        let n = self.values.len();
        let y = x - x.floor();
        let pos = y * n as f64;
        let idx = pos.round() as usize;
        let offset = (pos - idx as f64) / n as f64;
        let v0 = self.values[idx % n];
        if offset.abs() < 1e-15 || self.flux.meta.homogeneous_in_y {
            return v0;
        }
        let node = idx as f64 / n as f64;
        let flux = &self.flux;
        let alpha = self.alpha;
        let opts = OdeOptions {
            h_max: self.ode.h_max.min(offset.abs()),
            ..self.ode
        };
        let mut it = Integrator::new(|s, v: &[f64; 1]| [flux.eval(s, v[0]) - alpha], node, [v0], opts);
        match it.advance_to(node + offset, &mut |_| false) {
            Ok(Ok(v)) => v[0],
            _ => v0,
        }
    }

    /// Values at arbitrary positions.
    pub fn sample_at(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.value_at(x)).collect()
    }
}

/// Right-hand side of the first-order cell/shock ODE, augmented with the
/// running integral of `v`.
fn augmented_rhs<'a>(flux: &'a FluxModel, alpha: f64) -> impl FnMut(f64, &[f64; 2]) -> [f64; 2] + 'a {
    move |y, s| [flux.eval(y, s[0]) - alpha, s[0]]
}

fn escape_bound(xi: f64) -> f64 {
    1e6 * (1.0 + xi.abs())
}

/// `v(1; ξ, α) − ξ`, saturated to `±escape_bound` if the orbit blows up.
pub(crate) fn period_defect(flux: &FluxModel, xi: f64, alpha: f64, ode: &OdeOptions) -> Result<f64> {
    let bound = escape_bound(xi);
    let mut it = Integrator::new(|y, v: &[f64; 1]| [flux.eval(y, v[0]) - alpha], 0.0, [xi], *ode);
    match it.advance_to(1.0, &mut |v| (v[0] - xi).abs() > bound)? {
        Ok(v) => Ok(v[0] - xi),
        Err(esc) => Ok(bound.copysign(esc.state[0] - xi)),
    }
}

/// Integrate one period from `ξ` with flux constant `α`, sampling the grid.
fn sample_period(flux: &FluxModel, xi: f64, alpha: f64, tol: &CellTolerances) -> Result<CellSolution> {
    let n = tol.n_grid;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let mut values = Vec::with_capacity(n);
    let mut it = Integrator::new(augmented_rhs(flux, alpha), 0.0, [xi, 0.0], tol.ode);
    let bound = escape_bound(xi);
    for i in 0..=n {
        let target = i as f64 / n as f64;
        let state = match it.advance_to(target, &mut |s| (s[0] - xi).abs() > bound)? {
            Ok(s) => s,
            Err(esc) => {
                return Err(Error::NonconvergedOde {
                    at: esc.at,
                    reason: "cell orbit escaped".into(),
                })
            }
        };
        if i < n {
            values.push(state[0]);
        } else {
            let period_defect = (state[0] - xi).abs();
            let mean = state[1];
            let residual = stationarity_residual(flux, &grid, &values, alpha);
            return Ok(CellSolution {
                p: mean,
                alpha,
                xi0: xi,
                grid,
                values,
                residual,
                period_defect,
                flux: flux.clone(),
                ode: tol.ode,
            });
        }
    }
    unreachable!()
}

/// `max_i |−v'(y_i) + A(y_i, v_i) − α|` with a 6th-order periodic centered
/// difference for `v'`.
pub fn stationarity_residual(flux: &FluxModel, grid: &[f64], values: &[f64], alpha: f64) -> f64 {
    const C: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
    let n = values.len();
    let h = 1.0 / n as f64;
    let at = |i: isize| values[i.rem_euclid(n as isize) as usize];
    (0..n)
        .map(|i| {
            let ii = i as isize;
            let dv = (1..=3)
                .map(|k| C[k - 1] * (at(ii + k as isize) - at(ii - k as isize)))
                .sum::<f64>()
                / h;
            (-dv + flux.eval(grid[i], values[i]) - alpha).abs()
        })
        .fold(0.0, f64::max)
}

fn constant_solution(flux: &FluxModel, p: f64, tol: &CellTolerances) -> CellSolution {
    let n = tol.n_grid;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let alpha = flux.eval(0.0, p);
    CellSolution {
        p,
        alpha,
        xi0: p,
        values: vec![p; n],
        residual: grid.iter().map(|&y| (flux.eval(y, p) - alpha).abs()).fold(0.0, f64::max),
        grid,
        period_defect: 0.0,
        flux: flux.clone(),
        ode: tol.ode,
    }
}

/// Find `α` such that the orbit through `v(0) = xi` is 1-periodic.
pub fn solve_cell_by_offset(flux: &FluxModel, xi: f64, tol: &CellTolerances) -> Result<CellSolution> {
    if flux.meta.homogeneous_in_y {
        return Ok(constant_solution(flux, xi, tol));
    }
    let n = tol.n_grid.max(8);
    let (amin, amax) = (0..n)
        .map(|i| flux.eval(i as f64 / n as f64, xi))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let period_tol = tol.period_tol * (1.0 + xi.abs());
    let mut defect = |alpha: f64| period_defect(flux, xi, alpha, &tol.ode);
    let (a, b, fa, fb) = expand_bracket(&mut defect, amin - 1.0, amax + 1.0, tol.max_doublings, "flux constant")?;
    let root = brent(
        &mut defect,
        a,
        b,
        fa,
        fb,
        &RootOptions {
            xtol: 1e-15,
            ftol: 1e-3 * period_tol,
            max_iter: 200,
        },
    )?;
    let sol = sample_period(flux, xi, root.x, tol)?;
    if sol.period_defect > period_tol {
        return Err(Error::NonconvergedOde {
            at: 1.0,
            reason: format!("period defect {:e} exceeds {:e}", sol.period_defect, period_tol),
        });
    }
    Ok(sol)
}

/// Find the cell solution of prescribed mean `p`.
pub fn solve_cell_by_mean(flux: &FluxModel, p: f64, tol: &CellTolerances) -> Result<CellSolution> {
    solve_cell_by_mean_from(flux, p, p, tol)
}

/// As [`solve_cell_by_mean`], starting the anchor search around `xi_guess`.
pub fn solve_cell_by_mean_from(flux: &FluxModel, p: f64, xi_guess: f64, tol: &CellTolerances) -> Result<CellSolution> {
    if flux.meta.homogeneous_in_y {
        return Ok(constant_solution(flux, p, tol));
    }
    let wrap = |e: Error| Error::CellSolve { p, source: Box::new(e) };
    let mut mean_gap = |xi: f64| solve_cell_by_offset(flux, xi, tol).map(|s| s.p - p);
    let w = 0.25 * (1.0 + p.abs());
    let (a, b, fa, fb) =
        expand_bracket(&mut mean_gap, xi_guess - w, xi_guess + w, tol.max_doublings, "cell anchor").map_err(wrap)?;
    let root = brent(
        &mut mean_gap,
        a,
        b,
        fa,
        fb,
        &RootOptions {
            xtol: 1e-14,
            ftol: 1e-3 * tol.mean_tol,
            max_iter: 200,
        },
    )
    .map_err(wrap)?;
    let sol = solve_cell_by_offset(flux, root.x, tol).map_err(wrap)?;
    if (sol.p - p).abs() > tol.mean_tol {
        return Err(wrap(Error::BracketFailure {
            what: "cell mean",
            lo: a,
            hi: b,
        }));
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{burgers, make_homogeneous_flux, make_linear_flux, make_separable_convex_flux, Polynomial};
    use crate::periodic::FourierSeries;

    #[test]
    fn homogeneous_short_circuit() {
        let f = make_homogeneous_flux(Polynomial::new(vec![0.0, 1.0, 0.0, 1.0]));
        let s = solve_cell_by_offset(&f, 0.7, &CellTolerances::default()).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.7));
        assert_eq!(s.p, 0.7);
        assert!((s.alpha - (0.7 + 0.343)).abs() < 1e-15);
        let s = solve_cell_by_mean(&burgers(), 1.5, &CellTolerances::default()).unwrap();
        assert_eq!(s.alpha, 1.125);
    }

    #[test]
    fn constant_linear_coefficient() {
        let f = make_linear_flux(FourierSeries::constant(3.0));
        let s = solve_cell_by_offset(&f, 2.0, &CellTolerances::default()).unwrap();
        assert!(s.values.iter().all(|&v| (v - 2.0).abs() < 1e-12));
        assert!((s.alpha - 6.0).abs() < 1e-12);
    }

    #[test]
    fn offset_solution_is_periodic_and_consistent() {
        let f = make_separable_convex_flux(FourierSeries::sine(0.2, 0.6), 1.0, 1.5, 1.0).unwrap();
        let tol = CellTolerances::default();
        let s = solve_cell_by_offset(&f, 0.3, &tol).unwrap();
        assert!(s.period_defect <= tol.period_tol);
        assert!(s.residual <= tol.residual_tol, "residual {}", s.residual);
        assert!((s.flux_average() - s.alpha).abs() <= 10.0 * tol.mean_tol);
        let mean = s.values.iter().sum::<f64>() / s.values.len() as f64;
        assert!((mean - s.p).abs() < 1e-10);
    }

    #[test]
    fn mean_solve_hits_target_and_orders_solutions() {
        let f = make_separable_convex_flux(FourierSeries::sine(0.0, 0.5), 1.0, 1.0, 1.0).unwrap();
        let tol = CellTolerances::default();
        let lo = solve_cell_by_mean(&f, -0.2, &tol).unwrap();
        let hi = solve_cell_by_mean(&f, 0.1, &tol).unwrap();
        assert!((lo.p + 0.2).abs() <= tol.mean_tol);
        assert!((hi.p - 0.1).abs() <= tol.mean_tol);
        assert!(lo.values.iter().zip(&hi.values).all(|(a, b)| a < b));
    }

    #[test]
    fn value_at_interpolates_the_orbit() {
        let f = make_linear_flux(FourierSeries::cosine(1.0, 0.5));
        let s = solve_cell_by_mean(&f, 2.0, &CellTolerances::default()).unwrap();
        let fine = CellTolerances {
            n_grid: 1024,
            ..Default::default()
        };
        let r = sample_period(&f, s.xi0, s.alpha, &fine).unwrap();
        for (i, v) in r.values.iter().enumerate().step_by(3) {
            let x = r.grid[i] + 7.0;
            assert!((s.value_at(x) - v).abs() < 1e-10);
        }
    }

    #[test]
    fn blowup_orbits_are_bracketed() {
        // superlinear growth: v' = v² + sin − α blows up for small α
        let f = crate::flux::FluxModel::custom("quad", |y, u| u * u + 0.3 * (std::f64::consts::TAU * y).sin());
        let s = solve_cell_by_offset(&f, -0.5, &CellTolerances::default()).unwrap();
        assert!(s.period_defect < 1e-9);
    }
}
