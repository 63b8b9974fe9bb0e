//! Long-time experiments and the diagnostics they share.

mod bounds;
mod coproperty;
mod linear;
mod periodic;
mod shock;

pub use bounds::{uniform_bound_probe, BoundParams};
pub use coproperty::{coproperty_check, random_ordered_pair, CopropertyParams};
pub use linear::{
    entropy_smallness_sweep, heat_kernel_l2, linear_drift_experiment, weighted_entropy_series, DriftParams, EntropyParams,
};
pub use periodic::{periodic_convergence, PeriodicParams};
pub use shock::{competitor_offsets, shock_stability, ShockStabilityParams};

use crate::cell::CellSolution;
use crate::error::{Error, Result};
use crate::evolve::Field;
use crate::roots::{bisect, RootOptions};
use crate::shock::cell_value;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A named table of time-stamped rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Outcome of one declared criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: serde_json::Value,
    /// Scalar results.
    pub values: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Series>,
    pub fits: Vec<DecayFit>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: &str, parameters: serde_json::Value) -> Self {
        Self {
            name: name.to_string(),
            parameters,
            ..Default::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, criterion: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.criterion == criterion)
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub(crate) fn set(&mut self, key: &str, value: f64) {
        self.values.insert(key.to_string(), value);
    }

    /// Record `measured ≤ tolerance`.
    pub(crate) fn check_le(&mut self, criterion: &str, measured: f64, tolerance: f64) {
        self.verdicts.push(Verdict {
            criterion: criterion.to_string(),
            measured,
            tolerance,
            passed: measured <= tolerance,
        });
    }
}

/// Largest single-step increase of a sequence (0 if non-increasing).
pub fn max_increase(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayModel {
    Exponential,
    Algebraic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub series: String,
    pub model: DecayModel,
    pub window: (f64, f64),
    /// Exponential: the rate `r` in `e^{−r t}`. Algebraic: the exponent `k`
    /// in `t^k`.
    pub value: f64,
    pub r_squared: f64,
    pub points: usize,
    /// Values span less than one decade.
    pub degenerate: bool,
}

/// Least-squares fit in `(t, ln v)` or `(ln t, ln v)` over `window`.
pub fn fit_decay(series: &str, t: &[f64], v: &[f64], window: (f64, f64), model: DecayModel) -> Result<DecayFit> {
    if t.len() != v.len() {
        return Err(Error::InsufficientData("time and value lengths differ".into()));
    }
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(v)
        .filter(|(&ti, _)| ti >= window.0 && ti <= window.1)
        .map(|(&ti, &vi)| (ti, vi))
        .collect();
    if pts.len() < 8 {
        return Err(Error::InsufficientData(format!("{} points in fit window, need 8", pts.len())));
    }
    if pts.iter().any(|p| !(p.1 > 0.0)) {
        return Err(Error::InsufficientData("fit values must be positive".into()));
    }
    if model == DecayModel::Algebraic && pts.iter().any(|p| !(p.0 > 0.0)) {
        return Err(Error::InsufficientData("algebraic fit needs t > 0".into()));
    }
    let xy: Vec<(f64, f64)> = pts
        .iter()
        .map(|&(ti, vi)| {
            let x = match model {
                DecayModel::Exponential => ti,
                DecayModel::Algebraic => ti.ln(),
            };
            (x, vi.ln())
        })
        .collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = xy.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let sxy = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    let syy = xy.iter().map(|p| (p.1 - my).powi(2)).sum::<f64>();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("fit window has a single abscissa".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let (lo, hi) = pts.iter().fold((f64::INFINITY, 0.0f64), |(a, b), p| (a.min(p.1), b.max(p.1)));
    Ok(DecayFit {
        series: series.to_string(),
        model,
        window,
        value: match model {
            DecayModel::Exponential => -slope,
            DecayModel::Algebraic => slope,
        },
        r_squared,
        points: pts.len(),
        degenerate: hi / lo < 10.0,
    })
}

/// `‖(u − v⁺)₊‖₁ + ‖(u − v⁻)₋‖₁` with the band edges given cellwise.
pub fn distance_to_band_sampled(u: &Field, lower: &[f64], upper: &[f64]) -> Result<f64> {
    if lower.len() != u.values.len() || upper.len() != u.values.len() {
        return Err(Error::GridMismatch);
    }
    let dx = u.grid.dx();
    Ok(u.values
        .iter()
        .zip(lower.iter().zip(upper))
        .map(|(&x, (&lo, &hi))| (x - hi).max(0.0) + (lo - x).max(0.0))
        .sum::<f64>()
        * dx)
}

/// Distance from `u` to the set of functions lying between two cells.
pub fn distance_to_band(u: &Field, v_minus: &CellSolution, v_plus: &CellSolution) -> Result<f64> {
    let xs = u.grid.centers();
    let lower: Vec<f64> = xs.iter().map(|&x| cell_value(v_minus, x)).collect();
    let upper: Vec<f64> = xs.iter().map(|&x| cell_value(v_plus, x)).collect();
    distance_to_band_sampled(u, &lower, &upper)
}

/// Functions `a⁻ ≤ u0 ≤ a⁺` with `Σ(a^± − v^±)·dx = 0` that agree with `u0`
/// outside the band and fill towards the band edge elsewhere: with `c` the
/// fill level, `a⁺ = max(u0, v⁺ − c)` where `u0 ≤ v⁺` (and symmetrically
/// for `a⁻`). `c` is found by bisection, the filled mass being monotone in it.
pub fn build_bracketing_functions(u0: &Field, v_minus: &CellSolution, v_plus: &CellSolution) -> Result<(Field, Field)> {
    let xs = u0.grid.centers();
    let lower: Vec<f64> = xs.iter().map(|&x| cell_value(v_minus, x)).collect();
    let upper: Vec<f64> = xs.iter().map(|&x| cell_value(v_plus, x)).collect();
    build_bracketing_sampled(u0, &lower, &upper)
}

pub fn build_bracketing_sampled(u0: &Field, lower: &[f64], upper: &[f64]) -> Result<(Field, Field)> {
    if lower.len() != u0.values.len() || upper.len() != u0.values.len() {
        return Err(Error::GridMismatch);
    }
    // a⁺: distance below v⁺ is `gap = v⁺ − u0`; excess is where gap < 0
    let gap_plus: Vec<f64> = upper.iter().zip(&u0.values).map(|(v, u)| v - u).collect();
    let plus = fill(&gap_plus)?;
    let a_plus: Vec<f64> = upper
        .iter()
        .zip(&u0.values)
        .zip(&gap_plus)
        .map(|((&v, &u), &g)| if g < 0.0 { u } else { u.max(v - plus) })
        .collect();
    let gap_minus: Vec<f64> = u0.values.iter().zip(lower).map(|(u, v)| u - v).collect();
    let minus = fill(&gap_minus)?;
    let a_minus: Vec<f64> = lower
        .iter()
        .zip(&u0.values)
        .zip(&gap_minus)
        .map(|((&v, &u), &g)| if g < 0.0 { u } else { u.min(v + minus) })
        .collect();
    Ok((Field::new(u0.grid, a_minus)?, Field::new(u0.grid, a_plus)?))
}

/// Level `c ≥ 0` with `Σ min(gap, c) over gap ≥ 0` equal to the excess
/// `Σ (−gap)₊`.
fn fill(gap: &[f64]) -> Result<f64> {
    let excess: f64 = gap.iter().filter(|g| **g < 0.0).map(|g| -g).sum();
    let room: f64 = gap.iter().filter(|g| **g >= 0.0).sum();
    if excess == 0.0 {
        return Ok(0.0);
    }
    if excess > room {
        return Err(Error::InsufficientRoom { excess, room });
    }
    let filled = |c: f64| -> f64 { gap.iter().filter(|g| **g >= 0.0).map(|g| g.min(c)).sum() };
    let top = gap.iter().copied().fold(0.0, f64::max);
    let root = bisect(
        |c| Ok(filled(c) - excess),
        0.0,
        top,
        -excess,
        &RootOptions {
            xtol: 1e-15 * (1.0 + top),
            ftol: 1e-14 * (1.0 + excess),
            max_iter: 200,
        },
    )?;
    Ok(root.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::Grid1D;

    #[test]
    fn synthetic_fits() {
        let t: Vec<f64> = (1..=40).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|t| (-3.0 * t).exp()).collect();
        let f = fit_decay("e", &t, &v, (0.0, 10.0), DecayModel::Exponential).unwrap();
        assert!((f.value - 3.0).abs() < 1e-6 && (f.r_squared - 1.0).abs() < 1e-12);
        let v: Vec<f64> = t.iter().map(|t| t.powf(-0.25)).collect();
        let f = fit_decay("a", &t, &v, (0.0, 10.0), DecayModel::Algebraic).unwrap();
        assert!((f.value + 0.25).abs() < 1e-6);
        assert!(f.degenerate);
        assert!(fit_decay("a", &t[..5], &v[..5], (0.0, 10.0), DecayModel::Algebraic).is_err());
    }

    #[test]
    fn band_distance_cases() {
        let g = Grid1D::line(0.0, 1.0, 10).unwrap();
        let lo = vec![-1.0; 10];
        let hi = vec![1.0; 10];
        let inside = Field::new(g, vec![0.5; 10]).unwrap();
        assert_eq!(distance_to_band_sampled(&inside, &lo, &hi).unwrap(), 0.0);
        let mut v = vec![1.0; 10];
        v[3] = 3.0;
        v[7] = -2.0;
        let u = Field::new(g, v).unwrap();
        assert!((distance_to_band_sampled(&u, &lo, &hi).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn bracketing_moves_mass() {
        let g = Grid1D::line(-10.0, 10.0, 200).unwrap();
        let lo = vec![-1.0; 200];
        let hi = vec![1.0; 200];
        let u0 = Field::from_fn(g, |x| if x.abs() < 0.5 { 2.0 } else { 0.0 }).unwrap();
        let (am, ap) = build_bracketing_sampled(&u0, &lo, &hi).unwrap();
        let mass = |f: &Field, e: &[f64]| f.values.iter().zip(e).map(|(a, b)| a - b).sum::<f64>() * g.dx();
        assert!(mass(&ap, &hi).abs() < 1e-12);
        assert!(mass(&am, &lo).abs() < 1e-12);
        for j in 0..200 {
            assert!(am.values[j] <= u0.values[j] && u0.values[j] <= ap.values[j]);
        }
        let tight = Grid1D::line(-0.6, 0.6, 12).unwrap();
        let u0 = Field::from_fn(tight, |x| if x.abs() < 0.5 { 5.0 } else { 0.0 }).unwrap();
        assert!(matches!(
            build_bracketing_sampled(&u0, &[-1.0; 12], &[1.0; 12]),
            Err(Error::InsufficientRoom { .. })
        ));
    }
}
