use super::{fit_decay, DecayModel, ExperimentReport, Series};
use crate::cell::{solve_cell_by_mean, CellTolerances};
use crate::error::{Error, Result};
use crate::evolve::{evolve_ensemble, Boundary, Cadence, EvolveConfig, Field, GridKind, StationaryProfile};
use crate::flux::FluxModel;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodicParams {
    pub t_end: f64,
    pub record_every: f64,
    pub cfl_number: f64,
    /// Monotonicity is asserted from this time on.
    pub transient: f64,
    /// Required final `‖u − v(·,⟨u0⟩)‖∞`.
    pub linf_tol: f64,
    /// Mean of the cell used for the lower sandwich `min(u0, v(·,p))`;
    /// defaults to `⟨u0⟩`.
    pub sandwich_mean: Option<f64>,
    pub cell: CellTolerances,
}

impl Default for PeriodicParams {
    fn default() -> Self {
        Self {
            t_end: 50.0,
            record_every: 0.25,
            cfl_number: 0.45,
            transient: 1.0,
            linf_tol: 1e-3,
            sandwich_mean: None,
            cell: CellTolerances::default(),
        }
    }
}

/// Evolve `u0` on the torus towards `v(·,⟨u0⟩)` together with the lower
/// sandwich `min(u0, v(·,p))` and the sampled cell itself.
///
/// Distances are reported against the exact cell (`linf`, `l1`) and against
/// the evolved sampled cell (`*_evolved`), which removes the scheme's own
/// stationary drift; the evolved L¹ distance is non-increasing by
/// contraction.
pub fn periodic_convergence(flux: &FluxModel, u0: &Field, params: &PeriodicParams) -> Result<ExperimentReport> {
    if u0.grid.kind != GridKind::Periodic {
        return Err(Error::InvalidParameter("periodic convergence needs a periodic grid".into()));
    }
    let mut report = ExperimentReport::new(
        "periodic_convergence",
        serde_json::json!({ "params": params, "grid": u0.grid }),
    );
    let p = u0.mean();
    let cell = solve_cell_by_mean(flux, p, &params.cell)?;
    let xs = u0.grid.centers();
    let v = cell.sample(&xs)?;
    let sandwich_cell = match params.sandwich_mean {
        Some(q) if q != p => solve_cell_by_mean(flux, q, &params.cell)?,
        _ => cell.clone(),
    };
    let vs = sandwich_cell.sample(&xs)?;
    let lower: Vec<f64> = u0.values.iter().zip(&vs).map(|(a, b)| a.min(*b)).collect();
    report.set("p", p);
    report.set("alpha", cell.alpha);
    report.set("sandwich_mean", sandwich_cell.p);
    report.set("initial_excess_over_cell", u0.values.iter().zip(&v).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max));
    let config = EvolveConfig {
        t_end: params.t_end,
        cfl_number: params.cfl_number,
        boundary: Boundary::Periodic,
        cadence: Cadence::Time(params.record_every),
        ..Default::default()
    };
    let dx = u0.grid.dx();
    let mut series = Series::new(&["t", "linf", "l1", "linf_evolved", "l1_evolved", "stationary_drift", "sandwich_violation"]);
    let fields = vec![u0.clone(), Field::new(u0.grid, lower)?, Field::new(u0.grid, v.clone())?];
    evolve_ensemble(flux, fields, &config, &mut |s| {
        let (u, low, sv) = (&s.fields[0].values, &s.fields[1].values, &s.fields[2].values);
        let (mut linf, mut l1, mut linf_e, mut l1_e, mut drift, mut sandwich) = (0.0f64, 0.0, 0.0f64, 0.0, 0.0f64, f64::NEG_INFINITY);
        for j in 0..u.len() {
            let d = (u[j] - v[j]).abs();
            let de = (u[j] - sv[j]).abs();
            linf = linf.max(d);
            l1 += d * dx;
            linf_e = linf_e.max(de);
            l1_e += de * dx;
            drift = drift.max((sv[j] - v[j]).abs());
            sandwich = sandwich.max(low[j] - u[j]);
        }
        series.push(vec![s.t, linf, l1, linf_e, l1_e, drift, sandwich]);
        Ok(())
    })?;
    let col = |name: &str| series.column(name).expect("column");
    let (t, linf, l1_e, drift, sandwich) = (col("t"), col("linf"), col("l1_evolved"), col("stationary_drift"), col("sandwich_violation"));
    let last = t.len() - 1;
    report.set("final_linf", linf[last]);
    report.set("final_l1_evolved", l1_e[last]);
    report.set("final_stationary_drift", drift[last]);
    let scale = (1.0 + u0.sup_norm()) * u0.grid.measure();
    let worst_l1 = super::max_increase(&l1_e);
    // After the transient the exact-cell distance may only grow while it is
    // within the scheme's stationary drift of the cell.
    let floor = drift.iter().copied().fold(0.0, f64::max);
    let worst_linf = t
        .windows(2)
        .zip(linf.windows(2))
        .filter(|(tw, lw)| tw[0] >= params.transient && lw[1] > 2.0 * floor)
        .map(|(_, lw)| lw[1] - lw[0])
        .fold(0.0, f64::max);
    report.set("monotonicity_floor", 2.0 * floor);
    report.check_le("final sup distance to v(., <u0>) below linf_tol", linf[last], params.linf_tol);
    report.check_le("sup distance non-increasing after transient (above 2x stationary drift)", worst_linf, 0.0);
    report.check_le("L1 distance to evolved cell non-increasing", worst_l1, 1e-12 * scale);
    report.check_le(
        "sandwich: min(u0, v) stays below u cellwise",
        sandwich.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0),
        0.0,
    );
    // exponential rate on the evolved distance, above round-off
    let linf_e = col("linf_evolved");
    let (ft, fv): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(&linf_e)
        .filter(|(&ti, &vi)| ti >= params.transient && vi > 1e-11 * scale)
        .map(|(a, b)| (*a, *b))
        .unzip();
    match ft.last() {
        Some(&t_hi) => match fit_decay("linf_evolved", &ft, &fv, (params.transient, t_hi), DecayModel::Exponential) {
            Ok(fit) => report.fits.push(fit),
            Err(e) => report.notes.push(format!("no exponential fit: {e}")),
        },
        None => report.notes.push("distance at round-off after the transient; no fit".into()),
    }
    report.series.insert("distance".into(), series);
    Ok(report)
}
