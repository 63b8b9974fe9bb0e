use super::{ExperimentReport, Series};
use crate::error::Result;
use crate::evolve::{evolve_ensemble_with, Boundary, Cadence, EvolveConfig, Field};
use crate::flux::FluxModel;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundParams {
    pub record_every: f64,
    pub cfl_number: f64,
    /// Allowed growth of the running max over the final quarter.
    pub tol: f64,
    pub boundary: Boundary,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            record_every: 0.5,
            cfl_number: 0.45,
            tol: 1e-4,
            boundary: Boundary::Periodic,
        }
    }
}

/// Record `‖u(t)‖∞` and its running max up to `t_end`.
pub fn uniform_bound_probe(flux: &FluxModel, u0: &Field, t_end: f64, params: &BoundParams) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "uniform_bound_probe",
        serde_json::json!({ "params": params, "grid": u0.grid, "t_end": t_end }),
    );
    let config = EvolveConfig {
        t_end,
        cfl_number: params.cfl_number,
        boundary: params.boundary,
        cadence: Cadence::Time(params.record_every),
        ..Default::default()
    };
    let mut series = Series::new(&["t", "linf", "running_max"]);
    let mut running = 0.0f64;
    evolve_ensemble_with(flux, vec![u0.clone()], &[params.boundary], &config, &mut |s| {
        let linf = s.fields[0].sup_norm();
        running = running.max(linf);
        series.push(vec![s.t, linf, running]);
        Ok(())
    })?;
    let t = series.column("t").expect("t");
    let run = series.column("running_max").expect("running_max");
    let start = 0.75 * t_end;
    let at_start = t
        .iter()
        .zip(&run)
        .filter(|(&ti, _)| ti <= start + 1e-12)
        .map(|(_, &r)| r)
        .last()
        .unwrap_or(run[0]);
    let growth = run[run.len() - 1] - at_start;
    report.set("initial_linf", u0.sup_norm());
    report.set("running_max", run[run.len() - 1]);
    report.set("final_quarter_increase", growth);
    report.check_le("running max of sup norm stabilises over the final quarter", growth, params.tol);
    report.series.insert("sup_norm".into(), series);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::Grid1D;
    use crate::flux::burgers;

    #[test]
    fn stationary_data_give_a_flat_series() {
        let grid = Grid1D::periodic(64).unwrap();
        let u0 = Field::new(grid, vec![0.7; 64]).unwrap();
        let r = uniform_bound_probe(&burgers(), &u0, 5.0, &BoundParams::default()).unwrap();
        let linf = r.series["sup_norm"].column("linf").unwrap();
        assert!(linf.iter().all(|&v| (v - 0.7).abs() < 1e-14));
        assert!(r.passed());
    }
}
