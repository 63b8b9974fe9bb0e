use super::{ExperimentReport, Series};
use crate::error::{Error, Result};
use crate::evolve::{evolve_ensemble, Cadence, EvolveConfig, Field, Grid1D};
use crate::flux::FluxModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CopropertyParams {
    /// Allowed per-step L¹ growth, relative to `scale`.
    pub contraction_tol: f64,
    /// Allowed per-step change of the ledger-corrected signed mass,
    /// relative to `scale`.
    pub conservation_tol: f64,
    /// Keep every n-th step in the exported series.
    pub series_stride: usize,
}

impl Default for CopropertyParams {
    fn default() -> Self {
        Self {
            contraction_tol: 1e-12,
            conservation_tol: 1e-12,
            series_stride: 10,
        }
    }
}

/// Evolve `a0` and `b0` with a common time step and check comparison,
/// L¹ contraction and conservation of the signed mass after every step.
/// `scale = (1 + max ‖·‖∞)·measure`.
pub fn coproperty_check(
    flux: &FluxModel,
    a0: &Field,
    b0: &Field,
    config: &EvolveConfig,
    params: &CopropertyParams,
) -> Result<ExperimentReport> {
    if a0.grid != b0.grid {
        return Err(Error::GridMismatch);
    }
    let mut report = ExperimentReport::new(
        "coproperty_check",
        serde_json::json!({ "config": config, "params": params, "grid": a0.grid }),
    );
    let ordered = a0.values.iter().zip(&b0.values).all(|(a, b)| a <= b);
    let dx = a0.grid.dx();
    let scale = (1.0 + a0.sup_norm().max(b0.sup_norm())) * a0.grid.measure();
    let cfg = EvolveConfig {
        cadence: Cadence::Steps(1),
        ..*config
    };
    let mut series = Series::new(&["t", "l1", "signed_mass", "ledger_difference", "order_violation"]);
    let mut prev: Option<(f64, f64)> = None;
    let mut worst_order = 0.0f64;
    let mut worst_growth = 0.0f64;
    let mut worst_mass = 0.0f64;
    let stride = params.series_stride.max(1);
    let outcome = evolve_ensemble(flux, vec![a0.clone(), b0.clone()], &cfg, &mut |s| {
        let (a, b) = (&s.fields[0].values, &s.fields[1].values);
        let l1: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * dx;
        let mass: f64 = a.iter().zip(b).map(|(x, y)| x - y).sum::<f64>() * dx;
        let ledger = s.ledgers[0] - s.ledgers[1];
        let order = a.iter().zip(b).map(|(x, y)| x - y).fold(f64::NEG_INFINITY, f64::max).max(0.0);
        worst_order = worst_order.max(order);
        let corrected = mass - ledger;
        if let Some((l1_prev, m_prev)) = prev {
            worst_growth = worst_growth.max(l1 - l1_prev);
            worst_mass = worst_mass.max((corrected - m_prev).abs());
        }
        prev = Some((l1, corrected));
        if s.step % stride == 0 {
            series.push(vec![s.t, l1, mass, ledger, order]);
        }
        Ok(())
    })?;
    report.set("steps", outcome.steps as f64);
    report.set("scale", scale);
    report.set("max_order_violation", worst_order);
    report.set("max_l1_growth_per_step", worst_growth);
    report.set("max_mass_drift_per_step", worst_mass);
    report.set("initially_ordered", if ordered { 1.0 } else { 0.0 });
    if ordered {
        report.check_le("comparison: a <= b cellwise at every step", worst_order, 0.0);
    }
    report.check_le(
        "contraction: per-step L1 growth <= contraction_tol*scale",
        worst_growth,
        params.contraction_tol * scale,
    );
    report.check_le(
        "conservation: per-step change of ledger-corrected signed mass <= conservation_tol*scale",
        worst_mass,
        params.conservation_tol * scale,
    );
    report.series.insert("differences".into(), series);
    Ok(report)
}

/// Random smooth field plus a non-negative perturbation (zero on part of
/// the grid), seeded.
pub fn random_ordered_pair(grid: Grid1D, seed: u64, amplitude: f64) -> Result<(Field, Field)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64)> = (1..=4)
        .map(|k| (k as f64, rng.gen_range(-1.0..1.0) / k as f64, rng.gen_range(0.0..TAU)))
        .collect();
    let offset = rng.gen_range(-0.5..0.5);
    let period = grid.measure();
    let a = Field::from_fn(grid, |x| {
        offset
            + amplitude
                * modes
                    .iter()
                    .map(|&(k, c, ph)| c * (TAU * k * x / period + ph).sin())
                    .sum::<f64>()
    })?;
    let centre = rng.gen_range(grid.x_left..grid.x_right);
    let width = rng.gen_range(0.05..0.3) * period;
    let height = rng.gen_range(0.0..amplitude);
    let noise: Vec<f64> = (0..grid.n_cells).map(|_| rng.gen_range(0.0..0.05 * amplitude)).collect();
    let b_values: Vec<f64> = grid
        .centers()
        .iter()
        .zip(&a.values)
        .zip(&noise)
        .map(|((&x, &av), &eps)| {
            let d = (x - centre).abs();
            let d = d.min(period - d);
            let bump = if d < width { height * (1.0 - d / width) } else { 0.0 };
            av + bump + if d < 2.0 * width { eps } else { 0.0 }
        })
        .collect();
    Ok((a, Field::new(grid, b_values)?))
}
