//! Executes the experiments of a [`RunConfig`] and writes their artefacts.

use crate::config::{ExperimentKind, ExperimentSpec, RunConfig, ShockSpec};
use homlab::cell::{check_convexity, check_oleinik, homogenized_flux_table, solve_cell_by_mean, CellTolerances};
use homlab::evolve::{Boundary, EvolveConfig, Grid1D};
use homlab::flux::{probe_growth_hypotheses, FluxModel, ProbeBox};
use homlab::shock::{build_shock, end_state_sign_check, RhPair, ShockOptions, ShockProfile};
use homlab::stability::{
    coproperty_check, entropy_smallness_sweep, heat_kernel_l2, linear_drift_experiment, periodic_convergence,
    random_ordered_pair, shock_stability, uniform_bound_probe, weighted_entropy_series, ExperimentReport, Series,
    Verdict,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Passed,
    Failed,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub name: String,
    pub kind: String,
    pub status: Status,
    /// Criteria that did not hold.
    pub failed: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub flux: String,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub experiments: Vec<Outcome>,
}

impl Summary {
    pub fn exit_code(&self) -> i32 {
        if self.errors > 0 {
            3
        } else if self.failed > 0 {
            1
        } else {
            0
        }
    }
}

/// Seed of experiment `index`: distinct per entry and stable across runs.
pub fn experiment_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index as u64)
}

/// Run every experiment on a pool of `jobs` threads (all cores when
/// `None`), write `<out>/<name>/report.json` plus series CSVs, and
/// `<out>/summary.json`.
pub fn run(cfg: &RunConfig, out: &Path, seed: u64, jobs: Option<usize>) -> homlab::Result<Summary> {
    std::fs::create_dir_all(out).map_err(|e| homlab::Error::Io(format!("{}: {e}", out.display())))?;
    let flux = cfg.flux.build().map_err(|e| homlab::Error::InvalidParameter(e.to_string()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| homlab::Error::SolverFailure(e.to_string()))?;
    let outcomes: Vec<Outcome> = pool.install(|| {
        cfg.experiments
            .par_iter()
            .enumerate()
            .map(|(i, spec)| {
                let name = spec.dir_name(i);
                let result = run_experiment(cfg, &flux, spec, experiment_seed(seed, i))
                    .and_then(|r| homlab::io::write_report(out, &name, &r).map(|_| r));
                outcome(name, spec, result)
            })
            .collect()
    });
    let count = |s: Status| outcomes.iter().filter(|o| o.status == s).count();
    let summary = Summary {
        flux: flux.name().to_string(),
        seed,
        passed: count(Status::Passed),
        failed: count(Status::Failed),
        errors: count(Status::Error),
        experiments: outcomes,
    };
    homlab::io::write_json(out.join("summary.json"), &summary)?;
    Ok(summary)
}

fn outcome(name: String, spec: &ExperimentSpec, result: homlab::Result<ExperimentReport>) -> Outcome {
    let kind = spec.kind.kind_name().to_string();
    match result {
        Ok(r) => {
            let failed: Vec<String> = r.verdicts.iter().filter(|v| !v.passed).map(|v| v.criterion.clone()).collect();
            Outcome {
                name,
                kind,
                status: if failed.is_empty() { Status::Passed } else { Status::Failed },
                failed,
                error: None,
            }
        }
        Err(e) => Outcome {
            name,
            kind,
            status: Status::Error,
            failed: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

/// Resolved output directory: `--out`, then `HOMLAB_OUT`, then the config
/// file's `output_dir`, then `./homlab-out`.
pub fn output_dir(flag: Option<&Path>, env: Option<&str>, cfg: &RunConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("homlab-out"))
}

pub fn run_experiment(cfg: &RunConfig, flux: &FluxModel, spec: &ExperimentSpec, seed: u64) -> homlab::Result<ExperimentReport> {
    let grid = spec.grid.unwrap_or(cfg.grid);
    let grid = Grid1D::new(grid.kind, grid.x_left, grid.x_right, grid.n_cells)?;
    let cell_tol = cfg.tolerances.cell();
    let shock_opts = cfg.tolerances.shock();
    match &spec.kind {
        ExperimentKind::CopropertyCheck {
            pairs,
            amplitude,
            t_end,
            params,
        } => {
            let config = EvolveConfig {
                t_end: *t_end,
                boundary: Boundary::Periodic,
                ..Default::default()
            };
            let reports = (0..*pairs as u64)
                .into_par_iter()
                .map(|k| {
                    let (a, b) = random_ordered_pair(grid, seed.wrapping_add(k), *amplitude)?;
                    coproperty_check(flux, &a, &b, &config, params)
                })
                .collect::<homlab::Result<Vec<_>>>()?;
            Ok(merge_pairs(reports, seed))
        }
        ExperimentKind::PeriodicConvergence { initial, params } => {
            periodic_convergence(flux, &initial.field(grid, seed)?, params)
        }
        ExperimentKind::ShockStability {
            shock,
            perturbation,
            params,
        } => {
            let u = shock_profile(flux, shock, &cell_tol, &shock_opts)?;
            shock_stability(&u, &perturbation.field(grid, seed)?, params)
        }
        ExperimentKind::LinearDrift {
            coefficient,
            initial,
            params,
        } => linear_drift_experiment(coefficient, &initial.field(grid, seed)?, params),
        ExperimentKind::WeightedEntropy { p, initial, params } => {
            let cell = solve_cell_by_mean(flux, *p, &cell_tol)?;
            weighted_entropy_series(flux, &cell, &initial.field(grid, seed)?, params)
        }
        ExperimentKind::EntropySweep {
            p,
            initial,
            amplitudes,
            params,
        } => {
            let cell = solve_cell_by_mean(flux, *p, &cell_tol)?;
            entropy_smallness_sweep(flux, &cell, &initial.field(grid, seed)?, amplitudes, params)
        }
        ExperimentKind::HeatKernel {
            sigma,
            t_end,
            max_dt,
            window,
        } => heat_kernel_l2(*sigma, grid, *t_end, *max_dt, *window),
        ExperimentKind::UniformBound { initial, t_end, params } => {
            uniform_bound_probe(flux, &initial.field(grid, seed)?, *t_end, params)
        }
        ExperimentKind::CellTable {
            p_min,
            p_max,
            n_points,
            convexity_tol,
            oleinik,
        } => {
            let mut report = ExperimentReport::new("cell_table", serde_json::to_value(&spec.kind).unwrap_or_default());
            let table = homogenized_flux_table(flux, *p_min, *p_max, *n_points, &cell_tol)?;
            let mut rows = Series::new(&["p", "alpha", "xi0"]);
            for r in table.rows() {
                rows.push(r.to_vec());
            }
            report.series.insert("table".into(), rows);
            let c = check_convexity(&table, *convexity_tol)?;
            report.values.insert("worst_convexity_violation".into(), c.worst_violation);
            report.values.insert("most_negative_gap".into(), c.most_negative);
            report.values.insert("triples_checked".into(), c.triples_checked as f64);
            report.verdicts.push(Verdict {
                criterion: "convexity: Abar(p_j) - chord(p_j) <= convexity_tol".into(),
                measured: c.worst_violation,
                tolerance: *convexity_tol,
                passed: c.convex,
            });
            if let Some(o) = oleinik {
                let r = check_oleinik(&table, o.p_minus, o.p_plus, o.alpha, o.margin)?;
                report.values.insert("oleinik_min_gap".into(), r.min_gap);
                report.values.insert("oleinik_argmin".into(), r.argmin);
                report.verdicts.push(Verdict {
                    criterion: "oleinik: min |Abar(p) - alpha| over (p_minus, p_plus) > margin".into(),
                    measured: r.min_gap,
                    tolerance: o.margin,
                    passed: r.satisfied,
                });
            }
            Ok(report)
        }
        ExperimentKind::ShockBuild { shock } => {
            let mut report = ExperimentReport::new("shock_build", serde_json::to_value(&spec.kind).unwrap_or_default());
            let u = shock_profile(flux, shock, &cell_tol, &shock_opts)?;
            let summary = serde_json::to_value(u.summary()).unwrap_or_default();
            if let Some(map) = summary.as_object() {
                for (k, v) in map {
                    if let Some(x) = v.as_f64() {
                        report.values.insert(k.clone(), x);
                    }
                }
            }
            report.values.insert("clamped".into(), u.clamped);
            let signs = end_state_sign_check(u.left_cell(), u.right_cell(), shock_opts.sign_tol);
            report.values.insert("abar_left".into(), signs.abar_left);
            report.values.insert("abar_right".into(), signs.abar_right);
            report.verdicts.push(Verdict {
                criterion: "end states: mean flux slope >= 0 on the left and <= 0 on the right".into(),
                measured: (-signs.abar_left).max(signs.abar_right),
                tolerance: shock_opts.sign_tol,
                passed: signs.admissible,
            });
            let worst = u.residual_left.max(u.residual_right);
            report.verdicts.push(Verdict {
                criterion: "asymptotes: sup distance to the end cells over the last period <= detect_tol".into(),
                measured: worst,
                tolerance: shock_opts.detect_tol,
                passed: u.resolved(),
            });
            let mut rows = Series::new(&["x", "u", "v_lower", "v_upper"]);
            for r in u.rows() {
                rows.push(r.to_vec());
            }
            report.series.insert("profile".into(), rows);
            Ok(report)
        }
        ExperimentKind::GrowthProbe {
            y_range,
            u_range,
            n_samples,
            m,
            n,
        } => {
            let mut report = ExperimentReport::new("growth_probe", serde_json::to_value(&spec.kind).unwrap_or_default());
            let h = probe_growth_hypotheses(
                flux,
                ProbeBox {
                    y_range: *y_range,
                    u_range: *u_range,
                },
                *n_samples,
                *m,
                *n,
            )?;
            report.values.insert("sup_du_ratio".into(), h.sup_du_ratio);
            report.values.insert("sup_dy_ratio".into(), h.sup_dy_ratio);
            report.values.insert("samples".into(), h.samples as f64);
            report.values.insert("nonfinite".into(), h.nonfinite as f64);
            report
                .notes
                .push("advisory: finite samples bound the ratios from below only".into());
            Ok(report)
        }
    }
}

fn shock_profile(flux: &FluxModel, spec: &ShockSpec, cell_tol: &CellTolerances, opts: &ShockOptions) -> homlab::Result<ShockProfile> {
    let pair = match &spec.roots {
        Some(roots) => RhPair::from_roots(flux, spec.alpha, roots, cell_tol)?,
        None => {
            let table = homogenized_flux_table(flux, spec.p_range.0, spec.p_range.1, spec.table_points, cell_tol)?;
            RhPair::from_table(&table, spec.alpha)?
        }
    };
    let (lo, hi) = pair.xi_range();
    build_shock(&pair, spec.xi0.unwrap_or(0.5 * (lo + hi)), opts)
}

/// One report for all pairs: the worst value of every scalar, each
/// criterion judged on its worst pair, and the first pair's series.
fn merge_pairs(reports: Vec<ExperimentReport>, seed: u64) -> ExperimentReport {
    let mut merged = ExperimentReport::new(
        "coproperty_check",
        serde_json::json!({ "pairs": reports.len(), "seed": seed, "pair": reports[0].parameters }),
    );
    for r in &reports {
        for (k, &v) in &r.values {
            let e = merged.values.entry(k.clone()).or_insert(v);
            *e = e.max(v);
        }
        for v in &r.verdicts {
            let worse = |a: &Verdict, b: &Verdict| (!a.passed, a.measured - a.tolerance) > (!b.passed, b.measured - b.tolerance);
            match merged.verdicts.iter_mut().find(|m| m.criterion == v.criterion) {
                Some(m) if worse(v, m) => *m = v.clone(),
                Some(_) => {}
                None => merged.verdicts.push(v.clone()),
            }
        }
    }
    let failing = reports.iter().filter(|r| !r.passed()).count();
    merged.values.insert("pairs".into(), reports.len() as f64);
    merged.values.insert("failing_pairs".into(), failing as f64);
    let mut reports = reports;
    merged.series = std::mem::take(&mut reports[0].series);
    merged
}
