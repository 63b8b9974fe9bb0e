//! Experiment catalog: what each kind runs and the result it targets.

use crate::config::{ExperimentKind, ExperimentSpec, GridSpec, InitialData, OleinikSpec, ShockSpec};
use homlab::evolve::GridKind;
use homlab::periodic::FourierSeries;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    /// The statement the experiment probes, in words.
    pub anchor: &'static str,
    pub summary: &'static str,
    /// A valid entry with default parameters.
    pub example: ExperimentSpec,
}

fn line(x_left: f64, x_right: f64, n_cells: usize) -> Option<GridSpec> {
    Some(GridSpec {
        kind: GridKind::Line,
        x_left,
        x_right,
        n_cells,
    })
}

fn entry(name: &'static str, anchor: &'static str, summary: &'static str, grid: Option<GridSpec>, kind: ExperimentKind) -> CatalogEntry {
    debug_assert_eq!(kind.kind_name(), name);
    CatalogEntry {
        name,
        anchor,
        summary,
        example: ExperimentSpec { name: None, grid, kind },
    }
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        entry(
            "coproperty_check",
            "discrete comparison, L1 contraction and conservation of the monotone scheme",
            "seeded random ordered pairs evolved with a common time step; per-step checks",
            None,
            ExperimentKind::CopropertyCheck {
                pairs: 100,
                amplitude: 1.0,
                t_end: 0.5,
                params: Default::default(),
            },
        ),
        entry(
            "periodic_convergence",
            "long-time convergence of periodic data to the periodic stationary solution with the same mean",
            "sup and L1 distance to v(., <u0>), sandwich from below, exponential fit",
            None,
            ExperimentKind::PeriodicConvergence {
                initial: InitialData::Random { mean: 0.3, amplitude: 1.0 },
                params: Default::default(),
            },
        ),
        entry(
            "shock_stability",
            "L1 stability of standing viscous shocks: convergence to the zero-mass shift",
            "perturbed shock, shift selection, distance to V, competitor shocks and the band",
            line(-40.0, 40.0, 640),
            ExperimentKind::ShockStability {
                shock: ShockSpec {
                    alpha: 0.5,
                    roots: Some(vec![-1.0, 1.0]),
                    p_range: (-4.0, 4.0),
                    table_points: 41,
                    xi0: Some(0.0),
                },
                perturbation: InitialData::Bump {
                    base: 0.0,
                    height: 0.5,
                    centre: -1.0,
                    width: 1.0,
                },
                params: Default::default(),
            },
        ),
        entry(
            "linear_drift",
            "centre-of-mass drift of zero-mass solutions in the linear case, moving-frame velocity -<psi' m>",
            "signed parts evolved separately; drift, L1 algebraic decay, fourth moment",
            line(-25.0, 45.0, 4480),
            ExperimentKind::LinearDrift {
                coefficient: FourierSeries::cosine(1.0, 0.5),
                initial: InitialData::Dipole {
                    height: 1.0,
                    centre: 0.0,
                    width: 1.0,
                },
                params: Default::default(),
            },
        ),
        entry(
            "weighted_entropy",
            "decay of the weighted L2 entropy int m|w/m|^2 for small zero-mass perturbations of a cell",
            "E(t), t^(1/4)|w|_2 bound and the L-infinity bootstrap ratio",
            line(-40.0, 40.0, 1280),
            ExperimentKind::WeightedEntropy {
                p: 0.0,
                initial: InitialData::Dipole {
                    height: 0.03,
                    centre: 0.0,
                    width: 1.0,
                },
                params: Default::default(),
            },
        ),
        entry(
            "entropy_sweep",
            "smallness threshold for monotone weighted entropy",
            "weighted entropy runs at increasing |w0|_1; reports the first failing amplitude",
            line(-40.0, 40.0, 1280),
            ExperimentKind::EntropySweep {
                p: 0.0,
                initial: InitialData::Dipole {
                    height: 1.0,
                    centre: 0.0,
                    width: 1.0,
                },
                amplitudes: vec![0.01, 0.1, 1.0],
                params: Default::default(),
            },
        ),
        entry(
            "heat_kernel",
            "t^(-1/4) decay of the L2 norm of the heat kernel",
            "numerical L2 series against the closed form and its algebraic exponent",
            line(-80.0, 80.0, 1280),
            ExperimentKind::HeatKernel {
                sigma: 0.5,
                t_end: 100.0,
                max_dt: 0.05,
                window: (5.0, 100.0),
            },
        ),
        entry(
            "uniform_bound",
            "uniform-in-time L-infinity bounds on solutions",
            "sup-norm series and running max; growth over the final quarter",
            None,
            ExperimentKind::UniformBound {
                initial: InitialData::Random { mean: 1.0, amplitude: 5.0 },
                t_end: 100.0,
                params: Default::default(),
            },
        ),
        entry(
            "cell_table",
            "the homogenized flux is convex; Oleinik condition between Rankine-Hugoniot states",
            "table of (p, Abar(p), v(0)), convexity check and optional Oleinik check",
            None,
            ExperimentKind::CellTable {
                p_min: -2.0,
                p_max: 2.0,
                n_points: 41,
                convexity_tol: 1e-8,
                oleinik: Some(OleinikSpec {
                    p_minus: -1.0,
                    p_plus: 1.0,
                    alpha: 0.5,
                    margin: 0.0,
                }),
            },
        ),
        entry(
            "shock_build",
            "existence of standing viscous shocks between periodic states with equal homogenized flux",
            "profile, asymptotic states, exponential rates and end-state signs",
            None,
            ExperimentKind::ShockBuild {
                shock: ShockSpec {
                    alpha: 0.5,
                    roots: Some(vec![-1.0, 1.0]),
                    p_range: (-4.0, 4.0),
                    table_points: 41,
                    xi0: None,
                },
            },
        ),
        entry(
            "growth_probe",
            "growth conditions on the derivatives of the flux",
            "empirical sup ratios of |A_u| and |A_y| against (1+|u|)^m and (1+|u|)^n",
            None,
            ExperimentKind::GrowthProbe {
                y_range: (0.0, 1.0),
                u_range: (-10.0, 10.0),
                n_samples: 64,
                m: 1.0,
                n: 1.0,
            },
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    #[test]
    fn names_are_unique_and_anchored() {
        let c = catalog();
        let mut names: Vec<_> = c.iter().map(|e| e.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), c.len());
        assert!(c.iter().all(|e| !e.anchor.is_empty()));
        assert!(names.contains(&"periodic_convergence"));
    }

    #[test]
    fn examples_round_trip_through_the_validator() {
        for e in catalog() {
            let cfg = RunConfig {
                flux: crate::config::FluxSpec::Burgers,
                grid: GridSpec {
                    kind: GridKind::Periodic,
                    x_left: 0.0,
                    x_right: 1.0,
                    n_cells: 64,
                },
                tolerances: Default::default(),
                output_dir: None,
                seed: 1,
                experiments: vec![e.example.clone()],
            };
            let text = toml::to_string(&cfg).unwrap();
            let back = RunConfig::from_toml(&text).unwrap_or_else(|err| panic!("{}: {err}\n{text}", e.name));
            assert_eq!(back.experiments[0], e.example, "{}", e.name);
        }
    }
}
