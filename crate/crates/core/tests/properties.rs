use homlab::cell::{invariant_measure, solve_cell_by_mean, CellTolerances};
use homlab::evolve::{step, Boundary, Field, Grid1D, StepLimits};
use homlab::flux::{burgers, make_separable_convex_flux, FluxModel};
use homlab::periodic::FourierSeries;
use homlab::shock::{build_shock, translate, RhPair, ShockOptions};
use homlab::stability::{fit_decay, DecayModel};
use proptest::prelude::*;

fn flux() -> FluxModel {
    make_separable_convex_flux(FourierSeries::new(0.1, [(1, 0.4, 0.0), (3, 0.0, 0.2)]), 1.0, 1.5, 1.0).unwrap()
}

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, n)
}

/// CFL step for `flux()`, whose `|∂_u A|` never exceeds 1.5.
fn dt_for(grid: &Grid1D) -> f64 {
    0.45 * grid.dx() / 1.5
}

fn l1(a: &Field, b: &Field) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum::<f64>() * a.grid.dx()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn steps_preserve_order(a in values(48), bump in prop::collection::vec(0.0f64..1.0, 48), steps in 1usize..20) {
        let f = flux();
        let grid = Grid1D::periodic(48).unwrap();
        let mut u = Field::new(grid, a.clone()).unwrap();
        let mut v = Field::new(grid, a.iter().zip(&bump).map(|(x, d)| x + d).collect()).unwrap();
        let dt = dt_for(&grid);
        for _ in 0..steps {
            u = step(&f, &u, dt, &Boundary::Periodic, &StepLimits::default()).unwrap();
            v = step(&f, &v, dt, &Boundary::Periodic, &StepLimits::default()).unwrap();
            for (x, y) in u.values.iter().zip(&v.values) {
                prop_assert!(x <= y);
            }
        }
    }

    #[test]
    fn steps_contract_and_conserve(a in values(40), b in values(40), steps in 1usize..20) {
        let f = flux();
        let grid = Grid1D::periodic(40).unwrap();
        let mut u = Field::new(grid, a).unwrap();
        let mut v = Field::new(grid, b).unwrap();
        let dt = dt_for(&grid);
        let scale = 3.0 * grid.measure();
        for _ in 0..steps {
            let before = l1(&u, &v);
            let (mu, mv) = (u.mass(), v.mass());
            u = step(&f, &u, dt, &Boundary::Periodic, &StepLimits::default()).unwrap();
            v = step(&f, &v, dt, &Boundary::Periodic, &StepLimits::default()).unwrap();
            prop_assert!(l1(&u, &v) <= before + 1e-12 * scale);
            prop_assert!((u.mass() - mu).abs() <= 1e-12 * scale);
            prop_assert!((v.mass() - mv).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn burgers_band_is_invariant(a in prop::collection::vec(-1.0f64..1.0, 64), steps in 1usize..40) {
        let f = burgers();
        let grid = Grid1D::line(-4.0, 4.0, 64).unwrap();
        let mut u = Field::new(grid, a).unwrap();
        let boundary = Boundary::Dirichlet { left: 1.0, right: -1.0 };
        let dt = 0.45 * grid.dx();
        for _ in 0..steps {
            u = step(&f, &u, dt, &boundary, &StepLimits::default()).unwrap();
            prop_assert!(u.values.iter().all(|x| (-1.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn invariant_measure_is_positive_normalised_and_balanced(
        mean in -2.0f64..2.0,
        c1 in -1.0f64..1.0,
        s2 in -0.5f64..0.5,
    ) {
        let b = FourierSeries::new(mean, [(1, c1, 0.0), (2, 0.0, s2)]);
        let m = invariant_measure(|y| b.value(y), 512).unwrap();
        prop_assert!(m.values.iter().all(|&v| v > 0.0));
        prop_assert!((m.mean() - 1.0).abs() < 1e-10);
        let bm = m.average_against(|y| b.value(y));
        prop_assert!((bm - m.drift_constant).abs() < 1e-8 * (1.0 + bm.abs()));
    }

    #[test]
    fn cell_solutions_have_requested_mean(p in -3.0f64..3.0) {
        let f = flux();
        let tol = CellTolerances::default();
        let c = solve_cell_by_mean(&f, p, &tol).unwrap();
        let mean = c.values.iter().sum::<f64>() / c.values.len() as f64;
        prop_assert!((mean - p).abs() <= 10.0 * tol.mean_tol);
        prop_assert!((c.flux_average() - c.alpha).abs() <= 10.0 * tol.mean_tol);
    }

    #[test]
    fn eo_flux_is_monotone_and_consistent(y in 0.0f64..1.0, u in -3.0f64..3.0, d in 0.0f64..2.0) {
        let f = flux();
        prop_assert!((f.eo_flux(y, u, u) - f.eval(y, u)).abs() < 1e-12);
        prop_assert!(f.eo_flux(y, u + d, u) >= f.eo_flux(y, u, u) - 1e-12);
        prop_assert!(f.eo_flux(y, u, u + d) <= f.eo_flux(y, u, u) + 1e-12);
    }

    #[test]
    fn fit_recovers_synthetic_rates(rate in 0.05f64..2.0, exponent in -2.0f64..-0.1) {
        let t: Vec<f64> = (1..=40).map(|i| i as f64 * 0.5).collect();
        let e: Vec<f64> = t.iter().map(|s| 3.0 * (-rate * s).exp()).collect();
        let a: Vec<f64> = t.iter().map(|s| 0.7 * s.powf(exponent)).collect();
        let fe = fit_decay("e", &t, &e, (0.5, 20.0), DecayModel::Exponential).unwrap();
        let fa = fit_decay("a", &t, &a, (0.5, 20.0), DecayModel::Algebraic).unwrap();
        prop_assert!((fe.value - rate).abs() < 1e-9);
        prop_assert!((fa.value - exponent).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn shock_profiles_are_ordered_by_their_value_at_zero(s in 0.02f64..0.96, gap in 0.01f64..0.5) {
        let pair = RhPair::from_roots(&burgers(), 0.5, &[-1.0, 1.0], &CellTolerances::default()).unwrap();
        let (lo, hi) = pair.xi_range();
        let a = lo + s * (hi - lo);
        let b = (a + gap * (hi - lo)).min(hi - 1e-3);
        prop_assume!(a < b);
        let opts = ShockOptions::default();
        let ua = build_shock(&pair, a, &opts).unwrap();
        let ub = build_shock(&pair, b, &opts).unwrap();
        let xs: Vec<f64> = (-160..=160).map(|i| i as f64 / 8.0).collect();
        let va = ua.sample(&xs).unwrap();
        let vb = ub.sample(&xs).unwrap();
        prop_assert!(va.iter().zip(&vb).all(|(x, y)| x <= y));
    }

    #[test]
    fn translates_are_ordered_like_their_value_at_zero(s in 0.1f64..0.9, k in 1i32..3) {
        let f = flux();
        let table = homlab::cell::homogenized_flux_table(&f, -4.0, 4.0, 33, &CellTolerances::default()).unwrap();
        let alpha = table.alpha_at(0.0).unwrap() + 0.5;
        let pair = RhPair::from_table(&table, alpha).unwrap();
        let (lo, hi) = pair.xi_range();
        let u = build_shock(&pair, lo + s * (hi - lo), &ShockOptions::default()).unwrap();
        let shifted = translate(&u, k).unwrap();
        let below = shifted.xi0 <= u.xi0;
        let xs: Vec<f64> = (-80..=80).map(|i| i as f64 / 8.0).collect();
        let a = shifted.sample(&xs).unwrap();
        let b = u.sample(&xs).unwrap();
        if below {
            prop_assert!(a.iter().zip(&b).all(|(x, y)| x <= y));
        } else {
            prop_assert!(a.iter().zip(&b).all(|(x, y)| x >= y));
        }
    }
}
