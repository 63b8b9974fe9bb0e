//! The homogenized flux `Ā` as a sampled table, and structural checks on it.

use super::{solve_cell_by_mean_from, CellSolution, CellTolerances};
use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::roots::{brent, RootOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Sampled graph `p ↦ Ā(p)` on a uniform grid of means.
#[derive(Debug, Clone)]
pub struct HomogenizedFluxTable {
    pub p_samples: Vec<f64>,
    pub alpha_samples: Vec<f64>,
    pub xi_samples: Vec<f64>,
    flux: FluxModel,
    tol: CellTolerances,
}

impl HomogenizedFluxTable {
    pub fn flux(&self) -> &FluxModel {
        &self.flux
    }

    pub fn tolerances(&self) -> &CellTolerances {
        &self.tol
    }

    pub fn len(&self) -> usize {
        self.p_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_samples.is_empty()
    }

    /// Anchor guess for `p` from the nearest sample.
    fn xi_guess(&self, p: f64) -> f64 {
        let i = self
            .p_samples
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - p).abs().total_cmp(&(b.1 - p).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.xi_samples.get(i).map_or(p, |xi| xi + (p - self.p_samples[i]))
    }

    /// Fresh cell solve at `p`, warm-started from the table.
    pub fn solve(&self, p: f64) -> Result<CellSolution> {
        solve_cell_by_mean_from(&self.flux, p, self.xi_guess(p), &self.tol)
    }

    pub fn alpha_at(&self, p: f64) -> Result<f64> {
        self.solve(p).map(|s| s.alpha)
    }

    /// Rows `(p, alpha, xi0)` for CSV export.
    pub fn rows(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.len()).map(move |i| [self.p_samples[i], self.alpha_samples[i], self.xi_samples[i]])
    }
}

/// Tabulate `Ā` on `n_points` uniform means in `[p_min, p_max]`. Entries are
/// solved concurrently; each is checked against the discrete average of the
/// flux along its cell solution.
pub fn homogenized_flux_table(
    flux: &FluxModel,
    p_min: f64,
    p_max: f64,
    n_points: usize,
    tol: &CellTolerances,
) -> Result<HomogenizedFluxTable> {
    if !(p_min < p_max) || n_points < 3 {
        return Err(Error::InvalidParameter(format!(
            "need p_min < p_max and n_points >= 3 (got [{p_min}, {p_max}], {n_points})"
        )));
    }
    let ps: Vec<f64> = (0..n_points)
        .map(|i| p_min + (p_max - p_min) * i as f64 / (n_points - 1) as f64)
        .collect();
    let cells: Vec<CellSolution> = ps
        .par_iter()
        .map(|&p| {
            let s = solve_cell_by_mean_from(flux, p, p, tol)?;
            let gap = (s.alpha - s.flux_average()).abs();
            if gap > 10.0 * tol.mean_tol {
                return Err(Error::CellSolve {
                    p,
                    source: Box::new(Error::Precondition(format!("flux average off by {gap:e}"))),
                });
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    Ok(HomogenizedFluxTable {
        p_samples: ps,
        alpha_samples: cells.iter().map(|c| c.alpha).collect(),
        xi_samples: cells.iter().map(|c| c.xi0).collect(),
        flux: flux.clone(),
        tol: *tol,
    })
}

/// All means `p` in the table range with `Ā(p) = alpha` at a transversal
/// crossing, refined with fresh cell solves, increasing. Tangencies without
/// a sign change are not reported.
pub fn find_rh_pairs(table: &HomogenizedFluxTable, alpha: f64) -> Result<Vec<f64>> {
    let g: Vec<f64> = table.alpha_samples.iter().map(|a| a - alpha).collect();
    let ps = &table.p_samples;
    let n = g.len();
    let mut roots = Vec::new();
    let opts = RootOptions {
        xtol: 1e-13,
        ftol: 0.0,
        max_iter: 200,
    };
    let mut i = 0;
    while i + 1 < n {
        if g[i] == 0.0 {
            // exact hit: keep it only if the neighbours straddle it
            let left = g[..i].iter().rev().find(|v| **v != 0.0);
            let right = g[i + 1..].iter().find(|v| **v != 0.0);
            if let (Some(l), Some(r)) = (left, right) {
                if l.signum() != r.signum() {
                    roots.push(ps[i]);
                }
            }
            i += 1;
            continue;
        }
        if g[i + 1] != 0.0 && g[i].signum() != g[i + 1].signum() {
            let root = brent(|p| Ok(table.alpha_at(p)? - alpha), ps[i], ps[i + 1], g[i], g[i + 1], &opts)?;
            roots.push(root.x);
        }
        i += 1;
    }
    Ok(roots)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OleinikReport {
    pub satisfied: bool,
    pub min_gap: f64,
    pub argmin: f64,
}

/// Number of fresh interior samples used by [`check_oleinik`].
const OLEINIK_SAMPLES: usize = 31;

/// `min |Ā(p) − α|` over interior samples of `(p_minus, p_plus)`: the table
/// samples strictly inside plus `OLEINIK_SAMPLES` uniform fresh solves.
pub fn check_oleinik(
    table: &HomogenizedFluxTable,
    p_minus: f64,
    p_plus: f64,
    alpha: f64,
    margin: f64,
) -> Result<OleinikReport> {
    if !(p_minus < p_plus) {
        return Err(Error::InvalidParameter("need p_minus < p_plus".into()));
    }
    let mut samples: Vec<(f64, f64)> = table
        .p_samples
        .iter()
        .zip(&table.alpha_samples)
        .filter(|(p, _)| **p > p_minus && **p < p_plus)
        .map(|(p, a)| (*p, *a))
        .collect();
    let fresh: Vec<(f64, f64)> = (1..=OLEINIK_SAMPLES)
        .into_par_iter()
        .map(|k| {
            let p = p_minus + (p_plus - p_minus) * k as f64 / (OLEINIK_SAMPLES + 1) as f64;
            table.alpha_at(p).map(|a| (p, a))
        })
        .collect::<Result<_>>()?;
    samples.extend(fresh);
    let (argmin, min_gap) = samples
        .iter()
        .map(|(p, a)| (*p, (a - alpha).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((f64::NAN, f64::INFINITY));
    Ok(OleinikReport {
        satisfied: min_gap > margin,
        min_gap,
        argmin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub convex: bool,
    /// Largest `Ā(p_j) − chord(p_j)` (positive = non-convex).
    pub worst_violation: f64,
    /// Most negative `Ā(p_j) − chord(p_j)`.
    pub most_negative: f64,
    pub triples_checked: usize,
}

/// Convexity of the tabulated `Ā` on all consecutive triples plus 100 seeded
/// random triples `p_i < p_j < p_k`: `Ā(p_j) ≤ λĀ(p_i) + (1−λ)Ā(p_k)`.
pub fn check_convexity(table: &HomogenizedFluxTable, tolerance: f64) -> Result<ConvexityReport> {
    let n = table.len();
    if n < 3 {
        return Err(Error::InsufficientData("convexity check needs >= 3 samples".into()));
    }
    let (p, a) = (&table.p_samples, &table.alpha_samples);
    let gap = |i: usize, j: usize, k: usize| {
        let lambda = (p[k] - p[j]) / (p[k] - p[i]);
        a[j] - (lambda * a[i] + (1.0 - lambda) * a[k])
    };
    let mut triples: Vec<(usize, usize, usize)> = (0..n - 2).map(|i| (i, i + 1, i + 2)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..100 {
        let mut idx = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
        idx.sort_unstable();
        if idx[0] < idx[1] && idx[1] < idx[2] {
            triples.push((idx[0], idx[1], idx[2]));
        } else {
            let i = rng.gen_range(0..n - 2);
            let k = rng.gen_range(i + 2..n);
            triples.push((i, rng.gen_range(i + 1..k), k));
        }
    }
    let gaps: Vec<f64> = triples.iter().map(|&(i, j, k)| gap(i, j, k)).collect();
    let worst = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let most_negative = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ConvexityReport {
        convex: worst <= tolerance,
        worst_violation: worst,
        most_negative,
        triples_checked: triples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{burgers, make_homogeneous_flux, Polynomial};

    #[test]
    fn burgers_table_roots_and_oleinik() {
        let t = homogenized_flux_table(&burgers(), -2.0, 2.0, 21, &CellTolerances::default()).unwrap();
        for (p, a) in t.p_samples.iter().zip(&t.alpha_samples) {
            assert!((a - p * p / 2.0).abs() < 1e-15);
        }
        let roots = find_rh_pairs(&t, 0.5).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + 1.0).abs() < 1e-12 && (roots[1] - 1.0).abs() < 1e-12);
        let ol = check_oleinik(&t, -1.0, 1.0, 0.5, 1e-6).unwrap();
        assert!(ol.satisfied);
        let p1 = -1.0 + 2.0 / 32.0;
        assert!((ol.argmin - p1).abs() < 1e-15 && (ol.min_gap - (0.5 - p1 * p1 / 2.0)).abs() < 1e-12, "{ol:?}");
        let cv = check_convexity(&t, 1e-8).unwrap();
        assert!(cv.convex && cv.worst_violation <= 1e-12);
    }

    #[test]
    fn tangency_breaks_oleinik_and_is_not_a_root() {
        // Ā = f = u⁴ − u² touches 0 at u = 0 between the roots ±1
        let f = make_homogeneous_flux(Polynomial::new(vec![0.0, 0.0, -1.0, 0.0, 1.0]));
        let t = homogenized_flux_table(&f, -1.5, 1.5, 31, &CellTolerances::default()).unwrap();
        let roots = find_rh_pairs(&t, 0.0).unwrap();
        assert_eq!(roots.len(), 2, "{roots:?}");
        let ol = check_oleinik(&t, roots[0], roots[1], 0.0, 1e-6).unwrap();
        assert!(!ol.satisfied);
        assert!(ol.min_gap < 1e-12);
        assert!(!check_convexity(&t, 1e-8).unwrap().convex);
    }

    #[test]
    fn no_crossing_gives_empty() {
        let t = homogenized_flux_table(&burgers(), -1.0, 1.0, 11, &CellTolerances::default()).unwrap();
        assert!(find_rh_pairs(&t, -1.0).unwrap().is_empty());
        assert!(homogenized_flux_table(&burgers(), 1.0, 1.0, 11, &CellTolerances::default()).is_err());
    }
}
