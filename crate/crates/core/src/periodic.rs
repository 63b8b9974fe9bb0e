//! 1-periodic coefficient functions given as truncated Fourier series.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// One harmonic `cos_coeff·cos(2πky) + sin_coeff·sin(2πky)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub k: u32,
    pub cos: f64,
    pub sin: f64,
}

/// `mean + Σ (c_k cos 2πky + s_k sin 2πky)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierSeries {
    pub mean: f64,
    #[serde(default)]
    pub terms: Vec<Harmonic>,
}

impl FourierSeries {
    pub fn constant(mean: f64) -> Self {
        Self {
            mean,
            terms: Vec::new(),
        }
    }

    pub fn new(mean: f64, terms: impl IntoIterator<Item = (u32, f64, f64)>) -> Self {
        Self {
            mean,
            terms: terms
                .into_iter()
                .map(|(k, cos, sin)| Harmonic { k, cos, sin })
                .collect(),
        }
    }

    pub fn cosine(mean: f64, amplitude: f64) -> Self {
        Self::new(mean, [(1, amplitude, 0.0)])
    }

    pub fn sine(mean: f64, amplitude: f64) -> Self {
        Self::new(mean, [(1, 0.0, amplitude)])
    }

    pub fn is_constant(&self) -> bool {
        self.terms
            .iter()
            .all(|h| h.k == 0 || (h.cos == 0.0 && h.sin == 0.0))
    }

    /// Mean over one period (k = 0 terms fold into the mean).
    pub fn average(&self) -> f64 {
        self.mean
            + self
                .terms
                .iter()
                .filter(|h| h.k == 0)
                .map(|h| h.cos)
                .sum::<f64>()
    }

    pub fn value(&self, y: f64) -> f64 {
        let mut acc = self.mean;
        for h in &self.terms {
            let (s, c) = (TAU * h.k as f64 * y).sin_cos();
            acc += h.cos * c + h.sin * s;
        }
        acc
    }

    pub fn derivative(&self, y: f64) -> f64 {
        let mut acc = 0.0;
        for h in &self.terms {
            let w = TAU * h.k as f64;
            let (s, c) = (w * y).sin_cos();
            acc += w * (h.sin * c - h.cos * s);
        }
        acc
    }

    /// `sup_y |f'(y)|` bounded by the sum of harmonic amplitudes.
    pub fn derivative_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|h| TAU * h.k as f64 * h.cos.hypot(h.sin))
            .sum()
    }

    /// `sup_y |f(y)|` bound.
    pub fn abs_bound(&self) -> f64 {
        self.mean.abs() + self.terms.iter().map(|h| h.cos.hypot(h.sin)).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_matches_finite_differences() {
        let f = FourierSeries::new(0.3, [(1, 0.5, -0.2), (3, 0.1, 0.05)]);
        for &y in &[0.0, 0.17, 0.5, 0.93] {
            let h = 1e-5;
            let fd = (f.value(y + h) - f.value(y - h)) / (2.0 * h);
            assert!((fd - f.derivative(y)).abs() < 1e-7);
        }
    }

    #[test]
    fn periodic_and_mean() {
        let f = FourierSeries::cosine(1.0, 0.5);
        assert!((f.value(0.25) - 1.0).abs() < 1e-15);
        assert!((f.value(1.3) - f.value(0.3)).abs() < 1e-14);
        assert_eq!(f.average(), 1.0);
        assert!(FourierSeries::constant(2.0).is_constant());
    }
}
