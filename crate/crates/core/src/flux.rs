//! Heterogeneous flux laws `A(y, u)`, 1-periodic in `y`.
//!
//! A [`FluxModel`] wraps a [`FluxLaw`] together with structural metadata.
//! Built-in families supply analytic derivatives and closed-form
//! Engquist–Osher splittings; user laws that only provide `eval` fall back to
//! centered finite differences (`h = 1e-6`) and a sign-tracking splitting.

use crate::error::{Error, Result};
use crate::periodic::FourierSeries;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Step used by the finite-difference fallback derivatives.
pub const FD_STEP: f64 = 1e-6;

/// Number of sign probes of `∂_u A` on `[0, u]` in the generic splitting.
const SPLIT_PROBES: usize = 16;

pub trait FluxLaw: Send + Sync + fmt::Debug {
    fn eval(&self, y: f64, u: f64) -> f64;

    fn d_u(&self, y: f64, u: f64) -> f64 {
        (self.eval(y, u + FD_STEP) - self.eval(y, u - FD_STEP)) / (2.0 * FD_STEP)
    }

    fn d_y(&self, y: f64, u: f64) -> f64 {
        (self.eval(y + FD_STEP, u) - self.eval(y - FD_STEP, u)) / (2.0 * FD_STEP)
    }

    /// Engquist–Osher splitting `(A⁺, A⁻)` with `A⁺ + A⁻ = A`,
    /// `A⁺(y,u) = A(y,0) + ∫₀ᵘ max(∂_u A, 0)`.
    fn eo_split(&self, y: f64, u: f64) -> (f64, f64) {
        generic_eo_split(self, y, u)
    }
}

/// Splitting for an arbitrary law: locate the sign changes of `∂_u A` on
/// `[0, u]` from `SPLIT_PROBES` samples (refined by bisection) and sum the
/// increments of `A` over the pieces where `∂_u A ≥ 0`.
pub fn generic_eo_split<L: FluxLaw + ?Sized>(law: &L, y: f64, u: f64) -> (f64, f64) {
    let a0 = law.eval(y, 0.0);
    let au = law.eval(y, u);
    if u == 0.0 {
        return (a0, 0.0);
    }
    let mut breaks = vec![0.0];
    let mut prev_s = 0.0;
    let mut prev_g = law.d_u(y, 0.0);
    for i in 1..=SPLIT_PROBES {
        let s = u * i as f64 / SPLIT_PROBES as f64;
        let g = law.d_u(y, s);
        if (prev_g > 0.0) != (g > 0.0) {
            let (mut lo, mut hi, glo) = (prev_s, s, prev_g);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if (law.d_u(y, mid) > 0.0) == (glo > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            breaks.push(0.5 * (lo + hi));
        }
        prev_s = s;
        prev_g = g;
    }
    breaks.push(u);
    let mut plus = a0;
    let mut left_val = a0;
    for w in breaks.windows(2) {
        let right_val = if w[1] == u { au } else { law.eval(y, w[1]) };
        if law.d_u(y, 0.5 * (w[0] + w[1])) > 0.0 {
            plus += right_val - left_val;
        }
        left_val = right_val;
    }
    (plus, au - plus)
}

/// Splitting of a convex function `f` with minimiser `u_min`:
/// `f⁺(u) = f(0) + f(max(u, u_min)) − f(max(0, u_min))`.
fn convex_split(f: impl Fn(f64) -> f64, u_min: f64, u: f64) -> (f64, f64) {
    let fu = f(u);
    let plus = f(0.0) + f(u.max(u_min)) - f(u_min.max(0.0));
    (plus, fu - plus)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FluxMeta {
    pub convex_in_u: bool,
    pub homogeneous_in_y: bool,
    pub linear_in_u: bool,
}

/// State intervals on which `u ↦ A(y, u)` is affine for every `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearityWindow {
    pub affine_ranges: Vec<(f64, f64)>,
}

impl LinearityWindow {
    /// Largest `η` such that `[v - η, v + η]` lies inside a single affine
    /// range for every sample of `profile` (`None` if some sample is outside).
    pub fn half_width(&self, profile: &[f64]) -> Option<f64> {
        let (lo, hi) = profile
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        self.affine_ranges
            .iter()
            .filter(|(a, b)| *a <= lo && hi <= *b)
            .map(|(a, b)| (lo - a).min(b - hi))
            .fold(None, |acc: Option<f64>, eta| Some(acc.map_or(eta, |x| x.max(eta))))
    }
}

/// `A(y, u) = a(y)·u`.
#[derive(Debug, Clone)]
pub struct LinearFlux {
    pub coefficient: FourierSeries,
}

impl FluxLaw for LinearFlux {
    fn eval(&self, y: f64, u: f64) -> f64 {
        self.coefficient.value(y) * u
    }
    fn d_u(&self, y: f64, _u: f64) -> f64 {
        self.coefficient.value(y)
    }
    fn d_y(&self, y: f64, u: f64) -> f64 {
        self.coefficient.derivative(y) * u
    }
    fn eo_split(&self, y: f64, u: f64) -> (f64, f64) {
        let a = self.coefficient.value(y);
        (a.max(0.0) * u, a.min(0.0) * u)
    }
}

/// Convex function with slope `-a_minus` below `-threshold`, `a_plus` above
/// `threshold`, and a C² blend in between (`f''` a downward parabola).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexBlend {
    pub a_minus: f64,
    pub a_plus: f64,
    pub threshold: f64,
    curvature: f64,
    argmin: f64,
}

impl ConvexBlend {
    pub fn new(a_minus: f64, a_plus: f64, threshold: f64) -> Result<Self> {
        if !(a_minus > 0.0) || !(a_plus > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "slopes must be positive (a_minus = {a_minus}, a_plus = {a_plus})"
            )));
        }
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(Error::InvalidParameter(format!("threshold must be positive, got {threshold}")));
        }
        let mut blend = Self {
            a_minus,
            a_plus,
            threshold,
            curvature: 3.0 * (a_plus + a_minus) / (4.0 * threshold),
            argmin: 0.0,
        };
        // f' is increasing on (-T, T) from -a_minus to a_plus.
        let (mut lo, mut hi) = (-threshold, threshold);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if blend.derivative(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        blend.argmin = 0.5 * (lo + hi);
        Ok(blend)
    }

    pub fn argmin(&self) -> f64 {
        self.argmin
    }

    pub fn value(&self, u: f64) -> f64 {
        let t = self.threshold;
        if u >= t {
            self.a_plus * u
        } else if u <= -t {
            -self.a_minus * u
        } else {
            let g = 0.5 * (u + t).powi(2) - ((u.powi(4) - t.powi(4)) / 4.0 + t.powi(3) * (u + t)) / (3.0 * t * t);
            self.a_minus * t - self.a_minus * (u + t) + self.curvature * g
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        let t = self.threshold;
        if u >= t {
            self.a_plus
        } else if u <= -t {
            -self.a_minus
        } else {
            -self.a_minus + self.curvature * ((u + t) - (u.powi(3) + t.powi(3)) / (3.0 * t * t))
        }
    }

    pub fn second_derivative(&self, u: f64) -> f64 {
        let t = self.threshold;
        if u.abs() >= t {
            0.0
        } else {
            self.curvature * (1.0 - u * u / (t * t))
        }
    }
}

/// `A(y, u) = V(y) + f(u)` with `f` a [`ConvexBlend`].
#[derive(Debug, Clone)]
pub struct SeparableConvexFlux {
    pub potential: FourierSeries,
    pub blend: ConvexBlend,
}

impl FluxLaw for SeparableConvexFlux {
    fn eval(&self, y: f64, u: f64) -> f64 {
        self.potential.value(y) + self.blend.value(u)
    }
    fn d_u(&self, _y: f64, u: f64) -> f64 {
        self.blend.derivative(u)
    }
    fn d_y(&self, y: f64, _u: f64) -> f64 {
        self.potential.derivative(y)
    }
    fn eo_split(&self, y: f64, u: f64) -> (f64, f64) {
        let (p, m) = convex_split(|s| self.blend.value(s), self.blend.argmin, u);
        (p + self.potential.value(y), m)
    }
}

/// Polynomial `f(u) = Σ c_k u^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn burgers() -> Self {
        Self::new(vec![0.0, 0.0, 0.5])
    }

    pub fn value(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    pub fn derivative(&self, u: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * u + k as f64 * c)
    }

    fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0)
    }

    /// Minimiser when the polynomial is a convex quadratic.
    fn convex_quadratic_argmin(&self) -> Option<f64> {
        if self.degree() == 2 && self.coeffs[2] > 0.0 {
            let c1 = self.coeffs.get(1).copied().unwrap_or(0.0);
            Some(-c1 / (2.0 * self.coeffs[2]))
        } else {
            None
        }
    }
}

/// `A(y, u) = f(u)`, no `y` dependence.
#[derive(Debug, Clone)]
pub struct HomogeneousFlux {
    pub f: Polynomial,
}

impl FluxLaw for HomogeneousFlux {
    fn eval(&self, _y: f64, u: f64) -> f64 {
        self.f.value(u)
    }
    fn d_u(&self, _y: f64, u: f64) -> f64 {
        self.f.derivative(u)
    }
    fn d_y(&self, _y: f64, _u: f64) -> f64 {
        0.0
    }
    fn eo_split(&self, y: f64, u: f64) -> (f64, f64) {
        match self.f.convex_quadratic_argmin() {
            Some(umin) => convex_split(|s| self.f.value(s), umin, u),
            None if self.f.degree() <= 1 => {
                let a = self.f.derivative(0.0);
                let c0 = self.f.value(0.0);
                (c0 + a.max(0.0) * u, a.min(0.0) * u)
            }
            None => generic_eo_split(self, y, u),
        }
    }
}

/// A law given only through its values; derivatives by finite differences.
pub struct CustomFlux {
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomFlux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomFlux")
    }
}

impl FluxLaw for CustomFlux {
    fn eval(&self, y: f64, u: f64) -> f64 {
        (self.eval)(y, u)
    }
}

/// A flux law plus structural metadata. Cheap to clone and shareable
/// across threads.
#[derive(Clone)]
pub struct FluxModel {
    law: Arc<dyn FluxLaw>,
    name: String,
    pub meta: FluxMeta,
    pub lipschitz_bound: Option<f64>,
    pub linearity_window: Option<LinearityWindow>,
}

impl fmt::Debug for FluxModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FluxModel")
            .field("name", &self.name)
            .field("law", &self.law)
            .field("meta", &self.meta)
            .finish()
    }
}

impl FluxModel {
    pub fn from_law(name: impl Into<String>, law: Arc<dyn FluxLaw>, meta: FluxMeta) -> Self {
        Self {
            law,
            name: name.into(),
            meta,
            lipschitz_bound: None,
            linearity_window: None,
        }
    }

    /// User flux defined by its values only (must be 1-periodic in `y`).
    pub fn custom<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_law(name, Arc::new(CustomFlux { eval: Arc::new(eval) }), FluxMeta::default())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn law(&self) -> &dyn FluxLaw {
        self.law.as_ref()
    }

    #[inline]
    pub fn eval(&self, y: f64, u: f64) -> f64 {
        self.law.eval(y, u)
    }

    #[inline]
    pub fn d_u(&self, y: f64, u: f64) -> f64 {
        self.law.d_u(y, u)
    }

    #[inline]
    pub fn d_y(&self, y: f64, u: f64) -> f64 {
        self.law.d_y(y, u)
    }

    #[inline]
    pub fn eo_split(&self, y: f64, u: f64) -> (f64, f64) {
        self.law.eo_split(y, u)
    }

    /// Engquist–Osher numerical flux between left state `ul` and right
    /// state `ur` at interface position `y`.
    #[inline]
    pub fn eo_flux(&self, y: f64, ul: f64, ur: f64) -> f64 {
        self.law.eo_split(y, ul).0 + self.law.eo_split(y, ur).1
    }
}

pub fn make_linear_flux(coefficient: FourierSeries) -> FluxModel {
    let bound = coefficient.abs_bound();
    let homogeneous = coefficient.is_constant();
    let mut model = FluxModel::from_law(
        "linear",
        Arc::new(LinearFlux { coefficient }),
        FluxMeta {
            convex_in_u: true,
            homogeneous_in_y: homogeneous,
            linear_in_u: true,
        },
    );
    model.lipschitz_bound = Some(bound);
    model.linearity_window = Some(LinearityWindow {
        affine_ranges: vec![(f64::NEG_INFINITY, f64::INFINITY)],
    });
    model
}

pub fn make_separable_convex_flux(
    potential: FourierSeries,
    a_minus: f64,
    a_plus: f64,
    threshold: f64,
) -> Result<FluxModel> {
    let blend = ConvexBlend::new(a_minus, a_plus, threshold)?;
    let homogeneous = potential.is_constant();
    let mut model = FluxModel::from_law(
        "separable_convex",
        Arc::new(SeparableConvexFlux { potential, blend }),
        FluxMeta {
            convex_in_u: true,
            homogeneous_in_y: homogeneous,
            linear_in_u: false,
        },
    );
    model.lipschitz_bound = Some(a_minus.max(a_plus));
    model.linearity_window = Some(LinearityWindow {
        affine_ranges: vec![(f64::NEG_INFINITY, -threshold), (threshold, f64::INFINITY)],
    });
    Ok(model)
}

pub fn make_homogeneous_flux(f: Polynomial) -> FluxModel {
    let degree = f.degree();
    let convex = degree <= 1 || (degree == 2 && f.coeffs[2] > 0.0);
    let lipschitz = (degree <= 1).then(|| f.derivative(0.0).abs());
    let mut model = FluxModel::from_law(
        "homogeneous",
        Arc::new(HomogeneousFlux { f }),
        FluxMeta {
            convex_in_u: convex,
            homogeneous_in_y: true,
            linear_in_u: degree <= 1,
        },
    );
    model.lipschitz_bound = lipschitz;
    model
}

/// Burgers flux `u²/2`.
pub fn burgers() -> FluxModel {
    let mut m = make_homogeneous_flux(Polynomial::burgers());
    m.name = "burgers".into();
    m
}

/// Sampling box for [`probe_growth_hypotheses`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeBox {
    pub y_range: (f64, f64),
    pub u_range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub m: f64,
    pub n: f64,
    /// `sup |∂_u A| / (1 + |u|)^m` over the samples.
    pub sup_du_ratio: f64,
    /// `sup |∂_y A| / (1 + |u|)^n` over the samples.
    pub sup_dy_ratio: f64,
    pub samples: usize,
    pub nonfinite: usize,
}

/// Empirical growth ratios on a sample grid. Advisory: a finite sample
/// cannot certify asymptotic growth conditions.
pub fn probe_growth_hypotheses(flux: &FluxModel, bx: ProbeBox, n_samples: usize, m: f64, n: f64) -> Result<HypothesisReport> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter("n_samples must be >= 2".into()));
    }
    let lin = |(a, b): (f64, f64), i: usize| a + (b - a) * i as f64 / (n_samples - 1) as f64;
    let mut report = HypothesisReport {
        m,
        n,
        sup_du_ratio: 0.0,
        sup_dy_ratio: 0.0,
        samples: 0,
        nonfinite: 0,
    };
    for i in 0..n_samples {
        let y = lin(bx.y_range, i);
        for j in 0..n_samples {
            let u = lin(bx.u_range, j);
            report.samples += 1;
            let (val, du, dy) = (flux.eval(y, u), flux.d_u(y, u), flux.d_y(y, u));
            if !(val.is_finite() && du.is_finite() && dy.is_finite()) {
                report.nonfinite += 1;
                continue;
            }
            report.sup_du_ratio = report.sup_du_ratio.max(du.abs() / (1.0 + u.abs()).powf(m));
            report.sup_dy_ratio = report.sup_dy_ratio.max(dy.abs() / (1.0 + u.abs()).powf(n));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn wavy() -> FourierSeries {
        FourierSeries::cosine(1.0, 0.5)
    }

    #[test]
    fn linear_flux_examples() {
        let f = make_linear_flux(FourierSeries::constant(2.0));
        assert_eq!(f.eval(0.3, 5.0), 10.0);
        assert!(f.meta.linear_in_u);
        let f = make_linear_flux(wavy());
        assert!((f.d_u(0.25, 7.0) - 1.0).abs() < 1e-15);
        assert!(f.d_y(0.0, 3.0).abs() < 1e-14);
        assert!((f.d_y(0.25, 3.0) - (-3.0 * PI)).abs() < 1e-12);
        assert!((f.d_y(0.25, 3.0) + 9.42478).abs() < 1e-5);
    }

    #[test]
    fn separable_examples() {
        let f = make_separable_convex_flux(FourierSeries::constant(0.0), 1.0, 1.0, 1.0).unwrap();
        assert!((f.eval(0.2, 3.0) - 3.0).abs() < 1e-15);
        let f = make_separable_convex_flux(FourierSeries::sine(0.0, 1.0), 1.0, 1.0, 1.0).unwrap();
        assert!((f.eval(0.25, 3.0) - 4.0).abs() < 1e-14);
        let f = make_separable_convex_flux(FourierSeries::sine(0.0, 1.0), 0.7, 1.3, 1.0).unwrap();
        assert_eq!(f.d_u(0.4, -5.0), -0.7);
        assert!(make_separable_convex_flux(FourierSeries::constant(0.0), 0.0, 1.0, 1.0).is_err());
        assert!(make_separable_convex_flux(FourierSeries::constant(0.0), 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn blend_is_c2_and_convex() {
        let b = ConvexBlend::new(0.7, 1.3, 1.5).unwrap();
        let t = 1.5;
        for &u in &[-t, t] {
            for &s in &[-1e-9, 1e-9] {
                assert!((b.value(u + s) - b.value(u)).abs() < 1e-8);
                assert!((b.derivative(u + s) - b.derivative(u)).abs() < 1e-8);
                assert!(b.second_derivative(u + s).abs() < 1e-8);
            }
        }
        assert!((b.value(t) - 1.3 * t).abs() < 1e-14);
        assert!((b.value(-t) - 0.7 * t).abs() < 1e-14);
        for i in 0..100 {
            let u = -2.0 + 4.0 * i as f64 / 99.0;
            assert!(b.second_derivative(u) >= 0.0);
            let h = 1e-5;
            let fd = (b.value(u + h) - b.value(u - h)) / (2.0 * h);
            assert!((fd - b.derivative(u)).abs() < 1e-8);
        }
        assert!(b.derivative(b.argmin()).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_examples() {
        let f = burgers();
        assert_eq!(f.eval(0.7, 2.0), 2.0);
        assert_eq!(f.d_u(0.1, 3.0), 3.0);
        assert_eq!(f.d_y(0.1, 4.0), 0.0);
        assert!(f.meta.homogeneous_in_y && f.meta.convex_in_u);
    }

    #[test]
    fn eo_split_consistency_and_monotonicity() {
        let fluxes = vec![
            burgers(),
            make_linear_flux(FourierSeries::cosine(0.2, 0.9)),
            make_separable_convex_flux(FourierSeries::sine(0.1, 0.5), 0.8, 1.2, 1.0).unwrap(),
            make_homogeneous_flux(Polynomial::new(vec![0.0, 0.0, -1.0, 0.0, 1.0])),
            FluxModel::custom("c", |y, u| (1.0 + 0.3 * (2.0 * PI * y).sin()) * u * u * u / 3.0 - u),
        ];
        for f in &fluxes {
            for i in 0..41 {
                let y = 0.37;
                let u = -2.0 + 0.1 * i as f64;
                let (p, m) = f.eo_split(y, u);
                assert!((p + m - f.eval(y, u)).abs() < 1e-12, "{f:?} u={u}");
                let (p2, m2) = f.eo_split(y, u + 0.05);
                assert!(p2 >= p - 1e-12, "{f:?} plus decreasing at {u}");
                assert!(m2 <= m + 1e-12, "{f:?} minus increasing at {u}");
            }
        }
    }

    #[test]
    fn generic_split_matches_closed_form() {
        let f = make_separable_convex_flux(FourierSeries::sine(0.1, 0.5), 0.8, 1.2, 1.0).unwrap();
        for i in 0..21 {
            let u = -3.0 + 0.3 * i as f64;
            let (p, m) = f.eo_split(0.3, u);
            let (gp, gm) = generic_eo_split(f.law(), 0.3, u);
            assert!((p - gp).abs() < 1e-12 && (m - gm).abs() < 1e-12);
        }
    }

    #[test]
    fn linearity_window_half_width() {
        let f = make_separable_convex_flux(FourierSeries::constant(0.0), 1.0, 1.0, 1.0).unwrap();
        let w = f.linearity_window.as_ref().unwrap();
        assert_eq!(w.half_width(&[3.0, 4.0]), Some(2.0));
        assert_eq!(w.half_width(&[0.5, 4.0]), None);
    }

    #[test]
    fn probe_reports() {
        let bx = ProbeBox {
            y_range: (0.0, 1.0),
            u_range: (-5.0, 5.0),
        };
        let r = probe_growth_hypotheses(&make_linear_flux(FourierSeries::constant(1.0)), bx, 11, 0.0, 0.0).unwrap();
        assert!((r.sup_du_ratio - 1.0).abs() < 1e-15);
        let r = probe_growth_hypotheses(&burgers(), bx, 11, 1.0, 0.0).unwrap();
        assert!(r.sup_du_ratio < 1.0);
        let nan = FluxModel::custom("nan", |_, u| if u > 4.0 { f64::NAN } else { u });
        assert!(probe_growth_hypotheses(&nan, bx, 11, 0.0, 0.0).unwrap().nonfinite > 0);
        assert!(probe_growth_hypotheses(&nan, bx, 1, 0.0, 0.0).is_err());
    }
}
