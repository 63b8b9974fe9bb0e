//! Gauss–Legendre rules and cumulative integrals on uniform grids.

/// Nodes and weights of the 5-point Gauss–Legendre rule on [-1, 1].
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// 5-point Gauss–Legendre on `[a, b]` (exact for degree ≤ 9).
pub fn gauss5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    r * GL5.iter().map(|&(x, w)| w * f(c + r * x)).sum::<f64>()
}

/// Composite 5-point Gauss–Legendre with `pieces` equal panels.
pub fn gauss5_composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, pieces: usize) -> f64 {
    let n = pieces.max(1);
    let h = (b - a) / n as f64;
    (0..n).map(|i| gauss5(&f, a + i as f64 * h, a + (i + 1) as f64 * h)).sum()
}

/// `F(y_i) = ∫_{y_0}^{y_i} f` at the points `y_i = a + i·h`, `i = 0..=n`,
/// accumulated panel by panel.
pub fn cumulative<F: Fn(f64) -> f64>(f: F, a: f64, h: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 0..n {
        let lo = a + i as f64 * h;
        acc += gauss5(&f, lo, lo + h);
        out.push(acc);
    }
    out
}

/// Trapezoid rule on a uniform periodic sample: the plain mean.
pub fn periodic_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_exact_for_polynomials() {
        let v = gauss5(|x| x.powi(9) + 3.0 * x.powi(4), -1.0, 2.0);
        let exact = (2f64.powi(10) - 1.0) / 10.0 + 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn cumulative_sine() {
        let n = 64;
        let c = cumulative(|x| x.sin(), 0.0, 1.0 / n as f64, n);
        for (i, v) in c.iter().enumerate() {
            let y = i as f64 / n as f64;
            assert!((v - (1.0 - y.cos())).abs() < 1e-14);
        }
    }
}
