//! Bracketed scalar root finding.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Absolute tolerance on the abscissa.
    pub xtol: f64,
    /// Stop as soon as `|f| <= ftol`.
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            xtol: 1e-13,
            ftol: 0.0,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Brent's method on a bracket with `f(a)·f(b) <= 0`. `fa`/`fb` are the
/// already-known endpoint values.
pub fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, opts: &RootOptions) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BracketFailure {
            what: "brent",
            lo: a.min(b),
            hi: a.max(b),
        });
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iter in 0..opts.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * opts.xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 || fb.abs() <= opts.ftol {
            return Ok(Root { x: b, fx: fb, iterations: iter });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Ok(Root { x: b, fx: fb, iterations: opts.max_iter })
}

/// Plain bisection, used where the function is only known to be monotone
/// and possibly non-smooth.
pub fn bisect<F>(mut f: F, mut a: f64, mut b: f64, fa: f64, opts: &RootOptions) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = fa;
    let mut mid = 0.5 * (a + b);
    let mut fm = f64::NAN;
    for iter in 0..opts.max_iter {
        mid = 0.5 * (a + b);
        fm = f(mid)?;
        if fm == 0.0 || (b - a).abs() * 0.5 <= opts.xtol || fm.abs() <= opts.ftol {
            return Ok(Root { x: mid, fx: fm, iterations: iter });
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(Root { x: mid, fx: fm, iterations: opts.max_iter })
}

/// Grow `[center - w, center + w]` by doubling `w` until `f` changes sign,
/// at most `max_doublings` times. Returns `(a, b, f(a), f(b))`.
pub fn expand_bracket<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    max_doublings: usize,
    what: &'static str,
) -> Result<(f64, f64, f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut flo = f(lo)?;
    let mut fhi = f(hi)?;
    for _ in 0..=max_doublings {
        if flo.signum() != fhi.signum() || flo == 0.0 || fhi == 0.0 {
            return Ok((lo, hi, flo, fhi));
        }
        let w = hi - lo;
        lo -= 0.5 * w;
        hi += 0.5 * w;
        flo = f(lo)?;
        fhi = f(hi)?;
    }
    Err(Error::BracketFailure { what, lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let f = |x: f64| Ok(x * x * x - 2.0 * x - 5.0);
        let r = brent(f, 2.0, 3.0, f(2.0).unwrap(), f(3.0).unwrap(), &RootOptions::default()).unwrap();
        assert!((r.x - 2.0945514815423265).abs() < 1e-12);
        assert!(r.iterations < 20);
    }

    #[test]
    fn bisect_monotone_step() {
        let f = |x: f64| Ok(if x < 0.3 { -1.0 } else { 1.0 });
        let r = bisect(f, 0.0, 1.0, -1.0, &RootOptions { xtol: 1e-10, ..Default::default() }).unwrap();
        assert!((r.x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn bracket_expands() {
        let (a, b, fa, fb) = expand_bracket(|x| Ok(x - 10.0), -1.0, 1.0, 10, "t").unwrap();
        assert!(a < 10.0 && b >= 10.0 && fa < 0.0 && fb >= 0.0);
        assert!(expand_bracket(|_| Ok(1.0), -1.0, 1.0, 3, "t").is_err());
    }
}
