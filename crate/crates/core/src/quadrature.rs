//! Composite rules on uniform grids, plus an adaptive Simpson integrator for
//! smooth integrands given as closures.


use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Rule {
    #[default]
    Trapezoid,
    /// Composite Simpson; needs an odd number of samples.
    Simpson,
}

/// Integrates samples `y` taken at uniform spacing `h`.
pub fn integrate_uniform(y: &[f64], h: f64, rule: Rule) -> Result<f64> {
    let n = y.len();
    if n < 2 {
        return Err(Error::invalid("samples", n as f64, "need at least two samples"));
    }
    match rule {
        Rule::Trapezoid => {
            let inner: f64 = y[1..n - 1].iter().sum();
            Ok(h * (0.5 * (y[0] + y[n - 1]) + inner))
        }
        Rule::Simpson => {
            if n % 2 == 0 {
                return Err(Error::invalid("samples", n as f64, "Simpson needs an odd sample count"));
            }
            let mut acc = y[0] + y[n - 1];
            for (i, yi) in y.iter().enumerate().take(n - 1).skip(1) {
                acc += if i % 2 == 1 { 4.0 * yi } else { 2.0 * yi };
            }
            Ok(acc * h / 3.0)
        }
    }
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(&f, a, b, fa, fm, fb, whole, tol, 48)
}
