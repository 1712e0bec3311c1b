//! Restricted (natural) cubic spline basis with four knots.

/// Knot placement quantiles for a four-knot spline.
pub const KNOT_QUANTILES: [f64; 4] = [0.05, 0.35, 0.65, 0.95];

/// Linear-interpolation sample quantile (R type 7).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Knots at [`KNOT_QUANTILES`] of `xs`; `None` unless strictly increasing.
pub fn default_knots(xs: &[f64]) -> Option<[f64; 4]> {
    if xs.is_empty() {
        return None;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let knots = KNOT_QUANTILES.map(|q| quantile(&sorted, q));
    knots.windows(2).all(|w| w[1] > w[0]).then_some(knots)
}

/// The two nonlinear basis terms at `x`, scaled by `(t4 - t1)²`. Together
/// with `x` itself they span cubics that are linear beyond the outer knots.
pub fn nonlinear_terms(x: f64, t: &[f64; 4]) -> [f64; 2] {
    let cube = |z: f64| if z > 0.0 { z * z * z } else { 0.0 };
    let scale = (t[3] - t[0]) * (t[3] - t[0]);
    let term = |j: usize| {
        (cube(x - t[j]) - cube(x - t[2]) * (t[3] - t[j]) / (t[3] - t[2])
            + cube(x - t[3]) * (t[2] - t[j]) / (t[3] - t[2]))
            / scale
    };
    [term(0), term(1)]
}
