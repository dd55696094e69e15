//! Adaptive Simpson quadrature with an oscillation-aware panel decomposition.

/// Composite adaptive Simpson over panels of at most `panel_width`.
///
/// The panel width is chosen by the caller to resolve the fastest known
/// oscillation (a quarter period); adaptive subdivision inside each panel
/// absorbs whatever structure the integrand adds on top.
pub(crate) fn integrate_oscillatory<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    panel_width: f64,
    tol: f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = ((b - a) / panel_width).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let panel_tol = tol / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == n { b } else { lo + h };
        total += adaptive_simpson(f, lo, hi, panel_tol);
    }
    total
}

/// Adaptive Simpson with Richardson error control.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 28)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
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
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = (left + right - whole) / 15.0;
    if depth == 0 || err.abs() <= tol {
        return left + right + err;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Scan `f` in geometric steps from `start` until `consecutive` successive
/// evaluations fall below `threshold` in magnitude; returns the scan point
/// where that streak completed, or None if `limit` was reached first.
pub(crate) fn find_decay_cut<F: Fn(f64) -> f64>(
    f: &F,
    threshold: f64,
    start: f64,
    factor: f64,
    limit: f64,
    consecutive: usize,
) -> Option<f64> {
    let mut s = start;
    let mut streak = 0;
    while s <= limit {
        if f(s).abs() < threshold {
            streak += 1;
            if streak >= consecutive {
                return Some(s);
            }
        } else {
            streak = 0;
        }
        s *= factor;
    }
    None
}
