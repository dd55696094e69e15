//! Cumulant coefficients a_n of ln I0(s) = sum_n a_n s^n / n!.
//!
//! The a_n drive the whole cumulant chain: a single random-phase term
//! c cos(theta) has cumulants kappa_n = a_n c^n.
//!
//! Floating-point series composition loses roughly one digit per order to
//! cancellation, so the coefficients are generated once in exact rational
//! arithmetic ([`log_i0_coefficients`]) and the resulting doubles are also
//! frozen in [`A2P`]; a test keeps the two in lockstep.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};

/// Highest order carried by the exact tables.
pub const MAX_ORDER: usize = 32;

/// a_{2p} for p = 1..=16 (a_2 = 1/2, a_4 = -3/8, ...). Index p-1.
pub const A2P: [f64; 16] = [
    0.5,
    -0.375,
    1.25,
    -9.0234375,
    112.21875,
    -2134.04296875,
    57563.0859375,
    -2090225.1914978027344,
    98309215.643310546875,
    -5813706019.2453918457,
    422216477862.25067139,
    -36941840911709.944224,
    3832680576037326.4203,
    -465235214761021933.55,
    65322297567857666266.,
    -1.0504544921536292845e22,
];

/// b_p = a_{2p}/(2p)!: the coefficient of y^p in ln I0 as a series in
/// y = s^2. The coefficient of x^{2p} in ln J0(x) is (-1)^p b_p.
pub const B_P: [f64; 16] = [
    0.25,
    -0.015625,
    0.0017361111111111111,
    -0.00022379557291666667,
    0.000030924479166666667,
    -4.4551896460262346e-6,
    6.602915146093159e-7,
    -9.990183922348830e-8,
    1.5355119860522422e-8,
    -2.3896178307660346e-9,
    3.7563719259956698e-10,
    -5.954055294285860e-11,
    9.503500434476419e-12,
    -1.5259199736005504e-12,
    2.4626425371665472e-13,
    -3.992137540376288e-14,
];

/// ln J0(x) = sum_p beta_p x^{2p} inside the first-zero radius; beta_p is
/// used for analytic tail corrections of long products of J0 factors.
pub fn ln_j0_coeff(p: usize) -> f64 {
    if p % 2 == 0 {
        B_P[p - 1]
    } else {
        -B_P[p - 1]
    }
}

/// Cumulant coefficients a_n, n = 0..=n_max; odd entries are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantCoefficients {
    pub a: Vec<f64>,
}

impl CumulantCoefficients {
    /// a_{2p}, panicking if the order is out of range.
    pub fn a2p(&self, p: usize) -> f64 {
        self.a[2 * p]
    }
}

/// Compute the a_n exactly by composing ln with the I0 power series in
/// rational arithmetic, returning the coefficients rounded to doubles.
///
/// Beyond n = 32 the coefficients are astronomically large and alternate;
/// double output would be meaningless, so such requests are rejected.
pub fn log_i0_coefficients(n_max: usize) -> Result<CumulantCoefficients> {
    if n_max > MAX_ORDER {
        return Err(Error::OrderTooLarge {
            requested: n_max,
            max: MAX_ORDER,
        });
    }
    let p_max = n_max / 2;
    let b = exact_ln_i0_y_coefficients(p_max);

    let mut a = vec![0.0; n_max + 1];
    let mut fact = BigInt::from(1);
    let mut n = 0usize;
    for (p, bp) in b.iter().enumerate() {
        let p = p + 1;
        while n < 2 * p {
            n += 1;
            fact *= BigInt::from(n);
        }
        a[2 * p] = rational_to_f64(&(bp * BigRational::from(fact.clone())));
    }
    Ok(CumulantCoefficients { a })
}

/// Coefficients b_p of y^p in ln I0 with y = s^2, p = 1..=p_max, exact.
fn exact_ln_i0_y_coefficients(p_max: usize) -> Vec<BigRational> {
    if p_max == 0 {
        return Vec::new();
    }
    let one = BigRational::from(BigInt::from(1));

    // u(y) = I0 - 1 = sum_{m>=1} y^m / (4^m (m!)^2), truncated at y^p_max.
    let mut u = vec![BigRational::from(BigInt::from(0)); p_max + 1];
    let mut denom = one.clone();
    for (m, slot) in u.iter_mut().enumerate().skip(1) {
        denom *= BigRational::from(BigInt::from(4 * m * m));
        *slot = one.clone() / denom.clone();
    }

    // ln(1 + u) = sum_j (-1)^{j+1} u^j / j, truncated termwise.
    let mut acc = vec![BigRational::from(BigInt::from(0)); p_max + 1];
    let mut u_pow = u.clone();
    for j in 1..=p_max {
        let sign_over_j = if j % 2 == 1 {
            one.clone() / BigRational::from(BigInt::from(j))
        } else {
            -one.clone() / BigRational::from(BigInt::from(j))
        };
        for p in j..=p_max {
            acc[p] += &u_pow[p] * &sign_over_j;
        }
        if j < p_max {
            u_pow = poly_mul_truncated(&u_pow, &u, p_max);
        }
    }
    acc.remove(0);
    acc
}

fn poly_mul_truncated(
    a: &[BigRational],
    b: &[BigRational],
    max_deg: usize,
) -> Vec<BigRational> {
    let zero = BigRational::from(BigInt::from(0));
    let mut out = vec![zero.clone(); max_deg + 1];
    for (i, ai) in a.iter().enumerate() {
        if *ai == zero {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if i + j > max_deg {
                break;
            }
            if *bj != zero {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

fn rational_to_f64(r: &BigRational) -> f64 {
    // Scale into f64 range before dividing; numerators up to ~1e31 fit
    // comfortably, so a plain conversion is enough here.
    let num = big_to_f64(r.numer());
    let den = big_to_f64(r.denom());
    num / den
}

fn big_to_f64(x: &BigInt) -> f64 {
    let s = x.to_string();
    s.parse::<f64>().expect("BigInt decimal always parses")
}
