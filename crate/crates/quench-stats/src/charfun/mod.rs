//! Characteristic functions of time-statistics distributions.
//!
//! A quasiperiodic signal sum_j c_j cos(omega_j t + phi_j) with rationally
//! independent frequencies has, as a random variable of uniformly sampled
//! time, the characteristic function chi(s) = prod_j J0(c_j s). This module
//! evaluates such Bessel products, carries the exact cumulant coefficients
//! of ln I0, and inverts even characteristic functions to densities.

pub mod bessel;
pub mod coeffs;
mod invert;

pub use coeffs::{log_i0_coefficients, CumulantCoefficients};
pub use invert::{
    pdf_from_charfun, pdf_from_charfun_windowed, pdf_from_charfun_with, uniform_grid,
    DistributionTable, InversionSettings, Provenance,
};

use crate::error::{Error, Result};

/// A list of scale factors entering a Bessel-product characteristic
/// function or a cumulant chain. The convention is the caller's: for
/// chi(s) = prod J0(c_j s) the entries are the literal c_j; for the
/// cumulant chain kappa_{2p} = a_{2p} 2^{2p} Q_{2p} they are the |Z_n|-like
/// half-amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some(bad) = w.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite weight {bad}"
            )));
        }
        Ok(Self { w })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// prod_j J0(c_j s) at a single point, in linear space.
///
/// J0 crosses zero, so log-space evaluation would need branch bookkeeping;
/// instead the running product is kept in a mantissa/exponent pair so that
/// thousands of small factors cannot underflow prematurely.
pub fn chi_product(scales: &[f64], s: f64) -> f64 {
    let mut mantissa: f64 = 1.0;
    let mut exp2: i32 = 0;
    for &c in scales {
        mantissa *= bessel::j0(c * s);
        if mantissa == 0.0 {
            return 0.0;
        }
        while mantissa.abs() < 1e-150 {
            mantissa *= 2f64.powi(500);
            exp2 -= 500;
        }
    }
    if exp2 == 0 {
        mantissa
    } else {
        mantissa * 2f64.powi(exp2)
    }
}

/// Evaluate chi(s) = prod_j J0(w_j s) on a grid. chi(0) = 1 exactly.
pub fn characteristic_function(weights: &WeightVector, s_grid: &[f64]) -> Vec<f64> {
    s_grid
        .iter()
        .map(|&s| chi_product(weights.as_slice(), s))
        .collect()
}

/// Generalized variances and cumulants of the half-amplitude weights:
/// Q_{2p} = sum_j |w_j|^{2p}, kappa_{2p} = a_{2p} 2^{2p} Q_{2p}.
#[derive(Debug, Clone)]
pub struct WeightCumulants {
    /// Q_{2p} for p = 1..=p_max.
    pub q: Vec<f64>,
    /// kappa_{2p} for p = 1..=p_max.
    pub kappa: Vec<f64>,
}

impl WeightCumulants {
    pub fn q2p(&self, p: usize) -> f64 {
        self.q[p - 1]
    }

    pub fn kappa2p(&self, p: usize) -> f64 {
        self.kappa[p - 1]
    }

    /// Excess kurtosis kappa_4 / kappa_2^2 of the associated variable.
    pub fn excess_kurtosis(&self) -> f64 {
        self.kappa2p(2) / self.kappa2p(1).powi(2)
    }
}

/// Cumulants of the variable sum_j 2 w_j cos(theta_j) with independent
/// uniform phases. kappa_2 = 2 Q_2 always.
pub fn cumulants_from_weights(weights: &WeightVector, p_max: usize) -> Result<WeightCumulants> {
    if p_max < 1 {
        return Err(Error::InvalidArgument(format!(
            "p_max must be >= 1, got {p_max}"
        )));
    }
    if 2 * p_max > coeffs::MAX_ORDER {
        return Err(Error::OrderTooLarge {
            requested: 2 * p_max,
            max: coeffs::MAX_ORDER,
        });
    }
    let mut q = vec![0.0; p_max];
    for &w in weights.as_slice() {
        let w2 = w * w;
        let mut pow = 1.0;
        for qp in q.iter_mut() {
            pow *= w2;
            *qp += pow;
        }
    }
    let kappa = q
        .iter()
        .enumerate()
        .map(|(i, &q2p)| {
            let p = i + 1;
            coeffs::A2P[p - 1] * 4f64.powi(p as i32) * q2p
        })
        .collect();
    Ok(WeightCumulants { q, kappa })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn chi_empty_is_one() {
        let w = WeightVector::new(vec![]).unwrap();
        let chi = characteristic_function(&w, &[0.0, 1.0, 17.0]);
        assert_eq!(chi, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn chi_single_weight_is_j0() {
        let w = WeightVector::new(vec![1.0]).unwrap();
        let s: Vec<f64> = (0..50).map(|i| 0.3 * i as f64).collect();
        let chi = characteristic_function(&w, &s);
        for (i, &si) in s.iter().enumerate() {
            assert_eq!(chi[i], bessel::j0(si));
        }
    }

    #[test]
    fn chi_at_zero_exact_and_bounded() {
        let w = WeightVector::new(vec![0.7, 1.3, 0.2, 2.9]).unwrap();
        assert_eq!(chi_product(w.as_slice(), 0.0), 1.0);
        let mut s = 0.0;
        while s < 50.0 {
            assert!(chi_product(w.as_slice(), s).abs() <= 1.0 + 1e-14);
            assert_eq!(
                chi_product(w.as_slice(), s),
                chi_product(w.as_slice(), -s),
                "chi must be even"
            );
            s += 0.37;
        }
    }

    #[test]
    fn chi_many_factors_no_premature_underflow() {
        // 4000 identical factors at a point where J0 ~ 0.83: the naive
        // product would underflow around factor ~3900.
        let scales = vec![1.0; 4000];
        let v = chi_product(&scales, 0.85);
        assert_eq!(v, 0.0); // true value ~ 1e-324th region: flushes to zero
        let scales = vec![1.0; 1500];
        let v = chi_product(&scales, 0.85);
        assert!(v > 0.0 && v < 1e-100);
    }

    #[test]
    fn cumulants_single_unit_weight() {
        // w = {1}: Q_2 = 1, kappa_2 = 2, kappa_4 = a_4 * 16 = -6
        let w = WeightVector::new(vec![1.0]).unwrap();
        let c = cumulants_from_weights(&w, 2).unwrap();
        assert_eq!(c.q2p(1), 1.0);
        assert_eq!(c.kappa2p(1), 2.0);
        assert_eq!(c.q2p(2), 1.0);
        assert_eq!(c.kappa2p(2), -6.0);
    }

    #[test]
    fn cumulants_empty() {
        let w = WeightVector::new(vec![]).unwrap();
        let c = cumulants_from_weights(&w, 4).unwrap();
        assert!(c.q.iter().all(|&q| q == 0.0));
        assert!(c.kappa.iter().all(|&k| k == 0.0));
    }

    #[test]
    fn kappa2_is_twice_q2() {
        let w = WeightVector::new(vec![0.4, 1.7, 0.9]).unwrap();
        let c = cumulants_from_weights(&w, 3).unwrap();
        assert_relative_eq!(c.kappa2p(1), 2.0 * c.q2p(1), max_relative = 1e-15);
    }

    #[test]
    fn series_vs_product_identity() {
        // ln chi(s) = sum_p (-1)^p b_p s^{2p} sum_j c_j^{2p} inside the
        // series radius s * max c <= 1, with c_j = 2 w_j.
        let w = WeightVector::new(vec![0.31, 0.11, 0.23]).unwrap();
        let scales: Vec<f64> = w.as_slice().iter().map(|&x| 2.0 * x).collect();
        for &s in &[0.3, 0.8, 1.3, 1.6] {
            // s * max scale = 0.62 s <= 1
            let direct = chi_product(&scales, s).ln();
            let mut series = 0.0;
            for p in 1..=8 {
                let c2p: f64 = scales.iter().map(|c| c.powi(2 * p as i32)).sum();
                series += coeffs::ln_j0_coeff(p) * s.powi(2 * p as i32) * c2p;
            }
            assert!(
                (direct - series).abs() < 1e-8,
                "s={s}: ln chi {direct} vs 8-term series {series}"
            );
        }
    }

    #[test]
    fn gaussian_degeneration() {
        // N equal weights N^{-1/2}: chi -> exp(-s^2/4).
        let n = 4096;
        let scales = vec![(n as f64).powf(-0.5); n];
        let mut sup = 0.0f64;
        let mut s = 0.0;
        while s <= 10.0 {
            let chi = chi_product(&scales, s);
            let gauss = (-s * s / 4.0).exp();
            sup = sup.max((chi - gauss).abs());
            s += 0.05;
        }
        assert!(sup <= 1e-3, "sup deviation {sup}");
    }

    #[test]
    fn rejects_non_finite() {
        assert!(WeightVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(WeightVector::new(vec![f64::INFINITY]).is_err());
    }
}
