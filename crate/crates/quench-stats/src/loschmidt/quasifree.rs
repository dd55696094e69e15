//! Loschmidt echo of quasi-free fermion systems.
//!
//! With initial covariance R_xy = <c_y^dag c_x> and quadratic Hamiltonian
//! H = sum c^dag M c, the echo is L(t) = |det(1 - R + R e^{-itM})|^2. When
//! [M, R] = 0 (a quench between quadratic Hamiltonians) both matrices
//! diagonalize together and L(t) = prod_k (1 - alpha_k sin^2(t eps_k / 2))
//! with alpha_k = 4 r_k (1 - r_k). The log-echo G = ln L then has the
//! characteristic function prod_k 2F1(1/2, -i lambda; 1; alpha_k) under
//! rational independence of the one-particle energies.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;

/// A quasi-free system: covariance R, one-particle Hamiltonian M, and the
/// derived mode data. The product/hypergeometric paths require [M, R] = 0;
/// the determinant path does not.
#[derive(Debug, Clone)]
pub struct QuasiFreeSystem {
    r: DMatrix<Complex64>,
    m_eigvecs: DMatrix<Complex64>,
    /// One-particle energies (eigenvalues of M, ascending).
    pub epsilon: Vec<f64>,
    /// Diagonal of R in M's eigenbasis: the mode occupations r_k when the
    /// matrices commute.
    pub r_modes: Vec<f64>,
    /// alpha_k = 4 r_k (1 - r_k).
    pub alpha: Vec<f64>,
    /// ||[M, R]||_F, recorded so callers can see how far the product path
    /// assumptions hold.
    pub commutator_norm: f64,
    commuting: bool,
}

const COMMUTATOR_REL_TOL: f64 = 1e-10;
const COVARIANCE_EIG_TOL: f64 = 1e-12;

impl QuasiFreeSystem {
    pub fn new(r: DMatrix<Complex64>, m: DMatrix<Complex64>) -> Result<Self> {
        linalg::check_hermitian(&r)?;
        linalg::check_hermitian(&m)?;
        if r.nrows() != m.nrows() {
            return Err(Error::InvalidArgument(
                "R and M must have equal dimension".into(),
            ));
        }
        let (r_eigs, _) = linalg::eigh(&r);
        for &ev in &r_eigs {
            if !(-COVARIANCE_EIG_TOL..=1.0 + COVARIANCE_EIG_TOL).contains(&ev) {
                return Err(Error::NonPhysicalCovariance { value: ev });
            }
        }
        let (epsilon, m_eigvecs) = linalg::eigh(&m);
        let commutator = &m * &r - &r * &m;
        let commutator_norm = linalg::frobenius(&commutator);
        let scale = linalg::frobenius(&m) * linalg::frobenius(&r);
        let commuting = commutator_norm <= COMMUTATOR_REL_TOL * scale.max(f64::MIN_POSITIVE);

        let r_in_m_basis = m_eigvecs.adjoint() * &r * &m_eigvecs;
        let r_modes: Vec<f64> = (0..r.nrows())
            .map(|k| r_in_m_basis[(k, k)].re.clamp(0.0, 1.0))
            .collect();
        let alpha = r_modes.iter().map(|&rk| 4.0 * rk * (1.0 - rk)).collect();
        Ok(Self {
            r,
            m_eigvecs,
            epsilon,
            r_modes,
            alpha,
            commutator_norm,
            commuting,
        })
    }

    pub fn dim(&self) -> usize {
        self.epsilon.len()
    }

    pub fn commutes(&self) -> bool {
        self.commuting
    }

    /// L(t) = |det(1 - R + R e^{-itM})|^2 via LU in complex arithmetic.
    /// Works for any Hermitian M, commuting or not.
    pub fn determinant_le(&self, t: f64) -> f64 {
        let n = self.dim();
        let phases = DVector::from_iterator(
            n,
            self.epsilon
                .iter()
                .map(|&e| Complex64::from_polar(1.0, -t * e)),
        );
        let evolution =
            &self.m_eigvecs * DMatrix::from_diagonal(&phases) * self.m_eigvecs.adjoint();
        let mut a = &self.r * evolution - &self.r;
        for i in 0..n {
            a[(i, i)] += Complex64::new(1.0, 0.0);
        }
        let det = a.lu().determinant();
        det.norm_sqr().clamp(0.0, 1.0)
    }

    /// Product form over modes; requires [M, R] = 0 within tolerance.
    pub fn product_le(&self, t: f64) -> Result<f64> {
        if !self.commuting {
            return Err(Error::InvalidArgument(format!(
                "product path needs [M, R] = 0; commutator norm {:e}",
                self.commutator_norm
            )));
        }
        Ok(product_le(&self.alpha, &self.epsilon, t))
    }
}

/// L(t) = prod_k (1 - alpha_k sin^2(t eps_k / 2)).
pub fn product_le(alpha: &[f64], epsilon: &[f64], t: f64) -> f64 {
    alpha
        .iter()
        .zip(epsilon)
        .map(|(&a, &e)| 1.0 - a * (0.5 * t * e).sin().powi(2))
        .product::<f64>()
        .clamp(0.0, 1.0)
}

/// Gauss hypergeometric 2F1(1/2, -i lambda; 1; alpha) by its power series
/// with term-ratio recurrence, truncated at relative tail < 1e-12.
pub fn hyp2f1_half(alpha: f64, lambda: f64) -> Complex64 {
    debug_assert!((0.0..1.0).contains(&alpha));
    let b = Complex64::new(0.0, -lambda);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut m = 0usize;
    loop {
        let mf = m as f64;
        let ratio = (b + mf) * ((0.5 + mf) * alpha / ((1.0 + mf) * (1.0 + mf)));
        term *= ratio;
        sum += term;
        m += 1;
        // geometric tail bound: remaining terms < |term| alpha/(1-alpha)
        if m > 4 && term.norm() * alpha / (1.0 - alpha) < 1e-12 * sum.norm().max(1e-300) {
            break;
        }
        if m > 2_000_000 {
            break;
        }
    }
    sum
}

/// Characteristic function of G = ln L for commuting quasi-free modes:
/// chi(lambda) = prod_k 2F1(1/2, -i lambda; 1; alpha_k). alpha_k = 1 is
/// rejected: ln L then has a divergent tail and the series converges only
/// conditionally.
pub fn g_charfun(alpha: &[f64], lambda_grid: &[f64]) -> Result<Vec<Complex64>> {
    for &a in alpha {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::AlphaOutOfRange { alpha: a });
        }
    }
    Ok(lambda_grid
        .iter()
        .map(|&l| {
            alpha
                .iter()
                .map(|&a| hyp2f1_half(a, l))
                .product::<Complex64>()
        })
        .collect())
}

/// Cumulants of G = ln L = sum_k ln(1 - alpha_k sin^2(theta_k)) over
/// independent uniform phases, accumulated from per-mode quadrature.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LnLeCumulants {
    pub mean: f64,
    pub variance: f64,
    pub kappa3: f64,
    pub kappa4: f64,
}

impl LnLeCumulants {
    pub fn skewness(&self) -> f64 {
        self.kappa3 / self.variance.powf(1.5)
    }

    pub fn excess_kurtosis(&self) -> f64 {
        self.kappa4 / (self.variance * self.variance)
    }
}

pub fn ln_le_cumulants(alpha: &[f64]) -> Result<LnLeCumulants> {
    let mut acc = LnLeCumulants {
        mean: 0.0,
        variance: 0.0,
        kappa3: 0.0,
        kappa4: 0.0,
    };
    for &a in alpha {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::AlphaOutOfRange { alpha: a });
        }
        let (mean, m2, m3, m4) = single_mode_moments(a);
        acc.mean += mean;
        acc.variance += m2;
        acc.kappa3 += m3;
        acc.kappa4 += m4 - 3.0 * m2 * m2;
    }
    Ok(acc)
}

/// Mean and central moments of ln(1 - a sin^2 theta), theta uniform.
/// Composite Simpson over a half period; the integrand is smooth for
/// a < 1.
fn single_mode_moments(a: f64) -> (f64, f64, f64, f64) {
    let n = 4096usize;
    let h = std::f64::consts::PI / n as f64;
    let g = |theta: f64| (1.0 - a * theta.sin().powi(2)).ln();
    let simpson = |f: &dyn Fn(f64) -> f64| {
        let mut s = f(0.0) + f(std::f64::consts::PI);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0 / std::f64::consts::PI
    };
    let mean = simpson(&g);
    let m2 = simpson(&|t| (g(t) - mean).powi(2));
    let m3 = simpson(&|t| (g(t) - mean).powi(3));
    let m4 = simpson(&|t| (g(t) - mean).powi(4));
    (mean, m2, m3, m4)
}

/// Write quasi-free mode data as `index,alpha,epsilon` CSV.
pub fn write_modes_csv<W: std::io::Write>(
    alpha: &[f64],
    epsilon: &[f64],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "index,alpha,epsilon")?;
    for (i, (a, e)) in alpha.iter().zip(epsilon).enumerate() {
        writeln!(out, "{i},{a:.16e},{e:.16e}")?;
    }
    Ok(())
}

/// Read `index,alpha,epsilon` CSV text.
pub fn read_modes_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut alpha = Vec::new();
    let mut epsilon = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (ln == 0 && line.starts_with("index")) {
            continue;
        }
        let mut fields = line.split(',').skip(1);
        let parse = |f: Option<&str>| -> Result<f64> {
            f.ok_or_else(|| {
                Error::InvalidArgument(format!("modes csv line {} malformed", ln + 1))
            })?
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::InvalidArgument(format!("modes csv line {}: {e}", ln + 1)))
        };
        alpha.push(parse(fields.next())?);
        epsilon.push(parse(fields.next())?);
    }
    Ok((alpha, epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cmat(n: usize, data: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_iterator(n, n, data.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    #[test]
    fn echo_starts_at_one() {
        let r = cmat(2, &[0.3, 0.0, 0.0, 0.8]);
        let m = cmat(2, &[1.0, 0.0, 0.0, 2.5]);
        let sys = QuasiFreeSystem::new(r, m).unwrap();
        assert_relative_eq!(sys.determinant_le(0.0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(sys.product_le(0.0).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn single_mode_half_filling() {
        // r = 1/2 gives alpha = 1 and L(t) = cos^2(eps t / 2); both paths.
        let eps = 1.7;
        let sys =
            QuasiFreeSystem::new(cmat(1, &[0.5]), cmat(1, &[eps])).unwrap();
        assert_relative_eq!(sys.alpha[0], 1.0, max_relative = 1e-14);
        for &t in &[0.0, 0.3, 1.1, 4.0] {
            let expect = (eps * t / 2.0).cos().powi(2);
            assert_relative_eq!(sys.determinant_le(t), expect, epsilon = 1e-12);
            assert_relative_eq!(sys.product_le(t).unwrap(), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigenstate_projector_stays_put() {
        // R a spectral projector of M: alpha_k = 0 and L = 1 always.
        let m = cmat(2, &[1.0, 0.0, 0.0, 3.0]);
        let r = cmat(2, &[1.0, 0.0, 0.0, 0.0]);
        let sys = QuasiFreeSystem::new(r, m).unwrap();
        for &t in &[0.2, 2.0, 31.0] {
            assert_relative_eq!(sys.determinant_le(t), 1.0, epsilon = 1e-12);
            assert_relative_eq!(sys.product_le(t).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn product_determinant_agreement_under_commutation() {
        // commuting pair with nontrivial occupations
        let m = cmat(3, &[0.7, 0.0, 0.0, 0.0, 1.9, 0.0, 0.0, 0.0, 3.1]);
        let r = cmat(3, &[0.2, 0.0, 0.0, 0.0, 0.55, 0.0, 0.0, 0.0, 0.9]);
        let sys = QuasiFreeSystem::new(r, m).unwrap();
        assert!(sys.commutes());
        let mut t = 0.0;
        while t < 20.0 {
            let d = sys.determinant_le(t);
            let p = sys.product_le(t).unwrap();
            assert!((d - p).abs() < 1e-10, "t={t}: det {d} vs product {p}");
            t += 0.37;
        }
    }

    #[test]
    fn non_commuting_rejects_product_path() {
        let m = cmat(2, &[1.0, 0.4, 0.4, 2.0]);
        let r = cmat(2, &[0.8, 0.0, 0.0, 0.1]);
        let sys = QuasiFreeSystem::new(r, m).unwrap();
        assert!(!sys.commutes());
        assert!(sys.product_le(1.0).is_err());
        // determinant path still physical
        let v = sys.determinant_le(1.3);
        assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn covariance_validation() {
        let m = cmat(2, &[1.0, 0.0, 0.0, 2.0]);
        let r = cmat(2, &[1.4, 0.0, 0.0, 0.2]);
        assert!(matches!(
            QuasiFreeSystem::new(r, m),
            Err(Error::NonPhysicalCovariance { .. })
        ));
    }

    #[test]
    fn hypergeometric_at_zero() {
        for &a in &[0.0, 0.3, 0.75, 0.99] {
            let v = hyp2f1_half(a, 0.0);
            assert_relative_eq!(v.re, 1.0, max_relative = 1e-14);
            assert!(v.im.abs() < 1e-14);
        }
    }

    #[test]
    fn g_charfun_derivative_matches_log_mean() {
        // -i d/dlambda chi at 0 = mean of ln(1 - a sin^2) =
        // 2 ln((1 + sqrt(1-a))/2); at a = 3/4 this is 2 ln(3/4).
        let a = 0.75;
        let h = 1e-5;
        let chi = g_charfun(&[a], &[h, -h]).unwrap();
        let deriv = (chi[0] - chi[1]) / Complex64::new(0.0, 2.0 * h);
        let expect = 2.0 * (0.75f64).ln();
        assert_relative_eq!(deriv.re, expect, max_relative = 1e-6);
        // and the quadrature cumulant helper agrees
        let c = ln_le_cumulants(&[a]).unwrap();
        assert_relative_eq!(c.mean, expect, max_relative = 1e-10);
    }

    #[test]
    fn g_charfun_rejects_alpha_one() {
        assert!(matches!(
            g_charfun(&[0.5, 1.0], &[0.3]),
            Err(Error::AlphaOutOfRange { .. })
        ));
    }

    #[test]
    fn gaussian_trend_many_modes() {
        // equal small alphas: skewness of G shrinks as 1/sqrt(N).
        let c64 = ln_le_cumulants(&vec![0.3; 64]).unwrap();
        let c1024 = ln_le_cumulants(&vec![0.3; 1024]).unwrap();
        assert!(c1024.skewness().abs() < c64.skewness().abs() / 3.0);
        assert!(c1024.skewness().abs() < 0.05);
    }

    #[test]
    fn quasifree_time_mean_consistency() {
        // time-sampled mean of prod(1 - a_k sin^2) ~ prod(1 - a_k/2)
        // with rationally generic energies.
        let alpha = [0.4, 0.7, 0.2];
        let eps = [1.0, std::f64::consts::SQRT_2, std::f64::consts::PI / 1.3];
        let plan = crate::timeseries::SamplingPlan {
            t_max: 100_000.0,
            n_samples: 60_000,
            seed: 7,
            n_chunks: 64,
        };
        let values: Vec<f64> = crate::timeseries::sample_times(&plan)
            .unwrap()
            .iter()
            .map(|&t| product_le(&alpha, &eps, t))
            .collect();
        let st = crate::timeseries::empirical_stats(&values);
        let expect: f64 = alpha.iter().map(|a| 1.0 - a / 2.0).product();
        let se = (st.variance / st.n as f64).sqrt();
        assert!(
            (st.mean - expect).abs() < 4.0 * se,
            "mean {} vs {expect} (se {se})",
            st.mean
        );
    }

    #[test]
    fn modes_csv_round_trip() {
        let alpha = vec![0.2, 0.9];
        let eps = vec![1.0, 2.0];
        let mut buf = Vec::new();
        write_modes_csv(&alpha, &eps, &mut buf).unwrap();
        let (a2, e2) = read_modes_csv(&String::from_utf8(buf).unwrap()).unwrap();
        assert_eq!(alpha, a2);
        assert_eq!(eps, e2);
    }
}
