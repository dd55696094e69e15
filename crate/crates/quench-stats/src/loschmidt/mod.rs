//! Full time statistics of the Loschmidt echo L(t) = |<psi0|e^{-itH}|psi0>|^2.
//!
//! With spectral weights p_n = |<n|psi0>|^2 the echo is |G(t)|^2,
//! G = sum_n p_n e^{-it E_n}. For rationally independent energies the pair
//! (Re G, Im G) has the radial joint characteristic function
//! J^L(rho) = prod_n J0(p_n rho), and the echo density is the kernel
//! integral P_L(x) = int_0^inf K(x, rho) J^L(rho) drho with
//! K = J1(sqrt(x) rho)/(2 sqrt(x)) + (rho/4)[J0 - J2](sqrt(x) rho).

pub mod quasifree;

pub use quasifree::{
    g_charfun, hyp2f1_half, ln_le_cumulants, product_le, LnLeCumulants, QuasiFreeSystem,
};

use rayon::prelude::*;
use std::io::Write;

use crate::charfun::bessel::{j0, j1, j2};
use crate::charfun::{chi_product, DistributionTable, InversionSettings, Provenance};
use crate::error::{Error, Result};
use crate::quad;
use crate::universal::lattice_distances;

/// Overlap weights of the diagonal ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWeights {
    p: Vec<f64>,
    pub normalized: bool,
}

impl SpectralWeights {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidArgument("no spectral weights given".into()));
        }
        if let Some(&bad) = p.iter().find(|&&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "spectral weights must be non-negative and finite, got {bad}"
            )));
        }
        let sum: f64 = p.iter().sum();
        Ok(Self {
            normalized: (sum - 1.0).abs() <= 1e-12,
            p,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.p
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Write `index,p` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,p")?;
        for (i, v) in self.p.iter().enumerate() {
            writeln!(out, "{i},{v:.16e}")?;
        }
        Ok(())
    }

    /// Read weights from `index,p` CSV text.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut p = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (ln == 0 && line.starts_with("index")) {
                continue;
            }
            let field = line.split(',').nth(1).ok_or_else(|| {
                Error::InvalidArgument(format!("weights csv line {} malformed", ln + 1))
            })?;
            p.push(field.trim().parse::<f64>().map_err(|e| {
                Error::InvalidArgument(format!("weights csv line {}: {e}", ln + 1))
            })?);
        }
        Self::new(p)
    }
}

/// J^L(rho) = prod_n J0(p_n rho) at one point.
pub fn le_charfun_at(weights: &SpectralWeights, rho: f64) -> f64 {
    chi_product(weights.weights(), rho)
}

/// J^L on a grid.
pub fn le_charfun(weights: &SpectralWeights, rho_grid: &[f64]) -> Vec<f64> {
    rho_grid
        .iter()
        .map(|&rho| le_charfun_at(weights, rho))
        .collect()
}

/// Diagonal-ensemble purities tr(rho-bar^m) = sum_n p_n^m and the
/// scale-free ratios T_2n = tr(rho-bar^{2n}) / tr(rho-bar^2)^n.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Purities {
    /// traces[m-1] = tr(rho-bar^m), m = 1..=m_max.
    pub traces: Vec<f64>,
    /// t_ratios[n-1] = T_2n for 2n <= m_max.
    pub t_ratios: Vec<f64>,
}

pub fn purities(weights: &SpectralWeights, m_max: usize) -> Result<Purities> {
    if m_max < 2 {
        return Err(Error::InvalidArgument("m_max must be >= 2".into()));
    }
    let mut traces = vec![0.0; m_max];
    for &p in weights.weights() {
        let mut pow = 1.0;
        for t in traces.iter_mut() {
            pow *= p;
            *t += pow;
        }
    }
    let tr2 = traces[1];
    let t_ratios = (1..=m_max / 2)
        .map(|n| traces[2 * n - 1] / tr2.powi(n as i32))
        .collect();
    Ok(Purities { traces, t_ratios })
}

/// Time-averaged echo: L-bar = tr(rho-bar^2).
pub fn mean_le(weights: &SpectralWeights) -> f64 {
    weights.weights().iter().map(|p| p * p).sum()
}

/// The inversion kernel K(x, rho); K(0, rho) = rho/2 in the x -> 0 limit.
pub fn le_kernel(x: f64, rho: f64) -> f64 {
    if x == 0.0 {
        return 0.5 * rho;
    }
    let sx = x.sqrt();
    let u = sx * rho;
    j1(u) / (2.0 * sx) + 0.25 * rho * (j0(u) - j2(u))
}

/// Invert a Loschmidt characteristic function to the echo density on a
/// non-negative grid.
pub fn le_pdf<F: Fn(f64) -> f64 + Sync>(j: F, x_grid: &[f64]) -> Result<DistributionTable> {
    le_pdf_with(j, x_grid, &InversionSettings::default())
}

pub fn le_pdf_with<F: Fn(f64) -> f64 + Sync>(
    j: F,
    x_grid: &[f64],
    settings: &InversionSettings,
) -> Result<DistributionTable> {
    check_le_grid(x_grid)?;
    let rho_cut = quad::find_decay_cut(
        &j,
        settings.decay_threshold,
        1.0,
        1.25,
        settings.scan_limit,
        3,
    )
    .ok_or(Error::TruncationError {
        threshold: settings.decay_threshold,
        s_max: settings.scan_limit,
    })?;
    let pdf = kernel_integrals(&j, x_grid, rho_cut, settings.abs_tol);
    DistributionTable::new(x_grid.to_vec(), pdf, Provenance::KernelIntegral)
}

/// Kernel inversion with a Gaussian window, for weight sets whose J^L
/// decays only polynomially (one or two dominant weights). Equivalent to
/// blurring the (Re G, Im G) plane with an isotropic normal of width sigma.
pub fn le_pdf_windowed<F: Fn(f64) -> f64 + Sync>(
    j: F,
    x_grid: &[f64],
    sigma: f64,
) -> Result<DistributionTable> {
    check_le_grid(x_grid)?;
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument("window sigma must be positive".into()));
    }
    let rho_cut = 7.74 / sigma;
    let windowed = |rho: f64| j(rho) * (-0.5 * sigma * sigma * rho * rho).exp();
    let pdf = kernel_integrals(&windowed, x_grid, rho_cut, 1e-8);
    DistributionTable::new(x_grid.to_vec(), pdf, Provenance::KernelIntegral)
}

fn check_le_grid(x_grid: &[f64]) -> Result<()> {
    if x_grid.first().is_some_and(|&x| x < 0.0) {
        return Err(Error::InvalidArgument(
            "echo densities live on x >= 0".into(),
        ));
    }
    Ok(())
}

fn kernel_integrals<F: Fn(f64) -> f64 + Sync>(
    j: &F,
    x_grid: &[f64],
    rho_cut: f64,
    abs_tol: f64,
) -> Vec<f64> {
    let sqrt_x_max = x_grid
        .iter()
        .fold(1.0f64, |m, &x| m.max(x.abs().sqrt()));
    let width = std::f64::consts::FRAC_PI_2 / sqrt_x_max;
    x_grid
        .par_iter()
        .map(|&x| {
            let f = |rho: f64| le_kernel(x, rho) * j(rho);
            quad::integrate_oscillatory(&f, 0.0, rho_cut, width, abs_tol)
        })
        .collect()
}

/// Quasi-critical overlap weights p_j = dlambda^2 ||n_j + b||^{-2/nu} over
/// the first `n_modes` lattice modes, with the remaining probability on
/// the ground state.
pub fn critical_weights(
    nu: f64,
    d: usize,
    b: &[f64],
    n_modes: usize,
    delta_lambda: f64,
) -> Result<SpectralWeights> {
    if !(nu > 0.0) {
        return Err(Error::InvalidArgument("nu must be positive".into()));
    }
    if n_modes < 1 {
        return Err(Error::InvalidArgument("n_modes must be >= 1".into()));
    }
    if delta_lambda == 0.0 {
        return SpectralWeights::new(vec![1.0]);
    }
    let dl2 = delta_lambda * delta_lambda;
    let dists = lattice_distances(d, b, n_modes)?;
    let mut p = Vec::with_capacity(n_modes + 1);
    p.push(0.0); // ground slot, filled below
    let mut excited = 0.0;
    for r in dists {
        let w = dl2 * r.powf(-2.0 / nu);
        excited += w;
        p.push(w);
    }
    if excited >= 1.0 {
        return Err(Error::WeightOverflow { sum: excited });
    }
    p[0] = 1.0 - excited;
    SpectralWeights::new(p)
}
