//! Spectral data for the XY chain in a transverse field.
//!
//! H = sum_j [(1+gamma)/2 sx sx + (1-gamma)/2 sy sy + h sz] on L sites.
//! Each quasi-momentum k carries a Bogoliubov angle
//! tan(theta_k) = -gamma sin k / (h + cos k) and a quasiparticle energy
//! Lambda_k = 2 sqrt((h + cos k)^2 + gamma^2 sin^2 k); here Lambda_k is the
//! two-quasiparticle gap of the (k, -k) pair excitation, the frequency that
//! actually appears in the transverse-magnetization trajectory. After a
//! quench (h1,gamma1) -> (h2,gamma2) the mode weight
//! W_k = sin(theta2) sin(theta2 - theta1) sets the oscillation amplitude.

use std::f64::consts::TAU;
use std::io::Write;

use crate::error::{Error, Result};

/// One quench experiment: pre/post Hamiltonian parameters, system size,
/// and the momentum-quantization offset b in k = (2 pi / L)(n + b).
/// b = 1/2 is the antiperiodic fermion grid of the even parity sector;
/// b = 0 the periodic one.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchProtocol {
    pub l: usize,
    pub h1: f64,
    pub gamma1: f64,
    pub h2: f64,
    pub gamma2: f64,
    pub bc_offset: f64,
}

impl QuenchProtocol {
    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::InvalidArgument(format!(
                "L must be >= 2, got {}",
                self.l
            )));
        }
        if !(0.0..=0.5).contains(&self.bc_offset) {
            return Err(Error::InvalidArgument(format!(
                "bc_offset must lie in [0, 1/2], got {}",
                self.bc_offset
            )));
        }
        for (name, v) in [
            ("h1", self.h1),
            ("gamma1", self.gamma1),
            ("h2", self.h2),
            ("gamma2", self.gamma2),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} is not finite")));
            }
        }
        Ok(())
    }

    /// Quench amplitude |dh| + |dgamma|, stored parameters untouched.
    pub fn delta_lambda(&self) -> f64 {
        (self.h2 - self.h1).abs() + (self.gamma2 - self.gamma1).abs()
    }
}

/// Per-momentum spectral record of a quench.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeData {
    /// Grid index n of k = (2 pi / L)(n + b).
    pub n: usize,
    pub k: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// theta2 - theta1.
    pub delta_theta: f64,
    /// Post-quench pair energy Lambda_k.
    pub lambda: f64,
    /// W_k = sin(theta2) sin(delta_theta).
    pub w: f64,
}

impl ModeData {
    /// Time-independent contribution of this mode to the magnetization,
    /// cos(theta2) cos(delta_theta).
    pub fn mean_part(&self) -> f64 {
        self.theta2.cos() * self.delta_theta.cos()
    }
}

/// Momenta dropped because the Bogoliubov angle was undefined there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateModeWarning {
    pub n: usize,
    pub k: f64,
}

/// Result of [`quench_modes`]: one record per grid momentum, minus any
/// degenerate ones (a measure-zero parameter coincidence; dropping one of
/// L modes perturbs results at O(1/L)).
#[derive(Debug, Clone)]
pub struct QuenchModes {
    pub modes: Vec<ModeData>,
    pub dropped: Vec<DegenerateModeWarning>,
}

impl QuenchModes {
    /// Time-average of the magnetization, sum_k cos(theta2) cos(delta_theta).
    pub fn mean(&self) -> f64 {
        self.modes.iter().map(ModeData::mean_part).sum()
    }

    /// Write the mode table as CSV at full double precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,k,theta1,theta2,delta_theta,lambda,w")?;
        for m in &self.modes {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                m.n, m.k, m.theta1, m.theta2, m.delta_theta, m.lambda, m.w
            )?;
        }
        Ok(())
    }
}

/// Critical exponents of the transition under study. alpha is always the
/// derived combination 2d + zeta - Delta_A - Delta_B.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalExponents {
    pub d: usize,
    pub zeta_dyn: f64,
    pub nu: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub alpha: f64,
    pub b: Vec<f64>,
}

impl CriticalExponents {
    pub fn new(
        d: usize,
        zeta_dyn: f64,
        nu: f64,
        delta_a: f64,
        delta_b: f64,
        b: Vec<f64>,
    ) -> Result<Self> {
        if d == 0 || !(zeta_dyn > 0.0) || !(nu > 0.0) {
            return Err(Error::InvalidArgument(
                "d, zeta, nu must all be positive".into(),
            ));
        }
        if b.len() != d || b.iter().any(|&bi| !(0.0..=0.5).contains(&bi)) {
            return Err(Error::InvalidArgument(
                "boundary vector must have d entries in [0, 1/2]".into(),
            ));
        }
        let alpha = 2.0 * d as f64 + zeta_dyn - delta_a - delta_b;
        Ok(Self {
            d,
            zeta_dyn,
            nu,
            delta_a,
            delta_b,
            alpha,
            b,
        })
    }

    /// Correlation length xi = |delta_lambda|^(-nu); undefined at zero.
    pub fn correlation_length(&self, delta_lambda: f64) -> Result<f64> {
        if delta_lambda == 0.0 {
            return Err(Error::InvalidArgument(
                "correlation length undefined at delta_lambda = 0".into(),
            ));
        }
        Ok(delta_lambda.abs().powf(-self.nu))
    }

    /// Ising universality in d = 1: zeta = nu = 1, Delta_A = Delta_B = 1,
    /// so alpha = 1.
    pub fn ising_magnetization(bc_offset: f64) -> Self {
        Self::new(1, 1.0, 1.0, 1.0, 1.0, vec![bc_offset]).expect("static parameters")
    }
}

/// The momentum grid k_n = (2 pi / L)(n + b), n = 0..L-1.
pub fn momentum_grid(l: usize, bc_offset: f64) -> Result<Vec<f64>> {
    if l < 2 {
        return Err(Error::InvalidArgument(format!("L must be >= 2, got {l}")));
    }
    if !(0.0..=0.5).contains(&bc_offset) {
        return Err(Error::InvalidArgument(format!(
            "bc_offset must lie in [0, 1/2], got {bc_offset}"
        )));
    }
    Ok((0..l)
        .map(|n| TAU / l as f64 * (n as f64 + bc_offset))
        .collect())
}

/// Bogoliubov angle and pair energy at momentum k.
///
/// The angle comes from the two-argument arctangent of
/// (-gamma sin k, h + cos k) so that cos(theta) and sin(theta) are
/// individually correct, not just their ratio; W_k depends on them
/// separately. cos(theta) always carries the sign of h + cos k.
pub fn bogoliubov(h: f64, gamma: f64, k: f64) -> Result<(f64, f64)> {
    let y = -gamma * k.sin();
    let x = h + k.cos();
    if x == 0.0 && y == 0.0 {
        return Err(Error::DegenerateMode { k });
    }
    let theta = y.atan2(x);
    let lambda = 2.0 * x.hypot(y);
    Ok((theta, lambda))
}

/// All mode records of a quench. Degenerate momenta (both arctangent
/// arguments exactly zero, possible only when the post-quench parameters
/// sit exactly on a grid momentum's critical point) are dropped and
/// reported in `dropped` with the offending k.
pub fn quench_modes(protocol: &QuenchProtocol) -> Result<QuenchModes> {
    protocol.validate()?;
    let grid = momentum_grid(protocol.l, protocol.bc_offset)?;
    let mut modes = Vec::with_capacity(protocol.l);
    let mut dropped = Vec::new();
    for (n, &k) in grid.iter().enumerate() {
        let pre = bogoliubov(protocol.h1, protocol.gamma1, k);
        let post = bogoliubov(protocol.h2, protocol.gamma2, k);
        match (pre, post) {
            (Ok((theta1, _)), Ok((theta2, lambda))) => {
                let delta_theta = theta2 - theta1;
                modes.push(ModeData {
                    n,
                    k,
                    theta1,
                    theta2,
                    delta_theta,
                    lambda,
                    w: theta2.sin() * delta_theta.sin(),
                });
            }
            _ => dropped.push(DegenerateModeWarning { n, k }),
        }
    }
    Ok(QuenchModes { modes, dropped })
}

/// Which side of the finite-size crossover a protocol sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    NoQuench,
    /// xi > 10 L
    Critical,
    /// xi < L / 10
    OffCritical,
    Crossover,
}

/// Small-quench regime report. "Much larger/smaller" is operationalized as
/// a fixed factor of 10 so the report is reproducible.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RegimeReport {
    pub delta_lambda: f64,
    /// min(L^{-d/2}, L^{-1/nu}): the small-quench crossover scale.
    pub threshold: f64,
    pub ratio: f64,
    /// |h2 - h_c|^{-nu}; infinite exactly at the critical point.
    pub xi: f64,
    pub l: usize,
    pub regime: Regime,
}

/// Classify a protocol against the small-quench condition
/// delta_lambda << min(L^{-d/2}, L^{-1/nu}) and the xi-versus-L regime
/// split, with h_c supplied by the caller.
pub fn small_quench_check(
    protocol: &QuenchProtocol,
    exponents: &CriticalExponents,
    h_c: f64,
) -> Result<RegimeReport> {
    protocol.validate()?;
    let l = protocol.l as f64;
    let threshold = l
        .powf(-(exponents.d as f64) / 2.0)
        .min(l.powf(-1.0 / exponents.nu));
    let delta_lambda = protocol.delta_lambda();
    let dist = (protocol.h2 - h_c).abs();
    let xi = if dist == 0.0 {
        f64::INFINITY
    } else {
        dist.powf(-exponents.nu)
    };
    let regime = if delta_lambda == 0.0 {
        Regime::NoQuench
    } else if xi > 10.0 * l {
        Regime::Critical
    } else if xi < l / 10.0 {
        Regime::OffCritical
    } else {
        Regime::Crossover
    };
    Ok(RegimeReport {
        delta_lambda,
        threshold,
        ratio: delta_lambda / threshold,
        xi,
        l: protocol.l,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn critical_protocol(l: usize, dh: f64) -> QuenchProtocol {
        QuenchProtocol {
            l,
            h1: 1.0,
            gamma1: 1.0,
            h2: 1.0 + dh,
            gamma2: 1.0,
            bc_offset: 0.5,
        }
    }

    #[test]
    fn grid_small_cases() {
        assert_eq!(
            momentum_grid(4, 0.5).unwrap(),
            vec![PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0]
        );
        assert_eq!(
            momentum_grid(4, 0.0).unwrap(),
            vec![0.0, PI / 2.0, PI, 3.0 * PI / 2.0]
        );
    }

    #[test]
    fn grid_l1006() {
        let g = momentum_grid(1006, 0.5).unwrap();
        assert_eq!(g.len(), 1006);
        assert_relative_eq!(g[0], PI / 1006.0, max_relative = 1e-15);
        for w in g.windows(2) {
            assert_relative_eq!(w[1] - w[0], TAU / 1006.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn grid_rejects_bad_arguments() {
        assert!(momentum_grid(1, 0.5).is_err());
        assert!(momentum_grid(8, 0.7).is_err());
        assert!(momentum_grid(8, -0.1).is_err());
    }

    #[test]
    fn grid_riemann_sum_consistency() {
        // The grid sum of an even trigonometric polynomial reproduces its
        // integral over [0, 2 pi); discrete orthogonality makes the error
        // far below the O(1/L^2) requirement.
        let f = |k: f64| 2.0 + (k).cos() + 0.5 * (2.0 * k).cos() + 0.25 * (3.0 * k).cos();
        let exact = 2.0 * TAU;
        for &l in &[64usize, 256, 1024] {
            for &b in &[0.0, 0.5] {
                let g = momentum_grid(l, b).unwrap();
                let sum: f64 = g.iter().map(|&k| f(k)).sum::<f64>() * TAU / l as f64;
                assert!(
                    (sum - exact).abs() < 1.0 / (l as f64 * l as f64),
                    "L={l}, b={b}: {sum} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn bogoliubov_half_angle_at_ising_point() {
        // h = gamma = 1: tan(k/2) = sin k / (1 + cos k), so theta = -k/2
        // for k in (0, pi).
        let mut k = 0.05;
        while k < PI {
            let (theta, _) = bogoliubov(1.0, 1.0, k).unwrap();
            assert_relative_eq!(theta, -k / 2.0, max_relative = 1e-12);
            k += 0.1;
        }
        let (_, lambda) = bogoliubov(1.0, 1.0, PI / 2.0).unwrap();
        assert_relative_eq!(lambda, 2.0 * 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn bogoliubov_zero_anisotropy() {
        let (theta, lambda) = bogoliubov(0.0, 0.0, PI / 3.0).unwrap();
        assert_eq!(theta, 0.0);
        assert_relative_eq!(lambda, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn bogoliubov_degenerate_mode() {
        // k = 0 on a periodic grid with h = -1: both arguments vanish.
        assert!(matches!(
            bogoliubov(-1.0, 0.7, 0.0),
            Err(Error::DegenerateMode { .. })
        ));
    }

    #[test]
    fn angle_reconstruction_and_cos_sign() {
        for &(h, gamma) in &[(1.0, 1.0), (0.4, 0.9), (1.7, 0.3), (0.2, 1.5)] {
            for &k in momentum_grid(64, 0.5).unwrap().iter() {
                let (theta, _) = bogoliubov(h, gamma, k).unwrap();
                let x = h + k.cos();
                let y = -gamma * k.sin();
                if x.abs() > 1e-12 {
                    assert_relative_eq!(
                        theta.sin() * x,
                        theta.cos() * y,
                        epsilon = 1e-12,
                        max_relative = 1e-12
                    );
                    assert!(theta.cos() * x >= 0.0, "cos theta must carry sign of x");
                }
            }
        }
    }

    #[test]
    fn zero_quench_nullity() {
        let p = QuenchProtocol {
            l: 128,
            h1: 0.83,
            gamma1: 0.61,
            h2: 0.83,
            gamma2: 0.61,
            bc_offset: 0.5,
        };
        let qm = quench_modes(&p).unwrap();
        assert_eq!(qm.modes.len(), 128);
        assert!(qm.modes.iter().all(|m| m.w == 0.0));
    }

    #[test]
    fn pair_symmetry() {
        let qm = quench_modes(&critical_protocol(256, 0.02)).unwrap();
        let m = &qm.modes;
        for i in 0..128 {
            let j = 255 - i;
            assert_relative_eq!(m[i].w, m[j].w, max_relative = 1e-12);
            assert_relative_eq!(m[i].lambda, m[j].lambda, max_relative = 1e-12);
        }
    }

    #[test]
    fn weight_peak_sits_at_pi() {
        let qm = quench_modes(&critical_protocol(1006, 3e-4)).unwrap();
        let mut by_weight: Vec<&ModeData> = qm.modes.iter().collect();
        by_weight.sort_by(|a, b| b.w.abs().total_cmp(&a.w.abs()));
        // the two largest |W| are the pair nearest k = pi
        let nearest: Vec<usize> = vec![by_weight[0].n, by_weight[1].n];
        assert!(nearest.contains(&502) && nearest.contains(&503));
    }

    #[test]
    fn weight_singularity_scaling() {
        // |W_k| ~ dh / |gamma (k - pi)| for the modes nearest pi.
        let dh = 1e-8;
        let qm = quench_modes(&critical_protocol(4096, dh)).unwrap();
        let mut near: Vec<&ModeData> = qm.modes.iter().collect();
        near.sort_by(|a, b| {
            (a.k - PI).abs().total_cmp(&(b.k - PI).abs())
        });
        for m in near.iter().take(5) {
            let asymptote = dh / (m.k - PI).abs();
            let ratio = m.w.abs() / asymptote;
            assert!(
                (ratio - 1.0).abs() < 0.10,
                "k={}, |W|={}, asymptote={asymptote}",
                m.k,
                m.w.abs()
            );
        }
    }

    #[test]
    fn regime_report_fig1_parameters() {
        let p = critical_protocol(1006, 3e-4);
        let e = CriticalExponents::ising_magnetization(0.5);
        let r = small_quench_check(&p, &e, 1.0).unwrap();
        assert_relative_eq!(r.threshold, 1006f64.powf(-1.0), max_relative = 1e-12);
        assert_relative_eq!(r.ratio, 3e-4 * 1006.0, max_relative = 1e-9);
        assert!((r.ratio - 0.30).abs() < 0.01);
        assert_relative_eq!(r.xi, 1.0 / 3e-4, max_relative = 1e-9);
        assert_eq!(r.regime, Regime::Crossover);
    }

    #[test]
    fn regime_no_quench_and_off_critical() {
        let e = CriticalExponents::ising_magnetization(0.5);
        let mut p = critical_protocol(100, 0.0);
        let r = small_quench_check(&p, &e, 1.0).unwrap();
        assert_eq!(r.regime, Regime::NoQuench);
        p.h2 = 1.2;
        let r = small_quench_check(&p, &e, 1.0).unwrap();
        assert_eq!(r.regime, Regime::OffCritical);
        assert_relative_eq!(r.xi, 5.0, max_relative = 1e-12);
    }

    #[test]
    fn exponents_alpha_derived() {
        let e = CriticalExponents::new(1, 1.0, 1.0, 1.0, 1.0, vec![0.5]).unwrap();
        assert_eq!(e.alpha, 1.0);
        let e = CriticalExponents::new(2, 2.0, 0.5, 1.5, 0.5, vec![0.0, 0.5]).unwrap();
        assert_eq!(e.alpha, 4.0);
        assert!(e.correlation_length(0.0).is_err());
        assert_relative_eq!(e.correlation_length(0.1).unwrap(), 10f64.powf(0.5));
    }

    #[test]
    fn csv_export_shape() {
        let qm = quench_modes(&critical_protocol(8, 0.1)).unwrap();
        let mut buf = Vec::new();
        qm.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "n,k,theta1,theta2,delta_theta,lambda,w"
        );
        assert_eq!(lines.count(), 8);
    }
}
