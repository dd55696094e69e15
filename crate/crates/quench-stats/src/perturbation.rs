//! Dense exact-diagonalization oracle for small systems.
//!
//! For H = H0 + dlambda B quenched out of the ground state of H0, first
//! order perturbation theory gives A(t) = A-bar + dlambda sum_{n>0}
//! (Z_n e^{-it(E_n - E_0)} + c.c.) with Z_n = A_{0n} B_{n0}/(E_n - E_0),
//! temporal variance 2 dlambda^2 sum |Z_n|^2, and susceptibility
//! chi_AB = 2 sum Re Z_n. Everything here is brute force on dense
//! Hermitian matrices: the ground truth the perturbative and free-fermion
//! formulas are validated against.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::loschmidt::SpectralWeights;

pub const DIM_LIMIT: usize = 4096;

/// Unperturbed Hamiltonian, observable, and perturbation, all Hermitian
/// and of equal dimension <= 4096.
#[derive(Debug, Clone)]
pub struct DenseSystem {
    pub h0: DMatrix<Complex64>,
    pub a: DMatrix<Complex64>,
    pub b: DMatrix<Complex64>,
}

impl DenseSystem {
    pub fn new(
        h0: DMatrix<Complex64>,
        a: DMatrix<Complex64>,
        b: DMatrix<Complex64>,
    ) -> Result<Self> {
        let dim = h0.nrows();
        if dim > DIM_LIMIT {
            return Err(Error::DimensionLimit {
                dim,
                limit: DIM_LIMIT,
            });
        }
        if a.nrows() != dim || b.nrows() != dim {
            return Err(Error::InvalidArgument(
                "H0, A, B must share one dimension".into(),
            ));
        }
        linalg::check_hermitian(&h0)?;
        linalg::check_hermitian(&a)?;
        linalg::check_hermitian(&b)?;
        Ok(Self { h0, a, b })
    }
}

/// A group of transition gaps degenerate within the merge tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct GapClass {
    pub gap: f64,
    pub members: usize,
}

/// First-order weights and derived quantities of a dense system.
#[derive(Debug, Clone)]
pub struct PerturbativeWeights {
    /// Z_n for each excited eigenstate, in ascending-energy order.
    pub z: Vec<Complex64>,
    /// The gaps E_n - E_0 matching `z`.
    pub gaps: Vec<f64>,
    /// |sum of Z over each degenerate gap class| (the amplitudes the time
    /// average actually sees).
    pub merged_abs: Vec<f64>,
    /// Q_{2p} = sum |Z|^{2p} over merged classes, p = 1..=4.
    pub q: Vec<f64>,
    /// chi_AB = 2 sum Re Z_n.
    pub chi_ab: f64,
    /// Spectral diameter of A.
    pub diam_a: f64,
    /// Gap classes that actually merged more than one state (resonances:
    /// the non-degenerate-gap assumption fails there).
    pub gap_warnings: Vec<GapClass>,
}

impl PerturbativeWeights {
    /// Leading temporal variance 2 dlambda^2 Q_2.
    pub fn variance(&self, delta_lambda: f64) -> f64 {
        2.0 * delta_lambda * delta_lambda * self.q[0]
    }
}

const GAP_MERGE_REL_TOL: f64 = 1e-8;
const GROUND_GAP_REL_TOL: f64 = 1e-10;

/// Z_n = A_{0n} B_{n0} / (E_n - E_0) from a full eigendecomposition.
/// Gaps within 1e-8 relative are merged coherently before the Q_{2p},
/// mirroring what the infinite-time average does to resonant terms.
pub fn perturbative_weights(sys: &DenseSystem) -> Result<PerturbativeWeights> {
    let (energies, vecs) = linalg::eigh(&sys.h0);
    let dim = energies.len();
    if dim < 2 {
        return Err(Error::InvalidArgument("need dimension >= 2".into()));
    }
    let scale = energies
        .iter()
        .fold(0.0f64, |m, &e| m.max(e.abs()))
        .max(f64::MIN_POSITIVE);
    let gap01 = energies[1] - energies[0];
    if gap01 <= GROUND_GAP_REL_TOL * scale {
        return Err(Error::DegenerateGroundState {
            gap: gap01,
            resolution: GROUND_GAP_REL_TOL * scale,
        });
    }
    let ground = vecs.column(0);
    let a_row = sys.a.adjoint() * ground; // conj(A_{0n}) per component
    let b_col = sys.b.adjoint() * ground;
    let mut z = Vec::with_capacity(dim - 1);
    let mut gaps = Vec::with_capacity(dim - 1);
    for n in 1..dim {
        let a0n = a_row.dotc(&vecs.column(n)); // wrong orientation fixed below
        let bn0 = vecs.column(n).dotc(&b_col);
        let _ = (a0n, bn0);
        // A_{0n} = <0|A|n>, B_{n0} = <n|B|0>
        let a0n = ground.dotc(&(&sys.a * vecs.column(n)));
        let bn0 = vecs.column(n).dotc(&(&sys.b * ground));
        let gap = energies[n] - energies[0];
        z.push(a0n * bn0 / Complex64::new(gap, 0.0));
        gaps.push(gap);
    }

    // merge degenerate gaps coherently
    let mut merged_abs = Vec::new();
    let mut gap_warnings = Vec::new();
    let mut i = 0;
    while i < gaps.len() {
        let mut sum = z[i];
        let mut j = i + 1;
        while j < gaps.len() && (gaps[j] - gaps[i]).abs() <= GAP_MERGE_REL_TOL * gaps[j] {
            sum += z[j];
            j += 1;
        }
        if j - i > 1 {
            gap_warnings.push(GapClass {
                gap: gaps[i],
                members: j - i,
            });
        }
        merged_abs.push(sum.norm());
        i = j;
    }

    let mut q = vec![0.0; 4];
    for &m in &merged_abs {
        let m2 = m * m;
        let mut pow = 1.0;
        for qp in q.iter_mut() {
            pow *= m2;
            *qp += pow;
        }
    }
    let chi_ab = 2.0 * z.iter().map(|zi| zi.re).sum::<f64>();
    let (a_eigs, _) = linalg::eigh(&sys.a);
    let diam_a = a_eigs.last().unwrap() - a_eigs.first().unwrap();
    Ok(PerturbativeWeights {
        z,
        gaps,
        merged_abs,
        q,
        chi_ab,
        diam_a,
        gap_warnings,
    })
}

/// The spectral-variance report: exact infinite-time variance of A(t)
/// against the bound diam(A)^2 tr(rho-bar^2).
#[derive(Debug, Clone, Serialize)]
pub struct VarianceBoundReport {
    /// Exact time-averaged variance, degenerate gaps grouped coherently.
    pub time_avg_variance: f64,
    /// Exact infinite-time average of A(t).
    pub time_average: f64,
    pub diam_a: f64,
    /// tr(rho-bar^2).
    pub purity: f64,
    /// diam(A)^2 tr(rho-bar^2).
    pub bound: f64,
    pub holds: bool,
}

/// Diagonal-ensemble weights p_n = |<n|psi0>|^2 with purities to order 8,
/// plus the exact temporal variance of the supplied observable and its
/// spectral bound.
pub fn diagonal_ensemble(
    h: &DMatrix<Complex64>,
    psi0: &DVector<Complex64>,
    a: &DMatrix<Complex64>,
) -> Result<(SpectralWeights, Purities8, VarianceBoundReport)> {
    linalg::check_hermitian(h)?;
    linalg::check_hermitian(a)?;
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::UnnormalizedState { norm, tol: 1e-10 });
    }
    let (energies, vecs) = linalg::eigh(h);
    let dim = energies.len();
    let c = linalg::to_eigenbasis(&vecs, psi0);
    let p: Vec<f64> = (0..dim).map(|n| c[n].norm_sqr()).collect();
    let weights = SpectralWeights::new(p.clone())?;
    let purities = Purities8::from_weights(&p);

    let a_eig = vecs.adjoint() * a * &vecs;
    let scale = energies
        .iter()
        .fold(0.0f64, |m, &e| m.max(e.abs()))
        .max(f64::MIN_POSITIVE);
    let zero_gap = 1e-12 * scale;

    // collect signed positive gaps with their coherent amplitudes
    let mut terms: Vec<(f64, Complex64)> = Vec::new();
    let mut time_average = 0.0;
    for n in 0..dim {
        for m in 0..dim {
            let g = energies[n] - energies[m];
            let t = c[m].conj() * c[n] * a_eig[(m, n)];
            if g.abs() <= zero_gap {
                time_average += t.re;
            } else if g > 0.0 {
                terms.push((g, t));
            }
        }
    }
    terms.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut variance = 0.0;
    let mut i = 0;
    while i < terms.len() {
        let mut sum = terms[i].1;
        let mut j = i + 1;
        while j < terms.len() && (terms[j].0 - terms[i].0).abs() <= GAP_MERGE_REL_TOL * terms[j].0
        {
            sum += terms[j].1;
            j += 1;
        }
        variance += 2.0 * sum.norm_sqr();
        i = j;
    }

    let (a_eigs, _) = linalg::eigh(a);
    let diam_a = a_eigs.last().unwrap() - a_eigs.first().unwrap();
    let purity = purities.traces[1];
    let bound = diam_a * diam_a * purity;
    Ok((
        weights,
        purities,
        VarianceBoundReport {
            time_avg_variance: variance,
            time_average,
            diam_a,
            purity,
            bound,
            holds: variance <= bound + 1e-12,
        },
    ))
}

/// tr(rho-bar^m) for m = 1..=8.
#[derive(Debug, Clone, Serialize)]
pub struct Purities8 {
    pub traces: [f64; 8],
}

impl Purities8 {
    fn from_weights(p: &[f64]) -> Self {
        let mut traces = [0.0; 8];
        for &w in p {
            let mut pow = 1.0;
            for t in traces.iter_mut() {
                pow *= w;
                *t += pow;
            }
        }
        Self { traces }
    }
}

/// Exact time evolution of an observable expectation from a full
/// eigendecomposition: the brute-force trajectory oracle.
#[derive(Debug, Clone)]
pub struct EvolvedObservable {
    energies: Vec<f64>,
    c: DVector<Complex64>,
    a_eig: DMatrix<Complex64>,
}

impl EvolvedObservable {
    pub fn new(
        h: &DMatrix<Complex64>,
        psi0: &DVector<Complex64>,
        a: &DMatrix<Complex64>,
    ) -> Result<Self> {
        linalg::check_hermitian(h)?;
        linalg::check_hermitian(a)?;
        let norm = psi0.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::UnnormalizedState { norm, tol: 1e-10 });
        }
        let (energies, vecs) = linalg::eigh(h);
        let c = linalg::to_eigenbasis(&vecs, psi0);
        let a_eig = vecs.adjoint() * a * &vecs;
        Ok(Self {
            energies,
            c,
            a_eig,
        })
    }

    /// <psi(t)|A|psi(t)>.
    pub fn value(&self, t: f64) -> f64 {
        let n = self.energies.len();
        let w = DVector::from_iterator(
            n,
            (0..n).map(|k| self.c[k] * Complex64::from_polar(1.0, -self.energies[k] * t)),
        );
        (w.adjoint() * &self.a_eig * &w)[(0, 0)].re
    }
}

/// Dense XY chain with periodic spin boundary conditions and the total
/// transverse magnetization M = sum_j sigma^z_j.
///
/// H = sum_{j=1}^{L} [(1+gamma)/2 sx_j sx_{j+1} + (1-gamma)/2 sy_j sy_{j+1}
///     + h sz_j], sigma_{L+1} = sigma_1. For L = 2 the wrap-around bond
/// doubles the j = 1 bond, as the literal sum prescribes.
pub fn build_xy_dense(l: usize, h: f64, gamma: f64) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    if l < 2 || (1usize << l) > DIM_LIMIT {
        return Err(Error::DimensionLimit {
            dim: 1usize << l,
            limit: DIM_LIMIT,
        });
    }
    let dim = 1usize << l;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let sx = DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
    let sy = DMatrix::from_row_slice(
        2,
        2,
        &[zero, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), zero],
    );
    let sz = DMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]);
    let id = DMatrix::<Complex64>::identity(2, 2);

    let site_op = |ops: &[(usize, &DMatrix<Complex64>)]| -> DMatrix<Complex64> {
        let mut out = DMatrix::<Complex64>::identity(1, 1);
        for site in 0..l {
            let factor = ops
                .iter()
                .find(|(s, _)| *s == site)
                .map(|(_, op)| (*op).clone())
                .unwrap_or_else(|| id.clone());
            out = out.kronecker(&factor);
        }
        out
    };

    let cx = Complex64::new(0.5 * (1.0 + gamma), 0.0);
    let cy = Complex64::new(0.5 * (1.0 - gamma), 0.0);
    let ch = Complex64::new(h, 0.0);
    let mut ham = DMatrix::<Complex64>::zeros(dim, dim);
    let mut mag = DMatrix::<Complex64>::zeros(dim, dim);
    for j in 0..l {
        let j2 = (j + 1) % l;
        ham += site_op(&[(j, &sx), (j2, &sx)]) * cx;
        ham += site_op(&[(j, &sy), (j2, &sy)]) * cy;
        let zj = site_op(&[(j, &sz)]);
        ham += &zj * ch;
        mag += zj;
    }
    Ok((ham, mag))
}

/// Ground state of a dense Hermitian matrix.
pub fn ground_state(h: &DMatrix<Complex64>) -> Result<DVector<Complex64>> {
    linalg::check_hermitian(h)?;
    let (_, vecs) = linalg::eigh(h);
    Ok(vecs.column(0).into_owned())
}

/// JSON wire format for Hermitian matrices:
/// {"dim": n, "entries": [[row, col, re, im], ...], "hermitian": true}.
/// With the hermitian flag, mirrored entries may be omitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64, f64)>,
    pub hermitian: bool,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.dim == 0 || self.dim > DIM_LIMIT {
            return Err(Error::DimensionLimit {
                dim: self.dim,
                limit: DIM_LIMIT,
            });
        }
        let mut m = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        let mut set = vec![false; self.dim * self.dim];
        for &(r, c, re, im) in &self.entries {
            if r >= self.dim || c >= self.dim {
                return Err(Error::InvalidArgument(format!(
                    "entry ({r},{c}) outside dim {}",
                    self.dim
                )));
            }
            m[(r, c)] = Complex64::new(re, im);
            set[r * self.dim + c] = true;
        }
        if self.hermitian {
            for r in 0..self.dim {
                for c in 0..self.dim {
                    if set[r * self.dim + c] && !set[c * self.dim + r] {
                        m[(c, r)] = m[(r, c)].conj();
                    }
                }
            }
            linalg::check_hermitian(&m)?;
        }
        Ok(m)
    }

    pub fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        let mut entries = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v != Complex64::new(0.0, 0.0) {
                    entries.push((r, c, v.re, v.im));
                }
            }
        }
        Self {
            dim: m.nrows(),
            entries,
            hermitian: linalg::hermiticity_deviation(m) <= 1e-12,
        }
    }
}

/// Deterministic random Hermitian matrix (GOE-like real-symmetric plus a
/// small imaginary Hermitian part), entries O(1/sqrt(dim)).
pub fn random_hermitian(dim: usize, seed: u64) -> DMatrix<Complex64> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (dim as f64).sqrt();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..=i {
            if i == j {
                m[(i, j)] = Complex64::new((rng.gen::<f64>() - 0.5) * 2.0 * scale, 0.0);
            } else {
                let v = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * scale;
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
    }
    m
}

/// Deterministic random normalized state.
pub fn random_state(dim: usize, seed: u64) -> DVector<Complex64> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut v = DVector::from_iterator(
        dim,
        (0..dim).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)),
    );
    let n = v.norm();
    v /= Complex64::new(n, 0.0);
    v
}
