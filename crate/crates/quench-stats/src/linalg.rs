//! Dense Hermitian helpers shared by the quasi-free and
//! exact-diagonalization modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const HERMITICITY_TOL: f64 = 1e-12;

/// Max |A - A^dagger| entry, scaled against the largest entry.
pub(crate) fn hermiticity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut dev = 0.0f64;
    let mut scale = 1.0f64;
    for i in 0..m.nrows() {
        for j in 0..=i {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            dev = dev.max(d);
            scale = scale.max(m[(i, j)].norm());
        }
    }
    dev / scale
}

pub(crate) fn check_hermitian(m: &DMatrix<Complex64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let dev = hermiticity_deviation(m);
    if dev > HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

/// Full Hermitian eigendecomposition with eigenvalues ascending and the
/// matching eigenvector columns.
pub(crate) fn eigh(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let se = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let n = m.nrows();
    let mut vals = Vec::with_capacity(n);
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vals.push(se.eigenvalues[src]);
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    (vals, vecs)
}

pub(crate) fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Components of psi in the eigenbasis given by the columns of `vecs`.
pub(crate) fn to_eigenbasis(
    vecs: &DMatrix<Complex64>,
    psi: &DVector<Complex64>,
) -> DVector<Complex64> {
    vecs.adjoint() * psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pauli_x() -> DMatrix<Complex64> {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
    }

    #[test]
    fn eigh_pauli_x() {
        let (vals, vecs) = eigh(&pauli_x());
        assert_relative_eq!(vals[0], -1.0, max_relative = 1e-14);
        assert_relative_eq!(vals[1], 1.0, max_relative = 1e-14);
        // reconstruction
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            2,
            vals.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        let rec = &vecs * d * vecs.adjoint();
        assert!(frobenius(&(rec - pauli_x())) < 1e-12);
    }

    #[test]
    fn hermitian_check() {
        assert!(check_hermitian(&pauli_x()).is_ok());
        let mut bad = pauli_x();
        bad[(0, 1)] = Complex64::new(1.0, 0.5);
        assert!(matches!(
            check_hermitian(&bad),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn random_reconstruction() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 40;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                if i == j {
                    m[(i, j)] = Complex64::new(v.re, 0.0);
                } else {
                    m[(i, j)] = v;
                    m[(j, i)] = v.conj();
                }
            }
        }
        let (vals, vecs) = eigh(&m);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            vals.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        let rec = &vecs * d * vecs.adjoint();
        let rel = frobenius(&(rec - &m)) / frobenius(&m);
        assert!(rel < 1e-10, "reconstruction error {rel}");
    }
}
