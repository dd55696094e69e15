//! Time statistics of quantum observables after a small Hamiltonian quench.
//!
//! After a sudden small change of Hamiltonian parameters, an observable
//! expectation value A(t) wanders quasiperiodically around its time
//! average. Sampling t uniformly from a long window turns A(t) into a
//! random variable; this crate computes, samples, and cross-validates its
//! full probability distribution:
//!
//! - [`model_xy`] — exact Bogoliubov spectral data for the XY chain in a
//!   transverse field and the mode weights driving the post-quench
//!   transverse magnetization;
//! - [`timeseries`] — trajectory evaluation, reproducible Monte-Carlo time
//!   sampling, and empirical cumulants: the ground truth every analytic
//!   distribution is checked against;
//! - [`charfun`] — Bessel-product characteristic functions, the exact
//!   ln I0 cumulant coefficients, and numerical inversion to densities;
//! - [`universal`] — Hurwitz-Epstein zeta sums, truncated-zeta finite-size
//!   laws, universal cumulant ratios with their Gaussian branch, limit
//!   distributions, and scaling-exponent fits;
//! - [`loschmidt`] — full time statistics of the Loschmidt echo: the
//!   kernel-integral PDF, diagonal-ensemble purities, critical weight
//!   families, the Poisson limit, and quasi-free determinant/product
//!   evaluation with the hypergeometric characteristic function of ln L;
//! - [`perturbation`] — dense exact-diagonalization oracle: first-order
//!   weights, generalized variances, susceptibility, and the spectral
//!   bound on temporal variance;
//! - [`cli`] — batch front end behind the `quench-stats` binary.
//!
//! The runnable entry points live in `examples/`; see the README.

pub mod charfun;
pub mod cli;
pub mod error;
pub mod loschmidt;
pub mod model_xy;
pub mod perturbation;
pub mod timeseries;
pub mod universal;

mod linalg;
mod quad;

pub use error::{Error, Result};
