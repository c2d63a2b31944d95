//! Numerical laboratory for a two-dimensional non-Hermitian Su-Schrieffer-Heeger
//! lattice with on-site gain/loss.
//!
//! The crate is organised bottom-up:
//!
//! * [`scalar`] — the floating-point abstraction ([`Real`]) the whole crate is
//!   generic over, with `f64`-backed aliases at the crate root.
//! * [`mat`] — a small dense complex-matrix type.
//! * [`eig`] — a dense complex eigensolver (Hessenberg reduction followed by
//!   shifted QR) used as the ground-truth oracle everywhere.
//! * [`model`] — Bloch and real-space Hamiltonians plus symmetry diagnostics.
//! * [`spectrum`] — closed-form eigenvalues/eigenvectors in two variants (a
//!   literal transcription of the quoted formulas and a corrected set), cross
//!   validated against the oracle.
//! * [`exceptional`] — exceptional-point detection and self-orthogonality.
//! * [`topology`] — Wilson-loop Zak phases, Berry curvature by three methods,
//!   anomalous Hall and Nernst responses.
//! * [`circuit`] — the companion RLC circuit Laplacian and its resonances.
//! * [`validate`] — the discrepancy log comparing closed forms with the oracle.
//!
//! Everything is a pure function of its inputs; see [`parallel`] for the
//! deterministic parallel map used by grid sweeps.

pub mod scalar;
pub mod mat;
pub mod eig;
pub mod parallel;
pub mod model;
pub mod spectrum;
pub mod exceptional;
pub mod topology;
pub mod circuit;
pub mod validate;

pub use scalar::Real;

/// Default-precision complex scalar.
pub type C64 = num_complex::Complex<f64>;
/// Default-precision model parameters.
pub type ModelParams = model::ModelParams<f64>;
/// Default-precision momentum.
pub type Momentum = model::Momentum<f64>;
/// Default-precision complex matrix.
pub type CMat64 = mat::CMat<f64>;
/// Default-precision eigendecomposition.
pub type Eigen64 = eig::Eigen<f64>;
/// Default-precision circuit parameters.
pub type CircuitParams = circuit::CircuitParams<f64>;
