//! Integer moments of spectral determinants `|det(zI - AU)|^2` over Haar-random
//! unitary `U`, regularised inverse determinants, the Schur and Beta-determinant
//! identities behind them, and the eigenvalue densities that follow.
//!
//! Every closed formula in this crate has an independent check: exact rational
//! arithmetic for the combinatorial identities, adaptive quadrature for the
//! one-dimensional integrals, and a reproducible sharded Monte Carlo engine for
//! the group averages.

pub mod besselint;
pub mod betadet;
pub mod densities;
pub mod error;
pub mod moments;
pub mod numerics;
pub mod regdet;
pub mod report;
pub mod sampling;
pub mod schur;
pub mod suite;

pub use error::{Error, Result};
pub use numerics::{BigRat, ComplexMat, HermSpectrum, Poly, C64};
pub use report::{Number, VerificationReport};
pub use sampling::{Ensemble, EnsembleSpec, McEstimate};
pub use schur::Partition;
