//! Dense complex linear algebra, polynomials, exact rationals, quadrature and
//! root finding shared by the rest of the crate.

mod adaptive;
mod linalg;
mod poly;
mod quad;
mod rational;
mod roots;

pub use adaptive::{adaptive_integrate, adaptive_integrate_with, AdaptiveOptions, QuadValue};
pub use linalg::{complex_eigenvalues, det, gram_eigs, hermitian_eigs, ComplexMat, HermSpectrum, C64};
pub use poly::Poly;
pub use quad::{quad_rule, QuadratureRule, RuleKind};
pub use rational::{
    beta_rat, binomial, factorial, rat_det, rat_ln, rat_sqrt, rat_to_f64, BigRat, GaussRat, GaussRatMat,
};
pub use roots::find_root_monotone;
