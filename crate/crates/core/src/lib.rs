//! Exact Fourier-coefficient expansions, rigorous radii-polynomial
//! certification, and blow-up diagnostics for i u_t = Lap u + u^p on tori,
//! restricted to the invariant subspace of non-negative Fourier modes.

pub mod algebra;
pub mod certify;
pub mod dynamics;
pub mod error;
pub mod evaluate;
pub mod fft;
pub mod interval;
pub mod json;
pub mod lattice;
pub mod operators;
pub mod scalar;
pub mod solver;

pub use algebra::{ModeSequence, SpaceTimeSequence};
pub use certify::{CertifyParams, RadiiReport, Verdict};
pub use dynamics::{AstarEstimate, ClassificationResult, Regime};
pub use error::{Error, Result};
pub use evaluate::{GridRow, GridSpec};
pub use interval::{ComplexInterval, Interval};
pub use lattice::{FrequencyVector, MultiIndex};
pub use num_complex::Complex64;
pub use operators::OperatorContext;
pub use scalar::{RationalComplex, RealIntervalScalar, Scalar, ScalarKind, WeightRing};
pub use solver::{
    monochromatic_coeffs, solve_quadrature, solve_spacetime, zero_mode_solution,
    CoefficientTrajectory, ProblemConfig,
};
