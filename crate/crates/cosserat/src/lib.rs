//! Invariant-based backward-Euler stress integration for the Cosserat
//! (micropolar) continuum, with consistent tangent operators.
//!
//! The stress-point kernel works in full 3D: second-order strain and
//! curvature tensors go in, non-symmetric stress and couple-stress tensors
//! come out, together with the nine fourth-order Jacobian blocks a finite
//! element needs for quadratic Newton convergence. Plastic return reduces to
//! a single scalar equation per regime (radial, general, or apex), selected
//! a priori from the predictor Lode angle.

pub mod error;
pub mod invariants;
pub mod material;
pub mod returnmap;
pub mod spectral;
pub mod spline;
pub mod tangent;
pub mod tensor;
pub mod tensor4;
pub mod verify;

pub use error::KernelError;
pub use invariants::{cosserat_q, invariants_sym, lode_gradient, principal_from_invariants};
pub use material::{
    elastic_stress, DeviatoricShape, ElasticModuli, HardeningLaw, MaterialModel, Stationarity,
};
pub use returnmap::{
    compute_predictors, integrate, GeneralizedState, PredictorSet, Regime, ScalarSolveReport,
    StressState,
};
pub use spectral::{eigensystem, EigenSystem};
pub use tangent::{consistent_tangent, fd_tangent, ConsistentTangent};
pub use tensor::Tensor2;
pub use tensor4::Tensor4;
