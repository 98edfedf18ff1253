//! Error type shared by the stress-point kernel.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum KernelError {
    #[error("elastic modulus `{name}` must be strictly positive (got {value})")]
    InvalidModulus { name: &'static str, value: f64 },

    #[error("deviatoric shape function must stay positive on [-pi/6, pi/6] (min {min})")]
    NonPositiveShape { min: f64 },

    #[error("shape function needs at least {needed} samples (got {got})")]
    TooFewSamples { needed: usize, got: usize },

    #[error("degenerate spectrum: eigenvalue gap {gap} below 1e-10 * {scale}")]
    DegenerateSpectrum { gap: f64, scale: f64 },

    #[error("stationary Lode angle: the predictor Lode-angle gradient is unbounded at theta_s = +/-pi/6")]
    StationaryLodeAngle,

    #[error("scalar solve did not converge: {context} ({iterations} iterations, residual {residual})")]
    NonConvergence {
        context: &'static str,
        iterations: u32,
        residual: f64,
    },

    #[error("apex return undefined for pressure-insensitive model (M = 0 or M_hat = 0)")]
    ApexUndefined,

    #[error("apex tangent singular: K*M*M_hat + dsigma0/dlambda = 0")]
    ApexTangentSingular,

    #[error("consistent tangent requested for q* = 0 radial state")]
    ZeroPredictorStress,

    #[error("finite-difference tangent: state too close to a regime boundary (regime flips persisted after 5 step shrinks)")]
    RegimeBoundary,
}
