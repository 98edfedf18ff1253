//! Stress invariants: the Lode angle of the symmetric deviatoric part, the
//! Cosserat equivalent von Mises stress, and principal-stress recomposition.
//!
//! Sign convention is tension-positive throughout: the yield function is
//! `f = q Γ(θ_s) + M p - σ0(λ)`, so compressive mean stress (p < 0)
//! strengthens a frictional (M > 0) material.

use crate::error::KernelError;
use crate::material::ElasticModuli;
use crate::tensor::Tensor2;

use std::f64::consts::FRAC_PI_6;

/// Invariants of a symmetric deviatoric tensor.
#[derive(Clone, Copy, Debug)]
pub struct LodeInvariants {
    /// `q_s = sqrt(3/2 s : s) >= 0`.
    pub q_s: f64,
    /// Lode angle in `[-pi/6, pi/6]`; 0 when degenerate.
    pub theta_s: f64,
    /// True when `q_s = 0` and the Lode angle is undefined.
    pub degenerate: bool,
}

/// Invariants `(q_s, θ_s)` of a symmetric deviatoric tensor.
///
/// `θ_s = (1/3) asin(-27/2 det(s) / q_s³)`. The argument is clamped to
/// `[-1, 1]` to absorb round-off at exact triaxial states; `q_s = 0` yields
/// the degenerate flag with `θ_s = 0`.
pub fn invariants_sym(s: &Tensor2) -> LodeInvariants {
    let q_s = (1.5 * s.ddot(s)).sqrt();
    if q_s == 0.0 {
        return LodeInvariants {
            q_s: 0.0,
            theta_s: 0.0,
            degenerate: true,
        };
    }
    let arg = (-13.5 * s.det() / (q_s * q_s * q_s)).clamp(-1.0, 1.0);
    LodeInvariants {
        q_s,
        theta_s: arg.asin() / 3.0,
        degenerate: false,
    }
}

/// Cosserat equivalent von Mises stress.
///
/// ```text
/// q = { 3/2 [ s_sym:s_sym + (G/G_c) s_skw:s_skw + (G/B) m_sym:m_sym
///             + (G/B_c) m_skw:m_skw ] + (2G/K_c) tr²μ / 9 }^(1/2)
/// ```
pub fn cosserat_q(
    s_sym: &Tensor2,
    s_skw: &Tensor2,
    m_sym: &Tensor2,
    m_skw: &Tensor2,
    tr_mu: f64,
    moduli: &ElasticModuli,
) -> f64 {
    let g = moduli.shear;
    let sq = 1.5
        * (s_sym.ddot(s_sym)
            + g / moduli.cosserat_shear * s_skw.ddot(s_skw)
            + g / moduli.bending_sym * m_sym.ddot(m_sym)
            + g / moduli.bending_skw * m_skw.ddot(m_skw))
        + 2.0 * g / moduli.curvature_bulk * tr_mu * tr_mu / 9.0;
    sq.sqrt()
}

/// Ordered principal stresses from `(p, q_s, θ_s)`:
///
/// ```text
/// σ_I   = p + 2/3 q_s sin(θ_s + 2π/3)
/// σ_II  = p + 2/3 q_s sin(θ_s)
/// σ_III = p + 2/3 q_s sin(θ_s - 2π/3)
/// ```
pub fn principal_from_invariants(p: f64, q_s: f64, theta_s: f64) -> [f64; 3] {
    let two_thirds_pi = 2.0 * std::f64::consts::FRAC_PI_3;
    [
        p + 2.0 / 3.0 * q_s * (theta_s + two_thirds_pi).sin(),
        p + 2.0 / 3.0 * q_s * theta_s.sin(),
        p + 2.0 / 3.0 * q_s * (theta_s - two_thirds_pi).sin(),
    ]
}

/// Gradient of the Lode angle with respect to the tensor itself,
/// `∂θ_s/∂s`, for a symmetric deviatoric tensor away from θ_s = ±π/6.
pub(crate) fn dtheta_ds(s: &Tensor2) -> Result<Tensor2, KernelError> {
    let inv = invariants_sym(s);
    if inv.degenerate {
        return Err(KernelError::StationaryLodeAngle);
    }
    let q3 = inv.q_s.powi(3);
    let u = -13.5 * s.det() / q3;
    let one_m_u2 = 1.0 - u * u;
    // unbounded at theta = +/-pi/6; use a conservative conditioning cut
    if one_m_u2 <= 1e-12 {
        return Err(KernelError::StationaryLodeAngle);
    }
    // du/ds = -13.5 [ cof(s)/q_s^3 - (9/2) det(s) s / q_s^5 ]
    let du = (s.cofactor() * (1.0 / q3) - *s * (4.5 * s.det() / (q3 * inv.q_s * inv.q_s))) * (-13.5);
    Ok((du * (1.0 / (3.0 * one_m_u2.sqrt()))).sym().dev())
}

/// Gradient of the predictor Lode angle with respect to the total strain,
/// `∂θ_s*/∂ε`, through the elastic predictor map `s* = 2G dev sym ε*`.
///
/// Errors with [`KernelError::StationaryLodeAngle`] at θ_s* = ±π/6 where the
/// gradient is unbounded (never requested in the general return regime).
pub fn lode_gradient(s_sym_star: &Tensor2, shear_g: f64) -> Result<Tensor2, KernelError> {
    Ok(dtheta_ds(s_sym_star)? * (2.0 * shear_g))
}

/// Lode-angle interval bound `π/6`.
pub const LODE_MAX: f64 = FRAC_PI_6;
