//! Consistent (algorithmic) tangent operators: the nine fourth-order blocks
//! `∂{σ_sym, s_skw, μ}/∂{ε, ω, χ}` for each return regime, plus a
//! finite-difference oracle over the integrator.

use crate::error::KernelError;
use crate::invariants::{lode_gradient, principal_from_invariants};
use crate::material::MaterialModel;
use crate::returnmap::{
    compute_predictors, default_tol, integrate, GeneralizedState, PredictorSet, Regime,
    ScalarSolveReport, StressState,
};
use crate::tensor::Tensor2;
use crate::tensor4::Tensor4;

/// The nine Jacobian blocks of the integrated stresses with respect to the
/// applied strain, relative rotation, and curvature.
#[derive(Clone, Debug)]
pub struct ConsistentTangent {
    pub dsig_deps: Tensor4,
    pub dsig_domega: Tensor4,
    pub dsig_dchi: Tensor4,
    pub dskw_deps: Tensor4,
    pub dskw_domega: Tensor4,
    pub dskw_dchi: Tensor4,
    pub dmu_deps: Tensor4,
    pub dmu_domega: Tensor4,
    pub dmu_dchi: Tensor4,
    pub regime: Regime,
}

impl ConsistentTangent {
    fn zero(regime: Regime) -> Self {
        ConsistentTangent {
            dsig_deps: Tensor4::zero(),
            dsig_domega: Tensor4::zero(),
            dsig_dchi: Tensor4::zero(),
            dskw_deps: Tensor4::zero(),
            dskw_domega: Tensor4::zero(),
            dskw_dchi: Tensor4::zero(),
            dmu_deps: Tensor4::zero(),
            dmu_domega: Tensor4::zero(),
            dmu_dchi: Tensor4::zero(),
            regime,
        }
    }

    pub fn blocks(&self) -> [(&'static str, &Tensor4); 9] {
        [
            ("dsig_deps", &self.dsig_deps),
            ("dsig_domega", &self.dsig_domega),
            ("dsig_dchi", &self.dsig_dchi),
            ("dskw_deps", &self.dskw_deps),
            ("dskw_domega", &self.dskw_domega),
            ("dskw_dchi", &self.dskw_dchi),
            ("dmu_deps", &self.dmu_deps),
            ("dmu_domega", &self.dmu_domega),
            ("dmu_dchi", &self.dmu_dchi),
        ]
    }

    /// Largest absolute entry over all nine blocks.
    pub fn max_abs_entry(&self) -> f64 {
        self.blocks()
            .iter()
            .map(|(_, b)| b.mat.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())))
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry difference over all nine blocks.
    pub fn max_abs_diff(&self, other: &ConsistentTangent) -> (f64, &'static str) {
        let mut worst = (0.0f64, "");
        for ((name, a), (_, b)) in self.blocks().iter().zip(other.blocks().iter()) {
            let d = a.max_abs_diff(b);
            if d > worst.0 {
                worst = (d, name);
            }
        }
        worst
    }
}

/// Elastic tangent: the constant elastic stiffness blocks, all cross blocks
/// exactly zero.
pub fn tangent_elastic(model: &MaterialModel) -> ConsistentTangent {
    let md = &model.moduli;
    let mut t = ConsistentTangent::zero(Regime::Elastic);
    t.dsig_deps =
        Tensor4::sph_operator() * md.bulk + Tensor4::dev_sym_projector() * (2.0 * md.shear);
    t.dskw_domega = Tensor4::skw_projector() * (2.0 * md.cosserat_shear);
    t.dmu_dchi = Tensor4::sph_operator() * md.curvature_bulk
        + (Tensor4::sym_projector() - Tensor4::sph_operator() * (1.0 / 3.0))
            * (2.0 * md.bending_sym)
        + Tensor4::skw_projector() * (2.0 * md.bending_skw);
    t
}

/// Direction of `∂q*/∂χ` (up to the `3G/q*` factor): the couple-stress
/// predictor with its trace reweighted by the spherical term of `q`.
fn chi_direction(pred: &PredictorSet) -> Tensor2 {
    pred.mu - Tensor2::identity() * (pred.tr_mu / 9.0)
}

/// Consistent tangent of the radial (first) return algorithm.
pub fn tangent_radial(
    pred: &PredictorSet,
    stress: &StressState,
    lambda_new: f64,
    model: &MaterialModel,
) -> Result<ConsistentTangent, KernelError> {
    let md = &model.moduli;
    let (g, k) = (md.shear, md.bulk);
    let (m, mh) = (model.yield_slope, model.potential_slope);
    let q_star = pred.q;
    if q_star <= 0.0 {
        return Err(KernelError::ZeroPredictorStress);
    }
    let q = stress.q;
    let theta = pred.theta_s;
    let gam = model.yield_shape.value(theta);
    let gam_hat = model.potential_shape.value(theta);
    let denom = 3.0 * g * gam * gam_hat + k * m * mh + model.dsigma0_dlambda(lambda_new);

    let ident = Tensor2::identity();
    let nchi = chi_direction(pred);
    let dqstar_de = pred.s_sym * (3.0 * g / q_star);
    let dqstar_dw = pred.s_skw * (3.0 * g / q_star);
    let dqstar_dc = nchi * (3.0 * g / q_star);

    let ddl_de = (dqstar_de * gam + ident * (m * k)) * (1.0 / denom);
    let ddl_dw = dqstar_dw * (gam / denom);
    let ddl_dc = dqstar_dc * (gam / denom);

    let dq_de = dqstar_de - ddl_de * (3.0 * g * gam_hat);
    let dq_dw = dqstar_dw - ddl_dw * (3.0 * g * gam_hat);
    let dq_dc = dqstar_dc - ddl_dc * (3.0 * g * gam_hat);

    let dp_de = ident * k - ddl_de * (k * mh);
    let dp_dw = -ddl_dw * (k * mh);
    let dp_dc = -ddl_dc * (k * mh);

    let shrink = 3.0 * g * q / (q_star * q_star * q_star);
    let scale = q / q_star;

    let mut t = ConsistentTangent::zero(Regime::Radial);
    t.dsig_deps = Tensor4::dyad(&pred.s_sym, &dq_de) * (1.0 / q_star)
        - Tensor4::dyad(&pred.s_sym, &pred.s_sym) * shrink
        + Tensor4::dev_sym_projector() * (2.0 * g * scale)
        + Tensor4::dyad(&ident, &dp_de);
    t.dsig_domega = Tensor4::dyad(&pred.s_sym, &dq_dw) * (1.0 / q_star)
        - Tensor4::dyad(&pred.s_sym, &pred.s_skw) * shrink
        + Tensor4::dyad(&ident, &dp_dw);
    t.dsig_dchi = Tensor4::dyad(&pred.s_sym, &dq_dc) * (1.0 / q_star)
        - Tensor4::dyad(&pred.s_sym, &nchi) * shrink
        + Tensor4::dyad(&ident, &dp_dc);

    t.dskw_deps = Tensor4::dyad(&pred.s_skw, &dq_de) * (1.0 / q_star)
        - Tensor4::dyad(&pred.s_skw, &pred.s_sym) * shrink;
    t.dskw_domega = Tensor4::dyad(&pred.s_skw, &dq_dw) * (1.0 / q_star)
        - Tensor4::dyad(&pred.s_skw, &pred.s_skw) * shrink
        + Tensor4::skw_projector() * (2.0 * md.cosserat_shear * scale);
    t.dskw_dchi = Tensor4::dyad(&pred.s_skw, &dq_dc) * (1.0 / q_star)
        - Tensor4::dyad(&pred.s_skw, &nchi) * shrink;

    t.dmu_deps = Tensor4::dyad(&pred.mu, &dq_de) * (1.0 / q_star)
        - Tensor4::dyad(&pred.mu, &pred.s_sym) * shrink;
    t.dmu_domega = Tensor4::dyad(&pred.mu, &dq_dw) * (1.0 / q_star)
        - Tensor4::dyad(&pred.mu, &pred.s_skw) * shrink;
    t.dmu_dchi = Tensor4::dyad(&pred.mu, &dq_dc) * (1.0 / q_star)
        - Tensor4::dyad(&pred.mu, &nchi) * shrink
        + couple_stiffness(model) * scale;
    Ok(t)
}

/// Elastic couple stiffness `K_c I⊗I + 2B (I_sym - I⊗I/3) + 2B_c I_skw`; the
/// plastic tangents carry it scaled by `q/r` (uniform relaxation of μ).
fn couple_stiffness(model: &MaterialModel) -> Tensor4 {
    let md = &model.moduli;
    Tensor4::sph_operator() * md.curvature_bulk
        + (Tensor4::sym_projector() - Tensor4::sph_operator() * (1.0 / 3.0))
            * (2.0 * md.bending_sym)
        + Tensor4::skw_projector() * (2.0 * md.bending_skw)
}

/// Consistent tangent of the general (second) return algorithm.
pub fn tangent_general(
    pred: &PredictorSet,
    stress: &StressState,
    lambda_new: f64,
    dlambda: f64,
    model: &MaterialModel,
) -> Result<ConsistentTangent, KernelError> {
    let md = &model.moduli;
    let (g, k) = (md.shear, md.bulk);
    let (m, mh) = (model.yield_slope, model.potential_slope);
    let theta = stress.theta_s;
    let q = stress.q;
    let q_s = stress.q_s;
    let p_unused = stress.p; // p enters only through its derivatives
    let _ = p_unused;

    let d = pred.theta_s - theta;
    let (sin_d, cos_d) = d.sin_cos();
    let (sin2, cos2) = (2.0 * d).sin_cos();
    let qs2 = pred.q_s * pred.q_s;
    let r = (pred.q * pred.q - qs2 * sin_d * sin_d).sqrt();

    let gam = model.yield_shape.value(theta);
    let gam_slope = model.yield_shape.slope(theta);
    let gam_hat = model.potential_shape.value(theta);
    let gam_hat_slope = model.potential_shape.slope(theta);
    let gam_hat_curv = model.potential_shape.curvature(theta);
    let sig0_slope = model.dsigma0_dlambda(lambda_new);

    // scalar derivatives with respect to theta_s
    let dr_dth = qs2 * sin2 / (2.0 * r);
    let big_l = qs2 * cos2 / (6.0 * g * r * gam_hat_slope);
    let ddl_dth = -(dlambda / r * dr_dth + dlambda * gam_hat_curv / gam_hat_slope + 2.0 * big_l);
    let dp_dth = -mh * k * ddl_dth;
    let dq_dth = dr_dth - 3.0 * g * (gam_hat * ddl_dth + dlambda * gam_hat_slope);
    let df_dth = gam_slope * q + gam * dq_dth + m * dp_dth - sig0_slope * ddl_dth;

    let ident = Tensor2::identity();
    let nchi = chi_direction(pred);
    let dth_star_de = lode_gradient(&pred.s_sym, g)?;

    // partials at fixed theta_s
    let dr_de_fix = pred.s_sym * (3.0 * g * cos_d * cos_d / r) - dth_star_de * dr_dth;
    let dr_dw_fix = pred.s_skw * (3.0 * g / r);
    let dr_dc_fix = nchi * (3.0 * g / r);

    let ddl_de_fix =
        pred.s_sym * (6.0 * g * dlambda / qs2) - dr_de_fix * (dlambda / r) + dth_star_de * (2.0 * big_l);
    let ddl_dw_fix = -dr_dw_fix * (dlambda / r);
    let ddl_dc_fix = -dr_dc_fix * (dlambda / r);

    let dp_de_fix = ident * k - ddl_de_fix * (k * mh);
    let dp_dw_fix = -ddl_dw_fix * (k * mh);
    let dp_dc_fix = -ddl_dc_fix * (k * mh);

    let dq_de_fix = dr_de_fix - ddl_de_fix * (3.0 * g * gam_hat);
    let dq_dw_fix = dr_dw_fix - ddl_dw_fix * (3.0 * g * gam_hat);
    let dq_dc_fix = dr_dc_fix - ddl_dc_fix * (3.0 * g * gam_hat);

    // implicit differentiation of f = 0 for the theta sensitivities
    let dth_de = -(dq_de_fix * gam + dp_de_fix * m - ddl_de_fix * sig0_slope) * (1.0 / df_dth);
    let dth_dw = -(dq_dw_fix * gam + dp_dw_fix * m - ddl_dw_fix * sig0_slope) * (1.0 / df_dth);
    let dth_dc = -(dq_dc_fix * gam + dp_dc_fix * m - ddl_dc_fix * sig0_slope) * (1.0 / df_dth);

    // totals
    let dp_de = dp_de_fix + dth_de * dp_dth;
    let dp_dw = dp_dw_fix + dth_dw * dp_dth;
    let dp_dc = dp_dc_fix + dth_dc * dp_dth;
    let dq_de = dq_de_fix + dth_de * dq_dth;
    let dq_dw = dq_dw_fix + dth_dw * dq_dth;
    let dq_dc = dq_dc_fix + dth_dc * dq_dth;
    let dr_de = dr_de_fix + dth_de * dr_dth;
    let dr_dw = dr_dw_fix + dth_dw * dr_dth;
    let dr_dc = dr_dc_fix + dth_dc * dr_dth;

    // q_s = (q/r) q_s* cos(theta* - theta)
    let dqs_de = (dq_de * pred.q_s + pred.s_sym * (3.0 * g * q / pred.q_s)) * (cos_d / r)
        + (dth_de - dth_star_de) * (q * pred.q_s * sin_d / r)
        - dr_de * (q_s / r);
    let dqs_dw = dq_dw * (pred.q_s * cos_d / r) + dth_dw * (q * pred.q_s * sin_d / r)
        - dr_dw * (q_s / r);
    let dqs_dc = dq_dc * (pred.q_s * cos_d / r) + dth_dc * (q * pred.q_s * sin_d / r)
        - dr_dc * (q_s / r);

    // principal stresses and the spectral basis of the strain predictor
    let es = pred.deviatoric_eigensystem()?;
    let principal = principal_from_invariants(stress.p, q_s, theta);
    let two_thirds_pi = 2.0 * std::f64::consts::FRAC_PI_3;
    let betas = [theta + two_thirds_pi, theta, theta - two_thirds_pi];

    let mut t = ConsistentTangent::zero(Regime::General);
    for i in 0..3 {
        let (sin_b, cos_b) = betas[i].sin_cos();
        let dsig_i_de = dp_de + (dqs_de * sin_b + dth_de * (q_s * cos_b)) * (2.0 / 3.0);
        let dsig_i_dw = dp_dw + (dqs_dw * sin_b + dth_dw * (q_s * cos_b)) * (2.0 / 3.0);
        let dsig_i_dc = dp_dc + (dqs_dc * sin_b + dth_dc * (q_s * cos_b)) * (2.0 / 3.0);
        t.dsig_deps += Tensor4::dyad(&es.bases[i], &dsig_i_de) + es.spins[i] * principal[i];
        t.dsig_domega += Tensor4::dyad(&es.bases[i], &dsig_i_dw);
        t.dsig_dchi += Tensor4::dyad(&es.bases[i], &dsig_i_dc);
    }

    // s_skw and mu scale by q/r
    let v_de = dq_de * (1.0 / r) - dr_de * (q / (r * r));
    let v_dw = dq_dw * (1.0 / r) - dr_dw * (q / (r * r));
    let v_dc = dq_dc * (1.0 / r) - dr_dc * (q / (r * r));
    let scale = q / r;

    t.dskw_deps = Tensor4::dyad(&pred.s_skw, &v_de);
    t.dskw_domega =
        Tensor4::dyad(&pred.s_skw, &v_dw) + Tensor4::skw_projector() * (2.0 * md.cosserat_shear * scale);
    t.dskw_dchi = Tensor4::dyad(&pred.s_skw, &v_dc);
    t.dmu_deps = Tensor4::dyad(&pred.mu, &v_de);
    t.dmu_domega = Tensor4::dyad(&pred.mu, &v_dw);
    t.dmu_dchi = Tensor4::dyad(&pred.mu, &v_dc) + couple_stiffness(model) * scale;
    Ok(t)
}

/// Consistent tangent of the apex (third) return algorithm: a single nonzero
/// block, `∂σ_sym/∂ε = K [1 - M M̂ K / (K M M̂ + σ0')] I⊗I`.
pub fn tangent_apex(model: &MaterialModel, lambda_new: f64) -> Result<ConsistentTangent, KernelError> {
    let k = model.moduli.bulk;
    let m = model.yield_slope;
    let mh = model.potential_slope;
    let sig0_slope = model.dsigma0_dlambda(lambda_new);
    let denom = k * m * mh + sig0_slope;
    if denom.abs() <= 1e-14 * (k * m * mh).abs().max(sig0_slope.abs()).max(f64::MIN_POSITIVE) {
        return Err(KernelError::ApexTangentSingular);
    }
    let coeff = k * (1.0 - m * mh * k / denom);
    let mut t = ConsistentTangent::zero(Regime::Apex);
    t.dsig_deps = Tensor4::sph_operator() * coeff;
    Ok(t)
}

/// Dispatches to the regime tangent of a converged state.
pub fn consistent_tangent(
    pred: &PredictorSet,
    stress: &StressState,
    lambda_new: f64,
    dlambda: f64,
    model: &MaterialModel,
) -> Result<ConsistentTangent, KernelError> {
    match stress.regime {
        Regime::Elastic => Ok(tangent_elastic(model)),
        Regime::Radial => tangent_radial(pred, stress, lambda_new, model),
        Regime::General => tangent_general(pred, stress, lambda_new, dlambda, model),
        Regime::Apex => tangent_apex(model, lambda_new),
    }
}

/// One integrator call returning stress, updated state, consistent tangent,
/// and the scalar-solve report.
pub fn integrate_with_tangent(
    state_n: &GeneralizedState,
    deps: &Tensor2,
    domega: &Tensor2,
    dchi: &Tensor2,
    model: &MaterialModel,
    tol: f64,
) -> Result<(StressState, GeneralizedState, ConsistentTangent, ScalarSolveReport), KernelError> {
    let pred = compute_predictors(state_n, deps, domega, dchi, model);
    let (stress, state, report) = integrate(state_n, deps, domega, dchi, model, tol)?;
    let tangent = consistent_tangent(&pred, &stress, state.lambda, state.lambda - state_n.lambda, model)?;
    Ok((stress, state, tangent, report))
}

/// Central finite differences of the integrated stresses with respect to each
/// of the 9+9+9 input components (symmetric directions for ε, skew for ω,
/// full for χ), with the regime held fixed: perturbations that flip the
/// regime are retried with the step divided by 10, up to 5 times.
pub fn fd_tangent(
    state_n: &GeneralizedState,
    deps: &Tensor2,
    domega: &Tensor2,
    dchi: &Tensor2,
    model: &MaterialModel,
    h: f64,
) -> Result<ConsistentTangent, KernelError> {
    let pred = compute_predictors(state_n, deps, domega, dchi, model);
    let tol = default_tol(model, state_n.lambda, &pred);
    let (base, _, _) = integrate(state_n, deps, domega, dchi, model, tol)?;
    let regime = base.regime;

    let mut t = ConsistentTangent::zero(regime);

    #[derive(Clone, Copy)]
    enum Slot {
        Eps,
        Omega,
        Chi,
    }

    let fill = |slot: Slot, t: &mut ConsistentTangent| -> Result<(), KernelError> {
        for b in 0..9 {
            let mut dir = Tensor2::zero();
            dir.comps[b] = 1.0;
            let dir = match slot {
                Slot::Eps => dir.sym(),
                Slot::Omega => dir.skw(),
                Slot::Chi => dir,
            };
            if dir.norm() == 0.0 {
                continue;
            }
            let mut step = h;
            let mut column: Option<(Tensor2, Tensor2, Tensor2)> = None;
            for _ in 0..5 {
                let perturbed = |sign: f64| -> Result<StressState, KernelError> {
                    let d = dir * (sign * step);
                    let (sp, so, sc) = match slot {
                        Slot::Eps => (*deps + d, *domega, *dchi),
                        Slot::Omega => (*deps, *domega + d, *dchi),
                        Slot::Chi => (*deps, *domega, *dchi + d),
                    };
                    let (s, _, _) = integrate(state_n, &sp, &so, &sc, model, tol)?;
                    Ok(s)
                };
                let plus = perturbed(1.0)?;
                let minus = perturbed(-1.0)?;
                if plus.regime == regime && minus.regime == regime {
                    let inv = 1.0 / (2.0 * step);
                    column = Some((
                        (plus.sigma_sym - minus.sigma_sym) * inv,
                        (plus.s_skw - minus.s_skw) * inv,
                        (plus.mu - minus.mu) * inv,
                    ));
                    break;
                }
                step /= 10.0;
            }
            let (dsig, dskw, dmu) = column.ok_or(KernelError::RegimeBoundary)?;
            let (bs, bk, bm) = match slot {
                Slot::Eps => (&mut t.dsig_deps, &mut t.dskw_deps, &mut t.dmu_deps),
                Slot::Omega => (&mut t.dsig_domega, &mut t.dskw_domega, &mut t.dmu_domega),
                Slot::Chi => (&mut t.dsig_dchi, &mut t.dskw_dchi, &mut t.dmu_dchi),
            };
            for a in 0..9 {
                bs.mat[a][b] = dsig.comps[a];
                bk.mat[a][b] = dskw.comps[a];
                bm.mat[a][b] = dmu.comps[a];
            }
        }
        Ok(())
    };

    fill(Slot::Eps, &mut t)?;
    fill(Slot::Omega, &mut t)?;
    fill(Slot::Chi, &mut t)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{DeviatoricShape, ElasticModuli, HardeningLaw};
    use crate::tensor::{XX, YY, ZZ};

    fn vm_model(g: f64, k: f64, sigma0: f64, h: f64) -> MaterialModel {
        let moduli = ElasticModuli::new(g, k, g / 10.0, 300.0, 200.0, 400.0).unwrap();
        MaterialModel::associated(
            moduli,
            DeviatoricShape::constant(1.0).unwrap(),
            0.0,
            HardeningLaw::Linear { sigma0, h },
        )
    }

    #[test]
    fn elastic_tangent_volumetric_contraction() {
        let model = vm_model(1000.0, 2500.0, 1e9, 0.0);
        let t = tangent_elastic(&model);
        let v = 3e-3;
        let deps = Tensor2::identity() * (v / 3.0);
        let dsig = t.dsig_deps.ddot_t2(&deps);
        let expect = Tensor2::identity() * (2500.0 * v);
        assert!((dsig - expect).norm() <= 1e-12 * expect.norm());
        // cross blocks exactly zero
        assert_eq!(t.dsig_domega.norm(), 0.0);
        assert_eq!(t.dsig_dchi.norm(), 0.0);
        assert_eq!(t.dskw_deps.norm(), 0.0);
        assert_eq!(t.dmu_deps.norm(), 0.0);
        assert_eq!(t.dmu_domega.norm(), 0.0);
        assert_eq!(t.dskw_dchi.norm(), 0.0);
    }

    #[test]
    fn elastic_tangent_matches_fd() {
        let model = vm_model(1000.0, 2500.0, 1e9, 0.0);
        let state = GeneralizedState::unstressed();
        let deps = Tensor2::from_diag([1e-4, 2e-4, -0.5e-4]);
        let mut domega = Tensor2::zero();
        domega.set(0, 1, 1e-4);
        domega.set(1, 0, -1e-4);
        let mut dchi = Tensor2::zero();
        dchi.set(2, 0, 2e-4);
        let an = tangent_elastic(&model);
        let fd = fd_tangent(&state, &deps, &domega, &dchi, &model, 1e-7).unwrap();
        let (d, name) = an.max_abs_diff(&fd);
        assert!(d <= 1e-7 * an.max_abs_entry(), "block {name}: {d}");
    }

    #[test]
    fn apex_tangent_perfect_plasticity_is_zero() {
        let moduli = ElasticModuli::new(800.0, 1000.0, 80.0, 50.0, 50.0, 60.0).unwrap();
        let model = MaterialModel::new(
            moduli,
            DeviatoricShape::constant(1.0).unwrap(),
            1.0,
            DeviatoricShape::constant(1.0).unwrap(),
            1.0,
            HardeningLaw::Linear { sigma0: 10.0, h: 0.0 },
        );
        let t = tangent_apex(&model, 0.1).unwrap();
        assert_eq!(t.dsig_deps.norm(), 0.0);
    }

    #[test]
    fn apex_tangent_hardening_coefficient() {
        let moduli = ElasticModuli::new(800.0, 1000.0, 80.0, 50.0, 50.0, 60.0).unwrap();
        let (m, mh, h) = (1.2, 0.8, 35.0);
        let model = MaterialModel::new(
            moduli,
            DeviatoricShape::constant(1.0).unwrap(),
            m,
            DeviatoricShape::constant(1.0).unwrap(),
            mh,
            HardeningLaw::Linear { sigma0: 10.0, h },
        );
        let t = tangent_apex(&model, 0.0).unwrap();
        let k = moduli.bulk;
        let coeff = k * (1.0 - m * mh * k / (k * m * mh + h));
        assert!((t.dsig_deps.mat[XX][YY] - coeff).abs() <= 1e-12 * coeff.abs());
        assert!((t.dsig_deps.mat[ZZ][ZZ] - coeff).abs() <= 1e-12 * coeff.abs());
    }

    #[test]
    fn radial_tangent_major_symmetry_for_associated_cauchy_state() {
        let model = vm_model(1000.0, 2500.0, 100.0, 20.0);
        let state = GeneralizedState::unstressed();
        let a = 160.0 / (3f64.sqrt() * 2.0 * 1000.0);
        let deps = Tensor2::from_diag([a, 0.0, -a]);
        let z = Tensor2::zero();
        let pred = compute_predictors(&state, &deps, &z, &z, &model);
        let (stress, st, _) = integrate(&state, &deps, &z, &z, &model, 1e-12).unwrap();
        assert_eq!(stress.regime, Regime::Radial);
        let t = tangent_radial(&pred, &stress, st.lambda, &model).unwrap();
        let sym_err = (t.dsig_deps - t.dsig_deps.major_transpose()).norm() / t.dsig_deps.norm();
        assert!(sym_err <= 1e-10, "major symmetry violated: {sym_err}");
    }

    #[test]
    fn radial_tangent_perfect_plasticity_kills_normal_component() {
        let model = vm_model(1000.0, 2500.0, 100.0, 0.0);
        let state = GeneralizedState::unstressed();
        let a = 160.0 / (3f64.sqrt() * 2.0 * 1000.0);
        let deps = Tensor2::from_diag([a, 0.0, -a]);
        let z = Tensor2::zero();
        let pred = compute_predictors(&state, &deps, &z, &z, &model);
        let (stress, st, _) = integrate(&state, &deps, &z, &z, &model, 1e-12).unwrap();
        let t = tangent_radial(&pred, &stress, st.lambda, &model).unwrap();
        // response to loading along the radial direction has no component
        // along the yield normal (3/2 s / q for von Mises)
        let resp = t.dsig_deps.ddot_t2(&pred.s_sym);
        let normal = stress.s_sym() * (1.5 / stress.q);
        let proj = resp.ddot(&normal).abs();
        assert!(proj <= 1e-9 * resp.norm().max(1.0) * normal.norm());
    }

    #[test]
    fn general_tangent_is_continuous_at_incipient_yield() {
        // The algorithmic tangent tends to the continuum elastoplastic
        // operator as dlambda -> 0 (the stress map is C0 but not C1 across
        // the surface), so the check is continuity along the plastic branch:
        // tangents at dlambda ~ 1e-10 and at a small finite step agree, and
        // both match finite differences of the integrator.
        let moduli = ElasticModuli::new(3000.0, 4000.0, 300.0, 200.0, 160.0, 240.0).unwrap();
        let shape = DeviatoricShape::from_fn(|t| 1.0 - 0.2 * (3.0 * t).sin(), 101).unwrap();
        let model = MaterialModel::associated(
            moduli,
            shape,
            0.4,
            HardeningLaw::Linear { sigma0: 50.0, h: 0.0 },
        );
        let state = GeneralizedState::unstressed();
        let theta_t = 0.08;
        let q_y = 50.0 / model.yield_shape.value(theta_t);
        let strain_for = |factor: f64| {
            let sig = principal_from_invariants(0.0, q_y * factor, theta_t);
            Tensor2::from_diag([
                sig[0] / (2.0 * moduli.shear),
                sig[1] / (2.0 * moduli.shear),
                sig[2] / (2.0 * moduli.shear),
            ])
        };
        let z = Tensor2::zero();

        let tangent_at = |factor: f64| {
            let deps = strain_for(factor);
            let pred = compute_predictors(&state, &deps, &z, &z, &model);
            let (stress, st, _) = integrate(&state, &deps, &z, &z, &model, 1e-14).unwrap();
            assert_eq!(stress.regime, Regime::General);
            (
                tangent_general(&pred, &stress, st.lambda, st.lambda, &model).unwrap(),
                deps,
                st.lambda,
            )
        };

        let (t0, _, dl0) = tangent_at(1.0 + 1e-10);
        assert!(dl0 < 1e-9);
        let (t1, deps1, dl1) = tangent_at(1.0 + 1e-4);
        assert!(dl1 > dl0);
        let (d, name) = t0.max_abs_diff(&t1);
        assert!(
            d <= 1e-2 * t0.max_abs_entry(),
            "tangent discontinuous in dlambda at incipient yield: block {name} jump {d}"
        );

        // FD at the near-incipient state (deep enough that +/-h stays plastic)
        let fd = fd_tangent(&state, &deps1, &z, &z, &model, 1e-8).unwrap();
        let (d, name) = t1.max_abs_diff(&fd);
        assert!(
            d <= 2e-4 * t1.max_abs_entry(),
            "block {name} vs FD: {d} (scale {})",
            t1.max_abs_entry()
        );
    }
}
