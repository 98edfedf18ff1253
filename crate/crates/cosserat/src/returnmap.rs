//! Backward-Euler predictor/corrector stress integration.
//!
//! The elastic trial state is assembled from committed elastic strains plus
//! the applied increment; the yield check on the trial invariants selects the
//! regime a priori:
//!
//! * `f* <= 0` — elastic, trial state returned verbatim;
//! * `Γ̂'(θ_s*) = 0` (trial Lode angle stationary for the plastic potential,
//!   or circular potential) — radial return, Lode angle preserved;
//! * otherwise — general return, a damped Newton iteration on the Lode angle
//!   restricted to `(-π/6, π/6)`;
//! * a converged `q < 0` from either plastic branch hands off to the apex
//!   return, which collapses the stress to an isotropic state.
//!
//! Each plastic branch solves a single scalar equation; stresses are then
//! rebuilt from the predictor tensors and the converged invariants.

use crate::error::KernelError;
use crate::invariants::{cosserat_q, invariants_sym, principal_from_invariants};
use crate::material::{elastic_stress, elastic_strains, MaterialModel};
use crate::spectral::eigensystem;
use crate::tensor::Tensor2;

/// Converged per-point state: elastic strains and the accumulated plastic
/// multiplier.
#[derive(Clone, Copy, Debug, Default)]
pub struct GeneralizedState {
    pub eps_e: Tensor2,
    pub omega_e: Tensor2,
    pub chi_e: Tensor2,
    pub lambda: f64,
}

impl GeneralizedState {
    pub fn unstressed() -> Self {
        GeneralizedState::default()
    }
}

/// Elastic trial (predictor) quantities.
#[derive(Clone, Debug)]
pub struct PredictorSet {
    /// Mean stress `p*`.
    pub p: f64,
    /// Cosserat equivalent von Mises stress `q*`.
    pub q: f64,
    /// Symmetric-deviatoric invariant `q_s*`.
    pub q_s: f64,
    /// Trial Lode angle `θ_s*` (0 when degenerate).
    pub theta_s: f64,
    /// True when `q_s* = 0` and the Lode angle is undefined.
    pub lode_degenerate: bool,
    pub s_sym: Tensor2,
    pub s_skw: Tensor2,
    pub mu: Tensor2,
    pub tr_mu: f64,
    /// Total strain predictor `ε*` (source of the spectral basis in the
    /// general regime).
    pub eps: Tensor2,
}

impl PredictorSet {
    /// Spectral decomposition of the deviatoric strain predictor; only valid
    /// (and only requested) in the general regime where eigenvalues are
    /// distinct.
    pub fn deviatoric_eigensystem(&self) -> Result<crate::spectral::EigenSystem, KernelError> {
        eigensystem(&self.eps.dev())
    }
}

/// Return-mapping regime at a converged state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    Elastic,
    Radial,
    General,
    Apex,
}

/// Stress state at the end of the step with cached invariants.
#[derive(Clone, Copy, Debug)]
pub struct StressState {
    pub sigma_sym: Tensor2,
    pub s_skw: Tensor2,
    pub mu: Tensor2,
    pub p: f64,
    pub q: f64,
    pub q_s: f64,
    pub theta_s: f64,
    pub regime: Regime,
}

impl StressState {
    pub fn s_sym(&self) -> Tensor2 {
        self.sigma_sym - Tensor2::identity() * self.p
    }

    /// Full (non-symmetric) Cosserat stress `σ = σ_sym + s_skw`.
    pub fn sigma(&self) -> Tensor2 {
        self.sigma_sym + self.s_skw
    }
}

/// Iteration diagnostics of a scalar solve.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScalarSolveReport {
    pub iterations: u32,
    pub residual: f64,
    pub damping_events: u32,
}

/// Outcome of the radial/general algorithms: either a valid converged state
/// or the `q < 0` signal that mandates the apex return.
#[derive(Clone, Debug)]
pub enum ReturnOutcome {
    Converged(ReturnSolution),
    ApexRequired(ScalarSolveReport),
}

#[derive(Clone, Debug)]
pub struct ReturnSolution {
    pub dlambda: f64,
    pub stress: StressState,
    pub report: ScalarSolveReport,
}

/// Iteration cap for every scalar solve.
pub const MAX_ITER: u32 = 50;

/// Default residual tolerance: `1e-10 * max(σ0(λ_n), q*, 1 stress unit)`.
pub fn default_tol(model: &MaterialModel, lambda_n: f64, pred: &PredictorSet) -> f64 {
    1e-10 * model.sigma0(lambda_n).max(pred.q).max(1.0)
}

/// A priori regime choice for a plastic trial: radial whenever the potential
/// Lode derivative vanishes at the trial angle, the Lode angle is undefined,
/// or the symmetric-deviatoric part is negligible against the coupled terms
/// (no deviatoric geometry to rotate).
pub fn radial_dispatch(pred: &PredictorSet, model: &MaterialModel) -> bool {
    pred.lode_degenerate
        || pred.q_s <= 1e-12 * pred.q.max(1.0)
        || model.is_stationary(pred.theta_s)
}

/// Assembles the elastic trial state and its invariants.
pub fn compute_predictors(
    state_n: &GeneralizedState,
    deps: &Tensor2,
    domega: &Tensor2,
    dchi: &Tensor2,
    model: &MaterialModel,
) -> PredictorSet {
    let eps = state_n.eps_e + *deps;
    let omega = state_n.omega_e + *domega;
    let chi = state_n.chi_e + *dchi;
    let trial = elastic_stress(&eps, &omega, &chi, &model.moduli);
    let p = trial.sigma_sym.trace() / 3.0;
    let s_sym = trial.sigma_sym.dev();
    let inv = invariants_sym(&s_sym);
    let m_sym = trial.mu.sym().dev();
    let m_skw = trial.mu.skw();
    let tr_mu = trial.mu.trace();
    let q = cosserat_q(&s_sym, &trial.s_skw, &m_sym, &m_skw, tr_mu, &model.moduli);
    PredictorSet {
        p,
        q,
        q_s: inv.q_s,
        theta_s: inv.theta_s,
        lode_degenerate: inv.degenerate,
        s_sym,
        s_skw: trial.s_skw,
        mu: trial.mu,
        tr_mu,
        eps,
    }
}

/// Safeguarded Newton on a bracketed scalar residual. `pos_end`/`neg_end`
/// carry the signs of the residual at the bracket ends; the proposal falls
/// back to bisection whenever Newton leaves the bracket or the residual fails
/// to decrease after damping.
fn solve_scalar(
    mut fval: impl FnMut(f64) -> f64,
    mut fslope: impl FnMut(f64) -> f64,
    x0: f64,
    mut pos_end: f64,
    mut neg_end: f64,
    tol: f64,
    context: &'static str,
) -> Result<(f64, ScalarSolveReport), KernelError> {
    let mut x = x0;
    let mut f = fval(x);
    let mut damping_events = 0u32;
    for iterations in 0..=MAX_ITER {
        if f.abs() <= tol {
            return Ok((
                x,
                ScalarSolveReport {
                    iterations,
                    residual: f,
                    damping_events,
                },
            ));
        }
        if iterations == MAX_ITER {
            break;
        }
        if f > 0.0 {
            pos_end = x;
        } else {
            neg_end = x;
        }
        let lo = pos_end.min(neg_end);
        let hi = pos_end.max(neg_end);
        let df = fslope(x);
        let mut xn = x - f / df;
        if !xn.is_finite() || xn <= lo || xn >= hi {
            xn = 0.5 * (pos_end + neg_end);
        }
        let mut fnew = fval(xn);
        let mut halvings = 0;
        while fnew.abs() > f.abs() && halvings < 6 {
            xn = 0.5 * (xn + x);
            fnew = fval(xn);
            halvings += 1;
            damping_events += 1;
        }
        if fnew.abs() > f.abs() {
            xn = 0.5 * (pos_end + neg_end);
            fnew = fval(xn);
        }
        x = xn;
        f = fnew;
    }
    Err(KernelError::NonConvergence {
        context,
        iterations: MAX_ITER,
        residual: f,
    })
}

/// First (radial) return algorithm, valid when `Γ̂'(θ_s*) = 0`: the Lode
/// angle is preserved and `r ≡ q*`; a single equation in Δλ is solved.
pub fn return_radial(
    pred: &PredictorSet,
    lambda_n: f64,
    model: &MaterialModel,
    tol: f64,
) -> Result<ReturnOutcome, KernelError> {
    let theta = pred.theta_s;
    let gam = model.yield_shape.value(theta);
    let gam_hat = model.potential_shape.value(theta);
    let g = model.moduli.shear;
    let k = model.moduli.bulk;
    let m = model.yield_slope;
    let mh = model.potential_slope;

    let f = |dl: f64| {
        (pred.q - 3.0 * g * gam_hat * dl) * gam + m * (pred.p - k * mh * dl)
            - model.sigma0(lambda_n + dl)
    };
    let slope = |dl: f64| -(3.0 * g * gam * gam_hat + k * m * mh + model.dsigma0_dlambda(lambda_n + dl));

    let f_star = f(0.0);
    let denom0 = -slope(0.0);
    let guess = if denom0 > 0.0 {
        f_star / denom0
    } else {
        pred.q / (3.0 * g * gam_hat)
    };

    // expand the negative end of the bracket
    let mut hi = guess.abs().max(pred.q / (3.0 * g * gam_hat)).max(1e-16);
    let mut fh = f(hi);
    let mut doublings = 0;
    while fh > 0.0 && doublings < 200 {
        hi *= 2.0;
        fh = f(hi);
        doublings += 1;
    }
    if fh > 0.0 {
        return Err(KernelError::NonConvergence {
            context: "radial return bracket",
            iterations: doublings,
            residual: fh,
        });
    }

    let x0 = if guess > 0.0 && guess < hi { guess } else { 0.5 * hi };
    let (dlambda, report) = solve_scalar(f, slope, x0, 0.0, hi, tol, "radial return")?;

    let q = pred.q - 3.0 * g * gam_hat * dlambda;
    if q < 0.0 {
        return Ok(ReturnOutcome::ApexRequired(report));
    }
    let p = pred.p - k * mh * dlambda;
    let scale = if pred.q > 0.0 { q / pred.q } else { 0.0 };
    let s_sym = pred.s_sym * scale;
    let stress = StressState {
        sigma_sym: Tensor2::identity() * p + s_sym,
        s_skw: pred.s_skw * scale,
        mu: pred.mu * scale,
        p,
        q,
        q_s: pred.q_s * scale,
        theta_s: theta,
        regime: Regime::Radial,
    };
    Ok(ReturnOutcome::Converged(ReturnSolution {
        dlambda,
        stress,
        report,
    }))
}

/// Scalar quantities of the general return at a candidate Lode angle.
#[derive(Clone, Copy, Debug)]
pub(crate) struct GeneralEval {
    pub theta: f64,
    pub dlambda: f64,
    pub r: f64,
    pub q: f64,
    pub p: f64,
    pub f: f64,
}

pub(crate) fn general_eval(
    pred: &PredictorSet,
    lambda_n: f64,
    model: &MaterialModel,
    theta: f64,
) -> GeneralEval {
    let g = model.moduli.shear;
    let k = model.moduli.bulk;
    let d = pred.theta_s - theta;
    let qs2 = pred.q_s * pred.q_s;
    let r = (pred.q * pred.q - qs2 * d.sin() * d.sin()).sqrt();
    let gam_hat_slope = model.potential_shape.slope(theta);
    let dlambda = qs2 * (2.0 * d).sin() / (6.0 * g * r * gam_hat_slope);
    let p = pred.p - k * model.potential_slope * dlambda;
    let q = r - 3.0 * g * model.potential_shape.value(theta) * dlambda;
    let f = model.yield_fn(p, q, theta, lambda_n + dlambda);
    GeneralEval {
        theta,
        dlambda,
        r,
        q,
        p,
        f,
    }
}

/// Analytic `df/dθ_s` of the general return residual.
pub(crate) fn general_df_dtheta(
    pred: &PredictorSet,
    lambda_n: f64,
    model: &MaterialModel,
    ev: &GeneralEval,
) -> f64 {
    let g = model.moduli.shear;
    let k = model.moduli.bulk;
    let d = pred.theta_s - ev.theta;
    let qs2 = pred.q_s * pred.q_s;
    let gam_hat = model.potential_shape.value(ev.theta);
    let gam_hat_slope = model.potential_shape.slope(ev.theta);
    let gam_hat_curv = model.potential_shape.curvature(ev.theta);

    let dr = qs2 * (2.0 * d).sin() / (2.0 * ev.r);
    // L = Δλ / tan(2 θ_s* - 2 θ_s), written in closed form to stay finite
    // as θ_s -> θ_s*
    let l = qs2 * (2.0 * d).cos() / (6.0 * g * ev.r * gam_hat_slope);
    let ddl = -(ev.dlambda / ev.r * dr + ev.dlambda * gam_hat_curv / gam_hat_slope + 2.0 * l);
    let dp = -model.potential_slope * k * ddl;
    let dq = dr - 3.0 * g * (gam_hat * ddl + ev.dlambda * gam_hat_slope);
    model.yield_shape.slope(ev.theta) * ev.q + model.yield_shape.value(ev.theta) * dq
        + model.yield_slope * dp
        - model.dsigma0_dlambda(lambda_n + ev.dlambda) * ddl
}

/// Second (general) return algorithm, valid when `Γ̂'(θ_s*) ≠ 0`: a damped
/// Newton iteration on the Lode angle, restricted to the interval between the
/// trial angle and the nearest stationary angle of the plastic potential on
/// the descent side.
pub fn return_general(
    pred: &PredictorSet,
    lambda_n: f64,
    model: &MaterialModel,
    tol: f64,
) -> Result<ReturnOutcome, KernelError> {
    let slope_at_trial = model.potential_shape.slope(pred.theta_s);
    let (stat_lo, stat_hi) = model.stationary_bracket(pred.theta_s);
    let clamp = 1e-12;
    // Δλ > 0 requires sign(θ_s* - θ_s) = sign(Γ̂'(θ_s)); pick the bound on
    // that side and keep a hard clamp inside the open interval.
    let far_end = if slope_at_trial > 0.0 {
        (stat_lo + clamp).min(pred.theta_s)
    } else {
        (stat_hi - clamp).max(pred.theta_s)
    };

    let f_far = general_eval(pred, lambda_n, model, far_end).f;
    if !(f_far < 0.0) {
        return Err(KernelError::NonConvergence {
            context: "general return bracket",
            iterations: 0,
            residual: f_far,
        });
    }

    // The residual can cross zero more than once between the trial angle and
    // the stationary bound (Lode-dependent potentials). The meaningful root
    // is the continuation branch out of the trial state: take the first sign
    // change walking away from theta_s*.
    let fv = |th: f64| general_eval(pred, lambda_n, model, th).f;
    let mut pos_end = pred.theta_s;
    let mut neg_end = far_end;
    const PANELS: usize = 64;
    for k in 1..PANELS {
        let th = pred.theta_s + (far_end - pred.theta_s) * k as f64 / PANELS as f64;
        let f = fv(th);
        if f > 0.0 {
            pos_end = th;
        } else {
            neg_end = th;
            break;
        }
    }

    let delta = 1e-3_f64.min(0.25 * (pred.theta_s - far_end).abs());
    let near_start = pred.theta_s - slope_at_trial.signum() * delta;
    let x0 = if (near_start - pos_end).signum() == (neg_end - pos_end).signum()
        && (near_start - neg_end).signum() == (pos_end - neg_end).signum()
    {
        near_start
    } else {
        0.5 * (pos_end + neg_end)
    };

    let fs = |th: f64| {
        let ev = general_eval(pred, lambda_n, model, th);
        general_df_dtheta(pred, lambda_n, model, &ev)
    };
    let (theta, report) = solve_scalar(fv, fs, x0, pos_end, neg_end, tol, "general return")?;

    let ev = general_eval(pred, lambda_n, model, theta);
    if ev.q < 0.0 {
        return Ok(ReturnOutcome::ApexRequired(report));
    }

    let scale = ev.q / ev.r;
    let q_s = scale * pred.q_s * (pred.theta_s - theta).cos();
    let principal = principal_from_invariants(ev.p, q_s, theta);
    let es = pred.deviatoric_eigensystem()?;
    let sigma_sym = es.bases[0] * principal[0] + es.bases[1] * principal[1] + es.bases[2] * principal[2];
    let stress = StressState {
        sigma_sym,
        s_skw: pred.s_skw * scale,
        mu: pred.mu * scale,
        p: ev.p,
        q: ev.q,
        q_s,
        theta_s: theta,
        regime: Regime::General,
    };
    Ok(ReturnOutcome::Converged(ReturnSolution {
        dlambda: ev.dlambda,
        stress,
        report,
    }))
}

/// Third (apex) return algorithm: projection onto the isotropic point,
/// `M p* - K M M̂ Δλ - σ0(λ_n + Δλ) = 0`, with all deviatoric and couple
/// parts relaxed to zero.
pub fn return_apex(
    pred: &PredictorSet,
    lambda_n: f64,
    model: &MaterialModel,
    tol: f64,
) -> Result<ReturnSolution, KernelError> {
    let m = model.yield_slope;
    let mh = model.potential_slope;
    if m == 0.0 || mh == 0.0 {
        return Err(KernelError::ApexUndefined);
    }
    let k = model.moduli.bulk;
    let f = |dl: f64| m * pred.p - k * m * mh * dl - model.sigma0(lambda_n + dl);
    let slope = |dl: f64| -(k * m * mh + model.dsigma0_dlambda(lambda_n + dl));

    let f0 = f(0.0);
    if !(f0 > 0.0) {
        return Err(KernelError::NonConvergence {
            context: "apex return bracket",
            iterations: 0,
            residual: f0,
        });
    }
    let denom0 = -slope(0.0);
    let guess = if denom0 > 0.0 { f0 / denom0 } else { 1e-8 };
    let mut hi = guess.abs().max(1e-16);
    let mut fh = f(hi);
    let mut doublings = 0;
    while fh > 0.0 && doublings < 200 {
        hi *= 2.0;
        fh = f(hi);
        doublings += 1;
    }
    if fh > 0.0 {
        return Err(KernelError::NonConvergence {
            context: "apex return bracket",
            iterations: doublings,
            residual: fh,
        });
    }
    let x0 = if guess > 0.0 && guess < hi { guess } else { 0.5 * hi };
    let (dlambda, report) = solve_scalar(f, slope, x0, 0.0, hi, tol, "apex return")?;

    let p = pred.p - k * mh * dlambda;
    let stress = StressState {
        sigma_sym: Tensor2::identity() * p,
        s_skw: Tensor2::zero(),
        mu: Tensor2::zero(),
        p,
        q: 0.0,
        q_s: 0.0,
        theta_s: 0.0,
        regime: Regime::Apex,
    };
    Ok(ReturnSolution {
        dlambda,
        stress,
        report,
    })
}

/// Integrates one strain/curvature increment: predictor assembly, a priori
/// regime dispatch, scalar return solve, and recovery of the updated elastic
/// strains by inverting the elastic law on the returned stresses.
pub fn integrate(
    state_n: &GeneralizedState,
    deps: &Tensor2,
    domega: &Tensor2,
    dchi: &Tensor2,
    model: &MaterialModel,
    tol: f64,
) -> Result<(StressState, GeneralizedState, ScalarSolveReport), KernelError> {
    let pred = compute_predictors(state_n, deps, domega, dchi, model);
    let f_star = model.yield_fn(pred.p, pred.q, pred.theta_s, state_n.lambda);

    if f_star <= 0.0 {
        let stress = StressState {
            sigma_sym: Tensor2::identity() * pred.p + pred.s_sym,
            s_skw: pred.s_skw,
            mu: pred.mu,
            p: pred.p,
            q: pred.q,
            q_s: pred.q_s,
            theta_s: pred.theta_s,
            regime: Regime::Elastic,
        };
        let state = GeneralizedState {
            eps_e: state_n.eps_e + *deps,
            omega_e: state_n.omega_e + *domega,
            chi_e: state_n.chi_e + *dchi,
            lambda: state_n.lambda,
        };
        return Ok((stress, state, ScalarSolveReport::default()));
    }

    let outcome = if radial_dispatch(&pred, model) {
        return_radial(&pred, state_n.lambda, model, tol)?
    } else {
        return_general(&pred, state_n.lambda, model, tol)?
    };
    let solution = match outcome {
        ReturnOutcome::Converged(sol) => sol,
        ReturnOutcome::ApexRequired(_) => return_apex(&pred, state_n.lambda, model, tol)?,
    };

    let (eps_e, omega_e, chi_e) = elastic_strains(
        &solution.stress.sigma_sym,
        &solution.stress.s_skw,
        &solution.stress.mu,
        &model.moduli,
    );
    let state = GeneralizedState {
        eps_e,
        omega_e,
        chi_e,
        lambda: state_n.lambda + solution.dlambda,
    };
    Ok((solution.stress, state, solution.report))
}
