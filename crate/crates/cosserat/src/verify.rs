//! Independent verification oracles for the stress integrator.
//!
//! [`integrate_oracle`] solves the same backward-Euler step as
//! [`crate::returnmap::integrate`], but in tensor space: a full Newton
//! iteration on all plastic strain/curvature components plus the plastic
//! multiplier, with residuals assembled directly from the flow rule and the
//! yield condition. It never touches the invariant-based return algorithms
//! (no radial/general geometry, no closed forms), so agreement between the
//! two is a genuine cross-check of the whole return-mapping chain.
//!
//! The Lode-angle gradient used by the oracle's flow direction is computed
//! through the spectral route (`∂θ/∂s = Σ_i cos(θ + β_i) b_i / q_s`), a
//! different path from the algebraic cofactor form used elsewhere.

use crate::error::KernelError;
use crate::invariants::{cosserat_q, invariants_sym};
use crate::material::MaterialModel;
use crate::returnmap::{compute_predictors, GeneralizedState, PredictorSet, Regime, StressState};
use crate::spectral::jacobi_sym3;
use crate::tensor::Tensor2;

/// Oracle result: converged stress, plastic multiplier increment, regime.
#[derive(Clone, Debug)]
pub struct OracleSolution {
    pub stress: StressState,
    pub dlambda: f64,
}

const NV: usize = 21;

/// Unknown layout: [Δε_v^p | Δe^p (6 sym) | Δω^p (3 skw) | tr Δχ^p |
/// Δg_sym^p (6 sym) | Δg_skw^p (3 skw) | Δλ].
const SYM_SLOTS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (2, 0)];
const SKW_SLOTS: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

fn sym_from(x: &[f64]) -> Tensor2 {
    let mut t = Tensor2::zero();
    for (k, &(i, j)) in SYM_SLOTS.iter().enumerate() {
        t.set(i, j, x[k]);
        if i != j {
            t.set(j, i, x[k]);
        }
    }
    t
}

fn skw_from(x: &[f64]) -> Tensor2 {
    let mut t = Tensor2::zero();
    for (k, &(i, j)) in SKW_SLOTS.iter().enumerate() {
        t.set(i, j, x[k]);
        t.set(j, i, -x[k]);
    }
    t
}

/// Lode-angle gradient via the spectral decomposition of `s`. Coefficients
/// are averaged over near-degenerate eigenvalue groups: the continuous
/// extension of the gradient onto the θ = ±π/6 kink, exact away from it.
fn dtheta_ds_spectral(s: &Tensor2) -> Tensor2 {
    let inv = invariants_sym(s);
    if inv.degenerate {
        return Tensor2::zero();
    }
    let (vals, vecs) = jacobi_sym3(s.to_matrix());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
    let beta = [
        inv.theta_s + 2.0 * std::f64::consts::FRAC_PI_3,
        inv.theta_s,
        inv.theta_s - 2.0 * std::f64::consts::FRAC_PI_3,
    ];
    let sorted = [vals[order[0]], vals[order[1]], vals[order[2]]];
    let gap_tol = 1e-7 * s.norm().max(f64::MIN_POSITIVE);
    // group indices of nearly equal eigenvalues
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..3 {
        if sorted[i - 1] - sorted[i] <= gap_tol {
            groups.last_mut().unwrap().push(i);
        } else {
            groups.push(vec![i]);
        }
    }
    let mut out = Tensor2::zero();
    for group in groups {
        let c_avg = group.iter().map(|&i| beta[i].cos()).sum::<f64>() / group.len() as f64;
        for &i in &group {
            let o = order[i];
            let n = [vecs[0][o], vecs[1][o], vecs[2][o]];
            out += Tensor2::dyad(n, n) * (c_avg / inv.q_s);
        }
    }
    out
}

struct SmoothSystem<'a> {
    pred: &'a PredictorSet,
    lambda_n: f64,
    model: &'a MaterialModel,
    q_floor: f64,
    /// The circumferential (Lode-derivative) flow term vanishes identically
    /// at the solution of stationary-angle trials; dropping it there keeps
    /// the system smooth across the θ = ±π/6 eigenvalue kink.
    include_lode_term: bool,
}

struct SmoothPoint {
    stress_parts: (Tensor2, Tensor2, Tensor2), // s_sym, s_skw, mu
    p: f64,
    q: f64,
    q_s: f64,
    theta: f64,
}

impl SmoothSystem<'_> {
    fn point(&self, x: &[f64; NV]) -> Option<SmoothPoint> {
        let md = &self.model.moduli;
        let de_p = sym_from(&x[1..7]);
        let dw_p = skw_from(&x[7..10]);
        let dgs_p = sym_from(&x[11..17]);
        let dgk_p = skw_from(&x[17..20]);

        let p = self.pred.p - md.bulk * x[0];
        let s_sym = self.pred.s_sym - de_p * (2.0 * md.shear);
        let s_skw = self.pred.s_skw - dw_p * (2.0 * md.cosserat_shear);
        let tr_mu = self.pred.tr_mu - 3.0 * md.curvature_bulk * x[10];
        let m_sym = self.pred.mu.sym().dev() - dgs_p * (2.0 * md.bending_sym);
        let m_skw = self.pred.mu.skw() - dgk_p * (2.0 * md.bending_skw);
        let mu = Tensor2::identity() * (tr_mu / 3.0) + m_sym + m_skw;
        let q = cosserat_q(&s_sym, &s_skw, &m_sym, &m_skw, tr_mu, md);
        if q <= self.q_floor {
            return None;
        }
        let inv = invariants_sym(&s_sym);
        Some(SmoothPoint {
            stress_parts: (s_sym, s_skw, mu),
            p,
            q,
            q_s: inv.q_s,
            theta: inv.theta_s,
        })
    }

    fn residuals(&self, x: &[f64; NV]) -> Option<[f64; NV]> {
        let md = &self.model.moduli;
        let pt = self.point(x)?;
        let (s_sym, s_skw, mu) = pt.stress_parts;
        let dlambda = x[20];
        let gam_hat = self.model.potential_shape.value(pt.theta);
        let gam_hat_slope = self.model.potential_shape.slope(pt.theta);

        // flow directions at the end-of-step stress
        let mut n_e = s_sym * (1.5 * gam_hat / pt.q);
        if self.include_lode_term && gam_hat_slope != 0.0 {
            n_e += dtheta_ds_spectral(&s_sym) * (pt.q * gam_hat_slope);
        }
        let n_w = s_skw * (1.5 * md.shear / md.cosserat_shear * gam_hat / pt.q);
        let n_trchi = md.shear / md.curvature_bulk * gam_hat / pt.q * mu.trace();
        let m_sym = mu.sym().dev();
        let m_skw = mu.skw();
        let n_gs = m_sym * (1.5 * md.shear / md.bending_sym * gam_hat / pt.q);
        let n_gk = m_skw * (1.5 * md.shear / md.bending_skw * gam_hat / pt.q);

        let mut r = [0.0; NV];
        r[0] = x[0] - self.model.potential_slope * dlambda;
        for (k, &(i, j)) in SYM_SLOTS.iter().enumerate() {
            r[1 + k] = sym_from(&x[1..7]).get(i, j) - dlambda * n_e.get(i, j);
        }
        for (k, &(i, j)) in SKW_SLOTS.iter().enumerate() {
            r[7 + k] = skw_from(&x[7..10]).get(i, j) - dlambda * n_w.get(i, j);
        }
        r[10] = x[10] - dlambda * n_trchi;
        for (k, &(i, j)) in SYM_SLOTS.iter().enumerate() {
            r[11 + k] = sym_from(&x[11..17]).get(i, j) - dlambda * n_gs.get(i, j);
        }
        for (k, &(i, j)) in SKW_SLOTS.iter().enumerate() {
            r[17 + k] = skw_from(&x[17..20]).get(i, j) - dlambda * n_gk.get(i, j);
        }
        // yield condition, scaled to strain units
        r[20] = self
            .model
            .yield_fn(pt.p, pt.q, pt.theta, self.lambda_n + dlambda)
            / (3.0 * md.shear);
        Some(r)
    }
}

fn norm_inf(r: &[f64; NV]) -> f64 {
    r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Dense LU solve with partial pivoting (21x21).
fn solve_dense(a: &mut [[f64; NV]; NV], b: &mut [f64; NV]) -> bool {
    for col in 0..NV {
        let mut piv = col;
        for row in col + 1..NV {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return false;
        }
        if piv != col {
            a.swap(piv, col);
            b.swap(piv, col);
        }
        for row in col + 1..NV {
            let w = a[row][col] / a[col][col];
            if w == 0.0 {
                continue;
            }
            for k in col..NV {
                a[row][k] -= w * a[col][k];
            }
            b[row] -= w * b[col];
        }
    }
    for col in (0..NV).rev() {
        let mut s = b[col];
        for k in col + 1..NV {
            s -= a[col][k] * b[k];
        }
        b[col] = s / a[col][col];
    }
    true
}

fn newton_solve(sys: &SmoothSystem, x0: [f64; NV], tol: f64) -> Option<[f64; NV]> {
    let mut x = x0;
    let mut r = sys.residuals(&x)?;
    let mut rn = norm_inf(&r);
    for _ in 0..200 {
        if rn <= tol {
            return Some(x);
        }
        // forward-difference Jacobian
        let mut jac = [[0.0; NV]; NV];
        for j in 0..NV {
            let h = 1e-8 * (1.0 + x[j].abs());
            let mut xp = x;
            xp[j] += h;
            let rp = sys.residuals(&xp)?;
            for i in 0..NV {
                jac[i][j] = (rp[i] - r[i]) / h;
            }
        }
        let mut step = r;
        for v in step.iter_mut() {
            *v = -*v;
        }
        if !solve_dense(&mut jac, &mut step) {
            return None;
        }
        // backtracking line search on the residual norm
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1.0 / 4096.0 {
            let mut xt = x;
            for i in 0..NV {
                xt[i] += t * step[i];
            }
            if let Some(rt) = sys.residuals(&xt) {
                let rtn = norm_inf(&rt);
                if rtn < rn || (t == 1.0 && rtn <= rn * (1.0 + 1e-12)) {
                    x = xt;
                    r = rt;
                    rn = rtn;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    None
}

/// Tensor-space backward-Euler step, independent of the invariant algorithms.
pub fn integrate_oracle(
    state_n: &GeneralizedState,
    deps: &Tensor2,
    domega: &Tensor2,
    dchi: &Tensor2,
    model: &MaterialModel,
) -> Result<OracleSolution, KernelError> {
    let pred = compute_predictors(state_n, deps, domega, dchi, model);
    let f_star = model.yield_fn(pred.p, pred.q, pred.theta_s, state_n.lambda);
    if f_star <= 0.0 {
        return Ok(OracleSolution {
            stress: StressState {
                sigma_sym: Tensor2::identity() * pred.p + pred.s_sym,
                s_skw: pred.s_skw,
                mu: pred.mu,
                p: pred.p,
                q: pred.q,
                q_s: pred.q_s,
                theta_s: pred.theta_s,
                regime: Regime::Elastic,
            },
            dlambda: 0.0,
        });
    }

    let tol = 1e-13 * (1.0 + pred.eps.norm());

    // Track the continuation branch: find the load fraction where the trial
    // first crosses the surface, then march the smooth solve to the full
    // increment with warm starts. Backward-Euler steps with Lode-dependent
    // potentials can have several roots; the branch continuous in the
    // increment is the meaningful one.
    let fstar_at = |t: f64| {
        let sp = compute_predictors(state_n, &(*deps * t), &(*domega * t), &(*dchi * t), model);
        model.yield_fn(sp.p, sp.q, sp.theta_s, state_n.lambda)
    };
    let mut t_yield = 0.0;
    for k in 0..=64 {
        let t = k as f64 / 64.0;
        if fstar_at(t) > 0.0 {
            // refine the crossing
            let (mut lo, mut hi) = (t - 1.0 / 64.0, t);
            if k == 0 {
                lo = 0.0;
            }
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if fstar_at(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            t_yield = hi;
            break;
        }
    }

    let radial = crate::returnmap::radial_dispatch(&pred, model);
    let solve_at = |t: f64, guess: [f64; NV]| -> Option<([f64; NV], f64)> {
        let sp = compute_predictors(state_n, &(*deps * t), &(*domega * t), &(*dchi * t), model);
        let sys = SmoothSystem {
            pred: &sp,
            lambda_n: state_n.lambda,
            model,
            q_floor: 1e-12 * sp.q.max(1.0),
            include_lode_term: !radial,
        };
        let x = newton_solve(&sys, guess, tol)?;
        let q = sys.point(&x).map(|pt| pt.q)?;
        Some((x, q))
    };

    let mut guess = [0.0; NV];
    let mut t = t_yield;
    let range = 1.0 - t_yield;
    let mut dt = range / 8.0;
    let mut q_collapsed = false;
    let mut stalled = false;
    if range <= 0.0 {
        if let Some((x, _)) = solve_at(1.0, guess) {
            guess = x;
            t = 1.0;
        } else {
            stalled = true;
        }
    }
    while t < 1.0 && !stalled && !q_collapsed {
        let target = (t + dt).min(1.0);
        match solve_at(target, guess) {
            Some((x, q)) => {
                let sp_q = compute_predictors(
                    state_n,
                    &(*deps * target),
                    &(*domega * target),
                    &(*dchi * target),
                    model,
                )
                .q;
                if x[20] < 0.0 {
                    stalled = true;
                    break;
                }
                guess = x;
                t = target;
                if q < 1e-6 * sp_q.max(1.0) {
                    q_collapsed = true;
                }
            }
            None => {
                dt *= 0.5;
                if dt < range / 4096.0 {
                    stalled = true;
                }
            }
        }
    }

    if t >= 1.0 && !q_collapsed {
        let sys = SmoothSystem {
            pred: &pred,
            lambda_n: state_n.lambda,
            model,
            q_floor: 1e-12 * pred.q.max(1.0),
            include_lode_term: !radial,
        };
        let pt = sys.point(&guess).expect("converged point must be evaluable");
        let (s_sym, s_skw, mu) = pt.stress_parts;
        if radial && !pred.lode_degenerate && pt.q_s > 1e-9 * pt.q.max(1.0) {
            // a-posteriori check of the dropped term: the Lode angle must
            // not have moved
            if (pt.theta - pred.theta_s).abs() > 1e-6 {
                return Err(KernelError::NonConvergence {
                    context: "oracle radial solution moved the Lode angle",
                    iterations: 0,
                    residual: pt.theta - pred.theta_s,
                });
            }
        }
        let regime = if radial { Regime::Radial } else { Regime::General };
        return Ok(OracleSolution {
            stress: StressState {
                sigma_sym: Tensor2::identity() * pt.p + s_sym,
                s_skw,
                mu,
                p: pt.p,
                q: pt.q,
                q_s: pt.q_s,
                theta_s: pt.theta,
                regime,
            },
            dlambda: guess[20],
        });
    }

    // the smooth branch collapsed (q -> 0) or has no root: apex
    apex_bisection(&pred, state_n.lambda, model)
}

/// Apex return solved by plain bisection (distinct route from the kernel's
/// Newton + closed form).
fn apex_bisection(
    pred: &PredictorSet,
    lambda_n: f64,
    model: &MaterialModel,
) -> Result<OracleSolution, KernelError> {
    let m = model.yield_slope;
    let mh = model.potential_slope;
    if m == 0.0 || mh == 0.0 {
        return Err(KernelError::ApexUndefined);
    }
    let k = model.moduli.bulk;
    let f = |dl: f64| m * pred.p - k * m * mh * dl - model.sigma0(lambda_n + dl);
    if f(0.0) <= 0.0 {
        return Err(KernelError::NonConvergence {
            context: "oracle apex bracket",
            iterations: 0,
            residual: f(0.0),
        });
    }
    let mut hi = 1e-12;
    let mut n = 0;
    while f(hi) > 0.0 && n < 400 {
        hi *= 2.0;
        n += 1;
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let dlambda = 0.5 * (lo + hi);
    let p = pred.p - k * mh * dlambda;
    Ok(OracleSolution {
        stress: StressState {
            sigma_sym: Tensor2::identity() * p,
            s_skw: Tensor2::zero(),
            mu: Tensor2::zero(),
            p,
            q: 0.0,
            q_s: 0.0,
            theta_s: 0.0,
            regime: Regime::Apex,
        },
        dlambda,
    })
}

/// Deterministic trial-case generation for randomized verification sweeps.
pub mod trials {
    use crate::invariants::principal_from_invariants;
    use crate::material::{DeviatoricShape, ElasticModuli, HardeningLaw, MaterialModel, Stationarity};
    use crate::returnmap::{compute_predictors, GeneralizedState, Regime};
    use crate::tensor::Tensor2;

    /// SplitMix64: small, seedable, dependency-free.
    pub struct TrialRng(pub u64);

    impl TrialRng {
        pub fn next_u64(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z ^ (z >> 31)
        }

        pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
            let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            lo + (hi - lo) * u
        }

        pub fn tensor(&mut self, scale: f64) -> Tensor2 {
            let mut t = Tensor2::zero();
            for c in t.comps.iter_mut() {
                *c = self.uniform(-scale, scale);
            }
            t
        }
    }

    /// Random rotation from three Givens rotations.
    pub fn rotation(rng: &mut TrialRng) -> [[f64; 3]; 3] {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for &(p, q) in &[(0usize, 1usize), (1, 2), (0, 2)] {
            let a = rng.uniform(0.0, std::f64::consts::TAU);
            let (s, c) = a.sin_cos();
            let mut g = [[0.0; 3]; 3];
            for (i, row) in g.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            g[p][p] = c;
            g[q][q] = c;
            g[p][q] = -s;
            g[q][p] = s;
            let mut out = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j] = (0..3).map(|k| g[i][k] * r[k][j]).sum();
                }
            }
            r = out;
        }
        r
    }

    /// `R T Rᵀ`.
    pub fn rotate(t: &Tensor2, r: &[[f64; 3]; 3]) -> Tensor2 {
        let m = t.to_matrix();
        let mut tmp = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                tmp[i][j] = (0..3).map(|k| r[i][k] * m[k][j]).sum();
            }
        }
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| tmp[i][k] * r[j][k]).sum();
            }
        }
        Tensor2::from_matrix(out)
    }

    /// Shape families used by the sweeps.
    #[derive(Clone, Copy, Debug, PartialEq, Eq)]
    pub enum ShapeKind {
        /// Circular deviatoric section.
        Constant,
        /// Smooth non-circular with stationary angles only at ±π/6.
        Smooth,
        /// Mohr-Coulomb-like with one interior stationary angle.
        InteriorStationary,
    }

    pub fn make_shape(rng: &mut TrialRng, kind: ShapeKind) -> DeviatoricShape {
        match kind {
            ShapeKind::Constant => DeviatoricShape::constant(rng.uniform(0.8, 1.3)).unwrap(),
            ShapeKind::Smooth => {
                let kappa = rng.uniform(0.05, 0.25);
                DeviatoricShape::from_fn(|t| 1.0 - kappa * (3.0 * t).sin(), 101).unwrap()
            }
            ShapeKind::InteriorStationary => {
                let sin_phi = rng.uniform(0.3, 0.6);
                DeviatoricShape::from_fn(
                    |t| 2.0 / 3f64.sqrt() * t.cos() - 2.0 / 3.0 * sin_phi * t.sin(),
                    151,
                )
                .unwrap()
            }
        }
    }

    pub fn make_model(rng: &mut TrialRng, kind: ShapeKind, pressure_sensitive: bool, exponential: bool) -> MaterialModel {
        let g = rng.uniform(1_000.0, 30_000.0);
        let moduli = ElasticModuli::new(
            g,
            rng.uniform(0.8, 3.0) * g,
            rng.uniform(0.03, 0.5) * g,
            rng.uniform(0.05, 0.8) * g,
            rng.uniform(0.05, 0.8) * g,
            rng.uniform(0.05, 0.8) * g,
        )
        .unwrap();
        let yield_shape = make_shape(rng, kind);
        let potential_shape = make_shape(rng, kind);
        let m = if pressure_sensitive { rng.uniform(0.3, 1.2) } else { 0.0 };
        let mh = if pressure_sensitive { rng.uniform(0.05, 1.0) * m } else { 0.0 };
        let hardening = if exponential {
            // keep the elastic term dominant over the softening slope so the
            // backward-Euler root is unique (material stability at the
            // stress-point level)
            let initial = rng.uniform(40.0, 200.0);
            let residual = rng.uniform(0.0, 0.5) * initial;
            let rate = rng.uniform(0.0, (0.2 * g / (initial - residual)).min(15.0));
            HardeningLaw::Exponential {
                initial,
                residual,
                rate,
            }
        } else {
            HardeningLaw::Linear {
                sigma0: rng.uniform(20.0, 200.0),
                h: rng.uniform(0.0, g / 20.0),
            }
        };
        MaterialModel::new(moduli, yield_shape, m, potential_shape, mh, hardening)
    }

    /// One randomized trial: committed state, increments, material.
    pub struct TrialCase {
        pub state: GeneralizedState,
        pub deps: Tensor2,
        pub domega: Tensor2,
        pub dchi: Tensor2,
        pub model: MaterialModel,
    }

    /// Builds a case whose predictor lands in the requested regime
    /// (Elastic / Radial / General; Apex means "apex handoff expected").
    /// Returns `None` when the draw missed the target; callers loop.
    pub fn targeted_case(rng: &mut TrialRng, target: Regime) -> Option<TrialCase> {
        let (kind, pressure, exponential) = match target {
            Regime::Elastic | Regime::General => (
                if rng.uniform(0.0, 1.0) < 0.5 {
                    ShapeKind::Smooth
                } else {
                    ShapeKind::InteriorStationary
                },
                rng.uniform(0.0, 1.0) < 0.7,
                rng.uniform(0.0, 1.0) < 0.4,
            ),
            Regime::Radial => (
                if rng.uniform(0.0, 1.0) < 0.6 {
                    ShapeKind::Constant
                } else {
                    ShapeKind::InteriorStationary
                },
                rng.uniform(0.0, 1.0) < 0.7,
                rng.uniform(0.0, 1.0) < 0.4,
            ),
            Regime::Apex => (ShapeKind::Constant, true, rng.uniform(0.0, 1.0) < 0.3),
        };
        let model = make_model(rng, kind, pressure, exponential);
        let g = model.moduli.shear;
        let sigma0 = model.sigma0(0.0);
        let strain_scale = sigma0 / g;

        let state = GeneralizedState::unstressed();
        let rot = rotation(rng);

        let (deps, domega, dchi) = match target {
            Regime::Apex => {
                // strong mean tension, mild deviatoric/couple parts
                let p_target = rng.uniform(3.0, 12.0) * sigma0 / model.yield_slope.max(0.3);
                let vol = Tensor2::identity() * (p_target / (3.0 * model.moduli.bulk));
                (
                    vol + rng.tensor(0.2 * strain_scale).sym(),
                    rng.tensor(0.1 * strain_scale).skw(),
                    rng.tensor(0.1 * strain_scale),
                )
            }
            Regime::Radial if kind == ShapeKind::InteriorStationary => {
                // trial Lode angle pinned at a stationary angle of the potential
                let angles = match model.stationary() {
                    Stationarity::At(a) => a.clone(),
                    Stationarity::Everywhere => vec![0.0],
                };
                let idx = (rng.next_u64() as usize) % angles.len();
                let theta = angles[idx];
                let amp = rng.uniform(1.5, 6.0) * sigma0;
                let sig = principal_from_invariants(0.0, amp, theta);
                let e = Tensor2::from_diag([
                    sig[0] / (2.0 * g),
                    sig[1] / (2.0 * g),
                    sig[2] / (2.0 * g),
                ]);
                let vol = Tensor2::identity() * rng.uniform(-2.0, 0.5) * strain_scale;
                (
                    rotate(&e, &rot) + vol,
                    rng.tensor(0.5 * strain_scale).skw(),
                    rng.tensor(0.5 * strain_scale),
                )
            }
            _ => {
                let amp = match target {
                    Regime::Elastic => rng.uniform(0.05, 0.6),
                    _ => rng.uniform(1.2, 6.0),
                } * strain_scale;
                (
                    rng.tensor(amp).sym() + Tensor2::identity() * rng.uniform(-1.0, 0.3) * strain_scale,
                    rng.tensor(0.6 * amp).skw(),
                    rng.tensor(0.6 * amp),
                )
            }
        };

        // verify the draw actually hits the target regime
        let pred = compute_predictors(&state, &deps, &domega, &dchi, &model);
        let f_star = model.yield_fn(pred.p, pred.q, pred.theta_s, 0.0);
        let hit = match target {
            Regime::Elastic => f_star <= 0.0,
            Regime::Radial => {
                f_star > 0.0 && (pred.lode_degenerate || model.is_stationary(pred.theta_s))
            }
            Regime::General => {
                f_star > 0.0 && !pred.lode_degenerate && !model.is_stationary(pred.theta_s)
            }
            // apex candidacy is confirmed by the integrator itself
            Regime::Apex => f_star > 0.0,
        };
        if !hit {
            return None;
        }
        Some(TrialCase {
            state,
            deps,
            domega,
            dchi,
            model,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{DeviatoricShape, ElasticModuli, HardeningLaw};
    use crate::returnmap::integrate;

    fn assert_close(a: &Tensor2, b: &Tensor2, rel: f64, scale: f64, what: &str) {
        for i in 0..9 {
            let d = (a.comps[i] - b.comps[i]).abs();
            assert!(
                d <= rel * scale,
                "{what} component {i}: {} vs {} (|diff| = {d}, allowed {})",
                a.comps[i],
                b.comps[i],
                rel * scale
            );
        }
    }

    #[test]
    fn oracle_matches_integrate_on_a_general_trial() {
        let moduli = ElasticModuli::new(3000.0, 4000.0, 300.0, 200.0, 160.0, 240.0).unwrap();
        let shape = DeviatoricShape::from_fn(|t| 1.0 - 0.2 * (3.0 * t).sin(), 101).unwrap();
        let model = MaterialModel::new(
            moduli,
            shape.clone(),
            0.5,
            shape,
            0.3,
            HardeningLaw::Linear {
                sigma0: 40.0,
                h: 25.0,
            },
        );
        let state = GeneralizedState::unstressed();
        let deps = Tensor2::from_diag([2e-2, 0.4e-2, -1.6e-2]).sym();
        let mut domega = Tensor2::zero();
        domega.set(0, 1, 4e-3);
        domega.set(1, 0, -4e-3);
        let mut dchi = Tensor2::zero();
        dchi.set(2, 0, 6e-3);
        dchi.set(2, 1, -3e-3);
        dchi.set(0, 0, 2e-3);

        let (stress, new_state, _) = integrate(&state, &deps, &domega, &dchi, &model, 1e-12).unwrap();
        assert_eq!(stress.regime, Regime::General);
        let oracle = integrate_oracle(&state, &deps, &domega, &dchi, &model).unwrap();
        let scale = stress.q.max(1.0);
        assert_close(&oracle.stress.sigma_sym, &stress.sigma_sym, 1e-8, scale, "sigma_sym");
        assert_close(&oracle.stress.s_skw, &stress.s_skw, 1e-8, scale, "s_skw");
        assert_close(&oracle.stress.mu, &stress.mu, 1e-8, scale, "mu");
        assert!((oracle.dlambda - (new_state.lambda - state.lambda)).abs() <= 1e-8 * oracle.dlambda);
    }
}
