//! Material parameterization: Cosserat linear elasticity, deviatoric shape
//! functions with two derivatives, meridional slopes, and hardening laws.

use crate::error::KernelError;
use crate::invariants::LODE_MAX;
use crate::spline::ClampedSpline;
use crate::tensor::Tensor2;

/// Cosserat elastic moduli. `shear`, `bulk`, `cosserat_shear` carry stress
/// units; `bending_sym`, `bending_skw`, `curvature_bulk` carry force units
/// (the paper writes them G, K, G_c, B, B_c, K_c; K_c is also called T).
/// All must be strictly positive.
#[derive(Clone, Copy, Debug)]
pub struct ElasticModuli {
    pub shear: f64,
    pub bulk: f64,
    pub cosserat_shear: f64,
    pub bending_sym: f64,
    pub bending_skw: f64,
    pub curvature_bulk: f64,
}

impl ElasticModuli {
    pub fn new(
        shear: f64,
        bulk: f64,
        cosserat_shear: f64,
        bending_sym: f64,
        bending_skw: f64,
        curvature_bulk: f64,
    ) -> Result<Self, KernelError> {
        for (name, value) in [
            ("G", shear),
            ("K", bulk),
            ("G_c", cosserat_shear),
            ("B", bending_sym),
            ("B_c", bending_skw),
            ("K_c", curvature_bulk),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(KernelError::InvalidModulus { name, value });
            }
        }
        Ok(ElasticModuli {
            shear,
            bulk,
            cosserat_shear,
            bending_sym,
            bending_skw,
            curvature_bulk,
        })
    }
}

/// Stress and couple-stress produced by the elastic law.
#[derive(Clone, Copy, Debug, Default)]
pub struct ElasticStress {
    /// Symmetric part of the stress, `σ_sym = K tr(ε^e) I + 2G e^e`.
    pub sigma_sym: Tensor2,
    /// Skew stress, `s_skw = 2 G_c ω^e`.
    pub s_skw: Tensor2,
    /// Couple stress, `μ = K_c tr(χ^e) I + 2B g^e_sym + 2B_c g^e_skw`.
    pub mu: Tensor2,
}

/// Cosserat linear elastic law applied to (symmetric strain, relative
/// rotation, curvature).
pub fn elastic_stress(
    eps_e: &Tensor2,
    omega_e: &Tensor2,
    chi_e: &Tensor2,
    moduli: &ElasticModuli,
) -> ElasticStress {
    let e_dev = eps_e.dev();
    let sigma_sym =
        Tensor2::identity() * (moduli.bulk * eps_e.trace()) + e_dev * (2.0 * moduli.shear);
    let s_skw = *omega_e * (2.0 * moduli.cosserat_shear);
    let g_sym = chi_e.sym().dev();
    let g_skw = chi_e.skw();
    let mu = Tensor2::identity() * (moduli.curvature_bulk * chi_e.trace())
        + g_sym * (2.0 * moduli.bending_sym)
        + g_skw * (2.0 * moduli.bending_skw);
    ElasticStress {
        sigma_sym,
        s_skw,
        mu,
    }
}

/// Inverts the elastic law: recovers (ε^e, ω^e, χ^e) from stress parts.
pub fn elastic_strains(
    sigma_sym: &Tensor2,
    s_skw: &Tensor2,
    mu: &Tensor2,
    moduli: &ElasticModuli,
) -> (Tensor2, Tensor2, Tensor2) {
    let p = sigma_sym.trace() / 3.0;
    let eps_e =
        sigma_sym.dev() * (1.0 / (2.0 * moduli.shear)) + Tensor2::identity() * (p / (3.0 * moduli.bulk));
    let omega_e = *s_skw * (1.0 / (2.0 * moduli.cosserat_shear));
    let chi_e = mu.sym().dev() * (1.0 / (2.0 * moduli.bending_sym))
        + mu.skw() * (1.0 / (2.0 * moduli.bending_skw))
        + Tensor2::identity() * (mu.trace() / (9.0 * moduli.curvature_bulk));
    (eps_e, omega_e, chi_e)
}

/// Where the derivative of a deviatoric shape function vanishes.
#[derive(Clone, Debug, PartialEq)]
pub enum Stationarity {
    /// Γ' ≡ 0 (circular deviatoric section: von Mises / Drucker-Prager family).
    Everywhere,
    /// Sorted angles in `[-π/6, π/6]` where Γ' = 0; always contains both ends.
    At(Vec<f64>),
}

/// Deviatoric shape function Γ(θ_s) on `[-π/6, π/6]` with two derivatives.
///
/// Two built-ins cover the toolkit standalone: a constant shape (circular
/// deviatoric section) and a clamped-spline shape for ingesting any criterion
/// numerically (zero end slopes make Γ'(±π/6) = 0 structural).
#[derive(Clone, Debug)]
pub enum DeviatoricShape {
    Constant(f64),
    Spline(ClampedSpline),
}

impl DeviatoricShape {
    pub fn constant(value: f64) -> Result<Self, KernelError> {
        if !(value > 0.0) {
            return Err(KernelError::NonPositiveShape { min: value });
        }
        Ok(DeviatoricShape::Constant(value))
    }

    /// Spline shape from uniform samples over `[-π/6, π/6]`.
    pub fn from_samples(values: Vec<f64>) -> Result<Self, KernelError> {
        if values.len() < 5 {
            return Err(KernelError::TooFewSamples {
                needed: 5,
                got: values.len(),
            });
        }
        let spline = ClampedSpline::new(-LODE_MAX, LODE_MAX, values).ok_or(
            KernelError::TooFewSamples { needed: 5, got: 0 },
        )?;
        // positivity over a dense scan
        let mut min = f64::INFINITY;
        for k in 0..=2000 {
            let th = -LODE_MAX + 2.0 * LODE_MAX * k as f64 / 2000.0;
            min = min.min(spline.value(th));
        }
        if !(min > 0.0) {
            return Err(KernelError::NonPositiveShape { min });
        }
        Ok(DeviatoricShape::Spline(spline))
    }

    /// Spline shape sampling a closure at `n` uniform angles.
    pub fn from_fn(f: impl Fn(f64) -> f64, n: usize) -> Result<Self, KernelError> {
        let values = (0..n)
            .map(|i| f(-LODE_MAX + 2.0 * LODE_MAX * i as f64 / (n - 1) as f64))
            .collect();
        DeviatoricShape::from_samples(values)
    }

    pub fn value(&self, theta: f64) -> f64 {
        match self {
            DeviatoricShape::Constant(c) => *c,
            DeviatoricShape::Spline(s) => s.value(theta),
        }
    }

    pub fn slope(&self, theta: f64) -> f64 {
        match self {
            DeviatoricShape::Constant(_) => 0.0,
            DeviatoricShape::Spline(s) => s.slope(theta),
        }
    }

    pub fn curvature(&self, theta: f64) -> f64 {
        match self {
            DeviatoricShape::Constant(_) => 0.0,
            DeviatoricShape::Spline(s) => s.curvature(theta),
        }
    }

    /// Angles where Γ' vanishes. Interior roots are bracketed on a scan grid
    /// and refined by bisection to 1e-12 rad; ±π/6 are always stationary for
    /// spline shapes (clamped end slopes).
    pub fn stationary_angles(&self) -> Stationarity {
        match self {
            DeviatoricShape::Constant(_) => Stationarity::Everywhere,
            DeviatoricShape::Spline(_) => {
                let mut roots = vec![-LODE_MAX];
                let n = 4096;
                let grid = |k: usize| -LODE_MAX + 2.0 * LODE_MAX * k as f64 / n as f64;
                let mut prev = grid(1);
                let mut fprev = self.slope(prev);
                for k in 2..n {
                    let x = grid(k);
                    let fx = self.slope(x);
                    if fprev == 0.0 {
                        roots.push(prev);
                    } else if fprev * fx < 0.0 {
                        let (mut lo, mut hi, mut flo) = (prev, x, fprev);
                        while hi - lo > 1e-12 {
                            let mid = 0.5 * (lo + hi);
                            let fm = self.slope(mid);
                            if flo * fm <= 0.0 {
                                hi = mid;
                            } else {
                                lo = mid;
                                flo = fm;
                            }
                        }
                        roots.push(0.5 * (lo + hi));
                    }
                    prev = x;
                    fprev = fx;
                }
                roots.push(LODE_MAX);
                Stationarity::At(roots)
            }
        }
    }
}

/// Regime-selection window around stationary Lode angles. Near θ = ±π/6 the
/// arcsin-based Lode angle resolves only to ~sqrt(machine eps), so the window
/// must sit above that noise floor for corner states to dispatch radially.
pub const STATIONARY_WINDOW: f64 = 1e-7;

/// Isotropic hardening/softening law σ0(λ).
#[derive(Clone, Copy, Debug)]
pub enum HardeningLaw {
    /// `σ0(λ) = σ̄0 + h λ`.
    Linear { sigma0: f64, h: f64 },
    /// `σ0(λ) = σ0_f + (σ0_i - σ0_f) exp(-a_λ λ)`.
    Exponential {
        initial: f64,
        residual: f64,
        rate: f64,
    },
}

impl HardeningLaw {
    pub fn value(&self, lambda: f64) -> f64 {
        match *self {
            HardeningLaw::Linear { sigma0, h } => sigma0 + h * lambda,
            HardeningLaw::Exponential {
                initial,
                residual,
                rate,
            } => residual + (initial - residual) * (-rate * lambda).exp(),
        }
    }

    pub fn slope(&self, lambda: f64) -> f64 {
        match *self {
            HardeningLaw::Linear { h, .. } => h,
            HardeningLaw::Exponential {
                initial,
                residual,
                rate,
            } => -rate * (initial - residual) * (-rate * lambda).exp(),
        }
    }
}

/// Full material model: elasticity, yield function `f = q Γ(θ_s) + M p - σ0(λ)`
/// and plastic potential `g = q Γ̂(θ_s) + M̂ p` (associated flow when the shape
/// handles and slopes coincide), plus the hardening law.
#[derive(Clone, Debug)]
pub struct MaterialModel {
    pub moduli: ElasticModuli,
    pub yield_shape: DeviatoricShape,
    pub yield_slope: f64,
    pub potential_shape: DeviatoricShape,
    pub potential_slope: f64,
    pub hardening: HardeningLaw,
    /// Stationary angles of the potential shape, precomputed at construction.
    stationary: Stationarity,
}

impl MaterialModel {
    pub fn new(
        moduli: ElasticModuli,
        yield_shape: DeviatoricShape,
        yield_slope: f64,
        potential_shape: DeviatoricShape,
        potential_slope: f64,
        hardening: HardeningLaw,
    ) -> Self {
        let stationary = potential_shape.stationary_angles();
        MaterialModel {
            moduli,
            yield_shape,
            yield_slope,
            potential_shape,
            potential_slope,
            hardening,
            stationary,
        }
    }

    /// Associated-flow model (potential ≡ yield).
    pub fn associated(
        moduli: ElasticModuli,
        shape: DeviatoricShape,
        slope: f64,
        hardening: HardeningLaw,
    ) -> Self {
        MaterialModel::new(moduli, shape.clone(), slope, shape, slope, hardening)
    }

    pub fn sigma0(&self, lambda: f64) -> f64 {
        self.hardening.value(lambda)
    }

    pub fn dsigma0_dlambda(&self, lambda: f64) -> f64 {
        self.hardening.slope(lambda)
    }

    /// Yield function value.
    pub fn yield_fn(&self, p: f64, q: f64, theta_s: f64, lambda: f64) -> f64 {
        q * self.yield_shape.value(theta_s) + self.yield_slope * p - self.sigma0(lambda)
    }

    pub fn stationary(&self) -> &Stationarity {
        &self.stationary
    }

    /// True when the potential's Lode derivative vanishes at `theta` within
    /// the regime-selection window.
    pub fn is_stationary(&self, theta: f64) -> bool {
        match &self.stationary {
            Stationarity::Everywhere => true,
            Stationarity::At(angles) => angles
                .iter()
                .any(|&a| (a - theta).abs() <= STATIONARY_WINDOW),
        }
    }

    /// Stationary angles bracketing `theta`: the largest stationary angle
    /// strictly below and the smallest strictly above.
    pub fn stationary_bracket(&self, theta: f64) -> (f64, f64) {
        match &self.stationary {
            Stationarity::Everywhere => (-LODE_MAX, LODE_MAX),
            Stationarity::At(angles) => {
                let mut lo = -LODE_MAX;
                let mut hi = LODE_MAX;
                for &a in angles {
                    if a < theta - STATIONARY_WINDOW && a > lo {
                        lo = a;
                    }
                    if a > theta + STATIONARY_WINDOW && a < hi {
                        hi = a;
                    }
                }
                (lo, hi)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::invariants_sym;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn moduli() -> ElasticModuli {
        ElasticModuli::new(55_000.0, 33_333.0, 5_000.0, 5_000.0, 5_000.0, 5_000.0).unwrap()
    }

    #[test]
    fn moduli_constructor_rejects_nonpositive() {
        assert!(ElasticModuli::new(1.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ElasticModuli::new(1.0, 1.0, -2.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn elastic_stress_pure_volumetric() {
        let m = moduli();
        let v = 3e-3;
        let eps = Tensor2::identity() * (v / 3.0);
        let out = elastic_stress(&eps, &Tensor2::zero(), &Tensor2::zero(), &m);
        assert!((out.sigma_sym - Tensor2::identity() * (m.bulk * v)).norm() <= 1e-12 * m.bulk * v);
        assert!(out.mu.norm() == 0.0 && out.s_skw.norm() == 0.0);
    }

    #[test]
    fn elastic_stress_pure_relative_rotation() {
        let m = moduli();
        let w = 1e-3;
        let mut omega = Tensor2::zero();
        omega.set(0, 1, w);
        omega.set(1, 0, -w);
        let out = elastic_stress(&Tensor2::zero(), &omega, &Tensor2::zero(), &m);
        assert!((out.s_skw.get(0, 1) - 2.0 * m.cosserat_shear * w).abs() <= 1e-15 * m.cosserat_shear);
        assert!((out.s_skw.get(1, 0) + 2.0 * m.cosserat_shear * w).abs() <= 1e-15 * m.cosserat_shear);
    }

    #[test]
    fn deviatoric_strain_gives_q_eq_3g_epsqs() {
        let m = moduli();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let mut raw = Tensor2::zero();
            for c in raw.comps.iter_mut() {
                *c = rng.random_range(-1e-3..1e-3);
            }
            let e = raw.sym().dev();
            let out = elastic_stress(&e, &Tensor2::zero(), &Tensor2::zero(), &m);
            let q = invariants_sym(&out.sigma_sym.dev()).q_s;
            let eps_qs = (2.0 / 3.0 * e.ddot(&e)).sqrt();
            assert!((q - 3.0 * m.shear * eps_qs).abs() <= 1e-9 * q.max(1.0));
        }
    }

    #[test]
    fn elastic_stress_is_linear() {
        let m = moduli();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let mut rand_t = |s: f64| {
            let mut t = Tensor2::zero();
            for c in t.comps.iter_mut() {
                *c = rng.random_range(-s..s);
            }
            t
        };
        let (e1, w1, c1) = (rand_t(1e-3).sym(), rand_t(1e-3).skw(), rand_t(1e-3));
        let (e2, w2, c2) = (rand_t(1e-3).sym(), rand_t(1e-3).skw(), rand_t(1e-3));
        let (a, b) = (2.5, -0.7);
        let lhs = elastic_stress(
            &(e1 * a + e2 * b),
            &(w1 * a + w2 * b),
            &(c1 * a + c2 * b),
            &m,
        );
        let r1 = elastic_stress(&e1, &w1, &c1, &m);
        let r2 = elastic_stress(&e2, &w2, &c2, &m);
        assert!((lhs.sigma_sym - (r1.sigma_sym * a + r2.sigma_sym * b)).norm() <= 1e-9);
        assert!((lhs.s_skw - (r1.s_skw * a + r2.s_skw * b)).norm() <= 1e-9);
        assert!((lhs.mu - (r1.mu * a + r2.mu * b)).norm() <= 1e-9);
    }

    #[test]
    fn elastic_strains_inverts_elastic_stress() {
        let m = moduli();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..20 {
            let mut raw = Tensor2::zero();
            for c in raw.comps.iter_mut() {
                *c = rng.random_range(-1e-3..1e-3);
            }
            let eps = raw.sym();
            let omega = {
                let mut t = Tensor2::zero();
                for c in t.comps.iter_mut() {
                    *c = rng.random_range(-1e-3..1e-3);
                }
                t.skw()
            };
            let chi = {
                let mut t = Tensor2::zero();
                for c in t.comps.iter_mut() {
                    *c = rng.random_range(-1e-3..1e-3);
                }
                t
            };
            let st = elastic_stress(&eps, &omega, &chi, &m);
            let (e2, w2, c2) = elastic_strains(&st.sigma_sym, &st.s_skw, &st.mu, &m);
            assert!((e2 - eps).norm() <= 1e-12 * eps.norm().max(1e-12));
            assert!((w2 - omega).norm() <= 1e-12 * omega.norm().max(1e-12));
            assert!((c2 - chi).norm() <= 1e-12 * chi.norm().max(1e-12));
        }
    }

    #[test]
    fn hardening_laws() {
        let lin = HardeningLaw::Linear {
            sigma0: 100.0,
            h: 0.0,
        };
        assert_eq!(lin.value(0.3), 100.0);

        let perf = HardeningLaw::Exponential {
            initial: 980.0,
            residual: 0.0,
            rate: 0.0,
        };
        assert_eq!(perf.value(0.0), 980.0);
        assert_eq!(perf.value(7.0), 980.0);

        let soft = HardeningLaw::Exponential {
            initial: 980.0,
            residual: 0.0,
            rate: 10.0,
        };
        assert!(soft.value(100.0).abs() < 1e-300);
        // slope matches FD
        let h = 1e-6;
        for lam in [0.0, 0.05, 0.3] {
            let fd = (soft.value(lam + h) - soft.value(lam - h)) / (2.0 * h);
            assert!((fd - soft.slope(lam)).abs() <= 1e-5 * soft.slope(lam).abs().max(1.0));
        }
    }

    #[test]
    fn shape_derivatives_match_fd() {
        let shape = DeviatoricShape::from_fn(|t| 1.0 - 0.15 * (3.0 * t).sin(), 41).unwrap();
        let h = 1e-6;
        for k in 1..30 {
            let th = -LODE_MAX + 2.0 * LODE_MAX * k as f64 / 30.0;
            if LODE_MAX - th.abs() < 2.0 * h {
                continue;
            }
            let fd1 = (shape.value(th + h) - shape.value(th - h)) / (2.0 * h);
            assert!((fd1 - shape.slope(th)).abs() <= 1e-6 * shape.slope(th).abs().max(1.0));
            let fd2 = (shape.slope(th + h) - shape.slope(th - h)) / (2.0 * h);
            assert!((fd2 - shape.curvature(th)).abs() <= 1e-6 * shape.curvature(th).abs().max(1.0));
        }
    }

    #[test]
    fn stationary_angles_constant_shape() {
        let shape = DeviatoricShape::constant(1.0).unwrap();
        assert_eq!(shape.stationary_angles(), Stationarity::Everywhere);
    }

    #[test]
    fn stationary_angles_mohr_coulomb_like() {
        // smooth MC-type shape: interior stationary angle at tan(theta) = -sin(phi)/sqrt(3)
        let phi: f64 = 30f64.to_radians();
        let shape = DeviatoricShape::from_fn(
            |t| 2.0 / 3f64.sqrt() * t.cos() - 2.0 / 3.0 * phi.sin() * t.sin(),
            201,
        )
        .unwrap();
        let expected_mid = (-phi.sin() / 3f64.sqrt()).atan();
        match shape.stationary_angles() {
            Stationarity::At(angles) => {
                assert_eq!(angles.len(), 3, "angles: {angles:?}");
                assert!((angles[0] + LODE_MAX).abs() <= 1e-12);
                assert!((angles[2] - LODE_MAX).abs() <= 1e-12);
                assert!(
                    (angles[1] - expected_mid).abs() <= 1e-4,
                    "mid {} vs {}",
                    angles[1],
                    expected_mid
                );
            }
            _ => panic!("expected discrete stationary angles"),
        }
    }

    #[test]
    fn stationary_angles_matsuoka_nakai_like() {
        // no interior stationary point
        let shape = DeviatoricShape::from_fn(|t| 1.0 - 0.15 * (3.0 * t).sin(), 101).unwrap();
        match shape.stationary_angles() {
            Stationarity::At(angles) => {
                assert_eq!(angles.len(), 2);
            }
            _ => panic!("expected discrete stationary angles"),
        }
    }

    #[test]
    fn stationary_angles_match_dense_scan_oracle() {
        let phi: f64 = 25f64.to_radians();
        let shape = DeviatoricShape::from_fn(
            |t| 2.0 / 3f64.sqrt() * t.cos() - 2.0 / 3.0 * phi.sin() * t.sin(),
            201,
        )
        .unwrap();
        // oracle: 10^4-point scan + bisection refinement
        let n = 10_000;
        let mut oracle = vec![-LODE_MAX];
        let mut prev = -LODE_MAX + 2.0 * LODE_MAX / n as f64;
        let mut fprev = shape.slope(prev);
        for k in 2..n {
            let x = -LODE_MAX + 2.0 * LODE_MAX * k as f64 / n as f64;
            let fx = shape.slope(x);
            if fprev * fx < 0.0 {
                let (mut lo, mut hi, mut flo) = (prev, x, fprev);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let fm = shape.slope(mid);
                    if flo * fm <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                oracle.push(0.5 * (lo + hi));
            }
            prev = x;
            fprev = fx;
        }
        oracle.push(LODE_MAX);
        match shape.stationary_angles() {
            Stationarity::At(angles) => {
                assert_eq!(angles.len(), oracle.len());
                for (a, o) in angles.iter().zip(&oracle) {
                    assert!((a - o).abs() <= 1e-10, "{a} vs {o}");
                }
            }
            _ => panic!("expected discrete angles"),
        }
    }
}
