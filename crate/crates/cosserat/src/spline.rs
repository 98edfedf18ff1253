//! Clamped C² cubic spline on a uniform grid, used to ingest deviatoric
//! shape functions numerically. End slopes are pinned to zero so that the
//! interpolated shape always satisfies Γ'(±π/6) = 0.

/// Cubic spline over `[a, b]` with uniform knots, zero first derivative at
/// both ends, interpolating the given samples.
#[derive(Clone, Debug)]
pub struct ClampedSpline {
    a: f64,
    h: f64,
    values: Vec<f64>,
    /// Second derivatives at the knots (spline moments).
    moments: Vec<f64>,
}

impl ClampedSpline {
    /// Builds the spline. Needs at least 3 samples.
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Option<Self> {
        let n = values.len();
        if n < 3 || !(b > a) {
            return None;
        }
        let h = (b - a) / (n - 1) as f64;

        // Tridiagonal system for the moments M_i = S''(x_i) with clamped
        // (zero-slope) boundary rows:
        //   2 M_0 + M_1                 = 6 ((y1 - y0)/h - 0) / h
        //   M_{i-1} + 4 M_i + M_{i+1}   = 6 (y_{i-1} - 2 y_i + y_{i+1}) / h²
        //   M_{n-2} + 2 M_{n-1}         = 6 (0 - (y_{n-1} - y_{n-2})/h) / h
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut lower = vec![0.0; n];

        diag[0] = 2.0;
        upper[0] = 1.0;
        rhs[0] = 6.0 * ((values[1] - values[0]) / h) / h;
        for i in 1..n - 1 {
            lower[i] = 1.0;
            diag[i] = 4.0;
            upper[i] = 1.0;
            rhs[i] = 6.0 * (values[i - 1] - 2.0 * values[i] + values[i + 1]) / (h * h);
        }
        lower[n - 1] = 1.0;
        diag[n - 1] = 2.0;
        rhs[n - 1] = -6.0 * ((values[n - 1] - values[n - 2]) / h) / h;

        // Thomas algorithm
        for i in 1..n {
            let w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut moments = vec![0.0; n];
        moments[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            moments[i] = (rhs[i] - upper[i] * moments[i + 1]) / diag[i];
        }

        Some(ClampedSpline {
            a,
            h,
            values,
            moments,
        })
    }

    fn locate(&self, x: f64) -> (usize, f64, f64) {
        let n = self.values.len();
        let t = ((x - self.a) / self.h).floor();
        let i = (t as isize).clamp(0, n as isize - 2) as usize;
        let x0 = self.a + i as f64 * self.h;
        (i, x - x0, self.h - (x - x0))
    }

    pub fn value(&self, x: f64) -> f64 {
        let (i, dl, dr) = self.locate(x);
        let h = self.h;
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        m0 * dr * dr * dr / (6.0 * h)
            + m1 * dl * dl * dl / (6.0 * h)
            + (y0 / h - m0 * h / 6.0) * dr
            + (y1 / h - m1 * h / 6.0) * dl
    }

    pub fn slope(&self, x: f64) -> f64 {
        let (i, dl, dr) = self.locate(x);
        let h = self.h;
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        -m0 * dr * dr / (2.0 * h) + m1 * dl * dl / (2.0 * h) - (y0 / h - m0 * h / 6.0)
            + (y1 / h - m1 * h / 6.0)
    }

    pub fn curvature(&self, x: f64) -> f64 {
        let (i, dl, dr) = self.locate(x);
        (self.moments[i] * dr + self.moments[i + 1] * dl) / self.h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_samples_and_clamps_slopes() {
        let n = 21;
        let (a, b) = (-0.5, 0.5);
        let f = |x: f64| 1.0 + 0.2 * (3.0 * x).cos();
        let values: Vec<f64> = (0..n)
            .map(|i| f(a + (b - a) * i as f64 / (n - 1) as f64))
            .collect();
        let sp = ClampedSpline::new(a, b, values.clone()).unwrap();
        for (i, v) in values.iter().enumerate() {
            let x = a + (b - a) * i as f64 / (n - 1) as f64;
            assert!((sp.value(x) - v).abs() <= 1e-12);
        }
        assert!(sp.slope(a).abs() <= 1e-12);
        assert!(sp.slope(b).abs() <= 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let n = 33;
        let (a, b) = (-0.6, 0.6);
        let f = |x: f64| (1.5 * x).sin() + 2.0;
        let values: Vec<f64> = (0..n)
            .map(|i| f(a + (b - a) * i as f64 / (n - 1) as f64))
            .collect();
        let sp = ClampedSpline::new(a, b, values).unwrap();
        let h = 1e-6;
        for k in 1..40 {
            let x = a + (b - a) * k as f64 / 40.0;
            if (x - a).abs() < 2.0 * h || (b - x).abs() < 2.0 * h {
                continue;
            }
            let fd1 = (sp.value(x + h) - sp.value(x - h)) / (2.0 * h);
            assert!((fd1 - sp.slope(x)).abs() <= 1e-6 * sp.slope(x).abs().max(1.0));
            let fd2 = (sp.slope(x + h) - sp.slope(x - h)) / (2.0 * h);
            assert!((fd2 - sp.curvature(x)).abs() <= 1e-5 * sp.curvature(x).abs().max(1.0));
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(ClampedSpline::new(0.0, 1.0, vec![1.0, 2.0]).is_none());
    }
}
