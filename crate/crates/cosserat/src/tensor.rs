//! Second-order tensors in 3D with a fixed full (non-symmetric) component layout.
//!
//! All tensors are stored with nine components in the ordering
//!
//! ```text
//! index:     0   1   2   3   4   5   6   7   8
//! component: xx  yy  zz  xy  yx  yz  zy  zx  xz
//! ```
//!
//! This ordering is shared by the fourth-order operators in [`crate::tensor4`]
//! and by the plane-strain finite-element vectorization, whose 5-component
//! strain/stress vectors are exactly `comps[0..5]` and whose 2-component
//! curvature/couple vectors are components `zx` and `zy`.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

/// Row index of each component slot.
pub const ROW: [usize; 9] = [0, 1, 2, 0, 1, 1, 2, 2, 0];
/// Column index of each component slot.
pub const COL: [usize; 9] = [0, 1, 2, 1, 0, 2, 1, 0, 2];

/// Slot of component (i, j) in the fixed ordering.
pub const SLOT: [[usize; 3]; 3] = [
    [0, 3, 8], // xx xy xz
    [4, 1, 5], // yx yy yz
    [7, 6, 2], // zx zy zz
];

/// Component labels in storage order.
pub const COMPONENT_LABELS: [&str; 9] = ["xx", "yy", "zz", "xy", "yx", "yz", "zy", "zx", "xz"];

pub const XX: usize = 0;
pub const YY: usize = 1;
pub const ZZ: usize = 2;
pub const XY: usize = 3;
pub const YX: usize = 4;
pub const YZ: usize = 5;
pub const ZY: usize = 6;
pub const ZX: usize = 7;
pub const XZ: usize = 8;

/// Second-order tensor with full (possibly non-symmetric) storage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tensor2 {
    /// Components in the fixed `(xx, yy, zz, xy, yx, yz, zy, zx, xz)` ordering.
    pub comps: [f64; 9],
}

impl Tensor2 {
    pub const fn zero() -> Self {
        Tensor2 { comps: [0.0; 9] }
    }

    pub const fn identity() -> Self {
        let mut comps = [0.0; 9];
        comps[XX] = 1.0;
        comps[YY] = 1.0;
        comps[ZZ] = 1.0;
        Tensor2 { comps }
    }

    pub const fn from_components(comps: [f64; 9]) -> Self {
        Tensor2 { comps }
    }

    pub fn from_matrix(m: [[f64; 3]; 3]) -> Self {
        let mut t = Tensor2::zero();
        for s in 0..9 {
            t.comps[s] = m[ROW[s]][COL[s]];
        }
        t
    }

    pub fn from_diag(d: [f64; 3]) -> Self {
        let mut t = Tensor2::zero();
        t.comps[XX] = d[0];
        t.comps[YY] = d[1];
        t.comps[ZZ] = d[2];
        t
    }

    /// Dyadic product `a ⊗ b` of two vectors.
    pub fn dyad(a: [f64; 3], b: [f64; 3]) -> Self {
        let mut t = Tensor2::zero();
        for s in 0..9 {
            t.comps[s] = a[ROW[s]] * b[COL[s]];
        }
        t
    }

    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for s in 0..9 {
            m[ROW[s]][COL[s]] = self.comps[s];
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.comps[SLOT[i][j]]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.comps[SLOT[i][j]] = v;
    }

    pub fn transpose(&self) -> Self {
        let m = self.to_matrix();
        Tensor2::from_matrix([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    /// Symmetric part `(T + Tᵀ)/2`.
    pub fn sym(&self) -> Self {
        let mut t = *self;
        for &(a, b) in &[(XY, YX), (YZ, ZY), (ZX, XZ)] {
            let avg = 0.5 * (self.comps[a] + self.comps[b]);
            t.comps[a] = avg;
            t.comps[b] = avg;
        }
        t
    }

    /// Skew-symmetric part `(T - Tᵀ)/2`.
    pub fn skw(&self) -> Self {
        let mut t = Tensor2::zero();
        for &(a, b) in &[(XY, YX), (YZ, ZY), (ZX, XZ)] {
            let half = 0.5 * (self.comps[a] - self.comps[b]);
            t.comps[a] = half;
            t.comps[b] = -half;
        }
        t
    }

    pub fn trace(&self) -> f64 {
        self.comps[XX] + self.comps[YY] + self.comps[ZZ]
    }

    /// Deviatoric part `T - tr(T)/3 I`.
    pub fn dev(&self) -> Self {
        let m = self.trace() / 3.0;
        let mut t = *self;
        t.comps[XX] -= m;
        t.comps[YY] -= m;
        t.comps[ZZ] -= m;
        t
    }

    /// Spherical part `tr(T)/3 I`.
    pub fn sph(&self) -> Self {
        let m = self.trace() / 3.0;
        Tensor2::from_diag([m, m, m])
    }

    /// Full contraction `A : B = A_ij B_ij`.
    pub fn ddot(&self, other: &Tensor2) -> f64 {
        let mut s = 0.0;
        for i in 0..9 {
            s += self.comps[i] * other.comps[i];
        }
        s
    }

    /// Frobenius norm `sqrt(T : T)`.
    pub fn norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    pub fn det(&self) -> f64 {
        let m = self.to_matrix();
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Cofactor tensor, `cof(T)_ij = ∂det(T)/∂T_ij`.
    pub fn cofactor(&self) -> Self {
        let m = self.to_matrix();
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                c[i][j] = m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1];
            }
        }
        Tensor2::from_matrix(c)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.comps[XY] - self.comps[YX]).abs() <= tol
            && (self.comps[YZ] - self.comps[ZY]).abs() <= tol
            && (self.comps[ZX] - self.comps[XZ]).abs() <= tol
    }

    pub fn is_skew(&self, tol: f64) -> bool {
        self.comps[XX].abs() <= tol
            && self.comps[YY].abs() <= tol
            && self.comps[ZZ].abs() <= tol
            && (self.comps[XY] + self.comps[YX]).abs() <= tol
            && (self.comps[YZ] + self.comps[ZY]).abs() <= tol
            && (self.comps[ZX] + self.comps[XZ]).abs() <= tol
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut t = *self;
        for c in t.comps.iter_mut() {
            *c *= a;
        }
        t
    }
}

impl Index<usize> for Tensor2 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.comps[i]
    }
}

impl IndexMut<usize> for Tensor2 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.comps[i]
    }
}

impl Add for Tensor2 {
    type Output = Tensor2;
    fn add(self, rhs: Tensor2) -> Tensor2 {
        let mut t = self;
        t += rhs;
        t
    }
}

impl AddAssign for Tensor2 {
    fn add_assign(&mut self, rhs: Tensor2) {
        for i in 0..9 {
            self.comps[i] += rhs.comps[i];
        }
    }
}

impl Sub for Tensor2 {
    type Output = Tensor2;
    fn sub(self, rhs: Tensor2) -> Tensor2 {
        let mut t = self;
        t -= rhs;
        t
    }
}

impl SubAssign for Tensor2 {
    fn sub_assign(&mut self, rhs: Tensor2) {
        for i in 0..9 {
            self.comps[i] -= rhs.comps[i];
        }
    }
}

impl Mul<f64> for Tensor2 {
    type Output = Tensor2;
    fn mul(self, a: f64) -> Tensor2 {
        self.scale(a)
    }
}

impl Neg for Tensor2 {
    type Output = Tensor2;
    fn neg(self) -> Tensor2 {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(rng: &mut impl Rng) -> Tensor2 {
        let mut t = Tensor2::zero();
        for c in t.comps.iter_mut() {
            *c = rng.random_range(-1.0..1.0);
        }
        t
    }

    #[test]
    fn slot_tables_are_consistent() {
        for s in 0..9 {
            assert_eq!(SLOT[ROW[s]][COL[s]], s);
        }
    }

    #[test]
    fn sym_skw_recompose_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let t = random_tensor(&mut rng);
            let r = t.sym() + t.skw();
            for i in 0..9 {
                assert!((r.comps[i] - t.comps[i]).abs() <= 1e-15 * t.norm().max(1.0));
            }
            assert!(t.sym().is_symmetric(0.0));
            assert!(t.skw().is_skew(1e-18));
        }
    }

    #[test]
    fn dev_sph_split_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let t = random_tensor(&mut rng);
            let r = t.dev() + t.sph();
            for i in 0..9 {
                assert!((r.comps[i] - t.comps[i]).abs() <= 1e-14 * t.norm().max(1.0));
            }
            assert!(t.dev().trace().abs() <= 1e-14 * t.norm().max(1.0));
        }
    }

    #[test]
    fn ddot_counts_all_components() {
        let a = Tensor2::from_matrix([[1.0, 2.0, 0.0], [3.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        // a : a = 1 + 4 + 9
        assert_eq!(a.ddot(&a), 14.0);
    }

    #[test]
    fn det_and_cofactor_match_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let t = random_tensor(&mut rng);
            let c = t.cofactor();
            let h = 1e-6;
            for s in 0..9 {
                let mut tp = t;
                tp.comps[s] += h;
                let mut tm = t;
                tm.comps[s] -= h;
                let fd = (tp.det() - tm.det()) / (2.0 * h);
                assert!((fd - c.comps[s]).abs() <= 1e-8, "slot {s}: {fd} vs {}", c.comps[s]);
            }
        }
    }

    #[test]
    fn transpose_and_dyad() {
        let a = Tensor2::dyad([1.0, 2.0, 3.0], [4.0, 5.0, 6.0]);
        assert_eq!(a.get(0, 1), 5.0);
        assert_eq!(a.transpose().get(1, 0), 5.0);
        assert_eq!(a.trace(), 4.0 + 10.0 + 18.0);
    }
}
