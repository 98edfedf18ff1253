//! Fourth-order tensors as 9x9 operators on the fixed component ordering,
//! plus the constant projectors used by the consistent tangent operators.

use crate::tensor::{Tensor2, COL, ROW, SLOT};
use std::ops::{Add, AddAssign, Mul, Sub};

/// Fourth-order tensor stored dense: `mat[a][b] = D_{(ij)(kl)}` with `a = (ij)`,
/// `b = (kl)` in the fixed component ordering. Acts on second-order tensors by
/// `(D : X)_a = Σ_b mat[a][b] X_b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor4 {
    pub mat: [[f64; 9]; 9],
}

impl Default for Tensor4 {
    fn default() -> Self {
        Tensor4::zero()
    }
}

impl Tensor4 {
    pub const fn zero() -> Self {
        Tensor4 { mat: [[0.0; 9]; 9] }
    }

    /// Fourth-order identity `I_ijkl = δ_ik δ_jl` (maps any tensor to itself).
    pub fn identity() -> Self {
        let mut t = Tensor4::zero();
        for a in 0..9 {
            t.mat[a][a] = 1.0;
        }
        t
    }

    /// Symmetrizer `(δ_ik δ_jl + δ_il δ_jk)/2` (maps T to sym T).
    pub fn sym_projector() -> Self {
        let mut t = Tensor4::zero();
        for a in 0..9 {
            let (i, j) = (ROW[a], COL[a]);
            t.mat[a][SLOT[i][j]] += 0.5;
            t.mat[a][SLOT[j][i]] += 0.5;
        }
        t
    }

    /// Skew-symmetrizer `(δ_ik δ_jl - δ_il δ_jk)/2` (maps T to skw T).
    pub fn skw_projector() -> Self {
        let mut t = Tensor4::zero();
        for a in 0..9 {
            let (i, j) = (ROW[a], COL[a]);
            t.mat[a][SLOT[i][j]] += 0.5;
            t.mat[a][SLOT[j][i]] -= 0.5;
        }
        t
    }

    /// Spherical operator `I ⊗ I` (maps T to tr(T) I).
    pub fn sph_operator() -> Self {
        Tensor4::dyad(&Tensor2::identity(), &Tensor2::identity())
    }

    /// Deviatoric-symmetric projector `I_sym - (1/3) I ⊗ I` (maps T to dev sym T).
    pub fn dev_sym_projector() -> Self {
        Tensor4::sym_projector() - Tensor4::sph_operator() * (1.0 / 3.0)
    }

    /// Dyadic product `A ⊗ B`, `(A ⊗ B) : X = A (B : X)`.
    pub fn dyad(a: &Tensor2, b: &Tensor2) -> Self {
        let mut t = Tensor4::zero();
        for p in 0..9 {
            for q in 0..9 {
                t.mat[p][q] = a.comps[p] * b.comps[q];
            }
        }
        t
    }

    /// Contraction with a second-order tensor.
    pub fn ddot_t2(&self, x: &Tensor2) -> Tensor2 {
        let mut out = Tensor2::zero();
        for a in 0..9 {
            let mut s = 0.0;
            for b in 0..9 {
                s += self.mat[a][b] * x.comps[b];
            }
            out.comps[a] = s;
        }
        out
    }

    /// Right composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Tensor4) -> Self {
        let mut t = Tensor4::zero();
        for a in 0..9 {
            for b in 0..9 {
                let mut s = 0.0;
                for c in 0..9 {
                    s += self.mat[a][c] * other.mat[c][b];
                }
                t.mat[a][b] = s;
            }
        }
        t
    }

    /// Major transpose, `mat[b][a]`.
    pub fn major_transpose(&self) -> Self {
        let mut t = Tensor4::zero();
        for a in 0..9 {
            for b in 0..9 {
                t.mat[a][b] = self.mat[b][a];
            }
        }
        t
    }

    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for row in &self.mat {
            for v in row {
                s += v * v;
            }
        }
        s.sqrt()
    }

    /// Max absolute entry difference against another operator.
    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..9 {
            for b in 0..9 {
                m = m.max((self.mat[a][b] - other.mat[a][b]).abs());
            }
        }
        m
    }
}

impl Add for Tensor4 {
    type Output = Tensor4;
    fn add(self, rhs: Tensor4) -> Tensor4 {
        let mut t = self;
        t += rhs;
        t
    }
}

impl AddAssign for Tensor4 {
    fn add_assign(&mut self, rhs: Tensor4) {
        for a in 0..9 {
            for b in 0..9 {
                self.mat[a][b] += rhs.mat[a][b];
            }
        }
    }
}

impl Sub for Tensor4 {
    type Output = Tensor4;
    fn sub(self, rhs: Tensor4) -> Tensor4 {
        let mut t = self;
        for a in 0..9 {
            for b in 0..9 {
                t.mat[a][b] -= rhs.mat[a][b];
            }
        }
        t
    }
}

impl Mul<f64> for Tensor4 {
    type Output = Tensor4;
    fn mul(self, s: f64) -> Tensor4 {
        let mut t = self;
        for a in 0..9 {
            for b in 0..9 {
                t.mat[a][b] *= s;
            }
        }
        t
    }
}
