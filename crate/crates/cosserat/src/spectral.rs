//! Spectral decomposition of symmetric tensors: ordered principal values,
//! eigenprojector bases and their strain derivatives (spins).

use crate::error::KernelError;
use crate::tensor::Tensor2;
use crate::tensor4::Tensor4;

/// Spectral data of a symmetric second-order tensor with distinct eigenvalues.
///
/// `values` are ordered descending. `bases[i] = n_i ⊗ n_i` are the
/// eigenprojectors, which also equal the derivative of the i-th ordered
/// eigenvalue with respect to the tensor. `spins[i]` is the fourth-order
/// derivative of `bases[i]` with respect to the tensor, evaluated with the
/// closed form valid for distinct eigenvalues:
///
/// ```text
/// Ω_i = Σ_{j≠i}  E_ij ⊗ E_ij / (2 (λ_i - λ_j)),   E_ij = n_i ⊗ n_j + n_j ⊗ n_i
/// ```
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: [f64; 3],
    pub vectors: [[f64; 3]; 3],
    pub bases: [Tensor2; 3],
    pub spins: [Tensor4; 3],
}

/// Cyclic Jacobi eigendecomposition of a symmetric 3x3 matrix.
/// Returns (eigenvalues, eigenvectors as columns), unordered.
pub(crate) fn jacobi_sym3(m: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut a = m;
    let mut v = [[0.0; 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..50 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off <= f64::MIN_POSITIVE {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q].abs() <= 1e-300 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let tau = s / (1.0 + c);
            let apq = a[p][q];
            a[p][p] -= t * apq;
            a[q][q] += t * apq;
            a[p][q] = 0.0;
            a[q][p] = 0.0;
            for r in 0..3 {
                if r != p && r != q {
                    let arp = a[r][p];
                    let arq = a[r][q];
                    a[r][p] = arp - s * (arq + tau * arp);
                    a[p][r] = a[r][p];
                    a[r][q] = arq + s * (arp - tau * arq);
                    a[q][r] = a[r][q];
                }
            }
            for r in 0..3 {
                let vrp = v[r][p];
                let vrq = v[r][q];
                v[r][p] = vrp - s * (vrq + tau * vrp);
                v[r][q] = vrq + s * (vrp - tau * vrq);
            }
        }
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if off <= 1e-32 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Eigenvalues of a symmetric tensor, ordered descending. No distinctness
/// requirement; used where only principal values are needed.
pub fn principal_values(t: &Tensor2) -> [f64; 3] {
    let (mut vals, _) = jacobi_sym3(t.to_matrix());
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals
}

/// Full eigensystem of a symmetric tensor with distinct eigenvalues
/// (values ordered descending, bases, and Miehe spins).
///
/// Fails with [`KernelError::DegenerateSpectrum`] when the smallest eigenvalue
/// gap is below `1e-10 * ||t||`; callers in the general return regime
/// guarantee distinctness.
pub fn eigensystem(t: &Tensor2) -> Result<EigenSystem, KernelError> {
    let (vals, vecs) = jacobi_sym3(t.to_matrix());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());

    let values = [vals[order[0]], vals[order[1]], vals[order[2]]];
    let mut vectors = [[0.0; 3]; 3];
    for (i, &o) in order.iter().enumerate() {
        for r in 0..3 {
            vectors[i][r] = vecs[r][o];
        }
    }

    let scale = t.norm().max(f64::MIN_POSITIVE);
    let gap = (values[0] - values[1]).min(values[1] - values[2]);
    if gap < 1e-10 * scale {
        return Err(KernelError::DegenerateSpectrum { gap, scale });
    }

    let bases = [
        Tensor2::dyad(vectors[0], vectors[0]),
        Tensor2::dyad(vectors[1], vectors[1]),
        Tensor2::dyad(vectors[2], vectors[2]),
    ];

    let mut spins = [Tensor4::zero(), Tensor4::zero(), Tensor4::zero()];
    for i in 0..3 {
        for j in 0..3 {
            if j == i {
                continue;
            }
            let eij = Tensor2::dyad(vectors[i], vectors[j]) + Tensor2::dyad(vectors[j], vectors[i]);
            spins[i] += Tensor4::dyad(&eij, &eij) * (0.5 / (values[i] - values[j]));
        }
    }

    Ok(EigenSystem {
        values,
        vectors,
        bases,
        spins,
    })
}
