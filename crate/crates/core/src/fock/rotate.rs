//! Re-expansion of a CI vector in a rotated orbital basis.
//!
//! With new orbitals `φ'_k = Σ_j U_jk φ_j`, the amplitudes transform as
//! `c'_J = Σ_I det(U[I, J]) c_I`, i.e. by the N-th exterior power of `Uᵀ`.
//! `Uᵀ` is factored into rotations of neighbouring orbitals and a diagonal
//! sign matrix; a neighbour rotation needs no fermionic phase because no
//! occupied orbital lies between the two modes it mixes.

use nalgebra::DMatrix;

use super::{CIVector, FockBasis};
use crate::error::{Error, Result};

struct Givens {
    p: usize,
    c: f64,
    s: f64,
}

/// Returns rotations `G_1..G_m` and signs `D` with `G_m ⋯ G_1 M = D`.
fn factor(m: &DMatrix<f64>) -> (Vec<Givens>, Vec<f64>) {
    let d = m.nrows();
    let mut a = m.clone();
    let mut rots = Vec::new();
    for j in 0..d {
        for i in (j + 1..d).rev() {
            let x = a[(i - 1, j)];
            let y = a[(i, j)];
            if y == 0.0 {
                continue;
            }
            let r = x.hypot(y);
            let (c, s) = (x / r, y / r);
            for k in 0..d {
                let u = a[(i - 1, k)];
                let v = a[(i, k)];
                a[(i - 1, k)] = c * u + s * v;
                a[(i, k)] = -s * u + c * v;
            }
            rots.push(Givens { p: i - 1, c, s });
        }
    }
    let signs = (0..d).map(|j| a[(j, j)].signum()).collect();
    (rots, signs)
}

/// Mixes the amplitude pairs `(K∪{p}, K∪{p+1})` by `[[m_pp, m_pq], [m_qp, m_qq]]`.
fn apply_neighbour(basis: &FockBasis, amps: &mut [f64], p: usize, block: [[f64; 2]; 2]) {
    let bp = 1u128 << p;
    let bq = 1u128 << (p + 1);
    for k in 0..basis.len() {
        let mask = basis.masks()[k];
        if mask & bp != 0 && mask & bq == 0 {
            let partner = basis.rank_unchecked(mask ^ bp ^ bq);
            let (cp, cq) = (amps[k], amps[partner]);
            amps[k] = block[0][0] * cp + block[0][1] * cq;
            amps[partner] = block[1][0] * cp + block[1][1] * cq;
        }
    }
}

/// Amplitudes of `state` in the orbitals given by the columns of `u`.
///
/// `u` must be orthogonal; deviations are not corrected.
pub fn rotate_orbitals(state: &CIVector, u: &DMatrix<f64>) -> Result<CIVector> {
    let basis = state.basis();
    let d = basis.d();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: u.nrows().max(u.ncols()) });
    }
    let (rots, signs) = factor(&u.transpose());
    let mut amps = state.amplitudes().to_vec();
    for (k, a) in amps.iter_mut().enumerate() {
        let mut m = basis.masks()[k];
        while m != 0 {
            *a *= signs[m.trailing_zeros() as usize];
            m &= m - 1;
        }
    }
    // Uᵀ = G_1ᵀ ⋯ G_mᵀ D, so the transposed rotations act last-first
    for g in rots.iter().rev() {
        apply_neighbour(basis, &mut amps, g.p, [[g.c, -g.s], [g.s, g.c]]);
    }
    CIVector::new(basis.clone(), amps)
}
