//! One-particle density matrix, natural occupations and orbital entanglement.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::fock::CIVector;

/// `ρ_ij = ⟨a†_j a_i⟩`, trace N.
#[derive(Debug, Clone, PartialEq)]
pub struct OneRDM {
    pub matrix: DMatrix<f64>,
}

/// Sign of `a†_j a_i` on a determinant containing i but not j.
#[inline]
pub(crate) fn hop_sign(mask: u128, i: usize, j: usize) -> f64 {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let between = mask & ((1u128 << hi) - 1) & !((1u128 << (lo + 1)) - 1);
    if between.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn one_rdm(state: &CIVector) -> OneRDM {
    let basis = state.basis();
    let d = basis.d();
    let c = state.amplitudes();
    let mut rho = DMatrix::<f64>::zeros(d, d);
    for (k, &mask) in basis.masks().iter().enumerate() {
        let ck = c[k];
        if ck == 0.0 {
            continue;
        }
        let mut occ = mask;
        while occ != 0 {
            let i = occ.trailing_zeros() as usize;
            occ &= occ - 1;
            rho[(i, i)] += ck * ck;
            for j in 0..d {
                if mask >> j & 1 == 1 {
                    continue;
                }
                let target = mask ^ (1u128 << i) ^ (1u128 << j);
                let ct = c[basis.rank_unchecked(target)];
                if ct != 0.0 {
                    rho[(i, j)] += hop_sign(mask, i, j) * ct * ck;
                }
            }
        }
    }
    // exact symmetry; the two triangles agree up to summation order
    let sym = (&rho + rho.transpose()) * 0.5;
    OneRDM { matrix: sym }
}

impl OneRDM {
    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn d(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Occupations sorted non-increasingly with the natural orbitals as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct NONVector {
    pub lambda: Vec<f64>,
    pub orbitals: DMatrix<f64>,
    /// Set when two occupations agree to within the tie tolerance and the
    /// order was settled by the dominant orbital index.
    pub tie_broken: bool,
}

const TIE_TOL: f64 = 1e-13;

fn dominant_index(v: nalgebra::DVectorView<'_, f64>) -> usize {
    let mut best = 0;
    for (k, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = k;
        }
    }
    best
}

/// Sorts eigenpairs by descending value and fixes each vector's sign by its
/// dominant component.  Within a run of values closer than the tie tolerance
/// the vectors are ordered by dominant component index while the values stay
/// sorted, so the ordering is reproducible and the spectrum non-increasing.
pub(crate) fn sorted_eigen(values: &[f64], vectors: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>, bool) {
    let n = values.len();
    let dom: Vec<usize> = (0..n).map(|k| dominant_index(vectors.column(k))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(dom[a].cmp(&dom[b])));
    let sorted: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let mut tie = false;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && sorted[end - 1] - sorted[end] < TIE_TOL {
            end += 1;
        }
        if end - start > 1 {
            tie = true;
            order[start..end].sort_by_key(|&k| dom[k]);
        }
        start = end;
    }
    let mut out = DMatrix::<f64>::zeros(vectors.nrows(), n);
    for (col, &k) in order.iter().enumerate() {
        let v = vectors.column(k);
        let sign = if v[dom[k]] < 0.0 { -1.0 } else { 1.0 };
        out.set_column(col, &(v * sign));
    }
    (sorted, out, tie)
}

pub fn natural_occupations(rdm: &OneRDM) -> NONVector {
    let eig = SymmetricEigen::new(rdm.matrix.clone());
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let (lambda, orbitals, tie_broken) = sorted_eigen(&values, &eig.eigenvectors);
    NONVector { lambda, orbitals, tie_broken }
}

impl NONVector {
    pub fn sum(&self) -> f64 {
        self.lambda.iter().sum()
    }

    /// `U diag(λ) Uᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let l = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.lambda));
        &self.orbitals * l * self.orbitals.transpose()
    }
}

/// `I_ij = S(ρ_i) + S(ρ_j) - S(ρ_ij)`, natural logarithm, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct MutualInfoMatrix {
    pub matrix: DMatrix<f64>,
}

fn entropy(eigs: &[f64]) -> f64 {
    eigs.iter()
        .map(|&p| p.clamp(0.0, 1.0))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// Eigenvalues of the two-orbital density matrix in the basis
/// |00⟩, |01⟩, |10⟩, |11⟩ (block diagonal in local particle number).
pub fn two_orbital_spectrum(n_i: f64, n_j: f64, n_ij: f64, coherence: f64) -> [f64; 4] {
    let p11 = n_ij;
    let p10 = n_i - n_ij;
    let p01 = n_j - n_ij;
    let p00 = 1.0 - n_i - n_j + n_ij;
    let mean = 0.5 * (p10 + p01);
    let half = (0.25 * (p10 - p01).powi(2) + coherence * coherence).sqrt();
    [p00, mean + half, mean - half, p11]
}

pub fn mutual_information(state: &CIVector) -> MutualInfoMatrix {
    let basis = state.basis();
    let d = basis.d();
    let c = state.amplitudes();
    let mut n = vec![0.0; d];
    let mut nn = DMatrix::<f64>::zeros(d, d);
    for (k, &mask) in basis.masks().iter().enumerate() {
        let w = c[k] * c[k];
        if w == 0.0 {
            continue;
        }
        let occ: Vec<usize> = basis.config(k).orbitals().collect();
        for (a, &i) in occ.iter().enumerate() {
            n[i] += w;
            for &j in &occ[..a] {
                nn[(i, j)] += w;
            }
        }
        let _ = mask;
    }
    // string-corrected coherence = hopping amplitude without fermionic sign
    let coh_rows: Vec<Vec<f64>> = (0..d)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; d];
            for (k, &mask) in basis.masks().iter().enumerate() {
                if c[k] == 0.0 || mask >> i & 1 == 0 {
                    continue;
                }
                for (j, slot) in row.iter_mut().enumerate().skip(i + 1) {
                    if mask >> j & 1 == 1 {
                        continue;
                    }
                    let target = mask ^ (1u128 << i) ^ (1u128 << j);
                    *slot += c[k] * c[basis.rank_unchecked(target)];
                }
            }
            row
        })
        .collect();
    let single: Vec<f64> = n.iter().map(|&x| entropy(&[1.0 - x, x])).collect();
    let mut m = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let spec = two_orbital_spectrum(n[i], n[j], nn[(j, i)], coh_rows[i][j]);
            let v = single[i] + single[j] - entropy(&spec);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    MutualInfoMatrix { matrix: m }
}
