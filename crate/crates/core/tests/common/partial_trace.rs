//! Density matrices by explicit partial traces.

use nalgebra::{DMatrix, SymmetricEigen};

/// Antisymmetric first-quantized wavefunction `Ψ(k_1..k_N)` on d^N entries.
fn first_quantized(n: usize, d: usize, tuples: &[Vec<usize>], amps: &[f64]) -> Vec<f64> {
    let mut psi = vec![0.0; d.pow(n as u32)];
    let norm = (1..=n).map(|k| k as f64).product::<f64>().sqrt();
    let perms = super::dense::permutations(n);
    for (t, &c) in tuples.iter().zip(amps) {
        for (p, sign) in &perms {
            let idx = p.iter().fold(0, |acc, &k| acc * d + t[k]);
            psi[idx] = sign * c / norm;
        }
    }
    psi
}

/// `ρ_ij = N Σ Ψ(i, k_2..) Ψ(j, k_2..)`.
pub fn one_rdm(n: usize, d: usize, tuples: &[Vec<usize>], amps: &[f64]) -> DMatrix<f64> {
    let psi = first_quantized(n, d, tuples, amps);
    let rest = d.pow(n as u32 - 1);
    DMatrix::from_fn(d, d, |i, j| {
        n as f64 * (0..rest).map(|r| psi[i * rest + r] * psi[j * rest + r]).sum::<f64>()
    })
}

/// Qubit amplitudes: the ascending-order determinant maps to the occupation
/// basis state with sign +1.
pub fn qubit_state(d: usize, tuples: &[Vec<usize>], amps: &[f64]) -> Vec<f64> {
    let mut psi = vec![0.0; 1 << d];
    for (t, &c) in tuples.iter().zip(amps) {
        psi[t.iter().map(|&j| 1usize << j).sum::<usize>()] = c;
    }
    psi
}

fn entropy(m: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .map(|&p| p.clamp(0.0, 1.0))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// Reduced density matrix of the listed qubits.
pub fn reduced(psi: &[f64], d: usize, keep: &[usize]) -> DMatrix<f64> {
    let dim = 1 << keep.len();
    let mut rho = DMatrix::zeros(dim, dim);
    let keep_mask: usize = keep.iter().map(|&q| 1 << q).sum();
    let local = |x: usize| keep.iter().enumerate().map(|(b, &q)| (x >> q & 1) << b).sum::<usize>();
    for x in 0..1usize << d {
        for y in 0..1usize << d {
            if x & !keep_mask == y & !keep_mask {
                rho[(local(x), local(y))] += psi[x] * psi[y];
            }
        }
    }
    rho
}

pub fn mutual_information(psi: &[f64], d: usize) -> DMatrix<f64> {
    let single: Vec<f64> = (0..d).map(|i| entropy(reduced(psi, d, &[i]))).collect();
    DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            0.0
        } else {
            single[i] + single[j] - entropy(reduced(psi, d, &[i, j]))
        }
    })
}
