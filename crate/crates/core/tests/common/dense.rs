//! Dense first-quantized Hamiltonian: determinant overlaps summed over all
//! permutations, with no reference to creation/annihilation sign rules.

use nalgebra::DMatrix;

pub fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, f64)>) {
        let n = used.len();
        if prefix.len() == n {
            let mut inv = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if prefix[a] > prefix[b] {
                        inv += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inv % 2 == 0 { 1.0 } else { -1.0 }));
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Sorted orbital tuples of all N-subsets of 0..d, ordered by bitmask value.
pub fn tuples(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u128..(1u128 << d))
        .filter(|m| m.count_ones() as usize == n)
        .map(|m| (0..d).filter(|&j| m >> j & 1 == 1).collect())
        .collect();
    out.sort_by_key(|t| t.iter().map(|&j| 1u128 << j).sum::<u128>());
    out
}

/// `H = Σ_a (j_a + 1/2) + κ Σ_{a<b} |x_a - x_b|^s` in the determinant basis,
/// with `v(i1, i2, j1, j2)` the pair element (orbital i1, j1 on particle 1).
pub fn hamiltonian(
    n: usize,
    d: usize,
    kappa: f64,
    v: impl Fn(usize, usize, usize, usize) -> f64,
) -> (Vec<Vec<usize>>, DMatrix<f64>) {
    let basis = tuples(n, d);
    let perms = permutations(n);
    let dim = basis.len();
    let mut h = DMatrix::zeros(dim, dim);
    for (r, bra) in basis.iter().enumerate() {
        for (c, ket) in basis.iter().enumerate() {
            let mut total = 0.0;
            for (p, sign) in &perms {
                let permuted: Vec<usize> = p.iter().map(|&k| ket[k]).collect();
                let mismatched: Vec<usize> = (0..n).filter(|&a| bra[a] != permuted[a]).collect();
                if mismatched.is_empty() {
                    total += sign * bra.iter().map(|&j| j as f64 + 0.5).sum::<f64>();
                }
                if mismatched.len() > 2 {
                    continue;
                }
                for a in 0..n {
                    for b in a + 1..n {
                        if mismatched.iter().all(|&m| m == a || m == b) {
                            total += sign * kappa * v(bra[a], bra[b], permuted[a], permuted[b]);
                        }
                    }
                }
            }
            h[(r, c)] = total;
        }
    }
    (basis, h)
}
