//! Natural occupations of Haar-random complex N-fermion states.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn subsets(n: usize, d: usize) -> Vec<u64> {
    (0u64..1 << d).filter(|m| m.count_ones() as usize == n).collect()
}

/// Gaussian complex amplitudes over all determinants, normalized; the
/// distribution is invariant under every unitary of the one-particle space.
pub fn occupations(n: usize, d: usize, rng: &mut impl Rng) -> Vec<f64> {
    let dets = subsets(n, d);
    let index = |m: u64| dets.binary_search(&m).unwrap();
    let mut c: Vec<Complex<f64>> = dets
        .iter()
        .map(|_| Complex::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    c.iter_mut().for_each(|z| *z /= norm);
    let mut rho = DMatrix::<Complex<f64>>::zeros(d, d);
    for (k, &m) in dets.iter().enumerate() {
        for i in 0..d {
            if m >> i & 1 == 0 {
                continue;
            }
            for j in 0..d {
                if i != j && m >> j & 1 == 1 {
                    continue;
                }
                let t = m ^ (1 << i) ^ (1 << j);
                let (lo, hi) = (i.min(j), i.max(j));
                let between = (lo + 1..hi).filter(|&b| m >> b & 1 == 1).count();
                let sign = if between % 2 == 0 { 1.0 } else { -1.0 };
                rho[(i, j)] += c[index(t)].conj() * c[k] * sign;
            }
        }
    }
    let mut l: Vec<f64> = SymmetricEigen::new(rho).eigenvalues.iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    l
}
