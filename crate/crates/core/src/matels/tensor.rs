use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rayon::prelude::*;

use super::exact::{factorial, pair_weights, scaled_sqrt_ratio, MomentTable};
use super::{check_exponent, prefactor, InteractionSpec, TensorCache};
use crate::error::{Error, Result};

/// Index of the unordered orbital pair {i, j}.
#[inline]
pub fn pair_index(i: usize, j: usize) -> usize {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    hi * (hi + 1) / 2 + lo
}

/// Two-body elements `V_{i1 i2; j1 j2}` for real oscillator orbitals.
///
/// The element depends only on the unordered pairs {i1, j1} and {i2, j2} and
/// is symmetric under exchanging them, so it is held as a symmetric matrix
/// over pair indices.  Pair indices are ordered by the larger orbital, which
/// makes the table for a smaller basis the leading block.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBodyTensor {
    s: f64,
    d: usize,
    npairs: usize,
    data: Vec<f64>,
}

impl TwoBodyTensor {
    pub(crate) fn from_pair_matrix(s: f64, d: usize, data: Vec<f64>) -> Self {
        let npairs = d * (d + 1) / 2;
        assert_eq!(data.len(), npairs * npairs);
        Self { s, d, npairs, data }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn npairs(&self) -> usize {
        self.npairs
    }

    #[inline]
    pub fn get(&self, i1: usize, i2: usize, j1: usize, j2: usize) -> f64 {
        debug_assert!(i1 < self.d && i2 < self.d && j1 < self.d && j2 < self.d);
        self.data[pair_index(i1, j1) * self.npairs + pair_index(i2, j2)]
    }

    pub fn try_get(&self, i1: usize, i2: usize, j1: usize, j2: usize) -> Result<f64> {
        for index in [i1, i2, j1, j2] {
            if index >= self.d {
                return Err(Error::OrbitalOutOfRange { index, d: self.d });
            }
        }
        Ok(self.get(i1, i2, j1, j2))
    }

    /// Row of the pair matrix for pair index `p`.
    #[inline]
    pub fn pair_row(&self, p: usize) -> &[f64] {
        &self.data[p * self.npairs..(p + 1) * self.npairs]
    }

    /// Restriction to the first `d` orbitals.
    pub fn truncate(&self, d: usize) -> Result<TwoBodyTensor> {
        if d > self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: d });
        }
        let np = d * (d + 1) / 2;
        let mut data = Vec::with_capacity(np * np);
        for p in 0..np {
            data.extend_from_slice(&self.pair_row(p)[..np]);
        }
        Ok(Self::from_pair_matrix(self.s, d, data))
    }

    /// Symmetry-unique quadruples `(i1, i2, j1, j2)` with even index sum, in
    /// lexicographic order: `i1 <= j1`, `i2 <= j2`, `(i1, j1) <= (i2, j2)`.
    pub fn unique_quadruples(d: usize) -> impl Iterator<Item = [usize; 4]> {
        (0..d).flat_map(move |i1| {
            (0..d).flat_map(move |i2| {
                (i1..d).flat_map(move |j1| {
                    (i2..d).filter_map(move |j2| {
                        let even = (i1 + i2 + j1 + j2) % 2 == 0;
                        (even && (i1, j1) <= (i2, j2)).then_some([i1, i2, j1, j2])
                    })
                })
            })
        })
    }

    pub fn unique_entries(&self) -> impl Iterator<Item = ([usize; 4], f64)> + '_ {
        Self::unique_quadruples(self.d).map(move |q| (q, self.get(q[0], q[1], q[2], q[3])))
    }

    pub(crate) fn from_unique_entries(
        s: f64,
        d: usize,
        entries: impl Iterator<Item = ([usize; 4], f64)>,
    ) -> Self {
        let np = d * (d + 1) / 2;
        let mut data = vec![0.0; np * np];
        for ([i1, i2, j1, j2], v) in entries {
            let p = pair_index(i1, j1);
            let q = pair_index(i2, j2);
            data[p * np + q] = v;
            data[q * np + p] = v;
        }
        Self::from_pair_matrix(s, d, data)
    }
}

/// Full table for exponent `s` and basis size `d`, without touching any cache.
pub fn compute_tensor(s: f64, d: usize) -> Result<TwoBodyTensor> {
    check_exponent(s)?;
    if d == 0 {
        return Ok(TwoBodyTensor::from_pair_matrix(s, 0, Vec::new()));
    }
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|hi| (0..=hi).map(move |lo| (lo, hi))).collect();
    let np = pairs.len();
    let nmax = 2 * (d - 1);
    let table = MomentTable::new(s, nmax);
    debug_assert_eq!(table.len(), nmax + 1);
    let weights: Vec<Vec<BigInt>> = pairs.iter().map(|&(i, j)| pair_weights(i, j)).collect();
    let facts: Vec<BigUint> = (0..d).map(factorial).collect();
    let pair_fact: Vec<BigUint> = pairs.iter().map(|&(i, j)| &facts[i] * &facts[j]).collect();

    // w[q][n1] = Σ_{m2} a_q(m2) T[(n1 + n2)/2], only for n1 ≡ n2 (mod 2)
    let w: Vec<Vec<BigInt>> = pairs
        .par_iter()
        .zip(weights.par_iter())
        .map(|(&(i2, j2), a)| {
            let parity = (i2 + j2) % 2;
            let mut row = vec![BigInt::zero(); nmax + 1];
            for n1 in (parity..=nmax).step_by(2) {
                let mut acc = BigInt::zero();
                for (m2, wm) in a.iter().enumerate() {
                    let n2 = i2 + j2 - 2 * m2;
                    let t = table.get((n1 + n2) / 2);
                    if !t.is_zero() {
                        acc += wm * t;
                    }
                }
                row[n1] = acc;
            }
            row
        })
        .collect();

    let pref = prefactor(s);
    let rows: Vec<Vec<f64>> = (0..np)
        .into_par_iter()
        .map(|p| {
            let (i1, j1) = pairs[p];
            let parity = (i1 + j1) % 2;
            let mut row = vec![0.0; np];
            for q in p..np {
                let (i2, j2) = pairs[q];
                if (i2 + j2) % 2 != parity {
                    continue;
                }
                let mut sum = BigInt::zero();
                for (m1, wm) in weights[p].iter().enumerate() {
                    let wq = &w[q][i1 + j1 - 2 * m1];
                    if !wq.is_zero() {
                        sum += wm * wq;
                    }
                }
                let denom = &pair_fact[p] * &pair_fact[q];
                let sign = if parity == 0 { 1.0 } else { -1.0 };
                row[q] = sign * pref * scaled_sqrt_ratio(&sum, &denom);
            }
            row
        })
        .collect();

    let mut data = vec![0.0; np * np];
    for (p, row) in rows.iter().enumerate() {
        for q in p..np {
            data[p * np + q] = row[q];
            data[q * np + p] = row[q];
        }
    }
    Ok(TwoBodyTensor::from_pair_matrix(s, d, data))
}

/// Table for `spec.s()` and basis size `d`, reusing the cache directory named
/// by `PINSCAN_CACHE_DIR`.
pub fn build_tensor(spec: &InteractionSpec, d: usize) -> Result<TwoBodyTensor> {
    TensorCache::from_env().load_or_build(spec.s(), d)
}
