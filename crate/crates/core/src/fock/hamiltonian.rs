//! Matrix-free action of `H = Σ_j (j + 1/2) n_j + κ Σ_{p<q, r<s} V̄_{pq;rs}
//! a†_p a†_q a_s a_r` with `V̄_{pq;rs} = V_{pq;rs} - V_{pq;sr}`.
//!
//! The two-body part runs through (N-2)-particle intermediates: for a fixed
//! remainder m', every determinant reached by adding a pair {p, q} picks up
//! the sign `(-1)^{#(m' below p) + #(m' below q)}`, so after a gather the
//! contraction over pairs is a dense product with one parity block of V̄.
//! Remainders are batched so that product is a matrix-matrix multiply.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::basis::{masks, FockBasis, ParitySector, NOT_IN_SECTOR, ODD_BITS};
use crate::error::{Error, Result};
use crate::matels::{OneBodyTable, TwoBodyTensor};

const BATCH: usize = 96;

/// Antisymmetrized two-body elements over strict pairs, split by the parity
/// of `p + q` (V̄ connects only pairs of equal parity).
#[derive(Debug, Clone)]
pub struct HamiltonianTables {
    s: f64,
    d: usize,
    one_body: Vec<f64>,
    class_pairs: [Vec<(usize, usize)>; 2],
    blocks: [DMatrix<f64>; 2],
    // V̄_{pq;pq} by strict pair index q(q-1)/2 + p
    diag_pairs: Vec<f64>,
    // position of a strict pair inside its parity class
    class_pos: Vec<usize>,
}

#[inline]
fn strict_index(p: usize, q: usize) -> usize {
    q * (q - 1) / 2 + p
}

impl HamiltonianTables {
    pub fn new(one_body: &OneBodyTable, two_body: &TwoBodyTensor) -> Result<Self> {
        let d = one_body.d();
        if two_body.d() != d {
            return Err(Error::DimensionMismatch { expected: d, got: two_body.d() });
        }
        let mut class_pairs: [Vec<(usize, usize)>; 2] = [Vec::new(), Vec::new()];
        for q in 0..d {
            for p in 0..q {
                class_pairs[(p + q) % 2].push((p, q));
            }
        }
        let vbar = |p: usize, q: usize, r: usize, s: usize| two_body.get(p, q, r, s) - two_body.get(p, q, s, r);
        let blocks = [0, 1].map(|c| {
            let pairs = &class_pairs[c];
            DMatrix::from_fn(pairs.len(), pairs.len(), |a, b| {
                let (p, q) = pairs[a];
                let (r, s) = pairs[b];
                vbar(p, q, r, s)
            })
        });
        let mut class_pos = vec![0; d * d.saturating_sub(1) / 2];
        for pairs in &class_pairs {
            for (a, &(p, q)) in pairs.iter().enumerate() {
                class_pos[strict_index(p, q)] = a;
            }
        }
        let mut diag_pairs = vec![0.0; d * d.saturating_sub(1) / 2];
        for q in 0..d {
            for p in 0..q {
                diag_pairs[strict_index(p, q)] = vbar(p, q, p, q);
            }
        }
        Ok(Self {
            s: two_body.s(),
            d,
            one_body: one_body.diagonal().to_vec(),
            class_pairs,
            blocks,
            diag_pairs,
            class_pos,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `V̄_{pq;rs}` for `p < q`, `r < s`.
    #[inline]
    pub fn vbar(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let c = (p + q) % 2;
        if c != (r + s) % 2 {
            return 0.0;
        }
        let a = self.class_pos[strict_index(p, q)];
        let b = self.class_pos[strict_index(r, s)];
        self.blocks[c][(a, b)]
    }

    pub fn one_body(&self) -> &[f64] {
        &self.one_body
    }
}

#[inline]
fn pair_sign(rest: u128, p: usize, q: usize) -> f64 {
    let below = (rest & ((1u128 << p) - 1)).count_ones() + (rest & ((1u128 << q) - 1)).count_ones();
    if below % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Hamiltonian at fixed κ restricted to one parity sector (or the full basis).
pub struct Hamiltonian<'a> {
    basis: &'a FockBasis,
    tables: &'a HamiltonianTables,
    sector: &'a ParitySector,
    kappa: f64,
    // (class, remainder masks) for every class that reaches the sector
    remainders: Vec<(usize, Vec<u128>)>,
}

impl<'a> Hamiltonian<'a> {
    pub fn new(
        basis: &'a FockBasis,
        tables: &'a HamiltonianTables,
        sector: &'a ParitySector,
        kappa: f64,
    ) -> Result<Self> {
        if tables.d() != basis.d() {
            return Err(Error::DimensionMismatch { expected: basis.d(), got: tables.d() });
        }
        let mut remainders = Vec::new();
        if basis.n() >= 2 && kappa != 0.0 {
            let all = masks(basis.n() - 2, basis.d());
            for c in 0..2 {
                let chosen: Vec<u128> = all
                    .iter()
                    .copied()
                    .filter(|&m| {
                        let parity = (m & ODD_BITS).count_ones() as usize % 2;
                        sector.parity() == 2 || (parity + c) % 2 == sector.parity()
                    })
                    .collect();
                remainders.push((c, chosen));
            }
        }
        Ok(Self { basis, tables, sector, kappa, remainders })
    }

    pub fn dim(&self) -> usize {
        self.sector.len()
    }

    pub fn sector(&self) -> &ParitySector {
        self.sector
    }

    /// Diagonal elements over the sector.
    pub fn diagonal(&self) -> Vec<f64> {
        self.sector
            .members()
            .iter()
            .map(|&k| {
                let cfg = self.basis.config(k);
                let occ: Vec<usize> = cfg.orbitals().collect();
                let mut e: f64 = occ.iter().map(|&j| self.tables.one_body[j]).sum();
                if self.kappa != 0.0 {
                    let mut v = 0.0;
                    for (b, &q) in occ.iter().enumerate() {
                        for &p in &occ[..b] {
                            v += self.tables.diag_pairs[strict_index(p, q)];
                        }
                    }
                    e += self.kappa * v;
                }
                e
            })
            .collect()
    }

    /// `⟨I|H|J⟩` for full-basis ranks, by the Slater-Condon rules.
    pub fn element(&self, bra: usize, ket: usize) -> f64 {
        let bm = self.basis.masks()[bra];
        let km = self.basis.masks()[ket];
        let diff = bm ^ km;
        match diff.count_ones() {
            0 => {
                let occ: Vec<usize> = self.basis.config(bra).orbitals().collect();
                let mut e: f64 = occ.iter().map(|&j| self.tables.one_body[j]).sum();
                let mut v = 0.0;
                for (b, &q) in occ.iter().enumerate() {
                    for &p in &occ[..b] {
                        v += self.tables.diag_pairs[strict_index(p, q)];
                    }
                }
                e += self.kappa * v;
                e
            }
            2 => {
                let i = (bm & diff).trailing_zeros() as usize;
                let j = (km & diff).trailing_zeros() as usize;
                let common = bm & km;
                let mut v = 0.0;
                let mut m = common;
                while m != 0 {
                    let k = m.trailing_zeros() as usize;
                    m &= m - 1;
                    let rest = common & !(1u128 << k);
                    let (p, q) = (i.min(k), i.max(k));
                    let (r, s) = (j.min(k), j.max(k));
                    v += pair_sign(rest, p, q) * pair_sign(rest, r, s) * self.tables.vbar(p, q, r, s);
                }
                self.kappa * v
            }
            4 => {
                let rest = bm & km;
                let mut up = bm & diff;
                let p = up.trailing_zeros() as usize;
                up &= up - 1;
                let q = up.trailing_zeros() as usize;
                let mut down = km & diff;
                let r = down.trailing_zeros() as usize;
                down &= down - 1;
                let s = down.trailing_zeros() as usize;
                self.kappa * pair_sign(rest, p, q) * pair_sign(rest, r, s) * self.tables.vbar(p, q, r, s)
            }
            _ => 0.0,
        }
    }

    /// `y = H x` on sector-local vectors.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        for ((yi, xi), &k) in y.iter_mut().zip(x).zip(self.sector.members()) {
            let mut m = self.basis.masks()[k];
            let mut e = 0.0;
            while m != 0 {
                e += self.tables.one_body[m.trailing_zeros() as usize];
                m &= m - 1;
            }
            *yi = e * xi;
        }
        for (c, rems) in &self.remainders {
            let pairs = &self.tables.class_pairs[*c];
            let block = &self.tables.blocks[*c];
            let partial: Vec<(Vec<(usize, f64)>, DMatrix<f64>)> = rems
                .par_chunks(BATCH)
                .map(|chunk| {
                    // targets[col * np + a] = (local index, sign) or NOT_IN_SECTOR
                    let np = pairs.len();
                    let mut targets = vec![(NOT_IN_SECTOR as usize, 0.0); np * chunk.len()];
                    let mut g = DMatrix::<f64>::zeros(np, chunk.len());
                    for (col, &rest) in chunk.iter().enumerate() {
                        for (a, &(p, q)) in pairs.iter().enumerate() {
                            let bits = (1u128 << p) | (1u128 << q);
                            if rest & bits != 0 {
                                continue;
                            }
                            let local = self.sector.local(self.basis.rank_unchecked(rest | bits));
                            if local == NOT_IN_SECTOR {
                                continue;
                            }
                            let sign = pair_sign(rest, p, q);
                            targets[col * np + a] = (local as usize, sign);
                            g[(a, col)] = sign * x[local as usize];
                        }
                    }
                    (targets, block * g)
                })
                .collect();
            for (targets, h) in partial {
                let np = pairs.len();
                for (col, hcol) in h.column_iter().enumerate() {
                    for (a, &hv) in hcol.iter().enumerate() {
                        let (local, sign) = targets[col * np + a];
                        if local != NOT_IN_SECTOR as usize {
                            y[local] += self.kappa * sign * hv;
                        }
                    }
                }
            }
        }
    }
}
