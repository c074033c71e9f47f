use crate::error::{Error, Result};

/// Largest supported orbital count (one bit per orbital in a `u128`).
pub const MAX_ORBITALS: usize = 128;

/// Default cap on the number of determinants held in memory.
pub const DEFAULT_BUDGET: usize = 20_000_000;

/// Occupation word: bit j set iff orbital j is occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlaterConfiguration {
    mask: u128,
}

impl SlaterConfiguration {
    pub fn from_mask(mask: u128) -> Self {
        Self { mask }
    }

    pub fn from_orbitals(orbitals: &[usize]) -> Result<Self> {
        let mut mask = 0u128;
        for &j in orbitals {
            if j >= MAX_ORBITALS {
                return Err(Error::OrbitalOutOfRange { index: j, d: MAX_ORBITALS });
            }
            mask |= 1 << j;
        }
        Ok(Self { mask })
    }

    pub fn mask(&self) -> u128 {
        self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_occupied(&self, j: usize) -> bool {
        self.mask >> j & 1 == 1
    }

    /// Occupied orbitals in ascending order.
    pub fn orbitals(&self) -> impl Iterator<Item = usize> {
        let mut m = self.mask;
        std::iter::from_fn(move || {
            if m == 0 {
                return None;
            }
            let j = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(j)
        })
    }

    /// Parity of the sum of occupied orbital indices.
    pub fn index_parity(&self) -> usize {
        (self.mask & ODD_BITS).count_ones() as usize % 2
    }
}

pub(crate) const ODD_BITS: u128 = 0xaaaa_aaaa_aaaa_aaaa_aaaa_aaaa_aaaa_aaaa;

/// Next larger word with the same popcount.
#[inline]
pub(crate) fn next_same_popcount(v: u128) -> u128 {
    let t = v | (v - 1);
    let w = (!t & (!t).wrapping_neg()) - 1;
    (t + 1) | (w >> (v.trailing_zeros() + 1))
}

/// All masks with `n` of the low `d` bits set, ascending.
pub(crate) fn masks(n: usize, d: usize) -> Vec<u128> {
    if n > d {
        return Vec::new();
    }
    if n == 0 {
        return vec![0];
    }
    let last = ((1u128 << n) - 1) << (d - n);
    let mut out = Vec::new();
    let mut m = (1u128 << n) - 1;
    loop {
        out.push(m);
        if m == last {
            break;
        }
        m = next_same_popcount(m);
    }
    out
}

pub(crate) fn binomial_table(d: usize, n: usize) -> Vec<Vec<u64>> {
    let mut c = vec![vec![0u64; n + 2]; d + 1];
    for row in c.iter_mut() {
        row[0] = 1;
    }
    for i in 1..=d {
        for k in 1..=(n + 1).min(i) {
            c[i][k] = c[i - 1][k - 1].saturating_add(c[i - 1][k]);
        }
    }
    c
}

pub fn binomial(d: usize, n: usize) -> u128 {
    if n > d {
        return 0;
    }
    let n = n.min(d - n);
    let mut acc: u128 = 1;
    for k in 0..n {
        acc = acc * (d - k) as u128 / (k + 1) as u128;
    }
    acc
}

/// The `binomial(d, n)` determinants ordered by increasing mask value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n: usize,
    d: usize,
    configs: Vec<u128>,
    binom: Vec<Vec<u64>>,
}

impl FockBasis {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        Self::with_budget(n, d, DEFAULT_BUDGET)
    }

    pub fn with_budget(n: usize, d: usize, budget: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSetting { n, d, reason: "need at least one particle" });
        }
        if n >= d {
            return Err(Error::InvalidSetting { n, d, reason: "need more orbitals than particles" });
        }
        if d > MAX_ORBITALS {
            return Err(Error::InvalidSetting { n, d, reason: "at most 128 orbitals" });
        }
        let size = binomial(d, n);
        if size > budget as u128 {
            return Err(Error::BasisTooLarge { size, budget });
        }
        Ok(Self {
            n,
            d,
            configs: masks(n, d),
            binom: binomial_table(d, n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn masks(&self) -> &[u128] {
        &self.configs
    }

    pub fn config(&self, k: usize) -> SlaterConfiguration {
        SlaterConfiguration::from_mask(self.configs[k])
    }

    /// Position of `mask`, assuming it has n bits below d.
    #[inline]
    pub fn rank_unchecked(&self, mask: u128) -> usize {
        let mut m = mask;
        let mut r = 0u64;
        let mut t = 1;
        while m != 0 {
            let b = m.trailing_zeros() as usize;
            r += self.binom[b][t];
            m &= m - 1;
            t += 1;
        }
        r as usize
    }

    pub fn rank(&self, config: SlaterConfiguration) -> Option<usize> {
        let m = config.mask();
        let in_range = self.d == MAX_ORBITALS || m >> self.d == 0;
        (in_range && config.count() == self.n).then(|| self.rank_unchecked(m))
    }

    /// Rank of the reference determinant (0, 1, ..., N-1).
    pub fn reference_rank(&self) -> usize {
        0
    }
}

/// Determinants of one index-sum parity, as positions in the full basis.
#[derive(Debug, Clone)]
pub struct ParitySector {
    parity: usize,
    members: Vec<usize>,
    lookup: Vec<u32>,
}

pub(crate) const NOT_IN_SECTOR: u32 = u32::MAX;

impl ParitySector {
    pub fn new(basis: &FockBasis, parity: usize) -> Self {
        let mut lookup = vec![NOT_IN_SECTOR; basis.len()];
        let mut members = Vec::with_capacity(basis.len() / 2 + 1);
        for (k, &m) in basis.masks().iter().enumerate() {
            if SlaterConfiguration::from_mask(m).index_parity() == parity % 2 {
                lookup[k] = members.len() as u32;
                members.push(k);
            }
        }
        Self { parity: parity % 2, members, lookup }
    }

    /// Whole basis as a single block (used to check parity conservation).
    pub fn full(basis: &FockBasis) -> Self {
        Self {
            parity: 2,
            members: (0..basis.len()).collect(),
            lookup: (0..basis.len() as u32).collect(),
        }
    }

    /// 0 or 1 for a true sector, 2 for the unrestricted basis.
    pub fn parity(&self) -> usize {
        self.parity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    #[inline]
    pub(crate) fn local(&self, full_rank: usize) -> u32 {
        self.lookup[full_rank]
    }

    pub fn embed(&self, local: &[f64], full_len: usize) -> Vec<f64> {
        let mut out = vec![0.0; full_len];
        for (&k, &v) in self.members.iter().zip(local) {
            out[k] = v;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_enumerations() {
        let b = FockBasis::new(1, 3).unwrap();
        assert_eq!(b.masks(), &[0b001, 0b010, 0b100]);
        assert_eq!(FockBasis::new(3, 6).unwrap().len(), 20);
        assert_eq!(FockBasis::new(4, 40).unwrap().len(), 91390);
    }

    #[test]
    fn ranks_invert_enumeration() {
        for (n, d) in [(1, 5), (2, 7), (3, 9), (4, 10), (5, 128)] {
            if binomial(d, n) > 400_000 {
                let b = FockBasis::new(2, d).unwrap();
                for (k, &m) in b.masks().iter().enumerate() {
                    assert_eq!(b.rank(SlaterConfiguration::from_mask(m)), Some(k));
                }
                continue;
            }
            let b = FockBasis::new(n, d).unwrap();
            assert_eq!(b.len() as u128, binomial(d, n));
            for (k, &m) in b.masks().iter().enumerate() {
                assert_eq!(b.rank(SlaterConfiguration::from_mask(m)), Some(k));
                if k > 0 {
                    assert!(b.masks()[k - 1] < m);
                }
            }
        }
    }

    #[test]
    fn guards() {
        assert!(matches!(FockBasis::new(3, 3), Err(Error::InvalidSetting { .. })));
        assert!(matches!(FockBasis::new(0, 3), Err(Error::InvalidSetting { .. })));
        assert!(matches!(
            FockBasis::with_budget(4, 40, 1000),
            Err(Error::BasisTooLarge { size: 91390, budget: 1000 })
        ));
        let b = FockBasis::new(2, 4).unwrap();
        assert_eq!(b.rank(SlaterConfiguration::from_mask(0b111)), None);
        assert_eq!(b.rank(SlaterConfiguration::from_mask(0b10001)), None);
    }

    #[test]
    fn sectors_partition_basis() {
        let b = FockBasis::new(3, 8).unwrap();
        let even = ParitySector::new(&b, 0);
        let odd = ParitySector::new(&b, 1);
        assert_eq!(even.len() + odd.len(), b.len());
        assert_eq!(SlaterConfiguration::from_orbitals(&[0, 1, 2]).unwrap().index_parity(), 1);
        for &k in odd.members() {
            assert_eq!(b.config(k).index_parity(), 1);
        }
    }
}
