//! One- and two-body matrix elements of the trapped pair Hamiltonian in the
//! harmonic-oscillator eigenbasis (units ħ = m = ω = 1).

mod cache;
mod exact;
mod gamma;
mod tensor;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};

pub use cache::TensorCache;
pub use gamma::gamma;
pub use tensor::{build_tensor, compute_tensor, pair_index, TwoBodyTensor};

/// Exponent and coupling of the pair potential `κ |x_i - x_j|^s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionSpec {
    s: f64,
    kappa: f64,
}

impl InteractionSpec {
    pub fn new(s: f64, kappa: f64) -> Result<Self> {
        check_exponent(s)?;
        if !kappa.is_finite() {
            return Err(Error::NonFiniteCoupling(kappa));
        }
        if kappa < 0.0 && s >= 2.0 {
            return Err(Error::Unbounded { s, kappa });
        }
        Ok(Self { s, kappa })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::new(self.s, kappa)
    }
}

pub(crate) fn check_exponent(s: f64) -> Result<()> {
    if s.is_finite() && s > -1.0 {
        Ok(())
    } else {
        Err(Error::ExponentDomain(s))
    }
}

/// Oscillator level energies `j + 1/2`; the one-body operator is diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct OneBodyTable {
    diag: Vec<f64>,
}

impl OneBodyTable {
    pub fn new(d: usize) -> Self {
        Self {
            diag: (0..d).map(|j| j as f64 + 0.5).collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            0.0
        }
    }
}

/// `2^{s/2} Γ((s+1)/2) / √π`, the common factor of every two-body element.
pub(crate) fn prefactor(s: f64) -> f64 {
    2f64.powf(0.5 * s) * gamma(0.5 * (s + 1.0)) / std::f64::consts::PI.sqrt()
}

/// `𝒥_k = Γ((s+1)/2) 2^{-k/2} / √π · ∏_{j<k/2} (s - 2j)`, evaluated directly.
pub fn j_moment(s: f64, k: usize) -> Result<f64> {
    check_exponent(s)?;
    if k % 2 == 1 {
        return Err(Error::OddMoment(k));
    }
    let mut p = gamma(0.5 * (s + 1.0)) / std::f64::consts::PI.sqrt();
    for j in 0..k / 2 {
        p *= 0.5 * (s - 2.0 * j as f64);
    }
    Ok(p)
}

/// Single element `V_{i1 i2; j1 j2}` (orbitals i1, j1 carry particle 1).
///
/// Exact big-integer accumulation; use [`compute_tensor`] for whole tables.
pub fn two_body_element(s: f64, i1: usize, i2: usize, j1: usize, j2: usize) -> Result<f64> {
    check_exponent(s)?;
    let k = i1 + i2 + j1 + j2;
    if k % 2 == 1 {
        return Ok(0.0);
    }
    let table = exact::MomentTable::new(s, k / 2);
    let a1 = exact::pair_weights(i1, j1);
    let a2 = exact::pair_weights(i2, j2);
    let mut sum = BigInt::zero();
    for (m1, w1) in a1.iter().enumerate() {
        let n1 = i1 + j1 - 2 * m1;
        for (m2, w2) in a2.iter().enumerate() {
            let n2 = i2 + j2 - 2 * m2;
            let t = table.get((n1 + n2) / 2);
            if !t.is_zero() {
                sum += w1 * w2 * t;
            }
        }
    }
    let denom = exact::factorial(i1) * exact::factorial(j1) * exact::factorial(i2) * exact::factorial(j2);
    let sign = if (i2 + j2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * prefactor(s) * exact::scaled_sqrt_ratio(&sum, &denom))
}
