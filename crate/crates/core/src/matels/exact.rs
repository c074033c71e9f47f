//! Big-integer evaluation of the closed-form oscillator pair integral.
//!
//! The double sum alternates in sign and its terms exceed the result by up to
//! fifty decimal orders at d = 60, so it is accumulated exactly: the binomial
//! weights are integers and the moment factors `2^{-n} ∏_{j<n}(s - 2j)` are
//! held in fixed point with `FRAC_BITS` fractional bits.  The only rounding
//! happens once per moment factor and once in the final conversion.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

pub(crate) const FRAC_BITS: u64 = 128;

/// Fixed-point table `T_n = round(2^F · 2^{-n} ∏_{j<n} (s - 2j))`.
pub(crate) struct MomentTable {
    t: Vec<BigInt>,
}

fn round_shift_right(x: &BigInt, k: u64) -> BigInt {
    if k == 0 {
        return x.clone();
    }
    let half = BigInt::one() << (k - 1);
    match x.sign() {
        Sign::Minus => -((-x + half) >> k),
        _ => (x + half) >> k,
    }
}

impl MomentTable {
    pub fn new(s: f64, n_max: usize) -> Self {
        // s = mantissa * 2^exponent exactly
        let (mantissa, exponent) = decompose(s);
        let shift = if exponent < 0 { (-exponent) as u64 } else { 0 };
        let s_num = BigInt::from(mantissa) << ((exponent + shift as i64) as u64);
        let step = BigInt::one() << (shift + 1);

        let mut t = Vec::with_capacity(n_max + 1);
        let mut q = BigInt::one();
        for n in 0..=n_max {
            if n > 0 {
                let factor = &s_num - &step * BigInt::from(n - 1);
                q *= factor;
            }
            let den_bits = n as u64 * (shift + 1);
            let value = if den_bits <= FRAC_BITS {
                &q << (FRAC_BITS - den_bits)
            } else {
                round_shift_right(&q, den_bits - FRAC_BITS)
            };
            t.push(value);
        }
        Self { t }
    }

    pub fn get(&self, n: usize) -> &BigInt {
        &self.t[n]
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }
}

fn decompose(x: f64) -> (i64, i64) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign: i64 = if bits >> 63 == 0 { 1 } else { -1 };
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & 0x000f_ffff_ffff_ffff) as i64;
    let (mut m, mut e) = if exp_field == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), exp_field - 1075)
    };
    while m & 1 == 0 {
        m >>= 1;
        e += 1;
    }
    (sign * m, e)
}

/// Integer weights `C(i,m) C(j,m) m!` for m = 0..=min(i,j).
pub(crate) fn pair_weights(i: usize, j: usize) -> Vec<BigInt> {
    let lo = i.min(j);
    let mut out = Vec::with_capacity(lo + 1);
    // w(m) = i! j! / ((i-m)! (j-m)! m!), built by the ratio
    // w(m+1)/w(m) = (i-m)(j-m)/(m+1)
    let mut w = BigUint::one();
    for m in 0..=lo {
        out.push(BigInt::from(w.clone()));
        if m < lo {
            w = w * BigUint::from((i - m) * (j - m)) / BigUint::from(m + 1);
        }
    }
    out
}

pub(crate) fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

fn ldexp(x: f64, e: i64) -> f64 {
    let mut x = x;
    let mut e = e;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Converts `sum · 2^{-FRAC_BITS} / sqrt(denom)` to f64 with a relative error
/// of a few ulp.
pub(crate) fn scaled_sqrt_ratio(sum: &BigInt, denom: &BigUint) -> f64 {
    if sum.is_zero() {
        return 0.0;
    }
    let negative = sum.sign() == Sign::Minus;
    let num = sum.magnitude() * sum.magnitude();
    let diff = num.bits() as i64 - denom.bits() as i64;
    // ratio * 2^{2g} carries about 120 significant bits
    let g = (120 - diff + 1).div_euclid(2);
    let ratio = if g >= 0 {
        (num << (2 * g) as u64) / denom
    } else {
        num / (denom << (-2 * g) as u64)
    };
    let root = ratio.to_f64().unwrap_or(f64::INFINITY).sqrt();
    let value = ldexp(root, -(g + FRAC_BITS as i64));
    if negative {
        -value
    } else {
        value
    }
}
