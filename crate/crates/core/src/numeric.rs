//! Exact and directed-rounding numeric helpers shared by the analysis code.
//!
//! Anything that ends up inside a `floor` deciding an input length goes through
//! here: lower bounds for `log2` of big integers, an upward-rounded accumulator
//! for sums of `log2(1 + x)` terms, and exact `floor(-log2(a/b))`.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Extra safety margin added to every upward-rounded rate-loss sum.
pub const ROUNDING_MARGIN: f64 = 1.0 / (1u64 << 40) as f64;

/// Relative error budget for one `log2(1 + x)` term evaluated in `f64`.
const TERM_REL_SLACK: f64 = 1.0 / (1u64 << 46) as f64;

const FIXED_SCALE: f64 = 18_446_744_073_709_551_616.0; // 2^64

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// `a * 2^shift` compared against `b`, for any sign of `shift`.
pub fn cmp_scaled(a: &BigUint, shift: i64, b: &BigUint) -> Ordering {
    if shift >= 0 {
        (a << shift as u64).cmp(b)
    } else {
        a.cmp(&(b << (-shift) as u64))
    }
}

/// Largest integer `k` with `num / den <= 2^-k`, i.e. `floor(-log2(num/den))`.
///
/// Panics if `num` or `den` is zero.
pub fn floor_neg_log2(num: &BigUint, den: &BigUint) -> i64 {
    assert!(!num.is_zero() && !den.is_zero(), "floor_neg_log2 of zero");
    // num * 2^k <= den  <=>  k <= log2(den/num)
    let mut k = den.bits() as i64 - num.bits() as i64;
    while cmp_scaled(num, k, den) == Ordering::Greater {
        k -= 1;
    }
    while cmp_scaled(num, k + 1, den) != Ordering::Greater {
        k += 1;
    }
    k
}

/// `floor(-log2(r))` for a positive rational.
pub fn floor_neg_log2_rational(r: &BigRational) -> i64 {
    assert!(r.is_positive(), "floor_neg_log2 of non-positive rational");
    floor_neg_log2(
        r.numer().magnitude(),
        r.denom().magnitude(),
    )
}

/// Splits `log2(x)` for `x >= 1` into its exact integer part and a lower bound
/// on the fractional part.
pub fn log2_floor_and_frac_lower(x: &BigUint) -> (u64, f64) {
    assert!(!x.is_zero(), "log2 of zero");
    let int_part = x.bits() - 1;
    // Keep the top 53 bits, truncating: mantissa * 2^(int_part-52) <= x.
    let mantissa = if int_part >= 52 {
        (x >> (int_part - 52)).to_u64().expect("53-bit mantissa")
    } else {
        x.to_u64().expect("small integer") << (52 - int_part)
    };
    let r = (mantissa - (1u64 << 52)) as f64 / (1u64 << 52) as f64;
    let frac = r.ln_1p() * std::f64::consts::LOG2_E;
    let lower = (frac * (1.0 - TERM_REL_SLACK) - f64::EPSILON * 1e-4).max(0.0);
    (int_part, lower)
}

/// Lower bound on `log2(x)` for `x >= 1` as a single `f64`.
pub fn log2_lower(x: &BigUint) -> f64 {
    let (i, f) = log2_floor_and_frac_lower(x);
    i as f64 + f
}

/// `log2(x)` rounded to nearest (no direction guarantee).
pub fn log2_approx(x: &BigUint) -> f64 {
    let int_part = x.bits().saturating_sub(1);
    let shift = int_part.saturating_sub(62);
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX) as f64;
    top.log2() + shift as f64
}

/// Accumulates `sum_i log2(1 + x_i)` with every term rounded up onto a
/// 64-fractional-bit fixed-point grid, so the final value never underestimates
/// the exact sum.
#[derive(Debug, Clone, Default)]
pub struct UpwardLog2Sum {
    fixed: u128,
}

impl UpwardLog2Sum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `log2(1 + x)` for `x >= 0`.
    pub fn add_log2_1p(&mut self, x: f64) {
        debug_assert!(x >= 0.0);
        let term = x.ln_1p() * std::f64::consts::LOG2_E;
        let upper = term * (1.0 + TERM_REL_SLACK) + f64::MIN_POSITIVE;
        self.fixed += (upper * FIXED_SCALE).ceil() as u128;
    }

    /// Upper bound on the accumulated sum, including [`ROUNDING_MARGIN`].
    pub fn upper(&self) -> f64 {
        let approx = (self.fixed as f64 / FIXED_SCALE).next_up();
        (approx + ROUNDING_MARGIN).next_up()
    }
}

/// Shannon entropy in bits; zero entries contribute nothing.
pub fn entropy_bits(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// `D(q || p)` in bits. Infinite when `q` puts mass where `p` has none.
pub fn kl_divergence_bits(q: &[f64], p: &[f64]) -> f64 {
    q.iter()
        .zip(p)
        .filter(|(&qi, _)| qi > 0.0)
        .map(|(&qi, &pi)| {
            if pi <= 0.0 {
                f64::INFINITY
            } else {
                qi * (qi / pi).log2()
            }
        })
        .sum()
}

/// `2^-w` as an exact rational.
pub fn pow2_neg(w: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << w as usize)
}
