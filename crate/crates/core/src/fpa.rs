//! Finite-precision interval engine.
//!
//! An interval is held as `[x̂, x̂ + ŷ) / 2^(L+w)` with a `w+1`-bit width mantissa
//! `2^w <= ŷ < 2^(w+1)`. Children are laid out by rounding the *boundaries*
//! `ŷ F̂ / Θ` to the nearest integer, so siblings always tile the parent exactly.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::models::QuantizedStep;

pub const MIN_PRECISION: u32 = 1;
pub const MAX_PRECISION: u32 = 62;

/// Interval state after a prefix has been consumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpaState {
    xhat: BigUint,
    yhat: u64,
    exponent: u64,
    precision: u32,
}

/// Child boundaries relative to the parent start, before renormalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChildLayout {
    pub lower_offsets: Vec<u64>,
    pub widths: Vec<u64>,
}

pub fn check_precision(w: u32) -> Result<()> {
    if (MIN_PRECISION..=MAX_PRECISION).contains(&w) {
        Ok(())
    } else {
        Err(Error::config(format!(
            "precision w={w} outside {MIN_PRECISION}..={MAX_PRECISION}"
        )))
    }
}

/// Checks `Θ <= 2^w`, without which non-empty children could vanish.
pub fn check_theta(theta: u64, w: u32) -> Result<()> {
    if (theta as u128) <= (1u128 << w) {
        Ok(())
    } else {
        Err(Error::config(format!("theta={theta} exceeds 2^w with w={w}")))
    }
}

/// `floor(ŷ F̂ / Θ + 1/2)`.
#[inline]
pub(crate) fn boundary(yhat: u64, cum: u64, theta: u64) -> u64 {
    let num = 2 * (yhat as u128) * (cum as u128) + theta as u128;
    (num / (2 * theta as u128)) as u64
}

/// Shift `v` bringing a positive width into `[2^w, 2^(w+1))`.
#[inline]
pub(crate) fn renorm_shift(width: u64, w: u32) -> u32 {
    debug_assert!(width > 0 && width < (1u64 << (w + 1)));
    let top = 63 - width.leading_zeros();
    w.saturating_sub(top)
}

impl FpaState {
    /// The unit interval: `x̂ = 0`, `ŷ = 2^w`, `L = 0`.
    pub fn new(w: u32) -> Result<Self> {
        check_precision(w)?;
        Ok(Self {
            xhat: BigUint::zero(),
            yhat: 1u64 << w,
            exponent: 0,
            precision: w,
        })
    }

    /// Raw constructor; fails if the fields break the mantissa invariant.
    pub fn from_parts(xhat: BigUint, yhat: u64, exponent: u64, w: u32) -> Result<Self> {
        check_precision(w)?;
        if yhat == 0 || yhat >= 1u64 << (w + 1) {
            return Err(Error::invalid(format!("mantissa {yhat} out of range for w={w}")));
        }
        Ok(Self {
            xhat,
            yhat,
            exponent,
            precision: w,
        })
    }

    pub fn xhat(&self) -> &BigUint {
        &self.xhat
    }

    pub fn yhat(&self) -> u64 {
        self.yhat
    }

    /// `L`, the accumulated renormalization shift.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Total fractional bits `L + w` of the current representation.
    pub fn scale_bits(&self) -> u64 {
        self.exponent + self.precision as u64
    }

    /// Boundaries of all children of this interval.
    pub fn child_layout(&self, step: &QuantizedStep) -> Result<ChildLayout> {
        check_theta(step.theta(), self.precision)?;
        let m = step.m();
        let mut lower_offsets = Vec::with_capacity(m);
        let mut widths = Vec::with_capacity(m);
        let mut lo = 0u64;
        for j in 0..m {
            // The top boundary is ŷ exactly since F̂(a_m) = Θ.
            let hi = if j + 1 == m {
                self.yhat
            } else {
                boundary(self.yhat, step.cum_counts()[j], step.theta())
            };
            lower_offsets.push(lo);
            widths.push(hi - lo);
            lo = hi;
        }
        Ok(ChildLayout {
            lower_offsets,
            widths,
        })
    }

    /// Offset and width of child `j` only.
    pub(crate) fn child(&self, step: &QuantizedStep, j: usize) -> (u64, u64) {
        let lo = boundary(self.yhat, step.lower_cum(j), step.theta());
        let hi = if j + 1 == step.m() {
            self.yhat
        } else {
            boundary(self.yhat, step.cum_counts()[j], step.theta())
        };
        (lo, hi - lo)
    }

    /// Moves into child `j` and renormalizes.
    pub fn refine(&self, step: &QuantizedStep, j: usize) -> Result<FpaState> {
        let mut next = self.clone();
        next.refine_in_place(step, j, 0)?;
        Ok(next)
    }

    pub(crate) fn refine_in_place(&mut self, step: &QuantizedStep, j: usize, step_index: usize) -> Result<()> {
        check_theta(step.theta(), self.precision)?;
        if j >= step.m() {
            return Err(Error::invalid(format!(
                "symbol index {j} outside alphabet of size {}",
                step.m()
            )));
        }
        let (offset, width) = self.child(step, j);
        if width == 0 {
            return Err(Error::ZeroWidthChild {
                step: step_index,
                symbol: j,
            });
        }
        let v = renorm_shift(width, self.precision);
        self.xhat += offset;
        self.xhat <<= v as usize;
        self.yhat = width << v;
        self.exponent += v as u64;
        Ok(())
    }

    /// Exact `(x, y)` of the interval as rationals.
    pub fn interval_value(&self) -> (BigRational, BigRational) {
        let den = BigInt::one() << self.scale_bits() as usize;
        (
            BigRational::new(BigInt::from(self.xhat.clone()), den.clone()),
            BigRational::new(BigInt::from(self.yhat), den),
        )
    }
}
