//! Fixed-point codec over the ring `Z_{2^64}`.
//!
//! Real-valued gradients are scaled by `2^20` and embedded in `u64` with
//! two's-complement sign. Ring addition is exact, so every protocol that
//! aggregates encoded gradients produces bit-identical sums regardless of
//! accumulation strategy.

use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// log2 of the scaling factor.
pub const SCALE_BITS: u32 = 20;
/// Scaling factor applied before rounding.
pub const SCALE: f64 = (1u64 << SCALE_BITS) as f64;
/// Largest magnitude accepted by [`Fx::encode`].
pub const MAX_ENCODABLE: f64 = (1u64 << 40) as f64;

/// A ring element of `Z_{2^64}` carrying a fixed-point real.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Fx(pub u64);

impl Fx {
    pub const ZERO: Fx = Fx(0);

    /// Encode a real into the ring. Fails for `|x| > 2^40`.
    pub fn encode(x: f64) -> Result<Fx> {
        if !x.is_finite() || x.abs() > MAX_ENCODABLE {
            return Err(Error::FixedOverflow(x));
        }
        Ok(Fx(((x * SCALE).round() as i64) as u64))
    }

    /// Decode via signed reinterpretation of the ring element.
    pub fn decode(self) -> f64 {
        (self.0 as i64) as f64 / SCALE
    }

    /// Signed integer image of the ring element.
    pub fn signed(self) -> i64 {
        self.0 as i64
    }
}

impl Add for Fx {
    type Output = Fx;
    fn add(self, rhs: Fx) -> Fx {
        Fx(self.0.wrapping_add(rhs.0))
    }
}

impl AddAssign for Fx {
    fn add_assign(&mut self, rhs: Fx) {
        self.0 = self.0.wrapping_add(rhs.0);
    }
}

impl Sub for Fx {
    type Output = Fx;
    fn sub(self, rhs: Fx) -> Fx {
        Fx(self.0.wrapping_sub(rhs.0))
    }
}

impl SubAssign for Fx {
    fn sub_assign(&mut self, rhs: Fx) {
        self.0 = self.0.wrapping_sub(rhs.0);
    }
}

impl Neg for Fx {
    type Output = Fx;
    fn neg(self) -> Fx {
        Fx(self.0.wrapping_neg())
    }
}

impl Sum for Fx {
    fn sum<I: Iterator<Item = Fx>>(iter: I) -> Fx {
        iter.fold(Fx::ZERO, |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_round_trips() {
        assert_eq!(Fx::encode(0.0).unwrap(), Fx(0));
        assert_eq!(Fx(0).decode(), 0.0);
    }

    #[test]
    fn minus_one_is_twos_complement() {
        let fx = Fx::encode(-1.0).unwrap();
        assert_eq!(fx.0, 0u64.wrapping_sub(1 << SCALE_BITS));
        assert_eq!(fx.decode(), -1.0);
    }

    #[test]
    fn encode_rejects_out_of_range() {
        assert!(Fx::encode(MAX_ENCODABLE * 2.0).is_err());
        assert!(Fx::encode(f64::NAN).is_err());
        assert!(Fx::encode(f64::INFINITY).is_err());
    }

    #[test]
    fn accumulated_error_stays_within_quantization() {
        // Sum of 1e5 encodings of 0.2 decodes within 1e5 * 2^-20 of 2e4.
        let one = Fx::encode(0.2).unwrap();
        let total: Fx = (0..100_000).map(|_| one).sum();
        let err = (total.decode() - 20_000.0).abs();
        assert!(err <= 100_000.0 / SCALE, "error {err} too large");
    }

    #[test]
    fn ring_addition_wraps() {
        let a = Fx(u64::MAX);
        let b = Fx(1);
        assert_eq!(a + b, Fx(0));
        assert_eq!(Fx(0) - Fx(1), Fx(u64::MAX));
    }

    #[test]
    fn round_trip_error_is_below_one_quantum() {
        let mut x = -(MAX_ENCODABLE) + 0.1234;
        while x < MAX_ENCODABLE {
            let err = (Fx::encode(x).unwrap().decode() - x).abs();
            assert!(err <= 1.0 / SCALE, "x={x} err={err}");
            x += MAX_ENCODABLE / 7.3;
        }
    }
}
