//! Fixed-point decimal arithmetic on big integers.
//!
//! Asymptotic expressions need real-number evaluation but the rest of the
//! crate is exact, so floating point would be an odd neighbor: instead this
//! module computes with integers scaled by `10^60` and rounds explicitly.
//! Sixty digits of working precision leave a wide margin over the thirty
//! digits the command-line interface prints; growth-rate powers consume at
//! most a digit or two of that margin at the ranges we evaluate.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::sync::OnceLock;

/// Number of decimal digits after the point in the fixed-point scale.
pub const SCALE_DIGITS: u32 = 60;

fn scale() -> &'static BigInt {
    static SCALE: OnceLock<BigInt> = OnceLock::new();
    SCALE.get_or_init(|| BigInt::from(10).pow(SCALE_DIGITS))
}

/// A real number represented as `value / 10^60`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Fixed {
    value: BigInt,
}

impl Fixed {
    pub fn zero() -> Self {
        Fixed { value: BigInt::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Fixed { value: BigInt::from(n) * scale() }
    }

    pub fn from_bigint(n: &BigInt) -> Self {
        Fixed { value: n * scale() }
    }

    /// Rounds an exact rational to the fixed-point grid (half away from
    /// zero).
    pub fn from_ratio(r: &BigRational) -> Self {
        let scaled = r.numer() * scale();
        let (mut q, rem) = scaled.div_rem(r.denom());
        if &rem.abs() * 2 >= r.denom().abs() {
            if (scaled.sign() == Sign::Minus) != (r.denom().sign() == Sign::Minus) {
                q -= 1;
            } else {
                q += 1;
            }
        }
        Fixed { value: q }
    }

    pub fn add(&self, other: &Fixed) -> Fixed {
        Fixed { value: &self.value + &other.value }
    }

    pub fn sub(&self, other: &Fixed) -> Fixed {
        Fixed { value: &self.value - &other.value }
    }

    pub fn neg(&self) -> Fixed {
        Fixed { value: -&self.value }
    }

    pub fn mul(&self, other: &Fixed) -> Fixed {
        Fixed { value: round_div(&(&self.value * &other.value), scale()) }
    }

    pub fn mul_int(&self, k: i64) -> Fixed {
        Fixed { value: &self.value * BigInt::from(k) }
    }

    /// Division, rounding to the grid. Panics on zero divisor; callers
    /// divide by structurally nonzero quantities.
    pub fn div(&self, other: &Fixed) -> Fixed {
        assert!(!other.value.is_zero(), "fixed-point division by zero");
        Fixed { value: round_div(&(&self.value * scale()), &other.value) }
    }

    pub fn div_int(&self, k: i64) -> Fixed {
        Fixed { value: round_div(&self.value, &BigInt::from(k)) }
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative()
    }

    /// Integer-Newton square root of a nonnegative value.
    pub fn sqrt(&self) -> Fixed {
        assert!(!self.value.is_negative(), "sqrt of negative fixed-point value");
        Fixed { value: (&self.value * scale()).sqrt() }
    }

    /// `self^e` by binary exponentiation; each multiplication rounds once.
    pub fn powi(&self, mut e: u64) -> Fixed {
        let mut acc = Fixed::from_int(1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Decimal rendering with the given number of fractional digits
    /// (rounded, at most [`SCALE_DIGITS`]).
    pub fn to_decimal_string(&self, digits: u32) -> String {
        assert!(digits <= SCALE_DIGITS);
        let drop = BigInt::from(10).pow(SCALE_DIGITS - digits);
        let v = round_div(&self.value, &drop);
        let base = BigInt::from(10).pow(digits);
        let (q, r) = v.abs().div_rem(&base);
        let sign = if v.is_negative() { "-" } else { "" };
        if digits == 0 {
            return format!("{sign}{q}");
        }
        format!("{sign}{q}.{:0width$}", r, width = digits as usize)
    }

    /// Approximate f64 view, for coarse sanity checks only.
    pub fn to_f64(&self) -> f64 {
        let approx = BigRational::new(self.value.clone(), scale().clone());
        approx.to_f64().unwrap_or(f64::NAN)
    }
}

/// Rounded integer division, half away from zero.
fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    let (q, r) = num.div_rem(den);
    if &r.abs() * 2 >= den.abs() {
        if num.is_negative() != den.is_negative() {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    }
}

/// Pi to the working precision, by Machin's formula
/// `pi = 16 atan(1/5) - 4 atan(1/239)` with a couple of guard digits.
pub fn pi() -> &'static Fixed {
    static PI: OnceLock<Fixed> = OnceLock::new();
    PI.get_or_init(|| {
        let guard = BigInt::from(10).pow(SCALE_DIGITS + 10);
        let total = &atan_inv_scaled(5, &guard) * 16 - &atan_inv_scaled(239, &guard) * 4;
        Fixed { value: round_div(&total, &BigInt::from(10).pow(10)) }
    })
}

/// `atan(1/k) * guard_scale` by the alternating series, run until terms
/// vanish at the guard scale.
fn atan_inv_scaled(k: i64, guard_scale: &BigInt) -> BigInt {
    let kk = BigInt::from(k) * BigInt::from(k);
    let mut term = guard_scale / BigInt::from(k);
    let mut sum = term.clone();
    let mut n = 1u32;
    loop {
        term /= &kk;
        if term.is_zero() {
            break;
        }
        let piece = &term / BigInt::from(2 * n + 1);
        if n % 2 == 1 {
            sum -= piece;
        } else {
            sum += piece;
        }
        n += 1;
    }
    sum
}

/// `sqrt(5)`, a recurring constant in the growth rates.
pub fn sqrt5() -> &'static Fixed {
    static S: OnceLock<Fixed> = OnceLock::new();
    S.get_or_init(|| Fixed::from_int(5).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_thirty_digits() {
        let half = Fixed::from_ratio(&BigRational::new(BigInt::from(1), BigInt::from(2)));
        assert_eq!(half.to_decimal_string(3), "0.500");
        assert_eq!(
            half.to_decimal_string(30),
            "0.500000000000000000000000000000"
        );
    }

    #[test]
    fn sqrt_matches_known_digits() {
        let s = Fixed::from_int(2).sqrt();
        assert_eq!(
            s.to_decimal_string(30),
            "1.414213562373095048801688724210"
        );
    }

    #[test]
    fn pi_matches_known_digits() {
        assert_eq!(
            pi().to_decimal_string(30),
            "3.141592653589793238462643383280"
        );
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        let r = BigRational::new(BigInt::from(5), BigInt::from(1000));
        let f = Fixed::from_ratio(&r);
        assert_eq!(f.to_decimal_string(2), "0.01");
        let neg = Fixed::from_ratio(&-r);
        assert_eq!(neg.to_decimal_string(2), "-0.01");
    }

    #[test]
    fn powers_stay_precise() {
        // ((3+sqrt 5)/2)^20 against an independently computed value:
        // (3+sqrt5)/2 is the square of the golden ratio, so the power is
        // phi^40 = (fib(40)*sqrt5 + lucas(40))/2 with fib/lucas exact.
        let phi2 = Fixed::from_int(3).add(sqrt5()).div_int(2);
        let p = phi2.powi(20);
        let fib40 = BigInt::from(102_334_155u64);
        let lucas40 = BigInt::from(228_826_127u64);
        let exact = Fixed::from_bigint(&fib40).mul(sqrt5()).add(&Fixed::from_bigint(&lucas40)).div_int(2);
        let diff = p.sub(&exact);
        let tolerance = Fixed { value: BigInt::from(10).pow(10) };
        assert!(diff.value.abs() < tolerance.value, "drift {diff:?}");
    }
}
