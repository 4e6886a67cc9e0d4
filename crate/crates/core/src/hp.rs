//! Fixed-point high-precision arithmetic used for the lemma-check ratios and
//! for deriving the construction parameters y and z.
//!
//! Values are stored as `v / 10^SCALE` with `v` a big integer, giving 70
//! decimal digits of working precision (the reported quantities need 50).
//! Natural logarithms come from the atanh series after range reduction by
//! powers of two; exponentials from the Taylor series after halving the
//! argument below 1/2. Products over prime ranges are kept as exact big
//! rationals and only rendered through [`rational_decimal`], so they cannot
//! underflow no matter how long the range.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{Signed, ToPrimitive, Zero};
use std::sync::OnceLock;

/// Working precision in decimal digits.
pub const SCALE: u32 = 70;

fn one_scaled() -> &'static BigInt {
    static ONE: OnceLock<BigInt> = OnceLock::new();
    ONE.get_or_init(|| BigInt::from(10u32).pow(SCALE))
}

/// Rounding division: round(n / d) for positive d.
fn div_round(n: &BigInt, d: &BigInt) -> BigInt {
    debug_assert!(d.is_positive());
    let two_n = n * 2;
    let num = if n.is_negative() { two_n - d } else { two_n + d };
    num / (d * 2)
}

/// A fixed-point value v / 10^SCALE.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct HpFloat {
    v: BigInt,
}

impl HpFloat {
    pub fn zero() -> Self {
        HpFloat { v: BigInt::zero() }
    }

    pub fn from_u64(n: u64) -> Self {
        HpFloat {
            v: BigInt::from(n) * one_scaled(),
        }
    }

    /// Rounded conversion of an exact rational num/den.
    pub fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
        assert!(!den.is_zero());
        let n = BigInt::from_biguint(Sign::Plus, num * one_scaled().magnitude());
        HpFloat {
            v: div_round(&n, &BigInt::from_biguint(Sign::Plus, den.clone())),
        }
    }

    pub fn from_ratio_u64(num: u64, den: u64) -> Self {
        Self::from_ratio(&BigUint::from(num), &BigUint::from(den))
    }

    pub fn is_positive(&self) -> bool {
        self.v.is_positive()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        HpFloat { v: &self.v + &rhs.v }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        HpFloat { v: &self.v - &rhs.v }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        HpFloat {
            v: div_round(&(&self.v * &rhs.v), one_scaled()),
        }
    }

    pub fn div(&self, rhs: &Self) -> Self {
        assert!(!rhs.v.is_zero(), "division by zero");
        let scaled = &self.v * one_scaled();
        if rhs.v.is_negative() {
            HpFloat {
                v: div_round(&-scaled, &-rhs.v.clone()),
            }
        } else {
            HpFloat {
                v: div_round(&scaled, &rhs.v),
            }
        }
    }

    pub fn mul_u64(&self, n: u64) -> Self {
        HpFloat { v: &self.v * n }
    }

    pub fn div_u64(&self, n: u64) -> Self {
        HpFloat {
            v: div_round(&self.v, &BigInt::from(n)),
        }
    }

    fn half(&self) -> Self {
        HpFloat {
            v: div_round(&self.v, &BigInt::from(2)),
        }
    }

    /// Natural logarithm; requires a strictly positive value.
    ///
    /// Reduce to t in [1, 2) by powers of two, then
    /// ln t = 2 atanh((t-1)/(t+1)) with |w| <= 1/3, one digit per term.
    pub fn ln(&self) -> Self {
        assert!(self.v.is_positive(), "ln of non-positive value");
        let one = HpFloat { v: one_scaled().clone() };
        let two = one.add(&one);
        let mut t = self.clone();
        let mut exponent = 0i64;
        while t >= two {
            t = t.half();
            exponent += 1;
        }
        while t < one {
            t = HpFloat { v: &t.v * 2 };
            exponent -= 1;
        }
        let w = t.sub(&one).div(&t.add(&one));
        let w2 = w.mul(&w);
        let mut term = w.clone();
        let mut sum = w;
        let mut n = 1u64;
        while !term.v.is_zero() {
            term = term.mul(&w2);
            n += 2;
            sum = sum.add(&term.div_u64(n));
        }
        let mut result = HpFloat { v: sum.v * 2 };
        if exponent != 0 {
            let ln2 = ln_two();
            let shift = HpFloat {
                v: &ln2.v * BigInt::from(exponent),
            };
            result = result.add(&shift);
        }
        result
    }

    /// e^x via Taylor series after halving the argument below 1/2.
    pub fn exp(&self) -> Self {
        let one = HpFloat { v: one_scaled().clone() };
        if self.v.is_negative() {
            let pos = HpFloat { v: -self.v.clone() };
            return one.div(&pos.exp());
        }
        let mut t = self.clone();
        let mut halvings = 0u32;
        let half_one = one.half();
        while t > half_one {
            t = t.half();
            halvings += 1;
        }
        let mut term = t.clone();
        let mut sum = one.add(&t);
        let mut n = 1u64;
        while !term.v.is_zero() {
            n += 1;
            term = term.mul(&t).div_u64(n);
            sum = sum.add(&term);
        }
        for _ in 0..halvings {
            sum = sum.mul(&sum);
        }
        sum
    }

    /// Largest integer <= self, for non-negative values.
    pub fn floor_u64(&self) -> u64 {
        assert!(!self.v.is_negative());
        (&self.v / one_scaled()).to_u64().expect("floor fits u64")
    }

    pub fn to_f64(&self) -> f64 {
        // split to keep the conversion inside f64 range for typical magnitudes
        let int = &self.v / one_scaled();
        let frac = &self.v - &int * one_scaled();
        int.to_f64().unwrap_or(f64::NAN) + frac.to_f64().unwrap_or(0.0) / 10f64.powi(SCALE as i32)
    }

    /// Decimal rendering with `sig` significant digits.
    pub fn to_decimal(&self, sig: usize) -> String {
        if self.v.is_zero() {
            return "0".to_string();
        }
        let (prefix, magnitude) = if self.v.is_negative() {
            ("-", self.v.magnitude().clone())
        } else {
            ("", self.v.magnitude().clone())
        };
        format!(
            "{prefix}{}",
            rational_decimal(&magnitude, one_scaled().magnitude(), sig)
        )
    }
}

/// ln 2 = 2 atanh(1/3), cached.
fn ln_two() -> &'static HpFloat {
    static LN2: OnceLock<HpFloat> = OnceLock::new();
    LN2.get_or_init(|| {
        let w = HpFloat::from_ratio_u64(1, 3);
        let w2 = w.mul(&w);
        let mut term = w.clone();
        let mut sum = w;
        let mut n = 1u64;
        while !term.v.is_zero() {
            term = term.mul(&w2);
            n += 2;
            sum = sum.add(&term.div_u64(n));
        }
        HpFloat { v: sum.v * 2 }
    })
}

/// ln of an integer.
pub fn ln_u64(n: u64) -> HpFloat {
    HpFloat::from_u64(n).ln()
}

/// Render the positive rational num/den with `sig` significant digits,
/// rounded half-up, as a plain decimal (scientific form only for extreme
/// magnitudes).
pub fn rational_decimal(num: &BigUint, den: &BigUint, sig: usize) -> String {
    assert!(!den.is_zero() && sig >= 1);
    if num.is_zero() {
        return "0".to_string();
    }
    let ten = BigUint::from(10u32);
    let pow10 = |k: u64| ten.pow(k as u32);
    // decimal exponent e: 10^e <= num/den < 10^{e+1}
    let mut e = ((num.bits() as i64 - den.bits() as i64) as f64 * std::f64::consts::LOG10_2)
        .floor() as i64;
    let at_least = |e: i64| {
        if e >= 0 {
            *num >= den * pow10(e as u64)
        } else {
            num * pow10((-e) as u64) >= *den
        }
    };
    while at_least(e + 1) {
        e += 1;
    }
    while !at_least(e) {
        e -= 1;
    }
    // round(num/den * 10^{sig-1-e}) gives exactly sig digits (or sig+1 on carry)
    let shift = sig as i64 - 1 - e;
    let (n2, d2) = if shift >= 0 {
        (num * pow10(shift as u64), den.clone())
    } else {
        (num.clone(), den * pow10((-shift) as u64))
    };
    let mut digits = ((&n2 * 2u32 + &d2) / (d2 * 2u32)).to_string();
    if digits.len() > sig {
        digits.truncate(sig);
        e += 1;
    }
    // place the decimal point
    if e >= 0 && (e as usize) < sig.max(21) && (e as usize) < digits.len() + 20 {
        let int_len = e as usize + 1;
        if int_len >= digits.len() {
            digits.push_str(&"0".repeat(int_len - digits.len()));
            digits
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    } else if e < 0 && e >= -8 {
        format!("0.{}{}", "0".repeat((-e - 1) as usize), digits)
    } else {
        let mantissa = if digits.len() > 1 {
            format!("{}.{}", &digits[..1], &digits[1..])
        } else {
            digits
        };
        format!("{mantissa}e{e}")
    }
}
