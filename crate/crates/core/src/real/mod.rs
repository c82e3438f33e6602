//! High-precision reals and the special functions built on them.
//!
//! [`PrecReal`] is a binary fixed-point number: an arbitrary-precision
//! integer mantissa scaled by `2^-bits`. Every contract in this crate is an
//! absolute-error contract, which is exactly what fixed point gives for free.
//! [`Ball`] pairs a midpoint with a certified radius and is what the
//! evaluators compute with internally.

mod ball;
mod consts;
mod special;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use ball::Ball;
pub use consts::{const_ln2, const_pi, ln2_ball, ln_ball, pi_ball};
pub(crate) use special::digamma_shifted_plus_gamma;
pub use special::{
    beta_int, digamma, digamma_ball, euler_gamma, euler_gamma_ball, hurwitz_ball, hurwitz_zeta,
    power_log_tail, zeta_ball, zeta_int,
};

/// Smallest working precision ever used.
pub const MIN_BITS: u32 = 64;
pub const MAX_DIGITS: u32 = 10_000;

/// Target number of correct decimal places (absolute accuracy).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionRequest {
    digits: u32,
}

impl PrecisionRequest {
    pub fn new(digits: u32) -> Result<Self> {
        if digits == 0 || digits > MAX_DIGITS {
            return Err(Error::invalid(format!(
                "digits must be in 1..={MAX_DIGITS} (got {digits})"
            )));
        }
        Ok(PrecisionRequest { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// `ceil(digits * log2(10)) + 32`.
    pub fn guard_bits(&self) -> u32 {
        guard_bits(self.digits)
    }

    /// `10^-digits` at guard precision.
    pub fn tolerance(&self) -> PrecReal {
        PrecReal::pow10_neg(self.digits, self.guard_bits())
    }
}

pub(crate) fn guard_bits(digits: u32) -> u32 {
    // log2(10) < 3.3219280949, so this never undershoots.
    let bits = (digits as u64 * 33_219_280_949u64).div_ceil(10_000_000_000u64) as u32;
    (bits + 32).max(MIN_BITS)
}

/// `mant * 2^-bits`.
#[derive(Clone, Debug)]
pub struct PrecReal {
    mant: BigInt,
    bits: u32,
}

fn pow2(k: u32) -> BigInt {
    BigInt::one() << k as usize
}

/// Nearest-integer quotient; ties go up. `d` must be non-zero.
pub(crate) fn div_nearest(n: &BigInt, d: &BigInt) -> BigInt {
    let (n, d) = if d.is_negative() {
        (-n, -d)
    } else {
        (n.clone(), d.clone())
    };
    (n * BigInt::from(2) + &d).div_floor(&(d * BigInt::from(2)))
}

pub(crate) fn div_ceil(n: &BigInt, d: &BigInt) -> BigInt {
    let (n, d) = if d.is_negative() {
        (-n, -d)
    } else {
        (n.clone(), d.clone())
    };
    -((-n).div_floor(&d))
}

fn rescale(mant: &BigInt, from: u32, to: u32) -> BigInt {
    match to.cmp(&from) {
        Ordering::Equal => mant.clone(),
        Ordering::Greater => mant << (to - from) as usize,
        Ordering::Less => div_nearest(mant, &pow2(from - to)),
    }
}

impl PrecReal {
    pub fn zero(bits: u32) -> Self {
        PrecReal {
            mant: BigInt::zero(),
            bits: bits.max(MIN_BITS),
        }
    }

    pub fn from_int(v: impl Into<BigInt>, bits: u32) -> Self {
        let bits = bits.max(MIN_BITS);
        PrecReal {
            mant: v.into() << bits as usize,
            bits,
        }
    }

    pub(crate) fn from_mant(mant: BigInt, bits: u32) -> Self {
        debug_assert!(bits >= MIN_BITS);
        PrecReal { mant, bits }
    }

    /// One unit in the last place at `bits`.
    pub fn ulp(bits: u32) -> Self {
        PrecReal::from_mant(BigInt::one(), bits.max(MIN_BITS))
    }

    /// Rounds `q` to nearest; the flag reports whether the conversion was exact.
    pub fn from_rational_exactness(q: &BigRational, bits: u32) -> (Self, bool) {
        let bits = bits.max(MIN_BITS);
        let scaled = q.numer() << bits as usize;
        let (quot, rem) = scaled.div_rem(q.denom());
        if rem.is_zero() {
            (PrecReal::from_mant(quot, bits), true)
        } else {
            (
                PrecReal::from_mant(div_nearest(&scaled, q.denom()), bits),
                false,
            )
        }
    }

    pub fn from_rational(q: &BigRational, bits: u32) -> Self {
        Self::from_rational_exactness(q, bits).0
    }

    /// Smallest representable value `>= q`.
    pub fn from_rational_ceil(q: &BigRational, bits: u32) -> Self {
        let bits = bits.max(MIN_BITS);
        PrecReal::from_mant(div_ceil(&(q.numer() << bits as usize), q.denom()), bits)
    }

    /// `10^-digits`, rounded to nearest.
    pub fn pow10_neg(digits: u32, bits: u32) -> Self {
        let q = BigRational::new(BigInt::one(), BigInt::from(10u32).pow(digits));
        PrecReal::from_rational(&q, bits)
    }

    pub fn precision_bits(&self) -> u32 {
        self.bits
    }

    pub fn with_bits(&self, bits: u32) -> Self {
        let bits = bits.max(MIN_BITS);
        PrecReal::from_mant(rescale(&self.mant, self.bits, bits), bits)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mant.clone(), pow2(self.bits))
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn abs(&self) -> Self {
        PrecReal::from_mant(self.mant.abs(), self.bits)
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, u32) {
        let bits = self.bits.max(other.bits);
        (
            rescale(&self.mant, self.bits, bits),
            rescale(&other.mant, other.bits, bits),
            bits,
        )
    }

    /// Product rounded up (towards +inf).
    pub fn mul_ceil(&self, other: &Self) -> Self {
        let (a, b, bits) = self.aligned(other);
        PrecReal::from_mant(div_ceil(&(a * b), &pow2(bits)), bits)
    }

    /// Quotient rounded to nearest. Panics on division by zero.
    pub fn div(&self, other: &Self) -> Self {
        let (a, b, bits) = self.aligned(other);
        assert!(!b.is_zero(), "PrecReal division by zero");
        PrecReal::from_mant(div_nearest(&(a << bits as usize), &b), bits)
    }

    pub fn mul_rational(&self, q: &BigRational) -> Self {
        PrecReal::from_mant(div_nearest(&(&self.mant * q.numer()), q.denom()), self.bits)
    }

    /// `self * |q|` rounded up; for non-negative radii.
    pub fn mul_rational_ceil(&self, q: &BigRational) -> Self {
        PrecReal::from_mant(
            div_ceil(&(&self.mant * q.numer().abs()), q.denom()),
            self.bits,
        )
    }

    pub fn mul_int(&self, k: impl Into<BigInt>) -> Self {
        PrecReal::from_mant(&self.mant * k.into(), self.bits)
    }

    /// Divides a tolerance by `factor`, widening the precision so the result
    /// keeps the same number of significant guard bits.
    pub fn shrink(&self, factor: u64) -> Self {
        let extra = 64 - factor.max(1).leading_zeros();
        let bits = self.bits + extra;
        let mant = rescale(&self.mant, self.bits, bits);
        PrecReal::from_mant(div_nearest(&mant, &BigInt::from(factor.max(1))), bits)
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Approximate `log2(|self|)`; `None` for zero.
    pub fn log2_approx(&self) -> Option<f64> {
        if self.mant.is_zero() {
            return None;
        }
        let mag = self.mant.magnitude();
        let nbits = mag.bits();
        let shift = nbits.saturating_sub(60);
        let top = (mag >> shift as usize).to_f64().unwrap();
        Some(top.log2() + shift as f64 - self.bits as f64)
    }

    pub fn to_f64(&self) -> f64 {
        let nbits = self.mant.bits();
        let shift = nbits.saturating_sub(60);
        let top = (&self.mant >> shift as usize).to_f64().unwrap_or(0.0);
        top * (shift as f64 - self.bits as f64).exp2()
    }

    /// Decimal string with exactly `digits` places after the point, rounded
    /// half-to-even. Never uses exponent notation.
    pub fn to_decimal(&self, digits: u32) -> String {
        let scaled = &self.mant * BigInt::from(10u32).pow(digits);
        let den = pow2(self.bits);
        let (q, r) = scaled.div_mod_floor(&den);
        let twice: BigInt = r * BigInt::from(2);
        let q = match twice.cmp(&den) {
            Ordering::Less => q,
            Ordering::Greater => q + 1,
            Ordering::Equal => {
                if q.is_even() {
                    q
                } else {
                    q + 1
                }
            }
        };
        let neg = q.is_negative();
        let mut s = q.magnitude().to_string();
        let d = digits as usize;
        if s.len() <= d {
            s = format!("{}{}", "0".repeat(d + 1 - s.len()), s);
        }
        let (int_part, frac_part) = s.split_at(s.len() - d);
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(int_part);
        if d > 0 {
            out.push('.');
            out.push_str(frac_part);
        }
        out
    }

    /// Short scientific rendering for error bounds, rounded up, e.g. `"3.2e-27"`.
    pub fn to_sci_upper(&self) -> String {
        if self.mant.is_zero() {
            return "0".to_string();
        }
        let q = self.to_rational().abs();
        // exponent e with 10^e <= q < 10^(e+1)
        let mut e = (q.numer().bits() as i64 - q.denom().bits() as i64) * 30103 / 100_000;
        let ten = BigRational::from_integer(BigInt::from(10));
        let pow = |k: i64| ten.pow(k as i32);
        while pow(e) > q {
            e -= 1;
        }
        while pow(e + 1) <= q {
            e += 1;
        }
        let mant = (&q / pow(e - 1)).ceil().to_integer();
        let mut m = mant.to_u64().unwrap_or(100);
        if m >= 100 {
            m = 10;
            e += 1;
        }
        let sign = if self.is_negative() { "-" } else { "" };
        format!("{sign}{}.{}e{}", m / 10, m % 10, e)
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }
}

impl PartialEq for PrecReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for PrecReal {}

impl PartialOrd for PrecReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PrecReal {
    fn cmp(&self, other: &Self) -> Ordering {
        let bits = self.bits.max(other.bits);
        let a = &self.mant << (bits - self.bits) as usize;
        let b = &other.mant << (bits - other.bits) as usize;
        a.cmp(&b)
    }
}

impl fmt::Display for PrecReal {
    /// Prints with as many decimals as the precision supports.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = match f.precision() {
            Some(p) => p as u32,
            None => (self.bits.saturating_sub(32) as u64 * 30103 / 100_000) as u32,
        };
        f.write_str(&self.to_decimal(digits))
    }
}

impl Add for &PrecReal {
    type Output = PrecReal;
    fn add(self, rhs: &PrecReal) -> PrecReal {
        let (a, b, bits) = self.aligned(rhs);
        PrecReal::from_mant(a + b, bits)
    }
}

impl Sub for &PrecReal {
    type Output = PrecReal;
    fn sub(self, rhs: &PrecReal) -> PrecReal {
        let (a, b, bits) = self.aligned(rhs);
        PrecReal::from_mant(a - b, bits)
    }
}

impl Mul for &PrecReal {
    type Output = PrecReal;
    fn mul(self, rhs: &PrecReal) -> PrecReal {
        let (a, b, bits) = self.aligned(rhs);
        PrecReal::from_mant(div_nearest(&(a * b), &pow2(bits)), bits)
    }
}

impl Neg for &PrecReal {
    type Output = PrecReal;
    fn neg(self) -> PrecReal {
        PrecReal::from_mant(-&self.mant, self.bits)
    }
}

macro_rules! forward_owned {
    ($t:ty, $($tr:ident $m:ident),*) => {$(
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t { (&self).$m(&rhs) }
        }
        impl $tr<&$t> for $t {
            type Output = $t;
            fn $m(self, rhs: &$t) -> $t { (&self).$m(rhs) }
        }
        impl $tr<$t> for &$t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t { self.$m(&rhs) }
        }
    )*};
}
pub(crate) use forward_owned;

forward_owned!(PrecReal, Add add, Sub sub, Mul mul);

impl Neg for PrecReal {
    type Output = PrecReal;
    fn neg(self) -> PrecReal {
        -&self
    }
}

/// Upper bound of `|q|` for a polynomial in Euler's constant, using
/// `0 <= γ < 0.5773`.
pub(crate) fn gamma_upper() -> BigRational {
    BigRational::new(BigInt::from(5773), BigInt::from(10_000))
}

pub(crate) fn biguint_rat(v: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}
