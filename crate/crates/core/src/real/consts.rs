use std::collections::HashMap;
use std::sync::{LazyLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{div_nearest, Ball, PrecReal, PrecisionRequest, MIN_BITS};

const EXTRA: u32 = 16;

/// `Σ_{i>=0} s^i z^(2i+1)/(2i+1)` for `z = p/q` with `|z| <= 1/2`, where the
/// sign factor `s` is `+1` for atanh and `-1` for atan.
fn odd_series(p: &BigInt, q: &BigInt, alternating: bool, bits: u32) -> Ball {
    let work = bits + EXTRA;
    let p2 = p * p;
    let q2 = q * q;
    let mut t = div_nearest(&(p << work as usize), q);
    let mut sum = t.clone();
    let mut count: u64 = 1;
    let mut i: u64 = 1;
    while !t.is_zero() {
        t = div_nearest(&(&t * &p2), &q2);
        let term = div_nearest(&t, &BigInt::from(2 * i + 1));
        if alternating && i % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        count += 1;
        i += 1;
    }
    // Each partial power carries < 1 unit of accumulated rounding and each
    // quotient adds 1/2; the truncated tail is below 2 units since |z| <= 1/2.
    let rad_work = BigInt::from(2 * count + 4);
    let shift = BigInt::one() << EXTRA as usize;
    let mid = div_nearest(&sum, &shift);
    let rad = (rad_work + &shift - 1u32) / &shift + 1u32;
    Ball::new(
        PrecReal::from_mant(mid, bits),
        PrecReal::from_mant(rad, bits),
    )
}

static LN2_CACHE: LazyLock<RwLock<HashMap<u32, Ball>>> = LazyLock::new(Default::default);
static PI_CACHE: LazyLock<RwLock<HashMap<u32, Ball>>> = LazyLock::new(Default::default);

fn cached(cache: &RwLock<HashMap<u32, Ball>>, bits: u32, f: impl FnOnce() -> Ball) -> Ball {
    if let Some(b) = cache.read().unwrap().get(&bits) {
        return b.clone();
    }
    let b = f();
    cache.write().unwrap().insert(bits, b.clone());
    b
}

/// `ln 2 = 2 atanh(1/3)`.
pub fn ln2_ball(bits: u32) -> Ball {
    let bits = bits.max(MIN_BITS);
    cached(&LN2_CACHE, bits, || {
        odd_series(&BigInt::one(), &BigInt::from(3), false, bits).mul_int(2)
    })
}

/// Machin: `π = 16 atan(1/5) - 4 atan(1/239)`.
pub fn pi_ball(bits: u32) -> Ball {
    let bits = bits.max(MIN_BITS);
    cached(&PI_CACHE, bits, || {
        let w = bits + 8;
        let a = odd_series(&BigInt::one(), &BigInt::from(5), true, w).mul_int(16);
        let b = odd_series(&BigInt::one(), &BigInt::from(239), true, w).mul_int(4);
        (&a - &b).with_bits(bits)
    })
}

/// Natural logarithm of a positive rational.
///
/// Writes `x = 2^k y` with `1 <= y < 2`, then `ln x = k ln 2 + 2 atanh((y-1)/(y+1))`.
pub fn ln_ball(x: &BigRational, bits: u32) -> Ball {
    assert!(x.is_positive(), "ln of a non-positive number");
    let bits = bits.max(MIN_BITS);
    let (num, den) = (x.numer().clone(), x.denom().clone());
    let mut k = num.bits() as i64 - den.bits() as i64;
    let (mut a, mut b) = if k >= 0 {
        (num.clone(), &den << k as usize)
    } else {
        (&num << (-k) as usize, den.clone())
    };
    if a < b {
        k -= 1;
        a <<= 1;
    }
    debug_assert!(a >= b && a < &b * 2);
    let g = (&a - &b).gcd(&(&a + &b));
    let (p, q) = ((&a - &b) / &g, (&a + &b) / &g);
    b = q;
    let extra = 66 - (k.unsigned_abs() + 1).leading_zeros();
    let w = bits + extra;
    let mut acc = odd_series(&p, &b, false, w).mul_int(2);
    if k != 0 {
        acc = &acc + &ln2_ball(w).mul_int(k);
    }
    acc.with_bits(bits)
}

pub fn const_pi(req: &PrecisionRequest) -> PrecReal {
    pi_ball(req.guard_bits()).mid
}

pub fn const_ln2(req: &PrecisionRequest) -> PrecReal {
    ln2_ball(req.guard_bits()).mid
}
