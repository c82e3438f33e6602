use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use super::{forward_owned, PrecReal};

/// Midpoint-radius enclosure: the true value lies in `[mid - rad, mid + rad]`.
///
/// Every operation widens the radius by whatever rounding it performed, so a
/// ball built from certified inputs stays certified.
#[derive(Clone, Debug)]
pub struct Ball {
    pub mid: PrecReal,
    pub rad: PrecReal,
}

impl Ball {
    pub fn new(mid: PrecReal, rad: PrecReal) -> Self {
        debug_assert!(!rad.is_negative());
        Ball { mid, rad }
    }

    pub fn exact(mid: PrecReal) -> Self {
        let bits = mid.precision_bits();
        Ball {
            mid,
            rad: PrecReal::zero(bits),
        }
    }

    pub fn zero(bits: u32) -> Self {
        Ball::exact(PrecReal::zero(bits))
    }

    pub fn from_int(v: impl Into<BigInt>, bits: u32) -> Self {
        Ball::exact(PrecReal::from_int(v, bits))
    }

    pub fn from_rational(q: &BigRational, bits: u32) -> Self {
        let (mid, exact) = PrecReal::from_rational_exactness(q, bits);
        let bits = mid.precision_bits();
        let rad = if exact {
            PrecReal::zero(bits)
        } else {
            PrecReal::ulp(bits)
        };
        Ball { mid, rad }
    }

    pub fn bits(&self) -> u32 {
        self.mid.precision_bits().max(self.rad.precision_bits())
    }

    /// `|mid| + rad`, an upper bound on the magnitude.
    pub fn abs_upper(&self) -> PrecReal {
        &self.mid.abs() + &self.rad
    }

    pub fn lower(&self) -> PrecReal {
        &self.mid - &self.rad
    }

    pub fn upper(&self) -> PrecReal {
        &self.mid + &self.rad
    }

    pub fn add_error(mut self, err: &PrecReal) -> Self {
        self.rad = &self.rad + &err.abs();
        self
    }

    pub fn mul_rational(&self, q: &BigRational) -> Self {
        let mid = self.mid.mul_rational(q);
        let bits = mid.precision_bits();
        let rad = &self.rad.mul_rational_ceil(q) + &PrecReal::ulp(bits);
        Ball { mid, rad }
    }

    pub fn mul_int(&self, k: impl Into<BigInt>) -> Self {
        let k = k.into();
        Ball {
            mid: self.mid.mul_int(k.clone()),
            rad: self.rad.mul_int(k.abs()),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Ball::from_int(1, self.bits());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Does `[mid - rad, mid + rad]` contain `v`?
    pub fn contains(&self, v: &PrecReal) -> bool {
        (&self.mid - v).abs() <= self.rad
    }

    pub fn with_bits(&self, bits: u32) -> Self {
        let mid = self.mid.with_bits(bits);
        let mut rad = self.rad.with_bits(bits);
        if mid != self.mid {
            rad = &rad + &PrecReal::ulp(mid.precision_bits());
        }
        if rad < self.rad {
            rad = &rad + &PrecReal::ulp(mid.precision_bits());
        }
        Ball { mid, rad }
    }
}

impl Add for &Ball {
    type Output = Ball;
    fn add(self, rhs: &Ball) -> Ball {
        Ball {
            mid: &self.mid + &rhs.mid,
            rad: &self.rad + &rhs.rad,
        }
    }
}

impl Sub for &Ball {
    type Output = Ball;
    fn sub(self, rhs: &Ball) -> Ball {
        Ball {
            mid: &self.mid - &rhs.mid,
            rad: &self.rad + &rhs.rad,
        }
    }
}

impl Mul for &Ball {
    type Output = Ball;
    fn mul(self, rhs: &Ball) -> Ball {
        let mid = &self.mid * &rhs.mid;
        let bits = mid.precision_bits();
        let rad = &(&self.mid.abs().mul_ceil(&rhs.rad) + &rhs.mid.abs().mul_ceil(&self.rad))
            + &self.rad.mul_ceil(&rhs.rad);
        Ball {
            mid,
            rad: &rad + &PrecReal::ulp(bits),
        }
    }
}

impl Neg for &Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        Ball {
            mid: -&self.mid,
            rad: self.rad.clone(),
        }
    }
}

forward_owned!(Ball, Add add, Sub sub, Mul mul);

impl Neg for Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn product_encloses_exact_value() {
        let a = Ball::from_rational(&rat(1, 3), 64);
        let b = Ball::from_rational(&rat(2, 7), 64);
        let p = &a * &b;
        let exact = rat(2, 21);
        let err = (p.mid.to_rational() - exact).abs();
        assert!(err <= p.rad.to_rational());
    }

    #[test]
    fn exact_inputs_have_zero_radius() {
        let a = Ball::from_rational(&rat(3, 8), 64);
        assert!(a.rad.is_zero());
        let s = &a + &a;
        assert!(s.rad.is_zero());
        assert!(s.contains(&PrecReal::from_rational(&rat(3, 4), 64)));
    }

    #[test]
    fn rational_scaling_encloses() {
        let a = Ball::from_rational(&rat(1, 3), 64);
        let s = a.mul_rational(&rat(-5, 11));
        let err = (s.mid.to_rational() - rat(-5, 33)).abs();
        assert!(err <= s.rad.to_rational());
    }
}
