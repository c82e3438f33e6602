//! Hurwitz zeta, Riemann zeta, digamma and Euler's constant.
//!
//! All of them reduce to one routine, [`power_log_tail`], which evaluates
//! `Σ_{n>=0} (a+n)^-e ln^j(a+n)` by a short explicit prefix followed by
//! Euler–Maclaurin summation with a rigorous remainder bound.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::consts::ln_ball;
use super::{biguint_rat, Ball, PrecReal, PrecisionRequest, MIN_BITS};
use crate::error::{Error, Result};
use crate::exact::{bernoulli, factorial, harmonic, rat, rat_int};

/// Coefficients of `G^(i)(x) = x^-(e+i) Σ_l c_l ln^l x` for `G(x) = x^-e ln^j x`.
#[derive(Clone, Debug)]
struct LogPowerDerivative {
    exponent: u64,
    coeffs: Vec<BigInt>,
}

impl LogPowerDerivative {
    fn new(e: u32, j: u32) -> Self {
        let mut coeffs = vec![BigInt::zero(); j as usize + 1];
        coeffs[j as usize] = BigInt::one();
        LogPowerDerivative {
            exponent: e as u64,
            coeffs,
        }
    }

    /// `d/dx [x^-f ln^l x] = x^-(f+1) (-f ln^l x + l ln^(l-1) x)`.
    fn differentiate(&mut self) {
        let f = BigInt::from(self.exponent);
        let n = self.coeffs.len();
        let next = (0..n)
            .map(|l| {
                let mut c = -&f * &self.coeffs[l];
                if l + 1 < n {
                    c += &self.coeffs[l + 1] * BigInt::from(l as u64 + 1);
                }
                c
            })
            .collect();
        self.coeffs = next;
        self.exponent += 1;
    }

    /// `scale * G^(i)(x)`, with `x^-f` folded into the exact coefficient.
    fn eval(&self, x: &BigRational, scale: &BigRational, ln_pows: &[Ball], bits: u32) -> Ball {
        let xpow = x.pow(-(self.exponent as i32));
        let mut acc = Ball::zero(bits);
        for (l, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let coeff = scale * &xpow * rat_int(c.clone());
            acc = &acc + &(&ln_pows[l] * &Ball::from_rational(&coeff, bits));
        }
        acc
    }

    /// Upper bound on `|scale * G^(i)(x)|` given an upper bound on `ln x`.
    fn abs_upper(
        &self,
        x: &BigRational,
        scale: &BigRational,
        ln_up: &[PrecReal],
        bits: u32,
    ) -> PrecReal {
        let xpow = x.pow(-(self.exponent as i32));
        let mut acc = PrecReal::zero(bits);
        for (l, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let coeff = (scale * &xpow * rat_int(c.clone())).abs();
            acc = &acc + &PrecReal::from_rational_ceil(&coeff, bits).mul_ceil(&ln_up[l]);
        }
        &acc + &PrecReal::ulp(bits)
    }

    /// Whether `Σ c_l L^l` keeps one sign for all `L >= ln_lo > 0`.
    fn sign_constant_from(&self, ln_lo: f64) -> bool {
        let Some(top) = self.coeffs.iter().rposition(|c| !c.is_zero()) else {
            return true;
        };
        if top == 0 {
            return true;
        }
        if ln_lo <= 0.0 {
            return false;
        }
        let lead = self.coeffs[top].abs().to_f64().unwrap_or(f64::INFINITY);
        if !lead.is_finite() {
            return false;
        }
        let mut rest = 0.0;
        for l in 0..top {
            let c = self.coeffs[l].abs().to_f64().unwrap_or(f64::INFINITY);
            rest += c * ln_lo.powi(l as i32 - top as i32);
        }
        rest.is_finite() && rest * 1.001 < lead
    }
}

/// Upper bound of `ln x` as PrecReal powers `0..=j`, plus the ball powers.
fn ln_powers(x: &BigRational, j: u32, bits: u32) -> (Vec<Ball>, Vec<PrecReal>) {
    let mut balls = vec![Ball::from_int(1, bits)];
    let mut ups = vec![PrecReal::from_int(1, bits)];
    if j > 0 {
        let l = ln_ball(x, bits);
        let lu = l.upper();
        for i in 1..=j as usize {
            balls.push(&balls[i - 1] * &l);
            ups.push(ups[i - 1].mul_ceil(&lu));
        }
    }
    (balls, ups)
}

/// Euler–Maclaurin for `Σ_{n>=0} G(x+n)` with no explicit terms.
///
/// Returns `None` when the asymptotic expansion stops improving before it
/// reaches `tol`, in which case the caller moves `x` further out.
fn em_tail(e: u32, j: u32, x: &BigRational, tol: &PrecReal) -> Option<(Ball, u64)> {
    let bits = tol.precision_bits();
    let (ln_pows, ln_up) = ln_powers(x, j, bits);
    let ln_lo = x.to_f64().map(|v| v.ln() - 1e-9).unwrap_or(0.0);

    // ∫_x^∞ t^-e ln^j t dt = x^(1-e) Σ_i j!/(j-i)! ln^(j-i) x / (e-1)^(i+1)
    let x_1me = x.pow(1 - e as i32);
    let mut sum = Ball::zero(bits);
    let mut falling = BigInt::one();
    for i in 0..=j {
        if i > 0 {
            falling *= BigInt::from(j - i + 1);
        }
        let c = &x_1me * rat_int(falling.clone()) / rat_int(BigInt::from(e - 1).pow(i + 1));
        sum = &sum + &(&ln_pows[(j - i) as usize] * &Ball::from_rational(&c, bits));
    }

    let mut g = LogPowerDerivative::new(e, j);
    sum = &sum + &g.eval(x, &rat(1, 2), &ln_pows, bits);

    let mut prev_bound: Option<PrecReal> = None;
    let max_m = (bits as u64).max(8);
    for m in 1..=max_m {
        g.differentiate();
        if m > 1 {
            g.differentiate();
        }
        // g now holds G^(2m-1)
        let b2m = bernoulli(2 * m);
        let scale = &b2m / biguint_rat(factorial(2 * m));
        sum = &sum - &g.eval(x, &scale, &ln_pows, bits);

        let bound = g.abs_upper(x, &scale, &ln_up, bits);
        let mut next = g.clone();
        next.differentiate();
        if bound < *tol && next.sign_constant_from(ln_lo) {
            return Some((sum.add_error(&bound), m));
        }
        if let Some(prev) = &prev_bound {
            if bound > *prev {
                return None;
            }
        }
        prev_bound = Some(bound);
    }
    None
}

/// `Σ_{n>=0} (a+n)^-e ln^j(a+n)` for `e >= 2`, `a > 0`, to absolute error `tol`.
///
/// The result carries `bits = tol.precision_bits()`; its radius is at most
/// `tol` plus a few units of rounding.
pub fn power_log_tail(e: u32, j: u32, a: &BigRational, tol: &PrecReal) -> Result<Ball> {
    if e < 2 {
        return Err(Error::invalid(format!(
            "power_log_tail needs exponent >= 2 (got {e})"
        )));
    }
    if !a.is_positive() {
        return Err(Error::invalid(format!(
            "power_log_tail needs a > 0 (got {a})"
        )));
    }
    let bits = tol.precision_bits().max(MIN_BITS);
    let tol = tol.with_bits(bits);
    let half_tol = tol.shrink(2);
    let floor_x = (bits as f64 * 0.12 + e as f64 / 4.0 + 2.0).ceil();
    let a_f = a.to_f64().unwrap_or(f64::MAX);
    let mut shift: u64 = if a_f >= floor_x {
        0
    } else {
        (floor_x - a_f).ceil() as u64
    };

    loop {
        let x = a + rat_int(BigInt::from(shift));
        if let Some((tail, _)) = em_tail(e, j, &x, &half_tol) {
            let mut acc = tail.with_bits(bits);
            for n in 0..shift {
                let y = a + rat_int(BigInt::from(n));
                let base = y.pow(-(e as i32));
                let term = if j == 0 {
                    Ball::from_rational(&base, bits)
                } else {
                    &Ball::from_rational(&base, bits + 8) * &ln_ball(&y, bits + 8).pow(j)
                };
                acc = &acc + &term.with_bits(bits);
            }
            return Ok(acc);
        }
        shift = (shift * 2).max(16);
        if shift > 1 << 24 {
            return Err(Error::PrecisionNotReached {
                digits: bits,
                reason: "Euler-Maclaurin shift exceeded limit".into(),
            });
        }
    }
}

/// `ζ(m, a)` as a ball with radius at most about `tol`.
pub fn hurwitz_ball(m: u32, a: &BigRational, tol: &PrecReal) -> Result<Ball> {
    if m < 2 {
        return Err(Error::invalid(format!(
            "Hurwitz zeta needs m >= 2 (got {m})"
        )));
    }
    if !a.is_positive() {
        return Err(Error::invalid(format!(
            "Hurwitz zeta needs a > 0 (got {a})"
        )));
    }
    power_log_tail(m, 0, a, tol)
}

pub fn zeta_ball(m: u32, tol: &PrecReal) -> Result<Ball> {
    if m < 2 {
        return Err(Error::invalid(format!(
            "zeta needs m >= 2 (pole at 1) (got {m})"
        )));
    }
    hurwitz_ball(m, &rat(1, 1), tol)
}

fn internal_tol(req: &PrecisionRequest) -> PrecReal {
    req.tolerance().shrink(4)
}

/// Riemann `ζ(m)` to within `10^-digits`.
pub fn zeta_int(m: i64, req: &PrecisionRequest) -> Result<PrecReal> {
    if m < 2 {
        return Err(Error::invalid(format!(
            "zeta needs m >= 2 (pole at 1) (got {m})"
        )));
    }
    Ok(zeta_ball(m as u32, &internal_tol(req))?.mid)
}

/// Hurwitz `ζ(m, a)` to within `10^-digits`.
pub fn hurwitz_zeta(m: i64, a: &BigRational, req: &PrecisionRequest) -> Result<PrecReal> {
    if m < 2 {
        return Err(Error::invalid(format!(
            "Hurwitz zeta needs m >= 2 (got {m})"
        )));
    }
    Ok(hurwitz_ball(m as u32, a, &internal_tol(req))?.mid)
}

/// `Ψ(x)` for rational `x > 0`.
///
/// Shifts up with `Ψ(x) = Ψ(x+K) - Σ_{k<K} 1/(x+k)`, then uses
/// `Ψ(y) ~ ln y - 1/(2y) - Σ B_2j / (2j y^2j)`, whose remainder is bounded by
/// the first omitted term.
pub fn digamma_ball(x: &BigRational, tol: &PrecReal) -> Result<Ball> {
    if !x.is_positive() {
        return Err(Error::invalid(format!("digamma needs x > 0 (got {x})")));
    }
    let bits = tol.precision_bits().max(MIN_BITS);
    let work = bits + 8;
    let quarter = tol.shrink(4);
    let floor_y = (bits as f64 * 0.12 + 4.0).ceil();
    let x_f = x.to_f64().unwrap_or(f64::MAX);
    let shift: u64 = if x_f >= floor_y {
        0
    } else {
        (floor_y - x_f).ceil() as u64
    };
    let y = x + rat_int(BigInt::from(shift));

    let mut acc = &ln_ball(&y, work) - &Ball::from_rational(&(y.recip() / rat(2, 1)), work);
    let mut j: u64 = 1;
    loop {
        let term = bernoulli(2 * j) / (rat_int(BigInt::from(2 * j)) * y.pow(2 * j as i32));
        acc = &acc - &Ball::from_rational(&term, work);
        let next = (bernoulli(2 * j + 2)
            / (rat_int(BigInt::from(2 * j + 2)) * y.pow(2 * j as i32 + 2)))
        .abs();
        let bound = PrecReal::from_rational_ceil(&next, work);
        if bound < quarter {
            acc = acc.add_error(&bound);
            break;
        }
        j += 1;
        if j > 4 * bits as u64 {
            return Err(Error::PrecisionNotReached {
                digits: bits,
                reason: "digamma asymptotic series did not converge".into(),
            });
        }
    }
    for k in 0..shift {
        let d = x + rat_int(BigInt::from(k));
        acc = &acc - &Ball::from_rational(&d.recip(), work);
    }
    Ok(acc.with_bits(bits))
}

pub fn digamma(x: &BigRational, req: &PrecisionRequest) -> Result<PrecReal> {
    Ok(digamma_ball(x, &internal_tol(req))?.mid)
}

/// Euler–Mascheroni constant, defined as `-Ψ(1)`.
pub fn euler_gamma_ball(tol: &PrecReal) -> Ball {
    -digamma_ball(&rat(1, 1), tol).expect("Ψ(1) is defined")
}

pub fn euler_gamma(req: &PrecisionRequest) -> PrecReal {
    euler_gamma_ball(&internal_tol(req)).mid
}

/// `B(x, y) = (x-1)! (y-1)! / (x+y-1)!` for positive integers.
pub fn beta_int(x: u64, y: u64) -> Result<BigRational> {
    if x == 0 || y == 0 {
        return Err(Error::invalid(format!(
            "beta_int needs positive arguments (got {x}, {y})"
        )));
    }
    Ok(BigRational::new(
        BigInt::from(factorial(x - 1) * factorial(y - 1)),
        BigInt::from(factorial(x + y - 1)),
    ))
}

/// `Ψ(r+1) + γ`; exact `H_r` for integer `r`.
pub(crate) fn digamma_shifted_plus_gamma(rho: &BigRational, tol: &PrecReal) -> Result<Ball> {
    let bits = tol.precision_bits();
    if rho.is_integer() && !rho.is_negative() {
        let r = rho
            .to_integer()
            .to_u64()
            .ok_or_else(|| Error::invalid("rho too large"))?;
        return Ok(Ball::from_rational(&harmonic(r), bits));
    }
    let half = tol.shrink(2);
    let psi = digamma_ball(&(rho + rat(1, 1)), &half)?;
    let gamma = euler_gamma_ball(&half);
    Ok(&psi + &gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::generalized_harmonic;
    use crate::real::pi_ball;

    fn req(d: u32) -> PrecisionRequest {
        PrecisionRequest::new(d).unwrap()
    }

    fn close(a: &PrecReal, b: &PrecReal, tol: &PrecReal) -> bool {
        (a - b).abs() <= *tol
    }

    const GAMMA_40: &str = "0.5772156649015328606065120900824024310422";
    const ZETA3_40: &str = "1.2020569031595942853997381615114499907650";

    #[test]
    fn zeta2_is_pi_squared_over_six() {
        let r = req(30);
        let z = zeta_int(2, &r).unwrap();
        let pi = pi_ball(200);
        let pi2_6 = (&pi * &pi).mul_rational(&rat(1, 6));
        assert!(close(&z, &pi2_6.mid, &r.tolerance()));
        assert_eq!(z.to_decimal(30), "1.644934066848226436472415166646");
    }

    #[test]
    fn zeta3_digits() {
        assert_eq!(zeta_int(3, &req(40)).unwrap().to_decimal(40), ZETA3_40);
    }

    #[test]
    fn zeta10_against_partial_sum_with_integral_tail() {
        // Σ_{n<=N} n^-10 plus tail enclosed by [∫_{N+1}^∞, ∫_N^∞] of x^-10.
        let r = req(20);
        let n: i64 = 2000;
        let bits = 120;
        let mut partial = PrecReal::zero(bits);
        for k in 1..=n {
            partial = &partial + &PrecReal::from_rational(&rat(1, k).pow(10), bits);
        }
        let lo = PrecReal::from_rational(&(rat(1, n + 1).pow(9) / rat(9, 1)), bits);
        let hi = PrecReal::from_rational(&(rat(1, n).pow(9) / rat(9, 1)), bits);
        let z = zeta_int(10, &r).unwrap();
        let slack = PrecReal::ulp(bits).mul_int(n + 10);
        assert!(z >= &(&(&partial + &lo) - &slack) - &r.tolerance());
        assert!(z <= &(&(&partial + &hi) + &slack) + &r.tolerance());
    }

    #[test]
    fn zeta_rejects_pole() {
        assert!(zeta_int(1, &req(10)).is_err());
        assert!(zeta_int(0, &req(10)).is_err());
    }

    #[test]
    fn hurwitz_special_values() {
        let r = req(25);
        let tol = r.tolerance().mul_int(2);
        let z3 = zeta_int(3, &r).unwrap();
        assert!(close(&hurwitz_zeta(3, &rat(1, 1), &r).unwrap(), &z3, &tol));
        let z4 = zeta_int(4, &r).unwrap();
        let shifted = &z4 - &PrecReal::from_rational(&rat(17, 16), 120);
        assert!(close(
            &hurwitz_zeta(4, &rat(3, 1), &r).unwrap(),
            &shifted,
            &tol
        ));
        let pi = pi_ball(200);
        let pi2_2 = (&pi * &pi).mul_rational(&rat(1, 2));
        assert!(close(
            &hurwitz_zeta(2, &rat(1, 2), &r).unwrap(),
            &pi2_2.mid,
            &tol
        ));
        assert!(hurwitz_zeta(3, &rat(0, 1), &r).is_err());
        assert!(hurwitz_zeta(3, &rat(-1, 2), &r).is_err());
    }

    #[test]
    fn hurwitz_integer_shift() {
        let r = req(20);
        let tol = r.tolerance().mul_int(2);
        for m in 2..=6u32 {
            let z = zeta_int(m as i64, &r).unwrap();
            for n in 1..=20u64 {
                let expect = &z
                    - &PrecReal::from_rational(&generalized_harmonic(n - 1, m), r.guard_bits() + 8);
                let got = hurwitz_zeta(m as i64, &rat(n as i64, 1), &r).unwrap();
                assert!(close(&got, &expect, &tol), "m={m} n={n}");
            }
        }
    }

    #[test]
    fn digamma_values() {
        let r = req(30);
        let tol = r.tolerance().mul_int(2);
        let g = euler_gamma(&r);
        assert_eq!(euler_gamma(&req(40)).to_decimal(40), GAMMA_40);
        assert!(close(&digamma(&rat(1, 1), &r).unwrap(), &-&g, &tol));
        let two = digamma(&rat(2, 1), &r).unwrap();
        assert!(close(&two, &(&PrecReal::from_int(1, 140) - &g), &tol));
        // Ψ(1/2) = -γ - 2 ln 2
        let ln2 = crate::real::ln2_ball(200).mid;
        let half = digamma(&rat(1, 2), &r).unwrap();
        assert!(close(&half, &(&-&g - &ln2.mul_int(2)), &tol));
        assert!(digamma(&rat(0, 1), &r).is_err());
    }

    #[test]
    fn log_power_tail_matches_direct_sum() {
        // Σ_{n>=1} ln(n) / n^2 = -ζ'(2) = 0.93754825431584375370...
        let tol = PrecReal::pow10_neg(25, 120);
        let v = power_log_tail(2, 1, &rat(1, 1), &tol).unwrap();
        assert_eq!(v.mid.to_decimal(20), "0.93754825431584375370");
        assert!(v.rad <= tol.mul_int(2));
    }

    #[test]
    fn beta_values() {
        assert_eq!(beta_int(2, 2).unwrap(), rat(1, 6));
        assert_eq!(beta_int(3, 4).unwrap(), rat(1, 60));
        assert_eq!(beta_int(1, 1).unwrap(), rat(1, 1));
        assert!(beta_int(0, 3).is_err());
    }
}
