//! Evaluators for `σ(r, m) = Σ_{n>=1} h_n^(r) / n^m` and the sums around it.

use std::collections::HashMap;
use std::fmt;
use std::sync::{LazyLock, RwLock};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::asymptotic::{certified_tail, Expansion};
use crate::error::{Error, Result};
use crate::exact::{factorial, harmonic, hyperharmonic_any, rat_int, stirling_first};
use crate::real::{
    biguint_rat, digamma_shifted_plus_gamma, guard_bits, hurwitz_ball, zeta_ball, Ball, PrecReal,
    PrecisionRequest, MAX_DIGITS,
};

/// Extra working bits on top of the caller's tolerance.
const EXTRA_BITS: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "name", content = "k")]
pub enum Method {
    Direct,
    Closed,
    /// Nested Hurwitz representation with `k` summation levels.
    Hurwitz(u32),
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Closed => "closed",
            Method::Hurwitz(_) => "hurwitz",
        }
    }

    pub fn k(&self) -> Option<u32> {
        match self {
            Method::Hurwitz(k) => Some(*k),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Hurwitz(k) => write!(f, "hurwitz({k})"),
            other => f.write_str(other.tag()),
        }
    }
}

/// One `σ(r, m)` request.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SumQuery {
    pub r: u32,
    pub m: u32,
    pub method: Method,
    pub digits: u32,
}

impl SumQuery {
    pub fn new(r: u32, m: u32, method: Method, digits: u32) -> Result<Self> {
        let q = SumQuery {
            r,
            m,
            method,
            digits,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::invalid("r must be a positive integer"));
        }
        if self.m <= self.r {
            return Err(Error::Divergent {
                r: self.r,
                m: self.m,
            });
        }
        if let Method::Hurwitz(k) = self.method {
            if k >= self.r {
                return Err(Error::invalid(format!(
                    "hurwitz method needs 0 <= k <= r - 1 (got k = {k}, r = {})",
                    self.r
                )));
            }
        }
        if self.digits == 0 || self.digits > MAX_DIGITS {
            return Err(Error::invalid(format!(
                "digits must lie in 1..={MAX_DIGITS} (got {})",
                self.digits
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EvalResult {
    pub query: SumQuery,
    pub value: PrecReal,
    /// Certified absolute error of `value`.
    pub error_bound: PrecReal,
    pub terms_used: u64,
    pub method: Method,
}

static ZETA_CACHE: LazyLock<RwLock<HashMap<(u32, u32), Ball>>> = LazyLock::new(Default::default);

/// `ζ(s)` with radius a few units of `2^-bits`.
pub(crate) fn zeta_cached(s: u32, bits: u32) -> Result<Ball> {
    if let Some(b) = ZETA_CACHE.read().unwrap().get(&(s, bits)) {
        return Ok(b.clone());
    }
    let b = zeta_ball(s, &unit_tol(bits))?;
    ZETA_CACHE.write().unwrap().insert((s, bits), b.clone());
    Ok(b)
}

/// `2^-bits` carried at a slightly higher precision, so that it can be met.
fn unit_tol(bits: u32) -> PrecReal {
    PrecReal::ulp(bits).with_bits(bits + 16)
}

fn work_bits(tol: &PrecReal) -> u32 {
    tol.precision_bits() + EXTRA_BITS
}

fn rat_ball(q: &BigRational, bits: u32) -> Ball {
    Ball::from_rational(q, bits)
}

fn bits_of(q: &BigRational) -> u32 {
    let v = q.abs().ceil().to_integer();
    v.bits() as u32
}

/// `ζ_H(m) = Σ H_n / n^m` from `2ζ_H(m) = (m+2)ζ(m+1) - Σ_{n=1}^{m-2} ζ(m-n)ζ(n+1)`.
pub(crate) fn zeta_h_ball(m: u32, tol: &PrecReal) -> Result<Ball> {
    if m < 2 {
        return Err(Error::invalid(format!("ζ_H(m) needs m >= 2 (got {m})")));
    }
    let bits = work_bits(tol) + bits_of(&rat_int(m));
    let mut acc = zeta_cached(m + 1, bits)?.mul_int(m + 2);
    for n in 1..=m.saturating_sub(2) {
        acc = &acc - &(&zeta_cached(m - n, bits)? * &zeta_cached(n + 1, bits)?);
    }
    Ok(acc.mul_rational(&BigRational::new(1.into(), 2.into())))
}

/// `Σ_{n>=1} 1/(n^m (n+ρ))` in closed form.
pub(crate) fn mu_ball(m: u32, rho: &BigRational, tol: &PrecReal) -> Result<Ball> {
    if m == 0 {
        return Err(Error::invalid("mu needs m >= 1"));
    }
    if !rho.is_positive() {
        return Err(Error::invalid(format!("mu needs rho > 0 (got {rho})")));
    }
    let inv = rho.recip();
    let grow = bits_of(&inv.pow(m as i32));
    let bits = work_bits(tol) + grow;
    let mut acc = Ball::zero(bits);
    let mut pow = BigRational::one();
    for k in 1..m {
        pow *= &inv;
        let term = zeta_cached(m - k + 1, bits)?.mul_rational(&pow);
        acc = if k % 2 == 1 {
            &acc + &term
        } else {
            &acc - &term
        };
    }
    pow *= &inv;
    let bracket = digamma_shifted_plus_gamma(rho, &unit_tol(bits))?.mul_rational(&pow);
    Ok(if m % 2 == 1 {
        &acc + &bracket
    } else {
        &acc - &bracket
    })
}

/// Closed form for `σ(r, m)`:
/// `(1/(r-1)!) Σ_k [r;k] { ζ_H(s) - H_{r-1} ζ(s) + Σ_{j<r} μ(s, j) }`, `s = m-k+1`.
pub(crate) fn sigma_closed_ball(r: u32, m: u32, tol: &PrecReal) -> Result<(Ball, u64)> {
    check_convergent(r, m)?;
    let inv_fact = BigRational::one() / biguint_rat(factorial(r as u64 - 1));
    let h = harmonic(r as u64 - 1);
    let mut weights = Vec::new();
    for k in 1..=r {
        weights.push(biguint_rat(stirling_first(r as u64, k as u64)?) * &inv_fact);
    }
    let max_w = weights.iter().map(bits_of).max().unwrap_or(0);
    let inner_tol = tol.shrink((8 * (r as u64 + 2) * (r as u64 + 2)) << max_w.min(40));
    let bits = work_bits(&inner_tol);
    let mut acc = Ball::zero(bits);
    let mut evals = 0u64;
    for (k, w) in (1..=r).zip(&weights) {
        let s = m - k + 1;
        let mut brace = &zeta_h_ball(s, &inner_tol)? - &zeta_cached(s, bits)?.mul_rational(&h);
        evals += 2;
        for j in 1..r {
            brace = &brace + &mu_ball(s, &rat_int(j), &inner_tol)?;
            evals += 1;
        }
        acc = &acc + &brace.mul_rational(w);
    }
    Ok((acc, evals))
}

fn check_convergent(r: u32, m: u32) -> Result<()> {
    if r == 0 {
        return Err(Error::invalid("r must be a positive integer"));
    }
    if m <= r {
        return Err(Error::Divergent { r, m });
    }
    Ok(())
}

/// First index handled by the asymptotic tail.
pub(crate) fn tail_start(shift: u32, bits: u32) -> u64 {
    64u64.max(4 * shift as u64 + 8).max(bits as u64 / 3)
}

/// `Σ_{n=1}^{n0-1} term(n)` accumulated from exact terms, plus the certified
/// tail of the expansion family `build` from `n0` on.
pub(crate) fn prefix_plus_tail<T, B>(
    n0: u64,
    tol: &PrecReal,
    term: T,
    build: B,
) -> Result<(Ball, u64)>
where
    T: Fn(u64) -> Result<BigRational>,
    B: Fn(u64, u32) -> Result<Expansion>,
{
    let bits = work_bits(tol);
    let mut acc = Ball::zero(bits);
    for n in 1..n0 {
        acc = &acc + &rat_ball(&term(n)?, bits);
    }
    let (tail, order) = certified_tail(n0, &tol.shrink(2), build)?;
    Ok((&acc + &tail, n0 - 1 + order as u64))
}

/// `σ(r, m)` summed term by term with an asymptotic tail.
pub(crate) fn sigma_direct_ball(r: u32, m: u32, tol: &PrecReal) -> Result<(Ball, u64)> {
    check_convergent(r, m)?;
    let n0 = tail_start(r, work_bits(tol));
    prefix_plus_tail(
        n0,
        tol,
        |n| Ok(hyperharmonic_any(n, r)? / rat_int(n).pow(m as i32)),
        |n0, order| {
            Ok(
                Expansion::hyperharmonic(n0, r, order)?.mul(&Expansion::monomial(
                    n0,
                    -(m as i64),
                    BigRational::one(),
                )),
            )
        },
    )
}

/// Coefficients `c[t][u]` of `(1/k!) Π_{i=1}^{k} (j + i - n)` as `Σ c[t][u] j^t n^u`.
fn nested_kernel(k: u32) -> Vec<Vec<BigRational>> {
    let size = k as usize + 1;
    let mut c = vec![vec![BigRational::zero(); size]; size];
    c[0][0] = BigRational::one();
    for i in 1..=k as i64 {
        let mut next = vec![vec![BigRational::zero(); size]; size];
        for t in 0..size {
            for u in 0..size {
                if c[t][u].is_zero() {
                    continue;
                }
                let v = &c[t][u];
                next[t + 1][u] += v;
                next[t][u] += v * rat_int(i);
                next[t][u + 1] -= v;
            }
        }
        c = next;
    }
    let inv = BigRational::one() / biguint_rat(factorial(k as u64));
    c.into_iter()
        .map(|row| row.into_iter().map(|v| v * &inv).collect())
        .collect()
}

/// `p_t(n) = [j^t] (1/k!) Π (j + i - n)` for `t = 0..=k`.
fn kernel_at(kernel: &[Vec<BigRational>], n: u64) -> Vec<BigRational> {
    let nq = rat_int(n);
    kernel
        .iter()
        .map(|row| {
            row.iter()
                .rev()
                .fold(BigRational::zero(), |acc, c| acc * &nq + c)
        })
        .collect()
}

fn check_nested(m: u32, k: u32) -> Result<()> {
    if m < k + 2 {
        return Err(Error::invalid(format!(
            "nested Hurwitz sum needs m >= k + 2 (got m = {m}, k = {k})"
        )));
    }
    Ok(())
}

/// `Σ_{n<=i_1<=...<=i_k} ζ(m, i_k) = Σ_{j>=n} C(j-n+k, k) j^-m = Σ_t p_t(n) ζ(m-t, n)`.
pub(crate) fn nested_ball(n: u64, m: u32, k: u32, tol: &PrecReal) -> Result<Ball> {
    if n == 0 {
        return Err(Error::invalid("nested Hurwitz sum needs n >= 1"));
    }
    check_nested(m, k)?;
    let p = kernel_at(&nested_kernel(k), n);
    let grow = p.iter().map(bits_of).max().unwrap_or(0);
    let inner = tol.shrink(4 * (k as u64 + 1)).shrink(1u64 << grow.min(62));
    let bits = work_bits(&inner);
    let a = rat_int(n);
    let mut acc = Ball::zero(bits);
    for (t, pt) in p.iter().enumerate() {
        if pt.is_zero() {
            continue;
        }
        acc = &acc + &hurwitz_ball(m - t as u32, &a, &inner)?.mul_rational(pt);
    }
    Ok(acc)
}

/// `σ(r, m) = Σ_n h_n^(r-k-1) Σ_{n<=i_1<=...<=i_k} ζ(m, i_k)`.
pub(crate) fn sigma_hurwitz_ball(r: u32, m: u32, k: u32, tol: &PrecReal) -> Result<(Ball, u64)> {
    check_convergent(r, m)?;
    if k >= r {
        return Err(Error::invalid(format!(
            "hurwitz method needs 0 <= k <= r - 1 (got k = {k}, r = {r})"
        )));
    }
    let q = r - k - 1;
    let kernel = nested_kernel(k);
    let n0 = tail_start(r, work_bits(tol));

    // ζ(s, n) = ζ(s) - H_{n-1}^(s): the prefix becomes Σ_t A_t ζ(m-t) - B with
    // exact A_t and exactly formed terms of B.
    let bits = work_bits(tol);
    let mut a_coef = vec![BigRational::zero(); k as usize + 1];
    let mut b_acc = Ball::zero(bits);
    let mut gen_h = vec![BigRational::zero(); k as usize + 1];
    for n in 1..n0 {
        let w = hyperharmonic_any(n, q)?;
        let p = kernel_at(&kernel, n);
        let mut b_term = BigRational::zero();
        for t in 0..=k as usize {
            a_coef[t] += &w * &p[t];
            b_term += &p[t] * &gen_h[t];
        }
        b_acc = &b_acc + &rat_ball(&(b_term * &w), bits);
        for (t, h) in gen_h.iter_mut().enumerate() {
            *h += rat_int(n).pow(-(m as i32 - t as i32));
        }
    }
    let grow = a_coef.iter().map(bits_of).max().unwrap_or(0) + 8;
    let mut prefix = -b_acc;
    for (t, a) in a_coef.iter().enumerate() {
        prefix = &prefix + &zeta_cached(m - t as u32, bits + grow)?.mul_rational(a);
    }

    let (tail, order) = certified_tail(n0, &tol.shrink(2), |n0, order| {
        let mut inner = Expansion::zero(n0);
        for (t, poly) in kernel.iter().enumerate() {
            let z = Expansion::hurwitz(n0, m - t as u32, order);
            inner = inner.add(&Expansion::polynomial(n0, poly).mul(&z));
        }
        Ok(Expansion::hyperharmonic(n0, q, order)?.mul(&inner))
    })?;
    Ok((&prefix + &tail, n0 - 1 + order as u64))
}

/// `2 Σ_{k>=1} ζ(m, k) / k`.
pub(crate) fn mezo_dil_lhs_ball(m: u32, tol: &PrecReal) -> Result<(Ball, u64)> {
    if m < 2 {
        return Err(Error::invalid(format!(
            "the Hurwitz series needs m >= 2 (got {m})"
        )));
    }
    let bits = work_bits(tol);
    let n0 = tail_start(1, bits);
    // Σ_{k<n0} (ζ(m) - H_{k-1}^(m)) / k = H_{n0-1} ζ(m) - Σ H_{k-1}^(m) / k
    let mut gen_h = BigRational::zero();
    let mut b_acc = Ball::zero(bits);
    for k in 1..n0 {
        b_acc = &b_acc + &rat_ball(&(&gen_h / rat_int(k)), bits);
        gen_h += rat_int(k).pow(-(m as i32));
    }
    let prefix = &zeta_cached(m, bits + 16)?.mul_rational(&harmonic(n0 - 1)) - &b_acc;
    let (tail, order) = certified_tail(n0, &tol.shrink(4), |n0, order| {
        Ok(Expansion::hurwitz(n0, m, order).mul(&Expansion::monomial(n0, -1, BigRational::one())))
    })?;
    Ok(((&prefix + &tail).mul_int(2), n0 - 1 + order as u64))
}

fn target(digits: u32, bits: u32) -> PrecReal {
    PrecReal::pow10_neg(digits, bits)
}

/// Runs `f` at increasing working precision until its radius is at most
/// `10^-digits`.
fn certify<F>(digits: u32, f: F) -> Result<(Ball, u64)>
where
    F: Fn(&PrecReal) -> Result<(Ball, u64)>,
{
    let base = guard_bits(digits);
    let goal = target(digits, base);
    let mut last = None;
    for attempt in 0..3u32 {
        let bits = base + 32 * attempt;
        let tol = target(digits, bits).shrink(4u64 << (16 * attempt));
        let (ball, terms) = f(&tol)?;
        if ball.rad <= goal {
            return Ok((ball, terms));
        }
        last = Some(ball.rad);
    }
    Err(Error::PrecisionNotReached {
        digits,
        reason: format!(
            "error bound {} exceeds 1e-{digits}",
            last.map(|r| r.to_sci_upper()).unwrap_or_default()
        ),
    })
}

fn finish(q: &SumQuery, ball: Ball, terms: u64) -> EvalResult {
    let bits = guard_bits(q.digits);
    let value = ball.mid.with_bits(bits);
    let rounding = if value == ball.mid {
        PrecReal::zero(bits)
    } else {
        PrecReal::ulp(bits)
    };
    EvalResult {
        query: *q,
        value,
        error_bound: &ball.rad + &rounding,
        terms_used: terms,
        method: q.method,
    }
}

pub fn sigma_closed(q: &SumQuery) -> Result<EvalResult> {
    q.validate()?;
    let (ball, terms) = certify(q.digits, |tol| sigma_closed_ball(q.r, q.m, tol))?;
    Ok(finish(q, ball, terms))
}

pub fn sigma_direct(q: &SumQuery) -> Result<EvalResult> {
    q.validate()?;
    let (ball, terms) = certify(q.digits, |tol| sigma_direct_ball(q.r, q.m, tol))?;
    Ok(finish(q, ball, terms))
}

pub fn sigma_hurwitz(q: &SumQuery) -> Result<EvalResult> {
    q.validate()?;
    let Method::Hurwitz(k) = q.method else {
        return Err(Error::invalid("sigma_hurwitz needs the hurwitz method"));
    };
    let (ball, terms) = certify(q.digits, |tol| sigma_hurwitz_ball(q.r, q.m, k, tol))?;
    Ok(finish(q, ball, terms))
}

/// Dispatches on `q.method`.
pub fn evaluate(q: &SumQuery) -> Result<EvalResult> {
    match q.method {
        Method::Closed => sigma_closed(q),
        Method::Direct => sigma_direct(q),
        Method::Hurwitz(_) => sigma_hurwitz(q),
    }
}

fn value_only<F>(req: &PrecisionRequest, f: F) -> Result<PrecReal>
where
    F: Fn(&PrecReal) -> Result<Ball>,
{
    let (ball, _) = certify(req.digits(), |tol| Ok((f(tol)?, 0)))?;
    Ok(ball.mid.with_bits(req.guard_bits()))
}

/// `ζ_H(m) = Σ_{n>=1} H_n / n^m`, `m >= 2`.
pub fn zeta_h(m: u32, req: &PrecisionRequest) -> Result<PrecReal> {
    value_only(req, |tol| zeta_h_ball(m, tol))
}

/// `μ(m, ρ) = Σ_{n>=1} 1 / (n^m (n + ρ))`, `m >= 1`, `ρ > 0`.
pub fn mu(m: u32, rho: &BigRational, req: &PrecisionRequest) -> Result<PrecReal> {
    value_only(req, |tol| mu_ball(m, rho, tol))
}

/// The `k`-fold nested sum `Σ_{n<=i_1<=...<=i_k<∞} ζ(m, i_k)`, `m >= k + 2`.
pub fn hurwitz_nested_sum(n: u64, m: u32, k: u32, req: &PrecisionRequest) -> Result<PrecReal> {
    value_only(req, |tol| nested_ball(n, m, k, tol))
}

/// `2 Σ_{k>=1} ζ(m, k) / k`, `m >= 2`.
pub fn mezo_dil_identity_lhs(m: u32, req: &PrecisionRequest) -> Result<PrecReal> {
    value_only(req, |tol| Ok(mezo_dil_lhs_ball(m, tol)?.0))
}
