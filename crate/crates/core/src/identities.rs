//! Numeric verification of the identities around `σ(r, m)`.
//!
//! Each identity has a stable id such as `eq5`, `prop5_r3` or
//! `alt_first_n2`; [`verify_eq`] evaluates one id and [`run_suite`] runs a
//! whole grid of them.

use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotic::Expansion;
use crate::error::{Error, Result};
use crate::exact::{
    factorial, gf_coefficient, hyperharmonic, hyperharmonic_any, hyperharmonic_closed, rat, rat_int,
};
use crate::real::{beta_int, biguint_rat, guard_bits, ln2_ball, Ball, PrecReal, PrecisionRequest};
use crate::sums::{
    mezo_dil_lhs_ball, mu_ball, prefix_plus_tail, sigma_closed_ball, sigma_direct_ball,
    sigma_hurwitz_ball, tail_start, zeta_cached, zeta_h_ball,
};

/// Outcome of checking one identity at one parameter point.
#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub identity_id: String,
    pub digits: u32,
    pub lhs: PrecReal,
    pub rhs: PrecReal,
    /// Largest `|left - rhs|` over every evaluated left side.
    pub difference: PrecReal,
    pub tolerance: PrecReal,
    pub passed: bool,
    pub terms_used: u64,
    pub elapsed: Duration,
    /// Estimated remainder of an accelerated (uncertified) summation.
    pub residual: Option<PrecReal>,
    /// Whether consecutive accelerated estimates bracketed the limit.
    pub bracketed: Option<bool>,
    /// Set when the identity could not be evaluated at all.
    pub error: Option<String>,
}

/// Serializable view of an [`IdentityReport`] with decimal-string numbers.
#[derive(Clone, Debug, Serialize)]
pub struct ReportRecord {
    pub identity_id: String,
    pub lhs: String,
    pub rhs: String,
    pub difference: String,
    pub tolerance: String,
    pub passed: bool,
    pub terms_used: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracketed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl IdentityReport {
    pub fn record(&self, with_timing: bool) -> ReportRecord {
        ReportRecord {
            identity_id: self.identity_id.clone(),
            lhs: self.lhs.to_decimal(self.digits),
            rhs: self.rhs.to_decimal(self.digits),
            difference: self.difference.to_sci_upper(),
            tolerance: self.tolerance.to_sci_upper(),
            passed: self.passed,
            terms_used: self.terms_used,
            residual: self.residual.as_ref().map(PrecReal::to_sci_upper),
            bracketed: self.bracketed,
            error: self.error.clone(),
            elapsed_ms: with_timing.then_some(self.elapsed.as_millis() as u64),
        }
    }
}

/// Which variant of the alternating pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alternating {
    First,
    Second,
}

/// Parameter grids for [`run_suite`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteGrid {
    pub exact_checks: bool,
    pub golden: bool,
    pub eq1_m: Vec<u32>,
    pub eq3_m: Vec<u32>,
    pub eq4_m: Vec<u32>,
    pub sigma3_m: Vec<u32>,
    /// `(r, m)` pairs for the cross-method checks.
    pub pairs: Vec<(u32, u32)>,
    pub lemma_m: Vec<u32>,
    pub lemma_rho: Vec<BigRational>,
    pub prop_r: Vec<u32>,
    pub alt_first_n: Vec<u32>,
    pub alt_second_n: Vec<u32>,
}

impl Default for SuiteGrid {
    fn default() -> Self {
        SuiteGrid {
            exact_checks: true,
            golden: true,
            eq1_m: (2..=7).collect(),
            eq3_m: (2..=7).collect(),
            eq4_m: (3..=8).collect(),
            sigma3_m: (4..=8).collect(),
            pairs: vec![
                (1, 2),
                (1, 3),
                (2, 3),
                (2, 4),
                (2, 5),
                (3, 4),
                (3, 5),
                (4, 5),
            ],
            lemma_m: (1..=5).collect(),
            lemma_rho: vec![rat(1, 1), rat(2, 1), rat(3, 1), rat(1, 2), rat(5, 2)],
            prop_r: (0..=4).collect(),
            alt_first_n: (0..=3).collect(),
            alt_second_n: (1..=3).collect(),
        }
    }
}

impl SuiteGrid {
    pub fn empty() -> Self {
        SuiteGrid {
            exact_checks: false,
            golden: false,
            eq1_m: vec![],
            eq3_m: vec![],
            eq4_m: vec![],
            sigma3_m: vec![],
            pairs: vec![],
            lemma_m: vec![],
            lemma_rho: vec![],
            prop_r: vec![],
            alt_first_n: vec![],
            alt_second_n: vec![],
        }
    }

    /// Keeps only points with `r <= r_max` and `m <= m_max`.
    pub fn restricted(mut self, r_max: u32, m_max: u32) -> Self {
        self.eq1_m.retain(|&m| m <= m_max);
        self.eq3_m.retain(|&m| m <= m_max);
        self.eq4_m.retain(|&m| m <= m_max);
        self.sigma3_m.retain(|&m| m <= m_max && r_max >= 3);
        self.pairs.retain(|&(r, m)| r <= r_max && m <= m_max);
        self.lemma_m.retain(|&m| m <= m_max);
        self.prop_r.retain(|&r| r <= r_max);
        self
    }

    /// Ids in their registered order.
    pub fn ids(&self) -> Vec<String> {
        let mut ids = Vec::new();
        if self.exact_checks {
            ids.push("i2_closed_form".to_string());
            ids.push("i4_generating_function".to_string());
        }
        ids.extend(self.eq1_m.iter().map(|m| format!("eq1_m{m}")));
        ids.extend(self.eq3_m.iter().map(|m| format!("eq3_m{m}")));
        ids.extend(self.eq4_m.iter().map(|m| format!("eq4_m{m}")));
        if self.golden {
            ids.extend(["eq5", "eq6", "eq8"].map(String::from));
        }
        ids.extend(self.sigma3_m.iter().map(|m| format!("sigma3_m{m}")));
        for &(r, m) in &self.pairs {
            ids.push(format!("thm2_r{r}_m{m}"));
        }
        for &(r, m) in &self.pairs {
            for k in 0..r {
                ids.push(format!("thm1_r{r}_m{m}_k{k}"));
            }
        }
        for m in &self.lemma_m {
            for rho in &self.lemma_rho {
                ids.push(format!("lemma_l_m{m}_rho{}", rho_tag(rho)));
            }
        }
        ids.extend(self.prop_r.iter().map(|r| format!("prop5_r{r}")));
        ids.extend(self.prop_r.iter().map(|r| format!("eq23_r{r}")));
        ids.extend(self.prop_r.iter().map(|r| format!("prop6_r{r}")));
        ids.extend(self.prop_r.iter().map(|r| format!("prop6beta_r{r}")));
        ids.extend(self.alt_first_n.iter().map(|n| format!("alt_first_n{n}")));
        ids.extend(self.alt_second_n.iter().map(|n| format!("alt_second_n{n}")));
        ids
    }
}

/// `5/2 -> "2.5"`, `3 -> "3"`; only halves and integers are used.
fn rho_tag(rho: &BigRational) -> String {
    if rho.is_integer() {
        return rho.to_integer().to_string();
    }
    let twice = rho * rat(2, 1);
    assert!(twice.is_integer(), "rho tags support halves only");
    format!("{}.5", (rho.floor()).to_integer())
}

fn parse_rho(tag: &str) -> Option<BigRational> {
    match tag.split_once('.') {
        None => tag.parse::<i64>().ok().map(|v| rat(v, 1)),
        Some((whole, "5")) => whole.parse::<i64>().ok().map(|v| rat(2 * v + 1, 2)),
        _ => None,
    }
}

struct Ctx {
    digits: u32,
    /// Tolerance handed to the certified evaluators.
    tol: PrecReal,
    /// `10^-digits`.
    base: PrecReal,
    start: Instant,
}

impl Ctx {
    fn new(req: &PrecisionRequest) -> Self {
        let bits = guard_bits(req.digits());
        Ctx {
            digits: req.digits(),
            tol: PrecReal::pow10_neg(req.digits(), bits).shrink(8),
            base: PrecReal::pow10_neg(req.digits(), bits),
            start: Instant::now(),
        }
    }

    fn bits(&self) -> u32 {
        self.tol.precision_bits() + 16
    }

    fn zeta(&self, s: u32) -> Result<Ball> {
        zeta_cached(s, self.bits())
    }

    /// Compares each of `lefts` against `rhs`.
    fn report(&self, id: &str, lefts: &[Ball], rhs: &Ball, terms: u64) -> IdentityReport {
        let mut difference = PrecReal::zero(self.bits());
        let mut worst_rad = PrecReal::zero(self.bits());
        for l in lefts {
            difference = difference.max((&l.mid - &rhs.mid).abs());
            worst_rad = worst_rad.max(l.rad.clone());
        }
        let tolerance = &(&self.base + &worst_rad) + &rhs.rad;
        IdentityReport {
            identity_id: id.to_string(),
            digits: self.digits,
            lhs: lefts[0].mid.clone(),
            rhs: rhs.mid.clone(),
            passed: difference <= tolerance,
            difference,
            tolerance,
            terms_used: terms,
            elapsed: self.start.elapsed(),
            residual: None,
            bracketed: None,
            error: None,
        }
    }

    fn exact_report(&self, id: &str, mismatch: BigRational, checked: u64) -> IdentityReport {
        let bits = self.bits();
        let lhs = PrecReal::from_rational_ceil(&mismatch, bits);
        IdentityReport {
            identity_id: id.to_string(),
            digits: self.digits,
            lhs: lhs.clone(),
            rhs: PrecReal::zero(bits),
            difference: lhs,
            tolerance: PrecReal::zero(bits),
            passed: mismatch.is_zero(),
            terms_used: checked,
            elapsed: self.start.elapsed(),
            residual: None,
            bracketed: None,
            error: None,
        }
    }
}

fn half() -> BigRational {
    rat(1, 2)
}

/// Right side of Euler's formula, `(m+2)ζ(m+1) - Σ_{n=1}^{m-2} ζ(m-n)ζ(n+1)`.
fn euler_rhs(ctx: &Ctx, m: u32) -> Result<Ball> {
    Ok(zeta_h_ball(m, &ctx.tol)?.mul_int(2))
}

fn check_i2(ctx: &Ctx) -> Result<IdentityReport> {
    let mut mismatch = BigRational::zero();
    let mut checked = 0;
    for r in 1..=10u32 {
        for n in 1..=30u64 {
            mismatch += (hyperharmonic(n, r)? - hyperharmonic_closed(n, r)?).abs();
            checked += 1;
        }
    }
    Ok(ctx.exact_report("i2_closed_form", mismatch, checked))
}

fn check_i4(ctx: &Ctx) -> Result<IdentityReport> {
    let mut mismatch = BigRational::zero();
    let mut checked = 0;
    for r in 0..=5u32 {
        for n in 1..=20u64 {
            mismatch += (gf_coefficient(n, r) - hyperharmonic_any(n, r)?).abs();
            checked += 1;
        }
    }
    Ok(ctx.exact_report("i4_generating_function", mismatch, checked))
}

fn check_eq1(ctx: &Ctx, m: u32) -> Result<IdentityReport> {
    let euler = zeta_h_ball(m, &ctx.tol)?;
    let (direct, terms) = sigma_direct_ball(1, m, &ctx.tol)?;
    Ok(ctx.report(&format!("eq1_m{m}"), &[euler], &direct, terms))
}

fn check_eq3(ctx: &Ctx, m: u32) -> Result<IdentityReport> {
    let (lhs, terms) = mezo_dil_lhs_ball(m, &ctx.tol)?;
    Ok(ctx.report(&format!("eq3_m{m}"), &[lhs], &euler_rhs(ctx, m)?, terms))
}

/// `Σ H_n ζ(m, n) = ζ_H(m-1) + ζ_H(m) - ζ(m-1)`, with `σ(2, m)` in closed
/// form as a third side.
fn check_eq4(ctx: &Ctx, m: u32) -> Result<IdentityReport> {
    let (hur, terms) = sigma_hurwitz_ball(2, m, 0, &ctx.tol)?;
    let (closed, _) = sigma_closed_ball(2, m, &ctx.tol)?;
    let rhs = &(&zeta_h_ball(m - 1, &ctx.tol)? + &zeta_h_ball(m, &ctx.tol)?) - &ctx.zeta(m - 1)?;
    Ok(ctx.report(&format!("eq4_m{m}"), &[hur, closed], &rhs, terms))
}

/// Evaluates `σ(r, m)` by the Hurwitz (`k = 0`), direct and closed routes.
fn three_ways(ctx: &Ctx, r: u32, m: u32) -> Result<(Vec<Ball>, u64)> {
    let (hur, t1) = sigma_hurwitz_ball(r, m, 0, &ctx.tol)?;
    let (direct, t2) = sigma_direct_ball(r, m, &ctx.tol)?;
    let (closed, t3) = sigma_closed_ball(r, m, &ctx.tol)?;
    Ok((vec![hur, direct, closed], t1 + t2 + t3))
}

fn check_golden(ctx: &Ctx, id: &str) -> Result<IdentityReport> {
    let z = |s| ctx.zeta(s);
    let (r, m, rhs) = match id {
        // 2ζ(3) + (5/4)ζ(4) - ζ(2)
        "eq5" => (
            2,
            3,
            &(&z(3)?.mul_int(2) + &z(4)?.mul_rational(&rat(5, 4))) - &z(2)?,
        ),
        // (5/4)ζ(4) + 3ζ(5) - ζ(2)ζ(3) - ζ(3)
        "eq6" => {
            let a = &z(4)?.mul_rational(&rat(5, 4)) + &z(5)?.mul_int(3);
            (2, 4, &(&a - &(&z(2)? * &z(3)?)) - &z(3)?)
        }
        // (15/8)ζ(4) + ζ_H(4) - (1/4)ζ(3) - (3/4)ζ(2); the 15/6 variant is
        // kept as a known-false identity
        "eq8" | "eq8_15over6" => {
            let c4 = if id == "eq8" { rat(15, 8) } else { rat(15, 6) };
            let a = &z(4)?.mul_rational(&c4) + &zeta_h_ball(4, &ctx.tol)?;
            let b = &z(3)?.mul_rational(&rat(1, 4)) + &z(2)?.mul_rational(&rat(3, 4));
            (3, 4, &a - &b)
        }
        _ => return Err(Error::UnknownIdentity(id.to_string())),
    };
    let (lefts, terms) = three_ways(ctx, r, m)?;
    Ok(ctx.report(id, &lefts, &rhs, terms))
}

/// `σ(3, m) = ζ_H(m-2)/2 + (3/2)ζ_H(m-1) + ζ_H(m) - (5/4)ζ(m-1) - (3/4)ζ(m-2)`.
fn check_sigma3(ctx: &Ctx, m: u32) -> Result<IdentityReport> {
    let (closed, terms) = sigma_closed_ball(3, m, &ctx.tol)?;
    let zh = |s| zeta_h_ball(s, &ctx.tol);
    let pos = &(&zh(m - 2)?.mul_rational(&half()) + &zh(m - 1)?.mul_rational(&rat(3, 2))) + &zh(m)?;
    let neg =
        &ctx.zeta(m - 1)?.mul_rational(&rat(5, 4)) + &ctx.zeta(m - 2)?.mul_rational(&rat(3, 4));
    Ok(ctx.report(&format!("sigma3_m{m}"), &[closed], &(&pos - &neg), terms))
}

fn check_thm2(ctx: &Ctx, r: u32, m: u32) -> Result<IdentityReport> {
    let (direct, terms) = sigma_direct_ball(r, m, &ctx.tol)?;
    let (closed, _) = sigma_closed_ball(r, m, &ctx.tol)?;
    Ok(ctx.report(&format!("thm2_r{r}_m{m}"), &[direct], &closed, terms))
}

fn check_thm1(ctx: &Ctx, r: u32, m: u32, k: u32) -> Result<IdentityReport> {
    let (hur, terms) = sigma_hurwitz_ball(r, m, k, &ctx.tol)?;
    let (closed, _) = sigma_closed_ball(r, m, &ctx.tol)?;
    Ok(ctx.report(&format!("thm1_r{r}_m{m}_k{k}"), &[hur], &closed, terms))
}

/// `Σ 1/(n^m (n+ρ))` summed directly against the closed form.
fn check_lemma(ctx: &Ctx, m: u32, rho: &BigRational) -> Result<IdentityReport> {
    let closed = mu_ball(m, rho, &ctx.tol)?;
    let n0 = tail_start(
        rho.ceil().to_integer().try_into().unwrap_or(u32::MAX),
        ctx.bits(),
    );
    let (summed, terms) = prefix_plus_tail(
        n0,
        &ctx.tol,
        |n| Ok(BigRational::one() / (rat_int(n).pow(m as i32) * (rat_int(n) + rho))),
        |n0, order| {
            Ok(Expansion::monomial(n0, -(m as i64), BigRational::one())
                .mul(&Expansion::recip_shift(n0, rho, order)?))
        },
    )?;
    let id = format!("lemma_l_m{m}_rho{}", rho_tag(rho));
    Ok(ctx.report(&id, &[summed], &closed, terms))
}

/// `Σ_{n>=1} h_n^(r) / ((n+lo)(n+lo+1)...(n+r+1))` with `lo` = 0 or 1.
fn beta_series(ctx: &Ctx, r: u32, lo: u32) -> Result<(Ball, u64)> {
    let n0 = tail_start(r + 2, ctx.bits());
    prefix_plus_tail(
        n0,
        &ctx.tol,
        |n| {
            let mut den = BigRational::one();
            for j in lo..=r + lo {
                den *= rat_int(n + j as u64);
            }
            Ok(hyperharmonic_any(n, r)? / den)
        },
        |n0, order| {
            let mut x = Expansion::hyperharmonic(n0, r, order)?;
            for j in lo..=r + lo {
                x = x.mul(&Expansion::recip_shift(n0, &rat_int(j), order)?);
            }
            Ok(x)
        },
    )
}

fn inv_factorial(r: u32) -> BigRational {
    BigRational::one() / biguint_rat(factorial(r as u64))
}

/// `Σ h_n^(r) B(r+1, n+1) / r! = 1/r!`, or with `beta_form` the same sum
/// scaled by `r!` against `1`.
fn check_prop5(ctx: &Ctx, r: u32, beta_form: bool) -> Result<IdentityReport> {
    let (sum, terms) = beta_series(ctx, r, 1)?;
    let bits = ctx.bits();
    let (id, lhs, rhs) = if beta_form {
        let scale = biguint_rat(factorial(r as u64));
        (
            format!("eq23_r{r}"),
            sum.mul_rational(&scale),
            Ball::from_int(1, bits),
        )
    } else {
        (
            format!("prop5_r{r}"),
            sum,
            Ball::from_rational(&inv_factorial(r), bits),
        )
    };
    Ok(ctx.report(&id, &[lhs], &rhs, terms))
}

/// `Σ h_n^(r) / (n(n+1)...(n+r)) = ζ(2)/r!`, or `Σ h_n^(r) B(r+1, n) = ζ(2)`.
fn check_prop6(ctx: &Ctx, r: u32, beta_form: bool) -> Result<IdentityReport> {
    let (sum, terms) = beta_series(ctx, r, 0)?;
    let zeta2 = ctx.zeta(2)?;
    let (id, lhs, rhs) = if beta_form {
        let scale = biguint_rat(factorial(r as u64));
        (format!("prop6beta_r{r}"), sum.mul_rational(&scale), zeta2)
    } else {
        (
            format!("prop6_r{r}"),
            sum,
            zeta2.mul_rational(&inv_factorial(r)),
        )
    };
    Ok(ctx.report(&id, &[lhs], &rhs, terms))
}

pub fn verify_prop5(r: u32, req: &PrecisionRequest) -> Result<IdentityReport> {
    check_prop5(&Ctx::new(req), r, false)
}

pub fn verify_prop6(r: u32, req: &PrecisionRequest) -> Result<IdentityReport> {
    check_prop6(&Ctx::new(req), r, false)
}

/// Rational coefficient of `(-1)^(m+1) H_m` in the alternating series.
fn alternating_coefficient(variant: Alternating, n: u64, m: u64) -> BigRational {
    match variant {
        Alternating::First => BigRational::new(
            (2 * m + 2 * n + 3).into(),
            ((m + 1) * (m + 2 * n + 2)).into(),
        ),
        Alternating::Second => BigRational::new((2 * n).into(), ((m + 1) * (m + 2 * n + 1)).into()),
    }
}

/// `2 ln 2 Σ_{k=0}^{a} 1/(2k+1) - Σ_{j=1}^{b} (1/j) Σ_{i=1}^{j} (-1)^(i-1)/i`.
fn alternating_rhs(variant: Alternating, n: u64, bits: u32) -> Ball {
    let (a, b) = match variant {
        Alternating::First => (n as i64, 2 * n + 1),
        Alternating::Second => (n as i64 - 1, 2 * n),
    };
    let odd: BigRational = (0..=a).map(|k| rat(1, 2 * k + 1)).sum();
    let mut inner = BigRational::zero();
    let mut nested = BigRational::zero();
    for j in 1..=b as i64 {
        inner += if j % 2 == 1 { rat(1, j) } else { rat(-1, j) };
        nested += &inner / rat_int(j);
    }
    let w = bits + 8;
    (&ln2_ball(w).mul_int(2).mul_rational(&odd) - &Ball::from_rational(&nested, w)).with_bits(bits)
}

const ALT_LEVELS: usize = 30;
const ALT_START: usize = 64;
const ALT_CAP: usize = 1_000_000;

/// Repeated averaging over the last `ALT_LEVELS + 1` partial sums ending at `end`.
fn averaged(partial: &[PrecReal], end: usize) -> PrecReal {
    let bits = partial[0].precision_bits();
    let mut acc = PrecReal::zero(bits + ALT_LEVELS as u32);
    let mut c = num_bigint::BigInt::one();
    for i in 0..=ALT_LEVELS {
        acc = &acc + &partial[end - ALT_LEVELS + i].mul_int(c.clone());
        c = c * (ALT_LEVELS - i) / (i + 1);
    }
    acc.shrink(1u64 << ALT_LEVELS).with_bits(bits)
}

pub fn verify_alternating(
    n: u32,
    variant: Alternating,
    req: &PrecisionRequest,
) -> Result<IdentityReport> {
    check_alternating(&Ctx::new(req), n, variant)
}

fn check_alternating(ctx: &Ctx, n: u32, variant: Alternating) -> Result<IdentityReport> {
    if variant == Alternating::Second && n == 0 {
        return Err(Error::invalid("the second alternating series needs n >= 1"));
    }
    let bits = ctx.bits() + 32;
    let rhs = alternating_rhs(variant, n as u64, bits);

    // partial[i] = S_i, with H_m carried in fixed point.
    let mut partial = vec![PrecReal::zero(bits)];
    let mut h = PrecReal::zero(bits);
    let extend = |partial: &mut Vec<PrecReal>, h: &mut PrecReal, upto: usize| {
        for m in partial.len()..=upto {
            *h = &*h + &PrecReal::from_rational(&rat(1, m as i64), bits);
            let term = h.mul_rational(&alternating_coefficient(variant, n as u64, m as u64));
            let prev = partial.last().unwrap();
            partial.push(if m % 2 == 1 {
                prev + &term
            } else {
                prev - &term
            });
        }
    };

    let quarter = ctx.tol.shrink(4);
    let mut end = ALT_START;
    extend(&mut partial, &mut h, end);
    let mut estimate = averaged(&partial, end);
    let (residual, bracketed) = loop {
        let next_end = end * 2;
        extend(&mut partial, &mut h, next_end);
        let next = averaged(&partial, next_end);
        // The estimate at `end` is far less accurate than the one at
        // `2 end`, so their gap overestimates the remaining error.
        let residual = (&next - &estimate).abs();
        estimate = next;
        end = next_end;
        if residual <= quarter || end * 2 > ALT_CAP {
            let a = averaged(&partial, end - 2);
            let b = averaged(&partial, end - 1);
            let bracketed = (&b - &a).signum() * (&estimate - &b).signum() < 0;
            break (residual, bracketed);
        }
    };
    // each H_m and each term rounds by at most one unit
    let rounding = PrecReal::ulp(bits).mul_int(4 * end as u64);
    let lhs = Ball::new(estimate, &residual + &rounding);
    let id = match variant {
        Alternating::First => format!("alt_first_n{n}"),
        Alternating::Second => format!("alt_second_n{n}"),
    };
    let mut report = ctx.report(&id, &[lhs], &rhs, end as u64);
    report.residual = Some(residual);
    report.bracketed = Some(bracketed);
    Ok(report)
}

fn num<T: std::str::FromStr>(s: &str) -> Option<T> {
    s.parse().ok()
}

/// Splits `"thm1_r3_m4_k1"` after `prefix` into `[3, 4, 1]` for the given
/// parameter letters.
fn params(rest: &str, letters: &[char]) -> Option<Vec<u32>> {
    let parts: Vec<&str> = rest.split('_').collect();
    if parts.len() != letters.len() {
        return None;
    }
    parts
        .iter()
        .zip(letters)
        .map(|(p, l)| p.strip_prefix(*l).and_then(num))
        .collect()
}

/// Evaluates one identity by id, e.g. `eq5`, `eq1_m4`, `thm1_r3_m5_k2`,
/// `lemma_l_m2_rho2.5`, `prop6_r2` or `alt_second_n1`.
pub fn verify_eq(identity_id: &str, req: &PrecisionRequest) -> Result<IdentityReport> {
    let ctx = Ctx::new(req);
    dispatch(&ctx, identity_id)
        .unwrap_or_else(|| Err(Error::UnknownIdentity(identity_id.to_string())))
}

fn dispatch(ctx: &Ctx, id: &str) -> Option<Result<IdentityReport>> {
    let one = |prefix: &str, letter: char| -> Option<u32> {
        params(id.strip_prefix(prefix)?, &[letter]).map(|v| v[0])
    };
    let m_in = |m: u32, lo: u32| (m >= lo).then_some(m);
    Some(match id {
        "i2_closed_form" => check_i2(ctx),
        "i4_generating_function" => check_i4(ctx),
        "eq5" | "eq6" | "eq8" | "eq8_15over6" => check_golden(ctx, id),
        _ => {
            if let Some(m) = one("eq1_", 'm').and_then(|m| m_in(m, 2)) {
                check_eq1(ctx, m)
            } else if let Some(m) = one("eq3_", 'm').and_then(|m| m_in(m, 2)) {
                check_eq3(ctx, m)
            } else if let Some(m) = one("eq4_", 'm').and_then(|m| m_in(m, 3)) {
                check_eq4(ctx, m)
            } else if let Some(m) = one("sigma3_", 'm').and_then(|m| m_in(m, 4)) {
                check_sigma3(ctx, m)
            } else if let Some(r) = one("prop5_", 'r') {
                check_prop5(ctx, r, false)
            } else if let Some(r) = one("eq23_", 'r') {
                check_prop5(ctx, r, true)
            } else if let Some(r) = one("prop6_", 'r') {
                check_prop6(ctx, r, false)
            } else if let Some(r) = one("prop6beta_", 'r') {
                check_prop6(ctx, r, true)
            } else if let Some(n) = one("alt_first_", 'n') {
                check_alternating(ctx, n, Alternating::First)
            } else if let Some(n) = one("alt_second_", 'n').filter(|&n| n >= 1) {
                check_alternating(ctx, n, Alternating::Second)
            } else if let Some(v) = id
                .strip_prefix("thm2_")
                .and_then(|s| params(s, &['r', 'm']))
            {
                check_thm2(ctx, v[0], v[1])
            } else if let Some(v) = id
                .strip_prefix("thm1_")
                .and_then(|s| params(s, &['r', 'm', 'k']))
            {
                check_thm1(ctx, v[0], v[1], v[2])
            } else if let Some((m, rho)) = id.strip_prefix("lemma_l_m").and_then(|s| {
                let (m, rho) = s.split_once("_rho")?;
                Some((num::<u32>(m)?, parse_rho(rho)?))
            }) {
                check_lemma(ctx, m, &rho)
            } else {
                return None;
            }
        }
    })
}

/// Runs every id of `grid` (in parallel) and returns the reports in
/// registered order. Evaluation errors are reported as failures.
pub fn run_suite(grid: &SuiteGrid, req: &PrecisionRequest) -> Vec<IdentityReport> {
    run_ids(&grid.ids(), req)
}

/// Runs the given ids in order.
pub fn run_ids(ids: &[String], req: &PrecisionRequest) -> Vec<IdentityReport> {
    ids.par_iter()
        .map(|id| verify_eq(id, req).unwrap_or_else(|e| failed_report(id, req, &e)))
        .collect()
}

pub fn run_full_suite(req: &PrecisionRequest) -> Vec<IdentityReport> {
    run_suite(&SuiteGrid::default(), req)
}

fn failed_report(id: &str, req: &PrecisionRequest, err: &Error) -> IdentityReport {
    let bits = req.guard_bits();
    IdentityReport {
        identity_id: id.to_string(),
        digits: req.digits(),
        lhs: PrecReal::zero(bits),
        rhs: PrecReal::zero(bits),
        difference: PrecReal::zero(bits),
        tolerance: PrecReal::zero(bits),
        passed: false,
        terms_used: 0,
        elapsed: Duration::ZERO,
        residual: None,
        bracketed: None,
        error: Some(err.to_string()),
    }
}

/// `Σ_{n=1}^{count} h_n^(r) B(r+1, n+1)` exactly, for monotonicity checks.
pub fn prop5_partial_sum(r: u32, count: u64) -> Result<BigRational> {
    let mut acc = BigRational::zero();
    for n in 1..=count {
        acc += hyperharmonic_any(n, r)? * beta_int(r as u64 + 1, n + 1)?;
    }
    Ok(acc)
}

/// `Σ_{n=1}^{count} h_n^(r) B(r+1, n)` exactly.
pub fn prop6_partial_sum(r: u32, count: u64) -> Result<BigRational> {
    let mut acc = BigRational::zero();
    for n in 1..=count {
        acc += hyperharmonic_any(n, r)? * beta_int(r as u64 + 1, n)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(d: u32) -> PrecisionRequest {
        PrecisionRequest::new(d).unwrap()
    }

    #[test]
    fn ids_round_trip_through_dispatch() {
        let grid = SuiteGrid::default();
        let ids = grid.ids();
        assert!(ids.contains(&"lemma_l_m3_rho2.5".to_string()));
        assert!(ids.contains(&"thm1_r4_m5_k3".to_string()));
        assert_eq!(parse_rho("0.5"), Some(rat(1, 2)));
        assert_eq!(rho_tag(&rat(5, 2)), "2.5");
        assert!(matches!(
            verify_eq("eq7", &req(5)),
            Err(Error::UnknownIdentity(_))
        ));
        assert!(matches!(
            verify_eq("eq1_m1", &req(5)),
            Err(Error::UnknownIdentity(_))
        ));
    }

    #[test]
    fn golden_identities_pass() {
        for id in ["eq5", "eq6", "eq8"] {
            let rep = verify_eq(id, &req(20)).unwrap();
            assert!(rep.passed, "{id}: {:?}", rep.record(false));
        }
    }

    #[test]
    fn misprinted_coefficient_fails() {
        let rep = verify_eq("eq8_15over6", &req(15)).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.rhs.to_decimal(5), "2.30507");
        assert!(!SuiteGrid::default()
            .ids()
            .contains(&"eq8_15over6".to_string()));
    }

    #[test]
    fn props_pass_small_r() {
        for r in 0..=2 {
            assert!(verify_prop5(r, &req(15)).unwrap().passed);
            assert!(verify_prop6(r, &req(15)).unwrap().passed);
        }
        let p = verify_prop5(3, &req(12)).unwrap();
        assert_eq!(p.rhs.to_decimal(10), "0.1666666667");
    }

    #[test]
    fn alternating_examples() {
        let rep = verify_alternating(0, Alternating::First, &req(15)).unwrap();
        assert!(rep.passed, "{:?}", rep.record(false));
        // 2 ln 2 - 1
        assert_eq!(rep.rhs.to_decimal(12), "0.386294361120");
        let rep = verify_alternating(1, Alternating::Second, &req(15)).unwrap();
        assert!(rep.passed);
        // 2 ln 2 - 5/4
        assert_eq!(rep.rhs.to_decimal(12), "0.136294361120");
        assert!(rep.residual.is_some());
        assert!(verify_alternating(0, Alternating::Second, &req(10)).is_err());
    }

    #[test]
    fn empty_grid_gives_no_reports() {
        assert!(run_suite(&SuiteGrid::empty(), &req(10)).is_empty());
    }
}
