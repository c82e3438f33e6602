//! Certified asymptotic expansions in `1/n` and the tail sums they give.
//!
//! An [`Expansion`] represents a sequence `f(n)`, valid for `n >= n0`, as
//!
//! ```text
//! f(n) = Σ c_{e,j} ln^j(n) n^-e  +  ρ(n),     |ρ(n)| <= Σ κ_{k,E} (ln n + 1)^k n^-E
//! ```
//!
//! with exact coefficients (rational polynomials in Euler's constant) and
//! exact rational remainder constants. Products and sums keep the remainder
//! certified, and [`Expansion::tail`] turns the whole thing into an enclosure
//! of `Σ_{n>=n0} f(n)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{bernoulli, factorial, rat_int};
use crate::real::{
    biguint_rat, euler_gamma_ball, gamma_upper, ln_ball, power_log_tail, Ball, PrecReal,
};

/// `Σ_i q_i γ^i` with rational `q_i`.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct GammaPoly(Vec<BigRational>);

impl GammaPoly {
    pub fn constant(q: BigRational) -> Self {
        let mut p = GammaPoly(vec![q]);
        p.trim();
        p
    }

    pub fn gamma() -> Self {
        GammaPoly(vec![BigRational::zero(), BigRational::one()])
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn uses_gamma(&self) -> bool {
        self.0.len() > 1
    }

    fn add_assign(&mut self, other: &GammaPoly) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), BigRational::zero());
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
        self.trim();
    }

    fn mul(&self, other: &GammaPoly) -> GammaPoly {
        if self.is_zero() || other.is_zero() {
            return GammaPoly::default();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        let mut p = GammaPoly(out);
        p.trim();
        p
    }

    /// Upper bound on `|value|` using `0 <= γ < 0.5773`.
    fn abs_upper(&self) -> BigRational {
        let g = gamma_upper();
        let mut pow = BigRational::one();
        let mut acc = BigRational::zero();
        for c in &self.0 {
            acc += c.abs() * &pow;
            pow *= &g;
        }
        acc
    }

    fn eval(&self, gamma: Option<&Ball>, bits: u32) -> Ball {
        let mut acc = Ball::zero(bits);
        let mut pow = Ball::from_int(1, bits);
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                pow = &pow * gamma.expect("γ enclosure required");
            }
            if !c.is_zero() {
                acc = &acc + &pow.mul_rational(c);
            }
        }
        acc
    }
}

/// Rounds a non-negative rational up to one with about 128 significant bits
/// in numerator and denominator.
fn round_up(q: BigRational) -> BigRational {
    let (nb, db) = (q.numer().bits(), q.denom().bits());
    if nb.max(db) <= 192 {
        return q;
    }
    let s = nb.min(db).saturating_sub(128) as usize;
    if s == 0 {
        return q;
    }
    let one = BigInt::one();
    let num = (q.numer() + ((&one << s) - &one)) >> s;
    let den = q.denom() >> s;
    BigRational::new(num, den)
}

/// Remainder exponents beyond the leading one by more than this are folded.
const FOLD_SPAN: i64 = 4;

/// Asymptotic expansion of a sequence in `1/n`, valid for `n >= n0`.
#[derive(Clone, Debug)]
pub(crate) struct Expansion {
    n0: u64,
    /// `(e, j) -> c`: the term `c ln^j(n) n^-e`.
    main: BTreeMap<(i64, u32), GammaPoly>,
    /// `(k, E) -> κ`: the bound `κ (ln n + 1)^k n^-E`.
    rem: BTreeMap<(u32, i64), BigRational>,
}

impl Expansion {
    pub fn zero(n0: u64) -> Self {
        Expansion {
            n0,
            main: BTreeMap::new(),
            rem: BTreeMap::new(),
        }
    }

    fn add_main(&mut self, e: i64, j: u32, c: GammaPoly) {
        if c.is_zero() {
            return;
        }
        let slot = self.main.entry((e, j)).or_default();
        slot.add_assign(&c);
        if slot.is_zero() {
            self.main.remove(&(e, j));
        }
    }

    fn add_rem(&mut self, k: u32, e: i64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.rem.entry((k, e)).or_insert_with(BigRational::zero);
        *slot = round_up(&*slot + c);
    }

    /// `c n^p`.
    pub fn monomial(n0: u64, p: i64, c: BigRational) -> Self {
        let mut x = Expansion::zero(n0);
        x.add_main(-p, 0, GammaPoly::constant(c));
        x
    }

    pub fn constant(n0: u64, c: BigRational) -> Self {
        Expansion::monomial(n0, 0, c)
    }

    /// `Σ_i coeffs[i] n^i`.
    pub fn polynomial(n0: u64, coeffs: &[BigRational]) -> Self {
        let mut x = Expansion::zero(n0);
        for (i, c) in coeffs.iter().enumerate() {
            x.add_main(-(i as i64), 0, GammaPoly::constant(c.clone()));
        }
        x
    }

    /// `H_n = ln n + γ + 1/(2n) - Σ_{j=1}^{K} B_2j/(2j) n^-2j + ρ`, with
    /// `|ρ| <= |B_{2K+2}| / (2K+2) n^-(2K+2)` and `2K + 2 >= order`.
    pub fn harmonic(n0: u64, order: u32) -> Self {
        let k_max = (order.saturating_sub(1) / 2) as u64;
        let mut x = Expansion::zero(n0);
        x.add_main(0, 1, GammaPoly::constant(BigRational::one()));
        x.add_main(0, 0, GammaPoly::gamma());
        x.add_main(
            1,
            0,
            GammaPoly::constant(BigRational::new(1.into(), 2.into())),
        );
        for j in 1..=k_max {
            let c = -bernoulli(2 * j) / rat_int(2 * j);
            x.add_main(2 * j as i64, 0, GammaPoly::constant(c));
        }
        let next = 2 * k_max + 2;
        x.add_rem(0, next as i64, (bernoulli(next) / rat_int(next)).abs());
        x
    }

    /// `1/(n+c) = Σ_{i<L} (-c)^i n^-(i+1) + ρ`, `|ρ| <= |c|^L / (1 - |c|/n0) n^-(L+1)`.
    pub fn recip_shift(n0: u64, c: &BigRational, order: u32) -> Result<Self> {
        if c.abs() >= rat_int(n0) {
            return Err(Error::invalid(format!("shift {c} too large for n0 = {n0}")));
        }
        let terms = order.max(1);
        let mut x = Expansion::zero(n0);
        let neg = -c;
        let mut pow = BigRational::one();
        for i in 0..terms {
            x.add_main(i as i64 + 1, 0, GammaPoly::constant(pow.clone()));
            pow *= &neg;
        }
        if !c.is_zero() {
            let slack = BigRational::one() - c.abs() / rat_int(n0);
            x.add_rem(0, terms as i64 + 1, pow.abs() / slack);
        }
        Ok(x)
    }

    /// `ζ(s, n)` by Euler–Maclaurin at `n` with `K >= 1` Bernoulli terms,
    /// `2K >= order`; the remainder is bounded by the last included term.
    pub fn hurwitz(n0: u64, s: u32, order: u32) -> Self {
        assert!(s >= 2);
        let k_max = (order.div_ceil(2)).max(1) as u64;
        let s_i = s as i64;
        let mut x = Expansion::zero(n0);
        x.add_main(
            s_i - 1,
            0,
            GammaPoly::constant(BigRational::new(1.into(), (s_i - 1).into())),
        );
        x.add_main(
            s_i,
            0,
            GammaPoly::constant(BigRational::new(1.into(), 2.into())),
        );
        let mut rising = BigInt::from(s); // (s)_{2j-1}
        let mut last = BigRational::zero();
        for j in 1..=k_max {
            if j > 1 {
                rising *= BigInt::from(s as u64 + 2 * j - 3) * BigInt::from(s as u64 + 2 * j - 2);
            }
            let c = bernoulli(2 * j) / biguint_rat(factorial(2 * j)) * rat_int(rising.clone());
            last = c.abs();
            x.add_main(s_i + 2 * j as i64 - 1, 0, GammaPoly::constant(c));
        }
        x.add_rem(0, s_i + 2 * k_max as i64 - 1, last);
        x
    }

    /// `h_n^(q)`: `1/n` for `q = 0`, otherwise
    /// `(1/(q-1)!) (n+1)...(n+q-1) (H_n - H_{q-1} + Σ_{j=1}^{q-1} 1/(n+j))`.
    pub fn hyperharmonic(n0: u64, q: u32, order: u32) -> Result<Self> {
        if q == 0 {
            return Ok(Expansion::monomial(n0, -1, BigRational::one()));
        }
        let mut poly = vec![BigRational::one()];
        for j in 1..q as i64 {
            // multiply by (n + j)
            let mut next = vec![BigRational::zero(); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] += c;
                next[i] += c * rat_int(j);
            }
            poly = next;
        }
        let inv_fact = BigRational::one() / biguint_rat(factorial(q as u64 - 1));
        let poly: Vec<BigRational> = poly.iter().map(|c| c * &inv_fact).collect();
        let mut inner = Expansion::harmonic(n0, order);
        inner = inner.add(&Expansion::constant(
            n0,
            -crate::exact::harmonic(q as u64 - 1),
        ));
        for j in 1..q as i64 {
            inner = inner.add(&Expansion::recip_shift(n0, &rat_int(j), order)?);
        }
        Ok(Expansion::polynomial(n0, &poly).mul(&inner))
    }

    pub fn add(&self, other: &Expansion) -> Expansion {
        debug_assert_eq!(self.n0, other.n0);
        let mut out = self.clone();
        for ((e, j), c) in &other.main {
            out.add_main(*e, *j, c.clone());
        }
        for ((k, e), c) in &other.rem {
            out.add_rem(*k, *e, c.clone());
        }
        out.compact();
        out
    }

    /// Bound on `|main part|` in remainder form.
    fn main_bound(&self) -> BTreeMap<(u32, i64), BigRational> {
        let mut out: BTreeMap<(u32, i64), BigRational> = BTreeMap::new();
        for ((e, j), c) in &self.main {
            *out.entry((*j, *e)).or_insert_with(BigRational::zero) += c.abs_upper();
        }
        out
    }

    pub fn mul(&self, other: &Expansion) -> Expansion {
        debug_assert_eq!(self.n0, other.n0);
        let mut out = Expansion::zero(self.n0);
        for ((e1, j1), c1) in &self.main {
            for ((e2, j2), c2) in &other.main {
                out.add_main(e1 + e2, j1 + j2, c1.mul(c2));
            }
        }
        let mut cross = |a: &BTreeMap<(u32, i64), BigRational>,
                         b: &BTreeMap<(u32, i64), BigRational>| {
            for ((k1, e1), c1) in a {
                for ((k2, e2), c2) in b {
                    out.add_rem(k1 + k2, e1 + e2, c1 * c2);
                }
            }
        };
        let (mb_self, mb_other) = (self.main_bound(), other.main_bound());
        cross(&mb_self, &other.rem);
        cross(&self.rem, &mb_other);
        cross(&self.rem, &other.rem);
        out.compact();
        out
    }

    /// Folds everything beyond the leading remainder order into the
    /// remainder, so that repeated products stay small.
    fn compact(&mut self) {
        let Some(e_min) = self.remainder_order() else {
            return;
        };
        self.truncate_beyond(e_min);
        let cap = e_min + FOLD_SPAN;
        let high: Vec<(u32, i64)> = self.rem.keys().filter(|(_, e)| *e > cap).copied().collect();
        let n0 = rat_int(self.n0);
        for key in high {
            // n^-E <= n0^-(E - cap) n^-cap for n >= n0
            let c = self.rem.remove(&key).unwrap() * n0.pow(-((key.1 - cap) as i32));
            self.add_rem(key.0, cap, c);
        }
    }

    /// Smallest remainder exponent, if there is any remainder.
    pub fn remainder_order(&self) -> Option<i64> {
        self.rem.keys().map(|(_, e)| *e).min()
    }

    /// Moves main terms with `e > e_max` into the remainder.
    fn truncate_beyond(&mut self, e_max: i64) {
        let beyond: Vec<(i64, u32)> = self
            .main
            .keys()
            .filter(|(e, _)| *e > e_max)
            .copied()
            .collect();
        for key in beyond {
            let c = self.main.remove(&key).unwrap();
            self.add_rem(key.1, key.0, c.abs_upper());
        }
    }

    /// Upper bound on `Σ_{n>=n0} |ρ(n)|`, using `Σ_{n>=n0} g(n) <= g(n0) + ∫_{n0}^∞ g`
    /// for the decreasing `g(x) = (ln x + 1)^k x^-E`.
    pub fn remainder_tail_bound(&self, bits: u32) -> Result<PrecReal> {
        let n0 = rat_int(self.n0);
        // exact rational upper bound on ln n0 + 1
        let l1 = (&ln_ball(&n0, bits.max(64)).upper() + &PrecReal::from_int(1, bits.max(64)))
            .to_rational();
        let l1 = round_up(l1);
        let l1_f = PrecReal::from_rational(&l1, 64).to_f64();
        let mut total = BigRational::zero();
        for ((k, e), c) in &self.rem {
            if *e < 2 {
                return Err(Error::invalid(
                    "remainder does not decay fast enough to sum",
                ));
            }
            if (*e as f64) * l1_f <= *k as f64 {
                return Err(Error::invalid("remainder bound is not decreasing from n0"));
            }
            let k = *k;
            let l1_pows: Vec<BigRational> = (0..=k as i32).map(|i| l1.pow(i)).collect();
            let em1 = rat_int(e - 1);
            // g(n0) + n0^(1-E) Σ_i k!/(k-i)! (L+1)^(k-i) / (E-1)^(i+1)
            let mut inner = &l1_pows[k as usize] / &n0;
            let mut falling = BigInt::one();
            for i in 0..=k {
                if i > 0 {
                    falling *= BigInt::from(k - i + 1);
                }
                inner +=
                    rat_int(falling.clone()) * &l1_pows[(k - i) as usize] / em1.pow(i as i32 + 1);
            }
            total += round_up(inner * c * n0.pow(1 - *e as i32));
        }
        Ok(&PrecReal::from_rational_ceil(&total, bits) + &PrecReal::ulp(bits))
    }

    /// Enclosure of `Σ_{n>=n0} f(n)` with radius about `tol` plus the
    /// remainder bound.
    pub fn tail(&self, tol: &PrecReal) -> Result<Ball> {
        let bits = tol.precision_bits();
        if let Some(((e, _), _)) = self.main.iter().find(|((e, _), _)| *e < 2) {
            return Err(Error::invalid(format!("tail with n^-{e} term diverges")));
        }
        let count = self.main.len().max(1) as u64;
        let gamma = if self.main.values().any(GammaPoly::uses_gamma) {
            Some(euler_gamma_ball(&tol.shrink(8 * count)))
        } else {
            None
        };
        let n0 = rat_int(self.n0);
        let mut acc = Ball::zero(bits);
        for ((e, j), c) in &self.main {
            let mag = c.abs_upper().ceil().to_integer();
            let factor: u64 = (mag + 1u32).try_into().unwrap_or(u64::MAX / 16);
            let t = power_log_tail(*e as u32, *j, &n0, &tol.shrink(4 * count).shrink(factor))?;
            let coef = c.eval(gamma.as_ref(), t.bits());
            acc = &acc + &(&coef * &t).with_bits(bits);
        }
        Ok(acc.add_error(&self.remainder_tail_bound(bits)?))
    }
}

/// Evaluates `Σ_{n>=n0} f(n)` for an expansion family, raising the order
/// until the remainder tail is below `tol / 4`.
pub(crate) fn certified_tail<F>(n0: u64, tol: &PrecReal, build: F) -> Result<(Ball, u32)>
where
    F: Fn(u64, u32) -> Result<Expansion>,
{
    let bits = tol.precision_bits();
    let quarter = tol.shrink(4);
    let log_n0 = (n0 as f64).log2().max(1.0);
    let mut order = ((bits as f64 / log_n0).ceil() as u32).max(4);
    let max_order = order * 4 + 64;
    loop {
        let x = build(n0, order)?;
        let rb = x.remainder_tail_bound(bits)?;
        if rb < quarter {
            return Ok((x.tail(&tol.shrink(2))?, order));
        }
        order += 4;
        if order > max_order {
            return Err(Error::PrecisionNotReached {
                digits: bits,
                reason: format!("asymptotic tail from n0 = {n0} did not converge"),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{harmonic, rat};
    use crate::real::zeta_ball;

    fn eval_at(x: &Expansion, n: u64, bits: u32) -> (f64, f64) {
        let ln = ln_ball(&rat_int(n), bits).mid.to_f64();
        let g = 0.5772156649015329f64;
        let mut v = 0.0;
        for ((e, j), c) in &x.main {
            let mut cv = 0.0;
            let mut gp = 1.0;
            for q in &c.0 {
                cv += q.to_string().parse::<f64>().unwrap_or_else(|_| {
                    let (a, b) = (q.numer().to_string(), q.denom().to_string());
                    a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap()
                }) * gp;
                gp *= g;
            }
            v += cv * ln.powi(*j as i32) * (n as f64).powi(-(*e as i32));
        }
        let mut r = 0.0;
        for ((k, e), c) in &x.rem {
            let cv = c.numer().to_string().parse::<f64>().unwrap()
                / c.denom().to_string().parse::<f64>().unwrap();
            r += cv * (ln + 1.0).powi(*k as i32) * (n as f64).powi(-(*e as i32));
        }
        (v, r)
    }

    #[test]
    fn harmonic_expansion_encloses_exact_values() {
        let x = Expansion::harmonic(10, 6);
        for n in [10u64, 17, 40] {
            let (v, r) = eval_at(&x, n, 80);
            let exact = PrecReal::from_rational(&harmonic(n), 80).to_f64();
            assert!(
                (v - exact).abs() <= r + 1e-14,
                "n = {n}: {v} vs {exact} (r = {r})"
            );
        }
    }

    #[test]
    fn recip_shift_encloses() {
        let x = Expansion::recip_shift(8, &rat(3, 1), 5).unwrap();
        for n in [8u64, 9, 30] {
            let (v, r) = eval_at(&x, n, 80);
            assert!((v - 1.0 / (n as f64 + 3.0)).abs() <= r + 1e-15);
        }
        assert!(Expansion::recip_shift(3, &rat(3, 1), 5).is_err());
    }

    #[test]
    fn hyperharmonic_expansion_encloses() {
        for q in 0..=4u32 {
            let x = Expansion::hyperharmonic(20, q, 8).unwrap();
            for n in [20u64, 25, 50] {
                let (v, r) = eval_at(&x, n, 80);
                let exact =
                    PrecReal::from_rational(&crate::exact::hyperharmonic_any(n, q).unwrap(), 80)
                        .to_f64();
                assert!((v - exact).abs() <= r + 1e-12 * exact.abs(), "q={q} n={n}");
            }
        }
    }

    #[test]
    fn tail_of_inverse_square_is_hurwitz() {
        // Σ_{n>=n0} n^-2 = ζ(2, n0)
        let tol = PrecReal::pow10_neg(30, 140);
        let x = Expansion::monomial(50, -2, BigRational::one());
        let t = x.tail(&tol).unwrap();
        let z = crate::real::hurwitz_ball(2, &rat(50, 1), &tol).unwrap();
        assert!((&t.mid - &z.mid).abs() <= &(&t.rad + &z.rad) + &tol);
    }

    #[test]
    fn certified_tail_of_zeta_h() {
        // Σ_{n>=1} H_n/n^2 = 2ζ(3): exact prefix below n0 plus the tail.
        let tol = PrecReal::pow10_neg(25, 130);
        let n0 = 64u64;
        let (tail, _) =
            certified_tail(n0, &tol, |n0, order| {
                Ok(Expansion::harmonic(n0, order).mul(&Expansion::monomial(
                    n0,
                    -2,
                    BigRational::one(),
                )))
            })
            .unwrap();
        let mut prefix = BigRational::zero();
        for n in 1..n0 {
            prefix += harmonic(n) / rat_int(n * n);
        }
        let total = &tail + &Ball::from_rational(&prefix, 130);
        let two_zeta3 = zeta_ball(3, &tol).unwrap().mul_int(2);
        let diff = (&total.mid - &two_zeta3.mid).abs();
        assert!(diff <= &(&total.rad + &two_zeta3.rad) + &tol);
        assert!(total.rad <= tol);
    }

    #[test]
    fn divergent_tail_is_rejected() {
        let x = Expansion::monomial(10, -1, BigRational::one());
        assert!(x.tail(&PrecReal::pow10_neg(5, 64)).is_err());
    }
}
