//! Exact rational and integer combinatorics.
//!
//! Harmonic and hyperharmonic numbers, unsigned Stirling numbers of the first
//! kind, Bernoulli numbers and binomials. The harmonic prefix, the Stirling
//! triangle and the Bernoulli sequence are cached for the process lifetime
//! behind `RwLock`s; every public function is still a pure function of its
//! arguments.

use std::sync::{LazyLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator. Displays as `"num/den"`, or as a plain integer when the
/// denominator is one.
pub type ExactRational = BigRational;

pub(crate) fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn rat_int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

static HARMONIC: LazyLock<RwLock<Vec<BigRational>>> =
    LazyLock::new(|| RwLock::new(vec![BigRational::zero()]));

/// `H_n = 1 + 1/2 + ... + 1/n`, with `H_0 = 0`.
pub fn harmonic(n: u64) -> BigRational {
    let idx = n as usize;
    {
        let cache = HARMONIC.read().unwrap();
        if let Some(h) = cache.get(idx) {
            return h.clone();
        }
    }
    let mut cache = HARMONIC.write().unwrap();
    while cache.len() <= idx {
        let k = cache.len() as i64;
        let next = cache.last().unwrap() + rat(1, k);
        cache.push(next);
    }
    cache[idx].clone()
}

/// `Σ_{j=1}^{n} j^{-s}`; zero for `n = 0`.
pub fn generalized_harmonic(n: u64, s: u32) -> BigRational {
    (1..=n).fold(BigRational::zero(), |acc, j| {
        acc + BigRational::new(BigInt::one(), BigInt::from(j).pow(s))
    })
}

/// Hyperharmonic number `h_n^{(r)}` by the defining iterated partial sums.
///
/// This is the O(n·r) route; [`hyperharmonic_closed`] is the one the
/// evaluators use.
pub fn hyperharmonic(n: u64, r: u32) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::invalid(
            "hyperharmonic numbers are indexed from n = 1",
        ));
    }
    let mut column: Vec<BigRational> = (1..=n as i64).map(|k| rat(1, k)).collect();
    for _ in 0..r {
        let mut acc = BigRational::zero();
        for v in column.iter_mut() {
            acc += &*v;
            *v = acc.clone();
        }
    }
    Ok(column.pop().unwrap())
}

/// `h_n^{(r)} = C(n+r-1, r-1) (H_{n+r-1} - H_{r-1})`.
pub fn hyperharmonic_closed(n: u64, r: u32) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::invalid(
            "hyperharmonic numbers are indexed from n = 1",
        ));
    }
    if r == 0 {
        return Err(Error::invalid("closed form needs r >= 1 (it uses H_{r-1})"));
    }
    let r = r as u64;
    let c = binomial(n + r - 1, r - 1);
    Ok(rat_int(BigInt::from(c)) * (harmonic(n + r - 1) - harmonic(r - 1)))
}

/// `h_n^{(r)}` for any `r >= 0`: `1/n` at `r = 0`, closed form otherwise.
pub fn hyperharmonic_any(n: u64, r: u32) -> Result<BigRational> {
    if r == 0 {
        if n == 0 {
            return Err(Error::invalid(
                "hyperharmonic numbers are indexed from n = 1",
            ));
        }
        return Ok(rat(1, n as i64));
    }
    hyperharmonic_closed(n, r)
}

/// Coefficient of `x^n` in the Cauchy product of `Σ_{k>=1} x^k/k` and
/// `Σ_{j>=0} C(j+r-1, r-1) x^j`, i.e. in `-ln(1-x)/(1-x)^r`.
pub fn gf_coefficient(n: u64, r: u32) -> BigRational {
    if r == 0 {
        return if n == 0 {
            BigRational::zero()
        } else {
            rat(1, n as i64)
        };
    }
    let r = r as u64;
    (1..=n).fold(BigRational::zero(), |acc, k| {
        let c = binomial(n - k + r - 1, r - 1);
        acc + BigRational::new(BigInt::from(c), BigInt::from(k))
    })
}

/// `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Unsigned Stirling numbers of the first kind, rows `0..=max_n`.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    rows: Vec<Vec<BigUint>>,
}

impl StirlingTable {
    pub fn new(max_n: usize) -> Self {
        let mut table = StirlingTable {
            rows: vec![vec![BigUint::one()]],
        };
        table.extend_to(max_n);
        table
    }

    pub fn max_n(&self) -> usize {
        self.rows.len() - 1
    }

    /// `[n+1; k] = [n; k-1] + n [n; k]`.
    pub fn extend_to(&mut self, max_n: usize) {
        while self.rows.len() <= max_n {
            let n = self.rows.len() - 1;
            let prev = &self.rows[n];
            let mut row = vec![BigUint::zero(); n + 2];
            for (k, slot) in row.iter_mut().enumerate() {
                if k >= 1 {
                    *slot += &prev[k - 1];
                }
                if k <= n {
                    *slot += &prev[k] * n;
                }
            }
            self.rows.push(row);
        }
    }

    pub fn get(&self, n: usize, k: usize) -> Option<&BigUint> {
        self.rows.get(n).and_then(|row| row.get(k))
    }

    pub fn row(&self, n: usize) -> Option<&[BigUint]> {
        self.rows.get(n).map(Vec::as_slice)
    }
}

static STIRLING: LazyLock<RwLock<StirlingTable>> =
    LazyLock::new(|| RwLock::new(StirlingTable::new(16)));

/// Unsigned Stirling number of the first kind `[n; k]`, the coefficient of
/// `x^k` in `x(x+1)...(x+n-1)`.
pub fn stirling_first(n: u64, k: u64) -> Result<BigUint> {
    if k > n {
        return Err(Error::invalid(format!(
            "stirling_first needs k <= n (got n = {n}, k = {k})"
        )));
    }
    let (n, k) = (n as usize, k as usize);
    {
        let table = STIRLING.read().unwrap();
        if let Some(v) = table.get(n, k) {
            return Ok(v.clone());
        }
    }
    let mut table = STIRLING.write().unwrap();
    table.extend_to(n);
    Ok(table.get(n, k).unwrap().clone())
}

/// Bernoulli numbers with `B_1 = -1/2`.
#[derive(Debug, Clone)]
pub struct BernoulliCache {
    values: Vec<BigRational>,
}

impl Default for BernoulliCache {
    fn default() -> Self {
        BernoulliCache {
            values: vec![BigRational::one()],
        }
    }
}

impl BernoulliCache {
    /// Extends through `B_max` using `Σ_{j=0}^{n} C(n+1, j) B_j = 0`.
    pub fn extend_to(&mut self, max: usize) {
        while self.values.len() <= max {
            let n = self.values.len();
            if n >= 3 && n % 2 == 1 {
                self.values.push(BigRational::zero());
                continue;
            }
            let mut acc = BigRational::zero();
            for (j, b) in self.values.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                acc += b * rat_int(BigInt::from(binomial(n as u64 + 1, j as u64)));
            }
            self.values.push(-acc / rat_int(n as i64 + 1));
        }
    }

    pub fn get(&self, n: usize) -> Option<&BigRational> {
        self.values.get(n)
    }
}

static BERNOULLI: LazyLock<RwLock<BernoulliCache>> =
    LazyLock::new(|| RwLock::new(BernoulliCache::default()));

pub fn bernoulli(n: u64) -> BigRational {
    let n = n as usize;
    {
        let cache = BERNOULLI.read().unwrap();
        if let Some(b) = cache.get(n) {
            return b.clone();
        }
    }
    let mut cache = BERNOULLI.write().unwrap();
    cache.extend_to(n);
    cache.get(n).unwrap().clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        rat(n, d)
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(0), r(0, 1));
        assert_eq!(harmonic(1), r(1, 1));
        assert_eq!(harmonic(4), r(25, 12));
        assert_eq!(harmonic(4).to_string(), "25/12");
    }

    #[test]
    fn hyperharmonic_values() {
        assert_eq!(hyperharmonic(5, 0).unwrap(), r(1, 5));
        assert_eq!(hyperharmonic(1, 7).unwrap(), r(1, 1));
        assert_eq!(hyperharmonic(3, 2).unwrap(), r(13, 3));
        assert!(hyperharmonic(0, 2).is_err());
    }

    #[test]
    fn hyperharmonic_closed_values() {
        assert_eq!(hyperharmonic_closed(1, 1).unwrap(), r(1, 1));
        assert_eq!(hyperharmonic_closed(3, 2).unwrap(), r(13, 3));
        // recurrence oracle: h_1^(2) + h_2^(2) = 1 + 5/2
        assert_eq!(hyperharmonic(2, 3).unwrap(), r(7, 2));
        assert_eq!(hyperharmonic_closed(2, 3).unwrap(), r(7, 2));
        assert!(hyperharmonic_closed(3, 0).is_err());
        assert!(hyperharmonic_closed(0, 3).is_err());
    }

    #[test]
    fn order_one_is_harmonic() {
        for n in 1..=100 {
            assert_eq!(hyperharmonic(n, 1).unwrap(), harmonic(n));
        }
    }

    #[test]
    fn stirling_values() {
        assert_eq!(stirling_first(5, 5).unwrap(), BigUint::from(1u32));
        assert_eq!(stirling_first(4, 2).unwrap(), BigUint::from(11u32));
        assert_eq!(stirling_first(3, 1).unwrap(), BigUint::from(2u32));
        assert_eq!(stirling_first(0, 0).unwrap(), BigUint::from(1u32));
        assert_eq!(stirling_first(6, 0).unwrap(), BigUint::zero());
        assert!(stirling_first(2, 3).is_err());
    }

    #[test]
    fn stirling_row_sums_are_factorials() {
        for n in 0..=20u64 {
            let sum: BigUint = (0..=n).map(|k| stirling_first(n, k).unwrap()).sum();
            assert_eq!(sum, factorial(n), "n = {n}");
        }
    }

    #[test]
    fn stirling_table_extends_lazily() {
        let mut t = StirlingTable::new(3);
        assert_eq!(t.max_n(), 3);
        assert!(t.get(4, 2).is_none());
        t.extend_to(4);
        assert_eq!(t.get(4, 2), Some(&BigUint::from(11u32)));
        assert_eq!(t.row(4).unwrap().len(), 5);
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(0), r(1, 1));
        assert_eq!(bernoulli(1), r(-1, 2));
        assert_eq!(bernoulli(2), r(1, 6));
        assert_eq!(bernoulli(4), r(-1, 30));
        assert_eq!(bernoulli(12), r(-691, 2730));
    }

    #[test]
    fn bernoulli_odd_vanish_and_recurrence_holds() {
        for k in 1..=20u64 {
            assert!(bernoulli(2 * k + 1).is_zero());
        }
        for n in 1..=40u64 {
            let s = (0..=n).fold(BigRational::zero(), |acc, j| {
                acc + bernoulli(j) * rat_int(BigInt::from(binomial(n + 1, j)))
            });
            assert!(s.is_zero(), "n = {n}");
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 1), BigUint::from(4u32));
        assert_eq!(binomial(0, 0), BigUint::from(1u32));
        assert_eq!(binomial(6, 3), BigUint::from(20u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
    }

    #[test]
    fn generalized_harmonic_values() {
        assert_eq!(generalized_harmonic(0, 2), r(0, 1));
        assert_eq!(generalized_harmonic(2, 2), r(5, 4));
    }
}
