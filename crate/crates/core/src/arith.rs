//! Elementary number theory on machine integers: primality, factorization,
//! Legendre symbols, and the two- and three-square classifications.
//!
//! Everything here works on `u64`/`i64` values. Intermediate products are
//! taken in `u128` so modular exponentiation never overflows.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

use thiserror::Error;

/// Exact rational number, always kept in lowest terms with positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("argument must be positive")]
    Zero,
    #[error("{0} exceeds the supported range")]
    Overflow(u128),
}

/// Prime factorization with strictly increasing primes and positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization {
    pairs: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Exponent of `p` in the factored value (zero when absent).
    pub fn exponent_of(&self, p: u64) -> u32 {
        self.pairs
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// Multiplies the factorization back out.
    pub fn value(&self) -> u64 {
        self.pairs.iter().fold(1u64, |acc, &(p, e)| acc * p.pow(e))
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return write!(f, "1");
        }
        for (i, (p, e)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin. The first twelve primes as witnesses are
/// sufficient for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes `<= bound` by a plain sieve.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Legendre symbol `(a / p)` via Euler's criterion.
pub fn legendre(a: i64, p: u64) -> Result<i8, ArithError> {
    if p == 2 || !is_prime(p) {
        return Err(ArithError::NotOddPrime(p));
    }
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return Ok(0);
    }
    Ok(if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    })
}

/// Legendre symbol of an arbitrary-size integer.
pub fn legendre_big(a: &BigInt, p: u64) -> Result<i8, ArithError> {
    if p == 2 || !is_prime(p) {
        return Err(ArithError::NotOddPrime(p));
    }
    let m = BigInt::from(p);
    let mut r = a % &m;
    if r.is_negative() {
        r += &m;
    }
    let r: u64 = r.try_into().expect("residue below p fits in u64");
    legendre(r as i64, p)
}

/// `ord_p(n)`: the exponent of `p` in `n`.
pub fn ord(mut n: u64, p: u64) -> u32 {
    assert!(n >= 1, "ord is only defined for positive n");
    assert!(p >= 2);
    let mut e = 0;
    while n.is_multiple_of(p) {
        n /= p;
        e += 1;
    }
    e
}

/// Trial-division factorization.
pub fn factorize(n: u64) -> Result<Factorization, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    let mut pairs = Vec::new();
    let mut m = n;
    let mut d = 2u64;
    while d.saturating_mul(d) <= m {
        if m.is_multiple_of(d) {
            let mut e = 0;
            while m.is_multiple_of(d) {
                m /= d;
                e += 1;
            }
            pairs.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        pairs.push((m, 1));
    }
    Ok(Factorization { pairs })
}

/// Factorization of a `u128`, rejected above the 64-bit range.
pub fn factorize_wide(n: u128) -> Result<Factorization, ArithError> {
    let n64 = u64::try_from(n).map_err(|_| ArithError::Overflow(n))?;
    factorize(n64)
}

pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.saturating_mul(x) > n {
        x -= 1;
    }
    while (x + 1).saturating_mul(x + 1) <= n {
        x += 1;
    }
    x
}

pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x.checked_mul(x).is_none_or(|s| s > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|s| s <= n) {
        x += 1;
    }
    x
}

pub fn is_square(n: u64) -> bool {
    let r = isqrt(n);
    r * r == n
}

/// Number of positive divisors.
pub fn tau(n: u64) -> u64 {
    assert!(n >= 1);
    factorize(n)
        .expect("n >= 1")
        .pairs()
        .iter()
        .map(|&(_, e)| u64::from(e) + 1)
        .product()
}

/// True iff every prime `q = 3 (mod 4)` divides `n` to an even power.
pub fn is_sum_two_squares(n: u64) -> bool {
    if n == 0 {
        return true;
    }
    factorize(n)
        .expect("n >= 1")
        .pairs()
        .iter()
        .all(|&(q, e)| q % 4 != 3 || e % 2 == 0)
}

/// True iff `n` is not of the form `4^a (8b + 7)`.
pub fn is_sum_three_squares(mut n: u64) -> bool {
    if n == 0 {
        return true;
    }
    while n.is_multiple_of(4) {
        n /= 4;
    }
    n % 8 != 7
}

/// Least number of squares summing to `n` (zero for `n = 0`).
pub fn min_squares(n: u64) -> u32 {
    if n == 0 {
        0
    } else if is_square(n) {
        1
    } else if is_sum_two_squares(n) {
        2
    } else if is_sum_three_squares(n) {
        3
    } else {
        4
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// Formats a rational as `num/den`, including a unit denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `p^e` as an exact rational.
pub fn rational_pow(p: u64, e: i32) -> Rational {
    let base = BigInt::from(p);
    if e >= 0 {
        Rational::from_integer(num_traits::pow(base, e as usize))
    } else {
        Rational::new(BigInt::one(), num_traits::pow(base, (-e) as usize))
    }
}

pub fn rational_is_integer(r: &Rational) -> bool {
    r.denom().is_one() || r.numer().is_zero()
}
