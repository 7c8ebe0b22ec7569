//! Local densities of ternary forms at primes away from `2 df`, and the
//! closed form of `r(p^2 n, gen f) / r(n, gen f)` that follows from them.

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::arith::{self, legendre_big, ord, rational_pow, ArithError, Rational};
use crate::quadform::{GenusRegistry, QuadForm, QuadFormError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DensityError {
    #[error("prime {p} divides 2*df = {two_df}")]
    BadPrime { p: u64, two_df: u64 },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("local density formula needs a ternary form, got rank {0}")]
    NotTernary(usize),
    #[error("n must be positive")]
    ZeroTarget,
    #[error("{0} is not a registered form of class number one")]
    NotClassNumberOne(String),
    #[error("{target} is not represented by {form}")]
    NotRepresented { form: String, target: u64 },
    #[error(transparent)]
    Form(#[from] QuadFormError),
}

fn check_prime(p: u64, df: u64) -> Result<(), DensityError> {
    if p == 2 || !arith::is_prime(p) {
        return Err(ArithError::NotOddPrime(p).into());
    }
    if (2 * df).is_multiple_of(p) {
        return Err(DensityError::BadPrime { p, two_df: 2 * df });
    }
    Ok(())
}

/// `alpha_p(n, f)` for an odd prime `p` not dividing `df`.
///
/// With `l = ord_p(n)`:
/// - `l` odd: `1 + 1/p - p^-((l+1)/2) - p^-((l+3)/2)`
/// - `l` even: `1 + 1/p - p^-((l+2)/2) + (-p^-l n df / p) p^-((l+2)/2)`
pub fn alpha_p(n: u64, f: &QuadForm, p: u64) -> Result<Rational, DensityError> {
    if f.rank() != 3 {
        return Err(DensityError::NotTernary(f.rank()));
    }
    if n == 0 {
        return Err(DensityError::ZeroTarget);
    }
    let df = f.discriminant();
    check_prime(p, df)?;
    let lambda = ord(n, p) as i32;
    let base = Rational::one() + rational_pow(p, -1);
    let value = if lambda % 2 == 1 {
        base - rational_pow(p, -(lambda + 1) / 2) - rational_pow(p, -(lambda + 3) / 2)
    } else {
        let unit = n / p.pow(lambda as u32);
        let chi = legendre_big(&(-BigInt::from(unit) * BigInt::from(df)), p)?;
        let tail = rational_pow(p, -(lambda + 2) / 2);
        base - tail.clone() + tail * Rational::from_integer(chi.into())
    };
    Ok(value)
}

/// `r(p^2 n, gen f) / r(n, gen f)` for a ternary genus of discriminant `df`:
///
/// `(p^(h+2) - 1 - chi (p^(h+1) - 1)) / (p^(h+1) - 1 - chi (p^h - 1))`
///
/// where `h = floor(ord_p(n) / 2)` and `chi = (-n p^(-2h) df / p)`.
pub fn genus_ratio(n: u64, p: u64, df: u64) -> Result<Rational, DensityError> {
    if n == 0 {
        return Err(DensityError::ZeroTarget);
    }
    check_prime(p, df)?;
    let h = ord(n, p) / 2;
    let reduced = n / p.pow(2 * h);
    let chi = BigInt::from(legendre_big(
        &(-BigInt::from(reduced) * BigInt::from(df)),
        p,
    )?);
    let pw = |e: u32| num_traits::pow(BigInt::from(p), e as usize);
    let one = BigInt::one();
    let numer = pw(h + 2) - &one - &chi * (pw(h + 1) - &one);
    let denom = pw(h + 1) - &one - &chi * (pw(h) - &one);
    Ok(Rational::new(numer, denom))
}

/// Whether `r(p^2 n, f) > r(n, f)` for a registered class-number-one form.
pub fn check_class1_growth(f: &QuadForm, n: u64, p: u64) -> Result<bool, DensityError> {
    if n == 0 {
        return Err(DensityError::ZeroTarget);
    }
    let class_one = GenusRegistry::standard()
        .genus_of(f)
        .is_some_and(|e| e.class_number() == 1);
    if !class_one {
        return Err(DensityError::NotClassNumberOne(f.to_string()));
    }
    check_prime(p, f.discriminant())?;
    let lifted = p * p * n;
    let big = f.rep_count(lifted)?;
    if big == 0 {
        return Err(DensityError::NotRepresented {
            form: f.to_string(),
            target: lifted,
        });
    }
    Ok(big > f.rep_count(n)?)
}
