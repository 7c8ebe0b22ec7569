//! Truncated q-expansions with exact integer coefficients.
//!
//! The two series of interest are the weight 3/2 cusp form
//! `phi = (theta_f - theta_f') / 4` built from the genus of `<1,1,10>`, and the
//! weight 2 eta product `Phi = eta^2(2z) eta^2(10z)`. Coefficients of `Phi`
//! at primes are the Hecke eigenvalues of `phi`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{is_prime, legendre, ArithError};
use crate::quadform::{ramanujan_form, ramanujan_partner, QuadFormError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("precision must be positive")]
    ZeroPrecision,
    #[error("eta product has leading exponent {0}/24, which is not an integer")]
    NonIntegralLeadingExponent(u64),
    #[error("series known to q^{have}, need q^{needed}")]
    InsufficientPrecision { needed: u64, have: u64 },
    #[error("prime {0} is not admissible here")]
    BadPrime(u64),
    #[error("coefficient of q^{0} is not divisible by 4")]
    NonIntegralCoefficient(u64),
    #[error(transparent)]
    Form(#[from] QuadFormError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Power series in `q` known through `q^precision`.
#[derive(Clone, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Vec<BigInt>,
}

impl QSeries {
    pub fn from_coefficients(coeffs: Vec<BigInt>) -> Self {
        assert!(!coeffs.is_empty(), "a series carries at least q^0");
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::from_coefficients(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(precision: u64) -> Self {
        Self {
            coeffs: vec![BigInt::zero(); precision as usize + 1],
        }
    }

    pub fn one(precision: u64) -> Self {
        let mut s = Self::zero(precision);
        s.coeffs[0] = BigInt::one();
        s
    }

    pub fn precision(&self) -> u64 {
        (self.coeffs.len() - 1) as u64
    }

    /// Coefficient of `q^n`; panics past the precision.
    pub fn coefficient(&self, n: u64) -> &BigInt {
        assert!(n <= self.precision(), "q^{n} is beyond the known precision");
        &self.coeffs[n as usize]
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn truncate(&self, precision: u64) -> Self {
        let keep = precision.min(self.precision()) as usize + 1;
        Self {
            coeffs: self.coeffs[..keep].to_vec(),
        }
    }

    /// Multiplies by `q^k`, keeping the precision.
    pub fn shift(&self, k: u64) -> Self {
        let mut out = Self::zero(self.precision());
        for (i, c) in self.coeffs.iter().enumerate() {
            let j = i + k as usize;
            if j < out.coeffs.len() {
                out.coeffs[j] = c.clone();
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.precision());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Nonzero terms as `(exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigInt)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i as u64, c))
    }
}

impl Mul for &QSeries {
    type Output = QSeries;

    fn mul(self, rhs: &QSeries) -> QSeries {
        let prec = self.precision().min(rhs.precision()) as usize;
        let mut out = vec![BigInt::zero(); prec + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(prec + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(prec + 1 - i) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        QSeries { coeffs: out }
    }
}

impl Add for &QSeries {
    type Output = QSeries;

    fn add(self, rhs: &QSeries) -> QSeries {
        let prec = self.precision().min(rhs.precision()) as usize;
        QSeries {
            coeffs: (0..=prec)
                .map(|i| &self.coeffs[i] + &rhs.coeffs[i])
                .collect(),
        }
    }
}

impl Sub for &QSeries {
    type Output = QSeries;

    fn sub(self, rhs: &QSeries) -> QSeries {
        let prec = self.precision().min(rhs.precision()) as usize;
        QSeries {
            coeffs: (0..=prec)
                .map(|i| &self.coeffs[i] - &rhs.coeffs[i])
                .collect(),
        }
    }
}

impl Neg for &QSeries {
    type Output = QSeries;

    fn neg(self) -> QSeries {
        QSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.terms() {
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mono = match n {
                0 => String::new(),
                1 => "q".to_string(),
                _ => format!("q^{n}"),
            };
            if n == 0 || !mag.is_one() {
                write!(f, "{mag}{mono}")?;
            } else {
                write!(f, "{mono}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", self.precision() + 1)
    }
}

impl fmt::Debug for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QSeries({self})")
    }
}

/// `prod_{n>=1} (1 - q^(d n))` from the pentagonal number theorem.
pub fn euler_product(d: u64, precision: u64) -> QSeries {
    let mut s = QSeries::zero(precision);
    s.coeffs[0] = BigInt::one();
    let mut k = 1u64;
    loop {
        let g1 = d * (k * (3 * k - 1) / 2);
        if g1 > precision {
            break;
        }
        let sign = if k % 2 == 1 { -1 } else { 1 };
        s.coeffs[g1 as usize] += sign;
        let g2 = d * (k * (3 * k + 1) / 2);
        if g2 <= precision {
            s.coeffs[g2 as usize] += sign;
        }
        k += 1;
    }
    s
}

/// `prod eta(d z)^e` as a q-series, for factors whose total weight
/// `sum d e / 24` is an integer.
pub fn eta_product(factors: &[(u64, u32)], precision: u64) -> Result<QSeries, SeriesError> {
    if precision == 0 {
        return Err(SeriesError::ZeroPrecision);
    }
    let leading: u64 = factors.iter().map(|&(d, e)| d * u64::from(e)).sum();
    if !leading.is_multiple_of(24) {
        return Err(SeriesError::NonIntegralLeadingExponent(leading));
    }
    let offset = leading / 24;
    if offset > precision {
        return Ok(QSeries::zero(precision));
    }
    let inner = precision - offset;
    let mut acc = QSeries::one(inner);
    for &(d, e) in factors {
        let base = euler_product(d, inner);
        for _ in 0..e {
            acc = &acc * &base;
        }
    }
    let mut coeffs = vec![BigInt::zero(); offset as usize];
    coeffs.extend(acc.coeffs);
    Ok(QSeries::from_coefficients(coeffs))
}

/// `Phi = eta^2(2z) eta^2(10z)`.
pub fn ramanujan_eta_product(precision: u64) -> Result<QSeries, SeriesError> {
    eta_product(&[(2, 2), (10, 2)], precision)
}

/// `phi = sum (r(n, <1,1,10>) - r(n, <2> ⊥ [[2,1],[1,3]])) / 4 q^n`.
pub fn theta_diff_phi(precision: u64) -> Result<QSeries, SeriesError> {
    if precision == 0 {
        return Err(SeriesError::ZeroPrecision);
    }
    let r = ramanujan_form().theta_series(precision)?;
    let r_partner = ramanujan_partner().theta_series(precision)?;
    let mut coeffs = Vec::with_capacity(r.len());
    for (n, (&a, &b)) in r.iter().zip(&r_partner).enumerate() {
        let diff = BigInt::from(a) - BigInt::from(b);
        let (q, rem) = diff.div_rem(&BigInt::from(4));
        if !rem.is_zero() {
            return Err(SeriesError::NonIntegralCoefficient(n as u64));
        }
        coeffs.push(q);
    }
    Ok(QSeries::from_coefficients(coeffs))
}

/// Outcome of checking
/// `lambda a(n) = a(p^2 n) + (-10n/p) a(n) + p a(n/p^2)` for `1 <= n <= N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeckeReport {
    pub p: u64,
    pub eigenvalue: i64,
    pub checked_up_to: u64,
    pub all_hold: bool,
    pub failures: Vec<u64>,
}

pub fn hecke_check(
    phi: &QSeries,
    p: u64,
    eigenvalue: i64,
    n_max: u64,
) -> Result<HeckeReport, SeriesError> {
    if !is_prime(p) || 10 % p == 0 {
        return Err(SeriesError::BadPrime(p));
    }
    let needed = p * p * n_max;
    if phi.precision() < needed {
        return Err(SeriesError::InsufficientPrecision {
            needed,
            have: phi.precision(),
        });
    }
    let lambda = BigInt::from(eigenvalue);
    let pp = p * p;
    let mut failures = Vec::new();
    for n in 1..=n_max {
        let a_n = phi.coefficient(n);
        let chi = legendre(-10 * n as i64, p)?;
        let tail = if n % pp == 0 {
            BigInt::from(p) * phi.coefficient(n / pp)
        } else {
            BigInt::zero()
        };
        let rhs = phi.coefficient(pp * n) + BigInt::from(chi) * a_n + tail;
        if &lambda * a_n != rhs {
            failures.push(n);
        }
    }
    Ok(HeckeReport {
        p,
        eigenvalue,
        checked_up_to: n_max,
        all_hold: failures.is_empty(),
        failures,
    })
}

/// `A(p)^2 <= 4p` for every prime `p <= prime_bound`.
pub fn deligne_check(phi_big: &QSeries, prime_bound: u64) -> Result<bool, SeriesError> {
    if phi_big.precision() < prime_bound {
        return Err(SeriesError::InsufficientPrecision {
            needed: prime_bound,
            have: phi_big.precision(),
        });
    }
    Ok((2..=prime_bound)
        .filter(|&p| is_prime(p))
        .all(|p| deligne_holds(phi_big.coefficient(p), p)))
}

pub fn deligne_holds(eigenvalue: &BigInt, p: u64) -> bool {
    eigenvalue * eigenvalue <= BigInt::from(4 * p)
}

/// The two coefficients
/// `p - 5 + 2 lambda - 2 chi` and `2p - 4 - 2 lambda + 2 chi`,
/// minimized over `chi in {-1, 0, 1}`.
pub fn growth_margins(p: u64, eigenvalue: i64) -> (i64, i64) {
    let p = p as i64;
    let first = [-1i64, 0, 1]
        .iter()
        .map(|chi| p - 5 + 2 * eigenvalue - 2 * chi)
        .min()
        .expect("non-empty");
    let second = [-1i64, 0, 1]
        .iter()
        .map(|chi| 2 * p - 4 - 2 * eigenvalue + 2 * chi)
        .min()
        .expect("non-empty");
    (first, second)
}

/// A value `n` where `r(p^2 n, f) <= r(n, f)` despite `p^2 n` being represented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthViolation {
    pub n: u64,
    pub lifted_count: u64,
    pub base_count: u64,
}

/// Checks `r(p^2 n, f) > r(n, f)` for `f = <1,1,10>` and every `n <= n_max`
/// with `p^2 n` represented.
pub fn ramanujan_growth_check(p: u64, n_max: u64) -> Result<Vec<GrowthViolation>, SeriesError> {
    if !is_prime(p) || [2, 3, 5, 17].contains(&p) {
        return Err(SeriesError::BadPrime(p));
    }
    let pp = p * p;
    let theta = ramanujan_form().theta_series(pp * n_max)?;
    let violations = (1..=n_max)
        .filter_map(|n| {
            let lifted_count = theta[(pp * n) as usize];
            let base_count = theta[n as usize];
            (lifted_count > 0 && lifted_count <= base_count).then_some(GrowthViolation {
                n,
                lifted_count,
                base_count,
            })
        })
        .collect();
    Ok(violations)
}

/// Coefficient as `i64`, for eigenvalues read off a series.
pub fn small_coefficient(series: &QSeries, n: u64) -> i64 {
    series
        .coefficient(n)
        .to_i64()
        .expect("coefficient fits in i64")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(s: &QSeries) -> Vec<i64> {
        (0..=s.precision())
            .map(|n| small_coefficient(s, n))
            .collect()
    }

    // prod (1 - q^n) by literal repeated multiplication of binomials.
    fn naive_euler(d: u64, precision: u64) -> Vec<i64> {
        let mut acc = vec![0i64; precision as usize + 1];
        acc[0] = 1;
        let mut n = 1;
        while d * n <= precision {
            let step = (d * n) as usize;
            for i in (step..acc.len()).rev() {
                acc[i] -= acc[i - step];
            }
            n += 1;
        }
        acc
    }

    #[test]
    fn pentagonal_matches_naive_product() {
        for d in [1, 2, 10] {
            assert_eq!(coeffs(&euler_product(d, 300)), naive_euler(d, 300));
        }
    }

    #[test]
    fn eta_product_display_coefficients() {
        let phi_big = ramanujan_eta_product(23).unwrap();
        let mut expected = vec![0i64; 24];
        for (n, c) in [
            (1, 1),
            (3, -2),
            (5, -1),
            (7, 2),
            (9, 1),
            (13, 2),
            (15, 2),
            (17, -6),
            (19, -4),
            (21, -4),
            (23, 6),
        ] {
            expected[n] = c;
        }
        assert_eq!(coeffs(&phi_big), expected);
        assert_eq!(
            coeffs(&ramanujan_eta_product(9).unwrap()),
            expected[..10].to_vec()
        );
    }

    #[test]
    fn discriminant_form_starts_at_q() {
        let delta = eta_product(&[(1, 24)], 6).unwrap();
        assert_eq!(coeffs(&delta), vec![0, 1, -24, 252, -1472, 4830, -6048]);
    }

    #[test]
    fn eta_product_errors() {
        assert_eq!(
            eta_product(&[(1, 1)], 10),
            Err(SeriesError::NonIntegralLeadingExponent(1))
        );
        assert_eq!(eta_product(&[(1, 24)], 0), Err(SeriesError::ZeroPrecision));
    }

    #[test]
    fn phi_leading_terms() {
        let phi = theta_diff_phi(13).unwrap();
        assert_eq!(
            coeffs(&phi),
            vec![0, 1, 0, -1, 0, 0, 0, -1, 0, -1, 0, 0, 0, 2]
        );
        assert_eq!(phi.to_string(), "q - q^3 - q^7 - q^9 + 2q^13 + O(q^14)");
    }

    #[test]
    fn hecke_examples() {
        let phi = theta_diff_phi(9 * 40).unwrap();
        let r3 = hecke_check(&phi, 3, -2, 40).unwrap();
        assert!(r3.all_hold, "{r3:?}");
        // n = 1: a(9) + (-10/3) a(1) = -1 - 1 = -2.
        assert_eq!(small_coefficient(&phi, 9), -1);
        let wrong = hecke_check(&phi, 3, 5, 10).unwrap();
        assert!(!wrong.all_hold);
        assert!(wrong.failures.contains(&1));

        let phi = theta_diff_phi(49 * 20).unwrap();
        assert!(hecke_check(&phi, 7, 2, 20).unwrap().all_hold);
    }

    #[test]
    fn hecke_preconditions() {
        let phi = theta_diff_phi(50).unwrap();
        assert_eq!(
            hecke_check(&phi, 3, -2, 10),
            Err(SeriesError::InsufficientPrecision {
                needed: 90,
                have: 50
            })
        );
        assert_eq!(hecke_check(&phi, 5, 0, 1), Err(SeriesError::BadPrime(5)));
    }

    #[test]
    fn deligne_examples() {
        let phi_big = ramanujan_eta_product(17).unwrap();
        assert!(deligne_check(&phi_big, 17).unwrap());
        assert!(deligne_check(&phi_big, 5).unwrap());
        assert!(deligne_check(&phi_big, 2).unwrap());
        assert_eq!(small_coefficient(&phi_big, 2), 0);
        assert!(!deligne_holds(&BigInt::from(7), 11));
    }

    #[test]
    fn growth_examples() {
        assert!(ramanujan_growth_check(7, 200).unwrap().is_empty());
        assert!(ramanujan_growth_check(11, 100).unwrap().is_empty());
        assert!(ramanujan_growth_check(13, 50).unwrap().is_empty());
        assert_eq!(
            ramanujan_growth_check(17, 5),
            Err(SeriesError::BadPrime(17))
        );
    }

    #[test]
    fn growth_margins_positive_away_from_3_and_17() {
        let phi_big = ramanujan_eta_product(23).unwrap();
        for p in [7u64, 11, 13, 19, 23] {
            let (a, b) = growth_margins(p, small_coefficient(&phi_big, p));
            assert!(a > 0 && b > 0, "p={p}");
        }
        assert!(growth_margins(3, small_coefficient(&phi_big, 3)).0 <= 0);
        assert!(growth_margins(17, small_coefficient(&phi_big, 17)).0 <= 0);
    }

    #[test]
    fn series_arithmetic_basics() {
        let a = QSeries::from_i64(&[1, 2, 3]);
        let b = QSeries::from_i64(&[0, 1, 1, 5]);
        assert_eq!(coeffs(&(&a * &b)), vec![0, 1, 3]);
        assert_eq!(coeffs(&(&a + &b)), vec![1, 3, 4]);
        assert_eq!(coeffs(&(&a - &a)), vec![0, 0, 0]);
        assert_eq!(coeffs(&a.shift(1)), vec![0, 1, 2]);
        assert_eq!(coeffs(&a.pow(2)), vec![1, 4, 10]);
        assert_eq!(QSeries::zero(2).to_string(), "0 + O(q^3)");
    }
}
