//! Exact polynomial identities behind the constructive decompositions, and
//! the integer transforms that apply them.
//!
//! A record states `lhs = rhs` over named variables, possibly under side
//! conditions. Side conditions are eliminated by explicit substitution
//! (`v = expr`) or by rewriting a square (`v^2 = expr`); the identity holds iff
//! `lhs - rhs` expands to the zero polynomial afterwards.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::{isqrt_u128, legendre, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdentityError {
    #[error("side condition on {0} cannot be eliminated: the right side mentions it")]
    SelfReferential(String),
    #[error("side condition refers to unknown variable index {0}")]
    UnknownVariable(usize),
    #[error("{a}^2 + {b}^2 + {c}^2 != {n}")]
    NotASum { n: i128, a: i128, b: i128, c: i128 },
    #[error("no sign choice meets the constraints")]
    NoAdjustment,
    #[error("exponent t must lie in 1..=40, got {0}")]
    ExponentOutOfRange(u32),
    #[error("{identity} produced {got}, expected {expected}")]
    VerificationFailed {
        identity: &'static str,
        expected: i128,
        got: i128,
    },
    #[error("(b, c) = (0, 0) has no 3-primitive representative")]
    ZeroBinary,
    #[error("no 3-primitive representation of {0} by 2d^2 + 2de + 3e^2 in the search box")]
    Impossible(i128),
    #[error("no x^2 + y^2 + 10z^2 representation found for {0}")]
    Unhandled(i128),
}

/// Sparse multivariate polynomial with rational coefficients over a fixed
/// number of variables.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rational, nvars: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn int(c: i64, nvars: usize) -> Self {
        Self::constant(Rational::from_integer(c.into()), nvars)
    }

    pub fn var(index: usize, nvars: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[index] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(exps, Rational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn mentions(&self, index: usize) -> bool {
        self.terms.keys().any(|e| e[index] > 0)
    }

    fn add_term(&mut self, exps: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::int(1, self.nvars);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Replaces variable `index` by `expr` everywhere.
    pub fn substitute(&self, index: usize, expr: &Poly) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            let k = rest[index];
            rest[index] = 0;
            let mut mono = Self::zero(self.nvars);
            mono.add_term(rest, c.clone());
            out = &out + &(&mono * &expr.pow(k));
        }
        out
    }

    /// Rewrites every `v^k` with `k >= 2` using `v^2 = expr`.
    pub fn rewrite_square(&self, index: usize, expr: &Poly) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            let k = rest[index];
            rest[index] = k % 2;
            let mut mono = Self::zero(self.nvars);
            mono.add_term(rest, c.clone());
            out = &out + &(&mono * &expr.pow(k / 2));
        }
        out
    }

    /// Value at an integer point.
    pub fn eval(&self, point: &[i128]) -> Rational {
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (x, &k) in point.iter().zip(e) {
                m *= Rational::from_integer(num_traits::pow(BigInt::from(*x), k as usize));
            }
            total += m;
        }
        total
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;

    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl Mul for &Poly {
    type Output = Poly;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly { (&self).$m(&rhs) }
        }
        impl $tr<i64> for Poly {
            type Output = Poly;
            fn $m(self, rhs: i64) -> Poly {
                let n = self.nvars;
                (&self).$m(&Poly::int(rhs, n))
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| {
                        if k == 1 {
                            format!("x{i}")
                        } else {
                            format!("x{i}^{k}")
                        }
                    })
                    .collect();
                format!("{c}*{}", mono.join("*"))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SideCondition {
    /// `var = expr`, eliminated by substitution.
    Substitute { var: usize, expr: Poly },
    /// `var^2 = expr`, eliminated by rewriting even powers of `var`.
    SquareRewrite { var: usize, expr: Poly },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityRecord {
    pub name: &'static str,
    pub vars: Vec<&'static str>,
    pub lhs: Poly,
    pub rhs: Poly,
    pub side_conditions: Vec<SideCondition>,
}

impl IdentityRecord {
    /// `lhs - rhs` after eliminating the side conditions in order.
    pub fn residual(&self) -> Result<Poly, IdentityError> {
        let mut diff = &self.lhs - &self.rhs;
        for cond in &self.side_conditions {
            let (var, expr) = match cond {
                SideCondition::Substitute { var, expr }
                | SideCondition::SquareRewrite { var, expr } => (*var, expr),
            };
            if var >= self.vars.len() {
                return Err(IdentityError::UnknownVariable(var));
            }
            if expr.mentions(var) {
                return Err(IdentityError::SelfReferential(self.vars[var].to_string()));
            }
            diff = match cond {
                SideCondition::Substitute { .. } => diff.substitute(var, expr),
                SideCondition::SquareRewrite { .. } => diff.rewrite_square(var, expr),
            };
        }
        Ok(diff)
    }
}

/// True iff the record is an exact polynomial identity under its side conditions.
pub fn verify_identity(record: &IdentityRecord) -> Result<bool, IdentityError> {
    Ok(record.residual()?.is_zero())
}

fn sq(p: Poly) -> Poly {
    p.square()
}

fn record(
    name: &'static str,
    vars: &[&'static str],
    build: impl FnOnce(&[Poly]) -> (Poly, Poly, Vec<SideCondition>),
) -> IdentityRecord {
    let n = vars.len();
    let v: Vec<Poly> = (0..n).map(|i| Poly::var(i, n)).collect();
    let (lhs, rhs, side_conditions) = build(&v);
    IdentityRecord {
        name,
        vars: vars.to_vec(),
        lhs,
        rhs,
        side_conditions,
    }
}

fn half() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2))
}

/// Every identity used by the constructive decompositions.
pub fn catalog() -> Vec<IdentityRecord> {
    let mut out = Vec::new();

    // 5z^2 split when z^2 = c^2 + d^2.
    for (name, s) in [("five-z-squared/plus", 1i64), ("five-z-squared/minus", -1)] {
        out.push(record(name, &["c", "d", "z"], |v| {
            let (c, d, z) = (&v[0], &v[1], &v[2]);
            let lhs = z.square() * 5;
            let rhs = sq(c.clone() * 2 + d.clone() * s) + sq(c.clone() - d.clone() * (2 * s));
            let cond = SideCondition::SquareRewrite {
                var: 2,
                expr: c.square() + d.square(),
            };
            (lhs, rhs, vec![cond])
        }));
    }

    // p^{2t} x^2 + y^2 + 5z^2 with p^{2t} = u^2 + 5v^2.
    for (name, s) in [("norm-five-lift/plus", 1i64), ("norm-five-lift/minus", -1)] {
        out.push(record(name, &["P", "u", "v", "x", "y", "z"], |v| {
            let (pp, u, w, x, y, z) = (&v[0], &v[1], &v[2], &v[3], &v[4], &v[5]);
            let lhs = pp.clone() * x.square() + y.square() + z.square() * 5;
            let vx = w.clone() * x.clone();
            let rhs = sq(vx.clone() + z.clone() * (2 * s))
                + sq(vx * 2 - z.clone() * s)
                + u.square() * x.square()
                + y.square();
            let cond = SideCondition::Substitute {
                var: 0,
                expr: u.square() + w.square() * 5,
            };
            (lhs, rhs, vec![cond])
        }));
    }

    out.push(record(
        "split-third-square",
        &["x1", "x2", "x3", "A", "a1", "a2"],
        |v| {
            let (x1, x2, x3, a, a1, a2) = (&v[0], &v[1], &v[2], &v[3], &v[4], &v[5]);
            let lhs = x1.square() + x2.square() + a.clone() * x3.square();
            let rhs = x1.square()
                + x2.square()
                + sq(a1.clone() * x3.clone())
                + sq(a2.clone() * x3.clone());
            let cond = SideCondition::Substitute {
                var: 3,
                expr: a1.square() + a2.square(),
            };
            (lhs, rhs, vec![cond])
        },
    ));

    // 2a^2 + 2b^2 + 2bc + 3c^2 mapped onto x^2 + y^2 + 10z^2.
    let partner = |a: &Poly, b: &Poly, c: &Poly| {
        a.square() * 2 + b.square() * 2 + b.clone() * c.clone() * 2 + c.square() * 3
    };
    out.push(record(
        "partner-to-ramanujan/1,1,-1",
        &["a", "b", "c", "b'", "c'"],
        |v| {
            let (a, b, c, b1, c1) = (&v[0], &v[1], &v[2], &v[3], &v[4]);
            let lhs = partner(a, b, c);
            let rhs = sq(a.clone() + b1.clone() * 3 - c1.clone())
                + sq(a.clone() * 3 + b1.clone() * 3 + c1.clone() * 4)
                + sq(a.clone() + c1.clone()) * 10;
            let conds = vec![
                SideCondition::Substitute {
                    var: 1,
                    expr: a.clone() + b1.clone() * 3,
                },
                SideCondition::Substitute {
                    var: 2,
                    expr: a.clone() * 2 + c1.clone() * 3,
                },
            ];
            (lhs, rhs, conds)
        },
    ));
    out.push(record(
        "partner-expanded/1,1,-1",
        &["a", "b", "c", "b'", "c'"],
        |v| {
            let (a, b, c, b1, c1) = (&v[0], &v[1], &v[2], &v[3], &v[4]);
            let lhs = partner(a, b, c);
            let rhs = a.square() * 20
                + b1.square() * 18
                + c1.square() * 27
                + a.clone() * b1.clone() * 24
                + a.clone() * c1.clone() * 42
                + b1.clone() * c1.clone() * 18;
            let conds = vec![
                SideCondition::Substitute {
                    var: 1,
                    expr: a.clone() + b1.clone() * 3,
                },
                SideCondition::Substitute {
                    var: 2,
                    expr: a.clone() * 2 + c1.clone() * 3,
                },
            ];
            (lhs, rhs, conds)
        },
    ));
    out.push(record(
        "partner-to-ramanujan/0,1,0",
        &["a", "b", "c", "a'", "c'"],
        |v| {
            let (a, b, c, a1, c1) = (&v[0], &v[1], &v[2], &v[3], &v[4]);
            let lhs = partner(a, b, c);
            let rhs = sq(a1.clone() * 2 + b.clone() + c1.clone() * 4)
                + sq(a1.clone() * 2 - b.clone() + c1.clone())
                + sq(a1.clone() - c1.clone()) * 10;
            let conds = vec![
                SideCondition::Substitute {
                    var: 0,
                    expr: a1.clone() * 3,
                },
                SideCondition::Substitute {
                    var: 2,
                    expr: c1.clone() * 3,
                },
            ];
            (lhs, rhs, conds)
        },
    ));
    out.push(record(
        "partner-to-ramanujan/1,0,1",
        &["a", "b", "c", "b'", "c'"],
        |v| {
            let (a, b, c, b1, c1) = (&v[0], &v[1], &v[2], &v[3], &v[4]);
            let lhs = partner(a, b, c);
            let rhs = sq(a.clone() * 2 + b1.clone() * 3 + c1.clone() * 4)
                + sq(a.clone() - b1.clone() * 3 + c1.clone())
                + c1.square() * 10;
            let conds = vec![
                SideCondition::Substitute {
                    var: 1,
                    expr: b1.clone() * 3,
                },
                SideCondition::Substitute {
                    var: 2,
                    expr: a.clone() + c1.clone() * 3,
                },
            ];
            (lhs, rhs, conds)
        },
    ));
    out.push(record("partner-to-ramanujan/b=c=0", &["a"], |v| {
        let a = &v[0];
        (a.square() * 2, a.square() + a.square(), vec![])
    }));

    // 3(a^2 + b^2 + c^2) as four squares, four ways.
    type Quad = fn(&Poly, &Poly, &Poly) -> [Poly; 4];
    let expansions: [(&'static str, Quad); 4] = [
        ("euler-triple/a-b-c", |a, b, c| {
            [
                a.clone() - b.clone() - c.clone(),
                a.clone() + b.clone(),
                a.clone() + c.clone(),
                b.clone() - c.clone(),
            ]
        }),
        ("euler-triple/a+b+c", |a, b, c| {
            [
                a.clone() + b.clone() + c.clone(),
                a.clone() - b.clone(),
                a.clone() - c.clone(),
                b.clone() - c.clone(),
            ]
        }),
        ("euler-triple/a+b-c", |a, b, c| {
            [
                a.clone() + b.clone() - c.clone(),
                a.clone() - b.clone(),
                a.clone() + c.clone(),
                b.clone() + c.clone(),
            ]
        }),
        ("euler-triple/a-b+c", |a, b, c| {
            [
                a.clone() - b.clone() + c.clone(),
                a.clone() + b.clone(),
                a.clone() - c.clone(),
                b.clone() + c.clone(),
            ]
        }),
    ];
    for (name, expand) in expansions {
        out.push(record(name, &["a", "b", "c"], |v| {
            let (a, b, c) = (&v[0], &v[1], &v[2]);
            let lhs = (a.square() + b.square() + c.square()) * 3;
            let rhs = expand(a, b, c)
                .into_iter()
                .fold(Poly::zero(3), |acc, t| acc + t.square());
            (lhs, rhs, vec![])
        }));
    }

    out.push(record(
        "euler-four-square",
        &["a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4"],
        |v| {
            let [a1, a2, a3, a4, b1, b2, b3, b4] = [0, 1, 2, 3, 4, 5, 6, 7].map(|i| v[i].clone());
            let na = a1.square() + a2.square() + a3.square() + a4.square();
            let nb = b1.square() + b2.square() + b3.square() + b4.square();
            let lhs = na * nb;
            let t1 = a1.clone() * b1.clone()
                - a2.clone() * b2.clone()
                - a3.clone() * b3.clone()
                - a4.clone() * b4.clone();
            let t2 = a1.clone() * b2.clone() + a2.clone() * b1.clone() + a3.clone() * b4.clone()
                - a4.clone() * b3.clone();
            let t3 = a1.clone() * b3.clone() - a2.clone() * b4.clone()
                + a3.clone() * b1.clone()
                + a4.clone() * b2.clone();
            let t4 = a1 * b4 + a2 * b3 - a3 * b2 + a4 * b1;
            (
                lhs,
                t1.square() + t2.square() + t3.square() + t4.square(),
                vec![],
            )
        },
    ));

    out.push(record("reflection/2m-x", &["a", "b", "c", "m"], |v| {
        let (a, b, c, m) = (&v[0], &v[1], &v[2], &v[3]);
        let lhs = a.square() + b.square() + c.square();
        let m2 = m.clone() * 2;
        let rhs = sq(m2.clone() - a.clone()) + sq(m2.clone() - b.clone()) + sq(m2 - c.clone());
        let cond = SideCondition::Substitute {
            var: 2,
            expr: m.clone() * 3 - a.clone() - b.clone(),
        };
        (lhs, rhs, vec![cond])
    }));
    out.push(record("reflection/2m-3x", &["a", "b", "c", "m"], |v| {
        let (a, b, c, m) = (&v[0], &v[1], &v[2], &v[3]);
        let lhs = sq(a.clone() * 3) + sq(b.clone() * 3) + sq(c.clone() * 3);
        let m2 = m.clone() * 2;
        let rhs = sq(m2.clone() - a.clone() * 3)
            + sq(m2.clone() - b.clone() * 3)
            + sq(m2 - c.clone() * 3);
        let cond = SideCondition::Substitute {
            var: 3,
            expr: a.clone() + b.clone() + c.clone(),
        };
        (lhs, rhs, vec![cond])
    }));

    for (name, s) in [("descent-first/plus", 1i64), ("descent-first/minus", -1)] {
        out.push(record(name, &["a", "b1", "c1"], |v| {
            let (a, b1, c1) = (&v[0], &v[1], &v[2]);
            let lhs = a.square() + sq(-a.clone() + b1.clone() * 3) + sq(c1.clone() * 3);
            let rhs = sq(a.clone() - b1.clone() * 2 + c1.clone() * (2 * s))
                + sq(-a.clone() + b1.clone() + c1.clone() * (2 * s))
                + sq(-b1.clone() * 2 - c1.clone() * s);
            (lhs, rhs, vec![])
        }));
    }

    // a^2 + (-a + s b)^2 + (s c)^2 with s = 3^t and x^2 + 2y^2 = s^2.
    for (name, sign) in [("descent-power/plus", 1i64), ("descent-power/minus", -1)] {
        out.push(record(name, &["a", "b", "c", "x", "y", "s"], |v| {
            let (a, b, c, x, y, s) = (&v[0], &v[1], &v[2], &v[3], &v[4], &v[5]);
            let h = half();
            let lhs =
                a.square() + sq(-a.clone() + s.clone() * b.clone()) + sq(s.clone() * c.clone());
            let yc = y.clone() * c.clone() * sign;
            let rhs = sq(a.clone() + (x.clone() - s.clone()).scale(&h) * b.clone() + yc.clone())
                + sq(-a.clone() + (x.clone() + s.clone()).scale(&h) * b.clone() + yc)
                + sq(y.clone() * b.clone() - x.clone() * c.clone() * sign);
            let cond = SideCondition::SquareRewrite {
                var: 4,
                expr: (s.square() - x.square()).scale(&h),
            };
            (lhs, rhs, vec![cond])
        }));
    }

    out
}

/// A deliberately broken copy of the first catalog entry (one sign flipped).
pub fn corrupted_record() -> IdentityRecord {
    record("five-z-squared/corrupted", &["c", "d", "z"], |v| {
        let (c, d, z) = (&v[0], &v[1], &v[2]);
        let lhs = z.square() * 5;
        let rhs = sq(c.clone() * 2 + d.clone()) + sq(c.clone() + d.clone() * 2);
        let cond = SideCondition::SquareRewrite {
            var: 2,
            expr: c.square() + d.square(),
        };
        (lhs, rhs, vec![cond])
    })
}

fn sum_sq(t: &[i128]) -> i128 {
    t.iter().map(|x| x * x).sum()
}

fn ensure(identity: &'static str, expected: i128, got: i128) -> Result<(), IdentityError> {
    if expected == got {
        Ok(())
    } else {
        Err(IdentityError::VerificationFailed {
            identity,
            expected,
            got,
        })
    }
}

/// Signed triple with `a + b + c = 3m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignAdjustment {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub m: i128,
}

impl SignAdjustment {
    /// `(2m - a, 2m - b, 2m - c)`, which has the same sum of squares.
    pub fn reflected(&self) -> [i128; 3] {
        [
            2 * self.m - self.a,
            2 * self.m - self.b,
            2 * self.m - self.c,
        ]
    }
}

/// The eight sign patterns of `(a, b, c)`, `+` before `-`, `a` outermost.
pub fn sign_patterns(a: i128, b: i128, c: i128) -> impl Iterator<Item = [i128; 3]> {
    (0..8).map(move |mask| {
        let s = |bit: u32, v: i128| if mask & (1 << bit) == 0 { v } else { -v };
        [s(2, a), s(1, b), s(0, c)]
    })
}

/// Chooses signs so that `a + b + c = 0 (mod 3)`. With `p` given, also
/// requires `a != 2b`, `2a != b` and `a != -b (mod p)`.
pub fn sign_adjust_three(
    n_target: i128,
    a: i128,
    b: i128,
    c: i128,
    p: Option<u64>,
) -> Result<SignAdjustment, IdentityError> {
    if sum_sq(&[a, b, c]) != n_target {
        return Err(IdentityError::NotASum {
            n: n_target,
            a,
            b,
            c,
        });
    }
    for [x, y, z] in sign_patterns(a, b, c) {
        if (x + y + z).rem_euclid(3) != 0 {
            continue;
        }
        if let Some(p) = p {
            let p = p as i128;
            let zero = |v: i128| v.rem_euclid(p) == 0;
            if zero(x - 2 * y) || zero(2 * x - y) || zero(x + y) {
                continue;
            }
        }
        let adj = SignAdjustment {
            a: x,
            b: y,
            c: z,
            m: (x + y + z) / 3,
        };
        ensure("reflection/2m-x", n_target, sum_sq(&adj.reflected()))?;
        return Ok(adj);
    }
    Err(IdentityError::NoAdjustment)
}

/// `(x_t, y_t)` with `x_t^2 + 2 y_t^2 = 9^t` and `3 ∤ x_t y_t`, taken from
/// `(1 + 2 sqrt(-2))^t`.
pub fn xy_for_power(t: u32) -> Result<(i128, i128), IdentityError> {
    if t == 0 || t > 40 {
        return Err(IdentityError::ExponentOutOfRange(t));
    }
    let (mut x, mut y) = (1i128, 0i128);
    for _ in 0..t {
        // (x + y w)(1 + 2 w) with w^2 = -2
        (x, y) = (x - 4 * y, 2 * x + y);
    }
    let (x, y) = (x.abs(), y.abs());
    let target = 9i128.pow(t);
    assert_eq!(x * x + 2 * y * y, target, "norm of (1 + 2 sqrt(-2))^{t}");
    assert!(
        x % 3 != 0 && y % 3 != 0,
        "x_t y_t divisible by 3 at t = {t}"
    );
    Ok((x, y))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentOutput {
    pub n: i128,
    pub triples: [[i128; 3]; 2],
}

/// Both rewrites of `n = a^2 + (-a + 3^t b)^2 + (3^t c)^2`.
pub fn descent_step(a: i128, b: i128, c: i128, t: u32) -> Result<DescentOutput, IdentityError> {
    let (x, y) = xy_for_power(t)?;
    descent_step_with(a, b, c, t, x, y)
}

/// [`descent_step`] with caller-supplied `(x_t, y_t)`; the output is checked.
pub fn descent_step_with(
    a: i128,
    b: i128,
    c: i128,
    t: u32,
    x: i128,
    y: i128,
) -> Result<DescentOutput, IdentityError> {
    let s = 3i128.pow(t);
    let n = sum_sq(&[a, -a + s * b, s * c]);
    if (x - s) % 2 != 0 {
        return Err(IdentityError::VerificationFailed {
            identity: "descent-power",
            expected: 0,
            got: (x - s).rem_euclid(2),
        });
    }
    let lo = (x - s) / 2;
    let hi = (x + s) / 2;
    let first = [a + lo * b + y * c, -a + hi * b + y * c, y * b - x * c];
    let second = [a + lo * b - y * c, -a + hi * b - y * c, y * b + x * c];
    ensure("descent-power/plus", n, sum_sq(&first))?;
    ensure("descent-power/minus", n, sum_sq(&second))?;
    Ok(DescentOutput {
        n,
        triples: [first, second],
    })
}

/// `2a^2 + 2b^2 + 2bc + 3c^2`.
pub fn partner_value(a: i128, b: i128, c: i128) -> i128 {
    2 * a * a + 2 * b * b + 2 * b * c + 3 * c * c
}

pub fn ramanujan_value(x: i128, y: i128, z: i128) -> i128 {
    x * x + y * y + 10 * z * z
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimitiveRebase {
    AlreadyPrimitive,
    Found { d: i128, e: i128 },
}

fn search_order(bound: i128) -> impl Iterator<Item = i128> + Clone {
    std::iter::once(0).chain((1..=bound).flat_map(|v| [v, -v]))
}

/// `(d, e)` with `2d^2 + 2de + 3e^2 = 2b^2 + 2bc + 3c^2` and `3 ∤ gcd(d, e)`.
pub fn three_primitive_binary(b: i128, c: i128) -> Result<PrimitiveRebase, IdentityError> {
    if b == 0 && c == 0 {
        return Err(IdentityError::ZeroBinary);
    }
    if b % 3 != 0 || c % 3 != 0 {
        return Ok(PrimitiveRebase::AlreadyPrimitive);
    }
    let value = partner_value(0, b, c);
    let bound = isqrt_u128(value as u128) as i128 + 1;
    for d in search_order(bound) {
        for e in search_order(bound) {
            if (d % 3 != 0 || e % 3 != 0) && partner_value(0, d, e) == value {
                return Ok(PrimitiveRebase::Found { d, e });
            }
        }
    }
    Err(IdentityError::Impossible(value))
}

/// Which substitution produced a `<1,1,10>` representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftRoute {
    ZeroTail,
    Case110,
    Case010,
    Case101,
    Rebased,
    Search,
}

impl LiftRoute {
    pub fn name(&self) -> &'static str {
        match self {
            LiftRoute::ZeroTail => "partner-to-ramanujan/b=c=0",
            LiftRoute::Case110 => "partner-to-ramanujan/1,1,-1",
            LiftRoute::Case010 => "partner-to-ramanujan/0,1,0",
            LiftRoute::Case101 => "partner-to-ramanujan/1,0,1",
            LiftRoute::Rebased => "three-primitive-rebase",
            LiftRoute::Search => "bounded-search",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RamanujanLift {
    pub xyz: [i128; 3],
    pub route: LiftRoute,
    pub trace: Vec<String>,
}

/// Maps a representation `n = 2a^2 + 2b^2 + 2bc + 3c^2` to one of
/// `n = x^2 + y^2 + 10z^2`.
pub fn ramatec_lift(a: i128, b: i128, c: i128) -> Result<RamanujanLift, IdentityError> {
    let n = partner_value(a, b, c);
    let mut trace = Vec::new();
    let lift = lift_by_cases(a, b, c, &mut trace)?;
    let lift = match lift {
        Some(l) => l,
        None => {
            trace.push("residue class outside the substitution table; searching".into());
            let xyz = search_ramanujan(n).ok_or(IdentityError::Unhandled(n))?;
            RamanujanLift {
                xyz,
                route: LiftRoute::Search,
                trace,
            }
        }
    };
    let [x, y, z] = lift.xyz;
    ensure(lift.route.name(), n, ramanujan_value(x, y, z))?;
    Ok(lift)
}

fn lift_by_cases(
    a: i128,
    b: i128,
    c: i128,
    trace: &mut Vec<String>,
) -> Result<Option<RamanujanLift>, IdentityError> {
    if b == 0 && c == 0 {
        return Ok(Some(RamanujanLift {
            xyz: [a, a, 0],
            route: LiftRoute::ZeroTail,
            trace: std::mem::take(trace),
        }));
    }
    let r = |v: i128| v.rem_euclid(3);
    // a -> -a and (b, c) -> (-b, -c) preserve the form.
    let a = if r(a) == 2 { -a } else { a };
    let (b, c) = match (r(b), r(c)) {
        (2, _) | (0, 2) => (-b, -c),
        _ => (b, c),
    };
    trace.push(format!("normalized to ({a}, {b}, {c})"));
    let out = match (r(a), r(b), r(c)) {
        (1, 1, 2) => {
            let (b1, c1) = ((b - a) / 3, (c - 2 * a) / 3);
            Some((
                [a + 3 * b1 - c1, 3 * a + 3 * b1 + 4 * c1, a + c1],
                LiftRoute::Case110,
            ))
        }
        (0, 1, 0) => {
            let (a1, c1) = (a / 3, c / 3);
            Some((
                [2 * a1 + b + 4 * c1, 2 * a1 - b + c1, a1 - c1],
                LiftRoute::Case010,
            ))
        }
        (1, 0, 1) => {
            let (b1, c1) = (b / 3, (c - a) / 3);
            Some((
                [2 * a + 3 * b1 + 4 * c1, a - 3 * b1 + c1, c1],
                LiftRoute::Case101,
            ))
        }
        (1, 0, 0) => match three_primitive_binary(b, c) {
            Ok(PrimitiveRebase::Found { d, e }) => {
                trace.push(format!("rebased (b, c) = ({b}, {c}) to ({d}, {e})"));
                let inner = lift_by_cases(a, d, e, trace)?;
                return Ok(inner.map(|l| RamanujanLift {
                    route: LiftRoute::Rebased,
                    ..l
                }));
            }
            Ok(PrimitiveRebase::AlreadyPrimitive) => None,
            Err(IdentityError::Impossible(v)) => {
                trace.push(format!("no 3-primitive rebase for {v}"));
                None
            }
            Err(e) => return Err(e),
        },
        _ => None,
    };
    Ok(out.map(|(xyz, route)| RamanujanLift {
        xyz,
        route,
        trace: std::mem::take(trace),
    }))
}

fn search_ramanujan(n: i128) -> Option<[i128; 3]> {
    if n < 0 {
        return None;
    }
    let zmax = isqrt_u128((n / 10) as u128) as i128;
    for z in 0..=zmax {
        let rest = n - 10 * z * z;
        let ymax = isqrt_u128(rest as u128) as i128;
        for y in 0..=ymax {
            let x2 = rest - y * y;
            let x = isqrt_u128(x2 as u128) as i128;
            if x * x == x2 {
                return Some([x, y, z]);
            }
        }
    }
    None
}

/// The pair from `5z^2 = (2c + d)^2 + (c - 2d)^2 = (2c - d)^2 + (c + 2d)^2`
/// whose product is prime to `p`, if either is.
pub fn five_z_split(c: i128, d: i128, p: u64) -> Option<[i128; 2]> {
    let p = p as i128;
    [[2 * c + d, c - 2 * d], [2 * c - d, c + 2 * d]]
        .into_iter()
        .find(|[u, v]| (u * v).rem_euclid(p) != 0)
}

/// The four four-square expansions of `3(a^2 + b^2 + c^2)`.
pub fn euler_triple_expansions(a: i128, b: i128, c: i128) -> [[i128; 4]; 4] {
    [
        [a - b - c, a + b, a + c, b - c],
        [a + b + c, a - b, a - c, b - c],
        [a + b - c, a - b, a + c, b + c],
        [a - b + c, a + b, a - c, b + c],
    ]
}

/// Number of residues `x0 mod p` with `n - x0^2` zero or a square mod `p`.
pub fn square_or_zero_count(n: i64, p: u64) -> u64 {
    (0..p as i64)
        .filter(|&x| legendre(n - x * x, p).expect("odd prime") >= 0)
        .count() as u64
}
