//! Positive-definite integral quadratic forms.
//!
//! A form is stored as its symmetric Gram matrix `M`, with `f(x) = x^t M x`.
//! Vector enumeration uses the rational decomposition
//! `f(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2`, which yields exact integer
//! bounds for every coordinate; the innermost coordinate is then solved from
//! the integer quadratic equation instead of being scanned.

#![allow(clippy::needless_range_loop)]

use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{isqrt_u128, Rational};

/// Largest target accepted by [`QuadForm::representations`] unless a caller
/// supplies its own ceiling.
pub const DEFAULT_REP_CEILING: u64 = 100_000_000;

/// Upper bound on candidate column vectors while enumerating isometries.
const AUT_CANDIDATE_LIMIT: usize = 50_000;

type Q = Ratio<i128>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuadFormError {
    #[error("Gram matrix must be square and non-empty")]
    NotSquare,
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("form is not positive definite")]
    NotPositiveDefinite,
    #[error("vector has length {got}, form has rank {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("target {target} exceeds the enumeration ceiling {ceiling}")]
    CeilingExceeded { target: u64, ceiling: u64 },
    #[error("isometry enumeration supports rank <= 4, got {0}")]
    RankTooLarge(usize),
    #[error("isometry enumeration aborted: {0} candidate vectors")]
    TooManyCandidates(usize),
    #[error("genus entry has no classes")]
    EmptyGenus,
    #[error("stored isometry order {stored} for {form} disagrees with enumerated {computed}")]
    IsometryOrderMismatch {
        form: String,
        stored: u64,
        computed: u64,
    },
    #[error("cannot parse form: {0}")]
    Parse(String),
}

/// Positive-definite integral quadratic form given by its Gram matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct QuadForm {
    rank: usize,
    gram: Vec<i64>,
    // Upper-triangular rational decomposition used by the enumerator.
    chol: Vec<Q>,
}

impl QuadForm {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self, QuadFormError> {
        let rank = rows.len();
        if rank == 0 || rows.iter().any(|r| r.len() != rank) {
            return Err(QuadFormError::NotSquare);
        }
        for i in 0..rank {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(QuadFormError::NotSymmetric);
                }
            }
        }
        let gram: Vec<i64> = rows.into_iter().flatten().collect();
        for k in 1..=rank {
            let minor: Vec<i64> = (0..k)
                .flat_map(|i| (0..k).map(move |j| (i, j)))
                .map(|(i, j)| gram[i * rank + j])
                .collect();
            if determinant(&minor, k) <= 0 {
                return Err(QuadFormError::NotPositiveDefinite);
            }
        }
        let chol = decompose(&gram, rank);
        Ok(Self { rank, gram, chol })
    }

    /// Diagonal form `<a_1, ..., a_n>`.
    pub fn diagonal(entries: &[i64]) -> Result<Self, QuadFormError> {
        let n = entries.len();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { entries[i] } else { 0 })
                    .collect()
            })
            .collect();
        Self::new(rows)
    }

    /// Sum of `n` squares.
    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1; n]).expect("identity is positive definite")
    }

    /// Orthogonal sum `self ⊥ other`.
    pub fn orthogonal_sum(&self, other: &QuadForm) -> Self {
        let n = self.rank + other.rank;
        let mut rows = vec![vec![0i64; n]; n];
        for i in 0..self.rank {
            for j in 0..self.rank {
                rows[i][j] = self.entry(i, j);
            }
        }
        for i in 0..other.rank {
            for j in 0..other.rank {
                rows[self.rank + i][self.rank + j] = other.entry(i, j);
            }
        }
        Self::new(rows).expect("orthogonal sum of positive definite forms")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.gram[i * self.rank + j]
    }

    pub fn gram_rows(&self) -> Vec<Vec<i64>> {
        self.gram.chunks(self.rank).map(<[i64]>::to_vec).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rank).all(|i| (0..self.rank).all(|j| i == j || self.entry(i, j) == 0))
    }

    /// `det(M_f)`.
    pub fn discriminant(&self) -> u64 {
        determinant(&self.gram, self.rank) as u64
    }

    pub fn bilinear(&self, x: &[i64], y: &[i64]) -> i128 {
        let mut s = 0i128;
        for i in 0..self.rank {
            for j in 0..self.rank {
                s += self.entry(i, j) as i128 * x[i] as i128 * y[j] as i128;
            }
        }
        s
    }

    /// `x^t M_f x`.
    pub fn evaluate(&self, x: &[i64]) -> Result<u64, QuadFormError> {
        if x.len() != self.rank {
            return Err(QuadFormError::DimensionMismatch {
                expected: self.rank,
                got: x.len(),
            });
        }
        Ok(self.bilinear(x, x) as u64)
    }

    /// All vectors with `f(x) = target`, sorted lexicographically.
    pub fn representations(&self, target: u64) -> Result<RepSet, QuadFormError> {
        self.representations_with_ceiling(target, DEFAULT_REP_CEILING)
    }

    pub fn representations_with_ceiling(
        &self,
        target: u64,
        ceiling: u64,
    ) -> Result<RepSet, QuadFormError> {
        check_ceiling(target, ceiling)?;
        let mut vectors = Vec::new();
        let _ = self.visit_exact(target, &mut |x| {
            vectors.push(x.to_vec());
            ControlFlow::Continue(())
        });
        vectors.sort();
        Ok(RepSet { target, vectors })
    }

    /// `r(a, f)` without materializing the vectors.
    pub fn rep_count(&self, target: u64) -> Result<u64, QuadFormError> {
        check_ceiling(target, DEFAULT_REP_CEILING)?;
        let mut count = 0u64;
        let _ = self.visit_exact(target, &mut |_| {
            count += 1;
            ControlFlow::Continue(())
        });
        Ok(count)
    }

    pub fn is_represented(&self, target: u64) -> Result<bool, QuadFormError> {
        Ok(self.find_representation(target, |_| true)?.is_some())
    }

    /// First vector (in enumeration order) with `f(x) = target` accepted by `pred`.
    pub fn find_representation(
        &self,
        target: u64,
        mut pred: impl FnMut(&[i64]) -> bool,
    ) -> Result<Option<Vec<i64>>, QuadFormError> {
        check_ceiling(target, DEFAULT_REP_CEILING)?;
        let mut found = None;
        let _ = self.visit_exact(target, &mut |x| {
            if pred(x) {
                found = Some(x.to_vec());
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        Ok(found)
    }

    /// Coefficients `r(0, f), ..., r(bound, f)` of the theta series.
    pub fn theta_series(&self, bound: u64) -> Result<Vec<u64>, QuadFormError> {
        check_ceiling(bound, DEFAULT_REP_CEILING)?;
        let mut counts = vec![0u64; bound as usize + 1];
        let _ = self.visit_up_to(bound, &mut |_, value| {
            counts[value as usize] += 1;
            ControlFlow::Continue(())
        });
        Ok(counts)
    }

    /// Calls `visit` on every `x` with `f(x) = target`.
    pub fn visit_exact(
        &self,
        target: u64,
        visit: &mut dyn FnMut(&[i64]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let mut x = vec![0i64; self.rank];
        let top = self.rank - 1;
        self.descend(
            top,
            Q::from_integer(target as i128),
            target,
            &mut x,
            &mut |x, _| visit(x),
            true,
        )
    }

    /// Calls `visit(x, f(x))` on every `x` with `f(x) <= bound`.
    pub fn visit_up_to(
        &self,
        bound: u64,
        visit: &mut dyn FnMut(&[i64], u64) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let mut x = vec![0i64; self.rank];
        let top = self.rank - 1;
        self.descend(
            top,
            Q::from_integer(bound as i128),
            bound,
            &mut x,
            visit,
            false,
        )
    }

    fn q(&self, i: usize, j: usize) -> &Q {
        &self.chol[i * self.rank + j]
    }

    fn center(&self, level: usize, x: &[i64]) -> Q {
        let mut c = Q::zero();
        for j in level + 1..self.rank {
            c += *self.q(level, j) * Q::from_integer(x[j] as i128);
        }
        c
    }

    fn descend(
        &self,
        level: usize,
        remaining: Q,
        target: u64,
        x: &mut [i64],
        visit: &mut dyn FnMut(&[i64], u64) -> ControlFlow<()>,
        exact: bool,
    ) -> ControlFlow<()> {
        if level == 0 && exact {
            return self.solve_first(target, x, visit);
        }
        let center = self.center(level, x);
        let Some((lo, hi)) = coordinate_range(*self.q(level, level), center, remaining) else {
            return ControlFlow::Continue(());
        };
        for v in lo..=hi {
            x[level] = v as i64;
            if level == 0 {
                let value = self.bilinear(x, x) as u64;
                if value <= target {
                    visit(x, value)?;
                }
            } else {
                let shifted = Q::from_integer(v) + center;
                let next = remaining - *self.q(level, level) * shifted * shifted;
                self.descend(level - 1, next, target, x, visit, exact)?;
            }
        }
        x[level] = 0;
        ControlFlow::Continue(())
    }

    // Solves g00 x0^2 + 2 b x0 + c = target for the remaining coordinate.
    fn solve_first(
        &self,
        target: u64,
        x: &mut [i64],
        visit: &mut dyn FnMut(&[i64], u64) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let g00 = self.entry(0, 0) as i128;
        let mut b = 0i128;
        for j in 1..self.rank {
            b += self.entry(0, j) as i128 * x[j] as i128;
        }
        let mut c = 0i128;
        for i in 1..self.rank {
            for j in 1..self.rank {
                c += self.entry(i, j) as i128 * x[i] as i128 * x[j] as i128;
            }
        }
        let disc = b * b - g00 * (c - target as i128);
        if disc < 0 {
            return ControlFlow::Continue(());
        }
        let s = isqrt_u128(disc as u128) as i128;
        if s * s != disc {
            return ControlFlow::Continue(());
        }
        let mut roots = [(-b - s), (-b + s)];
        roots.sort_unstable();
        let count = if s == 0 { 1 } else { 2 };
        for &num in &roots[..count] {
            if num.rem_euclid(g00) == 0 {
                x[0] = (num / g00) as i64;
                visit(x, target)?;
            }
        }
        x[0] = 0;
        ControlFlow::Continue(())
    }

    /// The isometry group `O(f)`.
    pub fn automorphisms(&self) -> Result<Automorphisms, QuadFormError> {
        if self.rank > 4 {
            return Err(QuadFormError::RankTooLarge(self.rank));
        }
        let mut candidates = Vec::with_capacity(self.rank);
        for i in 0..self.rank {
            let norm = self.entry(i, i) as u64;
            let reps = self.representations(norm)?;
            if reps.vectors.len() > AUT_CANDIDATE_LIMIT {
                return Err(QuadFormError::TooManyCandidates(reps.vectors.len()));
            }
            candidates.push(reps.vectors);
        }
        let mut matrices = Vec::new();
        let mut columns: Vec<Vec<i64>> = Vec::with_capacity(self.rank);
        self.extend_isometry(&candidates, &mut columns, &mut matrices);
        Ok(Automorphisms { matrices })
    }

    fn extend_isometry(
        &self,
        candidates: &[Vec<Vec<i64>>],
        columns: &mut Vec<Vec<i64>>,
        out: &mut Vec<IntMatrix>,
    ) {
        let i = columns.len();
        if i == self.rank {
            let n = self.rank;
            let m = (0..n)
                .map(|r| (0..n).map(|c| columns[c][r]).collect())
                .collect();
            out.push(IntMatrix(m));
            return;
        }
        for v in &candidates[i] {
            let fits = columns
                .iter()
                .enumerate()
                .all(|(j, w)| self.bilinear(w, v) == self.entry(j, i) as i128);
            if fits {
                columns.push(v.clone());
                self.extend_isometry(candidates, columns, out);
                columns.pop();
            }
        }
    }
}

fn check_ceiling(target: u64, ceiling: u64) -> Result<(), QuadFormError> {
    if target > ceiling {
        Err(QuadFormError::CeilingExceeded { target, ceiling })
    } else {
        Ok(())
    }
}

/// Integers `v` with `q (v + c)^2 <= r`, or `None` when there are none.
fn coordinate_range(q: Q, c: Q, r: Q) -> Option<(i128, i128)> {
    if r.is_negative() {
        return None;
    }
    let s = r / q;
    let (cn, cd) = (*c.numer(), *c.denom());
    let (sn, sd) = (*s.numer(), *s.denom());
    // t = v*cd + cn must satisfy t^2 <= sn*cd^2/sd.
    let bound = Integer::div_floor(&(sn * cd * cd), &sd);
    let t = isqrt_u128(bound as u128) as i128;
    let lo = Integer::div_ceil(&(-t - cn), &cd);
    let hi = Integer::div_floor(&(t - cn), &cd);
    (lo <= hi).then_some((lo, hi))
}

fn decompose(gram: &[i64], n: usize) -> Vec<Q> {
    let mut q: Vec<Q> = gram.iter().map(|&g| Q::from_integer(g as i128)).collect();
    for i in 0..n {
        for j in i + 1..n {
            q[j * n + i] = q[i * n + j];
            q[i * n + j] = q[i * n + j] / q[i * n + i];
        }
        for k in i + 1..n {
            for l in k..n {
                let delta = q[k * n + i] * q[i * n + l];
                q[k * n + l] -= delta;
            }
        }
    }
    q
}

/// Fraction-free (Bareiss) determinant of an `n x n` row-major matrix.
fn determinant(m: &[i64], n: usize) -> i128 {
    let mut a: Vec<i128> = m.iter().map(|&v| v as i128).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k * n + k] == 0 {
            let Some(swap) = (k + 1..n).find(|&r| a[r * n + k] != 0) else {
                return 0;
            };
            for c in 0..n {
                a.swap(k * n + c, swap * n + c);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
            }
        }
        prev = a[k * n + k];
    }
    sign * a[(n - 1) * n + (n - 1)]
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_diagonal() {
            let d: Vec<String> = (0..self.rank)
                .map(|i| self.entry(i, i).to_string())
                .collect();
            write!(f, "<{}>", d.join(","))
        } else {
            let rows: Vec<String> = self
                .gram_rows()
                .iter()
                .map(|r| {
                    let r: Vec<String> = r.iter().map(i64::to_string).collect();
                    format!("[{}]", r.join(","))
                })
                .collect();
            write!(f, "[{}]", rows.join(","))
        }
    }
}

impl fmt::Debug for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuadForm({self})")
    }
}

/// Accepts a diagonal list `1,1,10` (optionally wrapped in `<...>`) or a full
/// Gram matrix `[[2,0,0],[0,2,1],[0,1,3]]`.
impl FromStr for QuadForm {
    type Err = QuadFormError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let parse_list = |body: &str| -> Result<Vec<i64>, QuadFormError> {
            body.split(',')
                .map(|t| {
                    t.parse::<i64>()
                        .map_err(|_| QuadFormError::Parse(format!("bad integer {t:?}")))
                })
                .collect()
        };
        if let Some(inner) = s.strip_prefix("[[").and_then(|r| r.strip_suffix("]]")) {
            let rows = inner
                .split("],[")
                .map(parse_list)
                .collect::<Result<Vec<_>, _>>()?;
            Self::new(rows)
        } else {
            let body = s
                .strip_prefix('<')
                .and_then(|r| r.strip_suffix('>'))
                .unwrap_or(&s);
            if body.is_empty() {
                return Err(QuadFormError::Parse("empty form".into()));
            }
            Self::diagonal(&parse_list(body)?)
        }
    }
}

/// `R(a, f)`: every integer vector at which the form takes the value `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepSet {
    pub target: u64,
    pub vectors: Vec<Vec<i64>>,
}

impl RepSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IntMatrix(pub Vec<Vec<i64>>);

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        IntMatrix(
            (0..n)
                .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
                .collect(),
        )
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.0.len();
        IntMatrix(
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).map(|k| self.0[i][k] * other.0[k][j]).sum())
                        .collect()
                })
                .collect(),
        )
    }

    pub fn transpose(&self) -> IntMatrix {
        let n = self.0.len();
        IntMatrix(
            (0..n)
                .map(|i| (0..n).map(|j| self.0[j][i]).collect())
                .collect(),
        )
    }

    /// Whether `T^t M T = M` for the Gram matrix of `f`.
    pub fn preserves(&self, f: &QuadForm) -> bool {
        let m = IntMatrix(f.gram_rows());
        self.transpose().mul(&m).mul(self) == m
    }
}

#[derive(Debug, Clone)]
pub struct Automorphisms {
    pub matrices: Vec<IntMatrix>,
}

impl Automorphisms {
    /// `o(f)`.
    pub fn order(&self) -> u64 {
        self.matrices.len() as u64
    }
}

/// One genus from the fixed registry, with its class representatives and
/// their isometry orders.
#[derive(Debug, Clone)]
pub struct GenusEntry {
    pub label: String,
    pub classes: Vec<(QuadForm, u64)>,
}

impl GenusEntry {
    pub fn class_number(&self) -> usize {
        self.classes.len()
    }

    /// `w(f) = sum 1/o(g)`.
    pub fn mass(&self) -> Rational {
        self.classes
            .iter()
            .map(|(_, o)| Rational::new(BigInt::one(), BigInt::from(*o)))
            .sum()
    }

    pub fn contains(&self, f: &QuadForm) -> bool {
        self.classes.iter().any(|(g, _)| g == f)
    }
}

/// `r(a, gen(f)) = (1/w) sum r(a, g)/o(g)` over the classes of the entry.
pub fn mass_weighted_count(entry: &GenusEntry, target: u64) -> Result<Rational, QuadFormError> {
    if entry.classes.is_empty() {
        return Err(QuadFormError::EmptyGenus);
    }
    let mut weighted = Rational::zero();
    for (g, o) in &entry.classes {
        let r = g.rep_count(target)?;
        weighted += Rational::new(BigInt::from(r), BigInt::from(*o));
    }
    Ok(weighted / entry.mass())
}

/// The genera used throughout: sums of one to four squares, `<1,5>`,
/// `<1,1,2>`, `<1,1,5>`, and the two-class genus of `<1,1,10>`.
#[derive(Debug, Clone)]
pub struct GenusRegistry {
    pub entries: Vec<GenusEntry>,
}

impl GenusRegistry {
    /// Builds the registry and re-derives every stored isometry order.
    pub fn build() -> Result<Self, QuadFormError> {
        let diag = |d: &[i64]| QuadForm::diagonal(d).expect("registry forms are definite");
        let single = |label: &str, f: QuadForm, o: u64| GenusEntry {
            label: label.to_string(),
            classes: vec![(f, o)],
        };
        let entries = vec![
            single("I1", QuadForm::identity(1), 2),
            single("I2", QuadForm::identity(2), 8),
            single("I3", QuadForm::identity(3), 48),
            single("I4", QuadForm::identity(4), 384),
            single("<1,5>", diag(&[1, 5]), 4),
            single("<1,1,2>", diag(&[1, 1, 2]), 16),
            single("<1,1,5>", diag(&[1, 1, 5]), 16),
            GenusEntry {
                label: "gen<1,1,10>".to_string(),
                classes: vec![(ramanujan_form(), 16), (ramanujan_partner(), 8)],
            },
        ];
        for entry in &entries {
            for (f, stored) in &entry.classes {
                let computed = f.automorphisms()?.order();
                if computed != *stored {
                    return Err(QuadFormError::IsometryOrderMismatch {
                        form: f.to_string(),
                        stored: *stored,
                        computed,
                    });
                }
            }
        }
        Ok(Self { entries })
    }

    /// Shared registry, built and verified on first use.
    pub fn standard() -> &'static GenusRegistry {
        static REGISTRY: OnceLock<GenusRegistry> = OnceLock::new();
        REGISTRY.get_or_init(|| Self::build().expect("registry isometry orders verify"))
    }

    pub fn entry(&self, label: &str) -> Option<&GenusEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    /// The genus entry containing `f`, if registered.
    pub fn genus_of(&self, f: &QuadForm) -> Option<&GenusEntry> {
        self.entries.iter().find(|e| e.contains(f))
    }
}

/// `<1,1,10>`.
pub fn ramanujan_form() -> QuadForm {
    QuadForm::diagonal(&[1, 1, 10]).expect("definite")
}

/// `<2> ⊥ [[2,1],[1,3]]`, the second class in the genus of `<1,1,10>`.
pub fn ramanujan_partner() -> QuadForm {
    QuadForm::new(vec![vec![2, 0, 0], vec![0, 2, 1], vec![0, 1, 3]]).expect("definite")
}
