//! Sums of squares whose parts are all prime to a fixed `p`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{
    factorize, is_prime, is_square, is_sum_three_squares, isqrt, legendre, min_squares,
};
use crate::identities::{self, sign_adjust_three, IdentityError};
use crate::quadform::{QuadForm, QuadFormError, DEFAULT_REP_CEILING};

/// Largest `n` accepted by [`restricted_decompose`].
pub const DECOMPOSE_CEILING: u64 = 1_000_000_000_000;
/// Largest `hi` accepted by [`sp_scan`].
pub const SCAN_CEILING: u64 = 100_000_000;
pub const DEFAULT_CAP: u32 = 12;
/// Rows per parallel work unit; scan output is delivered chunk by chunk.
pub const SCAN_CHUNK: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RestrictedError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("n and k must be positive")]
    ZeroInput,
    #[error("{n} exceeds the resource ceiling {ceiling}")]
    CeilingExceeded { n: u64, ceiling: u64 },
    #[error("empty range: lo = {lo} > hi = {hi}")]
    InvalidRange { lo: u64, hi: u64 },
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("constructive route needs p >= 7, got {0}")]
    PrimeTooSmall(u64),
    #[error(transparent)]
    Form(#[from] QuadFormError),
    #[error(transparent)]
    Identity(#[from] IdentityError),
}

/// `n = sum x_i^2` with every `x_i` prime to `p`, parts nonincreasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RestrictedWitness {
    n: u64,
    p: u64,
    parts: Vec<u64>,
}

impl RestrictedWitness {
    /// Sorts `parts` and checks every invariant.
    pub fn new(n: u64, p: u64, mut parts: Vec<u64>) -> Result<Self, RestrictedError> {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        if let Some(bad) = parts.iter().find(|&&x| x == 0 || x % p == 0) {
            return Err(RestrictedError::InvalidWitness(format!(
                "part {bad} is not prime to {p}"
            )));
        }
        let total: u128 = parts.iter().map(|&x| (x as u128) * (x as u128)).sum();
        if total != n as u128 {
            return Err(RestrictedError::InvalidWitness(format!(
                "squares sum to {total}, not {n}"
            )));
        }
        Ok(Self { n, p, parts })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn certificate(&self, route: &str) -> Certificate {
        Certificate {
            n: self.n,
            p: self.p,
            k: self.parts.len(),
            parts: self.parts.clone(),
            route: route.to_string(),
            verified: Self::new(self.n, self.p, self.parts.clone()).is_ok(),
        }
    }
}

impl fmt::Display for RestrictedWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sq: Vec<String> = self.parts.iter().map(|x| format!("{x}^2")).collect();
        write!(f, "{} = {}", self.n, sq.join(" + "))
    }
}

/// Machine-readable witness record; field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub n: u64,
    pub p: u64,
    pub k: usize,
    pub parts: Vec<u64>,
    pub route: String,
    pub verified: bool,
}

fn check_prime(p: u64) -> Result<(), RestrictedError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(RestrictedError::NotPrime(p))
    }
}

struct Search {
    p: u64,
    failed: HashSet<(u64, u32, u64)>,
    parts: Vec<u64>,
}

impl Search {
    fn allowed(&self, x: u64) -> bool {
        x > 0 && !x.is_multiple_of(self.p)
    }

    fn feasible(&self, rem: u64, left: u32, max: u64) -> bool {
        let left64 = left as u64;
        if rem < left64 || (rem as u128) > (left as u128) * (max as u128) * (max as u128) {
            return false;
        }
        match self.p {
            2 => rem % 8 == left64 % 8,
            3 => rem % 3 == left64 % 3,
            _ => true,
        }
    }

    fn run(&mut self, rem: u64, left: u32, max: u64) -> bool {
        let max = max.min(isqrt(rem));
        if left == 0 {
            return rem == 0;
        }
        if !self.feasible(rem, left, max) {
            return false;
        }
        if left == 1 {
            let s = isqrt(rem);
            if s * s == rem && s <= max && self.allowed(s) {
                self.parts.push(s);
                return true;
            }
            return false;
        }
        if left == 3 && !is_sum_three_squares(rem) {
            return false;
        }
        let key = (rem, left, max);
        if self.failed.contains(&key) {
            return false;
        }
        // The largest part is at least the root mean square.
        let lo = isqrt(rem.div_ceil(left as u64));
        let lo = if lo * lo * (left as u64) < rem {
            lo + 1
        } else {
            lo
        };
        let mut x = max;
        while x >= lo.max(1) {
            if self.allowed(x) {
                self.parts.push(x);
                if self.run(rem - x * x, left - 1, x) {
                    return true;
                }
                self.parts.pop();
            }
            x -= 1;
        }
        self.failed.insert(key);
        false
    }
}

/// Lexicographically greatest nonincreasing `k`-part witness, or `None` when
/// exhaustive search finds no decomposition.
pub fn restricted_decompose(
    n: u64,
    p: u64,
    k: u32,
) -> Result<Option<RestrictedWitness>, RestrictedError> {
    check_prime(p)?;
    if n == 0 || k == 0 {
        return Err(RestrictedError::ZeroInput);
    }
    if n > DECOMPOSE_CEILING {
        return Err(RestrictedError::CeilingExceeded {
            n,
            ceiling: DECOMPOSE_CEILING,
        });
    }
    let mut search = Search {
        p,
        failed: HashSet::new(),
        parts: Vec::with_capacity(k as usize),
    };
    if search.run(n, k, isqrt(n)) {
        Ok(Some(RestrictedWitness::new(n, p, search.parts)?))
    } else {
        Ok(None)
    }
}

/// Smallest `k <= cap` admitting a witness.
pub fn min_restricted_k(
    n: u64,
    p: u64,
    cap: u32,
) -> Result<Option<RestrictedWitness>, RestrictedError> {
    check_prime(p)?;
    if n == 0 || cap == 0 {
        return Err(RestrictedError::ZeroInput);
    }
    for k in min_squares(n).max(1)..=cap {
        if let Some(w) = restricted_decompose(n, p, k)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Bitsets `L_j` of values in `[0, hi]` that are sums of exactly `j` allowed squares.
pub struct ExactCountTables {
    p: u64,
    hi: u64,
    squares: Vec<u64>,
    levels: Vec<Vec<u64>>,
}

impl ExactCountTables {
    pub fn new(p: u64, hi: u64) -> Self {
        let words = (hi as usize) / 64 + 1;
        let mut zero = vec![0u64; words];
        zero[0] = 1;
        let squares = (1..=isqrt(hi))
            .filter(|x| x % p != 0)
            .map(|x| x * x)
            .collect();
        Self {
            p,
            hi,
            squares,
            levels: vec![zero],
        }
    }

    pub fn depth(&self) -> u32 {
        self.levels.len() as u32 - 1
    }

    /// Builds the next level with a parallel shift-or over destination words.
    pub fn extend(&mut self) {
        let src = self.levels.last().expect("level 0 exists");
        let words = src.len();
        let mut dst = vec![0u64; words];
        dst.par_chunks_mut(256).enumerate().for_each(|(ci, chunk)| {
            let base = ci * 256;
            for s in &self.squares {
                let ws = (s / 64) as usize;
                let bit = (s % 64) as u32;
                for (off, d) in chunk.iter_mut().enumerate() {
                    let w = base + off;
                    if w < ws {
                        continue;
                    }
                    let mut v = src[w - ws] << bit;
                    if bit > 0 && w > ws {
                        v |= src[w - ws - 1] >> (64 - bit);
                    }
                    *d |= v;
                }
            }
        });
        let tail = (self.hi % 64) as u32;
        if tail < 63 {
            dst[words - 1] &= (1u64 << (tail + 1)) - 1;
        }
        self.levels.push(dst);
    }

    pub fn contains(&self, level: u32, n: u64) -> bool {
        let lv = &self.levels[level as usize];
        (lv[(n / 64) as usize] >> (n % 64)) & 1 == 1
    }

    pub fn min_k(&self, n: u64) -> Option<u32> {
        (1..=self.depth()).find(|&j| self.contains(j, n))
    }

    /// Greedy largest-first witness; equals the lexicographically greatest one.
    pub fn witness(&self, n: u64, k: u32) -> Option<Vec<u64>> {
        if k > self.depth() || !self.contains(k, n) {
            return None;
        }
        let mut parts = Vec::with_capacity(k as usize);
        let (mut rem, mut max) = (n, isqrt(n));
        for left in (0..k).rev() {
            let x = (1..=max.min(isqrt(rem)))
                .rev()
                .find(|&x| x % self.p != 0 && self.contains(left, rem - x * x))?;
            parts.push(x);
            rem -= x * x;
            max = x;
        }
        Some(parts)
    }
}

/// One line of a scan: `n`, its minimal restricted `k` (if within the cap), and the witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanRow {
    pub n: u64,
    pub min_k: Option<u32>,
    pub parts: Vec<u64>,
}

impl ScanRow {
    pub fn tsv(&self) -> String {
        match self.min_k {
            Some(k) => {
                let parts: Vec<String> = self.parts.iter().map(u64::to_string).collect();
                format!("{}\t{}\t{}", self.n, k, parts.join(","))
            }
            None => format!("{}\tNONE\tNONE", self.n),
        }
    }
}

pub const SCAN_TSV_HEADER: &str = "n\tmin_k\tparts";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanException {
    pub n: u64,
    /// `None` means no witness up to the cap.
    pub min_k: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub p: u64,
    pub range: (u64, u64),
    pub cap: u32,
    pub max_k: u32,
    pub histogram: BTreeMap<u32, u64>,
    pub none_up_to_cap: u64,
    pub exceptions: Vec<ScanException>,
}

impl ScanReport {
    /// Exceptions other than the known `p = 5, n = 79` case.
    pub fn unpredicted_exceptions(&self) -> Vec<&ScanException> {
        self.exceptions
            .iter()
            .filter(|e| !(self.p == 5 && e.n == 79 && e.min_k == Some(5)))
            .collect()
    }
}

/// Largest minimal `k` the main theorem allows for `p`.
pub fn expected_bound(p: u64) -> u32 {
    match p {
        2 => 10,
        3 => 6,
        _ => 4,
    }
}

#[derive(Default)]
pub struct ScanOptions<'a> {
    pub jobs: Option<usize>,
    /// Receives the number of values finished, every `10^4` values.
    pub progress: Option<&'a (dyn Fn(u64) + Sync)>,
}

/// Minimal `k` and canonical witness for every `n` in `[lo, hi]`.
///
/// `on_row` sees rows in increasing `n` regardless of `jobs`.
pub fn sp_scan(
    p: u64,
    lo: u64,
    hi: u64,
    cap: u32,
    options: &ScanOptions<'_>,
    on_row: &mut dyn FnMut(&ScanRow),
) -> Result<ScanReport, RestrictedError> {
    check_prime(p)?;
    if lo > hi {
        return Err(RestrictedError::InvalidRange { lo, hi });
    }
    if lo == 0 || cap == 0 {
        return Err(RestrictedError::ZeroInput);
    }
    if hi > SCAN_CEILING {
        return Err(RestrictedError::CeilingExceeded {
            n: hi,
            ceiling: SCAN_CEILING,
        });
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = options.jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder
        .build()
        .expect("thread pool construction should not fail");
    scan_in_pool(&pool, p, lo, hi, cap, options, on_row)
}

fn scan_in_pool(
    pool: &rayon::ThreadPool,
    p: u64,
    lo: u64,
    hi: u64,
    cap: u32,
    options: &ScanOptions<'_>,
    on_row: &mut dyn FnMut(&ScanRow),
) -> Result<ScanReport, RestrictedError> {
    let mut tables = ExactCountTables::new(p, hi);
    // Build levels until every n in range is covered or the cap is reached.
    let mut covered = vec![false; (hi - lo + 1) as usize];
    while tables.depth() < cap {
        pool.install(|| tables.extend());
        let d = tables.depth();
        pool.install(|| {
            covered
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, c)| *c = *c || tables.contains(d, lo + i as u64))
        });
        if covered.iter().all(|&c| c) {
            break;
        }
    }
    drop(covered);

    let mut report = ScanReport {
        p,
        range: (lo, hi),
        cap,
        max_k: 0,
        histogram: BTreeMap::new(),
        none_up_to_cap: 0,
        exceptions: Vec::new(),
    };
    let bound = expected_bound(p);
    let done = AtomicU64::new(0);
    let chunks: Vec<(u64, u64)> = (lo..=hi)
        .step_by(SCAN_CHUNK as usize)
        .map(|s| (s, (s + SCAN_CHUNK - 1).min(hi)))
        .collect();
    let batch = pool.current_num_threads().max(1) * 4;
    for group in chunks.chunks(batch) {
        let rows: Vec<Vec<ScanRow>> = pool.install(|| {
            group
                .par_iter()
                .map(|&(a, b)| {
                    let rows = (a..=b)
                        .map(|n| {
                            let min_k = tables.min_k(n);
                            let parts =
                                min_k.and_then(|k| tables.witness(n, k)).unwrap_or_default();
                            ScanRow { n, min_k, parts }
                        })
                        .collect();
                    let total = done.fetch_add(b - a + 1, Ordering::Relaxed) + b - a + 1;
                    if let Some(cb) = options.progress {
                        cb(total);
                    }
                    rows
                })
                .collect()
        });
        for row in rows.iter().flatten() {
            match row.min_k {
                Some(k) => {
                    *report.histogram.entry(k).or_insert(0) += 1;
                    report.max_k = report.max_k.max(k);
                    if k > bound {
                        report.exceptions.push(ScanException {
                            n: row.n,
                            min_k: Some(k),
                        });
                    }
                }
                None => {
                    report.none_up_to_cap += 1;
                    report.exceptions.push(ScanException {
                        n: row.n,
                        min_k: None,
                    });
                }
            }
            on_row(row);
        }
    }
    Ok(report)
}

/// First `(u, v)` by increasing `u` with `u^2 + k v^2 = n` and `p ∤ uv`.
pub fn coprime_binary(n: u64, k: u64, p: u64) -> Option<(u64, u64)> {
    if k == 0 {
        return None;
    }
    (1..=isqrt(n)).filter(|u| u % p != 0).find_map(|u| {
        let rest = n - u * u;
        if rest == 0 || !rest.is_multiple_of(k) {
            return None;
        }
        let v2 = rest / k;
        let v = isqrt(v2);
        (v * v == v2 && !v.is_multiple_of(p)).then_some((u, v))
    })
}

/// A witness from [`constructive_k4`] together with how it was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructiveResult {
    pub witness: RestrictedWitness,
    pub route: &'static str,
    pub trace: Vec<String>,
}

/// Rep vectors examined per candidate shift before moving on.
const REPS_PER_SHIFT: usize = 512;

/// Witness with at most four parts, following the divisible/shift case split
/// where implemented and falling back to exhaustive search otherwise.
pub fn constructive_k4(n: u64, p: u64) -> Result<ConstructiveResult, RestrictedError> {
    check_prime(p)?;
    if p < 7 {
        return Err(RestrictedError::PrimeTooSmall(p));
    }
    if n == 0 {
        return Err(RestrictedError::ZeroInput);
    }
    if n > DEFAULT_REP_CEILING {
        return Err(RestrictedError::CeilingExceeded {
            n,
            ceiling: DEFAULT_REP_CEILING,
        });
    }
    let mut trace = Vec::new();
    // Squares prime to p scale witnesses, so work with n / q^2.
    let q: u64 = factorize(n)
        .map_err(|_| RestrictedError::ZeroInput)?
        .pairs()
        .iter()
        .filter(|&&(r, _)| r != p)
        .map(|&(r, e)| r.pow(e / 2))
        .product();
    if q > 1 {
        let inner = constructive_k4(n / (q * q), p)?;
        trace.push(format!("{n} = {q}^2 * {}", n / (q * q)));
        trace.extend(inner.trace);
        let parts = inner.witness.parts().iter().map(|x| x * q).collect();
        return Ok(ConstructiveResult {
            witness: RestrictedWitness::new(n, p, parts)?,
            route: inner.route,
            trace,
        });
    }
    let found = if n.is_multiple_of(p) {
        divisible_route(n, p, &mut trace)?
    } else if n % 3 == 1 {
        shift_route_nine(n, p, &mut trace)?
    } else {
        shift_route_three(n, p, &mut trace)?
    };
    if let Some((parts, route)) = found {
        let witness = RestrictedWitness::new(n, p, parts)?;
        return Ok(ConstructiveResult {
            witness,
            route,
            trace,
        });
    }
    trace.push("constructive routes exhausted; falling back to search".into());
    let witness = min_restricted_k(n, p, 4)?.ok_or_else(|| {
        RestrictedError::InvalidWitness(format!("no witness with at most 4 parts for {n}"))
    })?;
    Ok(ConstructiveResult {
        witness,
        route: "exhaustive",
        trace,
    })
}

/// Nonzero absolute values, or `None` if some nonzero entry is divisible by `p`
/// or nothing is left.
fn usable_parts(values: &[i128], p: u64) -> Option<Vec<u64>> {
    let p = p as i128;
    let mut out = Vec::new();
    for &v in values {
        if v == 0 {
            continue;
        }
        if v % p == 0 {
            return None;
        }
        out.push(v.unsigned_abs() as u64);
    }
    (!out.is_empty()).then_some(out)
}

fn all_prime_to(values: &[i128], p: u64) -> bool {
    values.iter().all(|&v| v != 0 && v % (p as i128) != 0)
}

type Found = Option<(Vec<u64>, &'static str)>;

fn divisible_route(n: u64, p: u64, trace: &mut Vec<String>) -> Result<Found, RestrictedError> {
    // n = x^2 + y^2 + a z^2 with a = a1^2 + a2^2.
    for (a, a1, a2) in [(1i64, 1i128, 0i128), (2, 1, 1), (5, 2, 1), (10, 3, 1)] {
        let f = QuadForm::diagonal(&[1, 1, a])?;
        let split = |x: &[i64]| -> [i128; 4] {
            let z = x[2] as i128;
            [x[0] as i128, x[1] as i128, a1 * z, a2 * z]
        };
        if let Some(x) = f.find_representation(n, |x| usable_parts(&split(x), p).is_some())? {
            let coeff = if a == 1 { String::new() } else { a.to_string() };
            trace.push(format!(
                "{n} = x^2 + y^2 + {coeff}z^2 at (x, y, z) = ({}, {}, {})",
                x[0], x[1], x[2]
            ));
            let parts = usable_parts(&split(&x), p).expect("predicate accepted");
            return Ok(Some((parts, "divisible-by-p")));
        }
    }
    if n.is_multiple_of(3) {
        let i3 = QuadForm::identity(3);
        let mut hit = None;
        let _ = i3.visit_exact(n / 3, &mut |x| {
            let (a, b, c) = (x[0] as i128, x[1] as i128, x[2] as i128);
            if !all_prime_to(&[a, b, c], p) {
                return ControlFlow::Continue(());
            }
            for q in identities::euler_triple_expansions(a, b, c) {
                if let Some(parts) = usable_parts(&q, p) {
                    hit = Some(((a, b, c), parts));
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        });
        if let Some(((a, b, c), parts)) = hit {
            trace.push(format!(
                "{n} = 3(a^2 + b^2 + c^2) at ({a}, {b}, {c}), four-square expansion"
            ));
            return Ok(Some((parts, "divisible-by-p")));
        }
    }
    trace.push("divisible case: no ternary route applied".into());
    Ok(None)
}

fn shift_ok(r: u64, shift: u64, p: u64, leg5: i8) -> bool {
    if !is_sum_three_squares(r) || shift.is_multiple_of(p) {
        return false;
    }
    let l = legendre((r % p) as i64, p).expect("odd prime");
    l != 0 && l != leg5
}

/// Tries a three-square representation of `r` directly, after reflection,
/// and after a 3-power descent.
fn finish_triple(
    r: u64,
    shift: u64,
    p: u64,
    scale: i128,
    trace: &mut Vec<String>,
) -> Result<Found, RestrictedError> {
    let i3 = QuadForm::identity(3);
    let mut seen = 0usize;
    let mut out: Found = None;
    let mut note = String::new();
    let target = r / (scale * scale) as u64;
    let _ = i3.visit_exact(target, &mut |x| {
        seen += 1;
        let t = [
            x[0] as i128 * scale,
            x[1] as i128 * scale,
            x[2] as i128 * scale,
        ];
        let with_shift = |v: [i128; 3]| [shift as i128, v[0], v[1], v[2]];
        if all_prime_to(&t, p) {
            out = Some((usable_parts(&with_shift(t), p).unwrap(), "shift-direct"));
            note = format!("{r} = a^2 + b^2 + c^2 at ({}, {}, {})", t[0], t[1], t[2]);
            return ControlFlow::Break(());
        }
        if let Some(refl) = reflect(r as i128, t) {
            if all_prime_to(&refl, p) {
                out = Some((
                    usable_parts(&with_shift(refl), p).unwrap(),
                    "shift-reflection",
                ));
                note = format!("reflected ({}, {}, {}) to {refl:?}", t[0], t[1], t[2]);
                return ControlFlow::Break(());
            }
        }
        if let Some(desc) = descend(r as i128, t, p) {
            out = Some((usable_parts(&with_shift(desc), p).unwrap(), "shift-descent"));
            note = format!(
                "3-power descent from ({}, {}, {}) to {desc:?}",
                t[0], t[1], t[2]
            );
            return ControlFlow::Break(());
        }
        if seen >= REPS_PER_SHIFT {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    if out.is_some() {
        trace.push(note);
    }
    Ok(out)
}

/// `(2m - a, 2m - b, 2m - c)` for the ordered signs with `a + b + c = 3m`.
fn reflect(r: i128, t: [i128; 3]) -> Option<[i128; 3]> {
    (t.iter().sum::<i128>().rem_euclid(3) == 0).then(|| {
        let adj = identities::SignAdjustment {
            a: t[0],
            b: t[1],
            c: t[2],
            m: t.iter().sum::<i128>() / 3,
        };
        let out = adj.reflected();
        debug_assert_eq!(out.iter().map(|v| v * v).sum::<i128>(), r);
        out
    })
}

/// With `c` the entry divisible by 3 and `a + b = 3^t b_t`, `c = 3^t c_t`,
/// rewrites the triple twice and reflects the results.
fn descend(r: i128, t: [i128; 3], p: u64) -> Option<[i128; 3]> {
    for ci in 0..3 {
        let c = t[ci];
        let rest: Vec<i128> = (0..3).filter(|&i| i != ci).map(|i| t[i]).collect();
        let (a, b) = (rest[0], rest[1]);
        if c % 3 != 0 || (a + b) % 3 != 0 {
            continue;
        }
        let mut s = 1i128;
        let mut e = 0u32;
        while (a + b) % (3 * s) == 0 && c % (3 * s) == 0 && e < 40 {
            s *= 3;
            e += 1;
            if a + b == 0 && c == 0 {
                break;
            }
        }
        if e == 0 {
            continue;
        }
        let Ok(out) = identities::descent_step(a, (a + b) / s, c / s, e) else {
            continue;
        };
        for tri in out.triples {
            if all_prime_to(&tri, p) {
                return Some(tri);
            }
            let mut hit = None;
            for signed in identities::sign_patterns(tri[0], tri[1], tri[2]) {
                if let Some(refl) = reflect(r, signed) {
                    if all_prime_to(&refl, p) {
                        hit = Some(refl);
                        break;
                    }
                }
            }
            if hit.is_some() {
                return hit;
            }
        }
    }
    None
}

fn shift_route_three(n: u64, p: u64, trace: &mut Vec<String>) -> Result<Found, RestrictedError> {
    let s0 = match (n % 4 == 3, n.is_multiple_of(3), n % 4 == 1) {
        (false, false, _) => 0,
        (_, true, false) => 1,
        (_, true, true) => 2,
        (true, false, _) => 3,
    };
    let leg5 = legendre(5, p).expect("odd prime");
    let mut k = 0u64;
    loop {
        let shift = 6 * k + s0;
        if shift * shift >= n {
            break;
        }
        let r = n - shift * shift;
        if shift_ok(r, shift, p, leg5) {
            if let Some(adj) = first_triple(r)
                .and_then(|t| sign_adjust_three(r as i128, t[0], t[1], t[2], None).ok())
            {
                trace.push(format!(
                    "s0 = {s0}, k = {k}: {r} = n - {shift}^2, signs ({}, {}, {}), m = {}",
                    adj.a, adj.b, adj.c, adj.m
                ));
            }
            if let Some(found) = finish_triple(r, shift, p, 1, trace)? {
                return Ok(Some(found));
            }
        }
        k += 1;
    }
    trace.push(format!("no shift 6k + {s0} met the conditions"));
    Ok(None)
}

fn shift_route_nine(n: u64, p: u64, trace: &mut Vec<String>) -> Result<Found, RestrictedError> {
    let leg5 = legendre(5, p).expect("odd prime");
    for s0 in [1u64, 2, 4, 5, 7, 8] {
        let mut k = 0u64;
        loop {
            let shift = 18 * k + s0;
            if shift * shift >= n {
                break;
            }
            let r = n - shift * shift;
            if r.is_multiple_of(9) && shift_ok(r, shift, p, leg5) {
                trace.push(format!(
                    "s0 = {s0}, k = {k}: {r} = n - {shift}^2 = 9 * {}",
                    r / 9
                ));
                if let Some(found) = finish_triple(r, shift, p, 3, trace)? {
                    return Ok(Some(found));
                }
            }
            k += 1;
        }
    }
    trace.push("no shift 18k + s0 met the conditions".into());
    Ok(None)
}

fn first_triple(r: u64) -> Option<[i128; 3]> {
    QuadForm::identity(3)
        .find_representation(r, |_| true)
        .ok()
        .flatten()
        .map(|x| [x[0] as i128, x[1] as i128, x[2] as i128])
}

/// Whether the parts of `w` are consistent with the congruences forced by `p`.
pub fn congruence_consistent(w: &RestrictedWitness) -> bool {
    let k = w.k() as u64;
    match w.p() {
        2 => w.n() % 8 == k % 8,
        3 => w.n() % 3 == k % 3,
        _ => true,
    }
}

/// Convenience for tests and the CLI: `n` is a square prime to `p`.
pub fn is_allowed_square(n: u64, p: u64) -> bool {
    is_square(n) && !isqrt(n).is_multiple_of(p)
}
