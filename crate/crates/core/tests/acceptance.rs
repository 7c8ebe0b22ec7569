//! Acceptance criteria. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coprime_squares::arith::{is_prime, is_sum_three_squares, is_sum_two_squares, ord};
use coprime_squares::identities::{
    catalog, corrupted_record, descent_step, euler_triple_expansions, five_z_split, partner_value,
    ramatec_lift, sign_adjust_three, sign_patterns, three_primitive_binary, verify_identity,
    xy_for_power, IdentityError, PrimitiveRebase,
};
use coprime_squares::localdensity::{alpha_p, genus_ratio};
use coprime_squares::modforms::{
    eta_product, hecke_check, ramanujan_eta_product, ramanujan_growth_check, small_coefficient,
    theta_diff_phi,
};
use coprime_squares::quadform::{mass_weighted_count, ramanujan_form, ramanujan_partner};
use coprime_squares::restricted::{sp_scan, ScanOptions, ScanReport, ScanRow};
use coprime_squares::{GenusRegistry, QuadForm, Rational};

/// Upper end of every scan range.
const SCAN_HI: u64 = 100_000;
/// Bound on `p^2 n` for representation-count checks.
const LIFT_BOUND: u64 = 20_000;
/// Number of randomized transform evaluations.
const TRANSFORM_TRIALS: usize = 10_000;
/// Box half-width for the brute-force isometry oracle.
const ISOMETRY_BOX: i64 = 4;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scan(p: u64, cap: u32) -> (ScanReport, Vec<ScanRow>) {
    let mut rows = Vec::with_capacity(SCAN_HI as usize);
    let report = sp_scan(p, 1, SCAN_HI, cap, &ScanOptions::default(), &mut |r| {
        rows.push(r.clone())
    })
    .expect("scan runs");
    (report, rows)
}

fn witness_rows_valid(p: u64, rows: &[ScanRow]) -> Result<(), String> {
    for row in rows {
        let sum: u64 = row.parts.iter().map(|x| x * x).sum();
        check(sum == row.n, || format!("n={} parts sum to {sum}", row.n))?;
        check(row.parts.iter().all(|x| x % p != 0), || {
            format!("n={} has a part divisible by {p}", row.n)
        })?;
    }
    Ok(())
}

fn c1_s5() -> Outcome {
    let (report, rows) = scan(5, 8);
    witness_rows_valid(5, &rows)?;
    let exceptions: Vec<_> = report.exceptions.iter().map(|e| (e.n, e.min_k)).collect();
    check(exceptions == vec![(79, Some(5))], || {
        format!("exceptions {exceptions:?}")
    })?;
    check(report.max_k == 5, || format!("max_k {}", report.max_k))?;
    Ok(format!(
        "exceptions {exceptions:?}, histogram {:?}",
        report.histogram
    ))
}

fn c2_s2() -> Outcome {
    let (report, rows) = scan(2, 12);
    witness_rows_valid(2, &rows)?;
    check(report.none_up_to_cap == 0, || {
        "values without a witness".into()
    })?;
    check(report.max_k == 10, || format!("max_k {}", report.max_k))?;
    let tens: Vec<u64> = rows
        .iter()
        .filter(|r| r.min_k == Some(10))
        .map(|r| r.n)
        .collect();
    for &n in &tens {
        check(n % 8 == 2 && !is_sum_two_squares(n), || {
            format!("{n} needs 10 parts but is not 2 mod 8 outside the two-square set")
        })?;
    }
    Ok(format!("max_k 10 at {} values", tens.len()))
}

fn c3_s3() -> Outcome {
    let (report, rows) = scan(3, 8);
    witness_rows_valid(3, &rows)?;
    check(report.none_up_to_cap == 0, || {
        "values without a witness".into()
    })?;
    check(report.max_k == 6, || format!("max_k {}", report.max_k))?;
    let sixes: Vec<u64> = rows
        .iter()
        .filter(|r| r.min_k == Some(6))
        .map(|r| r.n)
        .collect();
    for &n in &sixes {
        check(n % 3 == 0 && !is_sum_three_squares(n), || {
            format!("{n} needs 6 parts but is a three-square sum or prime to 3")
        })?;
    }
    Ok(format!("max_k 6 at {} values", sixes.len()))
}

fn c4_s_large() -> Outcome {
    let mut notes = Vec::new();
    for p in [7u64, 11, 13, 17] {
        let (report, rows) = scan(p, 8);
        witness_rows_valid(p, &rows)?;
        check(report.exceptions.is_empty(), || {
            format!("p={p}: exceptions {:?}", report.exceptions)
        })?;
        check(report.max_k == 4, || {
            format!("p={p}: max_k {}", report.max_k)
        })?;
        for row in rows.iter().filter(|r| r.n % 8 == 7) {
            check(row.min_k == Some(4), || {
                format!("p={p}: {} = 7 mod 8 has min_k {:?}", row.n, row.min_k)
            })?;
        }
        notes.push(format!("p={p}: {} at k=4", report.histogram[&4]));
    }
    Ok(notes.join(", "))
}

fn c5_class_one_ratio() -> Outcome {
    let mut checked = 0usize;
    for (diag, df) in [([1u64, 1, 1], 1u64), ([1, 1, 5], 5), ([1, 1, 2], 2)] {
        let f = QuadForm::diagonal(&diag.map(|d| d as i64)).expect("definite");
        let theta = f.theta_series(LIFT_BOUND).expect("within ceiling");
        check(theta == common::diagonal_theta(diag, LIFT_BOUND), || {
            format!("{f}: theta series disagrees with the box loop")
        })?;
        for p in [5u64, 7, 11, 13].into_iter().filter(|p| (2 * df) % p != 0) {
            for n in 1..=LIFT_BOUND / (p * p) {
                let base = theta[n as usize];
                if base == 0 {
                    continue;
                }
                let lifted = theta[(p * p * n) as usize];
                let observed = Rational::new(BigInt::from(lifted), BigInt::from(base));
                let expected = genus_ratio(n, p, df).expect("p prime to 2df");
                check(observed == expected, || {
                    format!("{f} p={p} n={n}: {observed} vs {expected}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} ratios exact"))
}

fn c6_local_density() -> Outcome {
    let mut checked = 0usize;
    for diag in [[1u64, 1, 1], [1, 1, 5]] {
        let f = QuadForm::diagonal(&diag.map(|d| d as i64)).expect("definite");
        let df = f.discriminant();
        for p in [5u64, 7]
            .into_iter()
            .filter(|p| !(2 * df).is_multiple_of(*p))
        {
            for n in 1..=200u64 {
                let depth = ord(n, p) + 2;
                let oracle = common::diagonal_density(diag, n, p, depth);
                let formula = alpha_p(n, &f, p).expect("valid input");
                check(oracle == formula, || {
                    format!("{f} p={p} n={n}: counting {oracle} vs formula {formula}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} densities exact"))
}

fn c7_series() -> Outcome {
    let eta = eta_product(&[(2, 2), (10, 2)], 23).map_err(|e| e.to_string())?;
    let displayed: [(u64, i64); 11] = [
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
    ];
    for n in 0..=23u64 {
        let expected = displayed.iter().find(|(m, _)| *m == n).map_or(0, |x| x.1);
        check(small_coefficient(&eta, n) == expected, || {
            format!("eta coefficient {n}: {}", eta.coefficient(n))
        })?;
    }
    let phi = theta_diff_phi(13).map_err(|e| e.to_string())?;
    let shown = phi.to_string();
    check(shown.starts_with("q - q^3 - q^7 - q^9 + 2q^13"), || {
        format!("phi = {shown}")
    })?;
    Ok(shown)
}

fn c8_hecke() -> Outcome {
    let big = ramanujan_eta_product(13).map_err(|e| e.to_string())?;
    let n_max = 50u64;
    let phi = theta_diff_phi(n_max * 13 * 13).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for p in [3u64, 7, 11, 13] {
        let eigen = small_coefficient(&big, p);
        let report = hecke_check(&phi, p, eigen, n_max).map_err(|e| e.to_string())?;
        check(report.all_hold, || {
            format!("p={p}: failures at {:?}", report.failures)
        })?;
        notes.push(format!("A({p})={eigen}"));
    }
    Ok(notes.join(" "))
}

fn c9_deligne() -> Outcome {
    let big = ramanujan_eta_product(500).map_err(|e| e.to_string())?;
    let mut count = 0;
    for p in (2..=500u64).filter(|&p| is_prime(p) && 10 % p != 0) {
        let a = big.coefficient(p);
        check(a * a <= BigInt::from(4 * p), || format!("A({p}) = {a}"))?;
        count += 1;
    }
    Ok(format!("{count} primes"))
}

fn c10_growth() -> Outcome {
    let mut notes = Vec::new();
    for p in [7u64, 11, 13] {
        let n_max = LIFT_BOUND / (p * p);
        let violations = ramanujan_growth_check(p, n_max).map_err(|e| e.to_string())?;
        check(violations.is_empty(), || format!("p={p}: {violations:?}"))?;
        notes.push(format!("p={p} N={n_max}"));
    }
    Ok(notes.join(", "))
}

fn c11_ramanujan_five_mod_six() -> Outcome {
    let f = ramanujan_form();
    let mut count = 0;
    for n in (5..=SCAN_HI).step_by(6) {
        check(f.is_represented(n).expect("within ceiling"), || {
            format!("{n} is not represented")
        })?;
        count += 1;
    }
    Ok(format!("{count} values represented"))
}

fn c12_identities() -> Outcome {
    let cat = catalog();
    for r in &cat {
        check(verify_identity(r) == Ok(true), || {
            format!("{} fails", r.name)
        })?;
    }
    check(verify_identity(&corrupted_record()) == Ok(false), || {
        "negative control verified".into()
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let small_primes = [7u64, 11, 13, 17, 19, 23];
    for trial in 0..TRANSFORM_TRIALS {
        match trial % 5 {
            0 => {
                let (a, b, c) = (
                    rng.gen_range(-10_000i128..=10_000),
                    rng.gen_range(-10_000i128..=10_000),
                    rng.gen_range(-10_000i128..=10_000),
                );
                let n = a * a + b * b + c * c;
                let p = small_primes[rng.gen_range(0..small_primes.len())];
                let ok = |t: &[i128; 3]| {
                    let p = p as i128;
                    t.iter().sum::<i128>().rem_euclid(3) == 0
                        && (t[0] - 2 * t[1]).rem_euclid(p) != 0
                        && (2 * t[0] - t[1]).rem_euclid(p) != 0
                        && (t[0] + t[1]).rem_euclid(p) != 0
                };
                match sign_adjust_three(n, a, b, c, Some(p)) {
                    Ok(adj) => {
                        let t = [adj.a, adj.b, adj.c];
                        let r = adj.reflected();
                        check(ok(&t) && 3 * adj.m == t.iter().sum::<i128>(), || {
                            format!("sign adjust {t:?}")
                        })?;
                        check(r.iter().map(|x| x * x).sum::<i128>() == n, || {
                            format!("reflection of {t:?}")
                        })?;
                    }
                    Err(IdentityError::NoAdjustment) => {
                        check(!sign_patterns(a, b, c).any(|t| ok(&t)), || {
                            format!("missed adjustment for {:?}", (a, b, c))
                        })?;
                    }
                    Err(e) => return Err(e.to_string()),
                }
            }
            1 => {
                let (a, b, c) = (
                    rng.gen_range(-1000i128..=1000),
                    rng.gen_range(-1000i128..=1000),
                    rng.gen_range(-1000i128..=1000),
                );
                let t = rng.gen_range(1u32..=6);
                let s = 3i128.pow(t);
                let n = a * a + (s * b - a).pow(2) + (s * c).pow(2);
                let out = descent_step(a, b, c, t).map_err(|e| e.to_string())?;
                let (x, y) = xy_for_power(t).map_err(|e| e.to_string())?;
                check(x * x + 2 * y * y == s * s && (x * y) % 3 != 0, || {
                    format!("x_{t}, y_{t} = {x}, {y}")
                })?;
                for tri in out.triples {
                    check(tri.iter().map(|v| v * v).sum::<i128>() == n, || {
                        format!("descent {tri:?} != {n}")
                    })?;
                }
            }
            2 => {
                let (a, b, c) = (
                    rng.gen_range(-1000i128..=1000),
                    rng.gen_range(-1000i128..=1000),
                    rng.gen_range(-1000i128..=1000),
                );
                let n = 2 * a * a + 2 * b * b + 2 * b * c + 3 * c * c;
                let lift = ramatec_lift(a, b, c).map_err(|e| e.to_string())?;
                let [x, y, z] = lift.xyz;
                check(x * x + y * y + 10 * z * z == n, || {
                    format!("lift of {:?} gave {:?}", (a, b, c), lift.xyz)
                })?;
            }
            3 => {
                let scale = if rng.gen_bool(0.5) { 3 } else { 1 };
                let (b, c) = (
                    scale * rng.gen_range(-60i128..=60),
                    scale * rng.gen_range(-60i128..=60),
                );
                if b == 0 && c == 0 {
                    continue;
                }
                match three_primitive_binary(b, c).map_err(|e| e.to_string())? {
                    PrimitiveRebase::AlreadyPrimitive => check(b % 3 != 0 || c % 3 != 0, || {
                        format!("{b},{c} not primitive")
                    })?,
                    PrimitiveRebase::Found { d, e } => check(
                        partner_value(0, d, e) == partner_value(0, b, c)
                            && (d % 3 != 0 || e % 3 != 0),
                        || format!("rebase {b},{c} -> {d},{e}"),
                    )?,
                }
            }
            _ => {
                let (a, b, c) = (
                    rng.gen_range(-10_000i128..=10_000),
                    rng.gen_range(-10_000i128..=10_000),
                    rng.gen_range(-10_000i128..=10_000),
                );
                let n3 = 3 * (a * a + b * b + c * c);
                for q in euler_triple_expansions(a, b, c) {
                    check(q.iter().map(|v| v * v).sum::<i128>() == n3, || {
                        format!("expansion {q:?}")
                    })?;
                }
                let p = [13u64, 17][rng.gen_range(0..2)];
                let (cc, dd) = (a.rem_euclid(p as i128), b.rem_euclid(p as i128));
                if cc != 0 && dd != 0 {
                    let [u, v] = five_z_split(cc, dd, p).ok_or("no coprime split")?;
                    check(
                        u * u + v * v == 5 * (cc * cc + dd * dd) && (u * v) % p as i128 != 0,
                        || format!("split {cc},{dd}"),
                    )?;
                }
            }
        }
    }
    Ok(format!(
        "{} records verified, {TRANSFORM_TRIALS} transform evaluations",
        cat.len()
    ))
}

fn c13_isometries() -> Outcome {
    let cases: [(&str, QuadForm, [[i64; 3]; 3], u64); 4] = [
        (
            "I3",
            QuadForm::identity(3),
            [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
            48,
        ),
        (
            "<1,1,5>",
            QuadForm::diagonal(&[1, 1, 5]).expect("definite"),
            [[1, 0, 0], [0, 1, 0], [0, 0, 5]],
            16,
        ),
        (
            "<1,1,10>",
            ramanujan_form(),
            [[1, 0, 0], [0, 1, 0], [0, 0, 10]],
            16,
        ),
        (
            "<2>+[[2,1],[1,3]]",
            ramanujan_partner(),
            [[2, 0, 0], [0, 2, 1], [0, 1, 3]],
            8,
        ),
    ];
    let mut notes = Vec::new();
    for (name, f, gram, pinned) in cases {
        let oracle = common::brute_isometry_count(gram, ISOMETRY_BOX);
        let computed = f.automorphisms().map_err(|e| e.to_string())?.order();
        check(oracle == pinned && computed == pinned, || {
            format!("{name}: oracle {oracle}, library {computed}, pinned {pinned}")
        })?;
        notes.push(format!("{name}={computed}"));
    }
    let gen = GenusRegistry::standard()
        .entry("gen<1,1,10>")
        .ok_or("genus missing")?;
    let r = ramanujan_form()
        .theta_series(2000)
        .map_err(|e| e.to_string())?;
    let r2 = ramanujan_partner()
        .theta_series(2000)
        .map_err(|e| e.to_string())?;
    for n in 1..=2000u64 {
        let lhs = mass_weighted_count(gen, n).map_err(|e| e.to_string())?
            * Rational::from(BigInt::from(3));
        let rhs = Rational::from(BigInt::from(r[n as usize] + 2 * r2[n as usize]));
        check(lhs == rhs, || format!("genus identity fails at {n}"))?;
    }
    Ok(notes.join(" "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 13] = [
        ("S(5): only 79 needs 5 parts up to 1e5", c1_s5),
        ("S(2) = 10 up to 1e5", c2_s2),
        ("S(3) = 6 up to 1e5", c3_s3),
        ("S(p) = 4 for p in 7, 11, 13, 17 up to 1e5", c4_s_large),
        ("class-number-one growth ratio", c5_class_one_ratio),
        ("local density vs congruence counting", c6_local_density),
        ("eta product and theta difference coefficients", c7_series),
        ("Hecke relation for p in 3, 7, 11, 13", c8_hecke),
        ("Deligne bound for p <= 500", c9_deligne),
        ("<1,1,10> growth for p in 7, 11, 13", c10_growth),
        (
            "n = 5 mod 6 represented by <1,1,10>",
            c11_ramanujan_five_mod_six,
        ),
        ("identity catalog and transforms", c12_identities),
        ("isometry orders and genus identity", c13_isometries),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.1}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1}s]: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
