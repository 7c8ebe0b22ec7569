//! Named verification suites for the `verify` subcommand.

use clap::ValueEnum;
use num_bigint::BigInt;
use serde::Serialize;

use coprime_squares::arith::is_prime;
use coprime_squares::identities::{
    catalog, corrupted_record, descent_step, ramatec_lift, three_primitive_binary, verify_identity,
    xy_for_power, PrimitiveRebase,
};
use coprime_squares::localdensity::{alpha_p, check_class1_growth, genus_ratio};
use coprime_squares::modforms::{
    hecke_check, ramanujan_eta_product, ramanujan_growth_check, small_coefficient, theta_diff_phi,
};
use coprime_squares::quadform::{mass_weighted_count, ramanujan_form, ramanujan_partner};
use coprime_squares::restricted::{sp_scan, ScanOptions};
use coprime_squares::{GenusRegistry, QuadForm, Rational};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identities,
    Series,
    Density,
    Forms,
    Scan,
    All,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub pass: bool,
}

struct Collector {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Collector {
    fn add(&mut self, name: impl Into<String>, pass: bool) {
        self.checks.push(Check {
            suite: self.suite,
            name: name.into(),
            pass,
        });
    }
}

pub fn run(suite: Suite, jobs: Option<usize>) -> Vec<Check> {
    let all = [
        Suite::Identities,
        Suite::Series,
        Suite::Density,
        Suite::Forms,
        Suite::Scan,
    ];
    let selected: Vec<Suite> = if suite == Suite::All {
        all.to_vec()
    } else {
        vec![suite]
    };
    let mut checks = Vec::new();
    for s in selected {
        let (name, body): (&'static str, fn(&mut Collector, Option<usize>)) = match s {
            Suite::Identities => ("identities", identities),
            Suite::Series => ("series", series),
            Suite::Density => ("density", density),
            Suite::Forms => ("forms", forms),
            Suite::Scan => ("scan", scan),
            Suite::All => unreachable!("expanded above"),
        };
        let mut c = Collector {
            suite: name,
            checks: Vec::new(),
        };
        body(&mut c, jobs);
        checks.extend(c.checks);
    }
    checks
}

fn identities(c: &mut Collector, _: Option<usize>) {
    for r in catalog() {
        c.add(r.name, verify_identity(&r) == Ok(true));
    }
    let bad = corrupted_record();
    c.add(
        format!("{} (negative control)", bad.name),
        verify_identity(&bad) == Ok(false),
    );
    let xy = [(1, (1, 2)), (2, (7, 4)), (3, (23, 10))];
    c.add(
        "x_t, y_t for t = 1, 2, 3",
        xy.iter().all(|&(t, v)| xy_for_power(t) == Ok(v)),
    );
    c.add(
        "descent at (1, 1, 1), t = 1",
        descent_step(1, 1, 1, 1).is_ok_and(|o| o.n == 14),
    );
    c.add(
        "lift of (1, 1, -1)",
        ramatec_lift(1, 1, -1).is_ok_and(|l| l.xyz == [2, -1, 0]),
    );
    c.add(
        "3-primitive rebase of (3, 0)",
        three_primitive_binary(3, 0) == Ok(PrimitiveRebase::Found { d: 1, e: 2 }),
    );
}

fn series(c: &mut Collector, _: Option<usize>) {
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
    let eta = ramanujan_eta_product(500);
    c.add(
        "eta product through q^23",
        eta.as_ref().is_ok_and(|s| {
            (0..=23).all(|n| {
                let want = displayed.iter().find(|d| d.0 == n).map_or(0, |d| d.1);
                small_coefficient(s, n) == want
            })
        }),
    );
    c.add(
        "phi through q^13",
        theta_diff_phi(13).is_ok_and(|s| s.to_string().starts_with("q - q^3 - q^7 - q^9 + 2q^13")),
    );
    let Ok(eta) = eta else {
        c.add("eta product available", false);
        return;
    };
    let n_max = 20;
    let phi = theta_diff_phi(n_max * 13 * 13);
    for p in [3u64, 7, 11, 13] {
        let eigen = small_coefficient(&eta, p);
        let ok = phi
            .as_ref()
            .ok()
            .and_then(|phi| hecke_check(phi, p, eigen, n_max).ok())
            .is_some_and(|r| r.all_hold);
        c.add(format!("Hecke relation p = {p}, n <= {n_max}"), ok);
    }
    let deligne = (2..=500u64)
        .filter(|&p| is_prime(p) && 10 % p != 0)
        .all(|p| {
            let a = eta.coefficient(p);
            a * a <= BigInt::from(4 * p)
        });
    c.add("Deligne bound p <= 500", deligne);
    for p in [7u64, 11, 13] {
        let n = 5000 / (p * p);
        c.add(
            format!("<1,1,10> growth p = {p}, n <= {n}"),
            ramanujan_growth_check(p, n).is_ok_and(|v| v.is_empty()),
        );
    }
}

fn density(c: &mut Collector, _: Option<usize>) {
    let rat = |n: i64, d: i64| Rational::new(n.into(), d.into());
    let i3 = QuadForm::identity(3);
    c.add("alpha_5(1, I3) = 6/5", alpha_p(1, &i3, 5) == Ok(rat(6, 5)));
    c.add("alpha_7(1, I3) = 6/7", alpha_p(1, &i3, 7) == Ok(rat(6, 7)));
    c.add(
        "alpha_5(5, I3) = 24/25",
        alpha_p(5, &i3, 5) == Ok(rat(24, 25)),
    );
    c.add("ratio (1, 5, 1) = 5", genus_ratio(1, 5, 1) == Ok(rat(5, 1)));
    c.add("ratio (2, 5, 1) = 7", genus_ratio(2, 5, 1) == Ok(rat(7, 1)));
    c.add("ratio (3, 7, 1) = 7", genus_ratio(3, 7, 1) == Ok(rat(7, 1)));
    c.add(
        "class-one growth (I3, 1, 5)",
        check_class1_growth(&i3, 1, 5) == Ok(true),
    );
    let ok = GenusRegistry::standard()
        .entry("gen<1,1,10>")
        .is_some_and(|gen| {
            [3u64, 7].iter().all(|&p| {
                (1..=1000 / (p * p)).all(|n| {
                    let base = mass_weighted_count(gen, n).expect("within ceiling");
                    let lifted = mass_weighted_count(gen, p * p * n).expect("within ceiling");
                    base == Rational::from_integer(0.into())
                        || lifted / base == genus_ratio(n, p, 10).expect("p prime to 20")
                })
            })
        });
    c.add("genus ratio matches gen<1,1,10> for p = 3, 7", ok);
}

fn forms(c: &mut Collector, _: Option<usize>) {
    c.add("registry isometry orders", GenusRegistry::build().is_ok());
    let i3 = QuadForm::identity(3);
    for (n, want) in [(2u64, 12u64), (25, 30), (50, 84)] {
        c.add(format!("r({n}, I3) = {want}"), i3.rep_count(n) == Ok(want));
    }
    let orders = [
        (QuadForm::identity(3), 48u64),
        (QuadForm::diagonal(&[1, 1, 5]).expect("definite"), 16),
        (ramanujan_form(), 16),
        (ramanujan_partner(), 8),
    ];
    for (f, want) in orders {
        c.add(
            format!("o({f}) = {want}"),
            f.automorphisms().is_ok_and(|a| a.order() == want),
        );
    }
    let bound = 500u64;
    let r = ramanujan_form().theta_series(bound);
    let r2 = ramanujan_partner().theta_series(bound);
    let gen = GenusRegistry::standard().entry("gen<1,1,10>");
    let ok = match (r, r2, gen) {
        (Ok(r), Ok(r2), Some(gen)) => (1..=bound).all(|n| {
            let lhs = mass_weighted_count(gen, n).expect("within ceiling")
                * Rational::from_integer(3.into());
            lhs == Rational::from_integer((r[n as usize] + 2 * r2[n as usize]).into())
        }),
        _ => false,
    };
    c.add(
        format!("3 r(n, gen) = r(n, f) + 2 r(n, f') for n <= {bound}"),
        ok,
    );
}

fn scan(c: &mut Collector, jobs: Option<usize>) {
    let hi = 10_000u64;
    for (p, cap, max_k) in [
        (2u64, 12u32, 10u32),
        (3, 8, 6),
        (5, 8, 5),
        (7, 8, 4),
        (11, 8, 4),
        (13, 8, 4),
    ] {
        let options = ScanOptions {
            jobs,
            progress: None,
        };
        let ok = sp_scan(p, 1, hi, cap, &options, &mut |_| {}).is_ok_and(|r| {
            r.max_k == max_k
                && r.unpredicted_exceptions().is_empty()
                && (p != 5 || r.exceptions.len() == 1)
        });
        c.add(format!("S({p}) scan to {hi}"), ok);
    }
}
