use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::Value;

use coprime_squares::arith::{format_rational, is_prime};
use coprime_squares::localdensity::{alpha_p, genus_ratio};
use coprime_squares::modforms::{ramanujan_eta_product, theta_diff_phi, QSeries};
use coprime_squares::restricted::{
    constructive_k4, expected_bound, min_restricted_k, restricted_decompose, sp_scan, ScanOptions,
    ScanReport, DEFAULT_CAP, SCAN_CHUNK, SCAN_TSV_HEADER,
};
use coprime_squares::QuadForm;

mod suites;

#[derive(Parser)]
#[command(
    name = "coprime-squares",
    version,
    about = "Sums of squares prime to p, representation counts and q-series checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose n into squares prime to p and print a certificate.
    Decompose(DecomposeArgs),
    /// Minimal restricted k for every n in a range.
    Scan(ScanArgs),
    /// Representation count r(n, f).
    Count(CountArgs),
    /// Local density and genus growth ratio of a ternary form.
    Density(DensityArgs),
    /// q-expansion of eta, phi or a theta series.
    Series(SeriesArgs),
    /// Isometry group order of a form.
    Aut(AutArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Tsv,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    p: u64,
    /// Exact number of parts; without it the smallest k up to --cap is used.
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u32,
    /// Use the case-by-case construction (p >= 7, at most four parts).
    #[arg(long, conflicts_with = "k")]
    constructive: bool,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    from: u64,
    #[arg(long)]
    to: u64,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u32,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct CountArgs {
    /// Diagonal entries such as 1,1,10 or a Gram matrix such as [[2,1],[1,3]].
    #[arg(long)]
    form: String,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    form: String,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct SeriesArgs {
    /// `eta`, `phi`, or a quadratic form for its theta series.
    #[arg(long)]
    form: String,
    #[arg(long, default_value_t = 20)]
    prec: u64,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct AutArgs {
    #[arg(long)]
    form: String,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = suites::Suite::All)]
    suite: suites::Suite,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    #[arg(long)]
    format: Option<Format>,
}

/// Why a command did not succeed; maps onto the exit status.
enum Failure {
    Usage(String),
    Verification(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn pick(format: Option<Format>, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
    let f = format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        let name = f.to_possible_value().expect("no skipped variants");
        Err(usage(format!(
            "--format {} is not available for this command",
            name.get_name()
        )))
    }
}

fn parse_form(s: &str) -> Result<QuadForm, Failure> {
    s.parse::<QuadForm>()
        .map_err(|e| usage(format!("--form {s}: {e}")))
}

fn json_line(out: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string(value).map_err(|e| Failure::Io(e.into()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli.command, &mut out);
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(()), Ok(())) => ExitCode::SUCCESS,
        (Err(Failure::Verification(msg)), _) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        (Err(Failure::Usage(msg)), _) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        (Err(Failure::Io(e)), _) | (Ok(()), Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Decompose(a) => decompose(a, out),
        Command::Scan(a) => scan(a, out),
        Command::Count(a) => count(a, out),
        Command::Density(a) => density(a, out),
        Command::Series(a) => series(a, out),
        Command::Aut(a) => aut(a, out),
        Command::Verify(a) => verify(a, out),
    }
}

#[derive(Serialize)]
struct CountRecord {
    form: String,
    n: u64,
    count: u64,
}

#[derive(Serialize)]
struct DensityRecord {
    form: String,
    n: u64,
    p: u64,
    alpha: String,
    genus_ratio: String,
}

#[derive(Serialize)]
struct SeriesRecord {
    form: String,
    precision: u64,
    coefficients: Vec<Value>,
}

#[derive(Serialize)]
struct AutRecord<'a> {
    form: String,
    order: u64,
    matrices: Vec<&'a Vec<Vec<i64>>>,
}

#[derive(Serialize)]
struct NoWitness {
    n: u64,
    p: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap: Option<u32>,
    result: &'static str,
    route: &'static str,
}

/// Largest minimal k the theorem allows, counting the known 79 case for p = 5.
fn hard_bound(p: u64) -> u32 {
    if p == 5 {
        5
    } else {
        expected_bound(p)
    }
}

fn decompose(a: DecomposeArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let format = pick(a.format, Format::Json, &[Format::Json, Format::Text])?;
    if !is_prime(a.p) {
        return Err(usage(format!("--p {} is not prime", a.p)));
    }
    let (witness, route, trace) = if a.constructive {
        let r = constructive_k4(a.n, a.p).map_err(usage)?;
        (Some(r.witness), r.route, r.trace)
    } else if let Some(k) = a.k {
        let w = restricted_decompose(a.n, a.p, k).map_err(usage)?;
        (w, "exhaustive", Vec::new())
    } else {
        let w = min_restricted_k(a.n, a.p, a.cap).map_err(usage)?;
        (w, "exhaustive", Vec::new())
    };
    match witness {
        Some(w) => {
            let cert = w.certificate(route);
            match format {
                Format::Json => json_line(out, &cert)?,
                _ => {
                    writeln!(out, "{w}")?;
                    writeln!(out, "k = {}, p = {}, route = {route}", cert.k, cert.p)?;
                    for step in trace {
                        writeln!(out, "  {step}")?;
                    }
                }
            }
            if !cert.verified {
                return Err(Failure::Verification(format!(
                    "certificate for {} failed",
                    a.n
                )));
            }
            Ok(())
        }
        None => {
            let record = NoWitness {
                n: a.n,
                p: a.p,
                k: a.k,
                cap: a.k.is_none().then_some(a.cap),
                result: if a.k.is_some() {
                    "not-possible"
                } else {
                    "none-up-to-cap"
                },
                route: "exhaustive",
            };
            match format {
                Format::Json => json_line(out, &record)?,
                _ => match a.k {
                    Some(k) => {
                        writeln!(out, "{} is not a sum of {k} squares prime to {}", a.n, a.p)?
                    }
                    None => writeln!(
                        out,
                        "{} is not a sum of at most {} squares prime to {}",
                        a.n, a.cap, a.p
                    )?,
                },
            }
            if a.k.is_none() && a.cap >= hard_bound(a.p) {
                return Err(Failure::Verification(format!(
                    "{} needs more than {} parts",
                    a.n, a.cap
                )));
            }
            Ok(())
        }
    }
}

/// Exceptions that contradict the theorem, given the cap used.
fn counterexamples(report: &ScanReport) -> Vec<String> {
    report
        .unpredicted_exceptions()
        .into_iter()
        .filter(|e| e.min_k.is_some() || report.cap >= hard_bound(report.p))
        .map(|e| match e.min_k {
            Some(k) => format!("n={} min_k={k}", e.n),
            None => format!("n={} none up to {}", e.n, report.cap),
        })
        .collect()
}

fn write_scan_summary(out: &mut dyn Write, report: &ScanReport) -> io::Result<()> {
    writeln!(
        out,
        "p = {}, range = [{}, {}], cap = {}, max_k = {}",
        report.p, report.range.0, report.range.1, report.cap, report.max_k
    )?;
    for (k, count) in &report.histogram {
        writeln!(out, "k = {k}: {count}")?;
    }
    if report.none_up_to_cap > 0 {
        writeln!(out, "none up to cap: {}", report.none_up_to_cap)?;
    }
    let exc: Vec<String> = report
        .exceptions
        .iter()
        .map(|e| match e.min_k {
            Some(k) => format!("({}, {k})", e.n),
            None => format!("({}, NONE)", e.n),
        })
        .collect();
    writeln!(out, "exceptions: [{}]", exc.join(", "))
}

fn scan(a: ScanArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let format = pick(
        a.format,
        Format::Tsv,
        &[Format::Tsv, Format::Json, Format::Text],
    )?;
    let total = a.to.saturating_sub(a.from) + 1;
    let progress = move |done: u64| eprintln!("scan: {done}/{total}");
    let options = ScanOptions {
        jobs: a.jobs.map(|j| j as usize),
        progress: Some(&progress),
    };
    if !is_prime(a.p) {
        return Err(usage(format!("--p {} is not prime", a.p)));
    }
    let mut write_err = None;
    let mut header_done = false;
    let report = sp_scan(a.p, a.from, a.to, a.cap, &options, &mut |row| {
        if format != Format::Tsv || write_err.is_some() {
            return;
        }
        let mut line = String::new();
        if !header_done {
            header_done = true;
            line.push_str(SCAN_TSV_HEADER);
            line.push('\n');
        }
        line.push_str(&row.tsv());
        let written = writeln!(out, "{line}").and_then(|_| {
            if row.n % SCAN_CHUNK == 0 {
                out.flush()
            } else {
                Ok(())
            }
        });
        if let Err(e) = written {
            write_err = Some(e);
        }
    })
    .map_err(usage)?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    match format {
        Format::Json => json_line(out, &report)?,
        Format::Text => write_scan_summary(out, &report)?,
        Format::Tsv => write_scan_summary(&mut io::stderr(), &report)?,
    }
    let bad = counterexamples(&report);
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "exceptions beyond the predicted bound: {}",
            bad.join(", ")
        )))
    }
}

fn count(a: CountArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let format = pick(a.format, Format::Text, &[Format::Text, Format::Json])?;
    let f = parse_form(&a.form)?;
    let r = f.rep_count(a.n).map_err(usage)?;
    match format {
        Format::Json => json_line(
            out,
            &CountRecord {
                form: f.to_string(),
                n: a.n,
                count: r,
            },
        )?,
        _ => writeln!(out, "r({}, {f}) = {r}", a.n)?,
    }
    Ok(())
}

fn density(a: DensityArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let format = pick(a.format, Format::Text, &[Format::Text, Format::Json])?;
    let f = parse_form(&a.form)?;
    let alpha = alpha_p(a.n, &f, a.p).map_err(usage)?;
    let ratio = genus_ratio(a.n, a.p, f.discriminant()).map_err(usage)?;
    let (alpha, ratio) = (format_rational(&alpha), format_rational(&ratio));
    match format {
        Format::Json => json_line(
            out,
            &DensityRecord {
                form: f.to_string(),
                n: a.n,
                p: a.p,
                alpha,
                genus_ratio: ratio,
            },
        )?,
        _ => {
            writeln!(out, "alpha_{}({}, {f}) = {alpha}", a.p, a.n)?;
            writeln!(
                out,
                "r({}^2 * {}, gen) / r({}, gen) = {ratio}",
                a.p, a.n, a.n
            )?;
        }
    }
    Ok(())
}

fn coefficient_value(c: &num_bigint::BigInt) -> Value {
    match c.to_i64() {
        Some(v) => Value::from(v),
        None => Value::from(c.to_string()),
    }
}

fn series(a: SeriesArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let format = pick(a.format, Format::Text, &[Format::Text, Format::Json])?;
    let (label, s) = match a.form.as_str() {
        "eta" => (
            "eta^2(2z) eta^2(10z)".to_string(),
            ramanujan_eta_product(a.prec).map_err(usage)?,
        ),
        "phi" => ("phi".to_string(), theta_diff_phi(a.prec).map_err(usage)?),
        other => {
            let f = parse_form(other)?;
            let theta = f.theta_series(a.prec).map_err(usage)?;
            let coeffs: Vec<i64> = theta.iter().map(|&c| c as i64).collect();
            (format!("theta {f}"), QSeries::from_i64(&coeffs))
        }
    };
    match format {
        Format::Json => {
            let coeffs: Vec<Value> = s.coefficients().iter().map(coefficient_value).collect();
            json_line(
                out,
                &SeriesRecord {
                    form: label,
                    precision: s.precision(),
                    coefficients: coeffs,
                },
            )?
        }
        _ => writeln!(out, "{label} = {s}")?,
    }
    Ok(())
}

fn aut(a: AutArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let format = pick(a.format, Format::Text, &[Format::Text, Format::Json])?;
    let f = parse_form(&a.form)?;
    let group = f.automorphisms().map_err(usage)?;
    match format {
        Format::Json => {
            let mats: Vec<&Vec<Vec<i64>>> = group.matrices.iter().map(|m| &m.0).collect();
            json_line(
                out,
                &AutRecord {
                    form: f.to_string(),
                    order: group.order(),
                    matrices: mats,
                },
            )?
        }
        _ => writeln!(out, "o({f}) = {}", group.order())?,
    }
    Ok(())
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let format = pick(a.format, Format::Text, &[Format::Text, Format::Json])?;
    let checks = suites::run(a.suite, a.jobs.map(|j| j as usize));
    match format {
        Format::Json => json_line(out, &checks)?,
        _ => {
            for c in &checks {
                let status = if c.pass { "PASS" } else { "FAIL" };
                writeln!(out, "{}/{}\t{status}", c.suite, c.name)?;
            }
        }
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}/{}", c.suite, c.name))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(failed.join(", ")))
    }
}
