use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypersum_core::identities::{run_ids, verify_eq, IdentityReport, SuiteGrid};
use hypersum_core::real::PrecisionRequest;
use hypersum_core::sums::{evaluate, sigma_closed, EvalResult, Method, SumQuery};
use hypersum_core::Error;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "hypersum",
    version,
    about = "Euler sums of hyperharmonic numbers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one sigma(r, m)
    Compute(ComputeArgs),
    /// Run the identity verification suite
    Verify(VerifyArgs),
    /// Print a grid of sigma(r, m) values in closed form
    Table(TableArgs),
}

#[derive(Args)]
struct Common {
    /// Decimal places of the result
    #[arg(long, default_value_t = 15)]
    digits: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Include wall-clock timings (makes output run-dependent)
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Closed,
    Direct,
    Hurwitz,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long)]
    r: u32,
    #[arg(long)]
    m: u32,
    #[arg(long, value_enum, default_value_t = MethodArg::Closed)]
    method: MethodArg,
    /// Nesting depth for the hurwitz method (default 0)
    #[arg(long)]
    k: Option<u32>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    /// Glob over identity ids, e.g. "eq*" or "thm1_r3_*"
    #[arg(long)]
    filter: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TableArgs {
    /// Range of r, e.g. 1..3
    #[arg(long, value_parser = parse_range)]
    r: (u32, u32),
    /// Range of m, e.g. 2..5
    #[arg(long, value_parser = parse_range)]
    m: (u32, u32),
    #[command(flatten)]
    common: Common,
}

/// `"a..b"` (inclusive) or a single `"a"`.
fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once("..").unwrap_or((s, s));
    let parse = |v: &str| {
        v.trim()
            .parse::<u32>()
            .map_err(|e| format!("bad bound {v:?}: {e}"))
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo == 0 || lo > hi {
        return Err(format!("range {s:?} must satisfy 1 <= start <= end"));
    }
    Ok((lo, hi))
}

/// Failure with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_usage() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn request(digits: u32) -> Result<PrecisionRequest, Failure> {
    Ok(PrecisionRequest::new(digits)?)
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents serialize")
}

#[derive(Serialize)]
struct QueryDoc {
    r: u32,
    m: u32,
    k: Option<u32>,
    method: &'static str,
    digits: u32,
}

#[derive(Serialize)]
struct ComputeDoc {
    query: QueryDoc,
    value: String,
    error_bound: String,
    terms_used: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u64>,
}

fn compute_doc(res: &EvalResult, elapsed_ms: Option<u64>) -> ComputeDoc {
    let q = &res.query;
    ComputeDoc {
        query: QueryDoc {
            r: q.r,
            m: q.m,
            k: q.method.k(),
            method: q.method.tag(),
            digits: q.digits,
        },
        value: res.value.to_decimal(q.digits),
        error_bound: res.error_bound.to_sci_upper(),
        terms_used: res.terms_used,
        elapsed_ms,
    }
}

fn cmd_compute(args: &ComputeArgs) -> Result<(), Failure> {
    let method = match (args.method, args.k) {
        (MethodArg::Hurwitz, k) => Method::Hurwitz(k.unwrap_or(0)),
        (_, Some(_)) => return Err(usage("--k only applies to --method hurwitz")),
        (MethodArg::Closed, None) => Method::Closed,
        (MethodArg::Direct, None) => Method::Direct,
    };
    let query = SumQuery::new(args.r, args.m, method, args.common.digits)?;
    let start = Instant::now();
    let res = evaluate(&query)?;
    let elapsed = args
        .common
        .timing
        .then(|| start.elapsed().as_millis() as u64);
    match args.common.format {
        Format::Json => println!("{}", to_json(&compute_doc(&res, elapsed))),
        Format::Text => {
            println!(
                "sigma({}, {}) = {}",
                query.r,
                query.m,
                res.value.to_decimal(query.digits)
            );
            println!("method: {}", query.method);
            println!("error bound: {}", res.error_bound.to_sci_upper());
            println!("terms used: {}", res.terms_used);
            if let Some(ms) = elapsed {
                println!("elapsed: {ms} ms");
            }
        }
    }
    Ok(())
}

fn has_glob_syntax(s: &str) -> bool {
    s.contains(['*', '?', '['])
}

fn select_ids(filter: Option<&str>) -> Result<Vec<String>, Failure> {
    let all = SuiteGrid::default().ids();
    let Some(filter) = filter else {
        return Ok(all);
    };
    let pattern =
        glob::Pattern::new(filter).map_err(|e| usage(format!("invalid filter {filter:?}: {e}")))?;
    let ids: Vec<String> = all.into_iter().filter(|id| pattern.matches(id)).collect();
    if !ids.is_empty() {
        return Ok(ids);
    }
    // a literal id outside the default grid, e.g. eq1_m9
    if !has_glob_syntax(filter) {
        return Ok(vec![filter.to_string()]);
    }
    Err(usage(format!("filter {filter:?} matches no identity")))
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let req = request(args.common.digits)?;
    let ids = select_ids(args.filter.as_deref())?;
    let reports: Vec<IdentityReport> = if ids.len() == 1 {
        vec![verify_eq(&ids[0], &req)?]
    } else {
        run_ids(&ids, &req)
    };
    let passed = reports.iter().filter(|r| r.passed).count();
    let failed = reports.len() - passed;
    let summary = format!("{passed} passed, {failed} failed");
    match args.common.format {
        Format::Json => {
            let records: Vec<_> = reports
                .iter()
                .map(|r| r.record(args.common.timing))
                .collect();
            println!("{}", to_json(&records));
            eprintln!("{summary}");
        }
        Format::Text => {
            for rep in &reports {
                let status = if rep.passed { "PASS" } else { "FAIL" };
                let mut line = format!(
                    "{status} {:<24} |lhs - rhs| = {:<9} tol = {:<9} terms = {}",
                    rep.identity_id,
                    rep.difference.to_sci_upper(),
                    rep.tolerance.to_sci_upper(),
                    rep.terms_used
                );
                if let Some(res) = &rep.residual {
                    line += &format!(" residual = {}", res.to_sci_upper());
                }
                if let Some(b) = rep.bracketed {
                    line += &format!(" bracketed = {b}");
                }
                if let Some(err) = &rep.error {
                    line += &format!(" error: {err}");
                }
                if args.common.timing {
                    line += &format!(" ({} ms)", rep.elapsed.as_millis());
                }
                println!("{line}");
            }
            println!("{summary}");
        }
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure {
            code: 1,
            message: format!("{failed} identities failed"),
        })
    }
}

#[derive(Serialize)]
struct CellDoc {
    value: String,
    error_bound: String,
}

#[derive(Serialize)]
struct RowDoc {
    r: u32,
    /// One entry per `m`; `None` where the sum diverges.
    cells: Vec<Option<CellDoc>>,
}

#[derive(Serialize)]
struct TableDoc {
    digits: u32,
    m: Vec<u32>,
    rows: Vec<RowDoc>,
}

const DIVERGENT_CELL: &str = "—";

fn cmd_table(args: &TableArgs) -> Result<(), Failure> {
    let digits = args.common.digits;
    request(digits)?;
    let ms: Vec<u32> = (args.m.0..=args.m.1).collect();
    let mut rows = Vec::new();
    for r in args.r.0..=args.r.1 {
        let mut cells = Vec::new();
        for &m in &ms {
            cells.push(if m <= r {
                None
            } else {
                let res = sigma_closed(&SumQuery::new(r, m, Method::Closed, digits)?)?;
                Some(CellDoc {
                    value: res.value.to_decimal(digits),
                    error_bound: res.error_bound.to_sci_upper(),
                })
            });
        }
        rows.push(RowDoc { r, cells });
    }
    let doc = TableDoc {
        digits,
        m: ms,
        rows,
    };
    match args.common.format {
        Format::Json => println!("{}", to_json(&doc)),
        Format::Text => {
            let width = digits as usize + 4;
            let mut header = format!("{:>4}", "r\\m");
            for m in &doc.m {
                header += &format!("  {m:>width$}");
            }
            println!("{header}");
            for row in &doc.rows {
                let mut line = format!("{:>4}", row.r);
                for cell in &row.cells {
                    let text = cell.as_ref().map_or(DIVERGENT_CELL, |c| c.value.as_str());
                    line += &format!("  {text:>width$}");
                }
                println!("{line}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Compute(a) => cmd_compute(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Table(a) => cmd_table(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
