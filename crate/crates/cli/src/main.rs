mod config;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use freeindex::constructions::{
    double_cycle_cover, glued_cycles_cover, kernel_phi_cover, lemma_one_basis, power_basis,
};
use freeindex::index::{
    search_index, verify_lower_bound_thm2, verify_prop4, verify_thm4, verify_upper_bound_thm1, IndexError, IndexKind,
    SearchOptions, DEFAULT_MAX_RANK, STATED_PRIMITIVITY_INDICES,
};
use freeindex::numtheory::{
    lemma2_bounds_check, rosser_schoenfeld_check, smallest_nondivisor, write_lcm_csv, ChebyshevTable,
};
use freeindex::stallings::{enumerate_covers, subgroup_graph, CoverPermutations};
use freeindex::words::power_word;
use freeindex::Word;
use serde::Serialize;

use config::{Format, RunConfig, Span};

const EXIT_FAILURE: u8 = 1;
const EXIT_CAP_EXHAUSTED: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_DISCREPANCY: u8 = 4;
const EXIT_USAGE: u8 = 64;

/// Largest degree `enumerate` accepts unless overridden.
const DEFAULT_MAX_DEGREE: usize = 7;

#[derive(Parser, Debug)]
#[command(name = "freeindex", version, about = "Primitivity and simplicity indices of words in free groups")]
struct Cli {
    /// Worker threads for cover processing.
    #[arg(long, global = true, env = "FREEINDEX_WORKERS")]
    workers: Option<usize>,
    /// Write the data stream (or the certificate, for `index`) to a file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Suppress progress messages on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    /// Print the parsed run configuration as JSON on stderr.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the primitivity or simplicity index of a word.
    Index(IndexArgs),
    /// Run a verifier over a parameter range and print a pass/fail table.
    Verify(VerifyArgs),
    /// List the covers of a given degree.
    Enumerate(EnumerateArgs),
    /// Chebyshev-function and smallest-nondivisor reports.
    Bounds(BoundsArgs),
    /// Build one of the explicit subgroups and print it.
    Construct(ConstructArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Prim,
    Simp,
}

impl From<Kind> for IndexKind {
    fn from(k: Kind) -> IndexKind {
        match k {
            Kind::Prim => IndexKind::Primitivity,
            Kind::Simp => IndexKind::Simplicity,
        }
    }
}

#[derive(Args, Debug)]
struct IndexArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Word such as "a^3 b^3" or "x1 x2 X1".
    #[arg(long)]
    word: String,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    /// Largest index to try.
    #[arg(long)]
    cap: Option<usize>,
    /// Largest subgroup rank to search in.
    #[arg(long, default_value_t = DEFAULT_MAX_RANK)]
    max_rank: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Selector {
    Thm1,
    Thm2,
    Thm4,
    Prop4,
    Lemma1,
    Power,
    Bounds,
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.to_possible_value().expect("no skipped variants");
        f.write_str(name.get_name())
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    selector: Selector,
    #[arg(long)]
    n: Option<Span>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    d: Option<Span>,
    #[arg(long)]
    d_prime: Option<usize>,
    #[arg(long)]
    i: Option<Span>,
    #[arg(long)]
    m_max: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_MAX_RANK)]
    max_rank: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long)]
    degree: usize,
    /// Keep only covers whose subgroup contains this word.
    #[arg(long)]
    contains: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
    max_degree: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Table {
    Lcm,
    Psi,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, default_value_t = 100_000)]
    m_max: u64,
    #[arg(long, default_value_t = 1_000_000)]
    n_max: u64,
    #[arg(long, default_value_t = 30)]
    i_max: u64,
    /// Table written in csv format.
    #[arg(long, value_enum, default_value_t = Table::Lcm)]
    table: Table,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[command(subcommand)]
    what: Construction,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Construction {
    /// Index-d kernel of a, b -> 1 mod d with its adapted basis.
    Lemma1 {
        #[arg(long)]
        d: usize,
    },
    /// Cover built by gluing an a-cycle and a b-cycle of length d.
    Double {
        #[arg(long)]
        d: usize,
    },
    /// Glued-cycle subgroup of index d + d' - 2 containing a^n b^t as a primitive.
    Glued {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        d_prime: usize,
    },
    /// Basis containing a^k and b^l for one cover of the given degree.
    Power {
        #[arg(long)]
        degree: usize,
        /// Position of the cover in enumeration order.
        #[arg(long, default_value_t = 0)]
        nth: usize,
    },
}

/// Bad input: exit 64.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Guard refused the request: exit 3.
#[derive(Debug)]
struct GuardError(String);

impl fmt::Display for GuardError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for GuardError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_word(text: &str, rank: usize) -> Result<Word> {
    Word::parse(text, rank).map_err(|e| usage(format!("cannot parse word {text:?}: {e}")))
}

struct Ctx {
    quiet: bool,
    output: Option<PathBuf>,
    workers: Option<usize>,
}

impl Ctx {
    fn progress(&self, msg: impl fmt::Display) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }

    /// Writes the data stream to `--output` or stdout.
    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn run_config(cli: &Cli) -> RunConfig {
    let (command, word, rank, cap, degree_guard, format) = match &cli.command {
        Command::Index(a) => {
            let kind = match a.kind {
                Kind::Prim => "prim",
                Kind::Simp => "simp",
            };
            (format!("index {kind}"), Some(a.word.clone()), a.rank, a.cap, Some(a.max_rank), a.format)
        }
        Command::Verify(a) => (format!("verify {}", a.selector), None, 2, None, Some(a.max_rank), a.format),
        Command::Enumerate(a) => ("enumerate".into(), a.contains.clone(), a.rank, None, Some(a.max_degree), a.format),
        Command::Bounds(a) => ("bounds".into(), None, 2, None, None, a.format),
        Command::Construct(a) => {
            let what = match a.what {
                Construction::Lemma1 { .. } => "lemma1",
                Construction::Double { .. } => "double",
                Construction::Glued { .. } => "glued",
                Construction::Power { .. } => "power",
            };
            (format!("construct {what}"), None, 2, None, None, a.format)
        }
    };
    RunConfig {
        command,
        word,
        rank,
        cap,
        degree_guard,
        format,
        workers: cli.workers,
        output: cli.output.as_ref().map(|p| p.display().to_string()),
    }
}

// --- index ---------------------------------------------------------------

fn stated_value(w: &Word) -> Option<usize> {
    STATED_PRIMITIVITY_INDICES
        .iter()
        .find_map(|&((n, t), stated)| (power_word(n as i64, t as i64).ok().as_ref() == Some(w)).then_some(stated))
}

fn cmd_index(ctx: &Ctx, args: &IndexArgs) -> Result<u8> {
    let w = parse_word(&args.word, args.rank)?;
    let kind = IndexKind::from(args.kind);
    let options = SearchOptions { cap: args.cap, max_rank: args.max_rank, workers: ctx.workers };
    ctx.progress(format_args!("searching for the {kind:?} index of {w}").to_string().to_lowercase());
    let cert = search_index(&w, kind, &options)?;
    cert.verify()?;
    for rec in &cert.lower_bound_log {
        ctx.progress(format_args!(
            "degree {}: {} covers, {} containing the word, all rejected",
            rec.degree, rec.covers_examined, rec.containing
        ));
    }
    if kind == IndexKind::Primitivity {
        if let Some(stated) = stated_value(&w).filter(|&s| s != cert.index) {
            eprintln!("note: computed index {} differs from the recorded value {stated}", cert.index);
        }
    }
    if let Some(path) = &ctx.output {
        fs::write(path, to_json(&cert)?).with_context(|| format!("writing {}", path.display()))?;
    }
    let text = match args.format {
        Format::Text => format!("{}\n", cert.index),
        Format::Json => to_json(&cert)?,
        Format::Dot => cert.cover.to_graph().to_dot(),
        Format::Csv => {
            let mut out = csv::Writer::from_writer(Vec::new());
            for rec in &cert.lower_bound_log {
                out.serialize(rec)?;
            }
            String::from_utf8(out.into_inner()?)?
        }
    };
    let mut stdout = io::stdout().lock();
    stdout.write_all(text.as_bytes())?;
    Ok(0)
}

// --- verify --------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Pass,
    Fail,
    Discrepancy,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Discrepancy => "DISCREPANCY",
        })
    }
}

#[derive(Debug, Serialize)]
struct Row {
    selector: String,
    param: String,
    status: Status,
    detail: String,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    rows: Vec<Row>,
    passes: usize,
    failures: usize,
    discrepancies: usize,
}

fn row(selector: Selector, param: String, outcome: Result<(Status, String)>) -> Row {
    let (status, detail) = outcome.unwrap_or_else(|e| (Status::Fail, format!("{e:#}")));
    Row { selector: selector.to_string(), param, status, detail }
}

fn pass(detail: String) -> Result<(Status, String)> {
    Ok((Status::Pass, detail))
}

fn check(ok: bool, detail: String) -> Result<(Status, String)> {
    Ok((if ok { Status::Pass } else { Status::Fail }, detail))
}

fn require(span: Option<Span>, default: Span, min: usize, name: &str) -> Result<Span> {
    let span = span.unwrap_or(default);
    if span.lo < min {
        return Err(usage(format!("--{name} must start at {min} or above")));
    }
    Ok(span)
}

fn verify_rows(ctx: &Ctx, args: &VerifyArgs) -> Result<Vec<Row>> {
    let sel = args.selector;
    let mut rows = Vec::new();
    match sel {
        Selector::Thm1 => {
            for n in require(args.n, Span { lo: 2, hi: 200 }, 1, "n")?.iter() {
                let outcome = verify_upper_bound_thm1(n)
                    .map_err(Into::into)
                    .and_then(|r| pass(format!("degree {} with {} in the kernel basis", r.degree, r.rewritten)));
                rows.push(row(sel, format!("n={n}"), outcome));
            }
        }
        Selector::Thm2 => {
            for i in require(args.i, Span { lo: 3, hi: 4 }, 2, "i")?.iter() {
                ctx.progress(format_args!("exhausting subgroups for i={i}"));
                let outcome = verify_lower_bound_thm2(i, args.max_rank).map_err(Into::into).and_then(|r| {
                    let upper = verify_upper_bound_thm1(r.n_i)?;
                    check(
                        r.agree() && upper.degree == r.bound,
                        format!(
                            "n_i={}: d_prim = {} ({} subgroups rejected by both arguments)",
                            r.n_i,
                            r.bound,
                            r.rejections.len()
                        ),
                    )
                });
                rows.push(row(sel, format!("i={i}"), outcome));
            }
        }
        Selector::Thm4 => {
            for n in require(args.n, Span { lo: 2, hi: 8 }, 2, "n")?.iter() {
                let outcome =
                    verify_thm4(n).map_err(Into::into).and_then(|r| pass(format!("index-2 witness {}", r.rewritten)));
                rows.push(row(sel, format!("n={n}"), outcome));
            }
        }
        Selector::Prop4 => {
            for n in require(args.n, Span::single(5), 1, "n")?.iter() {
                let t = args.t.unwrap_or(n);
                let pick = |m: usize| smallest_nondivisor(m as u64).map_or(2, |d| d as usize);
                let d = args.d.map_or_else(|| pick(n), |s| s.lo);
                let d_prime = args.d_prime.unwrap_or_else(|| pick(t));
                let outcome = verify_prop4(n, t, d, d_prime).map_err(Into::into).map(|r| match r.discrepancy {
                    Some(x) => (Status::Discrepancy, x.note),
                    None => (Status::Pass, format!("bound {} via {}", r.bound, r.certificate.eta)),
                });
                rows.push(row(sel, format!("n={n} t={t} d={d} d'={d_prime}"), outcome));
            }
        }
        Selector::Lemma1 => {
            for d in require(args.d, Span { lo: 2, hi: 20 }, 2, "d")?.iter() {
                let outcome = (|| {
                    let kernel = kernel_phi_cover(d)?;
                    let same = double_cycle_cover(d)?.is_isomorphic(&kernel);
                    let basis = lemma_one_basis(d)?;
                    let refolds = subgroup_graph(&basis.y, 2)?.is_isomorphic(&kernel);
                    check(same && refolds, format!("basis of rank {}", basis.y.len()))
                })();
                rows.push(row(sel, format!("d={d}"), outcome));
            }
        }
        Selector::Power => {
            let span = require(args.d, Span { lo: 1, hi: 4 }, 1, "d")?;
            if span.hi > DEFAULT_MAX_DEGREE {
                return Err(GuardError(format!("degree {} is above {DEFAULT_MAX_DEGREE}", span.hi)).into());
            }
            for d in span.iter() {
                let outcome = (|| {
                    let mut count = 0;
                    for c in enumerate_covers(2, d)? {
                        let g = c.to_graph();
                        let pb = power_basis(&g)?;
                        if !subgroup_graph(&pb.y, 2)?.is_isomorphic(&g) {
                            return check(false, format!("basis does not refold for {:?}", c.perms()));
                        }
                        count += 1;
                    }
                    pass(format!("{count} subgroups with a^k and b^l in a basis"))
                })();
                rows.push(row(sel, format!("d={d}"), outcome));
            }
        }
        Selector::Bounds => {
            let m_max = args.m_max.unwrap_or(100_000);
            if m_max < 2 {
                return Err(usage("--m-max must be at least 2"));
            }
            let env = rosser_schoenfeld_check(m_max)?;
            let param = format!("m<={m_max}");
            rows.push(row(
                sel,
                param.clone(),
                check(
                    env.lower_violations.is_empty() && env.upper_violations.is_empty(),
                    format!("envelope margins {:.4} / {:.4}", env.lower_margin, env.upper_margin),
                ),
            ));
            rows.push(row(
                sel,
                param.clone(),
                check(
                    env.ratio_bound_violations.is_empty(),
                    format!("max psi(m)/m = {:.6} at argmax {}", env.max_ratio, env.argmax),
                ),
            ));
            rows.push(row(
                sel,
                param,
                check(env.lcm_deviation < 1e-9, format!("lcm cross-check deviation {:.2e}", env.lcm_deviation)),
            ));
            let lcm = lemma2_bounds_check(2, 30)?;
            rows.push(row(sel, "i=2..30".into(), check(lcm.failures.is_empty(), "d(lcm(1..i)) >= i + 1".into())));
        }
    }
    Ok(rows)
}

fn cmd_verify(ctx: &Ctx, args: &VerifyArgs) -> Result<u8> {
    let rows = verify_rows(ctx, args)?;
    let count = |s: Status| rows.iter().filter(|r| r.status == s).count();
    let report = VerifyReport {
        passes: count(Status::Pass),
        failures: count(Status::Fail),
        discrepancies: count(Status::Discrepancy),
        rows,
    };
    let text = match args.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut out = csv::Writer::from_writer(Vec::new());
            for r in &report.rows {
                out.serialize(r)?;
            }
            String::from_utf8(out.into_inner()?)?
        }
        Format::Text | Format::Dot => {
            let mut s = String::new();
            for r in &report.rows {
                s += &format!("{:<7} {:<20} {:<11} {}\n", r.selector, r.param, r.status, r.detail);
            }
            s += &format!(
                "{} passes, {} failures, {} discrepancies\n",
                report.passes, report.failures, report.discrepancies
            );
            s
        }
    };
    ctx.emit(&text)?;
    Ok(if report.failures > 0 {
        EXIT_FAILURE
    } else if report.discrepancies > 0 {
        EXIT_DISCREPANCY
    } else {
        0
    })
}

// --- enumerate -----------------------------------------------------------

fn cmd_enumerate(ctx: &Ctx, args: &EnumerateArgs) -> Result<u8> {
    if args.degree == 0 || args.rank == 0 {
        return Err(usage("--degree and --rank must be positive"));
    }
    if args.degree > args.max_degree {
        return Err(GuardError(format!("degree {} is above the guard {}", args.degree, args.max_degree)).into());
    }
    let filter = args.contains.as_deref().map(|t| parse_word(t, args.rank)).transpose()?;
    let mut text = String::new();
    let mut count = 0usize;
    for (seen, cover) in enumerate_covers(args.rank, args.degree)?.enumerate() {
        if seen > 0 && seen % 100_000 == 0 {
            ctx.progress(format_args!("{seen} covers examined"));
        }
        if filter.as_ref().is_some_and(|w| !cover.contains(w)) {
            continue;
        }
        count += 1;
        match args.format {
            Format::Json => text += &(serde_json::to_string(&cover)? + "\n"),
            Format::Dot => text += &cover.to_graph().to_dot(),
            Format::Csv => text += &csv_line(&cover),
            Format::Text => {}
        }
    }
    if args.format == Format::Text {
        text = format!("{count}\n");
    } else {
        ctx.progress(format_args!("count {count}"));
    }
    ctx.emit(&text)?;
    Ok(0)
}

fn csv_line(cover: &CoverPermutations) -> String {
    let perms: Vec<String> =
        cover.perms().iter().map(|p| p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).collect();
    format!("{},{}\n", cover.degree(), perms.join(","))
}

// --- bounds --------------------------------------------------------------

#[derive(Serialize)]
struct BoundsReport {
    envelope: freeindex::numtheory::EnvelopeReport,
    nondivisor: freeindex::numtheory::NondivisorReport,
}

fn cmd_bounds(ctx: &Ctx, args: &BoundsArgs) -> Result<u8> {
    if args.m_max < 2 || args.n_max < 2 || args.i_max < 2 {
        return Err(usage("--m-max, --n-max and --i-max must be at least 2"));
    }
    ctx.progress("sieving");
    let envelope = rosser_schoenfeld_check(args.m_max)?;
    let nondivisor = lemma2_bounds_check(args.n_max, args.i_max)?;
    let ok = envelope.holds() && nondivisor.failures.is_empty();
    let text = match args.format {
        Format::Json => to_json(&BoundsReport { envelope, nondivisor })?,
        Format::Csv => {
            let mut buf = Vec::new();
            match args.table {
                Table::Lcm => write_lcm_csv(&nondivisor.rows, &mut buf)?,
                Table::Psi => ChebyshevTable::new(args.m_max).write_csv(&mut buf)?,
            }
            String::from_utf8(buf)?
        }
        Format::Text | Format::Dot => {
            let mut s = format!(
                "psi envelope for m <= {}: {}\n",
                envelope.m_max,
                if envelope.holds() { "holds" } else { "violated" }
            );
            s += &format!("max psi(m)/m = {:.6} at m = {}\n", envelope.max_ratio, envelope.argmax);
            s += &format!("lcm cross-check deviation {:.2e}\n", envelope.lcm_deviation);
            s += &format!(
                "max d(n) - ln n for n <= {}: {:.4} at n = {}\n",
                nondivisor.n_max, nondivisor.c_hat, nondivisor.c_hat_at
            );
            s += &format!("{:>3} {:>16} {:>4} {:>9} {:>7}\n", "i", "n_i", "d", "ln n_i", "gap");
            for r in &nondivisor.rows {
                s += &format!("{:>3} {:>16} {:>4} {:>9.4} {:>7.4}\n", r.i, r.n_i, r.d, r.ln_n_i, r.gap());
            }
            s
        }
    };
    ctx.emit(&text)?;
    Ok(if ok { 0 } else { EXIT_FAILURE })
}

// --- construct -----------------------------------------------------------

fn basis_lines(names: &str, words: &[Word]) -> String {
    words.iter().enumerate().map(|(j, w)| format!("{names}{j} = {w}\n")).collect()
}

fn cmd_construct(ctx: &Ctx, args: &ConstructArgs) -> Result<u8> {
    let text = match &args.what {
        Construction::Lemma1 { d } => {
            let b = lemma_one_basis(*d)?;
            match args.format {
                Format::Dot => b.graph.to_dot(),
                Format::Text => basis_lines("z", &b.z) + &basis_lines("y", &b.y),
                _ => to_json(&b)?,
            }
        }
        Construction::Double { d } => {
            let g = double_cycle_cover(*d)?;
            match args.format {
                Format::Dot => g.to_dot(),
                Format::Text => format!("{} vertices, cover: {}\n", g.vertex_count(), g.is_cover()),
                _ => to_json(&g)?,
            }
        }
        Construction::Glued { n, t, d, d_prime } => {
            let c = glued_cycles_cover(*n, *t, *d, *d_prime)?;
            match args.format {
                Format::Dot => c.cover.to_dot(),
                Format::Text => {
                    basis_lines("x", &c.basis)
                        + &format!("{} = {} in this basis\n", c.witness, c.eta)
                        + &format!("primitive: {}\n", c.evidence.is_primitive())
                }
                _ => to_json(&c)?,
            }
        }
        Construction::Power { degree, nth } => {
            if *degree > DEFAULT_MAX_DEGREE {
                return Err(GuardError(format!("degree {degree} is above {DEFAULT_MAX_DEGREE}")).into());
            }
            let cover = enumerate_covers(2, *degree)?
                .nth(*nth)
                .ok_or_else(|| usage(format!("there are fewer than {} covers of degree {degree}", nth + 1)))?;
            let pb = power_basis(&cover.to_graph())?;
            match args.format {
                Format::Dot => pb.graph.to_dot(),
                Format::Text => format!("k = {}, l = {}, arcs = {}\n", pb.k, pb.l, pb.m) + &basis_lines("y", &pb.y),
                _ => to_json(&pb)?,
            }
        }
    };
    ctx.emit(&text)?;
    Ok(0)
}

// --- entry point ---------------------------------------------------------

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    if err.downcast_ref::<GuardError>().is_some() {
        return EXIT_INFEASIBLE;
    }
    match err.downcast_ref::<IndexError>() {
        Some(IndexError::CapExhausted { .. }) => EXIT_CAP_EXHAUSTED,
        Some(IndexError::Infeasible { .. }) => EXIT_INFEASIBLE,
        _ => EXIT_FAILURE,
    }
}

fn run(cli: &Cli) -> Result<u8> {
    if let Some(n) = cli.workers.filter(|&n| n == 0) {
        return Err(usage(format!("--workers must be positive, got {n}")));
    }
    if cli.print_config {
        eprintln!("{}", serde_json::to_string(&run_config(cli))?);
    }
    let ctx = Ctx { quiet: cli.quiet, output: cli.output.clone(), workers: cli.workers };
    match &cli.command {
        Command::Index(a) => cmd_index(&ctx, a),
        Command::Verify(a) => cmd_verify(&ctx, a),
        Command::Enumerate(a) => cmd_enumerate(&ctx, a),
        Command::Bounds(a) => cmd_bounds(&ctx, a),
        Command::Construct(a) => cmd_construct(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
