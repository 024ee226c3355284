//! The `justinf` command line.
//!
//! Exit status: 0 Equal / verified, 1 NotEqual / rejected, 2 Exhausted,
//! 3 for every error (bad arguments, unreadable files, stream failures).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::certcheck::verify_document;
use crate::certificate::{Certificate, CertificateDocument};
use crate::freegroup::Word;
use crate::oracle::CorpusGroup;
use crate::presentation::{Family, Presentation};
use crate::quotient::{AssignmentMode, FinitenessConfig};
use crate::scheduler::{solve, solve_racing, Budget, Outcome, SolverConfig, Verdict};
use crate::tables::{TableCatalog, MAX_ORDER};

pub const EXIT_EQUAL: i32 = 0;
pub const EXIT_NOT_EQUAL: i32 = 1;
pub const EXIT_EXHAUSTED: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Parser)]
#[command(name = "justinf", version, about = "Word problem solver for just infinite groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether a word is trivial in a presented group.
    Solve(SolveArgs),
    /// Check a certificate (or a solve output document) against a presentation.
    Verify { certificate: PathBuf, presentation: PathBuf },
    /// Print one multiplication table per isomorphism class of the given order.
    EnumTables { order: usize },
    /// Run the built-in groups against their direct solvers.
    Corpus {
        /// Longest word tried in each group.
        #[arg(long, default_value_t = 3)]
        max_length: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Write the relators of a builtin family, one per line (stream source).
    #[command(hide = true)]
    EmitRelators {
        #[arg(long)]
        family: String,
        words: Vec<String>,
        /// Number of generators conjugators range over (default: those in the words).
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        limit: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct SolveArgs {
    presentation: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    word: String,
    /// Step budget shared by both arms, or `unlimited`.
    #[arg(long, default_value_t = DEFAULT_BUDGET.to_string())]
    budget: String,
    /// Required with `--budget unlimited`: the run may never end.
    #[arg(long)]
    allow_nontermination: bool,
    #[arg(long, default_value_t = 1)]
    quantum: u64,
    #[arg(long, default_value_t = crate::tables::DEFAULT_ORDER_CAP)]
    order_cap: usize,
    /// Restrict element images to single generators.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    /// Leave out wall time so repeated runs print identical documents.
    #[arg(long, conflicts_with = "race")]
    deterministic: bool,
    /// Run both arms on threads (nondeterministic).
    #[arg(long)]
    race: bool,
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

/// Runs the command line and returns the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_EQUAL };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(args) => run_solve(&args, out),
        Command::Verify { certificate, presentation } => run_verify(&certificate, &presentation, out),
        Command::EnumTables { order } => run_enum_tables(order, out),
        Command::Corpus { max_length, budget } => run_corpus(max_length, budget, out),
        Command::EmitRelators { family, words, rank, limit } => run_emit(&family, &words, rank, limit, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(message)) => {
            let _ = writeln!(err, "justinf: {message}");
            EXIT_ERROR
        }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_presentation(path: &PathBuf) -> Result<Presentation, Failure> {
    Presentation::parse(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn parse_budget(args: &SolveArgs) -> Result<Budget, Failure> {
    if args.budget == "unlimited" {
        if !args.allow_nontermination {
            return Err(Failure("--budget unlimited needs --allow-nontermination".into()));
        }
        return Ok(Budget::Unlimited);
    }
    let steps: u64 = args.budget.replace('_', "").parse().map_err(|_| Failure(format!("bad budget {:?}", args.budget)))?;
    if args.allow_nontermination {
        return Err(Failure("--allow-nontermination only applies to --budget unlimited".into()));
    }
    Ok(Budget::Steps(steps))
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::Equal(_) => "equal",
        Verdict::NotEqual(_) => "not-equal",
        Verdict::Exhausted => "exhausted",
    }
}

fn verdict_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Equal(_) => EXIT_EQUAL,
        Verdict::NotEqual(_) => EXIT_NOT_EQUAL,
        Verdict::Exhausted => EXIT_EXHAUSTED,
    }
}

fn certificate_of(outcome: &Outcome) -> Option<Certificate> {
    match &outcome.verdict {
        Verdict::Equal(c) => Some(Certificate::Equality(c.clone())),
        Verdict::NotEqual(c) => Some(Certificate::Finiteness(c.clone())),
        Verdict::Exhausted => None,
    }
}

fn run_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let budget = parse_budget(args)?;
    if args.quantum == 0 {
        return Err(Failure("--quantum must be at least 1".into()));
    }
    if args.order_cap == 0 || args.order_cap > MAX_ORDER {
        return Err(Failure(format!("--order-cap must be between 1 and {MAX_ORDER}")));
    }
    let p = load_presentation(&args.presentation)?;
    let alphabet = p.alphabet().clone();
    let x = alphabet.parse_word(&args.word).map_err(|e| Failure(format!("--word: {e}")))?;
    let config = SolverConfig {
        quantum: args.quantum,
        finiteness: FinitenessConfig {
            order_cap: args.order_cap,
            mode: if args.strict { AssignmentMode::Letters } else { AssignmentMode::Words },
            ..FinitenessConfig::default()
        },
    };
    let start = Instant::now();
    let outcome = if args.race { solve_racing(&p, &x, budget, config)? } else { solve(&p, &x, budget, config)? };
    let elapsed = start.elapsed();
    let document = certificate_of(&outcome).map(|c| CertificateDocument::new(c, &p)).transpose()?;

    let text = if args.json {
        let mut v = json!({
            "verdict": verdict_name(&outcome.verdict),
            "word": alphabet.format_word(&x),
            "equality_steps": outcome.equality_steps,
            "finiteness_steps": outcome.finiteness_steps,
            "certificate": document.as_ref().map(|d| d.to_json(&alphabet)),
        });
        if !args.deterministic {
            v["wall_time_ms"] = json!(elapsed.as_secs_f64() * 1000.0);
        }
        if args.race {
            v["mode"] = json!("race");
        }
        format!("{}\n", serde_json::to_string_pretty(&v)?)
    } else {
        let mut s = String::new();
        writeln!(s, "verdict: {}", verdict_name(&outcome.verdict))?;
        writeln!(s, "word:{}", [" ", &alphabet.format_word(&x)].concat().trim_end())?;
        writeln!(s, "equality-steps: {}", outcome.equality_steps)?;
        writeln!(s, "finiteness-steps: {}", outcome.finiteness_steps)?;
        if !args.deterministic {
            writeln!(s, "wall-time-ms: {:.3}", elapsed.as_secs_f64() * 1000.0)?;
        }
        if args.race {
            writeln!(s, "mode: race")?;
        }
        if let Some(d) = &document {
            s.push_str(&d.to_text(&alphabet));
        }
        s
    };
    match &args.output {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            writeln!(out, "verdict: {}", verdict_name(&outcome.verdict))?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(verdict_code(&outcome.verdict))
}

/// The certificate block of a solve document, or the whole text.
fn certificate_block(text: &str) -> &str {
    if text.starts_with("certificate:") {
        return text;
    }
    match text.find("\ncertificate:") {
        Some(i) => &text[i + 1..],
        None => text,
    }
}

fn run_verify(cert: &PathBuf, pres: &PathBuf, out: &mut dyn Write) -> Result<i32, Failure> {
    let p = load_presentation(pres)?;
    let text = read(cert)?;
    if text.trim_start().starts_with('{') {
        return Err(Failure("verify reads the text certificate format, not --json output".into()));
    }
    let doc = match CertificateDocument::parse(certificate_block(&text), p.alphabet()) {
        Ok(doc) => doc,
        Err(e) => {
            writeln!(out, "rejected: {e}")?;
            return Ok(1);
        }
    };
    match verify_document(&doc, &p) {
        Ok(()) => {
            writeln!(out, "accepted: {} certificate for {}", doc.certificate.kind(), p.alphabet().format_word(doc.certificate.target()))?;
            Ok(0)
        }
        Err(e) => {
            writeln!(out, "rejected: {e}")?;
            Ok(1)
        }
    }
}

fn run_enum_tables(order: usize, out: &mut dyn Write) -> Result<i32, Failure> {
    if order == 0 || order > MAX_ORDER {
        return Err(Failure(format!("order must be between 1 and {MAX_ORDER}")));
    }
    let catalog = TableCatalog::new(order);
    for (n, t) in catalog.of_order(order).iter().enumerate() {
        if n > 0 {
            writeln!(out)?;
        }
        for row in t.rows() {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            writeln!(out, "{}", cells.join(" "))?;
        }
    }
    Ok(0)
}

fn run_corpus(max_length: usize, budget: u64, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut failures = 0;
    writeln!(out, "{:<6} {:<8} {:<10} {:<8} result", "group", "word", "verdict", "oracle")?;
    for group in CorpusGroup::builtin() {
        let p = group.presentation();
        let alphabet = p.alphabet().clone();
        for n in 0..alphabet.words_up_to(max_length) {
            let x = alphabet.word_at_index(n);
            let outcome = solve(&p, &x, Budget::Steps(budget), SolverConfig::default())?;
            let trivial = group.is_identity(&x);
            let verified = match certificate_of(&outcome) {
                Some(c) => verify_document(&CertificateDocument::new(c, &p)?, &p).is_ok(),
                None => true,
            };
            let agrees = match outcome.verdict {
                Verdict::Equal(_) => trivial,
                Verdict::NotEqual(_) => !trivial,
                Verdict::Exhausted => false,
            };
            let ok = agrees && verified;
            failures += usize::from(!ok);
            let shown = if x.is_empty() { "1".to_string() } else { alphabet.format_word(&x) };
            writeln!(
                out,
                "{:<6} {:<8} {:<10} {:<8} {}",
                group.name(),
                shown,
                verdict_name(&outcome.verdict),
                if trivial { "trivial" } else { "nontriv" },
                if ok { "PASS" } else { "FAIL" }
            )?;
        }
    }
    writeln!(out, "{failures} failures")?;
    Ok(if failures == 0 { 0 } else { 1 })
}

fn run_emit(family: &str, words: &[String], rank: Option<usize>, limit: Option<usize>, out: &mut dyn Write) -> Result<i32, Failure> {
    if family != "powers" {
        return Err(Failure(format!("unknown family {family:?}")));
    }
    if words.is_empty() {
        return Err(Failure("the powers family needs at least one word".into()));
    }
    let parsed: Vec<Word> = words.iter().map(|w| Word::parse_standard(w)).collect::<Result<_, _>>()?;
    let used = parsed.iter().filter_map(Word::max_generator).max().map_or(1, |g| g + 1);
    let rank = rank.unwrap_or(used);
    if rank < used {
        return Err(Failure(format!("--rank {rank} is smaller than the words need")));
    }
    let alphabet = crate::freegroup::Alphabet::standard(rank)?;
    let family = Family::Powers(parsed);
    let mut i = 0;
    while limit.is_none_or(|l| i < l) {
        let line = format!("{}\n", alphabet.format_word(&family.relator(&alphabet, i)));
        match out.write_all(line.as_bytes()).and_then(|_| out.flush()) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => return Ok(0),
            Err(e) => return Err(e.into()),
        }
        i += 1;
    }
    Ok(0)
}
