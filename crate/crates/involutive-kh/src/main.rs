//! Command-line driver: computes the triply graded invariant and its
//! spectral-sequence pages from IKD diagram files, and runs the built-in
//! consistency suites.
//!
//! Exit codes: 0 success, 1 a check suite failed, 2 unreadable or invalid
//! input, 3 diagram over the size limit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use ikh::complex::{build_complex_limited, ComplexError, HalfInt, DEFAULT_MAX_CROSSINGS};
use ikh::diagram::{parse_diagram, InvolutiveDiagram};
use ikh::homology::{splitting_check_limited, HomologyError, TriGradedTable};
use ikh::invariants::{
    kh_tau_limited, kh_tau_reduced_limited, mirror_check_limited, move_invariance_check_limited,
    skein_check_limited, support_lemma_check_limited, InvariantError,
};
use ikh::specseq::{e_infinity_check_both, f_pages, g_pages, FiltrationKind, Page};

#[derive(Parser)]
#[command(name = "involutive-kh", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SizeOpt {
    /// Overrides the crossing-count limit (also via IKH_MAX_CROSSINGS).
    #[arg(long, value_name = "N")]
    max_crossings: Option<usize>,
}

impl SizeOpt {
    fn resolve(&self) -> Result<usize> {
        if let Some(n) = self.max_crossings {
            return Ok(n);
        }
        match std::env::var("IKH_MAX_CROSSINGS") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| anyhow!("IKH_MAX_CROSSINGS must be an integer, got {v:?}")),
            Err(_) => Ok(DEFAULT_MAX_CROSSINGS),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Computes the triply graded table of an IKD diagram.
    Compute {
        path: PathBuf,
        /// Also computes the basepointed (reduced) table.
        #[arg(long)]
        reduced: bool,
        /// Emits a machine-readable JSON document.
        #[arg(long)]
        json: bool,
        /// Renders an ASCII (i, k) grid with the quantum grading summed out.
        #[arg(long)]
        collapse_j: bool,
        #[command(flatten)]
        size: SizeOpt,
    },
    /// Emits spectral-sequence page dimension tables.
    Pages {
        path: PathBuf,
        /// Which filtration to run: F (cohomological) or G (axis weight).
        #[arg(long, value_enum, default_value_t = FiltrationArg::F)]
        filtration: FiltrationArg,
        /// Deepest page to emit.
        #[arg(long, default_value_t = 3)]
        upto: u32,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        size: SizeOpt,
    },
    /// Computes the basepointed (reduced) table only.
    Reduced {
        path: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        collapse_j: bool,
        #[command(flatten)]
        size: SizeOpt,
    },
    /// Runs consistency suites on a diagram file or a directory of them.
    Check {
        path: PathBuf,
        /// A single suite to run.
        #[arg(long, value_enum)]
        suite: Option<SuiteArg>,
        /// Runs every suite.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        size: SizeOpt,
    },
    /// Emits the mirror diagram as an IKD document.
    Mirror { path: PathBuf },
}

#[derive(Copy, Clone, ValueEnum)]
enum FiltrationArg {
    #[value(alias = "F")]
    F,
    #[value(alias = "G")]
    G,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
enum SuiteArg {
    Mirror,
    Splitting,
    Support,
    Skein,
    Einfty,
    Moves,
}

const ALL_SUITES: [SuiteArg; 6] = [
    SuiteArg::Mirror,
    SuiteArg::Splitting,
    SuiteArg::Support,
    SuiteArg::Skein,
    SuiteArg::Einfty,
    SuiteArg::Moves,
];

impl SuiteArg {
    fn name(self) -> &'static str {
        match self {
            SuiteArg::Mirror => "mirror",
            SuiteArg::Splitting => "splitting",
            SuiteArg::Support => "support",
            SuiteArg::Skein => "skein",
            SuiteArg::Einfty => "einfty",
            SuiteArg::Moves => "moves",
        }
    }
}

#[derive(Serialize)]
struct OutputDocument {
    tool: &'static str,
    version: &'static str,
    digest: String,
    command: String,
    results: serde_json::Value,
    timing_ms: u128,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify_error(&e))
        }
    }
}

/// 3 for size-limit errors anywhere in the chain, otherwise 2.
fn classify_error(e: &anyhow::Error) -> u8 {
    fn invariant_is_limit(e: &InvariantError) -> bool {
        matches!(
            e,
            InvariantError::Complex(ComplexError::SizeLimit { .. })
                | InvariantError::Homology(HomologyError::Complex(ComplexError::SizeLimit {
                    ..
                }))
        )
    }
    for cause in e.chain() {
        let limit = if let Some(c) = cause.downcast_ref::<ComplexError>() {
            matches!(c, ComplexError::SizeLimit { .. })
        } else if let Some(c) = cause.downcast_ref::<HomologyError>() {
            matches!(c, HomologyError::Complex(ComplexError::SizeLimit { .. }))
        } else if let Some(c) = cause.downcast_ref::<InvariantError>() {
            invariant_is_limit(c)
        } else {
            false
        };
        if limit {
            return 3;
        }
    }
    2
}

fn load(path: &Path) -> Result<InvolutiveDiagram> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    parse_diagram(&text).with_context(|| format!("invalid diagram {}", path.display()))
}

fn digest(d: &InvolutiveDiagram) -> String {
    let mut hasher = Sha256::new();
    hasher.update(d.canonical_text().as_bytes());
    format!("sha256:{:x}", hasher.finalize())
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Compute { path, reduced, json, collapse_j, size } => {
            let max = size.resolve()?;
            let d = load(&path)?;
            let start = Instant::now();
            let table = kh_tau_limited(&d, max)?;
            let reduced_table =
                if reduced { Some(kh_tau_reduced_limited(&d, max)?) } else { None };
            emit_tables(&d, "compute", &table, reduced_table.as_ref(), json, collapse_j, start)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Reduced { path, json, collapse_j, size } => {
            let max = size.resolve()?;
            let d = load(&path)?;
            let start = Instant::now();
            let table = kh_tau_reduced_limited(&d, max)?;
            emit_tables(&d, "reduced", &table, None, json, collapse_j, start)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Pages { path, filtration, upto, json, size } => {
            let max = size.resolve()?;
            let d = load(&path)?;
            let start = Instant::now();
            cmd_pages(&d, filtration, upto, json, max, start)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Mirror { path } => {
            let d = load(&path)?;
            print!("{}", d.mirror().canonical_text());
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { path, suite, all, size } => {
            let max = size.resolve()?;
            let suites: Vec<SuiteArg> = if all {
                ALL_SUITES.to_vec()
            } else {
                vec![suite.ok_or_else(|| anyhow!("pass --suite <name> or --all"))?]
            };
            cmd_check(&path, &suites, max)
        }
    }
}

// ---------------------------------------------------------------------------
// compute / reduced / pages output.
// ---------------------------------------------------------------------------

fn table_json(t: &TriGradedTable) -> serde_json::Value {
    let map: BTreeMap<String, usize> = t
        .entries
        .iter()
        .map(|(&(i, j, k2), &dim)| (format!("({i}, {j}, {k2})"), dim))
        .collect();
    serde_json::to_value(map).expect("dimension tables serialize")
}

fn print_table_text(t: &TriGradedTable) {
    for (&(i, j, k2), &dim) in &t.entries {
        println!("({i}, {j}, {}): {dim}", HalfInt::from_twice(k2));
    }
    println!("total: {}", t.total());
}

/// ASCII (i, k) grid with the quantum grading summed out: rows are axis
/// weights from highest to lowest, columns cohomological degrees.
fn render_collapsed_grid(t: &TriGradedTable) -> String {
    let mut cells: BTreeMap<(i32, i32), usize> = BTreeMap::new();
    for (&(i, _, k2), &dim) in &t.entries {
        *cells.entry((k2, i)).or_insert(0) += dim;
    }
    let mut out = String::new();
    if cells.is_empty() {
        out.push_str("(empty table)\n");
        return out;
    }
    let k2s: Vec<i32> = cells.keys().map(|&(k2, _)| k2).collect();
    let is: Vec<i32> = cells.keys().map(|&(_, i)| i).collect();
    let (&k2_min, &k2_max) = (k2s.iter().min().unwrap(), k2s.iter().max().unwrap());
    let (&i_min, &i_max) = (is.iter().min().unwrap(), is.iter().max().unwrap());
    let step = if k2s.iter().all(|k2| (k2 - k2_min) % 2 == 0) { 2 } else { 1 };
    let label_width = (k2_min..=k2_max)
        .map(|k2| HalfInt::from_twice(k2).to_string().len())
        .max()
        .unwrap_or(1);
    write!(out, "{:>label_width$} |", "k\\i").unwrap();
    for i in i_min..=i_max {
        write!(out, "{i:>4}").unwrap();
    }
    out.push('\n');
    write!(out, "{:->label_width$}-+", "").unwrap();
    out.push_str(&"-".repeat(4 * (i_max - i_min + 1) as usize));
    out.push('\n');
    let mut k2 = k2_max;
    while k2 >= k2_min {
        write!(out, "{:>label_width$} |", HalfInt::from_twice(k2).to_string()).unwrap();
        for i in i_min..=i_max {
            match cells.get(&(k2, i)) {
                Some(&dim) => write!(out, "{dim:>4}").unwrap(),
                None => write!(out, "{:>4}", ".").unwrap(),
            }
        }
        out.push('\n');
        k2 -= step;
    }
    out
}

fn emit_tables(
    d: &InvolutiveDiagram,
    command: &str,
    table: &TriGradedTable,
    reduced: Option<&TriGradedTable>,
    json: bool,
    collapse_j: bool,
    start: Instant,
) -> Result<()> {
    if json {
        let mut results = serde_json::Map::new();
        let main_key = if command == "reduced" { "reduced" } else { "unreduced" };
        results.insert(main_key.into(), table_json(table));
        if let Some(r) = reduced {
            results.insert("reduced".into(), table_json(r));
        }
        let doc = OutputDocument {
            tool: "involutive-kh",
            version: env!("CARGO_PKG_VERSION"),
            digest: digest(d),
            command: command.into(),
            results: results.into(),
            timing_ms: start.elapsed().as_millis(),
        };
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(());
    }
    println!("# digest {}", digest(d));
    print_table_text(table);
    if let Some(r) = reduced {
        println!("# reduced");
        print_table_text(r);
    }
    if collapse_j {
        println!("# (i, k) grid, quantum grading summed out");
        print!("{}", render_collapsed_grid(table));
    }
    Ok(())
}

/// Dimensions of one page, keyed by (j, twice the filtration level).
type PageDims = BTreeMap<(i32, i32), usize>;

/// Page dimensions aggregated over the quantum-degree pieces.
fn aggregated_pages(
    d: &InvolutiveDiagram,
    kind: FiltrationKind,
    upto: u32,
    max: usize,
) -> Result<Vec<(u32, PageDims)>> {
    let pieces = build_complex_limited(d, max).map_err(InvariantError::from)?;
    let labels: Vec<u32> = match kind {
        FiltrationKind::F => (1..=upto).collect(),
        FiltrationKind::G => (2..=upto).collect(),
    };
    let mut out: Vec<(u32, PageDims)> =
        labels.iter().map(|&n| (n, BTreeMap::new())).collect();
    for piece in &pieces {
        if piece.dim() == 0 {
            continue;
        }
        let pages: Vec<Page> = match kind {
            FiltrationKind::F => f_pages(piece, upto),
            FiltrationKind::G => g_pages(piece, upto),
        };
        for (n, dims) in &mut out {
            if let Some(page) = pages.iter().find(|p| p.n == *n) {
                for (&level, &dim) in &page.dims {
                    *dims.entry((piece.j + piece.j_shift, level.twice())).or_insert(0) += dim;
                }
            }
        }
    }
    Ok(out)
}

fn cmd_pages(
    d: &InvolutiveDiagram,
    filtration: FiltrationArg,
    upto: u32,
    json: bool,
    max: usize,
    start: Instant,
) -> Result<()> {
    let (kind, kind_name) = match filtration {
        FiltrationArg::F => (FiltrationKind::F, "F"),
        FiltrationArg::G => (FiltrationKind::G, "G"),
    };
    let pages = aggregated_pages(d, kind, upto, max)?;
    if json {
        let pages_json: Vec<serde_json::Value> = pages
            .iter()
            .map(|(n, dims)| {
                let table: BTreeMap<String, usize> = dims
                    .iter()
                    .map(|(&(j, l2), &dim)| (format!("({j}, {l2})"), dim))
                    .collect();
                serde_json::json!({ "filtration": kind_name, "n": n, "dims": table })
            })
            .collect();
        let doc = OutputDocument {
            tool: "involutive-kh",
            version: env!("CARGO_PKG_VERSION"),
            digest: digest(d),
            command: "pages".into(),
            results: serde_json::json!({ "pages": pages_json }),
            timing_ms: start.elapsed().as_millis(),
        };
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(());
    }
    println!("# digest {}", digest(d));
    for (n, dims) in &pages {
        let total: usize = dims.values().sum();
        println!("E{n}[{kind_name}] total {total}");
        for (&(j, l2), &dim) in dims {
            let level = match kind {
                FiltrationKind::F => format!("i={}", l2 / 2),
                FiltrationKind::G => format!("k={}", HalfInt::from_twice(l2)),
            };
            println!("  j={j} {level}: {dim}");
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Check suites.
// ---------------------------------------------------------------------------

enum SuiteOutcome {
    Passed,
    Skipped(String),
    Failed(Vec<String>),
}

enum Job {
    Single(SuiteArg, PathBuf),
    Moves(PathBuf, PathBuf),
}

impl Job {
    fn label(&self) -> String {
        fn stem(p: &Path) -> String {
            p.file_stem().unwrap_or_default().to_string_lossy().into_owned()
        }
        match self {
            Job::Single(suite, path) => format!("{} {}", suite.name(), stem(path)),
            Job::Moves(a, b) => format!("moves {} ~ {}", stem(a), stem(b)),
        }
    }
}

fn gather_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .with_context(|| format!("cannot read directory {}", path.display()))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "ikd"))
            .collect();
        files.sort();
        if files.is_empty() {
            bail!("no .ikd files in {}", path.display());
        }
        Ok(files)
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

/// Pairs each move-variant file (stem ending in a move suffix) with its
/// base diagram when both are present.
fn move_pairs(files: &[PathBuf]) -> Vec<(PathBuf, PathBuf)> {
    const MOVE_SUFFIXES: [&str; 8] =
        ["_ir1", "_ir2", "_ir3", "_r1", "_r2", "_m1", "_m2", "_m3"];
    let by_stem: BTreeMap<String, &PathBuf> = files
        .iter()
        .map(|p| (p.file_stem().unwrap_or_default().to_string_lossy().into_owned(), p))
        .collect();
    let mut pairs = Vec::new();
    for (stem, path) in &by_stem {
        for suffix in MOVE_SUFFIXES {
            if let Some(base) = stem.strip_suffix(suffix) {
                if let Some(base_path) = by_stem.get(base) {
                    pairs.push(((*base_path).clone(), (*path).clone()));
                }
            }
        }
    }
    pairs
}

fn run_single_suite(suite: SuiteArg, path: &Path, max: usize) -> Result<SuiteOutcome> {
    let d = load(path)?;
    match suite {
        SuiteArg::Mirror => {
            let report = mirror_check_limited(&d, max)?;
            Ok(if report.passed() {
                SuiteOutcome::Passed
            } else {
                SuiteOutcome::Failed(
                    report
                        .mismatches
                        .iter()
                        .map(|&(i, j, k2)| format!("duality fails at ({i}, {j}, {k2}/2)"))
                        .collect(),
                )
            })
        }
        SuiteArg::Splitting => {
            if d.basepoint.is_none() {
                return Ok(SuiteOutcome::Skipped("no basepoint".into()));
            }
            let report = splitting_check_limited(&d, max).map_err(InvariantError::from)?;
            Ok(if report.passed() {
                SuiteOutcome::Passed
            } else {
                SuiteOutcome::Failed(report.failures)
            })
        }
        SuiteArg::Support => match support_lemma_check_limited(&d, max) {
            Ok(report) => Ok(if report.passed() {
                SuiteOutcome::Passed
            } else {
                SuiteOutcome::Failed(report.failures)
            }),
            Err(InvariantError::NotStronglyInvertible) => {
                Ok(SuiteOutcome::Skipped("not strongly invertible".into()))
            }
            Err(InvariantError::Homology(HomologyError::MissingBasepoint)) => {
                Ok(SuiteOutcome::Skipped("no basepoint".into()))
            }
            Err(e) => Err(e.into()),
        },
        SuiteArg::Skein => {
            if !d.crossings.iter().all(|c| c.is_positive()) {
                return Ok(SuiteOutcome::Skipped("not a positive diagram".into()));
            }
            let orbits: Vec<usize> =
                (0..d.n_crossings()).filter(|&c| d.tau_crossings[c] > c).collect();
            if orbits.is_empty() {
                return Ok(SuiteOutcome::Skipped("no off-axis crossing pairs".into()));
            }
            let mut failures = Vec::new();
            for c in orbits {
                let report = skein_check_limited(&d, c, max)?;
                for f in report.failures {
                    failures.push(format!("pair ({}, {}): {f}", report.pair.0, report.pair.1));
                }
            }
            Ok(if failures.is_empty() {
                SuiteOutcome::Passed
            } else {
                SuiteOutcome::Failed(failures)
            })
        }
        SuiteArg::Einfty => {
            let pieces = build_complex_limited(&d, max).map_err(InvariantError::from)?;
            let mut failures = Vec::new();
            for piece in &pieces {
                let report = e_infinity_check_both(piece);
                for m in report.mismatches {
                    failures.push(format!("j = {}: {m:?}", piece.j + piece.j_shift));
                }
            }
            Ok(if failures.is_empty() {
                SuiteOutcome::Passed
            } else {
                SuiteOutcome::Failed(failures)
            })
        }
        SuiteArg::Moves => unreachable!("moves jobs are built pairwise"),
    }
}

fn run_job(job: &Job, max: usize) -> Result<SuiteOutcome> {
    match job {
        Job::Single(suite, path) => run_single_suite(*suite, path, max),
        Job::Moves(a, b) => {
            let d1 = load(a)?;
            let d2 = load(b)?;
            let report = move_invariance_check_limited(&d1, &d2, max)?;
            Ok(if report.passed() {
                SuiteOutcome::Passed
            } else {
                SuiteOutcome::Failed(report.details)
            })
        }
    }
}

fn cmd_check(path: &Path, suites: &[SuiteArg], max: usize) -> Result<ExitCode> {
    let files = gather_files(path)?;
    let mut jobs = Vec::new();
    for &suite in suites {
        if suite == SuiteArg::Moves {
            for (a, b) in move_pairs(&files) {
                jobs.push(Job::Moves(a, b));
            }
        } else {
            for file in &files {
                jobs.push(Job::Single(suite, file.clone()));
            }
        }
    }
    let results: Vec<(String, Result<SuiteOutcome>)> =
        jobs.par_iter().map(|job| (job.label(), run_job(job, max))).collect();

    let (mut failed, mut errored) = (0usize, None);
    for (label, result) in &results {
        match result {
            Ok(SuiteOutcome::Passed) => eprintln!("ok      {label}"),
            Ok(SuiteOutcome::Skipped(why)) => eprintln!("skip    {label} ({why})"),
            Ok(SuiteOutcome::Failed(details)) => {
                failed += 1;
                eprintln!("FAIL    {label}");
                for d in details {
                    eprintln!("        {d}");
                }
            }
            Err(e) => {
                eprintln!("ERROR   {label}: {e:#}");
                let code = classify_error(e);
                errored = Some(errored.map_or(code, |prev: u8| prev.min(code)));
            }
        }
    }
    eprintln!(
        "{} job(s): {} failed, {} errored",
        results.len(),
        failed,
        results.iter().filter(|(_, r)| r.is_err()).count()
    );
    if let Some(code) = errored {
        return Ok(ExitCode::from(code));
    }
    Ok(if failed > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}
