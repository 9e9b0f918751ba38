//! Command-line driver for the bounded-integer SMT solver.
//!
//! Subcommands: `solve` (decide one file), `preprocess` (emit the skeleton
//! CNF with symmetry breaking clauses as DIMACS, and the input with
//! theory-level predicates conjoined as SMT-LIB), `syms` (report detected
//! symmetries), `oracle` (brute-force reference decision), `bench` (run a
//! corpus under several modes and tabulate), `gen` (write a seeded
//! corpus).
//!
//! Exit codes: 0 for a decided answer (or a completed report), 2 for
//! unknown, 1 for usage, parse, or I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use symsmt::ast::{Formula, Script};
use symsmt::deadline::Deadline;
use symsmt::dimacs::write_dimacs;
use symsmt::gen::{generate_corpus, Profile};
use symsmt::normalize::normalize_script;
use symsmt::oracle::brute_force;
use symsmt::parser::parse_script;
use symsmt::printer::serialize;
use symsmt::sbp::{build_restricted_sbp, build_theory_sbp, order_variables, OrderingMode};
use symsmt::skeleton::{extract_skeleton, to_cnf};
use symsmt::solver::{solve, SolveConfig, SolveMode, SolveOutcome, SolveResult};
use symsmt::symgraph::{detect_symmetries, SymmetryReport};

#[derive(Parser)]
#[command(
    name = "symsmt",
    version,
    about = "Lazy SMT solver for bounded integer arithmetic with symmetry breaking"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide one problem file.
    Solve(SolveArgs),
    /// Emit the skeleton CNF (DIMACS) and the problem with theory-level
    /// symmetry breaking predicates conjoined (SMT-LIB).
    Preprocess(PreprocessArgs),
    /// Detect and print the problem's symmetries.
    Syms(SymsArgs),
    /// Brute-force reference decision over the bounded domain.
    Oracle(OracleArgs),
    /// Solve a corpus under several modes and tabulate the results.
    Bench(BenchArgs),
    /// Generate a seeded instance corpus.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Plain,
    Sym,
    Hybrid,
}

impl From<ModeArg> for SolveMode {
    fn from(m: ModeArg) -> SolveMode {
        match m {
            ModeArg::Plain => SolveMode::Plain,
            ModeArg::Sym => SolveMode::Sym,
            ModeArg::Hybrid => SolveMode::Hybrid,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderingArg {
    Heuristic,
    Index,
}

impl From<OrderingArg> for OrderingMode {
    fn from(o: OrderingArg) -> OrderingMode {
        match o {
            OrderingArg::Heuristic => OrderingMode::Heuristic,
            OrderingArg::Index => OrderingMode::Index,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum HybridOrderArg {
    SymFirst,
    PlainFirst,
}

impl From<HybridOrderArg> for symsmt::solver::HybridOrder {
    fn from(h: HybridOrderArg) -> symsmt::solver::HybridOrder {
        match h {
            HybridOrderArg::SymFirst => symsmt::solver::HybridOrder::SymFirst,
            HybridOrderArg::PlainFirst => symsmt::solver::HybridOrder::PlainFirst,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file (SMT-LIB subset).
    file: PathBuf,
    #[arg(long, value_enum, default_value = "sym")]
    mode: ModeArg,
    /// Domain half-width B: variables range over [-B, B].
    #[arg(long, default_value_t = 32)]
    bound: i64,
    /// Truncation cutoff for symmetry breaking predicates.
    #[arg(long, default_value_t = 16)]
    k: usize,
    /// Wall-clock budget of the hybrid's first phase (e.g. 500ms, 2s).
    #[arg(long = "t-budget", value_parser = parse_duration)]
    t_budget: Option<Duration>,
    #[arg(long = "hybrid-order", value_enum, default_value = "sym-first")]
    hybrid_order: HybridOrderArg,
    #[arg(long, value_enum, default_value = "heuristic")]
    ordering: OrderingArg,
    /// Total wall-clock budget (e.g. 500ms, 5s, 2m).
    #[arg(long, value_parser = parse_duration)]
    timeout: Option<Duration>,
    /// Greedily shrink theory conflict clauses.
    #[arg(long = "shrink-cores")]
    shrink_cores: bool,
    /// Write the full result (schema 1) as JSON to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the problem's skeleton CNF as DIMACS to this path.
    #[arg(long)]
    dimacs: Option<PathBuf>,
}

#[derive(Args)]
struct PreprocessArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 16)]
    k: usize,
    #[arg(long, value_enum, default_value = "heuristic")]
    ordering: OrderingArg,
    /// Write the skeleton CNF with restricted symmetry breaking clauses.
    #[arg(long)]
    dimacs: Option<PathBuf>,
    /// Write the input with theory-level predicates conjoined; defaults to
    /// standard output when neither --dimacs nor --smt2 is given.
    #[arg(long)]
    smt2: Option<PathBuf>,
}

#[derive(Args)]
struct SymsArgs {
    file: PathBuf,
    /// Write the report as JSON to this path.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 32)]
    bound: i64,
    /// Collect up to this many models (reported via --json).
    #[arg(long, default_value_t = 1)]
    models: usize,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Corpus: a directory of .smt2 files or a single file.
    corpus: PathBuf,
    /// Comma-separated modes to run.
    #[arg(long, default_value = "plain,sym,hybrid")]
    modes: String,
    #[arg(long, default_value_t = 32)]
    bound: i64,
    /// Per-instance wall-clock budget.
    #[arg(long, value_parser = parse_duration, default_value = "5s")]
    timeout: Duration,
    /// Write CSV rows here instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the full report (rows + summary + non-overlap matrix) here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_profile, default_value = "mixed")]
    profile: Profile,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory the instance files are written into.
    #[arg(long)]
    out: PathBuf,
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    s.parse()
}

/// Accepts `500ms`, `5s`, `2m`, or a bare number of seconds.
fn parse_duration(s: &str) -> Result<Duration, String> {
    let s = s.trim();
    let (digits, unit_ms) = if let Some(v) = s.strip_suffix("ms") {
        (v, 1u64)
    } else if let Some(v) = s.strip_suffix('s') {
        (v, 1_000)
    } else if let Some(v) = s.strip_suffix('m') {
        (v, 60_000)
    } else {
        (s, 1_000)
    };
    let n: u64 = digits
        .trim()
        .parse()
        .map_err(|_| format!("invalid duration '{s}' (expected e.g. 500ms, 5s, 2m)"))?;
    Ok(Duration::from_millis(n.saturating_mul(unit_ms)))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Preprocess(args) => cmd_preprocess(args),
        Cmd::Syms(args) => cmd_syms(args),
        Cmd::Oracle(args) => cmd_oracle(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Gen(args) => cmd_gen(args),
    }
}

fn load_script(path: &Path) -> Result<Script> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let script = parse_script(&text, path.to_str())
        .with_context(|| format!("cannot parse {}", path.display()))?;
    Ok(script)
}

fn detect(script: &Script) -> (SymmetryReport, symsmt::skeleton::Cnf, symsmt::skeleton::AtomMap) {
    let normalized = normalize_script(script);
    let (psi, atoms) = extract_skeleton(&normalized);
    let cnf = to_cnf(&psi, atoms.len() as u32);
    let report = detect_symmetries(&normalized, &psi, &atoms, 8, 1_000_000, &Deadline::none());
    (report, cnf, atoms)
}

fn first_line(outcome: &SolveOutcome) -> &'static str {
    match outcome {
        SolveOutcome::Sat(_) => "sat",
        SolveOutcome::UnsatBounded => "unsat",
        SolveOutcome::Unknown(_) => "unknown",
    }
}

fn result_json(result: &SolveResult) -> Value {
    let model = match &result.outcome {
        SolveOutcome::Sat(m) => json!(m.values),
        _ => Value::Null,
    };
    let mut obj = json!({
        "schema": 1,
        "status": result.outcome.status_str(),
        "model": model,
        "stats": result.stats,
        "config_echo": result.config,
    });
    if let SolveOutcome::Unknown(reason) = &result.outcome {
        obj["reason"] = json!(reason);
    }
    obj
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let script = load_script(&args.file)?;
    let config = SolveConfig {
        mode: args.mode.into(),
        bound: args.bound,
        truncation_k: args.k,
        ordering: args.ordering.into(),
        hybrid_order: args.hybrid_order.into(),
        hybrid_phase_budget: args.t_budget,
        timeout: args.timeout,
        shrink_cores: args.shrink_cores,
        ..SolveConfig::default()
    };
    let result = solve(&script, &config);
    println!("{}", first_line(&result.outcome));
    if let Some(path) = &args.dimacs {
        let normalized = normalize_script(&script);
        let (psi, atoms) = extract_skeleton(&normalized);
        let cnf = to_cnf(&psi, atoms.len() as u32);
        fs::write(path, write_dimacs(&cnf, Some(&atoms)))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &args.json {
        write_json(path, &result_json(&result))?;
    }
    Ok(if result.outcome.is_decided() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_preprocess(args: PreprocessArgs) -> Result<ExitCode> {
    let script = load_script(&args.file)?;
    let (report, mut cnf, atoms) = detect(&script);

    let ordering = order_variables(&cnf, args.ordering.into());
    for theta in &report.generators {
        build_restricted_sbp(theta, &ordering, args.k, &mut cnf);
    }
    if let Some(path) = &args.dimacs {
        fs::write(path, write_dimacs(&cnf, Some(&atoms)))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }

    let mut conjuncts = vec![script.assertion.clone()];
    for theta in &report.generators {
        conjuncts.push(build_theory_sbp(theta, &script.decls)?);
    }
    let mut strengthened = Script::new(script.decls.clone(), Formula::And(conjuncts));
    strengthened.meta.logic = script.meta.logic.clone();
    let text = serialize(&strengthened);
    match &args.smt2 {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None if args.dimacs.is_none() => print!("{text}"),
        None => {}
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_syms(args: SymsArgs) -> Result<ExitCode> {
    let script = load_script(&args.file)?;
    let (report, _, _) = detect(&script);
    let cycles: Vec<String> = report.generators.iter().map(|g| g.cycles()).collect();
    for c in &cycles {
        println!("{c}");
    }
    let summary = json!({
        "schema": 1,
        "generators": cycles,
        "accepted": report.generators.len(),
        "rejected": report.rejected,
        "candidates": report.candidates,
        "complete": report.complete,
        "graph_vertices": report.graph_vertices,
        "nodes_used": report.nodes_used,
    });
    println!("{summary}");
    if let Some(path) = &args.json {
        write_json(path, &summary)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(args: OracleArgs) -> Result<ExitCode> {
    let script = load_script(&args.file)?;
    let outcome = brute_force(&script, args.bound, args.models.max(1))
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let (status, models, complete) = match &outcome {
        symsmt::oracle::BruteForceResult::Sat { models, complete } => {
            ("sat", models.clone(), *complete)
        }
        symsmt::oracle::BruteForceResult::UnsatBounded => ("unsat", Vec::new(), true),
    };
    println!("{status}");
    if let Some(path) = &args.json {
        let value = json!({
            "schema": 1,
            "status": if status == "sat" { "sat" } else { "unsat(bounded)" },
            "models": models.iter().map(|m| json!(m.values)).collect::<Vec<_>>(),
            "complete": complete,
        });
        write_json(path, &value)?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct BenchRow {
    file: String,
    mode: &'static str,
    status: &'static str,
    wall_ms: u64,
    skeleton_models_tried: u64,
    conflict_clauses_added: u64,
    symmetries_accepted: usize,
    sbp_clauses_added: usize,
}

#[derive(Serialize)]
struct NonOverlapCell {
    solved_by: &'static str,
    not_by: &'static str,
    count: usize,
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let modes: Vec<SolveMode> = args
        .modes
        .split(',')
        .map(|m| match m.trim() {
            "plain" => Ok(SolveMode::Plain),
            "sym" => Ok(SolveMode::Sym),
            "hybrid" => Ok(SolveMode::Hybrid),
            other => Err(anyhow::anyhow!("unknown mode '{other}'")),
        })
        .collect::<Result<_>>()?;
    if modes.is_empty() {
        bail!("no modes given");
    }

    let mut files: Vec<PathBuf> = if args.corpus.is_dir() {
        fs::read_dir(&args.corpus)
            .with_context(|| format!("cannot read {}", args.corpus.display()))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "smt2"))
            .collect()
    } else {
        vec![args.corpus.clone()]
    };
    files.sort();
    if files.is_empty() {
        bail!("no .smt2 files in {}", args.corpus.display());
    }

    let mut rows: Vec<BenchRow> = Vec::new();
    // decided[m][i] - whether mode m decided file i.
    let mut decided = vec![vec![false; files.len()]; modes.len()];
    for (file_idx, path) in files.iter().enumerate() {
        let script = load_script(path)?;
        for (mode_idx, &mode) in modes.iter().enumerate() {
            let config = SolveConfig {
                mode,
                bound: args.bound,
                timeout: Some(args.timeout),
                ..SolveConfig::default()
            };
            let started = Instant::now();
            let result = solve(&script, &config);
            decided[mode_idx][file_idx] = result.outcome.is_decided();
            rows.push(BenchRow {
                file: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
                mode: mode.name(),
                status: result.outcome.status_str(),
                wall_ms: started.elapsed().as_millis() as u64,
                skeleton_models_tried: result.stats.skeleton_models_tried,
                conflict_clauses_added: result.stats.conflict_clauses_added,
                symmetries_accepted: result.stats.symmetries_accepted,
                sbp_clauses_added: result.stats.sbp_clauses_added,
            });
        }
    }

    let solved: Vec<(&'static str, usize)> = modes
        .iter()
        .enumerate()
        .map(|(i, m)| (m.name(), decided[i].iter().filter(|&&d| d).count()))
        .collect();
    let timeouts = rows.iter().filter(|r| r.status == "unknown").count();
    let mut non_overlap = Vec::new();
    for (i, &a) in modes.iter().enumerate() {
        for (j, &b) in modes.iter().enumerate() {
            if i == j {
                continue;
            }
            let count = (0..files.len()).filter(|&f| decided[i][f] && !decided[j][f]).count();
            non_overlap.push(NonOverlapCell { solved_by: a.name(), not_by: b.name(), count });
        }
    }

    let mut csv = String::from(
        "file,mode,status,wall_ms,skeleton_models_tried,conflict_clauses_added,symmetries_accepted,sbp_clauses_added\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.file,
            r.mode,
            r.status,
            r.wall_ms,
            r.skeleton_models_tried,
            r.conflict_clauses_added,
            r.symmetries_accepted,
            r.sbp_clauses_added
        ));
    }
    match &args.csv {
        Some(path) => fs::write(path, &csv)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{csv}"),
    }

    if let Some(path) = &args.json {
        let value = json!({
            "schema": 1,
            "rows": rows,
            "summary": {
                "instances": files.len(),
                "solved": solved.iter().copied().collect::<std::collections::BTreeMap<_, _>>(),
                "timeouts": timeouts,
                "non_overlap": non_overlap,
            },
        });
        write_json(path, &value)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    for inst in generate_corpus(args.seed, args.count, args.profile) {
        let path = args.out.join(&inst.name);
        fs::write(&path, &inst.text)
            .with_context(|| format!("cannot write {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn durations_parse_with_all_suffixes() {
        assert_eq!(parse_duration("500ms").unwrap(), Duration::from_millis(500));
        assert_eq!(parse_duration("5s").unwrap(), Duration::from_secs(5));
        assert_eq!(parse_duration("2m").unwrap(), Duration::from_secs(120));
        assert_eq!(parse_duration("7").unwrap(), Duration::from_secs(7));
        assert_eq!(parse_duration("0ms").unwrap(), Duration::ZERO);
        assert!(parse_duration("five").is_err());
        assert!(parse_duration("5h").is_err());
        assert!(parse_duration("").is_err());
    }
}
