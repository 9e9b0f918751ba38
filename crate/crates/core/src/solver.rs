//! End-to-end decision procedures over bounded integer domains.
//!
//! Three modes share one lazy core loop (propositional search on the
//! skeleton, consistency check of the induced literal conjunction, conflict
//! clause on failure):
//!
//! * **plain** — the bare loop;
//! * **sym** — detects joint skeleton/theory symmetries first and conjoins
//!   a restricted symmetry breaking predicate per accepted generator before
//!   searching;
//! * **hybrid** — runs one mode under a phase budget, then falls back to
//!   the other with a fresh solver if the first phase ran out of time.
//!
//! A `Sat` answer is always re-checked against the *original* assertion
//! with the independent evaluator before being returned, so no bug in the
//! skeleton, SAT, symmetry, or theory machinery can surface as a wrong
//! model. `UnsatBounded` means "no model with every variable in [-B, B]":
//! sound for the unbounded reading of a `Sat` answer, deliberately silent
//! about values outside the box.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::ast::Script;
use crate::deadline::Deadline;
use crate::eval::eval_with_env;
use crate::normalize::normalize_script;
use crate::sat::{RestartPolicy, SatOutcome, SatSolver, SatStats};
use crate::sbp::{build_restricted_sbp, order_variables, OrderingMode};
use crate::skeleton::{
    assignment_to_literal_conjunction, extract_skeleton, to_cnf, Lit, SkeletonAssignment,
    SkeletonVar,
};
use crate::symgraph::detect_symmetries;
use crate::theory::{
    check_consistency, conflict_clause, shrink_core, ConsistencyResult, DomainBound, TheoryModel,
};

pub const DEFAULT_BOUND: DomainBound = 32;
pub const DEFAULT_TRUNCATION: usize = 16;
pub const DEFAULT_GENERATOR_LIMIT: usize = 8;
pub const DEFAULT_AUTOMORPHISM_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Plain,
    Sym,
    Hybrid,
}

impl SolveMode {
    pub fn name(self) -> &'static str {
        match self {
            SolveMode::Plain => "plain",
            SolveMode::Sym => "sym",
            SolveMode::Hybrid => "hybrid",
        }
    }
}

/// Which mode the hybrid portfolio tries under the phase budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HybridOrder {
    SymFirst,
    PlainFirst,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveConfig {
    pub mode: SolveMode,
    /// Half-width of the variable domain `[-B, B]`.
    pub bound: DomainBound,
    /// Symmetry breaking predicates keep at most this many support
    /// variables per generator.
    pub truncation_k: usize,
    pub ordering: OrderingMode,
    /// Stop symmetry detection after accepting this many generators.
    pub generator_limit: usize,
    /// Backtracking-node budget for the automorphism search.
    pub automorphism_budget: u64,
    pub hybrid_order: HybridOrder,
    /// Wall-clock share of the first hybrid phase. Unset means a quarter
    /// of the timeout (no cut when there is no timeout either).
    pub hybrid_phase_budget: Option<Duration>,
    /// Total wall-clock budget; unset means run to completion.
    pub timeout: Option<Duration>,
    /// Greedily shrink theory conflicts instead of negating the whole
    /// skeleton assignment.
    pub shrink_cores: bool,
    /// Reuse phase-1 conflict clauses in the hybrid's second phase.
    pub carry_learned: bool,
    pub restarts: RestartPolicy,
}

impl Default for SolveConfig {
    fn default() -> SolveConfig {
        SolveConfig {
            mode: SolveMode::Sym,
            bound: DEFAULT_BOUND,
            truncation_k: DEFAULT_TRUNCATION,
            ordering: OrderingMode::Heuristic,
            generator_limit: DEFAULT_GENERATOR_LIMIT,
            automorphism_budget: DEFAULT_AUTOMORPHISM_BUDGET,
            hybrid_order: HybridOrder::SymFirst,
            hybrid_phase_budget: None,
            timeout: None,
            shrink_cores: false,
            carry_learned: false,
            restarts: RestartPolicy::Never,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    /// A model over every declared variable, re-verified by independent
    /// evaluation of the original assertion.
    Sat(TheoryModel),
    /// No model with all variables in `[-B, B]`.
    UnsatBounded,
    /// Ran out of time (or an internal check failed); the reason says
    /// which.
    Unknown(String),
}

impl SolveOutcome {
    pub fn status_str(&self) -> &'static str {
        match self {
            SolveOutcome::Sat(_) => "sat",
            SolveOutcome::UnsatBounded => "unsat(bounded)",
            SolveOutcome::Unknown(_) => "unknown",
        }
    }

    pub fn is_decided(&self) -> bool {
        !matches!(self, SolveOutcome::Unknown(_))
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SolveStats {
    pub skeleton_models_tried: u64,
    pub conflict_clauses_added: u64,
    pub symmetry_candidates: usize,
    pub symmetries_accepted: usize,
    pub symmetries_rejected: usize,
    pub symmetry_search_complete: bool,
    pub sbp_clauses_added: usize,
    pub sbp_aux_vars_added: usize,
    pub detection_millis: u64,
    pub search_millis: u64,
    pub total_millis: u64,
    pub sat: SatStats,
    /// Per-phase breakdown; populated by the hybrid mode only.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub phases: Vec<PhaseStats>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseStats {
    pub mode: &'static str,
    pub status: &'static str,
    pub stats: SolveStats,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub outcome: SolveOutcome,
    pub stats: SolveStats,
    pub config: SolveConfig,
}

/// Decides the script's assertion over `[-B, B]^n` in the configured mode.
pub fn solve(script: &Script, config: &SolveConfig) -> SolveResult {
    match config.mode {
        SolveMode::Plain => solve_plain(script, config),
        SolveMode::Sym => solve_sym(script, config),
        SolveMode::Hybrid => solve_hybrid(script, config),
    }
}

pub fn solve_plain(script: &Script, config: &SolveConfig) -> SolveResult {
    solve_single(script, config, false, SolveMode::Plain)
}

pub fn solve_sym(script: &Script, config: &SolveConfig) -> SolveResult {
    solve_single(script, config, true, SolveMode::Sym)
}

fn solve_single(
    script: &Script,
    config: &SolveConfig,
    with_sbp: bool,
    mode: SolveMode,
) -> SolveResult {
    let normalized = normalize_script(script);
    let deadline = deadline_of(config.timeout);
    let run = run_phase(script, &normalized, with_sbp, config, &deadline, &[]);
    let mut config = config.clone();
    config.mode = mode;
    SolveResult { outcome: run.outcome, stats: run.stats, config }
}

/// Phase 1 under the phase budget, phase 2 fresh under the remaining
/// overall budget if phase 1 came back `Unknown`. Symmetry detection time
/// counts against the phase that pays for it.
pub fn solve_hybrid(script: &Script, config: &SolveConfig) -> SolveResult {
    let start = Instant::now();
    let normalized = normalize_script(script);
    let overall = deadline_of(config.timeout);
    let phase_budget = config.hybrid_phase_budget.or(config.timeout.map(|t| t / 4));
    let phase1_deadline = match phase_budget {
        Some(b) => Deadline::after(b).min(overall),
        None => overall,
    };
    let (first_sbp, second_sbp) = match config.hybrid_order {
        HybridOrder::SymFirst => (true, false),
        HybridOrder::PlainFirst => (false, true),
    };

    let first = run_phase(script, &normalized, first_sbp, config, &phase1_deadline, &[]);
    let mut phases = vec![PhaseStats {
        mode: phase_name(first_sbp),
        status: first.outcome.status_str(),
        stats: first.stats,
    }];
    let mut outcome = first.outcome;
    if !outcome.is_decided() {
        let seed = if config.carry_learned { first.learned } else { Vec::new() };
        let second = run_phase(script, &normalized, second_sbp, config, &overall, &seed);
        phases.push(PhaseStats {
            mode: phase_name(second_sbp),
            status: second.outcome.status_str(),
            stats: second.stats,
        });
        outcome = second.outcome;
    }

    let mut stats = SolveStats::default();
    for phase in &phases {
        let s = &phase.stats;
        stats.skeleton_models_tried += s.skeleton_models_tried;
        stats.conflict_clauses_added += s.conflict_clauses_added;
        stats.symmetry_candidates += s.symmetry_candidates;
        stats.symmetries_accepted += s.symmetries_accepted;
        stats.symmetries_rejected += s.symmetries_rejected;
        stats.symmetry_search_complete |= s.symmetry_search_complete;
        stats.sbp_clauses_added += s.sbp_clauses_added;
        stats.sbp_aux_vars_added += s.sbp_aux_vars_added;
        stats.detection_millis += s.detection_millis;
        stats.search_millis += s.search_millis;
        stats.sat.decisions += s.sat.decisions;
        stats.sat.conflicts += s.sat.conflicts;
        stats.sat.propagations += s.sat.propagations;
        stats.sat.learned_clauses += s.sat.learned_clauses;
        stats.sat.restarts += s.sat.restarts;
    }
    stats.total_millis = millis(start.elapsed());
    stats.phases = phases;

    let mut config = config.clone();
    config.mode = SolveMode::Hybrid;
    SolveResult { outcome, stats, config }
}

fn phase_name(with_sbp: bool) -> &'static str {
    if with_sbp {
        SolveMode::Sym.name()
    } else {
        SolveMode::Plain.name()
    }
}

fn deadline_of(timeout: Option<Duration>) -> Deadline {
    match timeout {
        Some(d) => Deadline::after(d),
        None => Deadline::none(),
    }
}

fn millis(d: Duration) -> u64 {
    d.as_millis().min(u128::from(u64::MAX)) as u64
}

struct PhaseRun {
    outcome: SolveOutcome,
    stats: SolveStats,
    /// Theory conflict clauses added this phase; valid in any mode because
    /// they range over skeleton variables only.
    learned: Vec<Vec<Lit>>,
}

fn run_phase(
    original: &Script,
    normalized: &Script,
    with_sbp: bool,
    config: &SolveConfig,
    deadline: &Deadline,
    seed_clauses: &[Vec<Lit>],
) -> PhaseRun {
    let phase_start = Instant::now();
    let mut stats = SolveStats::default();
    let (psi, atoms) = extract_skeleton(normalized);
    let mut cnf = to_cnf(&psi, atoms.len() as u32);

    if with_sbp {
        let detection_start = Instant::now();
        let report = detect_symmetries(
            normalized,
            &psi,
            &atoms,
            config.generator_limit,
            config.automorphism_budget,
            deadline,
        );
        stats.symmetry_candidates = report.candidates;
        stats.symmetries_accepted = report.generators.len();
        stats.symmetries_rejected = report.rejected;
        stats.symmetry_search_complete = report.complete;
        // One ordering, fixed before any SBP extends the CNF, shared by
        // every generator so all predicates agree on the lex order.
        let ordering = order_variables(&cnf, config.ordering);
        for theta in &report.generators {
            let sbp = build_restricted_sbp(theta, &ordering, config.truncation_k, &mut cnf);
            stats.sbp_clauses_added += sbp.clauses.len();
            stats.sbp_aux_vars_added += sbp.new_aux_vars.len();
        }
        stats.detection_millis = millis(detection_start.elapsed());
    }

    let mut solver = SatSolver::from_cnf(&cnf);
    solver.set_restart_policy(config.restarts);
    for clause in seed_clauses {
        solver.add_clause(clause);
    }

    let mut learned: Vec<Vec<Lit>> = Vec::new();
    let outcome = loop {
        if deadline.expired() {
            break SolveOutcome::Unknown("timeout before propositional search".into());
        }
        match solver.solve(deadline) {
            SatOutcome::Sat(model) => {
                stats.skeleton_models_tried += 1;
                let x = SkeletonAssignment::from_cnf_model(&model, cnf.num_skeleton_vars);
                let literals = assignment_to_literal_conjunction(&x, &atoms);
                match check_consistency(&literals, config.bound, deadline) {
                    ConsistencyResult::Consistent(partial) => {
                        break verified_sat(original, partial);
                    }
                    ConsistencyResult::Inconsistent { core } => {
                        let core = if config.shrink_cores {
                            shrink_core(&literals, config.bound, deadline)
                        } else {
                            core
                        };
                        let vars: Vec<SkeletonVar> =
                            core.iter().map(|&i| SkeletonVar(i as u32)).collect();
                        let clause = conflict_clause(&x, &vars);
                        stats.conflict_clauses_added += 1;
                        learned.push(clause.clone());
                        solver.add_clause(&clause);
                    }
                    ConsistencyResult::Cancelled => {
                        break SolveOutcome::Unknown("timeout in theory check".into());
                    }
                }
            }
            SatOutcome::Unsat => break SolveOutcome::UnsatBounded,
            SatOutcome::Cancelled => {
                break SolveOutcome::Unknown("timeout in propositional search".into());
            }
        }
    };

    stats.sat = solver.stats();
    stats.total_millis = millis(phase_start.elapsed());
    stats.search_millis = stats.total_millis.saturating_sub(stats.detection_millis);
    PhaseRun { outcome, stats, learned }
}

/// Extends the checker's model to every declared integer variable
/// (variables absent from all atoms get 0, which lies in any domain) and
/// re-evaluates the original assertion with the independent evaluator. A
/// failed check is reported as `Unknown`, never as a wrong `Sat`.
fn verified_sat(original: &Script, partial: TheoryModel) -> SolveOutcome {
    let mut model = partial;
    for name in original.int_vars() {
        model.values.entry(name).or_insert(0);
    }
    let env: HashMap<String, i64> =
        model.values.iter().map(|(k, &v)| (k.clone(), v)).collect();
    if eval_with_env(&original.assertion, &env) {
        SolveOutcome::Sat(model)
    } else {
        debug_assert!(false, "candidate model failed independent re-evaluation");
        SolveOutcome::Unknown("candidate model failed independent re-evaluation".into())
    }
}
