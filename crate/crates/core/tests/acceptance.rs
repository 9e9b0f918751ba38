//! Acceptance gate: ten end-to-end criteria, one test (and one printed
//! PASS/FAIL line) each. Run with
//!
//! ```text
//! cargo test --test acceptance -- --nocapture
//! ```
//!
//! Every tolerance is pinned in the assertion itself; a failed criterion
//! panics with the measured numbers.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use symsmt::ast::Script;
use symsmt::deadline::Deadline;
use symsmt::eval::eval_with_env;
use symsmt::gen::{generate_corpus, generate_theory_symmetric_corpus, Profile};
use symsmt::normalize::normalize_script;
use symsmt::oracle::{
    apply_to_model, brute_force, enumerate_skeleton_models, orbit_coverage,
};
use symsmt::parser::parse_script;
use symsmt::sat::{SatOutcome, SatSolver};
use symsmt::sbp::{
    build_restricted_sbp, build_theory_sbp, lex_le, order_variables, OrderingMode,
};
use symsmt::skeleton::{extract_skeleton, to_cnf, Cnf, Lit, SkeletonAssignment};
use symsmt::solver::{
    solve, solve_plain, solve_sym, SolveConfig, SolveMode, SolveOutcome,
};
use symsmt::symgraph::{
    brute_force_automorphisms, detect_symmetries, find_automorphism_generators,
    generated_group, ColoredGraph, SymmetryReport, VertexOrigin,
};

const SWAP_INSTANCE: &str = "
    (set-logic QF_NIA)
    (declare-fun x () Int)
    (declare-fun y () Int)
    (declare-fun z () Int)
    (assert (and (or (> z 2) (< x 8))
                 (or (> z 2) (< y 8))
                 (or (< (+ x y) 10) (> (+ x y) 3))))
    (check-sat)";

const CYCLIC_IMPLICATION: &str = "
    (set-logic QF_NIA)
    (declare-fun x () Int)
    (declare-fun y () Int)
    (declare-fun z () Int)
    (assert (=> (and (> (+ x y) 2) (> (+ y z) 2) (> (+ z x) 2))
                (> (+ x y z) 6)))
    (check-sat)";

fn pass(criterion: u32, detail: &str) {
    println!("ACCEPTANCE criterion {criterion:02}: PASS - {detail}");
}

fn script(text: &str) -> Script {
    parse_script(text, None).unwrap()
}

fn config(mode: SolveMode, bound: i64) -> SolveConfig {
    SolveConfig { mode, bound, ..SolveConfig::default() }
}

fn detect(s: &Script) -> (SymmetryReport, Cnf, Script) {
    let normalized = normalize_script(s);
    let (psi, atoms) = extract_skeleton(&normalized);
    let cnf = to_cnf(&psi, atoms.len() as u32);
    let report = detect_symmetries(&normalized, &psi, &atoms, 8, 1_000_000, &Deadline::none());
    (report, cnf, normalized)
}

fn oracle_is_sat(s: &Script, bound: i64) -> bool {
    brute_force(s, bound, 1).unwrap().is_sat()
}

fn solved_sat(outcome: &SolveOutcome) -> bool {
    match outcome {
        SolveOutcome::Sat(_) => true,
        SolveOutcome::UnsatBounded => false,
        SolveOutcome::Unknown(reason) => panic!("undecided outcome: {reason}"),
    }
}

#[test]
fn criterion_01_golden_swap_instance() {
    let start = Instant::now();
    let s = script(SWAP_INSTANCE);
    let (report, mut cnf, _) = detect(&s);

    assert_eq!(cnf.num_skeleton_vars, 5, "skeleton must have exactly 5 variables");
    assert_eq!(cnf.num_vars, 5);
    assert_eq!(cnf.clauses.len(), 3, "skeleton must have exactly 3 clauses");

    assert_eq!(report.generators.len(), 1, "exactly one symmetry generator");
    let theta = &report.generators[0];
    assert_eq!(theta.cycles(), "(Q R)(x y)");

    let ordering = order_variables(&cnf, OrderingMode::Heuristic);
    let sbp = build_restricted_sbp(theta, &ordering, 16, &mut cnf);
    assert_eq!(sbp.clauses, vec![vec![Lit::negative(1), Lit::positive(2)]],
        "the predicate must be the single clause (not Q) or R");
    assert!(sbp.new_aux_vars.is_empty());

    for mode in [SolveMode::Plain, SolveMode::Sym] {
        let result = solve(&s, &config(mode, 16));
        match &result.outcome {
            SolveOutcome::Sat(model) => {
                let env = model.values.iter().map(|(k, &v)| (k.clone(), v)).collect();
                assert!(eval_with_env(&s.assertion, &env), "{mode:?} model must satisfy the assertion");
            }
            other => panic!("{mode:?} expected sat, got {other:?}"),
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}, budget 1 s");
    pass(1, &format!(
        "5 vars, 3 clauses, generator (Q R)(x y), predicate = one clause, plain+sym sat in {elapsed:?}"
    ));
}

#[test]
fn criterion_02_outcome_equivalence_across_modes_and_oracle() {
    let start = Instant::now();
    let corpus = generate_corpus(42, 500, Profile::Mixed);
    let mut sat_count = 0;
    for inst in &corpus {
        let s = script(&inst.text);
        assert!(s.int_vars().len() <= 4, "{}: more than 4 variables", inst.name);
        let expected = oracle_is_sat(&s, 8);
        sat_count += expected as usize;
        for mode in [SolveMode::Plain, SolveMode::Sym, SolveMode::Hybrid] {
            let result = solve(&s, &config(mode, 8));
            assert_eq!(
                solved_sat(&result.outcome),
                expected,
                "{}: {mode:?} disagrees with the oracle",
                inst.name
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}, budget 5 min");
    pass(2, &format!(
        "500 instances ({sat_count} sat), plain==sym==hybrid==oracle exactly, in {elapsed:?}"
    ));
}

#[test]
fn criterion_03_every_orbit_keeps_a_survivor() {
    let start = Instant::now();
    let mut corpus = generate_corpus(100, 100, Profile::SymmetricSat);
    corpus.extend(generate_corpus(101, 100, Profile::SymmetricUnsat));
    corpus.extend(generate_theory_symmetric_corpus(102, 50));

    let mut checked = 0;
    let mut orbits_total = 0;
    for inst in &corpus {
        let s = script(&inst.text);
        let (report, mut cnf, _) = detect(&s);
        if report.generators.is_empty() {
            continue;
        }
        assert!(cnf.num_skeleton_vars <= 12, "{}: skeleton too large", inst.name);
        let psi_models = enumerate_skeleton_models(&cnf, 5000).unwrap();
        let ordering = order_variables(&cnf, OrderingMode::Heuristic);
        for theta in &report.generators {
            build_restricted_sbp(theta, &ordering, 16, &mut cnf);
        }
        let sbp_models = enumerate_skeleton_models(&cnf, 5000).unwrap();
        let coverage = orbit_coverage(&psi_models, &sbp_models, &report.generators);
        assert_eq!(coverage.empty_orbits, 0, "{}: an orbit lost all models", inst.name);
        assert!(
            coverage.survivor_count <= psi_models.len(),
            "{}: more survivors than models",
            inst.name
        );
        checked += 1;
        orbits_total += coverage.orbit_count;
    }
    assert!(checked >= 200, "only {checked} instances had accepted generators");
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}, budget 5 min");
    pass(3, &format!(
        "{checked} instances, {orbits_total} orbits, zero empty orbits, in {elapsed:?}"
    ));
}

#[test]
fn criterion_04_survivors_are_lex_minima_of_their_orbits() {
    let mut corpus = generate_corpus(200, 120, Profile::SymmetricSat);
    corpus.extend(generate_corpus(201, 120, Profile::SymmetricUnsat));

    let mut checked_instances = 0;
    let mut checked_models = 0;
    for inst in &corpus {
        let s = script(&inst.text);
        let (report, mut cnf, _) = detect(&s);
        // Single accepted generator, of order two, moving skeleton
        // variables: its orbits on assignments have at most 2 elements.
        if report.generators.len() != 1 {
            continue;
        }
        let theta = &report.generators[0];
        if !theta.compose(theta).is_identity() || theta.skeleton_map.is_empty() {
            continue;
        }
        let ordering = order_variables(&cnf, OrderingMode::Heuristic);
        let untruncated_k = cnf.num_skeleton_vars as usize;
        build_restricted_sbp(theta, &ordering, untruncated_k, &mut cnf);
        let survivors = enumerate_skeleton_models(&cnf, 5000).unwrap();
        for m in &survivors {
            let image = apply_to_model(theta, m);
            if image == *m {
                continue; // fixed point: a 1-element orbit
            }
            let a = SkeletonAssignment { values: m.clone() };
            let b = SkeletonAssignment { values: image };
            assert!(
                lex_le(&a, &b, &ordering),
                "{}: surviving model is not the minimum of its orbit",
                inst.name
            );
            checked_models += 1;
        }
        checked_instances += 1;
    }
    assert!(checked_instances >= 25, "only {checked_instances} single-involution instances");
    assert!(checked_models >= 100, "only {checked_models} nontrivial orbits inspected");
    pass(4, &format!(
        "{checked_models} surviving models across {checked_instances} instances, all lex-minimal"
    ));
}

#[test]
fn criterion_05_sbp_prunes_models_on_unsat_instances() {
    let corpus = generate_corpus(77, 60, Profile::SymmetricUnsat);
    let mut plain_tried = Vec::new();
    let mut sym_tried = Vec::new();
    let mut strictly_fewer = 0;
    for inst in &corpus {
        let s = script(&inst.text);
        let plain = solve_plain(&s, &config(SolveMode::Plain, 8));
        let sym = solve_sym(&s, &config(SolveMode::Sym, 8));
        assert_eq!(plain.outcome, SolveOutcome::UnsatBounded, "{}", inst.name);
        assert_eq!(sym.outcome, SolveOutcome::UnsatBounded, "{}", inst.name);
        assert!(
            sym.stats.skeleton_models_tried <= plain.stats.skeleton_models_tried,
            "{}: symmetry breaking tried more models",
            inst.name
        );
        if sym.stats.skeleton_models_tried < plain.stats.skeleton_models_tried {
            strictly_fewer += 1;
        }
        plain_tried.push(plain.stats.skeleton_models_tried);
        sym_tried.push(sym.stats.skeleton_models_tried);
    }
    plain_tried.sort_unstable();
    sym_tried.sort_unstable();
    let median_plain = plain_tried[plain_tried.len() / 2];
    let median_sym = sym_tried[sym_tried.len() / 2];
    assert!(
        median_sym <= median_plain,
        "median models tried: sym {median_sym} > plain {median_plain}"
    );
    let n = corpus.len();
    assert!(
        strictly_fewer * 10 >= n * 3,
        "strictly fewer on only {strictly_fewer}/{n} instances (need 30%)"
    );
    pass(5, &format!(
        "60 unsat instances: median tried {median_sym} (sym) vs {median_plain} (plain), strictly fewer on {strictly_fewer}/{n}"
    ));
}

#[test]
fn criterion_06_hybrid_solves_as_many_as_the_best_single_mode() {
    let corpus = generate_corpus(55, 100, Profile::Mixed);
    let mut solved = [0u32; 3];
    let modes = [SolveMode::Plain, SolveMode::Sym, SolveMode::Hybrid];
    for inst in &corpus {
        let s = script(&inst.text);
        for (slot, mode) in modes.iter().enumerate() {
            let mut cfg = config(*mode, 8);
            cfg.timeout = Some(Duration::from_secs(5));
            let result = solve(&s, &cfg);
            if result.outcome.is_decided() {
                solved[slot] += 1;
            }
        }
    }
    let (plain, sym, hybrid) = (solved[0], solved[1], solved[2]);
    assert!(
        hybrid + 1 >= plain.max(sym),
        "hybrid solved {hybrid}, best single mode {}",
        plain.max(sym)
    );
    pass(6, &format!(
        "100 instances at 5 s: plain {plain}, sym {sym}, hybrid {hybrid} solved"
    ));
}

#[test]
fn criterion_07_sat_core_matches_exhaustive_enumeration() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut sat_count = 0;
    const ROUNDS: usize = 1000;
    for round in 0..ROUNDS {
        let n = rng.gen_range(1..=12u32);
        let mut cnf = Cnf::new(n);
        for _ in 0..rng.gen_range(1..=3 * n + 5) {
            let width = rng.gen_range(1..=4usize);
            let clause: Vec<Lit> = (0..width)
                .map(|_| Lit::new(rng.gen_range(0..n), rng.gen_bool(0.5)))
                .collect();
            cnf.push_clause(clause);
        }
        let expected = (0..1u64 << n).any(|code| {
            let values: Vec<bool> = (0..n).map(|v| code >> v & 1 == 1).collect();
            cnf.satisfied_by(&values)
        });
        let mut solver = SatSolver::from_cnf(&cnf);
        match solver.solve(&Deadline::none()) {
            SatOutcome::Sat(model) => {
                assert!(expected, "round {round}: solver sat, enumeration unsat");
                assert!(cnf.satisfied_by(&model), "round {round}: bad model");
                sat_count += 1;
            }
            SatOutcome::Unsat => {
                assert!(!expected, "round {round}: solver unsat, enumeration sat");
            }
            SatOutcome::Cancelled => panic!("round {round}: no deadline was set"),
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}, budget 1 min");
    pass(7, &format!(
        "{ROUNDS} random formulas ({sat_count} sat), zero mismatches, in {elapsed:?}"
    ));
}

#[test]
fn criterion_08_generated_groups_match_brute_force() {
    fn graph(colors: Vec<u32>, edges: Vec<(u32, u32)>) -> ColoredGraph {
        let n = colors.len() as u32;
        ColoredGraph {
            num_vertices: n,
            origins: vec![VertexOrigin::Occurrence; colors.len()],
            colors,
            edges,
        }
    }
    fn path(n: u32) -> Vec<(u32, u32)> {
        (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect()
    }
    fn cycle(n: u32) -> Vec<(u32, u32)> {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    }
    fn complete(n: u32) -> Vec<(u32, u32)> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        edges
    }
    fn star(leaves: u32) -> Vec<(u32, u32)> {
        (1..=leaves).map(|i| (0, i)).collect()
    }

    let cube_edges: Vec<(u32, u32)> = (0..8u32)
        .flat_map(|v| (0..3).map(move |b| (v, v ^ (1 << b))))
        .filter(|&(a, b)| a < b)
        .collect();

    let test_set: Vec<(&str, ColoredGraph)> = vec![
        ("single vertex", graph(vec![0], vec![])),
        ("two twin vertices", graph(vec![0, 0], vec![])),
        ("two colored vertices", graph(vec![0, 1], vec![])),
        ("edge plus isolated", graph(vec![0, 0, 0], vec![(0, 1)])),
        ("path of 4", graph(vec![0; 4], path(4))),
        ("path of 4, ends colored", graph(vec![1, 0, 0, 2], path(4))),
        ("path of 7", graph(vec![0; 7], path(7))),
        ("triangle", graph(vec![0; 3], cycle(3))),
        ("square", graph(vec![0; 4], cycle(4))),
        ("pentagon", graph(vec![0; 5], cycle(5))),
        ("hexagon", graph(vec![0; 6], cycle(6))),
        ("octagon", graph(vec![0; 8], cycle(8))),
        ("hexagon, alternating colors", graph(vec![0, 1, 0, 1, 0, 1], cycle(6))),
        ("complete on 4", graph(vec![0; 4], complete(4))),
        ("complete on 5", graph(vec![0; 5], complete(5))),
        ("star with 5 leaves", graph(vec![0; 6], star(5))),
        ("star, center colored", graph(vec![1, 0, 0, 0, 0], star(4))),
        ("two disjoint edges", graph(vec![0; 4], vec![(0, 1), (2, 3)])),
        ("two disjoint triangles", graph(vec![0; 6], vec![(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])),
        ("triangle and colored edge", graph(vec![0, 0, 0, 1, 1], vec![(0, 1), (1, 2), (0, 2), (3, 4)])),
        ("paw", graph(vec![0; 4], vec![(0, 1), (1, 2), (0, 2), (2, 3)])),
        ("asymmetric tree", graph(vec![0; 6], vec![(0, 1), (1, 2), (2, 3), (3, 4), (1, 5)])),
        ("complete bipartite 2x3", graph(vec![0; 5], vec![(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)])),
        ("cube", graph(vec![0; 8], cube_edges)),
    ];

    let mut largest = 0usize;
    for (name, g) in &test_set {
        assert!(g.num_vertices <= 8, "{name}: test set is capped at 8 vertices");
        let report = find_automorphism_generators(g, 64, 10_000_000, &Deadline::none());
        assert!(report.complete, "{name}: search must complete");
        let generated = generated_group(g.num_vertices as usize, &report.generators, 100_000)
            .expect("group cap is ample for 8 vertices");
        let brute: BTreeSet<Vec<u32>> = brute_force_automorphisms(g).into_iter().collect();
        assert_eq!(generated, brute, "{name}: group mismatch");
        largest = largest.max(brute.len());
    }
    pass(8, &format!(
        "{} graphs, generated group == brute-force group on all (largest order {largest})",
        test_set.len()
    ));
}

#[test]
fn criterion_09_ordering_heuristic_and_truncation_grid() {
    // Structural half: positive unit clauses come first under the
    // heuristic, and index mode is the identity.
    let corpus = generate_corpus(301, 25, Profile::SymmetricUnsat);
    let mut instances_with_units = 0;
    for inst in &corpus {
        let s = script(&inst.text);
        let (_, cnf, _) = detect(&s);
        let unit_vars: BTreeSet<u32> = cnf
            .clauses
            .iter()
            .filter(|c| c.len() == 1 && c[0].is_pos() && c[0].var() < cnf.num_skeleton_vars)
            .map(|c| c[0].var())
            .collect();
        let heuristic = order_variables(&cnf, OrderingMode::Heuristic);
        if !unit_vars.is_empty() {
            instances_with_units += 1;
            let ranked = heuristic.by_rank();
            let lead: BTreeSet<u32> =
                ranked[..unit_vars.len()].iter().map(|v| v.0).collect();
            assert_eq!(lead, unit_vars, "{}: unit variables must rank first", inst.name);
        }
        let index = order_variables(&cnf, OrderingMode::Index);
        let identity: Vec<u32> = (0..cnf.num_vars).collect();
        let indexed: Vec<u32> = index.by_rank().iter().map(|v| v.0).collect();
        assert_eq!(indexed, identity, "{}: index mode must not reorder", inst.name);
    }
    assert!(instances_with_units >= 10, "only {instances_with_units} instances had unit clauses");

    // Grid half: the criterion-2 equivalence holds with the heuristic on
    // and off and for every truncation cutoff in {1, 4, 16}.
    let corpus = generate_corpus(42, 500, Profile::Mixed);
    for inst in &corpus {
        let s = script(&inst.text);
        let expected = oracle_is_sat(&s, 8);
        for ordering in [OrderingMode::Heuristic, OrderingMode::Index] {
            for k in [1usize, 4, 16] {
                for mode in [SolveMode::Sym, SolveMode::Hybrid] {
                    let mut cfg = config(mode, 8);
                    cfg.ordering = ordering;
                    cfg.truncation_k = k;
                    let result = solve(&s, &cfg);
                    assert_eq!(
                        solved_sat(&result.outcome),
                        expected,
                        "{}: {mode:?} with {ordering:?}, k={k} disagrees with the oracle",
                        inst.name
                    );
                }
            }
        }
    }
    pass(9, &format!(
        "unit variables lead on {instances_with_units} instances; 500-instance equivalence holds for heuristic on/off and k in {{1, 4, 16}}"
    ));
}

#[test]
fn criterion_10_theory_level_predicates_preserve_satisfiability() {
    let mut texts: Vec<(String, String)> =
        vec![("cyclic implication".to_string(), CYCLIC_IMPLICATION.to_string())];
    for inst in generate_theory_symmetric_corpus(500, 50) {
        texts.push((inst.name, inst.text));
    }

    let mut checked = 0;
    let mut with_generators = 0;
    for (name, text) in &texts {
        let s = script(text);
        let (report, _, _) = detect(&s);
        if !report.generators.is_empty() {
            with_generators += 1;
        }
        let mut conjuncts = vec![s.assertion.clone()];
        for theta in &report.generators {
            conjuncts.push(build_theory_sbp(theta, &s.decls).unwrap());
        }
        let strengthened = Script::new(s.decls.clone(), symsmt::ast::Formula::And(conjuncts));
        let before = oracle_is_sat(&s, 8);
        let after = oracle_is_sat(&strengthened, 8);
        assert_eq!(before, after, "{name}: conjoined predicates changed satisfiability");
        checked += 1;
    }
    assert_eq!(checked, 51);
    assert!(with_generators >= 50, "only {with_generators} instances had generators");
    pass(10, &format!(
        "cyclic instance + 50 generated instances ({with_generators} with generators), satisfiability preserved on all"
    ));
}
