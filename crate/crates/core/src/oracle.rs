//! Independent reference procedures used by the test suites.
//!
//! The brute-force decider evaluates the original assertion directly on
//! every grid point of `[-B, B]^n` with the exact evaluator — it shares no
//! code path with the skeleton, SAT, or theory machinery it is used to
//! check, so a common bug cannot hide. Skeleton-model enumeration and
//! orbit analysis support the symmetry-soundness suites.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::Script;
use crate::deadline::Deadline;
use crate::eval::Evaluator;
use crate::sat::{SatOutcome, SatSolver};
use crate::skeleton::{Cnf, Lit, SkeletonVar};
use crate::symgraph::Permutation;
use crate::theory::TheoryModel;

/// Evaluation-grid guard: `(2B+1)^n` must not exceed this.
pub const GRID_CAP: u64 = 10_000_000;
/// Default cap on the number of models collected.
pub const DEFAULT_MODEL_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("resource limit exceeded: {0}")]
pub struct ResourceExceeded(pub String);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteForceResult {
    Sat {
        /// Models in grid order (declaration-ordered variables, last
        /// variable fastest), up to the cap.
        models: Vec<TheoryModel>,
        /// False when the model cap stopped the enumeration early.
        complete: bool,
    },
    UnsatBounded,
}

impl BruteForceResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, BruteForceResult::Sat { .. })
    }
}

/// Exhaustively decides the assertion over `[-B, B]^n` by direct
/// evaluation, n being the declared integer variables. Fails fast when the
/// grid would exceed [`GRID_CAP`] points.
pub fn brute_force(
    script: &Script,
    bound: i64,
    model_cap: usize,
) -> Result<BruteForceResult, ResourceExceeded> {
    assert!(bound >= 1, "domain bound must be positive");
    let vars = script.int_vars();
    let width = (2 * bound + 1) as u64;
    let mut grid: u64 = 1;
    for _ in &vars {
        grid = grid.saturating_mul(width);
        if grid > GRID_CAP {
            return Err(ResourceExceeded(format!(
                "evaluation grid {}^{} exceeds {GRID_CAP} points",
                width,
                vars.len()
            )));
        }
    }
    let evaluator = Evaluator::new(&script.assertion, &vars);
    let mut models = Vec::new();
    let mut complete = true;
    let mut values = vec![-bound; vars.len()];
    for point in 0..grid {
        if point > 0 {
            // Odometer step, last variable fastest.
            for slot in (0..values.len()).rev() {
                if values[slot] < bound {
                    values[slot] += 1;
                    break;
                }
                values[slot] = -bound;
            }
        }
        if evaluator.eval(&values) {
            if models.len() >= model_cap {
                complete = false;
                break;
            }
            models.push(TheoryModel {
                values: vars.iter().cloned().zip(values.iter().copied()).collect(),
            });
        }
    }
    if models.is_empty() {
        Ok(BruteForceResult::UnsatBounded)
    } else {
        Ok(BruteForceResult::Sat { models, complete })
    }
}

/// All satisfying assignments of the CNF projected onto the skeleton
/// variables (encoding auxiliaries existentially quantified away), found
/// with the SAT core plus projection-blocking clauses.
pub fn enumerate_skeleton_models(
    cnf: &Cnf,
    cap: usize,
) -> Result<BTreeSet<Vec<bool>>, ResourceExceeded> {
    let mut solver = SatSolver::from_cnf(cnf);
    let n = cnf.num_skeleton_vars;
    let mut models = BTreeSet::new();
    loop {
        match solver.solve(&Deadline::none()) {
            SatOutcome::Sat(full) => {
                let projected: Vec<bool> = full[..n as usize].to_vec();
                let fresh = models.insert(projected.clone());
                debug_assert!(fresh, "projection blocking failed");
                if models.len() > cap {
                    return Err(ResourceExceeded(format!(
                        "more than {cap} skeleton models"
                    )));
                }
                let blocking: Vec<Lit> = (0..n)
                    .map(|v| Lit::new(v, !projected[v as usize]))
                    .collect();
                if blocking.is_empty() {
                    return Ok(models); // no skeleton vars: single empty model
                }
                solver.add_clause(&blocking);
            }
            SatOutcome::Unsat => return Ok(models),
            SatOutcome::Cancelled => unreachable!("no deadline was set"),
        }
    }
}

/// Image of a skeleton model under a symmetry: the value of v moves to
/// θ(v).
pub fn apply_to_model(theta: &Permutation, model: &[bool]) -> Vec<bool> {
    let mut image = model.to_vec();
    for (v, value) in model.iter().enumerate() {
        image[theta.apply_skeleton(SkeletonVar(v as u32)).0 as usize] = *value;
    }
    image
}

/// Orbit analysis of the skeleton models under the group generated by the
/// accepted symmetries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitReport {
    pub orbit_count: usize,
    pub survivor_count: usize,
    pub pruned_count: usize,
    /// Orbits with no surviving model — soundness violations; must be 0.
    pub empty_orbits: usize,
}

/// Partitions `psi_models` into orbits under the generated group (closure
/// by repeated generator application) and checks that each orbit keeps at
/// least one member in `sbp_models`.
pub fn orbit_coverage(
    psi_models: &BTreeSet<Vec<bool>>,
    sbp_models: &BTreeSet<Vec<bool>>,
    generators: &[Permutation],
) -> OrbitReport {
    debug_assert!(sbp_models.is_subset(psi_models), "SBP must only remove models");
    let mut visited: BTreeSet<&Vec<bool>> = BTreeSet::new();
    let mut orbit_count = 0;
    let mut empty_orbits = 0;
    for start in psi_models {
        if visited.contains(start) {
            continue;
        }
        orbit_count += 1;
        let mut orbit: BTreeSet<Vec<bool>> = BTreeSet::new();
        let mut frontier = vec![start.clone()];
        orbit.insert(start.clone());
        while let Some(m) = frontier.pop() {
            for theta in generators {
                let image = apply_to_model(theta, &m);
                debug_assert!(
                    psi_models.contains(&image),
                    "symmetry image left the model set"
                );
                if orbit.insert(image.clone()) {
                    frontier.push(image);
                }
            }
        }
        if orbit.is_disjoint(sbp_models) {
            empty_orbits += 1;
        }
        for m in &orbit {
            if let Some(known) = psi_models.get(m) {
                visited.insert(known);
            }
        }
    }
    OrbitReport {
        orbit_count,
        survivor_count: sbp_models.len(),
        pruned_count: psi_models.len() - sbp_models.len(),
        empty_orbits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval_with_env;
    use crate::normalize::normalize_script;
    use crate::parser::parse_script;
    use crate::sbp::{build_restricted_sbp, order_variables, OrderingMode};
    use crate::skeleton::extract_skeleton;
    use crate::symgraph::detect_symmetries;
    use std::collections::HashMap;

    fn prepare(text: &str) -> Script {
        normalize_script(&parse_script(text, None).unwrap())
    }

    const SWAP_INSTANCE: &str = "
        (set-logic QF_NIA)
        (declare-fun x () Int)
        (declare-fun y () Int)
        (declare-fun z () Int)
        (assert (and (or (> z 2) (< x 8))
                     (or (> z 2) (< y 8))
                     (or (< (+ x y) 10) (> (+ x y) 3))))
        (check-sat)";

    #[test]
    fn swap_instance_is_satisfiable_at_small_bounds() {
        let script = prepare(SWAP_INSTANCE);
        match brute_force(&script, 3, DEFAULT_MODEL_CAP).unwrap() {
            BruteForceResult::Sat { models, complete } => {
                assert!(complete);
                assert!(!models.is_empty());
                // Spot-verify the first model independently.
                let env: HashMap<String, i64> = models[0].values.clone().into_iter().collect();
                assert!(eval_with_env(&script.assertion, &env));
            }
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn implication_instance_contains_the_all_threes_model() {
        let script = prepare(
            "(set-logic QF_NIA)
             (declare-fun x () Int)
             (declare-fun y () Int)
             (declare-fun z () Int)
             (assert (=> (and (> (+ x y) 2) (> (+ y z) 2)) (> (+ x y z) 6)))
             (check-sat)",
        );
        match brute_force(&script, 4, DEFAULT_MODEL_CAP).unwrap() {
            BruteForceResult::Sat { models, .. } => {
                let target: TheoryModel = TheoryModel {
                    values: [("x", 3), ("y", 3), ("z", 3)]
                        .iter()
                        .map(|&(n, v)| (n.to_string(), v))
                        .collect(),
                };
                assert!(models.contains(&target));
            }
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn beyond_bound_is_unsat() {
        let script = prepare(
            "(set-logic QF_NIA)
             (declare-fun x () Int)
             (assert (> x 8))
             (check-sat)",
        );
        assert_eq!(
            brute_force(&script, 8, DEFAULT_MODEL_CAP).unwrap(),
            BruteForceResult::UnsatBounded
        );
        assert!(brute_force(&script, 9, DEFAULT_MODEL_CAP).unwrap().is_sat());
    }

    #[test]
    fn oversized_grid_is_rejected() {
        let script = prepare(
            "(set-logic QF_NIA)
             (declare-fun a () Int) (declare-fun b () Int) (declare-fun c () Int)
             (declare-fun d () Int) (declare-fun e () Int) (declare-fun f () Int)
             (declare-fun g () Int)
             (assert (< (+ a b c d e f g) 100))
             (check-sat)",
        );
        assert!(brute_force(&script, 32, DEFAULT_MODEL_CAP).is_err());
    }

    #[test]
    fn model_cap_truncates_enumeration() {
        let script = prepare(
            "(set-logic QF_NIA)
             (declare-fun x () Int)
             (assert (< x 100))
             (check-sat)",
        );
        match brute_force(&script, 4, 3).unwrap() {
            BruteForceResult::Sat { models, complete } => {
                assert_eq!(models.len(), 3);
                assert!(!complete);
            }
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn ground_assertions_evaluate_without_a_grid() {
        let sat = prepare("(assert (< 1 2)) (check-sat)");
        assert!(brute_force(&sat, 1, DEFAULT_MODEL_CAP).unwrap().is_sat());
        let unsat = prepare("(assert (< 2 1)) (check-sat)");
        assert_eq!(
            brute_force(&unsat, 1, DEFAULT_MODEL_CAP).unwrap(),
            BruteForceResult::UnsatBounded
        );
    }

    #[test]
    fn skeleton_model_count_matches_direct_enumeration() {
        let script = prepare(SWAP_INSTANCE);
        let (psi, atoms) = extract_skeleton(&script);
        let cnf = crate::skeleton::to_cnf(&psi, atoms.len() as u32);
        let models = enumerate_skeleton_models(&cnf, 10_000).unwrap();
        let n = atoms.len();
        let direct: BTreeSet<Vec<bool>> = (0..1u32 << n)
            .map(|code| (0..n).map(|v| code >> v & 1 == 1).collect::<Vec<bool>>())
            .filter(|vals| psi.eval(vals))
            .collect();
        assert_eq!(models, direct);
        assert!(!models.is_empty());
    }

    #[test]
    fn empty_cnf_has_all_models() {
        let cnf = Cnf::new(2);
        let models = enumerate_skeleton_models(&cnf, 100).unwrap();
        assert_eq!(models.len(), 4);
    }

    #[test]
    fn contradictory_cnf_has_no_models() {
        let mut cnf = Cnf::new(2);
        cnf.push_clause(vec![Lit::positive(0)]);
        cnf.push_clause(vec![Lit::negative(0)]);
        let models = enumerate_skeleton_models(&cnf, 100).unwrap();
        assert!(models.is_empty());
    }

    #[test]
    fn identity_group_keeps_every_model() {
        let script = prepare(SWAP_INSTANCE);
        let (psi, atoms) = extract_skeleton(&script);
        let cnf = crate::skeleton::to_cnf(&psi, atoms.len() as u32);
        let models = enumerate_skeleton_models(&cnf, 10_000).unwrap();
        let report = orbit_coverage(&models, &models, &[]);
        assert_eq!(report.orbit_count, models.len());
        assert_eq!(report.empty_orbits, 0);
        assert_eq!(report.pruned_count, 0);
    }

    #[test]
    fn swap_symmetry_orbits_all_keep_a_survivor() {
        let script = prepare(SWAP_INSTANCE);
        let (psi, atoms) = extract_skeleton(&script);
        let mut cnf = crate::skeleton::to_cnf(&psi, atoms.len() as u32);
        let psi_models = enumerate_skeleton_models(&cnf, 10_000).unwrap();
        let report =
            detect_symmetries(&script, &psi, &atoms, 8, 1_000_000, &Deadline::none());
        assert_eq!(report.generators.len(), 1);
        let ordering = order_variables(&cnf, OrderingMode::Heuristic);
        for theta in &report.generators {
            build_restricted_sbp(theta, &ordering, 16, &mut cnf);
        }
        let sbp_models = enumerate_skeleton_models(&cnf, 10_000).unwrap();
        let coverage = orbit_coverage(&psi_models, &sbp_models, &report.generators);
        assert_eq!(coverage.empty_orbits, 0);
        assert!(coverage.survivor_count <= psi_models.len());
        assert!(coverage.pruned_count > 0, "the swap should prune something");
        // The two assignments differing only in the swapped pair form one
        // orbit; exactly its lexicographically smaller member survives.
        for m in &psi_models {
            let image = apply_to_model(&report.generators[0], m);
            if &image != m && psi_models.contains(&image) {
                assert!(
                    sbp_models.contains(m) || sbp_models.contains(&image),
                    "orbit lost both members"
                );
            }
        }
    }
}
