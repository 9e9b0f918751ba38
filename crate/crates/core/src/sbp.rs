//! Symmetry breaking predicates.
//!
//! The main path builds *restricted* SBPs: lex-leader constraints ranging
//! only over skeleton variables, emitted in CNF with a linear chain of
//! auxiliary variables and conjoined to the skeleton before search. Under
//! the Boolean order false < true they admit, from each orbit of a
//! symmetry, only assignments that are lexicographically no larger than
//! their image. A secondary path renders the same lex-leader scheme over
//! theory variables as an ordinary arithmetic formula, for preprocessing
//! use outside the CNF pipeline.
//!
//! Two heuristics live here as well: the variable ordering (positive-unit
//! variables first) and support truncation (keep only the first k support
//! variables — any prefix of the conjuncts is still a sound breaker).

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{Atom, Decl, Formula, Relation, Sort, Term};
use crate::skeleton::{Cnf, Lit, SkeletonAssignment, SkeletonVar};
use crate::symgraph::Permutation;

/// Strict total order over the skeleton variables, shared by every SBP of
/// one solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableOrdering {
    /// rank[id] = position of that variable in the order (0 = first).
    rank: Vec<u32>,
}

impl VariableOrdering {
    pub fn num_vars(&self) -> u32 {
        self.rank.len() as u32
    }

    pub fn rank(&self, v: SkeletonVar) -> u32 {
        self.rank[v.0 as usize]
    }

    /// Variables listed in order, first-ranked first.
    pub fn by_rank(&self) -> Vec<SkeletonVar> {
        let mut vars: Vec<SkeletonVar> =
            (0..self.rank.len() as u32).map(SkeletonVar).collect();
        vars.sort_by_key(|v| self.rank(*v));
        vars
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingMode {
    /// Positive-unit-clause variables first (by id), then the rest (by id).
    Heuristic,
    /// Plain variable-id order.
    Index,
}

/// Chooses the variable ordering from the skeleton CNF (before any SBP is
/// added). Only skeleton variables participate; encoding auxiliaries are
/// excluded. Deterministic.
pub fn order_variables(cnf: &Cnf, mode: OrderingMode) -> VariableOrdering {
    let n = cnf.num_skeleton_vars;
    let mut order: Vec<u32> = (0..n).collect();
    if mode == OrderingMode::Heuristic {
        let mut is_unit = vec![false; n as usize];
        for clause in &cnf.clauses {
            if let [lit] = clause[..] {
                if lit.is_pos() && lit.var() < n {
                    is_unit[lit.var() as usize] = true;
                }
            }
        }
        order.sort_by_key(|&v| (!is_unit[v as usize], v));
    }
    let mut rank = vec![0u32; n as usize];
    for (pos, &v) in order.iter().enumerate() {
        rank[v as usize] = pos as u32;
    }
    VariableOrdering { rank }
}

/// The moved skeleton variables of `theta`, sorted by the ordering and cut
/// to the first `k` — the truncation heuristic. Any prefix of the
/// lex-leader conjuncts remains a sound symmetry breaker.
pub fn truncate_support(
    theta: &Permutation,
    ordering: &VariableOrdering,
    k: usize,
) -> Vec<SkeletonVar> {
    assert!(k >= 1, "truncation cutoff must be at least 1");
    let mut support: Vec<SkeletonVar> = theta.skeleton_support().collect();
    support.sort_by_key(|v| ordering.rank(*v));
    support.truncate(k);
    support
}

/// CNF form of one restricted SBP, as added to the working formula.
#[derive(Clone, Debug)]
pub struct SbpClauses {
    pub clauses: Vec<Vec<Lit>>,
    pub new_aux_vars: Vec<u32>,
    pub source: Permutation,
    pub truncation_k: usize,
}

/// Builds the restricted SBP for `theta` over the first `k` support
/// variables Y1..Yr (in ordering order): the conjunction over i of
/// (Y1=θY1 ∧ … ∧ Y_{i-1}=θY_{i-1}) ⇒ (Yi ⇒ θYi). Conjunct prefixes are
/// carried by a linear chain of auxiliary variables, each defined as the
/// conjunction of the previous link and one equality. A conjunct whose
/// unordered pair {Yi, θYi} already appeared is a consequence of its own
/// guard and is skipped, so an involution like (Q R) costs exactly one
/// clause and no auxiliaries. Clauses are conjoined to `cnf` and returned.
pub fn build_restricted_sbp(
    theta: &Permutation,
    ordering: &VariableOrdering,
    k: usize,
    cnf: &mut Cnf,
) -> SbpClauses {
    let support = truncate_support(theta, ordering, k);
    let mut filtered: Vec<(SkeletonVar, SkeletonVar)> = Vec::new();
    let mut seen: BTreeSet<(SkeletonVar, SkeletonVar)> = BTreeSet::new();
    for y in support {
        let ty = theta.apply_skeleton(y);
        if seen.insert((y.min(ty), y.max(ty))) {
            filtered.push((y, ty));
        }
    }
    let mut out = SbpClauses {
        clauses: Vec::new(),
        new_aux_vars: Vec::new(),
        source: theta.clone(),
        truncation_k: k,
    };
    let add = |cnf: &mut Cnf, out: &mut SbpClauses, mut clause: Vec<Lit>| {
        clause.sort_by_key(|l| l.index());
        out.clauses.push(clause.clone());
        cnf.push_clause(clause);
    };
    let mut guard: Option<u32> = None;
    for (t, &(y, ty)) in filtered.iter().enumerate() {
        let (y, ty) = (Lit::positive(y.0), Lit::positive(ty.0));
        let mut clause = Vec::new();
        if let Some(g) = guard {
            clause.push(Lit::negative(g));
        }
        clause.push(!y);
        clause.push(ty);
        add(cnf, &mut out, clause);
        if t + 1 == filtered.len() {
            break;
        }
        // Extend the chain: fresh e ⇔ (previous guard ∧ (y ↔ θy)).
        let e = cnf.fresh_var();
        out.new_aux_vars.push(e);
        let (ep, en) = (Lit::positive(e), Lit::negative(e));
        match guard {
            None => {
                add(cnf, &mut out, vec![en, !y, ty]);
                add(cnf, &mut out, vec![en, y, !ty]);
                add(cnf, &mut out, vec![!y, !ty, ep]);
                add(cnf, &mut out, vec![y, ty, ep]);
            }
            Some(g) => {
                let (gp, gn) = (Lit::positive(g), Lit::negative(g));
                add(cnf, &mut out, vec![en, gp]);
                add(cnf, &mut out, vec![en, !y, ty]);
                add(cnf, &mut out, vec![en, y, !ty]);
                add(cnf, &mut out, vec![gn, !y, !ty, ep]);
                add(cnf, &mut out, vec![gn, y, ty, ep]);
            }
        }
        guard = Some(e);
    }
    out
}

/// Direct (non-CNF) evaluation of the lex-leader formula over the given
/// support list — the reference the chain encoding is checked against:
/// ⋀_i (⋀_{j<i} Yj=θYj) ⇒ (Yi ⇒ θYi).
pub fn lex_leader_holds(
    theta: &Permutation,
    support: &[SkeletonVar],
    x: &SkeletonAssignment,
) -> bool {
    for i in 0..support.len() {
        let prefix_equal = (0..i).all(|j| {
            x.get(support[j]) == x.get(theta.apply_skeleton(support[j]))
        });
        let yi = x.get(support[i]);
        let tyi = x.get(theta.apply_skeleton(support[i]));
        if prefix_equal && yi && !tyi {
            return false;
        }
    }
    true
}

/// Lexicographic comparison of two skeleton assignments under the ordering,
/// with false < true.
pub fn lex_le(
    a: &SkeletonAssignment,
    b: &SkeletonAssignment,
    ordering: &VariableOrdering,
) -> bool {
    for v in ordering.by_rank() {
        match (a.get(v), b.get(v)) {
            (false, true) => return true,
            (true, false) => return false,
            _ => {}
        }
    }
    true
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SbpError {
    #[error("cannot order variables of different sorts: {a} vs {b}")]
    SortMismatch { a: String, b: String },
    #[error("permuted variable is not declared: {0}")]
    UnknownVariable(String),
}

/// Lex-leader constraint over *theory* variables, as an ordinary arithmetic
/// formula: ⋀_i (⋀_{j<i} Yj=θYj) ⇒ (Yi ≤ θYi), with the support taken in
/// declaration order. Emitted unsimplified (implied conjuncts are kept).
/// This path is for preprocessing output; it never enters the skeleton CNF.
pub fn build_theory_sbp(theta: &Permutation, decls: &[Decl]) -> Result<Formula, SbpError> {
    let sort_of = |name: &str| -> Result<Sort, SbpError> {
        decls
            .iter()
            .find(|d| d.name == name)
            .map(|d| d.sort)
            .ok_or_else(|| SbpError::UnknownVariable(name.to_string()))
    };
    let mut support: Vec<&str> = Vec::new();
    for d in decls {
        let image = theta.apply_theory(&d.name);
        if image != d.name {
            let (sa, sb) = (sort_of(&d.name)?, sort_of(image)?);
            if sa != sb {
                return Err(SbpError::SortMismatch { a: d.name.clone(), b: image.to_string() });
            }
            support.push(&d.name);
        }
    }
    // Variables moved by theta but missing from the declarations are an
    // input error, not a silent no-op.
    for name in theta.theory_map.keys() {
        sort_of(name)?;
    }
    let var = |name: &str| Term::Var { name: name.to_string(), sort: Sort::Int };
    let mut conjuncts = Vec::new();
    for (i, &yi) in support.iter().enumerate() {
        let body = Formula::Atom(Atom::new(
            Relation::Le,
            var(yi),
            var(theta.apply_theory(yi)),
        ));
        let guards: Vec<Formula> = support[..i]
            .iter()
            .map(|&yj| {
                Formula::Atom(Atom::new(Relation::Eq, var(yj), var(theta.apply_theory(yj))))
            })
            .collect();
        let conjunct = match guards.len() {
            0 => body,
            1 => Formula::Implies(Box::new(guards.into_iter().next().unwrap()), Box::new(body)),
            _ => Formula::Implies(Box::new(Formula::And(guards)), Box::new(body)),
        };
        conjuncts.push(conjunct);
    }
    Ok(match conjuncts.len() {
        0 => Formula::Const(true),
        1 => conjuncts.into_iter().next().unwrap(),
        _ => Formula::And(conjuncts),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn sv(id: u32) -> SkeletonVar {
        SkeletonVar(id)
    }

    fn perm(pairs: &[(u32, u32)]) -> Permutation {
        let mut map = BTreeMap::new();
        for &(a, b) in pairs {
            map.insert(sv(a), sv(b));
        }
        Permutation::new(map, BTreeMap::new())
    }

    fn cnf_with(num_skeleton: u32, clauses: &[&[Lit]]) -> Cnf {
        let mut cnf = Cnf::new(num_skeleton);
        for c in clauses {
            cnf.push_clause(c.to_vec());
        }
        cnf
    }

    #[test]
    fn heuristic_puts_positive_units_first() {
        let cnf = cnf_with(
            3,
            &[&[Lit::positive(0)], &[Lit::positive(1), Lit::positive(2)]],
        );
        let ord = order_variables(&cnf, OrderingMode::Heuristic);
        assert_eq!(ord.by_rank(), vec![sv(0), sv(1), sv(2)]);
    }

    #[test]
    fn no_units_falls_back_to_id_order() {
        let cnf = cnf_with(
            5,
            &[
                &[Lit::positive(0), Lit::positive(1)],
                &[Lit::positive(0), Lit::positive(2)],
                &[Lit::positive(3), Lit::positive(4)],
            ],
        );
        let heuristic = order_variables(&cnf, OrderingMode::Heuristic);
        let index = order_variables(&cnf, OrderingMode::Index);
        assert_eq!(heuristic, index);
        assert_eq!(index.by_rank(), (0..5).map(sv).collect::<Vec<_>>());
    }

    #[test]
    fn negative_units_do_not_qualify() {
        let cnf = cnf_with(2, &[&[Lit::negative(0)], &[Lit::positive(1)]]);
        let ord = order_variables(&cnf, OrderingMode::Heuristic);
        assert_eq!(ord.by_rank(), vec![sv(1), sv(0)]);
    }

    #[test]
    fn unit_auxiliaries_are_ignored_by_the_ordering() {
        let mut cnf = Cnf::new(2);
        let aux = cnf.fresh_var();
        cnf.push_clause(vec![Lit::positive(aux)]);
        cnf.push_clause(vec![Lit::positive(1)]);
        let ord = order_variables(&cnf, OrderingMode::Heuristic);
        assert_eq!(ord.by_rank(), vec![sv(1), sv(0)]);
    }

    #[test]
    fn truncation_takes_an_ordering_prefix() {
        let theta = perm(&[(0, 1), (1, 0), (2, 3), (3, 2)]);
        let ord = order_variables(&cnf_with(4, &[]), OrderingMode::Index);
        assert_eq!(truncate_support(&theta, &ord, 16), vec![sv(0), sv(1), sv(2), sv(3)]);
        assert_eq!(truncate_support(&theta, &ord, 2), vec![sv(0), sv(1)]);
        let id = Permutation::identity();
        assert!(truncate_support(&id, &ord, 16).is_empty());
    }

    #[test]
    fn involution_emits_one_clause_no_auxiliaries() {
        // Five variables, swap of 1 and 2 — the second conjunct's pair
        // duplicates the first, so a single binary clause results.
        let mut cnf = cnf_with(
            5,
            &[
                &[Lit::positive(0), Lit::positive(1)],
                &[Lit::positive(0), Lit::positive(2)],
                &[Lit::positive(3), Lit::positive(4)],
            ],
        );
        let ord = order_variables(&cnf, OrderingMode::Heuristic);
        let theta = perm(&[(1, 2), (2, 1)]);
        let sbp = build_restricted_sbp(&theta, &ord, 16, &mut cnf);
        assert_eq!(sbp.clauses, vec![vec![Lit::negative(1), Lit::positive(2)]]);
        assert!(sbp.new_aux_vars.is_empty());
        assert_eq!(cnf.num_vars, 5);
        assert_eq!(cnf.clauses.len(), 4);
    }

    #[test]
    fn identity_emits_nothing() {
        let mut cnf = cnf_with(3, &[]);
        let ord = order_variables(&cnf, OrderingMode::Index);
        let sbp = build_restricted_sbp(&Permutation::identity(), &ord, 16, &mut cnf);
        assert!(sbp.clauses.is_empty());
        assert!(sbp.new_aux_vars.is_empty());
    }

    #[test]
    fn truncation_to_one_keeps_a_single_clause() {
        let mut cnf = cnf_with(4, &[]);
        let ord = order_variables(&cnf, OrderingMode::Index);
        let theta = perm(&[(0, 1), (1, 0), (2, 3), (3, 2)]);
        let sbp = build_restricted_sbp(&theta, &ord, 1, &mut cnf);
        assert_eq!(sbp.clauses, vec![vec![Lit::negative(0), Lit::positive(1)]]);
        assert!(sbp.new_aux_vars.is_empty());
    }

    /// Checks the chain encoding against direct evaluation: over all
    /// assignments to the original variables, the CNF (with auxiliaries
    /// projected out by trying all their values) must hold exactly when the
    /// lex-leader formula does.
    fn assert_exact_projection(theta: &Permutation, num_vars: u32) {
        let mut cnf = cnf_with(num_vars, &[]);
        let ord = order_variables(&cnf, OrderingMode::Index);
        let sbp = build_restricted_sbp(theta, &ord, 64, &mut cnf);
        let support = truncate_support(theta, &ord, 64);
        let num_aux = sbp.new_aux_vars.len() as u32;
        for code in 0..(1u32 << num_vars) {
            let values: Vec<bool> = (0..num_vars).map(|v| code >> v & 1 == 1).collect();
            let x = SkeletonAssignment { values: values.clone() };
            let cnf_holds = (0..(1u32 << num_aux)).any(|aux_code| {
                let mut full = values.clone();
                full.extend((0..num_aux).map(|a| aux_code >> a & 1 == 1));
                sbp.clauses.iter().all(|clause| clause.iter().any(|l| l.eval(&full)))
            });
            let direct = lex_leader_holds(theta, &support, &x);
            assert_eq!(cnf_holds, direct, "assignment {values:?}");
        }
    }

    #[test]
    fn double_swap_matches_direct_evaluation_on_all_16_assignments() {
        let theta = perm(&[(0, 1), (1, 0), (2, 3), (3, 2)]);
        assert_exact_projection(&theta, 4);
    }

    #[test]
    fn three_cycle_matches_direct_evaluation() {
        let theta = perm(&[(0, 1), (1, 2), (2, 0)]);
        assert_exact_projection(&theta, 3);
    }

    #[test]
    fn longer_mixed_permutation_matches_direct_evaluation() {
        let theta = perm(&[(0, 4), (4, 0), (1, 2), (2, 3), (3, 1)]);
        assert_exact_projection(&theta, 5);
    }

    #[test]
    fn double_swap_chain_shape() {
        let mut cnf = cnf_with(4, &[]);
        let ord = order_variables(&cnf, OrderingMode::Index);
        let theta = perm(&[(0, 1), (1, 0), (2, 3), (3, 2)]);
        let sbp = build_restricted_sbp(&theta, &ord, 16, &mut cnf);
        // ¬A∨B, four chain-definition clauses, then (chain)⇒(C⇒D).
        assert_eq!(sbp.new_aux_vars.len(), 1);
        assert_eq!(sbp.clauses.len(), 6);
        let e = sbp.new_aux_vars[0];
        assert!(sbp.clauses.contains(&vec![Lit::negative(0), Lit::positive(1)]));
        let mut last = vec![Lit::negative(2), Lit::positive(3), Lit::negative(e)];
        last.sort_by_key(|l| l.index());
        assert!(sbp.clauses.contains(&last));
    }

    #[test]
    fn surviving_models_are_lex_minima_of_their_orbits() {
        let theta = perm(&[(0, 1), (1, 0)]);
        let mut cnf = cnf_with(2, &[]);
        let ord = order_variables(&cnf, OrderingMode::Index);
        build_restricted_sbp(&theta, &ord, 16, &mut cnf);
        let support = truncate_support(&theta, &ord, 16);
        for code in 0..4u32 {
            let x = SkeletonAssignment {
                values: vec![code & 1 == 1, code >> 1 & 1 == 1],
            };
            let image = SkeletonAssignment {
                values: vec![x.get(sv(1)), x.get(sv(0))],
            };
            let survives = lex_leader_holds(&theta, &support, &x);
            assert_eq!(survives, lex_le(&x, &image, &ord));
        }
    }

    #[test]
    fn truncated_sbp_admits_a_superset_of_models() {
        let theta = perm(&[(0, 1), (1, 0), (2, 3), (3, 2)]);
        let ord = order_variables(&cnf_with(4, &[]), OrderingMode::Index);
        let full_support = truncate_support(&theta, &ord, 16);
        for k in 1..=4usize {
            let cut = truncate_support(&theta, &ord, k);
            for code in 0..16u32 {
                let x = SkeletonAssignment {
                    values: (0..4).map(|v| code >> v & 1 == 1).collect(),
                };
                if lex_leader_holds(&theta, &full_support, &x) {
                    assert!(lex_leader_holds(&theta, &cut, &x));
                }
            }
        }
    }

    fn int_decl(name: &str) -> Decl {
        Decl { name: name.to_string(), sort: Sort::Int }
    }

    fn tperm(pairs: &[(&str, &str)]) -> Permutation {
        let map: BTreeMap<String, String> = pairs
            .iter()
            .map(|&(a, b)| (a.to_string(), b.to_string()))
            .collect();
        Permutation::new(BTreeMap::new(), map)
    }

    #[test]
    fn theory_sbp_for_a_swap() {
        let decls = vec![int_decl("x"), int_decl("y"), int_decl("z")];
        let theta = tperm(&[("x", "y"), ("y", "x")]);
        let f = build_theory_sbp(&theta, &decls).unwrap();
        let var = |n: &str| Term::Var { name: n.to_string(), sort: Sort::Int };
        let expected = Formula::And(vec![
            Formula::Atom(Atom::new(Relation::Le, var("x"), var("y"))),
            Formula::Implies(
                Box::new(Formula::Atom(Atom::new(Relation::Eq, var("x"), var("y")))),
                Box::new(Formula::Atom(Atom::new(Relation::Le, var("y"), var("x")))),
            ),
        ]);
        assert_eq!(f, expected);
    }

    #[test]
    fn theory_sbp_for_a_three_cycle() {
        let decls = vec![int_decl("x"), int_decl("y"), int_decl("z")];
        let theta = tperm(&[("x", "y"), ("y", "z"), ("z", "x")]);
        let f = build_theory_sbp(&theta, &decls).unwrap();
        let var = |n: &str| Term::Var { name: n.to_string(), sort: Sort::Int };
        let eq = |a: &str, b: &str| {
            Formula::Atom(Atom::new(Relation::Eq, var(a), var(b)))
        };
        let le = |a: &str, b: &str| {
            Formula::Atom(Atom::new(Relation::Le, var(a), var(b)))
        };
        let expected = Formula::And(vec![
            le("x", "y"),
            Formula::Implies(Box::new(eq("x", "y")), Box::new(le("y", "z"))),
            Formula::Implies(
                Box::new(Formula::And(vec![eq("x", "y"), eq("y", "z")])),
                Box::new(le("z", "x")),
            ),
        ]);
        assert_eq!(f, expected);
    }

    #[test]
    fn theory_sbp_identity_is_true() {
        let decls = vec![int_decl("x")];
        let f = build_theory_sbp(&Permutation::identity(), &decls).unwrap();
        assert_eq!(f, Formula::Const(true));
    }

    #[test]
    fn theory_sbp_rejects_mixed_sorts() {
        let decls = vec![
            int_decl("x"),
            Decl { name: "p".to_string(), sort: Sort::Bool },
        ];
        let theta = tperm(&[("x", "p"), ("p", "x")]);
        assert_eq!(
            build_theory_sbp(&theta, &decls),
            Err(SbpError::SortMismatch { a: "x".to_string(), b: "p".to_string() })
        );
    }

    #[test]
    fn theory_sbp_rejects_undeclared_variables() {
        let decls = vec![int_decl("x")];
        let theta = tperm(&[("x", "w"), ("w", "x")]);
        assert_eq!(
            build_theory_sbp(&theta, &decls),
            Err(SbpError::UnknownVariable("w".to_string()))
        );
    }
}
