//! Bounded-domain theory checker for conjunctions of integer literals.
//!
//! Semantics are relative to a finite domain: every variable ranges over
//! `[-B, B]`. Consistency of a literal conjunction is therefore decidable by
//! search: interval constraint propagation over the linear parts shrinks the
//! variable boxes, and depth-first enumeration with per-literal interval
//! pruning covers what propagation cannot decide (nonlinear monomials,
//! disequalities). A candidate model is re-checked by the independent exact
//! evaluator before it is reported.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::ast::{Atom, Formula, Relation, Term};
use crate::deadline::Deadline;
use crate::eval::Evaluator;
use crate::skeleton::{Lit, SkeletonAssignment, SkeletonVar};

/// Half-width of the variable domain `[-B, B]`.
pub type DomainBound = i64;

/// Total assignment to the theory variables of the checked literals.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct TheoryModel {
    pub values: BTreeMap<String, i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConsistencyResult {
    Consistent(TheoryModel),
    /// Indices (into the input literal slice) of a conflicting subset. The
    /// full index set is always a valid core.
    Inconsistent { core: Vec<usize> },
    Cancelled,
}

/// How often (in search/propagation steps) the deadline is polled.
const DEADLINE_CHECK_INTERVAL: u64 = 256;

/// Decides whether the literal conjunction has a model over `[-B, B]^n`.
pub fn check_consistency(
    literals: &[Atom],
    bound: DomainBound,
    deadline: &Deadline,
) -> ConsistencyResult {
    assert!(bound >= 1, "domain bound must be positive");
    let mut checker = Checker::new(literals, bound, deadline);
    checker.run()
}

/// Greedily removes literals that are unnecessary for inconsistency. The
/// result is still a valid core (checked by re-running the checker); on
/// deadline expiry the current (possibly unshrunk) core is returned.
pub fn shrink_core(
    literals: &[Atom],
    bound: DomainBound,
    deadline: &Deadline,
) -> Vec<usize> {
    let mut core: Vec<usize> = (0..literals.len()).collect();
    let mut i = 0;
    while i < core.len() {
        if deadline.expired() {
            break;
        }
        let candidate: Vec<Atom> = core
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, &idx)| literals[idx].clone())
            .collect();
        match check_consistency(&candidate, bound, deadline) {
            ConsistencyResult::Inconsistent { .. } => {
                core.remove(i);
            }
            _ => i += 1,
        }
    }
    core
}

/// Blocks the skeleton assignment restricted to `core`: the disjunction of
/// the negations of its literals.
pub fn conflict_clause(x: &SkeletonAssignment, core: &[SkeletonVar]) -> Vec<Lit> {
    core.iter().map(|&v| Lit::new(v.0, !x.get(v))).collect()
}

/// Closed integer interval; empty when `lo > hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Iv {
    lo: i128,
    hi: i128,
}

impl Iv {
    fn point(v: i128) -> Iv {
        Iv { lo: v, hi: v }
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    fn add(self, other: Iv) -> Iv {
        Iv { lo: self.lo.saturating_add(other.lo), hi: self.hi.saturating_add(other.hi) }
    }

    fn mul(self, other: Iv) -> Iv {
        let products = [
            self.lo.saturating_mul(other.lo),
            self.lo.saturating_mul(other.hi),
            self.hi.saturating_mul(other.lo),
            self.hi.saturating_mul(other.hi),
        ];
        Iv {
            lo: *products.iter().min().unwrap(),
            hi: *products.iter().max().unwrap(),
        }
    }

    fn scale(self, c: i128) -> Iv {
        self.mul(Iv::point(c))
    }
}

/// Comparison operator of a literal brought into the form `p OP 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PolyOp {
    Lt0,
    Le0,
    Eq0,
    Ne0,
}

/// Sparse polynomial: monomial (sorted variable indices, with multiplicity)
/// to coefficient. The empty monomial is the constant term.
#[derive(Clone, Debug)]
struct Poly {
    terms: Vec<(Vec<usize>, i128)>,
}

/// One literal, preprocessed for propagation. `poly` is `None` when a
/// coefficient exceeded `i128` (the literal is then checked only by exact
/// evaluation at leaves).
struct PolyLit {
    poly: Option<(Poly, PolyOp)>,
}

struct Checker<'a> {
    literals: &'a [Atom],
    vars: Vec<String>,
    bound: i64,
    deadline: &'a Deadline,
    poly_lits: Vec<PolyLit>,
    evaluator: Evaluator,
    steps: u64,
    cancelled: bool,
}

impl<'a> Checker<'a> {
    fn new(literals: &'a [Atom], bound: i64, deadline: &'a Deadline) -> Checker<'a> {
        let mut vars = Vec::new();
        for a in literals {
            a.collect_vars(&mut vars);
        }
        vars.sort();
        let conjunction = Formula::And(
            literals
                .iter()
                .map(|a| Formula::Atom(a.clone()))
                .chain(std::iter::once(Formula::Const(true)))
                .collect(),
        );
        let evaluator = Evaluator::new(&conjunction, &vars);
        let index: BTreeMap<&str, usize> =
            vars.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let poly_lits = literals
            .iter()
            .map(|a| PolyLit { poly: poly_of_atom(a, &index) })
            .collect();
        Checker {
            literals,
            vars,
            bound,
            deadline,
            poly_lits,
            evaluator,
            steps: 0,
            cancelled: false,
        }
    }

    fn tick(&mut self) -> bool {
        self.steps += 1;
        if self.steps.is_multiple_of(DEADLINE_CHECK_INTERVAL) && self.deadline.expired() {
            self.cancelled = true;
        }
        self.cancelled
    }

    fn full_core(&self) -> ConsistencyResult {
        ConsistencyResult::Inconsistent { core: (0..self.literals.len()).collect() }
    }

    fn run(&mut self) -> ConsistencyResult {
        if self.vars.is_empty() {
            // Ground literals: evaluate directly.
            return if self.evaluator.eval(&[]) {
                ConsistencyResult::Consistent(TheoryModel::default())
            } else {
                self.full_core()
            };
        }
        let mut boxes = vec![Iv { lo: -(self.bound as i128), hi: self.bound as i128 };
            self.vars.len()];
        if !self.propagate(&mut boxes) {
            return if self.cancelled { ConsistencyResult::Cancelled } else { self.full_core() };
        }
        // Enumerate narrow variables first; ties break on index (and hence
        // on name, since variables are name-sorted).
        let mut order: Vec<usize> = (0..self.vars.len()).collect();
        order.sort_by_key(|&i| (boxes[i].hi - boxes[i].lo, i));
        let mut values = vec![0i64; self.vars.len()];
        match self.dfs(0, &order, &boxes, &mut values) {
            Some(true) => {
                let model = TheoryModel {
                    values: self
                        .vars
                        .iter()
                        .cloned()
                        .zip(values.iter().copied())
                        .collect(),
                };
                ConsistencyResult::Consistent(model)
            }
            Some(false) => self.full_core(),
            None => ConsistencyResult::Cancelled,
        }
    }

    /// Depth-first search over the (propagated) boxes. `Some(true)` fills
    /// `values` with a verified model; `None` means cancelled.
    fn dfs(
        &mut self,
        depth: usize,
        order: &[usize],
        boxes: &[Iv],
        values: &mut [i64],
    ) -> Option<bool> {
        if depth == order.len() {
            // Exact final gate, independent of the interval machinery.
            return Some(self.evaluator.eval(values));
        }
        let v = order[depth];
        let (lo, hi) = (boxes[v].lo, boxes[v].hi);
        for val in lo..=hi {
            if self.tick() {
                return None;
            }
            let mut child = boxes.to_vec();
            child[v] = Iv::point(val);
            if !self.propagate(&mut child) {
                if self.cancelled {
                    return None;
                }
                continue;
            }
            values[v] = val as i64;
            match self.dfs(depth + 1, order, &child, values) {
                Some(true) => return Some(true),
                Some(false) => {}
                None => return None,
            }
        }
        Some(false)
    }

    /// Interval propagation to fixpoint. Returns false when some literal is
    /// interval-infeasible over the boxes (or on cancellation).
    fn propagate(&mut self, boxes: &mut [Iv]) -> bool {
        loop {
            if self.tick() {
                return false;
            }
            let mut changed = false;
            for lit in &self.poly_lits {
                let (poly, op) = match &lit.poly {
                    Some(p) => p,
                    None => continue,
                };
                let iv = poly.interval(boxes);
                let feasible = match op {
                    PolyOp::Lt0 => iv.lo < 0,
                    PolyOp::Le0 => iv.lo <= 0,
                    PolyOp::Eq0 => iv.lo <= 0 && iv.hi >= 0,
                    PolyOp::Ne0 => !(iv.lo == 0 && iv.hi == 0),
                };
                if !feasible {
                    return false;
                }
                // Bound tightening from linear occurrences.
                if matches!(op, PolyOp::Ne0) {
                    continue;
                }
                for (mono, c) in &poly.terms {
                    if mono.len() != 1 {
                        continue;
                    }
                    let v = mono[0];
                    let rest = poly.interval_excluding(boxes, mono);
                    // c*x + rest OP 0
                    let (mut lo, mut hi) = (boxes[v].lo, boxes[v].hi);
                    match op {
                        PolyOp::Lt0 | PolyOp::Le0 => {
                            // c*x <= K with K = -rest.lo (minus one for Lt).
                            let k = (-rest.lo).saturating_sub(i128::from(*op == PolyOp::Lt0));
                            if *c > 0 {
                                hi = hi.min(div_floor(k, *c));
                            } else {
                                lo = lo.max(div_ceil(k, *c));
                            }
                        }
                        PolyOp::Eq0 => {
                            // -rest.hi <= c*x <= -rest.lo
                            let (a, b) = (-rest.hi, -rest.lo);
                            if *c > 0 {
                                lo = lo.max(div_ceil(a, *c));
                                hi = hi.min(div_floor(b, *c));
                            } else {
                                lo = lo.max(div_ceil(b, *c));
                                hi = hi.min(div_floor(a, *c));
                            }
                        }
                        PolyOp::Ne0 => unreachable!(),
                    }
                    if lo > boxes[v].lo || hi < boxes[v].hi {
                        boxes[v] = Iv { lo, hi };
                        if boxes[v].is_empty() {
                            return false;
                        }
                        changed = true;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }
}

impl Poly {
    fn interval(&self, boxes: &[Iv]) -> Iv {
        let mut acc = Iv::point(0);
        for (mono, c) in &self.terms {
            acc = acc.add(mono_interval(mono, boxes).scale(*c));
        }
        acc
    }

    /// Interval of the polynomial without the given monomial's term.
    fn interval_excluding(&self, boxes: &[Iv], skip: &[usize]) -> Iv {
        let mut acc = Iv::point(0);
        for (mono, c) in &self.terms {
            if mono == skip {
                continue;
            }
            acc = acc.add(mono_interval(mono, boxes).scale(*c));
        }
        acc
    }
}

fn mono_interval(mono: &[usize], boxes: &[Iv]) -> Iv {
    let mut acc = Iv::point(1);
    for &v in mono {
        acc = acc.mul(boxes[v]);
    }
    acc
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}

/// Brings `lhs REL rhs` into `p OP 0` form with `p` expanded into monomials.
/// `None` when any coefficient falls outside `i128`.
fn poly_of_atom(a: &Atom, index: &BTreeMap<&str, usize>) -> Option<(Poly, PolyOp)> {
    let (diff, op) = match a.rel {
        Relation::Lt => (sub_big(&a.lhs, &a.rhs), PolyOp::Lt0),
        Relation::Le => (sub_big(&a.lhs, &a.rhs), PolyOp::Le0),
        Relation::Gt => (sub_big(&a.rhs, &a.lhs), PolyOp::Lt0),
        Relation::Ge => (sub_big(&a.rhs, &a.lhs), PolyOp::Le0),
        Relation::Eq => (sub_big(&a.lhs, &a.rhs), PolyOp::Eq0),
        Relation::Neq => (sub_big(&a.lhs, &a.rhs), PolyOp::Ne0),
    };
    let mut terms = Vec::with_capacity(diff.len());
    for (mono_names, coeff) in diff {
        let mono: Vec<usize> = mono_names.iter().map(|n| index[n.as_str()]).collect();
        terms.push((mono, coeff.to_i128()?));
    }
    Some((Poly { terms }, op))
}

type BigPoly = BTreeMap<Vec<String>, BigInt>;

fn sub_big(lhs: &Term, rhs: &Term) -> BigPoly {
    let mut p = big_poly(lhs);
    for (mono, c) in big_poly(rhs) {
        add_term(&mut p, mono, -c);
    }
    p.retain(|_, c| *c != BigInt::from(0));
    p
}

fn add_term(p: &mut BigPoly, mono: Vec<String>, c: BigInt) {
    use std::collections::btree_map::Entry;
    match p.entry(mono) {
        Entry::Vacant(e) => {
            e.insert(c);
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += c;
        }
    }
}

fn big_poly(t: &Term) -> BigPoly {
    match t {
        Term::IntConst(c) => {
            let mut p = BigPoly::new();
            p.insert(Vec::new(), c.clone());
            p
        }
        Term::Var { name, .. } => {
            let mut p = BigPoly::new();
            p.insert(vec![name.clone()], BigInt::from(1));
            p
        }
        Term::Add(ts) => {
            let mut p = BigPoly::new();
            for t in ts {
                for (mono, c) in big_poly(t) {
                    add_term(&mut p, mono, c);
                }
            }
            p
        }
        Term::Sub(a, b) => {
            let mut p = big_poly(a);
            for (mono, c) in big_poly(b) {
                add_term(&mut p, mono, -c);
            }
            p
        }
        Term::Neg(a) => {
            let mut p = BigPoly::new();
            for (mono, c) in big_poly(a) {
                add_term(&mut p, mono, -c);
            }
            p
        }
        Term::Mul(ts) => {
            let mut p = BigPoly::new();
            p.insert(Vec::new(), BigInt::from(1));
            for t in ts {
                let q = big_poly(t);
                let mut next = BigPoly::new();
                for (m1, c1) in &p {
                    for (m2, c2) in &q {
                        let mut mono = m1.clone();
                        mono.extend(m2.iter().cloned());
                        mono.sort();
                        add_term(&mut next, mono, c1.clone() * c2.clone());
                    }
                }
                p = next;
            }
            p
        }
    }
}
