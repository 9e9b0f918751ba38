//! Boolean skeleton of a formula: each distinct normalized atom becomes a
//! fresh Boolean variable, and the Boolean structure over those variables is
//! converted to CNF for the SAT core.
//!
//! CNF conversion keeps formulas that are already in clause shape free of
//! auxiliaries, and otherwise applies a Tseitin transformation with full
//! biconditional definitions. The full encoding makes the projection of CNF
//! models onto skeleton variables exactly the model set of the skeleton
//! formula, which downstream model enumeration and the symmetry machinery
//! rely on.

use std::collections::HashMap;
use std::fmt;
use std::ops::Not;

use crate::ast::{Atom, Formula, Script};
use crate::normalize::normalize_atom;

/// A Boolean variable standing for one normalized atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SkeletonVar(pub u32);

impl SkeletonVar {
    /// Display label: single letters starting at `P` while they last, then
    /// `b<id>`.
    pub fn label(self) -> String {
        const LETTERS: &[u8] = b"PQRSTUVWXYZ";
        match LETTERS.get(self.0 as usize) {
            Some(&c) => (c as char).to_string(),
            None => format!("b{}", self.0),
        }
    }
}

impl fmt::Display for SkeletonVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Bijection between skeleton variables and the normalized atoms they stand
/// for. Variable ids are assigned in first-occurrence order.
#[derive(Clone, Debug, Default)]
pub struct AtomMap {
    atoms: Vec<Atom>,
    index: HashMap<Atom, u32>,
}

impl AtomMap {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom(&self, v: SkeletonVar) -> &Atom {
        &self.atoms[v.0 as usize]
    }

    pub fn var_of(&self, atom: &Atom) -> Option<SkeletonVar> {
        self.index.get(atom).copied().map(SkeletonVar)
    }

    pub fn iter(&self) -> impl Iterator<Item = (SkeletonVar, &Atom)> {
        self.atoms.iter().enumerate().map(|(i, a)| (SkeletonVar(i as u32), a))
    }

    fn intern(&mut self, atom: &Atom) -> SkeletonVar {
        if let Some(&v) = self.index.get(atom) {
            return SkeletonVar(v);
        }
        let v = self.atoms.len() as u32;
        self.atoms.push(atom.clone());
        self.index.insert(atom.clone(), v);
        SkeletonVar(v)
    }
}

/// Boolean structure over skeleton variables; mirrors `Formula` with atoms
/// replaced by variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SkelFormula {
    Var(SkeletonVar),
    Const(bool),
    And(Vec<SkelFormula>),
    Or(Vec<SkelFormula>),
    Not(Box<SkelFormula>),
    Implies(Box<SkelFormula>, Box<SkelFormula>),
}

impl SkelFormula {
    /// Applies a skeleton-variable permutation given as a total function.
    pub fn map_vars(&self, f: &impl Fn(SkeletonVar) -> SkeletonVar) -> SkelFormula {
        match self {
            SkelFormula::Var(v) => SkelFormula::Var(f(*v)),
            SkelFormula::Const(b) => SkelFormula::Const(*b),
            SkelFormula::And(fs) => {
                SkelFormula::And(fs.iter().map(|g| g.map_vars(f)).collect())
            }
            SkelFormula::Or(fs) => SkelFormula::Or(fs.iter().map(|g| g.map_vars(f)).collect()),
            SkelFormula::Not(g) => SkelFormula::Not(Box::new(g.map_vars(f))),
            SkelFormula::Implies(a, b) => {
                SkelFormula::Implies(Box::new(a.map_vars(f)), Box::new(b.map_vars(f)))
            }
        }
    }

    /// Canonical form mirroring `normalize`: commutative arguments sorted,
    /// single-child `And`/`Or` collapsed.
    pub fn normalized(&self) -> SkelFormula {
        match self {
            SkelFormula::Var(v) => SkelFormula::Var(*v),
            SkelFormula::Const(b) => SkelFormula::Const(*b),
            SkelFormula::Not(g) => SkelFormula::Not(Box::new(g.normalized())),
            SkelFormula::Implies(a, b) => {
                SkelFormula::Implies(Box::new(a.normalized()), Box::new(b.normalized()))
            }
            SkelFormula::And(fs) | SkelFormula::Or(fs) => {
                let mut gs: Vec<SkelFormula> = fs.iter().map(|g| g.normalized()).collect();
                gs.sort();
                if gs.len() == 1 {
                    gs.pop().unwrap()
                } else if matches!(self, SkelFormula::And(_)) {
                    SkelFormula::And(gs)
                } else {
                    SkelFormula::Or(gs)
                }
            }
        }
    }

    /// Truth value under a total assignment to skeleton variables.
    pub fn eval(&self, values: &[bool]) -> bool {
        match self {
            SkelFormula::Var(v) => values[v.0 as usize],
            SkelFormula::Const(b) => *b,
            SkelFormula::And(fs) => fs.iter().all(|g| g.eval(values)),
            SkelFormula::Or(fs) => fs.iter().any(|g| g.eval(values)),
            SkelFormula::Not(g) => !g.eval(values),
            SkelFormula::Implies(a, b) => !a.eval(values) || b.eval(values),
        }
    }
}

/// Replaces every atom of a normalized script's assertion by a skeleton
/// variable, interning syntactically identical atoms to the same variable.
pub fn extract_skeleton(script: &Script) -> (SkelFormula, AtomMap) {
    let mut map = AtomMap::default();
    let psi = walk(&script.assertion, &mut map);
    (psi, map)
}

fn walk(f: &Formula, map: &mut AtomMap) -> SkelFormula {
    match f {
        Formula::Atom(a) => {
            debug_assert_eq!(normalize_atom(a), *a, "skeleton extraction expects normalized atoms");
            SkelFormula::Var(map.intern(a))
        }
        Formula::Const(b) => SkelFormula::Const(*b),
        Formula::And(fs) => SkelFormula::And(fs.iter().map(|g| walk(g, map)).collect()),
        Formula::Or(fs) => SkelFormula::Or(fs.iter().map(|g| walk(g, map)).collect()),
        Formula::Not(g) => SkelFormula::Not(Box::new(walk(g, map))),
        Formula::Implies(a, b) => {
            SkelFormula::Implies(Box::new(walk(a, map)), Box::new(walk(b, map)))
        }
    }
}

/// A propositional literal, packed as `var << 1 | negated`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: u32, positive: bool) -> Lit {
        Lit(var << 1 | u32::from(!positive))
    }

    pub fn positive(var: u32) -> Lit {
        Lit::new(var, true)
    }

    pub fn negative(var: u32) -> Lit {
        Lit::new(var, false)
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_pos(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense index usable for watch lists (`2*var + sign`).
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// True under the given total assignment.
    pub fn eval(self, values: &[bool]) -> bool {
        values[self.var() as usize] == self.is_pos()
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Lit {
    /// DIMACS-style rendering: 1-based variable, minus sign for negation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pos() {
            write!(f, "{}", self.var() + 1)
        } else {
            write!(f, "-{}", self.var() + 1)
        }
    }
}

/// Clause set in CNF. Variables `0..num_skeleton_vars` are skeleton
/// variables; the rest are auxiliaries introduced by CNF conversion or SBP
/// encoding.
#[derive(Clone, Debug, Default)]
pub struct Cnf {
    pub num_vars: u32,
    pub num_skeleton_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    pub fn new(num_skeleton_vars: u32) -> Cnf {
        Cnf { num_vars: num_skeleton_vars, num_skeleton_vars, clauses: Vec::new() }
    }

    pub fn fresh_var(&mut self) -> u32 {
        let v = self.num_vars;
        self.num_vars += 1;
        v
    }

    pub fn aux_vars(&self) -> std::ops::Range<u32> {
        self.num_skeleton_vars..self.num_vars
    }

    /// Adds a clause after removing duplicate literals; tautologies are
    /// dropped. An empty clause is recorded as-is and makes the CNF
    /// unsatisfiable.
    pub fn push_clause(&mut self, mut lits: Vec<Lit>) {
        lits.sort();
        lits.dedup();
        let tautology = lits.windows(2).any(|w| w[0].var() == w[1].var());
        if !tautology {
            self.clauses.push(lits);
        }
    }

    /// True when the assignment (total over `num_vars`) satisfies every
    /// clause.
    pub fn satisfied_by(&self, values: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.eval(values)))
    }
}

/// Total truth assignment to the skeleton variables only (auxiliaries
/// projected away).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SkeletonAssignment {
    pub values: Vec<bool>,
}

impl SkeletonAssignment {
    /// Projects a total CNF model down to the skeleton variables.
    pub fn from_cnf_model(model: &[bool], num_skeleton_vars: u32) -> SkeletonAssignment {
        SkeletonAssignment { values: model[..num_skeleton_vars as usize].to_vec() }
    }

    pub fn get(&self, v: SkeletonVar) -> bool {
        self.values[v.0 as usize]
    }
}

/// Converts a skeleton formula into CNF over `num_skeleton_vars` variables.
///
/// Formulas already in clause shape are emitted directly with no auxiliary
/// variables; everything else goes through Tseitin with full biconditional
/// definitions, so CNF models projected to skeleton variables coincide with
/// the models of `psi`.
pub fn to_cnf(psi: &SkelFormula, num_skeleton_vars: u32) -> Cnf {
    let mut cnf = Cnf::new(num_skeleton_vars);
    match fold_consts(psi) {
        SkelFormula::Const(true) => return cnf,
        SkelFormula::Const(false) => {
            cnf.clauses.push(Vec::new());
            return cnf;
        }
        folded => {
            let mut conjuncts = Vec::new();
            flatten_and(&folded, &mut conjuncts);
            for c in conjuncts {
                emit_conjunct(&c, &mut cnf);
            }
        }
    }
    cnf
}

/// Evaluates away Boolean constants so the encoder below never meets them.
fn fold_consts(f: &SkelFormula) -> SkelFormula {
    match f {
        SkelFormula::Var(_) | SkelFormula::Const(_) => f.clone(),
        SkelFormula::Not(g) => match fold_consts(g) {
            SkelFormula::Const(b) => SkelFormula::Const(!b),
            g => SkelFormula::Not(Box::new(g)),
        },
        SkelFormula::Implies(a, b) => match (fold_consts(a), fold_consts(b)) {
            (SkelFormula::Const(false), _) | (_, SkelFormula::Const(true)) => {
                SkelFormula::Const(true)
            }
            (SkelFormula::Const(true), b) => b,
            (a, SkelFormula::Const(false)) => SkelFormula::Not(Box::new(a)),
            (a, b) => SkelFormula::Implies(Box::new(a), Box::new(b)),
        },
        SkelFormula::And(fs) => {
            let mut out = Vec::new();
            for g in fs {
                match fold_consts(g) {
                    SkelFormula::Const(false) => return SkelFormula::Const(false),
                    SkelFormula::Const(true) => {}
                    g => out.push(g),
                }
            }
            match out.len() {
                0 => SkelFormula::Const(true),
                1 => out.pop().unwrap(),
                _ => SkelFormula::And(out),
            }
        }
        SkelFormula::Or(fs) => {
            let mut out = Vec::new();
            for g in fs {
                match fold_consts(g) {
                    SkelFormula::Const(true) => return SkelFormula::Const(true),
                    SkelFormula::Const(false) => {}
                    g => out.push(g),
                }
            }
            match out.len() {
                0 => SkelFormula::Const(false),
                1 => out.pop().unwrap(),
                _ => SkelFormula::Or(out),
            }
        }
    }
}

fn flatten_and(f: &SkelFormula, out: &mut Vec<SkelFormula>) {
    match f {
        SkelFormula::And(fs) => {
            for g in fs {
                flatten_and(g, out);
            }
        }
        other => out.push(other.clone()),
    }
}

/// Literal view of a formula, if it is one.
fn as_literal(f: &SkelFormula) -> Option<Lit> {
    match f {
        SkelFormula::Var(v) => Some(Lit::positive(v.0)),
        SkelFormula::Not(g) => match g.as_ref() {
            SkelFormula::Var(v) => Some(Lit::negative(v.0)),
            _ => None,
        },
        _ => None,
    }
}

/// Collects the literals of an `Or`-of-literals (nested `Or`s allowed);
/// `None` when any disjunct is not a literal.
fn as_clause(f: &SkelFormula, out: &mut Vec<Lit>) -> bool {
    if let Some(l) = as_literal(f) {
        out.push(l);
        return true;
    }
    match f {
        SkelFormula::Or(fs) => fs.iter().all(|g| as_clause(g, out)),
        _ => false,
    }
}

fn emit_conjunct(f: &SkelFormula, cnf: &mut Cnf) {
    let mut lits = Vec::new();
    if as_clause(f, &mut lits) {
        cnf.push_clause(lits);
        return;
    }
    match f {
        // Top-level disjunction: encode the non-literal children and assert
        // one clause over the resulting literals.
        SkelFormula::Or(fs) => {
            let lits: Vec<Lit> = fs.iter().map(|g| encode(g, cnf)).collect();
            cnf.push_clause(lits);
        }
        SkelFormula::Implies(a, b) => {
            let la = encode(a, cnf);
            let lb = encode(b, cnf);
            cnf.push_clause(vec![!la, lb]);
        }
        other => {
            let l = encode(other, cnf);
            cnf.push_clause(vec![l]);
        }
    }
}

/// Returns a literal equivalent to `f`, introducing a defining auxiliary
/// variable (with full biconditional clauses) for each internal node.
fn encode(f: &SkelFormula, cnf: &mut Cnf) -> Lit {
    if let Some(l) = as_literal(f) {
        return l;
    }
    match f {
        SkelFormula::Var(_) | SkelFormula::Const(_) => unreachable!("handled before encoding"),
        SkelFormula::Not(g) => !encode(g, cnf),
        SkelFormula::And(fs) => {
            let lits: Vec<Lit> = fs.iter().map(|g| encode(g, cnf)).collect();
            let a = Lit::positive(cnf.fresh_var());
            for &l in &lits {
                cnf.push_clause(vec![!a, l]);
            }
            let mut long = vec![a];
            long.extend(lits.iter().map(|&l| !l));
            cnf.push_clause(long);
            a
        }
        SkelFormula::Or(fs) => {
            let lits: Vec<Lit> = fs.iter().map(|g| encode(g, cnf)).collect();
            let a = Lit::positive(cnf.fresh_var());
            for &l in &lits {
                cnf.push_clause(vec![a, !l]);
            }
            let mut long = vec![!a];
            long.extend(lits.iter().copied());
            cnf.push_clause(long);
            a
        }
        SkelFormula::Implies(x, y) => {
            let lx = !encode(x, cnf);
            let ly = encode(y, cnf);
            let a = Lit::positive(cnf.fresh_var());
            cnf.push_clause(vec![a, !lx]);
            cnf.push_clause(vec![a, !ly]);
            cnf.push_clause(vec![!a, lx, ly]);
            a
        }
    }
}

/// Translates a total skeleton assignment into the conjunction of theory
/// literals it induces: the atom itself where true, its complement (with the
/// relation complemented) where false.
pub fn assignment_to_literal_conjunction(
    x: &SkeletonAssignment,
    phi: &AtomMap,
) -> Vec<Atom> {
    assert_eq!(x.values.len(), phi.len(), "assignment must be total over skeleton variables");
    phi.iter()
        .map(|(v, atom)| if x.get(v) { atom.clone() } else { atom.complement() })
        .collect()
}
