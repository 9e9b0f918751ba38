//! Canonical form for terms, atoms, and formulas.
//!
//! The canonical form makes syntactic identity meaningful: two atoms that
//! differ only by argument order of commutative operators, by `>`/`>=`
//! spelling, or by foldable constants normalize to the same tree. Renaming
//! variables by a symmetry and re-normalizing therefore reproduces the
//! original formula exactly, which is the soundness gate for detected
//! symmetries.
//!
//! Rewrites: arguments of `And`/`Or`/`Add`/`Mul` and of `Eq`/`Neq` are sorted
//! by a fixed structural (preorder) total order; `Sub(a, b)` becomes
//! `Add(a, Neg(b))`; integer constants inside `Add`/`Mul` are folded;
//! `Gt`/`Ge` are rewritten to `Lt`/`Le` with the sides swapped. Single-child
//! `And`/`Or`/`Add`/`Mul` collapse to the child. `normalize` is idempotent.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::ast::{Atom, Formula, Relation, Script, Term};

pub fn normalize_term(t: &Term) -> Term {
    match t {
        Term::IntConst(c) => Term::IntConst(c.clone()),
        Term::Var { name, sort } => Term::Var { name: name.clone(), sort: *sort },
        Term::Neg(a) => Term::Neg(Box::new(normalize_term(a))),
        Term::Sub(a, b) => {
            let a = normalize_term(a);
            let b = normalize_term(b);
            sort_and_fold_add(vec![a, Term::Neg(Box::new(b))])
        }
        Term::Add(ts) => sort_and_fold_add(ts.iter().map(normalize_term).collect()),
        Term::Mul(ts) => sort_and_fold_mul(ts.iter().map(normalize_term).collect()),
    }
}

fn sort_and_fold_add(ts: Vec<Term>) -> Term {
    let mut rest = Vec::with_capacity(ts.len());
    let mut acc = BigInt::zero();
    let mut saw_const = false;
    for t in ts {
        match t {
            Term::IntConst(c) => {
                acc += c;
                saw_const = true;
            }
            other => rest.push(other),
        }
    }
    if rest.is_empty() {
        return Term::IntConst(acc);
    }
    if saw_const && !acc.is_zero() {
        rest.push(Term::IntConst(acc));
    }
    rest.sort();
    if rest.len() == 1 {
        rest.pop().unwrap()
    } else {
        Term::Add(rest)
    }
}

fn sort_and_fold_mul(ts: Vec<Term>) -> Term {
    let mut rest = Vec::with_capacity(ts.len());
    let mut acc = BigInt::one();
    let mut saw_const = false;
    for t in ts {
        match t {
            Term::IntConst(c) => {
                acc *= c;
                saw_const = true;
            }
            other => rest.push(other),
        }
    }
    if acc.is_zero() {
        return Term::IntConst(acc);
    }
    if rest.is_empty() {
        return Term::IntConst(acc);
    }
    if saw_const && !acc.is_one() {
        rest.push(Term::IntConst(acc));
    }
    rest.sort();
    if rest.len() == 1 {
        rest.pop().unwrap()
    } else {
        Term::Mul(rest)
    }
}

pub fn normalize_atom(a: &Atom) -> Atom {
    let lhs = normalize_term(&a.lhs);
    let rhs = normalize_term(&a.rhs);
    match a.rel {
        Relation::Gt => Atom::new(Relation::Lt, rhs, lhs),
        Relation::Ge => Atom::new(Relation::Le, rhs, lhs),
        Relation::Lt => Atom::new(Relation::Lt, lhs, rhs),
        Relation::Le => Atom::new(Relation::Le, lhs, rhs),
        rel @ (Relation::Eq | Relation::Neq) => {
            if lhs <= rhs {
                Atom::new(rel, lhs, rhs)
            } else {
                Atom::new(rel, rhs, lhs)
            }
        }
    }
}

pub fn normalize(f: &Formula) -> Formula {
    match f {
        Formula::Atom(a) => Formula::Atom(normalize_atom(a)),
        Formula::Const(b) => Formula::Const(*b),
        Formula::Not(g) => Formula::Not(Box::new(normalize(g))),
        Formula::Implies(a, b) => {
            Formula::Implies(Box::new(normalize(a)), Box::new(normalize(b)))
        }
        Formula::And(fs) | Formula::Or(fs) => {
            let mut gs: Vec<Formula> = fs.iter().map(normalize).collect();
            gs.sort();
            if gs.len() == 1 {
                gs.pop().unwrap()
            } else if matches!(f, Formula::And(_)) {
                Formula::And(gs)
            } else {
                Formula::Or(gs)
            }
        }
    }
}

/// Normalizes the assertion of a script, leaving declarations and metadata
/// untouched.
pub fn normalize_script(s: &Script) -> Script {
    Script { decls: s.decls.clone(), assertion: normalize(&s.assertion), meta: s.meta.clone() }
}
