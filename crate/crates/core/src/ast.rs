//! Abstract syntax for the supported SMT-LIB fragment: Boolean combinations
//! of (in)equalities between integer polynomials.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

/// Sort of a declared symbol. Only `Int` symbols may appear inside terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Bool,
    Int,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::Int => write!(f, "Int"),
        }
    }
}

/// Integer term. Constants are arbitrary-precision so parsing never loses
/// information; the solver itself only ever evaluates over small domains.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    IntConst(BigInt),
    Var { name: String, sort: Sort },
    Add(Vec<Term>),
    Sub(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Mul(Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var { name: name.to_string(), sort: Sort::Int }
    }

    pub fn int(v: i64) -> Term {
        Term::IntConst(BigInt::from(v))
    }

    /// Renames variables according to `map`; names absent from the map are
    /// left unchanged.
    pub fn rename_vars(&self, map: &BTreeMap<String, String>) -> Term {
        match self {
            Term::IntConst(c) => Term::IntConst(c.clone()),
            Term::Var { name, sort } => {
                let name = map.get(name).cloned().unwrap_or_else(|| name.clone());
                Term::Var { name, sort: *sort }
            }
            Term::Add(ts) => Term::Add(ts.iter().map(|t| t.rename_vars(map)).collect()),
            Term::Sub(a, b) => {
                Term::Sub(Box::new(a.rename_vars(map)), Box::new(b.rename_vars(map)))
            }
            Term::Neg(t) => Term::Neg(Box::new(t.rename_vars(map))),
            Term::Mul(ts) => Term::Mul(ts.iter().map(|t| t.rename_vars(map)).collect()),
        }
    }

    /// Appends every variable name occurring in the term to `out` (first
    /// occurrence order, duplicates skipped).
    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::IntConst(_) => {}
            Term::Var { name, .. } => {
                if !out.iter().any(|n| n == name) {
                    out.push(name.clone());
                }
            }
            Term::Add(ts) | Term::Mul(ts) => {
                for t in ts {
                    t.collect_vars(out);
                }
            }
            Term::Sub(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::Neg(t) => t.collect_vars(out),
        }
    }
}

/// Comparison relation between two integer terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Neq,
}

/// An arithmetic atom `lhs REL rhs`. Both sides are Int-sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub rel: Relation,
    pub lhs: Term,
    pub rhs: Term,
}

impl Atom {
    pub fn new(rel: Relation, lhs: Term, rhs: Term) -> Atom {
        Atom { rel, lhs, rhs }
    }

    /// Logical complement, expressed with the relation complemented so the
    /// result is again a plain atom: ¬(a<b) is b≤a, ¬(a=b) is a≠b, etc.
    pub fn complement(&self) -> Atom {
        let (rel, lhs, rhs) = match self.rel {
            Relation::Lt => (Relation::Le, self.rhs.clone(), self.lhs.clone()),
            Relation::Le => (Relation::Lt, self.rhs.clone(), self.lhs.clone()),
            Relation::Gt => (Relation::Le, self.lhs.clone(), self.rhs.clone()),
            Relation::Ge => (Relation::Lt, self.lhs.clone(), self.rhs.clone()),
            Relation::Eq => (Relation::Neq, self.lhs.clone(), self.rhs.clone()),
            Relation::Neq => (Relation::Eq, self.lhs.clone(), self.rhs.clone()),
        };
        Atom { rel, lhs, rhs }
    }

    pub fn rename_vars(&self, map: &BTreeMap<String, String>) -> Atom {
        Atom {
            rel: self.rel,
            lhs: self.lhs.rename_vars(map),
            rhs: self.rhs.rename_vars(map),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        self.lhs.collect_vars(out);
        self.rhs.collect_vars(out);
    }
}

/// Quantifier-free Boolean structure over arithmetic atoms.
///
/// `And`/`Or` are n-ary with at least one argument; `Implies` is binary.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(Atom),
    Const(bool),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn rename_vars(&self, map: &BTreeMap<String, String>) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(a.rename_vars(map)),
            Formula::Const(b) => Formula::Const(*b),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.rename_vars(map)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.rename_vars(map)).collect()),
            Formula::Not(f) => Formula::Not(Box::new(f.rename_vars(map))),
            Formula::Implies(a, b) => {
                Formula::Implies(Box::new(a.rename_vars(map)), Box::new(b.rename_vars(map)))
            }
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Formula::Atom(a) => a.collect_vars(out),
            Formula::Const(_) => {}
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_vars(out);
                }
            }
            Formula::Not(f) => f.collect_vars(out),
            Formula::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

/// A declared constant symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Decl {
    pub name: String,
    pub sort: Sort,
}

/// Non-semantic script metadata carried through parse/serialize.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScriptMeta {
    pub filename: Option<String>,
    pub logic: Option<String>,
    pub info: Vec<(String, String)>,
    /// Non-fatal diagnostics produced while parsing (e.g. unusual logics).
    pub warnings: Vec<String>,
}

/// A parsed problem: declarations plus the conjunction of all assertions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Script {
    pub decls: Vec<Decl>,
    pub assertion: Formula,
    pub meta: ScriptMeta,
}

impl Script {
    pub fn new(decls: Vec<Decl>, assertion: Formula) -> Script {
        Script { decls, assertion, meta: ScriptMeta::default() }
    }

    /// Structural equality ignoring metadata; what round-trip tests compare.
    pub fn same_problem(&self, other: &Script) -> bool {
        self.decls == other.decls && self.assertion == other.assertion
    }

    /// Declared Int variable names, in declaration order.
    pub fn int_vars(&self) -> Vec<String> {
        self.decls
            .iter()
            .filter(|d| d.sort == Sort::Int)
            .map(|d| d.name.clone())
            .collect()
    }

    pub fn sort_of(&self, name: &str) -> Option<Sort> {
        self.decls.iter().find(|d| d.name == name).map(|d| d.sort)
    }
}
