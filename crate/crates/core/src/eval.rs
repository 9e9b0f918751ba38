//! Exact evaluation of formulas under integer assignments.
//!
//! This is deliberately independent of the skeleton/SAT/theory pipeline: it
//! walks the original formula tree, so it can serve as ground truth for
//! everything downstream. Arithmetic runs in checked `i128` and falls back to
//! arbitrary precision on overflow, so results are always exact.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::ast::{Formula, Relation, Term};

enum CTerm {
    Const(i128),
    Big(BigInt),
    Var(usize),
    Add(Vec<CTerm>),
    Sub(Box<CTerm>, Box<CTerm>),
    Neg(Box<CTerm>),
    Mul(Vec<CTerm>),
}

enum CFormula {
    Atom(Relation, CTerm, CTerm),
    Const(bool),
    And(Vec<CFormula>),
    Or(Vec<CFormula>),
    Not(Box<CFormula>),
    Implies(Box<CFormula>, Box<CFormula>),
}

/// A formula compiled against a fixed variable order, ready for repeated
/// evaluation over value vectors in that order.
pub struct Evaluator {
    vars: Vec<String>,
    formula: CFormula,
}

impl Evaluator {
    /// Compiles `formula` against `var_order`. Every variable occurring in
    /// the formula must appear in `var_order`.
    pub fn new(formula: &Formula, var_order: &[String]) -> Evaluator {
        let index: HashMap<&str, usize> =
            var_order.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        Evaluator {
            vars: var_order.to_vec(),
            formula: compile_formula(formula, &index),
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Evaluates the formula with `values[i]` bound to the i-th variable of
    /// the compile-time order.
    pub fn eval(&self, values: &[i64]) -> bool {
        assert_eq!(values.len(), self.vars.len());
        eval_formula(&self.formula, values)
    }
}

fn compile_formula(f: &Formula, index: &HashMap<&str, usize>) -> CFormula {
    match f {
        Formula::Atom(a) => {
            CFormula::Atom(a.rel, compile_term(&a.lhs, index), compile_term(&a.rhs, index))
        }
        Formula::Const(b) => CFormula::Const(*b),
        Formula::And(fs) => CFormula::And(fs.iter().map(|g| compile_formula(g, index)).collect()),
        Formula::Or(fs) => CFormula::Or(fs.iter().map(|g| compile_formula(g, index)).collect()),
        Formula::Not(g) => CFormula::Not(Box::new(compile_formula(g, index))),
        Formula::Implies(a, b) => CFormula::Implies(
            Box::new(compile_formula(a, index)),
            Box::new(compile_formula(b, index)),
        ),
    }
}

fn compile_term(t: &Term, index: &HashMap<&str, usize>) -> CTerm {
    match t {
        Term::IntConst(c) => match c.to_i128() {
            Some(v) => CTerm::Const(v),
            None => CTerm::Big(c.clone()),
        },
        Term::Var { name, .. } => {
            let i = *index
                .get(name.as_str())
                .unwrap_or_else(|| panic!("variable `{name}` missing from evaluation order"));
            CTerm::Var(i)
        }
        Term::Add(ts) => CTerm::Add(ts.iter().map(|s| compile_term(s, index)).collect()),
        Term::Sub(a, b) => {
            CTerm::Sub(Box::new(compile_term(a, index)), Box::new(compile_term(b, index)))
        }
        Term::Neg(a) => CTerm::Neg(Box::new(compile_term(a, index))),
        Term::Mul(ts) => CTerm::Mul(ts.iter().map(|s| compile_term(s, index)).collect()),
    }
}

fn eval_formula(f: &CFormula, values: &[i64]) -> bool {
    match f {
        CFormula::Const(b) => *b,
        CFormula::Atom(rel, lhs, rhs) => eval_atom(*rel, lhs, rhs, values),
        CFormula::And(fs) => fs.iter().all(|g| eval_formula(g, values)),
        CFormula::Or(fs) => fs.iter().any(|g| eval_formula(g, values)),
        CFormula::Not(g) => !eval_formula(g, values),
        CFormula::Implies(a, b) => !eval_formula(a, values) || eval_formula(b, values),
    }
}

fn eval_atom(rel: Relation, lhs: &CTerm, rhs: &CTerm, values: &[i64]) -> bool {
    let ord = match (eval_term(lhs, values), eval_term(rhs, values)) {
        (Some(a), Some(b)) => a.cmp(&b),
        // Overflow (or an oversized constant): redo both sides exactly.
        _ => eval_term_big(lhs, values).cmp(&eval_term_big(rhs, values)),
    };
    match rel {
        Relation::Lt => ord.is_lt(),
        Relation::Le => ord.is_le(),
        Relation::Gt => ord.is_gt(),
        Relation::Ge => ord.is_ge(),
        Relation::Eq => ord.is_eq(),
        Relation::Neq => ord.is_ne(),
    }
}

fn eval_term(t: &CTerm, values: &[i64]) -> Option<i128> {
    match t {
        CTerm::Const(v) => Some(*v),
        CTerm::Big(_) => None,
        CTerm::Var(i) => Some(values[*i] as i128),
        CTerm::Add(ts) => {
            let mut acc: i128 = 0;
            for s in ts {
                acc = acc.checked_add(eval_term(s, values)?)?;
            }
            Some(acc)
        }
        CTerm::Sub(a, b) => eval_term(a, values)?.checked_sub(eval_term(b, values)?),
        CTerm::Neg(a) => eval_term(a, values)?.checked_neg(),
        CTerm::Mul(ts) => {
            let mut acc: i128 = 1;
            for s in ts {
                acc = acc.checked_mul(eval_term(s, values)?)?;
            }
            Some(acc)
        }
    }
}

fn eval_term_big(t: &CTerm, values: &[i64]) -> BigInt {
    match t {
        CTerm::Const(v) => BigInt::from(*v),
        CTerm::Big(v) => v.clone(),
        CTerm::Var(i) => BigInt::from(values[*i]),
        CTerm::Add(ts) => ts.iter().map(|s| eval_term_big(s, values)).sum(),
        CTerm::Sub(a, b) => eval_term_big(a, values) - eval_term_big(b, values),
        CTerm::Neg(a) => -eval_term_big(a, values),
        CTerm::Mul(ts) => ts.iter().map(|s| eval_term_big(s, values)).product(),
    }
}

/// One-off evaluation by variable name; convenience for tests and model
/// re-checking.
pub fn eval_with_env(f: &Formula, env: &HashMap<String, i64>) -> bool {
    let mut vars: Vec<String> = Vec::new();
    f.collect_vars(&mut vars);
    let values: Vec<i64> = vars
        .iter()
        .map(|v| *env.get(v).unwrap_or_else(|| panic!("env missing variable `{v}`")))
        .collect();
    Evaluator::new(f, &vars).eval(&values)
}
