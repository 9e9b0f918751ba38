//! Serialization of scripts back to SMT-LIB text. `parse_script` of the
//! output reproduces the input script structurally.

use std::fmt::Write;

use num_traits::Signed;

use crate::ast::{Formula, Relation, Script, Term};

/// Renders a script as SMT-LIB, one command per line.
pub fn serialize(script: &Script) -> String {
    let mut out = String::new();
    if let Some(logic) = &script.meta.logic {
        let _ = writeln!(out, "(set-logic {logic})");
    }
    for (key, value) in &script.meta.info {
        let _ = writeln!(out, "(set-info :{key} {})", quote_info_value(value));
    }
    for d in &script.decls {
        let _ = writeln!(out, "(declare-fun {} () {})", quote_symbol(&d.name), d.sort);
    }
    let mut assertion = String::new();
    write_formula(&mut assertion, &script.assertion);
    let _ = writeln!(out, "(assert {assertion})");
    let _ = writeln!(out, "(check-sat)");
    out
}

/// Renders a single formula as an SMT-LIB expression.
pub fn format_formula(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(&mut s, f);
    s
}

/// Renders a single term as an SMT-LIB expression.
pub fn format_term(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t);
    s
}

fn quote_info_value(value: &str) -> String {
    let simple = !value.is_empty()
        && value.chars().all(|c| c.is_ascii_alphanumeric() || "_-./".contains(c));
    if simple {
        value.to_string()
    } else {
        format!("\"{}\"", value.replace('"', "\"\""))
    }
}

fn quote_symbol(name: &str) -> String {
    let simple = name
        .chars()
        .next()
        .map(|c| c.is_ascii_alphabetic() || "~!@$%^&*_+=<>.?/-".contains(c))
        .unwrap_or(false)
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_+=<>.?/-".contains(c));
    if simple {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

fn write_formula(out: &mut String, f: &Formula) {
    match f {
        Formula::Const(true) => out.push_str("true"),
        Formula::Const(false) => out.push_str("false"),
        Formula::Atom(a) => {
            let op = match a.rel {
                Relation::Lt => "<",
                Relation::Le => "<=",
                Relation::Gt => ">",
                Relation::Ge => ">=",
                Relation::Eq => "=",
                Relation::Neq => "distinct",
            };
            out.push('(');
            out.push_str(op);
            out.push(' ');
            write_term(out, &a.lhs);
            out.push(' ');
            write_term(out, &a.rhs);
            out.push(')');
        }
        Formula::And(fs) | Formula::Or(fs) => {
            out.push('(');
            out.push_str(if matches!(f, Formula::And(_)) { "and" } else { "or" });
            for g in fs {
                out.push(' ');
                write_formula(out, g);
            }
            out.push(')');
        }
        Formula::Not(g) => {
            out.push_str("(not ");
            write_formula(out, g);
            out.push(')');
        }
        Formula::Implies(a, b) => {
            out.push_str("(=> ");
            write_formula(out, a);
            out.push(' ');
            write_formula(out, b);
            out.push(')');
        }
    }
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::IntConst(v) => {
            // Negative constants print with a leading minus, which the lexer
            // accepts back as a single numeral.
            let _ = write!(out, "{v}");
            debug_assert!(!v.is_positive() || !out.is_empty());
        }
        Term::Var { name, .. } => out.push_str(&quote_symbol(name)),
        Term::Add(ts) | Term::Mul(ts) => {
            out.push('(');
            out.push_str(if matches!(t, Term::Add(_)) { "+" } else { "*" });
            for s in ts {
                out.push(' ');
                write_term(out, s);
            }
            out.push(')');
        }
        Term::Sub(a, b) => {
            out.push_str("(- ");
            write_term(out, a);
            out.push(' ');
            write_term(out, b);
            out.push(')');
        }
        Term::Neg(a) => {
            out.push_str("(- ");
            write_term(out, a);
            out.push(')');
        }
    }
}
