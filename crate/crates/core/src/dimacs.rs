//! DIMACS CNF export (with the atom map in comments) and import.

use std::fmt::Write;

use crate::printer::format_formula;
use crate::skeleton::{AtomMap, Cnf, Lit};

/// Renders the CNF in DIMACS format. When an atom map is supplied, each
/// skeleton variable is annotated with its label and atom text in comment
/// lines; auxiliary variables are marked as such.
pub fn write_dimacs(cnf: &Cnf, phi: Option<&AtomMap>) -> String {
    let mut out = String::new();
    if let Some(phi) = phi {
        for (v, atom) in phi.iter() {
            let text = format_formula(&crate::ast::Formula::Atom(atom.clone()));
            let _ = writeln!(out, "c atom {} {} {}", v.0 + 1, v.label(), text);
        }
    }
    if !cnf.aux_vars().is_empty() {
        let _ = writeln!(
            out,
            "c auxiliary vars {}..{}",
            cnf.aux_vars().start + 1,
            cnf.aux_vars().end
        );
    }
    let _ = writeln!(out, "p cnf {} {}", cnf.num_vars, cnf.clauses.len());
    for clause in &cnf.clauses {
        for l in clause {
            let _ = write!(out, "{l} ");
        }
        let _ = writeln!(out, "0");
    }
    out
}

/// Parses DIMACS text into a variable count and clause list. Comment lines
/// and flexible whitespace are accepted; literals may span lines up to the
/// terminating `0`.
pub fn parse_dimacs(text: &str) -> Result<(u32, Vec<Vec<Lit>>), String> {
    let mut num_vars: Option<u32> = None;
    let mut declared_clauses: Option<usize> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Lit> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if num_vars.is_some() {
                return Err(format!("line {}: duplicate header", lineno + 1));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[1] != "cnf" {
                return Err(format!("line {}: malformed header `{line}`", lineno + 1));
            }
            num_vars =
                Some(fields[2].parse().map_err(|_| format!("line {}: bad var count", lineno + 1))?);
            declared_clauses = Some(
                fields[3].parse().map_err(|_| format!("line {}: bad clause count", lineno + 1))?,
            );
            continue;
        }
        let nv = num_vars.ok_or_else(|| format!("line {}: clause before header", lineno + 1))?;
        for tok in line.split_whitespace() {
            let code: i64 =
                tok.parse().map_err(|_| format!("line {}: bad literal `{tok}`", lineno + 1))?;
            if code == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                let var = code.unsigned_abs() as u32 - 1;
                if var >= nv {
                    return Err(format!("line {}: literal `{code}` out of range", lineno + 1));
                }
                current.push(Lit::new(var, code > 0));
            }
        }
    }
    if !current.is_empty() {
        return Err("unterminated clause (missing trailing 0)".to_string());
    }
    if let Some(n) = declared_clauses {
        if clauses.len() != n {
            return Err(format!("header declares {n} clauses, found {}", clauses.len()));
        }
    }
    match num_vars {
        Some(nv) => Ok((nv, clauses)),
        None => Err("missing `p cnf` header".to_string()),
    }
}
