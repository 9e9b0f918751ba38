//! SMT-LIB front end for the supported fragment: `set-logic`, `set-info`,
//! `declare-fun`/`declare-const` of arity zero, `assert`, `check-sat`,
//! `exit`. Assertions are Boolean combinations of integer (in)equalities.

use std::collections::HashMap;

use num_bigint::BigInt;
use thiserror::Error;

use crate::ast::{Atom, Decl, Formula, Relation, Script, ScriptMeta, Sort, Term};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("{line}:{col}: unsupported feature: {what}")]
    Unsupported { line: u32, col: u32, what: String },
}

fn syntax(line: u32, col: u32, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, col, msg: msg.into() }
}

fn unsupported(line: u32, col: u32, what: impl Into<String>) -> ParseError {
    ParseError::Unsupported { line, col, what: what.into() }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: u32,
    col: u32,
}

#[derive(Debug)]
enum SExpr {
    Sym(String, Pos),
    Num(BigInt, Pos),
    Str(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    fn pos(&self) -> Pos {
        match self {
            SExpr::Sym(_, p) | SExpr::Num(_, p) | SExpr::Str(_, p) | SExpr::List(_, p) => *p,
        }
    }
}

#[derive(Debug)]
enum Token {
    LParen(Pos),
    RParen(Pos),
    Sym(String, Pos),
    Num(BigInt, Pos),
    Str(String, Pos),
}

fn is_symbol_start(c: char) -> bool {
    c.is_ascii_alphabetic() || "~!@$%^&*_-+=<>.?/:".contains(c)
}

fn is_symbol_continue(c: char) -> bool {
    is_symbol_start(c) || c.is_ascii_digit()
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! bump {
        () => {{
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '(' => {
                bump!();
                tokens.push(Token::LParen(pos));
            }
            ')' => {
                bump!();
                tokens.push(Token::RParen(pos));
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            '|' => {
                bump!();
                let mut s = String::new();
                loop {
                    match chars.peek() {
                        None => return Err(syntax(pos.line, pos.col, "unterminated |symbol|")),
                        Some('|') => {
                            bump!();
                            break;
                        }
                        Some(_) => s.push(bump!()),
                    }
                }
                tokens.push(Token::Sym(s, pos));
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match chars.peek() {
                        None => return Err(syntax(pos.line, pos.col, "unterminated string")),
                        Some('"') => {
                            bump!();
                            // SMT-LIB escapes a quote by doubling it.
                            if chars.peek() == Some(&'"') {
                                bump!();
                                s.push('"');
                            } else {
                                break;
                            }
                        }
                        Some(_) => s.push(bump!()),
                    }
                }
                tokens.push(Token::Str(s, pos));
            }
            _ if c.is_whitespace() => {
                bump!();
            }
            _ if c.is_ascii_digit() || is_symbol_start(c) => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || is_symbol_continue(c) {
                        s.push(bump!());
                    } else {
                        break;
                    }
                }
                let digits = s.strip_prefix('-').unwrap_or(&s);
                if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
                    let value: BigInt = s.parse().expect("digit run parses as integer");
                    tokens.push(Token::Num(value, pos));
                } else if s.starts_with(|c: char| c.is_ascii_digit()) {
                    return Err(syntax(pos.line, pos.col, format!("malformed numeral `{s}`")));
                } else {
                    tokens.push(Token::Sym(s, pos));
                }
            }
            _ => return Err(syntax(line, col, format!("unexpected character `{c}`"))),
        }
    }
    Ok(tokens)
}

fn read_sexprs(tokens: Vec<Token>) -> Result<Vec<SExpr>, ParseError> {
    let mut top = Vec::new();
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    for tok in tokens {
        match tok {
            Token::LParen(p) => stack.push((Vec::new(), p)),
            Token::RParen(p) => {
                let (items, open) = stack
                    .pop()
                    .ok_or_else(|| syntax(p.line, p.col, "unmatched `)`"))?;
                let expr = SExpr::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(expr),
                    None => top.push(expr),
                }
            }
            Token::Sym(s, p) => {
                let expr = SExpr::Sym(s, p);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(expr),
                    None => top.push(expr),
                }
            }
            Token::Num(v, p) => {
                let expr = SExpr::Num(v, p);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(expr),
                    None => top.push(expr),
                }
            }
            Token::Str(s, p) => {
                let expr = SExpr::Str(s, p);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(expr),
                    None => top.push(expr),
                }
            }
        }
    }
    if let Some((_, open)) = stack.last() {
        return Err(syntax(open.line, open.col, "unclosed `(`"));
    }
    Ok(top)
}

struct ScriptBuilder {
    decls: Vec<Decl>,
    by_name: HashMap<String, Sort>,
    asserts: Vec<Formula>,
    meta: ScriptMeta,
}

/// Parses a complete SMT-LIB script. `filename` is recorded as metadata only.
pub fn parse_script(text: &str, filename: Option<&str>) -> Result<Script, ParseError> {
    let tokens = tokenize(text)?;
    let exprs = read_sexprs(tokens)?;
    let mut b = ScriptBuilder {
        decls: Vec::new(),
        by_name: HashMap::new(),
        asserts: Vec::new(),
        meta: ScriptMeta { filename: filename.map(|s| s.to_string()), ..ScriptMeta::default() },
    };

    for expr in exprs {
        let pos = expr.pos();
        let items = match expr {
            SExpr::List(items, _) => items,
            _ => return Err(syntax(pos.line, pos.col, "expected a command list")),
        };
        let head = match items.first() {
            Some(SExpr::Sym(s, _)) => s.clone(),
            _ => return Err(syntax(pos.line, pos.col, "expected a command name")),
        };
        match head.as_str() {
            "set-logic" => {
                let logic = expect_symbol(items.get(1), pos, "set-logic expects a logic name")?;
                if !matches!(logic.as_str(), "QF_NIA" | "QF_LIA" | "ALL") {
                    b.meta
                        .warnings
                        .push(format!("logic `{logic}` is not QF_NIA/QF_LIA/ALL; continuing"));
                }
                b.meta.logic = Some(logic);
            }
            "set-info" => {
                let key = expect_symbol(items.get(1), pos, "set-info expects a keyword")?;
                let key = key.strip_prefix(':').unwrap_or(&key).to_string();
                let value = match items.get(2) {
                    None => String::new(),
                    Some(SExpr::Sym(s, _)) => s.clone(),
                    Some(SExpr::Num(v, _)) => v.to_string(),
                    Some(SExpr::Str(s, _)) => s.clone(),
                    Some(SExpr::List(_, p)) => {
                        return Err(syntax(p.line, p.col, "set-info value must be atomic"))
                    }
                };
                b.meta.info.push((key, value));
            }
            "declare-fun" => {
                let name = expect_symbol(items.get(1), pos, "declare-fun expects a name")?;
                match items.get(2) {
                    Some(SExpr::List(args, p)) => {
                        if !args.is_empty() {
                            return Err(unsupported(
                                p.line,
                                p.col,
                                "declare-fun with non-zero arity",
                            ));
                        }
                    }
                    other => {
                        let p = other.map(|e| e.pos()).unwrap_or(pos);
                        return Err(syntax(p.line, p.col, "declare-fun expects an argument list"));
                    }
                }
                let sort = parse_sort(items.get(3), pos)?;
                declare(&mut b, name, sort, pos)?;
            }
            "declare-const" => {
                let name = expect_symbol(items.get(1), pos, "declare-const expects a name")?;
                let sort = parse_sort(items.get(2), pos)?;
                declare(&mut b, name, sort, pos)?;
            }
            "assert" => {
                let body = items
                    .get(1)
                    .ok_or_else(|| syntax(pos.line, pos.col, "assert expects a formula"))?;
                let f = parse_formula(body, &b.by_name)?;
                b.asserts.push(f);
            }
            "check-sat" | "exit" => {}
            other => {
                return Err(unsupported(pos.line, pos.col, format!("command `{other}`")));
            }
        }
    }

    let assertion = match b.asserts.len() {
        0 => Formula::Const(true),
        1 => b.asserts.pop().unwrap(),
        _ => Formula::And(b.asserts),
    };
    Ok(Script { decls: b.decls, assertion, meta: b.meta })
}

fn declare(b: &mut ScriptBuilder, name: String, sort: Sort, pos: Pos) -> Result<(), ParseError> {
    if b.by_name.contains_key(&name) {
        return Err(syntax(pos.line, pos.col, format!("`{name}` is declared twice")));
    }
    b.by_name.insert(name.clone(), sort);
    b.decls.push(Decl { name, sort });
    Ok(())
}

fn expect_symbol(e: Option<&SExpr>, pos: Pos, msg: &str) -> Result<String, ParseError> {
    match e {
        Some(SExpr::Sym(s, _)) => Ok(s.clone()),
        Some(other) => Err(syntax(other.pos().line, other.pos().col, msg)),
        None => Err(syntax(pos.line, pos.col, msg)),
    }
}

fn parse_sort(e: Option<&SExpr>, pos: Pos) -> Result<Sort, ParseError> {
    match e {
        Some(SExpr::Sym(s, p)) => match s.as_str() {
            "Int" => Ok(Sort::Int),
            "Bool" => Ok(Sort::Bool),
            other => Err(unsupported(p.line, p.col, format!("sort `{other}`"))),
        },
        Some(other) => Err(syntax(other.pos().line, other.pos().col, "expected a sort")),
        None => Err(syntax(pos.line, pos.col, "expected a sort")),
    }
}

fn parse_formula(e: &SExpr, decls: &HashMap<String, Sort>) -> Result<Formula, ParseError> {
    let pos = e.pos();
    match e {
        SExpr::Sym(s, p) => match s.as_str() {
            "true" => Ok(Formula::Const(true)),
            "false" => Ok(Formula::Const(false)),
            name => match decls.get(name) {
                Some(Sort::Bool) => {
                    Err(unsupported(p.line, p.col, "Boolean variables in assertions"))
                }
                Some(Sort::Int) => {
                    Err(syntax(p.line, p.col, format!("Int symbol `{name}` used as a formula")))
                }
                None => Err(syntax(p.line, p.col, format!("undeclared symbol `{name}`"))),
            },
        },
        SExpr::Num(_, p) | SExpr::Str(_, p) => {
            Err(syntax(p.line, p.col, "expected a formula"))
        }
        SExpr::List(items, p) => {
            let head = match items.first() {
                Some(SExpr::Sym(s, _)) => s.as_str(),
                _ => return Err(syntax(p.line, p.col, "expected an operator")),
            };
            let args = &items[1..];
            match head {
                "and" | "or" => {
                    if args.is_empty() {
                        return Err(syntax(p.line, p.col, format!("`{head}` needs arguments")));
                    }
                    let fs = args
                        .iter()
                        .map(|a| parse_formula(a, decls))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(if head == "and" { Formula::And(fs) } else { Formula::Or(fs) })
                }
                "not" => {
                    if args.len() != 1 {
                        return Err(syntax(p.line, p.col, "`not` takes one argument"));
                    }
                    Ok(Formula::Not(Box::new(parse_formula(&args[0], decls)?)))
                }
                "=>" => {
                    if args.len() < 2 {
                        return Err(syntax(p.line, p.col, "`=>` takes at least two arguments"));
                    }
                    let fs = args
                        .iter()
                        .map(|a| parse_formula(a, decls))
                        .collect::<Result<Vec<_>, _>>()?;
                    // Right-associative chain: (=> a b c) is a => (b => c).
                    let mut it = fs.into_iter().rev();
                    let mut acc = it.next().unwrap();
                    for f in it {
                        acc = Formula::Implies(Box::new(f), Box::new(acc));
                    }
                    Ok(acc)
                }
                "<" | "<=" | ">" | ">=" => {
                    if args.len() != 2 {
                        return Err(unsupported(p.line, p.col, "chained comparisons"));
                    }
                    let rel = match head {
                        "<" => Relation::Lt,
                        "<=" => Relation::Le,
                        ">" => Relation::Gt,
                        _ => Relation::Ge,
                    };
                    let lhs = parse_term(&args[0], decls)?;
                    let rhs = parse_term(&args[1], decls)?;
                    Ok(Formula::Atom(Atom::new(rel, lhs, rhs)))
                }
                "=" | "distinct" => {
                    if args.len() != 2 {
                        return Err(unsupported(
                            p.line,
                            p.col,
                            format!("`{head}` with more than two arguments"),
                        ));
                    }
                    if is_formula_expr(&args[0], decls) || is_formula_expr(&args[1], decls) {
                        return Err(unsupported(p.line, p.col, "Boolean equality"));
                    }
                    let rel = if head == "=" { Relation::Eq } else { Relation::Neq };
                    let lhs = parse_term(&args[0], decls)?;
                    let rhs = parse_term(&args[1], decls)?;
                    Ok(Formula::Atom(Atom::new(rel, lhs, rhs)))
                }
                "ite" | "let" | "forall" | "exists" | "xor" => {
                    Err(unsupported(p.line, p.col, format!("operator `{head}`")))
                }
                other => Err(unsupported(pos.line, pos.col, format!("operator `{other}`"))),
            }
        }
    }
}

/// Shallow test for "this expression is Boolean-valued", used to reject
/// Boolean equality with a precise message.
fn is_formula_expr(e: &SExpr, decls: &HashMap<String, Sort>) -> bool {
    match e {
        SExpr::Sym(s, _) => {
            s == "true" || s == "false" || decls.get(s.as_str()) == Some(&Sort::Bool)
        }
        SExpr::List(items, _) => matches!(
            items.first(),
            Some(SExpr::Sym(s, _))
                if matches!(s.as_str(), "and" | "or" | "not" | "=>" | "<" | "<=" | ">" | ">=")
        ),
        _ => false,
    }
}

fn parse_term(e: &SExpr, decls: &HashMap<String, Sort>) -> Result<Term, ParseError> {
    match e {
        SExpr::Num(v, _) => Ok(Term::IntConst(v.clone())),
        SExpr::Str(_, p) => Err(syntax(p.line, p.col, "expected an integer term")),
        SExpr::Sym(s, p) => match decls.get(s.as_str()) {
            Some(Sort::Int) => Ok(Term::Var { name: s.clone(), sort: Sort::Int }),
            Some(Sort::Bool) => {
                Err(unsupported(p.line, p.col, "Boolean variables in arithmetic"))
            }
            None => Err(syntax(p.line, p.col, format!("undeclared symbol `{s}`"))),
        },
        SExpr::List(items, p) => {
            let head = match items.first() {
                Some(SExpr::Sym(s, _)) => s.as_str(),
                _ => return Err(syntax(p.line, p.col, "expected an arithmetic operator")),
            };
            let args = &items[1..];
            match head {
                "+" | "*" => {
                    if args.is_empty() {
                        return Err(syntax(p.line, p.col, format!("`{head}` needs arguments")));
                    }
                    let ts = args
                        .iter()
                        .map(|a| parse_term(a, decls))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(if head == "+" { Term::Add(ts) } else { Term::Mul(ts) })
                }
                "-" => match args.len() {
                    0 => Err(syntax(p.line, p.col, "`-` needs arguments")),
                    1 => Ok(Term::Neg(Box::new(parse_term(&args[0], decls)?))),
                    _ => {
                        // Left-associative chain: (- a b c) is ((a - b) - c).
                        let mut it = args.iter();
                        let mut acc = parse_term(it.next().unwrap(), decls)?;
                        for a in it {
                            acc = Term::Sub(Box::new(acc), Box::new(parse_term(a, decls)?));
                        }
                        Ok(acc)
                    }
                },
                "div" | "mod" | "abs" => {
                    Err(unsupported(p.line, p.col, format!("operator `{head}`")))
                }
                other => Err(unsupported(p.line, p.col, format!("operator `{other}`"))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Sort;

    const TABLE1: &str = "\
(set-logic QF_NIA)
(declare-fun x () Int)
(declare-fun y () Int)
(declare-fun z () Int)
(assert (or (> z 2) (< x 8)))
(assert (or (> z 2) (< y 8)))
(assert (or (< (+ x y) 10) (> (+ x y) 3)))
(check-sat)
";

    #[test]
    fn parses_three_clause_script() {
        let s = parse_script(TABLE1, Some("table1.smt2")).unwrap();
        assert_eq!(s.decls.len(), 3);
        assert_eq!(s.decls[0].name, "x");
        assert_eq!(s.decls[0].sort, Sort::Int);
        assert_eq!(s.meta.logic.as_deref(), Some("QF_NIA"));
        match &s.assertion {
            Formula::And(fs) => assert_eq!(fs.len(), 3),
            other => panic!("expected conjunction, got {other:?}"),
        }
    }

    #[test]
    fn single_assert_is_not_wrapped() {
        let s = parse_script(
            "(declare-const x Int)(assert (< x 8))",
            None,
        )
        .unwrap();
        assert_eq!(
            s.assertion,
            Formula::Atom(Atom::new(Relation::Lt, Term::var("x"), Term::int(8)))
        );
    }

    #[test]
    fn no_asserts_means_true() {
        let s = parse_script("(declare-const x Int)(check-sat)", None).unwrap();
        assert_eq!(s.assertion, Formula::Const(true));
    }

    #[test]
    fn negative_numerals_both_ways() {
        let s1 = parse_script("(declare-const x Int)(assert (< x -5))", None).unwrap();
        let s2 = parse_script("(declare-const x Int)(assert (< x (- 5)))", None).unwrap();
        let lit = |f: &Formula| match f {
            Formula::Atom(a) => a.rhs.clone(),
            _ => panic!(),
        };
        assert_eq!(lit(&s1.assertion), Term::int(-5));
        assert_eq!(lit(&s2.assertion), Term::Neg(Box::new(Term::int(5))));
    }

    #[test]
    fn quantifiers_are_unsupported() {
        let err = parse_script(
            "(declare-const x Int)(assert (forall ((y Int)) (< x y)))",
            None,
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::Unsupported { .. }), "{err}");
    }

    #[test]
    fn div_is_unsupported() {
        let err =
            parse_script("(declare-const x Int)(assert (= (div x 2) 1))", None).unwrap_err();
        assert!(matches!(err, ParseError::Unsupported { .. }), "{err}");
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_script("(declare-const x Int)\n(assert (< x 8)", None).unwrap_err();
        match err {
            ParseError::Syntax { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 1);
            }
            other => panic!("expected syntax error, got {other}"),
        }
    }

    #[test]
    fn duplicate_declaration_rejected() {
        let err =
            parse_script("(declare-const x Int)(declare-const x Int)", None).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }), "{err}");
    }

    #[test]
    fn undeclared_symbol_rejected() {
        let err = parse_script("(assert (< x 8))", None).unwrap_err();
        assert!(err.to_string().contains("undeclared"), "{err}");
    }

    #[test]
    fn odd_logic_warns_but_parses() {
        let s = parse_script("(set-logic QF_BV)(check-sat)", None).unwrap();
        assert_eq!(s.meta.warnings.len(), 1);
    }

    #[test]
    fn bool_declarations_parse_but_cannot_be_used() {
        let s = parse_script("(declare-const p Bool)(check-sat)", None).unwrap();
        assert_eq!(s.decls[0].sort, Sort::Bool);
        let err = parse_script("(declare-const p Bool)(assert p)", None).unwrap_err();
        assert!(matches!(err, ParseError::Unsupported { .. }), "{err}");
    }

    #[test]
    fn distinct_is_binary_disequality() {
        let s = parse_script("(declare-const x Int)(assert (distinct x 3))", None).unwrap();
        assert_eq!(
            s.assertion,
            Formula::Atom(Atom::new(Relation::Neq, Term::var("x"), Term::int(3)))
        );
    }
}
