//! Parser for the source language.
//!
//! One file holds many models:
//!
//! ```text
//! def NAME():
//!   VAR = DIST(ARGS)        # sample
//!   VAR = EXPR              # deterministic let
//!   [V1,...,Vk] = NAME2()   # nested call
//!   return (V1,...,Vk)
//! ```
//!
//! Comments start with `#`. Numeric literals (integers and decimals) are
//! parsed as exact rationals.

use super::ast::{BinOp, CmpOp, DistCall, Expr, Model, Side, Stmt};
use crate::dist::DistKind;
use crate::value::{display_rat, display_rat_decimal, Rat};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unknown distribution `{name}`")]
    UnknownDistribution { line: usize, col: usize, name: String },
    #[error("{line}: duplicate model name `{name}`")]
    DuplicateModel { line: usize, name: String },
    #[error("no models found")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(Rat),
    Sym(&'static str),
}

struct Lexed {
    toks: Vec<(Tok, usize)>, // token + column
    line: usize,
}

fn lex_line(text: &str, line: usize) -> Result<Lexed, ParseError> {
    let mut toks = Vec::new();
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let mut frac = String::new();
                if i < bytes.len()
                    && bytes[i] == '.'
                    && i + 1 < bytes.len()
                    && bytes[i + 1].is_ascii_digit()
                {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        frac.push(bytes[i]);
                        i += 1;
                    }
                }
                let whole: String = bytes[start..].iter().take_while(|c| c.is_ascii_digit()).collect();
                let whole = BigInt::from_str(&whole).unwrap();
                let value = if frac.is_empty() {
                    Rat::from_integer(whole)
                } else {
                    let scale = BigInt::from(10).pow(frac.len() as u32);
                    let frac_num = BigInt::from_str(&frac).unwrap();
                    Rat::new(whole * &scale + frac_num, scale)
                };
                toks.push((Tok::Number(value), col));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                let word: String = bytes[start..i].iter().collect();
                toks.push((Tok::Ident(word), col));
            }
            '=' => {
                if i + 1 < bytes.len() && bytes[i + 1] == '=' {
                    toks.push((Tok::Sym("=="), col));
                    i += 2;
                } else {
                    toks.push((Tok::Sym("="), col));
                    i += 1;
                }
            }
            '!' => {
                if i + 1 < bytes.len() && bytes[i + 1] == '=' {
                    toks.push((Tok::Sym("!="), col));
                    i += 2;
                } else {
                    return Err(ParseError::Syntax {
                        line,
                        col,
                        msg: "stray `!`".into(),
                    });
                }
            }
            '<' => {
                if i + 1 < bytes.len() && bytes[i + 1] == '=' {
                    toks.push((Tok::Sym("<="), col));
                    i += 2;
                } else {
                    toks.push((Tok::Sym("<"), col));
                    i += 1;
                }
            }
            '>' => {
                if i + 1 < bytes.len() && bytes[i + 1] == '=' {
                    toks.push((Tok::Sym(">="), col));
                    i += 2;
                } else {
                    toks.push((Tok::Sym(">"), col));
                    i += 1;
                }
            }
            '+' | '-' | '*' | '/' | '(' | ')' | '[' | ']' | ',' | ':' | '.' => {
                let sym = match c {
                    '+' => "+",
                    '-' => "-",
                    '*' => "*",
                    '/' => "/",
                    '(' => "(",
                    ')' => ")",
                    '[' => "[",
                    ']' => "]",
                    ',' => ",",
                    ':' => ":",
                    _ => ".",
                };
                toks.push((Tok::Sym(sym), col));
                i += 1;
            }
            other => {
                return Err(ParseError::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(Lexed { toks, line })
}

struct Cursor<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, c)| *c)
            .unwrap_or(1)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{sym}`")))
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => Err(self.err("expected identifier".into())),
        }
    }

    fn err(&self, msg: String) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            col: self.col(),
            msg,
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

const KEYWORDS: &[&str] = &["def", "return", "if", "else", "fst", "snd"];

fn check_name(cur: &Cursor, name: &str) -> Result<(), ParseError> {
    if KEYWORDS.contains(&name) {
        Err(ParseError::Syntax {
            line: cur.line,
            col: cur.col(),
            msg: format!("`{name}` is a reserved word"),
        })
    } else {
        Ok(())
    }
}

// Precedence-climbing expression parser.
// ternary < comparison < additive < multiplicative < unary/primary.
fn parse_expr(cur: &mut Cursor) -> Result<Expr, ParseError> {
    let then = parse_cmp(cur)?;
    if matches!(cur.peek(), Some(Tok::Ident(w)) if w == "if") {
        cur.bump();
        let cond = parse_cmp(cur)?;
        match cur.peek() {
            Some(Tok::Ident(w)) if w == "else" => {
                cur.bump();
            }
            _ => return Err(cur.err("expected `else` in conditional expression".into())),
        }
        let els = parse_expr(cur)?;
        return Ok(Expr::If {
            cond: Box::new(cond),
            then: Box::new(then),
            els: Box::new(els),
        });
    }
    Ok(then)
}

fn parse_cmp(cur: &mut Cursor) -> Result<Expr, ParseError> {
    let left = parse_additive(cur)?;
    let op = match cur.peek() {
        Some(Tok::Sym("==")) => Some((CmpOp::Eq, false)),
        Some(Tok::Sym("!=")) => Some((CmpOp::Ne, false)),
        Some(Tok::Sym("<")) => Some((CmpOp::Lt, false)),
        Some(Tok::Sym("<=")) => Some((CmpOp::Le, false)),
        Some(Tok::Sym(">")) => Some((CmpOp::Lt, true)),
        Some(Tok::Sym(">=")) => Some((CmpOp::Le, true)),
        _ => None,
    };
    if let Some((op, swap)) = op {
        cur.bump();
        let right = parse_additive(cur)?;
        let (l, r) = if swap { (right, left) } else { (left, right) };
        return Ok(Expr::Cmp(op, Box::new(l), Box::new(r)));
    }
    Ok(left)
}

fn parse_additive(cur: &mut Cursor) -> Result<Expr, ParseError> {
    let mut left = parse_multiplicative(cur)?;
    loop {
        let op = match cur.peek() {
            Some(Tok::Sym("+")) => BinOp::Add,
            Some(Tok::Sym("-")) => BinOp::Sub,
            _ => break,
        };
        cur.bump();
        let right = parse_multiplicative(cur)?;
        left = Expr::Bin(op, Box::new(left), Box::new(right));
    }
    Ok(left)
}

fn parse_multiplicative(cur: &mut Cursor) -> Result<Expr, ParseError> {
    let mut left = parse_unary(cur)?;
    loop {
        let op = match cur.peek() {
            Some(Tok::Sym("*")) => BinOp::Mul,
            Some(Tok::Sym("/")) => BinOp::Div,
            _ => break,
        };
        cur.bump();
        let right = parse_unary(cur)?;
        left = Expr::Bin(op, Box::new(left), Box::new(right));
    }
    Ok(left)
}

fn parse_unary(cur: &mut Cursor) -> Result<Expr, ParseError> {
    if cur.eat_sym("-") {
        let inner = parse_unary(cur)?;
        return Ok(match inner {
            Expr::Const(r) => Expr::Const(-r),
            other => Expr::Bin(
                BinOp::Sub,
                Box::new(Expr::Const(Rat::zero())),
                Box::new(other),
            ),
        });
    }
    parse_primary(cur)
}

fn parse_primary(cur: &mut Cursor) -> Result<Expr, ParseError> {
    let base = match cur.bump() {
        Some(Tok::Number(r)) => Expr::Const(r),
        Some(Tok::Ident(name)) => {
            if name == "if" || name == "else" {
                return Err(cur.err(format!("unexpected keyword `{name}`")));
            }
            if cur.eat_sym("(") {
                return Err(cur.err(format!(
                    "call `{name}(...)` is not allowed inside expressions"
                )));
            }
            Expr::Var(name)
        }
        Some(Tok::Sym("(")) => {
            let e = parse_expr(cur)?;
            cur.expect_sym(")")?;
            e
        }
        _ => return Err(cur.err("expected expression".into())),
    };
    parse_proj_suffix(cur, base)
}

fn parse_proj_suffix(cur: &mut Cursor, mut base: Expr) -> Result<Expr, ParseError> {
    while cur.eat_sym(".") {
        let field = cur.expect_ident()?;
        let side = match field.as_str() {
            "fst" => Side::First,
            "snd" => Side::Second,
            other => return Err(cur.err(format!("expected `fst` or `snd`, found `{other}`"))),
        };
        base = Expr::Proj(Box::new(base), side);
    }
    Ok(base)
}

/// Shape of an `IDENT ( args ) <end>` right-hand side: the sample/call form.
fn match_call_form(cur: &mut Cursor) -> Result<Option<(String, Vec<Expr>, usize)>, ParseError> {
    let save = cur.pos;
    let name = match cur.peek() {
        Some(Tok::Ident(name)) if !KEYWORDS.contains(&name.as_str()) => name.clone(),
        _ => return Ok(None),
    };
    let name_col = cur.col();
    cur.pos += 1;
    if !cur.eat_sym("(") {
        cur.pos = save;
        return Ok(None);
    }
    let mut args = Vec::new();
    if !cur.eat_sym(")") {
        loop {
            args.push(parse_expr(cur)?);
            if cur.eat_sym(")") {
                break;
            }
            cur.expect_sym(",")?;
        }
    }
    if !cur.at_end() {
        // Something follows the closing paren: not a bare call form.
        cur.pos = save;
        return Ok(None);
    }
    Ok(Some((name, args, name_col)))
}

fn parse_stmt(lexed: &Lexed) -> Result<Stmt, ParseError> {
    let mut cur = Cursor {
        toks: &lexed.toks,
        pos: 0,
        line: lexed.line,
    };
    // return (V1,...,Vk)
    if matches!(cur.peek(), Some(Tok::Ident(w)) if w == "return") {
        cur.bump();
        cur.expect_sym("(")?;
        let mut vars = Vec::new();
        loop {
            let v = cur.expect_ident()?;
            check_name(&cur, &v)?;
            vars.push(v);
            if cur.eat_sym(")") {
                break;
            }
            cur.expect_sym(",")?;
        }
        if !cur.at_end() {
            return Err(cur.err("trailing tokens after return".into()));
        }
        return Ok(Stmt::Return { vars, line: lexed.line });
    }
    // [V1,...,Vk] = NAME2()
    if cur.eat_sym("[") {
        let mut vars = Vec::new();
        loop {
            let v = cur.expect_ident()?;
            check_name(&cur, &v)?;
            vars.push(v);
            if cur.eat_sym("]") {
                break;
            }
            cur.expect_sym(",")?;
        }
        cur.expect_sym("=")?;
        let callee = cur.expect_ident()?;
        cur.expect_sym("(")?;
        cur.expect_sym(")")?;
        if !cur.at_end() {
            return Err(cur.err("trailing tokens after call".into()));
        }
        return Ok(Stmt::Call { vars, callee, line: lexed.line });
    }
    // VAR = ...
    let var = cur.expect_ident()?;
    check_name(&cur, &var)?;
    cur.expect_sym("=")?;
    if let Some((name, args, name_col)) = match_call_form(&mut cur)? {
        return match DistKind::from_name(&name) {
            Some(kind) => Ok(Stmt::Sample {
                var,
                dist: DistCall { kind, args },
                line: lexed.line,
            }),
            None => Err(ParseError::UnknownDistribution {
                line: lexed.line,
                col: name_col,
                name,
            }),
        };
    }
    let expr = parse_expr(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.err("trailing tokens after expression".into()));
    }
    Ok(Stmt::Let { var, expr, line: lexed.line })
}

/// Parse a source file into models, in file order.
pub fn parse_program(text: &str) -> Result<Vec<Model>, ParseError> {
    let mut models: Vec<Model> = Vec::new();
    let mut current: Option<Model> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        if stripped.trim().is_empty() {
            continue;
        }
        let indented = stripped.starts_with(' ') || stripped.starts_with('\t');
        let lexed = lex_line(stripped, line_no)?;
        if !indented {
            // Expect a `def NAME():` header.
            let mut cur = Cursor {
                toks: &lexed.toks,
                pos: 0,
                line: line_no,
            };
            match cur.peek() {
                Some(Tok::Ident(w)) if w == "def" => {
                    cur.bump();
                    let name = cur.expect_ident()?;
                    check_name(&cur, &name)?;
                    cur.expect_sym("(")?;
                    cur.expect_sym(")")?;
                    cur.expect_sym(":")?;
                    if !cur.at_end() {
                        return Err(cur.err("trailing tokens after model header".into()));
                    }
                    if let Some(m) = current.take() {
                        models.push(m);
                    }
                    if models.iter().any(|m| m.name == name) {
                        return Err(ParseError::DuplicateModel { line: line_no, name });
                    }
                    current = Some(Model {
                        name,
                        stmts: Vec::new(),
                        line: line_no,
                    });
                }
                _ => {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        col: 1,
                        msg: "expected `def NAME():` at top level".into(),
                    })
                }
            }
        } else {
            let stmt = parse_stmt(&lexed)?;
            match current.as_mut() {
                Some(m) => m.stmts.push(stmt),
                None => {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        col: 1,
                        msg: "statement outside of a model".into(),
                    })
                }
            }
        }
    }
    if let Some(m) = current.take() {
        models.push(m);
    }
    if models.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(models)
}

fn expr_level(e: &Expr) -> u8 {
    match e {
        Expr::If { .. } => 0,
        Expr::Cmp(..) => 1,
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 2,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 3,
        Expr::Const(r) if r.is_negative() => 3, // prints as unary minus
        Expr::Const(_) | Expr::Var(_) | Expr::Proj(..) => 4,
    }
}

fn print_expr(e: &Expr, min_level: u8, out: &mut String) {
    let level = expr_level(e);
    let parens = level < min_level;
    if parens {
        out.push('(');
    }
    match e {
        Expr::Const(r) => match display_rat_decimal(r) {
            Some(s) => out.push_str(&s),
            None => out.push_str(&display_rat(r)),
        },
        Expr::Var(v) => out.push_str(v),
        Expr::Bin(op, l, r) => {
            let (ll, rl) = match op {
                BinOp::Add => (2, 3),
                BinOp::Sub => (2, 3),
                BinOp::Mul | BinOp::Div => (3, 4),
            };
            print_expr(l, ll, out);
            out.push_str(&format!(" {} ", op.symbol()));
            print_expr(r, rl, out);
        }
        Expr::Cmp(op, l, r) => {
            print_expr(l, 2, out);
            out.push_str(&format!(" {} ", op.symbol()));
            print_expr(r, 2, out);
        }
        Expr::If { cond, then, els } => {
            print_expr(then, 1, out);
            out.push_str(" if ");
            print_expr(cond, 1, out);
            out.push_str(" else ");
            print_expr(els, 0, out);
        }
        Expr::Proj(base, side) => {
            print_expr(base, 4, out);
            out.push('.');
            out.push_str(side.suffix());
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    print_expr(e, 0, &mut s);
    s
}

/// Render models back to canonical source text. Parsing the result yields
/// the same ASTs.
pub fn pretty_print(models: &[Model]) -> String {
    let mut out = String::new();
    for (i, m) in models.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("def {}():\n", m.name));
        for stmt in &m.stmts {
            out.push_str("  ");
            match stmt {
                Stmt::Sample { var, dist, .. } => {
                    let args: Vec<String> = dist.args.iter().map(expr_to_string).collect();
                    out.push_str(&format!("{var} = {}({})", dist.kind.name(), args.join(", ")));
                }
                Stmt::Let { var, expr, .. } => {
                    out.push_str(&format!("{var} = {}", expr_to_string(expr)));
                }
                Stmt::Call { vars, callee, .. } => {
                    out.push_str(&format!("[{}] = {callee}()", vars.join(",")));
                }
                Stmt::Return { vars, .. } => {
                    out.push_str(&format!("return ({})", vars.join(", ")));
                }
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::rat;

    const FIG1: &str = "def majority():\n  theta = uniform(0, 1)\n  X = bernoulli(theta)\n  return (theta, X)\n";

    #[test]
    fn parses_fig1() {
        let models = parse_program(FIG1).unwrap();
        assert_eq!(models.len(), 1);
        let m = &models[0];
        assert_eq!(m.name, "majority");
        assert_eq!(m.stmts.len(), 3);
        match &m.stmts[0] {
            Stmt::Sample { var, dist, .. } => {
                assert_eq!(var, "theta");
                assert_eq!(dist.kind, DistKind::Uniform);
                assert_eq!(dist.args.len(), 2);
            }
            other => panic!("expected sample, got {other:?}"),
        }
        match &m.stmts[1] {
            Stmt::Sample { var, dist, .. } => {
                assert_eq!(var, "X");
                assert_eq!(dist.kind, DistKind::Bernoulli);
                assert_eq!(dist.args, vec![Expr::Var("theta".into())]);
            }
            other => panic!("expected sample, got {other:?}"),
        }
        assert_eq!(m.return_vars(), ["theta".to_string(), "X".to_string()]);
    }

    #[test]
    fn empty_input_rejected() {
        assert_eq!(parse_program(""), Err(ParseError::Empty));
        assert_eq!(parse_program("# only a comment\n"), Err(ParseError::Empty));
    }

    #[test]
    fn unknown_distribution_rejected() {
        let err = parse_program("def f():\n  x = gamma(1)\n  return (x)\n").unwrap_err();
        match err {
            ParseError::UnknownDistribution { name, line, .. } => {
                assert_eq!(name, "gamma");
                assert_eq!(line, 2);
            }
            other => panic!("expected unknown distribution, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_model_rejected() {
        let src = "def f():\n  x = bernoulli(0.5)\n  return (x)\ndef f():\n  y = bernoulli(0.5)\n  return (y)\n";
        assert!(matches!(
            parse_program(src),
            Err(ParseError::DuplicateModel { .. })
        ));
    }

    #[test]
    fn decimals_become_exact_rationals() {
        let models = parse_program("def f():\n  x = uniform(0.8, 1)\n  return (x)\n").unwrap();
        match &models[0].stmts[0] {
            Stmt::Sample { dist, .. } => {
                assert_eq!(dist.args[0], Expr::Const(rat(4, 5)));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn call_statement_and_fig2() {
        let src = "def majority():\n  theta = uniform(0, 1)\n  X = bernoulli(theta)\n  return (theta, X)\n\ndef demographic_parity():\n  [theta,X] = majority()\n  phi = uniform(0.8 * theta, 1)\n  Y = bernoulli(phi)\n  return (theta, X, phi, Y)\n";
        let models = parse_program(src).unwrap();
        assert_eq!(models.len(), 2);
        let dp = &models[1];
        match &dp.stmts[0] {
            Stmt::Call { vars, callee, .. } => {
                assert_eq!(vars, &["theta".to_string(), "X".to_string()]);
                assert_eq!(callee, "majority");
            }
            other => panic!("expected call, got {other:?}"),
        }
        assert_eq!(dp.return_vars().len(), 4);
    }

    #[test]
    fn conditional_and_comparison() {
        let src = "def f():\n  x = bernoulli(1/2)\n  y = bernoulli(3/4 if x == 1 else 1/4)\n  return (x, y)\n";
        let models = parse_program(src).unwrap();
        match &models[0].stmts[1] {
            Stmt::Sample { dist, .. } => {
                assert!(matches!(dist.args[0], Expr::If { .. }));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn gt_normalizes_to_lt() {
        let models = parse_program("def f():\n  x = bernoulli(1/2)\n  y = 1 if x > 0 else 0\n  return (y)\n").unwrap();
        match &models[0].stmts[1] {
            Stmt::Let { expr: Expr::If { cond, .. }, .. } => match cond.as_ref() {
                Expr::Cmp(CmpOp::Lt, l, r) => {
                    assert_eq!(**l, Expr::Const(Rat::zero()));
                    assert_eq!(**r, Expr::Var("x".into()));
                }
                other => panic!("expected lt, got {other:?}"),
            },
            other => panic!("unexpected stmt {other:?}"),
        }
    }

    #[test]
    fn roundtrip_fig_sources() {
        for src in [
            FIG1,
            "def f():\n  x = bernoulli(1/2)\n  y = bernoulli(3/4 if x == 1 else 1/4)\n  return (x, y)\n",
            "def g():\n  a = uniform(0, 1)\n  b = uniform(0, a)\n  c = a * b - 1/3\n  return (a, b, c)\n",
        ] {
            let ast1 = parse_program(src).unwrap();
            let printed = pretty_print(&ast1);
            let ast2 = parse_program(&printed).unwrap();
            let strip = |ms: &[Model]| -> Vec<Model> {
                ms.iter()
                    .map(|m| Model {
                        line: 0,
                        stmts: m
                            .stmts
                            .iter()
                            .map(|s| {
                                let mut s = s.clone();
                                match &mut s {
                                    Stmt::Sample { line, .. }
                                    | Stmt::Let { line, .. }
                                    | Stmt::Call { line, .. }
                                    | Stmt::Return { line, .. } => *line = 0,
                                }
                                s
                            })
                            .collect(),
                        ..m.clone()
                    })
                    .collect()
            };
            assert_eq!(strip(&ast1), strip(&ast2));
        }
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_program("def f():\n  x = uniform(0, 1\n  return (x)\n").unwrap_err();
        match err {
            ParseError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }
}
