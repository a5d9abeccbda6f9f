//! Alpha-equivalence of emitted definition text.
//!
//! Both sides are parsed into de-Bruijn-indexed terms, so bound-variable
//! names and whitespace never matter. Numeric literals compare by rational
//! value (`0.8` equals `4/5`), and the two pushforward spellings are the
//! same head. Lemma items are skipped: equivalence is about the
//! definitions.

use crate::value::Rat;
use num_bigint::BigInt;
use num_traits::Zero;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("alpha comparison parse error ({side}): {msg}")]
pub struct AlphaError {
    pub side: &'static str,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rat),
    Sym(&'static str),
}

fn lex(text: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let mut frac = String::new();
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        frac.push(chars[i]);
                        i += 1;
                    }
                }
                let whole: String = chars[start..]
                    .iter()
                    .take_while(|c| c.is_ascii_digit())
                    .collect();
                let whole = BigInt::from_str(&whole).unwrap();
                let r = if frac.is_empty() {
                    Rat::from_integer(whole)
                } else {
                    let scale = BigInt::from(10).pow(frac.len() as u32);
                    Rat::new(whole * &scale + BigInt::from_str(&frac).unwrap(), scale)
                };
                toks.push(Tok::Num(r));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            ':' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    toks.push(Tok::Sym(":="));
                    i += 2;
                } else {
                    toks.push(Tok::Sym(":"));
                    i += 1;
                }
            }
            '!' if i + 1 < chars.len() && chars[i + 1] == '=' => {
                toks.push(Tok::Sym("!="));
                i += 2;
            }
            '<' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    toks.push(Tok::Sym("<="));
                    i += 2;
                } else {
                    toks.push(Tok::Sym("<"));
                    i += 1;
                }
            }
            '=' => {
                toks.push(Tok::Sym("="));
                i += 1;
            }
            '(' | ')' | ',' | '.' | '+' | '-' | '*' | '/' | '{' | '}' => {
                let s = match c {
                    '(' => "(",
                    ')' => ")",
                    ',' => ",",
                    '.' => ".",
                    '+' => "+",
                    '-' => "-",
                    '*' => "*",
                    '/' => "/",
                    '{' => "{",
                    _ => "}",
                };
                toks.push(Tok::Sym(s));
                i += 1;
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(toks)
}

#[derive(Debug, Clone, PartialEq)]
enum Term {
    Num(Rat),
    Free(String),
    Bound(usize),
    Let(Box<Term>, Box<Term>),
    If(Box<Term>, Box<Term>, Box<Term>),
    Bin(&'static str, Box<Term>, Box<Term>),
    Cmp(&'static str, Box<Term>, Box<Term>),
    Proj(Box<Term>, &'static str),
    Tuple(Vec<Term>),
    App(Box<Term>, Vec<Term>),
}

#[derive(Debug, Clone, PartialEq)]
struct DefItem {
    name: String,
    has_param: bool,
    body: Term,
}

const KEYWORDS: &[&str] = &[
    "def", "lemma", "let", "in", "if", "then", "else", "begin", "end",
];

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    binders: Vec<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Ident(s)) => Some(s.as_str()),
            _ => None,
        }
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(t)) if *t == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), String> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(format!("expected `{s}` at token {}", self.pos))
        }
    }

    fn expect_ident(&mut self) -> Result<String, String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            other => Err(format!("expected identifier, found {other:?}")),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek_ident() == Some(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_items(&mut self) -> Result<Vec<DefItem>, String> {
        let mut items = Vec::new();
        while self.peek().is_some() {
            if self.eat_keyword("lemma") {
                // Skip to the closing `end` of the tactic block.
                let mut saw_end = false;
                while let Some(tok) = self.peek() {
                    if matches!(tok, Tok::Ident(s) if s == "end") {
                        self.pos += 1;
                        saw_end = true;
                        break;
                    }
                    self.pos += 1;
                }
                if !saw_end {
                    return Err("unterminated lemma block".into());
                }
                continue;
            }
            if !self.eat_keyword("def") {
                return Err(format!("expected `def` or `lemma` at token {}", self.pos));
            }
            let name = self.expect_ident()?;
            let mut has_param = false;
            let mut param = None;
            if let Some(id) = self.peek_ident() {
                if !KEYWORDS.contains(&id) {
                    param = Some(id.to_string());
                    has_param = true;
                    self.pos += 1;
                }
            }
            self.expect_sym(":=")?;
            if let Some(p) = &param {
                self.binders.push(p.clone());
            }
            let body = self.parse_term()?;
            if param.is_some() {
                self.binders.pop();
            }
            items.push(DefItem {
                name,
                has_param,
                body,
            });
        }
        Ok(items)
    }

    fn parse_term(&mut self) -> Result<Term, String> {
        if self.eat_keyword("let") {
            let name = self.expect_ident()?;
            self.expect_sym(":=")?;
            let value = self.parse_term()?;
            if !self.eat_keyword("in") {
                return Err("expected `in` after let binding".into());
            }
            self.binders.push(name);
            let body = self.parse_term()?;
            self.binders.pop();
            return Ok(Term::Let(Box::new(value), Box::new(body)));
        }
        if self.eat_keyword("if") {
            let cond = self.parse_term()?;
            if !self.eat_keyword("then") {
                return Err("expected `then`".into());
            }
            let then = self.parse_term()?;
            if !self.eat_keyword("else") {
                return Err("expected `else`".into());
            }
            let els = self.parse_term()?;
            return Ok(Term::If(Box::new(cond), Box::new(then), Box::new(els)));
        }
        self.parse_cmp()
    }

    fn parse_cmp(&mut self) -> Result<Term, String> {
        let left = self.parse_add()?;
        let op = match self.peek() {
            Some(Tok::Sym("=")) => Some("="),
            Some(Tok::Sym("!=")) => Some("!="),
            Some(Tok::Sym("<")) => Some("<"),
            Some(Tok::Sym("<=")) => Some("<="),
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            let right = self.parse_add()?;
            return Ok(Term::Cmp(op, Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn parse_add(&mut self) -> Result<Term, String> {
        let mut left = self.parse_mul()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("+")) => "+",
                Some(Tok::Sym("-")) => "-",
                _ => break,
            };
            self.pos += 1;
            let right = self.parse_mul()?;
            left = Term::Bin(op, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_mul(&mut self) -> Result<Term, String> {
        let mut left = self.parse_app()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("*")) => "*",
                Some(Tok::Sym("/")) => "/",
                _ => break,
            };
            self.pos += 1;
            let right = self.parse_app()?;
            left = fold_bin(op, left, right);
        }
        Ok(left)
    }

    fn at_atom_start(&self) -> bool {
        match self.peek() {
            Some(Tok::Num(_)) => true,
            Some(Tok::Sym("(")) | Some(Tok::Sym("-")) => true,
            Some(Tok::Ident(s)) => !KEYWORDS.contains(&s.as_str()),
            _ => false,
        }
    }

    fn parse_app(&mut self) -> Result<Term, String> {
        let head = self.parse_atom()?;
        let mut args = Vec::new();
        while self.at_atom_start() {
            args.push(self.parse_atom()?);
        }
        if args.is_empty() {
            Ok(head)
        } else {
            Ok(Term::App(Box::new(head), args))
        }
    }

    fn parse_atom(&mut self) -> Result<Term, String> {
        if self.eat_sym("-") {
            let inner = self.parse_atom()?;
            return Ok(match inner {
                Term::Num(r) => Term::Num(-r),
                other => Term::Bin(
                    "-",
                    Box::new(Term::Num(Rat::zero())),
                    Box::new(other),
                ),
            });
        }
        let base = match self.peek().cloned() {
            Some(Tok::Num(r)) => {
                self.pos += 1;
                Term::Num(r)
            }
            Some(Tok::Ident(name)) => {
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(format!("unexpected keyword `{name}`"));
                }
                self.pos += 1;
                let head = self.resolve(&name);
                if self.eat_sym("(") {
                    let args = self.parse_term_list()?;
                    Term::App(Box::new(head), vec![tuple_or_single(args)])
                } else {
                    head
                }
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let terms = self.parse_term_list()?;
                tuple_or_single(terms)
            }
            other => return Err(format!("expected atom, found {other:?}")),
        };
        self.parse_projs(base)
    }

    fn parse_term_list(&mut self) -> Result<Vec<Term>, String> {
        let mut terms = vec![self.parse_term()?];
        loop {
            if self.eat_sym(")") {
                return Ok(terms);
            }
            self.expect_sym(",")?;
            terms.push(self.parse_term()?);
        }
    }

    fn parse_projs(&mut self, mut base: Term) -> Result<Term, String> {
        while self.eat_sym(".") {
            match self.peek_ident() {
                Some("fst") => {
                    self.pos += 1;
                    base = Term::Proj(Box::new(base), "fst");
                }
                Some("snd") => {
                    self.pos += 1;
                    base = Term::Proj(Box::new(base), "snd");
                }
                other => return Err(format!("expected projection, found {other:?}")),
            }
        }
        Ok(base)
    }

    fn resolve(&self, name: &str) -> Term {
        for (depth, binder) in self.binders.iter().rev().enumerate() {
            if binder == name {
                return Term::Bound(depth);
            }
        }
        // The two pushforward spellings denote the same head.
        let canonical = if name == "pushforward" {
            "push_forward".to_string()
        } else {
            name.to_string()
        };
        Term::Free(canonical)
    }
}

fn tuple_or_single(mut terms: Vec<Term>) -> Term {
    if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        Term::Tuple(terms)
    }
}

fn fold_bin(op: &'static str, l: Term, r: Term) -> Term {
    if op == "/" {
        if let (Term::Num(a), Term::Num(b)) = (&l, &r) {
            if !b.is_zero() {
                return Term::Num(a.clone() / b.clone());
            }
        }
    }
    Term::Bin(op, Box::new(l), Box::new(r))
}

fn parse_defs(text: &str, side: &'static str) -> Result<Vec<DefItem>, AlphaError> {
    let toks = lex(text).map_err(|msg| AlphaError { side, msg })?;
    let mut parser = Parser {
        toks,
        pos: 0,
        binders: Vec::new(),
    };
    parser.parse_items().map_err(|msg| AlphaError { side, msg })
}

/// True iff the definition items of both texts are pairwise equal up to
/// bound-variable renaming, whitespace, and numeral notation. Lemma items
/// are ignored.
pub fn alpha_equiv(a: &str, b: &str) -> Result<bool, AlphaError> {
    let da = parse_defs(a, "left")?;
    let db = parse_defs(b, "right")?;
    Ok(da == db)
}
