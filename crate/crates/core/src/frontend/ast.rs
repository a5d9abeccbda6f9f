//! AST of the source language: models made of sample statements,
//! deterministic lets, nested zero-argument calls, and a tuple return.

use crate::dist::DistKind;
use crate::value::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
}

impl CmpOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    First,
    Second,
}

impl Side {
    pub fn suffix(&self) -> &'static str {
        match self {
            Side::First => "fst",
            Side::Second => "snd",
        }
    }
}

/// Deterministic expression. Numeric literals are exact rationals; there are
/// no floating-point constants in the AST.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Rat),
    Var(String),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    If {
        cond: Box<Expr>,
        then: Box<Expr>,
        els: Box<Expr>,
    },
    Proj(Box<Expr>, Side),
}

/// A primitive distribution call with parameter expressions, e.g.
/// `uniform(0.8 * theta, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistCall {
    pub kind: DistKind,
    pub args: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Sample { var: String, dist: DistCall, line: usize },
    Let { var: String, expr: Expr, line: usize },
    Call { vars: Vec<String>, callee: String, line: usize },
    Return { vars: Vec<String>, line: usize },
}

impl Stmt {
    pub fn line(&self) -> usize {
        match self {
            Stmt::Sample { line, .. }
            | Stmt::Let { line, .. }
            | Stmt::Call { line, .. }
            | Stmt::Return { line, .. } => *line,
        }
    }

    /// Variables bound by this statement.
    pub fn bound_vars(&self) -> Vec<&str> {
        match self {
            Stmt::Sample { var, .. } | Stmt::Let { var, .. } => vec![var.as_str()],
            Stmt::Call { vars, .. } => vars.iter().map(|v| v.as_str()).collect(),
            Stmt::Return { .. } => vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub name: String,
    pub stmts: Vec<Stmt>,
    pub line: usize,
}

impl Model {
    /// The variables of the final return statement.
    pub fn return_vars(&self) -> &[String] {
        match self.stmts.last() {
            Some(Stmt::Return { vars, .. }) => vars,
            _ => &[],
        }
    }

    pub fn sample_stmts(&self) -> impl Iterator<Item = (&String, &DistCall)> {
        self.stmts.iter().filter_map(|s| match s {
            Stmt::Sample { var, dist, .. } => Some((var, dist)),
            _ => None,
        })
    }

    pub fn call_stmts(&self) -> impl Iterator<Item = (&Vec<String>, &String)> {
        self.stmts.iter().filter_map(|s| match s {
            Stmt::Call { vars, callee, .. } => Some((vars, callee)),
            _ => None,
        })
    }
}

/// Scalar static type: reals vs. integer-coded booleans/outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    Real,
    Int,
}

/// Shape of a model's output value: a scalar or a nested pair tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TyTree {
    Scalar(Ty),
    Pair(Box<TyTree>, Box<TyTree>),
}

impl TyTree {
    pub fn leaf_count(&self) -> usize {
        match self {
            TyTree::Scalar(_) => 1,
            TyTree::Pair(a, b) => a.leaf_count() + b.leaf_count(),
        }
    }
}

/// Group a flat list into the canonical nested-pair tree: split at the
/// midpoint (left half takes the extra element), recursively. A four-tuple
/// becomes `((a,b),(c,d))`.
pub fn balanced_tree<T: Clone>(
    items: &[T],
    pair: &impl Fn(T, T) -> T,
) -> T {
    assert!(!items.is_empty());
    if items.len() == 1 {
        return items[0].clone();
    }
    let mid = items.len().div_ceil(2);
    let left = balanced_tree(&items[..mid], pair);
    let right = balanced_tree(&items[mid..], pair);
    pair(left, right)
}

/// Paths from the root of a balanced tree over `n` leaves to each leaf, in
/// leaf order.
pub fn balanced_paths(n: usize) -> Vec<Vec<Side>> {
    fn go(n: usize, prefix: &mut Vec<Side>, out: &mut Vec<Vec<Side>>) {
        if n == 1 {
            out.push(prefix.clone());
            return;
        }
        let mid = n.div_ceil(2);
        prefix.push(Side::First);
        go(mid, prefix, out);
        prefix.pop();
        prefix.push(Side::Second);
        go(n - mid, prefix, out);
        prefix.pop();
    }
    assert!(n >= 1);
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_grouping() {
        let leaves: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let tree = balanced_tree(&leaves, &|l, r| format!("({l},{r})"));
        assert_eq!(tree, "((a,b),(c,d))");
        let three: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(balanced_tree(&three, &|l, r| format!("({l},{r})")), "((a,b),c)");
        assert_eq!(
            balanced_tree(&leaves[..2].to_vec(), &|l, r| format!("({l},{r})")),
            "(a,b)"
        );
    }

    #[test]
    fn balanced_path_layout() {
        use Side::*;
        assert_eq!(balanced_paths(1), vec![vec![]]);
        assert_eq!(balanced_paths(2), vec![vec![First], vec![Second]]);
        assert_eq!(
            balanced_paths(4),
            vec![
                vec![First, First],
                vec![First, Second],
                vec![Second, First],
                vec![Second, Second]
            ]
        );
    }
}
