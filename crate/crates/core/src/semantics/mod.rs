//! Executable meanings: the forward sampler for source models, the pure
//! evaluator for translated functions, and the event language.
//!
//! The two semantics are coupled: feeding the flattened components of an
//! input vector to the sampler's statements in source order (hoisted-callee
//! components first) must reproduce the pure function's output bit for bit.

pub mod exact;
pub mod giry;
pub mod mc;

use crate::dist::{self, DomainError};
use crate::frontend::ast::{CmpOp, Expr, Model, Side, Stmt, TyTree};
use crate::reparam::{InputShape, PureExpr, PureFn, ResultTree, TableEntry, TranslationTable};
use crate::rng::CounterRng;
use crate::value::{self, Rat, Value, ValueError};
use num_bigint::BigInt;
use std::cmp::Ordering;
use std::collections::HashMap;

pub use exact::{pushforward_exact, pushforward_exact_measure, ExactError};
pub use giry::{giry_enumerate, DiscreteMeasure, GiryError};
pub use mc::{mc_probability, McEstimate};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Value(#[from] ValueError),
    #[error("input does not conform to the function's shape: {0}")]
    ShapeMismatch(String),
    #[error("uniform stream exhausted while sampling `{model}`")]
    StreamExhausted { model: String },
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("model `{0}` not found")]
    UnknownModel(String),
    #[error("cannot evaluate foreign primitive `{0}`")]
    ForeignPrimitive(String),
    #[error("event path does not resolve: {0}")]
    BadEventPath(String),
}

fn truthy(v: &Value) -> Result<bool, SemanticsError> {
    Ok(value::num_cmp(v, &Value::Int(0))? != Ordering::Equal)
}

/// Check that a value conforms to an output type tree (structure only).
fn conforms_ty(v: &Value, ty: &TyTree) -> bool {
    match (v, ty) {
        (Value::Pair(a, b), TyTree::Pair(ta, tb)) => conforms_ty(a, ta) && conforms_ty(b, tb),
        (v, TyTree::Scalar(_)) => v.is_scalar(),
        _ => false,
    }
}

/// Check that an input value conforms to a shape: pairs line up, uniform
/// slots hold scalars in [0,1], model slots match the callee output type.
pub fn check_shape(shape: &InputShape, v: &Value) -> Result<(), SemanticsError> {
    match (shape, v) {
        (InputShape::Unit, Value::Unit) => Ok(()),
        (InputShape::Uniform, v) if v.is_scalar() => {
            let u = v.as_f64()?;
            if (0.0..=1.0).contains(&u) {
                Ok(())
            } else {
                Err(SemanticsError::ShapeMismatch(format!(
                    "uniform slot holds {u}, outside [0,1]"
                )))
            }
        }
        (InputShape::Model { output, .. }, v) if conforms_ty(v, output) => Ok(()),
        (InputShape::Node(a, b), Value::Pair(va, vb)) => {
            check_shape(a, va)?;
            check_shape(b, vb)
        }
        (shape, v) => Err(SemanticsError::ShapeMismatch(format!(
            "expected {shape:?}, found {v}"
        ))),
    }
}

fn eval_pure_expr(
    e: &PureExpr,
    env: &HashMap<String, Value>,
    input: &Value,
) -> Result<Value, SemanticsError> {
    match e {
        PureExpr::Const(r) => Ok(Value::Rat(r.clone())),
        PureExpr::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| SemanticsError::UnboundVar(v.clone())),
        PureExpr::Input => Ok(input.clone()),
        PureExpr::Proj(b, side) => {
            let base = eval_pure_expr(b, env, input)?;
            Ok(match side {
                Side::First => base.fst()?.clone(),
                Side::Second => base.snd()?.clone(),
            })
        }
        PureExpr::Gen(kind, args) => {
            let vals: Vec<Value> = args
                .iter()
                .map(|a| eval_pure_expr(a, env, input))
                .collect::<Result<_, _>>()?;
            Ok(dist::apply_generator(*kind, &vals)?)
        }
        PureExpr::Bin(op, l, r) => {
            let (lv, rv) = (
                eval_pure_expr(l, env, input)?,
                eval_pure_expr(r, env, input)?,
            );
            Ok(apply_bin(op, &lv, &rv)?)
        }
        PureExpr::Cmp(op, l, r) => {
            let (lv, rv) = (
                eval_pure_expr(l, env, input)?,
                eval_pure_expr(r, env, input)?,
            );
            Ok(Value::Int(apply_cmp(*op, &lv, &rv)? as i64))
        }
        PureExpr::If { cond, then, els } => {
            let c = eval_pure_expr(cond, env, input)?;
            if truthy(&c)? {
                eval_pure_expr(then, env, input)
            } else {
                eval_pure_expr(els, env, input)
            }
        }
        PureExpr::Call(name, _) => Err(SemanticsError::ForeignPrimitive(name.clone())),
    }
}

pub(crate) fn apply_bin(
    op: &crate::frontend::ast::BinOp,
    l: &Value,
    r: &Value,
) -> Result<Value, ValueError> {
    use crate::frontend::ast::BinOp::*;
    match op {
        Add => value::add(l, r),
        Sub => value::sub(l, r),
        Mul => value::mul(l, r),
        Div => value::div(l, r),
    }
}

pub(crate) fn apply_cmp(op: CmpOp, l: &Value, r: &Value) -> Result<bool, ValueError> {
    let ord = value::num_cmp(l, r)?;
    Ok(match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
    })
}

fn build_result(
    tree: &ResultTree,
    env: &HashMap<String, Value>,
) -> Result<Value, SemanticsError> {
    match tree {
        ResultTree::Leaf(name) => env
            .get(name)
            .cloned()
            .ok_or_else(|| SemanticsError::UnboundVar(name.clone())),
        ResultTree::Node(a, b) => Ok(Value::pair(build_result(a, env)?, build_result(b, env)?)),
    }
}

/// Evaluate a pure function on a shape-conformant input. Total and
/// deterministic; domain errors surface from the generators.
pub fn eval_pure(func: &PureFn, input: &Value) -> Result<Value, SemanticsError> {
    check_shape(&func.shape, input)?;
    let mut env: HashMap<String, Value> = HashMap::new();
    for (name, rhs) in &func.bindings {
        let v = eval_pure_expr(rhs, &env, input)?;
        env.insert(name.clone(), v);
    }
    build_result(&func.result, &env)
}

fn eval_src_expr(e: &Expr, env: &HashMap<String, Value>) -> Result<Value, SemanticsError> {
    match e {
        Expr::Const(r) => Ok(Value::Rat(r.clone())),
        Expr::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| SemanticsError::UnboundVar(v.clone())),
        Expr::Bin(op, l, r) => {
            let (lv, rv) = (eval_src_expr(l, env)?, eval_src_expr(r, env)?);
            Ok(apply_bin(op, &lv, &rv)?)
        }
        Expr::Cmp(op, l, r) => {
            let (lv, rv) = (eval_src_expr(l, env)?, eval_src_expr(r, env)?);
            Ok(Value::Int(apply_cmp(*op, &lv, &rv)? as i64))
        }
        Expr::If { cond, then, els } => {
            let c = eval_src_expr(cond, env)?;
            if truthy(&c)? {
                eval_src_expr(then, env)
            } else {
                eval_src_expr(els, env)
            }
        }
        Expr::Proj(b, side) => {
            let base = eval_src_expr(b, env)?;
            Ok(match side {
                Side::First => base.fst()?.clone(),
                Side::Second => base.snd()?.clone(),
            })
        }
    }
}

/// Flatten a balanced tuple value into its `n` scalar leaves, left to right.
fn flatten_balanced(v: &Value, n: usize) -> Vec<Value> {
    fn go(v: &Value, n: usize, out: &mut Vec<Value>) {
        if n == 1 {
            out.push(v.clone());
            return;
        }
        let mid = n.div_ceil(2);
        match v {
            Value::Pair(a, b) => {
                go(a, mid, out);
                go(b, n - mid, out);
            }
            other => out.push(other.clone()),
        }
    }
    let mut out = Vec::new();
    go(v, n, &mut out);
    out
}

/// Execute a model against a stream of uniforms. Hoisted-callee draws
/// consume their own sub-streams first, in call order; the model's own
/// sample statements then consume the remainder in source order.
pub fn run_sampler(
    model: &Model,
    stream: &mut dyn Iterator<Item = Value>,
    models: &[Model],
) -> Result<Value, SemanticsError> {
    // First pass: callees draw from the stream prefix.
    let mut call_outputs: Vec<Value> = Vec::new();
    for (_, callee) in model.call_stmts() {
        let callee_model = models
            .iter()
            .find(|m| &m.name == callee)
            .ok_or_else(|| SemanticsError::UnknownModel(callee.clone()))?;
        call_outputs.push(run_sampler(callee_model, stream, models)?);
    }
    let mut call_outputs = call_outputs.into_iter();

    let mut env: HashMap<String, Value> = HashMap::new();
    for stmt in &model.stmts {
        match stmt {
            Stmt::Sample { var, dist, .. } => {
                let mut args: Vec<Value> = dist
                    .args
                    .iter()
                    .map(|a| eval_src_expr(a, &env))
                    .collect::<Result<_, _>>()?;
                let u = stream
                    .next()
                    .ok_or_else(|| SemanticsError::StreamExhausted {
                        model: model.name.clone(),
                    })?;
                args.push(u);
                env.insert(var.clone(), dist::apply_generator(dist.kind, &args)?);
            }
            Stmt::Let { var, expr, .. } => {
                let v = eval_src_expr(expr, &env)?;
                env.insert(var.clone(), v);
            }
            Stmt::Call { vars, .. } => {
                let output = call_outputs.next().expect("call outputs precomputed");
                for (var, val) in vars.iter().zip(flatten_balanced(&output, vars.len())) {
                    env.insert(var.clone(), val);
                }
            }
            Stmt::Return { vars, .. } => {
                let leaves: Vec<Value> = vars
                    .iter()
                    .map(|v| {
                        env.get(v)
                            .cloned()
                            .ok_or_else(|| SemanticsError::UnboundVar(v.clone()))
                    })
                    .collect::<Result<_, _>>()?;
                return Ok(crate::frontend::ast::balanced_tree(&leaves, &Value::pair));
            }
        }
    }
    unreachable!("validated models end with a return")
}

/// One uniform draw, open interval, as float or the exact rational the
/// float denotes.
fn draw_uniform(rng: &mut CounterRng, exact: bool) -> Value {
    let k = rng.next_u64() >> 11;
    if exact {
        Value::Rat(Rat::new(BigInt::from(2 * k + 1), BigInt::from(1u128 << 54)))
    } else {
        Value::F64((k as f64 + 0.5) * (1.0 / (1u64 << 53) as f64))
    }
}

/// An input vector for a pure function together with the uniform stream
/// that couples the sampler to it.
#[derive(Debug, Clone)]
pub struct DrawnInput {
    pub vector: Value,
    pub stream: Vec<Value>,
}

/// Sample an input for a translated model: fresh uniforms for uniform
/// leaves, and callee outputs (computed through the callees' own pure
/// functions) for model leaves. The stream lists every underlying uniform
/// in coupling order: callee sub-streams first, own draws after.
pub fn sample_input(
    entry: &TableEntry,
    table: &TranslationTable,
    rng: &mut CounterRng,
    exact: bool,
) -> Result<DrawnInput, SemanticsError> {
    fn walk(
        shape: &InputShape,
        table: &TranslationTable,
        rng: &mut CounterRng,
        exact: bool,
        own_draws: &mut Vec<Value>,
        callee_stream: &mut Vec<Value>,
    ) -> Result<Value, SemanticsError> {
        match shape {
            InputShape::Unit => Ok(Value::Unit),
            InputShape::Uniform => {
                let u = draw_uniform(rng, exact);
                own_draws.push(u.clone());
                Ok(u)
            }
            InputShape::Model { name, .. } => {
                let entry = table
                    .get(name)
                    .ok_or_else(|| SemanticsError::UnknownModel(name.clone()))?;
                let drawn = sample_input(entry, table, rng, exact)?;
                callee_stream.extend(drawn.stream.iter().cloned());
                eval_pure(&entry.pure_fn, &drawn.vector)
            }
            InputShape::Node(a, b) => {
                let va = walk(a, table, rng, exact, own_draws, callee_stream)?;
                let vb = walk(b, table, rng, exact, own_draws, callee_stream)?;
                Ok(Value::pair(va, vb))
            }
        }
    }
    let mut own_draws = Vec::new();
    let mut callee_stream = Vec::new();
    let vector = walk(
        &entry.shape,
        table,
        rng,
        exact,
        &mut own_draws,
        &mut callee_stream,
    )?;
    let mut stream = callee_stream;
    stream.extend(own_draws);
    Ok(DrawnInput { vector, stream })
}

/// One conjunct of an event: a projection chain compared to a constant.
#[derive(Debug, Clone, PartialEq)]
pub struct EventAtom {
    pub path: Vec<Side>,
    pub op: CmpOp,
    pub constant: Value,
}

/// A conjunction of component comparisons, e.g. `.fst.snd = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub atoms: Vec<EventAtom>,
}

impl Event {
    /// The whole space: an empty conjunction.
    pub fn all() -> Event {
        Event { atoms: vec![] }
    }

    pub fn atom(path: Vec<Side>, op: CmpOp, constant: Value) -> Event {
        Event {
            atoms: vec![EventAtom { path, op, constant }],
        }
    }

    pub fn and(mut self, path: Vec<Side>, op: CmpOp, constant: Value) -> Event {
        self.atoms.push(EventAtom { path, op, constant });
        self
    }

    pub fn eval(&self, v: &Value) -> Result<bool, SemanticsError> {
        for atom in &self.atoms {
            let mut cur = v;
            for side in &atom.path {
                cur = match side {
                    Side::First => cur.fst(),
                    Side::Second => cur.snd(),
                }
                .map_err(|_| {
                    SemanticsError::BadEventPath(format!("{} on {v}", atom.display_path()))
                })?;
            }
            if !apply_cmp(atom.op, cur, &atom.constant)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl EventAtom {
    pub fn display_path(&self) -> String {
        if self.path.is_empty() {
            ".".to_string()
        } else {
            self.path
                .iter()
                .map(|s| format!(".{}", s.suffix()))
                .collect()
        }
    }

    fn op_symbol(&self) -> &'static str {
        match self.op {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
        }
    }
}

impl std::fmt::Display for Event {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "true");
        }
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| format!("{} {} {}", a.display_path(), a.op_symbol(), a.constant))
            .collect();
        write!(f, "{}", parts.join(" and "))
    }
}

/// Parse the canonical event syntax: conjuncts joined by ` and `, each
/// `PATH OP CONST` with `PATH` a `.fst`/`.snd` chain (`.` alone for the
/// root value).
pub fn parse_event(text: &str) -> Result<Event, String> {
    let text = text.trim();
    if text == "true" {
        return Ok(Event::all());
    }
    let mut atoms = Vec::new();
    for part in text.split(" and ") {
        let tokens: Vec<&str> = part.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(format!("expected `PATH OP CONST`, found `{part}`"));
        }
        let mut path = Vec::new();
        if tokens[0] != "." {
            if !tokens[0].starts_with('.') {
                return Err(format!("path must start with `.`: `{}`", tokens[0]));
            }
            for seg in tokens[0][1..].split('.') {
                match seg {
                    "fst" => path.push(Side::First),
                    "snd" => path.push(Side::Second),
                    other => return Err(format!("bad path segment `{other}`")),
                }
            }
        }
        let op = match tokens[1] {
            "=" => CmpOp::Eq,
            "!=" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            other => return Err(format!("bad comparison `{other}`")),
        };
        let constant = parse_const(tokens[2])?;
        atoms.push(EventAtom { path, op, constant });
    }
    Ok(Event { atoms })
}

fn parse_const(text: &str) -> Result<Value, String> {
    if let Some((n, d)) = text.split_once('/') {
        let n: i64 = n.parse().map_err(|_| format!("bad numerator `{n}`"))?;
        let d: i64 = d.parse().map_err(|_| format!("bad denominator `{d}`"))?;
        if d == 0 {
            return Err("zero denominator".into());
        }
        return Ok(Value::Rat(Rat::new(BigInt::from(n), BigInt::from(d))));
    }
    if let Ok(n) = text.parse::<i64>() {
        return Ok(Value::Int(n));
    }
    text.parse::<f64>()
        .map(Value::F64)
        .map_err(|_| format!("bad constant `{text}`"))
}

#[cfg(test)]
mod tests;
