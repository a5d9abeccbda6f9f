//! The reparameterization transform: rewrite a model into a pure function of
//! a nested-pair input of pre-sampled values.
//!
//! Sampling statements become generator calls, each consuming one uniform
//! projection of the input. Nested zero-argument calls are hoisted: the
//! callee's output is passed in as a component of the input, distributed
//! according to the callee's own pushforward measure. The pipeline per model
//! is: hoist calls, count the residual uniform demand, thread projections,
//! and normalize with common-subexpression elimination.

pub mod cse;

use crate::frontend::ast::{
    balanced_paths, balanced_tree, BinOp, CmpOp, Expr, Model, Side, Stmt, Ty, TyTree,
};
use crate::dist::DistKind;
use crate::value::Rat;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranslateError {
    #[error("model `{model}`: callee `{callee}` missing from the translation table")]
    MissingCallee { model: String, callee: String },
    #[error("`{var}` is not a return variable of model `{model}`")]
    UnknownReturnVar { model: String, var: String },
    #[error("nothing to translate")]
    EmptyProgram,
}

/// Pure target expression over input projections, generator calls, and
/// earlier let-bound names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PureExpr {
    Const(Rat),
    /// Reference to an earlier binding of the enclosing function.
    Var(String),
    /// The whole input value.
    Input,
    Proj(Box<PureExpr>, Side),
    /// Generator call; distribution parameters first, uniform input last.
    Gen(DistKind, Vec<PureExpr>),
    Bin(BinOp, Box<PureExpr>, Box<PureExpr>),
    Cmp(CmpOp, Box<PureExpr>, Box<PureExpr>),
    If {
        cond: Box<PureExpr>,
        then: Box<PureExpr>,
        els: Box<PureExpr>,
    },
    /// Application of a named foreign primitive. The translator never emits
    /// this; it exists so certification can reject functions that fall
    /// outside the measurable whitelist.
    Call(String, Vec<PureExpr>),
}

impl PureExpr {
    pub fn proj(self, side: Side) -> PureExpr {
        PureExpr::Proj(Box::new(self), side)
    }

    /// Build a projection chain over the input from a root path.
    pub fn input_path(path: &[Side]) -> PureExpr {
        path.iter()
            .fold(PureExpr::Input, |acc, side| acc.proj(*side))
    }
}

/// Binary tree describing the input measure of a pushforward: uniform
/// leaves are fresh Uniform(0,1) draws, model leaves carry a hoisted
/// callee's output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputShape {
    /// Input of a model that samples nothing and calls nothing.
    Unit,
    Uniform,
    Model { name: String, output: TyTree },
    Node(Box<InputShape>, Box<InputShape>),
}

impl InputShape {
    pub fn node(a: InputShape, b: InputShape) -> InputShape {
        InputShape::Node(Box::new(a), Box::new(b))
    }

    pub fn uniform_leaf_count(&self) -> usize {
        match self {
            InputShape::Uniform => 1,
            InputShape::Node(a, b) => a.uniform_leaf_count() + b.uniform_leaf_count(),
            _ => 0,
        }
    }

    pub fn model_leaves(&self) -> Vec<&str> {
        match self {
            InputShape::Model { name, .. } => vec![name.as_str()],
            InputShape::Node(a, b) => {
                let mut v = a.model_leaves();
                v.extend(b.model_leaves());
                v
            }
            _ => vec![],
        }
    }

    /// Paths to uniform leaves, left to right.
    pub fn uniform_paths(&self) -> Vec<Vec<Side>> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), &mut |shape, path, out: &mut Vec<Vec<Side>>| {
            if matches!(shape, InputShape::Uniform) {
                out.push(path.to_vec());
            }
        }, &mut out);
        out
    }

    fn walk<T>(
        &self,
        path: &mut Vec<Side>,
        visit: &mut impl FnMut(&InputShape, &[Side], &mut T),
        acc: &mut T,
    ) {
        match self {
            InputShape::Node(a, b) => {
                path.push(Side::First);
                a.walk(path, visit, acc);
                path.pop();
                path.push(Side::Second);
                b.walk(path, visit, acc);
                path.pop();
            }
            leaf => visit(leaf, path, acc),
        }
    }

    /// Resolve a root path to the leaf (or subtree) it denotes.
    pub fn at_path(&self, path: &[Side]) -> Option<&InputShape> {
        match (self, path.split_first()) {
            (shape, None) => Some(shape),
            (InputShape::Node(a, b), Some((side, rest))) => match side {
                Side::First => a.at_path(rest),
                Side::Second => b.at_path(rest),
            },
            _ => None,
        }
    }
}

/// Nested tuple of binding names returned by a pure function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResultTree {
    Leaf(String),
    Node(Box<ResultTree>, Box<ResultTree>),
}

impl ResultTree {
    pub fn node(a: ResultTree, b: ResultTree) -> ResultTree {
        ResultTree::Node(Box::new(a), Box::new(b))
    }

    pub fn leaves(&self) -> Vec<&str> {
        match self {
            ResultTree::Leaf(name) => vec![name.as_str()],
            ResultTree::Node(a, b) => {
                let mut v = a.leaves();
                v.extend(b.leaves());
                v
            }
        }
    }
}

/// A straight-line pure function: ordered let bindings over a nested-pair
/// input, closed out by a tuple of bound names. No sampling remains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PureFn {
    pub name: String,
    pub shape: InputShape,
    pub bindings: Vec<(String, PureExpr)>,
    pub result: ResultTree,
}

/// Symbolic measure: what the emitted definition denotes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasureExpr {
    /// Point mass on the unit value.
    Unit,
    Uniform01,
    /// The pushforward measure of a previously translated model.
    Model(String),
    Prod(Box<MeasureExpr>, Box<MeasureExpr>),
    Pushforward(String, Box<MeasureExpr>),
}

impl MeasureExpr {
    pub fn of_shape(shape: &InputShape) -> MeasureExpr {
        match shape {
            InputShape::Unit => MeasureExpr::Unit,
            InputShape::Uniform => MeasureExpr::Uniform01,
            InputShape::Model { name, .. } => MeasureExpr::Model(name.clone()),
            InputShape::Node(a, b) => MeasureExpr::Prod(
                Box::new(MeasureExpr::of_shape(a)),
                Box::new(MeasureExpr::of_shape(b)),
            ),
        }
    }
}

/// A fully inlined pure expression for one return variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slice {
    pub ret_var: String,
    pub expr: PureExpr,
}

/// Substitute an environment of already-inlined expressions for variable
/// references.
pub fn substitute(e: &PureExpr, env: &HashMap<String, PureExpr>) -> PureExpr {
    match e {
        PureExpr::Var(v) => env.get(v).cloned().unwrap_or_else(|| e.clone()),
        PureExpr::Const(_) | PureExpr::Input => e.clone(),
        PureExpr::Proj(b, s) => PureExpr::Proj(Box::new(substitute(b, env)), *s),
        PureExpr::Gen(k, args) => {
            PureExpr::Gen(*k, args.iter().map(|a| substitute(a, env)).collect())
        }
        PureExpr::Bin(op, l, r) => PureExpr::Bin(
            op.clone(),
            Box::new(substitute(l, env)),
            Box::new(substitute(r, env)),
        ),
        PureExpr::Cmp(op, l, r) => PureExpr::Cmp(
            *op,
            Box::new(substitute(l, env)),
            Box::new(substitute(r, env)),
        ),
        PureExpr::If { cond, then, els } => PureExpr::If {
            cond: Box::new(substitute(cond, env)),
            then: Box::new(substitute(then, env)),
            els: Box::new(substitute(els, env)),
        },
        PureExpr::Call(name, args) => {
            PureExpr::Call(name.clone(), args.iter().map(|a| substitute(a, env)).collect())
        }
    }
}

/// Fully inline every binding of a function: the closed expression each
/// bound name denotes over input projections alone.
pub fn inline_bindings(func: &PureFn) -> HashMap<String, PureExpr> {
    let mut env: HashMap<String, PureExpr> = HashMap::new();
    for (name, rhs) in &func.bindings {
        let e = substitute(rhs, &env);
        env.insert(name.clone(), e);
    }
    env
}

/// One translated model.
#[derive(Debug, Clone)]
pub struct TableEntry {
    pub name: String,
    pub pure_fn: PureFn,
    pub shape: InputShape,
    pub output_ty: TyTree,
    pub measure: MeasureExpr,
    /// Name of the measurability lemma certifying `pure_fn`.
    pub cert_lemma: String,
    /// Total uniform draws consumed by a sampler run: own samples plus the
    /// recursive demand of hoisted callees.
    pub uniform_weight: usize,
    /// Return variable names in source order.
    pub return_vars: Vec<String>,
}

/// Translated models keyed by name, kept in topological (file) order.
#[derive(Debug, Clone, Default)]
pub struct TranslationTable {
    entries: Vec<TableEntry>,
    index: HashMap<String, usize>,
}

impl TranslationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&TableEntry> {
        self.index.get(name).map(|&i| &self.entries[i])
    }

    pub fn insert(&mut self, entry: TableEntry) {
        self.index.insert(entry.name.clone(), self.entries.len());
        self.entries.push(entry);
    }

    pub fn iter(&self) -> impl Iterator<Item = &TableEntry> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A call statement marked for hoisting: its output arrives as a model leaf
/// of the input instead of being computed in the body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoistedCall {
    pub callee: String,
    pub vars: Vec<String>,
    pub output_ty: TyTree,
}

/// Residual uniform demand of a model: one per sample statement. Hoisted
/// callees contribute a model leaf, not uniforms.
pub fn count_uniforms(model: &Model, table: &TranslationTable) -> Result<usize, TranslateError> {
    for (_, callee) in model.call_stmts() {
        if table.get(callee).is_none() {
            return Err(TranslateError::MissingCallee {
                model: model.name.clone(),
                callee: callee.clone(),
            });
        }
    }
    Ok(model.sample_stmts().count())
}

/// Split a model into its call-free remainder and the hoisted calls, in
/// call order.
pub fn hoist_calls(
    model: &Model,
    table: &TranslationTable,
) -> Result<(Model, Vec<HoistedCall>), TranslateError> {
    let mut hoisted = Vec::new();
    let mut stmts = Vec::new();
    for stmt in &model.stmts {
        match stmt {
            Stmt::Call { vars, callee, .. } => {
                let entry = table.get(callee).ok_or_else(|| TranslateError::MissingCallee {
                    model: model.name.clone(),
                    callee: callee.clone(),
                })?;
                hoisted.push(HoistedCall {
                    callee: callee.clone(),
                    vars: vars.clone(),
                    output_ty: entry.output_ty.clone(),
                });
            }
            other => stmts.push(other.clone()),
        }
    }
    Ok((
        Model {
            name: model.name.clone(),
            stmts,
            line: model.line,
        },
        hoisted,
    ))
}

/// Right-nested tree over a list of shapes; `None` when the list is empty.
fn right_nested(mut leaves: Vec<InputShape>) -> Option<InputShape> {
    let last = leaves.pop()?;
    Some(
        leaves
            .into_iter()
            .rev()
            .fold(last, |acc, leaf| InputShape::node(leaf, acc)),
    )
}

/// Paths to the `n` leaves of a right-nested tree.
fn right_nested_paths(n: usize) -> Vec<Vec<Side>> {
    (0..n)
        .map(|i| {
            let mut path = vec![Side::Second; i.min(n - 1)];
            if i + 1 < n {
                path.push(Side::First);
            }
            path
        })
        .collect()
}

/// The canonical input shape: hoisted-model leaves (right-nested, call
/// order) paired with fresh uniforms (right-nested, sampling order). When
/// either side is empty the other stands alone.
fn canonical_shape(hoisted: &[HoistedCall], n_uniforms: usize) -> InputShape {
    let models = right_nested(
        hoisted
            .iter()
            .map(|h| InputShape::Model {
                name: h.callee.clone(),
                output: h.output_ty.clone(),
            })
            .collect(),
    );
    let uniforms = right_nested(vec![InputShape::Uniform; n_uniforms]);
    match (models, uniforms) {
        (Some(m), Some(u)) => InputShape::node(m, u),
        (Some(m), None) => m,
        (None, Some(u)) => u,
        (None, None) => InputShape::Unit,
    }
}

fn convert_expr(e: &Expr) -> PureExpr {
    match e {
        Expr::Const(r) => PureExpr::Const(r.clone()),
        Expr::Var(v) => PureExpr::Var(v.clone()),
        Expr::Bin(op, l, r) => PureExpr::Bin(
            op.clone(),
            Box::new(convert_expr(l)),
            Box::new(convert_expr(r)),
        ),
        Expr::Cmp(op, l, r) => PureExpr::Cmp(
            *op,
            Box::new(convert_expr(l)),
            Box::new(convert_expr(r)),
        ),
        Expr::If { cond, then, els } => PureExpr::If {
            cond: Box::new(convert_expr(cond)),
            then: Box::new(convert_expr(then)),
            els: Box::new(convert_expr(els)),
        },
        Expr::Proj(base, side) => PureExpr::Proj(Box::new(convert_expr(base)), *side),
    }
}

/// Fresh uniform names continue past the recursive demand of the hoisted
/// callees, so a caller's inputs pick up numbering where the callees' own
/// draws left off.
fn uniform_name_start(hoisted: &[HoistedCall], table: &TranslationTable) -> usize {
    hoisted
        .iter()
        .map(|h| table.get(&h.callee).map(|e| e.uniform_weight).unwrap_or(0))
        .sum()
}

struct PreludePlan {
    shape: InputShape,
    /// Bindings for destructured callee outputs and uniform components.
    bindings: Vec<(String, PureExpr)>,
    /// Uniform binding name per sample statement, in sampling order.
    uniform_names: Vec<String>,
}

fn plan_prelude(
    hoisted: &[HoistedCall],
    n_uniforms: usize,
    name_start: usize,
) -> PreludePlan {
    let shape = canonical_shape(hoisted, n_uniforms);
    let both = !hoisted.is_empty() && n_uniforms > 0;
    let mut bindings = Vec::new();

    let model_paths = right_nested_paths(hoisted.len());
    for (call, leaf_path) in hoisted.iter().zip(model_paths) {
        let mut root = Vec::new();
        if both {
            root.push(Side::First);
        }
        root.extend(leaf_path);
        let var_paths = balanced_paths(call.vars.len());
        for (var, var_path) in call.vars.iter().zip(var_paths) {
            let mut full = root.clone();
            full.extend(var_path);
            bindings.push((var.clone(), PureExpr::input_path(&full)));
        }
    }

    let mut uniform_names = Vec::new();
    let uniform_paths = right_nested_paths(n_uniforms);
    for (i, leaf_path) in uniform_paths.into_iter().enumerate() {
        let mut root = Vec::new();
        if both {
            root.push(Side::Second);
        }
        root.extend(leaf_path);
        let name = format!("u{}", name_start + i + 1);
        bindings.push((name.clone(), PureExpr::input_path(&root)));
        uniform_names.push(name);
    }

    PreludePlan {
        shape,
        bindings,
        uniform_names,
    }
}

/// Thread the input through a model: a prelude of projection bindings
/// followed by one binding per source statement, sampling replaced by
/// generator calls. This is the pre-CSE pushforward body.
pub fn thread_inputs(model: &Model, table: &TranslationTable) -> Result<PureFn, TranslateError> {
    let (residual, hoisted) = hoist_calls(model, table)?;
    let n_uniforms = count_uniforms(model, table)?;
    let plan = plan_prelude(&hoisted, n_uniforms, uniform_name_start(&hoisted, table));

    let mut bindings = plan.bindings;
    let mut next_uniform = plan.uniform_names.into_iter();
    for stmt in &residual.stmts {
        match stmt {
            Stmt::Sample { var, dist, .. } => {
                let mut args: Vec<PureExpr> = dist.args.iter().map(convert_expr).collect();
                args.push(PureExpr::Var(next_uniform.next().expect("uniform demand")));
                bindings.push((var.clone(), PureExpr::Gen(dist.kind, args)));
            }
            Stmt::Let { var, expr, .. } => {
                bindings.push((var.clone(), convert_expr(expr)));
            }
            Stmt::Return { .. } => {}
            Stmt::Call { .. } => unreachable!("calls hoisted"),
        }
    }

    let leaves: Vec<ResultTree> = model
        .return_vars()
        .iter()
        .map(|v| ResultTree::Leaf(v.clone()))
        .collect();
    let result = balanced_tree(&leaves, &ResultTree::node);

    Ok(PureFn {
        name: format!("{}_fun", model.name),
        shape: plan.shape,
        bindings,
        result,
    })
}

/// The fully inlined pure expression computing one return variable from
/// input projections alone.
pub fn slice(
    model: &Model,
    ret_var: &str,
    table: &TranslationTable,
) -> Result<Slice, TranslateError> {
    if !model.return_vars().iter().any(|v| v == ret_var) {
        return Err(TranslateError::UnknownReturnVar {
            model: model.name.clone(),
            var: ret_var.to_string(),
        });
    }
    let (residual, hoisted) = hoist_calls(model, table)?;
    let n_uniforms = count_uniforms(model, table)?;
    let plan = plan_prelude(&hoisted, n_uniforms, uniform_name_start(&hoisted, table));

    // Environment of fully inlined expressions per variable.
    let mut env: HashMap<String, PureExpr> = plan.bindings.iter().cloned().collect();
    let uniform_chain: HashMap<String, PureExpr> = plan.bindings.iter().cloned().collect();
    let mut next_uniform = plan.uniform_names.iter();

    for stmt in &residual.stmts {
        match stmt {
            Stmt::Sample { var, dist, .. } => {
                let mut args: Vec<PureExpr> = dist
                    .args
                    .iter()
                    .map(|a| substitute(&convert_expr(a), &env))
                    .collect();
                let uname = next_uniform.next().expect("uniform demand");
                args.push(uniform_chain[uname].clone());
                env.insert(var.clone(), PureExpr::Gen(dist.kind, args));
            }
            Stmt::Let { var, expr, .. } => {
                let inlined = substitute(&convert_expr(expr), &env);
                env.insert(var.clone(), inlined);
            }
            _ => {}
        }
    }

    Ok(Slice {
        ret_var: ret_var.to_string(),
        expr: env
            .remove(ret_var)
            .expect("return variable bound by validation"),
    })
}

/// Infer the output type tree of a model given its callees' entries.
fn infer_output_ty(model: &Model, table: &TranslationTable) -> TyTree {
    let mut tys: HashMap<String, Ty> = HashMap::new();
    fn expr_ty(e: &Expr, tys: &HashMap<String, Ty>) -> Ty {
        match e {
            Expr::Const(_) => Ty::Real,
            Expr::Var(v) => tys.get(v).copied().unwrap_or(Ty::Real),
            Expr::Cmp(..) => Ty::Int,
            Expr::Bin(BinOp::Div, ..) => Ty::Real,
            Expr::Bin(_, l, r) => {
                if expr_ty(l, tys) == Ty::Int && expr_ty(r, tys) == Ty::Int {
                    Ty::Int
                } else {
                    Ty::Real
                }
            }
            Expr::If { then, els, .. } => {
                if expr_ty(then, tys) == Ty::Int && expr_ty(els, tys) == Ty::Int {
                    Ty::Int
                } else {
                    Ty::Real
                }
            }
            Expr::Proj(..) => Ty::Real,
        }
    }
    fn flatten(ty: &TyTree, out: &mut Vec<Ty>) {
        match ty {
            TyTree::Scalar(t) => out.push(*t),
            TyTree::Pair(a, b) => {
                flatten(a, out);
                flatten(b, out);
            }
        }
    }
    for stmt in &model.stmts {
        match stmt {
            Stmt::Sample { var, dist, .. } => {
                let ty = match dist.kind {
                    DistKind::Bernoulli => Ty::Int,
                    _ => Ty::Real,
                };
                tys.insert(var.clone(), ty);
            }
            Stmt::Let { var, expr, .. } => {
                let ty = expr_ty(expr, &tys);
                tys.insert(var.clone(), ty);
            }
            Stmt::Call { vars, callee, .. } => {
                if let Some(entry) = table.get(callee) {
                    let mut flat = Vec::new();
                    flatten(&entry.output_ty, &mut flat);
                    for (var, ty) in vars.iter().zip(flat) {
                        tys.insert(var.clone(), ty);
                    }
                }
            }
            Stmt::Return { .. } => {}
        }
    }
    let leaves: Vec<TyTree> = model
        .return_vars()
        .iter()
        .map(|v| TyTree::Scalar(tys.get(v).copied().unwrap_or(Ty::Real)))
        .collect();
    balanced_tree(&leaves, &|a, b| TyTree::Pair(Box::new(a), Box::new(b)))
}

/// Translate one model and record it in the table. The resulting measure is
/// the pushforward of the input measure (a product over the shape) through
/// the normalized pure function.
pub fn translate(
    model: &Model,
    table: &mut TranslationTable,
) -> Result<TableEntry, TranslateError> {
    let threaded = thread_inputs(model, table)?;
    let pure_fn = cse::cse(&threaded);
    let shape = pure_fn.shape.clone();
    let measure = MeasureExpr::Pushforward(
        pure_fn.name.clone(),
        Box::new(MeasureExpr::of_shape(&shape)),
    );
    let (_, hoisted) = hoist_calls(model, table)?;
    let uniform_weight =
        count_uniforms(model, table)? + uniform_name_start(&hoisted, table);
    let entry = TableEntry {
        name: model.name.clone(),
        pure_fn,
        shape,
        output_ty: infer_output_ty(model, table),
        measure,
        cert_lemma: format!("{}_fun_measurable", model.name),
        uniform_weight,
        return_vars: model.return_vars().to_vec(),
    };
    table.insert(entry.clone());
    Ok(entry)
}

/// Check the structural invariants of a translated function: every
/// projection chain resolves to a leaf of the input shape (continuing into
/// the output type for model leaves), and each uniform leaf is consumed by
/// exactly one generator call.
pub fn verify_pure_fn(func: &PureFn) -> Result<(), String> {
    fn ty_path_ok(ty: &TyTree, path: &[Side]) -> bool {
        match (ty, path.split_first()) {
            (TyTree::Scalar(_), None) => true,
            (TyTree::Pair(a, b), Some((side, rest))) => match side {
                Side::First => ty_path_ok(a, rest),
                Side::Second => ty_path_ok(b, rest),
            },
            _ => false,
        }
    }
    fn resolve(shape: &InputShape, path: &[Side]) -> Result<Option<Vec<Side>>, String> {
        // Returns the resolved uniform-leaf path, or None for model leaves.
        match shape {
            InputShape::Node(a, b) => match path.split_first() {
                Some((Side::First, rest)) => resolve(a, rest),
                Some((Side::Second, rest)) => resolve(b, rest),
                None => Err("projection stops at an interior node".into()),
            },
            InputShape::Uniform => {
                if path.is_empty() {
                    Ok(Some(vec![]))
                } else {
                    Err("projection continues past a uniform leaf".into())
                }
            }
            InputShape::Model { output, .. } => {
                if ty_path_ok(output, path) {
                    Ok(None)
                } else {
                    Err("projection invalid for the callee output type".into())
                }
            }
            InputShape::Unit => Err("projection into a unit input".into()),
        }
    }

    let mut chain_of: HashMap<String, Vec<Side>> = HashMap::new();
    fn chase(e: &PureExpr, chain_of: &HashMap<String, Vec<Side>>) -> Option<Vec<Side>> {
        match e {
            PureExpr::Input => Some(vec![]),
            PureExpr::Var(v) => chain_of.get(v).cloned(),
            PureExpr::Proj(b, s) => {
                let mut p = chase(b, chain_of)?;
                p.push(*s);
                Some(p)
            }
            _ => None,
        }
    }

    let mut uniform_consumers: HashMap<Vec<Side>, usize> = HashMap::new();

    // Walk every expression; check chains and count generator consumption.
    fn walk(
        e: &PureExpr,
        shape: &InputShape,
        chain_of: &HashMap<String, Vec<Side>>,
        consumers: &mut HashMap<Vec<Side>, usize>,
    ) -> Result<(), String> {
        if let Some(path) = chase(e, chain_of) {
            // A maximal chain: must resolve against the shape.
            resolve(shape, &path)?;
            return Ok(());
        }
        match e {
            PureExpr::Gen(_, args) => {
                let (u_arg, params) = args.split_last().ok_or("generator without input")?;
                for p in params {
                    walk(p, shape, chain_of, consumers)?;
                }
                let path = chase(u_arg, chain_of)
                    .ok_or("generator input is not a projection chain")?;
                match resolve(shape, &path)? {
                    Some(_) => {
                        *consumers.entry(path).or_insert(0) += 1;
                    }
                    None => return Err("generator consumes a model-leaf component".into()),
                }
                Ok(())
            }
            PureExpr::Bin(_, l, r) | PureExpr::Cmp(_, l, r) => {
                walk(l, shape, chain_of, consumers)?;
                walk(r, shape, chain_of, consumers)
            }
            PureExpr::If { cond, then, els } => {
                walk(cond, shape, chain_of, consumers)?;
                walk(then, shape, chain_of, consumers)?;
                walk(els, shape, chain_of, consumers)
            }
            PureExpr::Call(_, args) => {
                for a in args {
                    walk(a, shape, chain_of, consumers)?;
                }
                Ok(())
            }
            PureExpr::Proj(b, _) => walk(b, shape, chain_of, consumers),
            PureExpr::Const(_) | PureExpr::Var(_) | PureExpr::Input => Ok(()),
        }
    }

    for (name, rhs) in &func.bindings {
        walk(rhs, &func.shape, &chain_of, &mut uniform_consumers)?;
        if let Some(path) = chase(rhs, &chain_of) {
            chain_of.insert(name.clone(), path);
        }
    }

    for path in func.shape.uniform_paths() {
        let n = uniform_consumers.get(&path).copied().unwrap_or(0);
        if n != 1 {
            return Err(format!(
                "uniform leaf at {path:?} consumed by {n} generator calls (expected 1)"
            ));
        }
    }
    Ok(())
}

/// Translate every model of a validated program, in file order.
pub fn translate_program(
    models: &[Model],
) -> Result<TranslationTable, TranslateError> {
    if models.is_empty() {
        return Err(TranslateError::EmptyProgram);
    }
    let mut table = TranslationTable::new();
    for model in models {
        translate(model, &mut table)?;
    }
    Ok(table)
}

#[cfg(test)]
pub(crate) mod tests;
