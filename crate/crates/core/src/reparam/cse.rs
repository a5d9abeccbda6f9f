//! Common-subexpression elimination and let-normalization for pure
//! functions.
//!
//! The pass inlines the existing bindings into a hash-consed DAG and then
//! rebinds: every node named by an original binding keeps its (first) name,
//! every maximal input projection chain becomes a prelude binding in shape
//! order, and any remaining node used more than once is bound under a fresh
//! name just before its first use. The output is the normal form the
//! translator emits; running the pass twice is a fixpoint.

use super::{PureExpr, PureFn, ResultTree};
use crate::dist::DistKind;
use crate::frontend::ast::{BinOp, CmpOp, Side};
use crate::value::Rat;
use std::collections::{HashMap, HashSet};

type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Const(Rat),
    Input,
    Proj(NodeId, Side),
    Gen(DistKind, Vec<NodeId>),
    Bin(BinOp, NodeId, NodeId),
    Cmp(CmpOp, NodeId, NodeId),
    If(NodeId, NodeId, NodeId),
    Call(String, Vec<NodeId>),
}

impl Node {
    fn children(&self) -> Vec<NodeId> {
        match self {
            Node::Const(_) | Node::Input => vec![],
            Node::Proj(b, _) => vec![*b],
            Node::Gen(_, args) | Node::Call(_, args) => args.clone(),
            Node::Bin(_, l, r) | Node::Cmp(_, l, r) => vec![*l, *r],
            Node::If(c, t, e) => vec![*c, *t, *e],
        }
    }
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    interned: HashMap<Node, NodeId>,
    /// Whether the node is a pure projection chain over the input.
    chain: Vec<bool>,
}

impl Arena {
    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.interned.get(&node) {
            return id;
        }
        let chain = match &node {
            Node::Input => true,
            Node::Proj(base, _) => self.chain[*base],
            _ => false,
        };
        let id = self.nodes.len();
        self.interned.insert(node.clone(), id);
        self.nodes.push(node);
        self.chain.push(chain);
        id
    }

    fn chain_path(&self, mut id: NodeId) -> Vec<Side> {
        let mut rev = Vec::new();
        loop {
            match &self.nodes[id] {
                Node::Input => break,
                Node::Proj(base, side) => {
                    rev.push(*side);
                    id = *base;
                }
                _ => unreachable!("path of a non-chain node"),
            }
        }
        rev.reverse();
        rev
    }
}

fn intern_expr(
    e: &PureExpr,
    env: &HashMap<String, NodeId>,
    arena: &mut Arena,
) -> NodeId {
    match e {
        PureExpr::Const(r) => arena.intern(Node::Const(r.clone())),
        PureExpr::Var(v) => *env
            .get(v)
            .unwrap_or_else(|| panic!("unbound variable `{v}` in pure function")),
        PureExpr::Input => arena.intern(Node::Input),
        PureExpr::Proj(b, s) => {
            let base = intern_expr(b, env, arena);
            arena.intern(Node::Proj(base, *s))
        }
        PureExpr::Gen(kind, args) => {
            let args = args.iter().map(|a| intern_expr(a, env, arena)).collect();
            arena.intern(Node::Gen(*kind, args))
        }
        PureExpr::Bin(op, l, r) => {
            let l = intern_expr(l, env, arena);
            let r = intern_expr(r, env, arena);
            arena.intern(Node::Bin(op.clone(), l, r))
        }
        PureExpr::Cmp(op, l, r) => {
            let l = intern_expr(l, env, arena);
            let r = intern_expr(r, env, arena);
            arena.intern(Node::Cmp(*op, l, r))
        }
        PureExpr::If { cond, then, els } => {
            let c = intern_expr(cond, env, arena);
            let t = intern_expr(then, env, arena);
            let e2 = intern_expr(els, env, arena);
            arena.intern(Node::If(c, t, e2))
        }
        PureExpr::Call(name, args) => {
            let args = args.iter().map(|a| intern_expr(a, env, arena)).collect();
            arena.intern(Node::Call(name.clone(), args))
        }
    }
}

fn side_rank(s: Side) -> u8 {
    match s {
        Side::First => 0,
        Side::Second => 1,
    }
}

struct Rebinder<'a> {
    arena: &'a Arena,
    bound: &'a HashMap<NodeId, String>,
}

impl Rebinder<'_> {
    /// Render a node as an expression, replacing bound children by name.
    fn root_expr(&self, id: NodeId) -> PureExpr {
        self.render(id, true)
    }

    fn render(&self, id: NodeId, root: bool) -> PureExpr {
        if !root {
            if let Some(name) = self.bound.get(&id) {
                return PureExpr::Var(name.clone());
            }
        }
        match &self.arena.nodes[id] {
            Node::Const(r) => PureExpr::Const(r.clone()),
            Node::Input => PureExpr::Input,
            Node::Proj(b, s) => PureExpr::Proj(Box::new(self.render(*b, false)), *s),
            Node::Gen(kind, args) => PureExpr::Gen(
                *kind,
                args.iter().map(|a| self.render(*a, false)).collect(),
            ),
            Node::Bin(op, l, r) => PureExpr::Bin(
                op.clone(),
                Box::new(self.render(*l, false)),
                Box::new(self.render(*r, false)),
            ),
            Node::Cmp(op, l, r) => PureExpr::Cmp(
                *op,
                Box::new(self.render(*l, false)),
                Box::new(self.render(*r, false)),
            ),
            Node::If(c, t, e) => PureExpr::If {
                cond: Box::new(self.render(*c, false)),
                then: Box::new(self.render(*t, false)),
                els: Box::new(self.render(*e, false)),
            },
            Node::Call(name, args) => PureExpr::Call(
                name.clone(),
                args.iter().map(|a| self.render(*a, false)).collect(),
            ),
        }
    }
}

/// Normalize a pure function. Semantically identical to the input on every
/// input vector; syntactically, shared subexpressions are let-bound once.
pub fn cse(func: &PureFn) -> PureFn {
    let mut arena = Arena::default();
    let mut env: HashMap<String, NodeId> = HashMap::new();
    // First name given to each node, in binding order.
    let mut hint: HashMap<NodeId, String> = HashMap::new();
    let mut hint_order: Vec<NodeId> = Vec::new();
    for (name, rhs) in &func.bindings {
        let id = intern_expr(rhs, &env, &mut arena);
        env.insert(name.clone(), id);
        if !hint.contains_key(&id) {
            hint.insert(id, name.clone());
            hint_order.push(id);
        }
    }

    let result_ids: Vec<NodeId> = func
        .result
        .leaves()
        .iter()
        .map(|leaf| {
            *env.get(*leaf)
                .unwrap_or_else(|| panic!("result references unbound `{leaf}`"))
        })
        .collect();

    // Use counts (per edge) and the set of chains consumed by non-projection
    // parents; those chains are the maximal ones and become the prelude.
    let mut uses: HashMap<NodeId, usize> = HashMap::new();
    let mut chain_used: HashSet<NodeId> = HashSet::new();
    for node in arena.nodes.iter() {
        let parent_is_proj = matches!(node, Node::Proj(..));
        for child in node.children() {
            *uses.entry(child).or_insert(0) += 1;
            if arena.chain[child] && !parent_is_proj {
                chain_used.insert(child);
            }
        }
    }
    for &id in &result_ids {
        *uses.entry(id).or_insert(0) += 1;
        if arena.chain[id] {
            chain_used.insert(id);
        }
    }

    let must_bind = |id: NodeId| -> bool {
        if hint.contains_key(&id) {
            return true;
        }
        let node = &arena.nodes[id];
        if arena.chain[id] {
            return chain_used.contains(&id);
        }
        if matches!(node, Node::Const(_)) {
            return false;
        }
        uses.get(&id).copied().unwrap_or(0) >= 2
    };

    let used_names: HashSet<&String> = hint.values().collect();
    let mut fresh_chain = (1..).map(|i| format!("v{i}"));
    let mut fresh_shared = (0..).map(|i| format!("cse{i}"));
    let mut next_name = |chain: bool| -> String {
        let iter: &mut dyn Iterator<Item = String> = if chain {
            &mut fresh_chain
        } else {
            &mut fresh_shared
        };
        loop {
            let candidate = iter.next().unwrap();
            if !used_names.contains(&candidate) {
                return candidate;
            }
        }
    };

    // Prelude: bound projection chains in shape (path) order.
    let mut prelude: Vec<NodeId> = (0..arena.nodes.len())
        .filter(|&id| arena.chain[id] && must_bind(id))
        .collect();
    prelude.sort_by_key(|&id| {
        arena
            .chain_path(id)
            .into_iter()
            .map(side_rank)
            .collect::<Vec<_>>()
    });

    let mut bound: HashMap<NodeId, String> = HashMap::new();
    let mut order: Vec<NodeId> = Vec::new();
    for &id in &prelude {
        let name = match hint.get(&id) {
            Some(n) => n.clone(),
            None => next_name(true),
        };
        bound.insert(id, name);
        order.push(id);
    }

    // Statement bindings in original order, emitting any shared unnamed
    // dependencies just before their first use.
    fn emit(
        id: NodeId,
        arena: &Arena,
        must_bind: &dyn Fn(NodeId) -> bool,
        hint: &HashMap<NodeId, String>,
        bound: &mut HashMap<NodeId, String>,
        order: &mut Vec<NodeId>,
        next_name: &mut dyn FnMut(bool) -> String,
    ) {
        if bound.contains_key(&id) {
            return;
        }
        emit_deps(id, arena, must_bind, hint, bound, order, next_name);
        if must_bind(id) {
            let name = match hint.get(&id) {
                Some(n) => n.clone(),
                None => next_name(false),
            };
            bound.insert(id, name);
            order.push(id);
        }
    }

    fn emit_deps(
        id: NodeId,
        arena: &Arena,
        must_bind: &dyn Fn(NodeId) -> bool,
        hint: &HashMap<NodeId, String>,
        bound: &mut HashMap<NodeId, String>,
        order: &mut Vec<NodeId>,
        next_name: &mut dyn FnMut(bool) -> String,
    ) {
        for child in arena.nodes[id].children() {
            if must_bind(child) {
                emit(child, arena, must_bind, hint, bound, order, next_name);
            } else {
                emit_deps(child, arena, must_bind, hint, bound, order, next_name);
            }
        }
    }

    for &id in &hint_order {
        emit(
            id,
            &arena,
            &must_bind,
            &hint,
            &mut bound,
            &mut order,
            &mut next_name,
        );
    }
    for &id in &result_ids {
        emit(
            id,
            &arena,
            &must_bind,
            &hint,
            &mut bound,
            &mut order,
            &mut next_name,
        );
    }

    let rebinder = Rebinder {
        arena: &arena,
        bound: &bound,
    };
    let bindings: Vec<(String, PureExpr)> = order
        .iter()
        .map(|&id| (bound[&id].clone(), rebinder.root_expr(id)))
        .collect();

    fn rename_result(tree: &ResultTree, env: &HashMap<String, NodeId>, bound: &HashMap<NodeId, String>) -> ResultTree {
        match tree {
            ResultTree::Leaf(name) => ResultTree::Leaf(bound[&env[name]].clone()),
            ResultTree::Node(a, b) => ResultTree::node(
                rename_result(a, env, bound),
                rename_result(b, env, bound),
            ),
        }
    }
    let result = rename_result(&func.result, &env, &bound);

    PureFn {
        name: func.name.clone(),
        shape: func.shape.clone(),
        bindings,
        result,
    }
}
