//! Exact pushforward probabilities in rational arithmetic.
//!
//! Works on the class of functions whose only non-polynomial steps are
//! Bernoulli thresholds: hoisted callees are flattened into fresh uniform
//! variables, every real-valued quantity becomes a polynomial over the
//! uniform cube, and each Bernoulli outcome splits the analysis into two
//! branches. Because a Bernoulli's uniform input is consumed by that draw
//! alone, integrating it out replaces the indicator `u < p` with the
//! polynomial `p` itself; a branch's probability is then the exact integral
//! of the accumulated factor product over the cube. Branch weights always
//! sum to one, which `DiscreteMeasure` re-checks when a full measure is
//! assembled.

use super::giry::{DiscreteMeasure, GiryError};
use super::Event;
use crate::dist::DistKind;
use crate::frontend::ast::{BinOp, CmpOp, Side};
use crate::reparam::{InputShape, PureExpr, PureFn, ResultTree, TranslationTable};
use crate::value::{display_rat, rat_int, Rat, Value};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, HashMap, HashSet};

const MAX_DISCRETE_DRAWS: usize = 24;
const MAX_VERTEX_VARS: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExactError {
    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),
    #[error("output component is continuous: {0}")]
    ContinuousOutput(String),
    #[error("bernoulli parameter not confined to [0,1]: {0}")]
    ParameterOutOfRange(String),
    #[error("too many discrete draws ({0})")]
    TooManyDraws(usize),
    #[error("model `{0}` not found")]
    UnknownModel(String),
    #[error("event error: {0}")]
    Event(String),
    #[error(transparent)]
    Measure(#[from] GiryError),
}

/// Multivariate polynomial with exact rational coefficients over a fixed
/// number of variables; exponent vectors are dense.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl Poly {
    pub fn constant(nvars: usize, c: Rat) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; nvars], c);
        }
        Poly { nvars, terms }
    }

    pub fn var(nvars: usize, i: usize) -> Poly {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(exps, Rat::one());
        Poly { nvars, terms }
    }

    fn insert(&mut self, exps: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (exps, c) in &other.terms {
            out.insert(exps.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly {
            nvars: self.nvars,
            terms: BTreeMap::new(),
        };
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert(exps, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::constant(self.nvars, Rat::zero());
        }
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, k)| (e.clone(), k.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (exps, c) = self.terms.iter().next().unwrap();
                if exps.iter().all(|&e| e == 0) {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x <= 1))
    }

    fn active_vars(&self) -> Vec<usize> {
        let mut active = vec![false; self.nvars];
        for exps in self.terms.keys() {
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    active[i] = true;
                }
            }
        }
        active
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| a.then_some(i))
            .collect()
    }

    /// Range over the unit cube for multilinear polynomials: extrema sit at
    /// the vertices, so enumerate them.
    pub fn multilinear_range(&self) -> Option<(Rat, Rat)> {
        if !self.is_multilinear() {
            return None;
        }
        let active = self.active_vars();
        if active.len() > MAX_VERTEX_VARS {
            return None;
        }
        let mut lo: Option<Rat> = None;
        let mut hi: Option<Rat> = None;
        for mask in 0u32..(1 << active.len()) {
            let assignment: HashSet<usize> = active
                .iter()
                .enumerate()
                .filter(|(bit, _)| (mask >> bit) & 1 == 1)
                .map(|(_, &v)| v)
                .collect();
            let mut value = Rat::zero();
            'terms: for (exps, c) in &self.terms {
                for (i, &e) in exps.iter().enumerate() {
                    if e > 0 && !assignment.contains(&i) {
                        continue 'terms;
                    }
                }
                value += c.clone();
            }
            lo = Some(match lo {
                Some(l) if l <= value => l,
                _ => value.clone(),
            });
            hi = Some(match hi {
                Some(h) if h >= value => h,
                _ => value,
            });
        }
        Some((lo.unwrap(), hi.unwrap()))
    }

    /// Integral over the unit cube: each monomial contributes
    /// coeff / prod(e_i + 1).
    pub fn cube_integral(&self) -> Rat {
        let mut total = Rat::zero();
        for (exps, c) in &self.terms {
            let mut denom = Rat::one();
            for &e in exps {
                denom *= rat_int(e as i64 + 1);
            }
            total += c.clone() / denom;
        }
        total
    }

    pub fn eval(&self, point: &[Rat]) -> Rat {
        let mut total = Rat::zero();
        for (exps, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    term *= point[i].clone();
                }
            }
            total += term;
        }
        total
    }
}

/// Branch-local scalar: integer-coded discrete value or a polynomial in the
/// uniform inputs.
#[derive(Debug, Clone, PartialEq)]
enum Sym {
    Int(i64),
    Poly(Poly),
}

impl Sym {
    fn to_poly(&self, nvars: usize) -> Poly {
        match self {
            Sym::Int(n) => Poly::constant(nvars, rat_int(*n)),
            Sym::Poly(p) => p.clone(),
        }
    }

    fn as_decided(&self) -> Option<Rat> {
        match self {
            Sym::Int(n) => Some(rat_int(*n)),
            Sym::Poly(p) => p.as_constant(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum SymValue {
    Scalar(Sym),
    Pair(Box<SymValue>, Box<SymValue>),
    Unit,
}

impl SymValue {
    fn pair(a: SymValue, b: SymValue) -> SymValue {
        SymValue::Pair(Box::new(a), Box::new(b))
    }

    fn scalar(&self) -> Result<&Sym, ExactError> {
        match self {
            SymValue::Scalar(s) => Ok(s),
            _ => Err(ExactError::UnsupportedStructure(
                "expected a scalar component".into(),
            )),
        }
    }
}

/// Raised internally when evaluation requests an undetermined Bernoulli
/// outcome; drives the depth-first branch enumeration.
enum EvalAbort {
    NeedBit,
    Fail(ExactError),
}

impl From<ExactError> for EvalAbort {
    fn from(e: ExactError) -> Self {
        EvalAbort::Fail(e)
    }
}

struct BranchEval<'a> {
    table: &'a TranslationTable,
    nvars: usize,
    bits: &'a [bool],
    next_bit: usize,
    next_var: usize,
    factors: Vec<Poly>,
    consumed: Vec<usize>,
}

impl<'a> BranchEval<'a> {
    fn fresh_var(&mut self) -> Poly {
        let v = Poly::var(self.nvars, self.next_var);
        self.next_var += 1;
        v
    }

    fn take_bit(&mut self) -> Result<bool, EvalAbort> {
        if self.next_bit >= self.bits.len() {
            return Err(EvalAbort::NeedBit);
        }
        let b = self.bits[self.next_bit];
        self.next_bit += 1;
        Ok(b)
    }

    /// Confirm a polynomial stays within [lo_min, hi_max] over the cube.
    fn check_range(&self, p: &Poly, what: &str, lo: &Rat, hi: &Rat) -> Result<(), EvalAbort> {
        if let Some(c) = p.as_constant() {
            if &c < lo || &c > hi {
                return Err(EvalAbort::Fail(ExactError::ParameterOutOfRange(format!(
                    "{what} = {}",
                    display_rat(&c)
                ))));
            }
            return Ok(());
        }
        match p.multilinear_range() {
            Some((pmin, pmax)) => {
                if &pmin < lo || &pmax > hi {
                    return Err(EvalAbort::Fail(ExactError::ParameterOutOfRange(format!(
                        "{what} ranges over [{}, {}]",
                        display_rat(&pmin),
                        display_rat(&pmax)
                    ))));
                }
                Ok(())
            }
            None => Err(EvalAbort::Fail(ExactError::UnsupportedStructure(format!(
                "{what} is not multilinear; cannot bound it on the cube"
            )))),
        }
    }

    fn build_input(&mut self, shape: &InputShape) -> Result<SymValue, EvalAbort> {
        match shape {
            InputShape::Unit => Ok(SymValue::Unit),
            InputShape::Uniform => Ok(SymValue::Scalar(Sym::Poly(self.fresh_var()))),
            InputShape::Model { name, .. } => {
                let entry = self
                    .table
                    .get(name)
                    .ok_or_else(|| ExactError::UnknownModel(name.clone()))?;
                let input = self.build_input(&entry.shape)?;
                self.eval_fn(&entry.pure_fn, &input)
            }
            InputShape::Node(a, b) => {
                let va = self.build_input(a)?;
                let vb = self.build_input(b)?;
                Ok(SymValue::pair(va, vb))
            }
        }
    }

    fn eval_fn(&mut self, func: &PureFn, input: &SymValue) -> Result<SymValue, EvalAbort> {
        let mut env: HashMap<String, SymValue> = HashMap::new();
        for (name, rhs) in &func.bindings {
            let v = self.eval_expr(rhs, &env, input)?;
            env.insert(name.clone(), v);
        }
        fn build(
            tree: &ResultTree,
            env: &HashMap<String, SymValue>,
        ) -> Result<SymValue, EvalAbort> {
            match tree {
                ResultTree::Leaf(name) => env.get(name).cloned().ok_or_else(|| {
                    EvalAbort::Fail(ExactError::UnsupportedStructure(format!(
                        "unbound result variable `{name}`"
                    )))
                }),
                ResultTree::Node(a, b) => Ok(SymValue::pair(build(a, env)?, build(b, env)?)),
            }
        }
        build(&func.result, &env)
    }

    fn eval_expr(
        &mut self,
        e: &PureExpr,
        env: &HashMap<String, SymValue>,
        input: &SymValue,
    ) -> Result<SymValue, EvalAbort> {
        match e {
            PureExpr::Const(r) => Ok(SymValue::Scalar(Sym::Poly(Poly::constant(
                self.nvars,
                r.clone(),
            )))),
            PureExpr::Var(v) => env.get(v).cloned().ok_or_else(|| {
                EvalAbort::Fail(ExactError::UnsupportedStructure(format!("unbound `{v}`")))
            }),
            PureExpr::Input => Ok(input.clone()),
            PureExpr::Proj(b, side) => {
                let base = self.eval_expr(b, env, input)?;
                match (base, side) {
                    (SymValue::Pair(a, _), Side::First) => Ok(*a),
                    (SymValue::Pair(_, b), Side::Second) => Ok(*b),
                    _ => Err(EvalAbort::Fail(ExactError::UnsupportedStructure(
                        "projection of a non-pair".into(),
                    ))),
                }
            }
            PureExpr::Gen(DistKind::Uniform, args) => {
                let a = self.eval_expr(&args[0], env, input)?.scalar()?.to_poly(self.nvars);
                let b = self.eval_expr(&args[1], env, input)?.scalar()?.to_poly(self.nvars);
                let u = self.uniform_var(&args[2], env, input)?;
                let width = b.sub(&a);
                if let Some(c) = width.as_constant() {
                    if !c.is_positive() {
                        return Err(EvalAbort::Fail(ExactError::ParameterOutOfRange(
                            format!("uniform width = {}", display_rat(&c)),
                        )));
                    }
                } else {
                    // Non-constant width: must be nonnegative on the cube
                    // (zero on a boundary set is compatible with the measure).
                    self.check_range(&width, "uniform width", &Rat::zero(), &huge())?;
                }
                Ok(SymValue::Scalar(Sym::Poly(a.add(&width.mul(&u)))))
            }
            PureExpr::Gen(DistKind::Bernoulli, args) => {
                let p = self.eval_expr(&args[0], env, input)?.scalar()?.to_poly(self.nvars);
                self.check_range(&p, "bernoulli parameter", &Rat::zero(), &Rat::one())?;
                let u = self.uniform_var(&args[1], env, input)?;
                let var_index = single_var_index(&u).ok_or_else(|| {
                    EvalAbort::Fail(ExactError::UnsupportedStructure(
                        "bernoulli input is not a fresh uniform variable".into(),
                    ))
                })?;
                let outcome = self.take_bit()?;
                let factor = if outcome {
                    p
                } else {
                    Poly::constant(self.nvars, Rat::one()).sub(&p)
                };
                self.factors.push(factor);
                self.consumed.push(var_index);
                Ok(SymValue::Scalar(Sym::Int(outcome as i64)))
            }
            PureExpr::Gen(DistKind::Normal, _) => Err(EvalAbort::Fail(
                ExactError::UnsupportedStructure("normal draws are not piecewise-affine".into()),
            )),
            PureExpr::Bin(op, l, r) => {
                let (lv, rv) = (
                    self.eval_expr(l, env, input)?,
                    self.eval_expr(r, env, input)?,
                );
                let (ls, rs) = (lv.scalar()?, rv.scalar()?);
                Ok(SymValue::Scalar(self.apply_bin(op, ls, rs)?))
            }
            PureExpr::Cmp(op, l, r) => {
                let (lv, rv) = (
                    self.eval_expr(l, env, input)?,
                    self.eval_expr(r, env, input)?,
                );
                let l = lv.scalar()?.as_decided().ok_or_else(undecided)?;
                let r = rv.scalar()?.as_decided().ok_or_else(undecided)?;
                let holds = match op {
                    CmpOp::Eq => l == r,
                    CmpOp::Ne => l != r,
                    CmpOp::Lt => l < r,
                    CmpOp::Le => l <= r,
                };
                Ok(SymValue::Scalar(Sym::Int(holds as i64)))
            }
            PureExpr::If { cond, then, els } => {
                let c = self.eval_expr(cond, env, input)?;
                let c = c.scalar()?.as_decided().ok_or_else(undecided)?;
                if c.is_zero() {
                    self.eval_expr(els, env, input)
                } else {
                    self.eval_expr(then, env, input)
                }
            }
            PureExpr::Call(name, _) => Err(EvalAbort::Fail(ExactError::UnsupportedStructure(
                format!("foreign primitive `{name}`"),
            ))),
        }
    }

    fn apply_bin(&self, op: &BinOp, l: &Sym, r: &Sym) -> Result<Sym, EvalAbort> {
        if let (Sym::Int(a), Sym::Int(b)) = (l, r) {
            match op {
                BinOp::Add => return Ok(Sym::Int(a + b)),
                BinOp::Sub => return Ok(Sym::Int(a - b)),
                BinOp::Mul => return Ok(Sym::Int(a * b)),
                BinOp::Div => {}
            }
        }
        let (lp, rp) = (l.to_poly(self.nvars), r.to_poly(self.nvars));
        let out = match op {
            BinOp::Add => lp.add(&rp),
            BinOp::Sub => lp.sub(&rp),
            BinOp::Mul => lp.mul(&rp),
            BinOp::Div => {
                let c = rp.as_constant().ok_or_else(|| {
                    EvalAbort::Fail(ExactError::UnsupportedStructure(
                        "division by a non-constant".into(),
                    ))
                })?;
                if c.is_zero() {
                    return Err(EvalAbort::Fail(ExactError::UnsupportedStructure(
                        "division by zero".into(),
                    )));
                }
                lp.scale(&(Rat::one() / c))
            }
        };
        Ok(Sym::Poly(out))
    }

    fn uniform_var(
        &mut self,
        e: &PureExpr,
        env: &HashMap<String, SymValue>,
        input: &SymValue,
    ) -> Result<Poly, EvalAbort> {
        let v = self.eval_expr(e, env, input)?;
        match v {
            SymValue::Scalar(Sym::Poly(p)) => Ok(p),
            _ => Err(EvalAbort::Fail(ExactError::UnsupportedStructure(
                "generator input is not a uniform component".into(),
            ))),
        }
    }
}

fn undecided() -> EvalAbort {
    EvalAbort::Fail(ExactError::UnsupportedStructure(
        "comparison or branch on a continuous quantity".into(),
    ))
}

fn huge() -> Rat {
    rat_int(i64::MAX)
}

fn single_var_index(p: &Poly) -> Option<usize> {
    let mut terms = p.terms.iter();
    let (exps, c) = terms.next()?;
    if terms.next().is_some() || !c.is_one() {
        return None;
    }
    let mut idx = None;
    for (i, &e) in exps.iter().enumerate() {
        match e {
            0 => {}
            1 if idx.is_none() => idx = Some(i),
            _ => return None,
        }
    }
    idx
}

/// One fully resolved branch of the analysis.
#[derive(Debug, Clone)]
pub struct Branch {
    pub weight: Rat,
    output: SymValue,
}

/// Count the uniform demand of a shape, following model leaves through the
/// table.
fn shape_uniforms(shape: &InputShape, table: &TranslationTable) -> Result<usize, ExactError> {
    match shape {
        InputShape::Unit => Ok(0),
        InputShape::Uniform => Ok(1),
        InputShape::Model { name, .. } => {
            let entry = table
                .get(name)
                .ok_or_else(|| ExactError::UnknownModel(name.clone()))?;
            shape_uniforms(&entry.shape, table)
        }
        InputShape::Node(a, b) => Ok(shape_uniforms(a, table)? + shape_uniforms(b, table)?),
    }
}

/// Enumerate all branches of a function under the product of uniforms
/// (model leaves flattened through their own pure functions).
fn enumerate_branches(
    func: &PureFn,
    table: &TranslationTable,
) -> Result<Vec<Branch>, ExactError> {
    let nvars = shape_uniforms(&func.shape, table)?;
    let mut done = Vec::new();
    let mut stack: Vec<Vec<bool>> = vec![vec![]];
    while let Some(bits) = stack.pop() {
        if bits.len() > MAX_DISCRETE_DRAWS {
            return Err(ExactError::TooManyDraws(bits.len()));
        }
        let mut eval = BranchEval {
            table,
            nvars,
            bits: &bits,
            next_bit: 0,
            next_var: 0,
            factors: Vec::new(),
            consumed: Vec::new(),
        };
        let attempt = (|| -> Result<SymValue, EvalAbort> {
            let input = eval.build_input(&func.shape)?;
            eval.eval_fn(func, &input)
        })();
        match attempt {
            Ok(output) => {
                // The eliminated uniform of each Bernoulli must not appear
                // anywhere else, or the marginalization would be unsound.
                let consumed: HashSet<usize> = eval.consumed.iter().copied().collect();
                let mentions =
                    |p: &Poly| p.terms.keys().any(|e| consumed.iter().any(|&i| e[i] > 0));
                if eval.factors.iter().any(&mentions) || sym_mentions(&output, &mentions) {
                    return Err(ExactError::UnsupportedStructure(
                        "a bernoulli input is shared with another expression".into(),
                    ));
                }
                let mut product = Poly::constant(nvars, Rat::one());
                for f in &eval.factors {
                    product = product.mul(f);
                }
                let weight = product.cube_integral();
                if weight.is_negative() {
                    return Err(ExactError::ParameterOutOfRange(format!(
                        "negative branch weight {}",
                        display_rat(&weight)
                    )));
                }
                if !weight.is_zero() {
                    done.push(Branch { weight, output });
                }
            }
            Err(EvalAbort::NeedBit) => {
                let mut b0 = bits.clone();
                b0.push(false);
                let mut b1 = bits;
                b1.push(true);
                stack.push(b0);
                stack.push(b1);
            }
            Err(EvalAbort::Fail(e)) => return Err(e),
        }
    }
    Ok(done)
}

fn sym_mentions(v: &SymValue, pred: &impl Fn(&Poly) -> bool) -> bool {
    match v {
        SymValue::Scalar(Sym::Poly(p)) => pred(p),
        SymValue::Scalar(Sym::Int(_)) | SymValue::Unit => false,
        SymValue::Pair(a, b) => sym_mentions(a, pred) || sym_mentions(b, pred),
    }
}

fn branch_event_holds(branch: &Branch, event: &Event) -> Result<bool, ExactError> {
    for atom in &event.atoms {
        let mut cur = &branch.output;
        for side in &atom.path {
            cur = match (cur, side) {
                (SymValue::Pair(a, _), Side::First) => a,
                (SymValue::Pair(_, b), Side::Second) => b,
                _ => {
                    return Err(ExactError::Event(format!(
                        "path {} does not resolve",
                        atom.display_path()
                    )))
                }
            };
        }
        let scalar = match cur {
            SymValue::Scalar(s) => s,
            _ => {
                return Err(ExactError::Event(format!(
                    "path {} stops at a pair",
                    atom.display_path()
                )))
            }
        };
        let decided = scalar.as_decided().ok_or_else(|| {
            ExactError::Event(format!(
                "component at {} is continuous",
                atom.display_path()
            ))
        })?;
        let constant = match &atom.constant {
            Value::Int(n) => rat_int(*n),
            Value::Rat(r) => r.clone(),
            other => {
                return Err(ExactError::Event(format!(
                    "event constant {other} is not exact"
                )))
            }
        };
        let holds = match atom.op {
            CmpOp::Eq => decided == constant,
            CmpOp::Ne => decided != constant,
            CmpOp::Lt => decided < constant,
            CmpOp::Le => decided <= constant,
        };
        if !holds {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact probability of an event under the pushforward of the uniform cube
/// through the function. The event may only constrain branch-determined
/// (integer or constant) components.
pub fn pushforward_exact(
    func: &PureFn,
    table: &TranslationTable,
    event: &Event,
) -> Result<Rat, ExactError> {
    let branches = enumerate_branches(func, table)?;
    let mut total = Rat::zero();
    for branch in &branches {
        if branch_event_holds(branch, event)? {
            total += branch.weight.clone();
        }
    }
    Ok(total)
}

fn branch_value(branch: &Branch) -> Result<Value, ExactError> {
    fn go(v: &SymValue) -> Result<Value, ExactError> {
        match v {
            SymValue::Unit => Ok(Value::Unit),
            SymValue::Scalar(Sym::Int(n)) => Ok(Value::Int(*n)),
            SymValue::Scalar(Sym::Poly(p)) => match p.as_constant() {
                Some(c) => Ok(Value::Rat(c)),
                None => Err(ExactError::ContinuousOutput(
                    "a returned component depends on a uniform input".into(),
                )),
            },
            SymValue::Pair(a, b) => Ok(Value::pair(go(a)?, go(b)?)),
        }
    }
    go(&branch.output)
}

/// The full output distribution when every component is branch-determined:
/// the interval-decomposition counterpart of the monadic enumeration.
pub fn pushforward_exact_measure(
    func: &PureFn,
    table: &TranslationTable,
) -> Result<DiscreteMeasure, ExactError> {
    let branches = enumerate_branches(func, table)?;
    let mut raw = Vec::new();
    for branch in &branches {
        raw.push((branch_value(branch)?, branch.weight.clone()));
    }
    Ok(DiscreteMeasure::from_entries(raw)?)
}
