//! Finite-support measures with exact rational weights, and the monadic
//! enumeration oracle for the discrete fragment.
//!
//! `bind` is the weighted sum over the support (the finite-support instance
//! of integrating a kernel against a measure); `ret` is a point mass.
//! Programs whose sample statements are all Bernoulli with exactly-rational
//! parameters denote measures this oracle computes exactly.

use crate::frontend::ast::{balanced_tree, CmpOp, Expr, Model, Stmt};
use crate::dist::DistKind;
use crate::value::{display_rat, rat_int, Rat, Value};
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GiryError {
    #[error("model `{model}`: a continuous draw flows to the output through `{via}`")]
    NonFiniteSupport { model: String, via: String },
    #[error("model `{model}`: bernoulli parameter {p} outside [0,1]")]
    BadParameter { model: String, p: String },
    #[error("model `{model}`: {msg}")]
    Eval { model: String, msg: String },
    #[error("weights sum to {total}, not 1")]
    NotNormalized { total: String },
    #[error("negative weight {w}")]
    NegativeWeight { w: String },
    #[error("model `{0}` not found")]
    UnknownModel(String),
}

/// A finite-support probability measure: distinct values with positive
/// exact-rational weights summing to exactly one, sorted by value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteMeasure {
    entries: Vec<(Value, Rat)>,
}

impl DiscreteMeasure {
    /// Point mass at a value.
    pub fn dirac(v: Value) -> DiscreteMeasure {
        DiscreteMeasure {
            entries: vec![(v, Rat::one())],
        }
    }

    /// Build from raw (value, weight) pairs: merges duplicates, drops zero
    /// weights, and requires the total to be exactly one.
    pub fn from_entries(raw: Vec<(Value, Rat)>) -> Result<DiscreteMeasure, GiryError> {
        let mut entries: Vec<(Value, Rat)> = Vec::new();
        let mut sorted = raw;
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for (v, w) in sorted {
            if w.is_negative() {
                return Err(GiryError::NegativeWeight { w: display_rat(&w) });
            }
            if w.is_zero() {
                continue;
            }
            match entries.last_mut() {
                Some((last, lw)) if *last == v => *lw += w,
                _ => entries.push((v, w)),
            }
        }
        let total: Rat = entries.iter().map(|(_, w)| w.clone()).sum();
        if !total.is_one() {
            return Err(GiryError::NotNormalized {
                total: display_rat(&total),
            });
        }
        Ok(DiscreteMeasure { entries })
    }

    pub fn entries(&self) -> &[(Value, Rat)] {
        &self.entries
    }

    /// Monadic sequencing: sample from self, feed the value to the kernel,
    /// and marginalize. The result is normalized by construction and checked.
    pub fn bind(
        &self,
        kernel: impl Fn(&Value) -> Result<DiscreteMeasure, GiryError>,
    ) -> Result<DiscreteMeasure, GiryError> {
        let mut raw = Vec::new();
        for (v, w) in &self.entries {
            let inner = kernel(v)?;
            for (iv, iw) in inner.entries {
                raw.push((iv, w.clone() * iw));
            }
        }
        DiscreteMeasure::from_entries(raw)
    }

    /// Probability of a predicate over the support.
    pub fn prob(&self, mut pred: impl FnMut(&Value) -> bool) -> Rat {
        self.entries
            .iter()
            .filter(|(v, _)| pred(v))
            .map(|(_, w)| w.clone())
            .sum()
    }

    pub fn weight_of(&self, v: &Value) -> Rat {
        self.entries
            .iter()
            .find(|(x, _)| x == v)
            .map(|(_, w)| w.clone())
            .unwrap_or_else(Rat::zero)
    }

    /// Total variation distance: half the L1 distance between weights.
    pub fn total_variation(&self, other: &DiscreteMeasure) -> Rat {
        let mut keys: Vec<&Value> = self
            .entries
            .iter()
            .map(|(v, _)| v)
            .chain(other.entries.iter().map(|(v, _)| v))
            .collect();
        keys.sort();
        keys.dedup();
        let sum: Rat = keys
            .into_iter()
            .map(|v| {
                let d = self.weight_of(v) - other.weight_of(v);
                if d.is_negative() {
                    -d
                } else {
                    d
                }
            })
            .sum();
        sum / rat_int(2)
    }

    /// Serialize: one `value<TAB>numerator/denominator` line per support
    /// point, sorted lexicographically by the rendered value.
    pub fn serialize(&self) -> String {
        let mut lines: Vec<String> = self
            .entries
            .iter()
            .map(|(v, w)| format!("{v}\t{}/{}", w.numer(), w.denom()))
            .collect();
        lines.sort();
        lines.join("\n")
    }
}

/// Value domain of the enumerator: either an exact value or the marker for
/// a continuous draw that has not (yet) touched the output.
#[derive(Debug, Clone, PartialEq)]
enum GValue {
    Exact(Value),
    Continuous { via: String },
}

fn g_bin(
    op: &crate::frontend::ast::BinOp,
    l: &GValue,
    r: &GValue,
    model: &str,
) -> Result<GValue, GiryError> {
    match (l, r) {
        (GValue::Continuous { via }, _) | (_, GValue::Continuous { via }) => {
            Ok(GValue::Continuous { via: via.clone() })
        }
        (GValue::Exact(a), GValue::Exact(b)) => super::apply_bin(op, a, b)
            .map(GValue::Exact)
            .map_err(|e| GiryError::Eval {
                model: model.to_string(),
                msg: e.to_string(),
            }),
    }
}

fn g_cmp(op: CmpOp, l: &GValue, r: &GValue, model: &str) -> Result<GValue, GiryError> {
    match (l, r) {
        (GValue::Continuous { via }, _) | (_, GValue::Continuous { via }) => {
            Ok(GValue::Continuous { via: via.clone() })
        }
        (GValue::Exact(a), GValue::Exact(b)) => super::apply_cmp(op, a, b)
            .map(|b| GValue::Exact(Value::Int(b as i64)))
            .map_err(|e| GiryError::Eval {
                model: model.to_string(),
                msg: e.to_string(),
            }),
    }
}

fn g_eval(e: &Expr, env: &HashMap<String, GValue>, model: &str) -> Result<GValue, GiryError> {
    match e {
        Expr::Const(r) => Ok(GValue::Exact(Value::Rat(r.clone()))),
        Expr::Var(v) => env.get(v).cloned().ok_or_else(|| GiryError::Eval {
            model: model.to_string(),
            msg: format!("unbound `{v}`"),
        }),
        Expr::Bin(op, l, r) => {
            let (lv, rv) = (g_eval(l, env, model)?, g_eval(r, env, model)?);
            g_bin(op, &lv, &rv, model)
        }
        Expr::Cmp(op, l, r) => {
            let (lv, rv) = (g_eval(l, env, model)?, g_eval(r, env, model)?);
            g_cmp(*op, &lv, &rv, model)
        }
        Expr::If { cond, then, els } => match g_eval(cond, env, model)? {
            GValue::Continuous { via } => Ok(GValue::Continuous { via }),
            GValue::Exact(c) => {
                let taken = super::apply_cmp(CmpOp::Ne, &c, &Value::Int(0)).map_err(|e| {
                    GiryError::Eval {
                        model: model.to_string(),
                        msg: e.to_string(),
                    }
                })?;
                if taken {
                    g_eval(then, env, model)
                } else {
                    g_eval(els, env, model)
                }
            }
        },
        Expr::Proj(..) => Err(GiryError::Eval {
            model: model.to_string(),
            msg: "projection in source expression".into(),
        }),
    }
}

type WeightedEnv = (HashMap<String, GValue>, Rat);

/// Enumerate the exact output distribution of a finite-support model by
/// interpreting it in the probability monad. Bernoulli draws split the
/// weighted environments; uniform and normal draws are admitted only while
/// their values never reach the output.
pub fn giry_enumerate(model: &Model, models: &[Model]) -> Result<DiscreteMeasure, GiryError> {
    let mut worlds: Vec<WeightedEnv> = vec![(HashMap::new(), Rat::one())];
    let check_normalized = |worlds: &[WeightedEnv]| -> Result<(), GiryError> {
        let total: Rat = worlds.iter().map(|(_, w)| w.clone()).sum();
        if total.is_one() {
            Ok(())
        } else {
            Err(GiryError::NotNormalized {
                total: display_rat(&total),
            })
        }
    };

    for stmt in &model.stmts {
        match stmt {
            Stmt::Sample { var, dist, .. } => match dist.kind {
                DistKind::Bernoulli => {
                    let mut next = Vec::new();
                    for (env, w) in &worlds {
                        let p = match g_eval(&dist.args[0], env, &model.name)? {
                            GValue::Exact(v) => v.as_rat().ok_or_else(|| GiryError::Eval {
                                model: model.name.clone(),
                                msg: "bernoulli parameter is not exact".into(),
                            })?,
                            GValue::Continuous { via } => {
                                return Err(GiryError::NonFiniteSupport {
                                    model: model.name.clone(),
                                    via,
                                })
                            }
                        };
                        if p.is_negative() || p > Rat::one() {
                            return Err(GiryError::BadParameter {
                                model: model.name.clone(),
                                p: display_rat(&p),
                            });
                        }
                        let q = Rat::one() - p.clone();
                        if !p.is_zero() {
                            let mut env1 = env.clone();
                            env1.insert(var.clone(), GValue::Exact(Value::Int(1)));
                            next.push((env1, w.clone() * p.clone()));
                        }
                        if !q.is_zero() {
                            let mut env0 = env.clone();
                            env0.insert(var.clone(), GValue::Exact(Value::Int(0)));
                            next.push((env0, w.clone() * q));
                        }
                    }
                    worlds = next;
                    check_normalized(&worlds)?;
                }
                DistKind::Uniform | DistKind::Normal => {
                    for (env, _) in &mut worlds {
                        env.insert(
                            var.clone(),
                            GValue::Continuous { via: var.clone() },
                        );
                    }
                }
            },
            Stmt::Let { var, expr, .. } => {
                for (env, _) in &mut worlds {
                    let v = g_eval(expr, env, &model.name)?;
                    env.insert(var.clone(), v);
                }
            }
            Stmt::Call { vars, callee, .. } => {
                let callee_model = models
                    .iter()
                    .find(|m| &m.name == callee)
                    .ok_or_else(|| GiryError::UnknownModel(callee.clone()))?;
                let inner = giry_enumerate(callee_model, models)?;
                let mut next = Vec::new();
                for (env, w) in &worlds {
                    for (value, iw) in inner.entries() {
                        let mut env2 = env.clone();
                        let leaves = flatten_value(value, vars.len());
                        for (var, leaf) in vars.iter().zip(leaves) {
                            env2.insert(var.clone(), GValue::Exact(leaf));
                        }
                        next.push((env2, w.clone() * iw.clone()));
                    }
                }
                worlds = next;
                check_normalized(&worlds)?;
            }
            Stmt::Return { vars, .. } => {
                let mut raw = Vec::new();
                for (env, w) in &worlds {
                    let mut leaves = Vec::new();
                    for var in vars {
                        match env.get(var) {
                            Some(GValue::Exact(v)) => leaves.push(v.clone()),
                            Some(GValue::Continuous { via }) => {
                                return Err(GiryError::NonFiniteSupport {
                                    model: model.name.clone(),
                                    via: via.clone(),
                                })
                            }
                            None => {
                                return Err(GiryError::Eval {
                                    model: model.name.clone(),
                                    msg: format!("unbound return variable `{var}`"),
                                })
                            }
                        }
                    }
                    raw.push((balanced_tree(&leaves, &Value::pair), w.clone()));
                }
                return DiscreteMeasure::from_entries(raw);
            }
        }
    }
    unreachable!("validated models end with a return")
}

fn flatten_value(v: &Value, n: usize) -> Vec<Value> {
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

impl PartialOrd for DiscreteMeasure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.entries.partial_cmp(&other.entries)
    }
}
