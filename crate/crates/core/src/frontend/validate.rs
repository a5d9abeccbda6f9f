//! Static checks over parsed models: single assignment, definition before
//! use, acyclic calls, arity agreement, and scalar type checking.

use super::ast::{BinOp, Expr, Model, Stmt, Ty};
use crate::dist::DistKind;
use crate::value::Rat;
use num_traits::{Signed, Zero};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidateError {
    #[error("model `{model}` line {line}: variable `{var}` used before definition")]
    UseBeforeDef { model: String, line: usize, var: String },
    #[error("model `{model}` line {line}: variable `{var}` assigned more than once")]
    Reassignment { model: String, line: usize, var: String },
    #[error("model `{model}` line {line}: cyclic call graph through `{callee}`")]
    CyclicCall { model: String, line: usize, callee: String },
    #[error("model `{model}` line {line}: unknown callee `{callee}`")]
    UnknownCallee { model: String, line: usize, callee: String },
    #[error("model `{model}` line {line}: callee `{callee}` must be defined earlier in the file")]
    CalleeNotYetTranslated { model: String, line: usize, callee: String },
    #[error(
        "model `{model}` line {line}: arity mismatch destructuring `{callee}` (returns {expected} values, bound {found})"
    )]
    ArityMismatch {
        model: String,
        line: usize,
        callee: String,
        expected: usize,
        found: usize,
    },
    #[error("model `{model}` line {line}: {dist} expects {expected} parameters, found {found}")]
    DistArity {
        model: String,
        line: usize,
        dist: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("model `{model}` line {line}: division by an expression that can be zero")]
    PossiblyZeroDivisor { model: String, line: usize },
    #[error("model `{model}` line {line}: {msg}")]
    BadParameter { model: String, line: usize, msg: String },
    #[error("model `{model}` line {line}: projection applied to a non-pair value")]
    ProjectionOfScalar { model: String, line: usize },
    #[error("model `{model}`: missing return statement")]
    MissingReturn { model: String },
    #[error("model `{model}` line {line}: statements after return")]
    StatementsAfterReturn { model: String, line: usize },
    #[error("model `{model}` line {line}: return of undefined variable `{var}`")]
    ReturnUndefined { model: String, line: usize, var: String },
}

/// A program that passed validation. Models are immutable from here on.
#[derive(Debug, Clone)]
pub struct ValidatedProgram {
    pub models: Vec<Model>,
    /// (caller, callee) edges in file order.
    pub call_edges: Vec<(String, String)>,
    /// Number of returned values per model.
    pub output_arity: HashMap<String, usize>,
    /// Scalar type of each returned component, per model, in return order.
    pub output_types: HashMap<String, Vec<Ty>>,
}

/// Fold an expression to a rational constant when it contains no variables,
/// comparisons, or conditionals. Used for static parameter checks.
pub fn const_fold(e: &Expr) -> Option<Rat> {
    match e {
        Expr::Const(r) => Some(r.clone()),
        Expr::Bin(op, l, r) => {
            let (a, b) = (const_fold(l)?, const_fold(r)?);
            match op {
                BinOp::Add => Some(a + b),
                BinOp::Sub => Some(a - b),
                BinOp::Mul => Some(a * b),
                BinOp::Div => {
                    if b.is_zero() {
                        None
                    } else {
                        Some(a / b)
                    }
                }
            }
        }
        _ => None,
    }
}

struct ModelChecker<'a> {
    model: &'a Model,
    vars: HashMap<String, Ty>,
}

impl<'a> ModelChecker<'a> {
    fn err_ctx(&self) -> String {
        self.model.name.clone()
    }

    fn infer_expr(&self, e: &Expr, line: usize) -> Result<Ty, ValidateError> {
        match e {
            Expr::Const(_) => Ok(Ty::Real),
            Expr::Var(v) => self.vars.get(v).copied().ok_or_else(|| {
                ValidateError::UseBeforeDef {
                    model: self.err_ctx(),
                    line,
                    var: v.clone(),
                }
            }),
            Expr::Bin(op, l, r) => {
                let (tl, tr) = (self.infer_expr(l, line)?, self.infer_expr(r, line)?);
                if *op == BinOp::Div {
                    match const_fold(r) {
                        Some(c) if !c.is_zero() => {}
                        _ => {
                            return Err(ValidateError::PossiblyZeroDivisor {
                                model: self.err_ctx(),
                                line,
                            })
                        }
                    }
                    return Ok(Ty::Real);
                }
                Ok(if tl == Ty::Int && tr == Ty::Int {
                    Ty::Int
                } else {
                    Ty::Real
                })
            }
            Expr::Cmp(_, l, r) => {
                self.infer_expr(l, line)?;
                self.infer_expr(r, line)?;
                Ok(Ty::Int)
            }
            Expr::If { cond, then, els } => {
                self.infer_expr(cond, line)?;
                let (tt, te) = (self.infer_expr(then, line)?, self.infer_expr(els, line)?);
                Ok(if tt == Ty::Int && te == Ty::Int {
                    Ty::Int
                } else {
                    Ty::Real
                })
            }
            Expr::Proj(..) => Err(ValidateError::ProjectionOfScalar {
                model: self.err_ctx(),
                line,
            }),
        }
    }

    fn bind(&mut self, var: &str, ty: Ty, line: usize) -> Result<(), ValidateError> {
        if self.vars.insert(var.to_string(), ty).is_some() {
            return Err(ValidateError::Reassignment {
                model: self.err_ctx(),
                line,
                var: var.to_string(),
            });
        }
        Ok(())
    }
}

fn check_const_params(
    model: &str,
    line: usize,
    kind: DistKind,
    args: &[Expr],
) -> Result<(), ValidateError> {
    let folded: Vec<Option<Rat>> = args.iter().map(const_fold).collect();
    let bad = |msg: String| ValidateError::BadParameter {
        model: model.to_string(),
        line,
        msg,
    };
    match kind {
        DistKind::Uniform => {
            if let (Some(a), Some(b)) = (&folded[0], &folded[1]) {
                if a >= b {
                    return Err(bad(format!("uniform requires a < b, got [{a}, {b}]")));
                }
            }
        }
        DistKind::Bernoulli => {
            if let Some(p) = &folded[0] {
                if p.is_negative() || *p > Rat::from_integer(1.into()) {
                    return Err(bad(format!("bernoulli parameter {p} outside [0,1]")));
                }
            }
        }
        DistKind::Normal => {
            if let Some(sigma) = &folded[1] {
                if !sigma.is_positive() {
                    return Err(bad(format!("normal requires sigma > 0, got {sigma}")));
                }
            }
        }
    }
    Ok(())
}

/// Validate parser output. Deterministic and total: either returns a
/// `ValidatedProgram` or reports the first violated invariant.
pub fn validate(models: Vec<Model>) -> Result<ValidatedProgram, ValidateError> {
    let order: HashMap<&str, usize> = models
        .iter()
        .enumerate()
        .map(|(i, m)| (m.name.as_str(), i))
        .collect();
    let mut output_arity: HashMap<String, usize> = HashMap::new();
    let mut output_types: HashMap<String, Vec<Ty>> = HashMap::new();
    let mut call_edges = Vec::new();

    for (idx, model) in models.iter().enumerate() {
        let mut checker = ModelChecker {
            model,
            vars: HashMap::new(),
        };
        // Return must exist, be last, and be unique.
        let n = model.stmts.len();
        let ret_pos = model
            .stmts
            .iter()
            .position(|s| matches!(s, Stmt::Return { .. }));
        match ret_pos {
            None => {
                return Err(ValidateError::MissingReturn {
                    model: model.name.clone(),
                })
            }
            Some(p) if p + 1 != n => {
                return Err(ValidateError::StatementsAfterReturn {
                    model: model.name.clone(),
                    line: model.stmts[p + 1].line(),
                })
            }
            Some(_) => {}
        }

        for stmt in &model.stmts {
            match stmt {
                Stmt::Sample { var, dist, line } => {
                    let expected = dist.kind.param_arity();
                    if dist.args.len() != expected {
                        return Err(ValidateError::DistArity {
                            model: model.name.clone(),
                            line: *line,
                            dist: dist.kind.name(),
                            expected,
                            found: dist.args.len(),
                        });
                    }
                    for arg in &dist.args {
                        checker.infer_expr(arg, *line)?;
                    }
                    check_const_params(&model.name, *line, dist.kind, &dist.args)?;
                    let ty = match dist.kind {
                        DistKind::Bernoulli => Ty::Int,
                        _ => Ty::Real,
                    };
                    checker.bind(var, ty, *line)?;
                }
                Stmt::Let { var, expr, line } => {
                    let ty = checker.infer_expr(expr, *line)?;
                    checker.bind(var, ty, *line)?;
                }
                Stmt::Call { vars, callee, line } => {
                    match order.get(callee.as_str()) {
                        None => {
                            return Err(ValidateError::UnknownCallee {
                                model: model.name.clone(),
                                line: *line,
                                callee: callee.clone(),
                            })
                        }
                        Some(&callee_idx) if callee_idx == idx => {
                            return Err(ValidateError::CyclicCall {
                                model: model.name.clone(),
                                line: *line,
                                callee: callee.clone(),
                            })
                        }
                        Some(&callee_idx) if callee_idx > idx => {
                            // A forward reference. If the callee (or anything it
                            // reaches) calls back into us the graph is cyclic;
                            // either way the definition-order invariant fails.
                            if reaches(&models, callee, &model.name) {
                                return Err(ValidateError::CyclicCall {
                                    model: model.name.clone(),
                                    line: *line,
                                    callee: callee.clone(),
                                });
                            }
                            return Err(ValidateError::CalleeNotYetTranslated {
                                model: model.name.clone(),
                                line: *line,
                                callee: callee.clone(),
                            });
                        }
                        Some(_) => {}
                    }
                    let expected = output_arity[callee.as_str()];
                    if vars.len() != expected {
                        return Err(ValidateError::ArityMismatch {
                            model: model.name.clone(),
                            line: *line,
                            callee: callee.clone(),
                            expected,
                            found: vars.len(),
                        });
                    }
                    let tys = output_types[callee.as_str()].clone();
                    for (var, ty) in vars.iter().zip(tys) {
                        checker.bind(var, ty, *line)?;
                    }
                    call_edges.push((model.name.clone(), callee.clone()));
                }
                Stmt::Return { vars, line } => {
                    let mut tys = Vec::new();
                    for var in vars {
                        match checker.vars.get(var) {
                            Some(ty) => tys.push(*ty),
                            None => {
                                return Err(ValidateError::ReturnUndefined {
                                    model: model.name.clone(),
                                    line: *line,
                                    var: var.clone(),
                                })
                            }
                        }
                    }
                    output_arity.insert(model.name.clone(), vars.len());
                    output_types.insert(model.name.clone(), tys);
                }
            }
        }
    }

    Ok(ValidatedProgram {
        models,
        call_edges,
        output_arity,
        output_types,
    })
}

/// Is `to` reachable from `from` in the call graph?
fn reaches(models: &[Model], from: &str, to: &str) -> bool {
    if from == to {
        return true;
    }
    let model = match models.iter().find(|m| m.name == from) {
        Some(m) => m,
        None => return false,
    };
    model.call_stmts().any(|(_, callee)| reaches(models, callee, to))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse::parse_program;

    fn check(src: &str) -> Result<ValidatedProgram, ValidateError> {
        validate(parse_program(src).unwrap())
    }

    const FIG2: &str = "def majority():\n  theta = uniform(0, 1)\n  X = bernoulli(theta)\n  return (theta, X)\n\ndef demographic_parity():\n  [theta,X] = majority()\n  phi = uniform(0.8 * theta, 1)\n  Y = bernoulli(phi)\n  return (theta, X, phi, Y)\n";

    #[test]
    fn fig2_valid_with_call_edge() {
        let vp = check(FIG2).unwrap();
        assert_eq!(
            vp.call_edges,
            vec![("demographic_parity".to_string(), "majority".to_string())]
        );
        assert_eq!(vp.output_arity["majority"], 2);
        assert_eq!(
            vp.output_types["majority"],
            vec![Ty::Real, Ty::Int]
        );
    }

    #[test]
    fn self_call_is_cyclic() {
        let err = check("def f():\n  [x] = f()\n  return (x)\n").unwrap_err();
        assert!(matches!(err, ValidateError::CyclicCall { .. }), "{err:?}");
    }

    #[test]
    fn mutual_forward_cycle_is_cyclic() {
        let src = "def f():\n  [x] = g()\n  return (x)\ndef g():\n  [y] = f()\n  return (y)\n";
        let err = check(src).unwrap_err();
        assert!(matches!(err, ValidateError::CyclicCall { .. }), "{err:?}");
    }

    #[test]
    fn arity_mismatch_on_destructuring() {
        let src = "def majority():\n  theta = uniform(0, 1)\n  X = bernoulli(theta)\n  return (theta, X)\ndef g():\n  [a] = majority()\n  return (a)\n";
        let err = check(src).unwrap_err();
        match err {
            ValidateError::ArityMismatch { expected, found, .. } => {
                assert_eq!(expected, 2);
                assert_eq!(found, 1);
            }
            other => panic!("expected arity mismatch, got {other:?}"),
        }
    }

    #[test]
    fn use_before_def_and_reassignment() {
        assert!(matches!(
            check("def f():\n  x = y + 1\n  return (x)\n"),
            Err(ValidateError::UseBeforeDef { .. })
        ));
        assert!(matches!(
            check("def f():\n  x = bernoulli(0.5)\n  x = bernoulli(0.5)\n  return (x)\n"),
            Err(ValidateError::Reassignment { .. })
        ));
    }

    #[test]
    fn division_guard() {
        assert!(matches!(
            check("def f():\n  x = uniform(0, 1)\n  y = 1 / x\n  return (y)\n"),
            Err(ValidateError::PossiblyZeroDivisor { .. })
        ));
        // Constant nonzero divisor is fine.
        assert!(check("def f():\n  x = uniform(0, 1)\n  y = x / 4\n  return (y)\n").is_ok());
    }

    #[test]
    fn constant_parameter_ranges() {
        assert!(matches!(
            check("def f():\n  x = bernoulli(3/2)\n  return (x)\n"),
            Err(ValidateError::BadParameter { .. })
        ));
        assert!(matches!(
            check("def f():\n  x = uniform(1, 1)\n  return (x)\n"),
            Err(ValidateError::BadParameter { .. })
        ));
        assert!(matches!(
            check("def f():\n  x = normal(0, 0)\n  return (x)\n"),
            Err(ValidateError::BadParameter { .. })
        ));
    }

    #[test]
    fn return_shape_rules() {
        assert!(matches!(
            check("def f():\n  x = bernoulli(0.5)\n  return (x)\n  y = bernoulli(0.5)\n"),
            Err(ValidateError::StatementsAfterReturn { .. })
        ));
        assert!(matches!(
            check("def f():\n  x = bernoulli(0.5)\n"),
            Err(ValidateError::MissingReturn { .. })
        ));
        assert!(matches!(
            check("def f():\n  x = bernoulli(0.5)\n  return (z)\n"),
            Err(ValidateError::ReturnUndefined { .. })
        ));
    }

    #[test]
    fn dist_param_arity() {
        assert!(matches!(
            check("def f():\n  x = uniform(1)\n  return (x)\n"),
            Err(ValidateError::DistArity { .. })
        ));
    }

    #[test]
    fn validate_total_on_parser_output() {
        // Either accepts or reports a specific error; never panics.
        for src in [
            "def f():\n  x = bernoulli(1/2)\n  return (x)\n",
            "def f():\n  x = 1 if 2 < 1 else 3\n  return (x)\n",
            "def f():\n  return (f)\n",
        ] {
            let _ = check(src);
        }
    }
}
