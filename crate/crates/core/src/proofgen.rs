//! Compositional measurability certificates.
//!
//! A certificate is a tree homomorphic to the (fully inlined) expression it
//! certifies: leaves name whitelisted measurable primitives, interior nodes
//! are closure steps (composition, pairing). `derive_cert` builds one,
//! `check_cert` independently validates one against a function, and
//! `emit_cert_lemma` renders the tree as a tactic-script lemma skeleton.

use crate::frontend::ast::{BinOp, CmpOp, Side};
use crate::dist::DistKind;
use crate::reparam::{inline_bindings, PureExpr, PureFn, ResultTree};
use crate::value::display_rat;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertError {
    #[error("primitive `{0}` is not in the measurable whitelist")]
    UnwhitelistedPrimitive(String),
    #[error("unbound variable `{0}` in expression")]
    UnboundVariable(String),
}

/// Where a certificate check failed and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertMismatch {
    pub path: String,
    pub reason: String,
}

/// Measurability certificate tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasCert {
    /// A whitelisted measurable primitive, possibly parameter-curried
    /// (e.g. `gen_uniform(0,1)`).
    Prim(String),
    /// Outer-after-inner composition.
    Comp(Box<MeasCert>, Box<MeasCert>),
    /// Pairing of two measurable components.
    Pair(Box<MeasCert>, Box<MeasCert>),
    Proj(Side),
    Const,
}

impl MeasCert {
    fn comp(outer: MeasCert, inner: MeasCert) -> MeasCert {
        MeasCert::Comp(Box::new(outer), Box::new(inner))
    }

    fn pair(l: MeasCert, r: MeasCert) -> MeasCert {
        MeasCert::Pair(Box::new(l), Box::new(r))
    }
}

const WHITELIST: &[&str] = &[
    "gen_uniform",
    "gen_bernoulli",
    "gen_normal",
    "add",
    "sub",
    "mul",
    "div",
    "eq",
    "ne",
    "lt",
    "le",
    "ite",
    "id",
];

/// Whitelist membership; parameter-curried names match on the base.
pub fn is_whitelisted(name: &str) -> bool {
    let base = name.split('(').next().unwrap_or(name);
    WHITELIST.contains(&base)
}

fn bin_name(op: &BinOp) -> &'static str {
    match op {
        BinOp::Add => "add",
        BinOp::Sub => "sub",
        BinOp::Mul => "mul",
        BinOp::Div => "div",
    }
}

fn cmp_name(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "eq",
        CmpOp::Ne => "ne",
        CmpOp::Lt => "lt",
        CmpOp::Le => "le",
    }
}

/// Right-nested pairing certificate over argument certificates.
fn pair_tree(mut certs: Vec<MeasCert>) -> MeasCert {
    let last = certs.pop().expect("nonempty argument list");
    certs
        .into_iter()
        .rev()
        .fold(last, |acc, c| MeasCert::pair(c, acc))
}

fn curried_gen_name(kind: DistKind, params: &[PureExpr]) -> Option<String> {
    let consts: Option<Vec<String>> = params
        .iter()
        .map(|p| match p {
            PureExpr::Const(r) => Some(display_rat(r)),
            _ => None,
        })
        .collect();
    consts.map(|cs| format!("{}({})", kind.gen_name(), cs.join(",")))
}

/// Certificate for a fully inlined expression (a slice).
pub fn derive_cert_expr(expr: &PureExpr) -> Result<MeasCert, CertError> {
    match expr {
        PureExpr::Const(_) => Ok(MeasCert::Const),
        PureExpr::Input => Ok(MeasCert::Prim("id".into())),
        PureExpr::Var(v) => Err(CertError::UnboundVariable(v.clone())),
        PureExpr::Proj(base, side) => match base.as_ref() {
            PureExpr::Input => Ok(MeasCert::Proj(*side)),
            inner => Ok(MeasCert::comp(MeasCert::Proj(*side), derive_cert_expr(inner)?)),
        },
        PureExpr::Gen(kind, args) => {
            let (u, params) = args.split_last().expect("generator arity");
            match curried_gen_name(*kind, params) {
                Some(name) => Ok(MeasCert::comp(MeasCert::Prim(name), derive_cert_expr(u)?)),
                None => {
                    let certs: Vec<MeasCert> = args
                        .iter()
                        .map(derive_cert_expr)
                        .collect::<Result<_, _>>()?;
                    Ok(MeasCert::comp(
                        MeasCert::Prim(kind.gen_name().into()),
                        pair_tree(certs),
                    ))
                }
            }
        }
        PureExpr::Bin(op, l, r) => Ok(MeasCert::comp(
            MeasCert::Prim(bin_name(op).into()),
            MeasCert::pair(derive_cert_expr(l)?, derive_cert_expr(r)?),
        )),
        PureExpr::Cmp(op, l, r) => Ok(MeasCert::comp(
            MeasCert::Prim(cmp_name(*op).into()),
            MeasCert::pair(derive_cert_expr(l)?, derive_cert_expr(r)?),
        )),
        PureExpr::If { cond, then, els } => Ok(MeasCert::comp(
            MeasCert::Prim("ite".into()),
            MeasCert::pair(
                derive_cert_expr(cond)?,
                MeasCert::pair(derive_cert_expr(then)?, derive_cert_expr(els)?),
            ),
        )),
        PureExpr::Call(name, _) => Err(CertError::UnwhitelistedPrimitive(name.clone())),
    }
}

/// Certificate for a whole translated function: pairing over the result
/// tuple of the per-component certificates.
pub fn derive_cert(func: &PureFn) -> Result<MeasCert, CertError> {
    let inlined = inline_bindings(func);
    fn go(
        tree: &ResultTree,
        inlined: &HashMap<String, PureExpr>,
    ) -> Result<MeasCert, CertError> {
        match tree {
            ResultTree::Leaf(name) => {
                let expr = inlined
                    .get(name)
                    .ok_or_else(|| CertError::UnboundVariable(name.clone()))?;
                derive_cert_expr(expr)
            }
            ResultTree::Node(a, b) => Ok(MeasCert::pair(go(a, inlined)?, go(b, inlined)?)),
        }
    }
    go(&func.result, &inlined)
}

fn mismatch(path: &str, reason: impl Into<String>) -> CertMismatch {
    CertMismatch {
        path: path.to_string(),
        reason: reason.into(),
    }
}

fn check_expr(cert: &MeasCert, expr: &PureExpr, path: &str) -> Result<(), CertMismatch> {
    match (cert, expr) {
        (MeasCert::Const, PureExpr::Const(_)) => Ok(()),
        (MeasCert::Prim(name), PureExpr::Input) if name == "id" => Ok(()),
        (MeasCert::Proj(side), PureExpr::Proj(base, s)) => {
            if side != s {
                return Err(mismatch(path, "projection side differs"));
            }
            match base.as_ref() {
                PureExpr::Input => Ok(()),
                _ => Err(mismatch(path, "bare projection over a non-input base")),
            }
        }
        (MeasCert::Comp(outer, inner), PureExpr::Proj(base, s)) => {
            match outer.as_ref() {
                MeasCert::Proj(side) if side == s => {}
                _ => return Err(mismatch(path, "expected a projection certificate")),
            }
            check_expr(inner, base, &format!("{path}.inner"))
        }
        (MeasCert::Comp(outer, inner), PureExpr::Gen(kind, args)) => {
            let (u, params) = args.split_last().expect("generator arity");
            let prim = match outer.as_ref() {
                MeasCert::Prim(name) => name,
                _ => return Err(mismatch(path, "generator requires a primitive head")),
            };
            if !is_whitelisted(prim) {
                return Err(mismatch(path, format!("`{prim}` not whitelisted")));
            }
            match curried_gen_name(*kind, params) {
                Some(expected) if *prim == expected => {
                    check_expr(inner, u, &format!("{path}.inner"))
                }
                _ if *prim == kind.gen_name() => {
                    check_args(inner, args, &format!("{path}.inner"))
                }
                _ => Err(mismatch(
                    path,
                    format!("primitive `{prim}` does not match `{}`", kind.gen_name()),
                )),
            }
        }
        (MeasCert::Comp(outer, inner), PureExpr::Bin(op, l, r)) => {
            expect_prim(outer, bin_name(op), path)?;
            check_pair2(inner, l, r, path)
        }
        (MeasCert::Comp(outer, inner), PureExpr::Cmp(op, l, r)) => {
            expect_prim(outer, cmp_name(*op), path)?;
            check_pair2(inner, l, r, path)
        }
        (MeasCert::Comp(outer, inner), PureExpr::If { cond, then, els }) => {
            expect_prim(outer, "ite", path)?;
            match inner.as_ref() {
                MeasCert::Pair(c, rest) => {
                    check_expr(c, cond, &format!("{path}.cond"))?;
                    match rest.as_ref() {
                        MeasCert::Pair(t, e) => {
                            check_expr(t, then, &format!("{path}.then"))?;
                            check_expr(e, els, &format!("{path}.else"))
                        }
                        _ => Err(mismatch(path, "conditional certificate shape")),
                    }
                }
                _ => Err(mismatch(path, "conditional certificate shape")),
            }
        }
        (_, PureExpr::Call(name, _)) => {
            Err(mismatch(path, format!("`{name}` not whitelisted")))
        }
        (_, PureExpr::Var(v)) => Err(mismatch(path, format!("unbound variable `{v}`"))),
        _ => Err(mismatch(path, "certificate shape does not match expression")),
    }
}

fn expect_prim(cert: &MeasCert, name: &str, path: &str) -> Result<(), CertMismatch> {
    match cert {
        MeasCert::Prim(p) if p == name => {
            if is_whitelisted(p) {
                Ok(())
            } else {
                Err(mismatch(path, format!("`{p}` not whitelisted")))
            }
        }
        MeasCert::Prim(p) => Err(mismatch(
            path,
            format!("primitive `{p}` where `{name}` expected"),
        )),
        _ => Err(mismatch(path, format!("missing primitive `{name}`"))),
    }
}

fn check_pair2(
    cert: &MeasCert,
    l: &PureExpr,
    r: &PureExpr,
    path: &str,
) -> Result<(), CertMismatch> {
    match cert {
        MeasCert::Pair(cl, cr) => {
            check_expr(cl, l, &format!("{path}.left"))?;
            check_expr(cr, r, &format!("{path}.right"))
        }
        _ => Err(mismatch(path, "expected a pairing certificate")),
    }
}

fn check_args(cert: &MeasCert, args: &[PureExpr], path: &str) -> Result<(), CertMismatch> {
    match args {
        [] => Err(mismatch(path, "empty argument list")),
        [last] => check_expr(cert, last, path),
        [first, rest @ ..] => match cert {
            MeasCert::Pair(cl, cr) => {
                check_expr(cl, first, &format!("{path}.left"))?;
                check_args(cr, rest, &format!("{path}.right"))
            }
            _ => Err(mismatch(path, "expected a pairing certificate")),
        },
    }
}

/// Validate a certificate against a whole function: the tree must be
/// homomorphic to the inlined result and every leaf whitelisted.
pub fn check_cert_report(cert: &MeasCert, func: &PureFn) -> Result<(), CertMismatch> {
    let inlined = inline_bindings(func);
    fn go(
        cert: &MeasCert,
        tree: &ResultTree,
        inlined: &HashMap<String, PureExpr>,
        path: &str,
    ) -> Result<(), CertMismatch> {
        match tree {
            ResultTree::Leaf(name) => {
                let expr = inlined
                    .get(name)
                    .ok_or_else(|| mismatch(path, format!("unbound `{name}`")))?;
                check_expr(cert, expr, path)
            }
            ResultTree::Node(a, b) => match cert {
                MeasCert::Pair(cl, cr) => {
                    go(cl, a, inlined, &format!("{path}.fst"))?;
                    go(cr, b, inlined, &format!("{path}.snd"))
                }
                _ => Err(mismatch(path, "result tuple requires a pairing certificate")),
            },
        }
    }
    go(cert, &func.result, &inlined, "result")
}

pub fn check_cert(cert: &MeasCert, func: &PureFn) -> bool {
    check_cert_report(cert, func).is_ok()
}

/// Validate a certificate against a fully inlined slice expression.
pub fn check_cert_expr(cert: &MeasCert, expr: &PureExpr) -> bool {
    check_expr(cert, expr, "slice").is_ok()
}

fn lemma_name_of_prim(name: &str) -> String {
    let base = name.split('(').next().unwrap_or(name);
    format!("measurable_{base}")
}

fn render_tactics(cert: &MeasCert, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match cert {
        MeasCert::Prim(name) => {
            out.push_str(&format!("{pad}exact {}", lemma_name_of_prim(name)));
        }
        MeasCert::Proj(Side::First) => out.push_str(&format!("{pad}exact measurable_fst")),
        MeasCert::Proj(Side::Second) => out.push_str(&format!("{pad}exact measurable_snd")),
        MeasCert::Const => out.push_str(&format!("{pad}exact measurable_const")),
        MeasCert::Comp(outer, inner) => {
            out.push_str(&format!("{pad}apply measurable.comp,\n"));
            out.push_str(&format!("{pad}{{ "));
            render_block(outer, indent, out);
            out.push_str(" },\n");
            out.push_str(&format!("{pad}{{ "));
            render_block(inner, indent, out);
            out.push_str(" }");
        }
        MeasCert::Pair(l, r) => {
            out.push_str(&format!("{pad}apply measurable.prod,\n"));
            out.push_str(&format!("{pad}{{ "));
            render_block(l, indent, out);
            out.push_str(" },\n");
            out.push_str(&format!("{pad}{{ "));
            render_block(r, indent, out);
            out.push_str(" }");
        }
    }
}

fn render_block(cert: &MeasCert, indent: usize, out: &mut String) {
    let mut inner = String::new();
    render_tactics(cert, indent + 1, &mut inner);
    out.push_str(inner.trim_start());
}

/// Render a certificate as a Lean-style tactic-script lemma skeleton.
pub fn emit_cert_lemma(cert: &MeasCert, fn_name: &str) -> String {
    let mut body = String::new();
    render_tactics(cert, 1, &mut body);
    format!("lemma {fn_name}_measurable : measurable {fn_name} :=\nbegin\n{body},\nend\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile;
    use crate::reparam::slice;
    use crate::reparam::tests::{FIG1_SRC, FIG2_SRC};
    use crate::value::rat_int;

    #[test]
    fn single_composition_certificate() {
        // gen_uniform(0,1,u1) alone: the curried primitive composed with
        // the first projection.
        let expr = PureExpr::Gen(
            DistKind::Uniform,
            vec![
                PureExpr::Const(rat_int(0)),
                PureExpr::Const(rat_int(1)),
                PureExpr::Input.proj(Side::First),
            ],
        );
        let cert = derive_cert_expr(&expr).unwrap();
        assert_eq!(
            cert,
            MeasCert::comp(
                MeasCert::Prim("gen_uniform(0,1)".into()),
                MeasCert::Proj(Side::First)
            )
        );
        assert!(check_cert_expr(&cert, &expr));
    }

    #[test]
    fn majority_certificate_is_pair_of_slice_certificates() {
        let cp = compile(FIG1_SRC).unwrap();
        let entry = cp.table.get("majority").unwrap();
        let cert = derive_cert(&entry.pure_fn).unwrap();
        let theta = slice(&cp.program.models[0], "theta", &cp.table).unwrap();
        let x = slice(&cp.program.models[0], "X", &cp.table).unwrap();
        assert_eq!(
            cert,
            MeasCert::pair(
                derive_cert_expr(&theta.expr).unwrap(),
                derive_cert_expr(&x.expr).unwrap()
            )
        );
        assert!(check_cert(&cert, &entry.pure_fn));
    }

    #[test]
    fn round_trip_on_both_figures() {
        for src in [FIG1_SRC, FIG2_SRC] {
            let cp = compile(src).unwrap();
            for entry in cp.table.iter() {
                let cert = derive_cert(&entry.pure_fn).unwrap();
                assert!(check_cert(&cert, &entry.pure_fn), "model {}", entry.name);
                assert_eq!(cert, derive_cert(&entry.pure_fn).unwrap());
            }
        }
    }

    #[test]
    fn cross_model_certificate_rejected_with_path() {
        let cp = compile(FIG2_SRC).unwrap();
        let majority = cp.table.get("majority").unwrap();
        let dp = cp.table.get("demographic_parity").unwrap();
        let cert = derive_cert(&majority.pure_fn).unwrap();
        let err = check_cert_report(&cert, &dp.pure_fn).unwrap_err();
        assert!(err.path.starts_with("result"), "path: {}", err.path);
    }

    #[test]
    fn unwhitelisted_primitive_rejected() {
        let expr = PureExpr::Call("floor".into(), vec![PureExpr::Input]);
        assert_eq!(
            derive_cert_expr(&expr),
            Err(CertError::UnwhitelistedPrimitive("floor".into()))
        );
        // Inside a larger function too.
        let cp = compile(FIG1_SRC).unwrap();
        let mut func = cp.table.get("majority").unwrap().pure_fn.clone();
        func.bindings[2].1 = PureExpr::Call("floor".into(), vec![func.bindings[2].1.clone()]);
        assert!(matches!(
            derive_cert(&func),
            Err(CertError::UnwhitelistedPrimitive(_))
        ));
    }

    #[test]
    fn mutated_leaf_rejected() {
        let cp = compile(FIG1_SRC).unwrap();
        let entry = cp.table.get("majority").unwrap();
        let cert = derive_cert(&entry.pure_fn).unwrap();
        fn rename_first_prim(c: &MeasCert) -> MeasCert {
            match c {
                MeasCert::Prim(_) => MeasCert::Prim("floor".into()),
                MeasCert::Comp(a, b) => MeasCert::comp(rename_first_prim(a), b.as_ref().clone()),
                MeasCert::Pair(a, b) => MeasCert::pair(rename_first_prim(a), b.as_ref().clone()),
                other => other.clone(),
            }
        }
        let mutated = rename_first_prim(&cert);
        assert!(!check_cert(&mutated, &entry.pure_fn));
    }

    #[test]
    fn constant_certificate() {
        let cp = compile("def k():\n  c = 3\n  return (c)\n").unwrap();
        let entry = cp.table.get("k").unwrap();
        let cert = derive_cert(&entry.pure_fn).unwrap();
        assert_eq!(cert, MeasCert::Const);
        let lemma = emit_cert_lemma(&cert, "k_fun");
        assert!(lemma.contains("measurable_const"), "{lemma}");
    }

    #[test]
    fn lemma_names_expected_primitives() {
        let cp = compile(FIG1_SRC).unwrap();
        let entry = cp.table.get("majority").unwrap();
        let cert = derive_cert(&entry.pure_fn).unwrap();
        let lemma = emit_cert_lemma(&cert, "majority_fun");
        for needle in [
            "lemma majority_fun_measurable : measurable majority_fun :=",
            "measurable_gen_uniform",
            "measurable_gen_bernoulli",
            "measurable.comp",
            "measurable.prod",
            "measurable_fst",
        ] {
            assert!(lemma.contains(needle), "missing `{needle}` in:\n{lemma}");
        }
    }

    #[test]
    fn slices_certify_for_every_return_variable() {
        let cp = compile(FIG2_SRC).unwrap();
        for model in &cp.program.models {
            for var in model.return_vars() {
                let s = slice(model, var, &cp.table).unwrap();
                let cert = derive_cert_expr(&s.expr).unwrap();
                assert!(check_cert_expr(&cert, &s.expr), "{}/{var}", model.name);
            }
        }
    }
}
