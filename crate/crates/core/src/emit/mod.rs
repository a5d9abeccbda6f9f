//! Render translated models as Lean-style definitions: the pure function,
//! the pushforward measure definition, and the measurability lemma
//! skeletons.

pub mod alpha;

use crate::frontend::ast::{BinOp, CmpOp};
use crate::proofgen::{derive_cert, emit_cert_lemma, CertError};
use crate::reparam::{MeasureExpr, PureExpr, ResultTree, TableEntry, TranslationTable};
use crate::value::{display_rat, display_rat_decimal, Rat};
use num_traits::Signed;

pub use alpha::{alpha_equiv, AlphaError};

#[derive(Debug, Clone)]
pub struct EmitConfig {
    /// Prefix prepended to every emitted definition name.
    pub prefix: String,
    pub indent: usize,
    pub emit_certs: bool,
    /// Render rational constants as decimals where they terminate
    /// (`0.8`) instead of fraction literals (`4/5`).
    pub decimal_constants: bool,
}

impl Default for EmitConfig {
    fn default() -> Self {
        EmitConfig {
            prefix: String::new(),
            indent: 2,
            emit_certs: true,
            decimal_constants: false,
        }
    }
}

impl EmitConfig {
    fn valid_prefix(&self) -> bool {
        self.prefix
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
    }
}

fn render_const(r: &Rat, cfg: &EmitConfig, min_level: u8) -> String {
    let body = if cfg.decimal_constants {
        display_rat_decimal(r).unwrap_or_else(|| display_rat(r))
    } else {
        display_rat(r)
    };
    // Fraction literals and negative numbers read at multiplicative level.
    let tight = !body.contains('/') && !r.is_negative();
    if tight || min_level <= 3 {
        body
    } else {
        format!("({body})")
    }
}

fn expr_level(e: &PureExpr) -> u8 {
    match e {
        PureExpr::If { .. } => 0,
        PureExpr::Cmp(..) => 1,
        PureExpr::Bin(BinOp::Add | BinOp::Sub, ..) => 2,
        PureExpr::Bin(BinOp::Mul | BinOp::Div, ..) => 3,
        _ => 4,
    }
}

fn cmp_symbol(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "=",
        CmpOp::Ne => "!=",
        CmpOp::Lt => "<",
        CmpOp::Le => "<=",
    }
}

fn render_expr(e: &PureExpr, cfg: &EmitConfig, min_level: u8, out: &mut String) {
    if let PureExpr::Const(r) = e {
        out.push_str(&render_const(r, cfg, min_level));
        return;
    }
    let level = expr_level(e);
    let parens = level < min_level;
    if parens {
        out.push('(');
    }
    match e {
        PureExpr::Const(_) => unreachable!(),
        PureExpr::Var(v) => out.push_str(v),
        PureExpr::Input => out.push('u'),
        PureExpr::Proj(base, side) => {
            render_expr(base, cfg, 4, out);
            out.push('.');
            out.push_str(side.suffix());
        }
        PureExpr::Gen(kind, args) => {
            out.push_str(kind.gen_name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                render_expr(a, cfg, 0, out);
            }
            out.push(')');
        }
        PureExpr::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                render_expr(a, cfg, 0, out);
            }
            out.push(')');
        }
        PureExpr::Bin(op, l, r) => {
            let (ll, rl) = match op {
                BinOp::Add | BinOp::Sub => (2, 3),
                BinOp::Mul | BinOp::Div => (3, 4),
            };
            render_expr(l, cfg, ll, out);
            out.push_str(&format!(" {} ", op.symbol()));
            render_expr(r, cfg, rl, out);
        }
        PureExpr::Cmp(op, l, r) => {
            render_expr(l, cfg, 2, out);
            out.push_str(&format!(" {} ", cmp_symbol(*op)));
            render_expr(r, cfg, 2, out);
        }
        PureExpr::If { cond, then, els } => {
            out.push_str("if ");
            render_expr(cond, cfg, 1, out);
            out.push_str(" then ");
            render_expr(then, cfg, 1, out);
            out.push_str(" else ");
            render_expr(els, cfg, 0, out);
        }
    }
    if parens {
        out.push(')');
    }
}

fn render_result(tree: &ResultTree, out: &mut String) {
    match tree {
        ResultTree::Leaf(name) => out.push_str(name),
        ResultTree::Node(a, b) => {
            out.push('(');
            render_result(a, out);
            out.push(',');
            render_result(b, out);
            out.push(')');
        }
    }
}

fn render_measure(m: &MeasureExpr, cfg: &EmitConfig) -> String {
    match m {
        MeasureExpr::Unit => "unit_measure".into(),
        MeasureExpr::Uniform01 => "uniform(0,1)".into(),
        MeasureExpr::Model(name) => format!("{}{name}", cfg.prefix),
        MeasureExpr::Prod(a, b) => {
            if **a == MeasureExpr::Uniform01 && **b == MeasureExpr::Uniform01 {
                "pair_uniform(0,1)".into()
            } else {
                let left = wrap_spaces(render_measure(a, cfg));
                let right = wrap_spaces(render_measure(b, cfg));
                format!("prod_measure {left} {right}")
            }
        }
        MeasureExpr::Pushforward(fn_name, inner) => {
            let m = wrap_spaces(render_measure(inner, cfg));
            format!("push_forward {}{fn_name} {m}", cfg.prefix)
        }
    }
}

fn wrap_spaces(s: String) -> String {
    if s.contains(' ') {
        format!("({s})")
    } else {
        s
    }
}

fn measure_wf_tactics(m: &MeasureExpr, cfg: &EmitConfig, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match m {
        MeasureExpr::Unit => out.push_str(&format!("{pad}exact unit_measure_probability")),
        MeasureExpr::Uniform01 => out.push_str(&format!("{pad}exact uniform_probability")),
        MeasureExpr::Model(name) => {
            out.push_str(&format!("{pad}exact {}{name}_measure_wf", cfg.prefix))
        }
        MeasureExpr::Prod(a, b) => {
            if **a == MeasureExpr::Uniform01 && **b == MeasureExpr::Uniform01 {
                out.push_str(&format!("{pad}exact pair_uniform_probability"));
            } else {
                out.push_str(&format!("{pad}apply prod_measure_probability,\n"));
                measure_wf_tactics(a, cfg, indent, out);
                out.push_str(",\n");
                measure_wf_tactics(b, cfg, indent, out);
            }
        }
        MeasureExpr::Pushforward(..) => unreachable!("input measures never push forward"),
    }
}

/// Render one translated model: the pure function definition, the measure
/// definition, and (unless disabled) the measurability lemma plus the
/// probability-measure lemma that cites callee lemmas by name.
pub fn emit_lean(entry: &TableEntry, cfg: &EmitConfig) -> Result<String, CertError> {
    assert!(cfg.valid_prefix(), "emit prefix must be an identifier");
    let pad = " ".repeat(cfg.indent);
    let fn_name = format!("{}{}", cfg.prefix, entry.pure_fn.name);
    let mut out = String::new();
    out.push_str(&format!("def {fn_name} u :=\n"));
    for (name, rhs) in &entry.pure_fn.bindings {
        let mut rendered = String::new();
        render_expr(rhs, cfg, 0, &mut rendered);
        out.push_str(&format!("{pad}let {name} := {rendered} in\n"));
    }
    let mut result = String::new();
    render_result(&entry.pure_fn.result, &mut result);
    if !result.starts_with('(') {
        result = format!("({result})");
    }
    out.push_str(&format!("{pad}{result}\n"));
    out.push('\n');
    out.push_str(&format!("def {}{} :=\n", cfg.prefix, entry.name));
    out.push_str(&format!("{pad}{}\n", render_measure(&entry.measure, cfg)));

    if cfg.emit_certs {
        let cert = derive_cert(&entry.pure_fn)?;
        out.push('\n');
        out.push_str(&emit_cert_lemma(&cert, &fn_name));
        out.push('\n');
        let input_measure = match &entry.measure {
            MeasureExpr::Pushforward(_, inner) => inner.as_ref().clone(),
            other => other.clone(),
        };
        out.push_str(&format!(
            "lemma {}{}_measure_wf : probability_measure {}{} :=\nbegin\n",
            cfg.prefix, entry.name, cfg.prefix, entry.name
        ));
        out.push_str(&format!(
            "  apply push_forward_probability {fn_name}_measurable,\n"
        ));
        let mut tactics = String::new();
        measure_wf_tactics(&input_measure, cfg, 2, &mut tactics);
        out.push_str(&tactics);
        out.push_str(",\nend\n");
    }
    Ok(out)
}

/// Render every translated model of a file in topological order.
pub fn emit_program(table: &TranslationTable, cfg: &EmitConfig) -> Result<String, CertError> {
    let mut parts = Vec::new();
    for entry in table.iter() {
        parts.push(emit_lean(entry, cfg)?);
    }
    Ok(parts.join("\n"))
}
