use super::cse::cse;
use super::*;
use crate::frontend::ast::{Ty, TyTree};
use crate::frontend::{parse_program, validate};
use crate::value::{rat, rat_int};

pub(crate) const FIG1_SRC: &str = "\
def majority():
  theta = uniform(0, 1)
  X = bernoulli(theta)
  return (theta, X)
";

pub(crate) const FIG2_SRC: &str = "\
def majority():
  theta = uniform(0, 1)
  X = bernoulli(theta)
  return (theta, X)

def demographic_parity():
  [theta,X] = majority()
  phi = uniform(0.8 * theta, 1)
  Y = bernoulli(phi)
  return (theta, X, phi, Y)
";

fn build(src: &str) -> (Vec<Model>, TranslationTable) {
    let vp = validate(parse_program(src).unwrap()).unwrap();
    let table = translate_program(&vp.models).unwrap();
    (vp.models, table)
}

fn var(name: &str) -> PureExpr {
    PureExpr::Var(name.into())
}

fn c(n: i64) -> PureExpr {
    PureExpr::Const(rat_int(n))
}

#[test]
fn count_uniforms_examples() {
    let (models, table) = build(FIG2_SRC);
    assert_eq!(count_uniforms(&models[0], &table).unwrap(), 2);
    // Two fresh uniforms; the hoisted call contributes a model leaf.
    assert_eq!(count_uniforms(&models[1], &table).unwrap(), 2);
    let entry = table.get("demographic_parity").unwrap();
    assert_eq!(entry.shape.model_leaves(), vec!["majority"]);

    let (models, table) = build("def k():\n  c = 3\n  return (c)\n");
    assert_eq!(count_uniforms(&models[0], &table).unwrap(), 0);
}

#[test]
fn missing_callee_reported() {
    let models = parse_program(FIG2_SRC).unwrap();
    let empty = TranslationTable::new();
    assert!(matches!(
        count_uniforms(&models[1], &empty),
        Err(TranslateError::MissingCallee { .. })
    ));
}

#[test]
fn thread_inputs_majority_matches_reference_body() {
    let (models, table) = build(FIG1_SRC);
    let threaded = thread_inputs(&models[0], &table).unwrap();
    assert_eq!(threaded.shape, InputShape::node(InputShape::Uniform, InputShape::Uniform));
    let expected = vec![
        ("u1".to_string(), PureExpr::Input.proj(Side::First)),
        ("u2".to_string(), PureExpr::Input.proj(Side::Second)),
        (
            "theta".to_string(),
            PureExpr::Gen(DistKind::Uniform, vec![c(0), c(1), var("u1")]),
        ),
        (
            "X".to_string(),
            PureExpr::Gen(DistKind::Bernoulli, vec![var("theta"), var("u2")]),
        ),
    ];
    assert_eq!(threaded.bindings, expected);
    assert_eq!(
        threaded.result,
        ResultTree::node(ResultTree::Leaf("theta".into()), ResultTree::Leaf("X".into()))
    );
}

#[test]
fn thread_inputs_demographic_parity_matches_reference_body() {
    let (models, table) = build(FIG2_SRC);
    let threaded = thread_inputs(&models[1], &table).unwrap();
    let fstfst = PureExpr::Input.proj(Side::First).proj(Side::First);
    let fstsnd = PureExpr::Input.proj(Side::First).proj(Side::Second);
    let sndfst = PureExpr::Input.proj(Side::Second).proj(Side::First);
    let sndsnd = PureExpr::Input.proj(Side::Second).proj(Side::Second);
    let expected = vec![
        ("theta".to_string(), fstfst),
        ("X".to_string(), fstsnd),
        ("u3".to_string(), sndfst),
        ("u4".to_string(), sndsnd),
        (
            "phi".to_string(),
            PureExpr::Gen(
                DistKind::Uniform,
                vec![
                    PureExpr::Bin(
                        BinOp::Mul,
                        Box::new(PureExpr::Const(rat(4, 5))),
                        Box::new(var("theta")),
                    ),
                    c(1),
                    var("u3"),
                ],
            ),
        ),
        (
            "Y".to_string(),
            PureExpr::Gen(DistKind::Bernoulli, vec![var("phi"), var("u4")]),
        ),
    ];
    assert_eq!(threaded.bindings, expected);
    assert_eq!(
        threaded.result,
        ResultTree::node(
            ResultTree::node(
                ResultTree::Leaf("theta".into()),
                ResultTree::Leaf("X".into())
            ),
            ResultTree::node(ResultTree::Leaf("phi".into()), ResultTree::Leaf("Y".into()))
        )
    );
    // Input shape: the hoisted model output paired with two uniforms.
    assert_eq!(
        threaded.shape,
        InputShape::node(
            InputShape::Model {
                name: "majority".into(),
                output: TyTree::Pair(
                    Box::new(TyTree::Scalar(Ty::Real)),
                    Box::new(TyTree::Scalar(Ty::Int))
                ),
            },
            InputShape::node(InputShape::Uniform, InputShape::Uniform)
        )
    );
}

#[test]
fn zero_sample_model_gets_unit_shape() {
    let (models, table) = build("def k():\n  c = 3\n  return (c)\n");
    let threaded = thread_inputs(&models[0], &table).unwrap();
    assert_eq!(threaded.shape, InputShape::Unit);
    assert_eq!(threaded.bindings, vec![("c".to_string(), c(3))]);
    assert_eq!(threaded.result, ResultTree::Leaf("c".into()));
}

#[test]
fn slice_majority_theta_and_x() {
    let (models, table) = build(FIG1_SRC);
    let theta = slice(&models[0], "theta", &table).unwrap();
    assert_eq!(
        theta.expr,
        PureExpr::Gen(
            DistKind::Uniform,
            vec![c(0), c(1), PureExpr::Input.proj(Side::First)]
        )
    );
    let x = slice(&models[0], "X", &table).unwrap();
    assert_eq!(
        x.expr,
        PureExpr::Gen(
            DistKind::Bernoulli,
            vec![
                PureExpr::Gen(
                    DistKind::Uniform,
                    vec![c(0), c(1), PureExpr::Input.proj(Side::First)]
                ),
                PureExpr::Input.proj(Side::Second)
            ]
        )
    );
}

#[test]
fn slice_of_constant_let() {
    let (models, table) = build("def f():\n  y = 3\n  return (y)\n");
    let s = slice(&models[0], "y", &table).unwrap();
    assert_eq!(s.expr, c(3));
}

#[test]
fn slice_unknown_return_var() {
    let (models, table) = build(FIG1_SRC);
    assert!(matches!(
        slice(&models[0], "nope", &table),
        Err(TranslateError::UnknownReturnVar { .. })
    ));
}

#[test]
fn cse_normalizes_thread_output_to_fixpoint() {
    for src in [FIG1_SRC, FIG2_SRC] {
        let (models, table) = build(src);
        for model in &models {
            let entry = table.get(&model.name).unwrap();
            assert_eq!(cse(&entry.pure_fn), entry.pure_fn, "cse not a fixpoint");
        }
    }
}

#[test]
fn translate_equals_normalized_thread_inputs() {
    let (models, table) = build(FIG2_SRC);
    for model in &models {
        let mut fresh = TranslationTable::new();
        for m in &models {
            if m.name == model.name {
                break;
            }
            translate(m, &mut fresh).unwrap();
        }
        let threaded = thread_inputs(model, &fresh).unwrap();
        assert_eq!(cse(&threaded), table.get(&model.name).unwrap().pure_fn);
        // The reference bodies are already in normal form.
        assert_eq!(cse(&threaded), threaded);
    }
}

#[test]
fn cse_binds_shared_generator_once() {
    // Recombining the slices and eliminating common subexpressions must
    // reproduce the single shared binding for the uniform draw.
    let (models, table) = build(FIG1_SRC);
    let theta = slice(&models[0], "theta", &table).unwrap();
    let x = slice(&models[0], "X", &table).unwrap();
    let assembled = PureFn {
        name: "majority_fun".into(),
        shape: table.get("majority").unwrap().shape.clone(),
        bindings: vec![("theta".into(), theta.expr), ("X".into(), x.expr)],
        result: ResultTree::node(
            ResultTree::Leaf("theta".into()),
            ResultTree::Leaf("X".into()),
        ),
    };
    let normalized = cse(&assembled);
    // One gen_uniform binding named theta, one gen_bernoulli named X.
    let gens: Vec<&(String, PureExpr)> = normalized
        .bindings
        .iter()
        .filter(|(_, e)| matches!(e, PureExpr::Gen(..)))
        .collect();
    assert_eq!(gens.len(), 2);
    assert_eq!(gens[0].0, "theta");
    assert_eq!(gens[1].0, "X");
    match &gens[1].1 {
        PureExpr::Gen(DistKind::Bernoulli, args) => {
            assert_eq!(args[0], var("theta"), "shared draw must be referenced by name");
        }
        other => panic!("unexpected {other:?}"),
    }
    // Idempotence on the normalized form.
    assert_eq!(cse(&normalized), normalized);
}

#[test]
fn cse_shares_unnamed_duplicate_across_two_results() {
    // (u1 + u1) duplicated across two slices collapses to a single binding
    // referenced twice.
    let u1 = PureExpr::Input.proj(Side::First);
    let dup = PureExpr::Bin(BinOp::Add, Box::new(u1.clone()), Box::new(u1.clone()));
    let f = PureFn {
        name: "f".into(),
        shape: InputShape::node(InputShape::Uniform, InputShape::Uniform),
        bindings: vec![
            (
                "r1".into(),
                PureExpr::Bin(BinOp::Add, Box::new(dup.clone()), Box::new(c(1))),
            ),
            (
                "r2".into(),
                PureExpr::Bin(BinOp::Mul, Box::new(dup.clone()), Box::new(c(2))),
            ),
        ],
        result: ResultTree::node(ResultTree::Leaf("r1".into()), ResultTree::Leaf("r2".into())),
    };
    let out = cse(&f);
    // One prelude chain binding, one shared add, then r1 and r2.
    assert_eq!(out.bindings.len(), 4, "bindings: {:?}", out.bindings);
    let shared_name = out.bindings[1].0.clone();
    fn mentions(e: &PureExpr, name: &str) -> bool {
        match e {
            PureExpr::Var(v) => v == name,
            PureExpr::Bin(_, l, r) | PureExpr::Cmp(_, l, r) => {
                mentions(l, name) || mentions(r, name)
            }
            PureExpr::Proj(b, _) => mentions(b, name),
            PureExpr::Gen(_, args) | PureExpr::Call(_, args) => {
                args.iter().any(|a| mentions(a, name))
            }
            PureExpr::If { cond, then, els } => {
                mentions(cond, name) || mentions(then, name) || mentions(els, name)
            }
            _ => false,
        }
    }
    let refs = out
        .bindings
        .iter()
        .filter(|(_, e)| mentions(e, &shared_name))
        .count();
    assert_eq!(refs, 2, "shared binding must be referenced twice: {out:?}");
}

#[test]
fn hoist_removes_calls_and_orders_leaves() {
    let (models, table) = build(FIG2_SRC);
    let (residual, hoisted) = hoist_calls(&models[1], &table).unwrap();
    assert_eq!(hoisted.len(), 1);
    assert_eq!(hoisted[0].callee, "majority");
    assert_eq!(hoisted[0].vars, vec!["theta".to_string(), "X".to_string()]);
    assert!(residual.call_stmts().next().is_none());
    assert_eq!(residual.stmts.len(), 3); // phi, Y, return

    // No calls: unchanged.
    let (m1, table1) = build(FIG1_SRC);
    let (residual, hoisted) = hoist_calls(&m1[0], &table1).unwrap();
    assert!(hoisted.is_empty());
    assert_eq!(residual, m1[0]);
}

#[test]
fn repeated_calls_make_independent_leaves() {
    let src = "\
def fair():
  a = bernoulli(1/2)
  return (a)

def twice():
  [a] = fair()
  [b] = fair()
  c = bernoulli(1/2)
  return (a, b, c)
";
    let (_, table) = build(src);
    let entry = table.get("twice").unwrap();
    assert_eq!(entry.shape.model_leaves(), vec!["fair", "fair"]);
    assert_eq!(entry.shape.uniform_leaf_count(), 1);
    // Fresh uniform numbering starts after both callees' demand.
    assert!(entry
        .pure_fn
        .bindings
        .iter()
        .any(|(name, _)| name == "u3"));
}

#[test]
fn translate_records_measure_and_weight() {
    let (_, table) = build(FIG2_SRC);
    let majority = table.get("majority").unwrap();
    assert_eq!(
        majority.measure,
        MeasureExpr::Pushforward(
            "majority_fun".into(),
            Box::new(MeasureExpr::Prod(
                Box::new(MeasureExpr::Uniform01),
                Box::new(MeasureExpr::Uniform01)
            ))
        )
    );
    assert_eq!(majority.uniform_weight, 2);
    let dp = table.get("demographic_parity").unwrap();
    assert_eq!(
        dp.measure,
        MeasureExpr::Pushforward(
            "demographic_parity_fun".into(),
            Box::new(MeasureExpr::Prod(
                Box::new(MeasureExpr::Model("majority".into())),
                Box::new(MeasureExpr::Prod(
                    Box::new(MeasureExpr::Uniform01),
                    Box::new(MeasureExpr::Uniform01)
                ))
            ))
        )
    );
    assert_eq!(dp.uniform_weight, 4);
}

#[test]
fn empty_program_rejected() {
    assert!(matches!(
        translate_program(&[]),
        Err(TranslateError::EmptyProgram)
    ));
}

#[test]
fn translation_is_deterministic() {
    let (models, _) = build(FIG2_SRC);
    let t1 = translate_program(&models).unwrap();
    let t2 = translate_program(&models).unwrap();
    for e in t1.iter() {
        assert_eq!(e.pure_fn, t2.get(&e.name).unwrap().pure_fn);
    }
}

#[test]
fn shape_accounting_holds_on_reference_models() {
    let (models, table) = build(FIG2_SRC);
    for model in &models {
        let entry = table.get(&model.name).unwrap();
        assert_eq!(
            entry.shape.uniform_leaf_count(),
            count_uniforms(model, &table).unwrap()
        );
        verify_pure_fn(&entry.pure_fn).unwrap();
    }
}
