use super::*;
use crate::compile;
use crate::dist::DistKind;
use crate::frontend::ast::CmpOp;
use crate::reparam::tests::{FIG1_SRC, FIG2_SRC};
use crate::value::{rat, rat_int};

fn vf(x: f64) -> Value {
    Value::F64(x)
}

fn vr(n: i64, d: i64) -> Value {
    Value::Rat(rat(n, d))
}

#[test]
fn sampler_majority_hand_evaluation() {
    let cp = compile(FIG1_SRC).unwrap();
    let m = &cp.program.models[0];
    // gen_bernoulli(0.7, 0.2) = 1 since 0.2 < 0.7.
    let mut stream = vec![vf(0.7), vf(0.2)].into_iter();
    let out = run_sampler(m, &mut stream, &cp.program.models).unwrap();
    assert_eq!(out, Value::pair(vf(0.7), Value::Int(1)));
    // 0.9 >= 0.7 maps to 0.
    let mut stream = vec![vf(0.7), vf(0.9)].into_iter();
    let out = run_sampler(m, &mut stream, &cp.program.models).unwrap();
    assert_eq!(out, Value::pair(vf(0.7), Value::Int(0)));
}

#[test]
fn sampler_constant_model_needs_no_stream() {
    let cp = compile("def k():\n  c = 3\n  return (c)\n").unwrap();
    let mut stream = Vec::new().into_iter();
    let out = run_sampler(&cp.program.models[0], &mut stream, &cp.program.models).unwrap();
    assert_eq!(out, Value::Rat(rat_int(3)));
}

#[test]
fn sampler_stream_exhaustion() {
    let cp = compile(FIG1_SRC).unwrap();
    let mut stream = vec![vf(0.7)].into_iter();
    let err = run_sampler(&cp.program.models[0], &mut stream, &cp.program.models).unwrap_err();
    assert!(matches!(err, SemanticsError::StreamExhausted { .. }));
}

#[test]
fn eval_pure_majority_hand_evaluation() {
    let cp = compile(FIG1_SRC).unwrap();
    let f = &cp.table.get("majority").unwrap().pure_fn;
    let out = eval_pure(f, &Value::pair(vf(0.7), vf(0.2))).unwrap();
    assert_eq!(out, Value::pair(vf(0.7), Value::Int(1)));
}

#[test]
fn eval_pure_demographic_parity_hand_evaluation() {
    let cp = compile(FIG2_SRC).unwrap();
    let f = &cp.table.get("demographic_parity").unwrap().pure_fn;
    // theta = 1/2 so phi = gen_uniform(2/5, 1, 0) = 2/5, and
    // gen_bernoulli(2/5, 3/10) = 1.
    let input = Value::pair(
        Value::pair(vr(1, 2), Value::Int(1)),
        Value::pair(vr(0, 1), vr(3, 10)),
    );
    let out = eval_pure(f, &input).unwrap();
    assert_eq!(
        out,
        Value::pair(
            Value::pair(vr(1, 2), Value::Int(1)),
            Value::pair(vr(2, 5), Value::Int(1))
        )
    );
}

#[test]
fn eval_pure_rejects_nonconforming_input() {
    let cp = compile(FIG1_SRC).unwrap();
    let f = &cp.table.get("majority").unwrap().pure_fn;
    assert!(matches!(
        eval_pure(f, &vf(0.5)),
        Err(SemanticsError::ShapeMismatch(_))
    ));
    assert!(matches!(
        eval_pure(f, &Value::pair(vf(0.5), vf(1.5))),
        Err(SemanticsError::ShapeMismatch(_))
    ));
}

#[test]
fn identity_like_function_returns_its_input() {
    use crate::reparam::{InputShape, PureFn, ResultTree};
    let f = PureFn {
        name: "id_fun".into(),
        shape: InputShape::Uniform,
        bindings: vec![("v".into(), PureExpr::Input)],
        result: ResultTree::Leaf("v".into()),
    };
    assert_eq!(eval_pure(&f, &vf(0.25)).unwrap(), vf(0.25));
}

#[test]
fn coupling_holds_on_figure_models() {
    for src in [FIG1_SRC, FIG2_SRC] {
        let cp = compile(src).unwrap();
        for model in &cp.program.models {
            let entry = cp.table.get(&model.name).unwrap();
            for trial in 0..500u64 {
                for exact in [false, true] {
                    let mut rng = CounterRng::new(11, trial);
                    let drawn = sample_input(entry, &cp.table, &mut rng, exact).unwrap();
                    assert_eq!(drawn.stream.len(), entry.uniform_weight);
                    let pure = eval_pure(&entry.pure_fn, &drawn.vector).unwrap();
                    let mut stream = drawn.stream.clone().into_iter();
                    let sampled =
                        run_sampler(model, &mut stream, &cp.program.models).unwrap();
                    assert_eq!(pure, sampled, "model {} trial {trial}", model.name);
                    assert!(stream.next().is_none(), "stream fully consumed");
                }
            }
        }
    }
}

#[test]
fn giry_single_fair_coin() {
    let cp = compile("def coin():\n  x = bernoulli(1/2)\n  return (x)\n").unwrap();
    let m = giry_enumerate(&cp.program.models[0], &cp.program.models).unwrap();
    assert_eq!(
        m.entries(),
        &[
            (Value::Int(0), rat(1, 2)),
            (Value::Int(1), rat(1, 2)),
        ]
    );
}

#[test]
fn giry_two_coins_four_paths() {
    let src = "def two():\n  x = bernoulli(1/2)\n  y = bernoulli(3/4 if x == 1 else 1/4)\n  return (x, y)\n";
    let cp = compile(src).unwrap();
    let m = giry_enumerate(&cp.program.models[0], &cp.program.models).unwrap();
    let expect = [
        (Value::pair(Value::Int(0), Value::Int(0)), rat(3, 8)),
        (Value::pair(Value::Int(0), Value::Int(1)), rat(1, 8)),
        (Value::pair(Value::Int(1), Value::Int(0)), rat(1, 8)),
        (Value::pair(Value::Int(1), Value::Int(1)), rat(3, 8)),
    ];
    assert_eq!(m.entries(), &expect);
}

#[test]
fn giry_rejects_continuous_output() {
    let cp = compile(FIG1_SRC).unwrap();
    let err = giry_enumerate(&cp.program.models[0], &cp.program.models).unwrap_err();
    assert!(matches!(err, GiryError::NonFiniteSupport { .. }), "{err:?}");
}

#[test]
fn giry_skips_unused_continuous_draw() {
    let src = "def f():\n  w = uniform(0, 1)\n  x = bernoulli(1/3)\n  return (x)\n";
    let cp = compile(src).unwrap();
    let m = giry_enumerate(&cp.program.models[0], &cp.program.models).unwrap();
    assert_eq!(m.weight_of(&Value::Int(1)), rat(1, 3));
}

#[test]
fn giry_nested_call() {
    let src = "\
def fair():
  a = bernoulli(1/2)
  return (a)

def pair_model():
  [a] = fair()
  b = bernoulli(1/4)
  return (a, b)
";
    let cp = compile(src).unwrap();
    let m = giry_enumerate(&cp.program.models[1], &cp.program.models).unwrap();
    assert_eq!(
        m.weight_of(&Value::pair(Value::Int(1), Value::Int(1))),
        rat(1, 8)
    );
    assert_eq!(
        m.weight_of(&Value::pair(Value::Int(0), Value::Int(0))),
        rat(3, 8)
    );
}

#[test]
fn bind_preserves_normalization() {
    let m = DiscreteMeasure::from_entries(vec![
        (Value::Int(0), rat(1, 3)),
        (Value::Int(1), rat(2, 3)),
    ])
    .unwrap();
    let out = m
        .bind(|v| {
            Ok(if v == &Value::Int(0) {
                DiscreteMeasure::dirac(Value::Int(10))
            } else {
                DiscreteMeasure::from_entries(vec![
                    (Value::Int(10), rat(1, 5)),
                    (Value::Int(20), rat(4, 5)),
                ])
                .unwrap()
            })
        })
        .unwrap();
    let total: Rat = out.entries().iter().map(|(_, w)| w.clone()).sum();
    assert_eq!(total, rat_int(1));
    assert_eq!(out.weight_of(&Value::Int(10)), rat(1, 3) + rat(2, 15));
}

#[test]
fn measure_rejects_unnormalized_input() {
    assert!(matches!(
        DiscreteMeasure::from_entries(vec![(Value::Int(0), rat(1, 2))]),
        Err(GiryError::NotNormalized { .. })
    ));
    assert!(matches!(
        DiscreteMeasure::from_entries(vec![
            (Value::Int(0), rat(3, 2)),
            (Value::Int(1), rat(-1, 2))
        ]),
        Err(GiryError::NegativeWeight { .. })
    ));
}

#[test]
fn measure_serialization_format() {
    let m = DiscreteMeasure::from_entries(vec![
        (Value::Int(1), rat(1, 2)),
        (Value::Int(0), rat(1, 2)),
    ])
    .unwrap();
    assert_eq!(m.serialize(), "0\t1/2\n1\t1/2");
}

#[test]
fn exact_majority_selected_is_half() {
    let cp = compile(FIG1_SRC).unwrap();
    let entry = cp.table.get("majority").unwrap();
    // Volume of {u2 < u1} in the unit square.
    let event = Event::atom(vec![Side::Second], CmpOp::Eq, Value::Int(1));
    let p = pushforward_exact(&entry.pure_fn, &cp.table, &event).unwrap();
    assert_eq!(p, rat(1, 2));
    // Contradictory event has probability zero.
    let contradiction = Event::atom(vec![Side::Second], CmpOp::Eq, Value::Int(1)).and(
        vec![Side::Second],
        CmpOp::Eq,
        Value::Int(0),
    );
    assert_eq!(
        pushforward_exact(&entry.pure_fn, &cp.table, &contradiction).unwrap(),
        rat_int(0)
    );
}

#[test]
fn exact_bare_bernoulli() {
    use crate::reparam::{InputShape, PureFn, ResultTree};
    let f = PureFn {
        name: "flip_fun".into(),
        shape: InputShape::Uniform,
        bindings: vec![(
            "x".into(),
            PureExpr::Gen(
                DistKind::Bernoulli,
                vec![PureExpr::Const(rat(3, 4)), PureExpr::Input],
            ),
        )],
        result: ResultTree::Leaf("x".into()),
    };
    let table = TranslationTable::new();
    let event = Event::atom(vec![], CmpOp::Eq, Value::Int(1));
    assert_eq!(pushforward_exact(&f, &table, &event).unwrap(), rat(3, 4));
    // Mass of outcome 1 is exactly p even at the boundary convention.
    let m = pushforward_exact_measure(&f, &table).unwrap();
    assert_eq!(m.weight_of(&Value::Int(1)), rat(3, 4));
    assert_eq!(m.weight_of(&Value::Int(0)), rat(1, 4));
}

#[test]
fn exact_demographic_parity_probabilities() {
    let cp = compile(FIG2_SRC).unwrap();
    let entry = cp.table.get("demographic_parity").unwrap();
    let x_selected = Event::atom(vec![Side::First, Side::Second], CmpOp::Eq, Value::Int(1));
    let y_selected = Event::atom(vec![Side::Second, Side::Second], CmpOp::Eq, Value::Int(1));
    assert_eq!(
        pushforward_exact(&entry.pure_fn, &cp.table, &x_selected).unwrap(),
        rat(1, 2)
    );
    assert_eq!(
        pushforward_exact(&entry.pure_fn, &cp.table, &y_selected).unwrap(),
        rat(7, 10)
    );
}

#[test]
fn exact_rejects_event_on_continuous_component() {
    let cp = compile(FIG1_SRC).unwrap();
    let entry = cp.table.get("majority").unwrap();
    let event = Event::atom(vec![Side::First], CmpOp::Lt, vr(1, 2));
    assert!(matches!(
        pushforward_exact(&entry.pure_fn, &cp.table, &event),
        Err(ExactError::Event(_))
    ));
}

#[test]
fn exact_rejects_normal_draws() {
    let cp = compile("def g():\n  z = normal(0, 1)\n  x = bernoulli(1/2)\n  return (x)\n").unwrap();
    let entry = cp.table.get("g").unwrap();
    let event = Event::atom(vec![], CmpOp::Eq, Value::Int(1));
    assert!(matches!(
        pushforward_exact(&entry.pure_fn, &cp.table, &event),
        Err(ExactError::UnsupportedStructure(_))
    ));
}

#[test]
fn exact_measure_agrees_with_giry_on_dependent_coins() {
    let src = "def chain():\n  x = bernoulli(1/2)\n  y = bernoulli(x / 2 + 1/4)\n  return (x, y)\n";
    let cp = compile(src).unwrap();
    let entry = cp.table.get("chain").unwrap();
    let exact = pushforward_exact_measure(&entry.pure_fn, &cp.table).unwrap();
    let giry = giry_enumerate(&cp.program.models[0], &cp.program.models).unwrap();
    assert_eq!(exact.total_variation(&giry), rat_int(0));
    assert_eq!(exact, giry);
}

#[test]
fn mc_majority_selected_matches_exact() {
    let cp = compile(FIG1_SRC).unwrap();
    let entry = cp.table.get("majority").unwrap();
    let event = Event::atom(vec![Side::Second], CmpOp::Eq, Value::Int(1));
    let est = mc_probability(entry, &cp.table, &event, 100_000, 7).unwrap();
    assert!(
        (est.estimate - 0.5).abs() <= 4.0 * est.standard_error,
        "estimate {} se {}",
        est.estimate,
        est.standard_error
    );
    // Whole space has frequency exactly one.
    let all = mc_probability(entry, &cp.table, &Event::all(), 1000, 7).unwrap();
    assert_eq!(all.estimate, 1.0);
    assert_eq!(all.hits, 1000);
}

#[test]
fn mc_is_deterministic_given_seed() {
    let cp = compile(FIG2_SRC).unwrap();
    let entry = cp.table.get("demographic_parity").unwrap();
    let event = Event::atom(vec![Side::Second, Side::Second], CmpOp::Eq, Value::Int(1));
    let a = mc_probability(entry, &cp.table, &event, 2000, 3).unwrap();
    let b = mc_probability(entry, &cp.table, &event, 2000, 3).unwrap();
    assert_eq!(a, b);
    let c = mc_probability(entry, &cp.table, &event, 2000, 4).unwrap();
    assert_ne!(a.hits, c.hits);
}

#[test]
fn event_parse_display_roundtrip() {
    for text in [".fst.snd = 1", ". < 1/2", ".snd != 0 and .fst <= 3/4", "true"] {
        let ev = parse_event(text).unwrap();
        let printed = ev.to_string();
        let ev2 = parse_event(&printed).unwrap();
        assert_eq!(ev, ev2);
        assert_eq!(printed, text);
    }
    assert!(parse_event(".fst ~ 1").is_err());
    assert!(parse_event(".bad = 1").is_err());
}

#[test]
fn event_evaluation() {
    let v = Value::pair(Value::pair(vf(0.5), Value::Int(1)), Value::Int(0));
    let ev = parse_event(".fst.snd = 1 and .snd = 0").unwrap();
    assert!(ev.eval(&v).unwrap());
    let ev = parse_event(".fst.snd = 0").unwrap();
    assert!(!ev.eval(&v).unwrap());
    let ev = parse_event(".snd.snd = 0").unwrap();
    assert!(ev.eval(&v).is_err());
}
