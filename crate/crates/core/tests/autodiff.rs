mod common;

use common::*;
use namedtensor::autodiff::{self, jacobian, priming, Env, Expr};
use namedtensor::ops::{self, ReduceKind, UnaryFn};
use namedtensor::rng::SplitMix64;
use namedtensor::NamedTensor;
use proptest::prelude::*;

const SMOOTH: [UnaryFn; 5] = [
    UnaryFn::Sin,
    UnaryFn::Cos,
    UnaryFn::Tanh,
    UnaryFn::Sigmoid,
    UnaryFn::Exp,
];

/// A smooth expression in `x` over `{a[3], b[2]}` and a constant `w`.
fn smooth_expr(rng: &mut SplitMix64) -> Expr {
    let f = SMOOTH[rng.below(SMOOTH.len())];
    let g = SMOOTH[rng.below(SMOOTH.len())];
    let inner = Expr::var("x").unary(f).mul(Expr::var("w"));
    match rng.below(3) {
        0 => inner.softmax(&["a"]).unary(g),
        1 => inner.contract(Expr::var("x"), &["b"]).unary(g),
        _ => inner.standardize(&["a", "b"]).unary(g).sum(&["b"]),
    }
}

fn env(rng: &mut SplitMix64) -> Env {
    let s = shape(&[("a", 3), ("b", 2)]);
    let x = uniform(rng, &s);
    let w = uniform(rng, &s);
    Env::new().bind("x", x).bind("w", w)
}

#[test]
fn determinant_is_not_differentiable() {
    let x = tensor(&[("r", 2), ("c", 2)], vec![2., 1., 1., 3.]);
    let err = autodiff::grad(&Expr::var("x").det("r", "c"), "x", &Env::new().bind("x", x)).unwrap_err();
    assert_eq!(err.kind(), "NotDifferentiable");
}

#[test]
fn colliding_output_names_are_primed() {
    let x = tensor(&[("ax", 2)], vec![0.3, -0.2]);
    let d = jacobian(&Expr::var("x").softmax(&["ax"]), "x", &Env::new().bind("x", x)).unwrap();
    assert_eq!(d.value.shape(), &shape(&[("ax", 2), ("ax'", 2)]));
    assert_eq!(d.rename_map.len(), 1);
}

#[test]
fn identity_jacobian_is_the_identity_tensor() {
    let mut rng = SplitMix64::new(3);
    let e = env(&mut rng);
    let d = jacobian(&Expr::var("x"), "x", &e).unwrap();
    for r in d.value.shape().records() {
        let eye = r.get("a") == r.get("a'") && r.get("b") == r.get("b'");
        assert_eq!(d.value.get(&r).unwrap(), if eye { 1.0 } else { 0.0 });
    }
}

#[test]
fn max_subgradient_goes_to_first_maximizer() {
    let x = tensor(&[("a", 3)], vec![1., 2., 2.]);
    let g = autodiff::grad(
        &Expr::var("x").reduce(ReduceKind::Max, &["a"]),
        "x",
        &Env::new().bind("x", x),
    )
    .unwrap();
    assert_eq!(g.data(), &[0., 1., 0.]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn finite_differences_agree(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let e = smooth_expr(&mut rng);
        let env = env(&mut rng);
        if let Some(err) = fd_check(&e, "x", &env, &mut rng) {
            prop_assert!(err <= 1e-6, "relative error {err:e}");
        }
    }

    #[test]
    fn vjp_is_linear_in_the_cotangent(seed in any::<u64>(), alpha in -3.0..3.0f64, beta in -3.0..3.0f64) {
        let mut rng = SplitMix64::new(seed);
        let e = smooth_expr(&mut rng);
        let env = env(&mut rng);
        let out = autodiff::evaluate(&e, &env).unwrap();
        let u = uniform(&mut rng, out.shape());
        let v = uniform(&mut rng, out.shape());
        let mixed = ops::add(&u.map(|t| alpha * t), &v.map(|t| beta * t)).unwrap();
        let lhs = autodiff::vjp(&e, "x", &env, &mixed).unwrap();
        let gu = autodiff::vjp(&e, "x", &env, &u).unwrap();
        let gv = autodiff::vjp(&e, "x", &env, &v).unwrap();
        let rhs = ops::add(&gu.map(|t| alpha * t), &gv.map(|t| beta * t)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn chain_rule_contracts_jacobians(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let x = uniform(&mut rng, &shape(&[("a", 3)]));
        let w = uniform(&mut rng, &shape(&[("a", 3), ("b", 2)]));
        let f = Expr::var("x").unary(SMOOTH[rng.below(5)]).softmax(&["a"]);
        let g = Expr::var("y").unary(SMOOTH[rng.below(5)]).contract(Expr::var("w"), &["a"]);
        let env = Env::new().bind("x", x.clone()).bind("w", w.clone());
        let y = autodiff::evaluate(&f, &env).unwrap();
        let inner = jacobian(&f, "x", &env).unwrap().value;
        let outer = jacobian(&g, "y", &env.clone().bind("y", y)).unwrap().value;
        let chained = ops::contract(&ops::rename(&outer, "a", "a'").unwrap(), &inner, &["a'"]).unwrap();
        let mut composite = std::collections::HashMap::new();
        composite.insert("y".to_string(), f);
        let direct = jacobian(&g.substitute(&composite), "x", &env).unwrap().value;
        prop_assert!(chained.max_abs_diff(&direct).unwrap() <= 1e-8);
    }

    #[test]
    fn primed_names_are_fresh_and_distinct(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let pool = ["a", "a'", "a''", "b", "b'"];
        let (ni, no) = (1 + rng.below(4), 1 + rng.below(4));
        let (ins, outs) = (pick_names(&mut rng, &pool, ni, &[]), pick_names(&mut rng, &pool, no, &[]));
        let input = random_shape(&mut rng, &ins, 3);
        let output = random_shape(&mut rng, &outs, 3);
        let map = priming(&input, &output);
        for axis in output.axes() {
            let name = map.get(&axis.name).unwrap_or(&axis.name);
            prop_assert!(!input.contains(name.as_str()));
            prop_assert_eq!(map.contains_key(&axis.name), input.contains(axis.name.as_str()));
            if let Some(primed) = map.get(&axis.name) {
                prop_assert_eq!(primed.base(), axis.name.base());
                prop_assert!(!output.contains(primed.as_str()));
            }
        }
        let targets: std::collections::BTreeSet<_> = map.values().collect();
        prop_assert_eq!(targets.len(), map.len());
    }

    #[test]
    fn jacobian_contracts_to_vjp(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let e = smooth_expr(&mut rng);
        let env = env(&mut rng);
        let d = jacobian(&e, "x", &env).unwrap();
        let w = uniform(&mut rng, &d.output_shape);
        let mut primed = w.clone();
        for (from, to) in &d.rename_map {
            primed = ops::rename(&primed, from.as_str(), to.as_str()).unwrap();
        }
        let out: Vec<String> = d.primed_output_shape().names().map(|n| n.to_string()).collect();
        let via_jacobian = ops::contract(&d.value, &primed, &out).unwrap();
        let direct: NamedTensor = autodiff::vjp(&e, "x", &env, &w).unwrap();
        prop_assert!(via_jacobian.max_abs_diff(&direct).unwrap() <= 1e-12);
    }
}
