mod common;

use common::{oracle, random_instance};
use warpclust::updating::{aggregate_similarity, combination_samples, compute_lambda, select_theta, update_curve};
use warpclust::Domain;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn shrinkage_bounds_match_direct_formulas() {
    let d = Domain::new(120).unwrap();
    let mut checked = 0;
    for seed in 0..20 {
        let ctx = random_instance(seed, 2 + seed as usize % 3, &d);
        let th = select_theta(&ctx, &d).unwrap();
        if th.all_zero {
            continue;
        }
        let b = compute_lambda(&ctx, &th, &d).unwrap();
        let o = oracle(&ctx, &th.weights, &d);
        assert!(rel_close(b.lc6, o.lc6, 1e-8), "seed {seed}: lc6 {} vs {}", b.lc6, o.lc6);
        match (b.lc5, o.lc5) {
            (Some(x), Some(y)) => assert!(rel_close(x, y, 1e-8), "seed {seed}: lc5 {x} vs {y}"),
            (None, None) => {}
            other => panic!("seed {seed}: lc5 presence differs {other:?}"),
        }
        checked += 1;
    }
    assert!(checked >= 10, "only {checked} instances had surviving weights");
}

#[test]
fn surviving_weights_make_c3_c4_positive() {
    let d = Domain::new(100).unwrap();
    for seed in 100..140 {
        let ctx = random_instance(seed, 3, &d);
        let th = select_theta(&ctx, &d).unwrap();
        if th.all_zero {
            continue;
        }
        let o = oracle(&ctx, &th.weights, &d);
        assert!(o.c3 > 0.0 && o.c4 > 0.0, "seed {seed}: {} {}", o.c3, o.c4);
    }
}

#[test]
fn update_does_not_lower_aggregate_similarity() {
    let d = Domain::new(100).unwrap();
    for seed in 200..230 {
        let ctx = random_instance(seed, 2 + seed as usize % 3, &d);
        let th = select_theta(&ctx, &d).unwrap();
        if th.all_zero {
            continue;
        }
        let o = oracle(&ctx, &th.weights, &d);
        if !o.c2 {
            continue;
        }
        let lambda = compute_lambda(&ctx, &th, &d).unwrap().lambda;
        let x = combination_samples(&ctx, &th, lambda, &d).unwrap();
        let before = aggregate_similarity(&ctx, ctx.target().samples(), &d).unwrap();
        let after = aggregate_similarity(&ctx, &x, &d).unwrap();
        assert!(after >= before - 1e-6, "seed {seed}: {after} < {before}");
    }
}

#[test]
fn update_keeps_identity_and_membership() {
    let d = Domain::new(100).unwrap();
    let ctx = random_instance(7, 3, &d);
    let out = update_curve(&ctx, &d).unwrap();
    assert_eq!(out.curve.id(), ctx.target().id());
    assert_eq!(out.curve.members(), ctx.target().members());
    if let Some(b) = out.bounds {
        assert!(b.lambda > 0.0 && b.lambda >= b.lc6);
    }
}
