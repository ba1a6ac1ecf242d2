//! Properties of the expression kernel on randomly sampled trees.

use lyapforge_core::diff::differentiate;
use lyapforge_core::interval::{eval_interval, Interval};
use lyapforge_core::parse::parse_expr_dim;
use lyapforge_core::poly::expand_to_poly;
use lyapforge_core::rng::stream;
use lyapforge_core::sample::{sample_expr, sample_polynomial, SampleConfig};
use lyapforge_core::simplify::simplify;
use lyapforge_core::tokenizer::{decode_expr, encode_expr, from_text, to_text};
use lyapforge_core::{BinaryOp, Expr, UnaryOp};
use proptest::prelude::*;
use rand::Rng;

fn full_cfg() -> SampleConfig {
    SampleConfig {
        max_dim: 3,
        min_dim: 1,
        nb_ops: 6,
        prob_float: 0.3,
        unary_ops: UnaryOp::ALL.to_vec(),
        binary_ops: vec![BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Pow],
        ..SampleConfig::default()
    }
}

fn point(rng: &mut impl Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-r..=r)).collect()
}

fn finite(e: &Expr, x: &[f64]) -> Option<f64> {
    e.eval(x).ok().filter(|v| v.is_finite())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn derivative_matches_central_difference(seed in any::<u64>()) {
        let cfg = full_cfg();
        let mut rng = stream(seed, 0);
        let n = cfg.sample_dim(&mut rng);
        let e = sample_expr(&cfg, n, &mut rng);
        let x = point(&mut rng, n, 3.0);
        let i = rng.gen_range(0..n);
        let h = 1e-5;
        let at = |t: f64| {
            let mut y = x.clone();
            y[i] += t;
            finite(&e, &y)
        };
        // Stay clear of singularities: finite on a neighbourhood of radius
        // 10h, with moderate rounding-error scales for f and its derivative.
        prop_assume!((-10..=10).all(|k| at(k as f64 * h).is_some()));
        let de = differentiate(&e, i);
        let scale = |g: &Expr| g.eval_with_magnitude(&x).map(|(_, m)| m).unwrap_or(f64::INFINITY);
        prop_assume!(scale(&e) <= 1e6 && scale(&de) <= 1e6);
        let d = finite(&de, &x).unwrap();
        let fd = (at(h).unwrap() - at(-h).unwrap()) / (2.0 * h);
        prop_assert!((d - fd).abs() <= 1e-4 * (1.0 + d.abs()), "{e} at {x:?} wrt x{i}: {d} vs {fd}");
    }

    #[test]
    fn interval_encloses_point_values(seed in any::<u64>()) {
        let cfg = full_cfg();
        let mut rng = stream(seed, 1);
        let n = cfg.sample_dim(&mut rng);
        let e = sample_expr(&cfg, n, &mut rng);
        let centre = point(&mut rng, n, 3.0);
        let bx: Vec<Interval> = centre
            .iter()
            .map(|c| {
                let w = rng.gen_range(0.0..1.0);
                Interval::new(c - w, c + w)
            })
            .collect();
        let x: Vec<f64> = bx.iter().map(|b| rng.gen_range(b.lo..=b.hi)).collect();
        let (Ok(enc), Some(v)) = (eval_interval(&e, &bx), finite(&e, &x)) else {
            return Ok(());
        };
        prop_assert!(enc.contains(v), "{e}: {v} not in [{}, {}]", enc.lo, enc.hi);
    }

    #[test]
    fn expansion_is_idempotent(seed in any::<u64>()) {
        let cfg = SampleConfig {
            binary_ops: vec![BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Pow],
            unary_ops: vec![],
            prob_float: 0.3,
            ..SampleConfig::default()
        };
        let mut rng = stream(seed, 2);
        let n = cfg.sample_dim(&mut rng);
        let exprs = [sample_expr(&cfg, n, &mut rng), sample_polynomial(&cfg, n, &mut rng).to_expr()];
        for e in exprs {
            // Over-degree trees are rejected outright.
            let Ok(p) = expand_to_poly(&e, n) else { continue };
            prop_assert_eq!(expand_to_poly(&p.to_expr(), n).unwrap(), p);
        }
    }

    #[test]
    fn simplify_preserves_value(seed in any::<u64>()) {
        let cfg = full_cfg();
        let mut rng = stream(seed, 3);
        let n = cfg.sample_dim(&mut rng);
        let e = sample_expr(&cfg, n, &mut rng);
        let s = simplify(&e);
        for _ in 0..100 {
            let x = point(&mut rng, n, 3.0);
            let (Ok(a), Ok(b)) = (e.eval(&x), s.eval(&x)) else { continue };
            if !(a.is_finite() && b.is_finite()) {
                continue;
            }
            // Relative to the magnitudes the evaluation passes through.
            let (_, mag) = e.eval_with_magnitude(&x).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + mag), "{e} -> {s} at {x:?}: {a} vs {b}");
        }
    }

    #[test]
    fn tokens_round_trip(seed in any::<u64>()) {
        let cfg = full_cfg();
        let mut rng = stream(seed, 4);
        let n = cfg.sample_dim(&mut rng);
        let e = sample_expr(&cfg, n, &mut rng);
        let toks = encode_expr(&e).unwrap();
        let back = decode_expr(&toks).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(encode_expr(&back).unwrap(), toks.clone());
        prop_assert_eq!(from_text(&to_text(&toks)).unwrap(), toks);
    }

    #[test]
    fn infix_round_trip(seed in any::<u64>()) {
        let cfg = full_cfg();
        let mut rng = stream(seed, 5);
        let n = cfg.sample_dim(&mut rng);
        let e = sample_expr(&cfg, n, &mut rng);
        let text = e.to_string();
        prop_assert_eq!(parse_expr_dim(&text, n).unwrap(), e, "{}", text);
    }
}
