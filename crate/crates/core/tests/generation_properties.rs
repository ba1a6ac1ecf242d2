//! Generated pairs against the verifiers.

use lyapforge_core::backward::{check_identity, generate_group, BackwardConfig, GenMode, SystemPair};
use lyapforge_core::deadline::Never;
use lyapforge_core::diff::lie_derivative;
use lyapforge_core::forward::{findlyap, sample_poly_system, FindResult, ForwardConfig, DEFAULT_EPS};
use lyapforge_core::poly::expand_to_poly;
use lyapforge_core::rng::stream;
use lyapforge_core::sample::SampleConfig;
use lyapforge_core::score::Verdict;
use lyapforge_core::sos::{verify_lyapunov_sos, verify_lyapunov_sos_expr, SosSettings};
use lyapforge_core::verify::{verify_interval, verify_sampling, IntervalConfig, SamplingConfig};
use lyapforge_core::{Expr, Num, PolyNF, System};
use proptest::prelude::*;
use rand::Rng;

fn small(mode: GenMode) -> BackwardConfig {
    BackwardConfig {
        base: SampleConfig {
            max_dim: 3,
            nb_ops: 3,
            ..SampleConfig::default()
        },
        mode,
        multigen: 3,
        ..BackwardConfig::default()
    }
}

fn nonpoly() -> BackwardConfig {
    BackwardConfig {
        p1c: 0.5,
        p1m: 0.5,
        p2: 0.5,
        ..small(GenMode::NonPolynomial)
    }
}

fn pointwise(pair: &SystemPair, rng: &mut impl Rng, proper: bool) -> Result<(), TestCaseError> {
    let n = pair.system.len();
    let vdot = lie_derivative(&pair.lyapunov, &pair.system);
    let v0 = pair.lyapunov.eval(&vec![0.0; n]).unwrap();
    prop_assert!(v0.abs() <= 1e-12);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..=5.0)).collect();
        let (Ok((d, mag)), Ok((v, vmag))) = (vdot.eval_with_magnitude(&x), pair.lyapunov.eval_with_magnitude(&x)) else {
            continue;
        };
        prop_assert!(d <= 1e-9 * (1.0 + mag), "{} along {:?} at {x:?}: {d}", pair.lyapunov, pair.system);
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if proper && norm >= 1e-6 {
            prop_assert!(v > 0.0, "V = {} at {x:?}: {v}", pair.lyapunov);
        } else {
            prop_assert!(v >= -1e-9 * (1.0 + vmag));
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polynomial_pairs_satisfy_identity_and_mode_contract(seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        for pair in generate_group(&small(GenMode::Polynomial), 0, &mut rng).unwrap() {
            let n = pair.system.len();
            prop_assert!(pair.system.iter().all(|f| expand_to_poly(f, n).is_ok()));
            prop_assert_eq!(check_identity(&pair), Some(true));
        }
    }

    #[test]
    fn nonpolynomial_pairs_hold_pointwise(seed in any::<u64>()) {
        let mut rng = stream(seed, 1);
        for pair in generate_group(&nonpoly(), 0, &mut rng).unwrap() {
            pointwise(&pair, &mut rng, true)?;
        }
    }

    #[test]
    fn barrier_pairs_are_nonnegative(seed in any::<u64>()) {
        let cfg = BackwardConfig { proper: false, ..nonpoly() };
        let mut rng = stream(seed, 2);
        for pair in generate_group(&cfg, 0, &mut rng).unwrap() {
            prop_assert!(pair.is_barrier);
            pointwise(&pair, &mut rng, false)?;
        }
    }

    #[test]
    fn forward_successes_recertify(seed in any::<u64>()) {
        let mut rng = stream(seed, 3);
        let f = sample_poly_system(&ForwardConfig::default(), &mut rng);
        let eps = vec![DEFAULT_EPS; f.len()];
        for d in [2, 4] {
            if let Ok(FindResult::Found(v)) = findlyap(&f, d, &eps, &SosSettings::default(), &Never) {
                prop_assert!(v.constant_term().is_zero());
                let verdict = verify_lyapunov_sos(&f, &v, &eps, &SosSettings::default(), &Never);
                prop_assert!(verdict.is_certified());
                break;
            }
        }
    }
}

fn contradict(a: &Verdict, b: &Verdict) -> bool {
    matches!(
        (a, b),
        (Verdict::Certified { .. }, Verdict::Falsified { .. }) | (Verdict::Falsified { .. }, Verdict::Certified { .. })
    )
}

fn interval_cfg() -> IntervalConfig {
    IntervalConfig {
        radius: 2.0,
        max_nodes: 5_000,
        ..IntervalConfig::default()
    }
}

fn scaled(v: &Expr, c: Num) -> Expr {
    Expr::mul(Expr::num(c), v.clone())
}

/// Verifier agreement, scaling invariance and soundness of interval
/// certificates on the same batch of polynomial pairs.
#[test]
fn verifiers_agree_on_polynomial_pairs() {
    let cfg = BackwardConfig {
        multigen: 1,
        ..small(GenMode::Polynomial)
    };
    let icfg = interval_cfg();
    let scfg = SamplingConfig {
        radius: icfg.radius,
        ..SamplingConfig::default()
    };
    let sos = SosSettings::default();
    let mut certified = 0;
    for i in 0..200 {
        let mut rng = stream(77, i);
        let pair = generate_group(&cfg, i, &mut rng).unwrap().remove(0);
        let n = pair.system.len();
        let sys = System::new(pair.system.clone());
        let eps = vec![0.0; n];
        let (iv, _) = verify_interval(&sys, &pair.lyapunov, &icfg, &Never);
        let sv = verify_lyapunov_sos_expr(&sys, &pair.lyapunov, &eps, &sos, &Never);
        assert!(!contradict(&iv, &sv), "{} along {:?}: {iv:?} vs {sv:?}", pair.lyapunov, pair.system);
        if !iv.is_certified() {
            continue;
        }
        certified += 1;
        for c in [Num::dec(5, -1), Num::from(2i64), Num::from(10i64)] {
            let cv = scaled(&pair.lyapunov, c);
            let (a, _) = verify_interval(&sys, &cv, &icfg, &Never);
            let (b, _) = verify_sampling(&sys, &cv, &scfg, &mut rng, &Never);
            let s = verify_lyapunov_sos_expr(&sys, &cv, &eps, &sos, &Never);
            for verdict in [a, b, s] {
                assert!(!matches!(verdict, Verdict::Falsified { .. }), "c = {c}: {verdict:?}");
            }
        }
        // Fresh points in the certified region.
        let vdot = lie_derivative(&pair.lyapunov, &pair.system);
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-icfg.radius..=icfg.radius)).collect();
            let (d, mag) = vdot.eval_with_magnitude(&x).unwrap();
            assert!(d <= icfg.delta + 1e-9 * (1.0 + mag));
            if x.iter().any(|c| c.abs() >= icfg.delta0) {
                assert!(pair.lyapunov.eval(&x).unwrap() > 0.0);
            }
        }
    }
    eprintln!("{certified}/200 interval-certified");
    assert!(certified > 0);
}

#[test]
fn scaled_polynomial_keeps_certificate() {
    let n = 2;
    let f: Vec<PolyNF> = ["-x0 + x1", "-x0 - x1"]
        .iter()
        .map(|s| expand_to_poly(&lyapforge_core::parse::parse_expr_dim(s, n).unwrap(), n).unwrap())
        .collect();
    let v = expand_to_poly(&lyapforge_core::parse::parse_expr_dim("x0^2 + x1^2", n).unwrap(), n).unwrap();
    for c in [Num::dec(5, -1), Num::from(2i64), Num::from(10i64)] {
        let cv = v.scale(&c);
        assert!(verify_lyapunov_sos(&f, &cv, &[0.0; 2], &SosSettings::default(), &Never).is_certified());
    }
}
