//! SOS certificates: replay, closure of squares, relaxation monotonicity and
//! an independent check of the Motzkin infeasibility certificate.

use lyapforge_core::backward::{generate_group, BackwardConfig};
use lyapforge_core::deadline::Never;
use lyapforge_core::parse::parse_expr_dim;
use lyapforge_core::poly::expand_to_poly;
use lyapforge_core::rng::stream;
use lyapforge_core::sample::sample_polynomial_with;
use lyapforge_core::sos::{check_sos, verify_lyapunov_sos, SosOutcome, SosSettings};
use lyapforge_core::{Monomial, Poly, PolyNF};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn poly(s: &str, n: usize) -> PolyNF {
    expand_to_poly(&parse_expr_dim(s, n).unwrap(), n).unwrap()
}

fn system(eqs: &[&str]) -> Vec<PolyNF> {
    eqs.iter().map(|s| poly(s, eqs.len())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn squares_are_sos_and_certificates_replay(seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let n = rng.gen_range(1..=3);
        let p = sample_polynomial_with(n, 4, 1, 3, -10, 10, &mut rng);
        let sq = p.mul(&p).to_f64_poly();
        let settings = SosSettings::default();
        let SosOutcome::Sos(cert) = check_sos(&sq, &settings, &Never).unwrap() else {
            return Err(TestCaseError::fail(format!("({})^2 not certified", p.to_expr())));
        };
        // Rebuild m^T Q m coefficient by coefficient without the solver.
        let mut rebuilt: Poly<f64> = Poly::zero(n);
        for (i, a) in cert.basis.iter().enumerate() {
            for (j, b) in cert.basis.iter().enumerate() {
                rebuilt.add_term(a.mul(b), cert.gram[(i, j)]);
            }
        }
        let worst = rebuilt.sub(&sq).terms().map(|(_, c)| c.abs()).fold(0.0, f64::max);
        prop_assert!(worst <= settings.res_tol * sq.max_abs_coeff());
        prop_assert!(cert.cholesky_replay(1e-8));
    }

    #[test]
    fn certification_is_monotone_in_eps(seed in any::<u64>()) {
        let cfg = BackwardConfig {
            base: lyapforge_core::sample::SampleConfig { max_dim: 3, ..Default::default() },
            ..BackwardConfig::default()
        };
        let mut rng = stream(seed, 1);
        let pair = generate_group(&cfg, 0, &mut rng).unwrap().remove(0);
        let n = pair.system.len();
        let f: Vec<PolyNF> = pair.system.iter().map(|e| expand_to_poly(e, n).unwrap()).collect();
        let v = expand_to_poly(&pair.lyapunov, n).unwrap();
        let settings = SosSettings::default();
        let at = |e: f64| verify_lyapunov_sos(&f, &v, &vec![e; n], &settings, &Never);
        if at(1e-3).is_certified() {
            for e in [5e-4, 1e-4, 0.0] {
                prop_assert!(at(e).is_certified(), "eps {e} lost certification for V = {}", pair.lyapunov);
            }
        }
    }
}

#[test]
fn golden_pairs_are_monotone_in_eps() {
    let f = system(&["-7*x0^5 - 4*x0^3*x1^2 - 5*x0^3", "7*x0^4 - 3*x1 - 2*x2", "-8*x0^2 - 9*x2"]);
    let v = poly("2*x0^4 + 2*x0^2*x1^2 + 3*x0^2 + 2*x1^2 + x2^2", 3);
    for e in [1e-3, 1e-4, 0.0] {
        assert!(verify_lyapunov_sos(&f, &v, &[e; 3], &SosSettings::default(), &Never).is_certified());
    }
}

#[test]
fn motzkin_dual_certificate_checked_independently() {
    let p = poly("x0^4*x1^2 + x0^2*x1^4 - 3*x0^2*x1^2 + 1", 2).to_f64_poly();
    let SosOutcome::NotSos(w) = check_sos(&p, &SosSettings::default(), &Never).unwrap() else {
        panic!("Motzkin polynomial certified as SOS");
    };
    let k = w.basis.len();
    let moment = |m: &Monomial| {
        w.moments
            .iter()
            .find(|(g, _)| g == m)
            .map(|(_, y)| *y)
            .unwrap_or(0.0)
    };
    let mm = DMatrix::from_fn(k, k, |i, j| moment(&w.basis[i].mul(&w.basis[j])));
    let eig = mm.clone().symmetric_eigen().eigenvalues;
    let scale = eig.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    // sum_gamma y_gamma p_gamma, recomputed from the coefficients.
    let value: f64 = p.terms().map(|(m, c)| c * moment(m)).sum();
    assert!(value < 0.0, "dual value {value}");
    // A psd moment matrix with y^T p < 0 rules out every Gram matrix: any psd
    // Q would give y^T p = <M, Q> >= 0. Allow the violation only up to what
    // cannot close the gap for Gram matrices of trace up to 1e3 * size.
    assert!(min >= -1e-9 * scale || (-min) * 1e3 * k as f64 <= 0.5 * value.abs(), "min eig {min}");
}
