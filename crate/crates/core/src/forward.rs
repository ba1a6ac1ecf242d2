//! Forward generation: random polynomial systems and an SOS search for their
//! Lyapunov or barrier functions.
//!
//! The search solves for psd `Q1`, `Q2` with
//!
//! ```text
//! V = m1^T Q1 m1 + sum eps_i x_i^2,      -grad V . f = m2^T Q2 m2
//! ```
//!
//! then rounds `V` to short coefficients and re-verifies the rounded function.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::deadline::Deadline;
use crate::num::{Decimal, Num};
use crate::poly::{Monomial, PolyNF};
use crate::sample::sample_polynomial_with;
use crate::score::Verdict;
use crate::linalg::Mat;
use crate::sdp::{solve_feasibility, Constraint, Entry, Feasibility, SdpFailure, SdpProblem};
use crate::sos::{lie_derivative_poly, monomial_basis, newton_basis, verify_lyapunov_sos, SosError, SosSettings};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ForwardConfig {
    pub min_dim: usize,
    pub max_dim: usize,
    pub max_int: i64,
    /// Degree bound of each equation.
    pub max_degree: u32,
    pub max_n_term_fwd: usize,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        ForwardConfig {
            min_dim: 2,
            max_dim: 3,
            max_int: 10,
            max_degree: 3,
            max_n_term_fwd: 3,
        }
    }
}

/// Random system with integer coefficients, no constant terms and no zero equation.
pub fn sample_poly_system<R: Rng + ?Sized>(cfg: &ForwardConfig, rng: &mut R) -> Vec<PolyNF> {
    let n = rng.gen_range(cfg.min_dim..=cfg.max_dim);
    (0..n)
        .map(|_| sample_polynomial_with(n, cfg.max_n_term_fwd, 1, cfg.max_degree, -cfg.max_int, cfg.max_int, rng))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum FindResult {
    Found(PolyNF),
    /// The SDP is certified infeasible at this degree.
    NoneFound,
    Unknown(SdpFailure),
}

pub const DEFAULT_EPS: f64 = 1e-3;

/// Coefficient of each monomial in `grad(x^m) . f`.
fn lie_of_monomial(m: &Monomial, f: &[PolyNF]) -> BTreeMap<Monomial, f64> {
    let n = m.nvars();
    let p = PolyNF::monomial(n, m.clone(), Num::ONE);
    lie_derivative_poly(&p, f)
        .terms()
        .map(|(k, c)| (k.clone(), c.to_f64()))
        .collect()
}

struct Search {
    basis1: Vec<Monomial>,
    basis2: Vec<Monomial>,
    prob: SdpProblem,
}

/// `drop2` removes monomials from the Newton basis of the decrease block.
fn build_search(
    f: &[PolyNF],
    basis1: Vec<Monomial>,
    eps: &[f64],
    barrier: bool,
    drop2: &BTreeSet<Monomial>,
    cap: usize,
) -> Result<Search, SosError> {
    let n = f.len();
    // rows[gamma] collects Q1 entries of grad(m1^T Q1 m1) . f and the constant part.
    let mut q1_rows: BTreeMap<Monomial, Vec<Entry>> = BTreeMap::new();
    let mut rhs: BTreeMap<Monomial, f64> = BTreeMap::new();
    for a in 0..basis1.len() {
        for b in a..basis1.len() {
            for (g, c) in lie_of_monomial(&basis1[a].mul(&basis1[b]), f) {
                q1_rows.entry(g).or_default().push(Entry {
                    block: 0,
                    i: a,
                    j: b,
                    value: c,
                });
            }
        }
    }
    for (i, &e) in eps.iter().enumerate().take(n) {
        if e == 0.0 {
            continue;
        }
        let mut ex = vec![0; n];
        ex[i] = 2;
        for (g, c) in lie_of_monomial(&Monomial::new(ex), f) {
            *rhs.entry(g).or_insert(0.0) -= e * c;
        }
    }
    let support: BTreeSet<Monomial> = q1_rows.keys().chain(rhs.keys()).cloned().collect();
    let basis2: Vec<Monomial> = newton_basis(n, &support, cap)?
        .into_iter()
        .filter(|m| !drop2.contains(m))
        .collect();
    let mut rows: BTreeMap<Monomial, Constraint> = BTreeMap::new();
    for (g, es) in q1_rows {
        rows.entry(g).or_default().entries.extend(es);
    }
    for (g, c) in rhs {
        rows.entry(g).or_default().rhs = c;
    }
    for a in 0..basis2.len() {
        for b in a..basis2.len() {
            rows.entry(basis2[a].mul(&basis2[b])).or_default().entries.push(Entry {
                block: 1,
                i: a,
                j: b,
                value: 1.0,
            });
        }
    }
    let mut constraints: Vec<Constraint> = rows.into_values().collect();
    if barrier {
        constraints.push(Constraint {
            entries: (0..basis1.len())
                .map(|i| Entry {
                    block: 0,
                    i,
                    j: i,
                    value: 1.0,
                })
                .collect(),
            rhs: 1.0,
        });
    }
    Ok(Search {
        prob: SdpProblem {
            blocks: vec![basis1.len(), basis2.len()],
            constraints,
        },
        basis1,
        basis2,
    })
}

fn round_sig(v: f64, digits: usize) -> Option<Num> {
    let d = Num::Dec(Decimal::from_f64(v, digits)?);
    Some(match d.as_integer() {
        Some(k) => Num::Int(k),
        None => d,
    })
}

/// Short-coefficient versions of `v`: integers after scaling the largest
/// coefficient to 10, 100 and 1000, then six significant digits after dropping
/// coefficients below `1e-7 .. 1e-3` of the largest. Solver noise in terms that
/// must cancel exactly is what the truncation removes.
fn candidates(v: &BTreeMap<Monomial, f64>, n: usize) -> Vec<PolyNF> {
    let top = v.values().map(|c| libm::fabs(*c)).fold(0.0, f64::max);
    let mut out: Vec<PolyNF> = Vec::new();
    if top == 0.0 {
        return out;
    }
    let mut push = |p: PolyNF| {
        if !p.is_zero() && !out.contains(&p) {
            out.push(p);
        }
    };
    for k in [10.0, 100.0, 1000.0] {
        let s = k / top;
        push(PolyNF::from_terms(
            n,
            v.iter().map(|(m, c)| (m.clone(), Num::from(libm::round(c * s) as i64))),
        ));
    }
    for tau in [1e-7, 1e-6, 1e-5, 1e-4, 1e-3] {
        push(PolyNF::from_terms(
            n,
            v.iter()
                .filter(|(_, c)| libm::fabs(**c) > tau * top)
                .filter_map(|(m, c)| round_sig(*c, 6).map(|r| (m.clone(), r))),
        ));
    }
    out
}

/// Rounds of numeric facial reduction: basis monomials whose Gram diagonal is
/// negligible are dropped and the problem is solved again. Exact cancellations
/// (odd top degrees, missing pure powers) force such rows, and an interior-point
/// solution only approximates them.
const REDUCTION_ROUNDS: usize = 4;
const NEGLIGIBLE_DIAG: f64 = 1e-7;

fn negligible(q: &Mat, basis: &[Monomial], scale: f64) -> Vec<Monomial> {
    (0..basis.len())
        .filter(|&i| q[(i, i)] <= NEGLIGIBLE_DIAG * scale)
        .map(|i| basis[i].clone())
        .collect()
}

fn search(
    f: &[PolyNF],
    degree: u32,
    eps: &[f64],
    barrier: bool,
    settings: &SosSettings,
    deadline: &dyn Deadline,
) -> Result<FindResult, SosError> {
    let n = f.len();
    let mut basis1 = monomial_basis(n, degree, settings.basis_cap)?;
    let mut drop2: BTreeSet<Monomial> = BTreeSet::new();
    for round in 0..REDUCTION_ROUNDS {
        if basis1.is_empty() {
            break;
        }
        let s = build_search(f, basis1.clone(), eps, barrier, &drop2, settings.basis_cap)?;
        let blocks = match solve_feasibility(&s.prob, &settings.sdp, deadline) {
            Feasibility::Feasible(pt) => pt.blocks,
            // Only the unreduced problem certifies that no V exists.
            Feasibility::Infeasible(_) if round == 0 => return Ok(FindResult::NoneFound),
            Feasibility::Infeasible(_) => break,
            Feasibility::Unknown(e) if round == 0 => return Ok(FindResult::Unknown(e)),
            Feasibility::Unknown(_) => break,
        };
        let mut v: BTreeMap<Monomial, f64> = BTreeMap::new();
        for a in 0..s.basis1.len() {
            for b in 0..s.basis1.len() {
                *v.entry(s.basis1[a].mul(&s.basis1[b])).or_insert(0.0) += blocks[0][(a, b)];
            }
        }
        for (i, &e) in eps.iter().enumerate().take(n) {
            let mut ex = vec![0; n];
            ex[i] = 2;
            *v.entry(Monomial::new(ex)).or_insert(0.0) += e;
        }
        for cand in candidates(&v, n) {
            if deadline.expired() {
                return Ok(FindResult::Unknown(SdpFailure::Timeout));
            }
            if let Verdict::Certified { .. } = verify_lyapunov_sos(f, &cand, eps, settings, deadline) {
                return Ok(FindResult::Found(cand));
            }
        }
        let scale = blocks
            .iter()
            .flat_map(|q| (0..q.rows()).map(move |i| q[(i, i)]))
            .fold(0.0, f64::max);
        let gone1 = negligible(&blocks[0], &s.basis1, scale);
        let gone2 = negligible(&blocks[1], &s.basis2, scale);
        if gone1.is_empty() && gone2.is_empty() {
            break;
        }
        basis1.retain(|m| !gone1.contains(m));
        drop2.extend(gone2);
    }
    Ok(FindResult::Unknown(SdpFailure::Numerical))
}

/// Search for `V` of the given even degree with `V - sum eps_i x_i^2` and
/// `-grad V . f` SOS. Any returned `V` passes `verify_lyapunov_sos` with `eps`.
pub fn findlyap(
    f: &[PolyNF],
    degree: u32,
    eps: &[f64],
    settings: &SosSettings,
    deadline: &dyn Deadline,
) -> Result<FindResult, SosError> {
    search(f, degree, eps, false, settings, deadline)
}

/// As `findlyap` with `eps = 0`; `tr(Q1) = 1` excludes `V = 0`.
pub fn find_barrier(
    f: &[PolyNF],
    degree: u32,
    settings: &SosSettings,
    deadline: &dyn Deadline,
) -> Result<FindResult, SosError> {
    search(f, degree, &vec![0.0; f.len()], true, settings, deadline)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deadline::Never;
    use crate::parse::parse_expr_dim;
    use crate::poly::expand_to_poly;
    use crate::rng::stream;

    fn sys(eqs: &[&str]) -> Vec<PolyNF> {
        let n = eqs.len();
        eqs.iter()
            .map(|s| expand_to_poly(&parse_expr_dim(s, n).unwrap(), n).unwrap())
            .collect()
    }

    #[test]
    fn sampled_systems_respect_contract() {
        let cfg = ForwardConfig::default();
        let mut rng = stream(21, 0);
        for _ in 0..500 {
            let f = sample_poly_system(&cfg, &mut rng);
            assert!((2..=3).contains(&f.len()));
            for fi in &f {
                assert!(!fi.is_zero());
                assert!(fi.constant_term().is_zero());
                assert!(fi.len() <= cfg.max_n_term_fwd);
                for (_, c) in fi.terms() {
                    assert!(c.as_integer().unwrap().abs() <= cfg.max_int as i128);
                }
            }
        }
    }

    #[test]
    fn linear_decay() {
        let f = sys(&["-x0", "-x1"]);
        let eps = [DEFAULT_EPS; 2];
        match findlyap(&f, 2, &eps, &SosSettings::default(), &Never).unwrap() {
            FindResult::Found(v) => {
                let a0 = v.coeff(&Monomial::new(vec![2, 0])).to_f64();
                let a1 = v.coeff(&Monomial::new(vec![0, 2])).to_f64();
                assert!(a0 > 0.0 && a1 > 0.0, "{}", v.to_expr());
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn unstable_scalar() {
        let f = sys(&["x0"]);
        assert_eq!(
            findlyap(&f, 2, &[DEFAULT_EPS], &SosSettings::default(), &Never).unwrap(),
            FindResult::NoneFound
        );
    }

    #[test]
    fn additional_example_row_one() {
        let f = sys(&["-5*x0^3 - 2*x0*x1^2", "-9*x0^4 + 3*x0^3*x1 - 4*x1^3"]);
        let eps = [DEFAULT_EPS; 2];
        let found = [2, 4, 6]
            .into_iter()
            .find_map(|d| match findlyap(&f, d, &eps, &SosSettings::default(), &Never).unwrap() {
                FindResult::Found(v) => Some(v),
                _ => None,
            })
            .expect("some degree succeeds");
        let verdict = verify_lyapunov_sos(&f, &found, &eps, &SosSettings::default(), &Never);
        assert!(verdict.is_certified());
    }

    #[test]
    fn barrier_follows_lyapunov() {
        let f = sys(&["-x0 + x1", "-x0 - x1"]);
        assert!(matches!(
            findlyap(&f, 2, &[DEFAULT_EPS; 2], &SosSettings::default(), &Never).unwrap(),
            FindResult::Found(_)
        ));
        match find_barrier(&f, 2, &SosSettings::default(), &Never).unwrap() {
            FindResult::Found(v) => {
                let verdict = verify_lyapunov_sos(&f, &v, &[0.0; 2], &SosSettings::default(), &Never);
                assert!(verdict.is_certified());
            }
            other => panic!("{:?}", other),
        }
    }
}
