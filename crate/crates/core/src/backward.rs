//! Backward generation: sample a Lyapunov function, then build systems it stabilises.
//!
//! ```text
//! V = [I(V_proper) - I(0)] * g(h) + sum_k b_k(p_k)
//! f = -(h_{pi(i)}^2 dV/dx_i)_i + sum_k g_k e^k,     e^k orthogonal to grad V
//! ```
//!
//! so that `grad V . f = -sum_i h_{pi(i)}^2 (dV/dx_i)^2 <= 0` holds as an identity.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::diff::{differentiate, s_add, s_mul, s_neg, s_pow, s_sub};
use crate::expr::{Expr, UnaryOp};
use crate::linalg::{cholesky, Mat};
use crate::num::Num;
use crate::poly::{expand_to_poly, PolyNF};
use crate::sample::{sample_expr, sample_polynomial_with, ConfigError, SampleConfig};
use crate::simplify::simplify;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GenMode {
    /// Polynomial V, h and g; no step-1b transforms.
    Polynomial,
    NonPolynomial,
    /// `f = -grad V`.
    GradientFlow,
    /// `V = sum x_i^2`.
    TwoNorm,
}

/// Increasing on `[0, inf)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum IncreasingFunc {
    Exp,
    /// `ln(1 + u^2)`.
    LogOnePlusSquare,
    /// `sqrt(1 + u)`.
    SqrtOnePlus,
}

/// Nonnegative everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PositiveFunc {
    Exp,
    OnePlusCos,
    OnePlusSin,
}

/// Bounded below, with a minimum at `xi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BoundedFunc {
    Cos,
    Sin,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct BackwardConfig {
    pub base: SampleConfig,
    pub mode: GenMode,
    /// Probability of composing `V_proper` with an increasing function.
    pub p1c: f64,
    /// Probability of multiplying `V_proper` by a positive function.
    pub p1m: f64,
    /// Per cross term, probability of replacing `p^2` by a bounded function.
    pub p2: f64,
    pub proba_diagonal: f64,
    pub max_nb_cross_term: usize,
    pub multigen: usize,
    /// `false` generates barrier functions: `V_proper = 0`.
    pub proper: bool,
    /// Every `h_i` is nonvanishing, so `grad V . f < 0` wherever `grad V != 0`.
    pub strict: bool,
    /// Weight `exp(gen_weight * k)` on the counts of nonzero `h_i` and `g_i`.
    pub gen_weight: f64,
    /// Degree bound of `g_i`; `h_i` gets half of it.
    pub max_order_pure_poly: u32,
    pub increasing_funcs: Vec<IncreasingFunc>,
    pub positive_funcs: Vec<PositiveFunc>,
    pub bounded_funcs: Vec<BoundedFunc>,
}

impl Default for BackwardConfig {
    fn default() -> Self {
        BackwardConfig {
            base: SampleConfig::default(),
            mode: GenMode::Polynomial,
            p1c: 0.0,
            p1m: 0.0,
            p2: 0.0,
            proba_diagonal: 0.5,
            max_nb_cross_term: 2,
            multigen: 1,
            proper: true,
            strict: false,
            gen_weight: 0.0,
            max_order_pure_poly: 2,
            increasing_funcs: vec![
                IncreasingFunc::Exp,
                IncreasingFunc::LogOnePlusSquare,
                IncreasingFunc::SqrtOnePlus,
            ],
            positive_funcs: vec![PositiveFunc::Exp, PositiveFunc::OnePlusCos, PositiveFunc::OnePlusSin],
            bounded_funcs: vec![BoundedFunc::Cos, BoundedFunc::Sin],
        }
    }
}

impl BackwardConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.base.validate()?;
        let bad = |m| Err(ConfigError::Invalid(m));
        for p in [self.p1c, self.p1m, self.p2, self.proba_diagonal] {
            if !(0.0..=1.0).contains(&p) {
                return bad("probabilities must lie in [0, 1]");
            }
        }
        if !(1..=100).contains(&self.multigen) {
            return bad("multigen must lie in [1, 100]");
        }
        if !self.proper && self.max_nb_cross_term == 0 {
            return bad("barrier mode needs at least one cross term");
        }
        if !self.gen_weight.is_finite() {
            return bad("gen_weight must be finite");
        }
        if self.mode == GenMode::NonPolynomial {
            if self.p1c > 0.0 && self.increasing_funcs.is_empty() {
                return bad("increasing_funcs is empty");
            }
            if self.p1m > 0.0 && self.positive_funcs.is_empty() {
                return bad("positive_funcs is empty");
            }
            if self.p2 > 0.0 && self.bounded_funcs.is_empty() {
                return bad("bounded_funcs is empty");
            }
        }
        Ok(())
    }

    fn is_polynomial(&self) -> bool {
        self.mode != GenMode::NonPolynomial
    }

    /// Coefficient bound for functions that end up squared.
    fn root_int(&self) -> i64 {
        let m = self.base.max_int as f64;
        libm::ceil(libm::sqrt(m)) as i64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("every equation simplified to zero after 10 attempts")]
    DegenerateSystem,
    #[error("skew fields need at least two variables")]
    Dimension,
}

/// Sampled pieces of `V_proper`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticCore {
    /// Positive definite, integer entries.
    pub alpha: Vec<Vec<i64>>,
    pub beta: Vec<u32>,
}

impl QuadraticCore {
    /// `sum_{i,j in vars} alpha_ij x_i^b_i x_j^b_j`.
    pub fn restricted(&self, vars: &[usize]) -> PolyNF {
        let n = self.beta.len();
        let y: Vec<PolyNF> = (0..n).map(|i| PolyNF::var(n, i).pow(self.beta[i])).collect();
        let mut out = PolyNF::zero(n);
        for &i in vars {
            for &j in vars {
                out = out.add(&y[i].mul(&y[j]).scale(&Num::from(self.alpha[i][j])));
            }
        }
        out
    }

    pub fn to_poly(&self) -> PolyNF {
        let all: Vec<usize> = (0..self.beta.len()).collect();
        self.restricted(&all)
    }
}

/// How a Lyapunov function was built.
#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovWitness {
    pub v_proper: Expr,
    pub v_cross: Expr,
    pub core: Option<QuadraticCore>,
}

/// How one system was built from `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemWitness {
    /// `h_0..h_{n-1}`; zero beyond `k1`.
    pub h: Vec<Expr>,
    pub g: Vec<Expr>,
    pub tau: Vec<(usize, usize)>,
    pub perm: Vec<usize>,
    pub p: usize,
    pub k1: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemPair {
    pub system: Vec<Expr>,
    pub lyapunov: Expr,
    pub lyapunov_witness: LyapunovWitness,
    pub witness: SystemWitness,
    pub group_id: u64,
    pub is_barrier: bool,
}

fn weighted_count<R: Rng + ?Sized>(lo: usize, hi: usize, weight: f64, rng: &mut R) -> usize {
    if lo >= hi {
        return lo;
    }
    let w: Vec<f64> = (lo..=hi).map(|k| libm::exp(weight * (k - lo) as f64)).collect();
    let total: f64 = w.iter().sum();
    let mut u = rng.gen_range(0.0..total);
    for (k, wk) in (lo..=hi).zip(&w) {
        if u < *wk {
            return k;
        }
        u -= wk;
    }
    hi
}

/// Random integer positive definite matrix: diagonal with probability
/// `proba_diagonal`, otherwise `B^T B + D`.
pub fn sample_pd_matrix<R: Rng + ?Sized>(n: usize, cfg: &BackwardConfig, rng: &mut R) -> Vec<Vec<i64>> {
    let max_int = cfg.base.max_int;
    let mut a = vec![vec![0i64; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = rng.gen_range(1..=max_int);
    }
    if rng.gen_bool(cfg.proba_diagonal) {
        return a;
    }
    let s = (libm::floor(libm::sqrt(max_int as f64 / n as f64)) as i64).max(1);
    let b: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-s..=s)).collect()).collect();
    for i in 0..n {
        for j in 0..n {
            a[i][j] += (0..n).map(|k| b[k][i] * b[k][j]).sum::<i64>();
        }
    }
    a
}

pub fn is_positive_definite(a: &[Vec<i64>]) -> bool {
    let rows: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    cholesky(&Mat::from_rows(&rows)).is_some()
}

/// `V_proper` with its quadratic core.
pub fn gen_v_proper<R: Rng + ?Sized>(n: usize, cfg: &BackwardConfig, rng: &mut R) -> QuadraticCore {
    let alpha = sample_pd_matrix(n, cfg, rng);
    let top = (cfg.base.max_degree / 2).max(1);
    let beta = (0..n).map(|_| rng.gen_range(1..=top)).collect();
    QuadraticCore { alpha, beta }
}

/// `f - f(0)`, with `f(0)` folded where possible.
fn centred(e: &Expr) -> Expr {
    let at0 = simplify(&e.substitute(&|_| Expr::zero()));
    simplify(&s_sub(e.clone(), at0))
}

/// One `p_i` with `p_i(0) = 0`.
fn sample_cross_fn<R: Rng + ?Sized>(n: usize, cfg: &BackwardConfig, rng: &mut R) -> Expr {
    if cfg.is_polynomial() {
        let r = cfg.root_int();
        let d = (cfg.base.max_degree / 2).max(1);
        return sample_polynomial_with(n, cfg.base.n_terms, 1, d, -r, r, rng).to_expr();
    }
    loop {
        let q = sample_expr(&cfg.base, n, rng);
        if q.substitute(&|_| Expr::zero()).eval(&[]).is_ok() {
            let p = centred(&q);
            // Constant trees centre to zero however they are written.
            if (0..n).any(|i| p.depends_on(i)) {
                return p;
            }
        }
    }
}

/// The `p_i` of `V_cross = sum p_i^2`; at least one in barrier mode.
pub fn gen_v_cross<R: Rng + ?Sized>(n: usize, cfg: &BackwardConfig, rng: &mut R) -> Vec<Expr> {
    let lo = if cfg.proper { 0 } else { 1 };
    let m = rng.gen_range(lo..=cfg.max_nb_cross_term.max(lo));
    (0..m).map(|_| sample_cross_fn(n, cfg, rng)).collect()
}

fn increasing(f: IncreasingFunc, u: Expr) -> Expr {
    // I(u) - I(0).
    match f {
        IncreasingFunc::Exp => s_sub(Expr::unary(UnaryOp::Exp, u), Expr::one()),
        IncreasingFunc::LogOnePlusSquare => Expr::unary(UnaryOp::Log, s_add(Expr::one(), s_pow(u, Num::from(2i64)))),
        IncreasingFunc::SqrtOnePlus => s_sub(Expr::unary(UnaryOp::Sqrt, s_add(Expr::one(), u)), Expr::one()),
    }
}

fn positive(f: PositiveFunc, u: Expr) -> Expr {
    match f {
        PositiveFunc::Exp => Expr::unary(UnaryOp::Exp, u),
        PositiveFunc::OnePlusCos => s_add(Expr::one(), Expr::unary(UnaryOp::Cos, u)),
        PositiveFunc::OnePlusSin => s_add(Expr::one(), Expr::unary(UnaryOp::Sin, u)),
    }
}

/// `b(xi + p) - b(xi)` at the minimiser `xi` of `b`. Both `cos` at `pi` and
/// `sin` at `-pi/2` reduce to `1 - cos(p)`, which needs no `pi` constant.
fn bounded(_: BoundedFunc, p: Expr) -> Expr {
    s_sub(Expr::one(), Expr::unary(UnaryOp::Cos, p))
}

/// Step 1b on `V_proper` and the cross functions, returning `(V, V_proper, V_cross)`.
pub fn apply_step1b<R: Rng + ?Sized>(
    core: Option<&QuadraticCore>,
    cross: &[Expr],
    cfg: &BackwardConfig,
    rng: &mut R,
) -> (Expr, Expr, Expr) {
    let transforms = cfg.mode == GenMode::NonPolynomial;
    let mut v_proper = core.map(|c| c.to_poly().to_expr()).unwrap_or_else(Expr::zero);
    if let Some(c) = core {
        if transforms && rng.gen_bool(cfg.p1c) {
            let f = *cfg.increasing_funcs.choose(rng).expect("validated");
            v_proper = increasing(f, v_proper);
        }
        if transforms && rng.gen_bool(cfg.p1m) {
            let f = *cfg.positive_funcs.choose(rng).expect("validated");
            let n = c.beta.len();
            let q = rng.gen_range(1..=n);
            let mut sigma: Vec<usize> = (0..n).collect();
            sigma.shuffle(rng);
            let h = c.restricted(&sigma[..q]).to_expr();
            v_proper = s_mul(v_proper, positive(f, h));
        }
    }
    let mut v_cross = Expr::zero();
    for p in cross {
        let term = if transforms && rng.gen_bool(cfg.p2) {
            let f = *cfg.bounded_funcs.choose(rng).expect("validated");
            bounded(f, p.clone())
        } else {
            s_pow(p.clone(), Num::from(2i64))
        };
        v_cross = s_add(v_cross, term);
    }
    let v = simplify(&s_add(v_proper.clone(), v_cross.clone()));
    (v, v_proper, v_cross)
}

/// Sample a Lyapunov function in `n` variables.
pub fn gen_lyapunov<R: Rng + ?Sized>(n: usize, cfg: &BackwardConfig, rng: &mut R) -> (Expr, LyapunovWitness) {
    if cfg.mode == GenMode::TwoNorm {
        let core = QuadraticCore {
            alpha: (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect(),
            beta: vec![1; n],
        };
        let v = core.to_poly().to_expr();
        return (
            v.clone(),
            LyapunovWitness {
                v_proper: v,
                v_cross: Expr::zero(),
                core: Some(core),
            },
        );
    }
    let core = cfg.proper.then(|| gen_v_proper(n, cfg, rng));
    let cross = gen_v_cross(n, cfg, rng);
    let (v, v_proper, v_cross) = apply_step1b(core.as_ref(), &cross, cfg, rng);
    (v, LyapunovWitness { v_proper, v_cross, core })
}

/// `p` skew fields from `grad V`: `e_{t1} = grad_{t2}`, `e_{t2} = -grad_{t1}`.
pub fn orth_fields(grad: &[Expr], tau: &[(usize, usize)]) -> Result<Vec<Vec<Expr>>, GenError> {
    let n = grad.len();
    if n < 2 && !tau.is_empty() {
        return Err(GenError::Dimension);
    }
    Ok(tau
        .iter()
        .map(|&(t1, t2)| {
            let mut e = vec![Expr::zero(); n];
            e[t1] = grad[t2].clone();
            e[t2] = s_neg(grad[t1].clone());
            e
        })
        .collect())
}

/// Ordered pairs `(t1, t2)` with `t1 != t2`, uniform.
pub fn sample_tau<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Vec<(usize, usize)> {
    (0..p)
        .map(|_| {
            let t1 = rng.gen_range(0..n);
            let mut t2 = rng.gen_range(0..n - 1);
            if t2 >= t1 {
                t2 += 1;
            }
            (t1, t2)
        })
        .collect()
}

fn sample_h<R: Rng + ?Sized>(n: usize, cfg: &BackwardConfig, rng: &mut R) -> Expr {
    let base = if cfg.is_polynomial() {
        let r = cfg.root_int();
        sample_polynomial_with(n, cfg.base.n_terms, 0, cfg.max_order_pure_poly / 2, -r, r, rng).to_expr()
    } else {
        sample_expr(&cfg.base, n, rng)
    };
    if cfg.strict {
        // c + q^2 with c >= 1 never vanishes.
        let c = Expr::int(rng.gen_range(1..=cfg.root_int()));
        let q = if cfg.is_polynomial() {
            let r = cfg.root_int();
            let d = cfg.max_order_pure_poly / 4;
            if d == 0 {
                return c;
            }
            sample_polynomial_with(n, cfg.base.n_terms, 1, d, -r, r, rng).to_expr()
        } else {
            base
        };
        return s_add(c, s_pow(q, Num::from(2i64)));
    }
    base
}

fn sample_g<R: Rng + ?Sized>(n: usize, cfg: &BackwardConfig, rng: &mut R) -> Expr {
    if cfg.is_polynomial() {
        let m = cfg.base.max_int;
        sample_polynomial_with(n, cfg.base.n_terms, 0, cfg.max_order_pure_poly, -m, m, rng).to_expr()
    } else {
        sample_expr(&cfg.base, n, rng)
    }
}

/// `f = -(h_{pi(i)}^2 dV/dx_i)_i + sum_k g_k e^k` before simplification.
pub fn build_field(grad: &[Expr], w: &SystemWitness) -> Result<Vec<Expr>, GenError> {
    let n = grad.len();
    let fields = orth_fields(grad, &w.tau)?;
    let mut f: Vec<Expr> = (0..n)
        .map(|i| s_neg(s_mul(s_pow(w.h[w.perm[i]].clone(), Num::from(2i64)), grad[i].clone())))
        .collect();
    for (g, e) in w.g.iter().zip(&fields) {
        for (fi, ei) in f.iter_mut().zip(e) {
            if !ei.is_zero() {
                *fi = s_add(fi.clone(), s_mul(g.clone(), ei.clone()));
            }
        }
    }
    Ok(f)
}

/// Build one simplified system for `V`.
pub fn assemble_f<R: Rng + ?Sized>(
    v: &Expr,
    n: usize,
    cfg: &BackwardConfig,
    rng: &mut R,
) -> Result<(Vec<Expr>, SystemWitness), GenError> {
    let grad: Vec<Expr> = (0..n).map(|i| simplify(&differentiate(v, i))).collect();
    for _ in 0..10 {
        let (k1, p) = if cfg.mode == GenMode::GradientFlow {
            (n, 0)
        } else if cfg.strict {
            (n, weighted_count(1, n, cfg.gen_weight, rng))
        } else {
            let k1 = if n == 1 { 1 } else { weighted_count(2, n, cfg.gen_weight, rng) };
            (k1, weighted_count(1, n, cfg.gen_weight, rng))
        };
        let p = if n < 2 { 0 } else { p };
        let h: Vec<Expr> = (0..n)
            .map(|i| {
                if i >= k1 {
                    Expr::zero()
                } else if cfg.mode == GenMode::GradientFlow {
                    Expr::one()
                } else {
                    sample_h(n, cfg, rng)
                }
            })
            .collect();
        let g: Vec<Expr> = (0..p).map(|_| sample_g(n, cfg, rng)).collect();
        let tau = sample_tau(n, p, rng);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        let w = SystemWitness { h, g, tau, perm, p, k1 };
        let f: Vec<Expr> = build_field(&grad, &w)?.iter().map(simplify).collect();
        if f.iter().any(|e| !e.is_zero()) {
            return Ok((f, w));
        }
    }
    Err(GenError::DegenerateSystem)
}

/// One Lyapunov function and between 1 and `multigen` distinct systems for it.
pub fn generate_group<R: Rng + ?Sized>(
    cfg: &BackwardConfig,
    group_id: u64,
    rng: &mut R,
) -> Result<Vec<SystemPair>, GenError> {
    cfg.validate()?;
    let n = cfg.base.sample_dim(rng);
    let (v, lw) = gen_lyapunov(n, cfg, rng);
    let k = rng.gen_range(1..=cfg.multigen);
    let mut out: Vec<SystemPair> = Vec::with_capacity(k);
    for _ in 0..k {
        let (system, witness) = assemble_f(&v, n, cfg, rng)?;
        if out.iter().any(|p| p.system == system) {
            continue;
        }
        out.push(SystemPair {
            system,
            lyapunov: v.clone(),
            lyapunov_witness: lw.clone(),
            witness,
            group_id,
            is_barrier: !cfg.proper,
        });
    }
    Ok(out)
}

/// `expand(grad V . f + sum_i h_{pi(i)}^2 (dV/dx_i)^2) = 0`, for polynomial pairs.
///
/// `None` when some part is not polynomial.
pub fn check_identity(pair: &SystemPair) -> Option<bool> {
    let n = pair.system.len();
    let v = expand_to_poly(&pair.lyapunov, n).ok()?;
    let mut lhs = PolyNF::zero(n);
    for (i, fi) in pair.system.iter().enumerate() {
        let fi = expand_to_poly(fi, n).ok()?;
        let dv = v.derivative(i);
        let h = expand_to_poly(&pair.witness.h[pair.witness.perm[i]], n).ok()?;
        lhs = lhs.add(&dv.mul(&fi)).add(&h.mul(&h).mul(&dv).mul(&dv));
    }
    Some(lhs.is_zero())
}
