//! Random expressions and polynomials.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::expr::{BinaryOp, Expr, UnaryOp};
use crate::num::{Decimal, Num};
use crate::poly::{Monomial, PolyNF};

/// Parameters shared by every sampler.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SampleConfig {
    pub min_dim: usize,
    pub max_dim: usize,
    /// Bound on the absolute value of sampled integers.
    pub max_int: i64,
    /// Significant digits of sampled decimals.
    pub precision: usize,
    /// Probability that an expression leaf is a constant rather than a variable.
    pub prob_int: f64,
    /// Probability that a constant leaf is a decimal rather than an integer.
    pub prob_float: f64,
    pub max_degree: u32,
    pub n_terms: usize,
    pub nb_ops: usize,
    pub unary_ops: Vec<UnaryOp>,
    pub binary_ops: Vec<BinaryOp>,
    /// Inclusive range of polynomial coefficients; zero is never drawn.
    pub coeff_min: i64,
    pub coeff_max: i64,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            min_dim: 2,
            max_dim: 5,
            max_int: 10,
            precision: 3,
            prob_int: 0.3,
            prob_float: 0.0,
            max_degree: 4,
            n_terms: 4,
            nb_ops: 6,
            unary_ops: vec![UnaryOp::Exp, UnaryOp::Sin, UnaryOp::Cos],
            binary_ops: vec![BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul],
            coeff_min: -10,
            coeff_max: 10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(&'static str),
}

impl SampleConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m| Err(ConfigError::Invalid(m));
        if self.min_dim < 1 {
            return bad("min_dim must be at least 1");
        }
        if self.max_dim < self.min_dim {
            return bad("max_dim must be at least min_dim");
        }
        if self.max_dim > 10 {
            return bad("at most 10 variables are supported");
        }
        if self.max_int < 1 {
            return bad("max_int must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.prob_int) || !(0.0..=1.0).contains(&self.prob_float) {
            return bad("probabilities must lie in [0, 1]");
        }
        if self.max_degree < 1 {
            return bad("max_degree must be at least 1");
        }
        if self.n_terms < 1 || self.nb_ops < 1 {
            return bad("n_terms and nb_ops must be at least 1");
        }
        if self.unary_ops.is_empty() && self.binary_ops.is_empty() {
            return bad("operator whitelist is empty");
        }
        if self.coeff_min > self.coeff_max || (self.coeff_min == 0 && self.coeff_max == 0) {
            return bad("coefficient range must contain a nonzero integer");
        }
        if self.precision < 1 || self.precision > 15 {
            return bad("precision must lie in [1, 15]");
        }
        Ok(())
    }

    pub fn sample_dim<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.gen_range(self.min_dim..=self.max_dim)
    }
}

/// Nonzero integer in `[lo, hi]`.
pub fn nonzero_in<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64) -> i64 {
    loop {
        let v = rng.gen_range(lo..=hi);
        if v != 0 {
            return v;
        }
    }
}

fn sample_const<R: Rng + ?Sized>(cfg: &SampleConfig, rng: &mut R) -> Num {
    if rng.gen_bool(cfg.prob_float) {
        let v: f64 = rng.gen_range(-(cfg.max_int as f64)..=cfg.max_int as f64);
        let d = Decimal::from_f64(v, cfg.precision).unwrap_or(Decimal::new(1, 0));
        if d.mantissa() != 0 {
            return Num::Dec(d);
        }
    }
    Num::from(nonzero_in(rng, -cfg.max_int, cfg.max_int))
}

fn sample_leaf<R: Rng + ?Sized>(cfg: &SampleConfig, n: usize, rng: &mut R) -> Expr {
    if rng.gen_bool(cfg.prob_int) {
        Expr::Const(sample_const(cfg, rng))
    } else {
        Expr::var(rng.gen_range(0..n))
    }
}

fn sample_tree<R: Rng + ?Sized>(cfg: &SampleConfig, n: usize, k: usize, rng: &mut R) -> Expr {
    if k == 0 {
        return sample_leaf(cfg, n, rng);
    }
    let n_un = cfg.unary_ops.len();
    let n_bin = cfg.binary_ops.len();
    let pick = rng.gen_range(0..n_un + n_bin);
    if pick < n_un {
        let op = cfg.unary_ops[pick];
        return Expr::unary(op, sample_tree(cfg, n, k - 1, rng));
    }
    match cfg.binary_ops[pick - n_un] {
        BinaryOp::Pow => {
            let base = sample_tree(cfg, n, k - 1, rng);
            Expr::pow(base, rng.gen_range(2..=4))
        }
        op => {
            let left = rng.gen_range(0..k);
            let a = sample_tree(cfg, n, left, rng);
            let b = sample_tree(cfg, n, k - 1 - left, rng);
            Expr::binary(op, a, b)
        }
    }
}

/// Random tree over `x0..x{n-1}` with between 1 and `nb_ops` operator nodes.
pub fn sample_expr<R: Rng + ?Sized>(cfg: &SampleConfig, n: usize, rng: &mut R) -> Expr {
    let k = rng.gen_range(1..=cfg.nb_ops);
    sample_tree(cfg, n, k, rng)
}

/// Random monomial of total degree `d` in `n` variables.
pub fn sample_monomial<R: Rng + ?Sized>(n: usize, d: u32, rng: &mut R) -> Monomial {
    let mut e = vec![0u32; n];
    for _ in 0..d {
        e[rng.gen_range(0..n)] += 1;
    }
    Monomial::new(e)
}

/// Random nonzero polynomial with no constant term.
///
/// At most `n_terms` monomials, each of degree in `[1, max_degree]`, with
/// coefficients in `[coeff_min, coeff_max] \ {0}`.
pub fn sample_polynomial<R: Rng + ?Sized>(cfg: &SampleConfig, n: usize, rng: &mut R) -> PolyNF {
    sample_polynomial_with(n, cfg.n_terms, 1, cfg.max_degree, cfg.coeff_min, cfg.coeff_max, rng)
}

pub fn sample_polynomial_with<R: Rng + ?Sized>(
    n: usize,
    n_terms: usize,
    min_degree: u32,
    max_degree: u32,
    coeff_min: i64,
    coeff_max: i64,
    rng: &mut R,
) -> PolyNF {
    loop {
        let t = rng.gen_range(1..=n_terms);
        let mut p = PolyNF::zero(n);
        for _ in 0..t {
            // Distinct monomials keep every coefficient inside the range.
            for _ in 0..20 {
                let d = rng.gen_range(min_degree..=max_degree);
                let m = sample_monomial(n, d, rng);
                if p.coeff(&m).is_zero() {
                    p.add_term(m, Num::from(nonzero_in(rng, coeff_min, coeff_max)));
                    break;
                }
            }
        }
        if !p.is_zero() {
            return p;
        }
    }
}
