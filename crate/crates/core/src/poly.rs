//! Sparse multivariate polynomials in canonical normal form.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::expr::{BinaryOp, Expr};
use crate::num::Num;

/// Exponent vector, ordered graded-lexicographically.
///
/// Field order matters: the derived `Ord` compares total degree first, then
/// exponents lexicographically, so `x0^2 > x0*x1 > x1^2 > x0 > x1 > 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Monomial {
    degree: u32,
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial {
            degree: exps.iter().sum(),
            exps,
        }
    }

    pub fn one(n: usize) -> Self {
        Monomial::new(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial::new(e)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn is_constant(&self) -> bool {
        self.degree == 0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::new(self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when every exponent of `other` is at most that of `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut e = Vec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(&other.exps) {
            e.push(a.checked_sub(*b)?);
        }
        Some(Monomial::new(e))
    }

    pub fn is_even(&self) -> bool {
        self.exps.iter().all(|e| e % 2 == 0)
    }

    /// Halve every exponent; `None` unless all are even.
    pub fn half(&self) -> Option<Monomial> {
        if !self.is_even() {
            return None;
        }
        Some(Monomial::new(self.exps.iter().map(|e| e / 2).collect()))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exps
            .iter()
            .zip(x)
            .map(|(&k, &v)| crate::expr::powi(v, k as u64))
            .product()
    }

    pub fn to_expr(&self) -> Option<Expr> {
        self.to_expr_with(None)
    }

    /// Left-associated product `c * x_i^a * x_j^b ...`, starting from `c` when given.
    pub fn to_expr_with(&self, coeff: Option<Expr>) -> Option<Expr> {
        let mut acc: Option<Expr> = coeff;
        for (i, &k) in self.exps.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let f = if k == 1 {
                Expr::var(i)
            } else {
                Expr::pow(Expr::var(i), k)
            };
            acc = Some(match acc {
                None => f,
                Some(a) => Expr::mul(a, f),
            });
        }
        acc
    }
}

/// Coefficient ring for `Poly`.
pub trait Coeff: Clone + Debug + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// Canonical representative of the value.
    fn normalize(self) -> Self {
        self
    }
}

impl Coeff for Num {
    fn zero() -> Self {
        Num::ZERO
    }
    fn one() -> Self {
        Num::ONE
    }
    fn is_zero(&self) -> bool {
        Num::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        Num::add(self, o).normalize()
    }
    fn mul(&self, o: &Self) -> Self {
        Num::mul(self, o).normalize()
    }
    fn neg(&self) -> Self {
        Num::neg(self)
    }
    fn to_f64(&self) -> f64 {
        Num::to_f64(self)
    }
    /// Integral decimals become integers so equal values compare equal.
    fn normalize(self) -> Self {
        match self {
            Num::Dec(_) => self.as_integer().map(Num::Int).unwrap_or(self),
            Num::Int(_) => self,
        }
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Polynomial in `nvars` variables. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<C: Coeff> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

pub type PolyNF = Poly<Num>;

/// The expression is not a polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("expression is not a polynomial")]
pub struct NotPolynomial;

impl<C: Coeff> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(nvars, Monomial::one(nvars), c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(nvars, Monomial::var(nvars, i), C::one())
    }

    pub fn monomial(nvars: usize, m: Monomial, c: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(m, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, C)>>(nvars: usize, terms: I) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().next_back().map(|m| m.degree()).unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c.normalize());
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &C) -> Self {
        let mut r = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            r.add_term(m.clone(), c.mul(k));
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                r.add_term(ma.mul(mb), ca.mul(cb));
            }
        }
        r
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.nvars, C::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self, i: usize) -> Self
    where
        C: From<u32>,
    {
        let mut r = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let k = m.exps()[i];
            if k == 0 {
                continue;
            }
            let mut e = m.exps().to_vec();
            e[i] -= 1;
            r.add_term(Monomial::new(e), c.mul(&C::from(k)));
        }
        r
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c.to_f64() * m.eval(x)).sum()
    }

    pub fn to_f64_poly(&self) -> Poly<f64> {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.to_f64()))
                .filter(|(_, c)| *c != 0.0)
                .collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(|c| libm::fabs(c.to_f64()))
            .fold(0.0, f64::max)
    }

    /// Substitute `x_i = 0` for every variable, i.e. the constant term.
    pub fn constant_term(&self) -> C {
        self.coeff(&Monomial::one(self.nvars))
    }
}

impl From<u32> for Num {
    fn from(v: u32) -> Self {
        Num::Int(v as i128)
    }
}

impl PolyNF {
    /// Canonical expression: terms in descending graded-lex order, left-associated.
    pub fn to_expr(&self) -> Expr {
        let mut acc: Option<Expr> = None;
        for (m, c) in self.terms.iter().rev() {
            acc = Some(match acc {
                None => term_expr(m, c),
                Some(a) if c.is_negative() => Expr::sub(a, term_expr(m, &c.neg())),
                Some(a) => Expr::add(a, term_expr(m, c)),
            });
        }
        acc.unwrap_or_else(Expr::zero)
    }

    pub fn is_integer(&self) -> bool {
        self.terms.values().all(|c| c.is_int())
    }
}

fn term_expr(m: &Monomial, c: &Num) -> Expr {
    if m.is_constant() {
        Expr::Const(*c)
    } else if c.is_one() {
        m.to_expr().unwrap_or_else(Expr::one)
    } else {
        m.to_expr_with(Some(Expr::Const(*c))).unwrap_or_else(Expr::one)
    }
}

/// Largest syntactic degree accepted by `expand_to_poly`.
///
/// The bound is taken on the tree (`deg(a^k) = k deg(a)`, no cancellation),
/// so nested powers cannot sneak past it.
pub const MAX_EXPAND_DEGREE: u64 = 64;

/// Degree bound of a polynomial expression, `None` when it is not one.
fn degree_bound(e: &Expr) -> Option<u64> {
    match e {
        Expr::Const(_) => Some(0),
        Expr::Var(_) => Some(1),
        Expr::Unary(..) => None,
        Expr::Binary(op, a, b) => match op {
            BinaryOp::Add | BinaryOp::Sub => Some(degree_bound(a)?.max(degree_bound(b)?)),
            BinaryOp::Mul => Some(degree_bound(a)?.saturating_add(degree_bound(b)?)),
            BinaryOp::Div => None,
            BinaryOp::Pow => {
                let k = match &**b {
                    Expr::Const(k) => k.as_integer()?,
                    _ => return None,
                };
                let k = u64::try_from(k).ok()?;
                Some(degree_bound(a)?.saturating_mul(k))
            }
        },
    }
}

/// Expand an expression into normal form over `nvars` variables.
pub fn expand_to_poly(e: &Expr, nvars: usize) -> Result<PolyNF, NotPolynomial> {
    if !is_polynomial(e) {
        return Err(NotPolynomial);
    }
    expand_unchecked(e, nvars)
}

fn expand_unchecked(e: &Expr, nvars: usize) -> Result<PolyNF, NotPolynomial> {
    match e {
        Expr::Const(c) => Ok(PolyNF::constant(nvars, *c)),
        Expr::Var(i) if *i < nvars => Ok(PolyNF::var(nvars, *i)),
        Expr::Binary(op, a, b) => {
            let pa = expand_unchecked(a, nvars)?;
            match op {
                BinaryOp::Add => Ok(pa.add(&expand_unchecked(b, nvars)?)),
                BinaryOp::Sub => Ok(pa.sub(&expand_unchecked(b, nvars)?)),
                BinaryOp::Mul => Ok(pa.mul(&expand_unchecked(b, nvars)?)),
                _ => {
                    // Pow with an integer exponent, checked by `is_polynomial`.
                    let k = b.as_const().and_then(Num::as_integer).ok_or(NotPolynomial)?;
                    Ok(pa.pow(k as u32))
                }
            }
        }
        _ => Err(NotPolynomial),
    }
}

/// True when `e` is a polynomial expression of degree bound at most
/// `MAX_EXPAND_DEGREE`. `expand_to_poly` may still reject an out-of-range variable.
pub fn is_polynomial(e: &Expr) -> bool {
    degree_bound(e).is_some_and(|d| d <= MAX_EXPAND_DEGREE)
}

/// All monomials in `n` variables with total degree in `lo..=hi`, ascending graded-lex.
pub fn monomials_of_degree(n: usize, lo: u32, hi: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in lo..=hi {
        let mut cur = vec![0u32; n];
        compositions(n, d, 0, &mut cur, &mut out);
    }
    out.sort();
    out
}

fn compositions(n: usize, left: u32, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if n == 0 {
        if left == 0 {
            out.push(Monomial::new(Vec::new()));
        }
        return;
    }
    if i == n - 1 {
        cur[i] = left;
        out.push(Monomial::new(cur.clone()));
        cur[i] = 0;
        return;
    }
    for k in 0..=left {
        cur[i] = k;
        compositions(n, left - k, i + 1, cur, out);
    }
    cur[i] = 0;
}
