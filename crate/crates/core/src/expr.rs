//! Immutable symbolic expression trees.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::num::Num;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum UnaryOp {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Tan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 6] = [
        UnaryOp::Exp,
        UnaryOp::Log,
        UnaryOp::Sqrt,
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Tan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        UnaryOp::ALL.into_iter().find(|op| op.name() == s)
    }

    pub fn apply(self, v: f64) -> Result<f64, DomainError> {
        let r = match self {
            UnaryOp::Exp => libm::exp(v),
            UnaryOp::Log => {
                if v <= 0.0 {
                    return Err(DomainError::LogNonPositive);
                }
                libm::log(v)
            }
            UnaryOp::Sqrt => {
                if v < 0.0 {
                    return Err(DomainError::SqrtNegative);
                }
                libm::sqrt(v)
            }
            UnaryOp::Sin => libm::sin(v),
            UnaryOp::Cos => libm::cos(v),
            UnaryOp::Tan => {
                if libm::cos(v) == 0.0 {
                    return Err(DomainError::TanPole);
                }
                libm::tan(v)
            }
        };
        finite(r)
    }
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 5] = [
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Div,
        BinaryOp::Pow,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
            BinaryOp::Pow => 3,
        }
    }

    pub fn apply(self, a: f64, b: f64) -> Result<f64, DomainError> {
        let r = match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => {
                if b == 0.0 {
                    return Err(DomainError::DivisionByZero);
                }
                a / b
            }
            BinaryOp::Pow => pow_f64(a, b)?,
        };
        finite(r)
    }
}

/// Evaluation left the domain of an operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("log of a non-positive value")]
    LogNonPositive,
    #[error("sqrt of a negative value")]
    SqrtNegative,
    #[error("division by zero")]
    DivisionByZero,
    #[error("tan evaluated at a pole")]
    TanPole,
    #[error("non-integer power of a negative value")]
    NegativeBase,
    #[error("non-finite intermediate value")]
    NonFinite,
    #[error("variable index out of range")]
    BadVariable,
}

fn finite(v: f64) -> Result<f64, DomainError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(DomainError::NonFinite)
    }
}

pub(crate) fn powi(mut base: f64, mut k: u64) -> f64 {
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}

fn pow_f64(a: f64, b: f64) -> Result<f64, DomainError> {
    if b == libm::trunc(b) && libm::fabs(b) < 1e9 {
        if b >= 0.0 {
            return Ok(powi(a, b as u64));
        }
        if a == 0.0 {
            return Err(DomainError::DivisionByZero);
        }
        return Ok(1.0 / powi(a, (-b) as u64));
    }
    if a < 0.0 {
        return Err(DomainError::NegativeBase);
    }
    if a == 0.0 && b < 0.0 {
        return Err(DomainError::DivisionByZero);
    }
    Ok(libm::pow(a, b))
}

/// Symbolic expression over variables `x0..x{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Num),
    Var(usize),
    Unary(UnaryOp, Arc<Expr>),
    Binary(BinaryOp, Arc<Expr>, Arc<Expr>),
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Const(Num::from(v))
    }

    pub fn num(n: Num) -> Expr {
        Expr::Const(n)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn zero() -> Expr {
        Expr::Const(Num::ZERO)
    }

    pub fn one() -> Expr {
        Expr::Const(Num::ONE)
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Expr {
        Expr::Unary(op, Arc::new(e))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Arc::new(a), Arc::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Div, a, b)
    }

    pub fn pow(a: Expr, k: u32) -> Expr {
        Expr::binary(BinaryOp::Pow, a, Expr::Const(Num::Int(k as i128)))
    }

    pub fn as_const(&self) -> Option<&Num> {
        match self {
            Expr::Const(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(n) if n.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(n) if n.is_one())
    }

    /// Sum of a list, left-associated; empty sums are zero.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut it = terms.into_iter();
        match it.next() {
            None => Expr::zero(),
            Some(first) => it.fold(first, Expr::add),
        }
    }

    /// Number of internal operator nodes.
    pub fn n_ops(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Unary(_, a) => 1 + a.n_ops(),
            Expr::Binary(_, a, b) => 1 + a.n_ops() + b.n_ops(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.n_nodes(),
            Expr::Binary(_, a, b) => 1 + a.n_nodes() + b.n_nodes(),
        }
    }

    /// Smallest dimension `n` such that every variable index is `< n`.
    pub fn dimension(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Unary(_, a) => a.dimension(),
            Expr::Binary(_, a, b) => a.dimension().max(b.dimension()),
        }
    }

    pub fn depends_on(&self, i: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(j) => *j == i,
            Expr::Unary(_, a) => a.depends_on(i),
            Expr::Binary(_, a, b) => a.depends_on(i) || b.depends_on(i),
        }
    }

    pub fn contains_unary(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Unary(..) => true,
            Expr::Binary(_, a, b) => a.contains_unary() || b.contains_unary(),
        }
    }

    /// Replace every variable with the given expression.
    pub fn substitute(&self, f: &dyn Fn(usize) -> Expr) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(i) => f(*i),
            Expr::Unary(op, a) => Expr::unary(*op, a.substitute(f)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.substitute(f), b.substitute(f)),
        }
    }

    /// Value at `x`. Fails when the point is outside the domain of some operator.
    pub fn eval(&self, x: &[f64]) -> Result<f64, DomainError> {
        match self {
            Expr::Const(n) => Ok(n.to_f64()),
            Expr::Var(i) => x.get(*i).copied().ok_or(DomainError::BadVariable),
            Expr::Unary(op, a) => op.apply(a.eval(x)?),
            Expr::Binary(op, a, b) => op.apply(a.eval(x)?, b.eval(x)?),
        }
    }

    /// Value at `x` together with the scale of its floating-point rounding error.
    ///
    /// The error of `eval` is about `f64::EPSILON` times the magnitude. Errors
    /// are propagated through each operation by its derivative, so `sin` of a
    /// large argument keeps the argument's scale. For a polynomial the magnitude
    /// is `sum |c_k| |x^a_k|`.
    pub fn eval_with_magnitude(&self, x: &[f64]) -> Result<(f64, f64), DomainError> {
        match self {
            Expr::Const(n) => {
                let v = n.to_f64();
                Ok((v, libm::fabs(v)))
            }
            Expr::Var(i) => {
                let v = x.get(*i).copied().ok_or(DomainError::BadVariable)?;
                Ok((v, libm::fabs(v)))
            }
            Expr::Unary(op, a) => {
                let (va, ma) = a.eval_with_magnitude(x)?;
                let v = op.apply(va)?;
                let av = libm::fabs(v);
                let m = match op {
                    UnaryOp::Sin | UnaryOp::Cos => ma.max(1.0),
                    UnaryOp::Exp => av * (1.0 + ma),
                    UnaryOp::Log => av + scaled(ma, libm::fabs(va)),
                    UnaryOp::Sqrt => av + scaled(ma, 2.0 * av),
                    UnaryOp::Tan => av + (1.0 + v * v) * ma,
                };
                Ok((v, m))
            }
            Expr::Binary(op, a, b) => {
                let (va, ma) = a.eval_with_magnitude(x)?;
                let (vb, mb) = b.eval_with_magnitude(x)?;
                let v = op.apply(va, vb)?;
                let m = match op {
                    BinaryOp::Add | BinaryOp::Sub => ma + mb,
                    BinaryOp::Mul => ma * mb,
                    BinaryOp::Div => scaled(ma + libm::fabs(v) * mb, libm::fabs(vb)),
                    BinaryOp::Pow => {
                        let m = op.apply(ma, vb).unwrap_or(libm::fabs(v));
                        libm::fabs(m).max(libm::fabs(v))
                    }
                };
                Ok((v, m))
            }
        }
    }
}

/// `num / den` with `0 / 0 = 0`: an exact zero carries no error.
fn scaled(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl From<Num> for Expr {
    fn from(n: Num) -> Self {
        Expr::Const(n)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(n) => write!(f, "{}", n),
            Expr::Var(i) => write!(f, "x{}", i),
            Expr::Unary(op, a) => write!(f, "{}({})", op.name(), a),
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                let left_parens = match &**a {
                    Expr::Binary(lop, ..) => {
                        lop.precedence() < p || (*op == BinaryOp::Pow && lop.precedence() <= p)
                    }
                    Expr::Const(n) => *op == BinaryOp::Pow && n.is_negative(),
                    _ => false,
                };
                let right_parens = match &**b {
                    Expr::Binary(rop, ..) => {
                        rop.precedence() < p || (rop.precedence() == p && *op != BinaryOp::Pow)
                    }
                    _ => false,
                };
                if left_parens {
                    write!(f, "({})", a)?;
                } else {
                    write!(f, "{}", a)?;
                }
                match op {
                    BinaryOp::Add | BinaryOp::Sub => write!(f, " {} ", op.symbol())?,
                    _ => write!(f, "{}", op.symbol())?,
                }
                if right_parens {
                    write!(f, "({})", b)
                } else {
                    write!(f, "{}", b)
                }
            }
        }
    }
}

/// A dynamical system `dx/dt = f(x)`, one expression per coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct System {
    pub equations: Vec<Expr>,
}

impl System {
    pub fn new(equations: Vec<Expr>) -> Self {
        System { equations }
    }

    pub fn dim(&self) -> usize {
        self.equations.len()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, DomainError> {
        self.equations.iter().map(|e| e.eval(x)).collect()
    }
}
