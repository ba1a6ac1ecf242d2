//! Symbolic differentiation.

use alloc::vec::Vec;

use crate::expr::{BinaryOp, Expr, UnaryOp};
use crate::num::Num;

// Constructors that fold identities with 0 and 1 and constant products. They
// keep derivatives small; `simplify` does the rest.

pub(crate) fn s_add(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::Const(x.add(y)),
        (Some(x), _) if x.is_zero() => b,
        (_, Some(y)) if y.is_zero() => a,
        _ => Expr::add(a, b),
    }
}

pub(crate) fn s_sub(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::Const(x.sub(y)),
        (_, Some(y)) if y.is_zero() => a,
        (Some(x), _) if x.is_zero() => s_neg(b),
        _ => Expr::sub(a, b),
    }
}

pub(crate) fn s_mul(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::Const(x.mul(y)),
        (Some(x), _) if x.is_zero() => Expr::zero(),
        (_, Some(y)) if y.is_zero() => Expr::zero(),
        (Some(x), _) if x.is_one() => b,
        (_, Some(y)) if y.is_one() => a,
        (_, Some(_)) => s_mul(b, a),
        (Some(x), _) => match &b {
            // c1 * (c2 * e) = (c1 c2) * e
            Expr::Binary(BinaryOp::Mul, l, r) if l.as_const().is_some() => {
                s_mul(Expr::Const(x.mul(l.as_const().unwrap())), (**r).clone())
            }
            _ => Expr::mul(a, b),
        },
        _ => Expr::mul(a, b),
    }
}

pub(crate) fn s_div(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        return Expr::zero();
    }
    if b.is_one() {
        return a;
    }
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        if let Some(q) = x.checked_div(y) {
            return Expr::Const(q);
        }
    }
    Expr::div(a, b)
}

pub(crate) fn s_neg(a: Expr) -> Expr {
    s_mul(Expr::int(-1), a)
}

pub(crate) fn s_pow(a: Expr, k: Num) -> Expr {
    if k.is_zero() {
        return Expr::one();
    }
    if k.is_one() {
        return a;
    }
    if let (Some(x), Some(ki)) = (a.as_const(), k.as_integer()) {
        if (0..=64).contains(&ki) {
            return Expr::Const(x.pow(ki as u32));
        }
    }
    Expr::binary(BinaryOp::Pow, a, Expr::Const(k))
}

/// Exact partial derivative with respect to `x_i`.
pub fn differentiate(e: &Expr, i: usize) -> Expr {
    if !e.depends_on(i) {
        return Expr::zero();
    }
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(j) => {
            if *j == i {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Unary(op, a) => {
            let u = (**a).clone();
            let du = differentiate(a, i);
            let outer = match op {
                UnaryOp::Exp => e.clone(),
                UnaryOp::Log => return s_div(du, u),
                UnaryOp::Sqrt => return s_div(du, s_mul(Expr::int(2), e.clone())),
                UnaryOp::Sin => Expr::unary(UnaryOp::Cos, u),
                UnaryOp::Cos => s_neg(Expr::unary(UnaryOp::Sin, u)),
                UnaryOp::Tan => s_add(Expr::one(), Expr::pow(e.clone(), 2)),
            };
            s_mul(du, outer)
        }
        Expr::Binary(op, a, b) => {
            let (ua, ub) = ((**a).clone(), (**b).clone());
            match op {
                BinaryOp::Add => s_add(differentiate(a, i), differentiate(b, i)),
                BinaryOp::Sub => s_sub(differentiate(a, i), differentiate(b, i)),
                BinaryOp::Mul => s_add(
                    s_mul(differentiate(a, i), ub),
                    s_mul(ua, differentiate(b, i)),
                ),
                BinaryOp::Div => {
                    let num = s_sub(
                        s_mul(differentiate(a, i), ub.clone()),
                        s_mul(ua, differentiate(b, i)),
                    );
                    s_div(num, Expr::pow(ub, 2))
                }
                BinaryOp::Pow => {
                    if let Expr::Const(k) = &**b {
                        // d(u^k) = k u^(k-1) u'
                        let km1 = k.sub(&Num::ONE);
                        return s_mul(
                            s_mul(Expr::Const(*k), differentiate(a, i)),
                            s_pow(ua, km1),
                        );
                    }
                    // d(u^v) = u^v (v' log u + v u'/u)
                    let t1 = s_mul(differentiate(b, i), Expr::unary(UnaryOp::Log, ua.clone()));
                    let t2 = s_div(s_mul(ub, differentiate(a, i)), ua);
                    s_mul(e.clone(), s_add(t1, t2))
                }
            }
        }
    }
}

pub fn gradient(e: &Expr, n: usize) -> Vec<Expr> {
    (0..n).map(|i| differentiate(e, i)).collect()
}

/// `sum_i grad_i * f_i`.
pub fn lie_derivative(v: &Expr, f: &[Expr]) -> Expr {
    let mut acc = Expr::zero();
    for (i, fi) in f.iter().enumerate() {
        acc = s_add(acc, s_mul(differentiate(v, i), fi.clone()));
    }
    acc
}
