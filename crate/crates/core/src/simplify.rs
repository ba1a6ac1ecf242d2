//! Expansion plus constant folding.
//!
//! Polynomial subtrees are replaced by their expanded normal form. Everything
//! else keeps its structure apart from folding constants and the identities
//! `e+0`, `e*1`, `e*0`, `e^1`, `e^0`. No trigonometric or rational rewriting.

use crate::diff::{s_add, s_div, s_mul, s_pow, s_sub};
use crate::expr::{BinaryOp, Expr, UnaryOp};
use crate::num::Num;
use crate::poly::{expand_to_poly, is_polynomial};

pub fn simplify(e: &Expr) -> Expr {
    if is_polynomial(e) {
        return normal_form(e);
    }
    let rebuilt = match e {
        Expr::Const(_) | Expr::Var(_) => return e.clone(),
        Expr::Unary(op, a) => fold_unary(*op, simplify(a)),
        Expr::Binary(op, a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            match op {
                BinaryOp::Add => s_add(a, b),
                BinaryOp::Sub => s_sub(a, b),
                BinaryOp::Mul => s_mul(a, b),
                BinaryOp::Div => s_div(a, b),
                BinaryOp::Pow => match b.as_const() {
                    Some(k) if k.as_integer().is_some_and(|k| k >= 0) => s_pow(a, *k),
                    _ => Expr::binary(BinaryOp::Pow, a, b),
                },
            }
        }
    };
    if is_polynomial(&rebuilt) {
        normal_form(&rebuilt)
    } else {
        rebuilt
    }
}

fn normal_form(e: &Expr) -> Expr {
    match expand_to_poly(e, e.dimension()) {
        Ok(p) => p.to_expr(),
        Err(_) => e.clone(),
    }
}

fn fold_unary(op: UnaryOp, a: Expr) -> Expr {
    if let Some(c) = a.as_const() {
        let folded = match op {
            UnaryOp::Exp | UnaryOp::Cos if c.is_zero() => Some(Num::ONE),
            UnaryOp::Sin | UnaryOp::Tan | UnaryOp::Sqrt if c.is_zero() => Some(Num::ZERO),
            UnaryOp::Log | UnaryOp::Sqrt if c.is_one() => Some(Num::from(i64::from(
                matches!(op, UnaryOp::Sqrt),
            ))),
            _ => None,
        };
        if let Some(v) = folded {
            return Expr::Const(v);
        }
    }
    Expr::unary(op, a)
}
