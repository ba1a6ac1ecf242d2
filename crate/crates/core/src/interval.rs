//! Outward-rounded interval arithmetic and natural interval extensions.
//!
//! Every operation widens its result by at least one ulp per side, which
//! covers the error of correctly rounded arithmetic and the few-ulp error of
//! `libm` transcendental functions after an extra widening step.

use core::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::expr::{BinaryOp, DomainError, Expr, UnaryOp};
use crate::num::Num;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64) -> f64 {
    x.next_down()
}

fn up(x: f64) -> f64 {
    x.next_up()
}

/// Widening for `libm` results; its functions are accurate to well under 4 ulp.
fn down4(x: f64) -> f64 {
    down(down(down(down(x))))
}

fn up4(x: f64) -> f64 {
    up(up(up(up(x))))
}

impl Interval {
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    /// Interval from bounds; NaN bounds become unbounded.
    pub fn new(lo: f64, hi: f64) -> Self {
        let lo = if lo.is_nan() { f64::NEG_INFINITY } else { lo };
        let hi = if hi.is_nan() { f64::INFINITY } else { hi };
        debug_assert!(lo <= hi, "{} > {}", lo, hi);
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    /// Interval enclosing a constant whose `f64` conversion may be inexact.
    pub fn of_num(n: &Num) -> Self {
        let v = n.to_f64();
        match n {
            Num::Int(k) if k.unsigned_abs() < (1u128 << 53) => Interval::point(v),
            _ => Interval::new(down(v), up(v)),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn mag(&self) -> f64 {
        libm::fabs(self.lo).max(libm::fabs(self.hi))
    }

    pub fn hull(&self, o: &Interval) -> Interval {
        Interval::new(self.lo.min(o.lo), self.hi.max(o.hi))
    }

    pub fn intersect(&self, o: &Interval) -> Option<Interval> {
        let lo = self.lo.max(o.lo);
        let hi = self.hi.min(o.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval::new(down(self.lo + o.lo), up(self.hi + o.hi))
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval::new(down(self.lo - o.hi), up(self.hi - o.lo))
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        // 0 * inf is taken as 0, which is exact for the real product.
        let m = |a: f64, b: f64| if a == 0.0 || b == 0.0 { 0.0 } else { a * b };
        let p = [m(self.lo, o.lo), m(self.lo, o.hi), m(self.hi, o.lo), m(self.hi, o.hi)];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(down(lo), up(hi))
    }

    pub fn div(&self, o: &Interval) -> Result<Interval, DomainError> {
        if o.contains_zero() {
            return Err(DomainError::DivisionByZero);
        }
        let inv = Interval::new(down(1.0 / o.hi), up(1.0 / o.lo));
        Ok(self.mul(&inv))
    }

    pub fn powi(&self, k: u32) -> Interval {
        if k == 0 {
            return Interval::point(1.0);
        }
        if k == 1 {
            return *self;
        }
        let p = |v: f64| crate::expr::powi(v, k as u64);
        // Repeated multiplication rounds at most k-1 times; widen proportionally.
        let widen_lo = |mut v: f64| {
            for _ in 0..k {
                v = down(v);
            }
            v
        };
        let widen_hi = |mut v: f64| {
            for _ in 0..k {
                v = up(v);
            }
            v
        };
        if k % 2 == 1 || self.lo >= 0.0 {
            Interval::new(widen_lo(p(self.lo)), widen_hi(p(self.hi)))
        } else if self.hi <= 0.0 {
            Interval::new(widen_lo(p(self.hi)), widen_hi(p(self.lo)))
        } else {
            Interval::new(0.0, widen_hi(p(self.mag())))
        }
        .clamp_nonneg_if(k % 2 == 0)
    }

    fn clamp_nonneg_if(self, even: bool) -> Interval {
        if even && self.lo < 0.0 {
            Interval::new(0.0, self.hi.max(0.0))
        } else {
            self
        }
    }

    pub fn exp(&self) -> Interval {
        Interval::new(down4(libm::exp(self.lo)).max(0.0), up4(libm::exp(self.hi)))
    }

    pub fn log(&self) -> Result<Interval, DomainError> {
        if self.lo <= 0.0 {
            return Err(DomainError::LogNonPositive);
        }
        Ok(Interval::new(down4(libm::log(self.lo)), up4(libm::log(self.hi))))
    }

    pub fn sqrt(&self) -> Result<Interval, DomainError> {
        if self.lo < 0.0 {
            return Err(DomainError::SqrtNegative);
        }
        Ok(Interval::new(
            down(libm::sqrt(self.lo)).max(0.0),
            up(libm::sqrt(self.hi)),
        ))
    }

    /// Range of `sin` using the extrema at `pi/2 + 2k pi` and `-pi/2 + 2k pi`.
    pub fn sin(&self) -> Interval {
        self.periodic(libm::sin, FRAC_PI_2, -FRAC_PI_2)
    }

    /// Range of `cos` using the extrema at `2k pi` and `pi + 2k pi`.
    pub fn cos(&self) -> Interval {
        self.periodic(libm::cos, 0.0, PI)
    }

    fn periodic(&self, f: fn(f64) -> f64, max_at: f64, min_at: f64) -> Interval {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.width() >= TAU {
            return Interval::new(-1.0, 1.0);
        }
        let a = f(self.lo);
        let b = f(self.hi);
        let mut lo = down4(a.min(b));
        let mut hi = up4(a.max(b));
        // The tolerance makes the extremum test conservative against the rounding of pi.
        let hits = |phase: f64| {
            let k = libm::ceil((self.lo - phase) / TAU - 1e-9);
            phase + k * TAU <= self.hi + 1e-9 * (1.0 + libm::fabs(self.hi))
        };
        if hits(max_at) {
            hi = 1.0;
        }
        if hits(min_at) {
            lo = -1.0;
        }
        Interval::new(lo.max(-1.0), hi.min(1.0))
    }

    pub fn tan(&self) -> Result<Interval, DomainError> {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.width() >= PI {
            return Err(DomainError::TanPole);
        }
        let k = libm::ceil((self.lo - FRAC_PI_2) / PI - 1e-9);
        if FRAC_PI_2 + k * PI <= self.hi + 1e-9 * (1.0 + libm::fabs(self.hi)) {
            return Err(DomainError::TanPole);
        }
        Ok(Interval::new(down4(libm::tan(self.lo)), up4(libm::tan(self.hi))))
    }

    /// `self ^ e` for a general exponent interval, via `exp(e log self)`.
    pub fn pow(&self, e: &Interval) -> Result<Interval, DomainError> {
        if e.lo == e.hi && e.lo == libm::trunc(e.lo) && e.lo >= 0.0 && e.lo <= 1e6 {
            return Ok(self.powi(e.lo as u32));
        }
        if e.lo == e.hi && e.lo == libm::trunc(e.lo) && e.lo < 0.0 && e.lo >= -1e6 {
            return Interval::point(1.0).div(&self.powi((-e.lo) as u32));
        }
        if self.lo < 0.0 {
            return Err(DomainError::NegativeBase);
        }
        if self.lo == 0.0 {
            if e.lo <= 0.0 {
                return Err(DomainError::DivisionByZero);
            }
            let hi = Interval::new(f64::MIN_POSITIVE, self.hi.max(f64::MIN_POSITIVE))
                .log()?
                .mul(e)
                .exp();
            return Ok(Interval::new(0.0, hi.hi));
        }
        Ok(self.log()?.mul(e).exp())
    }
}

/// Natural interval extension of `e` over `bx`.
pub fn eval_interval(e: &Expr, bx: &[Interval]) -> Result<Interval, DomainError> {
    match e {
        Expr::Const(n) => Ok(Interval::of_num(n)),
        Expr::Var(i) => bx.get(*i).copied().ok_or(DomainError::BadVariable),
        Expr::Unary(op, a) => {
            let v = eval_interval(a, bx)?;
            match op {
                UnaryOp::Exp => Ok(v.exp()),
                UnaryOp::Log => v.log(),
                UnaryOp::Sqrt => v.sqrt(),
                UnaryOp::Sin => Ok(v.sin()),
                UnaryOp::Cos => Ok(v.cos()),
                UnaryOp::Tan => v.tan(),
            }
        }
        Expr::Binary(op, a, b) => {
            if let (BinaryOp::Pow, Expr::Const(k)) = (op, &**b) {
                if let Some(k) = k.as_integer().filter(|k| (0..=1_000_000).contains(k)) {
                    return Ok(eval_interval(a, bx)?.powi(k as u32));
                }
            }
            let va = eval_interval(a, bx)?;
            let vb = eval_interval(b, bx)?;
            match op {
                BinaryOp::Add => Ok(va.add(&vb)),
                BinaryOp::Sub => Ok(va.sub(&vb)),
                BinaryOp::Mul => Ok(va.mul(&vb)),
                BinaryOp::Div => va.div(&vb),
                BinaryOp::Pow => va.pow(&vb),
            }
        }
    }
}
