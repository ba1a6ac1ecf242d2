//! Exact constants: integers and base-10 decimals.
//!
//! Integer arithmetic stays exact. Decimals are stored as `mantissa * 10^exponent`
//! with trailing zeros stripped from the mantissa, so the representation of a
//! value is unique. On `i128` overflow the result degrades to a 17-digit decimal.

use alloc::format;
use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;

/// A base-10 decimal `mantissa * 10^exponent` in canonical form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Decimal {
    mantissa: i128,
    exponent: i32,
}

impl Decimal {
    pub fn new(mut mantissa: i128, mut exponent: i32) -> Self {
        if mantissa == 0 {
            return Decimal { mantissa: 0, exponent: 0 };
        }
        while mantissa % 10 == 0 {
            mantissa /= 10;
            exponent += 1;
        }
        Decimal { mantissa, exponent }
    }

    pub fn mantissa(&self) -> i128 {
        self.mantissa
    }

    pub fn exponent(&self) -> i32 {
        self.exponent
    }

    /// Round `v` to `digits` significant digits.
    pub fn from_f64(v: f64, digits: usize) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Decimal::new(0, 0));
        }
        let digits = digits.clamp(1, 30);
        let s = format!("{:.*e}", digits - 1, v);
        let (m, e) = s.split_once('e')?;
        let frac_len = m.split_once('.').map(|(_, f)| f.len()).unwrap_or(0) as i32;
        let digits_only: String = m.chars().filter(|c| *c != '.').collect();
        let mantissa: i128 = digits_only.parse().ok()?;
        let exp: i32 = e.parse().ok()?;
        Some(Decimal::new(mantissa, exp - frac_len))
    }

    pub fn to_f64(&self) -> f64 {
        const POW10: [f64; 23] = [
            1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10, 1e11, 1e12, 1e13, 1e14,
            1e15, 1e16, 1e17, 1e18, 1e19, 1e20, 1e21, 1e22,
        ];
        let m = self.mantissa;
        let e = self.exponent;
        if m.unsigned_abs() < (1u128 << 53) && e.unsigned_abs() <= 22 {
            let mf = m as f64;
            return if e >= 0 {
                mf * POW10[e as usize]
            } else {
                mf / POW10[(-e) as usize]
            };
        }
        format!("{}e{}", m, e).parse().unwrap_or(f64::NAN)
    }
}

/// A constant leaf value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Num {
    Int(i128),
    Dec(Decimal),
}

impl Num {
    pub const ZERO: Num = Num::Int(0);
    pub const ONE: Num = Num::Int(1);

    pub fn int(v: i128) -> Self {
        Num::Int(v)
    }

    pub fn dec(mantissa: i128, exponent: i32) -> Self {
        Num::Dec(Decimal::new(mantissa, exponent))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Num::Int(v) => *v == 0,
            Num::Dec(d) => d.mantissa == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Num::Int(v) => *v == 1,
            Num::Dec(d) => d.mantissa == 1 && d.exponent == 0,
        }
    }

    pub fn is_int(&self) -> bool {
        matches!(self, Num::Int(_))
    }

    /// Integer value, for integers and integral decimals.
    pub fn as_integer(&self) -> Option<i128> {
        match self {
            Num::Int(v) => Some(*v),
            Num::Dec(d) if d.exponent >= 0 => {
                let scale = 10i128.checked_pow(d.exponent as u32)?;
                d.mantissa.checked_mul(scale)
            }
            Num::Dec(_) => None,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Num::Int(v) => *v < 0,
            Num::Dec(d) => d.mantissa < 0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Int(v) => *v as f64,
            Num::Dec(d) => d.to_f64(),
        }
    }

    fn as_decimal(&self) -> Decimal {
        match self {
            Num::Int(v) => Decimal::new(*v, 0),
            Num::Dec(d) => *d,
        }
    }

    fn from_float_fallback(v: f64) -> Num {
        Decimal::from_f64(v, 17).map(Num::Dec).unwrap_or(Num::ZERO)
    }

    pub fn neg(&self) -> Num {
        match self {
            Num::Int(v) => v
                .checked_neg()
                .map(Num::Int)
                .unwrap_or_else(|| Num::from_float_fallback(-(*v as f64))),
            Num::Dec(d) => Num::Dec(Decimal::new(-d.mantissa, d.exponent)),
        }
    }

    pub fn abs(&self) -> Num {
        if self.is_negative() {
            self.neg()
        } else {
            *self
        }
    }

    pub fn add(&self, other: &Num) -> Num {
        if let (Num::Int(a), Num::Int(b)) = (self, other) {
            return a
                .checked_add(*b)
                .map(Num::Int)
                .unwrap_or_else(|| Num::from_float_fallback(*a as f64 + *b as f64));
        }
        let (a, b) = (self.as_decimal(), other.as_decimal());
        let exp = a.exponent.min(b.exponent);
        let align = |d: Decimal| -> Option<i128> {
            let shift = (d.exponent - exp) as u32;
            10i128.checked_pow(shift)?.checked_mul(d.mantissa)
        };
        match (align(a), align(b)) {
            (Some(x), Some(y)) => match x.checked_add(y) {
                Some(s) => Num::Dec(Decimal::new(s, exp)),
                None => Num::from_float_fallback(self.to_f64() + other.to_f64()),
            },
            _ => Num::from_float_fallback(self.to_f64() + other.to_f64()),
        }
    }

    pub fn sub(&self, other: &Num) -> Num {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Num) -> Num {
        if let (Num::Int(a), Num::Int(b)) = (self, other) {
            return a
                .checked_mul(*b)
                .map(Num::Int)
                .unwrap_or_else(|| Num::from_float_fallback(*a as f64 * *b as f64));
        }
        let (a, b) = (self.as_decimal(), other.as_decimal());
        match a.mantissa.checked_mul(b.mantissa) {
            Some(m) => Num::Dec(Decimal::new(m, a.exponent + b.exponent)),
            None => Num::from_float_fallback(self.to_f64() * other.to_f64()),
        }
    }

    pub fn pow(&self, k: u32) -> Num {
        let mut acc = match self {
            Num::Int(_) => Num::ONE,
            Num::Dec(_) => Num::dec(1, 0),
        };
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact quotient when it has a finite decimal expansion of moderate length.
    pub fn checked_div(&self, other: &Num) -> Option<Num> {
        if other.is_zero() {
            return None;
        }
        if let (Num::Int(a), Num::Int(b)) = (self, other) {
            if a % b == 0 {
                return Some(Num::Int(a / b));
            }
        }
        let (a, b) = (self.as_decimal(), other.as_decimal());
        let mut m = a.mantissa;
        let mut shift = 0;
        while shift <= 24 {
            if m % b.mantissa == 0 {
                return Some(Num::Dec(Decimal::new(
                    m / b.mantissa,
                    a.exponent - b.exponent - shift,
                )));
            }
            m = m.checked_mul(10)?;
            shift += 1;
        }
        None
    }

    /// Parse an infix literal. Digits only give an integer; a `.` or `e` gives a decimal.
    pub fn parse_literal(s: &str) -> Option<Num> {
        if s.is_empty() {
            return None;
        }
        let (body, exp_part) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], Some(&s[i + 1..])),
            None => (s, None),
        };
        let is_decimal = body.contains('.') || exp_part.is_some();
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let mut digits = String::from(int_part);
        digits.push_str(frac_part);
        let mantissa: i128 = digits.parse().ok()?;
        if !is_decimal {
            return Some(Num::Int(mantissa));
        }
        let exp: i32 = match exp_part {
            Some(e) => e.parse().ok()?,
            None => 0,
        };
        Some(Num::Dec(Decimal::new(mantissa, exp - frac_part.len() as i32)))
    }

    pub fn cmp_value(&self, other: &Num) -> Ordering {
        let d = self.sub(other);
        if d.is_zero() {
            Ordering::Equal
        } else if d.is_negative() {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    /// Numeric equality regardless of the integer/decimal tag.
    pub fn value_eq(&self, other: &Num) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl From<i64> for Num {
    fn from(v: i64) -> Self {
        Num::Int(v as i128)
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Int(v) => write!(f, "{}", v),
            Num::Dec(d) => fmt_decimal(d, f),
        }
    }
}

fn fmt_decimal(d: &Decimal, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let neg = d.mantissa < 0;
    let digits = format!("{}", d.mantissa.unsigned_abs());
    let sign = if neg { "-" } else { "" };
    let len = digits.len() as i32;
    let e = d.exponent;
    if (0..=12).contains(&e) {
        write!(f, "{}{}", sign, digits)?;
        for _ in 0..e {
            f.write_str("0")?;
        }
        f.write_str(".0")
    } else if e < 0 && -e <= 20 {
        let point = len + e;
        if point > 0 {
            let (a, b) = digits.split_at(point as usize);
            write!(f, "{}{}.{}", sign, a, b)
        } else {
            write!(f, "{}0.", sign)?;
            for _ in 0..(-point) {
                f.write_str("0")?;
            }
            f.write_str(&digits)
        }
    } else {
        let (a, b) = digits.split_at(1);
        let sci = e + len - 1;
        if b.is_empty() {
            write!(f, "{}{}.0e{}", sign, a, sci)
        } else {
            write!(f, "{}{}.{}e{}", sign, a, b, sci)
        }
    }
}
