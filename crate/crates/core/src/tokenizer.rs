//! Prefix-notation tokens for expressions and systems.
//!
//! Integers are a sign token followed by base-1000 limbs, most significant
//! first. Decimals are a mantissa integer, the `10^` marker and a signed
//! exponent. Operators and sign tokens are distinct symbols, so `add` never
//! collides with the `+` sign.
//!
//! Inside expressions a nonnegative constant whose mantissa fits one limb
//! drops its `+` sign, unless the previous token closed a signed digit run
//! (a following bare limb would be absorbed by it). Decoding therefore reads
//! an unsigned leaf as exactly one limb and a signed leaf greedily.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{BinaryOp, Expr, System, UnaryOp};
use crate::num::{Decimal, Num};

pub const MAX_VARS: usize = 10;
pub const BASE: i128 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Pad,
    Bos,
    Eos,
    Unk,
    Op(BinaryOp),
    Func(UnaryOp),
    Var(u8),
    Plus,
    Minus,
    Exp10,
    Sep,
    Digit(u16),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("unexpected end of tokens at position {position}")]
    Truncated { position: usize },
    #[error("unexpected token at position {position}")]
    Unexpected { position: usize },
    #[error("trailing tokens from position {position}")]
    Trailing { position: usize },
    #[error("integer overflow at position {position}")]
    Overflow { position: usize },
    #[error("unknown token {text:?} at position {position}")]
    UnknownToken { position: usize, text: String },
}

impl DecodeError {
    pub fn position(&self) -> usize {
        match self {
            DecodeError::Truncated { position }
            | DecodeError::Unexpected { position }
            | DecodeError::Trailing { position }
            | DecodeError::Overflow { position }
            | DecodeError::UnknownToken { position, .. } => *position,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("variable x{0} is outside the vocabulary")]
    VariableOutOfVocab(usize),
}

impl Token {
    pub fn name(&self) -> String {
        use alloc::string::ToString;
        match self {
            Token::Pad => "<PAD>".into(),
            Token::Bos => "<BOS>".into(),
            Token::Eos => "<EOS>".into(),
            Token::Unk => "<UNK>".into(),
            Token::Op(op) => match op {
                BinaryOp::Add => "add",
                BinaryOp::Sub => "sub",
                BinaryOp::Mul => "mul",
                BinaryOp::Div => "div",
                BinaryOp::Pow => "pow",
            }
            .into(),
            Token::Func(op) => op.name().into(),
            Token::Var(i) => alloc::format!("x{}", i),
            Token::Plus => "+".into(),
            Token::Minus => "-".into(),
            Token::Exp10 => "10^".into(),
            Token::Sep => "SEP".into(),
            Token::Digit(d) => d.to_string(),
        }
    }

    pub fn from_name(s: &str) -> Option<Token> {
        Some(match s {
            "<PAD>" => Token::Pad,
            "<BOS>" => Token::Bos,
            "<EOS>" => Token::Eos,
            "<UNK>" => Token::Unk,
            "add" => Token::Op(BinaryOp::Add),
            "sub" => Token::Op(BinaryOp::Sub),
            "mul" => Token::Op(BinaryOp::Mul),
            "div" => Token::Op(BinaryOp::Div),
            "pow" => Token::Op(BinaryOp::Pow),
            "+" => Token::Plus,
            "-" => Token::Minus,
            "10^" => Token::Exp10,
            "SEP" => Token::Sep,
            _ => {
                if let Some(op) = UnaryOp::from_name(s) {
                    return Some(Token::Func(op));
                }
                if let Some(d) = s.strip_prefix('x') {
                    let i: u8 = d.parse().ok()?;
                    return ((i as usize) < MAX_VARS && d == alloc::format!("{}", i))
                        .then_some(Token::Var(i));
                }
                let d: u16 = s.parse().ok()?;
                if d < BASE as u16 && s == alloc::format!("{}", d) {
                    Token::Digit(d)
                } else {
                    return None;
                }
            }
        })
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Every token in id order: specials, operators, functions, variables, markers, digits.
pub fn vocabulary() -> Vec<Token> {
    let mut v = alloc::vec![Token::Pad, Token::Bos, Token::Eos, Token::Unk];
    v.extend(BinaryOp::ALL.iter().map(|&op| Token::Op(op)));
    v.extend(UnaryOp::ALL.iter().map(|&op| Token::Func(op)));
    v.extend((0..MAX_VARS as u8).map(Token::Var));
    v.extend([Token::Plus, Token::Minus, Token::Exp10, Token::Sep]);
    v.extend((0..BASE as u16).map(Token::Digit));
    v
}

fn limbs(mut v: u128) -> Vec<Token> {
    if v == 0 {
        return alloc::vec![Token::Digit(0)];
    }
    let mut out = Vec::new();
    while v > 0 {
        out.push(Token::Digit((v % BASE as u128) as u16));
        v /= BASE as u128;
    }
    out.reverse();
    out
}

/// Sign token then base-1000 limbs.
pub fn encode_int(k: i128) -> Vec<Token> {
    let mut out = alloc::vec![if k < 0 { Token::Minus } else { Token::Plus }];
    out.extend(limbs(k.unsigned_abs()));
    out
}

/// Mantissa, `10^`, exponent.
pub fn encode_float(d: &Decimal) -> Vec<Token> {
    let mut out = encode_int(d.mantissa());
    out.push(Token::Exp10);
    out.extend(encode_int(d.exponent() as i128));
    out
}

struct Encoder {
    out: Vec<Token>,
    /// The last emitted token closed a sign-led digit run.
    open_run: bool,
}

impl Encoder {
    fn push(&mut self, t: Token) {
        self.out.push(t);
        self.open_run = false;
    }

    fn signed(&mut self, k: i128) {
        self.out.extend(encode_int(k));
        self.open_run = true;
    }

    fn mantissa(&mut self, m: i128) {
        if m >= 0 && m < BASE && !self.open_run {
            self.push(Token::Digit(m as u16));
        } else {
            self.signed(m);
        }
    }

    fn expr(&mut self, e: &Expr) -> Result<(), EncodeError> {
        match e {
            Expr::Const(Num::Int(k)) => self.mantissa(*k),
            Expr::Const(Num::Dec(d)) => {
                self.mantissa(d.mantissa());
                self.push(Token::Exp10);
                self.signed(d.exponent() as i128);
            }
            Expr::Var(i) => {
                if *i >= MAX_VARS {
                    return Err(EncodeError::VariableOutOfVocab(*i));
                }
                self.push(Token::Var(*i as u8));
            }
            Expr::Unary(op, a) => {
                self.push(Token::Func(*op));
                self.expr(a)?;
            }
            Expr::Binary(op, a, b) => {
                self.push(Token::Op(*op));
                self.expr(a)?;
                self.expr(b)?;
            }
        }
        Ok(())
    }
}

pub fn encode_expr(e: &Expr) -> Result<Vec<Token>, EncodeError> {
    let mut enc = Encoder {
        out: Vec::new(),
        open_run: false,
    };
    enc.expr(e)?;
    Ok(enc.out)
}

/// Equations in prefix form joined by `SEP`.
pub fn encode_system(s: &System) -> Result<Vec<Token>, EncodeError> {
    let mut out = Vec::new();
    for (i, e) in s.equations.iter().enumerate() {
        if i > 0 {
            out.push(Token::Sep);
        }
        out.extend(encode_expr(e)?);
    }
    Ok(out)
}

struct Decoder<'a> {
    toks: &'a [Token],
    pos: usize,
    offset: usize,
}

impl Decoder<'_> {
    fn at(&self) -> usize {
        self.offset + self.pos
    }

    fn next(&mut self) -> Result<Token, DecodeError> {
        let t = self
            .toks
            .get(self.pos)
            .copied()
            .ok_or(DecodeError::Truncated { position: self.at() })?;
        self.pos += 1;
        Ok(t)
    }

    fn signed_run(&mut self, negative: bool) -> Result<i128, DecodeError> {
        let start = self.at();
        let mut v: i128 = 0;
        let mut n = 0;
        while let Some(Token::Digit(d)) = self.toks.get(self.pos) {
            v = v
                .checked_mul(BASE)
                .and_then(|v| v.checked_add(*d as i128))
                .ok_or(DecodeError::Overflow { position: self.at() })?;
            self.pos += 1;
            n += 1;
        }
        if n == 0 {
            return Err(if self.pos >= self.toks.len() {
                DecodeError::Truncated { position: start }
            } else {
                DecodeError::Unexpected { position: start }
            });
        }
        Ok(if negative { -v } else { v })
    }

    fn signed_int(&mut self) -> Result<i128, DecodeError> {
        let at = self.at();
        match self.next()? {
            Token::Plus => self.signed_run(false),
            Token::Minus => self.signed_run(true),
            _ => Err(DecodeError::Unexpected { position: at }),
        }
    }

    fn constant(&mut self, mantissa: i128) -> Result<Expr, DecodeError> {
        if let Some(Token::Exp10) = self.toks.get(self.pos) {
            self.pos += 1;
            let at = self.at();
            let e = self.signed_int()?;
            let e = i32::try_from(e).map_err(|_| DecodeError::Overflow { position: at })?;
            return Ok(Expr::Const(Num::Dec(Decimal::new(mantissa, e))));
        }
        Ok(Expr::Const(Num::Int(mantissa)))
    }

    fn expr(&mut self) -> Result<Expr, DecodeError> {
        let at = self.at();
        match self.next()? {
            Token::Op(op) => {
                let a = self.expr()?;
                let b = self.expr()?;
                Ok(Expr::binary(op, a, b))
            }
            Token::Func(op) => Ok(Expr::unary(op, self.expr()?)),
            Token::Var(i) => Ok(Expr::Var(i as usize)),
            Token::Digit(d) => self.constant(d as i128),
            Token::Plus => {
                let m = self.signed_run(false)?;
                self.constant(m)
            }
            Token::Minus => {
                let m = self.signed_run(true)?;
                self.constant(m)
            }
            _ => Err(DecodeError::Unexpected { position: at }),
        }
    }
}

fn decode_at(toks: &[Token], offset: usize) -> Result<Expr, DecodeError> {
    let mut d = Decoder {
        toks,
        pos: 0,
        offset,
    };
    let e = d.expr()?;
    if d.pos < toks.len() {
        return Err(DecodeError::Trailing { position: d.at() });
    }
    Ok(e)
}

/// Decode a single prefix expression that must consume every token.
pub fn decode_expr(toks: &[Token]) -> Result<Expr, DecodeError> {
    decode_at(toks, 0)
}

/// Decode `SEP`-separated equations.
pub fn decode_system(toks: &[Token]) -> Result<System, DecodeError> {
    let mut eqs = Vec::new();
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        if *t == Token::Sep {
            eqs.push(decode_at(&toks[start..i], start)?);
            start = i + 1;
        }
    }
    eqs.push(decode_at(&toks[start..], start)?);
    Ok(System::new(eqs))
}

pub fn to_text(toks: &[Token]) -> String {
    let mut s = String::new();
    for (i, t) in toks.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&t.name());
    }
    s
}

pub fn from_text(s: &str) -> Result<Vec<Token>, DecodeError> {
    s.split_whitespace()
        .enumerate()
        .map(|(i, w)| {
            Token::from_name(w).ok_or_else(|| DecodeError::UnknownToken {
                position: i,
                text: w.into(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;
    use Token::*;

    const ADD: Token = Op(BinaryOp::Add);
    const MUL: Token = Op(BinaryOp::Mul);

    #[test]
    fn integers() {
        assert_eq!(encode_int(1024), [Plus, Digit(1), Digit(24)]);
        assert_eq!(encode_int(0), [Plus, Digit(0)]);
        assert_eq!(encode_int(-1_000_001), [Minus, Digit(1), Digit(0), Digit(1)]);
    }

    #[test]
    fn floats() {
        assert_eq!(
            encode_float(&Decimal::new(-314, -2)),
            [Minus, Digit(314), Exp10, Minus, Digit(2)]
        );
        assert_eq!(
            encode_float(&Decimal::new(21, -1)),
            [Plus, Digit(21), Exp10, Minus, Digit(1)]
        );
        assert_eq!(
            encode_float(&Decimal::new(1, 0)),
            [Plus, Digit(1), Exp10, Plus, Digit(0)]
        );
    }

    #[test]
    fn worked_system_example() {
        let s = System::new(alloc::vec![
            parse_expr("cos(2.1*x0)*(x1 + 2)").unwrap(),
            parse_expr("sin(3*x1 + 2)").unwrap(),
        ]);
        let want = [
            MUL,
            Func(UnaryOp::Cos),
            MUL,
            Digit(21),
            Exp10,
            Minus,
            Digit(1),
            Var(0),
            ADD,
            Var(1),
            Digit(2),
            Sep,
            Func(UnaryOp::Sin),
            ADD,
            MUL,
            Digit(3),
            Var(1),
            Digit(2),
        ];
        let got = encode_system(&s).unwrap();
        assert_eq!(got, want);
        assert_eq!(decode_system(&got).unwrap(), s);
    }

    #[test]
    fn decode_sin_example() {
        let toks = [Func(UnaryOp::Sin), ADD, MUL, Digit(3), Var(1), Digit(2)];
        assert_eq!(decode_expr(&toks).unwrap(), parse_expr("sin(3*x1 + 2)").unwrap());
    }

    #[test]
    fn truncated_is_error() {
        assert!(matches!(
            decode_expr(&[MUL, Func(UnaryOp::Cos)]),
            Err(DecodeError::Truncated { .. })
        ));
        assert!(matches!(
            decode_expr(&[Var(0), Var(1)]),
            Err(DecodeError::Trailing { position: 1 })
        ));
    }

    #[test]
    fn signed_run_forces_next_sign() {
        // add(-1000001, 2): the 2 must carry its sign or it would extend the run.
        let e = Expr::add(Expr::Const(Num::Int(-1_000_001)), Expr::int(2));
        let t = encode_expr(&e).unwrap();
        assert_eq!(t, [ADD, Minus, Digit(1), Digit(0), Digit(1), Plus, Digit(2)]);
        assert_eq!(decode_expr(&t).unwrap(), e);
        let e = Expr::add(Expr::int(1500), Expr::int(7));
        let t = encode_expr(&e).unwrap();
        assert_eq!(decode_expr(&t).unwrap(), e);
    }

    #[test]
    fn leading_plus_accepted() {
        assert_eq!(decode_expr(&[Plus, Digit(5)]).unwrap(), Expr::int(5));
    }

    #[test]
    fn text_round_trip() {
        let v = vocabulary();
        assert_eq!(v.len(), 4 + 5 + 6 + 10 + 4 + 1000);
        for t in &v {
            assert_eq!(Token::from_name(&t.name()), Some(*t));
        }
        assert_eq!(Token::from_name("007"), None);
        assert_eq!(Token::from_name("x10"), None);
        let toks = from_text("mul cos x0 - 3").unwrap();
        assert_eq!(to_text(&toks), "mul cos x0 - 3");
    }
}
