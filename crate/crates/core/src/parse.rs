//! Infix text parser, the inverse of `Display for Expr`.
//!
//! Grammar:
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'x' digits | func '(' expr ')' | '(' expr ')'
//! ```
//! A minus directly in front of a literal yields a negative constant; in front
//! of anything else it yields `-1 * e`.

use alloc::vec::Vec;

use crate::expr::{BinaryOp, Expr, UnaryOp};
use crate::num::Num;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("unexpected character {ch:?} at byte {pos}")]
    UnexpectedChar { pos: usize, ch: char },
    #[error("unexpected token at byte {pos}")]
    UnexpectedToken { pos: usize },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("malformed number at byte {pos}")]
    BadNumber { pos: usize },
    #[error("unknown function or identifier at byte {pos}")]
    UnknownIdent { pos: usize },
    #[error("variable x{index} outside dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Num),
    Var(usize),
    Func(UnaryOp),
    Op(char),
    LParen,
    RParen,
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((i, Tok::Op(c as char)));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                    i += 1;
                }
                if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                    let mut j = i + 1;
                    if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                        j += 1;
                    }
                    if j < b.len() && b[j].is_ascii_digit() {
                        while j < b.len() && b[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &s[start..i];
                let lit = lit.strip_prefix('+').unwrap_or(lit);
                let n = Num::parse_literal(&lit.replace("e+", "e").replace("E+", "e"))
                    .ok_or(ParseError::BadNumber { pos: start })?;
                out.push((start, Tok::Num(n)));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < b.len() && b[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let word = &s[start..i];
                if let Some(op) = UnaryOp::from_name(word) {
                    out.push((start, Tok::Func(op)));
                } else if let Some(idx) = word
                    .strip_prefix('x')
                    .filter(|d| !d.is_empty() && d.bytes().all(|c| c.is_ascii_digit()))
                    .and_then(|d| d.parse::<usize>().ok())
                {
                    out.push((start, Tok::Var(idx)));
                } else {
                    return Err(ParseError::UnknownIdent { pos: start });
                }
            }
            _ => {
                let ch = s[i..].chars().next().unwrap_or('?');
                return Err(ParseError::UnexpectedChar { pos: i, ch });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinaryOp::Add } else { BinaryOp::Sub };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinaryOp::Mul } else { BinaryOp::Div };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.bump();
            // A literal directly after the minus, not raised to a power, is a negative constant.
            if let (Some(Tok::Num(n)), next) = (
                self.toks.get(self.pos).map(|(_, t)| t.clone()),
                self.toks.get(self.pos + 1).map(|(_, t)| t),
            ) {
                if !matches!(next, Some(Tok::Op('^'))) {
                    self.bump();
                    return Ok(Expr::Const(n.neg()));
                }
            }
            let inner = self.unary()?;
            return Ok(Expr::mul(Expr::int(-1), inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::binary(BinaryOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Num(n)) => Ok(Expr::Const(n)),
            Some(Tok::Var(i)) => Ok(Expr::Var(i)),
            Some(Tok::Func(op)) => {
                self.expect_lparen()?;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(Expr::unary(op, inner))
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some(_) => Err(ParseError::UnexpectedToken { pos: at }),
            None => Err(ParseError::UnexpectedEnd),
        }
    }

    fn expect_lparen(&mut self) -> Result<(), ParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::LParen) => Ok(()),
            Some(_) => Err(ParseError::UnexpectedToken { pos: at }),
            None => Err(ParseError::UnexpectedEnd),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::RParen) => Ok(()),
            Some(_) => Err(ParseError::UnexpectedToken { pos: at }),
            None => Err(ParseError::UnexpectedEnd),
        }
    }
}

/// Parse an infix expression.
pub fn parse_expr(s: &str) -> Result<Expr, ParseError> {
    let toks = lex(s)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: s.len(),
    };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(ParseError::UnexpectedToken { pos: p.here() });
    }
    Ok(e)
}

/// Parse an infix expression whose variables must be below `dim`.
pub fn parse_expr_dim(s: &str, dim: usize) -> Result<Expr, ParseError> {
    let e = parse_expr(s)?;
    let d = e.dimension();
    if d > dim {
        return Err(ParseError::VariableOutOfRange { index: d - 1, dim });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn parses_precedence() {
        let e = parse_expr("x0 + 2*x1^3").unwrap();
        let want = Expr::add(
            Expr::var(0),
            Expr::mul(Expr::int(2), Expr::pow(Expr::var(1), 3)),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn negative_literals_and_negation() {
        assert_eq!(parse_expr("-3").unwrap(), Expr::int(-3));
        assert_eq!(
            parse_expr("-x0").unwrap(),
            Expr::mul(Expr::int(-1), Expr::var(0))
        );
        assert_eq!(
            parse_expr("-3^2").unwrap(),
            Expr::mul(Expr::int(-1), Expr::pow(Expr::int(3), 2))
        );
        assert_eq!(parse_expr("(-3)^2").unwrap(), Expr::pow(Expr::int(-3), 2));
    }

    #[test]
    fn decimals_keep_their_tag() {
        assert_eq!(parse_expr("2.1").unwrap(), Expr::Const(Num::dec(21, -1)));
        assert_eq!(parse_expr("1.0").unwrap(), Expr::Const(Num::dec(1, 0)));
        assert_eq!(parse_expr("1.5e-39").unwrap(), Expr::Const(Num::dec(15, -40)));
        assert_eq!(parse_expr("2").unwrap(), Expr::int(2));
    }

    #[test]
    fn display_round_trip() {
        for s in [
            "cos(2.1*x0)*(x1 + 2)",
            "sin(3*x1 + 2)",
            "x0 - (x1 - x2)",
            "x0/(x1*x2)",
            "(x0^2)^3",
            "x0^2^3",
            "log(1 + 5*x0^2) + x1^2",
            "-1*x0 + -3",
            "x0*-3 - -0.25",
            "(-2)^2*exp(-x0)",
        ] {
            let e = parse_expr(s).unwrap();
            let again = parse_expr(&e.to_string()).unwrap();
            assert_eq!(e, again, "{}", s);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(parse_expr("x0 +"), Err(ParseError::UnexpectedEnd));
        assert!(matches!(parse_expr("foo(x0)"), Err(ParseError::UnknownIdent { .. })));
        assert!(matches!(parse_expr("x0 $ 1"), Err(ParseError::UnexpectedChar { .. })));
        assert!(matches!(parse_expr("(x0"), Err(ParseError::UnexpectedEnd)));
        assert!(matches!(
            parse_expr_dim("x3", 2),
            Err(ParseError::VariableOutOfRange { .. })
        ));
    }
}
