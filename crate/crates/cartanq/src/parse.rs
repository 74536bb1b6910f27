//! Expression parser for job-file polynomials.
//!
//! Grammar: integer and rational (`p/q`) literals, chart variables `x1..xm`,
//! binary `+ - *`, exponentiation `^` by a non-negative integer literal,
//! unary minus, and parentheses. Precedence from tightest to loosest:
//! `^`, `*`, unary `-`, binary `+ -`. A `/` is only a rational literal
//! separator (no whitespace allowed inside the literal); general division is
//! rejected so every input denotes a polynomial.

use num_bigint::BigInt;

use crate::exact::poly::Poly;
use crate::exact::rational::Rational;
use crate::{Error, Result};

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Number(Rational),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    m: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, m: usize) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            m,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn read_digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    /// Returns `(position, token)` pairs until exhaustion.
    fn tokenize(&mut self) -> Result<Vec<(usize, Tok)>> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            if self.pos >= self.src.len() {
                return Ok(out);
            }
            let at = self.pos;
            let c = self.src[self.pos];
            let tok = match c {
                b'+' => {
                    self.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    self.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    self.pos += 1;
                    Tok::Star
                }
                b'^' => {
                    self.pos += 1;
                    Tok::Caret
                }
                b'/' => {
                    self.pos += 1;
                    Tok::Slash
                }
                b'(' => {
                    self.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    self.pos += 1;
                    Tok::RParen
                }
                b'0'..=b'9' => {
                    let digits = self.read_digits();
                    let numer: BigInt = digits.parse().expect("digit run");
                    // a rational literal `p/q` is a single token: `/` must
                    // follow the integer immediately and be followed by digits
                    if self.pos + 1 < self.src.len()
                        && self.src[self.pos] == b'/'
                        && self.src[self.pos + 1].is_ascii_digit()
                    {
                        self.pos += 1;
                        let dens = self.read_digits();
                        let denom: BigInt = dens.parse().expect("digit run");
                        if denom == BigInt::from(0) {
                            return Err(Error::Syntax {
                                pos: at,
                                msg: "rational literal with zero denominator".into(),
                            });
                        }
                        Tok::Number(Rational::new(numer, denom))
                    } else {
                        Tok::Number(Rational::from_integer(numer))
                    }
                }
                c if c.is_ascii_alphabetic() => {
                    let start = self.pos;
                    while self.pos < self.src.len()
                        && (self.src[self.pos].is_ascii_alphanumeric()
                            || self.src[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                    let idx = name
                        .strip_prefix('x')
                        .and_then(|d| d.parse::<usize>().ok())
                        .filter(|&n| n >= 1 && n <= self.m);
                    match idx {
                        Some(n) => Tok::Var(n - 1),
                        None => {
                            return Err(Error::UnknownVariable { name, pos: at });
                        }
                    }
                }
                other => {
                    return Err(Error::Syntax {
                        pos: at,
                        msg: format!("unexpected character `{}`", other as char),
                    });
                }
            };
            out.push((at, tok));
        }
    }
}

const BP_ADD: u8 = 10;
const BP_NEG: u8 = 15;
const BP_MUL: u8 = 20;

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    m: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.idx)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn end_pos(&self) -> usize {
        self.len
    }

    fn parse_expr(&mut self, min_bp: u8) -> Result<Poly> {
        let nv = 2 * self.m;
        let (pos, tok) = self.next().ok_or(Error::Syntax {
            pos: self.end_pos(),
            msg: "unexpected end of expression".into(),
        })?;
        let mut lhs = match tok {
            Tok::Number(r) => Poly::constant(nv, r),
            Tok::Var(i) => Poly::var(nv, i),
            Tok::LParen => {
                let inner = self.parse_expr(0)?;
                match self.next() {
                    Some((_, Tok::RParen)) => inner,
                    other => {
                        return Err(Error::Syntax {
                            pos: other.map(|(p, _)| p).unwrap_or(self.end_pos()),
                            msg: "expected `)`".into(),
                        })
                    }
                }
            }
            Tok::Minus => -&self.parse_expr(BP_NEG)?,
            _ => {
                return Err(Error::Syntax {
                    pos,
                    msg: "expected a number, variable, `(` or unary `-`".into(),
                })
            }
        };
        loop {
            let (opos, op) = match self.peek() {
                None => break,
                Some(t) => t.clone(),
            };
            match op {
                Tok::Plus | Tok::Minus => {
                    if BP_ADD < min_bp {
                        break;
                    }
                    self.next();
                    let rhs = self.parse_expr(BP_ADD + 1)?;
                    lhs = if op == Tok::Plus {
                        &lhs + &rhs
                    } else {
                        &lhs - &rhs
                    };
                }
                Tok::Star => {
                    if BP_MUL < min_bp {
                        break;
                    }
                    self.next();
                    let rhs = self.parse_expr(BP_MUL + 1)?;
                    lhs = &lhs * &rhs;
                }
                Tok::Caret => {
                    self.next();
                    // exponent must be a bare non-negative integer literal
                    match self.next() {
                        Some((p, Tok::Number(r))) => {
                            if !r.is_integer() {
                                return Err(Error::Syntax {
                                    pos: p,
                                    msg: "exponent must be a non-negative integer".into(),
                                });
                            }
                            let e: u32 = r.to_integer().try_into().map_err(|_| Error::Syntax {
                                pos: p,
                                msg: "exponent out of range".into(),
                            })?;
                            lhs = lhs.pow(e);
                        }
                        other => {
                            return Err(Error::Syntax {
                                pos: other.map(|(p, _)| p).unwrap_or(self.end_pos()),
                                msg: "exponent must be a non-negative integer literal".into(),
                            })
                        }
                    }
                }
                Tok::Slash => {
                    return Err(Error::Syntax {
                        pos: opos,
                        msg: "`/` is only valid inside a rational literal `p/q`".into(),
                    })
                }
                Tok::RParen => break,
                _ => {
                    return Err(Error::Syntax {
                        pos: opos,
                        msg: "expected an operator".into(),
                    })
                }
            }
        }
        Ok(lhs)
    }
}

/// Parses an expression into a polynomial over the `2m`-variable universe
/// (only the base variables `x1..xm` may occur).
pub fn parse_expression(s: &str, m: usize) -> Result<Poly> {
    let toks = Lexer::new(s, m).tokenize()?;
    let mut parser = Parser {
        toks,
        idx: 0,
        m,
        len: s.len(),
    };
    let p = parser.parse_expr(0)?;
    if let Some((pos, _)) = parser.peek() {
        return Err(Error::Syntax {
            pos: *pos,
            msg: "trailing input after expression".into(),
        });
    }
    Ok(p)
}
