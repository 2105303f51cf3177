//! ASCII surface syntax for dendriform expressions.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := rational ['*' factor] | factor
//! factor := letter | '|' | '(' expr ('<' | '>') expr ')' | '(' expr ')'
//! ```
//!
//! `<` is `≺`, `>` is `≻` and `|` is the trivial tree. The half-products are
//! not associative, so every product must sit in its own parentheses.

use super::polynomial::{parse_rational, Rational, RationalPolynomial};
use super::products::Products;
use crate::error::{Error, Result};
use crate::tree::{lex_letter, Alphabet, DecoratedTree, Letter};

const MAX_NESTING: usize = 256;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Letter(Letter),
    Number(String),
    Plus,
    Minus,
    Star,
    Open,
    Close,
    Prec,
    Succ,
    Unit,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos];
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                pos += 1;
                continue;
            }
            b'x' => {
                let (letter, end) = lex_letter(text, pos)?;
                out.push((pos, Tok::Letter(letter)));
                pos = end;
                continue;
            }
            b'0'..=b'9' | b'.' => {
                let start = pos;
                while pos < bytes.len() && matches!(bytes[pos], b'0'..=b'9' | b'.' | b'/') {
                    pos += 1;
                }
                out.push((start, Tok::Number(text[start..pos].to_string())));
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'(' => Tok::Open,
            b')' => Tok::Close,
            b'<' => Tok::Prec,
            b'>' => Tok::Succ,
            b'|' => Tok::Unit,
            _ => {
                let ch = text[pos..].chars().next().unwrap_or('?');
                return Err(Error::parse(pos, format!("unexpected character `{ch}`")));
            }
        };
        out.push((pos, tok));
        pos += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    alphabet: &'a Alphabet,
    products: Products,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::parse(self.offset(), format!("expected {what}")))
        }
    }

    fn expr(&mut self, depth: usize) -> Result<RationalPolynomial> {
        if depth > MAX_NESTING {
            return Err(Error::parse(self.offset(), "expression nested too deeply"));
        }
        let negate = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let first = self.term(depth)?;
        let mut acc = if negate { -&first } else { first };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term(depth)?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term(depth)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self, depth: usize) -> Result<RationalPolynomial> {
        if let Some(Tok::Number(n)) = self.peek() {
            let at = self.offset();
            let r: Rational = parse_rational(n).map_err(|_| Error::parse(at, format!("invalid coefficient `{n}`")))?;
            self.pos += 1;
            // A bare number is a multiple of the trivial tree; this also reads back "0".
            if self.peek() != Some(&Tok::Star) {
                return Ok(&RationalPolynomial::one() * &r);
            }
            self.pos += 1;
            let f = self.factor(depth)?;
            return Ok(&f * &r);
        }
        self.factor(depth)
    }

    fn factor(&mut self, depth: usize) -> Result<RationalPolynomial> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Letter(l)) => {
                self.alphabet.check(l)?;
                self.pos += 1;
                Ok(RationalPolynomial::from_tree(DecoratedTree::single(l)))
            }
            Some(Tok::Unit) => {
                self.pos += 1;
                Ok(RationalPolynomial::one())
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let lhs = self.expr(depth + 1)?;
                let op = self.peek().cloned();
                match op {
                    Some(Tok::Close) => {
                        self.pos += 1;
                        Ok(lhs)
                    }
                    Some(Tok::Prec) | Some(Tok::Succ) => {
                        self.pos += 1;
                        let rhs = self.expr(depth + 1)?;
                        if matches!(self.peek(), Some(Tok::Prec) | Some(Tok::Succ)) {
                            return Err(Error::parse(
                                self.offset(),
                                "ambiguous chain of `<`/`>`: parenthesise each product",
                            ));
                        }
                        self.expect(Tok::Close, "`)`")?;
                        if op == Some(Tok::Prec) {
                            self.products.prec(&lhs, &rhs)
                        } else {
                            self.products.succ(&lhs, &rhs)
                        }
                    }
                    _ => Err(Error::parse(self.offset(), "expected `<`, `>` or `)`")),
                }
            }
            _ => Err(Error::parse(at, "expected a letter, `|` or `(`")),
        }
    }
}

/// Parses an expression and expands it into a polynomial with exact
/// rational coefficients.
pub fn parse_dendriform_expr(text: &str, alphabet: &Alphabet) -> Result<RationalPolynomial> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(Error::parse(0, "empty expression"));
    }
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
        alphabet,
        products: Products::new(),
    };
    let p = parser.expr(0)?;
    if parser.pos != parser.toks.len() {
        let msg = match parser.peek() {
            Some(Tok::Prec) | Some(Tok::Succ) => "unparenthesised `<`/`>`: write `(a<b)`",
            _ => "unexpected trailing input",
        };
        return Err(Error::parse(parser.offset(), msg));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dendriform::polynomial::rational;
    use crate::dendriform::products::{prec, succ};

    fn parse(s: &str) -> Result<RationalPolynomial> {
        parse_dendriform_expr(s, &Alphabet::new(9))
    }

    fn x(i: usize) -> RationalPolynomial {
        RationalPolynomial::from_tree(DecoratedTree::single(Letter(i)))
    }

    #[test]
    fn nested_product() {
        let p = parse("(x1<(x2>x3))").unwrap();
        let expected = prec(&x(1), &succ(&x(2), &x(3)).unwrap()).unwrap();
        assert_eq!(p, expected);
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn linear_combinations() {
        let p = parse("x1 + x1").unwrap();
        assert_eq!(p.rational_coeff(&DecoratedTree::single(Letter(1))), rational(2, 1));
        let q = parse("(x1<x1) - (x1>x1)").unwrap();
        assert_eq!(q, &prec(&x(1), &x(1)).unwrap() - &succ(&x(1), &x(1)).unwrap());
        let r = parse("-1/2*(x1<x1) + 0.5*(x1<x1)").unwrap();
        assert!(r.is_zero());
        assert_eq!(parse("((x1 + x2) < x3)").unwrap().len(), 2);
    }

    #[test]
    fn rejects_chains_and_bad_input() {
        assert!(parse("(x1<x2<x3)").is_err());
        assert!(parse("x1<x2").is_err());
        assert!(parse("x1 +").is_err());
        assert!(parse("").is_err());
        assert!(parse("2 x1").is_err());
        assert!(matches!(
            parse_dendriform_expr("x3", &Alphabet::new(2)),
            Err(Error::Alphabet { .. })
        ));
        assert!(matches!(parse("(|<x1)"), Err(Error::Domain(_))));
    }

    #[test]
    fn display_reparses() {
        let p = parse("(x1<(x2>x3)) - 1/3*((x1>x2)<x0) + 2*x4").unwrap();
        assert_eq!(parse(&p.to_string()).unwrap(), p);
        let zero = parse("x1 - x1").unwrap();
        assert_eq!(zero.to_string(), "0");
        assert_eq!(parse("0").unwrap(), zero);
        assert_eq!(parse("3").unwrap(), &RationalPolynomial::one() * &rational(3, 1));
    }
}
