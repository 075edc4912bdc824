//! Recursive-descent parser for LTLf.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! or    := and ('|' and)*
//! and   := until ('&' until)*
//! until := unary ('U' until)?          right associative
//! unary := ('!' | 'X' | 'F' | 'G') unary | atom
//! atom  := 'true' | 'false' | ident | '(' or ')'
//! ```

use super::formula::{Alphabet, Formula};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    True,
    False,
    Not,
    And,
    Or,
    Next,
    Until,
    Eventually,
    Always,
    LParen,
    RParen,
    Ident(String),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            b'!' => Some(Tok::Not),
            b'&' => Some(Tok::And),
            b'|' => Some(Tok::Or),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            out.push((i, t));
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            let tok = match word {
                "true" => Tok::True,
                "false" => Tok::False,
                "X" => Tok::Next,
                "U" => Tok::Until,
                "F" => Tok::Eventually,
                "G" => Tok::Always,
                _ => Tok::Ident(word.to_string()),
            };
            out.push((start, tok));
            continue;
        }
        return Err(Error::Syntax {
            pos: i,
            msg: format!("unexpected character `{}`", text[i..].chars().next().unwrap()),
        });
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    ap: Option<&'a Alphabet>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let pos = self.offset();
        let msg = if self.pos >= self.toks.len() {
            format!("{} at end of input", msg.into())
        } else {
            msg.into()
        };
        Err(Error::Syntax { pos, msg })
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.until()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let rhs = self.until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula> {
        let lhs = self.unary()?;
        if self.peek() == Some(&Tok::Until) {
            self.pos += 1;
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        let wrap: fn(Formula) -> Formula = match self.peek() {
            Some(Tok::Not) => Formula::not,
            Some(Tok::Next) => Formula::next,
            Some(Tok::Eventually) => Formula::eventually,
            Some(Tok::Always) => Formula::always,
            _ => return self.primary(),
        };
        self.pos += 1;
        Ok(wrap(self.unary()?))
    }

    fn primary(&mut self) -> Result<Formula> {
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return self.err("expected formula"),
        };
        match tok {
            Tok::True => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Tok::False => {
                self.pos += 1;
                Ok(Formula::False)
            }
            Tok::Ident(name) => {
                if let Some(ap) = self.ap {
                    if ap.index_of(&name).is_none() {
                        return Err(Error::UndeclaredAtom(name));
                    }
                }
                self.pos += 1;
                Ok(Formula::Atom(name))
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.or()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            other => self.err(format!("unexpected token {other:?}")),
        }
    }
}

/// Parses `text` as an LTLf formula.
///
/// With `ap = Some(..)` every identifier must be a declared proposition;
/// with `None` any identifier is accepted as an atom.
pub fn parse_ltlf(text: &str, ap: Option<&Alphabet>) -> Result<Formula> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(Error::Syntax {
            pos: 0,
            msg: "empty formula".into(),
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        ap,
    };
    let f = p.or()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ap(ps: &[&str]) -> Alphabet {
        Alphabet::new(ps.iter().copied())
    }

    #[test]
    fn delivery_goal() {
        let f = parse_ltlf("F d1 & G !o", Some(&ap(&["d1", "o"]))).unwrap();
        assert_eq!(
            f,
            Formula::and(
                Formula::eventually(Formula::atom("d1")),
                Formula::always(Formula::not(Formula::atom("o")))
            )
        );
    }

    #[test]
    fn single_atom() {
        assert_eq!(parse_ltlf("p", None).unwrap(), Formula::atom("p"));
    }

    #[test]
    fn dangling_until() {
        match parse_ltlf("p U", None) {
            Err(Error::Syntax { pos, msg }) => {
                assert_eq!(pos, 3);
                assert!(msg.contains("end of input"), "{msg}");
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn undeclared_atom() {
        assert_eq!(
            parse_ltlf("F q", Some(&ap(&["p"]))),
            Err(Error::UndeclaredAtom("q".into()))
        );
    }

    #[test]
    fn precedence() {
        // unary > U > & > |
        let f = parse_ltlf("a | b & c U !d", None).unwrap();
        let expected = Formula::or(
            Formula::atom("a"),
            Formula::and(
                Formula::atom("b"),
                Formula::until(Formula::atom("c"), Formula::not(Formula::atom("d"))),
            ),
        );
        assert_eq!(f, expected);
        let g = parse_ltlf("a U b U c", None).unwrap();
        assert_eq!(
            g,
            Formula::until(
                Formula::atom("a"),
                Formula::until(Formula::atom("b"), Formula::atom("c"))
            )
        );
    }

    #[test]
    fn display_round_trips() {
        for s in ["F d1 & G !o", "X (a U b) | !c", "G F p & true", "false | X X q"] {
            let f = parse_ltlf(s, None).unwrap();
            assert_eq!(parse_ltlf(&f.to_string(), None).unwrap(), f);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_ltlf("", None), Err(Error::Syntax { .. })));
        assert!(matches!(parse_ltlf("(p", None), Err(Error::Syntax { .. })));
        assert!(matches!(parse_ltlf("p q", None), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse_ltlf("p $ q", None), Err(Error::Syntax { pos: 2, .. })));
    }
}
