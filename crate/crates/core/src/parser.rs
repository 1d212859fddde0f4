//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! iff     := implies ( "<->" iff )?
//! implies := or ( "->" implies )?
//! or      := and ( "|" and )*
//! and     := unary ( "&" unary )*
//! unary   := "~" unary | "(" iff ")" | "T" | "F" | ident
//! ident   := [a-zA-Z_][a-zA-Z0-9_]*
//! ```

use std::fmt;

use thiserror::Error;

use crate::formula::{Connective, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: expected {}, found {found}", .expected.join(" or "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'a> {
    Ident(&'a str),
    Top,
    Bot,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Top => f.write_str("`T`"),
            Tok::Bot => f.write_str("`F`"),
            Tok::Not => f.write_str("`~`"),
            Tok::And => f.write_str("`&`"),
            Tok::Or => f.write_str("`|`"),
            Tok::Implies => f.write_str("`->`"),
            Tok::Iff => f.write_str("`<->`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

const OPERAND: &[&str] = &["identifier", "`T`", "`F`", "`~`", "`(`"];

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    peeked: Option<(usize, Tok<'a>)>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            peeked: None,
        }
    }

    fn peek(&mut self) -> Result<&(usize, Tok<'a>), ParseError> {
        if self.peeked.is_none() {
            let tok = self.lex()?;
            self.peeked = Some(tok);
        }
        Ok(self.peeked.as_ref().unwrap())
    }

    fn next(&mut self) -> Result<(usize, Tok<'a>), ParseError> {
        self.peek()?;
        Ok(self.peeked.take().unwrap())
    }

    fn lex(&mut self) -> Result<(usize, Tok<'a>), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(start) else {
            return Ok((start, Tok::End));
        };
        let (tok, len) = match c {
            b'~' => (Tok::Not, 1),
            b'&' => (Tok::And, 1),
            b'|' => (Tok::Or, 1),
            b'(' => (Tok::LParen, 1),
            b')' => (Tok::RParen, 1),
            b'-' if bytes.get(start + 1) == Some(&b'>') => (Tok::Implies, 2),
            b'<' if self.src[start..].starts_with("<->") => (Tok::Iff, 3),
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = start + 1;
                while end < bytes.len()
                    && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                let word = &self.src[start..end];
                let tok = match word {
                    "T" => Tok::Top,
                    "F" => Tok::Bot,
                    _ => Tok::Ident(word),
                };
                (tok, end - start)
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap();
                return Err(ParseError {
                    offset: start,
                    expected: vec!["a formula token"],
                    found: format!("character `{ch}`"),
                });
            }
        };
        self.pos = start + len;
        Ok((start, tok))
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
}

impl<'a> Parser<'a> {
    fn error(offset: usize, expected: &[&'static str], found: &Tok<'_>) -> ParseError {
        ParseError {
            offset,
            expected: expected.to_vec(),
            found: found.to_string(),
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let left = self.implies()?;
        if self.lex.peek()?.1 == Tok::Iff {
            self.lex.next()?;
            let right = self.iff()?;
            return Ok(Formula::binary(Connective::Iff, left, right));
        }
        Ok(left)
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let left = self.or()?;
        if self.lex.peek()?.1 == Tok::Implies {
            self.lex.next()?;
            let right = self.implies()?;
            return Ok(Formula::binary(Connective::Implies, left, right));
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.and()?;
        while self.lex.peek()?.1 == Tok::Or {
            self.lex.next()?;
            acc = Formula::or(acc, self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.lex.peek()?.1 == Tok::And {
            self.lex.next()?;
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let (offset, tok) = self.lex.next()?;
        match tok {
            Tok::Not => Ok(Formula::not(self.unary()?)),
            Tok::Top => Ok(Formula::top()),
            Tok::Bot => Ok(Formula::bot()),
            Tok::Ident(name) => Ok(Formula::atom(name)),
            Tok::LParen => {
                let inner = self.iff()?;
                let (offset, tok) = self.lex.next()?;
                if tok != Tok::RParen {
                    return Err(Self::error(offset, &["`)`", "a binary operator"], &tok));
                }
                Ok(inner)
            }
            other => Err(Self::error(offset, OPERAND, &other)),
        }
    }
}

/// Parses a formula under the precedence `~` > `&` > `|` > `->` > `<->`.
/// `&` and `|` associate to the left, `->` and `<->` to the right.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        lex: Lexer::new(text),
    };
    let f = parser.iff()?;
    let (offset, tok) = parser.lex.next()?;
    if tok != Tok::End {
        return Err(Parser::error(
            offset,
            &["a binary operator", "end of input"],
            &tok,
        ));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Formula {
        Formula::atom(n)
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse_formula("(a -> b) & a").unwrap(),
            Formula::and(Formula::implies(a("a"), a("b")), a("a"))
        );
        assert_eq!(
            parse_formula("~~a").unwrap(),
            Formula::not(Formula::not(a("a")))
        );
        assert_eq!(
            parse_formula("a -> b -> c").unwrap(),
            parse_formula("a -> (b -> c)").unwrap()
        );
        assert_ne!(
            parse_formula("a -> b -> c").unwrap(),
            parse_formula("(a -> b) -> c").unwrap()
        );
    }

    #[test]
    fn precedence_ladder() {
        let f = parse_formula("~a & b | c -> d <-> e").unwrap();
        assert_eq!(f.canonical(), "((((~a & b) | c) -> d) <-> e)");
        assert_eq!(
            parse_formula("a | b | c").unwrap().canonical(),
            "((a | b) | c)"
        );
        assert_eq!(
            parse_formula("a<->b<->c").unwrap().canonical(),
            "(a <-> (b <-> c))"
        );
    }

    #[test]
    fn constants_and_identifiers() {
        assert_eq!(
            parse_formula("T & F").unwrap(),
            Formula::and(Formula::top(), Formula::bot())
        );
        assert_eq!(
            parse_formula("Tx | F_1").unwrap(),
            Formula::or(a("Tx"), a("F_1"))
        );
        assert_eq!(parse_formula("  _x9\n").unwrap(), a("_x9"));
    }

    #[test]
    fn error_offsets() {
        let e = parse_formula("a & ").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(e.expected.contains(&"identifier"));
        assert_eq!(e.found, "end of input");

        let e = parse_formula("(a | b").unwrap_err();
        assert_eq!(e.offset, 6);
        assert!(e.expected.contains(&"`)`"));

        let e = parse_formula("a b").unwrap_err();
        assert_eq!(e.offset, 2);

        let e = parse_formula("a => b").unwrap_err();
        assert_eq!(e.offset, 2);
        assert_eq!(e.found, "character `=`");

        assert!(parse_formula("").is_err());
        assert!(parse_formula("a <- b").is_err());
    }
}
