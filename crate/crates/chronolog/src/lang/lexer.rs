//! Hand-rolled lexer producing position-tagged tokens.

use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum TokenKind {
    Atom(String),
    Var(String),
    Int(i64),
    Float(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bar,
    /// End-of-clause dot.
    Dot,
    /// `:-`
    Neck,
    /// Symbolic or word operator: + - * / // mod ^ is =:= =\= < > >= =<
    Op(String),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

#[derive(Debug, thiserror::Error)]
#[error("{pos}: {msg}")]
pub struct LexError {
    pub pos: Pos,
    pub msg: String,
}

pub struct Lexer<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: u32,
    col: u32,
}

const WORD_OPS: &[&str] = &["is", "mod"];

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer {
            src,
            chars: src.char_indices().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        let next = self.chars.next();
        if let Some((_, c)) = next {
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        next
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&mut self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn skip_trivia(&mut self) -> Result<(), LexError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some('/') if self.peek2() == Some('*') => {
                    let start = self.pos();
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            Some((_, '*')) if self.peek() == Some('/') => {
                                self.bump();
                                break;
                            }
                            Some(_) => {}
                            None => {
                                return Err(LexError {
                                    pos: start,
                                    msg: "unterminated block comment".into(),
                                })
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn lex_number(&mut self, start: usize, pos: Pos) -> Result<Token, LexError> {
        let mut end = start;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                let (i, _) = self.bump().unwrap();
                end = i;
            } else {
                break;
            }
        }
        // A fractional part only when the dot is followed by a digit, so the
        // clause-ending dot after an integer still lexes as Dot.
        let mut is_float = false;
        if self.peek() == Some('.') && self.peek2().is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            self.bump();
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    let (i, _) = self.bump().unwrap();
                    end = i;
                } else {
                    break;
                }
            }
        }
        let text = &self.src[start..=end.max(start)];
        let text = if is_float {
            // end tracked only digit indices; recover the full slice.
            let stop = end + 1;
            &self.src[start..stop]
        } else {
            text
        };
        if is_float {
            text.parse::<f64>()
                .map(|f| Token {
                    kind: TokenKind::Float(f),
                    pos,
                })
                .map_err(|e| LexError {
                    pos,
                    msg: format!("bad float literal: {e}"),
                })
        } else {
            text.parse::<i64>()
                .map(|i| Token {
                    kind: TokenKind::Int(i),
                    pos,
                })
                .map_err(|_| LexError {
                    pos,
                    msg: "integer literal out of range".into(),
                })
        }
    }

    fn next_token(&mut self) -> Result<Token, LexError> {
        self.skip_trivia()?;
        let pos = self.pos();
        let Some((start, c)) = self.bump() else {
            return Ok(Token {
                kind: TokenKind::Eof,
                pos,
            });
        };
        let simple = |kind| Ok(Token { kind, pos });
        match c {
            '(' => simple(TokenKind::LParen),
            ')' => simple(TokenKind::RParen),
            '[' => simple(TokenKind::LBracket),
            ']' => simple(TokenKind::RBracket),
            ',' => simple(TokenKind::Comma),
            '|' => simple(TokenKind::Bar),
            '.' => {
                // A dot is a clause terminator unless glued to more graphic
                // characters, which we do not support.
                simple(TokenKind::Dot)
            }
            ':' if self.peek() == Some('-') => {
                self.bump();
                simple(TokenKind::Neck)
            }
            '+' | '*' | '^' => simple(TokenKind::Op(c.to_string())),
            '-' => simple(TokenKind::Op("-".into())),
            '/' => {
                if self.peek() == Some('/') {
                    self.bump();
                    simple(TokenKind::Op("//".into()))
                } else {
                    simple(TokenKind::Op("/".into()))
                }
            }
            '=' => match self.peek() {
                Some(':') => {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                        simple(TokenKind::Op("=:=".into()))
                    } else {
                        Err(LexError {
                            pos,
                            msg: "expected `=:=`".into(),
                        })
                    }
                }
                Some('\\') => {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                        simple(TokenKind::Op("=\\=".into()))
                    } else {
                        Err(LexError {
                            pos,
                            msg: "expected `=\\=`".into(),
                        })
                    }
                }
                Some('<') => {
                    self.bump();
                    simple(TokenKind::Op("=<".into()))
                }
                _ => Err(LexError {
                    pos,
                    msg: "`=` is not an operator here; use `=:=` for arithmetic equality".into(),
                }),
            },
            '<' => simple(TokenKind::Op("<".into())),
            '>' => {
                if self.peek() == Some('=') {
                    self.bump();
                    simple(TokenKind::Op(">=".into()))
                } else {
                    simple(TokenKind::Op(">".into()))
                }
            }
            '\'' => {
                let mut name = String::new();
                loop {
                    match self.bump() {
                        Some((_, '\'')) => break,
                        Some((_, ch)) => name.push(ch),
                        None => {
                            return Err(LexError {
                                pos,
                                msg: "unterminated quoted atom".into(),
                            })
                        }
                    }
                }
                simple(TokenKind::Atom(name))
            }
            _ if c.is_ascii_digit() => self.lex_number(start, pos),
            _ if c == '_' || c.is_alphabetic() => {
                // Byte index one past the last accepted char; keeps the
                // slice on char boundaries for multibyte letters.
                let mut end = start + c.len_utf8();
                while let Some(nc) = self.peek() {
                    if nc == '_' || nc.is_alphanumeric() {
                        let (i, _) = self.bump().unwrap();
                        end = i + nc.len_utf8();
                    } else {
                        break;
                    }
                }
                let word = &self.src[start..end];
                if c == '_' || c.is_uppercase() {
                    simple(TokenKind::Var(word.to_string()))
                } else if WORD_OPS.contains(&word) {
                    simple(TokenKind::Op(word.to_string()))
                } else {
                    simple(TokenKind::Atom(word.to_string()))
                }
            }
            _ => Err(LexError {
                pos,
                msg: format!("unexpected character `{c}`"),
            }),
        }
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>, LexError> {
        let mut out = Vec::new();
        loop {
            let tok = self.next_token()?;
            let eof = tok.kind == TokenKind::Eof;
            out.push(tok);
            if eof {
                return Ok(out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        Lexer::new(src)
            .tokenize()
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .collect()
    }

    #[test]
    fn clause_dot_vs_float_dot() {
        let ks = kinds("p(3). q(3.5).");
        assert!(ks.contains(&TokenKind::Int(3)));
        assert!(ks.contains(&TokenKind::Float(3.5)));
        assert_eq!(ks.iter().filter(|k| **k == TokenKind::Dot).count(), 2);
    }

    #[test]
    fn operators_and_comments() {
        let ks = kinds("X is Y*2 + 1, A =< B. % trailing\n/* block */ p.");
        assert!(ks.contains(&TokenKind::Op("is".into())));
        assert!(ks.contains(&TokenKind::Op("*".into())));
        assert!(ks.contains(&TokenKind::Op("=<".into())));
        assert!(ks.contains(&TokenKind::Atom("p".into())));
    }

    #[test]
    fn positions_track_lines() {
        let toks = Lexer::new("p.\n  q.").tokenize().unwrap();
        let q = toks
            .iter()
            .find(|t| t.kind == TokenKind::Atom("q".into()))
            .unwrap();
        assert_eq!((q.pos.line, q.pos.col), (2, 3));
    }

    #[test]
    fn multibyte_letters_lex_whole_words() {
        assert_eq!(kinds("ˊ")[0], TokenKind::Atom("ˊ".into()));
        assert_eq!(kinds("größe")[0], TokenKind::Atom("größe".into()));
        assert_eq!(kinds("Überlauf")[0], TokenKind::Var("Überlauf".into()));
        assert_eq!(kinds("pä(x)")[0], TokenKind::Atom("pä".into()));
    }
}
