//! Canonical s-expression text form of programs.
//!
//! Functions are written `(<name> <on-true> <on-false>)` and terminals
//! `(<name>)`, separated by single spaces. The parser accepts any
//! whitespace between tokens and treats `#` up to end of line as a comment.

use std::fmt;

use super::{FunctionKind, Node, Program, TerminalKind, DEFAULT_MAX_DEPTH};

pub(crate) fn serialize_program(program: &Program) -> String {
    fn write(node: &Node, out: &mut String) {
        out.push('(');
        match node {
            Node::Terminal(kind) => out.push_str(kind.name()),
            Node::Function {
                kind,
                on_true,
                on_false,
            } => {
                out.push_str(kind.name());
                out.push(' ');
                write(on_true, out);
                out.push(' ');
                write(on_false, out);
            }
        }
        out.push(')');
    }
    let mut out = String::new();
    write(program.root(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedEnd,
    UnmatchedClose,
    ExpectedOpen(String),
    MissingSymbol,
    UnknownSymbol(String),
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    Depth {
        depth: usize,
        max: usize,
    },
    TrailingInput(String),
}

/// Parse failure with the byte offset and line/column (1-based) it refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Empty => write!(f, "no program found"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unbalanced parentheses: missing `)`"),
            ParseErrorKind::UnmatchedClose => write!(f, "unbalanced parentheses: unexpected `)`"),
            ParseErrorKind::ExpectedOpen(tok) => write!(f, "expected `(`, found `{tok}`"),
            ParseErrorKind::MissingSymbol => write!(f, "expected a function or terminal name"),
            ParseErrorKind::UnknownSymbol(tok) => write!(f, "unknown symbol `{tok}`"),
            ParseErrorKind::Arity {
                symbol,
                expected,
                found,
            } => write!(f, "`{symbol}` takes {expected} children, found {found}"),
            ParseErrorKind::Depth { depth, max } => {
                write!(f, "program depth {depth} outside 1..={max}")
            }
            ParseErrorKind::TrailingInput(tok) => write!(f, "unexpected `{tok}` after program"),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Symbol(&'a str),
}

struct Parser<'a> {
    text: &'a str,
    tokens: Vec<(usize, Token<'a>)>,
    cursor: usize,
    max_depth: usize,
}

fn tokenize(text: &str) -> Vec<(usize, Token<'_>)> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                tokens.push((i, Token::Open));
                i += 1;
            }
            b')' => {
                tokens.push((i, Token::Close));
                i += 1;
            }
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && !matches!(bytes[i], b'(' | b')' | b'#')
                {
                    i += 1;
                }
                tokens.push((start, Token::Symbol(&text[start..i])));
            }
        }
    }
    tokens
}

impl<'a> Parser<'a> {
    fn error(&self, offset: usize, kind: ParseErrorKind) -> ParseError {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
        ParseError {
            offset,
            line,
            column,
            kind,
        }
    }

    fn end_offset(&self) -> usize {
        self.text.len()
    }

    fn next(&mut self) -> Option<(usize, Token<'a>)> {
        let token = self.tokens.get(self.cursor).cloned();
        self.cursor += 1;
        token
    }

    fn peek(&self) -> Option<&(usize, Token<'a>)> {
        self.tokens.get(self.cursor)
    }

    // `nesting` counts enclosing conditionals, so it equals this node's depth
    // from the root.
    fn expression(&mut self, nesting: usize) -> Result<Node, ParseError> {
        let (open_at, token) = self
            .next()
            .ok_or_else(|| self.error(self.end_offset(), ParseErrorKind::UnexpectedEnd))?;
        match token {
            Token::Open => {}
            Token::Close => return Err(self.error(open_at, ParseErrorKind::UnmatchedClose)),
            Token::Symbol(s) => {
                return Err(self.error(open_at, ParseErrorKind::ExpectedOpen(s.to_string())))
            }
        }
        let (name_at, name) = match self.next() {
            Some((at, Token::Symbol(name))) => (at, name),
            Some((at, _)) => return Err(self.error(at, ParseErrorKind::MissingSymbol)),
            None => return Err(self.error(self.end_offset(), ParseErrorKind::UnexpectedEnd)),
        };

        if nesting > self.max_depth {
            return Err(self.error(
                open_at,
                ParseErrorKind::Depth {
                    depth: nesting,
                    max: self.max_depth,
                },
            ));
        }

        let mut children = Vec::new();
        loop {
            match self.peek() {
                Some((_, Token::Close)) => {
                    self.cursor += 1;
                    break;
                }
                Some(_) => children.push(self.expression(nesting + 1)?),
                None => return Err(self.error(self.end_offset(), ParseErrorKind::UnexpectedEnd)),
            }
        }

        if let Some(kind) = FunctionKind::from_name(name) {
            if children.len() != 2 {
                return Err(self.error(
                    open_at,
                    ParseErrorKind::Arity {
                        symbol: name.to_string(),
                        expected: 2,
                        found: children.len(),
                    },
                ));
            }
            let on_false = children.pop().unwrap();
            let on_true = children.pop().unwrap();
            Ok(Node::function(kind, on_true, on_false))
        } else if let Some(kind) = TerminalKind::from_name(name) {
            if !children.is_empty() {
                return Err(self.error(
                    open_at,
                    ParseErrorKind::Arity {
                        symbol: name.to_string(),
                        expected: 0,
                        found: children.len(),
                    },
                ));
            }
            Ok(Node::Terminal(kind))
        } else {
            Err(self.error(name_at, ParseErrorKind::UnknownSymbol(name.to_string())))
        }
    }
}

/// Parses a program with the default depth bound.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_program_with_max_depth(text, DEFAULT_MAX_DEPTH)
}

pub fn parse_program_with_max_depth(text: &str, max_depth: usize) -> Result<Program, ParseError> {
    let mut parser = Parser {
        text,
        tokens: tokenize(text),
        cursor: 0,
        max_depth,
    };
    let start = match parser.peek() {
        Some(&(at, _)) => at,
        None => return Err(parser.error(0, ParseErrorKind::Empty)),
    };
    let root = parser.expression(0)?;
    if let Some((at, token)) = parser.next() {
        let kind = match token {
            Token::Close => ParseErrorKind::UnmatchedClose,
            Token::Open => ParseErrorKind::TrailingInput("(".to_string()),
            Token::Symbol(s) => ParseErrorKind::TrailingInput(s.to_string()),
        };
        return Err(parser.error(at, kind));
    }
    let depth = root.depth();
    if depth < 1 {
        return Err(parser.error(
            start,
            ParseErrorKind::Depth {
                depth,
                max: max_depth,
            },
        ));
    }
    Program::new(root, max_depth).map_err(|_| {
        parser.error(
            start,
            ParseErrorKind::Depth {
                depth,
                max: max_depth,
            },
        )
    })
}
