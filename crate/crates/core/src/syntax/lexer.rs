use std::fmt;

use thiserror::Error;

/// 1-based line/column position in the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("syntax error at {pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub(crate) fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    True,
    False,
    Fun,
    RefKw,
    Let,
    In,
    BoolTy,
    RefTy,
    Bot,
    Top,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    FatArrow,
    Arrow,
    Bang,
    Assign,
    AndAnd,
    OrOr,
    Eq,
    Caret,
    Lt,
    Gt,
    Comma,
    Hole,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(x) => format!("identifier `{x}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Ident(_) => "<ident>",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Fun => "fun",
            Tok::RefKw => "ref",
            Tok::Let => "let",
            Tok::In => "in",
            Tok::BoolTy => "Bool",
            Tok::RefTy => "Ref",
            Tok::Bot => "bot",
            Tok::Top => "top",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Colon => ":",
            Tok::FatArrow => "=>",
            Tok::Arrow => "->",
            Tok::Bang => "!",
            Tok::Assign => ":=",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Eq => "=",
            Tok::Caret => "^",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Comma => ",",
            Tok::Hole => "□",
            Tok::Eof => "<eof>",
        }
    }
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "true" => Tok::True,
        "false" => Tok::False,
        "fun" => Tok::Fun,
        "ref" => Tok::RefKw,
        "let" => Tok::Let,
        "in" => Tok::In,
        "Bool" => Tok::BoolTy,
        "Ref" => Tok::RefTy,
        "bot" => Tok::Bot,
        "top" => Tok::Top,
        _ => return None,
    })
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    s.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            let tok = keyword(&s).unwrap_or(Tok::Ident(s));
            out.push((tok, pos));
            continue;
        }
        bump!();
        let next = chars.peek().copied();
        let tok = match (c, next) {
            ('/', Some('/')) => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
                continue;
            }
            ('=', Some('>')) => {
                bump!();
                Tok::FatArrow
            }
            ('-', Some('>')) => {
                bump!();
                Tok::Arrow
            }
            (':', Some('=')) => {
                bump!();
                Tok::Assign
            }
            ('&', Some('&')) => {
                bump!();
                Tok::AndAnd
            }
            ('|', Some('|')) => {
                bump!();
                Tok::OrOr
            }
            ('[', Some(']')) => {
                bump!();
                Tok::Hole
            }
            ('(', _) => Tok::LParen,
            (')', _) => Tok::RParen,
            ('[', _) => Tok::LBracket,
            (']', _) => Tok::RBracket,
            (':', _) => Tok::Colon,
            ('!', _) => Tok::Bang,
            ('=', _) => Tok::Eq,
            ('^', _) => Tok::Caret,
            ('<', _) => Tok::Lt,
            ('>', _) => Tok::Gt,
            (',', _) => Tok::Comma,
            ('□', _) => Tok::Hole,
            (other, _) => {
                return Err(SyntaxError::new(
                    pos,
                    format!("unexpected character `{}`", other.escape_default()),
                ))
            }
        };
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}
