use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    // punctuation
    Bang,      // !
    Query,     // ?
    Lt,        // <
    Gt,        // >
    LtLt,      // <<
    GtGt,      // >>
    LParen,    // (
    RParen,    // )
    LBrace,    // {
    RBrace,    // }
    Comma,     // ,
    Colon,     // :
    Semi,      // ;
    Dot,       // .
    Pipe,      // |
    Eq,        // =
    Plus,      // +
    Minus,     // -
    Tilde,     // ~
    Caret,     // ^
    Dollar,    // $
    Lambda,    // \
    Amp,       // &
    Arrow,     // ->
    At,        // @
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Int(i) => write!(f, "{i}"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Bang => write!(f, "!"),
            Tok::Query => write!(f, "?"),
            Tok::Lt => write!(f, "<"),
            Tok::Gt => write!(f, ">"),
            Tok::LtLt => write!(f, "<<"),
            Tok::GtGt => write!(f, ">>"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBrace => write!(f, "{{"),
            Tok::RBrace => write!(f, "}}"),
            Tok::Comma => write!(f, ","),
            Tok::Colon => write!(f, ":"),
            Tok::Semi => write!(f, ";"),
            Tok::Dot => write!(f, "."),
            Tok::Pipe => write!(f, "|"),
            Tok::Eq => write!(f, "="),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Tilde => write!(f, "~"),
            Tok::Caret => write!(f, "^"),
            Tok::Dollar => write!(f, "$"),
            Tok::Lambda => write!(f, "\\"),
            Tok::Amp => write!(f, "&"),
            Tok::Arrow => write!(f, "->"),
            Tok::At => write!(f, "@"),
            Tok::Eof => write!(f, "<eof>"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

pub struct Lexer {
    pub toks: Vec<(Tok, Pos)>,
}

pub fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, (Pos, String)> {
    let mut toks = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut it = text.chars().peekable();
    macro_rules! bump {
        () => {{
            let c = it.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }
    loop {
        let pos = Pos { line, col };
        let c = match it.peek().copied() {
            None => break,
            Some(c) => c,
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '-' => {
                bump!();
                match it.peek() {
                    Some('-') => {
                        // line comment
                        while let Some(&c2) = it.peek() {
                            if c2 == '\n' {
                                break;
                            }
                            bump!();
                        }
                    }
                    Some('>') => {
                        bump!();
                        toks.push((Tok::Arrow, pos));
                    }
                    _ => toks.push((Tok::Minus, pos)),
                }
            }
            '<' => {
                bump!();
                if it.peek() == Some(&'<') {
                    bump!();
                    toks.push((Tok::LtLt, pos));
                } else {
                    toks.push((Tok::Lt, pos));
                }
            }
            '>' => {
                bump!();
                if it.peek() == Some(&'>') {
                    bump!();
                    toks.push((Tok::GtGt, pos));
                } else {
                    toks.push((Tok::Gt, pos));
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        None => return Err((pos, "unterminated string literal".into())),
                        Some('"') => break,
                        Some('\\') => match bump!() {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some('\\') => s.push('\\'),
                            Some('"') => s.push('"'),
                            other => {
                                return Err((
                                    pos,
                                    format!("unknown escape {:?} in string literal", other),
                                ))
                            }
                        },
                        Some(c2) => s.push(c2),
                    }
                }
                toks.push((Tok::Str(s), pos));
            }
            '0'..='9' => {
                let mut n = String::new();
                while let Some(&c2) = it.peek() {
                    if c2.is_ascii_digit() {
                        n.push(c2);
                        bump!();
                    } else {
                        break;
                    }
                }
                let v: i64 = n.parse().map_err(|_| (pos, format!("bad integer {n}")))?;
                toks.push((Tok::Int(v), pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c2) = it.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' || c2 == '\'' {
                        s.push(c2);
                        bump!();
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Ident(s), pos));
            }
            '!' => {
                bump!();
                toks.push((Tok::Bang, pos));
            }
            '?' => {
                bump!();
                toks.push((Tok::Query, pos));
            }
            '(' => {
                bump!();
                toks.push((Tok::LParen, pos));
            }
            ')' => {
                bump!();
                toks.push((Tok::RParen, pos));
            }
            '{' => {
                bump!();
                toks.push((Tok::LBrace, pos));
            }
            '}' => {
                bump!();
                toks.push((Tok::RBrace, pos));
            }
            ',' => {
                bump!();
                toks.push((Tok::Comma, pos));
            }
            ':' => {
                bump!();
                toks.push((Tok::Colon, pos));
            }
            ';' => {
                bump!();
                toks.push((Tok::Semi, pos));
            }
            '.' => {
                bump!();
                toks.push((Tok::Dot, pos));
            }
            '|' => {
                bump!();
                toks.push((Tok::Pipe, pos));
            }
            '=' => {
                bump!();
                toks.push((Tok::Eq, pos));
            }
            '+' => {
                bump!();
                toks.push((Tok::Plus, pos));
            }
            '~' => {
                bump!();
                toks.push((Tok::Tilde, pos));
            }
            '^' => {
                bump!();
                toks.push((Tok::Caret, pos));
            }
            '$' => {
                bump!();
                toks.push((Tok::Dollar, pos));
            }
            '\\' => {
                bump!();
                toks.push((Tok::Lambda, pos));
            }
            '&' => {
                bump!();
                toks.push((Tok::Amp, pos));
            }
            '@' => {
                bump!();
                toks.push((Tok::At, pos));
            }
            other => return Err((pos, format!("unexpected character {other:?}"))),
        }
    }
    toks.push((Tok::Eof, Pos { line, col }));
    Ok(toks)
}
