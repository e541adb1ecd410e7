use std::fmt;

/// 1-based line and column of a token, and its length in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LBrace,
    RBrace,
    Colon,
    Semi,
    Comma,
    Dot,
    Arrow,
    FatArrow,
    EqEq,
    NotEq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Str(_) => f.write_str("string"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::FatArrow => f.write_str("`=>`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::NotEq => f.write_str("`!=`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub message: String,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor { chars: src.chars().peekable(), line: 1, column: 1 };
    let mut out = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c == '#' {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else if c.is_whitespace() {
                cur.bump();
            } else {
                break;
            }
        }
        let (line, column) = (cur.line, cur.column);
        let span = |len: usize| SourceSpan { line, column, length: len };
        let Some(c) = cur.bump() else {
            out.push(Token { tok: Tok::Eof, span: span(0) });
            return Ok(out);
        };
        let err = |message: String, len: usize| LexError { message, span: SourceSpan { line, column, length: len } };
        let (tok, len) = match c {
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            ':' => (Tok::Colon, 1),
            ';' => (Tok::Semi, 1),
            ',' => (Tok::Comma, 1),
            '.' => (Tok::Dot, 1),
            '-' if cur.peek() == Some('>') => {
                cur.bump();
                (Tok::Arrow, 2)
            }
            '=' if cur.peek() == Some('>') => {
                cur.bump();
                (Tok::FatArrow, 2)
            }
            '=' if cur.peek() == Some('=') => {
                cur.bump();
                (Tok::EqEq, 2)
            }
            '!' if cur.peek() == Some('=') => {
                cur.bump();
                (Tok::NotEq, 2)
            }
            '"' => {
                let mut s = String::new();
                let mut len = 1;
                loop {
                    let Some(c) = cur.bump() else {
                        return Err(err("unterminated string".into(), len));
                    };
                    len += 1;
                    match c {
                        '"' => break,
                        '\\' => {
                            len += 1;
                            match cur.bump() {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some('r') => s.push('\r'),
                                Some(other) => return Err(err(format!("unknown escape `\\{other}`"), len)),
                                None => return Err(err("unterminated string".into(), len)),
                            }
                        }
                        c => s.push(c),
                    }
                }
                (Tok::Str(s), len)
            }
            c if c.is_ascii_digit() || (c == '-' && cur.peek().is_some_and(|d| d.is_ascii_digit())) => {
                let mut text = String::from(c);
                while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                    text.push(d);
                    cur.bump();
                }
                let len = text.chars().count();
                match text.parse::<i64>() {
                    Ok(i) => (Tok::Int(i), len),
                    Err(_) => return Err(err(format!("integer `{text}` is out of range"), len)),
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut text = String::from(c);
                while let Some(d) = cur.peek().filter(|d| d.is_ascii_alphanumeric() || *d == '_') {
                    text.push(d);
                    cur.bump();
                }
                let len = text.len();
                (Tok::Ident(text), len)
            }
            other => return Err(err(format!("unexpected character `{}`", other.escape_default()), 1)),
        };
        out.push(Token { tok, span: span(len) });
    }
}
