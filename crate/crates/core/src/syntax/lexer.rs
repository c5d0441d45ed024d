use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// Lowercase identifier, quoted atom or symbol-char sequence.
    Name(String),
    Var(String),
    Int(i64),
    Float(f64),
    Open,
    Close,
    OpenList,
    CloseList,
    Comma,
    Bar,
    /// Clause-terminating period.
    End,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// A `(` follows immediately, without layout: functional notation.
    pub call: bool,
}

pub fn is_symbol_char(c: char) -> bool {
    matches!(
        c,
        '+' | '-' | '*' | '/' | '\\' | '^' | '<' | '>' | '=' | '~' | ':' | '.' | '?' | '@' | '#' | '&' | '$'
    )
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_layout(&mut self) -> Result<()> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('/') if self.peek_at(1) == Some('*') => {
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            None => return Err(Error::syntax(line, col, "unterminated comment")),
                            Some('*') if self.peek() == Some('/') => {
                                self.bump();
                                break;
                            }
                            _ => {}
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn number(&mut self, line: usize, col: usize) -> Result<Tok> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        let mut is_float = false;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            self.bump();
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let sign = matches!(self.peek_at(1), Some('+') | Some('-'));
            let digit_at = if sign { 2 } else { 1 };
            if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                is_float = true;
                self.bump();
                if sign {
                    self.bump();
                }
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                }
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        if is_float {
            text.parse::<f64>()
                .map(Tok::Float)
                .map_err(|e| Error::syntax(line, col, format!("bad number {text}: {e}")))
        } else {
            text.parse::<i64>()
                .map(Tok::Int)
                .map_err(|e| Error::syntax(line, col, format!("bad number {text}: {e}")))
        }
    }

    fn quoted(&mut self, line: usize, col: usize) -> Result<String> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(Error::syntax(line, col, "unterminated quoted atom")),
                Some('\'') if self.peek() == Some('\'') => {
                    self.bump();
                    s.push('\'');
                }
                Some('\'') => return Ok(s),
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some(c) => s.push(c),
                    None => return Err(Error::syntax(line, col, "unterminated quoted atom")),
                },
                Some(c) => s.push(c),
            }
        }
    }

    fn next_token(&mut self) -> Result<Token> {
        self.skip_layout()?;
        let (line, col) = (self.line, self.col);
        let Some(c) = self.peek() else {
            return Ok(Token {
                tok: Tok::Eof,
                line,
                col,
                call: false,
            });
        };
        let tok = if c.is_ascii_digit() {
            self.number(line, col)?
        } else if c == '_' || c.is_uppercase() {
            let mut s = String::new();
            while let Some(c) = self.peek().filter(|c| c.is_alphanumeric() || *c == '_') {
                s.push(c);
                self.bump();
            }
            Tok::Var(s)
        } else if c.is_alphabetic() {
            let mut s = String::new();
            while let Some(c) = self.peek().filter(|c| c.is_alphanumeric() || *c == '_') {
                s.push(c);
                self.bump();
            }
            Tok::Name(s)
        } else if c == '\'' {
            Tok::Name(self.quoted(line, col)?)
        } else {
            match c {
                '(' => {
                    self.bump();
                    Tok::Open
                }
                ')' => {
                    self.bump();
                    Tok::Close
                }
                '[' => {
                    self.bump();
                    if self.peek() == Some(']') {
                        self.bump();
                        Tok::Name("[]".into())
                    } else {
                        Tok::OpenList
                    }
                }
                ']' => {
                    self.bump();
                    Tok::CloseList
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '|' => {
                    self.bump();
                    Tok::Bar
                }
                '!' | ';' => {
                    self.bump();
                    Tok::Name(c.to_string())
                }
                '∼' => {
                    // U+223C as written in typeset observations.
                    self.bump();
                    Tok::Name("~".into())
                }
                '.' if self.peek_at(1).is_none_or(|n| n.is_whitespace() || n == '%') => {
                    self.bump();
                    Tok::End
                }
                c if is_symbol_char(c) => {
                    let mut s = String::new();
                    while let Some(c) = self.peek().filter(|c| is_symbol_char(*c)) {
                        s.push(c);
                        self.bump();
                    }
                    Tok::Name(s)
                }
                other => {
                    return Err(Error::syntax(
                        line,
                        col,
                        format!("unexpected character {other:?}"),
                    ))
                }
            }
        };
        let call = matches!(tok, Tok::Name(_)) && self.peek() == Some('(');
        Ok(Token { tok, line, col, call })
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut lx = Lexer {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        let t = lx.next_token()?;
        let eof = t.tok == Tok::Eof;
        out.push(t);
        if eof {
            return Ok(out);
        }
    }
}
