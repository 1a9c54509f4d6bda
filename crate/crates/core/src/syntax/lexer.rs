use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    ColonColon,
    Semi,
    Dot,
    Eq,
    FatArrow,
    Arrow,
    SubType,
    Bar,
    Quote,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::ColonColon => "::",
            Tok::Semi => ";",
            Tok::Dot => ".",
            Tok::Eq => "=",
            Tok::FatArrow => "=>",
            Tok::Arrow => "->",
            Tok::SubType => "<:",
            Tok::Bar => "|",
            Tok::Quote => "'",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Whether whitespace or a comment separates this token from the previous one.
    pub spaced: bool,
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut spaced = true;
    macro_rules! adv {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            adv!();
            spaced = true;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            spaced = true;
            while i < chars.len() && chars[i] != '\n' {
                adv!();
            }
            continue;
        }
        let (sl, sc) = (line, col);
        let err = |msg: String| ParseError { line: sl, col: sc, message: msg };
        let next = chars.get(i + 1).copied();
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                adv!();
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() || (c == '-' && next.is_some_and(|d| d.is_ascii_digit())) {
            let mut s = String::new();
            s.push(c);
            adv!();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                adv!();
            }
            Tok::Int(s.parse().map_err(|_| err(format!("integer literal {s} out of range")))?)
        } else if c == '"' {
            adv!();
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(err("unterminated string literal".into())),
                    Some('"') => {
                        adv!();
                        break;
                    }
                    Some('\\') => {
                        adv!();
                        let e = chars.get(i).copied().ok_or_else(|| err("unterminated escape".into()))?;
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            '\\' => '\\',
                            '"' => '"',
                            other => return Err(err(format!("unknown escape \\{other}"))),
                        });
                        adv!();
                    }
                    Some(&ch) => {
                        s.push(ch);
                        adv!();
                    }
                }
            }
            Tok::Str(s)
        } else {
            let two = |a: char, b: char| c == a && next == Some(b);
            let (tok, len) = if two(':', ':') {
                (Tok::ColonColon, 2)
            } else if two('=', '>') {
                (Tok::FatArrow, 2)
            } else if two('-', '>') {
                (Tok::Arrow, 2)
            } else if two('<', ':') {
                (Tok::SubType, 2)
            } else {
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    ';' => Tok::Semi,
                    '.' => Tok::Dot,
                    '=' => Tok::Eq,
                    '|' => Tok::Bar,
                    '\'' => Tok::Quote,
                    other => return Err(err(format!("unexpected character {other:?}"))),
                };
                (t, 1)
            };
            for _ in 0..len {
                adv!();
            }
            tok
        };
        out.push(Token { tok, line: sl, col: sc, spaced });
        spaced = false;
    }
    out.push(Token { tok: Tok::Eof, line, col, spaced });
    Ok(out)
}
