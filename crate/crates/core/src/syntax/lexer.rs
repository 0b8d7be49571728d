//! Tokenizer shared by formulas, rule files, scenarios and event scripts.

use super::{Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Var(String),
    Num(f64),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Lt,
    Gt,
    Le,
    Ge,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DArrow,
    Minus,
    Plus,
    Colon,
    Semi,
    Eq,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Var(s) => format!("`?{s}`"),
            Tok::Num(x) => format!("number {x}"),
            Tok::Str(_) => "string".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DArrow => "`=>`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// Splits `src` into tokens. Lexical errors are collected and the offending
/// character skipped, so the result always ends with `Eof`.
pub fn lex(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut diags = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! push {
        ($tok:expr, $len:expr) => {{
            out.push(Token {
                tok: $tok,
                span: SourceSpan {
                    line,
                    col,
                    len: $len,
                },
            });
            i += $len;
            col += $len;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                    col += 1;
                }
            }
            '(' => push!(Tok::LParen, 1),
            ')' => push!(Tok::RParen, 1),
            '{' => push!(Tok::LBrace, 1),
            '}' => push!(Tok::RBrace, 1),
            ',' => push!(Tok::Comma, 1),
            '!' => push!(Tok::Bang, 1),
            '&' => push!(Tok::Amp, 1),
            '|' => push!(Tok::Pipe, 1),
            ':' => push!(Tok::Colon, 1),
            ';' => push!(Tok::Semi, 1),
            '+' => push!(Tok::Plus, 1),
            '<' if next == Some('=') => push!(Tok::Le, 2),
            '<' => push!(Tok::Lt, 1),
            '>' if next == Some('=') => push!(Tok::Ge, 2),
            '>' => push!(Tok::Gt, 1),
            '=' if next == Some('>') => push!(Tok::DArrow, 2),
            '=' => push!(Tok::Eq, 1),
            '-' if next == Some('>') => push!(Tok::Arrow, 2),
            '-' if next.is_some_and(|d| d.is_ascii_digit()) => {
                let (x, len) = number(&chars, i + 1);
                push!(Tok::Num(-x), len + 1)
            }
            '-' => push!(Tok::Minus, 1),
            d if d.is_ascii_digit() => {
                let (x, len) = number(&chars, i);
                push!(Tok::Num(x), len)
            }
            '?' => {
                let len = ident_len(&chars, i + 1);
                if len == 0 {
                    diags.push(Diagnostic::new(
                        SourceSpan { line, col, len: 1 },
                        "expected a variable name after `?`",
                    ));
                    i += 1;
                    col += 1;
                } else {
                    let name: String = chars[i + 1..i + 1 + len].iter().collect();
                    push!(Tok::Var(name), len + 1)
                }
            }
            '"' => {
                let start_col = col;
                let mut j = i + 1;
                let mut s = String::new();
                let mut closed = false;
                while j < chars.len() {
                    match chars[j] {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' if j + 1 < chars.len() => {
                            s.push(match chars[j + 1] {
                                'n' => '\n',
                                other => other,
                            });
                            j += 2;
                        }
                        '\n' => break,
                        other => {
                            s.push(other);
                            j += 1;
                        }
                    }
                }
                let len = j - i + usize::from(closed);
                if closed {
                    push!(Tok::Str(s), len)
                } else {
                    diags.push(Diagnostic::new(
                        SourceSpan {
                            line,
                            col: start_col,
                            len,
                        },
                        "unterminated string",
                    ));
                    i = j;
                    col += len;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let len = ident_len(&chars, i);
                let name: String = chars[i..i + len].iter().collect();
                push!(Tok::Ident(name), len)
            }
            other => {
                diags.push(Diagnostic::new(
                    SourceSpan { line, col, len: 1 },
                    format!("unexpected character {other:?}"),
                ));
                i += 1;
                col += 1;
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: SourceSpan { line, col, len: 0 },
    });
    (out, diags)
}

fn ident_len(chars: &[char], start: usize) -> usize {
    chars[start.min(chars.len())..]
        .iter()
        .take_while(|c| c.is_ascii_alphanumeric() || **c == '_')
        .count()
}

fn number(chars: &[char], start: usize) -> (f64, usize) {
    let mut j = start;
    while j < chars.len() && chars[j].is_ascii_digit() {
        j += 1;
    }
    if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
        j += 1;
        while j < chars.len() && chars[j].is_ascii_digit() {
            j += 1;
        }
    }
    let text: String = chars[start..j].iter().collect();
    // digits with at most one dot always parse
    (text.parse().unwrap_or(f64::NAN), j - start)
}
