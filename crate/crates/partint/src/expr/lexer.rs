//! Tokenizer for the expression grammar.
//!
//! Every token records the byte offset where it starts so parse errors can
//! point at the exact position in the source string.

use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub(super) enum Tok {
    /// Integer literal: digits only, stored exactly.
    Int(String),
    /// Decimal or exponent literal, stored as a double.
    Float(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    /// Human-readable description used in "found ..." diagnostics.
    pub(super) fn describe(&self) -> String {
        match self {
            Tok::Int(s) => format!("number `{s}`"),
            Tok::Float(v) => format!("number `{v:?}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(super) struct Spanned {
    pub tok: Tok,
    pub offset: usize,
}

/// Tokenize the whole input, appending an explicit end marker.
pub(super) fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'+' => {
                out.push(Spanned { tok: Tok::Plus, offset: start });
                i += 1;
            }
            b'-' => {
                out.push(Spanned { tok: Tok::Minus, offset: start });
                i += 1;
            }
            b'*' => {
                out.push(Spanned { tok: Tok::Star, offset: start });
                i += 1;
            }
            b'/' => {
                out.push(Spanned { tok: Tok::Slash, offset: start });
                i += 1;
            }
            b'^' => {
                out.push(Spanned { tok: Tok::Caret, offset: start });
                i += 1;
            }
            b'(' => {
                out.push(Spanned { tok: Tok::LParen, offset: start });
                i += 1;
            }
            b')' => {
                out.push(Spanned { tok: Tok::RParen, offset: start });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let (tok, next) = lex_number(src, start)?;
                out.push(Spanned { tok, offset: start });
                i = next;
            }
            b'A'..=b'Z' | b'a'..=b'z' => {
                let mut j = i + 1;
                while j < bytes.len()
                    && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(src[i..j].to_string()),
                    offset: start,
                });
                i = j;
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: vec!["a token".into()],
                    found: format!("unexpected character `{}`", &src[start..start + utf8_len(c)]),
                });
            }
        }
    }
    out.push(Spanned { tok: Tok::End, offset: src.len() });
    Ok(out)
}

fn utf8_len(first_byte: u8) -> usize {
    match first_byte {
        0x00..=0x7f => 1,
        0xc0..=0xdf => 2,
        0xe0..=0xef => 3,
        _ => 4,
    }
}

/// Lex one numeric literal starting at `start`.
///
/// Grammar: `digits [ '.' digits ] [ (e|E) [+|-] digits ]` or `'.' digits ...`.
/// A literal with a dot or an exponent is a double; bare digits stay exact.
fn lex_number(src: &str, start: usize) -> Result<(Tok, usize), ParseError> {
    let bytes = src.as_bytes();
    let mut i = start;
    let mut saw_digit = false;
    let mut is_float = false;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        saw_digit = true;
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        is_float = true;
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            saw_digit = true;
            i += 1;
        }
        if i == frac_start && !saw_digit {
            return Err(ParseError::Syntax {
                offset: start,
                expected: vec!["digits".into()],
                found: "`.` with no digits".into(),
            });
        }
    }
    if !saw_digit {
        return Err(ParseError::Syntax {
            offset: start,
            expected: vec!["digits".into()],
            found: "`.` with no digits".into(),
        });
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        // Only consume the exponent if it is well-formed; otherwise `1e` would
        // swallow a following symbol.
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            is_float = true;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    let text = &src[start..i];
    if is_float {
        let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
            offset: start,
            expected: vec!["a numeric literal".into()],
            found: format!("`{text}`"),
        })?;
        Ok((Tok::Float(v), i))
    } else {
        Ok((Tok::Int(text.to_string()), i))
    }
}
