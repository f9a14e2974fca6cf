use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Number,
    Punct,
    Space,
}

/// A token with character offsets into the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
}

fn class_of(c: char) -> TokenKind {
    if c.is_alphabetic() {
        TokenKind::Word
    } else if c.is_numeric() {
        TokenKind::Number
    } else if c.is_whitespace() {
        TokenKind::Space
    } else {
        TokenKind::Punct
    }
}

/// Splits text into letter runs, digit runs, whitespace runs and single
/// punctuation characters. Concatenating the surfaces gives back the text.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens: Vec<Token> = Vec::new();
    for (offset, c) in text.chars().enumerate() {
        let kind = class_of(c);
        match tokens.last_mut() {
            Some(last) if last.kind == kind && kind != TokenKind::Punct => {
                last.surface.push(c);
                last.end = offset + 1;
            }
            _ => tokens.push(Token {
                surface: c.to_string(),
                start: offset,
                end: offset + 1,
                kind,
            }),
        }
    }
    tokens
}
