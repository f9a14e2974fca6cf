//! Morphological filters: a small anchored regular-expression dialect over
//! the characters of a matched token.
//!
//! Supported: `.`, literal characters, `\x` escapes, character classes
//! `[a-z]` / `[^...]`, and the quantifiers `*`, `+`, `{m}`, `{m,}`, `{m,n}`.
//! A pattern whose last atom is an unquantified literal or `.` gets an
//! implicit trailing `.*`, so `..` reads "at least two characters".

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FilterError {
    #[error("empty filter pattern")]
    Empty,
    #[error("unterminated character class in filter `{0}`")]
    UnterminatedClass(String),
    #[error("bad quantifier in filter `{0}`")]
    BadQuantifier(String),
    #[error("quantifier without atom in filter `{0}`")]
    DanglingQuantifier(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Atom {
    Any,
    Char(char),
    Class {
        negated: bool,
        ranges: Vec<(char, char)>,
    },
}

impl Atom {
    fn accepts(&self, c: char) -> bool {
        match self {
            Atom::Any => true,
            Atom::Char(x) => *x == c,
            Atom::Class { negated, ranges } => {
                ranges.iter().any(|&(lo, hi)| lo <= c && c <= hi) != *negated
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Piece {
    atom: Atom,
    min: usize,
    max: Option<usize>,
    quantified: bool,
}

/// A compiled morphological filter. Equality compares the source pattern.
#[derive(Debug, Clone)]
pub struct MorphFilter {
    pattern: String,
    pieces: Vec<Piece>,
}

impl PartialEq for MorphFilter {
    fn eq(&self, other: &Self) -> bool {
        self.pattern == other.pattern
    }
}

impl Eq for MorphFilter {}

impl fmt::Display for MorphFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pattern)
    }
}

impl MorphFilter {
    pub fn new(pattern: &str) -> Result<Self, FilterError> {
        if pattern.is_empty() {
            return Err(FilterError::Empty);
        }
        let mut pieces = compile(pattern)?;
        if let Some(last) = pieces.last() {
            if !last.quantified && matches!(last.atom, Atom::Any | Atom::Char(_)) {
                pieces.push(Piece {
                    atom: Atom::Any,
                    min: 0,
                    max: None,
                    quantified: true,
                });
            }
        }
        Ok(MorphFilter {
            pattern: pattern.to_string(),
            pieces,
        })
    }

    pub fn pattern(&self) -> &str {
        &self.pattern
    }

    /// Whole-string match.
    pub fn matches(&self, surface: &str) -> bool {
        let chars: Vec<char> = surface.chars().collect();
        match_from(&self.pieces, &chars)
    }
}

fn match_from(pieces: &[Piece], input: &[char]) -> bool {
    let Some((piece, rest)) = pieces.split_first() else {
        return input.is_empty();
    };
    // Count how many leading characters this atom can take, then backtrack.
    let limit = piece.max.unwrap_or(usize::MAX).min(input.len());
    let mut taken = 0;
    while taken < limit && piece.atom.accepts(input[taken]) {
        taken += 1;
    }
    if taken < piece.min {
        return false;
    }
    (piece.min..=taken)
        .rev()
        .any(|n| match_from(rest, &input[n..]))
}

fn compile(pattern: &str) -> Result<Vec<Piece>, FilterError> {
    let chars: Vec<char> = pattern.chars().collect();
    let mut pieces: Vec<Piece> = Vec::new();
    let mut i = 0;
    let quant_err = || FilterError::BadQuantifier(pattern.to_string());
    while i < chars.len() {
        let c = chars[i];
        match c {
            '*' | '+' | '{' => {
                let last = pieces
                    .last_mut()
                    .filter(|p| !p.quantified)
                    .ok_or_else(|| FilterError::DanglingQuantifier(pattern.to_string()))?;
                let (min, max) = match c {
                    '*' => (0, None),
                    '+' => (1, None),
                    _ => {
                        let close = chars[i..]
                            .iter()
                            .position(|&c| c == '}')
                            .ok_or_else(quant_err)?;
                        let body: String = chars[i + 1..i + close].iter().collect();
                        i += close;
                        parse_braces(&body).ok_or_else(quant_err)?
                    }
                };
                last.min = min;
                last.max = max;
                last.quantified = true;
                i += 1;
            }
            '[' => {
                let (atom, next) = parse_class(&chars, i)
                    .ok_or_else(|| FilterError::UnterminatedClass(pattern.to_string()))?;
                pieces.push(single(atom));
                i = next;
            }
            '.' => {
                pieces.push(single(Atom::Any));
                i += 1;
            }
            '\\' if i + 1 < chars.len() => {
                pieces.push(single(Atom::Char(chars[i + 1])));
                i += 2;
            }
            _ => {
                pieces.push(single(Atom::Char(c)));
                i += 1;
            }
        }
    }
    Ok(pieces)
}

fn single(atom: Atom) -> Piece {
    Piece {
        atom,
        min: 1,
        max: Some(1),
        quantified: false,
    }
}

fn parse_braces(body: &str) -> Option<(usize, Option<usize>)> {
    match body.split_once(',') {
        None => {
            let n = body.trim().parse().ok()?;
            Some((n, Some(n)))
        }
        Some((lo, hi)) => {
            let lo = lo.trim().parse().ok()?;
            let hi = hi.trim();
            if hi.is_empty() {
                return Some((lo, None));
            }
            let hi: usize = hi.parse().ok()?;
            (hi >= lo).then_some((lo, Some(hi)))
        }
    }
}

fn parse_class(chars: &[char], open: usize) -> Option<(Atom, usize)> {
    let mut i = open + 1;
    let negated = chars.get(i) == Some(&'^');
    if negated {
        i += 1;
    }
    let mut ranges = Vec::new();
    let mut first = true;
    loop {
        let mut c = *chars.get(i)?;
        if c == ']' && !first {
            return Some((Atom::Class { negated, ranges }, i + 1));
        }
        first = false;
        if c == '\\' {
            i += 1;
            c = *chars.get(i)?;
        }
        if chars.get(i + 1) == Some(&'-') && chars.get(i + 2).is_some_and(|&h| h != ']') {
            let hi = chars[i + 2];
            ranges.push((c, hi));
            i += 3;
        } else {
            ranges.push((c, c));
            i += 1;
        }
    }
}
