//! DELAF-style lexicons.
//!
//! One entry per line, `surface,lemma.POS+Code+Code:infl:infl`. Commas,
//! periods and backslashes inside the surface or lemma are escaped with a
//! backslash. An empty lemma means the lemma equals the surface. Lines
//! starting with `#` are comments.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::grammar::{Builtin, LexicalMask};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("malformed lexicon line {line_no}: {reason}")]
    MalformedLine {
        line_no: usize,
        reason: &'static str,
    },
}

/// A single dictionary entry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LexEntry {
    pub surface: String,
    pub lemma: String,
    pub pos: String,
    /// Semantic and grammatical codes following the POS (`PR`, `Hum`, ...).
    pub codes: BTreeSet<String>,
    /// Inflectional codes after `:` (`fs`, `mp`, ...). Masks never test these.
    pub inflections: Vec<String>,
}

impl LexEntry {
    pub fn has_code(&self, code: &str) -> bool {
        self.codes.contains(code)
    }

    /// True when this entry carries the mask's POS (if any) and all its codes.
    pub fn satisfies(&self, mask: &LexicalMask) -> bool {
        if let Some(pos) = &mask.pos {
            if &self.pos != pos {
                return false;
            }
        }
        mask.codes.iter().all(|c| self.codes.contains(c))
    }
}

impl fmt::Display for LexEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lemma = if self.lemma == self.surface {
            String::new()
        } else {
            escape_field(&self.lemma)
        };
        write!(f, "{},{}.{}", escape_field(&self.surface), lemma, self.pos)?;
        for code in &self.codes {
            write!(f, "+{code}")?;
        }
        for infl in &self.inflections {
            write!(f, ":{infl}")?;
        }
        Ok(())
    }
}

/// How surface forms are matched against stored entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum CasePolicy {
    /// Exact lookup, plus a lowercase retry for first-letter-capitalized forms.
    #[default]
    ExactThenLowercase,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    pub name: String,
    pub case_policy: CasePolicy,
    entries: HashMap<String, Vec<LexEntry>>,
    len: usize,
    max_words: usize,
}

impl Lexicon {
    pub fn new(name: impl Into<String>) -> Self {
        Lexicon {
            name: name.into(),
            ..Default::default()
        }
    }

    /// Parses a lexicon file. Exact duplicate lines collapse into one entry.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::new("");
        lex.extend_from_str(text)?;
        Ok(lex)
    }

    /// Appends the entries of another lexicon file to this one.
    pub fn extend_from_str(&mut self, text: &str) -> Result<(), LexiconError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let entry = parse_line(line, idx + 1)?;
            self.insert(entry);
        }
        Ok(())
    }

    pub fn insert(&mut self, entry: LexEntry) {
        let bucket = self.entries.entry(entry.surface.clone()).or_default();
        if bucket.contains(&entry) {
            return;
        }
        self.max_words = self.max_words.max(word_count(&entry.surface));
        bucket.push(entry);
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Largest number of words in any stored surface.
    pub fn max_words(&self) -> usize {
        self.max_words
    }

    /// All entries, sorted, for serialization and comparison.
    pub fn entries(&self) -> Vec<&LexEntry> {
        let mut all: Vec<&LexEntry> = self.entries.values().flatten().collect();
        all.sort();
        all
    }

    pub fn lookup(&self, surface: &str) -> Vec<&LexEntry> {
        let mut found: Vec<&LexEntry> = self
            .entries
            .get(surface)
            .map(|v| v.iter().collect())
            .unwrap_or_default();
        if starts_uppercase(surface) {
            let lower = surface.to_lowercase();
            if lower != surface {
                if let Some(more) = self.entries.get(&lower) {
                    found.extend(more.iter());
                }
            }
        }
        found
    }

    /// Tests a surface form against a lexical mask.
    ///
    /// `<PRE>` and `<MOT>` are decided by the surface alone. Other masks need
    /// a lookup entry carrying the mask's POS and every one of its codes.
    pub fn token_has_mask(&self, surface: &str, mask: &LexicalMask) -> bool {
        match mask.builtin {
            Some(Builtin::Pre) => starts_uppercase(surface),
            Some(Builtin::Mot) => !surface.is_empty() && surface.chars().all(char::is_alphabetic),
            None => self.lookup(surface).iter().any(|e| e.satisfies(mask)),
        }
    }

    /// Lexicon-only test used for multiword probes: built-in masks are
    /// satisfied by entries storing the built-in's name as a code.
    pub fn entry_has_mask(&self, surface: &str, mask: &LexicalMask) -> bool {
        match mask.builtin {
            Some(b) => self.lookup(surface).iter().any(|e| e.has_code(b.code())),
            None => self.lookup(surface).iter().any(|e| e.satisfies(mask)),
        }
    }

    /// Renders the lexicon back to its line format, one sorted entry per line.
    pub fn to_dic_string(&self) -> String {
        let mut out = String::new();
        for e in self.entries() {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

pub fn starts_uppercase(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase)
}

fn word_count(surface: &str) -> usize {
    surface.split_whitespace().count().max(1)
}

fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if matches!(c, ',' | '.' | '\\' | '+' | ':') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Splits at the first unescaped `sep`, unescaping the head.
fn take_until(s: &str, sep: char) -> Option<(String, &str)> {
    let mut head = String::new();
    let mut chars = s.char_indices();
    while let Some((i, c)) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some((_, esc)) => head.push(esc),
                None => head.push('\\'),
            }
        } else if c == sep {
            return Some((head, &s[i + c.len_utf8()..]));
        } else {
            head.push(c);
        }
    }
    None
}

fn parse_line(line: &str, line_no: usize) -> Result<LexEntry, LexiconError> {
    let bad = |reason| LexiconError::MalformedLine { line_no, reason };
    let (surface, rest) = take_until(line, ',').ok_or(bad("missing comma separator"))?;
    let (lemma, info) = take_until(rest, '.').ok_or(bad("missing period separator"))?;
    if surface.is_empty() {
        return Err(bad("empty surface"));
    }
    let mut infl = info.split(':');
    let gram = infl.next().unwrap_or_default();
    let mut parts = gram.split('+');
    let pos = parts.next().unwrap_or_default().to_string();
    if pos.is_empty() {
        return Err(bad("empty part of speech"));
    }
    let codes = parts
        .filter(|c| !c.is_empty())
        .map(str::to_string)
        .collect();
    let inflections = infl.filter(|c| !c.is_empty()).map(str::to_string).collect();
    let lemma = if lemma.is_empty() {
        surface.clone()
    } else {
        lemma
    };
    Ok(LexEntry {
        surface,
        lemma,
        pos,
        codes,
        inflections,
    })
}
