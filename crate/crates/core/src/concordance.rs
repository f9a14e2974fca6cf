//! Concordances: occurrences with one line of left and right context.
//!
//! On disk a concordance is a versioned TSV file:
//!
//! ```text
//! #concordance v1 <grammar> <text_id> <left> <right>
//! start<TAB>end<TAB>left<TAB>match<TAB>right
//! ```
//!
//! TAB, LF, CR and backslash are escaped as `\t`, `\n`, `\r` and `\\`; in the
//! header fields a space is additionally escaped as `\s`. Lines are in
//! positional order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcher::Occurrence;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConcordanceError {
    #[error("occurrence span {start}..{end} is outside the text ({len} characters)")]
    SpanOutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("malformed concordance line {line_no}: {reason}")]
    MalformedConcordanceLine { line_no: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextConfig {
    pub left_chars: usize,
    pub right_chars: usize,
}

impl Default for ContextConfig {
    fn default() -> Self {
        ContextConfig {
            left_chars: 40,
            right_chars: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConcordanceLine {
    pub start: usize,
    pub end: usize,
    pub left: String,
    /// The merged occurrence text, outputs included.
    pub matched: String,
    pub right: String,
}

impl ConcordanceLine {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &ConcordanceLine) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn same_span(&self, other: &ConcordanceLine) -> bool {
        self.start == other.start && self.end == other.end
    }

    fn key(&self) -> (usize, usize, &str) {
        (self.start, self.end, &self.matched)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concordance {
    pub source_grammar: String,
    pub source_text_id: String,
    pub context: ContextConfig,
    pub lines: Vec<ConcordanceLine>,
}

impl Concordance {
    pub fn new(
        source_grammar: impl Into<String>,
        source_text_id: impl Into<String>,
        context: ContextConfig,
    ) -> Self {
        Concordance {
            source_grammar: source_grammar.into(),
            source_text_id: source_text_id.into(),
            context,
            lines: Vec::new(),
        }
    }

    /// Sorts by position and collapses duplicate (start, end, match) lines.
    pub fn normalize(&mut self) {
        self.lines
            .sort_by(|a, b| a.key().cmp(&b.key()).then_with(|| a.cmp(b)));
        self.lines.dedup_by(|a, b| a.key() == b.key());
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

fn normalize_newlines(s: &str) -> String {
    s.chars()
        .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
        .collect()
}

/// One line per distinct occurrence, contexts clipped at the text bounds.
pub fn build_concordance(
    occs: &[Occurrence],
    text: &str,
    text_id: &str,
    cfg: ContextConfig,
) -> Result<Concordance, ConcordanceError> {
    let chars: Vec<char> = text.chars().collect();
    let grammar = occs.first().map(|o| o.grammar.clone()).unwrap_or_default();
    let mut c = Concordance::new(grammar, text_id, cfg);
    for o in occs {
        if o.start >= o.end || o.end > chars.len() {
            return Err(ConcordanceError::SpanOutOfBounds {
                start: o.start,
                end: o.end,
                len: chars.len(),
            });
        }
        let left_from = o.start.saturating_sub(cfg.left_chars);
        let right_to = (o.end + cfg.right_chars).min(chars.len());
        let left: String = chars[left_from..o.start].iter().collect();
        let right: String = chars[o.end..right_to].iter().collect();
        c.lines.push(ConcordanceLine {
            start: o.start,
            end: o.end,
            left: normalize_newlines(&left),
            matched: o.merged.clone(),
            right: normalize_newlines(&right),
        });
    }
    c.normalize();
    Ok(c)
}

fn escape(s: &str, header: bool) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            ' ' if header => out.push_str("\\s"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut it = s.chars();
    while let Some(c) = it.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        out.push(match it.next()? {
            '\\' => '\\',
            't' => '\t',
            'n' => '\n',
            'r' => '\r',
            's' => ' ',
            _ => return None,
        });
    }
    Some(out)
}

pub fn write_concordance(c: &Concordance) -> String {
    let mut out = format!(
        "#concordance v1 {} {} {} {}\n",
        escape(&c.source_grammar, true),
        escape(&c.source_text_id, true),
        c.context.left_chars,
        c.context.right_chars
    );
    for l in &c.lines {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            l.start,
            l.end,
            escape(&l.left, false),
            escape(&l.matched, false),
            escape(&l.right, false)
        ));
    }
    out
}

pub fn parse_concordance(s: &str) -> Result<Concordance, ConcordanceError> {
    let bad = |line_no: usize, reason: &str| ConcordanceError::MalformedConcordanceLine {
        line_no,
        reason: reason.to_string(),
    };
    let mut lines = s.split('\n');
    let header = lines.next().unwrap_or_default();
    let fields: Vec<&str> = header.split(' ').collect();
    let [magic, version, grammar, text_id, left, right] = fields.as_slice() else {
        return Err(bad(
            1,
            "expected `#concordance v1 <grammar> <text_id> <left> <right>`",
        ));
    };
    if *magic != "#concordance" || *version != "v1" {
        return Err(bad(1, "not a v1 concordance file"));
    }
    let mut c = Concordance::new(
        unescape(grammar).ok_or_else(|| bad(1, "bad escape in grammar name"))?,
        unescape(text_id).ok_or_else(|| bad(1, "bad escape in text id"))?,
        ContextConfig {
            left_chars: left.parse().map_err(|_| bad(1, "bad left width"))?,
            right_chars: right.parse().map_err(|_| bad(1, "bad right width"))?,
        },
    );
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let [start, end, left, matched, right] = cols.as_slice() else {
            return Err(bad(line_no, "expected 5 tab-separated fields"));
        };
        let start: usize = start
            .parse()
            .map_err(|_| bad(line_no, "bad start offset"))?;
        let end: usize = end.parse().map_err(|_| bad(line_no, "bad end offset"))?;
        if start >= end {
            return Err(bad(line_no, "start must be before end"));
        }
        let field = |f: &str| unescape(f).ok_or_else(|| bad(line_no, "bad escape sequence"));
        c.lines.push(ConcordanceLine {
            start,
            end,
            left: field(left)?,
            matched: field(matched)?,
            right: field(right)?,
        });
    }
    let sorted = c.lines.windows(2).all(|w| w[0].key() <= w[1].key());
    if !sorted {
        c.normalize();
    }
    Ok(c)
}
