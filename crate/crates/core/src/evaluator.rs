//! Gold annotations, system annotation and strict exact-span scoring.
//!
//! Annotated files are XML fragments with inline, non-nested
//! `<EM CATEG="..." TIPO="...">...</EM>` tags. Any other markup tag is
//! removed from the plain text but remembered so a document can be written
//! back byte for byte. Offsets are character offsets in the plain text.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcher::Occurrence;

/// Output pair delimiting the name inside a grammar's merged output.
pub const NAME_OPEN: &str = "<NOME>";
pub const NAME_CLOSE: &str = "</NOME>";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("malformed tag at character {position}: {reason}")]
    MalformedTag { position: usize, reason: String },
    #[error("nested <EM> tag at character {position}")]
    NestedTag { position: usize },
    #[error("occurrences {first:?} and {second:?} overlap")]
    OverlappingOccurrences {
        first: (usize, usize),
        second: (usize, usize),
    },
    #[error("system and gold files have different plain text")]
    TextMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GoldAnnotation {
    pub start: usize,
    pub end: usize,
    pub category: String,
    pub subtype: String,
}

/// A markup tag removed from the plain text, with its plain-text offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTag {
    pub offset: usize,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldDocument {
    pub text: String,
    pub annotations: Vec<GoldAnnotation>,
    pub tags: Vec<RawTag>,
}

impl GoldDocument {
    /// Writes the tags back into the plain text.
    pub fn render(&self) -> String {
        let mut out = String::with_capacity(self.text.len() + self.tags.len() * 24);
        let mut tags = self.tags.iter().peekable();
        for (i, c) in self.text.chars().enumerate() {
            while let Some(t) = tags.next_if(|t| t.offset <= i) {
                out.push_str(&t.raw);
            }
            out.push(c);
        }
        for t in tags {
            out.push_str(&t.raw);
        }
        out
    }
}

fn attributes(tag_body: &str) -> BTreeMap<String, String> {
    let mut attrs = BTreeMap::new();
    let mut rest = tag_body;
    while let Some(eq) = rest.find("=\"") {
        let name = rest[..eq]
            .trim()
            .rsplit(char::is_whitespace)
            .next()
            .unwrap_or("")
            .to_string();
        let after = &rest[eq + 2..];
        let Some(close) = after.find('"') else { break };
        attrs.insert(name, after[..close].to_string());
        rest = &after[close + 1..];
    }
    attrs
}

/// Splits an annotated document into plain text, annotations and markup.
pub fn parse_gold(xml: &str) -> Result<GoldDocument, EvalError> {
    let chars: Vec<char> = xml.chars().collect();
    let mut text = String::with_capacity(xml.len());
    let mut plain_len = 0;
    let mut annotations = Vec::new();
    let mut tags = Vec::new();
    let mut open: Option<(usize, usize, String, String)> = None;
    let mut i = 0;
    while i < chars.len() {
        if chars[i] != '<' {
            text.push(chars[i]);
            plain_len += 1;
            i += 1;
            continue;
        }
        let Some(len) = chars[i..].iter().position(|&c| c == '>') else {
            return Err(EvalError::MalformedTag {
                position: i,
                reason: "unterminated tag".into(),
            });
        };
        let raw: String = chars[i..=i + len].iter().collect();
        let body = &raw[1..raw.len() - 1];
        let name = body
            .split(|c: char| c.is_whitespace() || c == '/')
            .find(|s| !s.is_empty())
            .unwrap_or("");
        if body.starts_with('/') && name == "EM" {
            let Some((position, start, category, subtype)) = open.take() else {
                return Err(EvalError::MalformedTag {
                    position: i,
                    reason: "</EM> without <EM>".into(),
                });
            };
            if start == plain_len {
                return Err(EvalError::MalformedTag {
                    position,
                    reason: "empty <EM> element".into(),
                });
            }
            annotations.push(GoldAnnotation {
                start,
                end: plain_len,
                category,
                subtype,
            });
        } else if name == "EM" && !body.starts_with('/') {
            if open.is_some() {
                return Err(EvalError::NestedTag { position: i });
            }
            let attrs = attributes(body);
            let category = attrs
                .get("CATEG")
                .cloned()
                .ok_or_else(|| EvalError::MalformedTag {
                    position: i,
                    reason: "<EM> without CATEG".into(),
                })?;
            let subtype = attrs.get("TIPO").cloned().unwrap_or_default();
            open = Some((i, plain_len, category, subtype));
        }
        tags.push(RawTag {
            offset: plain_len,
            raw,
        });
        i += len + 1;
    }
    if let Some((position, ..)) = open {
        return Err(EvalError::MalformedTag {
            position,
            reason: "<EM> is never closed".into(),
        });
    }
    Ok(GoldDocument {
        text,
        annotations,
        tags,
    })
}

fn em_open(categ: &str, tipo: &str) -> String {
    if tipo.is_empty() {
        format!("<EM CATEG=\"{categ}\">")
    } else {
        format!("<EM CATEG=\"{categ}\" TIPO=\"{tipo}\">")
    }
}

/// Character span of the tagged name inside an occurrence: the region
/// between `<NOME>` and `</NOME>`, or the whole occurrence without them.
pub fn tagged_region(o: &Occurrence) -> (usize, usize) {
    let open = o.insertions.iter().position(|i| i.text == NAME_OPEN);
    let close = open.and_then(|p| {
        o.insertions[p + 1..]
            .iter()
            .find(|i| i.text == NAME_CLOSE)
            .map(|i| i.offset)
    });
    match (open, close) {
        (Some(p), Some(end)) if end > o.insertions[p].offset => {
            (o.start + o.insertions[p].offset, o.start + end)
        }
        _ => (o.start, o.end),
    }
}

/// Leftmost-longest selection: scanning by start offset, keeps an occurrence
/// when it does not overlap the previously kept one. Among equal spans the
/// first in (merged text) order wins.
pub fn non_overlapping(occs: &[Occurrence]) -> Vec<Occurrence> {
    let mut sorted: Vec<&Occurrence> = occs.iter().collect();
    sorted.sort_by(|a, b| {
        (a.start, std::cmp::Reverse(a.end), &a.merged).cmp(&(
            b.start,
            std::cmp::Reverse(b.end),
            &b.merged,
        ))
    });
    let mut kept: Vec<Occurrence> = Vec::new();
    for o in sorted {
        if kept.last().is_none_or(|k| o.start >= k.end) {
            kept.push(o.clone());
        }
    }
    kept
}

/// Wraps the tagged region of every occurrence in an `<EM>` element.
pub fn annotate(
    text: &str,
    occs: &[Occurrence],
    categ: &str,
    tipo: &str,
) -> Result<String, EvalError> {
    let doc = GoldDocument {
        text: text.to_string(),
        annotations: Vec::new(),
        tags: Vec::new(),
    };
    annotate_document(&doc, occs, categ, tipo)
}

/// Like [`annotate`], on a parsed document: its `<EM>` tags are replaced by
/// the system's, every other markup tag is kept in place.
pub fn annotate_document(
    doc: &GoldDocument,
    occs: &[Occurrence],
    categ: &str,
    tipo: &str,
) -> Result<String, EvalError> {
    let mut sorted: Vec<&Occurrence> = occs.iter().collect();
    sorted.sort_by_key(|o| (o.start, o.end));
    for w in sorted.windows(2) {
        if w[1].start < w[0].end {
            return Err(EvalError::OverlappingOccurrences {
                first: (w[0].start, w[0].end),
                second: (w[1].start, w[1].end),
            });
        }
    }
    // at one offset: closing EM, then existing markup, then opening EM
    let mut marks: Vec<(usize, u8, String)> = doc
        .tags
        .iter()
        .filter(|t| !is_em_tag(&t.raw))
        .map(|t| (t.offset, 1, t.raw.clone()))
        .collect();
    for o in sorted {
        let (start, end) = tagged_region(o);
        marks.push((start, 2, em_open(categ, tipo)));
        marks.push((end, 0, "</EM>".to_string()));
    }
    marks.sort_by_key(|(offset, rank, _)| (*offset, *rank));
    let out = GoldDocument {
        text: doc.text.clone(),
        annotations: Vec::new(),
        tags: marks
            .into_iter()
            .map(|(offset, _, raw)| RawTag { offset, raw })
            .collect(),
    };
    Ok(out.render())
}

fn is_em_tag(raw: &str) -> bool {
    let body = raw.trim_start_matches('<').trim_start_matches('/');
    body.split(|c: char| c.is_whitespace() || c == '>' || c == '/')
        .next()
        == Some("EM")
}

/// Category filter, e.g. PESSOA(INDIVIDUAL) or PESSOA(*).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryFilter {
    pub category: String,
    pub subtype: Option<String>,
}

impl CategoryFilter {
    pub fn new(category: impl Into<String>, subtype: Option<&str>) -> Self {
        CategoryFilter {
            category: category.into(),
            subtype: subtype.map(str::to_string),
        }
    }

    fn admits(&self, a: &GoldAnnotation) -> bool {
        a.category == self.category && self.subtype.as_ref().is_none_or(|s| &a.subtype == s)
    }
}

impl std::fmt::Display for CategoryFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}({})",
            self.category,
            self.subtype.as_deref().unwrap_or("*")
        )
    }
}

/// Precision, recall and F-measure as percentages. Values are kept
/// unrounded; use [`EvalReport::rounded`] for display.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: usize,
    pub n_sys: usize,
    pub n_gold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl EvalReport {
    pub fn from_counts(tp: usize, n_sys: usize, n_gold: usize) -> Self {
        let pct = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                100.0 * num as f64 / den as f64
            }
        };
        let precision = pct(tp, n_sys);
        let recall = pct(tp, n_gold);
        EvalReport {
            tp,
            n_sys,
            n_gold,
            precision,
            recall,
            f_measure: f_measure(precision, recall),
        }
    }

    pub fn rounded(&self) -> Self {
        EvalReport {
            precision: round2(self.precision),
            recall: round2(self.recall),
            f_measure: round2(self.f_measure),
            ..*self
        }
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Half-up rounding to two decimals.
pub fn round2(x: f64) -> f64 {
    // decimal halves such as 2.675 are stored slightly below the half
    (x * 100.0 + 0.5 + 1e-9).floor() / 100.0
}

/// Strict scoring: a system annotation counts only if an identical gold
/// span exists (same category, and same subtype when the filter names one).
pub fn score(
    sys: &[GoldAnnotation],
    gold: &[GoldAnnotation],
    filter: &CategoryFilter,
) -> EvalReport {
    let key = |a: &GoldAnnotation| {
        let subtype = if filter.subtype.is_some() {
            a.subtype.clone()
        } else {
            String::new()
        };
        (a.start, a.end, a.category.clone(), subtype)
    };
    let mut gold_counts: BTreeMap<_, usize> = BTreeMap::new();
    let mut n_gold = 0;
    for a in gold.iter().filter(|a| filter.admits(a)) {
        *gold_counts.entry(key(a)).or_default() += 1;
        n_gold += 1;
    }
    let mut tp = 0;
    let mut n_sys = 0;
    for a in sys.iter().filter(|a| filter.admits(a)) {
        n_sys += 1;
        if let Some(c) = gold_counts.get_mut(&key(a)).filter(|c| **c > 0) {
            *c -= 1;
            tp += 1;
        }
    }
    EvalReport::from_counts(tp, n_sys, n_gold)
}

/// Parses both documents, checks they share the same plain text, and scores.
pub fn evaluate(
    sys_xml: &str,
    gold_xml: &str,
    filter: &CategoryFilter,
) -> Result<EvalReport, EvalError> {
    let sys = parse_gold(sys_xml)?;
    let gold = parse_gold(gold_xml)?;
    if sys.text != gold.text {
        return Err(EvalError::TextMismatch);
    }
    Ok(score(&sys.annotations, &gold.annotations, filter))
}

/// Aligned plain-text table of one or more reports.
pub fn format_table(rows: &[(String, EvalReport)]) -> String {
    let width = rows
        .iter()
        .map(|(l, _)| l.chars().count())
        .max()
        .unwrap_or(0)
        .max(6);
    let mut out = String::from("# strict exact-span scoring (not SAHARA relaxed scoring)\n");
    let _ = writeln!(
        out,
        "{:<width$}  {:>6}  {:>6}  {:>6}  {:>9}  {:>9}  {:>9}",
        "system", "tp", "n_sys", "n_gold", "precision", "recall", "f-measure"
    );
    for (label, r) in rows {
        let r = r.rounded();
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>6}  {:>6}  {:>9.2}  {:>9.2}  {:>9.2}",
            label, r.tp, r.n_sys, r.n_gold, r.precision, r.recall, r.f_measure
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::Insertion;

    fn ann(start: usize, end: usize, c: &str, t: &str) -> GoldAnnotation {
        GoldAnnotation {
            start,
            end,
            category: c.into(),
            subtype: t.into(),
        }
    }

    #[test]
    fn parses_queen_example() {
        let xml = "a <EM CATEG=\"PESSOA\" TIPO=\"INDIVIDUAL\">rainha Isabel II</EM> surpreendeu";
        let doc = parse_gold(xml).unwrap();
        assert_eq!(doc.text, "a rainha Isabel II surpreendeu");
        assert_eq!(doc.annotations, [ann(2, 18, "PESSOA", "INDIVIDUAL")]);
        assert_eq!(doc.render(), xml);
    }

    #[test]
    fn untagged_text() {
        let doc = parse_gold("só texto").unwrap();
        assert_eq!(doc.text, "só texto");
        assert!(doc.annotations.is_empty());
    }

    #[test]
    fn other_markup_is_stripped_and_restored() {
        let xml = "<DOC DOCID=\"x\">\n<P>O <EM ID=\"1\" CATEG=\"PESSOA\">Zé</EM>.</P>\n</DOC>";
        let doc = parse_gold(xml).unwrap();
        assert_eq!(doc.text, "\nO Zé.\n");
        assert_eq!(doc.annotations, [ann(3, 5, "PESSOA", "")]);
        assert_eq!(doc.render(), xml);
    }

    #[test]
    fn tag_errors() {
        assert_eq!(
            parse_gold("<EM CATEG=\"A\"><EM CATEG=\"B\">x</EM></EM>").unwrap_err(),
            EvalError::NestedTag { position: 14 }
        );
        assert!(matches!(
            parse_gold("x</EM>"),
            Err(EvalError::MalformedTag { position: 1, .. })
        ));
        assert!(matches!(
            parse_gold("<EM CATEG=\"A\">x"),
            Err(EvalError::MalformedTag { position: 0, .. })
        ));
        assert!(matches!(
            parse_gold("a <EM"),
            Err(EvalError::MalformedTag { position: 2, .. })
        ));
        assert!(matches!(
            parse_gold("<EM>x</EM>"),
            Err(EvalError::MalformedTag { .. })
        ));
        assert!(matches!(
            parse_gold("<EM CATEG=\"A\"></EM>"),
            Err(EvalError::MalformedTag { .. })
        ));
    }

    fn occ(start: usize, end: usize, ins: &[(usize, &str)]) -> Occurrence {
        let insertions = ins
            .iter()
            .map(|&(offset, t)| Insertion {
                offset,
                text: t.into(),
            })
            .collect();
        Occurrence::new(start, end, "x".repeat(end - start), insertions, "G".into())
    }

    #[test]
    fn annotate_uses_name_tags() {
        let text = "a Sra. Joana da Silva falou";
        let o = occ(2, 21, &[(5, NAME_OPEN), (19, NAME_CLOSE)]);
        assert_eq!(
            annotate(text, &[o], "PESSOA", "INDIVIDUAL").unwrap(),
            "a Sra. <EM CATEG=\"PESSOA\" TIPO=\"INDIVIDUAL\">Joana da Silva</EM> falou"
        );
        let o = occ(2, 21, &[(0, NAME_OPEN), (19, NAME_CLOSE)]);
        assert_eq!(
            annotate(text, &[o], "PESSOA", "INDIVIDUAL").unwrap(),
            "a <EM CATEG=\"PESSOA\" TIPO=\"INDIVIDUAL\">Sra. Joana da Silva</EM> falou"
        );
        assert_eq!(annotate(text, &[], "PESSOA", "INDIVIDUAL").unwrap(), text);
        let plain = occ(2, 6, &[]);
        assert_eq!(
            annotate(text, &[plain], "X", "").unwrap(),
            "a <EM CATEG=\"X\">Sra.</EM> Joana da Silva falou"
        );
    }

    #[test]
    fn annotate_rejects_overlaps() {
        let r = annotate("abcdefgh", &[occ(0, 4, &[]), occ(2, 6, &[])], "X", "Y");
        assert_eq!(
            r.unwrap_err(),
            EvalError::OverlappingOccurrences {
                first: (0, 4),
                second: (2, 6)
            }
        );
    }

    #[test]
    fn document_markup_survives_annotation() {
        let doc =
            parse_gold("<DOC><P>a Sra. <EM CATEG=\"PESSOA\">Joana</EM> falou</P>\n</DOC>").unwrap();
        let o = occ(2, 12, &[(5, NAME_OPEN), (10, NAME_CLOSE)]);
        let out = annotate_document(&doc, &[o], "PESSOA", "INDIVIDUAL").unwrap();
        assert_eq!(
            out,
            "<DOC><P>a Sra. <EM CATEG=\"PESSOA\" TIPO=\"INDIVIDUAL\">Joana</EM> falou</P>\n</DOC>"
        );
        let whole = occ(0, 1, &[]);
        let out = annotate_document(&parse_gold("<P>a</P>").unwrap(), &[whole], "X", "").unwrap();
        assert_eq!(out, "<P><EM CATEG=\"X\">a</EM></P>");
    }

    #[test]
    fn leftmost_longest_selection() {
        let kept = non_overlapping(&[
            occ(2, 6, &[]),
            occ(0, 3, &[]),
            occ(0, 4, &[]),
            occ(4, 8, &[]),
            occ(9, 10, &[]),
        ]);
        let spans: Vec<(usize, usize)> = kept.iter().map(|o| (o.start, o.end)).collect();
        assert_eq!(spans, [(0, 4), (4, 8), (9, 10)]);
        assert!(non_overlapping(&[]).is_empty());
    }

    #[test]
    fn f_measure_arithmetic() {
        assert!((f_measure(79.75, 74.18) - 76.86).abs() < 0.01);
        assert!((f_measure(79.0, 64.08) - 70.76).abs() < 0.01);
        assert!((f_measure(59.06, 55.22) - 57.07).abs() < 0.01);
        assert_eq!(round2(f_measure(81.0, 60.0)), 68.94);
        assert_eq!(f_measure(0.0, 0.0), 0.0);
        assert_eq!(round2(2.675), 2.68);
        assert_eq!(round2(1.005), 1.01);
    }

    #[test]
    fn scoring_with_filters() {
        let gold = vec![
            ann(0, 5, "PESSOA", "INDIVIDUAL"),
            ann(10, 15, "PESSOA", "CARGO"),
            ann(20, 25, "LOCAL", "HUMANO"),
        ];
        let sys = vec![
            ann(0, 5, "PESSOA", "INDIVIDUAL"),
            ann(10, 15, "PESSOA", "INDIVIDUAL"),
            ann(30, 35, "PESSOA", "INDIVIDUAL"),
        ];
        let ind = score(
            &sys,
            &gold,
            &CategoryFilter::new("PESSOA", Some("INDIVIDUAL")),
        );
        assert_eq!((ind.tp, ind.n_sys, ind.n_gold), (1, 3, 1));
        let any = score(&sys, &gold, &CategoryFilter::new("PESSOA", None));
        assert_eq!((any.tp, any.n_sys, any.n_gold), (2, 3, 2));
        let perfect = score(&gold, &gold, &CategoryFilter::new("PESSOA", None));
        assert_eq!(
            (perfect.precision, perfect.recall, perfect.f_measure),
            (100.0, 100.0, 100.0)
        );
        let none = score(&[], &gold, &CategoryFilter::new("PESSOA", None));
        assert_eq!(
            (none.precision, none.recall, none.f_measure),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn evaluate_checks_text() {
        let f = CategoryFilter::new("PESSOA", None);
        assert_eq!(
            evaluate("abc", "abd", &f).unwrap_err(),
            EvalError::TextMismatch
        );
        let r = evaluate(
            "<EM CATEG=\"PESSOA\">a</EM>bc",
            "<EM CATEG=\"PESSOA\">a</EM>bc",
            &f,
        )
        .unwrap();
        assert_eq!(r.tp, 1);
    }

    #[test]
    fn table_layout() {
        let t = format_table(&[("LG".into(), EvalReport::from_counts(1, 3, 2))]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[2].ends_with("33.33      50.00      40.00"));
    }
}
