use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{align, check_same_text, DiffClass, DiffError, Side};
use crate::concordance::{Concordance, ConcordanceLine};

/// Set relation between two concordances C_X and C_Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Equal,
    EqualDifferentOutputs,
    XSubsetOfY,
    YSubsetOfX,
    Intersecting,
    DisjointXEmpty,
    DisjointYEmpty,
    Disjoint,
    SimilarOverlap,
    DisjointWithSomeOverlap,
}

/// What to do with the two grammars given their relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    KeepX,
    KeepY,
    KeepEither,
    KeepBoth,
    AnalyzeAmbiguity,
    KeepLonger(Side),
}

impl Action {
    /// The grammar this action discards, if it discards exactly one.
    pub fn dropped_side(self) -> Option<Side> {
        match self {
            Action::KeepX | Action::KeepLonger(Side::X) => Some(Side::Y),
            Action::KeepY | Action::KeepLonger(Side::Y) => Some(Side::X),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::KeepLonger(side) => write!(f, "KeepLonger({side:?})"),
            other => write!(f, "{other:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DiffCounts {
    /// Common pairs (one line on each side per pair).
    pub common: usize,
    /// Output-conflict pairs.
    pub conflict: usize,
    pub partial_x: usize,
    pub partial_y: usize,
    pub unique_x: usize,
    pub unique_y: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationReport {
    pub grammar_x: String,
    pub grammar_y: String,
    pub relation: Relation,
    pub action: Action,
    /// For `DisjointWithSomeOverlap`: the action to take if the unique lines
    /// turn out to be irrelevant (keep the grammar with longer matches).
    pub alternative: Option<Action>,
    /// Unique lines need a human relevance check before acting.
    pub review_unique: bool,
    pub counts: DiffCounts,
}

type Identity<'a> = (usize, usize, &'a str);

fn identities(c: &Concordance) -> BTreeSet<Identity<'_>> {
    c.lines
        .iter()
        .map(|l| (l.start, l.end, l.matched.as_str()))
        .collect()
}

fn spans(c: &Concordance) -> Vec<(usize, usize)> {
    let mut s: Vec<(usize, usize)> = c.lines.iter().map(|l| (l.start, l.end)).collect();
    s.sort();
    s
}

/// Longer side if every pair agrees on which side is longer.
fn consistently_longer<'a>(
    pairs: impl Iterator<Item = (&'a ConcordanceLine, &'a ConcordanceLine)>,
) -> Option<Side> {
    let mut verdict: Option<Side> = None;
    for (x, y) in pairs {
        let side = match x.len().cmp(&y.len()) {
            std::cmp::Ordering::Greater => Side::X,
            std::cmp::Ordering::Less => Side::Y,
            std::cmp::Ordering::Equal => return None,
        };
        if verdict.is_some_and(|v| v != side) {
            return None;
        }
        verdict = Some(side);
    }
    verdict
}

/// Infers the set relation and its consequence for a pair of concordances.
pub fn infer_relation(cx: &Concordance, cy: &Concordance) -> Result<RelationReport, DiffError> {
    check_same_text(cx, cy)?;
    let counts = count_classes(cx, cy)?;
    let (sx, sy) = (identities(cx), identities(cy));

    let mut alternative = None;
    let mut review_unique = false;
    let (relation, action) = if sx == sy {
        (Relation::Equal, Action::KeepEither)
    } else if spans(cx) == spans(cy) {
        (Relation::EqualDifferentOutputs, Action::AnalyzeAmbiguity)
    } else if !sx.is_empty() && sx.is_subset(&sy) {
        (Relation::XSubsetOfY, Action::KeepY)
    } else if !sy.is_empty() && sy.is_subset(&sx) {
        (Relation::YSubsetOfX, Action::KeepX)
    } else if !sx.is_disjoint(&sy) {
        (Relation::Intersecting, Action::KeepBoth)
    } else if sx.is_empty() {
        (Relation::DisjointXEmpty, Action::KeepY)
    } else if sy.is_empty() {
        (Relation::DisjointYEmpty, Action::KeepX)
    } else if cx.len() == cy.len() && cx.lines.iter().zip(&cy.lines).all(|(x, y)| x.overlaps(y)) {
        let action = match consistently_longer(cx.lines.iter().zip(&cy.lines)) {
            Some(side) => Action::KeepLonger(side),
            None => Action::AnalyzeAmbiguity,
        };
        (Relation::SimilarOverlap, action)
    } else if cx
        .lines
        .iter()
        .any(|x| cy.lines.iter().any(|y| x.overlaps(y)))
    {
        review_unique = counts.unique_x + counts.unique_y > 0;
        let overlapping = cx.lines.iter().flat_map(|x| {
            cy.lines
                .iter()
                .filter(move |y| x.overlaps(y))
                .map(move |y| (x, y))
        });
        alternative = consistently_longer(overlapping).map(Action::KeepLonger);
        (Relation::DisjointWithSomeOverlap, Action::KeepBoth)
    } else {
        (Relation::Disjoint, Action::KeepBoth)
    };

    Ok(RelationReport {
        grammar_x: cx.source_grammar.clone(),
        grammar_y: cy.source_grammar.clone(),
        relation,
        action,
        alternative,
        review_unique,
        counts,
    })
}

fn count_classes(cx: &Concordance, cy: &Concordance) -> Result<DiffCounts, DiffError> {
    let mut c = DiffCounts::default();
    for d in align(cx, cy)? {
        match (d.class, d.side) {
            (DiffClass::Common, Side::X) => c.common += 1,
            (DiffClass::OutputConflict, Side::X) => c.conflict += 1,
            (DiffClass::PartialOverlap, Side::X) => c.partial_x += 1,
            (DiffClass::PartialOverlap, Side::Y) => c.partial_y += 1,
            (DiffClass::UniqueX, _) => c.unique_x += 1,
            (DiffClass::UniqueY, _) => c.unique_y += 1,
            _ => {}
        }
    }
    Ok(c)
}

/// Human-readable consequence of a relation report.
pub fn recommend(r: &RelationReport) -> String {
    let mut text = match r.action {
        Action::KeepY => "Discard G_X: every occurrence it finds is also found by G_Y.".to_string(),
        Action::KeepX => "Discard G_Y: every occurrence it finds is also found by G_X.".to_string(),
        Action::KeepEither => {
            "Keep either G_X or G_Y: they find exactly the same occurrences.".to_string()
        }
        Action::KeepBoth => "Keep both G_X and G_Y: they recognize different names.".to_string(),
        Action::AnalyzeAmbiguity => "Same spans, different outputs: analyze ambiguity.".to_string(),
        Action::KeepLonger(Side::X) => {
            "Keep G_X: its occurrences overlap those of G_Y and are always longer.".to_string()
        }
        Action::KeepLonger(Side::Y) => {
            "Keep G_Y: its occurrences overlap those of G_X and are always longer.".to_string()
        }
    };
    if r.review_unique {
        text.push_str(" Review the occurrences found by only one grammar");
        match r.alternative {
            Some(Action::KeepLonger(side)) => text.push_str(&format!(
                "; if they are not relevant, keep only G_{side:?}, which matches longer occurrences."
            )),
            _ => text.push('.'),
        }
    }
    let c = &r.counts;
    text.push_str(&format!(
        " [common={} conflict={} partial_x={} partial_y={} unique_x={} unique_y={}]",
        c.common, c.conflict, c.partial_x, c.partial_y, c.unique_x, c.unique_y
    ));
    text
}
