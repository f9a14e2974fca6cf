//! Choosing which grammars to keep from pairwise relation reports, and
//! assembling the kept ones under a main graph that calls each of them.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concorddiff::{Action, RelationReport, Side};
use crate::grammar::{GrammarError, GrammarSet, Graph, GraphBox, InputAtom};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComposerError {
    #[error("no relation report for the pair ({0}, {1})")]
    MissingPair(String, String),
    #[error("the keep set is empty")]
    EmptyKeepSet,
    #[error("invalid main graph name `{0}`")]
    InvalidName(String),
    #[error("graph `{0}` is defined differently in two components")]
    ConflictingGraph(String),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeepDecision {
    pub grammar: String,
    pub kept: bool,
    pub reason: Vec<String>,
}

/// Indexes reports by their `(grammar_x, grammar_y)` names.
pub fn index_reports(reports: &[RelationReport]) -> BTreeMap<(String, String), RelationReport> {
    reports
        .iter()
        .map(|r| ((r.grammar_x.clone(), r.grammar_y.clone()), r.clone()))
        .collect()
}

/// Walks all unordered pairs in lexicographic order and applies each
/// report's consequence. A dropped grammar stays dropped, and later reports
/// that involve it are skipped.
pub fn select_keep_set(
    grammars: &[String],
    reports: &BTreeMap<(String, String), RelationReport>,
) -> Result<Vec<KeepDecision>, ComposerError> {
    let names: Vec<&String> = grammars
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut pairs = Vec::new();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let key = ((*a).clone(), (*b).clone());
            let rev = ((*b).clone(), (*a).clone());
            let report = reports
                .get(&key)
                .or_else(|| reports.get(&rev))
                .ok_or_else(|| ComposerError::MissingPair((*a).clone(), (*b).clone()))?;
            pairs.push((*a, *b, report));
        }
    }

    let mut dropped: BTreeSet<&str> = BTreeSet::new();
    let mut reasons: BTreeMap<&str, Vec<String>> =
        names.iter().map(|n| (n.as_str(), Vec::new())).collect();
    for (a, b, r) in pairs {
        if dropped.contains(a.as_str()) || dropped.contains(b.as_str()) {
            continue;
        }
        let (x, y) = (r.grammar_x.as_str(), r.grammar_y.as_str());
        let name_of = |side: Side| if side == Side::X { x } else { y };
        match r.action {
            Action::KeepEither => {
                dropped.insert(b);
                reasons.get_mut(b.as_str()).unwrap().push(format!(
                    "{:?} with {a}: kept the lexicographically smaller name",
                    r.relation
                ));
                reasons
                    .get_mut(a.as_str())
                    .unwrap()
                    .push(format!("{:?} with {b}: kept", r.relation));
            }
            action => match action.dropped_side() {
                Some(side) => {
                    let (loser, winner) = (name_of(side), name_of(side.other()));
                    dropped.insert(loser);
                    reasons.get_mut(loser).unwrap().push(format!(
                        "{:?} ({x} vs {y}): {action}, dropped in favour of {winner}",
                        r.relation
                    ));
                    reasons
                        .get_mut(winner)
                        .unwrap()
                        .push(format!("{:?} ({x} vs {y}): {action}", r.relation));
                }
                None => {
                    let note = if action == Action::AnalyzeAmbiguity {
                        format!("{:?} ({x} vs {y}): ambiguity to analyze", r.relation)
                    } else {
                        format!("{:?} ({x} vs {y}): keep both", r.relation)
                    };
                    reasons.get_mut(a.as_str()).unwrap().push(note.clone());
                    reasons.get_mut(b.as_str()).unwrap().push(note);
                }
            },
        }
    }

    Ok(names
        .iter()
        .map(|n| KeepDecision {
            grammar: (*n).clone(),
            kept: !dropped.contains(n.as_str()),
            reason: reasons.remove(n.as_str()).unwrap_or_default(),
        })
        .collect())
}

/// A main graph with one subgraph-call box per kept grammar, in parallel.
pub fn compose_main(kept: &[String], name: &str) -> Result<Graph, ComposerError> {
    if kept.is_empty() {
        return Err(ComposerError::EmptyKeepSet);
    }
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(ComposerError::InvalidName(name.to_string()));
    }
    let mut g = Graph {
        name: name.to_string(),
        boxes: Vec::new(),
        edges: BTreeSet::new(),
        initial: "init".into(),
        final_: "final".into(),
    };
    for (i, grammar) in kept.iter().enumerate() {
        let id = format!("call{}", i + 1);
        g.boxes.push(GraphBox {
            id: id.clone(),
            alternatives: vec![vec![InputAtom::call(grammar.clone())]],
            output: None,
        });
        g.edges.insert((g.initial.clone(), id.clone()));
        g.edges.insert((id, g.final_.clone()));
    }
    Ok(g)
}

/// Merges the components' graphs under a new main graph calling each
/// component's main.
pub fn compose_set(components: &[&GrammarSet], name: &str) -> Result<GrammarSet, ComposerError> {
    let mains: Vec<String> = components.iter().map(|gs| gs.main.clone()).collect();
    let main = compose_main(&mains, name)?;
    let mut graphs: BTreeMap<String, Graph> = BTreeMap::new();
    for gs in components {
        for (n, g) in &gs.graphs {
            match graphs.get(n) {
                Some(existing) if existing != g => {
                    return Err(ComposerError::ConflictingGraph(n.clone()))
                }
                Some(_) => {}
                None => {
                    graphs.insert(n.clone(), g.clone());
                }
            }
        }
    }
    if graphs.contains_key(name) {
        return Err(ComposerError::ConflictingGraph(name.to_string()));
    }
    let mut all: Vec<Graph> = graphs.into_values().collect();
    all.push(main);
    Ok(GrammarSet::new(all, name)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concorddiff::{DiffCounts, Relation};
    use crate::grammar::{parse_graph, render_graph, validate};

    fn report(x: &str, y: &str, relation: Relation, action: Action) -> RelationReport {
        RelationReport {
            grammar_x: x.into(),
            grammar_y: y.into(),
            relation,
            action,
            alternative: None,
            review_unique: false,
            counts: DiffCounts::default(),
        }
    }

    fn kept(decisions: &[KeepDecision]) -> Vec<&str> {
        decisions
            .iter()
            .filter(|d| d.kept)
            .map(|d| d.grammar.as_str())
            .collect()
    }

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn disjoint_keeps_both() {
        let reps = index_reports(&[report("G1", "G2", Relation::Disjoint, Action::KeepBoth)]);
        let d = select_keep_set(&names(&["G1", "G2"]), &reps).unwrap();
        assert_eq!(kept(&d), ["G1", "G2"]);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn subset_keeps_superset() {
        let reps = index_reports(&[report("A", "B", Relation::XSubsetOfY, Action::KeepY)]);
        assert_eq!(
            kept(&select_keep_set(&names(&["A", "B"]), &reps).unwrap()),
            ["B"]
        );
        // the same report stored with swapped sides
        let reps = index_reports(&[report("B", "A", Relation::YSubsetOfX, Action::KeepX)]);
        assert_eq!(
            kept(&select_keep_set(&names(&["A", "B"]), &reps).unwrap()),
            ["B"]
        );
    }

    #[test]
    fn equal_then_subset_chain() {
        let reps = index_reports(&[
            report("A", "B", Relation::Equal, Action::KeepEither),
            report("A", "C", Relation::XSubsetOfY, Action::KeepY),
            report("B", "C", Relation::XSubsetOfY, Action::KeepY),
        ]);
        let d = select_keep_set(&names(&["C", "B", "A"]), &reps).unwrap();
        assert_eq!(kept(&d), ["C"]);
        assert_eq!(
            d.iter().map(|d| d.grammar.as_str()).collect::<Vec<_>>(),
            ["A", "B", "C"]
        );
    }

    #[test]
    fn longer_and_ambiguous() {
        let reps = index_reports(&[
            report(
                "A",
                "B",
                Relation::SimilarOverlap,
                Action::KeepLonger(Side::Y),
            ),
            report("A", "C", Relation::SimilarOverlap, Action::AnalyzeAmbiguity),
            report(
                "B",
                "C",
                Relation::EqualDifferentOutputs,
                Action::AnalyzeAmbiguity,
            ),
        ]);
        let d = select_keep_set(&names(&["A", "B", "C"]), &reps).unwrap();
        assert_eq!(kept(&d), ["B", "C"]);
        assert!(d[2].reason.iter().any(|r| r.contains("ambiguity")));
    }

    #[test]
    fn missing_pair() {
        let reps = index_reports(&[report("A", "B", Relation::Disjoint, Action::KeepBoth)]);
        assert_eq!(
            select_keep_set(&names(&["A", "B", "C"]), &reps).unwrap_err(),
            ComposerError::MissingPair("A".into(), "C".into())
        );
    }

    #[test]
    fn main_graph_shape() {
        let g = compose_main(&names(&["G1", "G2"]), "Main").unwrap();
        assert_eq!(g.boxes.len(), 2);
        assert!(validate(&g).is_empty());
        assert_eq!(parse_graph(&render_graph(&g)).unwrap(), g);
        assert_eq!(
            compose_main(&names(&["G1"]), "Main").unwrap().boxes.len(),
            1
        );
        assert_eq!(
            compose_main(&[], "Main").unwrap_err(),
            ComposerError::EmptyKeepSet
        );
        assert!(matches!(
            compose_main(&names(&["G1"]), "bad name"),
            Err(ComposerError::InvalidName(_))
        ));
    }
}
