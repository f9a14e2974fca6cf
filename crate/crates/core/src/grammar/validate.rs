use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

use super::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DiagnosticKind {
    Unreachable(String),
    NotCoReachable(String),
    FinalHasSuccessor,
    InitialHasPredecessor,
    /// The initial state reaches the final one without consuming input.
    EpsilonOnlyPath,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
}

impl Diagnostic {
    fn warning(kind: DiagnosticKind) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            kind,
        }
    }

    fn error(kind: DiagnosticKind) -> Self {
        Diagnostic {
            severity: Severity::Error,
            kind,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match &self.kind {
            DiagnosticKind::Unreachable(b) => {
                write!(f, "{sev}: box `{b}` is unreachable from the initial state")
            }
            DiagnosticKind::NotCoReachable(b) => {
                write!(f, "{sev}: box `{b}` cannot reach the final state")
            }
            DiagnosticKind::FinalHasSuccessor => {
                write!(f, "{sev}: the final state has an outgoing edge")
            }
            DiagnosticKind::InitialHasPredecessor => {
                write!(f, "{sev}: the initial state has an incoming edge")
            }
            DiagnosticKind::EpsilonOnlyPath => {
                write!(f, "{sev}: a path from initial to final consumes no input")
            }
        }
    }
}

/// Structural checks on a single graph. An empty list means the graph is valid.
pub fn validate(g: &Graph) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if g.edges.iter().any(|(from, _)| from == &g.final_) {
        diags.push(Diagnostic::error(DiagnosticKind::FinalHasSuccessor));
    }
    if g.edges.iter().any(|(_, to)| to == &g.initial) {
        diags.push(Diagnostic::error(DiagnosticKind::InitialHasPredecessor));
    }

    let forward = bfs(&g.initial, |n| {
        g.edges
            .iter()
            .filter(move |(f, _)| f == n)
            .map(|(_, t)| t.as_str())
            .collect()
    });
    let backward = bfs(&g.final_, |n| {
        g.edges
            .iter()
            .filter(move |(_, t)| t == n)
            .map(|(f, _)| f.as_str())
            .collect()
    });
    for b in &g.boxes {
        if !forward.contains(b.id.as_str()) {
            diags.push(Diagnostic::warning(DiagnosticKind::Unreachable(
                b.id.clone(),
            )));
        } else if !backward.contains(b.id.as_str()) {
            diags.push(Diagnostic::warning(DiagnosticKind::NotCoReachable(
                b.id.clone(),
            )));
        }
    }

    // Walk only through boxes that can be crossed by an `<E>` alternative.
    let passable = |id: &str| {
        g.get_box(id).is_some_and(|b| {
            b.alternatives
                .iter()
                .any(|alt| alt.len() == 1 && alt[0].is_epsilon())
        })
    };
    let eps = bfs(&g.initial, |n| {
        if n != g.initial && !passable(n) {
            return Vec::new();
        }
        g.edges
            .iter()
            .filter(move |(f, _)| f == n)
            .map(|(_, t)| t.as_str())
            .collect()
    });
    if eps.contains(g.final_.as_str()) {
        diags.push(Diagnostic::error(DiagnosticKind::EpsilonOnlyPath));
    }
    diags
}

fn bfs<'a>(start: &'a str, next: impl Fn(&str) -> Vec<&'a str>) -> HashSet<&'a str> {
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(n) = queue.pop_front() {
        for m in next(n) {
            if seen.insert(m) {
                queue.push_back(m);
            }
        }
    }
    seen
}
