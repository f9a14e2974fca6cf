//! Local grammar graphs.
//!
//! A graph is a set of boxes joined by edges between a virtual initial
//! state and a virtual final state. Each box holds one or more
//! alternatives; an alternative is a sequence of input atoms. A box may
//! carry an output string which is spliced into the match in MERGE mode.
//! Graphs call each other by name; a [`GrammarSet`] resolves those calls
//! and rejects recursion.

mod filter;
mod parse;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use filter::{FilterError, MorphFilter};
pub use parse::{parse_graph, render_graph};
pub use validate::{validate, Diagnostic, DiagnosticKind, Severity};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("line {line_no}: {message}")]
    SyntaxError { line_no: usize, message: String },
    #[error("duplicate box id `{0}`")]
    DuplicateBoxId(String),
    #[error("graph has no `init` or no `final` declaration")]
    MissingInitialOrFinal,
    #[error("edge refers to unknown box `{0}`")]
    EdgeToUnknownBox(String),
    #[error("in grammar file `{file}`: {source}")]
    InFile {
        file: String,
        #[source]
        source: Box<GrammarError>,
    },
    #[error("file `{file}` declares graph `{declared}`")]
    NameMismatch { file: String, declared: String },
    #[error("graph `{0}` is defined twice")]
    DuplicateGraph(String),
    #[error("unresolved subgraph `{0}`")]
    UnresolvedSubgraph(String),
    #[error("recursive subgraph call: {}", .0.join(" -> "))]
    RecursiveCall(Vec<String>),
    #[error("graph `{graph}` is invalid: {}", first_error(.diagnostics))]
    Invalid {
        graph: String,
        diagnostics: Vec<Diagnostic>,
    },
}

fn first_error(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .find(|d| d.severity == Severity::Error)
        .map(|d| d.to_string())
        .unwrap_or_default()
}

/// Lexical predicates with a fixed meaning independent of any lexicon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    /// First character is an uppercase letter.
    Pre,
    /// Alphabetic token.
    Mot,
}

impl Builtin {
    pub fn code(self) -> &'static str {
        match self {
            Builtin::Pre => "PRE",
            Builtin::Mot => "MOT",
        }
    }
}

/// A lexical mask such as `<N+PR>`, `<Hum>` or `<PRE>`.
///
/// The first element is read as a part of speech when it consists only of
/// ASCII uppercase letters; every other element is a code.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LexicalMask {
    pub pos: Option<String>,
    pub codes: BTreeSet<String>,
    pub builtin: Option<Builtin>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid lexical mask `{0}`")]
pub struct MaskError(pub String);

impl FromStr for LexicalMask {
    type Err = MaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || MaskError(s.to_string());
        let body = s
            .strip_prefix('<')
            .and_then(|b| b.strip_suffix('>'))
            .ok_or_else(err)?;
        let is_name = |p: &str| {
            !p.is_empty()
                && p.chars()
                    .all(|c| c.is_alphanumeric() || c == '_' || c == '-')
        };
        let parts: Vec<&str> = body.split('+').collect();
        if !parts.iter().all(|p| is_name(p)) || body == "E" {
            return Err(err());
        }
        match parts.as_slice() {
            ["PRE"] => {
                return Ok(LexicalMask {
                    builtin: Some(Builtin::Pre),
                    ..Default::default()
                })
            }
            ["MOT"] => {
                return Ok(LexicalMask {
                    builtin: Some(Builtin::Mot),
                    ..Default::default()
                })
            }
            _ => {}
        }
        let (pos, codes) = if parts[0].chars().all(|c| c.is_ascii_uppercase()) {
            (Some(parts[0].to_string()), &parts[1..])
        } else {
            (None, &parts[..])
        };
        Ok(LexicalMask {
            pos,
            codes: codes.iter().map(|c| c.to_string()).collect(),
            builtin: None,
        })
    }
}

impl fmt::Display for LexicalMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(b) = self.builtin {
            return write!(f, "<{}>", b.code());
        }
        let parts: Vec<&str> = self
            .pos
            .iter()
            .map(String::as_str)
            .chain(self.codes.iter().map(String::as_str))
            .collect();
        write!(f, "<{}>", parts.join("+"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomKind {
    Literal(String),
    Mask(LexicalMask),
    Epsilon,
    SubgraphCall(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputAtom {
    pub kind: AtomKind,
    /// Only ever set on `Mask` atoms.
    pub filter: Option<MorphFilter>,
}

impl InputAtom {
    pub fn literal(s: impl Into<String>) -> Self {
        InputAtom {
            kind: AtomKind::Literal(s.into()),
            filter: None,
        }
    }

    pub fn mask(mask: LexicalMask, filter: Option<MorphFilter>) -> Self {
        InputAtom {
            kind: AtomKind::Mask(mask),
            filter,
        }
    }

    pub fn epsilon() -> Self {
        InputAtom {
            kind: AtomKind::Epsilon,
            filter: None,
        }
    }

    pub fn call(name: impl Into<String>) -> Self {
        InputAtom {
            kind: AtomKind::SubgraphCall(name.into()),
            filter: None,
        }
    }

    pub fn is_epsilon(&self) -> bool {
        matches!(self.kind, AtomKind::Epsilon)
    }
}

impl fmt::Display for InputAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AtomKind::Literal(s) => write!(f, "\"{}\"", parse::escape_quoted(s)),
            AtomKind::Mask(m) => {
                write!(f, "{m}")?;
                if let Some(filter) = &self.filter {
                    write!(f, "<<{filter}>>")?;
                }
                Ok(())
            }
            AtomKind::Epsilon => f.write_str("<E>"),
            AtomKind::SubgraphCall(name) => write!(f, ":{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphBox {
    pub id: String,
    pub alternatives: Vec<Vec<InputAtom>>,
    pub output: Option<String>,
}

impl GraphBox {
    /// True when every alternative is the single atom `<E>`.
    pub fn is_epsilon(&self) -> bool {
        self.alternatives
            .iter()
            .all(|alt| alt.len() == 1 && alt[0].is_epsilon())
    }

    pub fn calls(&self) -> impl Iterator<Item = &str> {
        self.alternatives
            .iter()
            .flatten()
            .filter_map(|a| match &a.kind {
                AtomKind::SubgraphCall(n) => Some(n.as_str()),
                _ => None,
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub name: String,
    pub boxes: Vec<GraphBox>,
    pub edges: BTreeSet<(String, String)>,
    /// Id of the virtual start state. It holds no input.
    pub initial: String,
    /// Id of the virtual end state.
    pub final_: String,
}

impl Graph {
    pub fn get_box(&self, id: &str) -> Option<&GraphBox> {
        self.boxes.iter().find(|b| b.id == id)
    }

    /// Number of states including the virtual initial and final ones.
    pub fn state_count(&self) -> usize {
        self.boxes.len() + 2
    }

    pub fn successors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .range((id.to_string(), String::new())..)
            .take_while(move |(from, _)| from == id)
            .map(|(_, to)| to.as_str())
    }

    /// Names of graphs called from any box, deduplicated.
    pub fn callees(&self) -> BTreeSet<&str> {
        self.boxes.iter().flat_map(GraphBox::calls).collect()
    }

    pub fn is_known_state(&self, id: &str) -> bool {
        id == self.initial || id == self.final_ || self.get_box(id).is_some()
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_graph(self))
    }
}

/// A main graph together with every graph it can reach through calls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarSet {
    pub graphs: BTreeMap<String, Graph>,
    pub main: String,
}

impl GrammarSet {
    /// Builds a set from already parsed graphs, checking calls and validity.
    pub fn new(graphs: Vec<Graph>, main: &str) -> Result<Self, GrammarError> {
        let mut map = BTreeMap::new();
        for g in graphs {
            let diags = validate(&g);
            if diags.iter().any(|d| d.severity == Severity::Error) {
                return Err(GrammarError::Invalid {
                    graph: g.name.clone(),
                    diagnostics: diags,
                });
            }
            if map.contains_key(&g.name) {
                return Err(GrammarError::DuplicateGraph(g.name));
            }
            map.insert(g.name.clone(), g);
        }
        if !map.contains_key(main) {
            return Err(GrammarError::UnresolvedSubgraph(main.to_string()));
        }
        for g in map.values() {
            for callee in g.callees() {
                if !map.contains_key(callee) {
                    return Err(GrammarError::UnresolvedSubgraph(callee.to_string()));
                }
            }
        }
        check_acyclic(&map)?;
        Ok(GrammarSet {
            graphs: map,
            main: main.to_string(),
        })
    }

    pub fn main_graph(&self) -> &Graph {
        &self.graphs[&self.main]
    }

    pub fn get(&self, name: &str) -> Option<&Graph> {
        self.graphs.get(name)
    }

    /// Same graphs with a different entry point.
    pub fn with_main(&self, main: &str) -> Result<Self, GrammarError> {
        if !self.graphs.contains_key(main) {
            return Err(GrammarError::UnresolvedSubgraph(main.to_string()));
        }
        Ok(GrammarSet {
            graphs: self.graphs.clone(),
            main: main.to_string(),
        })
    }
}

/// Parses every `(name, text)` pair and links them into a set rooted at `main`.
pub fn load_grammar_set(
    files: &[(String, String)],
    main: &str,
) -> Result<GrammarSet, GrammarError> {
    let mut graphs = Vec::with_capacity(files.len());
    for (name, text) in files {
        let g = parse_graph(text).map_err(|e| GrammarError::InFile {
            file: name.clone(),
            source: Box::new(e),
        })?;
        if &g.name != name {
            return Err(GrammarError::NameMismatch {
                file: name.clone(),
                declared: g.name,
            });
        }
        graphs.push(g);
    }
    GrammarSet::new(graphs, main)
}

fn check_acyclic(graphs: &BTreeMap<String, Graph>) -> Result<(), GrammarError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Active,
        Done,
    }
    fn visit<'a>(
        name: &'a str,
        graphs: &'a BTreeMap<String, Graph>,
        marks: &mut BTreeMap<&'a str, Mark>,
        path: &mut Vec<&'a str>,
    ) -> Result<(), GrammarError> {
        match marks.get(name).copied().unwrap_or(Mark::Fresh) {
            Mark::Done => return Ok(()),
            Mark::Active => {
                let from = path.iter().position(|n| *n == name).unwrap_or(0);
                let mut cycle: Vec<String> = path[from..].iter().map(|s| s.to_string()).collect();
                cycle.push(name.to_string());
                return Err(GrammarError::RecursiveCall(cycle));
            }
            Mark::Fresh => {}
        }
        marks.insert(name, Mark::Active);
        path.push(name);
        for callee in graphs[name].callees() {
            visit(callee, graphs, marks, path)?;
        }
        path.pop();
        marks.insert(name, Mark::Done);
        Ok(())
    }
    let mut marks = BTreeMap::new();
    for name in graphs.keys() {
        visit(name, graphs, &mut marks, &mut Vec::new())?;
    }
    Ok(())
}
