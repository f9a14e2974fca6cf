//! Applying a grammar set to text.
//!
//! Matching walks the main graph depth-first with an explicit call stack,
//! so subgraph calls behave as if inlined. Space tokens are skipped between
//! atoms; every other token must be consumed by some atom. Box outputs are
//! buffered and spliced in front of the next consumed token, or at the end
//! of the match when nothing follows. Closing tags (outputs starting with
//! `</`) attach to the end of the previous token instead.

mod tokenize;

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::grammar::{AtomKind, GrammarSet, LexicalMask, MorphFilter};
use crate::lexicon::Lexicon;

pub use tokenize::{tokenize, Token, TokenKind};

/// Words after which a period does not end a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "Sr", "Sra", "Srta", "Dr", "Dra", "Prof", "Profa", "Exmo", "Exma", "Sto", "Sta", "Pe", "Fr",
    "Gen", "Cel", "Cap", "Ten", "Sgt", "Dep", "Sen", "Min", "Pres", "Eng", "Arq", "Mr", "Mrs",
    "Ms", "Jr", "St",
];

/// Longest multi-token surface probed in the lexicon for one mask.
pub const MAX_LEXICON_SPAN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MatchMode {
    AllMatches,
    #[default]
    LongestOnly,
}

/// An output string spliced into a match, `offset` characters after its start.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Insertion {
    pub offset: usize,
    pub text: String,
}

/// One match of a grammar in a text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    /// The surface with outputs inserted (MERGE mode).
    pub merged: String,
    pub grammar: String,
    pub insertions: Vec<Insertion>,
}

impl Occurrence {
    pub fn new(
        start: usize,
        end: usize,
        surface: String,
        insertions: Vec<Insertion>,
        grammar: String,
    ) -> Self {
        let merged = merge(&surface, &insertions);
        Occurrence {
            start,
            end,
            surface,
            merged,
            grammar,
            insertions,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    fn sort_key(&self) -> (usize, usize, &str) {
        (self.start, self.end, &self.merged)
    }
}

/// Splices insertions (sorted by offset, stable) into a surface string.
pub fn merge(surface: &str, insertions: &[Insertion]) -> String {
    let mut out = String::with_capacity(surface.len() + 16);
    let mut pending = insertions.iter().peekable();
    for (i, c) in surface.chars().enumerate() {
        while let Some(ins) = pending.next_if(|ins| ins.offset <= i) {
            out.push_str(&ins.text);
        }
        out.push(c);
    }
    for ins in pending {
        out.push_str(&ins.text);
    }
    out
}

/// Keeps, for each start offset, only the occurrences with the largest end.
pub fn filter_longest(occs: &[Occurrence]) -> Vec<Occurrence> {
    let mut best: HashMap<usize, usize> = HashMap::new();
    for o in occs {
        let e = best.entry(o.start).or_insert(o.end);
        *e = (*e).max(o.end);
    }
    let mut out: Vec<Occurrence> = occs
        .iter()
        .filter(|o| best[&o.start] == o.end)
        .cloned()
        .collect();
    out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    out
}

/// Applies the main graph of `gs` at every token of `text`.
pub fn apply_grammar(
    gs: &GrammarSet,
    text: &str,
    lex: &Lexicon,
    mode: MatchMode,
) -> Vec<Occurrence> {
    let compiled = Compiled::new(gs);
    let input = Input::new(text);
    let mut search = Search {
        grammar: &compiled,
        input: &input,
        lex,
        found: BTreeSet::new(),
    };
    for start in 0..input.sig.len() {
        search.run_from(start);
    }
    let name = &gs.main;
    let occs: Vec<Occurrence> = search
        .found
        .into_iter()
        .map(|(start_tok, end_tok, insertions)| {
            let start = input.tokens[input.sig[start_tok]].start;
            let end = input.tokens[input.sig[end_tok]].end;
            let insertions = insertions
                .into_iter()
                .map(|(at, text)| Insertion {
                    offset: at - start,
                    text,
                })
                .collect();
            Occurrence::new(
                start,
                end,
                input.slice(start, end).to_string(),
                insertions,
                name.clone(),
            )
        })
        .collect();
    let mut occs = match mode {
        MatchMode::AllMatches => occs,
        MatchMode::LongestOnly => filter_longest(&occs),
    };
    occs.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    occs.dedup_by(|a, b| a.sort_key() == b.sort_key());
    occs
}

/// Tokenized text plus the sentence boundaries matches may not cross.
struct Input<'t> {
    text: &'t str,
    byte_at: Vec<usize>,
    tokens: Vec<Token>,
    /// Indices of non-space tokens.
    sig: Vec<usize>,
    /// `boundary_after[k]`: a sentence ends after significant token `k`.
    boundary_after: Vec<bool>,
}

impl<'t> Input<'t> {
    fn new(text: &'t str) -> Self {
        let mut byte_at: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        byte_at.push(text.len());
        let tokens = tokenize(text);
        let sig: Vec<usize> = (0..tokens.len())
            .filter(|&i| tokens[i].kind != TokenKind::Space)
            .collect();
        let boundary_after = (0..sig.len())
            .map(|k| is_sentence_end(&tokens, sig[k]))
            .collect();
        Input {
            text,
            byte_at,
            tokens,
            sig,
            boundary_after,
        }
    }

    fn slice(&self, start: usize, end: usize) -> &'t str {
        &self.text[self.byte_at[start]..self.byte_at[end]]
    }

    fn sig_token(&self, k: usize) -> &Token {
        &self.tokens[self.sig[k]]
    }
}

fn is_sentence_end(tokens: &[Token], i: usize) -> bool {
    let tok = &tokens[i];
    if tok.kind != TokenKind::Punct || tok.surface != "." {
        return false;
    }
    let followed_by_capital = matches!(
        (tokens.get(i + 1), tokens.get(i + 2)),
        (Some(sp), Some(w)) if sp.kind == TokenKind::Space
            && w.kind == TokenKind::Word
            && crate::lexicon::starts_uppercase(&w.surface)
    );
    if !followed_by_capital {
        return false;
    }
    match i.checked_sub(1).map(|p| &tokens[p]) {
        Some(prev) if prev.kind == TokenKind::Word => {
            let single_capital = prev.surface.chars().count() == 1
                && crate::lexicon::starts_uppercase(&prev.surface);
            !(single_capital || ABBREVIATIONS.contains(&prev.surface.as_str()))
        }
        _ => true,
    }
}

const INITIAL: usize = 0;
const FINAL: usize = 1;

struct LiteralToken {
    surface: String,
    fold_case: bool,
}

enum Atom<'g> {
    Literal(Vec<LiteralToken>),
    Mask(&'g LexicalMask, Option<&'g MorphFilter>),
    Epsilon,
    Call(usize),
}

struct Node<'g> {
    alternatives: Vec<Vec<Atom<'g>>>,
    output: Option<&'g str>,
}

struct CompiledGraph<'g> {
    /// Index 0 is the initial state, 1 the final state.
    nodes: Vec<Node<'g>>,
    successors: Vec<Vec<usize>>,
}

struct Compiled<'g> {
    graphs: Vec<CompiledGraph<'g>>,
    main: usize,
}

impl<'g> Compiled<'g> {
    fn new(gs: &'g GrammarSet) -> Self {
        let index: HashMap<&str, usize> = gs
            .graphs
            .keys()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let graphs = gs
            .graphs
            .values()
            .map(|g| {
                let mut ids: HashMap<&str, usize> = HashMap::new();
                ids.insert(g.initial.as_str(), INITIAL);
                ids.insert(g.final_.as_str(), FINAL);
                let mut nodes = vec![
                    Node {
                        alternatives: Vec::new(),
                        output: None,
                    },
                    Node {
                        alternatives: Vec::new(),
                        output: None,
                    },
                ];
                for b in &g.boxes {
                    ids.insert(b.id.as_str(), nodes.len());
                    let alternatives = b
                        .alternatives
                        .iter()
                        .map(|alt| {
                            alt.iter()
                                .map(|a| compile_atom(&a.kind, a.filter.as_ref(), &index))
                                .collect()
                        })
                        .collect();
                    nodes.push(Node {
                        alternatives,
                        output: b.output.as_deref(),
                    });
                }
                let mut successors = vec![Vec::new(); nodes.len()];
                for (from, to) in &g.edges {
                    successors[ids[from.as_str()]].push(ids[to.as_str()]);
                }
                CompiledGraph { nodes, successors }
            })
            .collect();
        Compiled {
            graphs,
            main: index[gs.main.as_str()],
        }
    }
}

fn compile_atom<'g>(
    kind: &'g AtomKind,
    filter: Option<&'g MorphFilter>,
    index: &HashMap<&str, usize>,
) -> Atom<'g> {
    match kind {
        AtomKind::Literal(s) => Atom::Literal(literal_tokens(s)),
        AtomKind::Mask(m) => Atom::Mask(m, filter),
        AtomKind::Epsilon => Atom::Epsilon,
        AtomKind::SubgraphCall(name) => Atom::Call(index[name.as_str()]),
    }
}

fn literal_tokens(s: &str) -> Vec<LiteralToken> {
    let fold_case = !s.chars().any(char::is_uppercase);
    tokenize(s)
        .into_iter()
        .filter(|t| t.kind != TokenKind::Space)
        .map(|t| LiteralToken {
            surface: t.surface,
            fold_case,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Frame {
    graph: usize,
    node: usize,
    alt: usize,
    atom: usize,
}

#[derive(Clone)]
struct Path {
    first: Option<usize>,
    last: Option<usize>,
    /// Next significant token to consume.
    next: usize,
    /// (absolute char offset, text)
    insertions: Vec<(usize, String)>,
    pending: Vec<String>,
    /// Call stacks entered since the last consumed token; prunes epsilon cycles.
    visited: HashSet<Vec<Frame>>,
}

type Found = (usize, usize, Vec<(usize, String)>);

struct Search<'a, 'g> {
    grammar: &'a Compiled<'g>,
    input: &'a Input<'a>,
    lex: &'a Lexicon,
    found: BTreeSet<Found>,
}

impl Search<'_, '_> {
    fn run_from(&mut self, start: usize) {
        let path = Path {
            first: None,
            last: None,
            next: start,
            insertions: Vec::new(),
            pending: Vec::new(),
            visited: HashSet::new(),
        };
        let frames = vec![Frame {
            graph: self.grammar.main,
            node: INITIAL,
            alt: 0,
            atom: 0,
        }];
        self.leave(frames, path);
    }

    /// Continue inside the current box alternative.
    fn step(&mut self, mut frames: Vec<Frame>, path: Path) {
        let top = frames.last().expect("non-empty call stack").clone();
        let alt = &self.grammar.graphs[top.graph].nodes[top.node].alternatives[top.alt];
        let Some(atom) = alt.get(top.atom) else {
            self.leave(frames, path);
            return;
        };
        match atom {
            Atom::Epsilon => {
                frames.last_mut().unwrap().atom += 1;
                self.step(frames, path);
            }
            Atom::Call(g) => {
                frames.push(Frame {
                    graph: *g,
                    node: INITIAL,
                    alt: 0,
                    atom: 0,
                });
                self.leave(frames, path);
            }
            Atom::Literal(lit) => {
                if let Some(n) = self.match_literal(lit, &path) {
                    let path = self.consume(path, n);
                    frames.last_mut().unwrap().atom += 1;
                    self.step(frames, path);
                }
            }
            Atom::Mask(mask, filter) => {
                if let Some(n) = self.match_mask(mask, *filter, &path) {
                    let path = self.consume(path, n);
                    frames.last_mut().unwrap().atom += 1;
                    self.step(frames, path);
                }
            }
        }
    }

    /// The top frame's box is done: follow every outgoing edge.
    fn leave(&mut self, frames: Vec<Frame>, path: Path) {
        let top = frames.last().expect("non-empty call stack");
        let graph = &self.grammar.graphs[top.graph];
        for &succ in &graph.successors[top.node] {
            if succ == FINAL {
                let mut up = frames.clone();
                up.pop();
                match up.last_mut() {
                    None => self.emit(path.clone()),
                    Some(caller) => {
                        caller.atom += 1;
                        self.step(up, path.clone());
                    }
                }
                continue;
            }
            let node = &graph.nodes[succ];
            for alt in 0..node.alternatives.len() {
                let mut next = frames.clone();
                *next.last_mut().unwrap() = Frame {
                    graph: top.graph,
                    node: succ,
                    alt,
                    atom: 0,
                };
                let mut path = path.clone();
                if !path.visited.insert(next.clone()) {
                    continue;
                }
                if let Some(out) = node.output {
                    path.pending.push(out.to_string());
                }
                self.step(next, path);
            }
        }
    }

    fn emit(&mut self, mut path: Path) {
        let (Some(first), Some(last)) = (path.first, path.last) else {
            return;
        };
        let end = self.input.sig_token(last).end;
        for out in path.pending.drain(..) {
            path.insertions.push((end, out));
        }
        self.found.insert((first, last, path.insertions));
    }

    /// Whether significant token `k` may follow the last consumed one.
    fn can_take(&self, last: Option<usize>, k: usize) -> bool {
        k < self.input.sig.len() && last.is_none_or(|l| !self.input.boundary_after[l])
    }

    fn consume(&self, mut path: Path, n: usize) -> Path {
        let at = self.input.sig_token(path.next).start;
        let prev_end = path.last.map(|l| self.input.sig_token(l).end);
        for out in path.pending.drain(..) {
            match prev_end {
                Some(end) if out.starts_with("</") => path.insertions.push((end, out)),
                _ => path.insertions.push((at, out)),
            }
        }
        path.insertions.sort_by_key(|(offset, _)| *offset);
        path.first.get_or_insert(path.next);
        path.last = Some(path.next + n - 1);
        path.next += n;
        path.visited.clear();
        path
    }

    fn match_literal(&self, lit: &[LiteralToken], path: &Path) -> Option<usize> {
        let mut last = path.last;
        for (i, lt) in lit.iter().enumerate() {
            let k = path.next + i;
            if !self.can_take(last, k) {
                return None;
            }
            let surface = &self.input.sig_token(k).surface;
            let ok = if lt.fold_case {
                surface.to_lowercase() == lt.surface
            } else {
                *surface == lt.surface
            };
            if !ok {
                return None;
            }
            last = Some(k);
        }
        Some(lit.len())
    }

    /// Greedy: the longest lexicon hit up to [`MAX_LEXICON_SPAN`] tokens,
    /// else the single token.
    fn match_mask(
        &self,
        mask: &LexicalMask,
        filter: Option<&MorphFilter>,
        path: &Path,
    ) -> Option<usize> {
        let k = path.next;
        if !self.can_take(path.last, k) {
            return None;
        }
        let mut reach = 1;
        while reach < MAX_LEXICON_SPAN
            && k + reach < self.input.sig.len()
            && !self.input.boundary_after[k + reach - 1]
        {
            reach += 1;
        }
        let start = self.input.sig_token(k).start;
        let filter_ok = |s: &str| filter.is_none_or(|f| f.matches(s));
        for n in (2..=reach).rev() {
            let surface = self.input.slice(start, self.input.sig_token(k + n - 1).end);
            if self.lex.entry_has_mask(surface, mask) && filter_ok(surface) {
                return Some(n);
            }
        }
        let surface = &self.input.sig_token(k).surface;
        let hit = self.lex.token_has_mask(surface, mask)
            || (mask.builtin.is_some() && self.lex.entry_has_mask(surface, mask));
        (hit && filter_ok(surface)).then_some(1)
    }
}
