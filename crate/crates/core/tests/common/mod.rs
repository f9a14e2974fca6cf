//! Random grammars and texts shared by the integration tests, plus an
//! exhaustive path-enumeration matcher used as an oracle.

#![allow(dead_code)]

use std::collections::BTreeSet;

use lgw_core::grammar::load_grammar_set;
use lgw_core::GrammarSet;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const WORDS: &[&str] = &["a", "b", "ab", "Ab", "Cd", "Sr", "D", "7", ",", "."];
const LITERALS: &[&str] = &["a", "b", "ab", "Ab", "Cd", "Sr", "D", "7", ",", "."];
const OUTPUTS: &[&str] = &["<X>", "</X>", "[", "]", "{y}"];

/// A text built from `WORDS`; punctuation is glued to the previous token.
pub fn random_text(rng: &mut StdRng, max_tokens: usize) -> String {
    let n = rng.gen_range(0..=max_tokens);
    let mut text = String::new();
    let mut prev_punct = true;
    for _ in 0..n {
        let mut w = *WORDS.choose(rng).unwrap();
        let punct = matches!(w, "," | ".");
        if punct && prev_punct {
            w = "a";
        }
        let punct = matches!(w, "," | ".");
        if !text.is_empty() && !punct {
            text.push(' ');
        }
        text.push_str(w);
        prev_punct = punct;
    }
    text
}

#[derive(Debug, Clone)]
pub struct RandomSet {
    pub files: Vec<(String, String)>,
    pub main: String,
}

impl RandomSet {
    pub fn load(&self) -> GrammarSet {
        load_grammar_set(&self.files, &self.main).expect("generated grammar set loads")
    }
}

/// A random grammar set with graphs `{prefix}0..{prefix}k`, rooted at
/// `{prefix}0`. Graph `i` only calls graphs `j > i`, and boxes holding an
/// `<E>` alternative only lead to later boxes, so no epsilon cycle exists.
/// Box counts stay at or below `max_boxes` per graph.
pub fn random_grammar_set(rng: &mut StdRng, prefix: &str, max_boxes: usize) -> RandomSet {
    loop {
        let n_graphs = rng.gen_range(1..=3);
        let names: Vec<String> = (0..n_graphs).map(|i| format!("{prefix}{i}")).collect();
        let files: Vec<(String, String)> = (0..n_graphs)
            .map(|i| {
                (
                    names[i].clone(),
                    random_graph(rng, &names[i], &names[i + 1..], max_boxes),
                )
            })
            .collect();
        let main = names[0].clone();
        if load_grammar_set(&files, &main).is_ok() {
            return RandomSet { files, main };
        }
    }
}

fn random_graph(rng: &mut StdRng, name: &str, callees: &[String], max_boxes: usize) -> String {
    let n = rng.gen_range(1..=max_boxes);
    let mut eps = vec![false; n];
    let mut out = format!("graph {name}\ninit i\nfinal f\n");
    for (b, is_eps) in eps.iter_mut().enumerate() {
        let mut line = format!("box b{b}");
        if rng.gen_bool(0.3) {
            line.push_str(&format!(" out=\"{}\"", OUTPUTS.choose(rng).unwrap()));
        }
        let n_alts = rng.gen_range(1..=2);
        let mut alts = Vec::new();
        for _ in 0..n_alts {
            if rng.gen_bool(0.15) {
                *is_eps = true;
                alts.push("<E>".to_string());
                continue;
            }
            let n_atoms = rng.gen_range(1..=2);
            let atoms: Vec<String> = (0..n_atoms).map(|_| random_atom(rng, callees)).collect();
            alts.push(atoms.join(" "));
        }
        line.push(' ');
        line.push_str(&alts.join(";"));
        out.push_str(&line);
        out.push('\n');
    }
    let mut edges = BTreeSet::new();
    edges.insert("edge i b0".to_string());
    edges.insert(format!("edge b{} f", n - 1));
    for _ in 0..rng.gen_range(0..=2 * n) {
        let from = rng.gen_range(0..=n);
        let to = rng.gen_range(0..=n);
        let edge = match (from, to) {
            (0, t) if t < n => format!("edge i b{t}"),
            (0, _) => continue,
            (f, t) if t == n => format!("edge b{} f", f - 1),
            (f, t) => {
                let f = f - 1;
                if (eps[f] || eps[t]) && t <= f {
                    continue;
                }
                format!("edge b{f} b{t}")
            }
        };
        edges.insert(edge);
    }
    for e in edges {
        out.push_str(&e);
        out.push('\n');
    }
    out
}

fn random_atom(rng: &mut StdRng, callees: &[String]) -> String {
    match rng.gen_range(0..10) {
        0 | 1 if !callees.is_empty() => format!(":{}", callees.choose(rng).unwrap()),
        0..=4 => format!("\"{}\"", LITERALS.choose(rng).unwrap()),
        5 | 6 => "<PRE>".to_string(),
        7 => "<PRE><<..>>".to_string(),
        _ => "<MOT>".to_string(),
    }
}

pub type Occ = (usize, usize, String);

/// Occurrences as `(start, end, merged)` triples.
pub fn occ_set(occs: &[lgw_core::Occurrence]) -> BTreeSet<Occ> {
    occs.iter()
        .map(|o| (o.start, o.end, o.merged.clone()))
        .collect()
}

pub mod oracle {
    //! Inlines every subgraph call into one flat automaton and enumerates
    //! all paths from every start token. Restricted to what the random
    //! generator produces: one-token literals, `<PRE>` (with or without a
    //! length filter of at least two characters), `<MOT>`, `<E>` and calls,
    //! with an empty lexicon.

    use std::collections::{BTreeMap, BTreeSet};

    use super::Occ;
    use lgw_core::grammar::{AtomKind, GrammarSet};

    #[derive(Debug, Clone)]
    enum Label {
        Eps,
        Out(String),
        Literal(String),
        Pre { min_len: usize },
        Mot,
    }

    #[derive(Default)]
    struct Flat {
        edges: Vec<Vec<(usize, Label)>>,
    }

    impl Flat {
        fn node(&mut self) -> usize {
            self.edges.push(Vec::new());
            self.edges.len() - 1
        }

        fn edge(&mut self, from: usize, to: usize, label: Label) {
            self.edges[from].push((to, label));
        }

        /// Returns the (entry, exit) nodes of a fresh copy of `name`.
        fn inline(&mut self, gs: &GrammarSet, name: &str) -> (usize, usize) {
            let g = gs.get(name).expect("resolved graph");
            let entry = self.node();
            let exit = self.node();
            let mut ins = BTreeMap::new();
            let mut outs = BTreeMap::new();
            for b in &g.boxes {
                let bin = self.node();
                let bout = self.node();
                for alt in &b.alternatives {
                    let mut cur = self.node();
                    match &b.output {
                        Some(o) => self.edge(bin, cur, Label::Out(o.clone())),
                        None => self.edge(bin, cur, Label::Eps),
                    }
                    for atom in alt {
                        let next = self.node();
                        match &atom.kind {
                            AtomKind::Epsilon => self.edge(cur, next, Label::Eps),
                            AtomKind::Literal(s) => self.edge(cur, next, Label::Literal(s.clone())),
                            AtomKind::Mask(m) => {
                                let label = match m.to_string().as_str() {
                                    "<PRE>" => {
                                        let min_len = match &atom.filter {
                                            None => 1,
                                            Some(f) => {
                                                f.pattern().chars().filter(|&c| c == '.').count()
                                            }
                                        };
                                        Label::Pre { min_len }
                                    }
                                    "<MOT>" => Label::Mot,
                                    other => panic!("oracle does not model mask {other}"),
                                };
                                self.edge(cur, next, label);
                            }
                            AtomKind::SubgraphCall(callee) => {
                                let (ce, cx) = self.inline(gs, callee);
                                self.edge(cur, ce, Label::Eps);
                                self.edge(cx, next, Label::Eps);
                            }
                        }
                        cur = next;
                    }
                    self.edge(cur, bout, Label::Eps);
                }
                ins.insert(b.id.as_str(), bin);
                outs.insert(b.id.as_str(), bout);
            }
            for (from, to) in &g.edges {
                let f = if *from == g.initial {
                    entry
                } else {
                    outs[from.as_str()]
                };
                let t = if *to == g.final_ {
                    exit
                } else {
                    ins[to.as_str()]
                };
                self.edge(f, t, Label::Eps);
            }
            (entry, exit)
        }
    }

    struct Tok {
        surface: String,
        start: usize,
        end: usize,
    }

    const ABBREVIATIONS: &[&str] = &["Sr", "Sra", "Srta", "Dr", "Dra", "Prof", "Profa"];

    fn tokens(text: &str) -> Vec<Tok> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c == ' ' {
                i += 1;
                continue;
            }
            let mut j = i + 1;
            if c.is_alphabetic() {
                while j < chars.len() && chars[j].is_alphabetic() {
                    j += 1;
                }
            } else if c.is_numeric() {
                while j < chars.len() && chars[j].is_numeric() {
                    j += 1;
                }
            }
            out.push(Tok {
                surface: chars[i..j].iter().collect(),
                start: i,
                end: j,
            });
            i = j;
        }
        out
    }

    /// `true` at k when a sentence ends after token k.
    fn boundaries(toks: &[Tok]) -> Vec<bool> {
        (0..toks.len())
            .map(|k| {
                if toks[k].surface != "." {
                    return false;
                }
                let Some(next) = toks.get(k + 1) else {
                    return false;
                };
                let spaced = next.start > toks[k].end;
                let capital = next
                    .surface
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_uppercase());
                if !(spaced && capital && next.surface.chars().all(char::is_alphabetic)) {
                    return false;
                }
                match k.checked_sub(1).map(|p| &toks[p]) {
                    Some(p)
                        if p.end == toks[k].start && p.surface.chars().all(char::is_alphabetic) =>
                    {
                        let single = p.surface.chars().count() == 1;
                        !(single && p.surface.chars().all(char::is_uppercase)
                            || ABBREVIATIONS.contains(&p.surface.as_str()))
                    }
                    _ => true,
                }
            })
            .collect()
    }

    fn accepts(label: &Label, s: &str) -> bool {
        match label {
            Label::Literal(l) => {
                if l.chars().any(char::is_uppercase) {
                    s == l
                } else {
                    s.to_lowercase() == *l
                }
            }
            Label::Pre { min_len } => {
                s.chars().next().is_some_and(char::is_uppercase) && s.chars().count() >= *min_len
            }
            Label::Mot => s.chars().all(char::is_alphabetic),
            Label::Eps | Label::Out(_) => unreachable!(),
        }
    }

    #[derive(Clone)]
    struct State {
        node: usize,
        next: usize,
        first: Option<usize>,
        last: Option<usize>,
        pending: Vec<String>,
        insertions: Vec<(usize, String)>,
    }

    /// Every occurrence in AllMatches mode, relative offsets resolved into
    /// merged strings.
    pub fn all_matches(gs: &GrammarSet, text: &str) -> BTreeSet<Occ> {
        let mut flat = Flat::default();
        let (entry, exit) = flat.inline(gs, &gs.main);
        let toks = tokens(text);
        let bound = boundaries(&toks);
        let chars: Vec<char> = text.chars().collect();
        let mut found = BTreeSet::new();
        for start in 0..toks.len() {
            let mut stack = vec![State {
                node: entry,
                next: start,
                first: None,
                last: None,
                pending: Vec::new(),
                insertions: Vec::new(),
            }];
            let mut steps = 0usize;
            while let Some(st) = stack.pop() {
                steps += 1;
                assert!(steps < 5_000_000, "path bound exceeded");
                if st.node == exit {
                    if let (Some(f), Some(l)) = (st.first, st.last) {
                        let (s, e) = (toks[f].start, toks[l].end);
                        let mut ins = st.insertions.clone();
                        ins.extend(st.pending.iter().map(|o| (e, o.clone())));
                        found.insert((s, e, merged(&chars[s..e], s, &ins)));
                    }
                }
                for (to, label) in &flat.edges[st.node] {
                    let mut nx = st.clone();
                    nx.node = *to;
                    match label {
                        Label::Eps => {}
                        Label::Out(o) => nx.pending.push(o.clone()),
                        _ => {
                            let k = st.next;
                            if k >= toks.len() || st.last.is_some_and(|l| bound[l]) {
                                continue;
                            }
                            if !accepts(label, &toks[k].surface) {
                                continue;
                            }
                            for o in std::mem::take(&mut nx.pending) {
                                let at = match st.last {
                                    Some(l) if o.starts_with("</") => toks[l].end,
                                    _ => toks[k].start,
                                };
                                nx.insertions.push((at, o));
                            }
                            nx.insertions.sort_by_key(|(at, _)| *at);
                            nx.first.get_or_insert(k);
                            nx.last = Some(k);
                            nx.next = k + 1;
                        }
                    }
                    stack.push(nx);
                }
            }
        }
        found
    }

    fn merged(span: &[char], base: usize, ins: &[(usize, String)]) -> String {
        let mut out = String::new();
        let mut it = ins.iter().peekable();
        for (i, c) in span.iter().enumerate() {
            while let Some((_, t)) = it.next_if(|(at, _)| *at <= base + i) {
                out.push_str(t);
            }
            out.push(*c);
        }
        for (_, t) in it {
            out.push_str(t);
        }
        out
    }
}

/// Random concordances over one text, for diff and relation tests.
pub mod spans {
    use lgw_core::concordance::{Concordance, ConcordanceLine, ContextConfig};
    use lgw_core::{DiffClass, Relation, Side};
    use rand::rngs::StdRng;
    use rand::Rng;

    const OUTPUTS: &[&str] = &["", "<N>"];

    pub fn line(start: usize, end: usize, tag: &str) -> ConcordanceLine {
        ConcordanceLine {
            start,
            end,
            left: String::new(),
            matched: format!("{tag}{}", "w".repeat(end - start)),
            right: String::new(),
        }
    }

    pub fn concordance(grammar: &str, lines: Vec<ConcordanceLine>) -> Concordance {
        let mut c = Concordance::new(grammar, "text", ContextConfig::default());
        c.lines = lines;
        c.normalize();
        c
    }

    fn random_lines(rng: &mut StdRng, max: usize, width: usize) -> Vec<ConcordanceLine> {
        (0..rng.gen_range(0..=max))
            .map(|_| {
                let start = rng.gen_range(0..width - 1);
                let end = rng.gen_range(start + 1..=(start + 6).min(width));
                line(start, end, OUTPUTS[rng.gen_range(0..OUTPUTS.len())])
            })
            .collect()
    }

    /// A pair of concordances; Y is sometimes derived from X so that equal,
    /// subset and same-span cases come up often.
    pub fn random_pair(rng: &mut StdRng, max: usize) -> (Concordance, Concordance) {
        let width = rng.gen_range(4..=60);
        let xs = random_lines(rng, max, width);
        let ys = match rng.gen_range(0..6) {
            0 => xs.clone(),
            1 => {
                let mut ys: Vec<_> = xs.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
                ys.extend(random_lines(rng, 3, width));
                ys
            }
            2 => xs
                .iter()
                .map(|l| {
                    let tag = if rng.gen_bool(0.5) { "<M>" } else { "" };
                    line(l.start, l.end, tag)
                })
                .collect(),
            3 => xs
                .iter()
                .map(|l| {
                    line(
                        l.start,
                        (l.end + rng.gen_range(0..3)).min(width).max(l.start + 1),
                        "",
                    )
                })
                .collect(),
            _ => random_lines(rng, max, width),
        };
        (concordance("X", xs), concordance("Y", ys))
    }

    fn intersects(a: &ConcordanceLine, b: &ConcordanceLine) -> bool {
        a.start.max(b.start) < a.end.min(b.end)
    }

    /// Classes of every line, X lines first, by direct pairwise interval tests.
    pub fn classes(cx: &Concordance, cy: &Concordance) -> Vec<(Side, usize, DiffClass)> {
        let (xs, ys) = (&cx.lines, &cy.lines);
        let n = xs.len() + ys.len();
        let get = |k: usize| {
            if k < xs.len() {
                &xs[k]
            } else {
                &ys[k - xs.len()]
            }
        };
        let is_x = |k: usize| k < xs.len();
        let mut comp: Vec<usize> = (0..n).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for a in 0..n {
                for b in 0..n {
                    if is_x(a) != is_x(b) && intersects(get(a), get(b)) && comp[a] != comp[b] {
                        let m = comp[a].min(comp[b]);
                        comp[a] = m;
                        comp[b] = m;
                        changed = true;
                    }
                }
            }
        }
        (0..n)
            .map(|k| {
                let members: Vec<usize> = (0..n).filter(|&o| comp[o] == comp[k]).collect();
                let side = if is_x(k) { Side::X } else { Side::Y };
                let index = if is_x(k) { k } else { k - xs.len() };
                let class = match members.len() {
                    1 if is_x(k) => DiffClass::UniqueX,
                    1 => DiffClass::UniqueY,
                    2 => {
                        let (a, b) = (get(members[0]), get(members[1]));
                        if (a.start, a.end) != (b.start, b.end) {
                            DiffClass::PartialOverlap
                        } else if a.matched == b.matched {
                            DiffClass::Common
                        } else {
                            DiffClass::OutputConflict
                        }
                    }
                    _ => DiffClass::PartialOverlap,
                };
                (side, index, class)
            })
            .collect()
    }

    /// Every relation whose defining condition holds, in table order.
    pub fn satisfied_relations(cx: &Concordance, cy: &Concordance) -> Vec<Relation> {
        use std::collections::BTreeSet;
        let ids = |c: &Concordance| -> BTreeSet<(usize, usize, String)> {
            c.lines
                .iter()
                .map(|l| (l.start, l.end, l.matched.clone()))
                .collect()
        };
        let span_list = |c: &Concordance| -> Vec<(usize, usize)> {
            let mut v: Vec<_> = c.lines.iter().map(|l| (l.start, l.end)).collect();
            v.sort();
            v
        };
        let (sx, sy) = (ids(cx), ids(cy));
        let common = sx.intersection(&sy).count();
        let any_overlap = cx
            .lines
            .iter()
            .any(|x| cy.lines.iter().any(|y| intersects(x, y)));
        let pairwise = cx.lines.len() == cy.lines.len()
            && cx
                .lines
                .iter()
                .zip(&cy.lines)
                .all(|(x, y)| intersects(x, y));
        let disjoint_both = common == 0 && !sx.is_empty() && !sy.is_empty();
        let mut out = Vec::new();
        if sx == sy {
            out.push(Relation::Equal);
        }
        if sx != sy && span_list(cx) == span_list(cy) {
            out.push(Relation::EqualDifferentOutputs);
        }
        if !sx.is_empty() && common == sx.len() && sx.len() < sy.len() {
            out.push(Relation::XSubsetOfY);
        }
        if !sy.is_empty() && common == sy.len() && sy.len() < sx.len() {
            out.push(Relation::YSubsetOfX);
        }
        if common > 0 && common < sx.len() && common < sy.len() {
            out.push(Relation::Intersecting);
        }
        if sx.is_empty() && !sy.is_empty() {
            out.push(Relation::DisjointXEmpty);
        }
        if sy.is_empty() && !sx.is_empty() {
            out.push(Relation::DisjointYEmpty);
        }
        if disjoint_both && pairwise {
            out.push(Relation::SimilarOverlap);
        }
        if disjoint_both && !pairwise && any_overlap {
            out.push(Relation::DisjointWithSomeOverlap);
        }
        if disjoint_both && !any_overlap {
            out.push(Relation::Disjoint);
        }
        out
    }
}
