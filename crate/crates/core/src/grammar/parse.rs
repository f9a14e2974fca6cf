use std::collections::{BTreeSet, HashSet};

use super::{GrammarError, Graph, GraphBox, InputAtom, LexicalMask, MorphFilter};

/// Parses one graph in the textual `.lg` format.
///
/// ```text
/// graph Name
/// init i
/// final f
/// box title "Sr.";"Sra."
/// box open out="<NOME>" <E>
/// edge i title
/// ```
pub fn parse_graph(text: &str) -> Result<Graph, GrammarError> {
    let mut name: Option<String> = None;
    let mut initial: Option<String> = None;
    let mut final_: Option<String> = None;
    let mut boxes: Vec<GraphBox> = Vec::new();
    let mut edges: BTreeSet<(String, String)> = BTreeSet::new();
    let mut ids: HashSet<String> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let syntax = |message: String| GrammarError::SyntaxError { line_no, message };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        if name.is_none() && keyword != "graph" {
            return Err(syntax("expected `graph <Name>` first".into()));
        }
        match keyword {
            "graph" => {
                if name.is_some() {
                    return Err(syntax("second `graph` declaration".into()));
                }
                let n = single_word(rest).ok_or_else(|| syntax("expected a graph name".into()))?;
                if !is_id(n) {
                    return Err(syntax(format!("invalid graph name `{n}`")));
                }
                name = Some(n.to_string());
            }
            "init" | "final" => {
                let id = single_word(rest)
                    .filter(|id| is_id(id))
                    .ok_or_else(|| syntax(format!("expected `{keyword} <id>`")))?;
                let slot = if keyword == "init" {
                    &mut initial
                } else {
                    &mut final_
                };
                if slot.is_some() {
                    return Err(syntax(format!("second `{keyword}` declaration")));
                }
                if !ids.insert(id.to_string()) {
                    return Err(GrammarError::DuplicateBoxId(id.to_string()));
                }
                *slot = Some(id.to_string());
            }
            "edge" => {
                let mut parts = rest.split_whitespace();
                let (Some(from), Some(to), None) = (parts.next(), parts.next(), parts.next())
                else {
                    return Err(syntax("expected `edge <from> <to>`".into()));
                };
                edges.insert((from.to_string(), to.to_string()));
            }
            "box" => {
                let b = parse_box(rest).map_err(syntax)?;
                if !ids.insert(b.id.clone()) {
                    return Err(GrammarError::DuplicateBoxId(b.id));
                }
                boxes.push(b);
            }
            other => return Err(syntax(format!("unknown keyword `{other}`"))),
        }
    }

    let name = name.ok_or(GrammarError::SyntaxError {
        line_no: 0,
        message: "missing `graph <Name>` declaration".into(),
    })?;
    let (Some(initial), Some(final_)) = (initial, final_) else {
        return Err(GrammarError::MissingInitialOrFinal);
    };
    for (from, to) in &edges {
        for end in [from, to] {
            if !ids.contains(end) {
                return Err(GrammarError::EdgeToUnknownBox(end.clone()));
            }
        }
    }
    Ok(Graph {
        name,
        boxes,
        edges,
        initial,
        final_,
    })
}

/// Canonical text form; `parse_graph(&render_graph(g)) == g`.
pub fn render_graph(g: &Graph) -> String {
    let mut out = format!("graph {}\ninit {}\nfinal {}\n", g.name, g.initial, g.final_);
    for b in &g.boxes {
        out.push_str("box ");
        out.push_str(&b.id);
        if let Some(o) = &b.output {
            out.push_str(&format!(" out=\"{}\"", escape_quoted(o)));
        }
        out.push(' ');
        let alts: Vec<String> = b
            .alternatives
            .iter()
            .map(|alt| {
                alt.iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        out.push_str(&alts.join(";"));
        out.push('\n');
    }
    for (from, to) in &g.edges {
        out.push_str(&format!("edge {from} {to}\n"));
    }
    out
}

pub(super) fn escape_quoted(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn single_word(s: &str) -> Option<&str> {
    let mut it = s.split_whitespace();
    match (it.next(), it.next()) {
        (Some(w), None) => Some(w),
        _ => None,
    }
}

pub(crate) fn is_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars()
            .enumerate()
            .all(|(i, c)| self.chars.get(self.pos + i) == Some(&c))
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while self.peek().is_some_and(&f) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    /// Reads a `"..."` string with `\"` and `\\` escapes; cursor on the opening quote.
    fn quoted(&mut self) -> Result<String, String> {
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(format!("unterminated string in `{}`", self.src)),
                Some('"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some('\\') => {
                    self.pos += 1;
                    let c = self
                        .peek()
                        .ok_or_else(|| format!("dangling escape in `{}`", self.src))?;
                    out.push(c);
                    self.pos += 1;
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    /// Reads up to (not including) `close`, consuming it.
    fn until(&mut self, close: &str) -> Result<String, String> {
        let start = self.pos;
        while self.pos < self.chars.len() {
            if self.starts_with(close) {
                let body: String = self.chars[start..self.pos].iter().collect();
                self.pos += close.chars().count();
                return Ok(body);
            }
            self.pos += 1;
        }
        Err(format!("missing `{close}` in `{}`", self.src))
    }
}

fn parse_box(rest: &str) -> Result<GraphBox, String> {
    let mut cur = Cursor {
        chars: rest.chars().collect(),
        pos: 0,
        src: rest,
    };
    let id = cur.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
    if id.is_empty() {
        return Err("expected a box id".into());
    }
    if cur.peek().is_some_and(|c| !c.is_whitespace()) {
        return Err(format!("invalid box id in `{rest}`"));
    }
    cur.skip_ws();
    let mut output = None;
    if cur.starts_with("out=\"") {
        cur.pos += 4;
        output = Some(cur.quoted()?);
    }

    let mut alternatives: Vec<Vec<InputAtom>> = vec![Vec::new()];
    loop {
        cur.skip_ws();
        let Some(c) = cur.peek() else { break };
        let atom = match c {
            '#' => break,
            ';' => {
                cur.pos += 1;
                alternatives.push(Vec::new());
                continue;
            }
            '"' => {
                let lit = cur.quoted()?;
                if lit.trim().is_empty() {
                    return Err("empty literal".into());
                }
                InputAtom::literal(lit)
            }
            ':' => {
                cur.pos += 1;
                let name = cur.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
                if name.is_empty() {
                    return Err("expected a subgraph name after `:`".into());
                }
                InputAtom::call(name)
            }
            '<' => {
                if cur.starts_with("<E>") {
                    cur.pos += 3;
                    InputAtom::epsilon()
                } else {
                    cur.pos += 1;
                    let body = cur.until(">")?;
                    let mask: LexicalMask =
                        format!("<{body}>").parse().map_err(|e| format!("{e}"))?;
                    let filter = if cur.starts_with("<<") {
                        cur.pos += 2;
                        let pat = cur.until(">>")?;
                        Some(MorphFilter::new(&pat).map_err(|e| e.to_string())?)
                    } else {
                        None
                    };
                    InputAtom::mask(mask, filter)
                }
            }
            other => return Err(format!("unexpected `{other}` in box `{id}`")),
        };
        alternatives.last_mut().expect("non-empty").push(atom);
        if cur.peek().is_some_and(|c| !c.is_whitespace() && c != ';') {
            return Err(format!("atoms must be separated by spaces in box `{id}`"));
        }
    }

    if alternatives.iter().any(Vec::is_empty) {
        return Err(format!("box `{id}` has an empty alternative"));
    }
    if alternatives
        .iter()
        .any(|alt| alt.len() > 1 && alt.iter().any(InputAtom::is_epsilon))
    {
        return Err(format!(
            "box `{id}`: <E> must stand alone in its alternative"
        ));
    }
    Ok(GraphBox {
        id,
        alternatives,
        output,
    })
}
