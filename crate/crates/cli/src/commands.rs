use std::collections::BTreeSet;
use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};

use lgw_core::composer::{compose_main, index_reports};
use lgw_core::concordance::ContextConfig;
use lgw_core::evaluator::{format_table, GoldDocument};
use lgw_core::grammar::GrammarSet;
use lgw_core::{
    align, annotate_document, apply_grammar, build_concordance, infer_relation, load_grammar_set,
    non_overlapping, parse_concordance, parse_gold, recommend, render_graph, render_html, score,
    select_keep_set, write_concordance, CategoryFilter, Concordance, KeepDecision, Lexicon,
    RelationReport,
};

use crate::{ApplyArgs, ComposeArgs, DiffArgs, EvalArgs, RelateArgs};

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Parse = 2,
    Mismatch = 3,
    Empty = 4,
}

pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

type Outcome = Result<(), Failure>;

trait Classify<T> {
    fn or_fail(self, kind: Kind) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn or_fail(self, kind: Kind) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            kind,
            error: e.into(),
        })
    }
}

fn fail(kind: Kind, error: anyhow::Error) -> Failure {
    Failure { kind, error }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .or_fail(Kind::Parse)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .or_fail(Kind::Parse)?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .with_context(|| format!("cannot write {}", path.display()))
        .or_fail(Kind::Parse)?;
    Ok(path)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_unix: Option<u64>,
    #[serde(flatten)]
    body: &'a T,
}

fn now(stamp: bool) -> Option<u64> {
    stamp.then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    })
}

fn to_json<T: Serialize>(body: &T, stamp: bool) -> String {
    let doc = Stamped {
        generated_unix: now(stamp),
        body,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize, Deserialize)]
struct ReportsFile {
    reports: Vec<RelationReport>,
}

#[derive(Serialize, Deserialize)]
struct DecisionsFile {
    decisions: Vec<KeepDecision>,
}

fn load_grammars(paths: &[PathBuf], main: Option<&str>) -> Result<GrammarSet, Failure> {
    let mut files = Vec::with_capacity(paths.len());
    for p in paths {
        files.push((stem(p), read(p)?));
    }
    let main = main
        .map(str::to_string)
        .unwrap_or_else(|| files[0].0.clone());
    load_grammar_set(&files, &main).or_fail(Kind::Parse)
}

fn load_lexicon(paths: &[PathBuf]) -> Result<Lexicon, Failure> {
    let mut lex = Lexicon::new("cli");
    for p in paths {
        lex.extend_from_str(&read(p)?)
            .with_context(|| format!("in {}", p.display()))
            .or_fail(Kind::Parse)?;
    }
    Ok(lex)
}

/// Plain text of a corpus file, plus its markup when it is XML.
fn load_corpus(path: &Path) -> Result<GoldDocument, Failure> {
    let raw = read(path)?;
    let is_xml = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("xml"));
    if is_xml {
        parse_gold(&raw)
            .with_context(|| format!("in {}", path.display()))
            .or_fail(Kind::Parse)
    } else {
        Ok(GoldDocument {
            text: raw,
            annotations: Vec::new(),
            tags: Vec::new(),
        })
    }
}

struct Applied {
    name: String,
    occurrences: usize,
    cnc: Option<String>,
    xml: Option<String>,
}

pub fn apply(a: ApplyArgs) -> Outcome {
    let gs = load_grammars(&a.grammars, a.main.as_deref())?;
    let lex = load_lexicon(&a.lexicons)?;
    let cfg = ContextConfig {
        left_chars: a.left,
        right_chars: a.right,
    };
    let mut corpora = a.corpora.clone();
    corpora.sort_by_key(|p| file_name(p));

    let run = |path: &PathBuf| -> Result<Applied, Failure> {
        let doc = load_corpus(path)?;
        let occs = apply_grammar(&gs, &doc.text, &lex, a.mode.into());
        let name = file_name(path);
        let cnc = if a.cnc {
            let mut c = build_concordance(&occs, &doc.text, &name, cfg).or_fail(Kind::Parse)?;
            c.source_grammar = gs.main.clone();
            Some(write_concordance(&c))
        } else {
            None
        };
        let xml = if a.xml {
            Some(
                annotate_document(&doc, &non_overlapping(&occs), &a.categ, &a.tipo)
                    .or_fail(Kind::Parse)?,
            )
        } else {
            None
        };
        Ok(Applied {
            name,
            occurrences: occs.len(),
            cnc,
            xml,
        })
    };
    let results: Vec<Result<Applied, Failure>> = std::thread::scope(|s| {
        let handles: Vec<_> = corpora.iter().map(|p| s.spawn(|| run(p))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("corpus worker panicked"))
            .collect()
    });

    for r in results {
        let applied = r?;
        let base = Path::new(&applied.name)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if let Some(cnc) = &applied.cnc {
            write(&a.out, &format!("{base}.cnc"), cnc)?;
        }
        if let Some(xml) = &applied.xml {
            write(&a.out, &format!("{base}.xml"), xml)?;
        }
        println!("{}\t{}\t{}", applied.name, gs.main, applied.occurrences);
    }
    Ok(())
}

fn load_cnc(path: &Path) -> Result<Concordance, Failure> {
    parse_concordance(&read(path)?)
        .with_context(|| format!("in {}", path.display()))
        .or_fail(Kind::Parse)
}

pub fn diff(a: DiffArgs) -> Outcome {
    let cx = load_cnc(&a.cnc_x)?;
    let cy = load_cnc(&a.cnc_y)?;
    let lines = align(&cx, &cy).or_fail(Kind::Mismatch)?;
    let report = infer_relation(&cx, &cy).or_fail(Kind::Mismatch)?;
    let mut html = render_html(&lines);
    if let Some(t) = now(a.stamp) {
        html.push_str(&format!("<!-- generated {t} -->\n"));
    }
    write(&a.out, &a.html, &html)?;
    write(&a.out, &a.json, &to_json(&report, a.stamp))?;
    println!("{:?}: {}", report.relation, recommend(&report));
    Ok(())
}

pub fn relate(a: RelateArgs) -> Outcome {
    let cncs = a
        .cncs
        .iter()
        .map(|p| load_cnc(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut names = BTreeSet::new();
    for c in &cncs {
        if !names.insert(c.source_grammar.clone()) {
            return Err(fail(
                Kind::Mismatch,
                anyhow!("grammar `{}` appears twice", c.source_grammar),
            ));
        }
    }
    let mut reports: Vec<RelationReport> = Vec::new();
    for (i, cx) in cncs.iter().enumerate() {
        for cy in &cncs[i + 1..] {
            let (cx, cy) = if cx.source_grammar <= cy.source_grammar {
                (cx, cy)
            } else {
                (cy, cx)
            };
            reports.push(infer_relation(cx, cy).or_fail(Kind::Mismatch)?);
        }
    }
    reports.sort_by(|p, q| (&p.grammar_x, &p.grammar_y).cmp(&(&q.grammar_x, &q.grammar_y)));
    write(
        &a.out,
        &a.json,
        &to_json(
            &ReportsFile {
                reports: reports.clone(),
            },
            a.stamp,
        ),
    )?;
    for r in &reports {
        println!(
            "{}\t{}\t{:?}\t{}",
            r.grammar_x, r.grammar_y, r.relation, r.action
        );
    }
    Ok(())
}

pub fn compose(a: ComposeArgs) -> Outcome {
    let decisions: Vec<KeepDecision> = match (&a.reports, &a.decisions) {
        (Some(path), _) => {
            let ReportsFile { reports } = serde_json::from_str(&read(path)?)
                .with_context(|| format!("in {}", path.display()))
                .or_fail(Kind::Parse)?;
            let names: Vec<String> = reports
                .iter()
                .flat_map(|r| [r.grammar_x.clone(), r.grammar_y.clone()])
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            select_keep_set(&names, &index_reports(&reports)).or_fail(Kind::Mismatch)?
        }
        (None, Some(path)) => {
            let file: DecisionsFile = serde_json::from_str(&read(path)?)
                .with_context(|| format!("in {}", path.display()))
                .or_fail(Kind::Parse)?;
            file.decisions
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    let kept: Vec<String> = decisions
        .iter()
        .filter(|d| d.kept)
        .map(|d| d.grammar.clone())
        .collect();
    if kept.is_empty() {
        return Err(fail(Kind::Empty, anyhow!("no grammar is kept")));
    }
    let main = compose_main(&kept, &a.main).or_fail(Kind::Parse)?;
    write(&a.out, &format!("{}.lg", a.main), &render_graph(&main))?;
    let file = DecisionsFile { decisions };
    write(&a.out, "decisions.json", &to_json(&file, a.stamp))?;
    let decisions = file.decisions;
    for d in &decisions {
        println!("{}\t{}", d.grammar, if d.kept { "kept" } else { "dropped" });
    }
    Ok(())
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    filter: String,
    report: &'a lgw_core::EvalReport,
    rounded: &'a lgw_core::EvalReport,
}

pub fn eval(a: EvalArgs) -> Outcome {
    let sys = parse_gold(&read(&a.sys)?)
        .with_context(|| format!("in {}", a.sys.display()))
        .or_fail(Kind::Parse)?;
    let gold = parse_gold(&read(&a.gold)?)
        .with_context(|| format!("in {}", a.gold.display()))
        .or_fail(Kind::Parse)?;
    if sys.text != gold.text {
        return Err(fail(
            Kind::Mismatch,
            anyhow!(
                "{} and {} do not share the same plain text",
                a.sys.display(),
                a.gold.display()
            ),
        ));
    }
    let filter = CategoryFilter::new(a.categ.clone(), a.tipo.as_deref());
    let report = score(&sys.annotations, &gold.annotations, &filter);
    let table = format_table(&[(filter.to_string(), report)]);
    if color_enabled() {
        let mut lines = table.lines();
        if let (Some(note), Some(head)) = (lines.next(), lines.next()) {
            println!("{note}\n\x1b[1m{head}\x1b[0m");
            for l in lines {
                println!("{l}");
            }
        }
    } else {
        print!("{table}");
    }
    if let Some(dir) = &a.out {
        let out = EvalOutput {
            filter: filter.to_string(),
            report: &report,
            rounded: &report.rounded(),
        };
        write(dir, "eval.json", &to_json(&out, a.stamp))?;
    }
    Ok(())
}

fn color_enabled() -> bool {
    std::env::var("LGW_COLOR").map_or(true, |v| v != "0") && std::io::stdout().is_terminal()
}
