//! A workbench for local grammars: apply finite-state grammar graphs to
//! text, build concordances, compare concordances pairwise, decide which
//! grammars to keep, compose them, and score the result against gold
//! annotations.

pub mod composer;
pub mod concordance;
pub mod concorddiff;
pub mod evaluator;
pub mod grammar;
pub mod lexicon;
pub mod matcher;
pub mod samples;

pub use composer::{compose_main, compose_set, select_keep_set, ComposerError, KeepDecision};
pub use concordance::{
    build_concordance, parse_concordance, write_concordance, Concordance, ConcordanceLine,
    ContextConfig,
};
pub use concorddiff::{
    align, infer_relation, recommend, render_html, Action, DiffClass, DiffLine, Relation,
    RelationReport, Side,
};
pub use evaluator::{
    annotate, annotate_document, evaluate, non_overlapping, parse_gold, score, CategoryFilter,
    EvalReport, GoldAnnotation,
};
pub use grammar::{load_grammar_set, parse_graph, render_graph, validate, GrammarSet, Graph};
pub use lexicon::{LexEntry, Lexicon};
pub use matcher::{apply_grammar, filter_longest, tokenize, MatchMode, Occurrence};
