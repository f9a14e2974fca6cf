//! Sample grammars and lexicons shipped with the crate.

use crate::grammar::{load_grammar_set, GrammarError, GrammarSet};
use crate::lexicon::{Lexicon, LexiconError};

pub const PREPOSICAO: &str = include_str!("../samples/grammars/Preposicao.lg");
pub const ABREVIACOES: &str = include_str!("../samples/grammars/Abreviacoes.lg");
/// Honorific title followed by a name; only the name is tagged.
pub const FORMAS_DE_TRATAMENTO: &str =
    include_str!("../samples/grammars/ReconheceFormasDeTratamento.lg");
/// Variant whose `<NOME>` tag also covers the title.
pub const FORMAS_DE_TRATAMENTO_COM_TITULO: &str =
    include_str!("../samples/grammars/ReconheceFormasDeTratamentoComTitulo.lg");
/// Names found in the dictionaries through `<N+PR>` and `<Hum>`.
pub const NOMES_COMPOSTOS: &str = include_str!("../samples/grammars/ReconheceNomesCompostos.lg");

pub const ENGLISH_DIC: &str = include_str!("../samples/lexicons/english.dic");
pub const PORTUGUESE_DIC: &str = include_str!("../samples/lexicons/portuguese.dic");

/// Every sample grammar file as `(graph name, text)`.
pub fn grammar_files() -> Vec<(String, String)> {
    [
        ("Preposicao", PREPOSICAO),
        ("Abreviacoes", ABREVIACOES),
        ("ReconheceFormasDeTratamento", FORMAS_DE_TRATAMENTO),
        (
            "ReconheceFormasDeTratamentoComTitulo",
            FORMAS_DE_TRATAMENTO_COM_TITULO,
        ),
        ("ReconheceNomesCompostos", NOMES_COMPOSTOS),
    ]
    .into_iter()
    .map(|(n, t)| (n.to_string(), t.to_string()))
    .collect()
}

/// All sample grammars, rooted at `main`.
pub fn grammar_set(main: &str) -> Result<GrammarSet, GrammarError> {
    load_grammar_set(&grammar_files(), main)
}

/// Portuguese and English sample lexicons merged.
pub fn lexicon() -> Result<Lexicon, LexiconError> {
    let mut lex = Lexicon::new("samples");
    lex.extend_from_str(PORTUGUESE_DIC)?;
    lex.extend_from_str(ENGLISH_DIC)?;
    Ok(lex)
}
