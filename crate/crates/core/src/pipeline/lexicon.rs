use std::sync::Arc as SyncArc;

use crate::error::{Error, Result};
use crate::fst::{connect, Arc, Label, Wfst, EPSILON};
use crate::semiring::Weight;
use crate::symbols::SymbolTable;
use crate::topology::BLANK;

/// Word pronunciations as unit-id sequences.
#[derive(Debug, Clone)]
pub struct Lexicon {
    units: SyncArc<SymbolTable>,
    entries: Vec<(String, Vec<Label>)>,
}

impl Lexicon {
    pub fn new(units: SyncArc<SymbolTable>) -> Self {
        Lexicon {
            units,
            entries: Vec::new(),
        }
    }

    /// Adds a pronunciation. A repeated `(word, units)` pair is ignored.
    pub fn add(&mut self, word: impl Into<String>, units: Vec<Label>) {
        let word = word.into();
        if !self.entries.iter().any(|(w, u)| *w == word && *u == units) {
            self.entries.push((word, units));
        }
    }

    /// Parses `word unit1 unit2 ...` lines against `units`.
    pub fn from_text(text: &str, units: SyncArc<SymbolTable>) -> Result<Self> {
        let mut lex = Lexicon::new(units);
        for (i, line) in text.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else {
                continue;
            };
            let pron = fields
                .map(|u| {
                    lex.units
                        .id(u)
                        .ok_or_else(|| Error::parse(i + 1, format!("unknown unit `{u}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            lex.add(word, pron);
        }
        Ok(lex)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (word, pron) in &self.entries {
            out.push_str(word);
            for &u in pron {
                out.push(' ');
                out.push_str(self.units.symbol(u).unwrap_or("?"));
            }
            out.push('\n');
        }
        out
    }

    pub fn entries(&self) -> &[(String, Vec<Label>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn units(&self) -> &SyncArc<SymbolTable> {
        &self.units
    }

    /// Word table in first-appearance order.
    pub fn word_table(&self) -> SymbolTable {
        let mut words = SymbolTable::new("words");
        for (w, _) in &self.entries {
            words.get_or_push(w);
        }
        words
    }
}

/// Union of per-word linear transducers closed under concatenation.
///
/// Each pronunciation is a path from the start state reading its units;
/// the word is emitted on the first arc and the last arc returns to the
/// start state, which is the only final state.
pub fn build_lexicon_fst(lex: &Lexicon) -> Result<Wfst> {
    build_lexicon_fst_with_words(lex, SyncArc::new(lex.word_table()))
}

/// As [`build_lexicon_fst`] with an explicit word table (which must contain
/// every lexicon word).
pub fn build_lexicon_fst_with_words(lex: &Lexicon, words: SyncArc<SymbolTable>) -> Result<Wfst> {
    if lex.is_empty() {
        return Err(Error::EmptyLexicon);
    }
    let max_unit = lex.units.len() as Label;
    let mut f = Wfst::new();
    let start = f.add_state();
    f.set_start(start);
    f.set_final(start, Weight::ONE);
    for (word, pron) in &lex.entries {
        if pron.is_empty() {
            return Err(Error::EmptySequence {
                word: Some(word.clone()),
            });
        }
        if let Some(&bad) = pron.iter().find(|&&u| u <= BLANK || u >= max_unit) {
            return Err(Error::LabelOutOfRange {
                label: bad,
                units: lex.units.len().saturating_sub(1),
            });
        }
        let word_id = words.try_id(word)?;
        let mut src = start;
        for (i, &unit) in pron.iter().enumerate() {
            let dst = if i + 1 == pron.len() { start } else { f.add_state() };
            let olabel = if i == 0 { word_id } else { EPSILON };
            f.add_arc(src, Arc::new(unit, olabel, Weight::ONE, dst));
            src = dst;
        }
    }
    Ok(connect(&f.with_symbols(Some(lex.units.clone()), Some(words))))
}
