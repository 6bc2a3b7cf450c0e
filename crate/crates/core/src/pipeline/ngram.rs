//! Backoff-free bigram language models and their acceptors.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc as SyncArc;

use crate::error::{Error, Result};
use crate::fst::{connect, Arc, Label, StateId, Wfst};
use crate::semiring::Weight;
use crate::symbols::SymbolTable;
use crate::topology::BLANK;

pub const SENTENCE_START: &str = "<s>";
pub const SENTENCE_END: &str = "</s>";

/// Rows must sum to one within this tolerance.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmLevel {
    Word,
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum History {
    Start,
    After(Label),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Next {
    Symbol(Label),
    End,
}

#[derive(Debug, Clone)]
pub struct BigramLm {
    level: LmLevel,
    vocab: SyncArc<SymbolTable>,
    probs: BTreeMap<History, BTreeMap<Next, f64>>,
}

impl BigramLm {
    pub fn new(level: LmLevel, vocab: SyncArc<SymbolTable>) -> Self {
        BigramLm {
            level,
            vocab,
            probs: BTreeMap::new(),
        }
    }

    /// Uniform unit bigram over the language units of an `n_units`
    /// vocabulary: every history spreads its mass evenly over the units
    /// and sentence end.
    pub fn uniform_units(n_units: usize) -> Self {
        let vocab = SyncArc::new(SymbolTable::units(n_units));
        let units: Vec<Label> = (2..=n_units as Label).collect();
        let p = 1.0 / (units.len() + 1) as f64;
        let mut lm = BigramLm::new(LmLevel::Unit, vocab);
        let histories = std::iter::once(History::Start).chain(units.iter().map(|&u| History::After(u)));
        for h in histories {
            for &u in &units {
                lm.set(h, Next::Symbol(u), p);
            }
            lm.set(h, Next::End, p);
        }
        lm
    }

    pub fn set(&mut self, history: History, next: Next, prob: f64) {
        self.probs.entry(history).or_default().insert(next, prob);
    }

    pub fn prob(&self, history: History, next: Next) -> f64 {
        self.probs
            .get(&history)
            .and_then(|row| row.get(&next))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn level(&self) -> LmLevel {
        self.level
    }

    pub fn vocab(&self) -> &SyncArc<SymbolTable> {
        &self.vocab
    }

    pub fn rows(&self) -> impl Iterator<Item = (History, &BTreeMap<Next, f64>)> {
        self.probs.iter().map(|(h, row)| (*h, row))
    }

    /// Probability of a complete sentence under the chain rule.
    pub fn sentence_prob(&self, symbols: &[Label]) -> f64 {
        let mut h = History::Start;
        let mut p = 1.0;
        for &s in symbols {
            p *= self.prob(h, Next::Symbol(s));
            h = History::After(s);
        }
        p * self.prob(h, Next::End)
    }

    pub fn history_name(&self, h: History) -> String {
        match h {
            History::Start => SENTENCE_START.to_string(),
            History::After(l) => self.vocab.symbol(l).map(str::to_string).unwrap_or_else(|| l.to_string()),
        }
    }

    fn next_name(&self, n: Next) -> String {
        match n {
            Next::End => SENTENCE_END.to_string(),
            Next::Symbol(l) => self.vocab.symbol(l).map(str::to_string).unwrap_or_else(|| l.to_string()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (&h, row) in &self.probs {
            for (&n, &p) in row {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidProbability {
                        history: self.history_name(h),
                        symbol: self.next_name(n),
                        prob: p,
                    });
                }
                if let Next::Symbol(l) = n {
                    if self.level == LmLevel::Unit && l <= BLANK {
                        return Err(Error::InvalidProbability {
                            history: self.history_name(h),
                            symbol: self.next_name(n),
                            prob: p,
                        });
                    }
                }
            }
            let sum: f64 = row.values().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(Error::UnnormalizedRow {
                    history: self.history_name(h),
                    sum,
                });
            }
        }
        Ok(())
    }

    /// Parses `history symbol probability` lines. `<s>` is the start
    /// history and `</s>` the end symbol. Without a vocabulary, one is
    /// built from the file in order of appearance.
    pub fn from_text(text: &str, level: LmLevel, vocab: Option<SyncArc<SymbolTable>>) -> Result<Self> {
        let mut table = match &vocab {
            Some(v) => (**v).clone(),
            None => SymbolTable::new(match level {
                LmLevel::Word => "words",
                LmLevel::Unit => "units",
            }),
        };
        let fixed = vocab.is_some();
        let mut lookup = |sym: &str, line: usize| -> Result<Label> {
            if fixed {
                table
                    .id(sym)
                    .ok_or_else(|| Error::parse(line, format!("unknown symbol `{sym}`")))
            } else {
                Ok(table.get_or_push(sym))
            }
        };
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let fields: Vec<&str> = raw.split_whitespace().collect();
            if fields.is_empty() || fields[0].starts_with('#') {
                continue;
            }
            if fields.len() != 3 {
                return Err(Error::parse(line, "expected `history symbol probability`"));
            }
            let h = match fields[0] {
                SENTENCE_START => History::Start,
                sym => History::After(lookup(sym, line)?),
            };
            let n = match fields[1] {
                SENTENCE_END => Next::End,
                sym => Next::Symbol(lookup(sym, line)?),
            };
            let p: f64 = fields[2]
                .parse()
                .map_err(|_| Error::parse(line, format!("bad probability `{}`", fields[2])))?;
            rows.push((h, n, p));
        }
        let mut lm = BigramLm::new(level, vocab.unwrap_or_else(|| SyncArc::new(table)));
        for (h, n, p) in rows {
            lm.set(h, n, p);
        }
        Ok(lm)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (&h, row) in &self.probs {
            for (&n, &p) in row {
                out.push_str(&format!("{}\t{}\t{}\n", self.history_name(h), self.next_name(n), p));
            }
        }
        out
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            History::Start => f.write_str(SENTENCE_START),
            History::After(l) => write!(f, "{l}"),
        }
    }
}

/// One state per history (the start state plus one per symbol); arcs carry
/// `ln p(symbol | history)` and final weights `ln p(</s> | history)`.
pub fn build_ngram_fst(lm: &BigramLm) -> Result<Wfst> {
    lm.validate()?;
    let mut symbols: Vec<Label> = Vec::new();
    for (h, row) in lm.rows() {
        if let History::After(l) = h {
            symbols.push(l);
        }
        for n in row.keys() {
            if let Next::Symbol(l) = n {
                symbols.push(*l);
            }
        }
    }
    symbols.sort_unstable();
    symbols.dedup();

    let mut f = Wfst::new();
    let start = f.add_state();
    f.set_start(start);
    let state_of: BTreeMap<Label, StateId> = symbols.iter().map(|&l| (l, f.add_state())).collect();
    for (h, row) in lm.rows() {
        let src = match h {
            History::Start => start,
            History::After(l) => state_of[&l],
        };
        for (&n, &p) in row {
            if p == 0.0 {
                continue;
            }
            match n {
                Next::End => f.set_final(src, Weight::from_prob(p)),
                Next::Symbol(l) => f.add_arc(src, Arc::new(l, l, Weight::from_prob(p), state_of[&l])),
            }
        }
    }
    let vocab = lm.vocab.clone();
    Ok(f.with_symbols(Some(vocab.clone()), Some(vocab)))
}

/// Like [`build_ngram_fst`] but trimmed.
pub fn build_ngram_fst_trimmed(lm: &BigramLm) -> Result<Wfst> {
    Ok(connect(&build_ngram_fst(lm)?))
}
