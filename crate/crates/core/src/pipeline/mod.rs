//! Lexicon, grammar and decoding-graph construction plus size statistics.

mod lexicon;
mod ngram;

use std::fmt;

pub use lexicon::{build_lexicon_fst, build_lexicon_fst_with_words, Lexicon};
pub use ngram::{
    build_ngram_fst, build_ngram_fst_trimmed, BigramLm, History, LmLevel, Next, SENTENCE_END,
    SENTENCE_START,
};

use crate::error::{Error, Result};
use crate::fst::{compose, connect, Arc, Label, Wfst};
use crate::semiring::Weight;
use crate::topology::{build_topology, TopologySpec};

/// Straight-line acceptor for `units`.
pub fn build_linear(units: &[Label]) -> Result<Wfst> {
    if units.is_empty() {
        return Err(Error::EmptySequence { word: None });
    }
    let mut f = Wfst::new();
    f.add_states(units.len() + 1);
    f.set_start(0);
    for (i, &u) in units.iter().enumerate() {
        f.add_arc(i, Arc::new(u, u, Weight::ONE, i + 1));
    }
    f.set_final(units.len(), Weight::ONE);
    Ok(f)
}

/// One-state identity acceptor over the language units `2..=n_units`.
pub fn build_unit_identity(n_units: usize) -> Wfst {
    let mut f = Wfst::new();
    f.add_state();
    f.set_start(0);
    f.set_final(0, Weight::ONE);
    for u in 2..=n_units as Label {
        f.add_arc(0, Arc::new(u, u, Weight::ONE, 0));
    }
    f
}

/// `topo ∘ (lexicon ∘ grammar)`, trimmed.
pub fn build_decoding_graph(topo: &Wfst, lexicon: &Wfst, grammar: &Wfst) -> Result<Wfst> {
    let lg = compose(lexicon, grammar)?;
    Ok(connect(&compose(topo, &lg)?))
}

/// `L ∘ G`, trimmed. The lexicon's output table is the grammar's
/// vocabulary.
pub fn build_lg(lexicon: &Lexicon, grammar: &BigramLm) -> Result<Wfst> {
    let l = build_lexicon_fst_with_words(lexicon, grammar.vocab().clone())?;
    let g = build_ngram_fst(grammar)?;
    Ok(connect(&compose(&l, &g)?))
}

/// `T ∘ LG` for a topology spec, with the topology relabelled to the
/// lexicon's unit table.
pub fn build_tlg(spec: TopologySpec, lexicon: &Lexicon, lg: &Wfst) -> Result<Wfst> {
    let topo = build_topology(spec)?.with_units(lexicon.units().clone())?;
    Ok(connect(&compose(topo.fst(), lg)?))
}

/// Bytes charged per arc by [`GraphStats::approx_bytes`]: labels, weight
/// and destination packed as four 32-bit fields.
pub const BYTES_PER_ARC: usize = 16;
/// Bytes charged per state: arc-list offset plus final weight.
pub const BYTES_PER_STATE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphStats {
    pub states: usize,
    pub arcs: usize,
    pub approx_bytes: usize,
}

impl GraphStats {
    pub fn from_counts(states: usize, arcs: usize) -> Self {
        GraphStats {
            states,
            arcs,
            approx_bytes: BYTES_PER_ARC * arcs + BYTES_PER_STATE * states,
        }
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.states, self.arcs, self.approx_bytes)
    }
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "states={} arcs={} approx_bytes={}", self.states, self.arcs, self.approx_bytes)
    }
}

pub fn graph_stats(fst: &Wfst) -> GraphStats {
    GraphStats::from_counts(fst.num_states(), fst.num_arcs())
}
