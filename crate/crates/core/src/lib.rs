//! CTC topology graphs and the WFST machinery around them: composition,
//! decoding-graph construction, lattice losses and Viterbi decoding.

pub mod bench;
pub mod decoder;
pub mod error;
pub mod fixtures;
pub mod fst;
pub mod lattice;
pub mod pipeline;
pub mod semiring;
pub mod symbols;
pub mod topology;

pub use decoder::{collapse, greedy_decode, viterbi_decode, Hypothesis};
pub use error::{Error, Result};
pub use fst::{Arc, Label, StateId, Wfst, EPSILON};
pub use semiring::{LogSemiring, Semiring, TropicalSemiring, Weight};
pub use symbols::SymbolTable;
pub use topology::{build_topology, make_selfless, Mode, Topology, TopologyKind, TopologySpec, BLANK};
pub use lattice::{
    augment_emissions_for_compact, build_denominator, build_supervision, ctc_loss_and_grad, dense_intersect,
    mmi_loss_and_grad, DenseEmissions, Lattice, LossResult,
};
pub use pipeline::{
    build_decoding_graph, build_lexicon_fst, build_lg, build_linear, build_ngram_fst, build_tlg, graph_stats,
    BigramLm, GraphStats, Lexicon,
};
