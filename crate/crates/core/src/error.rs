use thiserror::Error;

use crate::fst::StateId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol table mismatch: left output table `{left}` does not match right input table `{right}`")]
    SymbolTableMismatch { left: String, right: String },

    #[error("epsilon cycle through state {state}")]
    EpsilonCycle { state: StateId },

    #[error("graph is cyclic: {}", format_cycle(.cycle))]
    Cyclic { cycle: Vec<StateId> },

    #[error("enumeration exceeds {cap} paths; retry with a smaller max_len (was {max_len})")]
    PathCapExceeded { cap: usize, max_len: usize },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("empty unit sequence{}", .word.as_ref().map(|w| format!(" for word `{w}`")).unwrap_or_default())]
    EmptySequence { word: Option<String> },

    #[error("empty lexicon")]
    EmptyLexicon,

    #[error("probabilities for history `{history}` sum to {sum}, expected 1")]
    UnnormalizedRow { history: String, sum: f64 },

    #[error("invalid probability {prob} for `{history} -> {symbol}`")]
    InvalidProbability { history: String, symbol: String, prob: f64 },

    #[error("target contains the blank unit at position {position}")]
    BlankInTarget { position: usize },

    #[error("label {label} is outside the emission range 1..={units}")]
    LabelOutOfRange { label: u32, units: usize },

    #[error("prune beam must be positive, got {0}")]
    InvalidBeam(f64),

    #[error("emission row {row} is not normalized (log-sum-exp = {lse})")]
    UnnormalizedEmissions { row: usize, lse: f64 },

    #[error("emission matrix shape mismatch: {0}")]
    Shape(String),

    #[error("denominator lattice is empty")]
    EmptyDenominator,

    #[error("empty beam at frame {frame}")]
    EmptyBeam { frame: usize },

    #[error("no final state reached after {frames} frames")]
    NoFinalState { frames: usize },

    #[error("epsilon closure did not converge at frame {frame}")]
    ClosureDiverged { frame: usize },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_cycle(cycle: &[StateId]) -> String {
    cycle
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
