//! Brute-force language enumeration, the oracle behind equivalence checks.

use std::collections::BTreeMap;

use super::{Label, StateId, Wfst, EPSILON};
use crate::error::{Error, Result};
use crate::semiring::{LogSemiring, Semiring, Weight};

pub const DEFAULT_PATH_CAP: usize = 10_000_000;

/// Weights closer than this are considered equal by [`check_equivalent`].
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;

/// One `(input, output)` pair of a transducer's language with its ⊕-summed
/// weight. ε labels are dropped from both strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Transduction {
    pub input: Vec<Label>,
    pub output: Vec<Label>,
    pub weight: Weight,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Equivalence {
    Equivalent,
    /// First `(input, output)` pair, in sorted order, on which the two
    /// graphs disagree. A missing pair has weight zero.
    Counterexample {
        input: Vec<Label>,
        output: Vec<Label>,
        left: Weight,
        right: Weight,
    },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent)
    }
}

pub fn enumerate_transductions(fst: &Wfst, max_len: usize) -> Result<Vec<Transduction>> {
    enumerate_transductions_with_cap(fst, max_len, DEFAULT_PATH_CAP)
}

/// Every accepted input of at most `max_len` non-ε symbols, paired with each
/// output it can produce. Weights of distinct paths realising the same pair
/// are ⊕-summed in the log semiring. Output is sorted by `(input, output)`.
pub fn enumerate_transductions_with_cap(
    fst: &Wfst,
    max_len: usize,
    cap: usize,
) -> Result<Vec<Transduction>> {
    let table = collect(fst, max_len, cap)?;
    Ok(table
        .into_iter()
        .map(|((input, output), weight)| Transduction {
            input,
            output,
            weight,
        })
        .collect())
}

type Table = BTreeMap<(Vec<Label>, Vec<Label>), Weight>;

fn collect(fst: &Wfst, max_len: usize, cap: usize) -> Result<Table> {
    let mut table = Table::new();
    let Some(start) = fst.start() else {
        return Ok(table);
    };

    struct Frame {
        state: StateId,
        input: Vec<Label>,
        output: Vec<Label>,
        weight: Weight,
        // consecutive ε-input moves; more than |states| means an ε-input cycle
        eps_run: usize,
    }

    let n = fst.num_states();
    let mut visited = 0usize;
    let mut stack = vec![Frame {
        state: start,
        input: Vec::new(),
        output: Vec::new(),
        weight: Weight::ONE,
        eps_run: 0,
    }];
    while let Some(frame) = stack.pop() {
        visited += 1;
        if visited > cap {
            return Err(Error::PathCapExceeded { cap, max_len });
        }
        let fw = fst.final_weight(frame.state);
        if !fw.is_zero() {
            let w = frame.weight.times(fw);
            let e = table
                .entry((frame.input.clone(), frame.output.clone()))
                .or_insert(Weight::ZERO);
            *e = LogSemiring::plus(*e, w);
        }
        for arc in fst.arcs(frame.state) {
            if arc.weight.is_zero() {
                continue;
            }
            let consumes = arc.ilabel != EPSILON;
            if consumes && frame.input.len() == max_len {
                continue;
            }
            let eps_run = if consumes { 0 } else { frame.eps_run + 1 };
            if eps_run > n {
                return Err(Error::EpsilonCycle { state: frame.state });
            }
            let mut input = frame.input.clone();
            if consumes {
                input.push(arc.ilabel);
            }
            let mut output = frame.output.clone();
            if arc.olabel != EPSILON {
                output.push(arc.olabel);
            }
            stack.push(Frame {
                state: arc.nextstate,
                input,
                output,
                weight: frame.weight.times(arc.weight),
                eps_run,
            });
        }
    }
    table.retain(|_, w| !w.is_zero());
    Ok(table)
}

/// Compares the ⊕-aggregated languages of `a` and `b` on inputs of length
/// at most `max_len`.
pub fn check_equivalent(a: &Wfst, b: &Wfst, max_len: usize) -> Result<Equivalence> {
    for (left, right) in [
        (a.input_symbols(), b.input_symbols()),
        (a.output_symbols(), b.output_symbols()),
    ] {
        if let (Some(l), Some(r)) = (left, right) {
            if !l.same_symbols(r) {
                return Err(Error::SymbolTableMismatch {
                    left: l.name().to_string(),
                    right: r.name().to_string(),
                });
            }
        }
    }
    let ta = collect(a, max_len, DEFAULT_PATH_CAP)?;
    let tb = collect(b, max_len, DEFAULT_PATH_CAP)?;
    let mut keys: Vec<&(Vec<Label>, Vec<Label>)> = ta.keys().chain(tb.keys()).collect();
    keys.sort();
    keys.dedup();
    for key in keys {
        let left = ta.get(key).copied().unwrap_or(Weight::ZERO);
        let right = tb.get(key).copied().unwrap_or(Weight::ZERO);
        if !left.approx_eq(right, EQUIVALENCE_TOLERANCE) {
            return Ok(Equivalence::Counterexample {
                input: key.0.clone(),
                output: key.1.clone(),
                left,
                right,
            });
        }
    }
    Ok(Equivalence::Equivalent)
}
