//! Weighted finite-state transducers and their algebra.

mod compose;
mod connect;
mod enumerate;
mod rmepsilon;
pub mod text;
mod topsort;

use std::sync::Arc as SyncArc;

use crate::semiring::Weight;
use crate::symbols::SymbolTable;

pub use compose::compose;
pub use connect::connect;
pub use enumerate::{
    check_equivalent, enumerate_transductions, enumerate_transductions_with_cap, Equivalence,
    Transduction, DEFAULT_PATH_CAP,
};
pub use rmepsilon::{epsilon_cycle, remove_epsilon};
pub use topsort::{find_cycle, is_topologically_sorted, topological_sort};

pub type Label = u32;
pub type StateId = usize;

pub const EPSILON: Label = 0;

/// A transition. Label 0 is ε on either tape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub ilabel: Label,
    pub olabel: Label,
    pub weight: Weight,
    pub nextstate: StateId,
}

impl Arc {
    pub fn new(ilabel: Label, olabel: Label, weight: Weight, nextstate: StateId) -> Self {
        Arc {
            ilabel,
            olabel,
            weight,
            nextstate,
        }
    }

    /// ε on both tapes.
    pub fn is_epsilon(&self) -> bool {
        self.ilabel == EPSILON && self.olabel == EPSILON
    }
}

#[derive(Debug, Clone, PartialEq)]
struct State {
    arcs: Vec<Arc>,
    final_weight: Weight,
}

/// A mutable weighted transducer. Algebra operations take `&Wfst` and
/// return new graphs, so a finished graph can be shared freely.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Wfst {
    start: Option<StateId>,
    states: Vec<State>,
    isyms: Option<SyncArc<SymbolTable>>,
    osyms: Option<SyncArc<SymbolTable>>,
}

impl Wfst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_state(&mut self) -> StateId {
        self.states.push(State {
            arcs: Vec::new(),
            final_weight: Weight::ZERO,
        });
        self.states.len() - 1
    }

    pub fn add_states(&mut self, n: usize) {
        for _ in 0..n {
            self.add_state();
        }
    }

    pub fn set_start(&mut self, s: StateId) {
        assert!(s < self.states.len(), "start state {s} out of range");
        self.start = Some(s);
    }

    pub fn set_final(&mut self, s: StateId, w: Weight) {
        self.states[s].final_weight = w;
    }

    pub fn add_arc(&mut self, s: StateId, arc: Arc) {
        self.states[s].arcs.push(arc);
    }

    pub fn start(&self) -> Option<StateId> {
        self.start
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(|s| s.arcs.len()).sum()
    }

    pub fn arcs(&self, s: StateId) -> &[Arc] {
        &self.states[s].arcs
    }

    pub fn final_weight(&self, s: StateId) -> Weight {
        self.states[s].final_weight
    }

    pub fn is_final(&self, s: StateId) -> bool {
        !self.states[s].final_weight.is_zero()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.states.len()
    }

    /// Keeps only arcs for which `keep(source, arc)` holds.
    pub fn retain_arcs(&mut self, mut keep: impl FnMut(StateId, &Arc) -> bool) {
        for (s, state) in self.states.iter_mut().enumerate() {
            state.arcs.retain(|a| keep(s, a));
        }
    }

    pub fn arcs_mut(&mut self, s: StateId) -> &mut Vec<Arc> {
        &mut self.states[s].arcs
    }

    pub fn input_symbols(&self) -> Option<&SymbolTable> {
        self.isyms.as_deref()
    }

    pub fn output_symbols(&self) -> Option<&SymbolTable> {
        self.osyms.as_deref()
    }

    pub(crate) fn input_symbols_shared(&self) -> Option<SyncArc<SymbolTable>> {
        self.isyms.clone()
    }

    pub(crate) fn output_symbols_shared(&self) -> Option<SyncArc<SymbolTable>> {
        self.osyms.clone()
    }

    pub fn set_input_symbols(&mut self, table: Option<SyncArc<SymbolTable>>) {
        self.isyms = table;
    }

    pub fn set_output_symbols(&mut self, table: Option<SyncArc<SymbolTable>>) {
        self.osyms = table;
    }

    pub fn with_symbols(
        mut self,
        isyms: Option<SyncArc<SymbolTable>>,
        osyms: Option<SyncArc<SymbolTable>>,
    ) -> Self {
        self.isyms = isyms;
        self.osyms = osyms;
        self
    }

    pub(crate) fn copy_symbols_from(&mut self, other: &Wfst) {
        self.isyms = other.isyms.clone();
        self.osyms = other.osyms.clone();
    }

    /// True if any arc is ε on both tapes.
    pub fn has_epsilons(&self) -> bool {
        self.states
            .iter()
            .any(|s| s.arcs.iter().any(Arc::is_epsilon))
    }

    /// Largest input label used on any arc.
    pub fn max_ilabel(&self) -> Label {
        self.states
            .iter()
            .flat_map(|s| s.arcs.iter().map(|a| a.ilabel))
            .max()
            .unwrap_or(0)
    }

    /// Same start, finals and arcs (in order), weights within `tol`.
    pub fn approx_eq(&self, other: &Wfst, tol: f64) -> bool {
        if self.start != other.start || self.states.len() != other.states.len() {
            return false;
        }
        self.states.iter().zip(&other.states).all(|(a, b)| {
            a.final_weight.approx_eq(b.final_weight, tol)
                && a.arcs.len() == b.arcs.len()
                && a.arcs.iter().zip(&b.arcs).all(|(x, y)| {
                    x.ilabel == y.ilabel
                        && x.olabel == y.olabel
                        && x.nextstate == y.nextstate
                        && x.weight.approx_eq(y.weight, tol)
                })
        })
    }
}
