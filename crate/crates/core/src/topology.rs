//! CTC topology graphs.
//!
//! Emission labels: 1 is `<blank>`, 2..=N are the language units and N+1 is
//! the extra unit used by train-mode compact graphs. Label 0 is ε. Output
//! labels use the same ids; `<blank>` is never emitted.
//!
//! | kind    | states | arcs   |
//! |---------|--------|--------|
//! | correct | N      | N²     |
//! | eesen   | N + 2  | 3N + 1 |
//! | compact | N      | 3N − 2 |
//! | minimal | 1      | N      |
//!
//! The selfless variants drop the N − 1 unit self-loops that emit ε.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc as SyncArc;

use crate::error::{Error, Result};
use crate::fst::{Arc, Label, StateId, Wfst, EPSILON};
use crate::semiring::Weight;
use crate::symbols::SymbolTable;

pub const BLANK: Label = 1;

/// Label of the compact train-mode unit that stands in for ε returns.
pub fn emulation_label(n_units: usize) -> Label {
    n_units as Label + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopologyKind {
    Correct,
    Eesen,
    Compact,
    Minimal,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 4] = [
        TopologyKind::Correct,
        TopologyKind::Eesen,
        TopologyKind::Compact,
        TopologyKind::Minimal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::Correct => "correct",
            TopologyKind::Eesen => "eesen",
            TopologyKind::Compact => "compact",
            TopologyKind::Minimal => "minimal",
        }
    }

    /// `(states, arcs)` of the non-selfless decode graph.
    pub fn expected_size(self, n_units: usize) -> (usize, usize) {
        let n = n_units;
        match self {
            TopologyKind::Correct => (n, n * n),
            TopologyKind::Eesen => (n + 2, 3 * n + 1),
            TopologyKind::Compact => (n, 3 * n - 2),
            TopologyKind::Minimal => (1, n),
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "correct" => Ok(TopologyKind::Correct),
            "eesen" => Ok(TopologyKind::Eesen),
            "compact" => Ok(TopologyKind::Compact),
            "minimal" => Ok(TopologyKind::Minimal),
            other => Err(Error::InvalidTopology(format!("unknown topology `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// ε return arcs stay ε.
    #[default]
    Decode,
    /// Compact ε return arcs consume the emulation unit instead.
    Train,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    /// Emission units including `<blank>`.
    pub n_units: usize,
    pub selfless: bool,
    pub mode: Mode,
}

impl TopologySpec {
    pub fn new(kind: TopologyKind, n_units: usize) -> Self {
        TopologySpec {
            kind,
            n_units,
            selfless: false,
            mode: Mode::Decode,
        }
    }

    pub fn selfless(mut self, selfless: bool) -> Self {
        self.selfless = selfless;
        self
    }

    pub fn train(mut self) -> Self {
        self.mode = Mode::Train;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_units == 0 {
            return Err(Error::InvalidTopology(
                "n_units must be at least 1 (the blank unit)".into(),
            ));
        }
        if self.selfless && self.kind == TopologyKind::Minimal {
            return Err(Error::InvalidTopology(
                "minimal has no selfless variant".into(),
            ));
        }
        Ok(())
    }

    /// Whether this graph reads frame-doubled emissions.
    pub fn uses_frame_doubling(&self) -> bool {
        self.mode == Mode::Train && self.kind == TopologyKind::Compact
    }

    /// Number of emission columns the graph reads.
    pub fn emission_units(&self) -> usize {
        if self.uses_frame_doubling() {
            self.n_units + 1
        } else {
            self.n_units
        }
    }

    pub fn label(&self) -> String {
        let mut s = self.kind.name().to_string();
        if self.selfless {
            s.push_str("-selfless");
        }
        if self.uses_frame_doubling() {
            s.push_str("-train");
        }
        s
    }
}

/// A built topology graph together with the spec it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    spec: TopologySpec,
    fst: Wfst,
}

impl Topology {
    pub fn spec(&self) -> &TopologySpec {
        &self.spec
    }

    pub fn fst(&self) -> &Wfst {
        &self.fst
    }

    pub fn into_fst(self) -> Wfst {
        self.fst
    }

    /// Replaces the generic unit names with `units`, which must have the
    /// same size (blank included).
    pub fn with_units(mut self, units: SyncArc<SymbolTable>) -> Result<Topology> {
        if units.len() != self.spec.n_units + 1 {
            return Err(Error::InvalidTopology(format!(
                "unit table has {} entries, expected {}",
                units.len() - 1,
                self.spec.n_units
            )));
        }
        let isyms = if self.spec.uses_frame_doubling() {
            let mut t = (*units).clone().with_name("units+emulation");
            t.push("<eps-emulation>")?;
            SyncArc::new(t)
        } else {
            units.clone()
        };
        self.fst.set_input_symbols(Some(isyms));
        self.fst.set_output_symbols(Some(units));
        Ok(self)
    }
}

impl AsRef<Wfst> for Topology {
    fn as_ref(&self) -> &Wfst {
        &self.fst
    }
}

pub fn build_topology(spec: TopologySpec) -> Result<Topology> {
    spec.validate()?;
    let n = spec.n_units;
    let units = SyncArc::new(SymbolTable::units(n));
    let isyms = if spec.uses_frame_doubling() {
        let mut t = SymbolTable::units(n).with_name("units+emulation");
        t.push("<eps-emulation>")?;
        SyncArc::new(t)
    } else {
        units.clone()
    };

    let fst = match spec.kind {
        TopologyKind::Correct => correct(n),
        TopologyKind::Eesen => eesen(n),
        TopologyKind::Compact => compact(n, spec.mode),
        TopologyKind::Minimal => minimal(n),
    }
    .with_symbols(Some(isyms), Some(units));

    let built = Topology {
        spec: TopologySpec {
            selfless: false,
            ..spec
        },
        fst,
    };
    if spec.selfless {
        make_selfless(&built)
    } else {
        Ok(built)
    }
}

/// Drops every non-blank self-loop that emits ε.
pub fn make_selfless(topo: &Topology) -> Result<Topology> {
    if topo.spec.kind == TopologyKind::Minimal {
        return Err(Error::InvalidTopology(
            "minimal has no selfless variant".into(),
        ));
    }
    let mut fst = topo.fst.clone();
    fst.retain_arcs(|s, arc| !is_unit_self_loop(s, arc));
    Ok(Topology {
        spec: topo.spec.selfless(true),
        fst,
    })
}

fn is_unit_self_loop(s: StateId, arc: &Arc) -> bool {
    arc.nextstate == s && arc.ilabel != EPSILON && arc.ilabel != BLANK && arc.olabel == EPSILON
}

fn unit_labels(n: usize) -> impl Iterator<Item = Label> {
    2..=n as Label
}

/// One state per unit (blank is state 0); arc i→j reads j and emits j
/// unless j is blank or the arc is a self-loop.
fn correct(n: usize) -> Wfst {
    let mut f = Wfst::new();
    f.add_states(n);
    f.set_start(0);
    let state_of = |label: Label| label as StateId - 1;
    for src in 0..n {
        for label in 1..=n as Label {
            let dst = state_of(label);
            let olabel = if label == BLANK || dst == src { EPSILON } else { label };
            f.add_arc(src, Arc::new(label, olabel, Weight::ONE, dst));
        }
        f.set_final(src, Weight::ONE);
    }
    f
}

/// Blank hub (state 0) with one state per unit; units return to the hub
/// on ε (decode) or on the emulation unit (train).
fn compact(n: usize, mode: Mode) -> Wfst {
    let mut f = Wfst::new();
    f.add_states(n);
    f.set_start(0);
    f.set_final(0, Weight::ONE);
    f.add_arc(0, Arc::new(BLANK, EPSILON, Weight::ONE, 0));
    let back = match mode {
        Mode::Decode => EPSILON,
        Mode::Train => emulation_label(n),
    };
    for label in unit_labels(n) {
        let s = label as StateId - 1;
        f.add_arc(0, Arc::new(label, label, Weight::ONE, s));
        f.add_arc(s, Arc::new(label, EPSILON, Weight::ONE, s));
        f.add_arc(s, Arc::new(back, EPSILON, Weight::ONE, 0));
    }
    f
}

/// Two blank states (0: leading blanks, 1: blanks after a unit) joined by
/// ε to a hub (2) that fans out to one state per unit.
fn eesen(n: usize) -> Wfst {
    const LEAD: StateId = 0;
    const TRAIL: StateId = 1;
    const HUB: StateId = 2;
    let mut f = Wfst::new();
    f.add_states(n + 2);
    f.set_start(LEAD);
    f.set_final(LEAD, Weight::ONE);
    f.set_final(TRAIL, Weight::ONE);
    f.add_arc(LEAD, Arc::new(BLANK, EPSILON, Weight::ONE, LEAD));
    f.add_arc(LEAD, Arc::new(EPSILON, EPSILON, Weight::ONE, HUB));
    f.add_arc(TRAIL, Arc::new(BLANK, EPSILON, Weight::ONE, TRAIL));
    f.add_arc(TRAIL, Arc::new(EPSILON, EPSILON, Weight::ONE, HUB));
    for label in unit_labels(n) {
        let s = label as StateId + 1;
        f.add_arc(HUB, Arc::new(label, label, Weight::ONE, s));
        f.add_arc(s, Arc::new(label, EPSILON, Weight::ONE, s));
        f.add_arc(s, Arc::new(EPSILON, EPSILON, Weight::ONE, TRAIL));
    }
    f
}

fn minimal(n: usize) -> Wfst {
    let mut f = Wfst::new();
    f.add_state();
    f.set_start(0);
    f.set_final(0, Weight::ONE);
    f.add_arc(0, Arc::new(BLANK, EPSILON, Weight::ONE, 0));
    for label in unit_labels(n) {
        f.add_arc(0, Arc::new(label, label, Weight::ONE, 0));
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::{check_equivalent, enumerate_transductions, remove_epsilon, Equivalence};

    fn build(kind: TopologyKind, n: usize) -> Topology {
        build_topology(TopologySpec::new(kind, n)).unwrap()
    }

    fn size(t: &Topology) -> (usize, usize) {
        (t.fst().num_states(), t.fst().num_arcs())
    }

    #[test]
    fn documented_sizes_for_three_units() {
        assert_eq!(size(&build(TopologyKind::Correct, 3)), (3, 9));
        assert_eq!(size(&build(TopologyKind::Compact, 3)), (3, 7));
        assert_eq!(size(&build(TopologyKind::Eesen, 3)), (5, 10));
        assert_eq!(size(&build(TopologyKind::Minimal, 3)), (1, 3));
    }

    #[test]
    fn single_unit_correct_is_a_blank_loop() {
        let t = build(TopologyKind::Correct, 1);
        assert_eq!(size(&t), (1, 1));
        assert_eq!(t.fst().arcs(0)[0], Arc::new(BLANK, EPSILON, Weight::ONE, 0));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(build_topology(TopologySpec::new(TopologyKind::Correct, 0)).is_err());
        let err = build_topology(TopologySpec::new(TopologyKind::Minimal, 3).selfless(true))
            .unwrap_err();
        assert_eq!(err.to_string(), "invalid topology: minimal has no selfless variant");
        assert!(make_selfless(&build(TopologyKind::Minimal, 3)).is_err());
    }

    #[test]
    fn selfless_removes_unit_self_loops() {
        assert_eq!(size(&make_selfless(&build(TopologyKind::Correct, 3)).unwrap()), (3, 7));
        assert_eq!(size(&make_selfless(&build(TopologyKind::Compact, 3)).unwrap()), (3, 5));
        let one = build(TopologyKind::Correct, 1);
        assert_eq!(make_selfless(&one).unwrap().fst(), one.fst());
        let s = make_selfless(&build(TopologyKind::Correct, 3)).unwrap();
        assert!(s.spec().selfless);
        // blank self-loop survives
        assert!(s.fst().arcs(0).iter().any(|a| a.nextstate == 0 && a.ilabel == BLANK));
    }

    #[test]
    fn train_mode_only_relabels_compact_returns() {
        let dec = build(TopologyKind::Compact, 3);
        let tr = build_topology(TopologySpec::new(TopologyKind::Compact, 3).train()).unwrap();
        assert_eq!(size(&dec), size(&tr));
        for s in dec.fst().states() {
            assert_eq!(dec.fst().final_weight(s), tr.fst().final_weight(s));
            for (a, b) in dec.fst().arcs(s).iter().zip(tr.fst().arcs(s)) {
                if a.is_epsilon() {
                    assert_eq!(b.ilabel, 4);
                    assert_eq!((a.olabel, a.nextstate), (b.olabel, b.nextstate));
                } else {
                    assert_eq!(a, b);
                }
            }
        }
        // other kinds ignore the mode
        let c = build_topology(TopologySpec::new(TopologyKind::Correct, 3).train()).unwrap();
        assert_eq!(c.fst(), build(TopologyKind::Correct, 3).fst());
    }

    #[test]
    fn minimal_language_for_two_units() {
        // blank = 1, A = 2
        let t = enumerate_transductions(build(TopologyKind::Minimal, 2).fst(), 2).unwrap();
        let got: Vec<(Vec<Label>, Vec<Label>)> = t
            .iter()
            .filter(|x| !x.input.is_empty())
            .map(|x| (x.input.clone(), x.output.clone()))
            .collect();
        let want = vec![
            (vec![1], vec![]),
            (vec![1, 1], vec![]),
            (vec![1, 2], vec![2]),
            (vec![2], vec![2]),
            (vec![2, 1], vec![2]),
            (vec![2, 2], vec![2, 2]),
        ];
        assert_eq!(got, want);
        assert!(t.iter().all(|x| x.weight == Weight::ONE));
    }

    #[test]
    fn correct_collapses_repeats() {
        let t = enumerate_transductions(build(TopologyKind::Correct, 2).fst(), 2).unwrap();
        let aa: Vec<_> = t.iter().filter(|x| x.input == vec![2, 2]).collect();
        assert_eq!(aa.len(), 1);
        assert_eq!(aa[0].output, vec![2]);
    }

    #[test]
    fn correct_vs_minimal_counterexample() {
        let r = check_equivalent(
            build(TopologyKind::Correct, 2).fst(),
            build(TopologyKind::Minimal, 2).fst(),
            2,
        )
        .unwrap();
        match r {
            Equivalence::Counterexample { input, output, .. } => {
                assert_eq!(input, vec![2, 2]);
                assert_eq!(output, vec![2]);
            }
            Equivalence::Equivalent => panic!("correct and minimal differ on A A"),
        }
    }

    #[test]
    fn compact_matches_eesen() {
        for n in 2..=3 {
            let r = check_equivalent(
                build(TopologyKind::Compact, n).fst(),
                build(TopologyKind::Eesen, n).fst(),
                4,
            )
            .unwrap();
            assert_eq!(r, Equivalence::Equivalent, "N={n}");
        }
    }

    #[test]
    fn selfless_compact_without_epsilons_is_minimal() {
        let sc = build_topology(TopologySpec::new(TopologyKind::Compact, 3).selfless(true)).unwrap();
        let flat = remove_epsilon(sc.fst()).unwrap();
        assert!(!flat.has_epsilons());
        let r = check_equivalent(&flat, build(TopologyKind::Minimal, 3).fst(), 4).unwrap();
        assert_eq!(r, Equivalence::Equivalent);
    }

    #[test]
    fn kind_parsing() {
        for k in TopologyKind::ALL {
            assert_eq!(k.name().parse::<TopologyKind>().unwrap(), k);
        }
        assert!("bogus".parse::<TopologyKind>().is_err());
    }
}
