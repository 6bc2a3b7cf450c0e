use std::collections::BinaryHeap;
use std::cmp::Reverse;

use super::emissions::DenseEmissions;
use crate::error::{Error, Result};
use crate::fst::{connect, Arc, Label, StateId, Wfst, EPSILON};
use crate::semiring::{LogSemiring, Semiring, TropicalSemiring, Weight};

/// Result of intersecting a graph with a dense emission matrix. States are
/// `(frame, graph state)` pairs numbered frame-major in topological order.
#[derive(Debug, Clone)]
pub struct Lattice {
    fst: Wfst,
    frame_of: Vec<usize>,
    frames: usize,
    units: usize,
}

/// Tropical best path through a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct BestPath {
    pub score: Weight,
    /// Emission label per frame (length `frames`).
    pub frame_labels: Vec<Label>,
    /// Non-ε output labels along the path.
    pub olabels: Vec<Label>,
}

/// Rank of each state in a topological order of the input-ε subgraph.
pub(crate) fn epsilon_order(graph: &Wfst) -> Result<Vec<usize>> {
    let n = graph.num_states();
    let mut indegree = vec![0usize; n];
    for s in graph.states() {
        for a in graph.arcs(s) {
            if a.ilabel == EPSILON {
                indegree[a.nextstate] += 1;
            }
        }
    }
    let mut ready: Vec<StateId> = (0..n).filter(|&s| indegree[s] == 0).rev().collect();
    let mut rank = vec![usize::MAX; n];
    let mut next = 0;
    while let Some(s) = ready.pop() {
        rank[s] = next;
        next += 1;
        for a in graph.arcs(s) {
            if a.ilabel == EPSILON {
                indegree[a.nextstate] -= 1;
                if indegree[a.nextstate] == 0 {
                    ready.push(a.nextstate);
                }
            }
        }
    }
    if let Some(state) = rank.iter().position(|&r| r == usize::MAX) {
        return Err(Error::EpsilonCycle { state });
    }
    Ok(rank)
}

pub(crate) fn check_labels(graph: &Wfst, units: usize) -> Result<()> {
    for s in graph.states() {
        for a in graph.arcs(s) {
            if a.ilabel as usize > units {
                return Err(Error::LabelOutOfRange {
                    label: a.ilabel,
                    units,
                });
            }
        }
    }
    Ok(())
}

pub(crate) fn check_beam(beam: Option<f64>) -> Result<f64> {
    match beam {
        None => Ok(f64::INFINITY),
        Some(b) if b > 0.0 => Ok(b),
        Some(b) => Err(Error::InvalidBeam(b)),
    }
}

/// Per-frame sparse score table over graph states.
struct Frontier {
    score: Vec<f64>,
    members: Vec<StateId>,
}

impl Frontier {
    fn new(n: usize) -> Self {
        Frontier {
            score: vec![f64::NEG_INFINITY; n],
            members: Vec::new(),
        }
    }

    fn relax(&mut self, s: StateId, v: f64) -> bool {
        if self.score[s] == f64::NEG_INFINITY {
            self.members.push(s);
            self.score[s] = v;
            true
        } else {
            if v > self.score[s] {
                self.score[s] = v;
            }
            false
        }
    }

    fn clear(&mut self) {
        for &s in &self.members {
            self.score[s] = f64::NEG_INFINITY;
        }
        self.members.clear();
    }
}

/// Intersects `graph` with `em`. Emission arcs labelled `l` at frame `t`
/// are scored with `em[t][l - 1]`; input-ε arcs stay within a frame. With
/// a beam, states whose best partial score is more than `beam` below the
/// frame best are dropped before the next frame is expanded.
pub fn dense_intersect(graph: &Wfst, em: &DenseEmissions, prune_beam: Option<f64>) -> Result<Lattice> {
    let beam = check_beam(prune_beam)?;
    check_labels(graph, em.units())?;
    let frames = em.frames();
    let empty = || Lattice {
        fst: Wfst::new(),
        frame_of: Vec::new(),
        frames,
        units: em.units(),
    };
    let Some(start) = graph.start() else {
        return Ok(empty());
    };
    let rank = epsilon_order(graph)?;

    // Forward pass: surviving graph states per frame, sorted by ε-rank.
    let mut kept: Vec<Vec<StateId>> = Vec::with_capacity(frames + 1);
    let mut cur = Frontier::new(graph.num_states());
    let mut nxt = Frontier::new(graph.num_states());
    cur.relax(start, 0.0);
    for t in 0..=frames {
        let mut heap: BinaryHeap<Reverse<(usize, StateId)>> =
            cur.members.iter().map(|&s| Reverse((rank[s], s))).collect();
        let mut order = Vec::with_capacity(cur.members.len());
        while let Some(Reverse((_, s))) = heap.pop() {
            order.push(s);
            let base = cur.score[s];
            for a in graph.arcs(s) {
                if a.ilabel == EPSILON && !a.weight.is_zero() && cur.relax(a.nextstate, base + a.weight.value()) {
                    heap.push(Reverse((rank[a.nextstate], a.nextstate)));
                }
            }
        }
        let best = order.iter().map(|&s| cur.score[s]).fold(f64::NEG_INFINITY, f64::max);
        let floor = best - beam;
        order.retain(|&s| cur.score[s] >= floor);
        if t < frames {
            let row = em.row(t);
            for &s in &order {
                let base = cur.score[s];
                for a in graph.arcs(s) {
                    if a.ilabel == EPSILON || a.weight.is_zero() {
                        continue;
                    }
                    let e = row[a.ilabel as usize - 1];
                    if e == f64::NEG_INFINITY {
                        continue;
                    }
                    nxt.relax(a.nextstate, base + a.weight.value() + e);
                }
            }
        }
        kept.push(order);
        cur.clear();
        std::mem::swap(&mut cur, &mut nxt);
        if cur.members.is_empty() && t < frames {
            return Ok(empty());
        }
    }

    // Second pass: materialize the lattice over the surviving states.
    let mut id_of: Vec<Vec<(StateId, StateId)>> = Vec::with_capacity(frames + 1);
    let mut lat = Wfst::new();
    let mut frame_of = Vec::new();
    for (t, states) in kept.iter().enumerate() {
        let mut ids: Vec<(StateId, StateId)> = states
            .iter()
            .map(|&q| {
                frame_of.push(t);
                (q, lat.add_state())
            })
            .collect();
        ids.sort_unstable();
        id_of.push(ids);
    }
    let lookup = |t: usize, q: StateId| -> Option<StateId> {
        let ids = &id_of[t];
        ids.binary_search_by_key(&q, |&(g, _)| g).ok().map(|i| ids[i].1)
    };
    lat.set_start(lookup(0, start).expect("start survives frame 0"));
    for (t, states) in kept.iter().enumerate() {
        for &q in states {
            let src = lookup(t, q).unwrap();
            for a in graph.arcs(q) {
                if a.weight.is_zero() {
                    continue;
                }
                if a.ilabel == EPSILON {
                    if let Some(dst) = lookup(t, a.nextstate) {
                        lat.add_arc(src, Arc::new(EPSILON, a.olabel, a.weight, dst));
                    }
                } else if t < frames {
                    let e = em.get(t, a.ilabel as usize - 1);
                    if e == f64::NEG_INFINITY {
                        continue;
                    }
                    if let Some(dst) = lookup(t + 1, a.nextstate) {
                        lat.add_arc(src, Arc::new(a.ilabel, a.olabel, a.weight.times(Weight(e)), dst));
                    }
                }
            }
            if t == frames && graph.is_final(q) {
                lat.set_final(src, graph.final_weight(q));
            }
        }
    }
    lat.copy_symbols_from(graph);
    Ok(Lattice::trimmed(lat, frame_of, frames, em.units()))
}

impl Lattice {
    fn trimmed(fst: Wfst, frame_of: Vec<usize>, frames: usize, units: usize) -> Self {
        // connect keeps the relative order of surviving states; recover
        // their frames by replaying the same filter.
        let keep = surviving_states(&fst);
        let frame_of = keep.iter().map(|&s| frame_of[s]).collect();
        Lattice {
            fst: connect(&fst),
            frame_of,
            frames,
            units,
        }
    }

    pub fn fst(&self) -> &Wfst {
        &self.fst
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn units(&self) -> usize {
        self.units
    }

    pub fn frame_of(&self, s: StateId) -> usize {
        self.frame_of[s]
    }

    pub fn is_empty(&self) -> bool {
        self.fst.start().is_none()
    }

    pub fn num_states(&self) -> usize {
        self.fst.num_states()
    }

    pub fn num_arcs(&self) -> usize {
        self.fst.num_arcs()
    }

    /// Forward values `α` in semiring `S`, indexed by state.
    pub fn forward<S: Semiring>(&self) -> Vec<Weight> {
        let n = self.fst.num_states();
        let mut alpha = vec![Weight::ZERO; n];
        let Some(start) = self.fst.start() else {
            return alpha;
        };
        alpha[start] = Weight::ONE;
        for s in 0..n {
            if alpha[s].is_zero() {
                continue;
            }
            for a in self.fst.arcs(s) {
                alpha[a.nextstate] = S::plus(alpha[a.nextstate], S::times(alpha[s], a.weight));
            }
        }
        alpha
    }

    /// Backward values `β` in semiring `S`, indexed by state.
    pub fn backward<S: Semiring>(&self) -> Vec<Weight> {
        let n = self.fst.num_states();
        let mut beta = vec![Weight::ZERO; n];
        for s in (0..n).rev() {
            let mut b = self.fst.final_weight(s);
            for a in self.fst.arcs(s) {
                b = S::plus(b, S::times(a.weight, beta[a.nextstate]));
            }
            beta[s] = b;
        }
        beta
    }

    fn total<S: Semiring>(&self, alpha: &[Weight]) -> Weight {
        S::sum((0..alpha.len()).map(|s| S::times(alpha[s], self.fst.final_weight(s))))
    }

    /// Log-semiring sum over all complete paths; zero when empty.
    pub fn forward_score(&self) -> Weight {
        self.total::<LogSemiring>(&self.forward::<LogSemiring>())
    }

    /// Tropical best-path weight; zero when empty.
    pub fn best_score(&self) -> Weight {
        self.total::<TropicalSemiring>(&self.forward::<TropicalSemiring>())
    }

    /// Posterior occupancy of each `(frame, unit)` cell: the probability
    /// mass of paths reading column `unit` at frame `t`. Rows sum to one
    /// on a non-empty lattice.
    pub fn occupancy(&self) -> DenseEmissions {
        let mut occ = DenseEmissions::zeros(self.frames, self.units);
        if self.is_empty() {
            return occ;
        }
        let alpha = self.forward::<LogSemiring>();
        let beta = self.backward::<LogSemiring>();
        let z = self.total::<LogSemiring>(&alpha).value();
        for s in self.fst.states() {
            if alpha[s].is_zero() {
                continue;
            }
            for a in self.fst.arcs(s) {
                if a.ilabel == EPSILON {
                    continue;
                }
                let lp = alpha[s].value() + a.weight.value() + beta[a.nextstate].value() - z;
                if lp == f64::NEG_INFINITY {
                    continue;
                }
                let (t, u) = (self.frame_of[s], a.ilabel as usize - 1);
                occ.set(t, u, occ.get(t, u) + lp.exp());
            }
        }
        occ
    }

    /// Tropical best path with ties broken towards the smaller predecessor
    /// state.
    pub fn best_path(&self) -> Option<BestPath> {
        let start = self.fst.start()?;
        let n = self.fst.num_states();
        let mut score = vec![f64::NEG_INFINITY; n];
        let mut back: Vec<Option<(StateId, usize)>> = vec![None; n];
        score[start] = 0.0;
        for s in 0..n {
            if score[s] == f64::NEG_INFINITY {
                continue;
            }
            for (i, a) in self.fst.arcs(s).iter().enumerate() {
                let v = score[s] + a.weight.value();
                if v > score[a.nextstate] {
                    score[a.nextstate] = v;
                    back[a.nextstate] = Some((s, i));
                }
            }
        }
        let mut best: Option<(f64, StateId)> = None;
        for (s, &sc) in score.iter().enumerate().take(n) {
            if !self.fst.is_final(s) || sc == f64::NEG_INFINITY {
                continue;
            }
            let v = sc + self.fst.final_weight(s).value();
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, s));
            }
        }
        let (total, mut s) = best?;
        let mut arcs = Vec::new();
        while let Some((p, i)) = back[s] {
            arcs.push(self.fst.arcs(p)[i]);
            s = p;
        }
        arcs.reverse();
        Some(BestPath {
            score: Weight(total),
            frame_labels: arcs.iter().filter(|a| a.ilabel != EPSILON).map(|a| a.ilabel).collect(),
            olabels: arcs.iter().filter(|a| a.olabel != EPSILON).map(|a| a.olabel).collect(),
        })
    }
}

/// States `connect` keeps, in order.
fn surviving_states(fst: &Wfst) -> Vec<StateId> {
    let n = fst.num_states();
    let Some(start) = fst.start() else {
        return Vec::new();
    };
    let mut fwd = vec![false; n];
    let mut stack = vec![start];
    fwd[start] = true;
    while let Some(s) = stack.pop() {
        for a in fst.arcs(s) {
            if !fwd[a.nextstate] {
                fwd[a.nextstate] = true;
                stack.push(a.nextstate);
            }
        }
    }
    // States are topologically ordered, so one reverse sweep suffices.
    let mut bwd = vec![false; n];
    for s in (0..n).rev() {
        bwd[s] = fst.is_final(s) || fst.arcs(s).iter().any(|a| bwd[a.nextstate]);
    }
    if !bwd[start] {
        return Vec::new();
    }
    (0..n).filter(|&s| fwd[s] && bwd[s]).collect()
}
