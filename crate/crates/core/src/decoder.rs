//! Greedy and Viterbi decoding.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::fst::{Label, StateId, Wfst, EPSILON};
use crate::lattice::DenseEmissions;
use crate::semiring::Weight;
use crate::symbols::SymbolTable;
use crate::topology::BLANK;

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    /// Non-ε output labels along the path.
    pub words: Vec<Label>,
    /// Tropical path score.
    pub score: Weight,
    /// Emission label chosen at each frame.
    pub frame_labels: Vec<Label>,
}

impl Hypothesis {
    pub fn render(&self, table: Option<&SymbolTable>) -> String {
        match table {
            Some(t) => t.render(&self.words),
            None => self.words.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" "),
        }
    }

    /// `utt<TAB>score<TAB>words`.
    pub fn to_line(&self, utt: &str, table: Option<&SymbolTable>) -> String {
        format!("{utt}\t{:.6}\t{}", self.score.value(), self.render(table))
    }
}

/// Merges runs of equal labels, then drops `<blank>`.
pub fn collapse(labels: &[Label]) -> Vec<Label> {
    let mut out = Vec::new();
    let mut prev = None;
    for &l in labels {
        if prev != Some(l) && l != BLANK {
            out.push(l);
        }
        prev = Some(l);
    }
    out
}

/// Per-frame argmax (ties to the lowest id) followed by [`collapse`].
pub fn greedy_decode(em: &DenseEmissions) -> Hypothesis {
    let mut frame_labels = Vec::with_capacity(em.frames());
    let mut score = 0.0;
    for row in em.rows() {
        let (best, v) = row
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        frame_labels.push(best as Label + 1);
        score += v;
    }
    Hypothesis {
        words: collapse(&frame_labels),
        score: Weight(score),
        frame_labels,
    }
}

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Token {
    score: f64,
    prev: usize,
    pred_state: StateId,
    ilabel: Label,
    olabel: Label,
}

struct Frontier {
    token_of: Vec<usize>,
    members: Vec<StateId>,
}

impl Frontier {
    fn new(n: usize) -> Self {
        Frontier {
            token_of: vec![NONE; n],
            members: Vec::new(),
        }
    }

    fn clear(&mut self) {
        for &s in &self.members {
            self.token_of[s] = NONE;
        }
        self.members.clear();
    }
}

struct Search<'a> {
    graph: &'a Wfst,
    arena: Vec<Token>,
}

impl Search<'_> {
    /// Offers a token for `dst`; returns whether `dst`'s score improved.
    fn offer(&mut self, frontier: &mut Frontier, dst: StateId, cand: Token, frame_start: usize) -> bool {
        let cur = frontier.token_of[dst];
        if cur == NONE {
            frontier.token_of[dst] = self.arena.len();
            frontier.members.push(dst);
            self.arena.push(cand);
            return true;
        }
        let old = self.arena[cur];
        if cand.score > old.score {
            self.arena[cur] = cand;
            return true;
        }
        if cand.score == old.score && cand.pred_state < old.pred_state && !self.descends_from(cand.prev, cur, frame_start) {
            self.arena[cur] = cand;
        }
        false
    }

    /// Whether `tok` reaches `ancestor` by backpointers within the frame.
    fn descends_from(&self, mut tok: usize, ancestor: usize, frame_start: usize) -> bool {
        while tok != NONE && tok >= frame_start {
            if tok == ancestor {
                return true;
            }
            tok = self.arena[tok].prev;
        }
        false
    }

    /// Breadth-first ε-closure with relaxation on improvement.
    fn close(&mut self, frontier: &mut Frontier, frame: usize, frame_start: usize) -> Result<()> {
        let n = self.graph.num_states();
        let mut pushes = vec![0usize; 0];
        let mut queue: VecDeque<StateId> = frontier.members.clone().into();
        while let Some(s) = queue.pop_front() {
            let tok = frontier.token_of[s];
            let base = self.arena[tok].score;
            for a in self.graph.arcs(s) {
                if a.ilabel != EPSILON || a.weight.is_zero() {
                    continue;
                }
                let cand = Token {
                    score: base + a.weight.value(),
                    prev: tok,
                    pred_state: s,
                    ilabel: EPSILON,
                    olabel: a.olabel,
                };
                if self.offer(frontier, a.nextstate, cand, frame_start) {
                    if pushes.is_empty() {
                        pushes = vec![0; n];
                    }
                    pushes[a.nextstate] += 1;
                    if pushes[a.nextstate] > n {
                        return Err(Error::ClosureDiverged { frame });
                    }
                    queue.push_back(a.nextstate);
                }
            }
        }
        Ok(())
    }

    fn prune(&self, frontier: &mut Frontier, beam: f64) {
        let best = frontier
            .members
            .iter()
            .map(|&s| self.arena[frontier.token_of[s]].score)
            .fold(f64::NEG_INFINITY, f64::max);
        let floor = best - beam;
        let token_of = &mut frontier.token_of;
        let arena = &self.arena;
        frontier.members.retain(|&s| {
            let keep = arena[token_of[s]].score >= floor;
            if !keep {
                token_of[s] = NONE;
            }
            keep
        });
        frontier.members.sort_unstable();
    }
}

/// Tropical best path through the dense intersection of `graph` and `em`,
/// pruned per frame to `beam` below the frame best. `beam = +inf` is exact.
pub fn viterbi_decode(graph: &Wfst, em: &DenseEmissions, beam: f64) -> Result<Hypothesis> {
    let beam = crate::lattice::check_beam(Some(beam))?;
    crate::lattice::check_labels(graph, em.units())?;
    let frames = em.frames();
    let start = graph.start().ok_or(Error::EmptyBeam { frame: 0 })?;
    let n = graph.num_states();
    let mut search = Search {
        graph,
        arena: Vec::new(),
    };
    let mut cur = Frontier::new(n);
    let mut nxt = Frontier::new(n);
    search.offer(
        &mut cur,
        start,
        Token {
            score: 0.0,
            prev: NONE,
            pred_state: NONE,
            ilabel: EPSILON,
            olabel: EPSILON,
        },
        0,
    );
    search.close(&mut cur, 0, 0)?;
    search.prune(&mut cur, beam);

    for t in 0..frames {
        let row = em.row(t);
        let frame_start = search.arena.len();
        for &s in &cur.members {
            let tok = cur.token_of[s];
            let base = search.arena[tok].score;
            for a in graph.arcs(s) {
                if a.ilabel == EPSILON || a.weight.is_zero() {
                    continue;
                }
                let e = row[a.ilabel as usize - 1];
                if e == f64::NEG_INFINITY {
                    continue;
                }
                let cand = Token {
                    score: base + a.weight.value() + e,
                    prev: tok,
                    pred_state: s,
                    ilabel: a.ilabel,
                    olabel: a.olabel,
                };
                search.offer(&mut nxt, a.nextstate, cand, frame_start);
            }
        }
        if nxt.members.is_empty() {
            return Err(Error::EmptyBeam { frame: t });
        }
        search.close(&mut nxt, t + 1, frame_start)?;
        search.prune(&mut nxt, beam);
        cur.clear();
        std::mem::swap(&mut cur, &mut nxt);
    }

    let mut best: Option<(f64, usize)> = None;
    for &s in &cur.members {
        if !graph.is_final(s) {
            continue;
        }
        let tok = cur.token_of[s];
        let v = search.arena[tok].score + graph.final_weight(s).value();
        if best.is_none_or(|(b, _)| v > b) {
            best = Some((v, tok));
        }
    }
    let (score, mut tok) = best.ok_or(Error::NoFinalState { frames })?;

    let mut frame_labels = Vec::with_capacity(frames);
    let mut words = Vec::new();
    while tok != NONE {
        let k = search.arena[tok];
        if k.ilabel != EPSILON {
            frame_labels.push(k.ilabel);
        }
        if k.olabel != EPSILON {
            words.push(k.olabel);
        }
        tok = k.prev;
    }
    frame_labels.reverse();
    words.reverse();
    Ok(Hypothesis {
        words,
        score: Weight(score),
        frame_labels,
    })
}
