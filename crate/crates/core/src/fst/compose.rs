use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use super::{connect, Arc, Label, StateId, Wfst, EPSILON};
use crate::error::{Error, Result};

/// Composition filter state.
///
/// `Free` allows every move. `AfterLeft` follows a move where only the
/// left operand advanced on an ε output; the right operand may not then
/// advance alone on an ε input (that pairing is the joint move from
/// `Free`). `AfterRight` is the mirror image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Filter {
    Free,
    AfterLeft,
    AfterRight,
}

/// Composes `a` with `b`: the result maps `x` to `z` with weight
/// `⊕_y a(x→y) ⊗ b(y→z)`. The output is trimmed.
///
/// ε-output arcs of `a` and ε-input arcs of `b` are paired through a
/// three-state filter so that each combined path is generated once.
pub fn compose(a: &Wfst, b: &Wfst) -> Result<Wfst> {
    if let (Some(left), Some(right)) = (a.output_symbols(), b.input_symbols()) {
        if !left.same_symbols(right) {
            return Err(Error::SymbolTableMismatch {
                left: left.name().to_string(),
                right: right.name().to_string(),
            });
        }
    }

    let mut out = Wfst::new();
    out.set_input_symbols(a.input_symbols_shared());
    out.set_output_symbols(b.output_symbols_shared());
    let (Some(a_start), Some(b_start)) = (a.start(), b.start()) else {
        return Ok(out);
    };

    // Right-operand arcs grouped by input label for matching.
    let b_sorted: Vec<Vec<Arc>> = b
        .states()
        .map(|s| {
            let mut arcs = b.arcs(s).to_vec();
            arcs.sort_by_key(|arc| arc.ilabel);
            arcs
        })
        .collect();
    let a_eps_out: Vec<bool> = a
        .states()
        .map(|s| a.arcs(s).iter().any(|arc| arc.olabel == EPSILON))
        .collect();
    let b_eps_in: Vec<bool> = b_sorted
        .iter()
        .map(|arcs| arcs.first().is_some_and(|arc| arc.ilabel == EPSILON))
        .collect();

    // The filter state only matters when the corresponding ε moves exist.
    let canonical = |qa: StateId, qb: StateId, f: Filter| -> Filter {
        match f {
            Filter::AfterLeft if !b_eps_in[qb] => Filter::Free,
            Filter::AfterRight if !a_eps_out[qa] => Filter::Free,
            _ => f,
        }
    };

    let mut states = StateMap::default();
    let start = states.lookup(&mut out, (a_start, b_start, Filter::Free));
    out.set_start(start);

    while let Some(((qa, qb, f), src)) = states.queue.pop_front() {
        out.set_final(src, a.final_weight(qa).times(b.final_weight(qb)));

        for arc_a in a.arcs(qa) {
            if arc_a.olabel != EPSILON {
                for arc_b in matching(&b_sorted[qb], arc_a.olabel) {
                    let next = (arc_a.nextstate, arc_b.nextstate, Filter::Free);
                    let dst = states.lookup(&mut out, next);
                    out.add_arc(
                        src,
                        Arc::new(arc_a.ilabel, arc_b.olabel, arc_a.weight.times(arc_b.weight), dst),
                    );
                }
                continue;
            }
            // Left advances alone on its ε output.
            if f != Filter::AfterRight {
                let next = (arc_a.nextstate, qb, canonical(arc_a.nextstate, qb, Filter::AfterLeft));
                let dst = states.lookup(&mut out, next);
                out.add_arc(src, Arc::new(arc_a.ilabel, EPSILON, arc_a.weight, dst));
            }
            // Both advance on ε.
            if f == Filter::Free {
                for arc_b in matching(&b_sorted[qb], EPSILON) {
                    let next = (arc_a.nextstate, arc_b.nextstate, Filter::Free);
                    let dst = states.lookup(&mut out, next);
                    out.add_arc(
                        src,
                        Arc::new(arc_a.ilabel, arc_b.olabel, arc_a.weight.times(arc_b.weight), dst),
                    );
                }
            }
        }
        // Right advances alone on its ε input.
        if f != Filter::AfterLeft {
            for arc_b in matching(&b_sorted[qb], EPSILON) {
                let next = (qa, arc_b.nextstate, canonical(qa, arc_b.nextstate, Filter::AfterRight));
                let dst = states.lookup(&mut out, next);
                out.add_arc(src, Arc::new(EPSILON, arc_b.olabel, arc_b.weight, dst));
            }
        }
    }

    Ok(connect(&out))
}

type Key = (StateId, StateId, Filter);

#[derive(Default)]
struct StateMap {
    index: HashMap<Key, StateId>,
    queue: VecDeque<(Key, StateId)>,
}

impl StateMap {
    fn lookup(&mut self, out: &mut Wfst, key: Key) -> StateId {
        match self.index.entry(key) {
            Entry::Occupied(e) => *e.get(),
            Entry::Vacant(e) => {
                let id = out.add_state();
                e.insert(id);
                self.queue.push_back((key, id));
                id
            }
        }
    }
}

fn matching(arcs: &[Arc], label: Label) -> &[Arc] {
    let lo = arcs.partition_point(|a| a.ilabel < label);
    let hi = arcs.partition_point(|a| a.ilabel <= label);
    &arcs[lo..hi]
}
