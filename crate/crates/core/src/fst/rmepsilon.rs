use std::collections::{BTreeMap, HashMap};

use super::topsort::find_cycle_by;
use super::{connect, Arc, Label, StateId, Wfst};
use crate::error::{Error, Result};
use crate::semiring::{LogSemiring, Semiring, Weight};

/// Removes arcs that are ε on both tapes while preserving the weighted
/// transduction.
///
/// Each state receives copies of the non-ε arcs of every state in its
/// ε-closure, weighted by the ⊕-sum of the ε paths leading there; arcs that
/// end up with identical labels and destination are merged by log-add.
/// ε-free input is returned unchanged.
pub fn remove_epsilon(fst: &Wfst) -> Result<Wfst> {
    if !fst.has_epsilons() {
        return Ok(fst.clone());
    }
    if let Some(state) = epsilon_cycle(fst) {
        return Err(Error::EpsilonCycle { state });
    }

    let n = fst.num_states();
    let order = epsilon_postorder(fst);
    // closure[q]: state -> ⊕ of ε-path weights from q (q itself with one)
    let mut closure: Vec<BTreeMap<StateId, Weight>> = vec![BTreeMap::new(); n];
    for &q in &order {
        let mut acc = BTreeMap::new();
        acc.insert(q, Weight::ONE);
        for arc in fst.arcs(q) {
            if !arc.is_epsilon() || arc.weight.is_zero() {
                continue;
            }
            for (&p, &d) in &closure[arc.nextstate] {
                let e = acc.entry(p).or_insert(Weight::ZERO);
                *e = LogSemiring::plus(*e, arc.weight.times(d));
            }
        }
        closure[q] = acc;
    }

    let mut out = Wfst::new();
    out.copy_symbols_from(fst);
    out.add_states(n);
    if let Some(start) = fst.start() {
        out.set_start(start);
    }
    for (q, reach) in closure.iter().enumerate() {
        let mut final_weight = Weight::ZERO;
        let mut merged: Vec<Arc> = Vec::new();
        let mut slot: HashMap<(Label, Label, StateId), usize> = HashMap::new();
        for (&p, &d) in reach {
            final_weight = LogSemiring::plus(final_weight, d.times(fst.final_weight(p)));
            for arc in fst.arcs(p) {
                if arc.is_epsilon() {
                    continue;
                }
                let w = d.times(arc.weight);
                match slot.get(&(arc.ilabel, arc.olabel, arc.nextstate)) {
                    Some(&i) => merged[i].weight = LogSemiring::plus(merged[i].weight, w),
                    None => {
                        slot.insert((arc.ilabel, arc.olabel, arc.nextstate), merged.len());
                        merged.push(Arc { weight: w, ..*arc });
                    }
                }
            }
        }
        out.set_final(q, final_weight);
        for arc in merged {
            out.add_arc(q, arc);
        }
    }
    Ok(connect(&out))
}

/// A state on a cycle of non-zero-weight ε arcs, if any.
pub fn epsilon_cycle(fst: &Wfst) -> Option<StateId> {
    find_cycle_by(fst, |a| a.is_epsilon() && !a.weight.is_zero()).map(|c| c[0])
}

/// States ordered so that ε successors come before their predecessors.
fn epsilon_postorder(fst: &Wfst) -> Vec<StateId> {
    let n = fst.num_states();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in fst.states() {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (s, i) = *top;
            let arcs = fst.arcs(s);
            if i < arcs.len() {
                top.1 += 1;
                let arc = arcs[i];
                if arc.is_epsilon() && !seen[arc.nextstate] {
                    seen[arc.nextstate] = true;
                    stack.push((arc.nextstate, 0));
                }
            } else {
                order.push(s);
                stack.pop();
            }
        }
    }
    order
}
