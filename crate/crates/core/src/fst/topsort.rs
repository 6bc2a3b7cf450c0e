use super::{Arc, StateId, Wfst};
use crate::error::{Error, Result};

/// Renumbers states so that every arc goes from a lower to a higher id.
///
/// Fails on any cycle, self-loops included, with a witness cycle.
pub fn topological_sort(fst: &Wfst) -> Result<Wfst> {
    let n = fst.num_states();
    let mut indegree = vec![0usize; n];
    for s in fst.states() {
        for arc in fst.arcs(s) {
            indegree[arc.nextstate] += 1;
        }
    }
    // Kahn's algorithm; ready states are taken lowest id first so the
    // order is stable for graphs that are already sorted.
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<StateId>> = fst
        .states()
        .filter(|&s| indegree[s] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(s)) = ready.pop() {
        order.push(s);
        for arc in fst.arcs(s) {
            indegree[arc.nextstate] -= 1;
            if indegree[arc.nextstate] == 0 {
                ready.push(std::cmp::Reverse(arc.nextstate));
            }
        }
    }
    if order.len() < n {
        let cycle = find_cycle(fst).expect("Kahn left states unsorted, so a cycle exists");
        return Err(Error::Cyclic { cycle });
    }

    let mut rank = vec![0; n];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let mut out = Wfst::new();
    out.copy_symbols_from(fst);
    out.add_states(n);
    for &old in &order {
        let s = rank[old];
        out.set_final(s, fst.final_weight(old));
        for arc in fst.arcs(old) {
            out.add_arc(s, Arc { nextstate: rank[arc.nextstate], ..*arc });
        }
    }
    if let Some(start) = fst.start() {
        out.set_start(rank[start]);
    }
    Ok(out)
}

pub fn is_topologically_sorted(fst: &Wfst) -> bool {
    fst.states()
        .all(|s| fst.arcs(s).iter().all(|arc| arc.nextstate > s))
}

/// Returns some cycle as a state sequence whose last state has an arc back
/// to the first, or `None` for an acyclic graph.
pub fn find_cycle(fst: &Wfst) -> Option<Vec<StateId>> {
    find_cycle_by(fst, |_| true)
}

/// As [`find_cycle`] but only following arcs accepted by `follow`.
pub(crate) fn find_cycle_by(fst: &Wfst, follow: impl Fn(&Arc) -> bool) -> Option<Vec<StateId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let n = fst.num_states();
    let mut mark = vec![Mark::New; n];
    for root in fst.states() {
        if mark[root] != Mark::New {
            continue;
        }
        // (state, next arc index)
        let mut stack: Vec<(StateId, usize)> = vec![(root, 0)];
        mark[root] = Mark::Open;
        while let Some(top) = stack.last_mut() {
            let (s, i) = *top;
            let arcs = fst.arcs(s);
            if i < arcs.len() {
                top.1 += 1;
                let arc = arcs[i];
                if !follow(&arc) {
                    continue;
                }
                match mark[arc.nextstate] {
                    Mark::New => {
                        mark[arc.nextstate] = Mark::Open;
                        stack.push((arc.nextstate, 0));
                    }
                    Mark::Open => {
                        let pos = stack
                            .iter()
                            .position(|&(q, _)| q == arc.nextstate)
                            .expect("open state is on the stack");
                        return Some(stack[pos..].iter().map(|&(q, _)| q).collect());
                    }
                    Mark::Done => {}
                }
            } else {
                mark[s] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::Weight;

    #[test]
    fn sorts_reversed_chain() {
        let mut f = Wfst::new();
        f.add_states(3);
        f.set_start(2);
        f.add_arc(2, Arc::new(1, 1, Weight::ONE, 1));
        f.add_arc(1, Arc::new(2, 2, Weight::ONE, 0));
        f.set_final(0, Weight(-1.0));
        assert!(!is_topologically_sorted(&f));
        let s = topological_sort(&f).unwrap();
        assert!(is_topologically_sorted(&s));
        assert_eq!(s.start(), Some(0));
        assert_eq!(s.final_weight(2), Weight(-1.0));
    }

    #[test]
    fn single_state_unchanged() {
        let mut f = Wfst::new();
        f.add_state();
        f.set_start(0);
        f.set_final(0, Weight::ONE);
        assert_eq!(topological_sort(&f).unwrap(), f);
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let mut f = Wfst::new();
        f.add_states(2);
        f.set_start(0);
        f.add_arc(0, Arc::new(1, 1, Weight::ONE, 1));
        f.add_arc(1, Arc::new(1, 0, Weight::ONE, 1));
        match topological_sort(&f) {
            Err(Error::Cyclic { cycle }) => assert_eq!(cycle, vec![1]),
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn witness_is_a_real_cycle() {
        let mut f = Wfst::new();
        f.add_states(4);
        f.set_start(0);
        f.add_arc(0, Arc::new(1, 1, Weight::ONE, 1));
        f.add_arc(1, Arc::new(1, 1, Weight::ONE, 2));
        f.add_arc(2, Arc::new(1, 1, Weight::ONE, 3));
        f.add_arc(3, Arc::new(1, 1, Weight::ONE, 1));
        let cycle = find_cycle(&f).unwrap();
        for (i, &s) in cycle.iter().enumerate() {
            let t = cycle[(i + 1) % cycle.len()];
            assert!(f.arcs(s).iter().any(|a| a.nextstate == t));
        }
        assert!(find_cycle_by(&f, |a| a.nextstate != 1).is_none());
    }
}
