use super::{Arc, StateId, Wfst};

/// Removes every state that is not on some start-to-final path.
///
/// Surviving states keep their relative order. If the start state itself
/// cannot reach a final state the result is the empty graph.
pub fn connect(fst: &Wfst) -> Wfst {
    let n = fst.num_states();
    let mut out = Wfst::new();
    out.copy_symbols_from(fst);
    let Some(start) = fst.start() else {
        return out;
    };

    let mut accessible = vec![false; n];
    let mut stack = vec![start];
    accessible[start] = true;
    while let Some(s) = stack.pop() {
        for arc in fst.arcs(s) {
            if !accessible[arc.nextstate] {
                accessible[arc.nextstate] = true;
                stack.push(arc.nextstate);
            }
        }
    }

    let mut reverse: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for s in fst.states() {
        for arc in fst.arcs(s) {
            reverse[arc.nextstate].push(s);
        }
    }
    let mut coaccessible = vec![false; n];
    let mut stack: Vec<StateId> = fst.states().filter(|&s| fst.is_final(s)).collect();
    for &s in &stack {
        coaccessible[s] = true;
    }
    while let Some(s) = stack.pop() {
        for &p in &reverse[s] {
            if !coaccessible[p] {
                coaccessible[p] = true;
                stack.push(p);
            }
        }
    }

    if !coaccessible[start] {
        return out;
    }

    let mut remap = vec![usize::MAX; n];
    for s in fst.states() {
        if accessible[s] && coaccessible[s] {
            remap[s] = out.add_state();
        }
    }
    for s in fst.states() {
        let ns = remap[s];
        if ns == usize::MAX {
            continue;
        }
        out.set_final(ns, fst.final_weight(s));
        for arc in fst.arcs(s) {
            let nt = remap[arc.nextstate];
            if nt != usize::MAX {
                out.add_arc(ns, Arc { nextstate: nt, ..*arc });
            }
        }
    }
    out.set_start(remap[start]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::enumerate_transductions;
    use crate::semiring::Weight;

    fn chain() -> Wfst {
        let mut f = Wfst::new();
        f.add_states(3);
        f.set_start(0);
        f.add_arc(0, Arc::new(1, 1, Weight::ONE, 1));
        f.add_arc(1, Arc::new(2, 2, Weight(-0.5), 2));
        f.set_final(2, Weight::ONE);
        f
    }

    #[test]
    fn drops_unreachable_state() {
        let mut f = chain();
        let dead = f.add_state();
        f.add_arc(dead, Arc::new(1, 1, Weight::ONE, 2));
        let c = connect(&f);
        assert_eq!(c.num_states(), 3);
        assert_eq!(c.num_arcs(), 2);
        assert_eq!(c, chain());
    }

    #[test]
    fn drops_dead_end_state() {
        let mut f = chain();
        let sink = f.add_state();
        f.add_arc(0, Arc::new(3, 3, Weight::ONE, sink));
        let c = connect(&f);
        assert_eq!(c.num_states(), 3);
        assert_eq!(c.num_arcs(), 2);
    }

    #[test]
    fn idempotent_on_trim_graph() {
        let f = chain();
        let c = connect(&f);
        assert_eq!(c, f);
        assert_eq!(connect(&c), c);
    }

    #[test]
    fn non_final_start_with_no_path_is_empty() {
        let mut f = Wfst::new();
        f.add_states(2);
        f.set_start(0);
        f.add_arc(0, Arc::new(1, 1, Weight::ONE, 1));
        let c = connect(&f);
        assert_eq!(c.num_states(), 0);
        assert_eq!(c.start(), None);
        assert!(enumerate_transductions(&c, 3).unwrap().is_empty());
    }
}
