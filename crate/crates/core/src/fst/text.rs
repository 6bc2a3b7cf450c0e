//! AT&T FSM text format.
//!
//! Arc lines are `src dst ilabel olabel cost`, final lines `state [cost]`.
//! The first line's source is the start state. Costs are `-ln p`, so a
//! missing cost means probability one and `Infinity` means zero.

use std::fmt::Write as _;
use std::path::Path;

use super::{Arc, StateId, Wfst};
use crate::error::{Error, Result};
use crate::semiring::Weight;

fn format_cost(w: Weight) -> String {
    let c = w.cost();
    if c == f64::INFINITY {
        "Infinity".to_string()
    } else if c == 0.0 {
        "0".to_string()
    } else {
        format!("{c}")
    }
}

fn parse_cost(token: &str, line: usize) -> Result<Weight> {
    let c = match token {
        "Infinity" | "inf" | "+inf" => f64::INFINITY,
        _ => token
            .parse::<f64>()
            .map_err(|_| Error::parse(line, format!("bad cost `{token}`")))?,
    };
    if c.is_nan() || c == f64::NEG_INFINITY {
        return Err(Error::parse(line, format!("invalid cost `{token}`")));
    }
    Ok(Weight::from_cost(c))
}

fn write_state(out: &mut String, fst: &Wfst, s: StateId) {
    for arc in fst.arcs(s) {
        let _ = writeln!(
            out,
            "{s}\t{}\t{}\t{}\t{}",
            arc.nextstate,
            arc.ilabel,
            arc.olabel,
            format_cost(arc.weight)
        );
    }
    let fw = fst.final_weight(s);
    if !fw.is_zero() {
        if fw.is_one() {
            let _ = writeln!(out, "{s}");
        } else {
            let _ = writeln!(out, "{s}\t{}", format_cost(fw));
        }
    }
}

pub fn to_text(fst: &Wfst) -> String {
    let mut out = String::new();
    let Some(start) = fst.start() else {
        return out;
    };
    if fst.arcs(start).is_empty() && !fst.is_final(start) {
        // keep the start state first even when it has nothing else to say
        let _ = writeln!(out, "{start}\tInfinity");
    }
    write_state(&mut out, fst, start);
    for s in fst.states().filter(|&s| s != start) {
        write_state(&mut out, fst, s);
    }
    out
}

pub fn from_text(text: &str) -> Result<Wfst> {
    enum Entry {
        Arc(StateId, Arc),
        Final(StateId, Weight),
    }
    let parse_id = |tok: &str, line: usize| -> Result<usize> {
        tok.parse::<usize>()
            .map_err(|_| Error::parse(line, format!("bad integer `{tok}`")))
    };

    let mut entries = Vec::new();
    let mut max_state: Option<StateId> = None;
    let mut start = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let entry = match fields.len() {
            0 => continue,
            1 | 2 => {
                let s = parse_id(fields[0], line)?;
                let w = match fields.get(1) {
                    Some(tok) => parse_cost(tok, line)?,
                    None => Weight::ONE,
                };
                Entry::Final(s, w)
            }
            4 | 5 => {
                let s = parse_id(fields[0], line)?;
                let d = parse_id(fields[1], line)?;
                let il = parse_id(fields[2], line)? as u32;
                let ol = parse_id(fields[3], line)? as u32;
                let w = match fields.get(4) {
                    Some(tok) => parse_cost(tok, line)?,
                    None => Weight::ONE,
                };
                max_state = max_state.max(Some(d));
                Entry::Arc(s, Arc::new(il, ol, w, d))
            }
            n => return Err(Error::parse(line, format!("expected 1, 2, 4 or 5 fields, got {n}"))),
        };
        let src = match &entry {
            Entry::Arc(s, _) | Entry::Final(s, _) => *s,
        };
        start.get_or_insert(src);
        max_state = max_state.max(Some(src));
        entries.push(entry);
    }

    let mut fst = Wfst::new();
    let Some(max_state) = max_state else {
        return Ok(fst);
    };
    fst.add_states(max_state + 1);
    fst.set_start(start.expect("set with max_state"));
    for entry in entries {
        match entry {
            Entry::Arc(s, arc) => fst.add_arc(s, arc),
            Entry::Final(s, w) => fst.set_final(s, w),
        }
    }
    Ok(fst)
}

pub fn write_file(fst: &Wfst, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_text(fst))?;
    Ok(())
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Wfst> {
    from_text(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn writes_start_first_and_negates_weights() {
        let mut f = Wfst::new();
        f.add_states(2);
        f.set_start(1);
        f.add_arc(1, Arc::new(3, 4, Weight(-0.5), 0));
        f.set_final(0, Weight::ONE);
        f.set_final(1, Weight(-2.0));
        let text = to_text(&f);
        assert_eq!(text, "1\t0\t3\t4\t0.5\n1\t2\n0\n");
        assert_eq!(from_text(&text).unwrap(), f);
    }

    #[test]
    fn empty_round_trip() {
        assert_eq!(to_text(&Wfst::new()), "");
        assert_eq!(from_text("").unwrap(), Wfst::new());
    }

    #[test]
    fn zero_weight_arc_round_trips() {
        let mut f = Wfst::new();
        f.add_states(2);
        f.set_start(0);
        f.add_arc(0, Arc::new(1, 1, Weight::ZERO, 1));
        f.set_final(1, Weight::ONE);
        let back = from_text(&to_text(&f)).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn bare_start_state_survives() {
        let mut f = Wfst::new();
        f.add_states(2);
        f.set_start(0);
        f.add_arc(1, Arc::new(1, 1, Weight::ONE, 1));
        f.set_final(1, Weight::ONE);
        assert_eq!(from_text(&to_text(&f)).unwrap(), f);
    }

    #[test]
    fn rejects_garbage() {
        assert!(from_text("0 1 2\n").is_err());
        assert!(from_text("0 x 1 1\n").is_err());
        assert!(from_text("0 1 1 1 NaN\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trip(arcs in proptest::collection::vec((0usize..6, 0usize..6, 0u32..5, 0u32..5, -20.0f64..3.0), 1..20),
                      finals in proptest::collection::vec(proptest::option::of(-5.0f64..0.0), 6)) {
            let mut f = Wfst::new();
            f.add_states(6);
            f.set_start(arcs[0].0);
            for (s, d, i, o, w) in arcs {
                f.add_arc(s, Arc::new(i, o, Weight(w), d));
            }
            for (s, w) in finals.into_iter().enumerate() {
                if let Some(w) = w {
                    f.set_final(s, Weight(w));
                }
            }
            // states with no lines past the last mentioned one are not representable
            f.set_final(5, Weight(-1.0));
            let back = from_text(&to_text(&f)).unwrap();
            prop_assert!(back.approx_eq(&f, 1e-12));
        }
    }
}
