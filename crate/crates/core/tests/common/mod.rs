//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use ctcfst::fixtures::Rng;
use ctcfst::topology::{build_topology, Topology, TopologyKind, TopologySpec};
use ctcfst::{DenseEmissions, Label, Wfst, BLANK, EPSILON};
use rand::RngExt;

pub fn lse(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Textbook CTC forward recursion over the blank-interleaved target.
/// Column 0 is blank and label `l` reads column `l - 1`.
pub fn classic_ctc_loss(em: &DenseEmissions, target: &[Label]) -> f64 {
    let mut ext = vec![BLANK];
    for &u in target {
        ext.push(u);
        ext.push(BLANK);
    }
    let s = ext.len();
    let t_max = em.frames();
    if t_max == 0 {
        return if target.is_empty() { 0.0 } else { f64::INFINITY };
    }
    let col = |l: Label| l as usize - 1;
    let mut alpha = vec![f64::NEG_INFINITY; s];
    alpha[0] = em.get(0, col(ext[0]));
    if s > 1 {
        alpha[1] = em.get(0, col(ext[1]));
    }
    for t in 1..t_max {
        let mut next = vec![f64::NEG_INFINITY; s];
        for i in 0..s {
            let mut terms = vec![alpha[i]];
            if i >= 1 {
                terms.push(alpha[i - 1]);
            }
            if i >= 2 && ext[i] != BLANK && ext[i] != ext[i - 2] {
                terms.push(alpha[i - 2]);
            }
            next[i] = lse(terms) + em.get(t, col(ext[i]));
        }
        alpha = next;
    }
    let tail = if s > 1 { lse([alpha[s - 1], alpha[s - 2]]) } else { alpha[0] };
    -tail
}

/// Log-sum over every complete path of `graph` that reads exactly
/// `em.frames()` emission labels, scored as graph weight plus emissions.
/// Explicit depth-first enumeration with no dynamic programming.
pub fn brute_force_forward(graph: &Wfst, em: &DenseEmissions) -> f64 {
    let mut scores = Vec::new();
    if let Some(start) = graph.start() {
        walk(graph, em, start, 0, 0.0, 0, &mut scores);
    }
    lse(scores)
}

fn walk(graph: &Wfst, em: &DenseEmissions, s: usize, t: usize, acc: f64, eps_run: usize, out: &mut Vec<f64>) {
    assert!(eps_run <= graph.num_states(), "ε-cycle in oracle walk");
    if t == em.frames() && graph.is_final(s) {
        out.push(acc + graph.final_weight(s).value());
    }
    for a in graph.arcs(s) {
        if a.ilabel == EPSILON {
            walk(graph, em, a.nextstate, t, acc + a.weight.value(), eps_run + 1, out);
        } else if t < em.frames() {
            let e = em.get(t, a.ilabel as usize - 1);
            if e > f64::NEG_INFINITY {
                walk(graph, em, a.nextstate, t + 1, acc + a.weight.value() + e, 0, out);
            }
        }
    }
}

/// Tropical counterpart of [`brute_force_forward`].
pub fn brute_force_best(graph: &Wfst, em: &DenseEmissions) -> f64 {
    let mut scores = Vec::new();
    if let Some(start) = graph.start() {
        walk(graph, em, start, 0, 0.0, 0, &mut scores);
    }
    scores.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

pub const FD_STEP: f64 = 1e-5;
/// Relative errors are measured against `max(|analytic|, |numeric|, FD_FLOOR)`.
pub const FD_FLOOR: f64 = 1e-3;

/// Largest relative error between `grad` and central differences of `f`.
pub fn finite_difference_error(f: impl Fn(&DenseEmissions) -> f64, em: &DenseEmissions, grad: &DenseEmissions) -> f64 {
    let mut worst: f64 = 0.0;
    for t in 0..em.frames() {
        for u in 0..em.units() {
            let mut plus = em.clone();
            plus.set(t, u, em.get(t, u) + FD_STEP);
            let mut minus = em.clone();
            minus.set(t, u, em.get(t, u) - FD_STEP);
            let numeric = (f(&plus) - f(&minus)) / (2.0 * FD_STEP);
            let analytic = grad.get(t, u);
            let scale = analytic.abs().max(numeric.abs()).max(FD_FLOOR);
            worst = worst.max((numeric - analytic).abs() / scale);
        }
    }
    worst
}

/// The five topology variants exercised by randomized tests.
pub fn variants(n: usize) -> Vec<Topology> {
    vec![
        build_topology(TopologySpec::new(TopologyKind::Correct, n)).unwrap(),
        build_topology(TopologySpec::new(TopologyKind::Eesen, n)).unwrap(),
        build_topology(TopologySpec::new(TopologyKind::Compact, n)).unwrap(),
        build_topology(TopologySpec::new(TopologyKind::Minimal, n)).unwrap(),
        build_topology(TopologySpec::new(TopologyKind::Compact, n).train()).unwrap(),
    ]
}

/// Every variant including the selfless ones.
pub fn all_variants(n: usize) -> Vec<Topology> {
    let mut v = variants(n);
    for kind in [TopologyKind::Correct, TopologyKind::Eesen, TopologyKind::Compact] {
        v.push(build_topology(TopologySpec::new(kind, n).selfless(true)).unwrap());
    }
    v
}

pub fn random_target(n_units: usize, max_len: usize, rng: &mut Rng) -> Vec<Label> {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| rng.random_range(2..=n_units as Label)).collect()
}
