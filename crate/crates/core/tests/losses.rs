mod common;

use common::*;
use ctcfst::fixtures::{self, rng};
use ctcfst::fst::{enumerate_transductions, topological_sort};
use ctcfst::lattice::{
    augment_emissions_for_compact, build_denominator, build_supervision, ctc_loss_and_grad, dense_intersect,
    graph_loss_and_grad, mmi_loss_and_grad, topology_ctc_loss, topology_mmi_loss,
};
use ctcfst::pipeline::BigramLm;
use ctcfst::topology::{build_topology, TopologyKind, TopologySpec};
use ctcfst::{collapse, DenseEmissions, Label, BLANK};
use proptest::prelude::*;
use rand::RngExt;

const A: Label = 2;
const B: Label = 3;

fn topo(kind: TopologyKind, n: usize) -> ctcfst::Topology {
    build_topology(TopologySpec::new(kind, n)).unwrap()
}

#[test]
fn uniform_two_frame_lattice_has_three_paths() {
    let sup = build_supervision(topo(TopologyKind::Correct, 3).fst(), &[A]).unwrap();
    let lat = dense_intersect(&sup, &DenseEmissions::uniform(2, 3), None).unwrap();
    let paths = enumerate_transductions(lat.fst(), 2).unwrap();
    assert_eq!(paths.len(), 3);
    for p in &paths {
        assert!((p.weight.value() - (1.0f64 / 9.0).ln()).abs() < 1e-12);
    }
    assert!((lat.forward_score().value() - (1.0f64 / 3.0).ln()).abs() < 1e-12);
}

#[test]
fn worked_loss_values() {
    let uniform = |t| DenseEmissions::uniform(t, 3);
    let cases = [
        (TopologyKind::Correct, vec![A], 2, 3f64.ln()),
        (TopologyKind::Correct, vec![A, A], 3, 27f64.ln()),
        (TopologyKind::Minimal, vec![A], 2, -(2.0f64 / 9.0).ln()),
    ];
    for (kind, target, frames, expected) in cases {
        let r = ctc_loss_and_grad(topo(kind, 3).fst(), &target, &uniform(frames)).unwrap();
        assert!((r.loss - expected).abs() < 1e-12, "{kind} {target:?}: {} vs {expected}", r.loss);
        let oracle = -brute_force_forward(&build_supervision(topo(kind, 3).fst(), &target).unwrap(), &uniform(frames));
        assert!((r.loss - oracle).abs() < 1e-12);
    }
    let r = ctc_loss_and_grad(topo(TopologyKind::Correct, 3).fst(), &[A, B], &uniform(1)).unwrap();
    assert_eq!(r.loss, f64::INFINITY);
}

#[test]
fn single_weight_one_path_scores_zero() {
    let em = DenseEmissions::from_rows(&[vec![f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY]]).unwrap();
    let sup = build_supervision(topo(TopologyKind::Correct, 3).fst(), &[A]).unwrap();
    assert_eq!(dense_intersect(&sup, &em, None).unwrap().forward_score().value(), 0.0);
}

#[test]
fn frame_doubled_single_frame_matches_doubled_graph_oracle() {
    let t = build_topology(TopologySpec::new(TopologyKind::Compact, 3).train()).unwrap();
    let em = DenseEmissions::uniform(1, 3);
    let aug = augment_emissions_for_compact(&em);
    let oracle = -brute_force_forward(&build_supervision(t.fst(), &[A]).unwrap(), &aug);
    let r = topology_ctc_loss(&t, &[A], &em).unwrap();
    assert!((r.loss - oracle).abs() < 1e-12);
    assert!((r.loss - 3f64.ln()).abs() < 1e-12);
}

#[test]
fn classic_ctc_agreement_sample() {
    let mut r = rng(101);
    let t = topo(TopologyKind::Correct, 6);
    for _ in 0..40 {
        let frames = r.random_range(1..=12);
        let target = random_target(6, 5, &mut r);
        let em = fixtures::random_emissions(frames, 6, 3.0, &mut r);
        let ours = ctc_loss_and_grad(t.fst(), &target, &em).unwrap().loss;
        let theirs = classic_ctc_loss(&em, &target);
        if theirs.is_infinite() {
            assert_eq!(ours, f64::INFINITY);
        } else {
            assert!((ours - theirs).abs() < 1e-9, "{ours} vs {theirs}");
        }
    }
}

#[test]
fn mmi_matches_frame_string_enumeration() {
    let t = topo(TopologyKind::Correct, 3);
    let lm = BigramLm::uniform_units(3);
    let em = DenseEmissions::uniform(2, 3);
    let num = build_supervision(t.fst(), &[A]).unwrap();
    let den = build_denominator(t.fst(), &lm).unwrap();
    let r = mmi_loss_and_grad(&num, &den, &em, None).unwrap();

    let mut num_mass = 0.0;
    let mut den_mass = 0.0;
    for x in 1..=3 {
        for y in 1..=3 {
            let frames = [x as Label, y as Label];
            let p_frames = (em.get(0, x - 1) + em.get(1, y - 1)).exp();
            let units = collapse(&frames);
            den_mass += p_frames * lm.sentence_prob(&units);
            if units == [A] {
                num_mass += p_frames;
            }
        }
    }
    let expected = -(num_mass.ln() - den_mass.ln());
    assert!((r.loss - expected).abs() < 1e-12, "{} vs {expected}", r.loss);
}

#[test]
fn mmi_with_identical_graphs_is_zero() {
    let sup = build_supervision(topo(TopologyKind::Compact, 4).fst(), &[A, B]).unwrap();
    let em = fixtures::random_emissions(5, 4, 2.0, &mut rng(3));
    let r = mmi_loss_and_grad(&sup, &sup, &em, None).unwrap();
    assert!(r.loss.abs() < 1e-12);
    assert!(r.grad.values().iter().all(|g| g.abs() < 1e-12));
}

#[test]
fn pruned_denominator_on_peaked_emissions() {
    let mut r = rng(17);
    let t = topo(TopologyKind::Correct, 5);
    let lm = fixtures::random_unit_bigram(5, &mut r);
    for _ in 0..10 {
        let target = random_target(5, 3, &mut r);
        let frames = fixtures::random_alignment(&target, &mut r);
        let em = fixtures::peaked_emissions(&frames, 5, 0.95, &mut r);
        let full = topology_mmi_loss(&t, &lm, &target, &em, None).unwrap();
        let pruned = topology_mmi_loss(&t, &lm, &target, &em, Some(20.0)).unwrap();
        assert!((full.loss - pruned.loss).abs() <= 1e-6);
    }
}

#[test]
fn gradients_sample() {
    let mut r = rng(23);
    let lm = fixtures::random_unit_bigram(3, &mut r);
    for topo in all_variants(3) {
        let target = random_target(3, 2, &mut r);
        let em = fixtures::random_scores(4, 3, 2.0, &mut r);
        let res = topology_ctc_loss(&topo, &target, &em).unwrap();
        if !res.loss.is_finite() {
            continue;
        }
        let err = finite_difference_error(|e| topology_ctc_loss(&topo, &target, e).unwrap().loss, &em, &res.grad);
        assert!(err <= 1e-4, "{}: {err}", topo.spec().label());
        let res = topology_mmi_loss(&topo, &lm, &target, &em, None).unwrap();
        let err = finite_difference_error(|e| topology_mmi_loss(&topo, &lm, &target, e, None).unwrap().loss, &em, &res.grad);
        assert!(err <= 1e-4, "mmi {}: {err}", topo.spec().label());
    }
}

#[test]
fn blank_in_target_errors() {
    let em = DenseEmissions::uniform(3, 3);
    assert!(ctc_loss_and_grad(topo(TopologyKind::Minimal, 3).fst(), &[BLANK], &em).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn forward_score_matches_enumeration(seed in any::<u64>(), n in 2usize..=4, frames in 0usize..=5) {
        let mut r = rng(seed);
        let target = random_target(n, 3, &mut r);
        let em = fixtures::random_scores(frames, n, 3.0, &mut r);
        for t in all_variants(n) {
            let sup = build_supervision(t.fst(), &target).unwrap();
            let em = if t.spec().uses_frame_doubling() { augment_emissions_for_compact(&em) } else { em.clone() };
            let lat = dense_intersect(&sup, &em, None).unwrap();
            let oracle = brute_force_forward(&sup, &em);
            let ours = lat.forward_score().value();
            if oracle == f64::NEG_INFINITY {
                prop_assert!(lat.is_empty());
            } else {
                prop_assert!((ours - oracle).abs() < 1e-9, "{} {ours} vs {oracle}", t.spec().label());
            }
            prop_assert!(topological_sort(lat.fst()).is_ok());
        }
    }

    #[test]
    fn occupancy_rows_sum_to_one(seed in any::<u64>(), n in 2usize..=5, frames in 1usize..=8) {
        let mut r = rng(seed);
        let target = random_target(n, 3, &mut r);
        let em = fixtures::random_emissions(frames, n, 2.0, &mut r);
        for t in variants(n) {
            let res = topology_ctc_loss(&t, &target, &em).unwrap();
            if !res.loss.is_finite() {
                prop_assert!(res.grad.values().iter().all(|&g| g == 0.0));
                continue;
            }
            // Compact and Eesen can split a run of a repeated unit in
            // several ways, so only correct and minimal bound the mass.
            if matches!(t.spec().kind, TopologyKind::Correct | TopologyKind::Minimal) {
                prop_assert!(res.loss >= -1e-12, "{} {}", t.spec().label(), res.loss);
            }
            if !t.spec().uses_frame_doubling() {
                for row in res.grad.rows() {
                    prop_assert!((row.iter().sum::<f64>() + 1.0).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn correct_loss_dominates_compact(seed in any::<u64>(), n in 2usize..=6, frames in 1usize..=10) {
        let mut r = rng(seed);
        let target = random_target(n, 4, &mut r);
        let em = fixtures::random_emissions(frames, n, 3.0, &mut r);
        let correct = ctc_loss_and_grad(topo(TopologyKind::Correct, n).fst(), &target, &em).unwrap().loss;
        let compact = ctc_loss_and_grad(topo(TopologyKind::Compact, n).fst(), &target, &em).unwrap().loss;
        prop_assert!(correct >= compact - 1e-9);
    }

    #[test]
    fn pruning_only_removes_mass(seed in any::<u64>(), n in 2usize..=5, frames in 1usize..=10, beam in 0.1f64..8.0) {
        let mut r = rng(seed);
        let target = random_target(n, 3, &mut r);
        let em = fixtures::random_emissions(frames, n, 3.0, &mut r);
        for t in variants(n) {
            if t.spec().uses_frame_doubling() {
                continue;
            }
            let sup = build_supervision(t.fst(), &target).unwrap();
            let exact = graph_loss_and_grad(&sup, &em, None).unwrap().loss;
            let inf = graph_loss_and_grad(&sup, &em, Some(f64::INFINITY)).unwrap().loss;
            prop_assert!(exact == inf || (exact - inf).abs() <= 1e-12);
            let pruned = graph_loss_and_grad(&sup, &em, Some(beam)).unwrap().loss;
            prop_assert!(pruned >= exact);
        }
    }
}
