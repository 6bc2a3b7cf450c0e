mod common;

use std::sync::Arc;

use common::*;
use ctcfst::fixtures::{self, rng, synthetic_lexicon};
use ctcfst::pipeline::{build_lg, build_tlg, BigramLm, Lexicon, LmLevel};
use ctcfst::topology::{build_topology, TopologyKind, TopologySpec};
use ctcfst::{collapse, dense_intersect, greedy_decode, viterbi_decode, DenseEmissions, SymbolTable};
use proptest::prelude::*;

fn two_word_setup() -> (Lexicon, BigramLm) {
    let units = Arc::new(SymbolTable::from_unit_names(&["a", "b", "c", "d"]).unwrap());
    let lex = Lexicon::from_text("ab a b\ncd c d\n", units).unwrap();
    let words = Arc::new(lex.word_table());
    let lm = BigramLm::from_text("<s> ab 0.25\n<s> cd 0.75\nab </s> 1\ncd </s> 1\n", LmLevel::Word, Some(words)).unwrap();
    (lex, lm)
}

#[test]
fn one_word_utterance_decodes_to_that_word() {
    let (lex, lm) = two_word_setup();
    let lg = build_lg(&lex, &lm).unwrap();
    let tlg = build_tlg(TopologySpec::new(TopologyKind::Correct, 5), &lex, &lg).unwrap();
    let peak = 0.9f64;
    let rest = ((1.0 - peak) / 4.0).ln();
    // frames: a, blank, b
    let mut rows = vec![vec![rest; 5]; 3];
    rows[0][1] = peak.ln();
    rows[1][0] = peak.ln();
    rows[2][2] = peak.ln();
    let em = DenseEmissions::from_rows(&rows).unwrap();
    let h = viterbi_decode(&tlg, &em, f64::INFINITY).unwrap();
    assert_eq!(h.render(tlg.output_symbols()), "ab");
    assert_eq!(h.frame_labels, vec![2, 1, 3]);
    let expected = 3.0 * peak.ln() + 0.25f64.ln();
    assert!((h.score.value() - expected).abs() < 1e-12);
    assert_eq!(h.to_line("utt1", tlg.output_symbols()), format!("utt1\t{expected:.6}\tab"));
}

#[test]
fn greedy_and_viterbi_agree_on_bare_topology() {
    let mut r = rng(31);
    let topo = build_topology(TopologySpec::new(TopologyKind::Correct, 5)).unwrap();
    for _ in 0..30 {
        let target = random_target(5, 4, &mut r);
        let frames = fixtures::random_alignment(&target, &mut r);
        let em = fixtures::peaked_emissions(&frames, 5, 0.8, &mut r);
        let g = greedy_decode(&em);
        let v = viterbi_decode(topo.fst(), &em, f64::INFINITY).unwrap();
        assert_eq!(v.frame_labels, g.frame_labels);
        assert_eq!(v.words, g.words);
        assert_eq!(g.words, target);
        assert!((v.score.value() - g.score.value()).abs() < 1e-9);
    }
}

#[test]
fn sampled_utterances_decode_to_their_words() {
    let lex = synthetic_lexicon(16, 40, 5).unwrap();
    let lg = build_lg(&lex.lexicon, &lex.word_lm).unwrap();
    let tlg = build_tlg(TopologySpec::new(TopologyKind::Correct, 16), &lex.lexicon, &lg).unwrap();
    let mut r = rng(8);
    let mut hits = 0;
    for _ in 0..10 {
        let utt = lex.sample_utterance(3, 0.97, &mut r);
        let h = viterbi_decode(&tlg, &utt.emissions, 30.0).unwrap();
        let units: Vec<_> = collapse(&h.frame_labels);
        assert_eq!(units, utt.units);
        hits += usize::from(h.words == utt.words);
    }
    // homophone segmentations may differ, but most should match exactly
    assert!(hits >= 7, "{hits}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn infinite_beam_is_exact(seed in any::<u64>(), n in 2usize..=4, frames in 1usize..=5) {
        let mut r = rng(seed);
        let em = fixtures::random_scores(frames, n, 3.0, &mut r);
        for t in all_variants(n) {
            if t.spec().uses_frame_doubling() {
                continue;
            }
            let h = viterbi_decode(t.fst(), &em, f64::INFINITY).unwrap();
            let best = dense_intersect(t.fst(), &em, None).unwrap().best_path().unwrap();
            prop_assert!((h.score.value() - best.score.value()).abs() < 1e-9);
            prop_assert!((h.score.value() - brute_force_best(t.fst(), &em)).abs() < 1e-9);
            prop_assert_eq!(h.frame_labels.len(), frames);
            let huge = viterbi_decode(t.fst(), &em, 1e6).unwrap();
            prop_assert_eq!(h, huge);
        }
    }
}
