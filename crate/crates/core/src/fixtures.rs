//! Seeded synthetic data: lexicons, language models, emission matrices and
//! utterances for benchmarks and randomized tests.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc as SyncArc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fst::Label;
use crate::lattice::DenseEmissions;
use crate::pipeline::{BigramLm, History, Lexicon, LmLevel, Next};
use crate::symbols::SymbolTable;
use crate::topology::BLANK;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Letters words are spelled with.
pub const MAX_ALPHABET: usize = 8;
const MIN_WORD_LEN: usize = 3;
const MAX_WORD_LEN: usize = 8;
const MAX_PIECE_LEN: usize = 4;
const SUCCESSORS: usize = 5;

/// A lexicon whose unit inventory is the alphabet plus frequent substrings
/// of the words, so larger inventories give shorter pronunciations.
#[derive(Debug, Clone)]
pub struct SyntheticLexicon {
    pub n_units: usize,
    pub lexicon: Lexicon,
    pub words: SyncArc<SymbolTable>,
    pub word_lm: BigramLm,
}

impl SyntheticLexicon {
    pub fn units(&self) -> &SyncArc<SymbolTable> {
        self.lexicon.units()
    }
}

fn spellings(n_words: usize, alphabet: usize, rng: &mut Rng) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut words = Vec::with_capacity(n_words);
    while words.len() < n_words {
        let len = rng.random_range(MIN_WORD_LEN..=MAX_WORD_LEN);
        let w: String = (0..len)
            .map(|_| (b'a' + rng.random_range(0..alphabet) as u8) as char)
            .collect();
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    words
}

/// Alphabet letters, then the highest-saving substrings of length 2 to
/// `MAX_PIECE_LEN`, up to `budget` pieces in total.
fn unit_inventory(words: &[String], alphabet: usize, budget: usize) -> Vec<String> {
    let mut pieces: Vec<String> = (0..alphabet).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for w in words {
        for len in 2..=MAX_PIECE_LEN.min(w.len()) {
            for i in 0..=w.len() - len {
                *counts.entry(&w[i..i + len]).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| (b.1 * (b.0.len() - 1)).cmp(&(a.1 * (a.0.len() - 1))).then(a.0.cmp(b.0)));
    pieces.extend(ranked.into_iter().take(budget.saturating_sub(alphabet)).map(|(s, _)| s.to_string()));
    pieces
}

/// Greedy longest-match segmentation.
fn segment(word: &str, ids: &BTreeMap<&str, Label>) -> Vec<Label> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < word.len() {
        let len = (1..=MAX_PIECE_LEN.min(word.len() - i))
            .rev()
            .find(|&l| ids.contains_key(&word[i..i + l]))
            .expect("single letters are always units");
        out.push(ids[&word[i..i + len]]);
        i += len;
    }
    out
}

/// Sparse random word bigram: each history gets up to `SUCCESSORS` random
/// successors plus sentence end, with random normalized probabilities.
pub fn random_word_bigram(words: SyncArc<SymbolTable>, rng: &mut Rng) -> BigramLm {
    let ids: Vec<Label> = (1..words.len() as Label).collect();
    let mut lm = BigramLm::new(LmLevel::Word, words);
    let histories = std::iter::once(History::Start).chain(ids.iter().map(|&w| History::After(w)));
    for h in histories.collect::<Vec<_>>() {
        let mut next: BTreeSet<Label> = BTreeSet::new();
        while next.len() < SUCCESSORS.min(ids.len()) {
            next.insert(ids[rng.random_range(0..ids.len())]);
        }
        let mut entries: Vec<Next> = next.into_iter().map(Next::Symbol).collect();
        if h != History::Start {
            entries.push(Next::End);
        }
        let raw: Vec<f64> = entries.iter().map(|_| 0.1 + rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        for (n, r) in entries.into_iter().zip(raw) {
            lm.set(h, n, r / total);
        }
    }
    lm
}

/// Builds the seeded bench lexicon for an `n_units` vocabulary (blank
/// included). Word spellings depend only on the seed and alphabet size.
pub fn synthetic_lexicon(n_units: usize, n_words: usize, seed: u64) -> Result<SyntheticLexicon> {
    if n_units < 2 {
        return Err(Error::InvalidTopology(format!("{n_units} units leave no language units")));
    }
    if n_words == 0 {
        return Err(Error::EmptyLexicon);
    }
    let language_units = n_units - 1;
    let alphabet = language_units.min(MAX_ALPHABET);
    let mut rng = rng(seed);
    let spelled = spellings(n_words, alphabet, &mut rng);
    let pieces = unit_inventory(&spelled, alphabet, language_units);
    let mut names = pieces.clone();
    // Small corpora may not have enough distinct substrings.
    let mut filler = 0;
    while names.len() < language_units {
        names.push(format!("<pad{filler}>"));
        filler += 1;
    }
    let units = SyncArc::new(SymbolTable::from_unit_names(&names)?);
    let ids: BTreeMap<&str, Label> = pieces
        .iter()
        .map(|p| (p.as_str(), units.id(p).expect("piece is a unit")))
        .collect();
    let mut lexicon = Lexicon::new(units);
    for w in &spelled {
        lexicon.add(w.clone(), segment(w, &ids));
    }
    let words = SyncArc::new(lexicon.word_table());
    let word_lm = random_word_bigram(words.clone(), &mut rng);
    Ok(SyntheticLexicon {
        n_units,
        lexicon,
        words,
        word_lm,
    })
}

/// Random unit bigram over `2..=n_units` with every transition allowed.
pub fn random_unit_bigram(n_units: usize, rng: &mut Rng) -> BigramLm {
    let vocab = SyncArc::new(SymbolTable::units(n_units));
    let units: Vec<Label> = (2..=n_units as Label).collect();
    let mut lm = BigramLm::new(LmLevel::Unit, vocab);
    let histories = std::iter::once(History::Start).chain(units.iter().map(|&u| History::After(u)));
    for h in histories.collect::<Vec<_>>() {
        let entries: Vec<Next> = units.iter().map(|&u| Next::Symbol(u)).chain([Next::End]).collect();
        let raw: Vec<f64> = entries.iter().map(|_| 0.1 + rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        for (n, r) in entries.into_iter().zip(raw) {
            lm.set(h, n, r / total);
        }
    }
    lm
}

/// Row-normalized emissions from random logits in `[-scale, scale]`.
pub fn random_emissions(frames: usize, units: usize, scale: f64, rng: &mut Rng) -> DenseEmissions {
    let values = (0..frames * units).map(|_| rng.random_range(-scale..=scale)).collect();
    DenseEmissions::new(frames, units, values)
        .expect("shape matches")
        .normalized()
}

/// Unnormalized scores in `[-scale, 0]`.
pub fn random_scores(frames: usize, units: usize, scale: f64, rng: &mut Rng) -> DenseEmissions {
    let values = (0..frames * units).map(|_| -rng.random_range(0.0..=scale)).collect();
    DenseEmissions::new(frames, units, values).expect("shape matches")
}

/// Normalized emissions whose row `t` puts roughly `peak` probability on
/// `labels[t]` and spreads the remainder with random jitter.
pub fn peaked_emissions(labels: &[Label], units: usize, peak: f64, rng: &mut Rng) -> DenseEmissions {
    let mut em = DenseEmissions::zeros(labels.len(), units);
    for (t, &l) in labels.iter().enumerate() {
        let row = em.row_mut(t);
        let rest: Vec<f64> = (0..units).map(|_| 0.5 + rng.random::<f64>()).collect();
        let rest_total: f64 = rest.iter().enumerate().filter(|&(u, _)| u + 1 != l as usize).map(|(_, r)| r).sum();
        for (u, v) in row.iter_mut().enumerate() {
            *v = if u + 1 == l as usize {
                peak.ln()
            } else {
                ((1.0 - peak) * rest[u] / rest_total).ln()
            };
        }
    }
    em
}

/// Random CTC alignment of `units`: each unit held 1 to 3 frames, blanks
/// between repeats and with probability one half elsewhere.
pub fn random_alignment(units: &[Label], rng: &mut Rng) -> Vec<Label> {
    let mut frames = Vec::new();
    for (i, &u) in units.iter().enumerate() {
        let repeat = i > 0 && units[i - 1] == u;
        if repeat || rng.random::<bool>() {
            frames.push(BLANK);
        }
        for _ in 0..rng.random_range(1..=3) {
            frames.push(u);
        }
    }
    if frames.is_empty() || rng.random::<bool>() {
        frames.push(BLANK);
    }
    frames
}

/// A sampled utterance with its reference word sequence.
#[derive(Debug, Clone)]
pub struct Utterance {
    pub words: Vec<Label>,
    pub units: Vec<Label>,
    pub emissions: DenseEmissions,
}

impl SyntheticLexicon {
    /// Samples a word sequence from the bigram (at most `max_words`),
    /// aligns its pronunciation and renders peaked emissions for it.
    pub fn sample_utterance(&self, max_words: usize, peak: f64, rng: &mut Rng) -> Utterance {
        let mut words = Vec::new();
        let mut h = History::Start;
        while words.len() < max_words.max(1) {
            let row: Vec<(Next, f64)> = self
                .word_lm
                .rows()
                .find(|(k, _)| *k == h)
                .map(|(_, r)| r.iter().map(|(n, p)| (*n, *p)).collect())
                .unwrap_or_default();
            let mut x = rng.random::<f64>();
            let mut choice = row.last().map(|r| r.0).unwrap_or(Next::End);
            for (n, p) in &row {
                if x < *p {
                    choice = *n;
                    break;
                }
                x -= p;
            }
            match choice {
                Next::End if !words.is_empty() => break,
                Next::End => continue,
                Next::Symbol(w) => {
                    words.push(w);
                    h = History::After(w);
                }
            }
        }
        let mut units = Vec::new();
        for &w in &words {
            let name = self.words.symbol(w).expect("word in table");
            let (_, pron) = self
                .lexicon
                .entries()
                .iter()
                .find(|(n, _)| n == name)
                .expect("word in lexicon");
            units.extend_from_slice(pron);
        }
        let frames = random_alignment(&units, rng);
        let emissions = peaked_emissions(&frames, self.n_units, peak, rng);
        Utterance {
            words,
            units,
            emissions,
        }
    }
}
