//! Graph-size and decoding sweeps over the seeded synthetic lexicon.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::decoder::viterbi_decode;
use crate::error::{Error, Result};
use crate::fixtures::{rng, synthetic_lexicon, SyntheticLexicon};
use crate::fst::Wfst;
use crate::lattice::{augment_emissions_for_compact, build_denominator, dense_intersect, DenseEmissions};
use crate::pipeline::{build_lg, build_tlg, graph_stats, BigramLm, GraphStats};
use crate::topology::{build_topology, TopologyKind, TopologySpec};

pub const DEFAULT_SEED: u64 = 20;
pub const DEFAULT_WORDS: usize = 100;
pub const DEFAULT_SIZES: [usize; 3] = [16, 32, 64];
pub const SIZE_HEADER: &str = "topology,N,states,arcs,approx_bytes,build_seconds";
pub const DECODE_HEADER: &str = "topology,N,states,arcs,approx_bytes,build_seconds,total_score,decode_seconds";

/// A decoding graph in a sweep: bare `LG` or `T ∘ LG` for a topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphVariant {
    Lg,
    Composed { kind: TopologyKind, selfless: bool },
}

impl GraphVariant {
    pub const DEFAULT: [GraphVariant; 4] = [
        GraphVariant::composed(TopologyKind::Correct),
        GraphVariant::composed(TopologyKind::Eesen),
        GraphVariant::composed(TopologyKind::Compact),
        GraphVariant::composed(TopologyKind::Minimal),
    ];

    pub const fn composed(kind: TopologyKind) -> Self {
        GraphVariant::Composed { kind, selfless: false }
    }

    pub fn spec(self, n_units: usize) -> Option<TopologySpec> {
        match self {
            GraphVariant::Lg => None,
            GraphVariant::Composed { kind, selfless } => Some(TopologySpec::new(kind, n_units).selfless(selfless)),
        }
    }
}

impl fmt::Display for GraphVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphVariant::Lg => f.write_str("lg"),
            GraphVariant::Composed { kind, selfless: false } => write!(f, "{kind}"),
            GraphVariant::Composed { kind, selfless: true } => write!(f, "{kind}-selfless"),
        }
    }
}

impl FromStr for GraphVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "lg" {
            return Ok(GraphVariant::Lg);
        }
        let (name, selfless) = match s.strip_suffix("-selfless") {
            Some(name) => (name, true),
            None => (s, false),
        };
        let kind: TopologyKind = name.parse()?;
        TopologySpec::new(kind, 2).selfless(selfless).validate()?;
        Ok(GraphVariant::Composed { kind, selfless })
    }
}

/// Bench lexicon plus its `LG` for one vocabulary size.
#[derive(Debug, Clone)]
pub struct BenchSetup {
    pub n_units: usize,
    pub lexicon: SyntheticLexicon,
    pub lg: Wfst,
    pub lg_seconds: f64,
}

impl BenchSetup {
    pub fn new(n_units: usize, words: usize, seed: u64) -> Result<Self> {
        let lexicon = synthetic_lexicon(n_units, words, seed)?;
        let t0 = Instant::now();
        let lg = build_lg(&lexicon.lexicon, &lexicon.word_lm)?;
        Ok(BenchSetup {
            n_units,
            lexicon,
            lg,
            lg_seconds: t0.elapsed().as_secs_f64(),
        })
    }

    /// Builds the graph for `variant` and reports the build time.
    pub fn graph(&self, variant: GraphVariant) -> Result<(Wfst, f64)> {
        match variant.spec(self.n_units) {
            None => Ok((self.lg.clone(), self.lg_seconds)),
            Some(spec) => {
                let t0 = Instant::now();
                let g = build_tlg(spec, &self.lexicon.lexicon, &self.lg)?;
                Ok((g, t0.elapsed().as_secs_f64()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeRow {
    pub variant: GraphVariant,
    pub n_units: usize,
    pub stats: GraphStats,
    pub build_seconds: f64,
}

impl SizeRow {
    pub fn csv(&self, timing: bool) -> String {
        format!("{},{},{},{}", self.variant, self.n_units, self.stats.csv_row(), seconds(self.build_seconds, timing))
    }
}

fn seconds(s: f64, timing: bool) -> String {
    if timing {
        format!("{s:.6}")
    } else {
        "NA".to_string()
    }
}

pub fn size_rows(setup: &BenchSetup, variants: &[GraphVariant]) -> Result<Vec<SizeRow>> {
    variants
        .iter()
        .map(|&variant| {
            let (g, build_seconds) = setup.graph(variant)?;
            Ok(SizeRow {
                variant,
                n_units: setup.n_units,
                stats: graph_stats(&g),
                build_seconds,
            })
        })
        .collect()
}

/// Ratio of compact to correct arc counts, when both rows are present.
pub fn compact_correct_ratio(rows: &[SizeRow]) -> Option<f64> {
    let arcs = |kind| {
        rows.iter()
            .find(|r| r.variant == GraphVariant::composed(kind))
            .map(|r| r.stats.arcs as f64)
    };
    Some(arcs(TopologyKind::Compact)? / arcs(TopologyKind::Correct)?)
}

/// Arc count of the denominator lattice `(T ∘ G_unit) ∩ uniform emissions`
/// with a uniform unit bigram, the quantity that bounds MMI memory.
pub fn denominator_lattice_arcs(spec: TopologySpec, frames: usize) -> Result<usize> {
    let topo = build_topology(spec)?;
    let den = build_denominator(topo.fst(), &BigramLm::uniform_units(spec.n_units))?;
    let em = DenseEmissions::uniform(frames, spec.n_units);
    let em = if spec.uses_frame_doubling() {
        augment_emissions_for_compact(&em)
    } else {
        em
    };
    Ok(dense_intersect(&den, &em, None)?.num_arcs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeRow {
    pub size: SizeRow,
    pub total_score: f64,
    pub decode_seconds: f64,
    pub hypotheses: Vec<Vec<crate::fst::Label>>,
}

impl DecodeRow {
    pub fn csv(&self, timing: bool) -> String {
        format!("{},{:.6},{}", self.size.csv(timing), self.total_score, seconds(self.decode_seconds, timing))
    }
}

/// Decodes `utterances` sampled utterances with every variant.
pub fn decode_rows(
    setup: &BenchSetup,
    variants: &[GraphVariant],
    utterances: usize,
    beam: f64,
    seed: u64,
) -> Result<Vec<DecodeRow>> {
    let mut r = rng(seed ^ 0x5eed);
    let utts: Vec<_> = (0..utterances)
        .map(|_| setup.lexicon.sample_utterance(3, 0.9, &mut r))
        .collect();
    let mut rows = Vec::new();
    for &variant in variants {
        if variant == GraphVariant::Lg {
            continue;
        }
        let (g, build_seconds) = setup.graph(variant)?;
        let t0 = Instant::now();
        let mut total = 0.0;
        let mut hypotheses = Vec::with_capacity(utts.len());
        for u in &utts {
            let h = viterbi_decode(&g, &u.emissions, beam)?;
            total += h.score.value();
            hypotheses.push(h.words);
        }
        rows.push(DecodeRow {
            size: SizeRow {
                variant,
                n_units: setup.n_units,
                stats: graph_stats(&g),
                build_seconds,
            },
            total_score: total,
            decode_seconds: t0.elapsed().as_secs_f64(),
            hypotheses,
        });
    }
    Ok(rows)
}

/// Fraction of utterances on which two decode rows produced the same words.
pub fn agreement(a: &DecodeRow, b: &DecodeRow) -> f64 {
    if a.hypotheses.is_empty() {
        return 1.0;
    }
    let same = a.hypotheses.iter().zip(&b.hypotheses).filter(|(x, y)| x == y).count();
    same as f64 / a.hypotheses.len() as f64
}
