use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;

use ctcfst::bench::{self, BenchSetup, GraphVariant};
use ctcfst::fst::{compose, text};
use ctcfst::lattice::{
    build_denominator, build_supervision, graph_loss_and_grad, mmi_loss_and_grad, topology_ctc_loss,
    topology_mmi_loss, LossResult,
};
use ctcfst::pipeline::{build_lexicon_fst_with_words, build_ngram_fst, BigramLm, Lexicon, LmLevel};
use ctcfst::topology::{build_topology, Topology, TopologyKind, TopologySpec};
use ctcfst::{graph_stats, viterbi_decode, DenseEmissions, SymbolTable};
use rayon::prelude::*;

use crate::{BenchArgs, BenchKind, Command, DecodeArgs, GraphCommand, LossArgs, LossKind, TopoArgs};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration.
    Usage(String),
    /// Unreadable or invalid input data.
    Data(ctcfst::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Data(e) => write!(f, "{e}"),
        }
    }
}

impl From<ctcfst::Error> for CliError {
    fn from(e: ctcfst::Error) -> Self {
        match e {
            ctcfst::Error::InvalidTopology(m) => CliError::Usage(format!("invalid topology: {m}")),
            e => CliError::Data(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Topo(a) => topo(a),
        Command::Graph(g) => graph(g),
        Command::Loss(a) => loss(a),
        Command::Decode(a) => decode(a),
        Command::Bench(a) => bench_cmd(a),
    }
}

fn parse_kind(s: &str) -> Result<TopologyKind> {
    s.parse().map_err(|e: ctcfst::Error| CliError::Usage(e.to_string()))
}

fn topology(kind: &str, units: usize, selfless: bool, train_mode: bool) -> Result<Topology> {
    let mut spec = TopologySpec::new(parse_kind(kind)?, units).selfless(selfless);
    if train_mode {
        spec = spec.train();
    }
    Ok(build_topology(spec)?)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(ctcfst::Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))))
}

fn topo(a: TopoArgs) -> Result<()> {
    let t = topology(&a.kind, a.units, a.selfless, a.train_mode)?;
    if let Some(out) = &a.out {
        text::write_file(t.fst(), out)?;
    }
    println!("states={} arcs={}", t.fst().num_states(), t.fst().num_arcs());
    Ok(())
}

fn graph(g: GraphCommand) -> Result<()> {
    match g {
        GraphCommand::Compose { inputs, out } => {
            let graphs = inputs
                .iter()
                .map(|p| Ok(text::from_text(&read(p)?)?))
                .collect::<Result<Vec<_>>>()?;
            let mut acc = graphs.last().cloned().expect("at least two inputs");
            for g in graphs.iter().rev().skip(1) {
                acc = compose(g, &acc)?;
            }
            text::write_file(&acc, &out)?;
            println!("{}", graph_stats(&acc));
        }
        GraphCommand::Stats { input } => {
            let g = text::from_text(&read(&input)?)?;
            println!("{}", graph_stats(&g).csv_row());
        }
        GraphCommand::Lexicon {
            input,
            units,
            out,
            words_out,
        } => {
            let table = Arc::new(SymbolTable::units(units));
            let lex = Lexicon::from_text(&read(&input)?, table)?;
            let words = Arc::new(lex.word_table());
            let l = build_lexicon_fst_with_words(&lex, words.clone())?;
            text::write_file(&l, &out)?;
            if let Some(path) = words_out {
                std::fs::write(path, words.to_text())?;
            }
            println!("{}", graph_stats(&l));
        }
        GraphCommand::Grammar { input, words, out } => {
            let words = Arc::new(SymbolTable::from_text("words", &read(&words)?)?);
            let lm = BigramLm::from_text(&read(&input)?, LmLevel::Word, Some(words))?;
            let g = build_ngram_fst(&lm)?;
            text::write_file(&g, &out)?;
            println!("{}", graph_stats(&g));
        }
    }
    Ok(())
}

fn loss(a: LossArgs) -> Result<()> {
    let em = DenseEmissions::from_text(&read(&a.emissions)?)?;
    if em.units() == 0 {
        return Err(CliError::Data(ctcfst::Error::Shape("emissions have no columns".into())));
    }
    let topo = topology(&a.topo, em.units(), a.selfless, a.train_mode)?;
    let units = SymbolTable::units(em.units());
    let target = units.parse_sequence(&read(&a.target)?)?;
    let result: LossResult = match a.kind {
        LossKind::Ctc if topo.spec().uses_frame_doubling() => {
            if a.prune_beam.is_some() {
                return Err(CliError::Usage("--prune-beam is not supported with --train-mode for ctc".into()));
            }
            topology_ctc_loss(&topo, &target, &em)?
        }
        LossKind::Ctc => graph_loss_and_grad(&build_supervision(topo.fst(), &target)?, &em, a.prune_beam)?,
        LossKind::Mmi => {
            let lm = match &a.lm {
                Some(p) => BigramLm::from_text(&read(p)?, LmLevel::Unit, Some(Arc::new(units.clone())))?,
                None => BigramLm::uniform_units(em.units()),
            };
            if topo.spec().uses_frame_doubling() {
                topology_mmi_loss(&topo, &lm, &target, &em, a.prune_beam)?
            } else {
                let num = build_supervision(topo.fst(), &target)?;
                let den = build_denominator(topo.fst(), &lm)?;
                mmi_loss_and_grad(&num, &den, &em, a.prune_beam)?
            }
        }
    };
    if result.loss.is_finite() {
        println!("{:.6}", result.loss);
    } else {
        println!("inf");
    }
    if let Some(path) = &a.grad_out {
        result.grad.write_file(path)?;
    }
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<()> {
    if a.beam.is_nan() || a.beam <= 0.0 {
        return Err(CliError::Usage(format!("beam must be positive, got {}", a.beam)));
    }
    let graph = text::from_text(&read(&a.graph)?)?;
    let words = match &a.words {
        Some(p) => Some(SymbolTable::from_text("words", &read(p)?)?),
        None => None,
    };
    let lines = a
        .emissions
        .par_iter()
        .map(|path| {
            let em = DenseEmissions::from_text(&read(path)?)?;
            let h = viterbi_decode(&graph, &em, a.beam)?;
            let utt = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(h.to_line(&utt, words.as_ref()))
        })
        .collect::<Result<Vec<_>>>()?;
    for line in lines {
        println!("{line}");
    }
    Ok(())
}

fn bench_cmd(a: BenchArgs) -> Result<()> {
    if a.sizes.is_empty() {
        return Err(CliError::Usage("--sizes must list at least one vocabulary size".into()));
    }
    if let Some(&bad) = a.sizes.iter().find(|&&n| n < 2) {
        return Err(CliError::Usage(format!("vocabulary size {bad} leaves no language units")));
    }
    if a.words == 0 {
        return Err(CliError::Usage("--words must be positive".into()));
    }
    if a.beam.is_nan() || a.beam <= 0.0 {
        return Err(CliError::Usage(format!("beam must be positive, got {}", a.beam)));
    }
    let variants = a
        .topologies
        .iter()
        .map(|s| s.parse::<GraphVariant>().map_err(|e| CliError::Usage(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    if variants.is_empty() {
        return Err(CliError::Usage("--topologies must not be empty".into()));
    }
    let timing = !a.no_timing;

    let setups = a
        .sizes
        .par_iter()
        .map(|&n| Ok(BenchSetup::new(n, a.words, a.seed)?))
        .collect::<Result<Vec<_>>>()?;
    for setup in &setups {
        let suffix = |p: &Path| p.with_extension(match p.extension() {
            Some(ext) => format!("{}.{}", ext.to_string_lossy(), setup.n_units),
            None => setup.n_units.to_string(),
        });
        if let Some(p) = &a.lexicon {
            std::fs::write(suffix(p), setup.lexicon.lexicon.to_text())?;
        }
        if let Some(p) = &a.lm {
            std::fs::write(suffix(p), setup.lexicon.word_lm.to_text())?;
        }
    }

    let mut out = format!("# seed={} words={}\n", a.seed, a.words);
    match a.kind {
        BenchKind::Sizes => {
            let per_size = setups
                .par_iter()
                .map(|s| Ok(bench::size_rows(s, &variants)?))
                .collect::<Result<Vec<_>>>()?;
            out.push_str(bench::SIZE_HEADER);
            out.push('\n');
            for rows in &per_size {
                for r in rows {
                    out.push_str(&r.csv(timing));
                    out.push('\n');
                }
            }
            for (setup, rows) in setups.iter().zip(&per_size) {
                if let Some(ratio) = bench::compact_correct_ratio(rows) {
                    out.push_str(&format!("# compact/correct arcs N={}: {ratio:.4}\n", setup.n_units));
                }
            }
        }
        BenchKind::Decode => {
            let per_size = setups
                .par_iter()
                .map(|s| Ok(bench::decode_rows(s, &variants, a.utterances, a.beam, a.seed)?))
                .collect::<Result<Vec<_>>>()?;
            out.push_str(bench::DECODE_HEADER);
            out.push('\n');
            for rows in &per_size {
                for r in rows {
                    out.push_str(&r.csv(timing));
                    out.push('\n');
                }
            }
            for (setup, rows) in setups.iter().zip(&per_size) {
                let find = |k| rows.iter().find(|r| r.size.variant == GraphVariant::composed(k));
                if let (Some(c), Some(r)) = (find(TopologyKind::Compact), find(TopologyKind::Correct)) {
                    out.push_str(&format!(
                        "# compact/correct agreement N={}: {:.4}\n",
                        setup.n_units,
                        bench::agreement(c, r)
                    ));
                }
            }
        }
    }
    match &a.out {
        Some(p) => std::fs::write(p, out)?,
        None => std::io::stdout().write_all(out.as_bytes())?,
    }
    Ok(())
}
