use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "ctcfst", version, about = "CTC topologies as weighted finite-state transducers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a topology graph and print its size.
    Topo(TopoArgs),
    /// Build, combine or measure graphs.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Compute a loss and its gradient for one utterance.
    Loss(LossArgs),
    /// Viterbi-decode emission files against a decoding graph.
    Decode(DecodeArgs),
    /// Sweep graph sizes or decoding over vocabulary sizes.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct TopoArgs {
    /// correct, eesen, compact or minimal
    kind: String,
    /// Emission units including blank.
    #[arg(long)]
    units: usize,
    #[arg(long)]
    selfless: bool,
    /// Relabel compact ε-returns with the emulation unit.
    #[arg(long)]
    train_mode: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum GraphCommand {
    /// Compose graphs right to left: `f1 ∘ (f2 ∘ (... ∘ fk))`.
    Compose {
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print `states,arcs,approx_bytes`.
    Stats { input: PathBuf },
    /// Build a lexicon transducer from `word unit...` lines.
    Lexicon {
        input: PathBuf,
        /// Emission units including blank; units are named A, B, ...
        #[arg(long)]
        units: usize,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the word symbol table.
        #[arg(long)]
        words_out: Option<PathBuf>,
    },
    /// Build a word bigram acceptor from `history word prob` lines.
    Grammar {
        input: PathBuf,
        /// Word symbol table written by `graph lexicon`.
        #[arg(long)]
        words: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum LossKind {
    Ctc,
    Mmi,
}

#[derive(Args, Debug)]
struct LossArgs {
    #[arg(value_enum)]
    kind: LossKind,
    #[arg(long)]
    topo: String,
    #[arg(long)]
    selfless: bool,
    /// Use train-mode compact with frame-doubled emissions.
    #[arg(long)]
    train_mode: bool,
    /// File with space-separated unit names (A, B, ...).
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    emissions: PathBuf,
    /// Beam for the intersection (the denominator only, for MMI).
    #[arg(long)]
    prune_beam: Option<f64>,
    /// Unit bigram for the MMI denominator; uniform when omitted.
    #[arg(long)]
    lm: Option<PathBuf>,
    #[arg(long)]
    grad_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Word symbol table for rendering hypotheses.
    #[arg(long)]
    words: Option<PathBuf>,
    #[arg(long, default_value_t = f64::INFINITY)]
    beam: f64,
    /// One emission file per utterance; the file stem is the utterance id.
    #[arg(required = true)]
    emissions: Vec<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BenchKind {
    Sizes,
    Decode,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(value_enum)]
    kind: BenchKind,
    /// Comma-separated vocabulary sizes (emission units including blank).
    #[arg(long, value_delimiter = ',', default_values_t = ctcfst::bench::DEFAULT_SIZES)]
    sizes: Vec<usize>,
    /// Comma-separated graph variants: lg, correct, eesen, compact,
    /// minimal, or a `-selfless` form.
    #[arg(long, value_delimiter = ',', default_values = ["correct", "eesen", "compact", "minimal"])]
    topologies: Vec<String>,
    #[arg(long, default_value_t = ctcfst::bench::DEFAULT_WORDS)]
    words: usize,
    #[arg(long, default_value_t = ctcfst::bench::DEFAULT_SEED)]
    seed: u64,
    /// Synthetic utterances for the decode bench.
    #[arg(long, default_value_t = 20)]
    utterances: usize,
    #[arg(long, default_value_t = f64::INFINITY)]
    beam: f64,
    /// Write the generated lexicon for each size to `<path>.<N>`.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Write the generated word bigram for each size to `<path>.<N>`.
    #[arg(long)]
    lm: Option<PathBuf>,
    /// Print NA instead of wall-clock columns, for byte-stable output.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
