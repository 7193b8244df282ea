//! `bibs`: train n-gram scorers, build fill-in-the-blank datasets, decode
//! and evaluate.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bibs_core::decode::{Algorithm, ResultRecord};
use bibs_core::fitb::{
    evaluate, format_step_table, generate_dataset, load_corpus, split_corpus, step_count_suite,
    write_experiment_files, DecodeJob, ExperimentSpec,
};
use bibs_core::scorers::{load_scorer, ngram_train, Scorer};
use bibs_core::seqcore::{build_vocabulary, read_dataset, Vocabulary};
use bibs_core::{Convergence, DecodeConfig, Direction};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bibs", version, about = "Bidirectional beam search for fill-in-the-blank decoding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train forward and backward n-gram models plus a vocabulary.
    Train(TrainArgs),
    /// Split a corpus and write blanked datasets for every ratio of a spec.
    Blank(BlankArgs),
    /// Decode a dataset and write one JSON line per instance.
    Decode(DecodeArgs),
    /// Score decode results against the dataset gold spans.
    Eval(EvalArgs),
    /// Verify the 2*B*M*w step count of BiBS and time it.
    Bench(BenchArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// One sentence per line.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 3)]
    order: usize,
    /// Add-k smoothing constant.
    #[arg(long, default_value_t = 0.1)]
    smoothing: f64,
    /// Minimum count for a word to enter the vocabulary.
    #[arg(long, default_value_t = 1)]
    min_count: usize,
    /// Output directory for vocab.json, forward.json and backward.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BlankArgs {
    /// Experiment spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory for the split files and datasets.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    /// Directory holding vocab.json, forward.json and backward.json.
    #[arg(long)]
    models: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// bs-f, bs-b, bibs, gsn, rerank-max, rerank-sum, oracle or unknown-length:<inner>.
    #[arg(long, value_parser = parse_algorithm)]
    algo: Algorithm,
    #[arg(long, default_value_t = 5)]
    beam: usize,
    /// Meta-iterations for bibs, sweeps for gsn.
    #[arg(long, default_value_t = 4)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = DirectionArg::Backward)]
    init_direction: DirectionArg,
    /// Run all meta-iterations even when the beams stop changing.
    #[arg(long)]
    fixed_iters: bool,
    /// Ranked completions to list per instance (1 = top only).
    #[arg(long, default_value_t = 1)]
    nbest: usize,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum DirectionArg {
    Forward,
    Backward,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// Reference sentences for CIDEr document frequencies; defaults to the
    /// dataset's original sentences.
    #[arg(long)]
    cider_corpus: Option<PathBuf>,
    /// Write the report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1, 3, 5])]
    beams: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4])]
    iters: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 5, 10])]
    widths: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the rows as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: bibs_core::Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Blank(a) => blank(a),
        Command::Decode(a) => decode(a),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(bibs_core::write_atomic(path, contents.as_bytes())?)
}

fn train(a: TrainArgs) -> Result<()> {
    let sentences = load_corpus(&a.corpus)?;
    if sentences.is_empty() {
        bail!("corpus {} has no sentences", a.corpus.display());
    }
    let vocab = build_vocabulary(sentences.iter().flatten(), a.min_count)?;
    let ids: Vec<_> = sentences.iter().map(|s| vocab.encode(s)).collect();
    let (mut fwd, mut bwd) = ngram_train(&ids, a.order, a.smoothing, vocab.len())?;
    fwd.set_vocabulary_ref("vocab.json");
    bwd.set_vocabulary_ref("vocab.json");
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    vocab.save(&a.out.join("vocab.json"))?;
    fwd.save(&a.out.join("forward.json"))?;
    bwd.save(&a.out.join("backward.json"))?;
    let tokens: usize = sentences.iter().map(Vec::len).sum();
    println!(
        "sentences {}  tokens {tokens}  types {}  order {}  contexts fwd {} bwd {}",
        sentences.len(),
        vocab.content_len(),
        a.order,
        fwd.contexts().count(),
        bwd.contexts().count()
    );
    Ok(())
}

fn blank(a: BlankArgs) -> Result<()> {
    let spec = ExperimentSpec::load(&a.spec)?;
    let sentences = load_corpus(&spec.corpus)?;
    let splits = split_corpus(&sentences, spec.splits, spec.seed)?;
    let (datasets, skipped) = generate_dataset(&splits.test, &spec.ratios)?;
    let paths = write_experiment_files(&a.out, &splits, &datasets)?;
    println!(
        "train {}  val {}  test {}  skipped {skipped}",
        splits.train.len(),
        splits.val.len(),
        splits.test.len()
    );
    for (d, p) in datasets.iter().zip(&paths) {
        println!("r={:.2}  {} instances  {}", d.ratio, d.records.len(), p.display());
    }
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<()> {
    let vocab = Vocabulary::load(&a.models.join("vocab.json"))?;
    let fwd = load_scorer(&a.models.join("forward.json"))?;
    let bwd = load_scorer(&a.models.join("backward.json"))?;
    if fwd.vocab_size() != vocab.len() {
        bail!("model vocabulary size {} does not match vocab.json ({})", fwd.vocab_size(), vocab.len());
    }
    let records = read_dataset(&a.dataset)?;
    let mut config = DecodeConfig::new(a.beam, a.iters)?.with_init_direction(match a.init_direction {
        DirectionArg::Forward => Direction::Forward,
        DirectionArg::Backward => Direction::Backward,
    });
    if a.fixed_iters {
        config = config.with_convergence(Convergence::FixedM);
    }
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let job = DecodeJob {
        vocab: &vocab,
        forward: &fwd,
        backward: &bwd,
        config: &config,
        seed: a.seed,
        nbest: a.nbest,
    };
    log::info!("decoding {} instances with {} on {jobs} threads", records.len(), a.algo);
    let outcomes = job.decode_all(std::slice::from_ref(&a.algo), &records, jobs)?;
    let mut out = String::new();
    let mut failures = 0;
    for o in &outcomes {
        failures += usize::from(o.record.is_failure());
        writeln!(out, "{}", serde_json::to_string(&o.record)?)?;
    }
    write_file(&a.out, &out)?;
    println!("{} instances  {failures} failures  {}", outcomes.len(), a.out.display());
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.results).with_context(|| format!("reading {}", a.results.display()))?;
    let records: Vec<ResultRecord> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{} line {}", a.results.display(), i + 1)))
        .collect::<Result<_>>()?;
    let dataset = read_dataset(&a.dataset)?;
    let refs = a.cider_corpus.as_deref().map(load_corpus).transpose()?;
    let report = evaluate(&records, &dataset, refs.as_deref(), None)?;
    print!("{}", report.table());
    if let Some(out) = &a.out {
        write_file(out, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let rows = step_count_suite(&a.beams, &a.iters, &a.widths, a.seed)?;
    print!("{}", format_step_table(&rows));
    let bad = rows.iter().filter(|r| !r.matches()).count();
    if let Some(out) = &a.out {
        write_file(out, &serde_json::to_string_pretty(&rows)?)?;
    }
    if bad > 0 {
        bail!("{bad} configurations deviate from 2*B*M*w");
    }
    println!("all {} configurations match 2*B*M*w", rows.len());
    Ok(())
}
