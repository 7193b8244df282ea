//! Experiment harness: corpus splits, blanked datasets, batch decoding and
//! metric reports.

mod complexity;
mod experiment;
mod report;
mod run;
pub mod synth;

use std::path::Path;

pub use complexity::{format_step_table, step_count_suite, StepCountRow};
pub use experiment::{
    dataset_file_name, generate_dataset, instance_id, load_corpus, parse_corpus, ratio_of_id, split_corpus,
    write_experiment_files, ExperimentSpec, ModelSpec, RatioDataset, SplitSizes, Splits,
};
pub use report::{evaluate, ReportRow, RunReport};
pub use run::{instance_seed, DecodeJob, Outcome};

use crate::decode::ResultRecord;
use crate::error::Result;
use crate::scorers::{ngram_train, NGramModel};
use crate::seqcore::{build_vocabulary, Vocabulary};

/// Everything an experiment run produced.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub vocab: Vocabulary,
    pub datasets: Vec<RatioDataset>,
    pub outcomes: Vec<Outcome>,
    pub report: RunReport,
}

impl Experiment {
    pub fn records(&self) -> Vec<ResultRecord> {
        self.outcomes.iter().map(|o| o.record.clone()).collect()
    }
}

/// Trains forward and backward n-gram models on tokenized sentences.
pub fn train_ngram(sentences: &[Vec<String>], model: ModelSpec) -> Result<(Vocabulary, NGramModel, NGramModel)> {
    let vocab = build_vocabulary(sentences.iter().flatten(), 1)?;
    let ids: Vec<_> = sentences.iter().map(|s| vocab.encode(s)).collect();
    let (f, b) = ngram_train(&ids, model.order, model.smoothing, vocab.len())?;
    Ok((vocab, f, b))
}

/// Runs the full grid of `spec` on already tokenized sentences: split,
/// train n-gram models on the train split, blank the test split, decode
/// with every algorithm and evaluate.
pub fn run_experiment_on(sentences: &[Vec<String>], spec: &ExperimentSpec, jobs: usize) -> Result<Experiment> {
    spec.validate()?;
    let splits = split_corpus(sentences, spec.splits, spec.seed)?;
    let (vocab, forward, backward) = train_ngram(&splits.train, spec.model)?;
    let (datasets, _) = generate_dataset(&splits.test, &spec.ratios)?;
    let job = DecodeJob {
        vocab: &vocab,
        forward: &forward,
        backward: &backward,
        config: &spec.config,
        seed: spec.seed,
        nbest: 1,
    };
    let all: Vec<_> = datasets.iter().flat_map(|d| d.records.iter().cloned()).collect();
    let outcomes = job.decode_all(&spec.algorithms, &all, jobs)?;
    let records: Vec<ResultRecord> = outcomes.iter().map(|o| o.record.clone()).collect();
    let wall: Vec<f64> = outcomes.iter().map(|o| o.wall_ms).collect();
    let report = evaluate(&records, &all, Some(&splits.test), Some(&wall))?;
    Ok(Experiment {
        vocab,
        datasets,
        outcomes,
        report,
    })
}

/// [`run_experiment_on`] with the corpus read from `spec.corpus`.
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Result<Experiment> {
    let sentences = load_corpus(Path::new(&spec.corpus))?;
    run_experiment_on(&sentences, spec, jobs)
}
