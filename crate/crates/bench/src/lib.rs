//! Shared fixtures for the decoder benchmarks.

use bibs_core::fitb::{parse_corpus, synth, train_ngram, ModelSpec};
use bibs_core::scorers::NGramModel;
use bibs_core::{BlankedInstance, Vocabulary};

/// Trigram models trained on a seeded synthetic caption corpus, plus a
/// handful of blanked captions at the given ratio.
pub struct Fixture {
    pub vocab: Vocabulary,
    pub forward: NGramModel,
    pub backward: NGramModel,
    pub instances: Vec<BlankedInstance>,
}

pub fn fixture(ratio: f64, instances: usize) -> Fixture {
    let sentences = parse_corpus(&synth::synth_corpus(2000 + instances, 3).join("\n"));
    let (train, test) = sentences.split_at(2000);
    let (vocab, forward, backward) = train_ngram(train, ModelSpec::default()).expect("synthetic corpus trains");
    let (datasets, _) = bibs_core::fitb::generate_dataset(test, &[ratio]).expect("test split blanks");
    let instances = datasets[0]
        .records
        .iter()
        .map(|r| r.to_instance(&vocab).expect("vocabulary covers the synthetic corpus"))
        .collect();
    Fixture {
        vocab,
        forward,
        backward,
        instances,
    }
}
