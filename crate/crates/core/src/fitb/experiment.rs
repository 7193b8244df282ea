use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decode::Algorithm;
use crate::error::{Error, Result};
use crate::seqcore::{make_blank, tokenize, BlankSpec, DecodeConfig, FitbRecord, Vocabulary};
use crate::util;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// N-gram settings used when an experiment trains its own models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    pub order: usize,
    pub smoothing: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            order: 3,
            smoothing: 0.1,
        }
    }
}

/// One experiment grid: corpus, splits, blank ratios and decoders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Relative paths are resolved against the spec file's directory.
    pub corpus: PathBuf,
    pub splits: SplitSizes,
    pub ratios: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub config: DecodeConfig,
    pub seed: u64,
    #[serde(default)]
    pub model: ModelSpec,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ratios.is_empty() {
            return Err(Error::InvalidArgument("experiment needs at least one blank ratio".into()));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::InvalidArgument(format!("blank ratio {r} outside (0, 1)")));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidArgument("experiment needs at least one algorithm".into()));
        }
        if self.splits.test == 0 {
            return Err(Error::InvalidArgument("test split is empty".into()));
        }
        self.config.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = util::read_to_string(path)?;
        let mut spec: ExperimentSpec =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        if spec.corpus.is_relative() {
            if let Some(dir) = path.parent() {
                spec.corpus = dir.join(&spec.corpus);
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Disjoint train/val/test partitions of a tokenized corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<Vec<String>>,
    pub val: Vec<Vec<String>>,
    pub test: Vec<Vec<String>>,
}

/// Reads a corpus with one sentence per line; blank lines are dropped.
pub fn load_corpus(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = util::read_to_string(path)?;
    Ok(parse_corpus(&text))
}

pub fn parse_corpus(text: &str) -> Vec<Vec<String>> {
    text.lines().map(tokenize).filter(|s| !s.is_empty()).collect()
}

/// Shuffles sentence indices with `seed` and cuts consecutive train, val
/// and test ranges.
pub fn split_corpus(sentences: &[Vec<String>], sizes: SplitSizes, seed: u64) -> Result<Splits> {
    let need = sizes.train + sizes.val + sizes.test;
    if need > sentences.len() {
        return Err(Error::InvalidArgument(format!(
            "splits need {need} sentences but the corpus has {}",
            sentences.len()
        )));
    }
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let take = |r: std::ops::Range<usize>| order[r].iter().map(|&i| sentences[i].clone()).collect();
    Ok(Splits {
        train: take(0..sizes.train),
        val: take(sizes.train..sizes.train + sizes.val),
        test: take(sizes.train + sizes.val..need),
    })
}

/// `r0.50-000012`: blank ratio and sentence index.
pub fn instance_id(ratio: f64, index: usize) -> String {
    format!("r{ratio:.2}-{index:06}")
}

/// Ratio encoded in an [`instance_id`], if the id has that shape.
pub fn ratio_of_id(id: &str) -> Option<f64> {
    let (head, _) = id.split_once('-')?;
    head.strip_prefix('r')?.parse().ok()
}

pub fn dataset_file_name(ratio: f64) -> String {
    format!("fitb-r{ratio:.2}.jsonl")
}

/// Blanked test sentences for one ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioDataset {
    pub ratio: f64,
    pub records: Vec<FitbRecord>,
}

/// One blanked instance per test sentence per ratio. Sentences shorter than
/// two tokens are skipped; the number skipped is returned alongside.
pub fn generate_dataset(test: &[Vec<String>], ratios: &[f64]) -> Result<(Vec<RatioDataset>, usize)> {
    let types: BTreeSet<&str> = test.iter().flatten().map(String::as_str).collect();
    if types.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let vocab = Vocabulary::from_content(types)?;
    let skipped = test.iter().filter(|s| s.len() < 2).count();
    if skipped > 0 {
        log::info!("skipped {skipped} sentences shorter than 2 tokens");
    }
    let mut out = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let spec = BlankSpec::new(ratio)?;
        let mut records = Vec::new();
        for (i, sentence) in test.iter().enumerate().filter(|(_, s)| s.len() >= 2) {
            let inst = make_blank(instance_id(ratio, i), &vocab.encode(sentence), &spec)?;
            records.push(FitbRecord::from_instance(&inst, &vocab));
        }
        out.push(RatioDataset { ratio, records });
    }
    Ok((out, skipped))
}

/// Writes each split as plain text and each ratio's dataset as JSON Lines
/// into `dir`. Returns the dataset paths.
pub fn write_experiment_files(dir: &Path, splits: &Splits, datasets: &[RatioDataset]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, part) in [("train.txt", &splits.train), ("val.txt", &splits.val), ("test.txt", &splits.test)] {
        let mut text = String::new();
        for s in part {
            text.push_str(&s.join(" "));
            text.push('\n');
        }
        util::write_atomic(&dir.join(name), text.as_bytes())?;
    }
    let mut paths = Vec::with_capacity(datasets.len());
    for d in datasets {
        let path = dir.join(dataset_file_name(d.ratio));
        crate::seqcore::write_dataset(&path, &d.records)?;
        paths.push(path);
    }
    Ok(paths)
}
