use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use super::ngrams::{NGramStats, MAX_ORDER};
use crate::error::{Error, Result};

/// Document frequencies of 1- to 4-grams over a reference corpus. Each
/// reference set (all captions of one item) is one document.
#[derive(Debug, Clone)]
pub struct CiderCorpus<T: Hash + Eq> {
    size: usize,
    df: Vec<HashMap<Vec<T>, usize>>,
}

impl<T: Hash + Eq + Clone> CiderCorpus<T> {
    pub fn new<R, RS>(reference_sets: &[RS]) -> Result<Self>
    where
        R: AsRef<[T]>,
        RS: AsRef<[R]>,
    {
        if reference_sets.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut df: Vec<HashMap<Vec<T>, usize>> = vec![HashMap::new(); MAX_ORDER];
        for set in reference_sets {
            for n in 1..=MAX_ORDER {
                let seen: HashSet<&[T]> = set.as_ref().iter().flat_map(|r| r.as_ref().windows(n)).collect();
                for g in seen {
                    *df[n - 1].entry(g.to_vec()).or_default() += 1;
                }
            }
        }
        Ok(CiderCorpus {
            size: reference_sets.len(),
            df,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn document_frequency(&self, gram: &[T]) -> usize {
        if gram.is_empty() || gram.len() > MAX_ORDER {
            return 0;
        }
        self.df[gram.len() - 1].get(gram).copied().unwrap_or(0)
    }

    /// `ln((N + 1) / max(df, 1))`; stays positive even for n-grams that
    /// occur in every document.
    pub fn idf(&self, gram: &[T]) -> f64 {
        ((self.size as f64 + 1.0) / self.document_frequency(gram).max(1) as f64).ln()
    }

    fn vector(&self, stats: &NGramStats<T>, n: usize) -> HashMap<Vec<T>, f64> {
        stats
            .order(n)
            .iter()
            .map(|(g, &c)| (g.clone(), c as f64 * self.idf(g)))
            .collect()
    }
}

fn cosine<T: Hash + Eq>(a: &HashMap<Vec<T>, f64>, b: &HashMap<Vec<T>, f64>) -> f64 {
    let na = a.values().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.values().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().filter_map(|(g, v)| b.get(g).map(|w| v * w)).sum();
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// CIDEr: ten times the mean over n = 1..4 of the average TF-IDF cosine
/// between the candidate and each reference.
///
/// # Panics
/// If `references` is empty.
pub fn cider<T, R>(candidate: &[T], references: &[R], corpus: &CiderCorpus<T>) -> f64
where
    T: Hash + Eq + Clone,
    R: AsRef<[T]>,
{
    assert!(!references.is_empty(), "cider needs at least one reference");
    if candidate.is_empty() {
        return 0.0;
    }
    let cand = NGramStats::new(candidate);
    let refs: Vec<NGramStats<T>> = references.iter().map(|r| NGramStats::new(r.as_ref())).collect();
    let mut total = 0.0;
    for n in 1..=MAX_ORDER {
        let cv = corpus.vector(&cand, n);
        let sum: f64 = refs.iter().map(|r| cosine(&cv, &corpus.vector(r, n))).sum();
        total += sum / refs.len() as f64;
    }
    10.0 * total / MAX_ORDER as f64
}
