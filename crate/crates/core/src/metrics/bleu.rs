use std::collections::HashMap;
use std::hash::Hash;

use super::ngrams::{NGramStats, MAX_ORDER};

/// Clipped match and candidate totals per order, plus the lengths the
/// brevity penalty needs. Adding these up over sentences gives corpus BLEU.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BleuCounts {
    pub matched: [usize; MAX_ORDER],
    pub total: [usize; MAX_ORDER],
    pub cand_len: usize,
    pub ref_len: usize,
}

impl BleuCounts {
    pub fn new<T, R>(candidate: &[T], references: &[R]) -> Self
    where
        T: Hash + Eq + Clone,
        R: AsRef<[T]>,
    {
        let cand = NGramStats::new(candidate);
        let refs: Vec<NGramStats<T>> = references.iter().map(|r| NGramStats::new(r.as_ref())).collect();
        let mut out = BleuCounts {
            cand_len: candidate.len(),
            ref_len: closest_length(candidate.len(), references.iter().map(|r| r.as_ref().len())),
            ..Default::default()
        };
        for n in 1..=MAX_ORDER {
            let mut max_ref: HashMap<&Vec<T>, usize> = HashMap::new();
            for r in &refs {
                for (g, &c) in r.order(n) {
                    let e = max_ref.entry(g).or_default();
                    *e = (*e).max(c);
                }
            }
            out.matched[n - 1] = cand
                .order(n)
                .iter()
                .map(|(g, &c)| c.min(max_ref.get(g).copied().unwrap_or(0)))
                .sum();
            out.total[n - 1] = cand.total(n);
        }
        out
    }

    pub fn add(&mut self, other: &BleuCounts) {
        for i in 0..MAX_ORDER {
            self.matched[i] += other.matched[i];
            self.total[i] += other.total[i];
        }
        self.cand_len += other.cand_len;
        self.ref_len += other.ref_len;
    }

    /// BLEU-`max_n` from these counts. Orders with no candidate n-grams at
    /// all are left out of the geometric mean; a zero clipped precision
    /// makes the score 0.
    pub fn score(&self, max_n: usize) -> f64 {
        assert!((1..=MAX_ORDER).contains(&max_n), "max_n must be in 1..=4");
        if self.cand_len == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        let mut levels = 0;
        for i in 0..max_n {
            if self.total[i] == 0 {
                continue;
            }
            if self.matched[i] == 0 {
                return 0.0;
            }
            log_sum += (self.matched[i] as f64 / self.total[i] as f64).ln();
            levels += 1;
        }
        let bp = (1.0 - self.ref_len as f64 / self.cand_len as f64).min(0.0).exp();
        bp * (log_sum / levels as f64).exp()
    }
}

/// Reference length closest to `cand_len`, the shorter one on ties.
fn closest_length(cand_len: usize, lens: impl Iterator<Item = usize>) -> usize {
    lens.min_by_key(|&l| (l.abs_diff(cand_len), l)).unwrap_or(0)
}

/// Sentence-level BLEU-`max_n` without smoothing.
///
/// # Panics
/// If `references` is empty or `max_n` is outside `1..=4`.
pub fn bleu<T, R>(candidate: &[T], references: &[R], max_n: usize) -> f64
where
    T: Hash + Eq + Clone,
    R: AsRef<[T]>,
{
    assert!(!references.is_empty(), "bleu needs at least one reference");
    BleuCounts::new(candidate, references).score(max_n)
}

/// Corpus-level BLEU: clipped counts and lengths pooled over all pairs
/// before taking precisions.
pub fn corpus_bleu<T, R, RS>(pairs: &[(&[T], RS)], max_n: usize) -> f64
where
    T: Hash + Eq + Clone,
    R: AsRef<[T]>,
    RS: AsRef<[R]>,
{
    let mut acc = BleuCounts::default();
    for (cand, refs) in pairs {
        acc.add(&BleuCounts::new(cand, refs.as_ref()));
    }
    acc.score(max_n)
}
