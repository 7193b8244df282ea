use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_token, Scorer};
use crate::error::{Error, Result};
use crate::seqcore::{Direction, TokenId, TokenSequence, BOS, EOS};
use crate::util;

const NGRAM_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq)]
struct ContextCounts {
    total: u64,
    counts: HashMap<TokenId, u64>,
}

/// Add-k smoothed n-gram model over a dense vocabulary.
///
/// Sentences are framed as `BOS^(n-1) y_1 .. y_T EOS` in consumption order;
/// a backward model is the same thing trained on reversed sentences.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    k: f64,
    direction: Direction,
    vocab_size: usize,
    vocabulary: String,
    contexts: HashMap<Vec<TokenId>, ContextCounts>,
}

/// The last `n - 1` consumed ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NGramState(Vec<TokenId>);

impl NGramState {
    pub fn context(&self) -> &[TokenId] {
        &self.0
    }
}

/// Trains the forward and backward models of order `n` with add-`k`
/// smoothing on the same corpus.
pub fn ngram_train(
    corpus: &[TokenSequence],
    n: usize,
    k: f64,
    vocab_size: usize,
) -> Result<(NGramModel, NGramModel)> {
    if n == 0 {
        return Err(Error::InvalidArgument("n-gram order must be >= 1".into()));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!("smoothing constant {k} must be > 0")));
    }
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    for s in corpus {
        s.validate(vocab_size)?;
    }
    let mut fwd = NGramModel::empty(n, k, Direction::Forward, vocab_size);
    let mut bwd = NGramModel::empty(n, k, Direction::Backward, vocab_size);
    for s in corpus {
        fwd.count_sentence(s.iter().copied());
        bwd.count_sentence(s.iter().rev().copied());
    }
    Ok((fwd, bwd))
}

impl NGramModel {
    fn empty(order: usize, k: f64, direction: Direction, vocab_size: usize) -> Self {
        NGramModel {
            order,
            k,
            direction,
            vocab_size,
            vocabulary: "vocab.json".to_string(),
            contexts: HashMap::new(),
        }
    }

    /// Trains a single model on sentences given in consumption order.
    pub fn train_directional(
        corpus: &[TokenSequence],
        n: usize,
        k: f64,
        vocab_size: usize,
        direction: Direction,
    ) -> Result<Self> {
        let (fwd, _) = ngram_train(corpus, n, k, vocab_size)?;
        Ok(NGramModel { direction, ..fwd })
    }

    fn count_sentence(&mut self, tokens: impl Iterator<Item = TokenId>) {
        let mut ctx = vec![BOS; self.order - 1];
        for tok in tokens.chain(std::iter::once(EOS)) {
            let entry = self.contexts.entry(ctx.clone()).or_default();
            entry.total += 1;
            *entry.counts.entry(tok).or_default() += 1;
            if !ctx.is_empty() {
                ctx.remove(0);
                ctx.push(tok);
            }
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> f64 {
        self.k
    }

    /// Raw count of `token` after `context`, 0 when unseen.
    pub fn count(&self, context: &[TokenId], token: TokenId) -> u64 {
        self.contexts
            .get(context)
            .and_then(|c| c.counts.get(&token))
            .copied()
            .unwrap_or(0)
    }

    pub fn context_count(&self, context: &[TokenId]) -> u64 {
        self.contexts.get(context).map_or(0, |c| c.total)
    }

    pub fn max_context_count(&self) -> u64 {
        self.contexts.values().map(|c| c.total).max().unwrap_or(0)
    }

    /// Stored contexts (each of length `n - 1`).
    pub fn contexts(&self) -> impl Iterator<Item = &[TokenId]> {
        self.contexts.keys().map(Vec::as_slice)
    }

    /// `(count + k) / (context_count + k * |V|)`.
    pub fn prob(&self, context: &[TokenId], token: TokenId) -> f64 {
        let denom = self.context_count(context) as f64 + self.k * self.vocab_size as f64;
        (self.count(context, token) as f64 + self.k) / denom
    }

    pub fn set_vocabulary_ref(&mut self, name: impl Into<String>) {
        self.vocabulary = name.into();
    }

    pub fn to_file(&self) -> NGramFile {
        let contexts = self
            .contexts
            .iter()
            .map(|(ctx, cc)| {
                let key = ctx.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
                let counts = cc.counts.iter().map(|(t, c)| (t.to_string(), *c)).collect();
                (key, counts)
            })
            .collect();
        NGramFile {
            version: NGRAM_VERSION,
            n: self.order,
            k: self.k,
            direction: self.direction,
            vocab_size: self.vocab_size,
            vocabulary: self.vocabulary.clone(),
            contexts,
        }
    }

    pub fn from_file(file: NGramFile) -> Result<Self> {
        if file.version != NGRAM_VERSION {
            return Err(Error::Version {
                found: file.version,
                expected: NGRAM_VERSION,
            });
        }
        if file.n == 0 || file.k.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidArgument("n-gram file needs n >= 1 and k > 0".into()));
        }
        let mut contexts = HashMap::with_capacity(file.contexts.len());
        for (key, counts) in file.contexts {
            let ctx = parse_ids(&key)?;
            if ctx.len() != file.n - 1 {
                return Err(Error::Shape(format!(
                    "context {key:?} has length {} but order {} needs {}",
                    ctx.len(),
                    file.n,
                    file.n - 1
                )));
            }
            let mut cc = ContextCounts::default();
            for (tok, c) in counts {
                let tok: TokenId = tok
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad token id {tok:?}")))?;
                check_token(tok, file.vocab_size)?;
                if c == 0 {
                    return Err(Error::InvalidArgument("stored counts must be >= 1".into()));
                }
                cc.total += c;
                cc.counts.insert(tok, c);
            }
            for &t in &ctx {
                check_token(t, file.vocab_size)?;
            }
            contexts.insert(ctx, cc);
        }
        Ok(NGramModel {
            order: file.n,
            k: file.k,
            direction: file.direction,
            vocab_size: file.vocab_size,
            vocabulary: file.vocabulary,
            contexts,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json =
            serde_json::to_vec(&self.to_file()).map_err(|e| Error::json("n-gram model", e))?;
        util::write_atomic(path, &json)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = util::read_to_string(path)?;
        let file: NGramFile =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        Self::from_file(file)
    }
}

fn parse_ids(key: &str) -> Result<Vec<TokenId>> {
    key.split_whitespace()
        .map(|s| {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad context key {key:?}")))
        })
        .collect()
}

/// On-disk n-gram model. Context keys are space-joined id strings; the
/// empty string is the empty context of a unigram model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NGramFile {
    pub version: u32,
    pub n: usize,
    pub k: f64,
    pub direction: Direction,
    pub vocab_size: usize,
    pub vocabulary: String,
    pub contexts: BTreeMap<String, BTreeMap<String, u64>>,
}

impl Scorer for NGramModel {
    type State = NGramState;

    fn direction(&self) -> Direction {
        self.direction
    }

    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn initial_state(&self, _conditioning: Option<&[f64]>) -> Result<NGramState> {
        Ok(NGramState(vec![BOS; self.order - 1]))
    }

    fn advance(&self, state: &NGramState, token: TokenId) -> Result<NGramState> {
        check_token(token, self.vocab_size)?;
        if self.order == 1 {
            return Ok(NGramState(Vec::new()));
        }
        let mut ctx = Vec::with_capacity(self.order - 1);
        ctx.extend_from_slice(&state.0[1..]);
        ctx.push(token);
        Ok(NGramState(ctx))
    }

    fn log_distribution(&self, state: &NGramState) -> Result<Vec<f64>> {
        let v = self.vocab_size as f64;
        match self.contexts.get(&state.0) {
            None => Ok(vec![-v.ln(); self.vocab_size]),
            Some(cc) => {
                let log_denom = (cc.total as f64 + self.k * v).ln();
                let base = self.k.ln() - log_denom;
                let mut out = vec![base; self.vocab_size];
                for (&tok, &c) in &cc.counts {
                    out[tok as usize] = (c as f64 + self.k).ln() - log_denom;
                }
                Ok(out)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::scorers::testing::normalization_error;

    fn seq(ids: &[TokenId]) -> TokenSequence {
        ids.to_vec().into()
    }

    #[test]
    fn single_transition_corpus_approaches_certainty() {
        // "a a a" with a = 3
        let (fwd, _) = ngram_train(&[seq(&[3, 3, 3])], 2, 1e-9, 4).unwrap();
        let p = fwd.prob(&[3], 3);
        // two of the three transitions out of "a" go to "a", the last to EOS
        assert!((p - 2.0 / 3.0).abs() < 1e-6);
        let (fwd, _) = ngram_train(&[seq(&[3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3])], 2, 1e-12, 4).unwrap();
        assert!(fwd.prob(&[3], 3) > 0.9);
        // a single "a a" transition with no EOS competition
        let (fwd, _) = ngram_train(&[seq(&[3, 3])], 3, 1e-12, 4).unwrap();
        assert!((fwd.prob(&[3, 3], 1) - 1.0).abs() < 1e-9);
        assert!((fwd.prob(&[BOS, 3], 3) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hand_count_with_add_one() {
        // vocabulary {BOS, EOS, UNK, a, b, c}: a=3, b=4, c=5
        let corpus = [seq(&[3, 4]), seq(&[3, 5])];
        let (fwd, _) = ngram_train(&corpus, 2, 1.0, 6).unwrap();
        assert_eq!(fwd.context_count(&[3]), 2);
        assert!((fwd.prob(&[3], 4) - 2.0 / 8.0).abs() < 1e-15);
        // same counts against a five-entry support
        let (fwd5, _) = ngram_train(&[seq(&[3, 4]), seq(&[3, 4])], 2, 1.0, 5).unwrap();
        assert!((fwd5.prob(&[3], 4) - 3.0 / 7.0).abs() < 1e-15);
        // unseen context falls back to k / (k |V|)
        assert!((fwd.prob(&[4, 4], 3) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn backward_equals_forward_on_reversed_corpus() {
        let (_, bwd) = ngram_train(&[seq(&[3, 4])], 2, 0.5, 5).unwrap();
        let (fwd_rev, _) = ngram_train(&[seq(&[4, 3])], 2, 0.5, 5).unwrap();
        assert_eq!(bwd.direction(), Direction::Backward);
        for c in 0..5 {
            let s = NGramState(vec![c]);
            assert_eq!(bwd.log_distribution(&s).unwrap(), fwd_rev.log_distribution(&s).unwrap());
        }
    }

    #[test]
    fn unigram_has_only_the_empty_context() {
        let (fwd, _) = ngram_train(&[seq(&[3, 4, 3])], 1, 1.0, 5).unwrap();
        let ctxs: Vec<&[TokenId]> = fwd.contexts().collect();
        assert_eq!(ctxs, vec![&[] as &[TokenId]]);
        let file = fwd.to_file();
        assert!(file.contexts.contains_key(""));
    }

    #[test]
    fn errors() {
        assert!(matches!(ngram_train(&[], 2, 1.0, 5), Err(Error::EmptyCorpus)));
        assert!(ngram_train(&[seq(&[3])], 0, 1.0, 5).is_err());
        assert!(ngram_train(&[seq(&[3])], 2, 0.0, 5).is_err());
        assert!(ngram_train(&[seq(&[9])], 2, 1.0, 5).is_err());
    }

    #[test]
    fn file_round_trip() {
        let corpus = [seq(&[3, 4, 5]), seq(&[5, 4])];
        let (fwd, bwd) = ngram_train(&corpus, 3, 0.25, 6).unwrap();
        for m in [fwd, bwd] {
            let json = serde_json::to_string(&m.to_file()).unwrap();
            let back = NGramModel::from_file(serde_json::from_str(&json).unwrap()).unwrap();
            assert_eq!(back, m);
        }
        let mut bad = ngram_train(&corpus, 2, 1.0, 6).unwrap().0.to_file();
        bad.contexts.insert("1 2".into(), BTreeMap::new());
        assert!(NGramModel::from_file(bad).is_err());
    }

    proptest! {
        #[test]
        fn distributions_normalize_and_stay_positive(
            sents in proptest::collection::vec(proptest::collection::vec(3u32..8, 0..6), 1..6),
            n in 1usize..4,
            k in 0.01f64..2.0,
            ctx in proptest::collection::vec(0u32..8, 3),
        ) {
            let corpus: Vec<TokenSequence> = sents.into_iter().map(TokenSequence::new).collect();
            let (fwd, bwd) = ngram_train(&corpus, n, k, 8).unwrap();
            let floor = k / (fwd.max_context_count() as f64 + k * 8.0);
            for m in [&fwd, &bwd] {
                let state = NGramState(ctx[..n - 1].to_vec());
                let lp = m.log_distribution(&state).unwrap();
                prop_assert!(normalization_error(&lp) < 1e-9);
                prop_assert!(lp.iter().all(|&x| x.exp() >= floor * (1.0 - 1e-12)));
            }
        }

        #[test]
        fn advancing_does_not_mutate(ctx in proptest::collection::vec(0u32..6, 2), a in 0u32..6, b in 0u32..6) {
            let (fwd, _) = ngram_train(&[seq(&[3, 4, 5])], 3, 1.0, 6).unwrap();
            let origin = NGramState(ctx);
            let sa = fwd.advance(&origin, a).unwrap();
            let sb = fwd.advance(&origin, b).unwrap();
            let sb2 = fwd.advance(&origin, b).unwrap();
            let sa2 = fwd.advance(&origin, a).unwrap();
            prop_assert_eq!(sa, sa2);
            prop_assert_eq!(sb, sb2);
        }
    }
}
