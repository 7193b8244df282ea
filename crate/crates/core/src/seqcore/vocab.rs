use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{TokenId, TokenSequence, BOS, EOS, NUM_SENTINELS, UNK};
use crate::error::{Error, Result};
use crate::util;

pub const BOS_TOKEN: &str = "<s>";
pub const EOS_TOKEN: &str = "</s>";
pub const UNK_TOKEN: &str = "<unk>";

const VOCAB_VERSION: u32 = 1;

/// Bijection between surface tokens and dense ids `0..len()`.
///
/// Ids 0, 1 and 2 are always BOS, EOS and UNK; content tokens follow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

/// On-disk vocabulary layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VocabularyFile {
    pub version: u32,
    pub tokens: Vec<String>,
    pub bos: TokenId,
    pub eos: TokenId,
    pub unk: TokenId,
}

impl Vocabulary {
    /// Builds a vocabulary from content tokens in the given order.
    /// Duplicates and sentinel spellings are rejected.
    pub fn from_content<I, S>(content: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut tokens = vec![
            BOS_TOKEN.to_string(),
            EOS_TOKEN.to_string(),
            UNK_TOKEN.to_string(),
        ];
        tokens.extend(content.into_iter().map(Into::into));
        Self::from_tokens(tokens)
    }

    fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < NUM_SENTINELS + 1 {
            return Err(Error::InvalidArgument(format!(
                "vocabulary needs at least one content token (got {} entries)",
                tokens.len()
            )));
        }
        if tokens[BOS as usize] != BOS_TOKEN
            || tokens[EOS as usize] != EOS_TOKEN
            || tokens[UNK as usize] != UNK_TOKEN
        {
            return Err(Error::InvalidArgument(
                "vocabulary must start with <s>, </s>, <unk>".into(),
            ));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            if index.insert(tok.clone(), i as TokenId).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate token {tok:?}")));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of non-sentinel tokens.
    pub fn content_len(&self) -> usize {
        self.tokens.len() - NUM_SENTINELS
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    /// Maps a token to its id, falling back to UNK.
    pub fn id_or_unk(&self, token: &str) -> TokenId {
        self.id(token).unwrap_or(UNK)
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Ids of content tokens, in id order.
    pub fn content_ids(&self) -> impl Iterator<Item = TokenId> + '_ {
        (NUM_SENTINELS as TokenId)..(self.tokens.len() as TokenId)
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> TokenSequence {
        tokens.iter().map(|t| self.id_or_unk(t.as_ref())).collect()
    }

    pub fn decode(&self, ids: &[TokenId]) -> Vec<String> {
        ids.iter()
            .map(|&id| self.token(id).unwrap_or(UNK_TOKEN).to_string())
            .collect()
    }

    pub fn to_file(&self) -> VocabularyFile {
        VocabularyFile {
            version: VOCAB_VERSION,
            tokens: self.tokens.clone(),
            bos: BOS,
            eos: EOS,
            unk: UNK,
        }
    }

    pub fn from_file(file: VocabularyFile) -> Result<Self> {
        if file.version != VOCAB_VERSION {
            return Err(Error::Version {
                found: file.version,
                expected: VOCAB_VERSION,
            });
        }
        if (file.bos, file.eos, file.unk) != (BOS, EOS, UNK) {
            return Err(Error::InvalidArgument(format!(
                "unexpected sentinel indices ({}, {}, {})",
                file.bos, file.eos, file.unk
            )));
        }
        Self::from_tokens(file.tokens)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_vec_pretty(&self.to_file())
            .map_err(|e| Error::json("vocabulary", e))?;
        util::write_atomic(path, &json)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = util::read_to_string(path)?;
        let file: VocabularyFile =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        Self::from_file(file)
    }
}

/// Builds a vocabulary from a token stream, keeping tokens seen at least
/// `min_count` times. Content tokens are ordered by descending frequency,
/// then lexicographically.
pub fn build_vocabulary<I, S>(corpus_tokens: I, min_count: usize) -> Result<Vocabulary>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if min_count == 0 {
        return Err(Error::InvalidArgument("min_count must be >= 1".into()));
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut seen = 0usize;
    for tok in corpus_tokens {
        seen += 1;
        *counts.entry(tok.as_ref().to_string()).or_default() += 1;
    }
    if seen == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut kept: Vec<(String, usize)> = counts
        .into_iter()
        .filter(|(tok, c)| {
            *c >= min_count && tok != BOS_TOKEN && tok != EOS_TOKEN && tok != UNK_TOKEN
        })
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if kept.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no token reaches min_count {min_count}"
        )));
    }
    Vocabulary::from_content(kept.into_iter().map(|(t, _)| t))
}

/// Lowercases, strips sentence-final punctuation and splits on whitespace.
pub fn tokenize(line: &str) -> Vec<String> {
    let lower = line.trim().to_lowercase();
    let stripped = lower.trim_end_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace());
    stripped.split_whitespace().map(str::to_string).collect()
}
