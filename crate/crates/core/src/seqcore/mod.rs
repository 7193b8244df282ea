//! Domain types shared by every other module.

mod beam;
mod blank;
mod config;
mod dataset;
mod vocab;

pub use beam::{rank_order, Beam, BeamSet};
pub use blank::{make_blank, BlankSpec, BlankedInstance, Centering};
pub use config::{Convergence, DecodeConfig, Direction};
pub use dataset::{read_dataset, write_dataset, FitbRecord};
pub use vocab::{build_vocabulary, tokenize, Vocabulary, VocabularyFile};

use std::ops::Deref;

use serde::{Deserialize, Serialize};

/// Dense token id into a [`Vocabulary`].
pub type TokenId = u32;

/// Sequence start framing token.
pub const BOS: TokenId = 0;
/// Sequence end framing token.
pub const EOS: TokenId = 1;
/// Out-of-vocabulary token.
pub const UNK: TokenId = 2;

/// Number of reserved sentinel ids at the front of every vocabulary.
pub const NUM_SENTINELS: usize = 3;

pub fn is_sentinel(id: TokenId) -> bool {
    (id as usize) < NUM_SENTINELS
}

/// A token sequence without BOS/EOS framing.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<TokenId>);

impl TokenSequence {
    pub fn new(ids: Vec<TokenId>) -> Self {
        TokenSequence(ids)
    }

    pub fn empty() -> Self {
        TokenSequence(Vec::new())
    }

    pub fn into_inner(self) -> Vec<TokenId> {
        self.0
    }

    pub fn as_slice(&self) -> &[TokenId] {
        &self.0
    }

    /// Checks every id against a vocabulary of `size` entries.
    pub fn validate(&self, size: usize) -> crate::Result<()> {
        match self.0.iter().find(|&&id| id as usize >= size) {
            Some(&id) => Err(crate::Error::TokenOutOfRange { id, size }),
            None => Ok(()),
        }
    }

    /// Concatenates `self ++ middle ++ tail`.
    pub fn assemble(&self, middle: &[TokenId], tail: &[TokenId]) -> TokenSequence {
        let mut ids = Vec::with_capacity(self.0.len() + middle.len() + tail.len());
        ids.extend_from_slice(&self.0);
        ids.extend_from_slice(middle);
        ids.extend_from_slice(tail);
        TokenSequence(ids)
    }
}

impl Deref for TokenSequence {
    type Target = [TokenId];

    fn deref(&self) -> &[TokenId] {
        &self.0
    }
}

impl From<Vec<TokenId>> for TokenSequence {
    fn from(ids: Vec<TokenId>) -> Self {
        TokenSequence(ids)
    }
}

impl From<&[TokenId]> for TokenSequence {
    fn from(ids: &[TokenId]) -> Self {
        TokenSequence(ids.to_vec())
    }
}

impl FromIterator<TokenId> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = TokenId>>(iter: I) -> Self {
        TokenSequence(iter.into_iter().collect())
    }
}
