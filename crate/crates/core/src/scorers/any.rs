use std::path::Path;

use super::{NGramFile, NGramModel, NGramState, RnnFile, RnnScorer, Scorer};
use crate::error::{Error, Result};
use crate::seqcore::{Direction, TokenId};
use crate::util;

/// A scorer loaded from disk whose backend is only known at run time.
#[derive(Debug, Clone)]
pub enum AnyScorer {
    NGram(NGramModel),
    Rnn(RnnScorer),
}

#[derive(Debug, Clone)]
pub enum AnyState {
    NGram(NGramState),
    Rnn(Vec<f64>),
}

/// Loads an n-gram or RNN model file, telling them apart by their keys.
pub fn load_scorer(path: &Path) -> Result<AnyScorer> {
    let text = util::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
    let ctx = || path.display().to_string();
    if value.get("dims").is_some() {
        let file: RnnFile = serde_json::from_value(value).map_err(|e| Error::json(ctx(), e))?;
        Ok(AnyScorer::Rnn(RnnScorer::from_file(file)?))
    } else {
        let file: NGramFile = serde_json::from_value(value).map_err(|e| Error::json(ctx(), e))?;
        Ok(AnyScorer::NGram(NGramModel::from_file(file)?))
    }
}

fn mismatch() -> Error {
    Error::InvalidArgument("state does not belong to this scorer backend".into())
}

impl Scorer for AnyScorer {
    type State = AnyState;

    fn direction(&self) -> Direction {
        match self {
            AnyScorer::NGram(m) => m.direction(),
            AnyScorer::Rnn(m) => m.direction(),
        }
    }

    fn vocab_size(&self) -> usize {
        match self {
            AnyScorer::NGram(m) => m.vocab_size(),
            AnyScorer::Rnn(m) => m.vocab_size(),
        }
    }

    fn initial_state(&self, conditioning: Option<&[f64]>) -> Result<AnyState> {
        Ok(match self {
            AnyScorer::NGram(m) => AnyState::NGram(m.initial_state(conditioning)?),
            AnyScorer::Rnn(m) => AnyState::Rnn(m.initial_state(conditioning)?),
        })
    }

    fn advance(&self, state: &AnyState, token: TokenId) -> Result<AnyState> {
        match (self, state) {
            (AnyScorer::NGram(m), AnyState::NGram(s)) => Ok(AnyState::NGram(m.advance(s, token)?)),
            (AnyScorer::Rnn(m), AnyState::Rnn(s)) => Ok(AnyState::Rnn(m.advance(s, token)?)),
            _ => Err(mismatch()),
        }
    }

    fn log_distribution(&self, state: &AnyState) -> Result<Vec<f64>> {
        match (self, state) {
            (AnyScorer::NGram(m), AnyState::NGram(s)) => m.log_distribution(s),
            (AnyScorer::Rnn(m), AnyState::Rnn(s)) => m.log_distribution(s),
            _ => Err(mismatch()),
        }
    }
}
