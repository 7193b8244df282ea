//! Directional conditional-probability providers.
//!
//! Every decoder talks to a model through [`Scorer`]: an initial state, an
//! `advance` that returns a fresh state after consuming one token, and the
//! log distribution over the next token. A backward scorer has the same
//! shape; it simply consumes tokens right to left.

mod any;
mod combine;
mod instrumented;
mod ngram;
mod rnn;

use std::fmt::Debug;

pub use any::{load_scorer, AnyScorer, AnyState};
pub use combine::{bidir_combine, combine_masked};
pub use instrumented::Instrumented;
pub use ngram::{ngram_train, NGramFile, NGramModel, NGramState};
pub use rnn::{birnn_output, rnn_step, RnnDims, RnnFile, RnnScorer, RnnWeights};

use crate::error::Result;
use crate::seqcore::{Direction, TokenId};

/// A directional next-token distribution over a fixed vocabulary.
pub trait Scorer: Send + Sync {
    /// Recurrent state. Advancing never mutates an existing state.
    type State: Clone + Debug + Send + Sync;

    fn direction(&self) -> Direction;

    fn vocab_size(&self) -> usize;

    /// State before the first token, optionally conditioned on a dense
    /// vector consumed as step zero.
    fn initial_state(&self, conditioning: Option<&[f64]>) -> Result<Self::State>;

    fn advance(&self, state: &Self::State, token: TokenId) -> Result<Self::State>;

    /// Natural-log probabilities for the next token; exponentiates to 1.
    fn log_distribution(&self, state: &Self::State) -> Result<Vec<f64>>;
}

impl<T: Scorer + ?Sized> Scorer for &T {
    type State = T::State;

    fn direction(&self) -> Direction {
        (**self).direction()
    }

    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }

    fn initial_state(&self, conditioning: Option<&[f64]>) -> Result<Self::State> {
        (**self).initial_state(conditioning)
    }

    fn advance(&self, state: &Self::State, token: TokenId) -> Result<Self::State> {
        (**self).advance(state, token)
    }

    fn log_distribution(&self, state: &Self::State) -> Result<Vec<f64>> {
        (**self).log_distribution(state)
    }
}

pub(crate) fn check_token(token: TokenId, size: usize) -> Result<()> {
    if (token as usize) < size {
        Ok(())
    } else {
        Err(crate::Error::TokenOutOfRange { id: token, size })
    }
}

#[cfg(test)]
pub(crate) mod testing {
    /// |sum(exp) - 1|
    pub fn normalization_error(logp: &[f64]) -> f64 {
        (logp.iter().map(|x| x.exp()).sum::<f64>() - 1.0).abs()
    }
}
