use std::sync::atomic::{AtomicU64, Ordering};

use super::Scorer;
use crate::error::Result;
use crate::seqcore::{Direction, TokenId};

/// Wraps a scorer and counts `advance` calls. Everything else is forwarded
/// untouched.
#[derive(Debug)]
pub struct Instrumented<S> {
    inner: S,
    advances: AtomicU64,
}

impl<S: Scorer> Instrumented<S> {
    pub fn new(inner: S) -> Self {
        Instrumented {
            inner,
            advances: AtomicU64::new(0),
        }
    }

    pub fn advances(&self) -> u64 {
        self.advances.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.advances.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    pub fn into_inner(self) -> S {
        self.inner
    }
}

impl<S: Scorer> Scorer for Instrumented<S> {
    type State = S::State;

    fn direction(&self) -> Direction {
        self.inner.direction()
    }

    fn vocab_size(&self) -> usize {
        self.inner.vocab_size()
    }

    fn initial_state(&self, conditioning: Option<&[f64]>) -> Result<S::State> {
        self.inner.initial_state(conditioning)
    }

    fn advance(&self, state: &S::State, token: TokenId) -> Result<S::State> {
        self.advances.fetch_add(1, Ordering::Relaxed);
        self.inner.advance(state, token)
    }

    fn log_distribution(&self, state: &S::State) -> Result<Vec<f64>> {
        self.inner.log_distribution(state)
    }
}
