//! Bidirectional beam search (BiBS) for fill-in-the-blank sequence completion.
//!
//! The crate is organised around one seam: the [`scorers::Scorer`] trait, a
//! directional conditional distribution provider. Every decoder in
//! [`decode`] consumes a forward and a backward scorer through that trait,
//! so n-gram models, Elman RNNs and instrumented wrappers are interchangeable.
//!
//! * [`seqcore`] holds the shared domain types (vocabulary, blanked
//!   instances, beams, decode configuration).
//! * [`scorers`] provides the n-gram and RNN backends, the bidirectional
//!   softmax combiner and a step-counting wrapper.
//! * [`decode`] implements beam search, BiBS, ordered GSN sampling, the
//!   forward/backward rerank baselines, the exhaustive oracle and the
//!   unknown-length wrapper.
//! * [`metrics`] implements BLEU and CIDEr.
//! * [`fitb`] is the experiment harness: dataset generation, batch decoding
//!   and report aggregation.

pub mod decode;
pub mod error;
pub mod fitb;
pub mod metrics;
pub mod scorers;
pub mod seqcore;
mod util;

pub use error::{Error, Result};
pub use util::write_atomic;
pub use seqcore::{
    BlankSpec, BlankedInstance, Beam, BeamSet, Convergence, DecodeConfig, Direction, TokenId,
    TokenSequence, Vocabulary,
};
