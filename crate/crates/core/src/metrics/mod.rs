//! BLEU and CIDEr over token sequences of any hashable token type.

mod bleu;
mod cider;
mod ngrams;

pub use bleu::{bleu, corpus_bleu, BleuCounts};
pub use cider::{cider, CiderCorpus};
pub use ngrams::{NGramStats, MAX_ORDER};
