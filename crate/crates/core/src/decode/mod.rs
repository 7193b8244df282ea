//! Inference algorithms over a [`FillProblem`].
//!
//! All decoders report completions together with the true forward joint
//! log-prob of the assembled sentence, which is the common yardstick for
//! comparing them.

mod beam_search;
mod bibs;
mod gsn;
mod oracle;
mod pass;
mod problem;
mod record;
mod rerank;
mod unknown;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use beam_search::beam_search;
pub use bibs::{bibs_decode, bibs_decode_observed, bibs_pass, initial_beams};
pub use gsn::{gsn_ordered, sample_combined};
pub use oracle::{exact_fill_oracle, ORACLE_BUDGET};
pub use pass::{CachedBeam, Dist, PassObserver, PassStep, PositionScoreCache, SelectedCandidate};
pub use problem::{FillProblem, StepCounts};
pub use record::{RankedCompletion, ResultRecord};
pub use rerank::{rerank_f_plus_b, RerankRule};
pub use unknown::{open_generate, unknown_length_decode, MAX_OPEN_LENGTH};

use crate::error::{Error, Result};
use crate::scorers::Scorer;
use crate::seqcore::{rank_order, Direction, TokenSequence};

/// One ranked blank completion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub tokens: TokenSequence,
    /// Value of the producing algorithm's own ranking criterion.
    pub objective: f64,
    /// Forward log-prob of `prefix ++ tokens ++ suffix ++ EOS`.
    pub joint_logp: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub meta_iterations: usize,
    pub steps: StepCounts,
    /// Best true joint log-prob among the beams at initialization and
    /// after each meta-iteration.
    pub trace: Vec<f64>,
    /// Blank widths tried by the unknown-length wrapper.
    pub widths_searched: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub algorithm: String,
    /// Ranked by the algorithm's own criterion, best first.
    pub completions: Vec<Completion>,
    pub diagnostics: Diagnostics,
}

impl DecodeResult {
    pub fn top(&self) -> &Completion {
        &self.completions[0]
    }
}

/// Sorts completions by `objective` (descending, ties lexicographic).
pub(crate) fn sort_completions(completions: &mut [Completion]) {
    completions.sort_by(|a, b| rank_order(a.objective, &a.tokens, b.objective, &b.tokens));
}

/// Result for a zero-width blank: the clamped sentence itself.
pub(crate) fn clamped_result<S: Scorer>(problem: &FillProblem<'_, S>, algorithm: &str) -> Result<DecodeResult> {
    let mut steps = StepCounts::default();
    let joint = problem.joint_logp(&[], &mut steps.rescore)?;
    Ok(DecodeResult {
        algorithm: algorithm.to_string(),
        completions: vec![Completion {
            tokens: TokenSequence::empty(),
            objective: joint,
            joint_logp: joint,
        }],
        diagnostics: Diagnostics {
            steps,
            trace: vec![joint],
            ..Default::default()
        },
    })
}

/// Decoder selector used by the CLI and the experiment harness.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Algorithm {
    BeamForward,
    BeamBackward,
    Bibs,
    Gsn,
    RerankMax,
    RerankSum,
    Oracle,
    UnknownLength(Box<Algorithm>),
}

impl Algorithm {
    /// Runs this decoder. Instances of unknown width are routed through
    /// the unknown-length wrapper with `self` as the inner decoder.
    pub fn run<S: Scorer>(&self, problem: &FillProblem<'_, S>, seed: u64) -> Result<DecodeResult> {
        if !problem.instance.known_width {
            let inner = match self {
                Algorithm::UnknownLength(inner) => inner.as_ref(),
                other => other,
            };
            let mut result = unknown_length_decode(problem, |p| inner.run(p, seed))?;
            result.algorithm = self.to_string();
            return Ok(result);
        }
        let mut result = match self {
            Algorithm::BeamForward => beam_search(problem, Direction::Forward)?,
            Algorithm::BeamBackward => beam_search(problem, Direction::Backward)?,
            Algorithm::Bibs => bibs_decode(problem)?,
            Algorithm::Gsn => gsn_ordered(problem, seed)?,
            Algorithm::RerankMax => rerank_f_plus_b(problem, RerankRule::MaxProb)?,
            Algorithm::RerankSum => rerank_f_plus_b(problem, RerankRule::SumLogProb)?,
            Algorithm::Oracle => exact_fill_oracle(problem)?,
            Algorithm::UnknownLength(inner) => inner.run(problem, seed)?,
        };
        result.algorithm = self.to_string();
        Ok(result)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::BeamForward => f.write_str("bs-f"),
            Algorithm::BeamBackward => f.write_str("bs-b"),
            Algorithm::Bibs => f.write_str("bibs"),
            Algorithm::Gsn => f.write_str("gsn"),
            Algorithm::RerankMax => f.write_str("rerank-max"),
            Algorithm::RerankSum => f.write_str("rerank-sum"),
            Algorithm::Oracle => f.write_str("oracle"),
            Algorithm::UnknownLength(inner) => write!(f, "unknown-length:{inner}"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bs-f" => Algorithm::BeamForward,
            "bs-b" => Algorithm::BeamBackward,
            "bibs" => Algorithm::Bibs,
            "gsn" => Algorithm::Gsn,
            "rerank-max" => Algorithm::RerankMax,
            "rerank-sum" => Algorithm::RerankSum,
            "oracle" => Algorithm::Oracle,
            other => match other.strip_prefix("unknown-length:") {
                Some(inner) => {
                    let inner: Algorithm = inner.parse()?;
                    if matches!(inner, Algorithm::UnknownLength(_)) {
                        return Err(Error::InvalidArgument("unknown-length cannot nest".into()));
                    }
                    Algorithm::UnknownLength(Box::new(inner))
                }
                None => return Err(Error::InvalidArgument(format!("unknown algorithm {other:?}"))),
            },
        })
    }
}

impl TryFrom<String> for Algorithm {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> String {
        a.to_string()
    }
}
