use serde::{Deserialize, Serialize};

use super::DecodeResult;
use crate::seqcore::Vocabulary;

/// One line of a decode results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub id: String,
    pub algorithm: String,
    pub completion: Vec<String>,
    pub objective: f64,
    pub joint_logp: f64,
    pub meta_iterations: usize,
    pub advance_steps: u64,
    pub trace: Vec<f64>,
    /// Set when decoding this instance failed; the other fields are then empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Further ranked completions when more than the top one was requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nbest: Vec<RankedCompletion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCompletion {
    pub completion: Vec<String>,
    pub objective: f64,
    pub joint_logp: f64,
}

impl ResultRecord {
    /// Summarizes the top-ranked completion of `result`.
    pub fn from_result(id: &str, result: &DecodeResult, vocab: &Vocabulary) -> Self {
        let top = result.top();
        ResultRecord {
            id: id.to_string(),
            algorithm: result.algorithm.clone(),
            completion: vocab.decode(&top.tokens),
            objective: top.objective,
            joint_logp: top.joint_logp,
            meta_iterations: result.diagnostics.meta_iterations,
            advance_steps: result.diagnostics.steps.total(),
            trace: result.diagnostics.trace.clone(),
            error: None,
            nbest: Vec::new(),
        }
    }

    /// Like [`ResultRecord::from_result`], also listing the first `n`
    /// ranked completions (all of them when `n` is `usize::MAX`).
    pub fn with_nbest(id: &str, result: &DecodeResult, vocab: &Vocabulary, n: usize) -> Self {
        let mut rec = Self::from_result(id, result, vocab);
        if n > 1 {
            rec.nbest = result
                .completions
                .iter()
                .take(n)
                .map(|c| RankedCompletion {
                    completion: vocab.decode(&c.tokens),
                    objective: c.objective,
                    joint_logp: c.joint_logp,
                })
                .collect();
        }
        rec
    }

    pub fn failure(id: &str, algorithm: &str, error: impl ToString) -> Self {
        ResultRecord {
            id: id.to_string(),
            algorithm: algorithm.to_string(),
            completion: Vec::new(),
            objective: 0.0,
            joint_logp: 0.0,
            meta_iterations: 0,
            advance_steps: 0,
            trace: Vec::new(),
            error: Some(error.to_string()),
            nbest: Vec::new(),
        }
    }

    pub fn is_failure(&self) -> bool {
        self.error.is_some()
    }
}
