use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{beam_search, clamped_result, sort_completions, Completion, DecodeResult, Diagnostics, FillProblem};
use crate::error::Result;
use crate::scorers::Scorer;
use crate::seqcore::{Direction, TokenSequence};

/// How pooled forward/backward beams are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RerankRule {
    /// `max(log p_fwd, log p_bwd)` of the full sentence.
    MaxProb,
    /// `log p_fwd + log p_bwd` of the full sentence.
    SumLogProb,
}

impl RerankRule {
    pub fn score(self, fwd: f64, bwd: f64) -> f64 {
        match self {
            RerankRule::MaxProb => fwd.max(bwd),
            RerankRule::SumLogProb => fwd + bwd,
        }
    }
}

/// Runs beam search in both directions, pools the `2B` completions,
/// rescores each under both models by full replay and ranks the
/// deduplicated pool by `rule`.
pub fn rerank_f_plus_b<S: Scorer>(problem: &FillProblem<'_, S>, rule: RerankRule) -> Result<DecodeResult> {
    let name = match rule {
        RerankRule::MaxProb => "rerank-max",
        RerankRule::SumLogProb => "rerank-sum",
    };
    if problem.width() == 0 {
        return clamped_result(problem, name);
    }
    let fwd = beam_search(problem, Direction::Forward)?;
    let bwd = beam_search(problem, Direction::Backward)?;
    let mut steps = fwd.diagnostics.steps;
    steps.add(&bwd.diagnostics.steps);

    let pool: BTreeSet<TokenSequence> = fwd
        .completions
        .iter()
        .chain(&bwd.completions)
        .map(|c| c.tokens.clone())
        .collect();
    let mut completions = Vec::with_capacity(pool.len());
    for tokens in pool {
        let f = problem.sentence_logp(Direction::Forward, &tokens, &mut steps.rescore)?;
        let b = problem.sentence_logp(Direction::Backward, &tokens, &mut steps.rescore)?;
        completions.push(Completion {
            tokens,
            objective: rule.score(f, b),
            joint_logp: f,
        });
    }
    sort_completions(&mut completions);
    Ok(DecodeResult {
        algorithm: name.to_string(),
        completions,
        diagnostics: Diagnostics {
            steps,
            ..Default::default()
        },
    })
}
