use super::pass::directional_pass;
use super::{clamped_result, sort_completions, Completion, DecodeResult, Diagnostics, FillProblem, StepCounts};
use crate::error::Result;
use crate::scorers::Scorer;
use crate::seqcore::Direction;

/// Standard beam search over the blank in one direction.
///
/// Context tokens are replayed verbatim, each blank position is extended by
/// every allowed token and the top `B` cumulative conditional log-probs are
/// kept. Completions are ranked by the full-sentence log-prob under the
/// search direction's own model.
pub fn beam_search<S: Scorer>(problem: &FillProblem<'_, S>, direction: Direction) -> Result<DecodeResult> {
    let name = match direction {
        Direction::Forward => "bs-f",
        Direction::Backward => "bs-b",
    };
    if problem.width() == 0 {
        return clamped_result(problem, name);
    }
    let mut steps = StepCounts::default();
    let start = problem.context_state(direction, &mut steps.context)?;
    let cache = directional_pass(problem, direction, &start, None, &mut steps.blank, None)?;

    let mut completions = Vec::with_capacity(cache.beams.len());
    for b in &cache.beams {
        let ids = b.ids();
        let own = problem.sentence_logp(direction, ids, &mut steps.rescore)?;
        let joint = match direction {
            Direction::Forward => own,
            Direction::Backward => problem.joint_logp(ids, &mut steps.rescore)?,
        };
        completions.push(Completion {
            tokens: ids.clone(),
            objective: own,
            joint_logp: joint,
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
