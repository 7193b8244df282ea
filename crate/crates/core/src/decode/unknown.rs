use super::{DecodeResult, FillProblem, StepCounts};
use crate::error::{Error, Result};
use crate::scorers::Scorer;
use crate::seqcore::{is_sentinel, rank_order, Direction, TokenId, EOS};

/// Hard cap on the length of an open-ended generation.
pub const MAX_OPEN_LENGTH: usize = 30;

/// EOS-terminated beam search from `start`. Returns the best finished
/// hypothesis without its EOS, in generation order; if nothing finishes
/// within `cap` tokens the best live hypothesis is returned.
pub fn open_generate<S: Scorer>(
    scorer: &S,
    start: &S::State,
    beam_width: usize,
    cap: usize,
    steps: &mut u64,
) -> Result<Vec<TokenId>> {
    if beam_width == 0 {
        return Err(Error::InvalidArgument("beam width must be positive".into()));
    }
    let content: Vec<TokenId> = (0..scorer.vocab_size() as TokenId).filter(|&t| !is_sentinel(t)).collect();
    let mut live: Vec<(Vec<TokenId>, f64, S::State)> = vec![(Vec::new(), 0.0, start.clone())];
    let mut best_done: Option<(Vec<TokenId>, f64)> = None;

    for len in 0..=cap {
        let mut cands: Vec<(usize, Option<TokenId>, f64)> = Vec::new();
        for (i, (_, lp, state)) in live.iter().enumerate() {
            let d = scorer.log_distribution(state)?;
            cands.push((i, None, lp + d[EOS as usize]));
            if len < cap {
                cands.extend(content.iter().map(|&y| (i, Some(y), lp + d[y as usize])));
            }
        }
        // EOS sorts ahead of any token on ties
        let key = |c: &(usize, Option<TokenId>, f64)| {
            let mut ids = live[c.0].0.clone();
            ids.push(c.1.unwrap_or(EOS));
            ids
        };
        cands.sort_by(|a, b| rank_order(a.2, &key(a), b.2, &key(b)));
        cands.truncate(beam_width);

        let mut next = Vec::new();
        for (i, y, score) in cands {
            match y {
                None => {
                    if best_done.as_ref().is_none_or(|(_, s)| score > *s) {
                        best_done = Some((live[i].0.clone(), score));
                    }
                }
                Some(y) => {
                    let state = scorer.advance(&live[i].2, y)?;
                    *steps += 1;
                    let mut ids = live[i].0.clone();
                    ids.push(y);
                    next.push((ids, score, state));
                }
            }
        }
        // log-probs only fall, so no live hypothesis can beat a finished one
        // that already outscores all of them
        let top_live = next.iter().map(|n| n.1).fold(f64::NEG_INFINITY, f64::max);
        if next.is_empty() || best_done.as_ref().is_some_and(|(_, s)| *s >= top_live) {
            break;
        }
        live = next;
    }
    Ok(match best_done {
        Some((ids, _)) => ids,
        None => live.into_iter().next().map(|l| l.0).unwrap_or_default(),
    })
}

/// Decodes an instance whose blank width is unknown.
///
/// Open generation from the prefix (forward) and from the suffix (backward)
/// bounds the width range; `inner` runs once per width in
/// `[min, max]` and the completion with the highest true joint log-prob
/// across widths wins, shorter widths first on ties.
pub fn unknown_length_decode<'a, S, F>(problem: &FillProblem<'a, S>, mut inner: F) -> Result<DecodeResult>
where
    S: Scorer,
    F: FnMut(&FillProblem<'a, S>) -> Result<DecodeResult>,
{
    let beam = problem.config.beam_width;
    let mut steps = StepCounts::default();
    let (fwd_state, _) = problem.context_state(Direction::Forward, &mut steps.context)?;
    let (bwd_state, _) = problem.context_state(Direction::Backward, &mut steps.context)?;
    let len_f = open_generate(problem.forward, &fwd_state, beam, MAX_OPEN_LENGTH, &mut steps.init)?.len();
    let len_b = open_generate(problem.backward, &bwd_state, beam, MAX_OPEN_LENGTH, &mut steps.init)?.len();
    let (lo, hi) = (len_f.min(len_b), len_f.max(len_b));

    let mut best: Option<DecodeResult> = None;
    let mut widths = Vec::new();
    for w in lo..=hi {
        let result = inner(&problem.with_width(w))?;
        widths.push(w);
        steps.add(&result.diagnostics.steps);
        let better = match &best {
            None => true,
            Some(b) => result.top().joint_logp > b.top().joint_logp,
        };
        if better {
            best = Some(result);
        }
    }
    let mut result = best.ok_or(Error::NoResults)?;
    result.diagnostics.steps = steps;
    result.diagnostics.widths_searched = widths;
    Ok(result)
}
