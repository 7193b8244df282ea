use super::problem::replay;
use super::{clamped_result, sort_completions, Completion, DecodeResult, Diagnostics, FillProblem, StepCounts};
use crate::error::{Error, Result};
use crate::scorers::Scorer;
use crate::seqcore::{TokenId, EOS};

/// Largest number of completions [`exact_fill_oracle`] will enumerate.
pub const ORACLE_BUDGET: u64 = 1_000_000;

/// Enumerates every width-`w` completion and ranks all of them by the true
/// forward joint log-prob.
///
/// States along shared prefixes are reused, but log-probs are summed in
/// sentence order, so scores are bit-identical to
/// [`FillProblem::joint_logp`].
pub fn exact_fill_oracle<S: Scorer>(problem: &FillProblem<'_, S>) -> Result<DecodeResult> {
    if problem.width() == 0 {
        return clamped_result(problem, "oracle");
    }
    let candidates = problem.blank_candidates();
    let total = (candidates.len() as f64).powi(problem.width() as i32);
    if total > ORACLE_BUDGET as f64 {
        return Err(Error::OracleBudget {
            candidates: total,
            budget: ORACLE_BUDGET,
        });
    }
    let mut steps = StepCounts::default();
    let scorer = problem.forward;
    let start = scorer.initial_state(problem.conditioning)?;
    let (state, lp) = replay(scorer, start, &problem.instance.prefix, &mut steps.context)?;

    let mut search = Enumeration {
        problem,
        candidates: &candidates,
        blank: Vec::with_capacity(problem.width()),
        out: Vec::with_capacity(total as usize),
        steps: &mut steps,
    };
    search.descend(state, lp)?;
    let mut completions = search.out;
    sort_completions(&mut completions);
    Ok(DecodeResult {
        algorithm: "oracle".to_string(),
        completions,
        diagnostics: Diagnostics {
            steps,
            ..Default::default()
        },
    })
}

struct Enumeration<'p, 'a, S: Scorer> {
    problem: &'p FillProblem<'a, S>,
    candidates: &'p [TokenId],
    blank: Vec<TokenId>,
    out: Vec<Completion>,
    steps: &'p mut StepCounts,
}

impl<S: Scorer> Enumeration<'_, '_, S> {
    fn descend(&mut self, state: S::State, lp: f64) -> Result<()> {
        let scorer = self.problem.forward;
        if self.blank.len() == self.problem.width() {
            let mut state = state;
            let mut lp = lp;
            for &t in self.problem.instance.suffix.iter() {
                lp += scorer.log_distribution(&state)?[t as usize];
                state = scorer.advance(&state, t)?;
                self.steps.rescore += 1;
            }
            let joint = lp + scorer.log_distribution(&state)?[EOS as usize];
            self.out.push(Completion {
                tokens: self.blank.clone().into(),
                objective: joint,
                joint_logp: joint,
            });
            return Ok(());
        }
        let dist = scorer.log_distribution(&state)?;
        for &y in self.candidates {
            let next = scorer.advance(&state, y)?;
            self.steps.blank += 1;
            self.blank.push(y);
            self.descend(next, lp + dist[y as usize])?;
            self.blank.pop();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::beam_search;
    use crate::scorers::ngram_train;
    use crate::seqcore::{BlankedInstance, DecodeConfig, Direction, TokenSequence};

    fn setup(width: usize, beam: usize) -> (crate::scorers::NGramModel, crate::scorers::NGramModel, BlankedInstance, DecodeConfig) {
        let corpus: Vec<TokenSequence> = vec![vec![3, 4, 5].into(), vec![5, 3, 3, 4].into(), vec![4, 5, 5].into()];
        let (f, b) = ngram_train(&corpus, 2, 0.5, 6).unwrap();
        let inst = BlankedInstance::new("o", vec![3].into(), vec![4].into(), None, width, true).unwrap();
        (f, b, inst, DecodeConfig::new(beam, 1).unwrap())
    }

    #[test]
    fn enumerates_every_completion_exactly() {
        let (f, b, inst, cfg) = setup(2, 1);
        let p = FillProblem::new(inst, &f, &b, cfg).unwrap();
        let r = exact_fill_oracle(&p).unwrap();
        assert_eq!(r.completions.len(), 9);
        for c in &r.completions {
            let mut s = 0;
            assert_eq!(c.joint_logp.to_bits(), p.joint_logp(&c.tokens, &mut s).unwrap().to_bits());
        }
        assert!(r.completions.windows(2).all(|w| w[0].joint_logp >= w[1].joint_logp));
    }

    #[test]
    fn zero_width_returns_the_clamped_sentence() {
        let (f, b, inst, cfg) = setup(0, 1);
        let p = FillProblem::new(inst, &f, &b, cfg).unwrap();
        let r = exact_fill_oracle(&p).unwrap();
        assert_eq!(r.completions.len(), 1);
        assert!(r.top().tokens.is_empty());
    }

    #[test]
    fn full_frontier_beam_search_matches() {
        let (f, b, inst, cfg) = setup(3, 27);
        let p = FillProblem::new(inst, &f, &b, cfg).unwrap();
        let exact = exact_fill_oracle(&p).unwrap();
        let bs = beam_search(&p, Direction::Forward).unwrap();
        let a: Vec<_> = exact.completions.iter().map(|c| &c.tokens).collect();
        let c: Vec<_> = bs.completions.iter().map(|c| &c.tokens).collect();
        assert_eq!(a, c);
    }

    #[test]
    fn budget_guard() {
        let corpus: Vec<TokenSequence> = vec![(3..40).collect::<Vec<_>>().into()];
        let (f, b) = ngram_train(&corpus, 2, 0.5, 40).unwrap();
        let inst = BlankedInstance::new("o", vec![].into(), vec![].into(), None, 4, true).unwrap();
        let p = FillProblem::new(inst, &f, &b, DecodeConfig::new(1, 1).unwrap()).unwrap();
        let err = exact_fill_oracle(&p).unwrap_err();
        assert!(err.to_string().contains("oracle budget exceeded"));
    }
}
