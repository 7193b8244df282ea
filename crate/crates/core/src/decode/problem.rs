use crate::error::{Error, Result};
use crate::scorers::Scorer;
use crate::seqcore::{is_sentinel, BlankedInstance, DecodeConfig, Direction, TokenId, EOS};

/// Advance-call accounting, split by what the steps were spent on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StepCounts {
    /// Replaying the clamped prefix/suffix into the scorers.
    pub context: u64,
    /// Producing initial hypotheses (initial beam search, open generation).
    pub init: u64,
    /// Search over the blank region proper.
    pub blank: u64,
    /// Full-sentence replays used to score and rank finished completions.
    pub rescore: u64,
}

impl StepCounts {
    pub fn total(&self) -> u64 {
        self.context + self.init + self.blank + self.rescore
    }

    pub fn add(&mut self, other: &StepCounts) {
        self.context += other.context;
        self.init += other.init;
        self.blank += other.blank;
        self.rescore += other.rescore;
    }
}

/// A fill-in-the-blank inference problem bound to a pair of scorers.
#[derive(Debug)]
pub struct FillProblem<'a, S: Scorer> {
    pub instance: BlankedInstance,
    pub forward: &'a S,
    pub backward: &'a S,
    pub config: DecodeConfig,
    pub conditioning: Option<&'a [f64]>,
}

impl<'a, S: Scorer> FillProblem<'a, S> {
    pub fn new(
        instance: BlankedInstance,
        forward: &'a S,
        backward: &'a S,
        config: DecodeConfig,
    ) -> Result<Self> {
        config.validate()?;
        if forward.direction() != Direction::Forward || backward.direction() != Direction::Backward {
            return Err(Error::InvalidArgument(
                "problem needs a forward and a backward scorer".into(),
            ));
        }
        if forward.vocab_size() != backward.vocab_size() {
            return Err(Error::InvalidArgument(format!(
                "scorer vocabularies differ ({} vs {})",
                forward.vocab_size(),
                backward.vocab_size()
            )));
        }
        let size = forward.vocab_size();
        instance.prefix.validate(size)?;
        instance.suffix.validate(size)?;
        if let Some(g) = &instance.gold {
            g.validate(size)?;
        }
        Ok(FillProblem {
            instance,
            forward,
            backward,
            config,
            conditioning: None,
        })
    }

    pub fn with_conditioning(mut self, x0: &'a [f64]) -> Self {
        self.conditioning = Some(x0);
        self
    }

    pub fn width(&self) -> usize {
        self.instance.blank_width
    }

    pub fn vocab_size(&self) -> usize {
        self.forward.vocab_size()
    }

    pub fn scorer(&self, direction: Direction) -> &'a S {
        match direction {
            Direction::Forward => self.forward,
            Direction::Backward => self.backward,
        }
    }

    /// Same problem with another known blank width.
    pub fn with_width(&self, width: usize) -> FillProblem<'a, S> {
        FillProblem {
            instance: self.instance.with_width(width),
            forward: self.forward,
            backward: self.backward,
            config: self.config.clone(),
            conditioning: self.conditioning,
        }
    }

    /// Ids a decoder may place inside the blank, ascending.
    pub fn blank_candidates(&self) -> Vec<TokenId> {
        (0..self.vocab_size() as TokenId)
            .filter(|&t| self.config.allow_sentinels_in_blank || !is_sentinel(t))
            .collect()
    }

    /// Clamped context tokens in the consumption order of `direction`:
    /// the prefix for forward, the reversed suffix for backward.
    pub(crate) fn context_tokens(&self, direction: Direction) -> Vec<TokenId> {
        match direction {
            Direction::Forward => self.instance.prefix.to_vec(),
            Direction::Backward => self.instance.suffix.iter().rev().copied().collect(),
        }
    }

    /// State after the clamped context in `direction`, plus its log-prob.
    pub(crate) fn context_state(&self, direction: Direction, steps: &mut u64) -> Result<(S::State, f64)> {
        let scorer = self.scorer(direction);
        let init = scorer.initial_state(self.conditioning)?;
        replay(scorer, init, &self.context_tokens(direction), steps)
    }

    /// Log-prob of the whole sentence `prefix ++ blank ++ suffix` (with
    /// the closing EOS) under the scorer of `direction`.
    pub fn sentence_logp(&self, direction: Direction, blank: &[TokenId], steps: &mut u64) -> Result<f64> {
        let sentence = self.instance.assemble(blank);
        let scorer = self.scorer(direction);
        let tokens: Vec<TokenId> = match direction {
            Direction::Forward => sentence.to_vec(),
            Direction::Backward => sentence.iter().rev().copied().collect(),
        };
        let init = scorer.initial_state(self.conditioning)?;
        let (state, lp) = replay(scorer, init, &tokens, steps)?;
        Ok(lp + scorer.log_distribution(&state)?[EOS as usize])
    }

    /// True forward joint log-prob of the assembled sentence.
    pub fn joint_logp(&self, blank: &[TokenId], steps: &mut u64) -> Result<f64> {
        self.sentence_logp(Direction::Forward, blank, steps)
    }
}

/// Feeds `tokens` through `scorer` from `state`, summing their conditional
/// log-probs. Each token costs one advance.
pub(crate) fn replay<S: Scorer>(
    scorer: &S,
    mut state: S::State,
    tokens: &[TokenId],
    steps: &mut u64,
) -> Result<(S::State, f64)> {
    let mut lp = 0.0;
    for &t in tokens {
        lp += scorer.log_distribution(&state)?[t as usize];
        state = scorer.advance(&state, t)?;
        *steps += 1;
    }
    Ok((state, lp))
}
