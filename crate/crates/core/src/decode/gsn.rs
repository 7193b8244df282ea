use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pass::{directional_pass, Dist};
use super::{clamped_result, Completion, DecodeResult, Diagnostics, FillProblem, StepCounts};
use crate::error::{Error, Result};
use crate::scorers::{combine_masked, Scorer};
use crate::seqcore::{rank_order, Direction, TokenId, TokenSequence};

/// Draws one token from the renormalized product of a forward and a
/// backward distribution, restricted to `allowed` ids.
pub fn sample_combined<R: Rng + ?Sized>(fwd: &[f64], bwd: &[f64], allowed: &[bool], rng: &mut R) -> Result<TokenId> {
    let combined = combine_masked(fwd, bwd, allowed)?;
    let weights: Vec<f64> = combined.iter().map(|lp| lp.exp()).collect();
    let dist = WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidArgument(format!("cannot sample combined distribution: {e}")))?;
    Ok(dist.sample(rng) as TokenId)
}

struct Chain {
    tokens: Vec<TokenId>,
    /// Per-position distributions from the most recent sweep in each direction.
    fwd: Vec<Dist>,
    bwd: Vec<Dist>,
}

impl Chain {
    fn dists_mut(&mut self, direction: Direction) -> &mut Vec<Dist> {
        match direction {
            Direction::Forward => &mut self.fwd,
            Direction::Backward => &mut self.bwd,
        }
    }

    fn dists(&self, direction: Direction) -> &[Dist] {
        match direction {
            Direction::Forward => &self.fwd,
            Direction::Backward => &self.bwd,
        }
    }
}

/// Ordered GSN-style resampling.
///
/// `B` chains start from the top beam of a directional beam search. Each
/// meta-iteration sweeps the blank once in each direction, resampling every
/// position from the combined forward/backward conditional given the rest
/// of the chain. Distributions from the opposite sweep are reused, so a
/// sweep costs one advance per position per chain. Final chains are
/// reranked by true joint log-prob.
pub fn gsn_ordered<S: Scorer>(problem: &FillProblem<'_, S>, rng_seed: u64) -> Result<DecodeResult> {
    if problem.width() == 0 {
        return clamped_result(problem, "gsn");
    }
    let cfg = &problem.config;
    let width = problem.width();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut steps = StepCounts::default();
    let allowed: Vec<bool> = {
        let mut mask = vec![false; problem.vocab_size()];
        for t in problem.blank_candidates() {
            mask[t as usize] = true;
        }
        mask
    };

    let init_dir = cfg.init_direction;
    let first_dir = init_dir.opposite();
    let start_first = problem.context_state(first_dir, &mut steps.context)?;
    let start_second = problem.context_state(init_dir, &mut steps.context)?;
    let init = directional_pass(problem, init_dir, &start_second, None, &mut steps.init, None)?;
    let seed_beam = &init.beams[0];

    let mut chains: Vec<Chain> = (0..cfg.beam_width)
        .map(|_| {
            let mut c = Chain {
                tokens: seed_beam.ids().to_vec(),
                fwd: Vec::new(),
                bwd: Vec::new(),
            };
            *c.dists_mut(init_dir) = seed_beam.dists.clone();
            c
        })
        .collect();

    let mut trace = vec![problem.joint_logp(seed_beam.ids(), &mut steps.rescore)?];
    for _ in 0..cfg.meta_iterations {
        for (dir, start) in [(first_dir, &start_first), (init_dir, &start_second)] {
            let scorer = problem.scorer(dir);
            let order: Vec<usize> = match dir {
                Direction::Forward => (0..width).collect(),
                Direction::Backward => (0..width).rev().collect(),
            };
            for chain in chains.iter_mut() {
                let mut state = start.0.clone();
                let mut own: Vec<Option<Dist>> = vec![None; width];
                for &p in &order {
                    let d: Dist = scorer.log_distribution(&state)?.into();
                    let other = &chain.dists(dir.opposite())[p];
                    let (f, b) = match dir {
                        Direction::Forward => (&d[..], &other[..]),
                        Direction::Backward => (&other[..], &d[..]),
                    };
                    let y = sample_combined(f, b, &allowed, &mut rng)?;
                    chain.tokens[p] = y;
                    state = scorer.advance(&state, y)?;
                    steps.blank += 1;
                    own[p] = Some(d);
                }
                *chain.dists_mut(dir) = own.into_iter().map(|d| d.expect("every position visited")).collect();
            }
        }
        let mut best = f64::NEG_INFINITY;
        for chain in &chains {
            best = best.max(problem.joint_logp(&chain.tokens, &mut steps.rescore)?);
        }
        trace.push(best);
    }

    let mut seqs: Vec<TokenSequence> = chains.into_iter().map(|c| c.tokens.into()).collect();
    seqs.sort();
    seqs.dedup();
    let mut completions = Vec::with_capacity(seqs.len());
    for tokens in seqs {
        let joint = problem.joint_logp(&tokens, &mut steps.rescore)?;
        completions.push(Completion {
            tokens,
            objective: joint,
            joint_logp: joint,
        });
    }
    completions.sort_by(|a, b| rank_order(a.joint_logp, &a.tokens, b.joint_logp, &b.tokens));

    Ok(DecodeResult {
        algorithm: "gsn".to_string(),
        completions,
        diagnostics: Diagnostics {
            meta_iterations: cfg.meta_iterations,
            steps,
            trace,
            widths_searched: Vec::new(),
        },
    })
}
