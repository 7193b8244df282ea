//! One directional sweep over the blank, shared by standard beam search and
//! the BiBS update passes.

use std::cmp::Ordering;
use std::iter;
use std::sync::Arc;

use super::problem::FillProblem;
use crate::error::{Error, Result};
use crate::scorers::Scorer;
use crate::seqcore::{Beam, BeamSet, Direction, TokenId, TokenSequence};

/// A full next-token log distribution, shared between sibling beams.
pub type Dist = Arc<[f64]>;

/// A complete blank assignment with the per-position distributions its
/// owning direction produced along the way (the cached θ of Alg. 1).
#[derive(Debug, Clone, PartialEq)]
pub struct CachedBeam {
    /// Ids and chosen-token log-probs, in position order.
    pub beam: Beam,
    /// `dists[p]` is the distribution over the token at blank position `p`
    /// given the context and this beam's earlier tokens in its direction.
    pub dists: Vec<Dist>,
    /// Index of the opposite beam this one was paired with when selected.
    pub partner: Option<usize>,
    /// Search objective at the final selection step.
    pub objective: f64,
}

impl CachedBeam {
    pub fn ids(&self) -> &TokenSequence {
        &self.beam.ids
    }
}

/// The beams produced by one pass, with their caches.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionScoreCache {
    pub direction: Direction,
    pub width: usize,
    /// Log-prob of the clamped context under this direction's scorer.
    pub context_logp: f64,
    /// Ordered by objective, best first.
    pub beams: Vec<CachedBeam>,
}

impl PositionScoreCache {
    pub fn ids(&self) -> Vec<TokenSequence> {
        self.beams.iter().map(|b| b.beam.ids.clone()).collect()
    }

    pub fn to_beam_set(&self) -> Result<BeamSet> {
        Ok(BeamSet {
            direction: self.direction,
            beams: self.beams.iter().map(|b| b.beam.clone()).collect(),
        })
    }

    pub(crate) fn check(&self, width: usize, vocab: usize) -> Result<()> {
        if self.width != width {
            return Err(Error::InconsistentCache(format!(
                "cache width {} but blank width {width}",
                self.width
            )));
        }
        if self.beams.is_empty() {
            return Err(Error::InconsistentCache("cache holds no beams".into()));
        }
        for (i, b) in self.beams.iter().enumerate() {
            if b.beam.len() != width || b.dists.len() != width {
                return Err(Error::InconsistentCache(format!(
                    "beam {i} covers {} positions with {} distributions, expected {width}",
                    b.beam.len(),
                    b.dists.len()
                )));
            }
            if b.dists.iter().any(|d| d.len() != vocab) {
                return Err(Error::InconsistentCache(format!(
                    "beam {i} caches a distribution of the wrong size"
                )));
            }
        }
        Ok(())
    }
}

/// One candidate kept by a selection step.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedCandidate {
    /// Partial assignment in position order.
    pub tokens: TokenSequence,
    pub partner: Option<usize>,
    pub score: f64,
}

/// Everything a selection step saw and chose; handed to observers.
#[derive(Debug, Clone, PartialEq)]
pub struct PassStep {
    pub direction: Direction,
    /// Blank position (0-based, left to right) being decided.
    pub position: usize,
    /// Live partial beams before extension, in position order.
    pub live: Vec<TokenSequence>,
    /// Opposite-direction complete beams held fixed (empty for plain beam search).
    pub fixed: Vec<TokenSequence>,
    /// Size of the expansion set `live x candidates x fixed`.
    pub expansion_size: usize,
    pub selected: Vec<SelectedCandidate>,
}

/// Receives per-step and per-pass callbacks from [`super::bibs_decode_observed`]
/// and friends.
pub trait PassObserver {
    fn on_step(&mut self, step: &PassStep);

    fn on_pass(&mut self, _cache: &PositionScoreCache) {}
}

/// Opposite-direction beams with their scores precomputed per position.
struct Opposite<'c> {
    cache: &'c PositionScoreCache,
    /// `acc[b][p]`: context log-prob plus the cached log-probs the opposite
    /// direction consumed before reaching position `p`.
    acc: Vec<Vec<f64>>,
}

impl<'c> Opposite<'c> {
    fn new(cache: &'c PositionScoreCache) -> Self {
        let w = cache.width;
        let acc = cache
            .beams
            .iter()
            .map(|b| {
                let mut acc = vec![0.0; w];
                let mut running = cache.context_logp;
                match cache.direction {
                    Direction::Backward => {
                        for p in (0..w).rev() {
                            acc[p] = running;
                            running += b.beam.dir_logp[p];
                        }
                    }
                    Direction::Forward => {
                        for (a, lp) in acc.iter_mut().zip(&b.beam.dir_logp) {
                            *a = running;
                            running += lp;
                        }
                    }
                }
                acc
            })
            .collect();
        Opposite { cache, acc }
    }
}

struct Live<St> {
    /// Tokens in consumption order.
    seq: Vec<TokenId>,
    logps: Vec<f64>,
    dists: Vec<Dist>,
    /// Context log-prob plus `logps`, accumulated in consumption order.
    acc: f64,
    state: St,
    partner: Option<usize>,
    score: f64,
}

struct Candidate {
    parent: usize,
    token: TokenId,
    partner: Option<usize>,
    score: f64,
}

fn position_of(direction: Direction, step: usize, width: usize) -> usize {
    match direction {
        Direction::Forward => step,
        Direction::Backward => width - 1 - step,
    }
}

/// Compares `seq ++ [y]` (consumption order) of two candidates in position order.
fn cmp_extended(direction: Direction, a: &[TokenId], ya: TokenId, b: &[TokenId], yb: TokenId) -> Ordering {
    match direction {
        Direction::Forward => a.iter().chain(iter::once(&ya)).cmp(b.iter().chain(iter::once(&yb))),
        Direction::Backward => iter::once(&ya)
            .chain(a.iter().rev())
            .cmp(iter::once(&yb).chain(b.iter().rev())),
    }
}

fn position_ordered(direction: Direction, seq: &[TokenId]) -> TokenSequence {
    match direction {
        Direction::Forward => seq.to_vec().into(),
        Direction::Backward => seq.iter().rev().copied().collect(),
    }
}

/// Runs one pass in `direction` over every blank position.
///
/// With `fixed = None` candidates are ranked by the cumulative directional
/// log-prob (standard beam search). With opposite beams, each candidate
/// `(live b, token y, fixed b')` is ranked by
/// `log p(ctx, Y_b) + log p(y | Y_b) + log p(y | Y_b') + log p(Y_b', ctx')`
/// and only the prefix extension is kept; `b'` is recorded as its partner.
/// Each kept beam costs exactly one advance per position.
pub(crate) fn directional_pass<S: Scorer>(
    problem: &FillProblem<'_, S>,
    direction: Direction,
    start: &(S::State, f64),
    fixed: Option<&PositionScoreCache>,
    steps: &mut u64,
    mut observer: Option<&mut (dyn PassObserver + '_)>,
) -> Result<PositionScoreCache> {
    let width = problem.width();
    let beam_width = problem.config.beam_width;
    let scorer = problem.scorer(direction);
    let vocab = problem.vocab_size();
    let candidates = problem.blank_candidates();
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no tokens are allowed inside the blank".into()));
    }
    let opposite = match fixed {
        Some(cache) => {
            if cache.direction != direction.opposite() {
                return Err(Error::InconsistentCache(format!(
                    "{direction} pass needs {} beams, got {}",
                    direction.opposite(),
                    cache.direction
                )));
            }
            cache.check(width, vocab)?;
            Some(Opposite::new(cache))
        }
        None => None,
    };
    let opp_ctx = fixed.map_or(0.0, |c| c.context_logp);

    let mut lives = vec![Live {
        seq: Vec::new(),
        logps: Vec::new(),
        dists: Vec::new(),
        acc: start.1,
        state: start.0.clone(),
        partner: None,
        score: start.1 + opp_ctx,
    }];

    for step in 0..width {
        let pos = position_of(direction, step, width);
        let parent_dists: Vec<Dist> = lives
            .iter()
            .map(|l| scorer.log_distribution(&l.state).map(Dist::from))
            .collect::<Result<_>>()?;

        let mut cands = Vec::with_capacity(lives.len() * candidates.len());
        for (bi, (live, f)) in lives.iter().zip(&parent_dists).enumerate() {
            for &y in &candidates {
                let base = live.acc + f[y as usize];
                let (partner, score) = match &opposite {
                    None => (None, base),
                    Some(opp) => {
                        let mut best = (0usize, f64::NEG_INFINITY);
                        for (bj, fb) in opp.cache.beams.iter().enumerate() {
                            let s = base + fb.dists[pos][y as usize] + opp.acc[bj][pos];
                            if s > best.1 || (bj == 0 && s == best.1) {
                                best = (bj, s);
                            }
                        }
                        (Some(best.0), best.1)
                    }
                };
                cands.push(Candidate {
                    parent: bi,
                    token: y,
                    partner,
                    score,
                });
            }
        }

        let cmp = |a: &Candidate, b: &Candidate| {
            b.score.total_cmp(&a.score).then_with(|| {
                cmp_extended(direction, &lives[a.parent].seq, a.token, &lives[b.parent].seq, b.token)
            })
        };
        let expansion_size = cands.len() * fixed.map_or(1, |c| c.beams.len());
        if cands.len() > beam_width {
            cands.select_nth_unstable_by(beam_width - 1, cmp);
            cands.truncate(beam_width);
        }
        cands.sort_by(cmp);
        debug_assert!(cands.windows(2).all(|w| w[0].score >= w[1].score));

        if let Some(obs) = observer.as_deref_mut() {
            let record = PassStep {
                direction,
                position: pos,
                live: lives.iter().map(|l| position_ordered(direction, &l.seq)).collect(),
                fixed: fixed.map_or_else(Vec::new, |c| c.ids()),
                expansion_size,
                selected: cands
                    .iter()
                    .map(|c| {
                        let mut seq = lives[c.parent].seq.clone();
                        seq.push(c.token);
                        SelectedCandidate {
                            tokens: position_ordered(direction, &seq),
                            partner: c.partner,
                            score: c.score,
                        }
                    })
                    .collect(),
            };
            obs.on_step(&record);
        }

        let mut next = Vec::with_capacity(cands.len());
        for c in &cands {
            let parent = &lives[c.parent];
            let f = &parent_dists[c.parent];
            let lp = f[c.token as usize];
            let mut seq = parent.seq.clone();
            seq.push(c.token);
            let mut logps = parent.logps.clone();
            logps.push(lp);
            let mut dists = parent.dists.clone();
            dists.push(f.clone());
            let state = scorer.advance(&parent.state, c.token)?;
            *steps += 1;
            next.push(Live {
                seq,
                logps,
                dists,
                acc: parent.acc + lp,
                state,
                partner: c.partner,
                score: c.score,
            });
        }
        lives = next;
    }

    let beams = lives
        .into_iter()
        .map(|l| {
            let (ids, logps, dists) = match direction {
                Direction::Forward => (l.seq, l.logps, l.dists),
                Direction::Backward => {
                    let mut s = l.seq;
                    let mut lp = l.logps;
                    let mut d = l.dists;
                    s.reverse();
                    lp.reverse();
                    d.reverse();
                    (s, lp, d)
                }
            };
            Ok(CachedBeam {
                beam: Beam::new(ids.into(), logps)?,
                dists,
                partner: l.partner,
                objective: l.score,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let cache = PositionScoreCache {
        direction,
        width,
        context_logp: start.1,
        beams,
    };
    if let Some(obs) = observer {
        obs.on_pass(&cache);
    }
    Ok(cache)
}
