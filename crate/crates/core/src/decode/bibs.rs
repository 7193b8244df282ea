//! Bidirectional beam search.
//!
//! Starting from `B` complete blank assignments, BiBS alternates
//! left-to-right and right-to-left passes. A forward pass at position `t`
//! scores every pairing of a live forward prefix, a token and a fixed
//! backward beam by
//!
//! ```text
//! log p(Y_b[..t]) + log p(y | Y_b[..t]) + log p(y | Y_b'[t+1..]) + log p(Y_b'[t+1..])
//! ```
//!
//! using cached per-position distributions of the fixed beams, and keeps
//! the top `B` extensions. The backward pass mirrors this. One forward plus
//! one backward pass is a meta-iteration; each costs `B * w` advances per
//! direction.

use super::pass::{directional_pass, PassObserver, PositionScoreCache};
use super::{clamped_result, Completion, DecodeResult, Diagnostics, FillProblem, StepCounts};
use crate::error::Result;
use crate::scorers::Scorer;
use crate::seqcore::{rank_order, Convergence, Direction};

/// Initial beams: standard beam search in `config.init_direction`, with
/// the per-position caches BiBS needs.
pub fn initial_beams<S: Scorer>(problem: &FillProblem<'_, S>, steps: &mut StepCounts) -> Result<PositionScoreCache> {
    let dir = problem.config.init_direction;
    let start = problem.context_state(dir, &mut steps.context)?;
    directional_pass(problem, dir, &start, None, &mut steps.init, None)
}

/// A single BiBS update pass in `direction`, holding `fixed` (beams of the
/// opposite direction) constant.
pub fn bibs_pass<S: Scorer>(
    problem: &FillProblem<'_, S>,
    fixed: &PositionScoreCache,
    direction: Direction,
    observer: Option<&mut dyn PassObserver>,
) -> Result<(PositionScoreCache, StepCounts)> {
    let mut steps = StepCounts::default();
    let start = problem.context_state(direction, &mut steps.context)?;
    let cache = directional_pass(problem, direction, &start, Some(fixed), &mut steps.blank, observer)?;
    Ok((cache, steps))
}

pub fn bibs_decode<S: Scorer>(problem: &FillProblem<'_, S>) -> Result<DecodeResult> {
    bibs_decode_observed(problem, None)
}

fn joints<S: Scorer>(problem: &FillProblem<'_, S>, cache: &PositionScoreCache, steps: &mut u64) -> Result<Vec<f64>> {
    cache.beams.iter().map(|b| problem.joint_logp(b.ids(), steps)).collect()
}

fn best(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// [`bibs_decode`] with an observer that sees every selection step and
/// every completed pass.
pub fn bibs_decode_observed<S: Scorer>(
    problem: &FillProblem<'_, S>,
    mut observer: Option<&mut dyn PassObserver>,
) -> Result<DecodeResult> {
    if problem.width() == 0 {
        return clamped_result(problem, "bibs");
    }
    let cfg = &problem.config;
    let mut steps = StepCounts::default();

    let init_dir = cfg.init_direction;
    let first_dir = init_dir.opposite();
    let start_first = problem.context_state(first_dir, &mut steps.context)?;
    let start_second = problem.context_state(init_dir, &mut steps.context)?;
    let mut current = directional_pass(problem, init_dir, &start_second, None, &mut steps.init, None)?;
    if let Some(obs) = observer.as_deref_mut() {
        obs.on_pass(&current);
    }

    let mut current_joints = joints(problem, &current, &mut steps.rescore)?;
    let mut trace = vec![best(&current_joints)];
    let mut executed = 0;
    for _ in 0..cfg.meta_iterations {
        let previous = current.ids();
        let there = directional_pass(
            problem,
            first_dir,
            &start_first,
            Some(&current),
            &mut steps.blank,
            observer.as_deref_mut(),
        )?;
        current = directional_pass(
            problem,
            init_dir,
            &start_second,
            Some(&there),
            &mut steps.blank,
            observer.as_deref_mut(),
        )?;
        executed += 1;
        current_joints = joints(problem, &current, &mut steps.rescore)?;
        trace.push(best(&current_joints));
        if cfg.convergence == Convergence::StopOnUnchangedBeams && current.ids() == previous {
            break;
        }
    }

    let mut completions: Vec<Completion> = current
        .beams
        .iter()
        .zip(current_joints)
        .map(|(b, joint)| Completion {
            tokens: b.ids().clone(),
            objective: b.objective,
            joint_logp: joint,
        })
        .collect();
    completions.sort_by(|a, b| rank_order(a.joint_logp, &a.tokens, b.joint_logp, &b.tokens));

    Ok(DecodeResult {
        algorithm: "bibs".to_string(),
        completions,
        diagnostics: Diagnostics {
            meta_iterations: executed,
            steps,
            trace,
            widths_searched: Vec::new(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::scorers::{ngram_train, Instrumented, NGramModel};
    use crate::seqcore::{BlankedInstance, DecodeConfig, TokenSequence};

    fn models() -> (NGramModel, NGramModel) {
        let corpus: Vec<TokenSequence> = vec![
            vec![3, 4, 5, 6].into(),
            vec![3, 5, 5, 4, 6].into(),
            vec![4, 4, 3, 5].into(),
            vec![6, 3, 4, 4, 5].into(),
            vec![3, 6, 6, 5].into(),
        ];
        ngram_train(&corpus, 3, 0.1, 7).unwrap()
    }

    fn inst(width: usize) -> BlankedInstance {
        BlankedInstance::new("t", vec![3, 4].into(), vec![5, 6].into(), None, width, true).unwrap()
    }

    #[test]
    fn empty_blank_consumes_no_blank_steps() {
        let (f, b) = models();
        let p = FillProblem::new(inst(0), &f, &b, DecodeConfig::default()).unwrap();
        let r = bibs_decode(&p).unwrap();
        assert!(r.top().tokens.is_empty());
        assert_eq!(r.diagnostics.steps.blank, 0);
        assert_eq!(r.diagnostics.steps.init, 0);
    }

    #[test]
    fn blank_steps_follow_two_b_m_w() {
        let (f, b) = models();
        let fi = Instrumented::new(&f);
        let bi = Instrumented::new(&b);
        for (bw, m, w) in [(1, 1, 2), (3, 2, 3), (2, 3, 1)] {
            let cfg = DecodeConfig::new(bw, m).unwrap().with_convergence(Convergence::FixedM);
            let p = FillProblem::new(inst(w), &fi, &bi, cfg).unwrap();
            fi.reset();
            bi.reset();
            let r = bibs_decode(&p).unwrap();
            let s = r.diagnostics.steps;
            assert_eq!(s.blank, (2 * bw * m * w) as u64);
            assert_eq!(s.total(), fi.advances() + bi.advances());
            assert_eq!(r.diagnostics.meta_iterations, m);
            assert_eq!(r.diagnostics.trace.len(), m + 1);
        }
    }

    #[test]
    fn completions_are_ranked_by_joint_and_have_blank_width() {
        let (f, b) = models();
        let p = FillProblem::new(inst(3), &f, &b, DecodeConfig::new(4, 3).unwrap()).unwrap();
        let r = bibs_decode(&p).unwrap();
        assert!(r.completions.windows(2).all(|w| w[0].joint_logp >= w[1].joint_logp));
        assert!(r.completions.iter().all(|c| c.tokens.len() == 3));
        for c in &r.completions {
            let mut s = 0;
            assert_eq!(c.joint_logp, p.joint_logp(&c.tokens, &mut s).unwrap());
        }
    }

    #[test]
    fn stops_once_beams_repeat() {
        let (f, b) = models();
        let cfg = DecodeConfig::new(2, 50).unwrap();
        let p = FillProblem::new(inst(2), &f, &b, cfg).unwrap();
        let r = bibs_decode(&p).unwrap();
        assert!(r.diagnostics.meta_iterations < 50);
    }

    #[test]
    fn pass_rejects_mismatched_cache() {
        let (f, b) = models();
        let p3 = FillProblem::new(inst(3), &f, &b, DecodeConfig::new(2, 1).unwrap()).unwrap();
        let p2 = p3.with_width(2);
        let mut steps = StepCounts::default();
        let cache = initial_beams(&p2, &mut steps).unwrap();
        assert!(matches!(
            bibs_pass(&p3, &cache, Direction::Forward, None),
            Err(Error::InconsistentCache(_))
        ));
        // same direction as the pass is also inconsistent
        let cache3 = initial_beams(&p3, &mut steps).unwrap();
        assert!(bibs_pass(&p3, &cache3, Direction::Backward, None).is_err());
        assert!(bibs_pass(&p3, &cache3, Direction::Forward, None).is_ok());
    }

    #[test]
    fn clamped_context_is_never_altered() {
        let (f, b) = models();
        let p = FillProblem::new(inst(2), &f, &b, DecodeConfig::new(3, 2).unwrap()).unwrap();
        let r = bibs_decode(&p).unwrap();
        for c in &r.completions {
            let full = p.instance.assemble(&c.tokens);
            assert_eq!(&full[..2], &[3u32, 4][..]);
            assert_eq!(&full[4..], &[5u32, 6][..]);
        }
    }
}
