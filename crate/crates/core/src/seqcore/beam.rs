use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{Direction, TokenId, TokenSequence};
use crate::error::{Error, Result};

/// Ranking order used by every decoder: higher score first, and on an exact
/// tie the lexicographically smaller id sequence first.
pub fn rank_order(a_score: f64, a_ids: &[TokenId], b_score: f64, b_ids: &[TokenId]) -> Ordering {
    b_score.total_cmp(&a_score).then_with(|| a_ids.cmp(b_ids))
}

/// A (partial) hypothesis with cached per-position conditional log-probs.
///
/// `ids` and `dir_logp` are both stored in position order, whatever the
/// owning direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    pub ids: TokenSequence,
    pub dir_logp: Vec<f64>,
    pub total_logp: f64,
}

impl Beam {
    pub fn empty() -> Self {
        Beam {
            ids: TokenSequence::empty(),
            dir_logp: Vec::new(),
            total_logp: 0.0,
        }
    }

    pub fn new(ids: TokenSequence, dir_logp: Vec<f64>) -> Result<Self> {
        if ids.len() != dir_logp.len() {
            return Err(Error::InvalidArgument(format!(
                "beam has {} ids but {} log-probs",
                ids.len(),
                dir_logp.len()
            )));
        }
        if let Some(bad) = dir_logp.iter().find(|&&lp| lp > 0.0 || lp.is_nan()) {
            return Err(Error::InvalidArgument(format!(
                "conditional log-prob {bad} is not <= 0"
            )));
        }
        let total_logp = dir_logp.iter().sum();
        Ok(Beam {
            ids,
            dir_logp,
            total_logp,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// An ordered collection of at most `B` beams in one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSet {
    pub direction: Direction,
    pub beams: Vec<Beam>,
}

impl BeamSet {
    /// Sorts `beams` and truncates to `width`.
    pub fn new(direction: Direction, mut beams: Vec<Beam>, width: usize) -> Result<Self> {
        if beams.is_empty() {
            return Err(Error::InvalidArgument("beam set must hold at least one beam".into()));
        }
        if width == 0 {
            return Err(Error::InvalidArgument("beam width must be >= 1".into()));
        }
        beams.sort_by(|a, b| rank_order(a.total_logp, &a.ids, b.total_logp, &b.ids));
        beams.truncate(width);
        Ok(BeamSet { direction, beams })
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    pub fn top(&self) -> &Beam {
        &self.beams[0]
    }

    pub fn is_sorted(&self) -> bool {
        self.beams.windows(2).all(|w| {
            rank_order(w[0].total_logp, &w[0].ids, w[1].total_logp, &w[1].ids) != Ordering::Greater
        })
    }
}
