use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{parse_corpus, synth, train_ngram, ModelSpec};
use crate::decode::{bibs_decode, FillProblem};
use crate::error::{Error, Result};
use crate::scorers::Instrumented;
use crate::seqcore::{BlankedInstance, Convergence, DecodeConfig};

/// Instrumented cost of one BiBS run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCountRow {
    pub beam: usize,
    pub iters: usize,
    pub width: usize,
    pub blank: u64,
    /// `2 * B * M * w`.
    pub expected: u64,
    pub context: u64,
    pub init: u64,
    pub rescore: u64,
    /// Advances seen by the instrumented scorers; equals the sum of the
    /// four step categories.
    pub observed: u64,
    pub wall_ms: f64,
}

impl StepCountRow {
    pub fn matches(&self) -> bool {
        self.blank == self.expected && self.observed == self.context + self.init + self.blank + self.rescore
    }
}

/// Runs BiBS with a fixed number of meta-iterations for every
/// `(B, M, w)` combination on trigram models trained on a seeded synthetic
/// corpus, counting scorer advances.
pub fn step_count_suite(beams: &[usize], iters: &[usize], widths: &[usize], seed: u64) -> Result<Vec<StepCountRow>> {
    let sentences = parse_corpus(&synth::synth_corpus(500, seed).join("\n"));
    let (vocab, f, b) = train_ngram(&sentences, ModelSpec::default())?;
    let (f, b) = (Instrumented::new(f), Instrumented::new(b));
    let prefix = vocab.encode(&["a", "dog"]);
    let suffix = vocab.encode(&["in", "the", "park"]);
    let mut rows = Vec::new();
    for &beam in beams {
        for &m in iters {
            for &width in widths {
                f.reset();
                b.reset();
                let inst = BlankedInstance::new("bench", prefix.clone(), suffix.clone(), None, width, true)?;
                let cfg = DecodeConfig::new(beam, m)?.with_convergence(Convergence::FixedM);
                let problem = FillProblem::new(inst, &f, &b, cfg)?;
                let start = Instant::now();
                let r = bibs_decode(&problem)?;
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                let s = r.diagnostics.steps;
                rows.push(StepCountRow {
                    beam,
                    iters: m,
                    width,
                    blank: s.blank,
                    expected: (2 * beam * m * width) as u64,
                    context: s.context,
                    init: s.init,
                    rescore: s.rescore,
                    observed: f.advances() + b.advances(),
                    wall_ms,
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::InvalidArgument("empty step-count grid".into()));
    }
    Ok(rows)
}

pub fn format_step_table(rows: &[StepCountRow]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:>3} {:>3} {:>4} {:>8} {:>8} {:>8} {:>6} {:>8} {:>9} {:>6}",
        "B", "M", "w", "blank", "2BMw", "context", "init", "rescore", "wall_ms", "match"
    )
    .expect("writing to a String cannot fail");
    for r in rows {
        writeln!(
            out,
            "{:>3} {:>3} {:>4} {:>8} {:>8} {:>8} {:>6} {:>8} {:>9.3} {:>6}",
            r.beam,
            r.iters,
            r.width,
            r.blank,
            r.expected,
            r.context,
            r.init,
            r.rescore,
            r.wall_ms,
            if r.matches() { "yes" } else { "NO" }
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_matches() {
        let rows = step_count_suite(&[1, 2], &[1, 3], &[2, 4], 0).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(StepCountRow::matches));
        assert_eq!(format_step_table(&rows).lines().count(), 9);
    }
}
