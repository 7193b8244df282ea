use std::time::Instant;

use rayon::prelude::*;

use crate::decode::{Algorithm, DecodeResult, FillProblem, ResultRecord};
use crate::error::{Error, Result};
use crate::scorers::Scorer;
use crate::seqcore::{DecodeConfig, FitbRecord, Vocabulary};

/// A decoded (or failed) instance together with its wall time.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub record: ResultRecord,
    pub wall_ms: f64,
}

/// Seed for the instance at `index`, independent of scheduling order.
pub fn instance_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Shared inputs of a batch decode.
pub struct DecodeJob<'a, S> {
    pub vocab: &'a Vocabulary,
    pub forward: &'a S,
    pub backward: &'a S,
    pub config: &'a DecodeConfig,
    pub seed: u64,
    /// Ranked completions kept per record beyond the top one (1 = top only).
    pub nbest: usize,
}

impl<S: Scorer + Sync> DecodeJob<'_, S> {
    /// Decodes one instance; decoder errors become failure records.
    pub fn decode_one(&self, algorithm: &Algorithm, index: usize, record: &FitbRecord) -> Outcome {
        let start = Instant::now();
        let result: Result<DecodeResult> = record.to_instance(self.vocab).and_then(|inst| {
            let problem = FillProblem::new(inst, self.forward, self.backward, self.config.clone())?;
            algorithm.run(&problem, instance_seed(self.seed, index))
        });
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let record = match result {
            Ok(r) => ResultRecord::with_nbest(&record.id, &r, self.vocab, self.nbest),
            Err(e) => {
                log::warn!("{} on {}: {e}", algorithm, record.id);
                ResultRecord::failure(&record.id, &algorithm.to_string(), e)
            }
        };
        Outcome { record, wall_ms }
    }

    /// Decodes every record with every algorithm on a pool of `jobs`
    /// threads. Output is grouped by algorithm, records in input order.
    pub fn decode_all(&self, algorithms: &[Algorithm], records: &[FitbRecord], jobs: usize) -> Result<Vec<Outcome>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        let work: Vec<(&Algorithm, usize, &FitbRecord)> = algorithms
            .iter()
            .flat_map(|a| records.iter().enumerate().map(move |(i, r)| (a, i, r)))
            .collect();
        Ok(pool.install(|| work.par_iter().map(|&(a, i, r)| self.decode_one(a, i, r)).collect()))
    }
}
