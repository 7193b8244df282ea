use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::experiment::ratio_of_id;
use crate::decode::ResultRecord;
use crate::error::{Error, Result};
use crate::metrics::{bleu, cider, BleuCounts, CiderCorpus, MAX_ORDER};
use crate::seqcore::FitbRecord;

/// Aggregates for one (algorithm, blank ratio) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algorithm: String,
    /// `None` when instance ids carry no ratio.
    pub ratio: Option<f64>,
    /// Instances that decoded successfully and enter the means.
    pub instances: usize,
    pub failures: usize,
    /// Mean sentence-level BLEU-1..4 over full sentences.
    pub bleu: [f64; MAX_ORDER],
    /// Corpus-level BLEU-1..4 (pooled counts) over full sentences.
    pub corpus_bleu: [f64; MAX_ORDER],
    pub cider: f64,
    /// Mean sentence-level BLEU-1..4 over the blank span alone.
    pub blank_bleu: [f64; MAX_ORDER],
    pub blank_cider: f64,
    pub mean_joint_logp: f64,
    pub mean_advance_steps: f64,
    /// Absent when wall times were not measured (e.g. evaluating a file).
    pub mean_wall_ms: Option<f64>,
    /// Mean best joint log-prob per meta-iteration; shorter traces are
    /// padded with their last value.
    pub mean_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
}

/// Scores decoded records against the gold spans of `dataset`.
///
/// `cider_refs` supplies the document-frequency corpus; by default the
/// distinct original sentences of the dataset are used. `wall_ms`, when
/// given, is parallel to `records`.
pub fn evaluate(
    records: &[ResultRecord],
    dataset: &[FitbRecord],
    cider_refs: Option<&[Vec<String>]>,
    wall_ms: Option<&[f64]>,
) -> Result<RunReport> {
    if records.is_empty() {
        return Err(Error::NoResults);
    }
    if let Some(w) = wall_ms {
        if w.len() != records.len() {
            return Err(Error::Shape(format!("{} wall times for {} records", w.len(), records.len())));
        }
    }
    let by_id: HashMap<&str, &FitbRecord> = dataset.iter().map(|r| (r.id.as_str(), r)).collect();

    let mut missing: BTreeSet<String> = records
        .iter()
        .filter(|r| !by_id.contains_key(r.id.as_str()))
        .map(|r| r.id.clone())
        .collect();
    let mut algorithms: Vec<&str> = Vec::new();
    for r in records {
        if !algorithms.contains(&r.algorithm.as_str()) {
            algorithms.push(&r.algorithm);
        }
    }
    let mut seen: HashSet<(&str, &str)> = HashSet::new();
    for r in records {
        if !seen.insert((&r.algorithm, &r.id)) {
            return Err(Error::InvalidArgument(format!("duplicate result for {} / {}", r.algorithm, r.id)));
        }
    }
    for a in &algorithms {
        for d in dataset {
            if !seen.contains(&(*a, d.id.as_str())) {
                missing.insert(format!("{a}:{}", d.id));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingIds(missing.into_iter().collect()));
    }
    if let Some(d) = dataset.iter().find(|d| d.gold.is_none()) {
        return Err(Error::InvalidArgument(format!("instance {} has no gold span to evaluate", d.id)));
    }

    let original = |d: &FitbRecord| -> Vec<String> {
        let mut s = d.prefix.clone();
        s.extend(d.gold.iter().flatten().cloned());
        s.extend(d.suffix.iter().cloned());
        s
    };
    let default_refs: Vec<Vec<Vec<String>>>;
    let full_corpus = match cider_refs {
        Some(refs) => CiderCorpus::new(&refs.iter().map(|r| vec![r.clone()]).collect::<Vec<_>>())?,
        None => {
            let uniq: BTreeSet<Vec<String>> = dataset.iter().map(original).collect();
            default_refs = uniq.into_iter().map(|s| vec![s]).collect();
            CiderCorpus::new(&default_refs)?
        }
    };
    let blanks: BTreeSet<Vec<String>> = dataset
        .iter()
        .filter_map(|d| d.gold.clone())
        .filter(|g| !g.is_empty())
        .collect();
    let blank_docs: Vec<Vec<Vec<String>>> = blanks.into_iter().map(|g| vec![g]).collect();
    let blank_corpus = if blank_docs.is_empty() { None } else { Some(CiderCorpus::new(&blank_docs)?) };

    #[derive(Default)]
    struct Acc {
        n: usize,
        failures: usize,
        bleu: [f64; MAX_ORDER],
        counts: BleuCounts,
        cider: f64,
        blank_n: usize,
        blank_bleu: [f64; MAX_ORDER],
        blank_cider: f64,
        joint: f64,
        steps: f64,
        wall: Option<f64>,
        traces: Vec<Vec<f64>>,
    }
    let mut cells: Vec<((String, Option<u64>), Acc)> = Vec::new();
    for (i, r) in records.iter().enumerate() {
        let ratio = ratio_of_id(&r.id);
        let key = (r.algorithm.clone(), ratio.map(f64::to_bits));
        let idx = match cells.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                cells.push((key, Acc::default()));
                cells.len() - 1
            }
        };
        let acc = &mut cells[idx].1;
        if r.is_failure() {
            acc.failures += 1;
            continue;
        }
        let d = by_id[r.id.as_str()];
        let gold = d.gold.as_ref().expect("checked above");
        let reference = original(d);
        let mut hyp = d.prefix.clone();
        hyp.extend(r.completion.iter().cloned());
        hyp.extend(d.suffix.iter().cloned());
        let refs = [reference];
        acc.n += 1;
        for n in 1..=MAX_ORDER {
            acc.bleu[n - 1] += bleu(&hyp, &refs, n);
        }
        acc.counts.add(&BleuCounts::new(&hyp, &refs));
        acc.cider += cider(&hyp, &refs, &full_corpus);
        if let Some(bc) = &blank_corpus {
            if !gold.is_empty() {
                acc.blank_n += 1;
                let grefs = [gold.clone()];
                for n in 1..=MAX_ORDER {
                    acc.blank_bleu[n - 1] += bleu(&r.completion, &grefs, n);
                }
                acc.blank_cider += cider(&r.completion, &grefs, bc);
            }
        }
        acc.joint += r.joint_logp;
        acc.steps += r.advance_steps as f64;
        if let Some(w) = wall_ms {
            *acc.wall.get_or_insert(0.0) += w[i];
        }
        acc.traces.push(r.trace.clone());
    }

    let mean = |x: f64, n: usize| if n == 0 { 0.0 } else { x / n as f64 };
    let mut rows: Vec<ReportRow> = cells
        .into_iter()
        .map(|((algorithm, ratio), a)| {
            let len = a.traces.iter().map(Vec::len).max().unwrap_or(0);
            let mean_trace = (0..len)
                .map(|j| {
                    let vals: Vec<f64> = a
                        .traces
                        .iter()
                        .filter_map(|t| t.get(j).or(t.last()).copied())
                        .collect();
                    mean(vals.iter().sum(), vals.len())
                })
                .collect();
            ReportRow {
                algorithm,
                ratio: ratio.map(f64::from_bits),
                instances: a.n,
                failures: a.failures,
                bleu: a.bleu.map(|b| mean(b, a.n)),
                corpus_bleu: std::array::from_fn(|i| if a.n == 0 { 0.0 } else { a.counts.score(i + 1) }),
                cider: mean(a.cider, a.n),
                blank_bleu: a.blank_bleu.map(|b| mean(b, a.blank_n)),
                blank_cider: mean(a.blank_cider, a.blank_n),
                mean_joint_logp: mean(a.joint, a.n),
                mean_advance_steps: mean(a.steps, a.n),
                mean_wall_ms: a.wall.map(|w| mean(w, a.n)),
                mean_trace,
            }
        })
        .collect();
    let order = |a: &str| algorithms.iter().position(|x| *x == a).unwrap_or(usize::MAX);
    rows.sort_by(|x, y| {
        order(&x.algorithm)
            .cmp(&order(&y.algorithm))
            .then(x.ratio.unwrap_or(-1.0).total_cmp(&y.ratio.unwrap_or(-1.0)))
    });
    Ok(RunReport { rows })
}

impl RunReport {
    pub fn row(&self, algorithm: &str, ratio: Option<f64>) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm && r.ratio == ratio)
    }

    /// Fixed-width text table, one line per row.
    pub fn table(&self) -> String {
        let header = [
            "algorithm", "ratio", "n", "fail", "B1", "B2", "B3", "B4", "cB4", "CIDEr", "blankB4", "blankCIDEr",
            "joint", "steps", "ms",
        ];
        let mut lines: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for r in &self.rows {
            lines.push(vec![
                r.algorithm.clone(),
                r.ratio.map_or("-".into(), |x| format!("{x:.2}")),
                r.instances.to_string(),
                r.failures.to_string(),
                format!("{:.4}", r.bleu[0]),
                format!("{:.4}", r.bleu[1]),
                format!("{:.4}", r.bleu[2]),
                format!("{:.4}", r.bleu[3]),
                format!("{:.4}", r.corpus_bleu[3]),
                format!("{:.4}", r.cider),
                format!("{:.4}", r.blank_bleu[3]),
                format!("{:.4}", r.blank_cider),
                format!("{:.4}", r.mean_joint_logp),
                format!("{:.1}", r.mean_advance_steps),
                r.mean_wall_ms.map_or("-".into(), |x| format!("{x:.3}")),
            ]);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for l in &lines {
            let cells: Vec<String> = l
                .iter()
                .enumerate()
                .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
                .collect();
            writeln!(out, "{}", cells.join("  ").trim_end()).expect("writing to a String cannot fail");
        }
        out
    }
}
