//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line
//! and fails if the criterion (including its runtime bound) is not met.

use std::cell::Cell;
use std::time::{Duration, Instant};

use bibs_core::decode::{
    beam_search, bibs_decode_observed, exact_fill_oracle, sample_combined, unknown_length_decode, Algorithm,
    FillProblem, PassObserver, PassStep,
};
use bibs_core::fitb::{parse_corpus, run_experiment_on, synth, ExperimentSpec, ModelSpec, SplitSizes};
use bibs_core::metrics::{bleu, cider, CiderCorpus};
use bibs_core::scorers::{bidir_combine, ngram_train, Instrumented, NGramModel, Scorer};
use bibs_core::seqcore::{make_blank, rank_order, tokenize, BlankSpec, Vocabulary, EOS};
use bibs_core::{BlankedInstance, Convergence, DecodeConfig, Direction, TokenId, TokenSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, name: &str, ok: bool, detail: &str, elapsed: Duration, limit: Duration) {
    let in_time = elapsed <= limit;
    let status = if ok && in_time { "PASS" } else { "FAIL" };
    println!(
        "criterion {n}: {status} - {name} ({detail}; {:.3}s, limit {:.3}s)",
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    assert!(ok, "criterion {n} failed: {detail}");
    assert!(in_time, "criterion {n} exceeded its runtime bound");
}

/// Random bigram models over `content` content tokens, trained on a
/// seeded random corpus with a skewed token distribution.
fn random_bigram(content: usize, seed: u64) -> (NGramModel, NGramModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..content).map(|_| rng.gen_range(0.1..1.0f64).powi(3)).collect();
    let total: f64 = weights.iter().sum();
    let mut corpus: Vec<TokenSequence> = Vec::new();
    for _ in 0..40 {
        let len = rng.gen_range(1..8);
        let s: Vec<TokenId> = (0..len)
            .map(|_| {
                let mut u = rng.gen_range(0.0..total);
                let mut t = 0;
                while t + 1 < content && u >= weights[t] {
                    u -= weights[t];
                    t += 1;
                }
                (t + 3) as TokenId
            })
            .collect();
        corpus.push(s.into());
    }
    ngram_train(&corpus, 2, rng.gen_range(0.05..1.0), content + 3).unwrap()
}

fn random_context(rng: &mut ChaCha8Rng, content: usize, max_len: usize) -> TokenSequence {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| rng.gen_range(3..(content + 3) as TokenId)).collect()
}

#[test]
fn criterion_01_decomposition_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=50);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-8.0..8.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-8.0..8.0)).collect();
        let got = bidir_combine(&a, &b).unwrap();
        // direct softmax of the summed logits
        let sums: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let m = sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = sums.iter().map(|s| (s - m).exp()).sum();
        for (g, s) in got.iter().zip(&sums) {
            worst = worst.max((g.exp() - (s - m).exp() / z).abs());
        }
    }
    verdict(
        1,
        "bidirectional combination equals softmax of summed logits",
        worst <= 1e-9,
        &format!("max abs error {worst:.2e} over 1000 pairs"),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_02_full_frontier_exactness() {
    let start = Instant::now();
    let mut mismatches = 0;
    for seed in 0..50 {
        let (f, b) = random_bigram(4, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let inst = BlankedInstance::new(
            "c2",
            random_context(&mut rng, 4, 3),
            random_context(&mut rng, 4, 3),
            None,
            4,
            true,
        )
        .unwrap();
        let p = FillProblem::new(inst, &f, &b, DecodeConfig::new(256, 1).unwrap()).unwrap();
        let bs = beam_search(&p, Direction::Forward).unwrap();
        let exact = exact_fill_oracle(&p).unwrap();
        assert_eq!(exact.completions.len(), 256);
        if bs.top().tokens != exact.top().tokens {
            mismatches += 1;
        }
    }
    verdict(
        2,
        "full-frontier beam search matches the exhaustive oracle",
        mismatches == 0,
        &format!("{mismatches}/50 top-1 mismatches"),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[derive(Default)]
struct Recorder {
    steps: Vec<PassStep>,
}

impl PassObserver for Recorder {
    fn on_step(&mut self, step: &PassStep) {
        self.steps.push(step.clone());
    }
}

/// Log-prob of `tokens` (consumption order) from a fresh state, plus the
/// state reached; summed left to right.
fn replay<S: Scorer>(scorer: &S, tokens: &[TokenId]) -> (S::State, f64) {
    let mut state = scorer.initial_state(None).unwrap();
    let mut lp = 0.0;
    for &t in tokens {
        lp += scorer.log_distribution(&state).unwrap()[t as usize];
        state = scorer.advance(&state, t).unwrap();
    }
    (state, lp)
}

/// Tokens that `direction` consumes before deciding blank position `pos`,
/// given a full or partial assignment in position order starting at
/// `offset`.
fn consumed<S: Scorer>(p: &FillProblem<'_, S>, direction: Direction, pos: usize, part: &[TokenId], offset: usize) -> Vec<TokenId> {
    match direction {
        Direction::Forward => {
            let mut t = p.instance.prefix.to_vec();
            t.extend_from_slice(&part[..pos - offset]);
            t
        }
        Direction::Backward => {
            let mut t: Vec<TokenId> = p.instance.suffix.iter().rev().copied().collect();
            t.extend(part[pos + 1 - offset..].iter().rev());
            t
        }
    }
}

/// Brute-force top-B over the full `live x tokens x fixed` expansion set
/// of one recorded step, scores recomputed from scratch.
fn brute_force_step<S: Scorer>(p: &FillProblem<'_, S>, step: &PassStep) -> Vec<(Vec<TokenId>, Option<usize>, f64)> {
    let dir = step.direction;
    let pos = step.position;
    let w = p.width();
    let scorer = p.scorer(dir);
    let other = p.scorer(dir.opposite());
    let mut best: Vec<(Vec<TokenId>, Option<usize>, f64)> = Vec::new();
    for live in &step.live {
        let offset = match dir {
            Direction::Forward => 0,
            Direction::Backward => w - live.len(),
        };
        let (state, lp) = replay(scorer, &consumed(p, dir, pos, live, offset));
        let d = scorer.log_distribution(&state).unwrap();
        for y in p.blank_candidates() {
            let tokens: Vec<TokenId> = match dir {
                Direction::Forward => live.iter().copied().chain([y]).collect(),
                Direction::Backward => [y].into_iter().chain(live.iter().copied()).collect(),
            };
            let base = lp + d[y as usize];
            let mut cand: Option<(Option<usize>, f64)> = None;
            if step.fixed.is_empty() {
                cand = Some((None, base));
            }
            for (j, fixed) in step.fixed.iter().enumerate() {
                let (ostate, olp) = replay(other, &consumed(p, dir.opposite(), pos, fixed, 0));
                let od = other.log_distribution(&ostate).unwrap();
                let s = base + od[y as usize] + olp;
                if cand.is_none_or(|(_, c)| s > c) {
                    cand = Some((Some(j), s));
                }
            }
            let (partner, score) = cand.unwrap();
            best.push((tokens, partner, score));
        }
    }
    best.sort_by(|a, b| rank_order(a.2, &a.0, b.2, &b.0));
    best.truncate(p.config.beam_width);
    best
}

#[test]
fn criterion_03_bibs_step_optimality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut checked, mut bad) = (0usize, 0usize);
    for seed in 0..100 {
        let content = rng.gen_range(2..=5); // |V| <= 8 with the three sentinels
        let (f, b) = random_bigram(content, 500 + seed);
        let width = rng.gen_range(1..=3);
        let beam = rng.gen_range(1..=4);
        let inst = BlankedInstance::new(
            "c3",
            random_context(&mut rng, content, 2),
            random_context(&mut rng, content, 2),
            None,
            width,
            true,
        )
        .unwrap();
        let cfg = DecodeConfig::new(beam, 2).unwrap().with_convergence(Convergence::FixedM);
        let p = FillProblem::new(inst, &f, &b, cfg).unwrap();
        let mut rec = Recorder::default();
        bibs_decode_observed(&p, Some(&mut rec)).unwrap();
        for step in &rec.steps {
            checked += 1;
            let expect = brute_force_step(&p, step);
            let got: Vec<_> = step
                .selected
                .iter()
                .map(|s| (s.tokens.to_vec(), s.partner, s.score))
                .collect();
            let same = got.len() == expect.len()
                && got.iter().zip(&expect).all(|(g, e)| g.0 == e.0 && g.1 == e.1 && g.2.to_bits() == e.2.to_bits());
            if !same {
                bad += 1;
            }
        }
    }
    verdict(
        3,
        "every BiBS update is the exact top-B of its expansion set",
        bad == 0 && checked > 0,
        &format!("{bad} mismatching updates out of {checked}"),
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_04_two_b_m_w_steps() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let corpus: Vec<TokenSequence> = (0..60)
        .map(|_| (0..rng.gen_range(2..12)).map(|_| rng.gen_range(3..11)).collect())
        .collect();
    let (f, b) = ngram_train(&corpus, 3, 0.2, 11).unwrap();
    let (f, b) = (Instrumented::new(f), Instrumented::new(b));
    let mut failures = Vec::new();
    let mut context_total = 0;
    for beam in [1, 3, 5] {
        for iters in [1, 2, 4] {
            for width in [2, 5, 10] {
                f.reset();
                b.reset();
                let inst = BlankedInstance::new("c4", vec![3, 4].into(), vec![5, 6, 7].into(), None, width, true).unwrap();
                let cfg = DecodeConfig::new(beam, iters).unwrap().with_convergence(Convergence::FixedM);
                let p = FillProblem::new(inst, &f, &b, cfg).unwrap();
                let r = Algorithm::Bibs.run(&p, 0).unwrap();
                let steps = r.diagnostics.steps;
                context_total += steps.context;
                let expect = (2 * beam * iters * width) as u64;
                if steps.blank != expect || steps.total() != f.advances() + b.advances() {
                    failures.push(format!("B={beam} M={iters} w={width}: {} vs {expect}", steps.blank));
                }
            }
        }
    }
    verdict(
        4,
        "blank-region advances equal 2*B*M*w",
        failures.is_empty(),
        &format!("27 configurations, {} mismatches, {context_total} context steps reported apart {failures:?}", failures.len()),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

fn synthetic_spec(algorithms: Vec<Algorithm>) -> ExperimentSpec {
    ExperimentSpec {
        corpus: "synthetic".into(),
        splits: SplitSizes { train: 2000, val: 100, test: 200 },
        ratios: vec![0.5],
        algorithms,
        config: DecodeConfig::new(5, 4).unwrap(),
        seed: 2016,
        model: ModelSpec { order: 3, smoothing: 0.1 },
    }
}

fn synthetic_sentences() -> Vec<Vec<String>> {
    parse_corpus(&synth::synth_corpus(2300, 17).join("\n"))
}

#[test]
fn criterion_05_convergence_improvement() {
    let start = Instant::now();
    let exp = run_experiment_on(&synthetic_sentences(), &synthetic_spec(vec![Algorithm::Bibs]), 4).unwrap();
    let row = exp.report.row("bibs", Some(0.5)).unwrap();
    let records = exp.records();
    let n = records.len();
    let non_decreasing = records.iter().filter(|r| r.trace.len() < 2 || r.trace[1] >= r.trace[0]).count();
    let (init, first) = (row.mean_trace[0], row.mean_trace[1]);
    verdict(
        5,
        "one meta-iteration improves the backward-init joint",
        row.instances == 200 && first > init && non_decreasing * 10 >= n * 9,
        &format!(
            "init mean {init:.4}, after 1 meta-iteration {first:.4}, non-decreasing {non_decreasing}/{n}, trace {:?}",
            row.mean_trace.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>()
        ),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_06_bibs_beats_unidirectional_bleu() {
    let start = Instant::now();
    let algos = vec![Algorithm::BeamForward, Algorithm::BeamBackward, Algorithm::Bibs];
    let exp = run_experiment_on(&synthetic_sentences(), &synthetic_spec(algos), 4).unwrap();
    let b4 = |a: &str| exp.report.row(a, Some(0.5)).unwrap().bleu[3];
    let (f, b, bi) = (b4("bs-f"), b4("bs-b"), b4("bibs"));
    println!("{}", exp.report.table());
    verdict(
        6,
        "BiBS BLEU-4 is at least that of forward and backward beam search",
        bi >= f && bi >= b,
        &format!("BLEU-4 bibs {bi:.4}, bs-f {f:.4}, bs-b {b:.4}"),
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_07_blank_construction() {
    let start = Instant::now();
    let words = tokenize("A close up of flowers and plants inside of a bowl");
    let vocab = Vocabulary::from_content(["a", "close", "up", "of", "flowers", "and", "plants", "inside", "bowl"]).unwrap();
    let inst = make_blank("paper", &vocab.encode(&words), &BlankSpec::new(0.5).unwrap()).unwrap();
    let prefix = vocab.decode(&inst.prefix).join(" ");
    let suffix = vocab.decode(&inst.suffix).join(" ");
    let ok = words.len() == 11 && prefix == "a close" && suffix == "of a bowl" && inst.blank_width == 6;
    verdict(
        7,
        "reference caption blanks to \"a close\" / 6 / \"of a bowl\"",
        ok,
        &format!("prefix {prefix:?}, width {}, suffix {suffix:?}", inst.blank_width),
        start.elapsed(),
        Duration::from_millis(1),
    );
}

/// Straight-line CIDEr: explicit vocabularies and dense vectors.
fn cider_oracle(cand: &[&str], refs: &[Vec<&str>], docs: &[Vec<&str>]) -> f64 {
    let grams = |s: &[&str], n: usize| -> Vec<String> { s.windows(n).map(|g| g.join(" ")).collect() };
    let mut total = 0.0;
    for n in 1..=4 {
        let mut space: Vec<String> = docs.iter().flat_map(|d| grams(d, n)).collect();
        space.extend(grams(cand, n));
        space.sort();
        space.dedup();
        let idf: Vec<f64> = space
            .iter()
            .map(|g| {
                let df = docs.iter().filter(|d| grams(d, n).contains(g)).count().max(1);
                ((docs.len() as f64 + 1.0) / df as f64).ln()
            })
            .collect();
        let vec_of = |s: &[&str]| -> Vec<f64> {
            let gs = grams(s, n);
            space
                .iter()
                .zip(&idf)
                .map(|(g, w)| gs.iter().filter(|x| *x == g).count() as f64 * w)
                .collect()
        };
        let c = vec_of(cand);
        let mut sum = 0.0;
        for r in refs {
            let v = vec_of(r);
            let dot: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
            let nc = c.iter().map(|a| a * a).sum::<f64>().sqrt();
            let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            sum += if nc == 0.0 || nv == 0.0 { 0.0 } else { dot / (nc * nv) };
        }
        total += sum / refs.len() as f64;
    }
    10.0 * total / 4.0
}

#[test]
fn criterion_08_metric_goldens() {
    let start = Instant::now();
    let w = |s: &'static str| s.split_whitespace().collect::<Vec<&str>>();
    let identity = (1..=4).all(|n| (bleu(&w("a man rides a horse"), &[w("a man rides a horse")], n) - 1.0).abs() < 1e-12);
    let clip = bleu(&w("the the the"), &[w("the cat")], 1);
    let single = w("a man rides a horse");
    let self_cider = cider(&single, std::slice::from_ref(&single), &CiderCorpus::new(&[vec![single.clone()]]).unwrap());
    let docs = vec![w("a dog runs on the grass"), w("a cat sleeps on the couch"), w("the dog chases a ball")];
    let corpus = CiderCorpus::new(&docs.iter().map(|d| vec![d.clone()]).collect::<Vec<_>>()).unwrap();
    let cand = w("a dog sleeps on the grass");
    let refs = vec![docs[0].clone(), docs[2].clone()];
    let got = cider(&cand, &refs, &corpus);
    let want = cider_oracle(&cand, &refs, &docs);
    let ok = identity && (clip - 1.0 / 3.0).abs() < 1e-12 && (self_cider - 10.0).abs() < 1e-9 && (got - want).abs() < 1e-9;
    verdict(
        8,
        "BLEU and CIDEr golden values",
        ok,
        &format!("identity {identity}, clip {clip:.6}, self-CIDEr {self_cider:.6}, toy CIDEr {got:.9} vs oracle {want:.9}"),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_09_unknown_length_range() {
    let start = Instant::now();
    // "p x y" and "a b c d s": from prefix "p" the forward model continues
    // "x y" then stops; from suffix "s" the backward model continues
    // "d c b a" then stops
    let vocab = Vocabulary::from_content(["p", "x", "y", "a", "b", "c", "d", "s"]).unwrap();
    let corpus: Vec<TokenSequence> = ["p x y", "a b c d s"].iter().map(|s| vocab.encode(&tokenize(s))).collect();
    let (f, b) = ngram_train(&corpus, 2, 0.01, vocab.len()).unwrap();
    let (f, b) = (Instrumented::new(f), Instrumented::new(b));
    let inst = BlankedInstance::new("c9", vocab.encode(&["p"]), vocab.encode(&["s"]), None, 0, false).unwrap();
    let p = FillProblem::new(inst, &f, &b, DecodeConfig::default()).unwrap();
    let calls = Cell::new(0);
    let widths_seen = std::cell::RefCell::new(Vec::new());
    let r = unknown_length_decode(&p, |q| {
        calls.set(calls.get() + 1);
        widths_seen.borrow_mut().push(q.width());
        Algorithm::Bibs.run(q, 0)
    })
    .unwrap();
    let widths = widths_seen.into_inner();
    let ok = calls.get() == 3
        && widths == vec![2, 3, 4]
        && r.diagnostics.widths_searched == widths
        && r.diagnostics.steps.total() == f.advances() + b.advances();
    verdict(
        9,
        "unknown width searches every width between the open generations",
        ok,
        &format!("{} inner decodes at widths {widths:?}", calls.get()),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_10_gsn_sampler_calibration() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 12;
    let logits = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.5..2.5)).collect();
        let m = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z = raw.iter().map(|x| (x - m).exp()).sum::<f64>().ln() + m;
        raw.iter().map(|x| x - z).collect()
    };
    let fwd = logits(&mut rng);
    let bwd = logits(&mut rng);
    let mut allowed = vec![true; n];
    allowed[0] = false;
    allowed[EOS as usize] = false;
    let probs: Vec<f64> = {
        let s: Vec<f64> = (0..n).map(|i| if allowed[i] { (fwd[i] + bwd[i]).exp() } else { 0.0 }).collect();
        let z: f64 = s.iter().sum();
        s.iter().map(|x| x / z).collect()
    };
    let draws = 10_000;
    let mut counts = vec![0usize; n];
    let mut sampler = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..draws {
        counts[sample_combined(&fwd, &bwd, &allowed, &mut sampler).unwrap() as usize] += 1;
    }
    let mut worst = 0.0f64;
    let mut tested = 0;
    for i in 0..n {
        if probs[i] >= 0.01 {
            tested += 1;
            let mean = draws as f64 * probs[i];
            let sigma = (mean * (1.0 - probs[i])).sqrt();
            worst = worst.max((counts[i] as f64 - mean).abs() / sigma);
        }
    }
    let masked_ok = counts[0] == 0 && counts[EOS as usize] == 0;
    verdict(
        10,
        "GSN resampling frequencies match the combined conditional",
        worst <= 3.0 && masked_ok,
        &format!("{tested} tokens with p >= 0.01, worst deviation {worst:.4} sigma"),
        start.elapsed(),
        Duration::from_secs(10),
    );
}
