use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_token, Scorer};
use crate::error::{Error, Result};
use crate::seqcore::{Direction, TokenId, BOS};
use crate::util::{self, log_softmax};

const RNN_VERSION: u32 = 1;

/// Declared layer sizes of an Elman network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RnnDims {
    #[serde(rename = "H")]
    pub hidden: usize,
    #[serde(rename = "E")]
    pub embed: usize,
    #[serde(rename = "V")]
    pub vocab: usize,
}

/// Elman RNN parameters, all matrices row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnWeights {
    dims: RnnDims,
    /// H x E
    w_x: Vec<f64>,
    /// H x H
    w_h: Vec<f64>,
    b_h: Vec<f64>,
    /// V x H
    w_y: Vec<f64>,
    b_y: Vec<f64>,
    /// V x E
    embedding: Vec<f64>,
    x0: Option<Vec<f64>>,
}

/// On-disk layout of [`RnnWeights`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RnnFile {
    pub version: u32,
    pub direction: Direction,
    pub dims: RnnDims,
    pub w_x: Vec<f64>,
    pub w_h: Vec<f64>,
    pub b_h: Vec<f64>,
    pub w_y: Vec<f64>,
    pub b_y: Vec<f64>,
    pub embedding: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

fn check_len(name: &str, v: &[f64], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::Shape(format!(
            "{name} has {} entries, declared shape needs {expected}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} has a non-finite entry")));
    }
    Ok(())
}

impl RnnWeights {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dims: RnnDims,
        w_x: Vec<f64>,
        w_h: Vec<f64>,
        b_h: Vec<f64>,
        w_y: Vec<f64>,
        b_y: Vec<f64>,
        embedding: Vec<f64>,
        x0: Option<Vec<f64>>,
    ) -> Result<Self> {
        let RnnDims { hidden, embed, vocab } = dims;
        if hidden == 0 || embed == 0 || vocab == 0 {
            return Err(Error::Shape("all dimensions must be positive".into()));
        }
        check_len("w_x", &w_x, hidden * embed)?;
        check_len("w_h", &w_h, hidden * hidden)?;
        check_len("b_h", &b_h, hidden)?;
        check_len("w_y", &w_y, vocab * hidden)?;
        check_len("b_y", &b_y, vocab)?;
        check_len("embedding", &embedding, vocab * embed)?;
        if let Some(x) = &x0 {
            check_len("x0", x, embed)?;
        }
        Ok(RnnWeights {
            dims,
            w_x,
            w_h,
            b_h,
            w_y,
            b_y,
            embedding,
            x0,
        })
    }

    pub fn zeros(dims: RnnDims) -> Self {
        let RnnDims { hidden, embed, vocab } = dims;
        RnnWeights {
            dims,
            w_x: vec![0.0; hidden * embed],
            w_h: vec![0.0; hidden * hidden],
            b_h: vec![0.0; hidden],
            w_y: vec![0.0; vocab * hidden],
            b_y: vec![0.0; vocab],
            embedding: vec![0.0; vocab * embed],
            x0: None,
        }
    }

    /// Weights drawn uniformly from `[-scale, scale]`.
    pub fn random(dims: RnnDims, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.gen_range(-scale..=scale)).collect()
        };
        let RnnDims { hidden, embed, vocab } = dims;
        RnnWeights {
            dims,
            w_x: draw(hidden * embed),
            w_h: draw(hidden * hidden),
            b_h: draw(hidden),
            w_y: draw(vocab * hidden),
            b_y: draw(vocab),
            embedding: draw(vocab * embed),
            x0: None,
        }
    }

    pub fn dims(&self) -> RnnDims {
        self.dims
    }

    pub fn w_x(&self) -> &[f64] {
        &self.w_x
    }
    pub fn w_h(&self) -> &[f64] {
        &self.w_h
    }
    pub fn b_h(&self) -> &[f64] {
        &self.b_h
    }
    pub fn w_y(&self) -> &[f64] {
        &self.w_y
    }
    pub fn b_y(&self) -> &[f64] {
        &self.b_y
    }
    pub fn embedding(&self) -> &[f64] {
        &self.embedding
    }
    pub fn x0(&self) -> Option<&[f64]> {
        self.x0.as_deref()
    }

    pub fn set_output_bias(&mut self, b_y: Vec<f64>) -> Result<()> {
        check_len("b_y", &b_y, self.dims.vocab)?;
        self.b_y = b_y;
        Ok(())
    }

    pub fn set_output_matrix(&mut self, w_y: Vec<f64>) -> Result<()> {
        check_len("w_y", &w_y, self.dims.vocab * self.dims.hidden)?;
        self.w_y = w_y;
        Ok(())
    }

    pub fn set_conditioning(&mut self, x0: Option<Vec<f64>>) -> Result<()> {
        if let Some(x) = &x0 {
            check_len("x0", x, self.dims.embed)?;
        }
        self.x0 = x0;
        Ok(())
    }

    /// `tanh(W_x x + W_h h + b_h)`
    fn transition(&self, x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
        let RnnDims { hidden, embed, .. } = self.dims;
        let mut out = Vec::with_capacity(hidden);
        for i in 0..hidden {
            let mut acc = self.b_h[i];
            let wx = &self.w_x[i * embed..(i + 1) * embed];
            acc += wx.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            let wh = &self.w_h[i * hidden..(i + 1) * hidden];
            acc += wh.iter().zip(h).map(|(w, v)| w * v).sum::<f64>();
            let a = acc.tanh();
            if !a.is_finite() {
                return Err(Error::NumericOverflow);
            }
            out.push(a);
        }
        Ok(out)
    }

    /// Output scores `W_y h + bias_scale * b_y`.
    pub fn output_logits(&self, h: &[f64], bias_scale: f64) -> Vec<f64> {
        let RnnDims { hidden, vocab, .. } = self.dims;
        (0..vocab)
            .map(|v| {
                let row = &self.w_y[v * hidden..(v + 1) * hidden];
                row.iter().zip(h).map(|(w, x)| w * x).sum::<f64>() + bias_scale * self.b_y[v]
            })
            .collect()
    }

    fn embed(&self, token: TokenId) -> &[f64] {
        let e = self.dims.embed;
        &self.embedding[token as usize * e..(token as usize + 1) * e]
    }
}

/// One Elman step: consumes `token`, returns the new hidden state and the
/// log-softmax output distribution computed from it.
pub fn rnn_step(weights: &RnnWeights, h: &[f64], token: TokenId) -> Result<(Vec<f64>, Vec<f64>)> {
    check_token(token, weights.dims.vocab)?;
    if h.len() != weights.dims.hidden {
        return Err(Error::Shape(format!(
            "state has dimension {}, weights expect {}",
            h.len(),
            weights.dims.hidden
        )));
    }
    let next = weights.transition(weights.embed(token), h)?;
    let logits = weights.output_logits(&next, 1.0);
    if logits.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericOverflow);
    }
    let dist = log_softmax(&logits);
    Ok((next, dist))
}

/// Output of a softmax BiRNN, `log softmax(W_y^f h^f + W_y^b h^b + b_y)`,
/// where `forward` and `backward` carry their own output matrices and the
/// shared bias is `forward.b_y + backward.b_y`.
pub fn birnn_output(forward: &RnnWeights, h_fwd: &[f64], backward: &RnnWeights, h_bwd: &[f64]) -> Result<Vec<f64>> {
    if forward.dims.vocab != backward.dims.vocab {
        return Err(Error::Shape("forward and backward vocabularies differ".into()));
    }
    let f = forward.output_logits(h_fwd, 1.0);
    let b = backward.output_logits(h_bwd, 1.0);
    let summed: Vec<f64> = f.iter().zip(&b).map(|(x, y)| x + y).collect();
    Ok(log_softmax(&summed))
}

/// A directional Elman RNN scorer.
///
/// The initial state consumes the conditioning vector (when present) as
/// step zero and then the BOS embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnScorer {
    weights: RnnWeights,
    direction: Direction,
}

impl RnnScorer {
    pub fn new(weights: RnnWeights, direction: Direction) -> Self {
        RnnScorer { weights, direction }
    }

    pub fn weights(&self) -> &RnnWeights {
        &self.weights
    }

    pub fn to_file(&self) -> RnnFile {
        let w = &self.weights;
        RnnFile {
            version: RNN_VERSION,
            direction: self.direction,
            dims: w.dims,
            w_x: w.w_x.clone(),
            w_h: w.w_h.clone(),
            b_h: w.b_h.clone(),
            w_y: w.w_y.clone(),
            b_y: w.b_y.clone(),
            embedding: w.embedding.clone(),
            x0: w.x0.clone(),
        }
    }

    pub fn from_file(file: RnnFile) -> Result<Self> {
        if file.version != RNN_VERSION {
            return Err(Error::Version {
                found: file.version,
                expected: RNN_VERSION,
            });
        }
        let weights = RnnWeights::new(
            file.dims,
            file.w_x,
            file.w_h,
            file.b_h,
            file.w_y,
            file.b_y,
            file.embedding,
            file.x0,
        )?;
        Ok(RnnScorer::new(weights, file.direction))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_vec(&self.to_file()).map_err(|e| Error::json("rnn weights", e))?;
        util::write_atomic(path, &json)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = util::read_to_string(path)?;
        let file: RnnFile =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        Self::from_file(file)
    }
}

impl Scorer for RnnScorer {
    type State = Vec<f64>;

    fn direction(&self) -> Direction {
        self.direction
    }

    fn vocab_size(&self) -> usize {
        self.weights.dims.vocab
    }

    fn initial_state(&self, conditioning: Option<&[f64]>) -> Result<Vec<f64>> {
        let w = &self.weights;
        let mut h = vec![0.0; w.dims.hidden];
        if let Some(x0) = conditioning.or(w.x0.as_deref()) {
            if x0.len() != w.dims.embed {
                return Err(Error::Shape(format!(
                    "conditioning vector has dimension {}, expected {}",
                    x0.len(),
                    w.dims.embed
                )));
            }
            h = w.transition(x0, &h)?;
        }
        w.transition(w.embed(BOS), &h)
    }

    fn advance(&self, state: &Vec<f64>, token: TokenId) -> Result<Vec<f64>> {
        check_token(token, self.weights.dims.vocab)?;
        self.weights.transition(self.weights.embed(token), state)
    }

    fn log_distribution(&self, state: &Vec<f64>) -> Result<Vec<f64>> {
        let logits = self.weights.output_logits(state, 1.0);
        if logits.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericOverflow);
        }
        Ok(log_softmax(&logits))
    }
}
