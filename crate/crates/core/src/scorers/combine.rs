use crate::error::{Error, Result};
use crate::util::log_softmax;

/// Combines two directional score vectors into one distribution:
/// `log softmax(fwd + bwd)`, i.e. the renormalized elementwise product of
/// `softmax(fwd)` and `softmax(bwd)`.
///
/// With per-direction logits `W_y h + b_y / 2` this is exactly the output
/// of the equivalent softmax BiRNN. Log-probabilities are valid inputs too,
/// since `softmax(log p) = p`.
pub fn bidir_combine(fwd_logits: &[f64], bwd_logits: &[f64]) -> Result<Vec<f64>> {
    if fwd_logits.len() != bwd_logits.len() {
        return Err(Error::Shape(format!(
            "forward scores have length {}, backward {}",
            fwd_logits.len(),
            bwd_logits.len()
        )));
    }
    if fwd_logits.is_empty() {
        return Err(Error::Shape("empty score vectors".into()));
    }
    if fwd_logits.iter().chain(bwd_logits).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("score vectors must be finite".into()));
    }
    let summed: Vec<f64> = fwd_logits.iter().zip(bwd_logits).map(|(a, b)| a + b).collect();
    Ok(log_softmax(&summed))
}

/// [`bidir_combine`] restricted to the ids where `allowed` is true; masked
/// ids get `-inf`.
pub fn combine_masked(fwd: &[f64], bwd: &[f64], allowed: &[bool]) -> Result<Vec<f64>> {
    if allowed.len() != fwd.len() || !allowed.iter().any(|&a| a) {
        return Err(Error::InvalidArgument("mask must match and allow at least one id".into()));
    }
    let combined = bidir_combine(fwd, bwd)?;
    let kept: Vec<f64> = combined
        .iter()
        .zip(allowed)
        .map(|(&x, &a)| if a { x } else { f64::NEG_INFINITY })
        .collect();
    Ok(log_softmax(&kept))
}
