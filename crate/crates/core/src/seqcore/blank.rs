use serde::{Deserialize, Serialize};

use super::{TokenSequence, BOS, EOS};
use crate::error::{Error, Result};

/// How the removed span is positioned inside the sentence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    /// Prefix gets `floor((T - w) / 2)` tokens, the suffix the rest.
    #[default]
    Middle,
}

/// Fraction of a sentence to remove and where to remove it from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlankSpec {
    pub ratio: f64,
    #[serde(default)]
    pub centering: Centering,
}

impl BlankSpec {
    pub fn new(ratio: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(Error::InvalidArgument(format!(
                "blank ratio {ratio} outside [0, 1]"
            )));
        }
        Ok(BlankSpec {
            ratio,
            centering: Centering::Middle,
        })
    }

    /// Number of removed tokens for a sentence of length `len`:
    /// `r * len` rounded half up.
    pub fn width_for(&self, len: usize) -> usize {
        // the epsilon keeps exact halves such as 0.25 * 10 from rounding down
        // after an inexact multiplication
        let w = (self.ratio * len as f64 + 0.5 + 1e-9).floor() as usize;
        w.min(len)
    }
}

/// One fill-in-the-blank problem: clamped prefix and suffix around a gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlankedInstance {
    pub id: String,
    pub prefix: TokenSequence,
    pub suffix: TokenSequence,
    /// The removed span, absent for blind evaluation.
    pub gold: Option<TokenSequence>,
    pub blank_width: usize,
    pub known_width: bool,
}

impl BlankedInstance {
    pub fn new(
        id: impl Into<String>,
        prefix: TokenSequence,
        suffix: TokenSequence,
        gold: Option<TokenSequence>,
        blank_width: usize,
        known_width: bool,
    ) -> Result<Self> {
        if let Some(g) = &gold {
            if g.len() != blank_width {
                return Err(Error::InvalidArgument(format!(
                    "gold length {} differs from blank width {blank_width}",
                    g.len()
                )));
            }
            // UNK stays legal: out-of-vocabulary gold words map to it
            if g.iter().any(|&id| id == BOS || id == EOS) {
                return Err(Error::InvalidArgument("gold contains a boundary sentinel".into()));
            }
        }
        Ok(BlankedInstance {
            id: id.into(),
            prefix,
            suffix,
            gold,
            blank_width,
            known_width,
        })
    }

    /// Length of the assembled sentence for the current blank width.
    pub fn sentence_len(&self) -> usize {
        self.prefix.len() + self.blank_width + self.suffix.len()
    }

    /// Prefix, `middle` and suffix joined into one sentence.
    pub fn assemble(&self, middle: &[u32]) -> TokenSequence {
        self.prefix.assemble(middle, &self.suffix)
    }

    /// The original sentence, when the gold span is known.
    pub fn original(&self) -> Option<TokenSequence> {
        self.gold.as_ref().map(|g| self.assemble(g))
    }

    /// Copy of this instance with a different, known blank width and no gold.
    pub fn with_width(&self, width: usize) -> BlankedInstance {
        BlankedInstance {
            id: self.id.clone(),
            prefix: self.prefix.clone(),
            suffix: self.suffix.clone(),
            gold: None,
            blank_width: width,
            known_width: true,
        }
    }
}

/// Removes `round_half_up(r * T)` tokens from the middle of `sentence`.
pub fn make_blank(
    id: impl Into<String>,
    sentence: &TokenSequence,
    spec: &BlankSpec,
) -> Result<BlankedInstance> {
    if !(0.0..=1.0).contains(&spec.ratio) {
        return Err(Error::InvalidArgument(format!(
            "blank ratio {} outside [0, 1]",
            spec.ratio
        )));
    }
    let len = sentence.len();
    if len == 0 {
        return Err(Error::InvalidArgument("cannot blank an empty sentence".into()));
    }
    let width = spec.width_for(len);
    let prefix_len = match spec.centering {
        Centering::Middle => (len - width) / 2,
    };
    let end = prefix_len + width;
    BlankedInstance::new(
        id,
        sentence[..prefix_len].into(),
        sentence[end..].into(),
        Some(sentence[prefix_len..end].into()),
        width,
        true,
    )
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::seqcore::{tokenize, Vocabulary};

    #[test]
    fn worked_caption_example() {
        let words = tokenize("A close up of flowers and plants inside of a bowl");
        let vocab = Vocabulary::from_content(
            ["a", "close", "up", "of", "flowers", "and", "plants", "inside", "bowl"],
        )
        .unwrap();
        let sentence = vocab.encode(&words);
        assert_eq!(sentence.len(), 11);
        let inst = make_blank("ex", &sentence, &BlankSpec::new(0.5).unwrap()).unwrap();
        assert_eq!(inst.blank_width, 6);
        assert_eq!(vocab.decode(&inst.prefix), vec!["a", "close"]);
        assert_eq!(
            vocab.decode(inst.gold.as_ref().unwrap()),
            vec!["up", "of", "flowers", "and", "plants", "inside"]
        );
        assert_eq!(vocab.decode(&inst.suffix), vec!["of", "a", "bowl"]);
    }

    #[test]
    fn zero_ratio_keeps_everything() {
        let s: TokenSequence = (3..10).collect();
        let inst = make_blank("z", &s, &BlankSpec::new(0.0).unwrap()).unwrap();
        assert_eq!(inst.blank_width, 0);
        assert!(inst.gold.as_ref().unwrap().is_empty());
        assert_eq!(inst.assemble(&[]), s);
    }

    #[test]
    fn quarter_of_ten_rounds_half_up() {
        let s: TokenSequence = (3..13).collect();
        let inst = make_blank("q", &s, &BlankSpec::new(0.25).unwrap()).unwrap();
        assert_eq!(inst.blank_width, 3);
        assert_eq!(inst.prefix.len(), 3);
        assert_eq!(inst.suffix.len(), 4);
    }

    #[test]
    fn full_blank_is_legal() {
        let s: TokenSequence = (3..7).collect();
        let inst = make_blank("f", &s, &BlankSpec::new(1.0).unwrap()).unwrap();
        assert_eq!(inst.blank_width, 4);
        assert!(inst.prefix.is_empty() && inst.suffix.is_empty());
    }

    #[test]
    fn ratio_out_of_range_is_an_error() {
        assert!(BlankSpec::new(1.5).is_err());
        assert!(BlankSpec::new(-0.1).is_err());
        let s: TokenSequence = (3..7).collect();
        let bad = BlankSpec {
            ratio: 2.0,
            centering: Centering::Middle,
        };
        assert!(make_blank("x", &s, &bad).is_err());
    }

    #[test]
    fn gold_must_match_width_and_avoid_sentinels() {
        let p = TokenSequence::empty();
        assert!(BlankedInstance::new("a", p.clone(), p.clone(), Some(vec![3, 4].into()), 3, true).is_err());
        assert!(BlankedInstance::new("a", p.clone(), p.clone(), Some(vec![0].into()), 1, true).is_err());
        assert!(BlankedInstance::new("a", p.clone(), p.clone(), Some(vec![2].into()), 1, true).is_ok());
    }

    proptest! {
        #[test]
        fn reassembly_reproduces_sentence(
            ids in proptest::collection::vec(3u32..50, 1..40),
            ratio in 0.0f64..=1.0,
        ) {
            let s = TokenSequence::new(ids);
            let spec = BlankSpec::new(ratio).unwrap();
            let a = make_blank("p", &s, &spec).unwrap();
            let b = make_blank("p", &s, &spec).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.original().unwrap(), s.clone());
            prop_assert_eq!(a.sentence_len(), s.len());
            prop_assert_eq!(a.prefix.len(), (s.len() - a.blank_width) / 2);
        }
    }
}
