use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BlankedInstance, Vocabulary};
use crate::error::{Error, Result};
use crate::util;

/// One line of a FITB dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitbRecord {
    pub id: String,
    pub prefix: Vec<String>,
    pub suffix: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<Vec<String>>,
    pub known_width: bool,
    /// Blank width for blind known-width records that carry no gold span.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blank_width: Option<usize>,
}

impl FitbRecord {
    pub fn from_instance(inst: &BlankedInstance, vocab: &Vocabulary) -> Self {
        let gold = inst.gold.as_ref().map(|g| vocab.decode(g));
        FitbRecord {
            id: inst.id.clone(),
            prefix: vocab.decode(&inst.prefix),
            suffix: vocab.decode(&inst.suffix),
            blank_width: if gold.is_none() && inst.known_width {
                Some(inst.blank_width)
            } else {
                None
            },
            gold,
            known_width: inst.known_width,
        }
    }

    pub fn to_instance(&self, vocab: &Vocabulary) -> Result<BlankedInstance> {
        let gold = self.gold.as_ref().map(|g| vocab.encode(g));
        let width = match (&gold, self.blank_width) {
            (Some(g), _) => g.len(),
            (None, Some(w)) => w,
            (None, None) if !self.known_width => 0,
            (None, None) => {
                return Err(Error::InvalidArgument(format!(
                    "record {}: known_width requires gold or blank_width",
                    self.id
                )))
            }
        };
        BlankedInstance::new(
            self.id.clone(),
            vocab.encode(&self.prefix),
            vocab.encode(&self.suffix),
            gold,
            width,
            self.known_width,
        )
    }
}

pub fn write_dataset(path: &Path, records: &[FitbRecord]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::json("fitb record", e))?;
        writeln!(out, "{line}").expect("writing to a String cannot fail");
    }
    util::write_atomic(path, out.as_bytes())
}

pub fn read_dataset(path: &Path) -> Result<Vec<FitbRecord>> {
    let text = util::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::json(format!("{}:{}", path.display(), i + 1), e))
        })
        .collect()
}
