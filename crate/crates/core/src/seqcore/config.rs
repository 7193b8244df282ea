use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Temporal direction a scorer or beam pass runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Conditions on the past; consumes tokens left to right.
    Forward,
    /// Conditions on the future; consumes tokens right to left.
    Backward,
}

impl Direction {
    pub fn opposite(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" | "f" => Ok(Direction::Forward),
            "backward" | "b" => Ok(Direction::Backward),
            other => Err(Error::InvalidArgument(format!("unknown direction {other:?}"))),
        }
    }
}

/// When BiBS stops iterating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convergence {
    /// Always run the full meta-iteration budget.
    FixedM,
    /// Stop early once the ordered beams repeat across a meta-iteration.
    StopOnUnchangedBeams,
}

impl FromStr for Convergence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-m" | "fixed" => Ok(Convergence::FixedM),
            "stop-on-unchanged-beams" | "unchanged" => Ok(Convergence::StopOnUnchangedBeams),
            other => Err(Error::InvalidArgument(format!(
                "unknown convergence rule {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecodeConfig {
    pub beam_width: usize,
    pub meta_iterations: usize,
    pub init_direction: Direction,
    pub allow_sentinels_in_blank: bool,
    pub convergence: Convergence,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            beam_width: 5,
            meta_iterations: 4,
            init_direction: Direction::Backward,
            allow_sentinels_in_blank: false,
            convergence: Convergence::StopOnUnchangedBeams,
        }
    }
}

impl DecodeConfig {
    pub fn new(beam_width: usize, meta_iterations: usize) -> Result<Self> {
        let cfg = DecodeConfig {
            beam_width,
            meta_iterations,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beam_width == 0 {
            return Err(Error::InvalidArgument("beam width must be >= 1".into()));
        }
        if self.meta_iterations == 0 {
            return Err(Error::InvalidArgument("meta iterations must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_convergence(mut self, convergence: Convergence) -> Self {
        self.convergence = convergence;
        self
    }

    pub fn with_init_direction(mut self, direction: Direction) -> Self {
        self.init_direction = direction;
        self
    }
}
