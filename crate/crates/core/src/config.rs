use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Stop when the beam's top item is completed; return it.
    Default,
    /// Shrinking beam, completed pool rescored by `sc / |y|`.
    ShrinkLennorm,
    /// Shrinking beam, completed pool rescored by `sc + r |y|`.
    ShrinkReward,
    /// Stop once the best completion dominates the beam top.
    Optimal,
    /// Bounded length reward, certificate with explicit future-reward term.
    OptimalBoundedFull,
    /// Bounded length reward, simplified certificate `sc(top) + r l`.
    OptimalBoundedSimplified,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::Default,
        Strategy::ShrinkLennorm,
        Strategy::ShrinkReward,
        Strategy::Optimal,
        Strategy::OptimalBoundedFull,
        Strategy::OptimalBoundedSimplified,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Default => "default",
            Strategy::ShrinkLennorm => "shrink_lennorm",
            Strategy::ShrinkReward => "shrink_reward",
            Strategy::Optimal => "optimal",
            Strategy::OptimalBoundedFull => "optimal_bounded_full",
            Strategy::OptimalBoundedSimplified => "optimal_bounded_simplified",
        }
    }

    pub fn uses_reward(self) -> bool {
        matches!(
            self,
            Strategy::ShrinkReward
                | Strategy::OptimalBoundedFull
                | Strategy::OptimalBoundedSimplified
        )
    }

    pub fn is_bounded(self) -> bool {
        matches!(
            self,
            Strategy::OptimalBoundedFull | Strategy::OptimalBoundedSimplified
        )
    }

    pub fn is_certificate(self) -> bool {
        matches!(self, Strategy::Optimal) || self.is_bounded()
    }

    pub fn is_shrinking(self) -> bool {
        matches!(self, Strategy::ShrinkLennorm | Strategy::ShrinkReward)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown strategy {s:?}")))
    }
}

/// Order among candidates with exactly equal scores.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Lexicographically smaller token-id sequence first.
    #[default]
    Lexicographic,
    /// Order of generation (beam position, then token id).
    Insertion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig<S> {
    pub beam_size: usize,
    pub strategy: Strategy,
    /// Per-token reward in log-probability units.
    pub reward: S,
    /// Target output length per source token.
    pub length_ratio: S,
    pub max_steps: usize,
    pub tie_break: TieBreak,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigWarning {
    RewardIgnored(Strategy),
}

impl fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigWarning::RewardIgnored(s) => {
                write!(f, "reward is ignored by strategy {s}")
            }
        }
    }
}

impl<S: Real> SearchConfig<S> {
    pub fn new(strategy: Strategy, beam_size: usize) -> Self {
        Self {
            beam_size,
            strategy,
            reward: S::zero(),
            length_ratio: S::one(),
            max_steps: 50,
            tie_break: TieBreak::Lexicographic,
        }
    }

    pub fn with_reward(mut self, reward: S) -> Self {
        self.reward = reward;
        self
    }

    pub fn with_length_ratio(mut self, ratio: S) -> Self {
        self.length_ratio = ratio;
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    /// Checks ranges; a reward on a strategy that ignores it is a warning.
    pub fn validate(&self) -> Result<Vec<ConfigWarning>> {
        if self.beam_size == 0 {
            return Err(Error::Config("beam size must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max steps must be positive".into()));
        }
        if !(self.reward.is_finite() && self.reward >= S::zero()) {
            return Err(Error::Config(format!(
                "reward must be finite and >= 0, got {}",
                self.reward
            )));
        }
        if !(self.length_ratio.is_finite() && self.length_ratio > S::zero()) {
            return Err(Error::Config(format!(
                "length ratio must be finite and > 0, got {}",
                self.length_ratio
            )));
        }
        let mut warnings = Vec::new();
        if self.reward != S::zero() && !self.strategy.uses_reward() {
            warnings.push(ConfigWarning::RewardIgnored(self.strategy));
        }
        Ok(warnings)
    }

    /// The reward actually applied: zero for strategies that ignore it.
    pub fn effective_reward(&self) -> S {
        if self.strategy.uses_reward() {
            self.reward
        } else {
            S::zero()
        }
    }
}
