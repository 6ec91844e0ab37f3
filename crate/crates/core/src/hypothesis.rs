use serde::{Deserialize, Serialize};

use crate::real::Real;
use crate::vocab::TokenId;

/// A candidate output: tokens so far, cumulative natural-log probability,
/// and whether it ends in eos.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis<S> {
    pub tokens: Vec<TokenId>,
    pub score: S,
    pub completed: bool,
    pub step_created: usize,
}

impl<S: Real> Hypothesis<S> {
    pub fn empty() -> Self {
        Self {
            tokens: Vec::new(),
            score: S::zero(),
            completed: false,
            step_created: 0,
        }
    }

    /// Appends `token` with conditional log-probability `logp`.
    ///
    /// Panics if `self` is already completed.
    pub fn extend(&self, token: TokenId, logp: S, eos: TokenId) -> Self {
        assert!(!self.completed, "cannot extend a completed hypothesis");
        debug_assert!(
            logp.is_nan() || logp <= S::zero(),
            "log-probability must be <= 0, got {logp}"
        );
        let mut tokens = Vec::with_capacity(self.tokens.len() + 1);
        tokens.extend_from_slice(&self.tokens);
        tokens.push(token);
        Self {
            tokens,
            score: self.score + logp,
            completed: token == eos,
            step_created: self.step_created + 1,
        }
    }

    /// Output length `|y|`: tokens excluding a trailing eos.
    pub fn output_len(&self) -> usize {
        self.tokens.len() - usize::from(self.completed)
    }
}

pub fn extend<S: Real>(h: &Hypothesis<S>, token: TokenId, logp: S, eos: TokenId) -> Hypothesis<S> {
    h.extend(token, logp, eos)
}
