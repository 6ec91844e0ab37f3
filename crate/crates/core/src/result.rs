use serde::{Deserialize, Serialize};

use crate::config::{SearchConfig, Strategy};
use crate::hypothesis::Hypothesis;
use crate::search::{LengthEstimate, StopReason};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult<S> {
    pub hypothesis: Hypothesis<S>,
    pub plain_score: S,
    /// `plain_score + r * min(l, |y|)` with the reward the strategy applies.
    pub revised_score: S,
    pub stop_step: usize,
    pub items_expanded: usize,
    /// False only when the search ended without any completed hypothesis.
    pub completed: bool,
    pub strategy: Strategy,
    pub reason: StopReason,
    pub length: LengthEstimate<S>,
    pub config: SearchConfig<S>,
}
