use serde::{Deserialize, Serialize};

use super::LengthEstimate;
use crate::beam::Beam;
use crate::config::Strategy;
use crate::real::Real;
use crate::search::revised_score;
use crate::tracker::BestTracker;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The best completion dominates everything reachable from the beam.
    Certificate,
    /// The beam's top item is completed.
    DefaultTopCompleted,
    /// The shrinking beam's width reached zero.
    ShrunkToZero,
    /// No rule fired within the step budget.
    MaxSteps,
    /// No partial hypothesis is left to expand.
    Exhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StoppingDecision {
    pub stop: bool,
    pub reason: Option<StopReason>,
}

impl StoppingDecision {
    pub const CONTINUE: Self = Self {
        stop: false,
        reason: None,
    };

    pub fn stop(reason: StopReason) -> Self {
        Self {
            stop: true,
            reason: Some(reason),
        }
    }

    fn when(cond: bool, reason: StopReason) -> Self {
        if cond {
            Self::stop(reason)
        } else {
            Self::CONTINUE
        }
    }
}

/// State visible to a stopping rule after beam `step` has been formed and
/// the tracker updated from it.
#[derive(Clone, Copy, Debug)]
pub struct StopContext<'a, S> {
    pub step: usize,
    pub beam: &'a Beam<S>,
    pub tracker: &'a BestTracker<S>,
    pub reward: S,
    pub length: LengthEstimate<S>,
}

pub trait StoppingRule<S: Real> {
    fn decide(&self, ctx: &StopContext<'_, S>) -> StoppingDecision;
}

/// Stop iff the top item of the beam is completed.
pub fn stop_default<S: Real>(beam: &Beam<S>) -> StoppingDecision {
    StoppingDecision::when(
        beam.top().is_some_and(|h| h.completed),
        StopReason::DefaultTopCompleted,
    )
}

/// Stop iff a best completion exists and `sc(top) <= sc(best)`.
pub fn stop_optimal<S: Real>(beam: &Beam<S>, tracker: &BestTracker<S>) -> StoppingDecision {
    let fire = match (beam.top(), tracker.is_defined()) {
        (Some(top), true) => top.score <= tracker.best_key,
        _ => false,
    };
    StoppingDecision::when(fire, StopReason::Certificate)
}

/// `revised(top) + r * max(l - i, 0)`.
pub fn bounded_full_bound<S: Real>(
    beam: &Beam<S>,
    step: usize,
    reward: S,
    length: LengthEstimate<S>,
) -> Option<S> {
    let top = beam.top()?;
    let future = (length.get() - S::of_usize(step)).max(S::zero());
    Some(revised_score(top.score, top.output_len(), reward, length) + reward * future)
}

/// `sc(top) + r * l`.
pub fn bounded_simplified_bound<S: Real>(
    beam: &Beam<S>,
    reward: S,
    length: LengthEstimate<S>,
) -> Option<S> {
    Some(beam.top()?.score + reward * length.get())
}

pub fn stop_bounded_full<S: Real>(
    beam: &Beam<S>,
    step: usize,
    reward: S,
    length: LengthEstimate<S>,
    tracker: &BestTracker<S>,
) -> StoppingDecision {
    let fire = tracker.is_defined()
        && bounded_full_bound(beam, step, reward, length).is_some_and(|b| b <= tracker.best_key);
    StoppingDecision::when(fire, StopReason::Certificate)
}

pub fn stop_bounded_simplified<S: Real>(
    beam: &Beam<S>,
    reward: S,
    length: LengthEstimate<S>,
    tracker: &BestTracker<S>,
) -> StoppingDecision {
    let fire = tracker.is_defined()
        && bounded_simplified_bound(beam, reward, length).is_some_and(|b| b <= tracker.best_key);
    StoppingDecision::when(fire, StopReason::Certificate)
}

/// The stopping rules built into the non-shrinking strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinRule {
    Default,
    Optimal,
    BoundedFull,
    BoundedSimplified,
}

impl BuiltinRule {
    pub fn for_strategy(strategy: Strategy) -> Option<Self> {
        match strategy {
            Strategy::Default => Some(Self::Default),
            Strategy::Optimal => Some(Self::Optimal),
            Strategy::OptimalBoundedFull => Some(Self::BoundedFull),
            Strategy::OptimalBoundedSimplified => Some(Self::BoundedSimplified),
            Strategy::ShrinkLennorm | Strategy::ShrinkReward => None,
        }
    }
}

impl<S: Real> StoppingRule<S> for BuiltinRule {
    fn decide(&self, ctx: &StopContext<'_, S>) -> StoppingDecision {
        match self {
            Self::Default => stop_default(ctx.beam),
            Self::Optimal => stop_optimal(ctx.beam, ctx.tracker),
            Self::BoundedFull => {
                stop_bounded_full(ctx.beam, ctx.step, ctx.reward, ctx.length, ctx.tracker)
            }
            Self::BoundedSimplified => {
                stop_bounded_simplified(ctx.beam, ctx.reward, ctx.length, ctx.tracker)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::Hypothesis;
    use crate::tracker::Scorer;
    use crate::vocab::TokenId;

    fn item(len: usize, score: f64, completed: bool) -> Hypothesis<f64> {
        let mut tokens = vec![TokenId(0); len];
        if completed {
            tokens.push(TokenId(9));
        }
        Hypothesis {
            step_created: tokens.len(),
            tokens,
            score,
            completed,
        }
    }

    fn beam(step: usize, items: Vec<Hypothesis<f64>>) -> Beam<f64> {
        Beam {
            step,
            capacity: items.len(),
            items,
        }
    }

    #[test]
    fn default_rule() {
        let b = beam(2, vec![item(1, -1.0, true), item(2, -1.5, false)]);
        assert_eq!(
            stop_default(&b),
            StoppingDecision::stop(StopReason::DefaultTopCompleted)
        );
        let b = beam(2, vec![item(2, -0.5, false), item(1, -2.3, true)]);
        assert_eq!(stop_default(&b), StoppingDecision::CONTINUE);
    }

    #[test]
    fn optimal_needs_a_best() {
        let b = beam(3, vec![item(3, -90.0, false)]);
        assert!(!stop_optimal(&b, &BestTracker::new()).stop);
    }

    #[test]
    fn optimal_fires_on_completed_top() {
        let top = item(1, -1.0, true);
        let b = beam(2, vec![top.clone(), item(2, -1.5, false)]);
        let t = BestTracker::new().update(&top, &Scorer::Plain);
        assert_eq!(
            stop_optimal(&b, &t),
            StoppingDecision::stop(StopReason::Certificate)
        );
    }

    #[test]
    fn optimal_fires_on_equal_scores() {
        let done = item(0, -2.0, true);
        let t = BestTracker::new().update(&done, &Scorer::Plain);
        assert!(stop_optimal(&beam(4, vec![item(4, -2.0, false)]), &t).stop);
        assert!(!stop_optimal(&beam(4, vec![item(4, -1.999, false)]), &t).stop);
    }

    #[test]
    fn bounded_with_zero_reward_matches_optimal() {
        let l = LengthEstimate::new(3.0);
        let done = item(1, -2.0, true);
        let t = BestTracker::new().update(&done, &Scorer::revised(0.0, l));
        for s in [-1.0, -2.0, -3.0] {
            let b = beam(4, vec![item(4, s, false)]);
            let expected = stop_optimal(&b, &t);
            assert_eq!(stop_bounded_full(&b, 4, 0.0, l, &t), expected);
            assert_eq!(stop_bounded_simplified(&b, 0.0, l, &t), expected);
        }
    }

    #[test]
    fn full_past_estimated_length_has_no_future_reward() {
        let l = LengthEstimate::new(2.0);
        let b = beam(5, vec![item(5, -4.0, false)]);
        // revised(top) = -4 + 0.5 * min(2, 5) = -3, future term 0
        assert_eq!(bounded_full_bound(&b, 5, 0.5, l), Some(-3.0));
        assert_eq!(bounded_simplified_bound(&b, 0.5, l), Some(-3.0));
    }

    #[test]
    fn completed_top_bounds_differ_by_reward() {
        let l = LengthEstimate::new(6.0);
        let b = beam(4, vec![item(3, -4.0, true)]);
        let full = bounded_full_bound(&b, 4, 0.5, l).unwrap();
        let simp = bounded_simplified_bound(&b, 0.5, l).unwrap();
        assert_eq!(simp - full, 0.5);
    }
}
