//! The beam-search driver and its stopping strategies.
//!
//! Every non-shrinking strategy runs the same beam: at each step all
//! partial items are expanded, the `b` best candidates (completed ones
//! included) form the next beam, completed items are reported to the
//! best tracker and never expanded again. Only the stopping rule and the
//! tracker's key differ between strategies, so traces are comparable.

mod stopping;

pub use stopping::{
    bounded_full_bound, bounded_simplified_bound, stop_bounded_full, stop_bounded_simplified,
    stop_default, stop_optimal, BuiltinRule, StopContext, StopReason, StoppingDecision,
    StoppingRule,
};

use serde::{Deserialize, Serialize};

use crate::beam::{top_k, Beam};
use crate::config::{SearchConfig, Strategy, TieBreak};
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::real::Real;
use crate::result::DecodeResult;
use crate::scoring::ScoringModel;
use crate::tracker::{BestTracker, Scorer};
use crate::vocab::TokenId;

/// Estimated optimal output length `l`, in tokens. Never rounded.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LengthEstimate<S>(S);

impl<S: Real> LengthEstimate<S> {
    pub fn new(l: S) -> Self {
        assert!(
            l >= S::zero() && l.is_finite(),
            "length estimate must be finite and >= 0"
        );
        Self(l)
    }

    pub fn get(self) -> S {
        self.0
    }
}

/// `l = ratio * source_len`. A zero-length source (only legal for
/// source-agnostic models) gives `l = 0`.
pub fn estimate_length<S: Real>(source_len: usize, ratio: S) -> LengthEstimate<S> {
    LengthEstimate::new(ratio * S::of_usize(source_len))
}

/// `sc + r * min(l, len)`.
pub fn revised_score<S: Real>(sc: S, len: usize, reward: S, length: LengthEstimate<S>) -> S {
    if reward == S::zero() {
        return sc;
    }
    sc + reward * length.get().min(S::of_usize(len))
}

/// Key the best tracker ranks completions by under `strategy`.
pub fn scorer_for<S: Real>(strategy: Strategy, reward: S, length: LengthEstimate<S>) -> Scorer<S> {
    if strategy.is_bounded() {
        Scorer::revised(reward, length)
    } else {
        Scorer::Plain
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutput<S> {
    pub beam: Beam<S>,
    /// Candidates scored during this step (vocabulary size per expanded item).
    pub expanded: usize,
}

impl<S: Real> StepOutput<S> {
    /// Items that completed in this step; they go to the best tracker.
    pub fn newly_completed(&self) -> impl Iterator<Item = &Hypothesis<S>> {
        self.beam.completed()
    }
}

/// Expands every partial item of `beam` by one token and keeps the best
/// `width` candidates. Candidates with probability zero are dropped.
///
/// Panics if `beam` has no partial item.
pub fn beam_step<S: Real, M: ScoringModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    beam: &Beam<S>,
    width: usize,
    tie_break: TieBreak,
) -> Result<StepOutput<S>> {
    assert!(beam.has_partial(), "beam has no partial item to expand");
    let eos = model.vocab().eos();
    let mut candidates = Vec::new();
    let mut expanded = 0;
    for h in beam.partials() {
        let logprobs = model.next_logprobs(source, &h.tokens)?;
        expanded += logprobs.len();
        for (t, &lp) in logprobs.iter().enumerate() {
            if lp == f64::NEG_INFINITY {
                continue;
            }
            candidates.push(h.extend(TokenId::from(t), S::of(lp), eos));
        }
    }
    Ok(StepOutput {
        beam: top_k(beam.step + 1, candidates, width, tie_break),
        expanded,
    })
}

pub(crate) fn check_source<M: ScoringModel + ?Sized>(model: &M, source: &[TokenId]) -> Result<()> {
    if source.is_empty() && model.uses_source() {
        return Err(Error::EmptyInput(
            "this model requires a non-empty source".into(),
        ));
    }
    source.iter().try_for_each(|&t| model.vocab().check(t))
}

/// Runs the strategy named in `config`.
pub fn decode<S: Real, M: ScoringModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    config: &SearchConfig<S>,
) -> Result<DecodeResult<S>> {
    match (config.strategy, BuiltinRule::for_strategy(config.strategy)) {
        (_, Some(rule)) => decode_with_rule(model, source, config, &rule),
        (Strategy::ShrinkLennorm, None) => {
            shrinking_decode(model, source, config, Rescorer::LengthNorm)
        }
        (_, None) => shrinking_decode(model, source, config, Rescorer::UnboundedReward),
    }
}

/// Beam search with an arbitrary stopping rule. The tracker key still
/// follows `config.strategy`.
pub fn decode_with_rule<S: Real, M: ScoringModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    config: &SearchConfig<S>,
    rule: &dyn StoppingRule<S>,
) -> Result<DecodeResult<S>> {
    config.validate()?;
    check_source(model, source)?;
    let reward = config.effective_reward();
    let length = estimate_length(source.len(), config.length_ratio);
    let scorer = scorer_for(config.strategy, reward, length);

    let mut beam = Beam::initial(config.beam_size);
    let mut tracker = BestTracker::new();
    let mut expanded = 0;
    let mut outcome = None;
    for step in 1..=config.max_steps {
        let out = beam_step(model, source, &beam, config.beam_size, config.tie_break)?;
        expanded += out.expanded;
        for h in out.newly_completed() {
            tracker = tracker.update(h, &scorer);
        }
        beam = out.beam;
        let ctx = StopContext {
            step,
            beam: &beam,
            tracker: &tracker,
            reward,
            length,
        };
        let decision = rule.decide(&ctx);
        if let Some(reason) = decision.reason.filter(|_| decision.stop) {
            let chosen = match reason {
                StopReason::DefaultTopCompleted => beam.top().cloned(),
                _ => tracker.best.clone(),
            };
            if let Some(h) = chosen {
                outcome = Some((h, step, reason));
                break;
            }
        }
        if !beam.has_partial() {
            break;
        }
    }

    let (hypothesis, stop_step, reason) = match outcome {
        Some(found) => found,
        None => {
            let reason = if beam.has_partial() {
                StopReason::MaxSteps
            } else {
                StopReason::Exhausted
            };
            let h = tracker
                .best
                .clone()
                .or_else(|| beam.partials().next().cloned())
                .expect("a normalized model always leaves a finite candidate");
            (h, beam.step, reason)
        }
    };
    Ok(finish(
        hypothesis, stop_step, expanded, reason, reward, length, config,
    ))
}

fn finish<S: Real>(
    hypothesis: Hypothesis<S>,
    stop_step: usize,
    items_expanded: usize,
    reason: StopReason,
    reward: S,
    length: LengthEstimate<S>,
    config: &SearchConfig<S>,
) -> DecodeResult<S> {
    DecodeResult {
        plain_score: hypothesis.score,
        revised_score: revised_score(hypothesis.score, hypothesis.output_len(), reward, length),
        completed: hypothesis.completed,
        hypothesis,
        stop_step,
        items_expanded,
        strategy: config.strategy,
        reason,
        length,
        config: config.clone(),
    }
}

/// How the shrinking beam ranks its pool of completed hypotheses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rescorer {
    /// `sc(y) / |y|`, with `|y|` floored at 1 so the bare-eos output is defined.
    LengthNorm,
    /// `sc(y) + r |y|` with the configured reward and no length bound.
    UnboundedReward,
}

impl Rescorer {
    pub fn score<S: Real>(self, h: &Hypothesis<S>, reward: S) -> S {
        match self {
            Rescorer::LengthNorm => h.score / S::of_usize(h.output_len().max(1)),
            Rescorer::UnboundedReward => h.score + reward * S::of_usize(h.output_len()),
        }
    }
}

/// Shrinking beam: each completion leaves the beam for a pool and the width
/// drops by one; the search ends at width zero.
pub fn shrinking_decode<S: Real, M: ScoringModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    config: &SearchConfig<S>,
    rescorer: Rescorer,
) -> Result<DecodeResult<S>> {
    config.validate()?;
    check_source(model, source)?;
    let reward = config.effective_reward();
    let length = estimate_length(source.len(), config.length_ratio);

    let mut width = config.beam_size;
    let mut beam = Beam::initial(width);
    let mut pool: Vec<Hypothesis<S>> = Vec::new();
    let mut expanded = 0;
    let mut reason = StopReason::MaxSteps;
    let mut last_partials = beam.items.clone();
    for _ in 1..=config.max_steps {
        let out = beam_step(model, source, &beam, width, config.tie_break)?;
        expanded += out.expanded;
        let step = out.beam.step;
        let (done, partial): (Vec<_>, Vec<_>) =
            out.beam.items.into_iter().partition(|h| h.completed);
        width -= done.len();
        pool.extend(done);
        if !partial.is_empty() {
            last_partials = partial.clone();
        }
        beam = Beam {
            step,
            items: partial,
            capacity: width,
        };
        if width == 0 {
            reason = StopReason::ShrunkToZero;
            break;
        }
        if beam.is_empty() {
            reason = StopReason::Exhausted;
            break;
        }
    }

    let mut best: Option<(&Hypothesis<S>, S)> = None;
    for h in &pool {
        let key = rescorer.score(h, reward);
        if best.is_none_or(|(_, k)| key > k) {
            best = Some((h, key));
        }
    }
    let hypothesis = match best {
        Some((h, _)) => h.clone(),
        None => last_partials[0].clone(),
    };
    Ok(finish(
        hypothesis, beam.step, expanded, reason, reward, length, config,
    ))
}
