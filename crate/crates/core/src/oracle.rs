//! Brute-force references for the search module.
//!
//! [`exhaustive_best`] enumerates every completion up to a length bound and
//! gives the global optimum. [`beam_trace`] runs the beam without any
//! stopping rule and records every completion the beam ever holds, which
//! is exactly the set a width-limited search can return. It also records
//! where each stopping rule would have fired.

use std::collections::HashSet;

use serde::Serialize;

use crate::beam::Beam;
use crate::config::{SearchConfig, Strategy};
use crate::error::Result;
use crate::hypothesis::Hypothesis;
use crate::real::Real;
use crate::scoring::ScoringModel;
use crate::search::{
    beam_step, bounded_full_bound, bounded_simplified_bound, check_source, decode,
    decode_with_rule, estimate_length, revised_score, scorer_for, stop_bounded_full,
    stop_bounded_simplified, stop_default, stop_optimal, LengthEstimate, StoppingRule,
};
use crate::tracker::{BestTracker, Scorer};
use crate::vocab::TokenId;

#[derive(Clone, Debug, PartialEq)]
pub struct ExhaustiveResult<S> {
    pub best: Option<Hypothesis<S>>,
    pub key: S,
    /// Nodes whose successors were scored.
    pub expanded: usize,
}

/// Best completion of at most `max_len` tokens (eos included) under `scorer`.
///
/// Depth-first with successors in token-id order, so completions are met in
/// lexicographic order and a strict improvement test implements the
/// lexicographic tie-break. With `prune`, a branch is cut once its score
/// plus the largest reward any descendant could still collect cannot beat
/// the incumbent.
pub fn exhaustive_best<S: Real, M: ScoringModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    max_len: usize,
    scorer: &Scorer<S>,
    prune: bool,
) -> Result<ExhaustiveResult<S>> {
    let mut search = Exhaustive {
        model,
        source,
        max_len,
        scorer,
        prune,
        eos: model.vocab().eos(),
        best: None,
        key: S::neg_infinity(),
        expanded: 0,
    };
    search.visit(&Hypothesis::empty())?;
    Ok(ExhaustiveResult {
        best: search.best,
        key: search.key,
        expanded: search.expanded,
    })
}

struct Exhaustive<'a, S, M: ?Sized> {
    model: &'a M,
    source: &'a [TokenId],
    max_len: usize,
    scorer: &'a Scorer<S>,
    prune: bool,
    eos: TokenId,
    best: Option<Hypothesis<S>>,
    key: S,
    expanded: usize,
}

impl<S: Real, M: ScoringModel + ?Sized> Exhaustive<'_, S, M> {
    fn optimistic(&self, h: &Hypothesis<S>) -> S {
        match *self.scorer {
            Scorer::Plain => h.score,
            Scorer::Revised { reward, length } => {
                h.score
                    + reward
                        * length
                            .get()
                            .min(S::of_usize(self.max_len.saturating_sub(1)))
            }
        }
    }

    fn visit(&mut self, h: &Hypothesis<S>) -> Result<()> {
        if h.completed {
            let key = self.scorer.key(h);
            if self.best.is_none() || key > self.key {
                self.best = Some(h.clone());
                self.key = key;
            }
            return Ok(());
        }
        if h.tokens.len() >= self.max_len {
            return Ok(());
        }
        if self.prune && self.best.is_some() && self.optimistic(h) <= self.key {
            return Ok(());
        }
        self.expanded += 1;
        let logprobs = self.model.next_logprobs(self.source, &h.tokens)?;
        for (t, &lp) in logprobs.iter().enumerate() {
            if lp == f64::NEG_INFINITY {
                continue;
            }
            self.visit(&h.extend(TokenId::from(t), S::of(lp), self.eos))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry<S> {
    pub hypothesis: Hypothesis<S>,
    pub plain: S,
    pub revised: S,
    pub step: usize,
}

/// Where a stopping rule first fired during a trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FireRecord<S> {
    pub step: usize,
    pub top_completed: bool,
    /// What the rule would have returned.
    pub returned: Hypothesis<S>,
    /// Left-hand side of the rule's inequality (the top's score for the
    /// default rule).
    pub bound: S,
    pub best_key: S,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FirstFires<S> {
    pub default: Option<FireRecord<S>>,
    pub optimal: Option<FireRecord<S>>,
    pub bounded_full: Option<FireRecord<S>>,
    pub bounded_simplified: Option<FireRecord<S>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceReport<S> {
    /// Completed hypotheses in the order they entered a beam.
    pub completed: Vec<TraceEntry<S>>,
    /// Completions seen twice; the expansion rules make this zero.
    pub duplicates: usize,
    /// Score of the top item at steps `1..=steps`.
    pub top_scores: Vec<S>,
    /// Cumulative candidates scored after each step.
    pub expanded: Vec<usize>,
    pub steps: usize,
    pub reward: S,
    pub length: LengthEstimate<S>,
    pub fires: FirstFires<S>,
    /// Every beam of the trace, for step-level inspection.
    #[serde(skip)]
    pub beams: Vec<Beam<S>>,
}

impl<S: Real> TraceReport<S> {
    fn best_by(&self, key: impl Fn(&TraceEntry<S>) -> S) -> Option<&TraceEntry<S>> {
        let mut best: Option<(&TraceEntry<S>, S)> = None;
        for e in &self.completed {
            let k = key(e);
            if best.is_none_or(|(_, bk)| k > bk) {
                best = Some((e, k));
            }
        }
        best.map(|(e, _)| e)
    }

    pub fn max_plain(&self) -> Option<S> {
        self.best_by(|e| e.plain).map(|e| e.plain)
    }

    pub fn max_revised(&self) -> Option<S> {
        self.best_by(|e| e.revised).map(|e| e.revised)
    }

    /// Argmax under `scorer`, first-seen on ties.
    pub fn best(&self, scorer: &Scorer<S>) -> Option<&TraceEntry<S>> {
        self.best_by(|e| scorer.key(&e.hypothesis))
    }

    pub fn completed_tokens(&self) -> HashSet<Vec<TokenId>> {
        self.completed
            .iter()
            .map(|e| e.hypothesis.tokens.clone())
            .collect()
    }

    /// Candidates scored through `step` (all of them when `step` exceeds
    /// the trace).
    pub fn expanded_through(&self, step: usize) -> usize {
        match step.checked_sub(1) {
            Some(i) => self.expanded[i.min(self.expanded.len() - 1)],
            None => 0,
        }
    }
}

/// Runs `config.beam_size`-wide beam search for up to `config.max_steps`
/// steps (or until no partial item is left) ignoring every stopping rule.
/// `config.reward` (taken as is, whatever the strategy) and
/// `config.length_ratio` parametrize the bounded-reward rules.
pub fn beam_trace<S: Real, M: ScoringModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    config: &SearchConfig<S>,
) -> Result<TraceReport<S>> {
    config.validate()?;
    check_source(model, source)?;
    let reward = config.reward;
    let length = estimate_length(source.len(), config.length_ratio);
    let revised = Scorer::revised(reward, length);

    let mut report = TraceReport {
        completed: Vec::new(),
        duplicates: 0,
        top_scores: Vec::new(),
        expanded: Vec::new(),
        steps: 0,
        reward,
        length,
        fires: FirstFires {
            default: None,
            optimal: None,
            bounded_full: None,
            bounded_simplified: None,
        },
        beams: Vec::new(),
    };
    let mut seen = HashSet::new();
    let mut plain_tracker = BestTracker::new();
    let mut revised_tracker = BestTracker::new();
    let mut beam = Beam::initial(config.beam_size);
    let mut total = 0;
    for step in 1..=config.max_steps {
        if !beam.has_partial() {
            break;
        }
        let out = beam_step(model, source, &beam, config.beam_size, config.tie_break)?;
        total += out.expanded;
        beam = out.beam;
        for h in beam.completed() {
            if !seen.insert(h.tokens.clone()) {
                report.duplicates += 1;
                continue;
            }
            plain_tracker = plain_tracker.update(h, &Scorer::Plain);
            revised_tracker = revised_tracker.update(h, &revised);
            report.completed.push(TraceEntry {
                hypothesis: h.clone(),
                plain: h.score,
                revised: revised_score(h.score, h.output_len(), reward, length),
                step,
            });
        }
        report.steps = step;
        report.expanded.push(total);
        if let Some(top) = beam.top() {
            report.top_scores.push(top.score);
        }

        let record =
            |tracker: &BestTracker<S>, bound: S, returned: Option<&Hypothesis<S>>| FireRecord {
                step,
                top_completed: beam.top().is_some_and(|h| h.completed),
                returned: returned
                    .cloned()
                    .expect("a firing rule has something to return"),
                bound,
                best_key: tracker.best_key,
            };
        let fires = &mut report.fires;
        if fires.default.is_none() && stop_default(&beam).stop {
            let top = beam.top().expect("default fires on a non-empty beam");
            fires.default = Some(record(&plain_tracker, top.score, Some(top)));
        }
        if fires.optimal.is_none() && stop_optimal(&beam, &plain_tracker).stop {
            let top = beam.top().map_or(S::neg_infinity(), |h| h.score);
            fires.optimal = Some(record(&plain_tracker, top, plain_tracker.best.as_ref()));
        }
        if fires.bounded_full.is_none()
            && stop_bounded_full(&beam, step, reward, length, &revised_tracker).stop
        {
            let bound = bounded_full_bound(&beam, step, reward, length).expect("non-empty beam");
            fires.bounded_full = Some(record(
                &revised_tracker,
                bound,
                revised_tracker.best.as_ref(),
            ));
        }
        if fires.bounded_simplified.is_none()
            && stop_bounded_simplified(&beam, reward, length, &revised_tracker).stop
        {
            let bound = bounded_simplified_bound(&beam, reward, length).expect("non-empty beam");
            fires.bounded_simplified = Some(record(
                &revised_tracker,
                bound,
                revised_tracker.best.as_ref(),
            ));
        }
        report.beams.push(beam.clone());
    }
    Ok(report)
}

/// Outcome of checking one decode against the beam-trace oracle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub strategy: Strategy,
    pub b: usize,
    pub r: f64,
    pub l: f64,
    pub max_steps: usize,
    /// Best key over the trace's completions under the strategy's scorer.
    pub trace_max: Option<f64>,
    /// The decode's key under the same scorer; `None` if it found no completion.
    pub decoded: Option<f64>,
    /// `trace_max - decoded`.
    pub gap: Option<f64>,
    pub score_ok: bool,
    pub stop_step: usize,
    pub default_stop_step: usize,
    /// Stopped no later than the default rule (plain-score strategies only).
    pub early_ok: Option<bool>,
    pub plain_score: f64,
    pub default_plain_score: f64,
    pub dominance_ok: Option<bool>,
    pub items_expanded: usize,
    pub default_items_expanded: usize,
    pub work_ok: Option<bool>,
    pub pass: bool,
}

pub const SCORE_TOLERANCE: f64 = 1e-9;

pub fn verify_optimality<S: Real, M: ScoringModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    config: &SearchConfig<S>,
) -> Result<Verdict> {
    let decoded = decode(model, source, config)?;
    verdict_for(model, source, config, decoded)
}

/// As [`verify_optimality`], but the checked decode uses `rule`.
pub fn verify_optimality_with_rule<S: Real, M: ScoringModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    config: &SearchConfig<S>,
    rule: &dyn StoppingRule<S>,
) -> Result<Verdict> {
    let decoded = decode_with_rule(model, source, config, rule)?;
    verdict_for(model, source, config, decoded)
}

fn verdict_for<S: Real, M: ScoringModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    config: &SearchConfig<S>,
    decoded: crate::result::DecodeResult<S>,
) -> Result<Verdict> {
    let baseline_config = SearchConfig {
        strategy: Strategy::Default,
        ..config.clone()
    };
    let baseline = decode(model, source, &baseline_config)?;
    let mut trace_config = config.clone();
    trace_config.reward = config.effective_reward();
    let trace = beam_trace(model, source, &trace_config)?;

    let scorer = scorer_for(config.strategy, trace.reward, trace.length);
    let trace_max = trace
        .best(&scorer)
        .map(|e| scorer.key(&e.hypothesis).as_f64());
    let decoded_key = decoded
        .completed
        .then(|| scorer.key(&decoded.hypothesis).as_f64());
    let gap = trace_max.zip(decoded_key).map(|(t, d)| t - d);
    let score_ok = match (trace_max, decoded_key) {
        (None, None) => true,
        (Some(t), Some(d)) => (t - d).abs() <= SCORE_TOLERANCE,
        _ => false,
    };
    let plain_strategy = matches!(config.strategy, Strategy::Optimal | Strategy::Default);
    let early_ok = plain_strategy.then_some(decoded.stop_step <= baseline.stop_step);
    let dominance_ok = plain_strategy.then_some(decoded.plain_score >= baseline.plain_score);
    let work_ok = plain_strategy.then_some(decoded.items_expanded <= baseline.items_expanded);
    let pass = score_ok
        && early_ok != Some(false)
        && dominance_ok != Some(false)
        && work_ok != Some(false);
    Ok(Verdict {
        strategy: config.strategy,
        b: config.beam_size,
        r: trace.reward.as_f64(),
        l: trace.length.get().as_f64(),
        max_steps: config.max_steps,
        trace_max,
        decoded: decoded_key,
        gap,
        score_ok,
        stop_step: decoded.stop_step,
        default_stop_step: baseline.stop_step,
        early_ok,
        plain_score: decoded.plain_score.as_f64(),
        default_plain_score: baseline.plain_score.as_f64(),
        dominance_ok,
        items_expanded: decoded.items_expanded,
        default_items_expanded: baseline.items_expanded,
        work_ok,
        pass,
    })
}
