use std::collections::BTreeMap;
use std::fmt;

use anyhow::Result;
use optbeam::oracle::{
    beam_trace, verify_optimality, verify_optimality_with_rule, Verdict, SCORE_TOLERANCE,
};
use optbeam::search::{
    bounded_simplified_bound, StopContext, StopReason, StoppingDecision, StoppingRule,
};
use optbeam::{SearchConfig, SeededModel, Strategy, TokenId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

/// Deliberate defects for exercising the verifier itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Certificate with its inequality reversed.
    FlipCertificate,
}

struct FlippedCertificate;

impl StoppingRule<f64> for FlippedCertificate {
    fn decide(&self, ctx: &StopContext<'_, f64>) -> StoppingDecision {
        match ctx.beam.top() {
            Some(top) if ctx.tracker.is_defined() && top.score > ctx.tracker.best_key => {
                StoppingDecision::stop(StopReason::Certificate)
            }
            _ => StoppingDecision::CONTINUE,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    pub vocab: (usize, usize),
    pub steps: (usize, usize),
    pub beam: (usize, usize),
    pub source_len: (usize, usize),
    pub rewards: Vec<f64>,
    pub ratios: Vec<f64>,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            trials: 500,
            seed: 0,
            vocab: (3, 6),
            steps: (6, 10),
            beam: (1, 8),
            source_len: (1, 6),
            rewards: vec![0.3, 1.0, 1.2],
            ratios: vec![0.8, 1.27],
            fault: None,
        }
    }
}

/// A randomized verification instance.
#[derive(Clone, Debug)]
pub struct Trial {
    pub index: usize,
    pub model: SeededModel,
    pub source: Vec<TokenId>,
    pub b: usize,
    pub max_steps: usize,
    pub reward: f64,
    pub ratio: f64,
}

impl Trial {
    pub fn config(&self, strategy: Strategy) -> SearchConfig {
        SearchConfig::new(strategy, self.b)
            .with_max_steps(self.max_steps)
            .with_reward(self.reward)
            .with_length_ratio(self.ratio)
    }
}

pub fn make_trials(opts: &VerifyOptions) -> Vec<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..opts.trials)
        .map(|index| {
            let v = rng.random_range(opts.vocab.0..=opts.vocab.1);
            let max_steps = rng.random_range(opts.steps.0..=opts.steps.1);
            let b = rng.random_range(opts.beam.0..=opts.beam.1);
            let model = SeededModel::new(
                v,
                rng.random(),
                rng.random_range(0.5..2.5),
                rng.random_range(0.0..0.5),
            );
            let len = rng.random_range(opts.source_len.0..=opts.source_len.1);
            let source = (0..len)
                .map(|_| TokenId::from(rng.random_range(0..(v - 1).max(1))))
                .collect();
            let reward = opts.rewards[index % opts.rewards.len()];
            let ratio = opts.ratios[(index / opts.rewards.len()) % opts.ratios.len()];
            Trial {
                index,
                model,
                source,
                b,
                max_steps,
                reward,
                ratio,
            }
        })
        .collect()
}

/// Outcome of comparing the full and simplified bounded-reward rules on one
/// trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Equivalence {
    pub full_step: Option<usize>,
    pub simplified_step: Option<usize>,
    pub top_completed: bool,
    /// The rules fired at different steps or returned different hypotheses.
    pub diverged: bool,
    /// `simplified bound - full bound` at the full rule's firing step.
    pub slack: Option<f64>,
    /// `r (l - min(l, |top|) - max(l - i, 0))`.
    pub predicted_slack: Option<f64>,
    pub pass: bool,
}

pub fn check_equivalence(trial: &Trial) -> Result<Equivalence> {
    let cfg = trial.config(Strategy::OptimalBoundedFull);
    let trace = beam_trace(&trial.model, &trial.source, &cfg)?;
    let full = trace.fires.bounded_full.as_ref();
    let simp = trace.fires.bounded_simplified.as_ref();
    let same = match (full, simp) {
        (Some(f), Some(s)) => f.step == s.step && f.returned == s.returned,
        (None, None) => true,
        _ => false,
    };
    let top_completed = full.is_some_and(|f| f.top_completed);
    let (mut slack, mut predicted) = (None, None);
    if let Some(f) = full {
        let beam = &trace.beams[f.step - 1];
        let top = beam.top().expect("a firing rule saw a non-empty beam");
        let simp_bound =
            bounded_simplified_bound(beam, trace.reward, trace.length).expect("non-empty");
        let (r, l, i) = (trace.reward, trace.length.get(), f.step as f64);
        slack = Some(simp_bound - f.bound);
        predicted = Some(r * (l - l.min(top.output_len() as f64) - (l - i).max(0.0)));
    }
    let slack_ok = match (slack, predicted) {
        (Some(s), Some(p)) => (s - p).abs() <= SCORE_TOLERANCE,
        _ => true,
    };
    let pass = if top_completed { slack_ok } else { same };
    Ok(Equivalence {
        full_step: full.map(|f| f.step),
        simplified_step: simp.map(|s| s.step),
        top_completed,
        diverged: !same,
        slack,
        predicted_slack: predicted,
        pass,
    })
}

pub const INVARIANTS: [&str; 6] = [
    "optimality",
    "early_stopping",
    "dominance",
    "work_bound",
    "bounded_optimality",
    "criterion_equivalence",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifySummary {
    /// invariant -> (passed, checked)
    pub counts: BTreeMap<&'static str, (usize, usize)>,
    /// Completed-top firings where the two bounded rules disagreed.
    pub divergences: usize,
}

impl VerifySummary {
    fn record(&mut self, name: &'static str, ok: Option<bool>) {
        if let Some(ok) = ok {
            let e = self.counts.entry(name).or_default();
            e.0 += usize::from(ok);
            e.1 += 1;
        }
    }

    pub fn failures(&self) -> usize {
        self.counts.values().map(|(p, n)| n - p).sum()
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(self.failures() > 0)
    }
}

impl fmt::Display for VerifySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, (p, n)) in &self.counts {
            writeln!(f, "{name}: {p}/{n}")?;
        }
        write!(f, "completed-top divergences: {}", self.divergences)
    }
}

fn tagged(trial: usize, check: &str, body: impl Serialize) -> Result<Value> {
    let mut v = serde_json::to_value(body)?;
    if let Value::Object(map) = &mut v {
        map.insert("trial".into(), json!(trial));
        map.insert("check".into(), json!(check));
    }
    Ok(v)
}

/// Runs every trial and returns the per-check records and the summary.
pub fn cmd_verify(opts: &VerifyOptions) -> Result<(Vec<Value>, VerifySummary)> {
    let mut records = Vec::new();
    let mut summary = VerifySummary::default();
    for trial in make_trials(opts) {
        let (model, src) = (&trial.model, trial.source.as_slice());
        let opt_cfg = trial.config(Strategy::Optimal);
        let v: Verdict = match opts.fault {
            Some(Fault::FlipCertificate) => {
                verify_optimality_with_rule(model, src, &opt_cfg, &FlippedCertificate)?
            }
            None => verify_optimality(model, src, &opt_cfg)?,
        };
        summary.record("optimality", Some(v.score_ok));
        summary.record("early_stopping", v.early_ok);
        summary.record("dominance", v.dominance_ok);
        summary.record("work_bound", v.work_ok);
        records.push(tagged(trial.index, "optimal", &v)?);

        let bv = verify_optimality(
            model,
            src,
            &trial.config(Strategy::OptimalBoundedSimplified),
        )?;
        summary.record("bounded_optimality", Some(bv.score_ok));
        records.push(tagged(trial.index, "bounded", &bv)?);

        let eq = check_equivalence(&trial)?;
        summary.record("criterion_equivalence", Some(eq.pass));
        if eq.diverged && eq.top_completed {
            summary.divergences += 1;
        }
        records.push(tagged(trial.index, "equivalence", &eq)?);
    }
    Ok((records, summary))
}
