use std::io::Write;

use anyhow::{Context, Result};
use optbeam::search::decode;
use optbeam::{DecodeResult, ScoringModel, SearchConfig};
use serde::{Deserialize, Serialize};

use crate::runspec::Source;

/// One JSONL line of `decode` output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeRecord {
    pub source: String,
    pub tokens: Vec<String>,
    pub score: f64,
    pub revised_score: f64,
    pub stop_step: usize,
    pub items_expanded: usize,
    pub completed: bool,
    pub strategy: String,
    pub b: usize,
    pub r: f64,
    pub l: f64,
}

impl DecodeRecord {
    pub fn new(model: &dyn ScoringModel, source: &Source, result: &DecodeResult) -> Self {
        Self {
            source: source.text.clone(),
            tokens: model.vocab().decode(&result.hypothesis.tokens),
            score: result.plain_score,
            revised_score: result.revised_score,
            stop_step: result.stop_step,
            items_expanded: result.items_expanded,
            completed: result.completed,
            strategy: result.strategy.name().to_string(),
            b: result.config.beam_size,
            r: result.config.effective_reward(),
            l: result.length.get(),
        }
    }

    /// Output length over source length; `None` for an empty source.
    pub fn len_ratio(&self) -> Option<f64> {
        let src = self.source.split_whitespace().count();
        let out = self.tokens.len() - usize::from(self.completed);
        (src > 0).then(|| out as f64 / src as f64)
    }
}

pub fn decode_all(
    model: &dyn ScoringModel,
    sources: &[Source],
    config: &SearchConfig,
) -> Result<Vec<DecodeRecord>> {
    sources
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let r = decode(model, &s.tokens, config)
                .with_context(|| format!("decoding source line {}", i + 1))?;
            Ok(DecodeRecord::new(model, s, &r))
        })
        .collect()
}

pub fn cmd_decode(
    model: &dyn ScoringModel,
    sources: &[Source],
    config: &SearchConfig,
) -> Result<Vec<DecodeRecord>> {
    decode_all(model, sources, config)
}

pub fn write_jsonl<T: Serialize>(out: &mut dyn Write, rows: &[T]) -> Result<()> {
    for row in rows {
        serde_json::to_writer(&mut *out, row)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
