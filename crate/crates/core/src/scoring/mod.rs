//! Locally normalized next-token models.
//!
//! Every model returns natural-log probabilities over its [`Vocab`] in
//! `f64`; search code converts to its own scalar type.

mod copy;
mod ngram;
mod seeded;
mod spec;
mod table;

pub use copy::CopyChannelModel;
pub use ngram::{train_ngram, NgramModel, BOS};
pub use seeded::SeededModel;
pub use spec::{make_seeded_model, parse_copy_spec, parse_model_spec};
pub use table::{load_table_model, TableFile, TableModel};

use crate::error::{Error, Result};
use crate::vocab::{TokenId, Vocab};

pub trait ScoringModel: Send + Sync {
    fn vocab(&self) -> &Vocab;

    /// Log-probabilities of every vocabulary entry following `prefix`.
    fn next_logprobs(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>>;

    /// False when the output never depends on `source`.
    fn uses_source(&self) -> bool {
        true
    }
}

impl<M: ScoringModel + ?Sized> ScoringModel for Box<M> {
    fn vocab(&self) -> &Vocab {
        (**self).vocab()
    }

    fn next_logprobs(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>> {
        (**self).next_logprobs(source, prefix)
    }

    fn uses_source(&self) -> bool {
        (**self).uses_source()
    }
}

impl<M: ScoringModel + ?Sized> ScoringModel for &M {
    fn vocab(&self) -> &Vocab {
        (**self).vocab()
    }

    fn next_logprobs(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>> {
        (**self).next_logprobs(source, prefix)
    }

    fn uses_source(&self) -> bool {
        (**self).uses_source()
    }
}

/// Log-sum-exp over finite entries; negative infinity when there are none.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs
        .iter()
        .copied()
        .filter(|x| x.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = xs
        .iter()
        .filter(|x| x.is_finite())
        .map(|x| (x - max).exp())
        .sum();
    max + sum.ln()
}

/// Prefix must be in-vocabulary and eos-free.
pub(crate) fn check_prefix(vocab: &Vocab, source: &[TokenId], prefix: &[TokenId]) -> Result<()> {
    for &t in source.iter().chain(prefix) {
        vocab.check(t)?;
    }
    if prefix.contains(&vocab.eos()) {
        return Err(Error::EosInPrefix);
    }
    Ok(())
}

/// Checks a linear-space probability row.
pub(crate) fn validate_row(row: &[f64], size: usize, what: &str) -> Result<()> {
    if row.len() != size {
        return Err(Error::Validation(format!(
            "{what}: expected {size} probabilities, got {}",
            row.len()
        )));
    }
    if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Validation(format!(
            "{what}: probability {p} outside [0, 1]"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "{what}: probabilities sum to {sum}, not 1"
        )));
    }
    Ok(())
}
