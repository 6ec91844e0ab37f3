use std::collections::HashMap;

use super::{check_prefix, ScoringModel};
use crate::error::{Error, Result};
use crate::vocab::{TokenId, Vocab, DEFAULT_EOS};

/// Sentence-start padding in n-gram contexts; never a vocabulary entry.
pub const BOS: u32 = u32::MAX;

/// Add-k smoothed n-gram model.
#[derive(Clone, Debug)]
pub struct NgramModel {
    vocab: Vocab,
    order: usize,
    k: f64,
    context_counts: HashMap<Vec<u32>, u64>,
    ngram_counts: HashMap<Vec<u32>, u64>,
}

/// Trains on whitespace-tokenized sentences; eos is appended to each.
///
/// The vocabulary is every word in order of first appearance, then eos.
pub fn train_ngram<S: AsRef<str>>(corpus: &[S], order: usize, k: f64) -> Result<NgramModel> {
    if order == 0 {
        return Err(Error::Config("n-gram order must be at least 1".into()));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Config(format!(
            "smoothing constant must be > 0, got {k}"
        )));
    }
    let sentences: Vec<Vec<&str>> = corpus
        .iter()
        .map(|s| s.as_ref().split_whitespace().collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect();
    if sentences.is_empty() {
        return Err(Error::EmptyInput("n-gram corpus has no sentences".into()));
    }
    let mut symbols: Vec<String> = Vec::new();
    let mut seen = HashMap::new();
    for w in sentences.iter().flatten() {
        if *w == DEFAULT_EOS {
            return Err(Error::Validation(format!(
                "corpus contains the reserved symbol {DEFAULT_EOS}"
            )));
        }
        if !seen.contains_key(*w) {
            seen.insert(w.to_string(), symbols.len());
            symbols.push(w.to_string());
        }
    }
    symbols.push(DEFAULT_EOS.to_string());
    let vocab = Vocab::new(symbols, DEFAULT_EOS)?;

    let mut context_counts = HashMap::new();
    let mut ngram_counts = HashMap::new();
    for sentence in &sentences {
        let mut padded = vec![BOS; order - 1];
        padded.extend(sentence.iter().map(|w| seen[*w] as u32));
        padded.push(vocab.eos().0);
        for window in padded.windows(order) {
            *context_counts
                .entry(window[..order - 1].to_vec())
                .or_insert(0) += 1;
            *ngram_counts.entry(window.to_vec()).or_insert(0) += 1;
        }
    }
    Ok(NgramModel {
        vocab,
        order,
        k,
        context_counts,
        ngram_counts,
    })
}

impl NgramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> f64 {
        self.k
    }

    /// `order - 1` ids preceding the next token, left-padded with [`BOS`].
    pub fn context(&self, prefix: &[TokenId]) -> Vec<u32> {
        let n = self.order - 1;
        let mut ctx = vec![BOS; n.saturating_sub(prefix.len())];
        ctx.extend(prefix[prefix.len().saturating_sub(n)..].iter().map(|t| t.0));
        ctx
    }

    /// `(count(context, w) + k) / (count(context) + k V)`.
    pub fn probability(&self, context: &[u32], word: TokenId) -> f64 {
        let c = self.context_counts.get(context).copied().unwrap_or(0) as f64;
        let mut key = context.to_vec();
        key.push(word.0);
        let cw = self.ngram_counts.get(&key).copied().unwrap_or(0) as f64;
        (cw + self.k) / (c + self.k * self.vocab.len() as f64)
    }
}

impl ScoringModel for NgramModel {
    fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn next_logprobs(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>> {
        check_prefix(&self.vocab, source, prefix)?;
        let ctx = self.context(prefix);
        Ok((0..self.vocab.len())
            .map(|w| self.probability(&ctx, TokenId::from(w)).ln())
            .collect())
    }

    fn uses_source(&self) -> bool {
        false
    }
}
