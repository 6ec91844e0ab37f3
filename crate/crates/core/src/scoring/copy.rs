use super::{check_prefix, ScoringModel};
use crate::error::Result;
use crate::vocab::{TokenId, Vocab};

/// Wraps a base model and boosts copying the source monotonically.
///
/// At output position `t` every source token within `slack` positions of
/// `t` has its probability multiplied by `exp(copy_bias)`. Once the window
/// has run past the end of the source, eos gets the boost instead, so the
/// preferred output length tracks the source length.
pub struct CopyChannelModel {
    base: Box<dyn ScoringModel>,
    copy_bias: f64,
    slack: usize,
}

impl CopyChannelModel {
    pub fn new(base: Box<dyn ScoringModel>, copy_bias: f64, slack: usize) -> Self {
        assert!(
            copy_bias >= 0.0 && copy_bias.is_finite(),
            "copy bias must be finite and >= 0"
        );
        Self {
            base,
            copy_bias,
            slack,
        }
    }

    pub fn copy_bias(&self) -> f64 {
        self.copy_bias
    }

    pub fn slack(&self) -> usize {
        self.slack
    }

    fn boosted(&self, source: &[TokenId], t: usize) -> Vec<TokenId> {
        let lo = t.saturating_sub(self.slack);
        let hi = t + self.slack;
        let mut out: Vec<TokenId> = source
            .iter()
            .enumerate()
            .filter(|(j, _)| (lo..=hi).contains(j))
            .map(|(_, &tok)| tok)
            .collect();
        if lo >= source.len() {
            out.push(self.base.vocab().eos());
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl ScoringModel for CopyChannelModel {
    fn vocab(&self) -> &Vocab {
        self.base.vocab()
    }

    fn next_logprobs(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>> {
        check_prefix(self.vocab(), source, prefix)?;
        let mut lp = self.base.next_logprobs(source, prefix)?;
        for tok in self.boosted(source, prefix.len()) {
            lp[tok.index()] += self.copy_bias;
        }
        let norm = super::log_sum_exp(&lp);
        for x in &mut lp {
            *x -= norm;
        }
        Ok(lp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::{log_sum_exp, SeededModel};

    #[test]
    fn boosts_aligned_token_and_stays_normalized() {
        let base = SeededModel::with_defaults(5, 11);
        let src = [TokenId(2), TokenId(0), TokenId(3)];
        let plain = base.next_logprobs(&src, &[TokenId(1)]).unwrap();
        let m = CopyChannelModel::new(Box::new(SeededModel::with_defaults(5, 11)), 3.0, 0);
        let lp = m.next_logprobs(&src, &[TokenId(1)]).unwrap();
        assert!(log_sum_exp(&lp).abs() < 1e-12);
        // position 1 aligns with source token 0
        // only the relative gain is fixed by renormalization
        let gain = (lp[0] - plain[0]) - (lp[1] - plain[1]);
        assert!((gain - 3.0).abs() < 1e-12);
        assert!(lp[1] < plain[1]);
    }

    #[test]
    fn boosts_eos_past_source_end() {
        let m = CopyChannelModel::new(Box::new(SeededModel::with_defaults(4, 2)), 2.0, 1);
        let src = [TokenId(0)];
        let eos = m.vocab().eos();
        assert!(!m.boosted(&src, 1).contains(&eos));
        assert!(m.boosted(&src, 2).contains(&eos));
        assert_eq!(m.boosted(&src, 1), vec![TokenId(0)]);
    }

    #[test]
    fn zero_bias_is_identity() {
        let base = SeededModel::with_defaults(4, 9);
        let m = CopyChannelModel::new(Box::new(SeededModel::with_defaults(4, 9)), 0.0, 2);
        let src = [TokenId(1), TokenId(2)];
        let a = base.next_logprobs(&src, &[]).unwrap();
        let b = m.next_logprobs(&src, &[]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
