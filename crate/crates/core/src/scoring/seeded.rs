use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{check_prefix, log_sum_exp, ScoringModel};
use crate::error::Result;
use crate::vocab::{TokenId, Vocab, DEFAULT_EOS};

pub const DEFAULT_CONCENTRATION: f64 = 1.0;
pub const DEFAULT_EOS_GROWTH: f64 = 0.25;

/// Pseudo-random model whose distributions are a pure function of
/// `(seed, source, prefix)`.
///
/// The eos probability depends only on the source and the prefix length:
/// `p(t) = 1 - (1 - p0) exp(-eos_growth * t)` with `p0` drawn from the
/// source hash, so it never decreases as the output grows. The remaining
/// mass is split over the other tokens by a softmax of Gaussian logits
/// scaled by `concentration`.
#[derive(Clone, Debug)]
pub struct SeededModel {
    vocab: Vocab,
    seed: u64,
    concentration: f64,
    eos_growth: f64,
}

impl SeededModel {
    /// `vocab_size` counts eos; eos is the last id.
    pub fn new(vocab_size: usize, seed: u64, concentration: f64, eos_growth: f64) -> Self {
        assert!(vocab_size >= 1, "vocabulary must contain eos");
        assert!(concentration > 0.0 && concentration.is_finite());
        assert!(eos_growth >= 0.0 && eos_growth.is_finite());
        let symbols = (0..vocab_size - 1)
            .map(|i| format!("w{i}"))
            .chain([DEFAULT_EOS.to_string()]);
        let vocab = Vocab::new(symbols, DEFAULT_EOS).expect("generated symbols are distinct");
        Self {
            vocab,
            seed,
            concentration,
            eos_growth,
        }
    }

    pub fn with_defaults(vocab_size: usize, seed: u64) -> Self {
        Self::new(vocab_size, seed, DEFAULT_CONCENTRATION, DEFAULT_EOS_GROWTH)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    pub fn eos_growth(&self) -> f64 {
        self.eos_growth
    }

    /// Probability of eos after a prefix of `len` tokens.
    pub fn eos_probability(&self, source: &[TokenId], len: usize) -> f64 {
        if self.vocab.len() == 1 {
            return 1.0;
        }
        let h = Fnv::new().u64(self.seed).u64(0xE05).ids(source).finish();
        let p0 = 0.02 + 0.2 * unit(h);
        1.0 - (1.0 - p0) * (-self.eos_growth * len as f64).exp()
    }
}

fn unit(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// 64-bit FNV-1a; stable across platforms and releases.
struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn bytes(mut self, bytes: &[u8]) -> Self {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self
    }

    fn u64(self, x: u64) -> Self {
        self.bytes(&x.to_le_bytes())
    }

    fn ids(mut self, ids: &[TokenId]) -> Self {
        self = self.u64(ids.len() as u64);
        for id in ids {
            self = self.bytes(&id.0.to_le_bytes());
        }
        self
    }

    fn finish(self) -> u64 {
        self.0
    }
}

impl ScoringModel for SeededModel {
    fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn next_logprobs(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>> {
        check_prefix(&self.vocab, source, prefix)?;
        let v = self.vocab.len();
        if v == 1 {
            return Ok(vec![0.0]);
        }
        let p_eos = self.eos_probability(source, prefix.len());
        let h = Fnv::new().u64(self.seed).ids(source).ids(prefix).finish();
        let mut rng = ChaCha8Rng::seed_from_u64(h);
        let logits: Vec<f64> = (0..v - 1)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                self.concentration * z
            })
            .collect();
        let norm = log_sum_exp(&logits);
        let rest = (-p_eos).ln_1p();
        let mut out: Vec<f64> = logits.iter().map(|x| rest + x - norm).collect();
        out.push(p_eos.ln());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let m = SeededModel::with_defaults(5, 42);
        let src = [TokenId(1), TokenId(3)];
        let a = m.next_logprobs(&src, &[TokenId(0)]).unwrap();
        let b = SeededModel::with_defaults(5, 42)
            .next_logprobs(&src, &[TokenId(0)])
            .unwrap();
        assert_eq!(a, b);
        let c = m.next_logprobs(&src, &[TokenId(1)]).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn normalized() {
        let m = SeededModel::new(6, 7, 2.5, 0.4);
        for len in 0..12 {
            let prefix = vec![TokenId(2); len];
            let lp = m.next_logprobs(&[TokenId(0)], &prefix).unwrap();
            assert!(log_sum_exp(&lp).abs() < 1e-12);
            assert!(lp.iter().all(|&x| x <= 1e-12));
        }
    }

    #[test]
    fn eos_only_vocab() {
        let m = SeededModel::with_defaults(1, 1);
        assert_eq!(m.next_logprobs(&[], &[]).unwrap(), vec![0.0]);
    }

    #[test]
    fn eos_probability_grows() {
        let m = SeededModel::new(5, 3, 1.0, 0.5);
        let src = [TokenId(0), TokenId(1), TokenId(2)];
        let p = |len: usize| m.next_logprobs(&src, &vec![TokenId(1); len]).unwrap()[4].exp();
        // direct evaluation of the schedule: 1 - (1 - p0) e^{-0.5 t}
        let p1 = p(1);
        let p0 = 1.0 - (1.0 - p1) / (-0.5f64).exp();
        assert!((p(6) - (1.0 - (1.0 - p0) * (-3.0f64).exp())).abs() < 1e-12);
        assert!(p(6) >= p1);
        let flat = SeededModel::new(5, 3, 1.0, 0.0);
        let q = |len: usize| flat.next_logprobs(&src, &vec![TokenId(1); len]).unwrap()[4];
        assert_eq!(q(1), q(6));
    }
}
