use anyhow::{Context, Result};
use optbeam::config::SearchConfig;
use optbeam::{ScoringModel, Strategy, TokenId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Everything that determines a batch of decodes.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub strategies: Vec<Strategy>,
    pub beam_sizes: Vec<usize>,
    pub rewards: Vec<f64>,
    pub length_ratio: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            strategies: vec![Strategy::Optimal],
            beam_sizes: vec![5],
            rewards: vec![0.0],
            length_ratio: 1.0,
            max_steps: 50,
            seed: 0,
        }
    }
}

impl RunSpec {
    pub fn config(&self, strategy: Strategy, b: usize, r: f64) -> SearchConfig<f64> {
        SearchConfig::new(strategy, b)
            .with_reward(r)
            .with_length_ratio(self.length_ratio)
            .with_max_steps(self.max_steps)
    }

    /// Grid cells ordered by strategy name, then beam size, then reward.
    pub fn grid(&self) -> Vec<(Strategy, usize, f64)> {
        let mut strategies = self.strategies.clone();
        strategies.sort_by_key(|s| s.name());
        strategies.dedup();
        let mut bs = self.beam_sizes.clone();
        bs.sort_unstable();
        bs.dedup();
        let mut rs = self.rewards.clone();
        rs.sort_by(f64::total_cmp);
        rs.dedup();
        let mut cells = Vec::new();
        for &s in &strategies {
            for &b in &bs {
                for &r in &rs {
                    cells.push((s, b, r));
                }
            }
        }
        cells
    }
}

/// One input line together with its token ids.
#[derive(Clone, Debug, PartialEq)]
pub struct Source {
    pub text: String,
    pub tokens: Vec<TokenId>,
}

pub fn parse_sources(model: &dyn ScoringModel, text: &str) -> Result<Vec<Source>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let tokens = model
                .vocab()
                .encode(line)
                .with_context(|| format!("source line {}", i + 1))?;
            Ok(Source {
                text: line.to_string(),
                tokens,
            })
        })
        .collect()
}

/// `n` random sources of 3 to 8 non-eos tokens, reproducible from `seed`.
pub fn random_sources(model: &dyn ScoringModel, n: usize, seed: u64) -> Vec<Source> {
    let vocab = model.vocab();
    let choices: Vec<TokenId> = (0..vocab.len())
        .map(TokenId::from)
        .filter(|&t| t != vocab.eos())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.random_range(3..=8);
            let tokens: Vec<TokenId> = if choices.is_empty() {
                Vec::new()
            } else {
                (0..len)
                    .map(|_| choices[rng.random_range(0..choices.len())])
                    .collect()
            };
            Source {
                text: vocab.decode(&tokens).join(" "),
                tokens,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use optbeam::SeededModel;

    #[test]
    fn grid_order_is_lexicographic() {
        let spec = RunSpec {
            strategies: vec![Strategy::Optimal, Strategy::Default, Strategy::ShrinkReward],
            beam_sizes: vec![10, 2],
            rewards: vec![1.0, 0.5],
            ..RunSpec::default()
        };
        let g = spec.grid();
        assert_eq!(g.len(), 12);
        assert_eq!(g[0], (Strategy::Default, 2, 0.5));
        assert_eq!(g[1], (Strategy::Default, 2, 1.0));
        assert_eq!(g[2], (Strategy::Default, 10, 0.5));
        assert_eq!(g[4].0, Strategy::Optimal);
        assert_eq!(g[11], (Strategy::ShrinkReward, 10, 1.0));
    }

    #[test]
    fn random_sources_are_reproducible() {
        let m = SeededModel::with_defaults(5, 1);
        let a = random_sources(&m, 10, 7);
        assert_eq!(a, random_sources(&m, 10, 7));
        assert_ne!(a, random_sources(&m, 10, 8));
        assert!(a.iter().all(|s| (3..=8).contains(&s.tokens.len())));
        assert!(a.iter().all(|s| !s.tokens.contains(&TokenId(4))));
    }

    #[test]
    fn unknown_source_token_names_the_line() {
        let m = SeededModel::with_defaults(3, 1);
        let err = parse_sources(&m, "w0 w1\nw0 zz\n").unwrap_err();
        assert!(format!("{err:#}").contains("line 2"));
    }
}
