use crate::hypothesis::Hypothesis;
use crate::real::Real;
use crate::search::{revised_score, LengthEstimate};

/// Key under which completed hypotheses are ranked by a [`BestTracker`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scorer<S> {
    /// Plain model score `sc(y)`.
    Plain,
    /// `sc(y) + r * min(l, |y|)`.
    Revised {
        reward: S,
        length: LengthEstimate<S>,
    },
}

impl<S: Real> Scorer<S> {
    pub fn revised(reward: S, length: LengthEstimate<S>) -> Self {
        Scorer::Revised { reward, length }
    }

    pub fn key(&self, h: &Hypothesis<S>) -> S {
        match *self {
            Scorer::Plain => h.score,
            Scorer::Revised { reward, length } => {
                revised_score(h.score, h.output_len(), reward, length)
            }
        }
    }
}

/// Running best completed hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct BestTracker<S> {
    pub best: Option<Hypothesis<S>>,
    /// Active-scorer key of `best`; negative infinity while empty.
    pub best_key: S,
}

impl<S: Real> Default for BestTracker<S> {
    fn default() -> Self {
        Self {
            best: None,
            best_key: S::neg_infinity(),
        }
    }
}

impl<S: Real> BestTracker<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_defined(&self) -> bool {
        self.best.is_some()
    }

    /// Replaces the best iff `h` scores strictly higher; ties keep the
    /// earlier hypothesis.
    pub fn update(self, h: &Hypothesis<S>, scorer: &Scorer<S>) -> Self {
        assert!(h.completed, "only completed hypotheses can be tracked");
        let key = scorer.key(h);
        if self.best.is_none() || key > self.best_key {
            Self {
                best: Some(h.clone()),
                best_key: key,
            }
        } else {
            self
        }
    }
}

pub fn best_update<S: Real>(
    tracker: BestTracker<S>,
    h: &Hypothesis<S>,
    scorer: &Scorer<S>,
) -> BestTracker<S> {
    tracker.update(h, scorer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::TokenId;

    fn done(len: usize, score: f64) -> Hypothesis<f64> {
        let mut tokens = vec![TokenId(0); len];
        tokens.push(TokenId(9));
        Hypothesis {
            step_created: tokens.len(),
            tokens,
            score,
            completed: true,
        }
    }

    #[test]
    fn first_completion_defines_best() {
        let t = BestTracker::new().update(&done(0, -2.30), &Scorer::Plain);
        assert_eq!(t.best_key, -2.30);
        assert!(t.is_defined());
    }

    #[test]
    fn worse_completion_is_ignored() {
        let t = BestTracker::new().update(&done(0, -2.30), &Scorer::Plain);
        let t2 = t.clone().update(&done(3, -2.80), &Scorer::Plain);
        assert_eq!(t, t2);
    }

    #[test]
    fn exact_tie_keeps_earlier() {
        let first = done(1, -1.0);
        let t = BestTracker::new()
            .update(&first, &Scorer::Plain)
            .update(&done(2, -1.0), &Scorer::Plain);
        assert_eq!(t.best.unwrap(), first);
    }

    #[test]
    fn revised_scorer_replaces() {
        let scorer = Scorer::revised(1.0, LengthEstimate::new(3.0));
        let mut t = BestTracker::new().update(&done(0, -5.0), &scorer);
        assert_eq!(t.best_key, -5.0);
        // -6.5 + 1 * min(3, 4) = -3.5
        t = t.update(&done(4, -6.5), &scorer);
        assert_eq!(t.best_key, -3.5);
        assert_eq!(t.best.unwrap().score, -6.5);
    }

    #[test]
    #[should_panic(expected = "completed")]
    fn partial_update_panics() {
        let h = Hypothesis::<f64>::empty();
        let _ = BestTracker::new().update(&h, &Scorer::Plain);
    }
}
