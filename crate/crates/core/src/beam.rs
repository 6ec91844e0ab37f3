use std::cmp::Ordering;

use crate::config::TieBreak;
use crate::hypothesis::Hypothesis;
use crate::real::Real;

/// The hypotheses kept at one step, best first.
#[derive(Clone, Debug, PartialEq)]
pub struct Beam<S> {
    pub step: usize,
    pub items: Vec<Hypothesis<S>>,
    pub capacity: usize,
}

impl<S: Real> Beam<S> {
    /// The step-0 beam holding only the empty hypothesis.
    pub fn initial(capacity: usize) -> Self {
        Self {
            step: 0,
            items: vec![Hypothesis::empty()],
            capacity,
        }
    }

    pub fn top(&self) -> Option<&Hypothesis<S>> {
        self.items.first()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn partials(&self) -> impl Iterator<Item = &Hypothesis<S>> {
        self.items.iter().filter(|h| !h.completed)
    }

    pub fn completed(&self) -> impl Iterator<Item = &Hypothesis<S>> {
        self.items.iter().filter(|h| h.completed)
    }

    pub fn has_partial(&self) -> bool {
        self.items.iter().any(|h| !h.completed)
    }
}

/// Descending score; equal scores fall back to `tie_break`. `ia`/`ib` are
/// generation positions, used by [`TieBreak::Insertion`] and as the final key.
pub fn compare<S: Real>(
    a: &Hypothesis<S>,
    ia: usize,
    b: &Hypothesis<S>,
    ib: usize,
    tie_break: TieBreak,
) -> Ordering {
    let by_score = b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal);
    by_score.then_with(|| match tie_break {
        TieBreak::Lexicographic => a.tokens.cmp(&b.tokens).then(ia.cmp(&ib)),
        TieBreak::Insertion => ia.cmp(&ib),
    })
}

/// Keeps the `k` best of `candidates` (all created at `step`), sorted.
pub fn top_k<S: Real>(
    step: usize,
    candidates: Vec<Hypothesis<S>>,
    k: usize,
    tie_break: TieBreak,
) -> Beam<S> {
    debug_assert!(candidates.iter().all(|h| h.step_created == step));
    let mut indexed: Vec<(usize, Hypothesis<S>)> = candidates.into_iter().enumerate().collect();
    let cmp = |x: &(usize, Hypothesis<S>), y: &(usize, Hypothesis<S>)| {
        compare(&x.1, x.0, &y.1, y.0, tie_break)
    };
    if k < indexed.len() {
        if k > 0 {
            indexed.select_nth_unstable_by(k - 1, cmp);
        }
        indexed.truncate(k);
    }
    indexed.sort_unstable_by(cmp);
    Beam {
        step,
        items: indexed.into_iter().map(|(_, h)| h).collect(),
        capacity: k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::TokenId;

    fn hyp(tokens: &[u32], score: f64) -> Hypothesis<f64> {
        Hypothesis {
            tokens: tokens.iter().map(|&t| TokenId(t)).collect(),
            score,
            completed: tokens.last() == Some(&2),
            step_created: tokens.len(),
        }
    }

    #[test]
    fn sorts_descending() {
        let c = vec![hyp(&[2], -2.30), hyp(&[0], -0.51), hyp(&[1], -1.20)];
        let b = top_k(1, c, 3, TieBreak::Lexicographic);
        let order: Vec<u32> = b.items.iter().map(|h| h.tokens[0].0).collect();
        assert_eq!(order, vec![0, 1, 2]);
    }

    #[test]
    fn k_one_is_max() {
        let c = vec![hyp(&[2], -2.30), hyp(&[0], -0.51), hyp(&[1], -1.20)];
        let b = top_k(1, c, 1, TieBreak::Lexicographic);
        assert_eq!(b.items, vec![hyp(&[0], -0.51)]);
    }

    #[test]
    fn lexicographic_tie_break() {
        // "aab" and "aba" with a=0, b=1 at equal score
        let c = vec![hyp(&[0, 1, 0], -2.226), hyp(&[0, 0, 1], -2.226)];
        let b = top_k(3, c.clone(), 1, TieBreak::Lexicographic);
        assert_eq!(b.items[0].tokens, vec![TokenId(0), TokenId(0), TokenId(1)]);
        let b = top_k(3, c, 1, TieBreak::Insertion);
        assert_eq!(b.items[0].tokens, vec![TokenId(0), TokenId(1), TokenId(0)]);
    }

    #[test]
    fn k_zero_is_empty() {
        let b = top_k(1, vec![hyp(&[0], -0.5)], 0, TieBreak::Lexicographic);
        assert!(b.is_empty());
        assert_eq!(b.capacity, 0);
    }

    #[test]
    fn neg_infinity_sorts_last() {
        let c = vec![hyp(&[0], f64::NEG_INFINITY), hyp(&[1], -40.0)];
        let b = top_k(1, c, 1, TieBreak::Lexicographic);
        assert_eq!(b.items[0].score, -40.0);
    }
}
