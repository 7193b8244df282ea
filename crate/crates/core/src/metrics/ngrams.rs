use std::collections::HashMap;
use std::hash::Hash;

/// Highest n-gram order tracked by the metrics.
pub const MAX_ORDER: usize = 4;

/// Multisets of the 1- to 4-grams of one sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramStats<T: Hash + Eq> {
    len: usize,
    /// `orders[n - 1]` counts n-grams.
    orders: Vec<HashMap<Vec<T>, usize>>,
}

impl<T: Hash + Eq + Clone> NGramStats<T> {
    pub fn new(tokens: &[T]) -> Self {
        let orders = (1..=MAX_ORDER)
            .map(|n| {
                let mut m: HashMap<Vec<T>, usize> = HashMap::new();
                for g in tokens.windows(n) {
                    *m.entry(g.to_vec()).or_default() += 1;
                }
                m
            })
            .collect();
        NGramStats {
            len: tokens.len(),
            orders,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Counts of order `n` (1-based).
    pub fn order(&self, n: usize) -> &HashMap<Vec<T>, usize> {
        &self.orders[n - 1]
    }

    /// Number of n-gram occurrences of order `n`: `max(0, len - n + 1)`.
    pub fn total(&self, n: usize) -> usize {
        (self.len + 1).saturating_sub(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn repeated_tokens() {
        let s = NGramStats::new(&["the", "the", "the"]);
        assert_eq!(s.order(1)[&vec!["the"]], 3);
        assert_eq!(s.order(2)[&vec!["the", "the"]], 2);
        assert!(s.order(4).is_empty());
    }

    proptest! {
        #[test]
        fn occurrence_counts(tokens in prop::collection::vec(0u8..4, 0..12)) {
            let s = NGramStats::new(&tokens);
            for n in 1..=MAX_ORDER {
                let sum: usize = s.order(n).values().sum();
                prop_assert_eq!(sum, tokens.len().saturating_sub(n - 1));
                prop_assert_eq!(sum, s.total(n));
            }
        }
    }
}
