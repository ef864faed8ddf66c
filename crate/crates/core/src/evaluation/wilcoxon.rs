//! Wilcoxon rank-sum test, ranked so that the largest value gets rank 1.
//!
//! Under the null hypothesis the test group's ranks are a uniformly random
//! `n`-subset of `1..=N`. For `N ≤ 30` the null distribution of their sum is
//! tabulated exactly by counting subsets per (size, sum); with tied values
//! the midranks are permuted by Monte Carlo instead.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `N` handled by exact enumeration.
pub const EXACT_LIMIT: usize = 30;

/// Draws used for tied data.
pub const PERMUTATION_DRAWS: usize = 1_000_000;

pub const PERMUTATION_SEED: u64 = 0x7d09_5eed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSums {
    pub test: f64,
    pub control: f64,
    /// Whether midranks were needed.
    pub tied: bool,
}

/// Descending midranks: the largest value gets 1, tied values share the
/// average of their positions.
pub fn descending_midranks(values: &[f64]) -> (Vec<f64>, bool) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut tied = false;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        if j - i > 1 {
            tied = true;
        }
        // positions i+1 ..= j
        let mid = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = mid;
        }
        i = j;
    }
    (ranks, tied)
}

pub fn rank_sum(test: &[f64], control: &[f64]) -> RankSums {
    let all: Vec<f64> = test.iter().chain(control).copied().collect();
    let (ranks, tied) = descending_midranks(&all);
    RankSums {
        test: ranks[..test.len()].iter().sum(),
        control: ranks[test.len()..].iter().sum(),
        tied,
    }
}

/// Exact null distribution of the rank sum of `n` ranks drawn from `1..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankSumDistribution {
    n: usize,
    total: usize,
    /// `counts[w]`: number of `n`-subsets with sum `w`.
    counts: Vec<u64>,
}

impl RankSumDistribution {
    pub fn new(n: usize, total: usize) -> Result<Self> {
        if n > total {
            return Err(Error::Contract(format!("group of {n} out of {total}")));
        }
        if total > EXACT_LIMIT {
            return Err(Error::Contract(format!(
                "exact rank-sum distribution is limited to {EXACT_LIMIT} values, got {total}"
            )));
        }
        let max_sum = total * (total + 1) / 2;
        // table[k][w]: subsets of the ranks seen so far with k members and sum w
        let mut table = vec![vec![0u64; max_sum + 1]; n + 1];
        table[0][0] = 1;
        for r in 1..=total {
            for k in (1..=n.min(r)).rev() {
                for w in (r..=max_sum).rev() {
                    table[k][w] += table[k - 1][w - r];
                }
            }
        }
        Ok(Self {
            n,
            total,
            counts: table.swap_remove(n),
        })
    }

    pub fn min_sum(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    pub fn max_sum(&self) -> usize {
        self.n * (2 * self.total - self.n + 1) / 2
    }

    pub fn subsets(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn count(&self, w: usize) -> u64 {
        self.counts.get(w).copied().unwrap_or(0)
    }

    /// `P(W ≤ w)`.
    pub fn cdf(&self, w: usize) -> f64 {
        let upto = w.min(self.counts.len() - 1);
        let below: u64 = self.counts[..=upto].iter().sum();
        below as f64 / self.subsets() as f64
    }
}

/// `1 − P(W' ≤ w)` for the rank sum `w` of `n_test` out of
/// `n_test + n_control` distinct ranks.
pub fn certainty(w: u64, n_test: usize, n_control: usize) -> Result<f64> {
    let dist = RankSumDistribution::new(n_test, n_test + n_control)?;
    let w = w as usize;
    if w < dist.min_sum() || w > dist.max_sum() {
        return Err(Error::Contract(format!(
            "rank sum {w} outside [{}, {}]",
            dist.min_sum(),
            dist.max_sum()
        )));
    }
    Ok(1.0 - dist.cdf(w))
}

/// Monte Carlo version for arbitrary (e.g. mid-) ranks: the first `n_test`
/// entries of a random permutation of `ranks` form the test group.
pub fn certainty_permutation(ranks: &[f64], n_test: usize, observed: f64, draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = ranks.to_vec();
    let mut at_most = 0usize;
    for _ in 0..draws {
        let (head, _) = pool.partial_shuffle(&mut rng, n_test);
        let s: f64 = head.iter().sum();
        if s <= observed + 1e-9 {
            at_most += 1;
        }
    }
    1.0 - at_most as f64 / draws as f64
}

/// Certainty for two groups of values: exact when there are no ties and at
/// most [`EXACT_LIMIT`] values, Monte Carlo otherwise.
pub fn group_certainty(test: &[f64], control: &[f64]) -> Result<(RankSums, f64, bool)> {
    if test.is_empty() || control.is_empty() {
        return Err(Error::Contract("both groups need at least one value".into()));
    }
    let sums = rank_sum(test, control);
    let n = test.len() + control.len();
    if !sums.tied && n <= EXACT_LIMIT {
        let c = certainty(sums.test.round() as u64, test.len(), control.len())?;
        return Ok((sums, c, true));
    }
    let all: Vec<f64> = test.iter().chain(control).copied().collect();
    let (ranks, _) = descending_midranks(&all);
    let c = certainty_permutation(&ranks, test.len(), sums.test, PERMUTATION_DRAWS, PERMUTATION_SEED);
    Ok((sums, c, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extreme_separation() {
        let test: Vec<f64> = (11..=20).map(f64::from).collect();
        let control: Vec<f64> = (1..=10).map(f64::from).collect();
        let r = rank_sum(&test, &control);
        assert_eq!((r.test, r.control), (55.0, 155.0));
        assert!(!r.tied);
    }

    #[test]
    fn alternating_values_conserve_total() {
        let test: Vec<f64> = (0..10).map(|i| f64::from(2 * i)).collect();
        let control: Vec<f64> = (0..10).map(|i| f64::from(2 * i + 1)).collect();
        let r = rank_sum(&test, &control);
        assert_eq!(r.test + r.control, 210.0);
        assert_eq!((r.test, r.control), (110.0, 100.0));
    }

    #[test]
    fn midranks_share_positions() {
        let (r, tied) = descending_midranks(&[3.0, 5.0, 3.0, 1.0]);
        assert!(tied);
        assert_eq!(r, vec![2.5, 1.0, 2.5, 4.0]);
    }

    #[test]
    fn minimum_sum_has_one_subset() {
        let d = RankSumDistribution::new(10, 20).unwrap();
        assert_eq!(d.subsets(), 184_756);
        assert_eq!(d.count(55), 1);
        assert_eq!(d.cdf(55), 1.0 / 184_756.0);
        assert_eq!(d.cdf(155), 1.0);
        assert_eq!((d.min_sum(), d.max_sum()), (55, 155));
    }

    #[test]
    fn out_of_range_rank_sum_is_a_contract_violation() {
        assert!(matches!(certainty(54, 10, 10), Err(Error::Contract(_))));
        assert!(matches!(certainty(156, 10, 10), Err(Error::Contract(_))));
        assert!(matches!(certainty(100, 16, 16), Err(Error::Contract(_))));
    }

    #[test]
    fn permutation_agrees_with_exact_without_ties() {
        let ranks: Vec<f64> = (1..=20).map(f64::from).collect();
        let mc = certainty_permutation(&ranks, 10, 89.0, 200_000, 3);
        let exact = certainty(89, 10, 10).unwrap();
        assert!((mc - exact).abs() < 0.005, "{mc} vs {exact}");
    }

    #[test]
    fn tied_groups_use_permutation() {
        let (sums, c, exact) = group_certainty(&[1.0, 2.0, 2.0], &[0.5, 2.0, 0.1]).unwrap();
        assert!(sums.tied);
        assert!(!exact);
        assert!((0.0..=1.0).contains(&c));
    }
}
