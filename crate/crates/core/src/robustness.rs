//! Stability analysis on random product subsets.
//!
//! Products are labelled uniformly at random with 1..=4 and seven data
//! subsets are formed from label sets (see [`SubsetScheme`]). Measurements
//! that only depend on the size structure of a branch should agree across
//! complementary subsets. This module provides the naive sales-share size
//! profile with its L1 discrepancy, the stacked TDI shares, and Kendall's
//! tau-b as an ordinal agreement score.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Kind, SizeId, TransactionSet};
use crate::tdi::{tdi_profiles, tdi_to_f64, Dampening, TdiProfile};

/// Product → label in 1..=4.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductPartition {
    pub seed: u64,
    pub labels: BTreeMap<String, u8>,
}

impl ProductPartition {
    pub fn label(&self, product: &str) -> Option<u8> {
        self.labels.get(product).copied()
    }

    pub fn count(&self, label: u8) -> usize {
        self.labels.values().filter(|&&l| l == label).count()
    }
}

/// Labels every registered product independently and uniformly, in product
/// order, from a ChaCha8 stream seeded with `seed`.
pub fn partition_products(ts: &TransactionSet, seed: u64) -> ProductPartition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = ts
        .products()
        .iter()
        .map(|p| (p.clone(), rng.gen_range(1..=4u8)))
        .collect();
    ProductPartition { seed, labels }
}

/// A subset of the labels {1, 2, 3, 4}, stored as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelSet(u8);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);
    pub const ALL: LabelSet = LabelSet(0b1111);

    pub fn of(labels: &[u8]) -> Self {
        Self(labels.iter().filter(|l| (1..=4).contains(*l)).fold(0, |m, l| m | 1 << (l - 1)))
    }

    pub fn contains(self, label: u8) -> bool {
        (1..=4).contains(&label) && self.0 & (1 << (label - 1)) != 0
    }

    pub fn complement(self) -> Self {
        Self(!self.0 & 0b1111)
    }

    pub fn labels(self) -> Vec<u8> {
        (1..=4).filter(|&l| self.contains(l)).collect()
    }
}

/// The seven test sets D1..D7.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsetScheme {
    pub subsets: [LabelSet; 7],
}

impl SubsetScheme {
    pub fn standard() -> Self {
        Self {
            subsets: [
                LabelSet::of(&[1, 2]),
                LabelSet::of(&[3, 4]),
                LabelSet::of(&[1, 3]),
                LabelSet::of(&[2, 4]),
                LabelSet::of(&[3]),
                LabelSet::of(&[1, 2, 4]),
                LabelSet::ALL,
            ],
        }
    }

    /// Zero-based index pairs (D1,D2), (D3,D4), (D5,D6).
    pub fn complementary_pairs(&self) -> [(usize, usize); 3] {
        [(0, 1), (2, 3), (4, 5)]
    }
}

impl Default for SubsetScheme {
    fn default() -> Self {
        Self::standard()
    }
}

/// Restricts the set to products whose label lies in `labels`. Branch
/// registry, sizes and settings are kept.
pub fn subset(ts: &TransactionSet, partition: &ProductPartition, labels: LabelSet) -> TransactionSet {
    let keep = |p: &str| partition.label(p).is_some_and(|l| labels.contains(l));
    let rows = ts.transactions().iter().filter(|t| keep(&t.product)).cloned().collect();
    let products = ts.products().iter().filter(|p| keep(p)).cloned().collect();
    let end_states = ts
        .end_states()
        .iter()
        .filter(|((_, p), _)| keep(p))
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    TransactionSet::with_registries(
        ts.sizes().clone(),
        ts.horizon(),
        ts.grace_days(),
        ts.branches().clone(),
        products,
        rows,
        end_states,
    )
    .expect("subset of a valid set is valid")
}

/// Share of each size among the units a branch sold up to a day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeProfile {
    pub branch: String,
    pub day: i64,
    pub units: Vec<u64>,
    pub shares: Vec<f64>,
}

impl SizeProfile {
    fn from_units(branch: &str, day: i64, units: Vec<u64>) -> Self {
        let total: u64 = units.iter().sum();
        let shares = if total == 0 {
            vec![0.0; units.len()]
        } else {
            units.iter().map(|&u| u as f64 / total as f64).collect()
        };
        Self {
            branch: branch.to_string(),
            day,
            units,
            shares,
        }
    }

    pub fn has_data(&self) -> bool {
        self.units.iter().any(|&u| u > 0)
    }

    /// Most-sold size; ties go to the earlier size.
    pub fn argmax(&self) -> Option<SizeId> {
        if !self.has_data() {
            return None;
        }
        let mut best = 0;
        for s in 1..self.units.len() {
            if self.units[s] > self.units[best] {
                best = s;
            }
        }
        Some(best)
    }
}

pub fn size_profile(ts: &TransactionSet, branch: &str, day: i64) -> SizeProfile {
    let mut units = vec![0u64; ts.sizes().len()];
    for t in ts.sales().filter(|t| t.branch == branch && t.day <= day) {
        units[t.size] += u64::from(t.qty);
    }
    SizeProfile::from_units(branch, day, units)
}

/// Size profiles of every registered branch at `day`.
pub fn size_profiles(ts: &TransactionSet, day: i64) -> BTreeMap<String, SizeProfile> {
    let mut units: BTreeMap<&str, Vec<u64>> =
        ts.branches().iter().map(|b| (b.as_str(), vec![0u64; ts.sizes().len()])).collect();
    for t in ts.transactions().iter().filter(|t| t.kind == Kind::Sale && t.day <= day) {
        units.get_mut(t.branch.as_str()).expect("registered")[t.size] += u64::from(t.qty);
    }
    units
        .into_iter()
        .map(|(b, u)| (b.to_string(), SizeProfile::from_units(b, day, u)))
        .collect()
}

/// `Σ_s |a_s − b_s|`; `None` when either profile has no sales.
pub fn profile_discrepancy(a: &SizeProfile, b: &SizeProfile) -> Option<f64> {
    if !a.has_data() || !b.has_data() {
        return None;
    }
    Some(a.shares.iter().zip(&b.shares).map(|(x, y)| (x - y).abs()).sum())
}

/// Discrepancy between the D1 and D2 size profiles of a branch at `day`.
pub fn discrepancy(ts: &TransactionSet, partition: &ProductPartition, branch: &str, day: i64) -> Option<f64> {
    let scheme = SubsetScheme::standard();
    let a = subset(ts, partition, scheme.subsets[0]);
    let b = subset(ts, partition, scheme.subsets[1]);
    profile_discrepancy(&size_profile(&a, branch, day), &size_profile(&b, branch, day))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyPoint {
    pub day: i64,
    /// Mean over branches where both halves have sales.
    pub avg_delta: Option<f64>,
    pub coverage: usize,
}

/// Average D1/D2 discrepancy over branches for each day in `0..=last_day`.
pub fn discrepancy_curve(ts: &TransactionSet, partition: &ProductPartition, last_day: i64) -> Vec<DiscrepancyPoint> {
    let scheme = SubsetScheme::standard();
    let a = subset(ts, partition, scheme.subsets[0]);
    let b = subset(ts, partition, scheme.subsets[1]);
    (0..=last_day)
        .map(|day| {
            let pa = size_profiles(&a, day);
            let pb = size_profiles(&b, day);
            let deltas: Vec<f64> = pa
                .iter()
                .filter_map(|(branch, p)| profile_discrepancy(p, &pb[branch]))
                .collect();
            DiscrepancyPoint {
                day,
                avg_delta: (!deltas.is_empty()).then(|| deltas.iter().sum::<f64>() / deltas.len() as f64),
                coverage: deltas.len(),
            }
        })
        .collect()
}

/// Stacked TDI shares of one branch-size cell over the seven subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareRow {
    pub branch: String,
    pub size: SizeId,
    pub shares: [f64; 7],
    /// Mean of the seven TDI values.
    pub mean: f64,
    /// Median of the seven TDI values.
    pub median: f64,
}

fn share_row(branch: &str, size: SizeId, tdis: [f64; 7]) -> ShareRow {
    let total: f64 = tdis.iter().sum();
    let mut shares = [0.0; 7];
    for (s, t) in shares.iter_mut().zip(&tdis) {
        *s = t / total;
    }
    let mut sorted = tdis;
    sorted.sort_by(f64::total_cmp);
    ShareRow {
        branch: branch.to_string(),
        size,
        shares,
        mean: total / 7.0,
        median: sorted[3],
    }
}

/// TDI profiles of every branch for each of the seven subsets.
pub fn subset_profiles(
    ts: &TransactionSet,
    partition: &ProductPartition,
    scheme: &SubsetScheme,
    c: Dampening,
) -> Vec<BTreeMap<String, TdiProfile>> {
    scheme
        .subsets
        .iter()
        .map(|&labels| {
            tdi_profiles(&subset(ts, partition, labels), c)
                .into_iter()
                .map(|p| (p.branch.clone(), p))
                .collect()
        })
        .collect()
}

pub fn tdi_shares(
    ts: &TransactionSet,
    partition: &ProductPartition,
    scheme: &SubsetScheme,
    branch: &str,
    size: SizeId,
    c: Dampening,
) -> ShareRow {
    let profiles = subset_profiles(ts, partition, scheme, c);
    let mut tdis = [0.0; 7];
    for (i, p) in profiles.iter().enumerate() {
        tdis[i] = p.get(branch).map_or(1.0, |p| tdi_to_f64(p.tdi[size]));
    }
    share_row(branch, size, tdis)
}

/// Share rows for every branch and size, branch-major.
pub fn share_table(
    ts: &TransactionSet,
    partition: &ProductPartition,
    scheme: &SubsetScheme,
    c: Dampening,
) -> Vec<ShareRow> {
    let profiles = subset_profiles(ts, partition, scheme, c);
    let mut rows = Vec::new();
    for branch in ts.branches() {
        for size in ts.sizes().ids() {
            let mut tdis = [0.0; 7];
            for (i, p) in profiles.iter().enumerate() {
                tdis[i] = tdi_to_f64(p[branch].tdi[size]);
            }
            rows.push(share_row(branch, size, tdis));
        }
    }
    rows
}

/// A weak order of sizes: higher score ranks first, equal scores tie.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    scores: Vec<f64>,
}

impl Ranking {
    pub fn from_scores(scores: Vec<f64>) -> Self {
        Self { scores }
    }

    /// A total order given as sizes listed first to last.
    pub fn from_order(order: &[SizeId]) -> Self {
        let n = order.len();
        let mut scores = vec![0.0; n];
        for (pos, &s) in order.iter().enumerate() {
            scores[s] = (n - pos) as f64;
        }
        Self { scores }
    }

    pub fn from_profile(profile: &TdiProfile) -> Self {
        Self::from_scores(profile.tdi_f64())
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }
}

/// Kendall's tau-b of two rankings over the same sizes. `None` when either
/// ranking ties every size.
pub fn ordinal_agreement(a: &Ranking, b: &Ranking) -> Option<f64> {
    kendall_tau_b(&a.scores, &b.scores)
}

/// Kendall's tau-b with tie correction.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "rankings must cover the same items");
    let n = x.len();
    let (mut concordant, mut discordant, mut tied_x, mut tied_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].partial_cmp(&x[j]).expect("finite scores");
            let dy = y[i].partial_cmp(&y[j]).expect("finite scores");
            use std::cmp::Ordering::Equal;
            match (dx, dy) {
                (Equal, Equal) => {
                    tied_x += 1;
                    tied_y += 1;
                }
                (Equal, _) => tied_x += 1,
                (_, Equal) => tied_y += 1,
                _ if dx == dy => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let pairs = (n * n.saturating_sub(1) / 2) as i64;
    let denom = ((pairs - tied_x) as f64 * (pairs - tied_y) as f64).sqrt();
    (denom > 0.0).then(|| (concordant - discordant) as f64 / denom)
}

/// Mean ordinal agreement across complementary subsets, for TDI rankings and
/// for sales-share rankings at a fixed day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementContrast {
    pub tdi_mean: Option<f64>,
    pub tdi_pairs: usize,
    pub profile_day: i64,
    pub profile_mean: Option<f64>,
    pub profile_pairs: usize,
}

pub fn agreement_contrast(
    ts: &TransactionSet,
    partition: &ProductPartition,
    scheme: &SubsetScheme,
    c: Dampening,
    profile_day: i64,
) -> AgreementContrast {
    let tdi = subset_profiles(ts, partition, scheme, c);
    let sales: Vec<BTreeMap<String, SizeProfile>> = scheme
        .subsets
        .iter()
        .map(|&l| size_profiles(&subset(ts, partition, l), profile_day))
        .collect();
    let mut tdi_taus = Vec::new();
    let mut profile_taus = Vec::new();
    for (i, j) in scheme.complementary_pairs() {
        for branch in ts.branches() {
            let (a, b) = (&tdi[i][branch], &tdi[j][branch]);
            if a.products_used > 0 && b.products_used > 0 {
                if let Some(t) = ordinal_agreement(&Ranking::from_profile(a), &Ranking::from_profile(b)) {
                    tdi_taus.push(t);
                }
            }
            let (a, b) = (&sales[i][branch], &sales[j][branch]);
            if a.has_data() && b.has_data() {
                let ra = Ranking::from_scores(a.shares.clone());
                let rb = Ranking::from_scores(b.shares.clone());
                if let Some(t) = ordinal_agreement(&ra, &rb) {
                    profile_taus.push(t);
                }
            }
        }
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    AgreementContrast {
        tdi_mean: mean(&tdi_taus),
        tdi_pairs: tdi_taus.len(),
        profile_day,
        profile_mean: mean(&profile_taus),
        profile_pairs: profile_taus.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{SizeSet, Transaction};

    fn many_products(n: usize) -> TransactionSet {
        let rows = (0..n)
            .map(|i| Transaction::delivery("b", &format!("p{i:05}"), 0, -1, 1, 10))
            .collect();
        TransactionSet::new(SizeSet::standard(), None, rows, BTreeMap::new()).unwrap()
    }

    fn sales_set(units: &[(usize, i64, u32)]) -> TransactionSet {
        let mut rows = vec![];
        for &(s, d, q) in units {
            rows.push(Transaction::delivery("b", "p", s, -1, q, 10));
            rows.push(Transaction::sale("b", "p", s, d, q, 10));
        }
        TransactionSet::new(SizeSet::standard(), None, rows, BTreeMap::new()).unwrap()
    }

    #[test]
    fn partition_is_reproducible_and_balanced() {
        let ts = many_products(10_000);
        let a = partition_products(&ts, 42);
        assert_eq!(a, partition_products(&ts, 42));
        assert_ne!(a, partition_products(&ts, 43));
        // binomial(10000, 1/4): sd = sqrt(10000 * 0.25 * 0.75) ≈ 43.3
        let sd = (10_000.0f64 * 0.25 * 0.75).sqrt();
        for label in 1..=4 {
            let dev = (a.count(label) as f64 - 2500.0).abs();
            assert!(dev <= 4.0 * sd, "label {label}: {}", a.count(label));
        }
        assert!(partition_products(&many_products(0), 1).labels.is_empty());
    }

    #[test]
    fn scheme_pairs_are_complementary() {
        let s = SubsetScheme::standard();
        for (i, j) in s.complementary_pairs() {
            assert_eq!(s.subsets[i].complement(), s.subsets[j]);
        }
        assert_eq!(s.subsets[6], LabelSet::ALL);
        assert_eq!(s.subsets[5].labels(), vec![1, 2, 4]);
    }

    #[test]
    fn subsets_split_transactions() {
        let ts = many_products(200);
        let part = partition_products(&ts, 7);
        let s = SubsetScheme::standard();
        assert_eq!(subset(&ts, &part, LabelSet::ALL), ts);
        let empty = subset(&ts, &part, LabelSet::EMPTY);
        assert!(empty.is_empty());
        assert_eq!(empty.branches(), ts.branches());
        let d5 = subset(&ts, &part, s.subsets[4]).len();
        let d6 = subset(&ts, &part, s.subsets[5]).len();
        assert_eq!(d5 + d6, ts.len());
    }

    #[test]
    fn profile_counts_units() {
        let ts = sales_set(&[(0, 1, 1), (1, 2, 2), (2, 3, 1), (3, 9, 5)]);
        let p = size_profile(&ts, "b", 3);
        assert_eq!(p.shares, vec![0.25, 0.5, 0.25, 0.0]);
        assert_eq!(p.argmax(), Some(1));
        let early = size_profile(&ts, "b", 0);
        assert!(!early.has_data());
        assert_eq!(early.shares, vec![0.0; 4]);
        assert_eq!(early.argmax(), None);
    }

    #[test]
    fn full_sellout_profile_is_the_supply() {
        let ts = sales_set(&[(0, 5, 1), (1, 6, 2), (2, 7, 2), (3, 8, 1)]);
        let p = size_profile(&ts, "b", ts.horizon());
        let want = [1.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0];
        for (a, b) in p.shares.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn discrepancy_extremes() {
        let all_s = size_profile(&sales_set(&[(0, 0, 3)]), "b", 0);
        let all_xl = size_profile(&sales_set(&[(3, 0, 2)]), "b", 0);
        assert_eq!(profile_discrepancy(&all_s, &all_s), Some(0.0));
        assert_eq!(profile_discrepancy(&all_s, &all_xl), Some(2.0));
        assert_eq!(profile_discrepancy(&all_xl, &all_s), Some(2.0));
        let none = size_profile(&sales_set(&[(0, 5, 3)]), "b", 0);
        assert_eq!(profile_discrepancy(&all_s, &none), None);
    }

    #[test]
    fn share_row_arithmetic() {
        let r = share_row("b", 0, [1.3; 7]);
        for s in r.shares {
            assert!((s - 1.0 / 7.0).abs() < 1e-15);
        }
        let r = share_row("b", 0, [2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(r.shares[0], 0.25);
        assert!(r.shares[1..].iter().all(|&s| s == 0.125));
        assert_eq!(r.median, 1.0);
        assert!((r.mean - 8.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn tau_examples() {
        let a = Ranking::from_order(&[3, 2, 1, 0]);
        assert_eq!(ordinal_agreement(&a, &a), Some(1.0));
        assert_eq!(ordinal_agreement(&a, &Ranking::from_order(&[0, 1, 2, 3])), Some(-1.0));
        let b = Ranking::from_order(&[3, 2, 0, 1]);
        let t = ordinal_agreement(&a, &b).unwrap();
        assert!((t - 2.0 / 3.0).abs() < 1e-15);
        let flat = Ranking::from_scores(vec![1.0; 4]);
        assert_eq!(ordinal_agreement(&a, &flat), None);
    }

    #[test]
    fn tau_b_tie_correction() {
        // x ties one pair; n0 = 6, n1 = 1, n2 = 0, C = 5, D = 0
        let t = kendall_tau_b(&[1.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((t - 5.0 / 30f64.sqrt()).abs() < 1e-12);
    }
}
