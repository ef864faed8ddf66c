//! Stockout days, Top-Dog/Flop-Dog counts and the Top-Dog-Index.
//!
//! For a branch, the stockout day of a (product, size) is the day its last
//! delivered piece sold. A size is a *top dog* of a product when it sold out
//! first among the product's sizes and a *flop dog* when it sold out last;
//! ties count for every tied size. Aggregating over products gives the
//! Top-Dog-Count (TDC) and Flop-Dog-Count (FDC), and the index
//! `TDI = (TDC + C) / (FDC + C)` for a dampening constant `C > 0`.
//!
//! Only the ordering of TDI values within a branch carries meaning.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::domain::{SizeId, TransactionSet, Triple};
use crate::error::{Error, Result};

/// Stockout day of a triple. `NeverSoldOut` orders after every day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stockout {
    Day(i64),
    NeverSoldOut,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StockoutTable {
    size_count: usize,
    entries: BTreeMap<Triple, Stockout>,
}

impl StockoutTable {
    pub fn get(&self, triple: &Triple) -> Option<Stockout> {
        self.entries.get(triple).copied()
    }

    pub fn entries(&self) -> &BTreeMap<Triple, Stockout> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn size_count(&self) -> usize {
        self.size_count
    }

    /// Stockout days of every product delivered to `branch`, by size.
    pub fn products_in(&self, branch: &str) -> BTreeMap<&str, Vec<(SizeId, Stockout)>> {
        let mut out: BTreeMap<&str, Vec<(SizeId, Stockout)>> = BTreeMap::new();
        let lo = Triple::new(branch, "", 0);
        for (t, &s) in self.entries.range(lo..) {
            if t.branch != branch {
                break;
            }
            out.entry(t.product.as_str()).or_default().push((t.size, s));
        }
        out
    }
}

/// Stockout day of every delivered triple: the first day on which its
/// cumulative sales reach its delivered quantity.
pub fn stockout_days(ts: &TransactionSet) -> StockoutTable {
    let mut entries = BTreeMap::new();
    for (triple, ledger) in ts.ledgers() {
        if ledger.delivered == 0 {
            continue;
        }
        let mut cum = 0;
        let mut day = Stockout::NeverSoldOut;
        for &(d, q) in &ledger.sales {
            cum += q;
            if cum >= ledger.delivered {
                day = Stockout::Day(d);
                break;
            }
        }
        entries.insert(triple, day);
    }
    StockoutTable {
        size_count: ts.sizes().len(),
        entries,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DogCounts {
    pub tdc: u64,
    pub fdc: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchCounts {
    /// Indexed by size.
    pub counts: Vec<DogCounts>,
    /// Products that entered the counts.
    pub eligible: u64,
}

/// Top-Dog and Flop-Dog counts of every size in `branch`.
///
/// A product takes part when it was delivered to the branch in at least two
/// sizes and at least one of them sold out. Sizes that never sold out compare
/// as later than every day.
pub fn dog_counts(table: &StockoutTable, branch: &str) -> BranchCounts {
    let mut counts = vec![DogCounts::default(); table.size_count];
    let mut eligible = 0;
    for cells in table.products_in(branch).values() {
        if cells.len() < 2 {
            continue;
        }
        let min = cells.iter().map(|c| c.1).min().expect("non-empty");
        let max = cells.iter().map(|c| c.1).max().expect("non-empty");
        if min == Stockout::NeverSoldOut {
            continue;
        }
        eligible += 1;
        for &(size, s) in cells {
            if s == min {
                counts[size].tdc += 1;
            }
            if s == max {
                counts[size].fdc += 1;
            }
        }
    }
    BranchCounts { counts, eligible }
}

/// Exact Top-Dog-Index value.
pub type Tdi = Ratio<u64>;

/// The dampening constant `C`, a positive rational. Defaults to 15.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dampening(Ratio<u64>);

impl Dampening {
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if numer == 0 || denom == 0 {
            return Err(Error::Config(format!("dampening must be positive, got {numer}/{denom}")));
        }
        Ok(Self(Ratio::new(numer, denom)))
    }

    pub fn value(self) -> Ratio<u64> {
        self.0
    }

    /// `k · C`, used when every product is replicated `k` times.
    pub fn scaled(self, k: u64) -> Self {
        Self(self.0 * k)
    }
}

impl Default for Dampening {
    fn default() -> Self {
        Self(Ratio::from_integer(15))
    }
}

impl fmt::Display for Dampening {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::str::FromStr for Dampening {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("dampening must be `n` or `n/d`, got `{s}`"));
        match s.split_once('/') {
            Some((n, d)) => Self::new(n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?),
            None => Self::new(s.trim().parse().map_err(|_| bad())?, 1),
        }
    }
}

impl Serialize for Dampening {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            s.serialize_u64(*self.0.numer())
        } else {
            s.serialize_str(&self.0.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Dampening {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(n) => Dampening::new(n, 1),
            Repr::Text(t) => t.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// `(TDC + C) / (FDC + C)`.
pub fn tdi(counts: DogCounts, c: Dampening) -> Tdi {
    (Ratio::from_integer(counts.tdc) + c.0) / (Ratio::from_integer(counts.fdc) + c.0)
}

pub fn tdi_to_f64(value: Tdi) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TdiProfile {
    pub branch: String,
    /// Indexed by size.
    pub counts: Vec<DogCounts>,
    pub tdi: Vec<Tdi>,
    pub dampening: Dampening,
    pub products_used: u64,
}

impl TdiProfile {
    pub fn from_counts(branch: &str, counts: Vec<DogCounts>, products_used: u64, c: Dampening) -> Self {
        let tdi = counts.iter().map(|&k| tdi(k, c)).collect();
        Self {
            branch: branch.to_string(),
            counts,
            tdi,
            dampening: c,
            products_used,
        }
    }

    pub fn size_count(&self) -> usize {
        self.tdi.len()
    }

    pub fn tdi_f64(&self) -> Vec<f64> {
        self.tdi.iter().map(|&t| tdi_to_f64(t)).collect()
    }

    /// Sizes by descending TDI; equal values keep the fixed size order.
    pub fn rank_sizes(&self) -> Vec<SizeId> {
        let mut order: Vec<SizeId> = (0..self.tdi.len()).collect();
        order.sort_by(|&a, &b| self.tdi[b].cmp(&self.tdi[a]));
        order
    }

    /// Sizes by ascending TDI (amplest first); equal values keep the fixed
    /// size order.
    pub fn amplest_first(&self) -> Vec<SizeId> {
        let mut order: Vec<SizeId> = (0..self.tdi.len()).collect();
        order.sort_by(|&a, &b| self.tdi[a].cmp(&self.tdi[b]));
        order
    }

    /// Largest TDI over smallest TDI.
    pub fn spread(&self) -> f64 {
        let max = self.tdi.iter().max().copied().unwrap_or_else(|| Ratio::from_integer(1));
        let min = self.tdi.iter().min().copied().unwrap_or_else(|| Ratio::from_integer(1));
        tdi_to_f64(max / min)
    }
}

pub fn rank_sizes(profile: &TdiProfile) -> Vec<SizeId> {
    profile.rank_sizes()
}

pub fn tdi_profile(table: &StockoutTable, branch: &str, c: Dampening) -> TdiProfile {
    let BranchCounts { counts, eligible } = dog_counts(table, branch);
    TdiProfile::from_counts(branch, counts, eligible, c)
}

/// Profiles of every registered branch, in branch order.
pub fn tdi_profiles(ts: &TransactionSet, c: Dampening) -> Vec<TdiProfile> {
    let table = stockout_days(ts);
    ts.branches().iter().map(|b| tdi_profile(&table, b, c)).collect()
}
