//! Core data model: sizes, transactions, and the validated transaction set.
//!
//! A [`TransactionSet`] is immutable once built. Every operation that changes
//! data (subsetting, repairs, simulated corruption) returns a new set.

mod consistency;
mod io;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use consistency::{
    repair_estimate, repair_ignore, validate, Anomaly, AnomalyKind, ConsistencyReport,
    EstimateRepair,
};
pub use io::{
    read_end_states, read_transactions, read_transactions_from, write_transactions,
    AnalysisConfig, DEFAULT_GRACE_DAYS,
};

/// Index of a size within its [`SizeSet`].
pub type SizeId = usize;

/// Money in minor currency units.
pub type Money = u64;

/// Ordered size labels with a designated subset of main sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeSet {
    labels: Vec<String>,
    main: Vec<bool>,
}

impl SizeSet {
    pub fn new<S: AsRef<str>>(labels: &[S], main_sizes: &[S]) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        if labels.is_empty() {
            return Err(Error::Config("size set is empty".into()));
        }
        let unique: BTreeSet<&String> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(Error::Config("size labels must be unique".into()));
        }
        let mut main = vec![false; labels.len()];
        for m in main_sizes {
            let m = m.as_ref();
            let idx = labels
                .iter()
                .position(|l| l == m)
                .ok_or_else(|| Error::Config(format!("main size `{m}` is not in the size order")))?;
            main[idx] = true;
        }
        Ok(Self { labels, main })
    }

    /// All sizes are main sizes.
    pub fn all_main<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        Self::new(labels, labels)
    }

    /// The four main sizes S, M, L, XL.
    pub fn standard() -> Self {
        Self::all_main(&["S", "M", "L", "XL"]).expect("static size set")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, size: SizeId) -> &str {
        &self.labels[size]
    }

    pub fn index_of(&self, label: &str) -> Option<SizeId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn is_main(&self, size: SizeId) -> bool {
        self.main[size]
    }

    pub fn main_sizes(&self) -> impl Iterator<Item = SizeId> + '_ {
        self.main.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i)
    }

    pub fn ids(&self) -> std::ops::Range<SizeId> {
        0..self.labels.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    Delivery,
    Sale,
}

impl Kind {
    pub fn code(self) -> &'static str {
        match self {
            Kind::Delivery => "D",
            Kind::Sale => "S",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub kind: Kind,
    pub branch: String,
    pub product: String,
    pub size: SizeId,
    /// Days from the first sales day; deliveries may be negative.
    pub day: i64,
    pub qty: u32,
    pub unit_price: Money,
}

impl Transaction {
    pub fn delivery(branch: &str, product: &str, size: SizeId, day: i64, qty: u32, price: Money) -> Self {
        Self {
            kind: Kind::Delivery,
            branch: branch.into(),
            product: product.into(),
            size,
            day,
            qty,
            unit_price: price,
        }
    }

    pub fn sale(branch: &str, product: &str, size: SizeId, day: i64, qty: u32, price: Money) -> Self {
        Self {
            kind: Kind::Sale,
            ..Self::delivery(branch, product, size, day, qty, price)
        }
    }

    pub fn triple(&self) -> Triple {
        Triple::new(&self.branch, &self.product, self.size)
    }
}

/// A (branch, product, size) cell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub branch: String,
    pub product: String,
    pub size: SizeId,
}

impl Triple {
    pub fn new(branch: &str, product: &str, size: SizeId) -> Self {
        Self {
            branch: branch.into(),
            product: product.into(),
            size,
        }
    }
}

/// Validated deliveries and sales over the delivery period `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionSet {
    sizes: SizeSet,
    horizon: i64,
    grace_days: i64,
    branches: BTreeSet<String>,
    products: BTreeSet<String>,
    transactions: Vec<Transaction>,
    end_states: BTreeMap<(String, String), bool>,
}

impl TransactionSet {
    /// Builds a set whose branch and product registries are exactly the
    /// entities referenced by `transactions`. A `None` horizon means the last
    /// transaction day (at least 0).
    pub fn new(
        sizes: SizeSet,
        horizon: Option<i64>,
        transactions: Vec<Transaction>,
        end_states: BTreeMap<(String, String), bool>,
    ) -> Result<Self> {
        let horizon =
            horizon.unwrap_or_else(|| transactions.iter().map(|t| t.day).max().unwrap_or(0).max(0));
        Self::with_registries(
            sizes,
            horizon,
            DEFAULT_GRACE_DAYS,
            BTreeSet::new(),
            BTreeSet::new(),
            transactions,
            end_states,
        )
    }

    /// Builds a set with explicit registries; referenced entities are added on
    /// top of the given ones.
    pub fn with_registries(
        sizes: SizeSet,
        horizon: i64,
        grace_days: i64,
        mut branches: BTreeSet<String>,
        mut products: BTreeSet<String>,
        transactions: Vec<Transaction>,
        end_states: BTreeMap<(String, String), bool>,
    ) -> Result<Self> {
        if grace_days < 0 {
            return Err(Error::Config("grace window must be non-negative".into()));
        }
        let mut first_sale: BTreeMap<(&str, &str), i64> = BTreeMap::new();
        for t in &transactions {
            if t.size >= sizes.len() {
                return Err(Error::Invariant(format!("size index {} out of range", t.size)));
            }
            if t.qty == 0 {
                return Err(Error::Invariant(format!(
                    "zero quantity for {}/{}/{}",
                    t.branch,
                    t.product,
                    sizes.label(t.size)
                )));
            }
            if t.day > horizon {
                return Err(Error::Invariant(format!(
                    "day {} of {}/{} lies beyond horizon {horizon}",
                    t.day, t.branch, t.product
                )));
            }
            if t.kind == Kind::Sale {
                if t.day < 0 {
                    return Err(Error::Invariant(format!(
                        "sale on negative day {} for {}/{}",
                        t.day, t.branch, t.product
                    )));
                }
                let e = first_sale.entry((&t.branch, &t.product)).or_insert(t.day);
                *e = (*e).min(t.day);
            }
        }
        for t in transactions.iter().filter(|t| t.kind == Kind::Delivery) {
            if let Some(&fs) = first_sale.get(&(t.branch.as_str(), t.product.as_str())) {
                if t.day > fs {
                    return Err(Error::Invariant(format!(
                        "delivery of {}/{} on day {} after first sale on day {fs}",
                        t.branch, t.product, t.day
                    )));
                }
            }
        }
        for t in &transactions {
            if !branches.contains(&t.branch) {
                branches.insert(t.branch.clone());
            }
            if !products.contains(&t.product) {
                products.insert(t.product.clone());
            }
        }
        Ok(Self {
            sizes,
            horizon,
            grace_days,
            branches,
            products,
            transactions,
            end_states,
        })
    }

    /// Same registries and settings, different transactions and end states.
    pub(crate) fn rebuild(
        &self,
        transactions: Vec<Transaction>,
        end_states: BTreeMap<(String, String), bool>,
    ) -> Result<Self> {
        Self::with_registries(
            self.sizes.clone(),
            self.horizon,
            self.grace_days,
            self.branches.clone(),
            self.products.clone(),
            transactions,
            end_states,
        )
    }

    pub fn with_grace_days(mut self, grace_days: i64) -> Self {
        self.grace_days = grace_days.max(0);
        self
    }

    pub fn sizes(&self) -> &SizeSet {
        &self.sizes
    }

    pub fn horizon(&self) -> i64 {
        self.horizon
    }

    pub fn grace_days(&self) -> i64 {
        self.grace_days
    }

    pub fn branches(&self) -> &BTreeSet<String> {
        &self.branches
    }

    pub fn products(&self) -> &BTreeSet<String> {
        &self.products
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// Explicit end-state flags keyed by (branch, product).
    pub fn end_states(&self) -> &BTreeMap<(String, String), bool> {
        &self.end_states
    }

    pub fn sales(&self) -> impl Iterator<Item = &Transaction> {
        self.transactions.iter().filter(|t| t.kind == Kind::Sale)
    }

    pub fn deliveries(&self) -> impl Iterator<Item = &Transaction> {
        self.transactions.iter().filter(|t| t.kind == Kind::Delivery)
    }

    /// Per-triple delivered units and dated sales.
    pub fn ledgers(&self) -> BTreeMap<Triple, Ledger> {
        let mut out: BTreeMap<Triple, Ledger> = BTreeMap::new();
        for t in &self.transactions {
            let l = out.entry(t.triple()).or_default();
            match t.kind {
                Kind::Delivery => {
                    l.delivered += u64::from(t.qty);
                    l.deliveries.push((t.day, u64::from(t.qty)));
                }
                Kind::Sale => {
                    l.sold += u64::from(t.qty);
                    l.sales.push((t.day, u64::from(t.qty)));
                }
            }
        }
        for l in out.values_mut() {
            l.deliveries.sort_unstable();
            l.sales.sort_unstable();
        }
        out
    }

    /// Day and price of the last sale of `product` in `branch` over all sizes.
    /// Several sales on that day resolve to the lowest price.
    pub fn last_sale(&self, branch: &str, product: &str) -> Option<(i64, Money)> {
        self.sales()
            .filter(|t| t.branch == branch && t.product == product)
            .map(|t| (t.day, std::cmp::Reverse(t.unit_price)))
            .max()
            .map(|(d, std::cmp::Reverse(p))| (d, p))
    }

    /// Full price per product: the price of its first observed delivery,
    /// falling back to its highest sale price when it has no deliveries.
    pub fn full_prices(&self) -> BTreeMap<String, Money> {
        let mut first: BTreeMap<&str, (i64, &str, SizeId, Money)> = BTreeMap::new();
        for t in self.deliveries() {
            let key = (t.day, t.branch.as_str(), t.size, t.unit_price);
            first
                .entry(&t.product)
                .and_modify(|e| {
                    if key < *e {
                        *e = key
                    }
                })
                .or_insert(key);
        }
        let mut out: BTreeMap<String, Money> =
            first.into_iter().map(|(p, k)| (p.to_string(), k.3)).collect();
        let mut fallback: BTreeMap<String, Money> = BTreeMap::new();
        for t in self.sales().filter(|t| !out.contains_key(&t.product)) {
            let e = fallback.entry(t.product.clone()).or_insert(0);
            *e = (*e).max(t.unit_price);
        }
        out.extend(fallback);
        out
    }

    /// Whether all items of (branch, product) are gone at the horizon.
    ///
    /// An explicit end-state flag wins. Without one, the product counts as gone
    /// when it has sales and the last of them lies more than the grace window
    /// before the horizon.
    pub fn is_gone(&self, branch: &str, product: &str) -> bool {
        if let Some(&flag) = self.end_states.get(&(branch.to_string(), product.to_string())) {
            return flag;
        }
        match self.last_sale(branch, product) {
            Some((day, _)) => day < self.horizon - self.grace_days,
            None => false,
        }
    }
}

/// Delivered and sold units of one triple, sorted by day.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ledger {
    pub delivered: u64,
    pub sold: u64,
    pub deliveries: Vec<(i64, u64)>,
    pub sales: Vec<(i64, u64)>,
}

impl Ledger {
    /// Largest excess of cumulative sales over cumulative deliveries on any
    /// day; deliveries of a day count before its sales.
    pub fn max_oversell(&self) -> u64 {
        let mut events: Vec<(i64, u8, u64)> = self
            .deliveries
            .iter()
            .map(|&(d, q)| (d, 0, q))
            .chain(self.sales.iter().map(|&(d, q)| (d, 1, q)))
            .collect();
        events.sort_unstable();
        let mut stock: i64 = 0;
        let mut worst: i64 = 0;
        for (_, kind, q) in events {
            if kind == 0 {
                stock += q as i64;
            } else {
                stock -= q as i64;
            }
            worst = worst.min(stock);
        }
        (-worst) as u64
    }

    pub fn end_inventory(&self) -> i64 {
        self.delivered as i64 - self.sold as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_set_rejects_duplicates_and_unknown_main() {
        assert!(SizeSet::new(&["S", "S"], &[]).is_err());
        assert!(SizeSet::new(&["S", "M"], &["XL"]).is_err());
        let s = SizeSet::new(&["XS", "S", "M"], &["S", "M"]).unwrap();
        assert_eq!(s.main_sizes().collect::<Vec<_>>(), vec![1, 2]);
        assert!(!s.is_main(0));
    }

    #[test]
    fn sale_after_horizon_is_rejected() {
        let ts = TransactionSet::new(
            SizeSet::standard(),
            Some(5),
            vec![Transaction::sale("b", "p", 0, 6, 1, 100)],
            BTreeMap::new(),
        );
        assert!(matches!(ts, Err(Error::Invariant(_))));
    }

    #[test]
    fn delivery_after_first_sale_is_rejected() {
        let ts = TransactionSet::new(
            SizeSet::standard(),
            None,
            vec![
                Transaction::sale("b", "p", 0, 2, 1, 100),
                Transaction::delivery("b", "p", 1, 3, 1, 100),
            ],
            BTreeMap::new(),
        );
        assert!(matches!(ts, Err(Error::Invariant(_))));
    }

    #[test]
    fn last_sale_takes_lowest_price_on_last_day() {
        let ts = TransactionSet::new(
            SizeSet::standard(),
            None,
            vec![
                Transaction::delivery("b", "p", 0, -3, 5, 1000),
                Transaction::sale("b", "p", 0, 1, 1, 1000),
                Transaction::sale("b", "p", 1, 9, 1, 700),
                Transaction::sale("b", "p", 0, 9, 1, 500),
            ],
            BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(ts.last_sale("b", "p"), Some((9, 500)));
        assert_eq!(ts.last_sale("b", "q"), None);
        assert_eq!(ts.full_prices()["p"], 1000);
    }

    #[test]
    fn max_oversell_counts_same_day_delivery_first() {
        let l = Ledger {
            delivered: 2,
            sold: 3,
            deliveries: vec![(0, 2)],
            sales: vec![(0, 1), (1, 2)],
        };
        assert_eq!(l.max_oversell(), 1);
        assert_eq!(l.end_inventory(), -1);
    }
}
