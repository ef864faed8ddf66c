//! Detection and repair of inconsistent delivery/sale records.
//!
//! Two anomalies are recognised: an *oversell*, where a triple sells more
//! than was delivered to it, and a *leftover*, where the product is known to
//! be gone from the branch yet delivered pieces were never recorded as sold.
//! Each has two repairs: `ignore` drops the unsupported part of the data,
//! `estimate` reconstructs what is missing.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Kind, Transaction, TransactionSet, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AnomalyKind {
    Oversell,
    Leftover,
}

impl AnomalyKind {
    pub fn name(self) -> &'static str {
        match self {
            AnomalyKind::Oversell => "oversell",
            AnomalyKind::Leftover => "leftover",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anomaly {
    pub triple: Triple,
    pub kind: AnomalyKind,
    pub magnitude: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub anomalies: Vec<Anomaly>,
}

impl ConsistencyReport {
    pub fn is_clean(&self) -> bool {
        self.anomalies.is_empty()
    }

    pub fn count(&self, kind: AnomalyKind) -> usize {
        self.anomalies.iter().filter(|a| a.kind == kind).count()
    }
}

/// Lists every oversold triple and every leftover in a gone product.
pub fn validate(ts: &TransactionSet) -> ConsistencyReport {
    let mut gone_cache: BTreeMap<(String, String), bool> = BTreeMap::new();
    let mut anomalies = Vec::new();
    for (triple, ledger) in ts.ledgers() {
        let oversell = ledger.max_oversell();
        if oversell > 0 {
            anomalies.push(Anomaly {
                triple,
                kind: AnomalyKind::Oversell,
                magnitude: oversell,
            });
            continue;
        }
        let left = ledger.end_inventory();
        if left > 0 {
            let key = (triple.branch.clone(), triple.product.clone());
            let gone = *gone_cache
                .entry(key)
                .or_insert_with(|| ts.is_gone(&triple.branch, &triple.product));
            if gone {
                anomalies.push(Anomaly {
                    triple,
                    kind: AnomalyKind::Leftover,
                    magnitude: left as u64,
                });
            }
        }
    }
    ConsistencyReport { anomalies }
}

/// Outcome of [`repair_estimate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimateRepair {
    pub set: TransactionSet,
    /// Leftover triples whose product never sold in the branch; these fell
    /// back to `ignore` semantics.
    pub unrepairable: Vec<Triple>,
}

/// Drops inconsistent data: excess sales (latest first) for oversells, and
/// the never-sold delivered pieces for leftovers.
pub fn repair_ignore(ts: &TransactionSet, report: &ConsistencyReport) -> TransactionSet {
    if report.is_clean() {
        return ts.clone();
    }
    let mut rows = ts.transactions().to_vec();
    for a in &report.anomalies {
        match a.kind {
            AnomalyKind::Oversell => remove_latest(&mut rows, &a.triple, Kind::Sale, a.magnitude),
            AnomalyKind::Leftover => remove_latest(&mut rows, &a.triple, Kind::Delivery, a.magnitude),
        }
    }
    finish(ts, rows, report)
}

/// Reconstructs missing data: oversold triples get their delivery raised to
/// the sold quantity, leftovers get synthetic sales at the last selling price
/// of the product in that branch, dated on that last sale's day.
pub fn repair_estimate(ts: &TransactionSet, report: &ConsistencyReport) -> EstimateRepair {
    if report.is_clean() {
        return EstimateRepair {
            set: ts.clone(),
            unrepairable: Vec::new(),
        };
    }
    let full_prices = ts.full_prices();
    let mut rows = ts.transactions().to_vec();
    let mut unrepairable = Vec::new();
    for a in &report.anomalies {
        let t = &a.triple;
        match a.kind {
            AnomalyKind::Oversell => {
                let qty = a.magnitude as u32;
                let latest = rows
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.kind == Kind::Delivery && same_triple(r, t))
                    .max_by_key(|(i, r)| (r.day, *i))
                    .map(|(i, _)| i);
                match latest {
                    Some(i) => rows[i].qty += qty,
                    None => {
                        // The product's earliest delivery day and price level,
                        // or its first sale when it was never delivered.
                        let same_bp = |r: &&Transaction| r.branch == t.branch && r.product == t.product;
                        let first_delivery = rows
                            .iter()
                            .filter(|r| r.kind == Kind::Delivery)
                            .filter(same_bp)
                            .min_by_key(|r| r.day)
                            .map(|r| (r.day, r.unit_price));
                        let first_sale_day = rows
                            .iter()
                            .filter(|r| r.kind == Kind::Sale)
                            .filter(same_bp)
                            .map(|r| r.day)
                            .min()
                            .unwrap_or(0);
                        let (day, price) = first_delivery.unwrap_or_else(|| {
                            (first_sale_day, full_prices.get(&t.product).copied().unwrap_or(0))
                        });
                        rows.push(Transaction::delivery(
                            &t.branch,
                            &t.product,
                            t.size,
                            day.min(first_sale_day),
                            qty,
                            price,
                        ));
                    }
                }
            }
            AnomalyKind::Leftover => match ts.last_sale(&t.branch, &t.product) {
                Some((day, price)) => rows.push(Transaction::sale(
                    &t.branch,
                    &t.product,
                    t.size,
                    day,
                    a.magnitude as u32,
                    price,
                )),
                None => {
                    unrepairable.push(t.clone());
                    remove_latest(&mut rows, t, Kind::Delivery, a.magnitude);
                }
            },
        }
    }
    EstimateRepair {
        set: finish(ts, rows, report),
        unrepairable,
    }
}

fn same_triple(r: &Transaction, t: &Triple) -> bool {
    r.size == t.size && r.branch == t.branch && r.product == t.product
}

/// Removes `units` of the given kind from the triple, latest rows first.
fn remove_latest(rows: &mut Vec<Transaction>, t: &Triple, kind: Kind, mut units: u64) {
    let mut idx: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.kind == kind && same_triple(r, t))
        .map(|(i, _)| i)
        .collect();
    idx.sort_by_key(|&i| std::cmp::Reverse((rows[i].day, i)));
    for i in idx {
        if units == 0 {
            break;
        }
        let take = units.min(u64::from(rows[i].qty));
        rows[i].qty -= take as u32;
        units -= take;
    }
    rows.retain(|r| r.qty > 0);
}

/// Rebuilds the set and freezes the end state of every repaired product, so
/// that dropping or adding sales cannot flip the grace-window heuristic.
fn finish(ts: &TransactionSet, rows: Vec<Transaction>, report: &ConsistencyReport) -> TransactionSet {
    let mut end_states = ts.end_states().clone();
    let touched: BTreeSet<(String, String)> = report
        .anomalies
        .iter()
        .map(|a| (a.triple.branch.clone(), a.triple.product.clone()))
        .collect();
    for (b, p) in touched {
        let gone = ts.is_gone(&b, &p);
        end_states.insert((b, p), gone);
    }
    ts.rebuild(rows, end_states)
        .expect("repairs only shrink quantities or add rows inside existing bounds")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::SizeSet;

    fn set(rows: Vec<Transaction>, gone: Option<bool>) -> TransactionSet {
        let mut end = BTreeMap::new();
        if let Some(g) = gone {
            end.insert(("b1".to_string(), "p1".to_string()), g);
        }
        TransactionSet::new(SizeSet::standard(), Some(60), rows, end).unwrap()
    }

    fn sales(n: u32, size: usize) -> Vec<Transaction> {
        (0..n)
            .map(|i| Transaction::sale("b1", "p1", size, i as i64, 1, 1000 - 50 * i as u64))
            .collect()
    }

    fn oversold() -> TransactionSet {
        let mut rows = vec![Transaction::delivery("b1", "p1", 0, -7, 8, 1000)];
        rows.extend(sales(10, 0));
        set(rows, None)
    }

    fn leftover() -> TransactionSet {
        let mut rows = vec![Transaction::delivery("b1", "p1", 0, -7, 10, 1000)];
        rows.extend(sales(8, 0));
        set(rows, Some(true))
    }

    fn sold_units(ts: &TransactionSet) -> u64 {
        ts.sales().map(|t| u64::from(t.qty)).sum()
    }

    fn delivered_units(ts: &TransactionSet) -> u64 {
        ts.deliveries().map(|t| u64::from(t.qty)).sum()
    }

    #[test]
    fn detects_oversell_of_two() {
        let r = validate(&oversold());
        assert_eq!(r.anomalies.len(), 1);
        assert_eq!(r.anomalies[0].kind, AnomalyKind::Oversell);
        assert_eq!(r.anomalies[0].magnitude, 2);
    }

    #[test]
    fn detects_leftover_of_two() {
        let r = validate(&leftover());
        assert_eq!(r.anomalies.len(), 1);
        assert_eq!(r.anomalies[0].kind, AnomalyKind::Leftover);
        assert_eq!(r.anomalies[0].magnitude, 2);
    }

    #[test]
    fn balanced_triple_is_clean() {
        let mut rows = vec![Transaction::delivery("b1", "p1", 0, -7, 5, 1000)];
        rows.extend(sales(5, 0));
        assert!(validate(&set(rows, Some(true))).is_clean());
    }

    #[test]
    fn leftover_needs_gone_state() {
        let mut ts = leftover();
        ts.end_states.clear();
        // last sale on day 7, horizon 60, grace 28: ceased long ago
        assert_eq!(validate(&ts).count(AnomalyKind::Leftover), 1);
        let recent = ts.clone().with_grace_days(60);
        assert!(validate(&recent).is_clean());
        let mut flagged = ts;
        flagged.end_states.insert(("b1".into(), "p1".into()), false);
        assert!(validate(&flagged).is_clean());
    }

    #[test]
    fn ignore_drops_latest_two_sales() {
        let ts = oversold();
        let fixed = repair_ignore(&ts, &validate(&ts));
        assert_eq!(sold_units(&fixed), 8);
        let last_day = fixed.sales().map(|t| t.day).max().unwrap();
        assert_eq!(last_day, 7);
        assert!(validate(&fixed).is_clean());
    }

    #[test]
    fn ignore_reduces_leftover_delivery() {
        let ts = leftover();
        let fixed = repair_ignore(&ts, &validate(&ts));
        assert_eq!(delivered_units(&fixed), 8);
        assert_eq!(sold_units(&fixed), 8);
        assert!(validate(&fixed).is_clean());
    }

    #[test]
    fn estimate_raises_delivery_to_ten() {
        let ts = oversold();
        let fixed = repair_estimate(&ts, &validate(&ts));
        assert_eq!(delivered_units(&fixed.set), 10);
        assert_eq!(sold_units(&fixed.set), 10);
        assert!(fixed.unrepairable.is_empty());
        assert!(validate(&fixed.set).is_clean());
    }

    #[test]
    fn estimate_sells_leftover_at_last_price_over_all_sizes() {
        let mut rows = vec![
            Transaction::delivery("b1", "p1", 0, -7, 10, 1000),
            Transaction::delivery("b1", "p1", 3, -7, 1, 1000),
        ];
        rows.extend(sales(8, 0));
        // XL sells last, at 500
        rows.push(Transaction::sale("b1", "p1", 3, 20, 1, 500));
        let ts = set(rows, Some(true));
        let fixed = repair_estimate(&ts, &validate(&ts));
        let synthetic: Vec<_> = fixed.set.sales().filter(|t| t.size == 0 && t.day == 20).collect();
        assert_eq!(synthetic.len(), 1);
        assert_eq!(synthetic[0].qty, 2);
        assert_eq!(synthetic[0].unit_price, 500);
        assert!(validate(&fixed.set).is_clean());
    }

    #[test]
    fn estimate_without_sales_falls_back_to_ignore() {
        let ts = set(vec![Transaction::delivery("b1", "p1", 0, -7, 3, 1000)], Some(true));
        let fixed = repair_estimate(&ts, &validate(&ts));
        assert_eq!(fixed.unrepairable, vec![Triple::new("b1", "p1", 0)]);
        assert!(fixed.set.is_empty());
        assert!(validate(&fixed.set).is_clean());
    }

    #[test]
    fn estimate_adds_missing_delivery_row() {
        let mut rows = vec![Transaction::delivery("b1", "p1", 1, -7, 2, 1000)];
        rows.extend(sales(2, 0));
        let ts = set(rows, None);
        let fixed = repair_estimate(&ts, &validate(&ts));
        let d: Vec<_> = fixed.set.deliveries().filter(|t| t.size == 0).collect();
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].day, d[0].qty, d[0].unit_price), (-7, 2, 1000));
    }

    #[test]
    fn consistent_set_is_a_fixed_point() {
        let mut rows = vec![Transaction::delivery("b1", "p1", 0, -7, 5, 1000)];
        rows.extend(sales(3, 0));
        let ts = set(rows, Some(false));
        let r = validate(&ts);
        assert!(r.is_clean());
        assert_eq!(repair_ignore(&ts, &r), ts);
        assert_eq!(repair_estimate(&ts, &r).set, ts);
    }

    #[test]
    fn repairs_are_idempotent_on_mixed_data() {
        let mut rows = vec![
            Transaction::delivery("b1", "p1", 0, -7, 8, 1000),
            Transaction::delivery("b1", "p1", 1, -7, 4, 1000),
        ];
        rows.extend(sales(10, 0));
        rows.push(Transaction::sale("b1", "p1", 1, 2, 1, 900));
        let ts = set(rows, None);
        let r = validate(&ts);
        assert_eq!(r.anomalies.len(), 2);
        let once = repair_ignore(&ts, &r);
        assert_eq!(repair_ignore(&once, &validate(&once)), once);
        let once = repair_estimate(&ts, &r).set;
        assert_eq!(repair_estimate(&once, &validate(&once)).set, once);
    }
}
