//! Consistency check and both repair strategies on a product with an
//! oversold size and a product that left the assortment with pieces unsold.
//!
//!     cargo run --example validate_and_repair

use std::collections::BTreeMap;

use topdog::domain::{repair_estimate, repair_ignore, validate, SizeSet, Transaction, TransactionSet};
use topdog::evaluation::gross_yield;

pub fn main() {
    let mut rows = vec![
        Transaction::delivery("b1", "coat", 1, -5, 8, 8000),
        Transaction::delivery("b1", "scarf", 0, -5, 10, 1500),
    ];
    for day in 0..10 {
        rows.push(Transaction::sale("b1", "coat", 1, day, 1, 8000 - 400 * day as u64));
    }
    for day in 0..8 {
        rows.push(Transaction::sale("b1", "scarf", 0, day * 3, 1, 1500 - 100 * day as u64));
    }
    let mut gone = BTreeMap::new();
    gone.insert(("b1".to_string(), "scarf".to_string()), true);
    let ts = TransactionSet::new(SizeSet::standard(), Some(60), rows, gone).expect("valid rows");

    let report = validate(&ts);
    for a in &report.anomalies {
        println!(
            "{} {} {}: {} by {}",
            a.triple.branch,
            a.triple.product,
            ts.sizes().label(a.triple.size),
            a.kind.name(),
            a.magnitude
        );
    }

    let ignored = repair_ignore(&ts, &report);
    let estimated = repair_estimate(&ts, &report);
    println!("\n              delivered  sold  gross yield");
    for (name, set) in [("raw", &ts), ("ignore", &ignored), ("estimate", &estimated.set)] {
        let delivered: u32 = set.deliveries().map(|t| t.qty).sum();
        let sold: u32 = set.sales().map(|t| t.qty).sum();
        let y = gross_yield(set, "b1").unwrap_or(f64::NAN);
        println!("  {name:<10} {delivered:>10} {sold:>5}  {:>10.2}%", 100.0 * y);
        assert!(name == "raw" || validate(set).is_clean());
    }
}
