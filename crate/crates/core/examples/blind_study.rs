//! A complete blind study on synthetic data: learn TDIs in one season,
//! repack the pre-packs of a random half of the branches, and test whether
//! their gross yield improves in the next season.
//!
//!     cargo run --release --example blind_study

use std::collections::BTreeMap;

use topdog::evaluation::{assign_groups, branch_outcomes, improvement_pp, study_report, Group};
use topdog::market_sim::{branch_name, generate, simulate_with_lots, MarketConfig};
use topdog::prepack::{optimization_step, LotType};
use topdog::tdi::Dampening;

pub fn main() {
    let mut config = MarketConfig::simple(20, 60, vec![0.1, 0.25, 0.25, 0.4], vec![2, 2, 2, 2]);
    config.seed = 2005;
    let season = generate(&config).expect("valid market");

    let lots: BTreeMap<String, LotType> = (0..config.branches).map(|b| (branch_name(b), config.lot_of(b))).collect();
    let plans = optimization_step(&season.transactions, &lots, Dampening::default(), 1.0);
    let groups = assign_groups(lots.keys(), 10, 2006);

    let next_lots: Vec<LotType> = lots
        .iter()
        .map(|(b, lot)| match groups[b] {
            Group::Test => plans[b].advertised.lot().cloned().unwrap_or_else(|| lot.clone()),
            Group::Control => lot.clone(),
        })
        .collect();
    let mut next = config.clone();
    next.seed = 2006;
    let test_season = simulate_with_lots(&next, &next_lots).expect("valid lots");

    let (outcomes, excluded) = branch_outcomes(&test_season.transactions, &groups);
    assert!(excluded.is_empty());
    let report = study_report(&outcomes, &[-0.0, -0.25, -0.5, -1.0]).expect("both groups present");
    let [test, control] = &report.groups;
    println!(
        "gross yield: test {:.2}%, control {:.2}%, improvement {:+.2} pp",
        100.0 * test.yield_ignore.mean,
        100.0 * control.yield_ignore.mean,
        improvement_pp(&test.yield_ignore, &control.yield_ignore)
    );
    println!("\nscenario  control  test  certainty");
    for s in &report.scenarios {
        println!("{:<9} {:>7} {:>5}  {:>8.1}%", s.label(), s.control_rank_sum, s.test_rank_sum, 100.0 * s.certainty);
    }
}
