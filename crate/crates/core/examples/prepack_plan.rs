//! One repacking step: move a piece from the amplest to the scarcest size,
//! for products that must keep every main size and for those that need not.
//!
//!     cargo run --example prepack_plan

use std::collections::BTreeMap;

use topdog::market_sim::{branch_name, generate, MarketConfig};
use topdog::prepack::{optimization_step, LotType, RepackOutcome, Variant};
use topdog::tdi::Dampening;

pub fn main() {
    let mut config = MarketConfig::simple(6, 50, vec![0.2, 0.3, 0.25, 0.25], vec![1, 2, 2, 1]);
    config.seed = 11;
    let sim = generate(&config).expect("valid market");
    let sizes = sim.transactions.sizes().clone();

    let lots: BTreeMap<String, LotType> = (0..config.branches).map(|b| (branch_name(b), config.lot_of(b))).collect();
    let plans = optimization_step(&sim.transactions, &lots, Dampening::default(), 1.0);

    println!("branch  variant     move      new lot");
    for (branch, plan) in &plans {
        for v in [Variant::Advertised, Variant::Plain] {
            match plan.outcome(v) {
                RepackOutcome::Swap { remove, add, lot } => println!(
                    "{branch:<7} {:<11} {:>2} -> {:<3} {}",
                    v.name(),
                    sizes.label(*remove),
                    sizes.label(*add),
                    lot.display(&sizes)
                ),
                RepackOutcome::NoAction { reason } => println!("{branch:<7} {:<11} none      ({reason})", v.name()),
            }
        }
    }
}
