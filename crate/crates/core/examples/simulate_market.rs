//! Synthetic season with lost sales and markdowns, written as transaction
//! CSV next to its ground truth.
//!
//!     TOPDOG_OUT=out cargo run --example simulate_market

use topdog::domain::write_transactions;
use topdog::market_sim::{generate, MarketConfig};

pub fn main() {
    let mut config = MarketConfig::simple(4, 25, vec![0.15, 0.35, 0.3, 0.2], vec![1, 2, 2, 1]);
    config.substitution = 0.2;
    config.seed = 42;
    let sim = generate(&config).expect("valid market");

    let wanted = sim.demand_log.len();
    let served = sim.demand_log.iter().filter(|e| e.served.is_some()).count();
    println!("{wanted} customers, {served} served, {} lost", wanted - served);
    for (branch, truth) in &sim.truth.branches {
        println!("{branch}: scarcest first {}", truth.scarcity_labels.join(" > "));
    }

    if let Ok(dir) = std::env::var("TOPDOG_OUT") {
        let dir = std::path::Path::new(&dir);
        std::fs::create_dir_all(dir).unwrap();
        let file = std::fs::File::create(dir.join("data.csv")).unwrap();
        write_transactions(&sim.transactions, file).unwrap();
        std::fs::write(dir.join("truth.json"), serde_json::to_string_pretty(&sim.truth).unwrap()).unwrap();
        println!("wrote {}", dir.display());
    }
}
