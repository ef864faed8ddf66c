//! Exact rank-sum certainties for a 10-vs-10 study, with the largest value
//! ranked first.
//!
//!     cargo run --example wilcoxon_certainty

use topdog::evaluation::wilcoxon::RankSumDistribution;
use topdog::evaluation::{certainty, group_certainty};

pub fn main() {
    let dist = RankSumDistribution::new(10, 20).expect("N within exact range");
    println!("{} equally likely test-group rank sets", dist.subsets());

    println!("\n rank sum  certainty");
    for w in [79, 82, 86, 89, 90, 92, 98, 103, 105, 116] {
        println!(" {w:>8}  {:>8.1}%", 100.0 * certainty(w, 10, 10).unwrap());
    }

    // gross yields in percent
    let test = [99.323, 97.333, 97.273, 97.693, 97.513, 99.123, 97.863, 97.423, 97.203, 99.273];
    let control = [98.807, 97.147, 96.777, 99.747, 96.847, 96.757, 99.447, 94.887, 98.827, 92.667];
    println!("\n shift  test  control  certainty");
    for shift in [0.0, -0.25, -0.5, -0.75] {
        let shifted: Vec<f64> = test.iter().map(|y| y + shift).collect();
        let (sums, c, exact) = group_certainty(&shifted, &control).unwrap();
        assert!(exact);
        println!(" {shift:>5}  {:>4}  {:>7}  {:>8.1}%", sums.test, sums.control, 100.0 * c);
    }
}
