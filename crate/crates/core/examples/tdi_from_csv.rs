//! Top-Dog-Index of a small branch read from transaction CSV.
//!
//!     cargo run --example tdi_from_csv

use topdog::domain::{read_transactions_from, AnalysisConfig};
use topdog::tdi::{stockout_days, tdi_profiles, Stockout};

const DATA: &str = "\
kind,branch,product,size,day,qty,unit_price,gone_flag
D,north,shirt,S,-3,1,1999,
D,north,shirt,M,-3,2,1999,
D,north,shirt,L,-3,2,1999,
D,north,shirt,XL,-3,1,1999,
S,north,shirt,XL,2,1,1999,
S,north,shirt,M,5,2,1999,
S,north,shirt,L,9,1,1499,
D,north,jeans,S,-3,1,4999,
D,north,jeans,M,-3,2,4999,
D,north,jeans,L,-3,2,4999,
D,north,jeans,XL,-3,1,4999,
S,north,jeans,XL,1,1,4999,
S,north,jeans,L,4,2,4999,
S,north,jeans,S,20,1,2999,
D,north,dress,S,-3,1,3999,
D,north,dress,M,-3,2,3999,
D,north,dress,L,-3,2,3999,
D,north,dress,XL,-3,1,3999,
S,north,dress,XL,3,1,3999,
S,north,dress,M,3,2,3999,
";

pub fn main() {
    let ts = read_transactions_from(DATA.as_bytes(), &AnalysisConfig::default()).expect("valid sample data");
    let sizes = ts.sizes();

    println!("stockout days");
    for (triple, day) in stockout_days(&ts).entries() {
        let day = match day {
            Stockout::Day(d) => d.to_string(),
            Stockout::NeverSoldOut => "-".to_string(),
        };
        println!("  {:<6} {:<3} {day}", triple.product, sizes.label(triple.size));
    }

    for p in tdi_profiles(&ts, AnalysisConfig::default().dampening) {
        println!("\n{} ({} products)", p.branch, p.products_used);
        println!("  size  TDC  FDC  TDI");
        for s in sizes.ids() {
            println!(
                "  {:<4} {:>4} {:>4}  {} ({:.3})",
                sizes.label(s),
                p.counts[s].tdc,
                p.counts[s].fdc,
                p.tdi[s],
                p.tdi_f64()[s]
            );
        }
        let order: Vec<&str> = p.rank_sizes().iter().map(|&s| sizes.label(s)).collect();
        println!("  scarcest first: {}", order.join(" > "));
    }
}
