use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use topdog::domain::{repair_estimate, repair_ignore, validate, SizeSet, Transaction, TransactionSet};
use topdog::evaluation::wilcoxon::{rank_sum, RankSumDistribution};
use topdog::evaluation::certainty;
use topdog::market_sim::{branch_name, generate, simulate_with_lots, MarketConfig};
use topdog::prepack::{optimization_step, repack, LotType, Variant};
use topdog::robustness::kendall_tau_b;
use topdog::tdi::{dog_counts, stockout_days, tdi, tdi_profiles, Dampening, DogCounts};

/// (branch, product, size, is_sale, day, qty, price tenths)
type Row = (u8, u8, usize, bool, i64, u32, u64);

fn rows() -> impl Strategy<Value = (Vec<Row>, Vec<(u8, u8, bool)>)> {
    (
        prop::collection::vec((0..3u8, 0..4u8, 0..4usize, any::<bool>(), 0..60i64, 1..4u32, 3..11u64), 0..40),
        prop::collection::vec((0..3u8, 0..4u8, any::<bool>()), 0..6),
    )
}

/// Deliveries go to day -1 so they never follow a sale.
fn build((rows, ends): (Vec<Row>, Vec<(u8, u8, bool)>)) -> TransactionSet {
    let txs = rows
        .into_iter()
        .map(|(b, p, s, sale, day, qty, tenths)| {
            let (b, p) = (format!("b{b}"), format!("p{p}"));
            if sale {
                Transaction::sale(&b, &p, s, day, qty, 100 * tenths)
            } else {
                Transaction::delivery(&b, &p, s, -1, qty, 1000)
            }
        })
        .collect();
    let end_states = ends.into_iter().map(|(b, p, g)| ((format!("b{b}"), format!("p{p}")), g)).collect();
    TransactionSet::new(SizeSet::standard(), Some(60), txs, end_states).unwrap()
}

fn units(ts: &TransactionSet) -> (u64, u64) {
    (
        ts.deliveries().map(|t| u64::from(t.qty)).sum(),
        ts.sales().map(|t| u64::from(t.qty)).sum(),
    )
}

proptest! {
    #[test]
    fn repairs_are_idempotent_and_monotone(data in rows()) {
        let ts = build(data);
        let report = validate(&ts);
        let ignored = repair_ignore(&ts, &report);
        let estimate = repair_estimate(&ts, &report);
        let unsellable = !estimate.unrepairable.is_empty();
        let estimated = estimate.set;
        prop_assert!(validate(&ignored).is_clean());
        prop_assert!(validate(&estimated).is_clean());
        prop_assert_eq!(&repair_ignore(&ignored, &validate(&ignored)), &ignored);
        prop_assert_eq!(&repair_estimate(&estimated, &validate(&estimated)).set, &estimated);

        let (d, s) = units(&ts);
        let (di, si) = units(&ignored);
        let (de, se) = units(&estimated);
        prop_assert!(di <= d && si <= s);
        // leftovers of products that never sold fall back to ignore
        prop_assert!(se >= s);
        prop_assert!(de >= d || unsellable);
    }

    #[test]
    fn tdi_is_scale_free(tdc in 0..500u64, fdc in 0..500u64, n in 1..40u64, k in 1..20u64) {
        let c = Dampening::new(n, 1).unwrap();
        let scaled = tdi(DogCounts { tdc: k * tdc, fdc: k * fdc }, c.scaled(k));
        prop_assert_eq!(tdi(DogCounts { tdc, fdc }, c), scaled);
    }

    #[test]
    fn tdi_is_monotone(tdc in 0..500u64, fdc in 0..500u64) {
        let c = Dampening::default();
        let base = tdi(DogCounts { tdc, fdc }, c);
        let more_top = tdi(DogCounts { tdc: tdc + 1, fdc }, c);
        let more_flop = tdi(DogCounts { tdc, fdc: fdc + 1 }, c);
        prop_assert!(more_top > base);
        prop_assert!(more_flop < base);
    }

    #[test]
    fn every_eligible_product_has_a_top_and_a_flop(data in rows()) {
        let ts = build(data);
        let table = stockout_days(&ts);
        for b in ts.branches() {
            let counts = dog_counts(&table, b);
            let tdc: u64 = counts.counts.iter().map(|c| c.tdc).sum();
            let fdc: u64 = counts.counts.iter().map(|c| c.fdc).sum();
            prop_assert!(tdc >= counts.eligible);
            prop_assert!(fdc >= counts.eligible);
        }
    }

    #[test]
    fn row_order_does_not_matter(data in rows(), seed in any::<u64>()) {
        let ts = build(data);
        let mut txs = ts.transactions().to_vec();
        txs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = TransactionSet::new(SizeSet::standard(), Some(60), txs, ts.end_states().clone()).unwrap();
        let a = tdi_profiles(&ts, Dampening::default());
        let b = tdi_profiles(&shuffled, Dampening::default());
        prop_assert_eq!(a, b);
        prop_assert_eq!(validate(&ts), validate(&shuffled));
    }

    #[test]
    fn repack_conserves_pieces_and_floors(
        counts in prop::collection::vec(0..4u32, 4),
        top in 0..4usize,
        flop in 0..4usize,
        order_seed in any::<u64>(),
    ) {
        prop_assume!(counts.iter().any(|&c| c > 0));
        let lot = LotType::new(counts.clone()).unwrap();
        let sizes = SizeSet::standard();
        let mut order = vec![0, 1, 2, 3];
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(order_seed));
        for v in [Variant::Advertised, Variant::Plain] {
            if let Some(new) = repack(&lot, top, flop, &order, v, &sizes).lot() {
                prop_assert_eq!(new.total(), lot.total());
                prop_assert_eq!(new.count(top), lot.count(top) + 1);
                if v == Variant::Advertised {
                    for s in 0..4 {
                        prop_assert!(new.count(s) >= lot.count(s).min(1));
                    }
                }
            }
        }
    }

    #[test]
    fn distinct_rank_sums_add_up(values in prop::collection::btree_set(-10_000i32..10_000, 2..30), split in 1..29usize) {
        let v: Vec<f64> = values.into_iter().map(f64::from).collect();
        let split = split.min(v.len() - 1);
        let r = rank_sum(&v[..split], &v[split..]);
        let n = v.len() as f64;
        prop_assert!(!r.tied);
        prop_assert_eq!(r.test + r.control, n * (n + 1.0) / 2.0);
    }

    #[test]
    fn kendall_tau_is_symmetric_and_bounded(x in prop::collection::vec(0..5i32, 4), y in prop::collection::vec(0..5i32, 4)) {
        let x: Vec<f64> = x.into_iter().map(f64::from).collect();
        let y: Vec<f64> = y.into_iter().map(f64::from).collect();
        let a = kendall_tau_b(&x, &y);
        prop_assert_eq!(a, kendall_tau_b(&y, &x));
        if let Some(t) = a {
            prop_assert!(t.abs() <= 1.0 + 1e-12);
        }
        if x.iter().any(|&v| v != x[0]) {
            prop_assert!((kendall_tau_b(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn simulation_conserves_and_censors(seed in any::<u64>(), sigma in 0.0..1.0f64) {
        let mut c = MarketConfig::simple(2, 6, vec![0.1, 0.4, 0.3, 0.2], vec![1, 2, 1, 1]);
        c.seed = seed;
        c.substitution = sigma;
        let sim = generate(&c).unwrap();
        let ts = &sim.transactions;
        for (triple, ledger) in ts.ledgers() {
            let b = triple.branch[1..].parse::<u32>().unwrap() - 1;
            let p = triple.product[1..].parse::<u32>().unwrap() - 1;
            prop_assert_eq!(ledger.delivered, ledger.sold + u64::from(sim.leftover[&(b, p)][triple.size]));
        }
        let mut served: BTreeMap<(u32, u32, usize, i64), u64> = BTreeMap::new();
        let mut arrived: BTreeMap<(u32, u32, i64), u64> = BTreeMap::new();
        for e in &sim.demand_log {
            *arrived.entry((e.branch, e.product, e.day)).or_default() += 1;
            if let Some(s) = e.served {
                *served.entry((e.branch, e.product, s, e.day)).or_default() += 1;
            }
        }
        for t in ts.sales() {
            let b = t.branch[1..].parse::<u32>().unwrap() - 1;
            let p = t.product[1..].parse::<u32>().unwrap() - 1;
            prop_assert_eq!(served[&(b, p, t.size, t.day)], u64::from(t.qty));
            prop_assert!(u64::from(t.qty) <= arrived[&(b, p, t.day)]);
        }
    }
}

#[test]
fn exact_distribution_matches_enumeration() {
    let total = 12usize;
    for n in 1..=6 {
        let dist = RankSumDistribution::new(n, total).unwrap();
        let mut counts = vec![0u64; total * (total + 1) / 2 + 1];
        for mask in 0u32..(1 << total) {
            if mask.count_ones() as usize == n {
                let w: usize = (0..total).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).sum();
                counts[w] += 1;
            }
        }
        for (w, &c) in counts.iter().enumerate() {
            assert_eq!(dist.count(w), c, "n={n} w={w}");
        }
    }
}

#[test]
fn certainty_falls_as_rank_sum_grows() {
    let mut last = 1.0;
    for w in 55..=155 {
        let c = certainty(w, 10, 10).unwrap();
        assert!(c <= last);
        last = c;
    }
    assert_eq!(certainty(155, 10, 10).unwrap(), 0.0);
}

#[test]
fn normal_approximation_is_close_for_ten_versus_ten() {
    let (n, m) = (10.0, 10.0);
    let mean = n * (n + m + 1.0) / 2.0;
    let sd = (n * m * (n + m + 1.0) / 12.0_f64).sqrt();
    let normal = Normal::new(mean, sd).unwrap();
    for w in 55..=155u64 {
        let approx = 1.0 - normal.cdf(w as f64 + 0.5);
        let exact = certainty(w, 10, 10).unwrap();
        assert!((approx - exact).abs() < 0.01, "w={w}: {approx} vs {exact}");
    }
}

#[test]
fn second_step_undoes_an_oversteer() {
    // Two sizes with equal demand. The single-piece size sells out first, so
    // a piece moves to it; with the lot now reversed the next season points
    // back the other way.
    let mut c = MarketConfig::simple(3, 60, vec![0.5, 0.5], vec![2, 1]);
    c.sizes = vec!["A".into(), "B".into()];
    c.markdown = vec![];
    c.base_rate = 0.2;
    c.seed = 9;
    let first: BTreeMap<String, LotType> = (0..3).map(|b| (branch_name(b), c.lot_of(b))).collect();
    let season = generate(&c).unwrap();
    let step1 = optimization_step(&season.transactions, &first, Dampening::default(), 1.0);
    let second: BTreeMap<String, LotType> = step1
        .iter()
        .map(|(b, plan)| (b.clone(), plan.plain.lot().cloned().expect("imbalanced branch is repacked")))
        .collect();
    for lot in second.values() {
        assert_eq!(lot.counts(), &[1, 2]);
    }

    c.seed = 10;
    let next = simulate_with_lots(&c, &second.values().cloned().collect::<Vec<_>>()).unwrap();
    let step2 = optimization_step(&next.transactions, &second, Dampening::default(), 1.0);
    for (b, plan) in &step2 {
        for lot in [plan.plain.lot(), plan.advertised.lot()] {
            assert_eq!(lot, Some(&first[b]));
        }
    }
}
