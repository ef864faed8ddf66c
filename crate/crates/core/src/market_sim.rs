//! Seeded synthetic market used as ground truth.
//!
//! Every (branch, product) receives its pre-packs before the season starts
//! and then sees Poisson customer arrivals day by day. A customer wants one
//! size drawn from the branch's demand distribution; if that size is gone
//! the sale is lost, or with probability σ one adjacent size is tried.
//! Prices follow a global markdown schedule. Only realized sales reach the
//! public [`TransactionSet`]; the full demand stream is kept in a private log.
//!
//! Each (branch, product) draws from its own ChaCha stream and every arrival
//! consumes the same number of variates, so two runs that differ only in
//! their lots see identical customers.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use crate::domain::{Kind, Money, SizeId, SizeSet, Transaction, TransactionSet};
use crate::error::{Error, Result};
use crate::prepack::LotType;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Attractivity {
    pub mu: f64,
    pub sigma: f64,
}

impl Default for Attractivity {
    fn default() -> Self {
        Self { mu: 0.0, sigma: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub branches: usize,
    pub products: usize,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<String>,
    #[serde(default)]
    pub main_sizes: Option<Vec<String>>,
    /// Size demand fractions: one row for all branches or one per branch.
    pub demand: Vec<Vec<f64>>,
    /// Pieces per size of the pre-pack: one row for all branches or one per
    /// branch.
    pub lots: Vec<Vec<u32>>,
    /// Pre-packs delivered per (branch, product).
    #[serde(default = "one")]
    pub packs: u32,
    #[serde(default)]
    pub attractivity: Attractivity,
    /// Expected customers per day for a product of attractivity 1.
    pub base_rate: f64,
    /// Arrival rate scales with `price_fraction^-elasticity`.
    #[serde(default)]
    pub price_elasticity: f64,
    #[serde(default = "default_full_price")]
    pub full_price: Money,
    /// `(first day, price fraction)` steps; before the first step the full
    /// price applies.
    #[serde(default)]
    pub markdown: Vec<(i64, f64)>,
    pub horizon: i64,
    #[serde(default = "default_lead")]
    pub lead_days: i64,
    #[serde(default)]
    pub substitution: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_sizes() -> Vec<String> {
    ["S", "M", "L", "XL"].iter().map(|s| s.to_string()).collect()
}

fn one() -> u32 {
    1
}

fn default_full_price() -> Money {
    2000
}

fn default_lead() -> i64 {
    7
}

impl MarketConfig {
    /// A single-row market with the standard sizes.
    pub fn simple(branches: usize, products: usize, demand: Vec<f64>, lot: Vec<u32>) -> Self {
        Self {
            branches,
            products,
            sizes: default_sizes(),
            main_sizes: None,
            demand: vec![demand],
            lots: vec![lot],
            packs: 1,
            attractivity: Attractivity::default(),
            base_rate: 0.3,
            price_elasticity: 0.0,
            full_price: default_full_price(),
            markdown: vec![(14, 0.7), (28, 0.5), (42, 0.3)],
            horizon: 60,
            lead_days: default_lead(),
            substitution: 0.0,
            seed: 0,
        }
    }

    pub fn size_set(&self) -> Result<SizeSet> {
        match &self.main_sizes {
            Some(main) => SizeSet::new(&self.sizes, main),
            None => SizeSet::all_main(&self.sizes),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.sizes.len();
        let bad = |m: String| Err(Error::Config(m));
        if self.branches == 0 || self.products == 0 {
            return bad("market needs at least one branch and one product".into());
        }
        for (name, rows) in [("demand", self.demand.len()), ("lots", self.lots.len())] {
            if rows != 1 && rows != self.branches {
                return bad(format!("{name} needs 1 or {} rows, got {rows}", self.branches));
            }
        }
        for row in &self.demand {
            if row.len() != k || row.iter().any(|&f| f.is_nan() || f < 0.0) {
                return bad(format!("demand row {row:?} must hold {k} non-negative fractions"));
            }
            if (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return bad(format!("demand row {row:?} must sum to 1"));
            }
        }
        for row in &self.lots {
            if row.len() != k || row.iter().all(|&c| c == 0) {
                return bad(format!("lot {row:?} must hold {k} counts with at least one piece"));
            }
        }
        if !self.base_rate.is_finite() || self.base_rate < 0.0 {
            return bad("base_rate must be a non-negative number".into());
        }
        if !(0.0..=1.0).contains(&self.substitution) {
            return bad("substitution probability must lie in [0, 1]".into());
        }
        if self.attractivity.sigma < 0.0 || !self.attractivity.mu.is_finite() {
            return bad("attractivity needs finite mu and sigma ≥ 0".into());
        }
        let mut last = 1.0;
        let mut last_day = i64::MIN;
        for &(day, f) in &self.markdown {
            if !(f > 0.0 && f <= last) || day <= last_day {
                return bad("markdown steps need increasing days and non-increasing fractions in (0, 1]".into());
            }
            last = f;
            last_day = day;
        }
        if self.horizon < 0 || self.lead_days < 0 {
            return bad("horizon and lead_days must be non-negative".into());
        }
        self.size_set().map(|_| ())
    }

    pub fn demand_of(&self, branch: usize) -> &[f64] {
        &self.demand[if self.demand.len() == 1 { 0 } else { branch }]
    }

    pub fn lot_of(&self, branch: usize) -> LotType {
        LotType::new(self.lots[if self.lots.len() == 1 { 0 } else { branch }].clone()).expect("validated lot")
    }

    pub fn price_fraction(&self, day: i64) -> f64 {
        self.markdown
            .iter()
            .take_while(|&&(d, _)| d <= day)
            .last()
            .map_or(1.0, |&(_, f)| f)
    }

    pub fn price_on(&self, day: i64) -> Money {
        (self.full_price as f64 * self.price_fraction(day)).round() as Money
    }
}

pub fn branch_name(i: usize) -> String {
    format!("b{:02}", i + 1)
}

pub fn product_name(i: usize) -> String {
    format!("p{:03}", i + 1)
}

/// Sizes by expected demand per delivered piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScarcityOrder {
    /// Scarcest first; ties keep size order.
    pub order: Vec<SizeId>,
    /// `None` for a demanded size with no pieces (unbounded pressure).
    pub pressure: Vec<Option<f64>>,
}

impl ScarcityOrder {
    pub fn scarcest(&self) -> SizeId {
        self.order[0]
    }
}

pub fn true_scarcity(demand: &[f64], lot: &LotType) -> ScarcityOrder {
    let pressure: Vec<Option<f64>> = demand
        .iter()
        .zip(lot.counts())
        .map(|(&d, &c)| match c {
            0 if d > 0.0 => None,
            0 => Some(0.0),
            c => Some(d / f64::from(c)),
        })
        .collect();
    let key = |p: Option<f64>| p.unwrap_or(f64::INFINITY);
    let mut order: Vec<SizeId> = (0..pressure.len()).collect();
    order.sort_by(|&a, &b| key(pressure[b]).total_cmp(&key(pressure[a])));
    ScarcityOrder { order, pressure }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchTruth {
    pub demand: Vec<f64>,
    pub lot: Vec<u32>,
    pub scarcity: ScarcityOrder,
    pub scarcity_labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub branches: BTreeMap<String, BranchTruth>,
    pub attractivity: BTreeMap<String, f64>,
}

/// One customer. `served` is the size actually sold, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandEvent {
    pub branch: u32,
    pub product: u32,
    pub day: i64,
    pub wanted: SizeId,
    pub served: Option<SizeId>,
    pub price: Money,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub transactions: TransactionSet,
    pub truth: GroundTruth,
    /// Private full-demand log, including lost sales.
    pub demand_log: Vec<DemandEvent>,
    /// Pieces left per (branch, product, size) at the horizon.
    pub leftover: BTreeMap<(u32, u32), Vec<u32>>,
}

pub fn generate(config: &MarketConfig) -> Result<Simulation> {
    config.validate()?;
    let lots: Vec<LotType> = (0..config.branches).map(|b| config.lot_of(b)).collect();
    simulate_with_lots(config, &lots)
}

/// Like [`generate`], with one lot per branch overriding the configured lots.
pub fn simulate_with_lots(config: &MarketConfig, lots: &[LotType]) -> Result<Simulation> {
    config.validate()?;
    let sizes = config.size_set()?;
    let k = sizes.len();
    if lots.len() != config.branches || lots.iter().any(|l| l.len() != k) {
        return Err(Error::Config(format!("need {} lots of {k} sizes", config.branches)));
    }

    let mut product_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let lognormal = LogNormal::new(config.attractivity.mu, config.attractivity.sigma)
        .map_err(|e| Error::Config(format!("attractivity: {e}")))?;
    let attractivity: Vec<f64> = (0..config.products).map(|_| lognormal.sample(&mut product_rng)).collect();
    let prices: Vec<Money> = (0..=config.horizon).map(|d| config.price_on(d)).collect();
    let rate_factor: Vec<f64> = (0..=config.horizon)
        .map(|d| config.price_fraction(d).powf(-config.price_elasticity))
        .collect();

    let mut transactions = Vec::new();
    let mut end_states = BTreeMap::new();
    let mut demand_log = Vec::new();
    let mut leftover = BTreeMap::new();
    let mut truth = BTreeMap::new();

    for (b, lot) in lots.iter().enumerate() {
        let branch = branch_name(b);
        let demand = config.demand_of(b);
        let mut cumulative = Vec::with_capacity(k);
        let mut acc = 0.0;
        for &f in demand {
            acc += f;
            cumulative.push(acc);
        }
        let scarcity = true_scarcity(demand, lot);
        truth.insert(
            branch.clone(),
            BranchTruth {
                demand: demand.to_vec(),
                lot: lot.counts().to_vec(),
                scarcity_labels: scarcity.order.iter().map(|&s| sizes.label(s).to_string()).collect(),
                scarcity,
            },
        );

        for (p, &attr) in attractivity.iter().enumerate() {
            let product = product_name(p);
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(1 + (b * config.products + p) as u64);

            let mut stock: Vec<u32> = lot.counts().iter().map(|&c| c * config.packs).collect();
            for (s, &q) in stock.iter().enumerate() {
                if q > 0 {
                    transactions.push(Transaction::delivery(&branch, &product, s, -config.lead_days, q, config.full_price));
                }
            }
            let mut remaining: u32 = stock.iter().sum();
            for day in 0..=config.horizon {
                if remaining == 0 {
                    break;
                }
                let di = day as usize;
                let rate = config.base_rate * attr * rate_factor[di];
                let arrivals = if rate > 0.0 {
                    Poisson::new(rate).map(|d| d.sample(&mut rng) as u64).unwrap_or(0)
                } else {
                    0
                };
                let mut sold_today = vec![0u32; k];
                for _ in 0..arrivals {
                    let (u, v, w): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
                    let wanted = cumulative.iter().position(|&c| u < c).unwrap_or_else(|| {
                        // rounding slack in the last bucket
                        (0..k).rev().find(|&s| demand[s] > 0.0).unwrap_or(k - 1)
                    });
                    let mut served = None;
                    if stock[wanted] > 0 {
                        served = Some(wanted);
                    } else if v < config.substitution {
                        let neighbours: Vec<SizeId> = [wanted.checked_sub(1), Some(wanted + 1)]
                            .into_iter()
                            .flatten()
                            .filter(|&s| s < k)
                            .collect();
                        let alt = neighbours[((w * neighbours.len() as f64) as usize).min(neighbours.len() - 1)];
                        if stock[alt] > 0 {
                            served = Some(alt);
                        }
                    }
                    if let Some(s) = served {
                        stock[s] -= 1;
                        remaining -= 1;
                        sold_today[s] += 1;
                    }
                    demand_log.push(DemandEvent {
                        branch: b as u32,
                        product: p as u32,
                        day,
                        wanted,
                        served,
                        price: prices[di],
                    });
                }
                for (s, &q) in sold_today.iter().enumerate() {
                    if q > 0 {
                        transactions.push(Transaction::sale(&branch, &product, s, day, q, prices[di]));
                    }
                }
            }
            end_states.insert((branch.clone(), product.clone()), remaining == 0);
            leftover.insert((b as u32, p as u32), stock);
        }
    }

    let ts = TransactionSet::new(sizes, Some(config.horizon), transactions, end_states)?;
    Ok(Simulation {
        transactions: ts,
        truth: GroundTruth {
            seed: config.seed,
            branches: truth,
            attractivity: attractivity
                .iter()
                .enumerate()
                .map(|(p, &a)| (product_name(p), a))
                .collect(),
        },
        demand_log,
        leftover,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InjectTarget {
    Deliveries,
    Sales,
    Both,
}

/// Drops each delivered or sold unit independently with probability `rate`.
/// Rows that lose all their units disappear; end states are kept.
pub fn inject_inconsistencies(ts: &TransactionSet, rate: f64, seed: u64, target: InjectTarget) -> Result<TransactionSet> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Contract(format!("injection rate {rate} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hit = |kind: Kind| match target {
        InjectTarget::Deliveries => kind == Kind::Delivery,
        InjectTarget::Sales => kind == Kind::Sale,
        InjectTarget::Both => true,
    };
    let mut out = Vec::with_capacity(ts.len());
    for t in ts.transactions() {
        let mut t = t.clone();
        if hit(t.kind) && rate > 0.0 {
            let dropped = Binomial::new(u64::from(t.qty), rate)
                .map_err(|e| Error::Contract(e.to_string()))?
                .sample(&mut rng) as u32;
            t.qty -= dropped;
        }
        if t.qty > 0 {
            out.push(t);
        }
    }
    ts.rebuild(out, ts.end_states().clone())
}
