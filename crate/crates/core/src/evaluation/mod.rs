//! Test-vs-control study analytics: gross yield and last price per branch
//! under both repair strategies, group aggregates, and rank-sum certainties
//! for shifted scenarios.

pub mod wilcoxon;

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{repair_estimate, repair_ignore, validate, TransactionSet};
use crate::error::{Error, Result};

pub use wilcoxon::{certainty, group_certainty, rank_sum, RankSumDistribution, RankSums};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    Test,
    Control,
}

impl Group {
    pub fn name(self) -> &'static str {
        match self {
            Group::Test => "test",
            Group::Control => "control",
        }
    }
}

impl std::str::FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "test" | "t" => Ok(Group::Test),
            "control" | "c" => Ok(Group::Control),
            other => Err(Error::Config(format!("group must be test or control, got `{other}`"))),
        }
    }
}

/// How inconsistent records are repaired before measuring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RepairMethod {
    Ignore,
    Estimate,
}

impl RepairMethod {
    /// Scenario prefix: `i` or `e`.
    pub fn code(self) -> &'static str {
        match self {
            RepairMethod::Ignore => "i",
            RepairMethod::Estimate => "e",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RepairMethod::Ignore => "ignore",
            RepairMethod::Estimate => "estimate",
        }
    }
}

impl fmt::Display for RepairMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Realized turnover over the turnover at full prices, for the units a
/// branch sold. `None` when the branch sold nothing priced.
pub fn gross_yield(ts: &TransactionSet, branch: &str) -> Option<f64> {
    let full = ts.full_prices();
    let (mut realized, mut theoretic) = (0u128, 0u128);
    for t in ts.sales().filter(|t| t.branch == branch) {
        let q = u128::from(t.qty);
        realized += q * u128::from(t.unit_price);
        theoretic += q * u128::from(full.get(&t.product).copied().unwrap_or(0));
    }
    (theoretic > 0).then(|| realized as f64 / theoretic as f64)
}

/// Mean over products sold in the branch of last selling price over full
/// price.
pub fn last_price_ratio(ts: &TransactionSet, branch: &str) -> Option<f64> {
    let full = ts.full_prices();
    let mut ratios = Vec::new();
    for product in ts.products() {
        if let Some((_, price)) = ts.last_sale(branch, product) {
            match full.get(product) {
                Some(&f) if f > 0 => ratios.push(price as f64 / f as f64),
                _ => {}
            }
        }
    }
    (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchOutcome {
    pub branch: String,
    pub group: Group,
    pub yield_ignore: f64,
    pub yield_estimate: f64,
    pub last_price_ignore: f64,
    pub last_price_estimate: f64,
}

impl BranchOutcome {
    pub fn gross_yield(&self, method: RepairMethod) -> f64 {
        match method {
            RepairMethod::Ignore => self.yield_ignore,
            RepairMethod::Estimate => self.yield_estimate,
        }
    }

    pub fn last_price(&self, method: RepairMethod) -> f64 {
        match method {
            RepairMethod::Ignore => self.last_price_ignore,
            RepairMethod::Estimate => self.last_price_estimate,
        }
    }
}

/// Per-branch outcomes for every branch assigned a group. Branches without
/// measurable sales are returned separately with a note.
pub fn branch_outcomes(
    ts: &TransactionSet,
    groups: &BTreeMap<String, Group>,
) -> (Vec<BranchOutcome>, Vec<(String, String)>) {
    let report = validate(ts);
    let ignored = repair_ignore(ts, &report);
    let estimated = repair_estimate(ts, &report).set;
    let mut outcomes = Vec::new();
    let mut excluded = Vec::new();
    for (branch, &group) in groups {
        let metrics = (
            gross_yield(&ignored, branch),
            gross_yield(&estimated, branch),
            last_price_ratio(&ignored, branch),
            last_price_ratio(&estimated, branch),
        );
        match metrics {
            (Some(yi), Some(ye), Some(li), Some(le)) => outcomes.push(BranchOutcome {
                branch: branch.clone(),
                group,
                yield_ignore: yi,
                yield_estimate: ye,
                last_price_ignore: li,
                last_price_estimate: le,
            }),
            _ => excluded.push((branch.clone(), "no priced sales".to_string())),
        }
    }
    (outcomes, excluded)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    pub min: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MetricStats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        Some(Self {
            mean,
            min,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub group: Group,
    pub branches: usize,
    pub yield_ignore: MetricStats,
    pub yield_estimate: MetricStats,
    pub last_price_ignore: MetricStats,
    pub last_price_estimate: MetricStats,
}

/// Statistics of the test group followed by the control group.
pub fn group_stats(outcomes: &[BranchOutcome]) -> Result<[GroupStats; 2]> {
    let stats = |group: Group| -> Result<GroupStats> {
        let members: Vec<&BranchOutcome> = outcomes.iter().filter(|o| o.group == group).collect();
        let metric = |f: fn(&BranchOutcome) -> f64| {
            let values: Vec<f64> = members.iter().map(|o| f(o)).collect();
            MetricStats::of(&values).ok_or_else(|| Error::Contract(format!("{} group is empty", group.name())))
        };
        Ok(GroupStats {
            group,
            branches: members.len(),
            yield_ignore: metric(|o| o.yield_ignore)?,
            yield_estimate: metric(|o| o.yield_estimate)?,
            last_price_ignore: metric(|o| o.last_price_ignore)?,
            last_price_estimate: metric(|o| o.last_price_estimate)?,
        })
    };
    Ok([stats(Group::Test)?, stats(Group::Control)?])
}

/// Test mean minus control mean, in percentage points.
pub fn improvement_pp(test: &MetricStats, control: &MetricStats) -> f64 {
    100.0 * (test.mean - control.mean)
}

/// One column of the scenario grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub method: RepairMethod,
    /// Shift applied to test branches, in percentage points.
    pub shift_pp: f64,
    pub control_rank_sum: f64,
    pub test_rank_sum: f64,
    pub certainty: f64,
    pub exact: bool,
}

impl ScenarioRow {
    /// `i_-0.25`, `e_-1.00`, ...
    pub fn label(&self) -> String {
        scenario_label(self.method, self.shift_pp)
    }
}

pub fn scenario_label(method: RepairMethod, shift_pp: f64) -> String {
    let sign = if shift_pp < 0.0 || (shift_pp == 0.0 && shift_pp.is_sign_negative()) { "-" } else { "" };
    format!("{}_{sign}{:.2}", method.code(), shift_pp.abs())
}

/// Adds `shift_pp / 100` to the test branches' gross yields and recomputes
/// rank sums and certainty.
pub fn scenario_shift(outcomes: &[BranchOutcome], method: RepairMethod, shift_pp: f64) -> Result<ScenarioRow> {
    let shift = shift_pp / 100.0;
    let test: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.group == Group::Test)
        .map(|o| o.gross_yield(method) + shift)
        .collect();
    let control: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.group == Group::Control)
        .map(|o| o.gross_yield(method))
        .collect();
    let (sums, certainty, exact) = group_certainty(&test, &control)?;
    Ok(ScenarioRow {
        method,
        shift_pp,
        control_rank_sum: sums.control,
        test_rank_sum: sums.test,
        certainty,
        exact,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub groups: [GroupStats; 2],
    pub scenarios: Vec<ScenarioRow>,
}

/// Group statistics plus one scenario row per (shift, method), ignore
/// before estimate within a shift.
pub fn study_report(outcomes: &[BranchOutcome], shifts_pp: &[f64]) -> Result<StudyReport> {
    let groups = group_stats(outcomes)?;
    let mut scenarios = Vec::new();
    for &c in shifts_pp {
        for method in [RepairMethod::Ignore, RepairMethod::Estimate] {
            scenarios.push(scenario_shift(outcomes, method, c)?);
        }
    }
    Ok(StudyReport { groups, scenarios })
}

/// Random test/control split: each branch draws a uniform number and the
/// `n_test` smallest become the test group.
pub fn assign_groups<'a, I>(branches: I, n_test: usize, seed: u64) -> BTreeMap<String, Group>
where
    I: IntoIterator<Item = &'a String>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws: Vec<(f64, &String)> = branches.into_iter().map(|b| (rng.gen::<f64>(), b)).collect();
    draws.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    draws
        .into_iter()
        .enumerate()
        .map(|(i, (_, b))| (b.clone(), if i < n_test { Group::Test } else { Group::Control }))
        .collect()
}
