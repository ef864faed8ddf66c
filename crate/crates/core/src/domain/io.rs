//! CSV ingestion and serialization of transaction logs, plus the JSON
//! analysis config.
//!
//! Transaction files have the header
//! `kind,branch,product,size,day,qty,unit_price,gone_flag`. `kind` is `D`
//! (delivery) or `S` (sale); `gone_flag` is `0`, `1` or empty and is read as
//! the end state of its (branch, product). A sidecar `branch,product,gone`
//! file may supply end states instead.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Kind, SizeSet, Transaction, TransactionSet};
use crate::error::{Error, Result};
use crate::tdi::Dampening;

pub const DEFAULT_GRACE_DAYS: i64 = 28;

const COLUMNS: [&str; 8] = ["kind", "branch", "product", "size", "day", "qty", "unit_price", "gone_flag"];

fn default_sizes() -> Vec<String> {
    ["S", "M", "L", "XL"].iter().map(|s| s.to_string()).collect()
}

fn default_grace() -> i64 {
    DEFAULT_GRACE_DAYS
}

fn default_rho() -> f64 {
    1.0
}

/// Analysis settings shared by every subcommand that reads transactions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_sizes")]
    pub sizes: Vec<String>,
    /// Defaults to every size.
    #[serde(default)]
    pub main_sizes: Option<Vec<String>>,
    #[serde(default = "default_grace")]
    pub grace_days: i64,
    /// Last day of the delivery period; inferred from the data when absent.
    #[serde(default)]
    pub horizon: Option<i64>,
    #[serde(default)]
    pub dampening: Dampening,
    /// Minimum max/min TDI ratio before a branch is repacked.
    #[serde(default = "default_rho")]
    pub rho: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            sizes: default_sizes(),
            main_sizes: None,
            grace_days: DEFAULT_GRACE_DAYS,
            horizon: None,
            dampening: Dampening::default(),
            rho: 1.0,
        }
    }
}

impl AnalysisConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_slice(&bytes)?;
        cfg.size_set()?;
        if cfg.grace_days < 0 {
            return Err(Error::Config("grace_days must be non-negative".into()));
        }
        if !(cfg.rho.is_finite() && cfg.rho > 0.0) {
            return Err(Error::Config("rho must be a positive number".into()));
        }
        Ok(cfg)
    }

    pub fn size_set(&self) -> Result<SizeSet> {
        match &self.main_sizes {
            Some(main) => SizeSet::new(&self.sizes, main),
            None => SizeSet::all_main(&self.sizes),
        }
    }
}

/// Reads a transaction CSV file.
pub fn read_transactions(path: &Path, config: &AnalysisConfig) -> Result<TransactionSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_transactions_from(file, config)
}

pub fn read_transactions_from<R: Read>(reader: R, config: &AnalysisConfig) -> Result<TransactionSet> {
    let sizes = config.size_set()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut col = [usize::MAX; 8];
    for (i, name) in COLUMNS.iter().enumerate() {
        match headers.iter().position(|h| h == *name) {
            Some(p) => col[i] = p,
            None if *name == "gone_flag" => {}
            None => return Err(Error::row(1, name, "missing column")),
        }
    }

    let mut transactions = Vec::new();
    let mut end_states: BTreeMap<(String, String), bool> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(col[i]).unwrap_or("");

        let kind = match field(0) {
            "D" | "d" => Kind::Delivery,
            "S" | "s" => Kind::Sale,
            other => return Err(Error::row(row, "kind", format!("expected D or S, got `{other}`"))),
        };
        let branch = field(1);
        let product = field(2);
        if branch.is_empty() {
            return Err(Error::row(row, "branch", "empty"));
        }
        if product.is_empty() {
            return Err(Error::row(row, "product", "empty"));
        }
        let label = field(3);
        let size = sizes.index_of(label).ok_or_else(|| Error::UnknownSize {
            row,
            label: label.to_string(),
        })?;
        let day: i64 = field(4)
            .parse()
            .map_err(|_| Error::row(row, "day", format!("not an integer: `{}`", field(4))))?;
        let qty: i64 = field(5)
            .parse()
            .map_err(|_| Error::row(row, "qty", format!("not an integer: `{}`", field(5))))?;
        if qty < 1 {
            return Err(Error::row(row, "qty", format!("quantity must be positive, got {qty}")));
        }
        let qty = u32::try_from(qty).map_err(|_| Error::row(row, "qty", "quantity too large"))?;
        let unit_price: u64 = field(6).parse().map_err(|_| {
            Error::row(row, "unit_price", format!("not a non-negative integer: `{}`", field(6)))
        })?;
        if col[7] != usize::MAX {
            match field(7) {
                "" => {}
                "0" => {
                    end_states.insert((branch.to_string(), product.to_string()), false);
                }
                "1" => {
                    end_states.insert((branch.to_string(), product.to_string()), true);
                }
                other => return Err(Error::row(row, "gone_flag", format!("expected 0, 1 or empty, got `{other}`"))),
            }
        }
        transactions.push(Transaction {
            kind,
            branch: branch.to_string(),
            product: product.to_string(),
            size,
            day,
            qty,
            unit_price,
        });
    }
    Ok(TransactionSet::new(sizes, config.horizon, transactions, end_states)?.with_grace_days(config.grace_days))
}

/// Reads a `branch,product,gone` sidecar and overlays it on the set's end
/// states.
pub fn read_end_states(path: &Path, ts: &TransactionSet) -> Result<TransactionSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut end_states = ts.end_states().clone();
    #[derive(Deserialize)]
    struct Row {
        branch: String,
        product: String,
        gone: String,
    }
    for record in rdr.deserialize::<Row>() {
        let r = record?;
        let gone = match r.gone.as_str() {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(Error::Config(format!("gone must be 0 or 1, got `{other}`"))),
        };
        end_states.insert((r.branch, r.product), gone);
    }
    ts.rebuild(ts.transactions().to_vec(), end_states)
}

/// Writes the set in the transaction CSV schema. End states are carried on
/// the last row of each (branch, product).
pub fn write_transactions<W: Write>(ts: &TransactionSet, writer: W) -> Result<()> {
    let mut last_row: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for (i, t) in ts.transactions().iter().enumerate() {
        last_row.insert((&t.branch, &t.product), i);
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COLUMNS)?;
    for (i, t) in ts.transactions().iter().enumerate() {
        let key = (t.branch.as_str(), t.product.as_str());
        let flag = if last_row[&key] == i {
            match ts.end_states().get(&(t.branch.clone(), t.product.clone())) {
                Some(true) => "1",
                Some(false) => "0",
                None => "",
            }
        } else {
            ""
        };
        w.write_record([
            t.kind.code(),
            &t.branch,
            &t.product,
            ts.sizes().label(t.size),
            &t.day.to_string(),
            &t.qty.to_string(),
            &t.unit_price.to_string(),
            flag,
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
