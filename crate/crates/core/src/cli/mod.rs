//! Command-line front end. [`run`] parses arguments, dispatches to the
//! library and returns the process exit code: 0 on success, 1 for bad input
//! and 2 when an internal invariant breaks.

mod manifest;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::domain::{
    read_end_states, read_transactions, repair_estimate, repair_ignore, validate, write_transactions,
    AnalysisConfig, TransactionSet,
};
use crate::error::Error;
use crate::evaluation::{
    assign_groups, branch_outcomes, improvement_pp, study_report, Group, MetricStats, RepairMethod,
};
use crate::market_sim::{generate, MarketConfig};
use crate::prepack::{optimization_step, LotType, RepackOutcome, Variant};
use crate::robustness::{agreement_contrast, discrepancy_curve, partition_products, share_table, SubsetScheme};
use crate::tdi::tdi_profiles;

pub use manifest::{sha256_file, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "topdog", version, about = "Size scarcity analytics for pre-packed apparel")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON config: market description for `simulate`, analysis settings otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic season.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// List oversell and leftover anomalies.
    Validate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repair anomalies and write the corrected transactions.
    Repair {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        strategy: Strategy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Top-Dog-Index per branch and size.
    Tdi {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: PathBuf,
    },
    /// Subset TDI shares and the sales-profile discrepancy curve.
    Robustness {
        #[command(flatten)]
        input: Input,
        /// `shares.csv,discrepancy.csv`
        #[arg(long, value_delimiter = ',', required = true)]
        out: Vec<PathBuf>,
        /// Last day of the discrepancy curve.
        #[arg(long, default_value_t = 60)]
        last_day: i64,
    },
    /// One repacking step per branch.
    Optimize {
        #[command(flatten)]
        input: Input,
        /// `branch,size,count`; branch `*` applies to every branch.
        #[arg(long)]
        lots: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Test-vs-control study with shifted scenarios.
    Evaluate {
        #[command(flatten)]
        input: Input,
        /// `branch,group` with group test or control.
        #[arg(long, conflicts_with = "assign", required_unless_present = "assign")]
        groups: Option<PathBuf>,
        /// Randomly assign this many branches to the test group.
        #[arg(long)]
        assign: Option<usize>,
        /// Shifts in percentage points applied to the test group.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-0.0,-0.25,-0.5,-0.75,-1.0,-1.5")]
        scenarios: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Markdown summary of an `evaluate` run.
    Report {
        #[arg(long)]
        study: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Input {
    #[arg(long)]
    input: PathBuf,
    /// Sidecar `branch,product,gone` overriding inline end states.
    #[arg(long)]
    endstates: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Strategy {
    Ignore,
    Estimate,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invariant(_) | Error::Contract(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Marks an error as caused by the user's input.
fn input_err(e: Error) -> Failure {
    Failure {
        code: 1,
        message: e.to_string(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("topdog: {}", f.message);
            f.code
        }
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    manifest: RunManifest,
}

impl Ctx<'_> {
    fn out(&self, p: &Path) -> PathBuf {
        match &self.cli.out_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.cli.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn analysis_config(&mut self) -> CliResult<AnalysisConfig> {
        match &self.cli.config {
            Some(p) => {
                let cfg = AnalysisConfig::load(p).map_err(input_err)?;
                self.manifest.config(p)?;
                Ok(cfg)
            }
            None => Ok(AnalysisConfig::default()),
        }
    }

    fn load(&mut self, input: &Input) -> CliResult<(AnalysisConfig, TransactionSet)> {
        let cfg = self.analysis_config()?;
        let mut ts = read_transactions(&input.input, &cfg).map_err(input_err)?;
        self.manifest.input(&input.input)?;
        if let Some(e) = &input.endstates {
            ts = read_end_states(e, &ts).map_err(input_err)?;
            self.manifest.input(e)?;
        }
        Ok((cfg, ts))
    }

    fn finish(self, outputs: &[PathBuf]) -> CliResult<()> {
        let cli = self.cli;
        self.manifest.finish(outputs)?;
        if !cli.quiet {
            for o in outputs {
                eprintln!("wrote {}", o.display());
            }
        }
        Ok(())
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::from(Error::io(dir, e)))?;
    }
    let f = File::create(path).map_err(|e| Failure::from(Error::io(path, e)))?;
    Ok(BufWriter::new(f))
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn flush<W: Write>(mut w: csv::Writer<W>, path: &Path) -> CliResult<()> {
    w.flush().map_err(|e| Failure::from(Error::io(path, e)))
}

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let name = match &cli.command {
        Command::Simulate { .. } => "simulate",
        Command::Validate { .. } => "validate",
        Command::Repair { .. } => "repair",
        Command::Tdi { .. } => "tdi",
        Command::Robustness { .. } => "robustness",
        Command::Optimize { .. } => "optimize",
        Command::Evaluate { .. } => "evaluate",
        Command::Report { .. } => "report",
    };
    let mut ctx = Ctx {
        cli,
        manifest: RunManifest::new(name, cli.seed),
    };
    match &cli.command {
        Command::Simulate { out, truth } => simulate(ctx, out, truth),
        Command::Validate { input, out } => {
            let (_, ts) = ctx.load(input)?;
            let report = validate(&ts);
            let path = ctx.out(out);
            let mut w = csv_writer(&path)?;
            w.write_record(["branch", "product", "size", "kind", "magnitude"]).map_err(Error::from)?;
            for a in &report.anomalies {
                w.write_record([
                    a.triple.branch.as_str(),
                    &a.triple.product,
                    ts.sizes().label(a.triple.size),
                    a.kind.name(),
                    &a.magnitude.to_string(),
                ])
                .map_err(Error::from)?;
            }
            flush(w, &path)?;
            ctx.say(format!("{} anomalies in {} transactions", report.anomalies.len(), ts.len()));
            ctx.finish(&[path])
        }
        Command::Repair { input, strategy, out } => {
            let (_, ts) = ctx.load(input)?;
            let report = validate(&ts);
            let repaired = match strategy {
                Strategy::Ignore => repair_ignore(&ts, &report),
                Strategy::Estimate => {
                    let r = repair_estimate(&ts, &report);
                    if !r.unrepairable.is_empty() {
                        ctx.say(format!("{} anomalies could not be estimated", r.unrepairable.len()));
                    }
                    r.set
                }
            };
            let path = ctx.out(out);
            write_transactions(&repaired, create(&path)?)?;
            ctx.say(format!("repaired {} anomalies", report.anomalies.len()));
            ctx.finish(&[path])
        }
        Command::Tdi { input, out } => {
            let (cfg, ts) = ctx.load(input)?;
            let path = ctx.out(out);
            let mut w = csv_writer(&path)?;
            w.write_record(["branch", "size", "tdc", "fdc", "tdi", "rank"]).map_err(Error::from)?;
            for p in tdi_profiles(&ts, cfg.dampening) {
                let order = p.rank_sizes();
                let tdi = p.tdi_f64();
                for s in ts.sizes().ids() {
                    let rank = order.iter().position(|&o| o == s).expect("every size ranked") + 1;
                    w.write_record([
                        p.branch.as_str(),
                        ts.sizes().label(s),
                        &p.counts[s].tdc.to_string(),
                        &p.counts[s].fdc.to_string(),
                        &fmt6(tdi[s]),
                        &rank.to_string(),
                    ])
                    .map_err(Error::from)?;
                }
            }
            flush(w, &path)?;
            ctx.finish(&[path])
        }
        Command::Robustness { input, out, last_day } => {
            if out.len() != 2 {
                return Err(input_err(Error::Config("--out takes shares.csv,discrepancy.csv".into())));
            }
            let (cfg, ts) = ctx.load(input)?;
            let seed = cli.seed.unwrap_or(0);
            let partition = partition_products(&ts, seed);
            let scheme = SubsetScheme::standard();
            let shares_path = ctx.out(&out[0]);
            let mut w = csv_writer(&shares_path)?;
            w.write_record(["branch", "size", "d1", "d2", "d3", "d4", "d5", "d6", "d7", "mean", "median"])
                .map_err(Error::from)?;
            for row in share_table(&ts, &partition, &scheme, cfg.dampening) {
                let mut rec = vec![row.branch.clone(), ts.sizes().label(row.size).to_string()];
                rec.extend(row.shares.iter().map(|&s| fmt6(s)));
                rec.push(fmt6(row.mean));
                rec.push(fmt6(row.median));
                w.write_record(&rec).map_err(Error::from)?;
            }
            flush(w, &shares_path)?;
            let curve_path = ctx.out(&out[1]);
            let mut w = csv_writer(&curve_path)?;
            w.write_record(["day", "avg_delta", "coverage"]).map_err(Error::from)?;
            for p in discrepancy_curve(&ts, &partition, *last_day) {
                w.write_record([p.day.to_string(), p.avg_delta.map(fmt6).unwrap_or_default(), p.coverage.to_string()])
                    .map_err(Error::from)?;
            }
            flush(w, &curve_path)?;
            let contrast = agreement_contrast(&ts, &partition, &scheme, cfg.dampening, 0);
            let show = |m: Option<f64>| m.map_or("n/a".to_string(), |v| format!("{v:.3}"));
            ctx.say(format!(
                "mean Kendall tau across complementary subsets: TDI {}, day-0 sales profile {}",
                show(contrast.tdi_mean),
                show(contrast.profile_mean)
            ));
            ctx.finish(&[shares_path, curve_path])
        }
        Command::Optimize { input, lots, out } => {
            let (cfg, ts) = ctx.load(input)?;
            let lot_map = read_lots(lots, &ts).map_err(input_err)?;
            ctx.manifest.input(lots)?;
            let plans = optimization_step(&ts, &lot_map, cfg.dampening, cfg.rho);
            let path = ctx.out(out);
            let mut w = csv_writer(&path)?;
            w.write_record(["branch", "variant", "remove", "add", "resulting_lot"]).map_err(Error::from)?;
            let sizes = ts.sizes();
            for (branch, plan) in &plans {
                for v in [Variant::Advertised, Variant::Plain] {
                    let rec = match plan.outcome(v) {
                        RepackOutcome::Swap { remove, add, lot } => [
                            branch.clone(),
                            v.name().to_string(),
                            sizes.label(*remove).to_string(),
                            sizes.label(*add).to_string(),
                            lot.display(sizes),
                        ],
                        RepackOutcome::NoAction { .. } => [
                            branch.clone(),
                            v.name().to_string(),
                            String::new(),
                            String::new(),
                            lot_map[branch].display(sizes),
                        ],
                    };
                    w.write_record(&rec).map_err(Error::from)?;
                }
            }
            flush(w, &path)?;
            ctx.finish(&[path])
        }
        Command::Evaluate {
            input,
            groups,
            assign,
            scenarios,
            out,
        } => evaluate(ctx, input, groups.as_deref(), *assign, scenarios, out),
        Command::Report { study, out } => report(ctx, study, out),
    }
}

fn simulate(mut ctx: Ctx<'_>, out: &Path, truth: &Path) -> CliResult<()> {
    let cfg_path = ctx
        .cli
        .config
        .clone()
        .ok_or_else(|| input_err(Error::Config("simulate needs --config market.json".into())))?;
    let bytes = std::fs::read(&cfg_path).map_err(|e| input_err(Error::io(&cfg_path, e)))?;
    let mut market: MarketConfig = serde_json::from_slice(&bytes).map_err(|e| input_err(e.into()))?;
    if let Some(seed) = ctx.cli.seed {
        market.seed = seed;
    }
    market.validate().map_err(input_err)?;
    ctx.manifest.config(&cfg_path)?;
    ctx.manifest.seed = Some(market.seed);
    let sim = generate(&market)?;
    let data_path = ctx.out(out);
    write_transactions(&sim.transactions, create(&data_path)?)?;
    let truth_path = ctx.out(truth);
    let mut w = create(&truth_path)?;
    serde_json::to_writer_pretty(&mut w, &sim.truth).map_err(Error::from)?;
    w.write_all(b"\n").map_err(|e| Failure::from(Error::io(&truth_path, e)))?;
    drop(w);
    ctx.say(format!(
        "{} transactions, {} customers",
        sim.transactions.len(),
        sim.demand_log.len()
    ));
    ctx.finish(&[data_path, truth_path])
}

fn read_lots(path: &Path, ts: &TransactionSet) -> crate::error::Result<BTreeMap<String, LotType>> {
    #[derive(Deserialize)]
    struct Row {
        branch: String,
        size: String,
        count: u32,
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut counts: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    for (i, rec) in rdr.deserialize::<Row>().enumerate() {
        let r = rec?;
        let s = ts.sizes().index_of(&r.size).ok_or(Error::UnknownSize {
            row: i as u64 + 2,
            label: r.size.clone(),
        })?;
        counts.entry(r.branch).or_insert_with(|| vec![0; ts.sizes().len()])[s] = r.count;
    }
    let mut lots = BTreeMap::new();
    if let Some(default) = counts.remove("*") {
        let lot = LotType::new(default)?;
        for b in ts.branches() {
            lots.insert(b.clone(), lot.clone());
        }
    }
    for (b, c) in counts {
        lots.insert(b, LotType::new(c)?);
    }
    Ok(lots)
}

fn read_groups(path: &Path) -> crate::error::Result<BTreeMap<String, Group>> {
    #[derive(Deserialize)]
    struct Row {
        branch: String,
        group: String,
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut out = BTreeMap::new();
    for (i, rec) in rdr.deserialize::<Row>().enumerate() {
        let r = rec?;
        let g = r.group.parse().map_err(|_| Error::row(i as u64 + 2, "group", "expected test or control"))?;
        out.insert(r.branch, g);
    }
    Ok(out)
}

/// `study.csv` → `study.<suffix>.csv`
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

#[derive(Debug, Serialize, Deserialize)]
struct StudyRow {
    scenario: String,
    method: String,
    shift_pp: f64,
    control_rank_sum: f64,
    test_rank_sum: f64,
    certainty: f64,
    exact: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct GroupRow {
    group: String,
    branches: usize,
    metric: String,
    mean: f64,
    min: f64,
    std: f64,
}

const METRICS: [&str; 4] = ["yield_ignore", "yield_estimate", "last_price_ignore", "last_price_estimate"];

fn evaluate(
    mut ctx: Ctx<'_>,
    input: &Input,
    groups: Option<&Path>,
    assign: Option<usize>,
    scenarios: &[f64],
    out: &Path,
) -> CliResult<()> {
    let (_, ts) = ctx.load(input)?;
    let mut outputs = Vec::new();
    let study_path = ctx.out(out);
    let groups = match (groups, assign) {
        (Some(g), _) => {
            let map = read_groups(g).map_err(input_err)?;
            ctx.manifest.input(g)?;
            map
        }
        (None, Some(n)) => {
            if n == 0 || n >= ts.branches().len() {
                return Err(input_err(Error::Config(format!(
                    "--assign needs between 1 and {} test branches",
                    ts.branches().len().saturating_sub(1)
                ))));
            }
            let map = assign_groups(ts.branches(), n, ctx.cli.seed.unwrap_or(0));
            let path = sibling(&study_path, "assignment");
            let mut w = csv_writer(&path)?;
            w.write_record(["branch", "group"]).map_err(Error::from)?;
            for (b, g) in &map {
                w.write_record([b.as_str(), g.name()]).map_err(Error::from)?;
            }
            flush(w, &path)?;
            outputs.push(path);
            map
        }
        (None, None) => unreachable!("clap requires one of --groups and --assign"),
    };
    let (outcomes, excluded) = branch_outcomes(&ts, &groups);
    for (b, why) in &excluded {
        ctx.say(format!("excluded branch {b}: {why}"));
    }
    let study = study_report(&outcomes, scenarios).map_err(input_err)?;

    let mut w = csv_writer(&study_path)?;
    for s in &study.scenarios {
        w.serialize(StudyRow {
            scenario: s.label(),
            method: s.method.name().to_string(),
            shift_pp: s.shift_pp,
            control_rank_sum: s.control_rank_sum,
            test_rank_sum: s.test_rank_sum,
            certainty: (s.certainty * 1e6).round() / 1e6,
            exact: s.exact,
        })
        .map_err(Error::from)?;
    }
    flush(w, &study_path)?;

    let outcomes_path = sibling(&study_path, "outcomes");
    let mut w = csv_writer(&outcomes_path)?;
    w.write_record(["branch", "group", "yield_ignore", "yield_estimate", "last_price_ignore", "last_price_estimate"])
        .map_err(Error::from)?;
    for o in &outcomes {
        w.write_record([
            o.branch.clone(),
            o.group.name().to_string(),
            fmt6(o.yield_ignore),
            fmt6(o.yield_estimate),
            fmt6(o.last_price_ignore),
            fmt6(o.last_price_estimate),
        ])
        .map_err(Error::from)?;
    }
    flush(w, &outcomes_path)?;

    let groups_path = sibling(&study_path, "groups");
    let mut w = csv_writer(&groups_path)?;
    for g in &study.groups {
        let stats = [g.yield_ignore, g.yield_estimate, g.last_price_ignore, g.last_price_estimate];
        for (metric, s) in METRICS.iter().zip(stats) {
            w.serialize(GroupRow {
                group: g.group.name().to_string(),
                branches: g.branches,
                metric: metric.to_string(),
                mean: (s.mean * 1e6).round() / 1e6,
                min: (s.min * 1e6).round() / 1e6,
                std: (s.std * 1e6).round() / 1e6,
            })
            .map_err(Error::from)?;
        }
    }
    flush(w, &groups_path)?;

    outputs.extend([study_path, outcomes_path, groups_path]);
    ctx.finish(&outputs)
}

fn report(mut ctx: Ctx<'_>, study: &Path, out: &Path) -> CliResult<()> {
    let groups_path = sibling(study, "groups");
    let rows: Vec<StudyRow> = read_csv(study)?;
    let groups: Vec<GroupRow> = read_csv(&groups_path)?;
    ctx.manifest.input(study)?;
    ctx.manifest.input(&groups_path)?;

    let stats = |group: &str, metric: &str| -> CliResult<(usize, MetricStats)> {
        groups
            .iter()
            .find(|g| g.group == group && g.metric == metric)
            .map(|g| (g.branches, MetricStats { mean: g.mean, min: g.min, std: g.std }))
            .ok_or_else(|| input_err(Error::Config(format!("{} lacks {group}/{metric}", groups_path.display()))))
    };

    let mut md = String::new();
    md.push_str("# Study report\n\n## Groups\n\n");
    md.push_str("| Metric | Group | Branches | Mean | Min | Std |\n|---|---|---:|---:|---:|---:|\n");
    for metric in METRICS {
        for group in ["test", "control"] {
            let (n, s) = stats(group, metric)?;
            md.push_str(&format!(
                "| {metric} | {group} | {n} | {:.2}% | {:.2}% | {:.2} pp |\n",
                100.0 * s.mean,
                100.0 * s.min,
                100.0 * s.std
            ));
        }
    }
    md.push_str("\n| Metric | Improvement (test − control) |\n|---|---:|\n");
    for metric in METRICS {
        let (_, t) = stats("test", metric)?;
        let (_, c) = stats("control", metric)?;
        md.push_str(&format!("| {metric} | {:+.2} pp |\n", improvement_pp(&t, &c)));
    }

    md.push_str("\n## Rank sums and certainties\n\n");
    md.push_str("| |");
    for r in &rows {
        md.push_str(&format!(" {} |", r.scenario));
    }
    md.push_str("\n|---|");
    md.push_str(&"---:|".repeat(rows.len()));
    md.push('\n');
    let line = |label: &str, f: &dyn Fn(&StudyRow) -> String| {
        let mut s = format!("| {label} |");
        for r in &rows {
            s.push_str(&format!(" {} |", f(r)));
        }
        s.push('\n');
        s
    };
    let sum = |x: f64| if x.fract() == 0.0 { format!("{x:.0}") } else { format!("{x:.1}") };
    md.push_str(&line("Control", &|r| sum(r.control_rank_sum)));
    md.push_str(&line("Test", &|r| sum(r.test_rank_sum)));
    md.push_str(&line("Certainty", &|r| format!("{:.1}%", 100.0 * r.certainty)));
    if rows.iter().any(|r| !r.exact) {
        md.push_str("\nCertainties of tied or large groups come from a seeded permutation test.\n");
    }
    if rows.iter().any(|r| RepairMethod::Estimate.name() == r.method) {
        md.push_str("\n`i_c`: ignore repair, `e_c`: estimate repair, `c`: shift of the test group in percentage points.\n");
    }

    let path = ctx.out(out);
    let mut w = create(&path)?;
    w.write_all(md.as_bytes()).map_err(|e| Failure::from(Error::io(&path, e)))?;
    drop(w);
    ctx.finish(&[path])
}

fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let file = File::open(path).map_err(|e| input_err(Error::io(path, e)))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| input_err(e.into()))
}
