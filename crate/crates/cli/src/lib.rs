//! The `rhem` command line: statistics export, model fitting, outcome models,
//! risk-set diagnostics and simulation, driven by a TOML file and/or flags.

pub mod config;
pub mod error;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rhem::estimate::{fit_replicated, fit_rom, RomOptions};
use rhem::hyperstore::io::{read_event_log_file, write_event_log, EventLog, LoadOptions};
use rhem::hyperstore::{Event, History, NodeRegistry};
use rhem::sampling::{build_strata, Split, StrataConfig};
use rhem::simulate::{self, CandidatePolicy, CoauthorConfig, OutcomeModel, SimConfig};
use rhem::statistics::{CovariateTable, StatisticSpec};
use rhem::CoxOptions;

pub use config::{Format, Resolved, RunConfig, RunFlags, SimSection};
pub use error::CliError;
use report::{json, FitReport, RomReport, SampleCheckReport, SizeSummary, Warnings};

#[derive(Debug, Parser)]
#[command(name = "rhem", version, about = "Relational hyperevent and outcome models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a sampled Cox model, optionally over several resamples
    Fit(RunFlags),
    /// Fit a least-squares model of event outcomes
    Rom(RunFlags),
    /// Export case/control statistics as CSV
    Stats(RunFlags),
    /// Compare observed and sampled hyperedge sizes
    SampleCheck(RunFlags),
    /// Generate a synthetic event log
    Simulate(SimFlags),
    /// Rank fit reports by AIC (same risk set and data only)
    Compare(CompareFlags),
}

#[derive(Clone, Debug, Default, Args)]
pub struct SimFlags {
    /// TOML file with a `[simulate]` table
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// model | meeting | coauthor
    #[arg(long)]
    pub generator: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Roster size
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long = "event-count")]
    pub event_count: Option<usize>,
    #[arg(long)]
    pub directed: bool,
    /// Statistic of the model generator; repeatable
    #[arg(long = "spec")]
    pub specs: Vec<String>,
    /// Coefficient of each --spec, in order
    #[arg(long = "theta", allow_hyphen_values = true)]
    pub theta: Vec<f64>,
    /// full | conditional-size | repeated-plus-innovation
    #[arg(long)]
    pub policy: Option<String>,
    /// Event sizes, cycled over steps; repeatable
    #[arg(long = "size")]
    pub sizes: Vec<usize>,
    /// Chance of an innovation step
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Event log path (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct CompareFlags {
    /// JSON fit reports
    #[arg(required = true, num_args = 2..)]
    pub reports: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Config(e.to_string())),
    };
    match cli.command {
        Command::Fit(f) => cmd_fit(&f.merge("fit")?.resolve(true)?),
        Command::Rom(f) => cmd_rom(&f.merge("rom")?.resolve(true)?),
        Command::Stats(f) => cmd_stats(&f.merge("stats")?.resolve(true)?),
        Command::SampleCheck(f) => cmd_sample_check(&f.merge("sample-check")?.resolve(false)?),
        Command::Simulate(f) => cmd_simulate(&f),
        Command::Compare(f) => cmd_compare(&f),
    }
}

struct Data {
    log: EventLog,
    covariates: Option<CovariateTable>,
    nodes: usize,
}

fn load(r: &Resolved) -> Result<Data, CliError> {
    let log = read_event_log_file(&r.events, LoadOptions { directed: r.directed, max_event_size: r.max_size })
        .map_err(|e| CliError::Config(format!("{}: {e}", r.events.display())))?;
    let covariates = match &r.covariates {
        Some(p) => Some(
            CovariateTable::load_file(p, &log.registry)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    if !log.has_outcomes {
        if let Some(s) = r.parsed_specs.iter().find(|s| s.kind.needs_outcomes()) {
            return Err(CliError::Config(format!("`{}` needs outcomes, but the event log has none", s.label)));
        }
    }
    let nodes = log.registry.len().max(r.node_count.unwrap_or(0));
    Ok(Data { log, covariates, nodes })
}

fn base_warnings(data: &Data) -> Warnings {
    let mut w = Warnings { truncated_events: data.log.truncated, ..Default::default() };
    if data.log.truncated > 0 {
        w.note(format!("{} events truncated to the maximum event size", data.log.truncated));
    }
    w
}

/// Number of events whose hyperedge occurred strictly earlier.
fn count_repeated(events: &[Event], directed: bool) -> Result<usize, CliError> {
    let mut history = History::new(directed);
    let mut repeated = 0;
    let mut start = 0;
    while start < events.len() {
        let t = events[start].time;
        let end = start + events[start..].iter().take_while(|e| e.time == t).count();
        let snap = history.current();
        repeated += events[start..end].iter().filter(|e| snap.activity(&e.hyperedge) > 0).count();
        for e in &events[start..end] {
            let bare = Event { outcome: None, ..e.clone() };
            history.push_event(bare).map_err(|e| CliError::Config(e.to_string()))?;
        }
        start = end;
    }
    Ok(repeated)
}

fn strata_split(r: &Resolved, data: &Data) -> Result<Split, CliError> {
    let split = r.strata_split(data.nodes)?;
    r.check_split_specs(split)?;
    if split == Split::Repeated && count_repeated(&data.log.events, r.directed)? == 0 {
        return Err(CliError::Config("split = repeated, but no event repeats an earlier hyperedge".into()));
    }
    Ok(split)
}

fn strata_config<'a>(r: &'a Resolved, data: &'a Data, split: Split) -> StrataConfig<'a> {
    StrataConfig::new(r.risk_set, &r.parsed_specs)
        .seed(r.seed)
        .split(split)
        .universe(r.universe)
        .covariates(data.covariates.as_ref())
        .node_count(data.nodes)
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(body.as_bytes()).and_then(|()| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Config(e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

fn timing(what: &str, start: Instant) {
    eprintln!("{what}: {:.3}s", start.elapsed().as_secs_f64());
}

pub fn cmd_fit(r: &Resolved) -> Result<(), CliError> {
    let data = load(r)?;
    let split = strata_split(r, &data)?;
    let config = strata_config(r, &data, split);
    let start = Instant::now();
    let result = fit_replicated(&data.log.events, r.directed, &config, r.replications, &CoxOptions::default())?;
    timing("strata + fit", start);

    let mut warnings = base_warnings(&data);
    for rep in &result.replications {
        warnings.dropped_strata += rep.dropped_strata;
        warnings.underfilled_strata += rep.underfilled_strata;
        warnings.excluded_by_split = rep.excluded_by_split;
        if let Some(e) = &rep.error {
            warnings.failed_replications += 1;
            warnings.note(format!("replication {} failed: {e}", rep.index));
        }
    }
    if warnings.dropped_strata > 0 {
        warnings.note(format!("{} strata dropped over all replications", warnings.dropped_strata));
    }
    if warnings.underfilled_strata > 0 {
        warnings.note(format!("{} strata under-filled over all replications", warnings.underfilled_strata));
    }
    let first_error = result.replications.iter().find_map(|r| r.error.clone());
    let report = FitReport {
        config: r.clone(),
        split: split.name().into(),
        n_nodes: data.nodes,
        n_input_events: data.log.events.len(),
        warnings,
        result,
    };
    let body = match r.format {
        Format::Json => json(&report),
        Format::Text => report.text(),
    };
    emit(r.out.as_deref(), &body)?;
    if report.result.summary.successes == 0 {
        return Err(CliError::Estimation(first_error.unwrap_or_else(|| "no replication could be fitted".into())));
    }
    Ok(())
}

pub fn cmd_rom(r: &Resolved) -> Result<(), CliError> {
    let data = load(r)?;
    if !data.log.has_outcomes {
        return Err(CliError::Config("the event log has no outcomes".into()));
    }
    let split = r.split.unwrap_or(Split::All);
    r.check_split_specs(split)?;
    let opts =
        RomOptions { split, covariates: data.covariates.as_ref(), universe: r.universe, node_count: Some(data.nodes) };
    let start = Instant::now();
    let fit = fit_rom(&data.log.events, r.directed, &r.parsed_specs, &opts)?;
    timing("outcome model", start);
    let mut warnings = base_warnings(&data);
    for d in &fit.dropped {
        warnings.note(format!("`{d}` dropped as collinear"));
    }
    let report = RomReport {
        config: r.clone(),
        split: split.name().into(),
        n_nodes: data.nodes,
        n_input_events: data.log.events.len(),
        warnings,
        fit,
    };
    let body = match r.format {
        Format::Json => json(&report),
        Format::Text => report.text(),
    };
    emit(r.out.as_deref(), &body)
}

pub fn cmd_stats(r: &Resolved) -> Result<(), CliError> {
    let data = load(r)?;
    let split = strata_split(r, &data)?;
    let start = Instant::now();
    let set = build_strata(&data.log.events, r.directed, &strata_config(r, &data, split), 0)?;
    timing("strata", start);
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Config(e.to_string());
    let mut header = vec!["stratum".to_owned(), "event".into(), "time".into(), "case".into(), "hyperedge".into()];
    header.extend(r.specs.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (s, st) in set.strata.iter().enumerate() {
        for (i, h) in st.hyperedges().enumerate() {
            let mut row = vec![
                s.to_string(),
                st.event_ordinal.to_string(),
                st.time.to_string(),
                u8::from(i == 0).to_string(),
                h.display(&data.log.registry).to_string(),
            ];
            row.extend(st.stats.row(i).iter().map(f64::to_string));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    if set.dropped > 0 || set.underfilled > 0 {
        log::warn!("{} strata dropped, {} under-filled", set.dropped, set.underfilled);
    }
    emit(r.out.as_deref(), &String::from_utf8(bytes).expect("utf-8 csv"))
}

pub fn cmd_sample_check(r: &Resolved) -> Result<(), CliError> {
    let data = load(r)?;
    let split = strata_split(r, &data)?;
    let set = build_strata(&data.log.events, r.directed, &strata_config(r, &data, split), 0)?;
    let mut warnings = base_warnings(&data);
    warnings.dropped_strata = set.dropped;
    warnings.underfilled_strata = set.underfilled;
    warnings.excluded_by_split = set.excluded_by_split;
    let report = SampleCheckReport {
        config: r.clone(),
        split: split.name().into(),
        strata: set.strata.len(),
        warnings,
        cases: SizeSummary::from_sizes(set.strata.iter().map(|s| s.case.total_size())),
        controls: SizeSummary::from_sizes(set.strata.iter().flat_map(|s| &s.controls).map(|h| h.total_size())),
    };
    let body = match r.format {
        Format::Json => json(&report),
        Format::Text => report.text(),
    };
    emit(r.out.as_deref(), &body)
}

fn sim_error(m: impl Into<String>) -> CliError {
    CliError::Config(m.into())
}

fn parse_specs(items: &[String]) -> Result<Vec<StatisticSpec>, CliError> {
    StatisticSpec::parse_list(items).map_err(|e| CliError::Config(e.to_string()))
}

pub fn cmd_simulate(f: &SimFlags) -> Result<(), CliError> {
    let file = match &f.config {
        Some(p) => config::read_config(p)?,
        None => RunConfig::default(),
    };
    let mut s = file.simulate.clone().unwrap_or_default();
    if f.generator.is_some() {
        s.generator = f.generator.clone();
    }
    if f.nodes.is_some() {
        s.node_count = f.nodes;
    }
    if f.event_count.is_some() {
        s.event_count = f.event_count;
    }
    if f.directed {
        s.directed = Some(true);
    }
    if !f.specs.is_empty() {
        s.specs = f.specs.clone();
    }
    if !f.theta.is_empty() {
        s.theta = f.theta.clone();
    }
    if f.policy.is_some() {
        s.policy = f.policy.clone();
    }
    if !f.sizes.is_empty() {
        s.sizes = f.sizes.clone();
    }
    if f.epsilon.is_some() {
        s.epsilon = f.epsilon;
    }
    let seed = f.seed.or(file.seed).unwrap_or(0);
    let out = f.out.clone().or(file.out.clone());

    let start = Instant::now();
    let (events, directed, nodes) = match s.generator.as_deref().unwrap_or("model") {
        "meeting" => (simulate::make_meeting_like(seed), false, simulate::MEETING_NODES),
        "coauthor" => {
            let d = CoauthorConfig::default();
            let cfg = CoauthorConfig {
                events: s.event_count.unwrap_or(d.events),
                nodes: s.node_count.unwrap_or(d.nodes),
                mean_size: s.mean_size.unwrap_or(d.mean_size),
                repeat_share: s.repeat_share.unwrap_or(d.repeat_share),
                periods: s.periods.unwrap_or(d.periods),
                seed,
                ..d
            };
            (simulate::make_coauthor_like(&cfg), false, cfg.nodes)
        }
        "model" => {
            let node_count = s.node_count.ok_or_else(|| sim_error("simulate: node_count missing"))?;
            let directed = s.directed.unwrap_or(false);
            let policy = match s.policy.as_deref().unwrap_or("full").replace('_', "-").as_str() {
                "full" => CandidatePolicy::Full,
                "conditional-size" => CandidatePolicy::ConditionalSize { sizes: s.sizes.clone() },
                "repeated-plus-innovation" => CandidatePolicy::RepeatedPlusInnovation {
                    epsilon: s.epsilon.ok_or_else(|| sim_error("simulate: epsilon missing"))?,
                    sizes: s.sizes.clone(),
                },
                other => return Err(sim_error(format!("simulate: unknown policy `{other}`"))),
            };
            let outcome = match &s.outcome {
                Some(o) => Some(OutcomeModel {
                    specs: parse_specs(&o.specs)?,
                    coefficients: o.coefficients.clone(),
                    noise_sd: o.noise_sd,
                }),
                None => None,
            };
            let cfg = SimConfig {
                node_count,
                event_count: s.event_count.ok_or_else(|| sim_error("simulate: event_count missing"))?,
                directed,
                specs: parse_specs(&s.specs)?,
                theta: s.theta.clone(),
                policy,
                outcome,
                seed,
            };
            (simulate::simulate(&cfg).map_err(rhem::Error::from)?, directed, node_count)
        }
        other => return Err(sim_error(format!("simulate: unknown generator `{other}`"))),
    };
    timing("simulation", start);
    let registry = NodeRegistry::numbered("n", nodes);
    let mut buf = Vec::new();
    write_event_log(&mut buf, &registry, &events, directed).map_err(|e| CliError::Config(e.to_string()))?;
    emit(out.as_deref(), &String::from_utf8(buf).expect("utf-8 csv"))
}

#[derive(serde::Serialize)]
struct Ranked {
    report: String,
    specs: Vec<String>,
    aic: Option<f64>,
    log_likelihood: Option<f64>,
    k: usize,
}

/// Ranks reports by the mean AIC of their converged replications. Reports
/// built on different risk sets, splits or event logs are refused.
pub fn cmd_compare(f: &CompareFlags) -> Result<(), CliError> {
    let mut rows = Vec::new();
    let mut key: Option<(String, String, String)> = None;
    for p in &f.reports {
        let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        let field =
            |path: &[&str]| path.iter().try_fold(&v, |acc, k| acc.get(k)).and_then(|x| x.as_str()).map(str::to_owned);
        let (Some(policy), Some(split), Some(events)) =
            (field(&["result", "policy"]), field(&["split"]), field(&["config", "events"]))
        else {
            return Err(CliError::Config(format!("{} is not a fit report", p.display())));
        };
        let this = (policy, split, events);
        match &key {
            None => key = Some(this),
            Some(k) if *k != this => {
                return Err(CliError::Config(format!(
                    "refusing to rank AIC across different data: {} uses risk set {} / split {} on {}, expected {} / {} on {}",
                    p.display(),
                    this.0,
                    this.1,
                    this.2,
                    k.0,
                    k.1,
                    k.2
                )))
            }
            Some(_) => {}
        }
        let fits: Vec<&serde_json::Value> = v["result"]["replications"]
            .as_array()
            .map(|a| a.iter().filter_map(|r| r.get("fit")).filter(|f| f["converged"] == true).collect())
            .unwrap_or_default();
        let mean = |name: &str| {
            let xs: Vec<f64> = fits.iter().filter_map(|f| f[name].as_f64()).collect();
            (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
        };
        let specs: Vec<String> = v["config"]["specs"]
            .as_array()
            .map(|a| a.iter().filter_map(|s| s.as_str().map(str::to_owned)).collect())
            .unwrap_or_default();
        rows.push(Ranked {
            report: p.display().to_string(),
            k: specs.len(),
            specs,
            aic: mean("aic"),
            log_likelihood: mean("log_likelihood"),
        });
    }
    rows.sort_by(|a, b| a.aic.unwrap_or(f64::INFINITY).total_cmp(&b.aic.unwrap_or(f64::INFINITY)));
    emit(f.out.as_deref(), &json(&rows))
}
