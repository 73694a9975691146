use std::path::{Path, PathBuf};

use clap::Args;
use rhem::sampling::{NodePool, RiskSetKind, RiskSetPolicy, Split};
use rhem::statistics::{NodeUniverse, StatKind, StatisticSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Networks above this many nodes need an explicit first/repeated split.
pub const LARGE_NETWORK: usize = 10_000;
pub const DEFAULT_CONTROLS: usize = 10;

/// Settings shared by the stratum-building commands, as read from a TOML file.
/// Every field may also be given on the command line; flags win.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub events: Option<PathBuf>,
    pub covariates: Option<PathBuf>,
    pub directed: Option<bool>,
    pub specs: Vec<String>,
    pub risk_set: Option<String>,
    pub controls: Option<usize>,
    pub replications: Option<u32>,
    pub seed: Option<u64>,
    pub split: Option<String>,
    pub pool: Option<String>,
    pub universe: Option<String>,
    pub max_size: Option<usize>,
    pub node_count: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub simulate: Option<SimSection>,
}

/// `[simulate]` table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    /// `model` (default), `meeting` or `coauthor`.
    pub generator: Option<String>,
    pub node_count: Option<usize>,
    pub event_count: Option<usize>,
    pub directed: Option<bool>,
    pub specs: Vec<String>,
    pub theta: Vec<f64>,
    /// `full`, `conditional-size` or `repeated-plus-innovation`.
    pub policy: Option<String>,
    pub sizes: Vec<usize>,
    pub epsilon: Option<f64>,
    pub outcome: Option<OutcomeSection>,
    pub mean_size: Option<f64>,
    pub repeat_share: Option<f64>,
    pub periods: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeSection {
    pub specs: Vec<String>,
    pub coefficients: Vec<f64>,
    pub noise_sd: f64,
}

/// Flags common to fit, rom, stats and sample-check.
#[derive(Clone, Debug, Default, Args)]
pub struct RunFlags {
    /// TOML run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Event log (CSV)
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Node covariate table (CSV)
    #[arg(long)]
    pub covariates: Option<PathBuf>,
    /// Read a directed event log
    #[arg(long)]
    pub directed: bool,
    /// Statistic, e.g. `subrep(2):mean`; repeatable, replaces the config list
    #[arg(long = "spec")]
    pub specs: Vec<String>,
    /// full | unconstrained | conditional-size | repeated
    #[arg(long)]
    pub risk_set: Option<String>,
    /// Controls per event
    #[arg(long)]
    pub controls: Option<usize>,
    /// Independent control samples, each fitted separately
    #[arg(long)]
    pub replications: Option<u32>,
    /// Sampling seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// all | first | repeated
    #[arg(long)]
    pub split: Option<String>,
    /// active | roster
    #[arg(long)]
    pub pool: Option<String>,
    /// Node set for closure normalizers: roster | active
    #[arg(long)]
    pub universe: Option<String>,
    /// Participants kept per event side
    #[arg(long)]
    pub max_size: Option<usize>,
    /// Roster size when it exceeds the nodes seen in the log
    #[arg(long)]
    pub node_count: Option<usize>,
    /// Report path (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// json | text
    #[arg(long)]
    pub format: Option<String>,
}

pub fn read_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl RunFlags {
    /// File values overridden by the flags that were given.
    pub fn merge(&self, command: &str) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => read_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(cmd) = &c.command {
            if cmd != command {
                return Err(CliError::Config(format!("config is for `{cmd}`, not `{command}`")));
            }
        }
        // relative paths in a config file are relative to the file
        if let Some(dir) = self.config.as_deref().and_then(Path::parent) {
            for p in [&mut c.events, &mut c.covariates, &mut c.out].into_iter().flatten() {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        macro_rules! take {
            ($($f:ident),*) => {$(
                if self.$f.is_some() {
                    c.$f = self.$f.clone();
                }
            )*};
        }
        take!(
            events,
            covariates,
            risk_set,
            controls,
            replications,
            seed,
            split,
            pool,
            universe,
            max_size,
            node_count,
            out,
            format
        );
        if self.directed {
            c.directed = Some(true);
        }
        if !self.specs.is_empty() {
            c.specs = self.specs.clone();
        }
        c.command = Some(command.to_owned());
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

/// A validated run configuration.
#[derive(Clone, Debug, Serialize)]
pub struct Resolved {
    pub command: String,
    pub events: PathBuf,
    pub covariates: Option<PathBuf>,
    pub directed: bool,
    pub specs: Vec<String>,
    pub policy: String,
    pub controls: usize,
    pub replications: u32,
    pub seed: u64,
    pub split: Option<Split>,
    pub pool: NodePool,
    pub universe: NodeUniverse,
    pub max_size: usize,
    pub node_count: Option<usize>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub parsed_specs: Vec<StatisticSpec>,
    #[serde(skip)]
    pub risk_set: RiskSetPolicy,
}

fn parse<T: std::str::FromStr>(value: Option<&str>, default: T, what: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    match value {
        None => Ok(default),
        Some(s) => s.parse().map_err(|e| CliError::Config(format!("{what}: {e}"))),
    }
}

impl RunConfig {
    pub fn resolve(&self, need_specs: bool) -> Result<Resolved, CliError> {
        let command = self.command.clone().unwrap_or_default();
        let events = self.events.clone().ok_or_else(|| CliError::Config("no event log given (--events)".into()))?;
        if !events.is_file() {
            return Err(CliError::Config(format!("event log {} does not exist", events.display())));
        }
        if let Some(c) = &self.covariates {
            if !c.is_file() {
                return Err(CliError::Config(format!("covariate table {} does not exist", c.display())));
            }
        }
        if need_specs && self.specs.is_empty() {
            return Err(CliError::Config("no statistics given (--spec)".into()));
        }
        let directed = self.directed.unwrap_or(false);
        let parsed_specs = StatisticSpec::parse_list(&self.specs).map_err(|e| CliError::Config(e.to_string()))?;
        for s in &parsed_specs {
            if !s.kind.applies_to(directed) {
                let net = if directed { "directed" } else { "undirected" };
                return Err(CliError::Config(format!("`{}` is not defined for {net} networks", s.label)));
            }
            if let StatKind::Closure { l, .. } = s.kind {
                if l > 1 {
                    return Err(CliError::Config(format!("`{}`: closure order l > 1 is not available here", s.label)));
                }
            }
        }
        let kind: RiskSetKind = parse(self.risk_set.as_deref(), RiskSetKind::Unconstrained, "risk_set")?;
        let pool_default = if kind == RiskSetKind::Full { NodePool::Roster } else { NodePool::Active };
        let pool: NodePool = parse(self.pool.as_deref(), pool_default, "pool")?;
        let universe = match self.universe.as_deref().map(str::to_ascii_lowercase).as_deref() {
            None | Some("roster") => NodeUniverse::Roster,
            Some("active") => NodeUniverse::Active,
            Some(other) => return Err(CliError::Config(format!("universe: unknown value `{other}`"))),
        };
        let controls = self.controls.unwrap_or(DEFAULT_CONTROLS);
        let risk_set =
            RiskSetPolicy { kind, m: if kind == RiskSetKind::Full { 0 } else { controls }, ..RiskSetPolicy::full() }
                .with_pool(pool);
        risk_set.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let split = match &self.split {
            Some(s) => Some(s.parse::<Split>().map_err(|e| CliError::Config(e.to_string()))?),
            None => None,
        };
        let format = match self.format.as_deref() {
            None | Some("json") => Format::Json,
            Some("text") => Format::Text,
            Some(other) => return Err(CliError::Config(format!("format: unknown value `{other}`"))),
        };
        let replications = self.replications.unwrap_or(1);
        if replications == 0 {
            return Err(CliError::Config("replications must be at least 1".into()));
        }
        Ok(Resolved {
            command,
            events,
            covariates: self.covariates.clone(),
            directed,
            specs: parsed_specs.iter().map(|s| s.label.clone()).collect(),
            policy: risk_set.to_string(),
            controls: risk_set.m,
            replications,
            seed: self.seed.unwrap_or(0),
            split,
            pool,
            universe,
            max_size: self.max_size.unwrap_or(rhem::hyperstore::DEFAULT_MAX_EVENT_SIZE),
            node_count: self.node_count,
            out: self.out.clone(),
            format,
            parsed_specs,
            risk_set,
        })
    }
}

impl Resolved {
    /// Split for stratum building. Repeated risk sets and large networks
    /// need it spelled out.
    pub fn strata_split(&self, nodes: usize) -> Result<Split, CliError> {
        let repeated = self.risk_set.kind == RiskSetKind::Repeated;
        match self.split {
            None if repeated => Err(CliError::Config("risk_set = repeated needs an explicit split = repeated".into())),
            Some(s) if repeated && s != Split::Repeated => {
                Err(CliError::Config("risk_set = repeated only applies to split = repeated".into()))
            }
            None | Some(Split::All) if nodes > LARGE_NETWORK => Err(CliError::Config(format!(
                "network has {nodes} nodes; choose split = first or split = repeated explicitly"
            ))),
            None => Ok(Split::All),
            Some(s) => Ok(s),
        }
    }

    /// Rejects statistics that vanish on every first event.
    pub fn check_split_specs(&self, split: Split) -> Result<(), CliError> {
        if split == Split::First {
            if let Some(s) = self.parsed_specs.iter().find(|s| s.kind.vanishes_on_first_events()) {
                return Err(CliError::Config(format!(
                    "`{}` is constantly zero on first events; remove it when split = first",
                    s.label
                )));
            }
        }
        Ok(())
    }
}
