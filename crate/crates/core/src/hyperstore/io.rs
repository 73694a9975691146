//! Delimiter-separated event log files.
//!
//! Undirected logs use the header `time,members,weight,outcome`, directed
//! logs `time,sources,targets,weight,outcome`. Node lists are
//! semicolon-separated labels; empty fields mean absent.

use std::io::{Read, Write};
use std::path::Path;

use super::{Event, Hyperedge, NodeId, NodeRegistry, StoreError, DEFAULT_MAX_EVENT_SIZE};

const UNDIRECTED_HEADER: [&str; 4] = ["time", "members", "weight", "outcome"];
const DIRECTED_HEADER: [&str; 5] = ["time", "sources", "targets", "weight", "outcome"];

#[derive(Clone, Copy, Debug)]
pub struct LoadOptions {
    pub directed: bool,
    /// Participants kept per side; later-listed ones are dropped.
    pub max_event_size: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { directed: false, max_event_size: DEFAULT_MAX_EVENT_SIZE }
    }
}

/// A parsed event log.
#[derive(Clone, Debug)]
pub struct EventLog {
    pub directed: bool,
    pub registry: NodeRegistry,
    pub events: Vec<Event>,
    pub has_outcomes: bool,
    /// Number of events whose participant list was cut at `max_event_size`.
    pub truncated: usize,
}

pub fn read_event_log_file(path: impl AsRef<Path>, opts: LoadOptions) -> Result<EventLog, StoreError> {
    let f =
        std::fs::File::open(path.as_ref()).map_err(|e| StoreError::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_event_log(f, opts)
}

pub fn read_event_log<R: Read>(reader: R, opts: LoadOptions) -> Result<EventLog, StoreError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| StoreError::Parse { line: 1, message: e.to_string() })?
        .iter()
        .map(|s| s.to_ascii_lowercase())
        .collect();
    let expected: &[&str] = if opts.directed { &DIRECTED_HEADER } else { &UNDIRECTED_HEADER };
    if header != expected {
        return Err(StoreError::Parse {
            line: 1,
            message: format!("expected header `{}`, found `{}`", expected.join(","), header.join(",")),
        });
    }

    let mut registry = NodeRegistry::new();
    let mut events = Vec::new();
    let mut truncated = 0;
    let mut outcome_rows = 0usize;
    let mut last_time = f64::NEG_INFINITY;
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| StoreError::Parse { line, message: e.to_string() })?;
        let perr = |message: String| StoreError::Parse { line, message };
        let field = |k: usize| rec.get(k).unwrap_or("");

        let time: f64 = field(0).parse().map_err(|_| perr(format!("invalid time `{}`", field(0))))?;
        if !time.is_finite() {
            return Err(perr(format!("non-finite time `{}`", field(0))));
        }
        if time < last_time {
            return Err(perr(format!("time {time} precedes previous time {last_time}")));
        }
        last_time = time;

        let mut cut = false;
        let mut side = |raw: &str, what: &str| -> Result<Vec<NodeId>, StoreError> {
            let labels = split_labels(raw);
            if labels.is_empty() {
                return Err(perr(format!("empty {what}")));
            }
            if labels.len() > opts.max_event_size {
                cut = true;
            }
            Ok(labels.into_iter().take(opts.max_event_size).map(|l| registry.intern(l)).collect())
        };
        let (hyperedge, rest) = if opts.directed {
            let s = side(field(1), "sources")?;
            let t = side(field(2), "targets")?;
            (Hyperedge::directed(s, t)?, 3)
        } else {
            (Hyperedge::undirected(side(field(1), "members")?)?, 2)
        };
        if cut {
            truncated += 1;
        }
        let weight = parse_optional(field(rest)).map_err(|m| perr(format!("weight: {m}")))?;
        let outcome = parse_optional(field(rest + 1)).map_err(|m| perr(format!("outcome: {m}")))?;
        if outcome.is_some() {
            outcome_rows += 1;
        }
        events.push(Event { hyperedge, time, event_type: None, weight, outcome });
    }
    let has_outcomes = outcome_rows > 0;
    if has_outcomes && outcome_rows != events.len() {
        let line = events.iter().position(|e| e.outcome.is_none()).map_or(0, |i| i + 2);
        return Err(StoreError::Parse { line, message: "outcome missing while other events carry outcomes".into() });
    }
    if truncated > 0 {
        log::warn!("{truncated} events truncated to {} participants", opts.max_event_size);
    }
    Ok(EventLog { directed: opts.directed, registry, events, has_outcomes, truncated })
}

fn split_labels(raw: &str) -> Vec<&str> {
    let mut seen = Vec::new();
    for l in raw.split(';').map(str::trim).filter(|l| !l.is_empty()) {
        if !seen.contains(&l) {
            seen.push(l);
        }
    }
    seen
}

fn parse_optional(raw: &str) -> Result<Option<f64>, String> {
    if raw.is_empty() {
        return Ok(None);
    }
    let v: f64 = raw.parse().map_err(|_| format!("invalid number `{raw}`"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value `{raw}`"));
    }
    Ok(Some(v))
}

pub fn write_event_log<W: Write>(
    writer: W,
    registry: &NodeRegistry,
    events: &[Event],
    directed: bool,
) -> Result<(), StoreError> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let io = |e: csv::Error| StoreError::Io(e.to_string());
    if directed {
        w.write_record(DIRECTED_HEADER).map_err(io)?;
    } else {
        w.write_record(UNDIRECTED_HEADER).map_err(io)?;
    }
    let join = |s: &[NodeId]| s.iter().map(|&v| registry.label(v)).collect::<Vec<_>>().join(";");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for e in events {
        let mut row = vec![e.time.to_string()];
        match &e.hyperedge {
            Hyperedge::Undirected(m) if !directed => row.push(join(m.as_slice())),
            Hyperedge::Directed { sources, targets } if directed => {
                row.push(join(sources.as_slice()));
                row.push(join(targets.as_slice()));
            }
            other => {
                return Err(StoreError::Io(format!("cannot write a {} hyperedge into this log", other.variant_name())))
            }
        }
        row.push(opt(e.weight));
        row.push(opt(e.outcome));
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_event_log_file(
    path: impl AsRef<Path>,
    registry: &NodeRegistry,
    events: &[Event],
    directed: bool,
) -> Result<(), StoreError> {
    let f = std::fs::File::create(path.as_ref())?;
    write_event_log(std::io::BufWriter::new(f), registry, events, directed)
}
