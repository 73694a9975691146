use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::StatError;

/// How values over sub-hyperedges (or participants) are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    #[default]
    Mean,
    Min,
    Max,
    Sum,
    /// Population standard deviation.
    Sd,
}

impl Aggregator {
    pub fn name(self) -> &'static str {
        match self {
            Aggregator::Mean => "mean",
            Aggregator::Min => "min",
            Aggregator::Max => "max",
            Aggregator::Sum => "sum",
            Aggregator::Sd => "sd",
        }
    }
}

impl FromStr for Aggregator {
    type Err = StatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "mean" => Aggregator::Mean,
            "min" => Aggregator::Min,
            "max" => Aggregator::Max,
            "sum" => Aggregator::Sum,
            "sd" => Aggregator::Sd,
            other => return Err(StatError::Parse(format!("unknown aggregator `{other}`"))),
        })
    }
}

/// The four directed triadic closure patterns plus the undirected one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureVariant {
    Undirected,
    Transitive,
    Cyclic,
    SharedReceivers,
    SharedSenders,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    Size,
    SizeSquared,
    NumSources,
    NumTargets,
    Repetition,
    SubRepetition(u32),
    SubRepetitionDirected(u32, u32),
    SharedPriorEvents(u32),
    Reciprocation,
    SubReciprocation(u32, u32),
    SwitchReciprocation(u32),
    Closure { variant: ClosureVariant, p: u32, q: u32, l: u32 },
    CovariateAggregate(String),
    PriorHyperedgeSuccess,
    PriorSubHyperedgeSuccess(u32),
}

/// Which hyperedge variants a statistic is defined for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Applicability {
    Undirected,
    Directed,
    Both,
}

impl StatKind {
    pub fn applicability(&self) -> Applicability {
        use StatKind::*;
        match self {
            Size | SizeSquared | SubRepetition(_) | SharedPriorEvents(_) | PriorSubHyperedgeSuccess(_) => {
                Applicability::Undirected
            }
            Closure { variant: ClosureVariant::Undirected, .. } => Applicability::Undirected,
            NumSources
            | NumTargets
            | SubRepetitionDirected(..)
            | Reciprocation
            | SubReciprocation(..)
            | SwitchReciprocation(_)
            | Closure { .. } => Applicability::Directed,
            Repetition | CovariateAggregate(_) | PriorHyperedgeSuccess => Applicability::Both,
        }
    }

    pub fn applies_to(&self, directed: bool) -> bool {
        match self.applicability() {
            Applicability::Both => true,
            Applicability::Directed => directed,
            Applicability::Undirected => !directed,
        }
    }

    /// Whether a non-default aggregator is meaningful.
    pub fn takes_aggregator(&self) -> bool {
        matches!(
            self,
            StatKind::SubRepetition(_)
                | StatKind::SubRepetitionDirected(..)
                | StatKind::SubReciprocation(..)
                | StatKind::CovariateAggregate(_)
        )
    }

    /// Statistics that are identically zero on first events.
    pub fn vanishes_on_first_events(&self) -> bool {
        matches!(self, StatKind::Repetition | StatKind::PriorHyperedgeSuccess)
    }

    pub fn needs_outcomes(&self) -> bool {
        matches!(self, StatKind::PriorHyperedgeSuccess | StatKind::PriorSubHyperedgeSuccess(_))
    }

    fn validate(&self) -> Result<(), StatError> {
        use StatKind::*;
        let bad = |m: &str| Err(StatError::InvalidOrder(m.to_owned()));
        match *self {
            SubRepetition(0) | SharedPriorEvents(0) | PriorSubHyperedgeSuccess(0) => bad("order must be at least 1"),
            SubRepetitionDirected(0, 0) | SubReciprocation(0, 0) => bad("orders (0,0) carry no information"),
            SwitchReciprocation(0) => bad("switch order must be at least 1"),
            Closure { p, q, l, .. } if p == 0 || q == 0 || l == 0 => bad("closure orders must be at least 1"),
            _ => Ok(()),
        }
    }
}

/// A statistic with its aggregator and display label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StatisticSpec {
    pub kind: StatKind,
    pub aggregator: Aggregator,
    pub label: String,
}

impl StatisticSpec {
    pub fn new(kind: StatKind) -> Result<Self, StatError> {
        Self::with_aggregator(kind, Aggregator::Mean)
    }

    pub fn with_aggregator(kind: StatKind, aggregator: Aggregator) -> Result<Self, StatError> {
        kind.validate()?;
        if aggregator != Aggregator::Mean && !kind.takes_aggregator() {
            return Err(StatError::Parse(format!(
                "statistic `{}` does not take an aggregator",
                canonical(&kind, Aggregator::Mean)
            )));
        }
        if let StatKind::Closure { l, .. } = kind {
            if l > 1 {
                log::warn!(
                    "closure with l = {l} enumerates all {l}-subsets of co-participants; cost grows combinatorially"
                );
            }
        }
        let label = canonical(&kind, aggregator);
        Ok(StatisticSpec { kind, aggregator, label })
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn size() -> Self {
        Self::new(StatKind::Size).unwrap()
    }

    pub fn size_squared() -> Self {
        Self::new(StatKind::SizeSquared).unwrap()
    }

    pub fn repetition() -> Self {
        Self::new(StatKind::Repetition).unwrap()
    }

    pub fn sub_repetition(p: u32) -> Self {
        Self::new(StatKind::SubRepetition(p)).expect("p >= 1")
    }

    /// Parses a list of specs, e.g. `["subrep(1)", "size"]`.
    pub fn parse_list<S: AsRef<str>>(items: &[S]) -> Result<Vec<Self>, StatError> {
        items.iter().map(|s| s.as_ref().parse()).collect()
    }
}

impl fmt::Display for StatisticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&canonical(&self.kind, self.aggregator))
    }
}

fn canonical(kind: &StatKind, agg: Aggregator) -> String {
    use StatKind::*;
    let base = match kind {
        Size => "size".to_owned(),
        SizeSquared => "size2".to_owned(),
        NumSources => "nsources".to_owned(),
        NumTargets => "ntargets".to_owned(),
        Repetition => "repetition".to_owned(),
        SubRepetition(p) => format!("subrep({p})"),
        SubRepetitionDirected(p, q) => format!("subrep({p},{q})"),
        SharedPriorEvents(p) => format!("spe({p})"),
        Reciprocation => "reciprocation".to_owned(),
        SubReciprocation(p, q) => format!("subrecip({p},{q})"),
        SwitchReciprocation(l) => format!("switch({l})"),
        Closure { variant, p, q, l } => {
            let name = match variant {
                ClosureVariant::Undirected => "closure",
                ClosureVariant::Transitive => "transitive",
                ClosureVariant::Cyclic => "cyclic",
                ClosureVariant::SharedReceivers => "sreceivers",
                ClosureVariant::SharedSenders => "ssenders",
            };
            format!("{name}({p},{q},{l})")
        }
        CovariateAggregate(a) => format!("covagg({a})"),
        PriorHyperedgeSuccess => "success".to_owned(),
        PriorSubHyperedgeSuccess(p) => format!("subsuccess({p})"),
    };
    if agg == Aggregator::Mean {
        base
    } else {
        format!("{base}:{}", agg.name())
    }
}

impl FromStr for StatisticSpec {
    type Err = StatError;

    /// Grammar: `name(order...)[:aggregator]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (body, agg) = match s.rsplit_once(':') {
            Some((b, a)) if !a.contains(')') => (b.trim(), a.trim().parse()?),
            _ => (s, Aggregator::Mean),
        };
        let (name, args): (&str, Vec<&str>) = match body.find('(') {
            Some(open) => {
                let close = body.strip_suffix(')').ok_or_else(|| StatError::Parse(format!("missing `)` in `{s}`")))?;
                let inner = &close[open + 1..];
                let args = if inner.trim().is_empty() { vec![] } else { inner.split(',').map(str::trim).collect() };
                (body[..open].trim(), args)
            }
            None => (body, vec![]),
        };
        let name = name.to_ascii_lowercase().replace(['.', '-'], "_");
        let orders = || -> Result<Vec<u32>, StatError> {
            args.iter()
                .map(|a| a.parse::<u32>().map_err(|_| StatError::Parse(format!("invalid order `{a}` in `{s}`"))))
                .collect()
        };
        let arity = |n: usize| -> Result<Vec<u32>, StatError> {
            let o = orders()?;
            if o.len() != n {
                return Err(StatError::Parse(format!("`{name}` expects {n} order argument(s), got {}", o.len())));
            }
            Ok(o)
        };
        use StatKind::*;
        let closure = |variant| -> Result<StatKind, StatError> {
            let o = arity(3)?;
            Ok(Closure { variant, p: o[0], q: o[1], l: o[2] })
        };
        let kind = match name.as_str() {
            "size" | "meeting_size" => {
                arity(0)?;
                Size
            }
            "size2" | "size_squared" | "meeting_size_squared" => {
                arity(0)?;
                SizeSquared
            }
            "nsources" | "num_sources" => {
                arity(0)?;
                NumSources
            }
            "ntargets" | "num_targets" => {
                arity(0)?;
                NumTargets
            }
            "repetition" => {
                arity(0)?;
                Repetition
            }
            "subrep" | "sub_repetition" => {
                let o = orders()?;
                match o.as_slice() {
                    [p] => SubRepetition(*p),
                    [p, q] => SubRepetitionDirected(*p, *q),
                    _ => return Err(StatError::Parse(format!("`subrep` takes 1 or 2 orders in `{s}`"))),
                }
            }
            "spe" | "shared_prior_events" => SharedPriorEvents(arity(1)?[0]),
            "reciprocation" => {
                arity(0)?;
                Reciprocation
            }
            "subrecip" | "sub_reciprocation" => {
                let o = arity(2)?;
                SubReciprocation(o[0], o[1])
            }
            "switch" | "switch_reciprocation" => SwitchReciprocation(arity(1)?[0]),
            "closure" => closure(ClosureVariant::Undirected)?,
            "transitive" | "transitive_closure" => closure(ClosureVariant::Transitive)?,
            "cyclic" | "cyclic_closure" => closure(ClosureVariant::Cyclic)?,
            "sreceivers" | "shared_receivers" => closure(ClosureVariant::SharedReceivers)?,
            "ssenders" | "shared_senders" => closure(ClosureVariant::SharedSenders)?,
            "covagg" | "covariate" => match args.as_slice() {
                [attr] if !attr.is_empty() => CovariateAggregate((*attr).to_owned()),
                _ => return Err(StatError::Parse(format!("`covagg` expects one attribute name in `{s}`"))),
            },
            "success" | "prior_hyperedge_success" => {
                arity(0)?;
                PriorHyperedgeSuccess
            }
            "subsuccess" | "prior_sub_hyperedge_success" => PriorSubHyperedgeSuccess(arity(1)?[0]),
            other => return Err(StatError::Parse(format!("unknown statistic `{other}`"))),
        };
        StatisticSpec::with_aggregator(kind, agg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_examples() {
        let s: StatisticSpec = "subrep(2):mean".parse().unwrap();
        assert_eq!(s.kind, StatKind::SubRepetition(2));
        assert_eq!(s.label, "subrep(2)");
        let c: StatisticSpec = "closure(1,1,1)".parse().unwrap();
        assert_eq!(c.kind, StatKind::Closure { variant: ClosureVariant::Undirected, p: 1, q: 1, l: 1 });
        let v: StatisticSpec = "covagg(age):sd".parse().unwrap();
        assert_eq!(v.kind, StatKind::CovariateAggregate("age".into()));
        assert_eq!(v.aggregator, Aggregator::Sd);
        assert_eq!(v.label, "covagg(age):sd");
        assert_eq!("subrep(1,0)".parse::<StatisticSpec>().unwrap().kind, StatKind::SubRepetitionDirected(1, 0));
    }

    #[test]
    fn rejects_invalid_specs() {
        for bad in [
            "subrep(0)",
            "subrep(0,0)",
            "subrecip(0,0)",
            "closure(0,1,1)",
            "switch(0)",
            "repetition:sd",
            "subrep(x)",
            "subrep(1,2,3)",
            "closure(1,1)",
            "nonsense",
            "subrep(2):median",
            "covagg()",
        ] {
            assert!(bad.parse::<StatisticSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn applicability() {
        assert!(StatKind::Size.applies_to(false));
        assert!(!StatKind::Size.applies_to(true));
        assert!(StatKind::Reciprocation.applies_to(true));
        assert!(StatKind::Repetition.applies_to(true) && StatKind::Repetition.applies_to(false));
    }

    fn any_spec() -> impl Strategy<Value = StatisticSpec> {
        let agg = prop_oneof![
            Just(Aggregator::Mean),
            Just(Aggregator::Min),
            Just(Aggregator::Max),
            Just(Aggregator::Sum),
            Just(Aggregator::Sd)
        ];
        (0u8..12, 1u32..4, 0u32..4, 1u32..3, agg).prop_map(|(k, p, q, l, a)| {
            let (kind, takes) = match k {
                0 => (StatKind::Size, false),
                1 => (StatKind::SubRepetition(p), true),
                2 => (StatKind::SubRepetitionDirected(p, q), true),
                3 => (StatKind::SharedPriorEvents(p), false),
                4 => (StatKind::SubReciprocation(q, p), true),
                5 => (StatKind::SwitchReciprocation(l), false),
                6 => (StatKind::Closure { variant: ClosureVariant::Cyclic, p, q: p, l }, false),
                7 => (StatKind::CovariateAggregate(format!("attr{q}")), true),
                8 => (StatKind::PriorSubHyperedgeSuccess(p), false),
                9 => (StatKind::Repetition, false),
                10 => (StatKind::Closure { variant: ClosureVariant::Undirected, p, q: 1, l: 1 }, false),
                _ => (StatKind::PriorHyperedgeSuccess, false),
            };
            StatisticSpec::with_aggregator(kind, if takes { a } else { Aggregator::Mean }).unwrap()
        })
    }

    proptest! {
        #[test]
        fn display_parses_back(spec in any_spec()) {
            let again: StatisticSpec = spec.to_string().parse().unwrap();
            prop_assert_eq!(again, spec);
        }
    }
}
