use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hyperstore::Event;
use crate::par;
use crate::sampling::{build_strata, StrataConfig};

use super::{fit_cox, CoxOptions, ModelFit};

/// One independently sampled fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub index: u32,
    pub fit: Option<ModelFit>,
    pub error: Option<String>,
    pub dropped_strata: usize,
    pub underfilled_strata: usize,
    pub excluded_by_split: usize,
}

/// Cross-replication variability of each parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub labels: Vec<String>,
    pub successes: usize,
    pub failures: usize,
    pub mean: Vec<f64>,
    /// Sample standard deviation; 0 for a single fit.
    pub sd: Vec<f64>,
    /// Share of fits agreeing with the majority sign.
    pub sign_consistency: Vec<f64>,
    /// Every fit has the same (non-zero) sign.
    pub consistent_sign: Vec<bool>,
}

impl ReplicationSummary {
    pub fn from_fits<'a>(labels: &[String], fits: impl IntoIterator<Item = &'a ModelFit>, failures: usize) -> Self {
        let fits: Vec<&ModelFit> = fits.into_iter().collect();
        let n = fits.len();
        let k = labels.len();
        let mut mean = vec![f64::NAN; k];
        let mut sd = vec![f64::NAN; k];
        let mut sign_consistency = vec![f64::NAN; k];
        let mut consistent_sign = vec![false; k];
        if n > 0 {
            for j in 0..k {
                let xs: Vec<f64> = fits.iter().map(|f| f.theta[j]).collect();
                let m = xs.iter().sum::<f64>() / n as f64;
                mean[j] = m;
                sd[j] =
                    if n > 1 { (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
                let pos = xs.iter().filter(|&&x| x > 0.0).count();
                let neg = xs.iter().filter(|&&x| x < 0.0).count();
                sign_consistency[j] = pos.max(neg) as f64 / n as f64;
                consistent_sign[j] = pos == n || neg == n;
            }
        }
        ReplicationSummary {
            labels: labels.to_vec(),
            successes: n,
            failures,
            mean,
            sd,
            sign_consistency,
            consistent_sign,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicatedFit {
    /// Risk-set policy tag; fits with different tags are not comparable.
    pub policy: String,
    pub replications: Vec<Replication>,
    pub summary: ReplicationSummary,
}

/// Fits `replications` independently sampled strata sets. A failing
/// replication is recorded and left out of the summary.
pub fn fit_replicated(
    events: &[Event],
    directed: bool,
    config: &StrataConfig<'_>,
    replications: u32,
    options: &CoxOptions,
) -> Result<ReplicatedFit, Error> {
    config.policy.validate()?;
    let labels: Vec<String> = config.specs.iter().map(|s| s.label.clone()).collect();
    let runs = par::map_range(replications as usize, |r| -> Result<Replication, Error> {
        let set = build_strata(events, directed, config, r as u32)?;
        let (fit, error) = match fit_cox(&set.strata, &labels, options) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Ok(Replication {
            index: r as u32,
            fit,
            error,
            dropped_strata: set.dropped,
            underfilled_strata: set.underfilled,
            excluded_by_split: set.excluded_by_split,
        })
    });
    let replications: Vec<Replication> = runs.into_iter().collect::<Result<_, _>>()?;
    let failures = replications.iter().filter(|r| r.fit.is_none()).count();
    if failures > 0 {
        log::warn!("{failures} of {} replications failed to fit", replications.len());
    }
    let summary = ReplicationSummary::from_fits(&labels, replications.iter().filter_map(|r| r.fit.as_ref()), failures);
    Ok(ReplicatedFit { policy: config.policy.to_string(), replications, summary })
}
