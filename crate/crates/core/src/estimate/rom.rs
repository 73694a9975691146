use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::Error;
use crate::hyperstore::{Event, History};
use crate::par;
use crate::sampling::Split;
use crate::statistics::{CovariateTable, Evaluator, NodeUniverse, StatError, StatMatrix, StatisticSpec};

use super::EstimateError;

pub const INTERCEPT: &str = "(intercept)";

/// Relative residual norm below which a column counts as collinear.
const COLLINEAR: f64 = 1e-10;

#[derive(Clone, Debug, Default)]
pub struct RomOptions<'a> {
    pub split: Split,
    pub covariates: Option<&'a CovariateTable>,
    pub universe: NodeUniverse,
    pub node_count: Option<usize>,
}

/// Outcome-model design: one row per admitted event.
#[derive(Clone, Debug, PartialEq)]
pub struct RomDesign {
    pub x: StatMatrix,
    pub y: Vec<f64>,
    pub ordinals: Vec<usize>,
    /// Outcome-bearing events with no prior event on their hyperedge.
    pub n_first: usize,
    pub n_repeated: usize,
}

/// Ordinary least-squares fit with intercept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RomFit {
    /// `(intercept)` followed by the retained statistics.
    pub labels: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    /// Columns removed as linear combinations of earlier ones.
    pub dropped: Vec<String>,
    pub residual_variance: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub rmse: f64,
    pub n_obs: usize,
    pub n_first: usize,
    pub n_repeated: usize,
}

/// Evaluates `specs` for every event against its strictly-prior history.
pub fn rom_design(
    events: &[Event],
    directed: bool,
    specs: &[StatisticSpec],
    options: &RomOptions<'_>,
) -> Result<RomDesign, Error> {
    if events.is_empty() || events.iter().any(|e| e.outcome.is_none()) {
        return Err(EstimateError::OutcomesUnavailable.into());
    }
    let max_id = events.iter().flat_map(|e| e.hyperedge.nodes()).map(|v| v.index() + 1).max().unwrap_or(0);
    let mut history = History::with_outcomes(directed).with_roster(options.node_count.unwrap_or(0).max(max_id));
    let mut x = StatMatrix::new(specs.len());
    let (mut y, mut ordinals) = (Vec::new(), Vec::new());
    let (mut n_first, mut n_repeated) = (0, 0);
    let mut start = 0;
    while start < events.len() {
        let t = events[start].time;
        let end = start + events[start..].iter().take_while(|e| e.time == t).count();
        let group = &events[start..end];
        let snapshot = history.current();
        let evaluator = Evaluator::new(snapshot).with_covariates(options.covariates).with_universe(options.universe);
        let rows = par::map(group, |e| -> Result<(usize, Option<Vec<f64>>), StatError> {
            let activity = snapshot.activity(&e.hyperedge);
            if !options.split.admits(activity) {
                return Ok((activity, None));
            }
            let row = evaluator.eval_row(specs, &e.hyperedge).map_err(|(column, err)| StatError::Batch {
                row: 0,
                column,
                spec: specs[column].label.clone(),
                source: Box::new(err),
            })?;
            Ok((activity, Some(row)))
        });
        for (i, r) in rows.into_iter().enumerate() {
            let (activity, row) = r?;
            if activity == 0 {
                n_first += 1;
            } else {
                n_repeated += 1;
            }
            if let Some(row) = row {
                x.push_row(&row);
                y.push(group[i].outcome.expect("checked"));
                ordinals.push(start + i);
            }
        }
        for e in group {
            history.push_event(e.clone())?;
        }
        start = end;
    }
    Ok(RomDesign { x, y, ordinals, n_first, n_repeated })
}

pub fn fit_rom(
    events: &[Event],
    directed: bool,
    specs: &[StatisticSpec],
    options: &RomOptions<'_>,
) -> Result<RomFit, Error> {
    let design = rom_design(events, directed, specs, options)?;
    let labels: Vec<String> = specs.iter().map(|s| s.label.clone()).collect();
    let mut fit = fit_ols(&design.x, &design.y, &labels)?;
    fit.n_first = design.n_first;
    fit.n_repeated = design.n_repeated;
    Ok(fit)
}

/// Least squares of `y` on an intercept and the columns of `x`. Columns that
/// are (numerically) linear combinations of the intercept and earlier columns
/// are dropped in column order.
pub fn fit_ols(x: &StatMatrix, y: &[f64], labels: &[String]) -> Result<RomFit, EstimateError> {
    let n = y.len();
    if n == 0 {
        return Err(EstimateError::NoObservations);
    }
    if x.nrows() != n || x.ncols() != labels.len() {
        return Err(EstimateError::Dimension(format!(
            "design is {}x{}, expected {n}x{}",
            x.nrows(),
            x.ncols(),
            labels.len()
        )));
    }
    let columns: Vec<DVector<f64>> = std::iter::once(DVector::from_element(n, 1.0))
        .chain((0..x.ncols()).map(|j| DVector::from_iterator(n, (0..n).map(|i| x.get(i, j)))))
        .collect();
    let names: Vec<String> = std::iter::once(INTERCEPT.to_owned()).chain(labels.iter().cloned()).collect();

    // modified Gram-Schmidt to find a maximal independent prefix-greedy set
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        let norm = col.norm();
        let mut r = col.clone();
        for q in &basis {
            let c = q.dot(&r);
            r.axpy(-c, q, 1.0);
        }
        let rn = r.norm();
        if norm == 0.0 || rn <= COLLINEAR * norm {
            log::warn!("dropping collinear column `{}`", names[j]);
            dropped.push(names[j].clone());
        } else {
            basis.push(r / rn);
            keep.push(j);
        }
    }

    let p = keep.len();
    let design = DMatrix::from_fn(n, p, |i, c| columns[keep[c]][i]);
    let yv = DVector::from_column_slice(y);
    let (q, r) = design.clone().qr().unpack();
    let beta = r
        .solve_upper_triangular(&(q.transpose() * &yv))
        .ok_or_else(|| EstimateError::SingularInformation("least-squares design is rank deficient".into()))?;
    let residuals = &yv - &design * &beta;
    let rss = residuals.norm_squared();
    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let df = n as f64 - p as f64;
    let residual_variance = if df > 0.0 { rss / df } else { f64::NAN };
    let r_squared = if tss > 0.0 { (1.0 - rss / tss).clamp(0.0, 1.0) } else { 0.0 };
    let adj_r_squared = if n > p { 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / df } else { f64::NAN };

    let xtx = design.transpose() * &design;
    let inv = xtx.try_inverse();
    let std_errors: Vec<f64> =
        (0..p).map(|c| inv.as_ref().map_or(f64::NAN, |m| (residual_variance * m[(c, c)]).max(0.0).sqrt())).collect();
    let t_values: Vec<f64> = beta.iter().zip(&std_errors).map(|(b, s)| b / s).collect();
    let p_values = match StudentsT::new(0.0, 1.0, df) {
        Ok(dist) if df > 0.0 => t_values.iter().map(|t| 2.0 * (1.0 - dist.cdf(t.abs()))).collect(),
        _ => vec![f64::NAN; p],
    };
    Ok(RomFit {
        labels: keep.iter().map(|&j| names[j].clone()).collect(),
        coefficients: beta.iter().copied().collect(),
        std_errors,
        t_values,
        p_values,
        dropped,
        residual_variance,
        r_squared,
        adj_r_squared,
        rmse: (rss / n as f64).sqrt(),
        n_obs: n,
        n_first: 0,
        n_repeated: 0,
    })
}
