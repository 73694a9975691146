use std::collections::BTreeMap;
use std::fmt::Write as _;

use rhem::estimate::{stars, ReplicatedFit, RomFit};
use rhem::ModelFit;
use serde::Serialize;

use crate::config::Resolved;

const FOOTNOTE: &str = "*** p < 0.001, ** p < 0.01, * p < 0.05";

/// Counts of everything that was left out or cut short.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Warnings {
    pub truncated_events: usize,
    pub dropped_strata: usize,
    pub underfilled_strata: usize,
    pub excluded_by_split: usize,
    pub failed_replications: usize,
    pub messages: Vec<String>,
}

impl Warnings {
    pub fn note(&mut self, message: String) {
        log::warn!("{message}");
        self.messages.push(message);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub config: Resolved,
    pub split: String,
    pub n_nodes: usize,
    pub n_input_events: usize,
    pub warnings: Warnings,
    pub result: ReplicatedFit,
}

#[derive(Clone, Debug, Serialize)]
pub struct RomReport {
    pub config: Resolved,
    pub split: String,
    pub n_nodes: usize,
    pub n_input_events: usize,
    pub warnings: Warnings,
    pub fit: RomFit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SizeSummary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub histogram: BTreeMap<usize, usize>,
}

impl SizeSummary {
    pub fn from_sizes(sizes: impl IntoIterator<Item = usize>) -> Self {
        let mut s = SizeSummary::default();
        let mut sum = 0.0;
        let mut sq = 0.0;
        for k in sizes {
            *s.histogram.entry(k).or_default() += 1;
            s.count += 1;
            sum += k as f64;
            sq += (k * k) as f64;
        }
        if s.count > 0 {
            let n = s.count as f64;
            s.mean = sum / n;
            s.sd = (sq / n - s.mean * s.mean).max(0.0).sqrt();
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleCheckReport {
    pub config: Resolved,
    pub split: String,
    pub strata: usize,
    pub warnings: Warnings,
    pub cases: SizeSummary,
    pub controls: SizeSummary,
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn num(x: f64, width: usize, prec: usize) -> String {
    if x.is_finite() {
        format!("{x:>width$.prec$}")
    } else {
        format!("{:>width$}", "-")
    }
}

fn label_width(labels: &[String]) -> usize {
    labels.iter().map(String::len).max().unwrap_or(0).max(10)
}

fn fit_table(out: &mut String, fit: &ModelFit) {
    let w = label_width(&fit.labels);
    let _ = writeln!(out, "{:<w$} {:>12}     {:>10} {:>9} {:>9}", "statistic", "estimate", "s.e.", "z", "p");
    for j in 0..fit.k() {
        let _ = writeln!(
            out,
            "{:<w$} {} {:<3} {} {} {}",
            fit.labels[j],
            num(fit.theta[j], 12, 4),
            stars(fit.p_values[j]),
            num(fit.std_errors[j], 10, 4),
            num(fit.z[j], 9, 3),
            num(fit.p_values[j], 9, 4),
        );
    }
    let _ = writeln!(out, "{:<w$} {}", "log-likelihood", num(fit.log_likelihood, 12, 3));
    let _ = writeln!(out, "{:<w$} {}", "AIC", num(fit.aic, 12, 3));
    let _ = writeln!(out, "{:<w$} {:>12}", "events", fit.n_events);
    let _ = writeln!(out, "{:<w$} {:>12}", "observations", fit.n_observations);
    let _ = writeln!(out, "{:<w$} {:>12}", "iterations", fit.iterations);
    if !fit.converged {
        let _ = writeln!(out, "(not converged)");
    }
}

fn warnings_text(out: &mut String, w: &Warnings) {
    let _ = writeln!(
        out,
        "warnings: {} truncated events, {} dropped strata, {} under-filled strata, {} excluded by split, {} failed replications",
        w.truncated_events, w.dropped_strata, w.underfilled_strata, w.excluded_by_split, w.failed_replications
    );
    for m in &w.messages {
        let _ = writeln!(out, "  {m}");
    }
}

impl FitReport {
    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "risk set: {}   split: {}", self.result.policy, self.split);
        for r in &self.result.replications {
            let _ = writeln!(out, "\nreplication {}", r.index);
            match (&r.fit, &r.error) {
                (Some(f), _) => fit_table(&mut out, f),
                (None, Some(e)) => {
                    let _ = writeln!(out, "failed: {e}");
                }
                (None, None) => {}
            }
        }
        let s = &self.result.summary;
        if self.result.replications.len() > 1 {
            let w = label_width(&s.labels);
            let _ = writeln!(out, "\nacross {} successful replications", s.successes);
            let _ = writeln!(out, "{:<w$} {:>12} {:>10} {:>6} {:>10}", "statistic", "mean", "sd", "sign", "consistent");
            for j in 0..s.labels.len() {
                let _ = writeln!(
                    out,
                    "{:<w$} {} {} {} {:>10}",
                    s.labels[j],
                    num(s.mean[j], 12, 4),
                    num(s.sd[j], 10, 4),
                    num(s.sign_consistency[j], 6, 2),
                    if s.consistent_sign[j] { "yes" } else { "no" }
                );
            }
        }
        let _ = writeln!(out, "\n{FOOTNOTE}");
        warnings_text(&mut out, &self.warnings);
        out
    }
}

impl RomReport {
    pub fn text(&self) -> String {
        let f = &self.fit;
        let mut out = String::new();
        let _ = writeln!(out, "outcome model, split: {}", self.split);
        let w = label_width(&f.labels);
        let _ = writeln!(out, "{:<w$} {:>12}     {:>10} {:>9} {:>9}", "term", "estimate", "s.e.", "t", "p");
        for j in 0..f.labels.len() {
            let _ = writeln!(
                out,
                "{:<w$} {} {:<3} {} {} {}",
                f.labels[j],
                num(f.coefficients[j], 12, 4),
                stars(f.p_values[j]),
                num(f.std_errors[j], 10, 4),
                num(f.t_values[j], 9, 3),
                num(f.p_values[j], 9, 4),
            );
        }
        for d in &f.dropped {
            let _ = writeln!(out, "{d:<w$} (dropped: collinear)");
        }
        let _ = writeln!(out, "{:<w$} {}", "R-squared", num(f.r_squared, 12, 4));
        let _ = writeln!(out, "{:<w$} {}", "adj. R-squared", num(f.adj_r_squared, 12, 4));
        let _ = writeln!(out, "{:<w$} {}", "RMSE", num(f.rmse, 12, 4));
        let _ = writeln!(out, "{:<w$} {:>12}", "observations", f.n_obs);
        let _ = writeln!(out, "{:<w$} {:>12}", "first events", f.n_first);
        let _ = writeln!(out, "{:<w$} {:>12}", "repeated events", f.n_repeated);
        let _ = writeln!(out, "\n{FOOTNOTE}");
        warnings_text(&mut out, &self.warnings);
        out
    }
}

impl SampleCheckReport {
    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "risk set: {}   split: {}   strata: {}", self.config.policy, self.split, self.strata);
        let _ = writeln!(out, "{:>6} {:>10} {:>10}", "size", "cases", "controls");
        let sizes: std::collections::BTreeSet<usize> =
            self.cases.histogram.keys().chain(self.controls.histogram.keys()).copied().collect();
        for k in sizes {
            let c = self.cases.histogram.get(&k).copied().unwrap_or(0);
            let n = self.controls.histogram.get(&k).copied().unwrap_or(0);
            let _ = writeln!(out, "{k:>6} {c:>10} {n:>10}");
        }
        let _ = writeln!(out, "{:>6} {} {}", "mean", num(self.cases.mean, 10, 3), num(self.controls.mean, 10, 3));
        let _ = writeln!(out, "{:>6} {} {}", "sd", num(self.cases.sd, 10, 3), num(self.controls.sd, 10, 3));
        warnings_text(&mut out, &self.warnings);
        out
    }
}
