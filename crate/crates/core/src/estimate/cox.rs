use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::par;
use crate::sampling::Stratum;
use crate::statistics::StatMatrix;

use super::{aic, EstimateError, ModelFit};

/// Strata per parallel work unit; fixed so that summation order never
/// depends on the thread count.
const CHUNK: usize = 256;

/// Anything exposing a stratum's statistic rows, case first.
pub trait StratumRows {
    fn rows(&self) -> &StatMatrix;
}

impl StratumRows for Stratum {
    fn rows(&self) -> &StatMatrix {
        &self.stats
    }
}

impl StratumRows for StatMatrix {
    fn rows(&self) -> &StatMatrix {
        self
    }
}

/// Value, gradient and hessian of the sampled log partial likelihood.
#[derive(Clone, Debug, PartialEq)]
pub struct LogLikelihood {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoxOptions {
    pub max_iterations: usize,
    /// Converged when the gradient max-norm falls below this...
    pub gradient_tolerance: f64,
    /// ...or the relative log-likelihood change falls below this,
    pub relative_tolerance: f64,
    /// provided the next Newton step is shorter than this (max-norm).
    pub step_tolerance: f64,
    pub separation_bound: f64,
    pub max_halvings: u32,
}

impl Default for CoxOptions {
    fn default() -> Self {
        CoxOptions {
            max_iterations: 100,
            gradient_tolerance: 1e-8,
            relative_tolerance: 1e-12,
            step_tolerance: 1e-4,
            separation_bound: 20.0,
            max_halvings: 30,
        }
    }
}

struct Partial {
    value: f64,
    gradient: Vec<f64>,
    // upper triangle, row-major
    hessian: Vec<f64>,
}

fn tri(k: usize) -> usize {
    k * (k + 1) / 2
}

fn stratum_terms(m: &StatMatrix, theta: &[f64], acc: &mut Partial, d: &mut Vec<f64>, eta: &mut Vec<f64>) {
    let k = theta.len();
    let r = m.nrows();
    let case = m.row(0);
    d.clear();
    eta.clear();
    for i in 0..r {
        let row = m.row(i);
        let mut e = 0.0;
        for j in 0..k {
            let x = row[j] - case[j];
            d.push(x);
            e += x * theta[j];
        }
        eta.push(e);
    }
    let max = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for e in eta.iter_mut() {
        *e = (*e - max).exp();
        z += *e;
    }
    acc.value -= max + z.ln();
    let mut mean = vec![0.0; k];
    let mut second = vec![0.0; tri(k)];
    for i in 0..r {
        let w = eta[i] / z;
        let di = &d[i * k..(i + 1) * k];
        let mut t = 0;
        for a in 0..k {
            mean[a] += w * di[a];
            let wa = w * di[a];
            for &db in &di[a..] {
                second[t] += wa * db;
                t += 1;
            }
        }
    }
    let mut t = 0;
    for a in 0..k {
        acc.gradient[a] -= mean[a];
        for b in a..k {
            acc.hessian[t] -= second[t] - mean[a] * mean[b];
            t += 1;
        }
    }
}

fn check_strata<S: StratumRows>(strata: &[S], k: usize, labels: &[String]) -> Result<(), EstimateError> {
    for (s, st) in strata.iter().enumerate() {
        let m = st.rows();
        if m.ncols() != k {
            return Err(EstimateError::Dimension(format!("stratum {s} has {} columns, expected {k}", m.ncols())));
        }
        if m.nrows() < 2 {
            return Err(EstimateError::NoControls { stratum: s });
        }
        if let Some(pos) = m.as_slice().iter().position(|v| !v.is_finite()) {
            let spec = labels.get(pos % k).cloned().unwrap_or_else(|| format!("column {}", pos % k));
            return Err(EstimateError::NonFinite { stratum: s, spec });
        }
    }
    Ok(())
}

fn default_labels(k: usize) -> Vec<String> {
    (0..k).map(|j| format!("column {j}")).collect()
}

/// Sampled log partial likelihood at `theta` with its exact derivatives.
///
/// Rows are centred on the case row before exponentiation. Per-chunk partial
/// sums are combined in chunk order.
pub fn log_likelihood<S: StratumRows + Sync>(strata: &[S], theta: &[f64]) -> Result<LogLikelihood, EstimateError> {
    check_strata(strata, theta.len(), &default_labels(theta.len()))?;
    Ok(evaluate(strata, theta))
}

fn evaluate<S: StratumRows + Sync>(strata: &[S], theta: &[f64]) -> LogLikelihood {
    let k = theta.len();
    let parts = par::map_chunks(strata, CHUNK, |chunk| {
        let mut acc = Partial { value: 0.0, gradient: vec![0.0; k], hessian: vec![0.0; tri(k)] };
        let (mut d, mut eta) = (Vec::new(), Vec::new());
        for s in chunk {
            stratum_terms(s.rows(), theta, &mut acc, &mut d, &mut eta);
        }
        acc
    });
    let mut value = 0.0;
    let mut gradient = DVector::zeros(k);
    let mut upper = vec![0.0; tri(k)];
    for p in parts {
        value += p.value;
        for a in 0..k {
            gradient[a] += p.gradient[a];
        }
        for (u, h) in upper.iter_mut().zip(&p.hessian) {
            *u += h;
        }
    }
    let mut hessian = DMatrix::zeros(k, k);
    let mut t = 0;
    for a in 0..k {
        for b in a..k {
            hessian[(a, b)] = upper[t];
            hessian[(b, a)] = upper[t];
            t += 1;
        }
    }
    LogLikelihood { value, gradient, hessian }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Newton step `(-H)^{-1} g`, or `None` when `-H` is not positive definite.
fn newton_step(ll: &LogLikelihood) -> Option<DVector<f64>> {
    let info = -&ll.hessian;
    info.cholesky().map(|c| c.solve(&ll.gradient))
}

/// Maximizes the sampled partial likelihood by Newton-Raphson from zero with
/// step-halving.
pub fn fit_cox<S: StratumRows + Sync>(
    strata: &[S],
    labels: &[String],
    options: &CoxOptions,
) -> Result<ModelFit, EstimateError> {
    let k = labels.len();
    if strata.is_empty() {
        return Err(EstimateError::NoStrata);
    }
    check_strata(strata, k, labels)?;
    for (j, label) in labels.iter().enumerate() {
        let constant = strata.iter().all(|s| {
            let m = s.rows();
            let c = m.get(0, j);
            (1..m.nrows()).all(|i| m.get(i, j) == c)
        });
        if constant {
            return Err(EstimateError::SingularInformation(format!("`{label}` is constant within every stratum")));
        }
    }

    let separation = |theta: &DVector<f64>| {
        let j = theta.iamax();
        EstimateError::Separation { spec: labels[j].clone(), bound: options.separation_bound }
    };

    let mut theta = DVector::<f64>::zeros(k);
    let mut ll = evaluate(strata, theta.as_slice());
    let mut rel_change = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let Some(step) = newton_step(&ll) else {
            if max_abs(&theta) > options.separation_bound / 2.0 {
                return Err(separation(&theta));
            }
            return Err(EstimateError::SingularInformation("information matrix is not positive definite".into()));
        };
        let small = max_abs(&ll.gradient) < options.gradient_tolerance || rel_change < options.relative_tolerance;
        if small && max_abs(&step) < options.step_tolerance {
            converged = true;
            break;
        }
        if iterations == options.max_iterations {
            break;
        }
        iterations += 1;

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=options.max_halvings {
            let candidate = &theta + &step * scale;
            let next = evaluate(strata, candidate.as_slice());
            if next.value.is_finite() && next.value >= ll.value {
                accepted = Some((candidate, next));
                break;
            }
            scale /= 2.0;
        }
        let Some((candidate, next)) = accepted else {
            // no ascent along the Newton direction: at the optimum up to rounding
            converged = max_abs(&ll.gradient) < options.gradient_tolerance.sqrt();
            break;
        };
        let delta = next.value - ll.value;
        rel_change = delta.abs() / ll.value.abs().max(1.0);
        theta = candidate;
        ll = next;
        if max_abs(&theta) > options.separation_bound && rel_change > options.relative_tolerance {
            return Err(separation(&theta));
        }
    }
    if !converged && max_abs(&theta) > options.separation_bound {
        return Err(separation(&theta));
    }

    let info = -&ll.hessian;
    let cov = info
        .try_inverse()
        .ok_or_else(|| EstimateError::SingularInformation("information matrix is singular at the estimate".into()))?;
    let normal = Normal::standard();
    let std_errors: Vec<f64> = (0..k).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();
    let z: Vec<f64> = theta.iter().zip(&std_errors).map(|(t, s)| t / s).collect();
    let p_values = z.iter().map(|z| 2.0 * (1.0 - normal.cdf(z.abs()))).collect();
    let n_observations = strata.iter().map(|s| s.rows().nrows()).sum();
    Ok(ModelFit {
        labels: labels.to_vec(),
        theta: theta.iter().copied().collect(),
        std_errors,
        z,
        p_values,
        log_likelihood: ll.value,
        aic: if converged { aic(ll.value, k) } else { f64::NAN },
        iterations,
        converged,
        n_events: strata.len(),
        n_observations,
    })
}
