//! Log-link Poisson (quasi-)maximum likelihood by iteratively reweighted
//! least squares.
//!
//! Outcomes only need to be nonnegative reals; hours are not counts. The
//! only standard errors offered are heteroskedasticity-robust sandwich
//! errors with the `n / (n - 1)` small-sample factor.

use nalgebra::{DMatrix, DVector};

use crate::error::SurveyError;
use crate::spline;
use crate::survey::SurveyRecord;

const MAX_ITERATIONS: usize = 100;
const SCORE_TOLERANCE: f64 = 1e-8;
const STEP_TOLERANCE: f64 = 1e-10;
const COLLINEARITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Transform {
    #[default]
    Log,
    Level,
}

impl std::str::FromStr for Transform {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "log" => Ok(Transform::Log),
            "level" => Ok(Transform::Level),
            other => Err(format!("unknown transform `{other}` (expected log or level)")),
        }
    }
}

/// Regression specification over survey variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSpec {
    pub outcome: String,
    /// Focal regressors, each entered through `transform`.
    pub regressors: Vec<String>,
    pub transform: Transform,
    /// Variable expanded into a four-knot restricted cubic spline.
    pub spline: Option<String>,
    /// Further controls entered in levels.
    pub controls: Vec<String>,
}

impl PoissonSpec {
    pub fn new(outcome: impl Into<String>, regressors: &[&str], transform: Transform) -> Self {
        Self {
            outcome: outcome.into(),
            regressors: regressors.iter().map(|s| s.to_string()).collect(),
            transform,
            spline: None,
            controls: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonFit {
    pub terms: Vec<String>,
    pub coefficients: Vec<f64>,
    pub robust_se: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm of the score `X'(y - μ)` at the solution.
    pub score_max: f64,
    pub observations: usize,
}

impl PoissonFit {
    pub fn coefficient(&self, term: &str) -> Option<f64> {
        self.terms.iter().position(|t| t == term).map(|i| self.coefficients[i])
    }

    pub fn se(&self, term: &str) -> Option<f64> {
        self.terms.iter().position(|t| t == term).map(|i| self.robust_se[i])
    }
}

pub fn poisson_fit(
    records: &[SurveyRecord],
    outcome: &str,
    regressors: &[&str],
    transform: Transform,
) -> Result<PoissonFit, SurveyError> {
    fit_spec(records, &PoissonSpec::new(outcome, regressors, transform))
}

fn column(records: &[SurveyRecord], name: &str) -> Result<Vec<f64>, SurveyError> {
    records
        .iter()
        .map(|r| r.value(name).ok_or_else(|| SurveyError::UnknownVariable(name.to_string())))
        .collect()
}

/// Outcome vector, design matrix and column names.
pub type Design = (DVector<f64>, DMatrix<f64>, Vec<String>);

/// Builds the design `[1, transform(regressors), spline terms, controls]`.
pub fn design(records: &[SurveyRecord], spec: &PoissonSpec) -> Result<Design, SurveyError> {
    let y = column(records, &spec.outcome)?;
    if let Some(&bad) = y.iter().find(|v| **v < 0.0) {
        return Err(SurveyError::NegativeOutcome {
            variable: spec.outcome.clone(),
            value: bad,
        });
    }
    let n = records.len();
    let mut names = vec!["_cons".to_string()];
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for name in &spec.regressors {
        let raw = column(records, name)?;
        match spec.transform {
            Transform::Level => {
                names.push(name.clone());
                cols.push(raw);
            }
            Transform::Log => {
                if let Some(&bad) = raw.iter().find(|v| v.is_nan() || **v <= 0.0) {
                    return Err(SurveyError::NonPositiveLog {
                        variable: name.clone(),
                        value: bad,
                    });
                }
                names.push(format!("log_{name}"));
                cols.push(raw.iter().map(|v| v.ln()).collect());
            }
        }
    }
    if let Some(var) = &spec.spline {
        let raw = column(records, var)?;
        let knots = spline::default_knots(&raw).ok_or_else(|| SurveyError::DegenerateKnots(var.clone()))?;
        let terms: Vec<[f64; 2]> = raw.iter().map(|&x| spline::nonlinear_terms(x, &knots)).collect();
        names.push(format!("{var}_rcs1"));
        cols.push(raw);
        for j in 0..2 {
            names.push(format!("{var}_rcs{}", j + 2));
            cols.push(terms.iter().map(|t| t[j]).collect());
        }
    }
    for name in &spec.controls {
        names.push(name.clone());
        cols.push(column(records, name)?);
    }
    let x = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    Ok((DVector::from_vec(y), x, names))
}

pub fn fit_spec(records: &[SurveyRecord], spec: &PoissonSpec) -> Result<PoissonFit, SurveyError> {
    let (y, x, names) = design(records, spec)?;
    fit_design(&y, &x, names)
}

/// Names the first column lying in the span of the ones before it.
fn check_rank(x: &DMatrix<f64>, names: &[String]) -> Result<(), SurveyError> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j).into_owned();
        let norm = col.norm();
        let mut r = col.clone();
        for q in &basis {
            let proj = q.dot(&r);
            r -= q * proj;
        }
        if norm == 0.0 || r.norm() <= COLLINEARITY_TOLERANCE * norm {
            let with = if j == 0 {
                Vec::new()
            } else {
                let prev = x.columns(0, j).into_owned();
                let coef = prev
                    .svd(true, true)
                    .solve(&col, 1e-12)
                    .unwrap_or_else(|_| DVector::zeros(j));
                (0..j)
                    .filter(|&i| coef[i].abs() > 1e-8)
                    .map(|i| names[i].clone())
                    .collect()
            };
            return Err(SurveyError::RankDeficient {
                column: names[j].clone(),
                with,
            });
        }
        let rn = r.norm();
        basis.push(r / rn);
    }
    Ok(())
}

fn log_likelihood(y: &DVector<f64>, mu: &DVector<f64>) -> f64 {
    y.iter()
        .zip(mu.iter())
        .map(|(&yi, &mi)| {
            let ylog = if yi > 0.0 { yi * mi.ln() } else { 0.0 };
            ylog - mi - libm::lgamma(yi + 1.0)
        })
        .sum()
}

/// Fits `E[y | x] = exp(x'β)` on an explicit design matrix.
pub fn fit_design(y: &DVector<f64>, x: &DMatrix<f64>, terms: Vec<String>) -> Result<PoissonFit, SurveyError> {
    let (n, k) = x.shape();
    assert_eq!(y.len(), n);
    assert_eq!(terms.len(), k);
    check_rank(x, &terms)?;
    if n <= k {
        return Err(SurveyError::RankDeficient {
            column: terms[k - 1].clone(),
            with: terms[..k - 1].to_vec(),
        });
    }

    let singular = || SurveyError::RankDeficient {
        column: terms[k - 1].clone(),
        with: terms[..k - 1].to_vec(),
    };
    let quasi_ll = |eta: &DVector<f64>| -> f64 { y.iter().zip(eta.iter()).map(|(yi, e)| yi * e - e.exp()).sum() };

    // The first pass is a weighted least-squares fit of the working response
    // from the standard start μ₀ = (y + ȳ) / 2. Later passes solve for the
    // increment X'WX Δ = X'(y - μ) directly, which keeps full precision in
    // the score near the optimum.
    let ybar = y.mean();
    let eta0 = y.map(|yi| (0.5 * (yi + ybar)).max(1e-8).ln());
    let mu0 = eta0.map(f64::exp);
    let z = DVector::from_fn(n, |i, _| eta0[i] + (y[i] - mu0[i]) / mu0[i]);
    let xtw = DMatrix::from_fn(k, n, |j, i| x[(i, j)] * mu0[i]);
    let mut beta = (&xtw * x).cholesky().ok_or_else(singular)?.solve(&(&xtw * z));
    let mut eta = x * &beta;
    let mut mu = eta.map(f64::exp);
    let mut ll = quasi_ll(&eta);
    let mut converged = false;
    let mut iterations = 1;
    let mut score_max = f64::INFINITY;

    for it in 2..=MAX_ITERATIONS {
        iterations = it;
        let score = x.transpose() * (y - &mu);
        score_max = score.amax();
        if !score_max.is_finite() {
            break;
        }
        let info = DMatrix::from_fn(k, n, |j, i| x[(i, j)] * mu[i]) * x;
        let delta = info.cholesky().ok_or_else(singular)?.solve(&score);
        let mut t = 1.0;
        let (next, next_eta, next_ll) = loop {
            let cand = &beta + &delta * t;
            let cand_eta = x * &cand;
            let cand_ll = quasi_ll(&cand_eta);
            if cand_ll.is_finite() && cand_ll >= ll - 1e-12 * ll.abs() || t < 1e-10 {
                break (cand, cand_eta, cand_ll);
            }
            t *= 0.5;
        };
        let step = (&next - &beta).amax();
        beta = next;
        eta = next_eta;
        ll = next_ll;
        mu = eta.map(f64::exp);
        score_max = (x.transpose() * (y - &mu)).amax();
        if step <= STEP_TOLERANCE * (1.0 + beta.amax()) && score_max <= SCORE_TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SurveyError::NonConvergence {
            iterations,
            score: score_max,
        });
    }

    // sandwich A⁻¹ B A⁻¹ with A = X'diag(μ)X, B = Σ (y - μ)² x x'
    let a = DMatrix::from_fn(k, n, |j, i| x[(i, j)] * mu[i]) * x;
    let resid = y - &mu;
    let xr = DMatrix::from_fn(k, n, |j, i| x[(i, j)] * resid[i]);
    let b = &xr * xr.transpose();
    let a_inv = a.try_inverse().ok_or(SurveyError::NonConvergence {
        iterations,
        score: score_max,
    })?;
    let factor = n as f64 / (n as f64 - 1.0);
    let cov = &a_inv * b * &a_inv * factor;
    let robust_se = (0..k).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();

    Ok(PoissonFit {
        terms,
        coefficients: beta.iter().copied().collect(),
        robust_se,
        log_likelihood: log_likelihood(y, &mu),
        iterations,
        converged,
        score_max,
        observations: n,
    })
}
