//! OLS, Poisson and negative binomial (NB2) regression, and the four
//! citation-versus-performance model specifications.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::citation::{domain_citation_stats, publication_years, YearBasis};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stats::{t_test_p_value, z_test_p_value};
use crate::yields::performance_ratio;

pub const INTERCEPT: &str = "intercept";

const THETA_MIN: f64 = 1e-8;
const THETA_MAX: f64 = 1e8;
/// Linear predictor magnitude beyond which a non-converged fit is treated
/// as running off to the boundary.
const BOUNDARY_ETA: f64 = 30.0;

/// Design matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    terms: Vec<String>,
    x: DMatrix<f64>,
}

impl Design {
    /// Prepends an intercept column to `columns`.
    pub fn with_intercept(columns: Vec<(String, Vec<f64>)>, n: usize) -> Result<Self> {
        let mut terms = vec![INTERCEPT.to_string()];
        let mut data = vec![1.0; n];
        for (name, col) in columns {
            if col.len() != n {
                return Err(Error::InvalidInput(format!(
                    "column `{name}` has {} values, expected {n}",
                    col.len()
                )));
            }
            terms.push(name);
            data.extend(col);
        }
        let p = terms.len();
        Self::new(terms, DMatrix::from_vec(n, p, data))
    }

    pub fn new(terms: Vec<String>, x: DMatrix<f64>) -> Result<Self> {
        if terms.len() != x.ncols() {
            return Err(Error::InvalidInput(format!(
                "{} term names for {} columns",
                terms.len(),
                x.ncols()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value in design matrix".into()));
        }
        Ok(Design { terms, x })
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "ols")]
    Ols,
    #[serde(rename = "poisson")]
    Poisson,
    #[serde(rename = "negbin")]
    NegativeBinomial,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Ols => "ols",
            Family::Poisson => "poisson",
            Family::NegativeBinomial => "negbin",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ols" => Ok(Family::Ols),
            "poisson" => Ok(Family::Poisson),
            "negbin" | "nb" | "negative-binomial" | "negative_binomial" => Ok(Family::NegativeBinomial),
            other => Err(Error::InvalidInput(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Converged,
    /// Iteration cap reached; the last iterate is reported.
    MaxIterations,
    /// Estimates diverging toward an infinite value (e.g. an all-zero count
    /// response); the last iterate is reported.
    Boundary,
    /// Negative binomial dispersion ran off to infinity; the fit is the
    /// Poisson fit.
    PoissonEquivalent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlmOptions {
    pub max_iter: usize,
    /// Convergence threshold on the largest coefficient change.
    pub tol: f64,
    /// Accept non-integer responses (quasi-likelihood use).
    pub allow_non_integer: bool,
}

impl Default for GlmOptions {
    fn default() -> Self {
        GlmOptions {
            max_iter: 100,
            tol: 1e-10,
            allow_non_integer: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    pub model_id: Option<u8>,
    pub family: Family,
    pub dependent: Option<String>,
    pub terms: Vec<String>,
    pub coefficients: BTreeMap<String, f64>,
    pub std_errors: BTreeMap<String, f64>,
    pub p_values: BTreeMap<String, f64>,
    pub r_squared: Option<f64>,
    pub aic: Option<f64>,
    pub log_likelihood: f64,
    pub two_log_likelihood: f64,
    pub dispersion: Option<f64>,
    pub n: usize,
    pub n_excluded: usize,
    pub iterations: usize,
    pub status: FitStatus,
    pub warnings: Vec<String>,
}

impl RegressionResult {
    pub fn coefficient(&self, term: &str) -> f64 {
        self.coefficients[term]
    }

    pub fn p_value(&self, term: &str) -> f64 {
        self.p_values[term]
    }

    /// Coefficients in column order.
    pub fn beta(&self) -> Vec<f64> {
        self.terms.iter().map(|t| self.coefficients[t]).collect()
    }
}

struct Solved {
    beta: DVector<f64>,
    /// `(X'WX)^-1`
    cov: DMatrix<f64>,
}

/// Weighted least squares through a QR factorization of `sqrt(W) X`.
fn weighted_least_squares(d: &Design, w: &[f64], z: &[f64]) -> Result<Solved> {
    let (n, p) = (d.n(), d.p());
    let mut xs = d.x.clone();
    let mut zs = DVector::zeros(n);
    for i in 0..n {
        let s = w[i].sqrt();
        xs.row_mut(i).scale_mut(s);
        zs[i] = z[i] * s;
    }
    let qr = xs.qr();
    let r = qr.r();
    let scale = (0..p).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    if let Some(j) = (0..p).find(|&j| {
        let pivot = r[(j, j)].abs();
        pivot.is_nan() || pivot <= 1e-10 * scale
    }) {
        return Err(Error::RankDeficient(d.terms[j].clone()));
    }
    let qtz = qr.q().transpose() * zs;
    let beta = r
        .solve_upper_triangular(&qtz)
        .ok_or_else(|| Error::Numeric("triangular solve failed".into()))?;
    let rinv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::Numeric("triangular inverse failed".into()))?;
    Ok(Solved {
        beta,
        cov: &rinv * rinv.transpose(),
    })
}

fn check_shape(y: &[f64], d: &Design) -> Result<()> {
    if y.len() != d.n() {
        return Err(Error::InvalidInput(format!(
            "{} responses for {} design rows",
            y.len(),
            d.n()
        )));
    }
    if d.n() <= d.p() {
        return Err(Error::InsufficientData(format!(
            "{} observations for {} parameters",
            d.n(),
            d.p()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite response".into()));
    }
    Ok(())
}

fn check_counts(y: &[f64], opts: &GlmOptions) -> Result<()> {
    if let Some(v) = y.iter().find(|v| **v < 0.0) {
        return Err(Error::InvalidInput(format!("negative response {v}")));
    }
    if !opts.allow_non_integer {
        if let Some(v) = y.iter().find(|v| v.fract() != 0.0) {
            return Err(Error::InvalidInput(format!("non-integer count response {v}")));
        }
    }
    Ok(())
}

fn to_map(terms: &[String], values: impl IntoIterator<Item = f64>) -> BTreeMap<String, f64> {
    terms.iter().cloned().zip(values).collect()
}

/// Least squares with unbiased residual variance, t-tests and R².
pub fn fit_ols(y: &[f64], d: &Design) -> Result<RegressionResult> {
    check_shape(y, d)?;
    let (n, p) = (d.n(), d.p());
    let s = weighted_least_squares(d, &vec![1.0; n], y)?;
    let fitted = &d.x * &s.beta;
    let ssr: f64 = (0..n).map(|i| (y[i] - fitted[i]).powi(2)).sum();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let df = (n - p) as f64;
    let sigma2 = ssr / df;
    let se: Vec<f64> = (0..p).map(|j| (sigma2 * s.cov[(j, j)]).sqrt()).collect();
    let pv: Vec<f64> = (0..p).map(|j| t_test_p_value(s.beta[j], se[j], df)).collect();
    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let ll = -0.5 * n as f64 * ((2.0 * std::f64::consts::PI * ssr / n as f64).ln() + 1.0);
    Ok(RegressionResult {
        model_id: None,
        family: Family::Ols,
        dependent: None,
        terms: d.terms.clone(),
        coefficients: to_map(&d.terms, s.beta.iter().copied()),
        std_errors: to_map(&d.terms, se),
        p_values: to_map(&d.terms, pv),
        r_squared: Some(r_squared),
        aic: None,
        log_likelihood: ll,
        two_log_likelihood: 2.0 * ll,
        dispersion: None,
        n,
        n_excluded: 0,
        iterations: 1,
        status: FitStatus::Converged,
        warnings: Vec::new(),
    })
}

fn poisson_log_likelihood(y: &[f64], mu: &[f64]) -> f64 {
    y.iter()
        .zip(mu)
        .map(|(&y, &m)| {
            let term = if y > 0.0 { y * m.ln() } else { 0.0 };
            term - m - ln_gamma(y + 1.0)
        })
        .sum()
}

fn nb_log_likelihood(y: &[f64], mu: &[f64], theta: f64) -> f64 {
    y.iter()
        .zip(mu)
        .map(|(&y, &m)| {
            let log_p = -(m / theta).ln_1p();
            let log_q = if y > 0.0 { y * (m.ln() - (theta + m).ln()) } else { 0.0 };
            ln_gamma(y + theta) - ln_gamma(theta) - ln_gamma(y + 1.0) + theta * log_p + log_q
        })
        .sum()
}

/// `d/dθ` of the NB2 log-likelihood at fixed means.
fn theta_score(y: &[f64], mu: &[f64], theta: f64) -> f64 {
    y.iter()
        .zip(mu)
        .map(|(&y, &m)| {
            let digamma_gap = if y.fract() == 0.0 && y < 1e4 {
                (0..y as u64).map(|k| 1.0 / (theta + k as f64)).sum()
            } else {
                digamma(y + theta) - digamma(theta)
            };
            digamma_gap - (m / theta).ln_1p() + (m - y) / (theta + m)
        })
        .sum()
}

struct Irls {
    beta: DVector<f64>,
    cov: DMatrix<f64>,
    mu: Vec<f64>,
    iterations: usize,
    converged: bool,
    max_eta: f64,
}

/// Log-link IRLS. `theta = None` is Poisson, otherwise NB2 with fixed θ.
fn irls(y: &[f64], d: &Design, theta: Option<f64>, start: Option<&DVector<f64>>, opts: &GlmOptions) -> Result<Irls> {
    let n = d.n();
    let weight = |m: f64| match theta {
        None => m,
        Some(t) => m * t / (t + m),
    };
    let (mut eta, mut mu): (Vec<f64>, Vec<f64>) = match start {
        Some(b) => {
            let eta: Vec<f64> = (&d.x * b).iter().copied().collect();
            let mu = eta.iter().map(|e| e.exp()).collect();
            (eta, mu)
        }
        None => {
            let mu: Vec<f64> = y.iter().map(|v| v + 0.1).collect();
            (mu.iter().map(|m| m.ln()).collect(), mu)
        }
    };
    let mut beta = start.cloned();
    let mut iterations = 0;
    let mut converged = false;
    let mut cov = DMatrix::zeros(d.p(), d.p());
    while iterations < opts.max_iter {
        iterations += 1;
        let w: Vec<f64> = mu.iter().map(|&m| weight(m)).collect();
        let z: Vec<f64> = (0..n).map(|i| eta[i] + (y[i] - mu[i]) / mu[i]).collect();
        let s = weighted_least_squares(d, &w, &z)?;
        let change = beta
            .as_ref()
            .map(|b: &DVector<f64>| (&s.beta - b).amax())
            .unwrap_or(f64::INFINITY);
        eta = (&d.x * &s.beta).iter().copied().collect();
        mu = eta.iter().map(|e| e.exp()).collect();
        beta = Some(s.beta);
        cov = s.cov;
        if !change.is_finite() && iterations > 1 {
            return Err(Error::Numeric("IRLS produced non-finite coefficients".into()));
        }
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    let beta = beta.expect("at least one iteration");
    if beta.iter().any(|b| !b.is_finite()) || mu.iter().any(|m| !m.is_finite()) {
        return Err(Error::Numeric("IRLS produced non-finite values".into()));
    }
    // Covariance at the final means.
    let w: Vec<f64> = mu.iter().map(|&m| weight(m)).collect();
    if let Ok(s) = weighted_least_squares(d, &w, &eta) {
        cov = s.cov;
    }
    let max_eta = eta.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    Ok(Irls {
        beta,
        cov,
        mu,
        iterations,
        converged,
        max_eta,
    })
}

fn glm_result(
    d: &Design,
    family: Family,
    fit: &Irls,
    ll: f64,
    extra_params: usize,
    dispersion: Option<f64>,
    status: FitStatus,
) -> RegressionResult {
    let p = d.p();
    let se: Vec<f64> = (0..p).map(|j| fit.cov[(j, j)].max(0.0).sqrt()).collect();
    let pv: Vec<f64> = (0..p).map(|j| z_test_p_value(fit.beta[j], se[j])).collect();
    let k = (p + extra_params) as f64;
    let mut warnings = Vec::new();
    match status {
        FitStatus::MaxIterations => warnings.push(format!("no convergence after {} iterations", fit.iterations)),
        FitStatus::Boundary => warnings.push("estimates diverging toward the parameter boundary".into()),
        FitStatus::PoissonEquivalent => {
            warnings.push("no overdispersion: dispersion diverges, fit equals Poisson".into())
        }
        FitStatus::Converged => {}
    }
    RegressionResult {
        model_id: None,
        family,
        dependent: None,
        terms: d.terms.clone(),
        coefficients: to_map(&d.terms, fit.beta.iter().copied()),
        std_errors: to_map(&d.terms, se),
        p_values: to_map(&d.terms, pv),
        r_squared: None,
        aic: Some(2.0 * k - 2.0 * ll),
        log_likelihood: ll,
        two_log_likelihood: 2.0 * ll,
        dispersion,
        n: d.n(),
        n_excluded: 0,
        iterations: fit.iterations,
        status,
        warnings,
    }
}

fn irls_status(fit: &Irls) -> FitStatus {
    if fit.converged {
        FitStatus::Converged
    } else if fit.max_eta > BOUNDARY_ETA {
        FitStatus::Boundary
    } else {
        FitStatus::MaxIterations
    }
}

/// Log-link Poisson maximum likelihood by IRLS, with Wald standard errors.
pub fn fit_poisson(y: &[f64], d: &Design, opts: &GlmOptions) -> Result<RegressionResult> {
    check_shape(y, d)?;
    check_counts(y, opts)?;
    let fit = irls(y, d, None, None, opts)?;
    let ll = poisson_log_likelihood(y, &fit.mu);
    Ok(glm_result(d, Family::Poisson, &fit, ll, 0, None, irls_status(&fit)))
}

/// Maximizes the NB2 likelihood in θ at fixed means; `None` when the score
/// is still positive at the upper bound.
fn solve_theta(y: &[f64], mu: &[f64]) -> Option<f64> {
    if theta_score(y, mu, THETA_MAX) > 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (THETA_MIN.ln(), THETA_MAX.ln());
    if theta_score(y, mu, THETA_MIN) <= 0.0 {
        return Some(THETA_MIN);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if theta_score(y, mu, mid.exp()) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Some((0.5 * (lo + hi)).exp())
}

/// NB2 regression (variance `μ + μ²/θ`) alternating IRLS for the
/// coefficients and a one-dimensional search for θ.
pub fn fit_negative_binomial(y: &[f64], d: &Design, opts: &GlmOptions) -> Result<RegressionResult> {
    check_shape(y, d)?;
    check_counts(y, opts)?;
    let poisson = irls(y, d, None, None, opts)?;
    let poisson_ll = poisson_log_likelihood(y, &poisson.mu);
    let equivalent = |fit: &Irls| {
        glm_result(
            d,
            Family::NegativeBinomial,
            fit,
            poisson_ll,
            1,
            None,
            FitStatus::PoissonEquivalent,
        )
    };
    if !poisson.converged {
        let mut r = glm_result(
            d,
            Family::NegativeBinomial,
            &poisson,
            poisson_ll,
            1,
            None,
            irls_status(&poisson),
        );
        r.warnings.push("starting Poisson fit did not converge".into());
        return Ok(r);
    }

    let mut fit = poisson;
    let mut theta = match solve_theta(y, &fit.mu) {
        Some(t) => t,
        None => return Ok(equivalent(&fit)),
    };
    let mut total_iter = fit.iterations;
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let next = irls(y, d, Some(theta), Some(&fit.beta), opts)?;
        total_iter += next.iterations;
        let beta_change = (&next.beta - &fit.beta).amax();
        fit = next;
        let Some(next_theta) = solve_theta(y, &fit.mu) else {
            let p = irls(y, d, None, Some(&fit.beta), opts)?;
            return Ok(equivalent(&p));
        };
        let theta_change = (next_theta.ln() - theta.ln()).abs();
        theta = next_theta;
        if beta_change < opts.tol && theta_change < 1e-8 {
            converged = true;
            break;
        }
    }
    let ll = nb_log_likelihood(y, &fit.mu, theta);
    if ll < poisson_ll {
        let p = irls(y, d, None, None, opts)?;
        return Ok(equivalent(&p));
    }
    let mut status = irls_status(&fit);
    if !converged && status == FitStatus::Converged {
        status = FitStatus::MaxIterations;
    }
    fit.iterations = total_iter;
    let mut r = glm_result(d, Family::NegativeBinomial, &fit, ll, 1, Some(theta), status);
    if theta <= THETA_MIN {
        r.warnings.push("dispersion at its lower search bound".into());
    }
    Ok(r)
}

pub fn fit(family: Family, y: &[f64], d: &Design, opts: &GlmOptions) -> Result<RegressionResult> {
    match family {
        Family::Ols => fit_ols(y, d),
        Family::Poisson => fit_poisson(y, d, opts),
        Family::NegativeBinomial => fit_negative_binomial(y, d, opts),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dependent {
    CiteForward,
    Cite3,
    Cite3RankPercentile,
}

impl Dependent {
    pub fn column(self) -> &'static str {
        match self {
            Dependent::CiteForward => "cite_forward",
            Dependent::Cite3 => "cite3",
            Dependent::Cite3RankPercentile => "cite3_rank_percentile",
        }
    }

    fn value(self, r: &AnalysisRow) -> f64 {
        match self {
            Dependent::CiteForward => r.cite_forward,
            Dependent::Cite3 => r.cite3,
            Dependent::Cite3RankPercentile => r.cite3_rank_percentile,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regressor {
    PerformanceRatio,
    YearFiled,
}

impl Regressor {
    pub fn column(self) -> &'static str {
        match self {
            Regressor::PerformanceRatio => "performance_ratio",
            Regressor::YearFiled => "filed_year",
        }
    }

    fn value(self, r: &AnalysisRow) -> f64 {
        match self {
            Regressor::PerformanceRatio => r.performance_ratio,
            Regressor::YearFiled => f64::from(r.filed_year),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub id: u8,
    pub dependent: Dependent,
    pub independents: Vec<Regressor>,
    pub family: Family,
}

impl ModelSpec {
    /// One of the four standard specifications.
    pub fn table(id: u8, family: Family) -> Result<Self> {
        use Regressor::*;
        let (dependent, independents) = match id {
            1 => (Dependent::CiteForward, vec![PerformanceRatio, YearFiled]),
            2 => (Dependent::Cite3, vec![PerformanceRatio, YearFiled]),
            3 => (Dependent::Cite3RankPercentile, vec![PerformanceRatio, YearFiled]),
            4 => (Dependent::CiteForward, vec![PerformanceRatio]),
            _ => return Err(Error::InvalidInput(format!("model id {id} not in 1..=4"))),
        };
        Ok(ModelSpec {
            id,
            dependent,
            independents,
            family,
        })
    }
}

/// One patent's row of the model table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRow {
    pub patent_number: String,
    pub cite_forward: f64,
    pub cite3: f64,
    pub cite3_rank_percentile: f64,
    pub performance_ratio: f64,
    pub filed_year: i32,
}

pub const BOUNDED_RESPONSE_WARNING: &str =
    "cite3_rank_percentile is bounded in [0, 1] and not a count; linear and count models are ill-suited to it";

/// Fits `spec` to `rows` after dropping patents listed in `exclusions`.
pub fn run_model(
    spec: &ModelSpec,
    rows: &[AnalysisRow],
    exclusions: &BTreeSet<String>,
    opts: &GlmOptions,
) -> Result<RegressionResult> {
    let kept: Vec<&AnalysisRow> = rows.iter().filter(|r| !exclusions.contains(&r.patent_number)).collect();
    if kept.is_empty() {
        return Err(Error::InsufficientData("no rows left after exclusions".into()));
    }
    let y: Vec<f64> = kept.iter().map(|r| spec.dependent.value(r)).collect();
    let columns = spec
        .independents
        .iter()
        .map(|reg| (reg.column().to_string(), kept.iter().map(|r| reg.value(r)).collect()))
        .collect();
    let d = Design::with_intercept(columns, kept.len())?;
    let bounded = spec.dependent == Dependent::Cite3RankPercentile;
    let opts = GlmOptions {
        allow_non_integer: opts.allow_non_integer || bounded,
        ..*opts
    };
    let mut r = fit(spec.family, &y, &d, &opts)?;
    r.model_id = Some(spec.id);
    r.dependent = Some(spec.dependent.column().to_string());
    r.n_excluded = rows.len() - kept.len();
    if bounded {
        r.warnings.insert(0, BOUNDED_RESPONSE_WARNING.to_string());
    }
    Ok(r)
}

/// Model table for every patent with trial data. Cite3 uses `basis` for the
/// citing patent's year; percentiles are within grant-year cohorts.
pub fn analysis_table(d: &Dataset, basis: YearBasis) -> Result<Vec<AnalysisRow>> {
    let mut trial = Vec::new();
    let mut ratios = BTreeMap::new();
    for ts in d.trial_sets() {
        let p = d
            .patent(&ts.patent_number)
            .ok_or_else(|| Error::InvalidInput(format!("trial patent {} unknown", ts.patent_number)))?;
        if ts.comparisons.is_empty() {
            continue;
        }
        ratios.insert(p.patent_number.clone(), performance_ratio(ts)?);
        trial.push(p);
    }
    if trial.is_empty() {
        return Err(Error::InsufficientData("no patents with trial data".into()));
    }
    let edges = d.internal_citations();
    let years = publication_years(d.patents(), basis);
    let stats = domain_citation_stats(&trial, &edges, &years)?;
    Ok(trial
        .iter()
        .map(|p| {
            let s = &stats.per_patent[&p.patent_number];
            AnalysisRow {
                patent_number: p.patent_number.clone(),
                cite_forward: f64::from(s.cite_forward),
                cite3: f64::from(s.cite3),
                cite3_rank_percentile: s.cite3_rank_percentile,
                performance_ratio: ratios[&p.patent_number],
                filed_year: p.filed_year,
            }
        })
        .collect())
}

pub fn read_analysis_table(path: impl AsRef<Path>) -> Result<Vec<AnalysisRow>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    rdr.deserialize()
        .collect::<std::result::Result<Vec<AnalysisRow>, _>>()
        .map_err(|e| Error::csv(path, e))
}

pub fn analysis_table_csv(rows: &[AnalysisRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv("<memory>", e))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numeric(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reads one patent number per line; blank lines and `#` comments ignored.
pub fn read_exclusions(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_exclusions(&text))
}

pub fn parse_exclusions(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}
