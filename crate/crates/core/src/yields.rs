//! Per-patent and per-year yield statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{FieldTestRecord, PatentTrialSet};
use crate::error::{Error, Result};
use crate::trend::TrendSeries;

/// Mean patented yield over all reported tests.
pub fn yield_a(ts: &PatentTrialSet) -> f64 {
    ts.comparisons.iter().map(|c| c.patented_yield).sum::<f64>() / ts.n_tests() as f64
}

/// Best patented yield over all reported tests.
pub fn yield_b(ts: &PatentTrialSet) -> f64 {
    ts.comparisons
        .iter()
        .map(|c| c.patented_yield)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Mean of the per-test ratios patented / control (not the ratio of means).
pub fn performance_ratio(ts: &PatentTrialSet) -> Result<f64> {
    let mut sum = 0.0;
    for c in &ts.comparisons {
        if c.control_yield <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "patent {}: zero control yield for `{}`",
                ts.patent_number, c.control_name
            )));
        }
        sum += c.patented_yield / c.control_yield;
    }
    Ok(sum / ts.n_tests() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YieldSummary {
    pub patent_number: String,
    pub yield_a: f64,
    pub yield_b: f64,
    pub performance_ratio: f64,
    pub n_tests: usize,
}

impl YieldSummary {
    pub fn from_trial_set(ts: &PatentTrialSet) -> Result<Self> {
        if ts.comparisons.is_empty() {
            return Err(Error::InsufficientData(format!(
                "patent {} has no trial comparisons",
                ts.patent_number
            )));
        }
        Ok(YieldSummary {
            patent_number: ts.patent_number.clone(),
            yield_a: yield_a(ts),
            yield_b: yield_b(ts),
            performance_ratio: performance_ratio(ts)?,
            n_tests: ts.n_tests(),
        })
    }
}

/// Best `yield_b` among patents filed in each year. Years without a patent
/// are simply absent.
pub fn yearly_max_yield(summaries: &[(i32, YieldSummary)]) -> Result<TrendSeries> {
    if summaries.is_empty() {
        return Err(Error::InsufficientData("no yield summaries".into()));
    }
    let mut best: BTreeMap<i32, f64> = BTreeMap::new();
    for (year, s) in summaries {
        let e = best.entry(*year).or_insert(f64::NEG_INFINITY);
        *e = e.max(s.yield_b);
    }
    TrendSeries::new(best.into_iter().collect())
}

/// How rows are combined into one state value per year.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    /// Mean per (year, region), then mean over regions.
    #[default]
    TwoStage,
    /// Plain mean over all rows of the year.
    Pooled,
}

pub fn state_yearly_average(tests: &[FieldTestRecord]) -> Result<TrendSeries> {
    state_yearly_average_with(tests, Averaging::TwoStage)
}

pub fn state_yearly_average_with(tests: &[FieldTestRecord], mode: Averaging) -> Result<TrendSeries> {
    if tests.is_empty() {
        return Err(Error::InsufficientData("no field-test rows".into()));
    }
    let mut cells: BTreeMap<i32, BTreeMap<&str, (f64, usize)>> = BTreeMap::new();
    for t in tests {
        let region = match mode {
            Averaging::TwoStage => t.region.as_str(),
            Averaging::Pooled => "",
        };
        let cell = cells.entry(t.year).or_default().entry(region).or_default();
        cell.0 += t.yield_bu;
        cell.1 += 1;
    }
    let points = cells
        .into_iter()
        .map(|(year, regions)| {
            let n = regions.len() as f64;
            let total: f64 = regions.values().map(|(s, c)| s / *c as f64).sum();
            (year, total / n)
        })
        .collect();
    TrendSeries::new(points)
}

/// Mean yield of `variety` across regions in the first year it was tested.
pub fn first_year_field_yield(tests: &[FieldTestRecord], variety: &str) -> Option<(i32, f64)> {
    let wanted = crate::title::normalize_variety(variety);
    let rows: Vec<&FieldTestRecord> = tests
        .iter()
        .filter(|t| crate::title::normalize_variety(&t.hybrid) == wanted)
        .collect();
    let first = rows.iter().map(|t| t.year).min()?;
    let ys: Vec<f64> = rows.iter().filter(|t| t.year == first).map(|t| t.yield_bu).collect();
    Some((first, crate::stats::mean(&ys)?))
}
