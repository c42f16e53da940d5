//! Published model coefficients and run defaults, loaded from the bundled
//! `data/constants.json` so every report can echo exactly what it used.

use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

pub const CONSTANTS_JSON: &str = include_str!("../data/constants.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct K1Coefficients {
    pub intercept: f64,
    pub ave_pub_year: f64,
    pub cite3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct K2Coefficients {
    pub intercept: f64,
    pub centrality: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub version: String,
    pub k1: K1Coefficients,
    pub k2: K2Coefficients,
    pub cite3_window_years: i32,
    pub citation_cutoff_year: i32,
    /// Early, very highly cited patents dropped from the citation regressions.
    pub highly_cited_exclusions: Vec<String>,
    pub late_filing_cutoff_year: i32,
    pub prediction_filed_until: Vec<i32>,
    pub hybrid_filing_jump_year: i32,
    pub default_highly_cited_threshold: f64,
    pub default_control_min_years: usize,
}

static CONSTANTS: LazyLock<Constants> =
    LazyLock::new(|| serde_json::from_str(CONSTANTS_JSON).expect("bundled constants.json is valid"));

pub fn constants() -> &'static Constants {
    &CONSTANTS
}
