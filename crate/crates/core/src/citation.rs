//! Citation statistics over a patent domain and the publication-year /
//! early-citation rate model (K1).

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::constants::constants;
use crate::data::PatentRecord;
use crate::error::{Error, Result};
use crate::rank::mid_rank_percentiles;

/// Which year of a patent counts as its date in citation windows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YearBasis {
    #[default]
    Grant,
    Filing,
}

impl YearBasis {
    pub fn year_of(self, p: &PatentRecord) -> i32 {
        match self {
            YearBasis::Grant => p.granted_year,
            YearBasis::Filing => p.filed_year,
        }
    }
}

/// Year lookup for every patent in `patents` under `basis`.
pub fn publication_years<'a>(
    patents: impl IntoIterator<Item = &'a PatentRecord>,
    basis: YearBasis,
) -> HashMap<String, i32> {
    patents
        .into_iter()
        .map(|p| (p.patent_number.clone(), basis.year_of(p)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cite3 {
    /// Mean within-window citations per domain patent.
    pub mean: f64,
    /// Sum over the domain (the unnormalized form).
    pub total: u64,
    pub per_patent: BTreeMap<String, u32>,
}

/// Counts, for every domain patent, the citing patents published no more
/// than `window` years after it (grant year of the domain patent against
/// `citing_years` of the citer).
///
/// Edges whose cited end is outside the domain are ignored. A citing patent
/// dated before the cited one is a data error.
pub fn compute_cite3_window(
    patents: &[&PatentRecord],
    edges: &[(String, String)],
    citing_years: &HashMap<String, i32>,
    window: i32,
) -> Result<Cite3> {
    if patents.is_empty() {
        return Err(Error::InsufficientData("empty patent domain".into()));
    }
    let domain: HashMap<&str, i32> = patents
        .iter()
        .map(|p| (p.patent_number.as_str(), p.granted_year))
        .collect();
    let mut per_patent: BTreeMap<String, u32> = patents.iter().map(|p| (p.patent_number.clone(), 0)).collect();
    let mut seen = HashSet::new();
    for (citing, cited) in edges {
        let Some(&cited_year) = domain.get(cited.as_str()) else {
            continue;
        };
        if !seen.insert((citing.as_str(), cited.as_str())) {
            continue;
        }
        let citing_year = *citing_years
            .get(citing)
            .ok_or_else(|| Error::MissingYear(citing.clone()))?;
        let delta = citing_year - cited_year;
        if delta < 0 {
            return Err(Error::InvalidInput(format!(
                "{citing} ({citing_year}) cites {cited} ({cited_year}) before it was published"
            )));
        }
        if delta <= window {
            *per_patent.get_mut(cited).expect("domain patent") += 1;
        }
    }
    let total: u64 = per_patent.values().map(|&c| u64::from(c)).sum();
    Ok(Cite3 {
        mean: total as f64 / patents.len() as f64,
        total,
        per_patent,
    })
}

/// [`compute_cite3_window`] with the standard three-year window.
pub fn compute_cite3(
    patents: &[&PatentRecord],
    edges: &[(String, String)],
    citing_years: &HashMap<String, i32>,
) -> Result<Cite3> {
    compute_cite3_window(patents, edges, citing_years, constants().cite3_window_years)
}

/// Mean grant year of the domain.
pub fn compute_ave_pub_year(patents: &[&PatentRecord]) -> Result<f64> {
    if patents.is_empty() {
        return Err(Error::InsufficientData("empty patent domain".into()));
    }
    let sum: f64 = patents.iter().map(|p| f64::from(p.granted_year)).sum();
    Ok(sum / patents.len() as f64)
}

/// Mid-rank percentile of each patent's count within its cohort.
pub fn cite3_rank_percentile(
    per_patent: &BTreeMap<String, u32>,
    cohort: &HashMap<String, i32>,
) -> Result<BTreeMap<String, f64>> {
    let mut items = Vec::with_capacity(per_patent.len());
    for (number, &count) in per_patent {
        let year = *cohort.get(number).ok_or_else(|| Error::MissingYear(number.clone()))?;
        items.push((number.clone(), year, count));
    }
    Ok(mid_rank_percentiles(items, |a, b| a.cmp(b)))
}

/// `K1 = -31.1285 + 0.0155 * ave_pub_year + 0.1406 * cite3`.
pub fn predict_k1(ave_pub_year: f64, cite3: f64) -> f64 {
    let c = &constants().k1;
    c.intercept + c.ave_pub_year * ave_pub_year + c.cite3 * cite3
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatentCitationStats {
    pub cite_forward: u32,
    pub cite3: u32,
    pub cite3_rank_percentile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainCitationStats {
    pub spc: usize,
    pub cite3: f64,
    pub cite3_total: u64,
    pub ave_pub_year: f64,
    pub cite_forward_mean: f64,
    pub per_patent: BTreeMap<String, PatentCitationStats>,
}

impl DomainCitationStats {
    pub fn k1(&self) -> f64 {
        predict_k1(self.ave_pub_year, self.cite3)
    }
}

/// All domain statistics in one pass. Percentile cohorts are grant years.
pub fn domain_citation_stats(
    patents: &[&PatentRecord],
    edges: &[(String, String)],
    citing_years: &HashMap<String, i32>,
) -> Result<DomainCitationStats> {
    let cite3 = compute_cite3(patents, edges, citing_years)?;
    let ave_pub_year = compute_ave_pub_year(patents)?;
    let cohorts = publication_years(patents.iter().copied(), YearBasis::Grant);
    let pct = cite3_rank_percentile(&cite3.per_patent, &cohorts)?;
    let per_patent = patents
        .iter()
        .map(|p| {
            let n = &p.patent_number;
            (
                n.clone(),
                PatentCitationStats {
                    cite_forward: p.forward_citation_count,
                    cite3: cite3.per_patent[n],
                    cite3_rank_percentile: pct[n],
                },
            )
        })
        .collect();
    let fwd: f64 = patents.iter().map(|p| f64::from(p.forward_citation_count)).sum();
    Ok(DomainCitationStats {
        spc: patents.len(),
        cite3: cite3.mean,
        cite3_total: cite3.total,
        ave_pub_year,
        cite_forward_mean: fwd / patents.len() as f64,
        per_patent,
    })
}
