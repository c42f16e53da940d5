//! Citation DAG and the network-based rate model (K2).
//!
//! Search Path Node Pairs (SPNP) of a patent counts the citation paths that
//! run through it. With `A(i) = 1 + sum of A(j) over patents j cited by i`
//! (paths from `i` down to earlier patents, the trivial path included) and
//! `B(i) = 1 + sum of B(c) over patents c citing i` (paths from later
//! patents up to `i`), `SPNP(i) = A(i) * B(i)`. Both recursions are solved
//! in topological order with exact big integers; path counts grow
//! exponentially with network depth.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fs;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::constants::constants;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rank::mid_rank_percentiles;
use crate::stats;

#[derive(Debug, Clone)]
pub struct CitationNetwork {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    years: Vec<i32>,
    /// Patents cited by each node.
    cites: Vec<Vec<usize>>,
    /// Patents citing each node.
    cited_by: Vec<Vec<usize>>,
    /// Citing patents before the patents they cite.
    topo: Vec<usize>,
}

impl CitationNetwork {
    /// Builds the network from `(patent, application_year)` nodes and
    /// `(citing, cited)` edges.
    ///
    /// Rejects unknown endpoints, self-citations, duplicate edges, a cited
    /// patent applied for after its citer, and cycles.
    pub fn new(nodes: Vec<(String, i32)>, edges: Vec<(String, String)>) -> Result<Self> {
        let mut ids = Vec::with_capacity(nodes.len());
        let mut years = Vec::with_capacity(nodes.len());
        let mut index = HashMap::with_capacity(nodes.len());
        for (id, year) in nodes {
            if index.insert(id.clone(), ids.len()).is_some() {
                return Err(Error::InvalidInput(format!("duplicate network node {id}")));
            }
            ids.push(id);
            years.push(year);
        }
        let n = ids.len();
        let mut cites = vec![Vec::new(); n];
        let mut cited_by = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(edges.len());
        for (citing, cited) in &edges {
            let lookup = |id: &String| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::InvalidInput(format!("edge endpoint {id} is not a network node")))
            };
            let (a, b) = (lookup(citing)?, lookup(cited)?);
            if a == b {
                return Err(Error::InvalidInput(format!("{citing} cites itself")));
            }
            if !seen.insert((a, b)) {
                return Err(Error::InvalidInput(format!("duplicate edge {citing} -> {cited}")));
            }
            if years[b] > years[a] {
                return Err(Error::InvalidInput(format!(
                    "{citing} ({}) cites {cited}, applied later ({})",
                    years[a], years[b]
                )));
            }
            cites[a].push(b);
            cited_by[b].push(a);
        }

        let mut pending: Vec<usize> = cited_by.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(i) = queue.pop_front() {
            topo.push(i);
            for &j in &cites[i] {
                pending[j] -= 1;
                if pending[j] == 0 {
                    queue.push_back(j);
                }
            }
        }
        if topo.len() < n {
            let stuck = (0..n).find(|&i| pending[i] > 0).expect("unprocessed node");
            return Err(Error::Cycle(ids[stuck].clone()));
        }
        Ok(CitationNetwork {
            ids,
            index,
            years,
            cites,
            cited_by,
            topo,
        })
    }

    /// Network over all dataset patents (application year = filing year) and
    /// the citations among them. Also returns how many backward citations
    /// pointed outside the dataset.
    pub fn from_dataset(d: &Dataset) -> Result<(Self, usize)> {
        let nodes = d.patents().map(|p| (p.patent_number.clone(), p.filed_year)).collect();
        let edges = d.internal_citations();
        let total: usize = d.patents().map(|p| p.cited_patents.len()).sum();
        let external = total - edges.len();
        Ok((Self::new(nodes, edges)?, external))
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.cites.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn application_year(&self, id: &str) -> Option<i32> {
        self.index.get(id).map(|&i| self.years[i])
    }

    pub fn application_years(&self) -> BTreeMap<String, i32> {
        self.ids.iter().cloned().zip(self.years.iter().copied()).collect()
    }

    /// Patents cited by `id`.
    pub fn cited(&self, id: &str) -> Option<impl Iterator<Item = &str>> {
        let &i = self.index.get(id)?;
        Some(self.cites[i].iter().map(|&j| self.ids[j].as_str()))
    }

    /// Number of patents in the network citing `id`.
    pub fn in_degree(&self, id: &str) -> Option<usize> {
        self.index.get(id).map(|&i| self.cited_by[i].len())
    }

    fn by_index<T>(&self, values: Vec<T>) -> BTreeMap<String, T> {
        self.ids.iter().cloned().zip(values).collect()
    }
}

/// Node and edge files as accepted on the command line.
#[derive(Debug, Clone)]
pub struct NetworkFiles {
    pub network: CitationNetwork,
    /// From the optional `publication_year` node column.
    pub publication_years: HashMap<String, i32>,
    /// Edges dropped because an endpoint is not in the node file.
    pub skipped_edges: usize,
}

#[derive(Debug, Deserialize)]
struct NodeRow {
    patent_number: String,
    application_year: i32,
    #[serde(default)]
    publication_year: Option<i32>,
}

#[derive(Debug, Deserialize)]
struct EdgeRow {
    citing_patent: String,
    cited_patent: String,
}

/// Reads `nodes` (`patent_number,application_year[,publication_year]`) and
/// `edges` (`citing_patent,cited_patent`) CSV files.
pub fn load_network(nodes: impl AsRef<Path>, edges: impl AsRef<Path>) -> Result<NetworkFiles> {
    let (np, ep) = (nodes.as_ref(), edges.as_ref());
    let mut rdr = csv::Reader::from_path(np).map_err(|e| Error::csv(np, e))?;
    let node_rows: Vec<NodeRow> = rdr
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::csv(np, e))?;
    let mut rdr = csv::Reader::from_path(ep).map_err(|e| Error::csv(ep, e))?;
    let edge_rows: Vec<EdgeRow> = rdr
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::csv(ep, e))?;

    let known: HashSet<&str> = node_rows.iter().map(|r| r.patent_number.as_str()).collect();
    let mut skipped = 0;
    let mut edges = Vec::with_capacity(edge_rows.len());
    for r in &edge_rows {
        if known.contains(r.citing_patent.as_str()) && known.contains(r.cited_patent.as_str()) {
            edges.push((r.citing_patent.clone(), r.cited_patent.clone()));
        } else {
            skipped += 1;
        }
    }
    let publication_years = node_rows
        .iter()
        .filter_map(|r| r.publication_year.map(|y| (r.patent_number.clone(), y)))
        .collect();
    let nodes = node_rows
        .into_iter()
        .map(|r| (r.patent_number, r.application_year))
        .collect();
    Ok(NetworkFiles {
        network: CitationNetwork::new(nodes, edges)?,
        publication_years,
        skipped_edges: skipped,
    })
}

/// Writes the node and edge files for `net`.
pub fn write_network(net: &CitationNetwork, nodes: impl AsRef<Path>, edges: impl AsRef<Path>) -> Result<()> {
    let (np, ep) = (nodes.as_ref(), edges.as_ref());
    let mut out = String::from("patent_number,application_year\n");
    for (id, y) in net.ids.iter().zip(&net.years) {
        out.push_str(&format!("{id},{y}\n"));
    }
    fs::write(np, out).map_err(|e| Error::io(np, e))?;
    let mut out = String::from("citing_patent,cited_patent\n");
    for (i, cited) in net.cites.iter().enumerate() {
        for &j in cited {
            out.push_str(&format!("{},{}\n", net.ids[i], net.ids[j]));
        }
    }
    fs::write(ep, out).map_err(|e| Error::io(ep, e))
}

fn spnp_exact(net: &CitationNetwork) -> Vec<BigUint> {
    let n = net.len();
    let mut down = vec![BigUint::one(); n];
    for &i in net.topo.iter().rev() {
        let mut acc = BigUint::one();
        for &j in &net.cites[i] {
            acc += &down[j];
        }
        down[i] = acc;
    }
    let mut up = vec![BigUint::one(); n];
    for &i in &net.topo {
        let mut acc = BigUint::one();
        for &c in &net.cited_by[i] {
            acc += &up[c];
        }
        up[i] = acc;
    }
    down.into_iter().zip(up).map(|(d, u)| d * u).collect()
}

/// Exact SPNP of every node.
pub fn compute_spnp(net: &CitationNetwork) -> BTreeMap<String, BigUint> {
    net.by_index(spnp_exact(net))
}

fn ln_one_plus_sum(logs: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = std::iter::once(0.0).chain(logs).collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Natural log of SPNP, for networks too large for exact counting.
///
/// Rounding can reorder near-ties relative to the exact counts.
pub fn compute_spnp_log(net: &CitationNetwork) -> BTreeMap<String, f64> {
    let n = net.len();
    let mut down = vec![0.0; n];
    for &i in net.topo.iter().rev() {
        down[i] = ln_one_plus_sum(net.cites[i].iter().map(|&j| down[j]));
    }
    let mut up = vec![0.0; n];
    for &i in &net.topo {
        up[i] = ln_one_plus_sum(net.cited_by[i].iter().map(|&c| up[c]));
    }
    net.by_index(down.into_iter().zip(up).map(|(d, u)| d + u).collect())
}

fn cohort_percentiles<V, F>(
    values: &BTreeMap<String, V>,
    years: &BTreeMap<String, i32>,
    cmp: F,
) -> Result<BTreeMap<String, f64>>
where
    V: Clone,
    F: FnMut(&V, &V) -> Ordering,
{
    let mut items = Vec::with_capacity(values.len());
    for (id, v) in values {
        let year = *years.get(id).ok_or_else(|| Error::MissingYear(id.clone()))?;
        items.push((id.clone(), year, v.clone()));
    }
    Ok(mid_rank_percentiles(items, cmp))
}

/// Mid-rank percentile of SPNP within each application-year cohort.
pub fn spnp_rank_percentile(
    spnp: &BTreeMap<String, BigUint>,
    application_years: &BTreeMap<String, i32>,
) -> Result<BTreeMap<String, f64>> {
    cohort_percentiles(spnp, application_years, |a, b| a.cmp(b))
}

/// As [`spnp_rank_percentile`] over log-space values. Values are compared
/// on a 1e-9 grid so that equal path counts stay tied despite rounding.
pub fn log_spnp_rank_percentile(
    log_spnp: &BTreeMap<String, f64>,
    application_years: &BTreeMap<String, i32>,
) -> Result<BTreeMap<String, f64>> {
    let grid: BTreeMap<String, f64> = log_spnp.iter().map(|(k, v)| (k.clone(), (v * 1e9).round())).collect();
    cohort_percentiles(&grid, application_years, |a, b| a.total_cmp(b))
}

/// Mid-rank percentile of each node's in-network citation count within its
/// application-year cohort.
pub fn citation_rank_percentile(net: &CitationNetwork) -> BTreeMap<String, f64> {
    let counts = net.by_index(net.cited_by.iter().map(Vec::len).collect());
    cohort_percentiles(&counts, &net.application_years(), |a, b| a.cmp(b)).expect("every node has a year")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainCentrality {
    pub centrality: f64,
    /// Domain patents contributing to the outer mean.
    pub included: usize,
    /// Domain patents citing nothing with a known percentile.
    pub excluded_no_citations: usize,
    /// Cited patents lacking a percentile.
    pub skipped_cited: usize,
}

/// Mean over domain patents of the mean rank percentile of the patents each
/// one cites. Patents citing nothing are left out of the outer mean.
pub fn domain_centrality(
    domain_patents: &[String],
    net: &CitationNetwork,
    rank_percentile: &BTreeMap<String, f64>,
) -> Result<DomainCentrality> {
    let mut sum = 0.0;
    let mut included = 0;
    let mut excluded = 0;
    let mut skipped = 0;
    for id in domain_patents {
        let cited = net
            .cited(id)
            .ok_or_else(|| Error::InvalidInput(format!("domain patent {id} is not in the network")))?;
        let mut inner = 0.0;
        let mut cb = 0usize;
        for j in cited {
            match rank_percentile.get(j) {
                Some(p) => {
                    inner += p;
                    cb += 1;
                }
                None => skipped += 1,
            }
        }
        if cb == 0 {
            excluded += 1;
        } else {
            sum += inner / cb as f64;
            included += 1;
        }
    }
    if included == 0 {
        return Err(Error::InsufficientData(
            "no domain patent cites a patent with a known rank percentile".into(),
        ));
    }
    Ok(DomainCentrality {
        centrality: sum / included as f64,
        included,
        excluded_no_citations: excluded,
        skipped_cited: skipped,
    })
}

/// `true` where the citation percentile reaches `threshold` (inclusive).
pub fn classify_highly_cited(percentiles: &BTreeMap<String, f64>, threshold: f64) -> Result<BTreeMap<String, bool>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidInput(format!("threshold {threshold} outside (0, 1)")));
    }
    Ok(percentiles.iter().map(|(k, &p)| (k.clone(), p >= threshold)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthOfHighlyCited {
    pub z: f64,
    pub n_highly_cited: usize,
    /// `(year, cumulative count)` from the first highly cited year on.
    pub cumsum: Vec<(i32, u64)>,
}

/// Slope of ln(cumulative count of highly cited domain patents) against
/// application year. Zero when nothing is highly cited.
pub fn compute_z(
    domain_patents: &[String],
    highly_cited: &BTreeMap<String, bool>,
    application_years: &BTreeMap<String, i32>,
) -> Result<GrowthOfHighlyCited> {
    let mut counts: BTreeMap<i32, u64> = BTreeMap::new();
    let mut last_year = None;
    for id in domain_patents {
        let year = *application_years
            .get(id)
            .ok_or_else(|| Error::MissingYear(id.clone()))?;
        last_year = last_year.max(Some(year));
        if highly_cited.get(id).copied().unwrap_or(false) {
            *counts.entry(year).or_default() += 1;
        }
    }
    let n_highly_cited = counts.values().sum::<u64>() as usize;
    let (Some((&first, _)), Some(last)) = (counts.first_key_value(), last_year) else {
        return Ok(GrowthOfHighlyCited {
            z: 0.0,
            n_highly_cited,
            cumsum: Vec::new(),
        });
    };
    let mut running = 0u64;
    let cumsum: Vec<(i32, u64)> = (first..=last)
        .map(|y| {
            running += counts.get(&y).copied().unwrap_or(0);
            (y, running)
        })
        .collect();
    let xs: Vec<f64> = cumsum.iter().map(|(y, _)| f64::from(y - first)).collect();
    let ys: Vec<f64> = cumsum.iter().map(|(_, c)| (*c as f64).ln()).collect();
    let z = stats::fit_line(&xs, &ys).map_or(0.0, |f| f.slope);
    Ok(GrowthOfHighlyCited {
        z,
        n_highly_cited,
        cumsum,
    })
}

/// `K2 = exp(5.0575 * centrality + 10.1261 * z - 5.8486)`.
pub fn predict_k2(centrality: f64, z: f64) -> f64 {
    let c = &constants().k2;
    (c.centrality * centrality + c.z * z + c.intercept).exp()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpnpMode {
    #[default]
    Exact,
    LogApprox,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpnpValues {
    Exact(BTreeMap<String, BigUint>),
    Log(BTreeMap<String, f64>),
}

impl SpnpValues {
    /// Printable value for one node (decimal integer, or `ln` value).
    pub fn display(&self, id: &str) -> Option<String> {
        match self {
            SpnpValues::Exact(m) => m.get(id).map(|v| v.to_string()),
            SpnpValues::Log(m) => m.get(id).map(|v| format!("{v}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityResult {
    pub spnp: SpnpValues,
    pub rank_percentile: BTreeMap<String, f64>,
    pub highly_cited: BTreeMap<String, bool>,
    pub centrality: DomainCentrality,
    pub growth: GrowthOfHighlyCited,
    pub k2: f64,
}

/// Runs the full K2 pipeline for `domain_patents` inside `net`.
pub fn analyze_domain(
    net: &CitationNetwork,
    domain_patents: &[String],
    highly_cited_threshold: f64,
    mode: SpnpMode,
) -> Result<CentralityResult> {
    let years = net.application_years();
    let (spnp, rank_percentile) = match mode {
        SpnpMode::Exact => {
            let s = compute_spnp(net);
            let p = spnp_rank_percentile(&s, &years)?;
            (SpnpValues::Exact(s), p)
        }
        SpnpMode::LogApprox => {
            let s = compute_spnp_log(net);
            let p = log_spnp_rank_percentile(&s, &years)?;
            (SpnpValues::Log(s), p)
        }
    };
    let centrality = domain_centrality(domain_patents, net, &rank_percentile)?;
    let domain: BTreeSet<&str> = domain_patents.iter().map(String::as_str).collect();
    let cite_pct: BTreeMap<String, f64> = citation_rank_percentile(net)
        .into_iter()
        .filter(|(k, _)| domain.contains(k.as_str()))
        .collect();
    let highly_cited = classify_highly_cited(&cite_pct, highly_cited_threshold)?;
    let growth = compute_z(domain_patents, &highly_cited, &years)?;
    let k2 = predict_k2(centrality.centrality, growth.z);
    Ok(CentralityResult {
        spnp,
        rank_percentile,
        highly_cited,
        centrality,
        growth,
        k2,
    })
}
