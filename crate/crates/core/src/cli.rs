//! Command-line front end: `ingest`, `trend`, `predict`, `regress`, `report`.
//!
//! Every command prints one JSON document to stdout and, with `--out`,
//! writes the same document plus CSV tables into that directory. JSON keys
//! are emitted in a fixed order, and `--no-timestamp` removes the only
//! run-dependent field, so repeated runs are byte-identical.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::citation::{domain_citation_stats, publication_years, YearBasis};
use crate::constants::constants;
use crate::data::{
    load_dataset, load_field_tests, load_patents, load_trial_sets, save_dataset_stamped, Dataset, FieldSchema,
    IngestReport, PatentKind, PatentRecord, DEFAULT_CITATION_CUTOFF_YEAR,
};
use crate::error::{Error, Result};
use crate::network::{analyze_domain, load_network, CitationNetwork, SpnpMode};
use crate::regression::{
    analysis_table, analysis_table_csv, read_analysis_table, read_exclusions, run_model, AnalysisRow, Family,
    GlmOptions, ModelSpec, RegressionResult,
};
use crate::stats;
use crate::title::{annotate_patents, match_patented_varieties, PrefixTable};
use crate::trend::{find_control_varieties, fit_exponential, weather_corrected_series, FitResult, TrendSeries};
use crate::yields::{state_yearly_average_with, yearly_max_yield, Averaging, YieldSummary};

#[derive(Debug, Parser)]
#[command(
    name = "cornrate",
    version,
    about = "Improvement-rate estimation from patents and yield trials"
)]
pub struct Cli {
    /// Dataset directory written by `ingest`.
    #[arg(long, global = true)]
    pub dataset: Option<PathBuf>,
    /// Directory for JSON and CSV outputs.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Leave creation timestamps out of all outputs.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate raw CSV files and write a dataset directory.
    Ingest(IngestArgs),
    /// Build a yearly series and fit an exponential improvement rate.
    Trend(TrendArgs),
    /// Predict the improvement rate from patent metadata.
    Predict(PredictArgs),
    /// Fit the citation-versus-performance regression models.
    Regress(RegressArgs),
    /// Descriptive tables of the patent and field-test corpus.
    Report,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub patents: PathBuf,
    #[arg(long)]
    pub trials: Option<PathBuf>,
    #[arg(long)]
    pub fieldtests: Option<PathBuf>,
    /// Field-test layout: illinois or kentucky.
    #[arg(long)]
    pub schema: Option<String>,
    /// Title pattern table replacing the bundled one.
    #[arg(long)]
    pub prefix_table: Option<PathBuf>,
    #[arg(long)]
    pub citation_cutoff: Option<i32>,
    /// Fail on the first rejected row instead of skipping it.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeriesKind {
    PatentYearlyMax,
    StateAverage,
    UsdaFile,
    WeatherCorrected,
}

impl SeriesKind {
    fn name(self) -> &'static str {
        match self {
            SeriesKind::PatentYearlyMax => "patent-yearly-max",
            SeriesKind::StateAverage => "state-average",
            SeriesKind::UsdaFile => "usda-file",
            SeriesKind::WeatherCorrected => "weather-corrected",
        }
    }
}

#[derive(Debug, Args)]
pub struct TrendArgs {
    #[arg(long, value_enum)]
    pub series: SeriesKind,
    /// `year,value` CSV for `usda-file` (default: the bundled USDA series).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub from: Option<i32>,
    #[arg(long)]
    pub to: Option<i32>,
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long)]
    pub control: Option<String>,
    /// Minimum consecutive years for control discovery.
    #[arg(long)]
    pub min_years: Option<usize>,
    /// Pool all rows of a year instead of averaging regions first.
    #[arg(long)]
    pub pooled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Predictor {
    K1,
    K2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindFilter {
    Hybrid,
    Inbred,
    Both,
}

impl KindFilter {
    fn name(self) -> &'static str {
        match self {
            KindFilter::Hybrid => "hybrid",
            KindFilter::Inbred => "inbred",
            KindFilter::Both => "both",
        }
    }

    fn accepts(self, kind: Option<PatentKind>) -> bool {
        matches!(
            (self, kind),
            (KindFilter::Hybrid, Some(PatentKind::Hybrid))
                | (KindFilter::Inbred, Some(PatentKind::Inbred))
                | (KindFilter::Both, Some(PatentKind::Hybrid | PatentKind::Inbred))
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Grant,
    Filing,
}

impl From<BasisArg> for YearBasis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Grant => YearBasis::Grant,
            BasisArg::Filing => YearBasis::Filing,
        }
    }
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(value_enum)]
    pub model: Predictor,
    #[arg(long, value_enum, default_value = "hybrid")]
    pub kind: KindFilter,
    /// Use only patents filed up to this year.
    #[arg(long)]
    pub filed_until: Option<i32>,
    /// Citation edges CSV (`citing_patent,cited_patent`); needs `--nodes`.
    #[arg(long, requires = "nodes")]
    pub edges: Option<PathBuf>,
    /// Network nodes CSV (`patent_number,application_year`); needs `--edges`.
    #[arg(long, requires = "edges")]
    pub nodes: Option<PathBuf>,
    /// Report centrality and Z without the rate.
    #[arg(long)]
    pub centrality_only: bool,
    /// Citation percentile from which a patent counts as highly cited.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Path counting in log space for very large networks.
    #[arg(long)]
    pub log_spnp: bool,
    /// Year of the citing patent in the citation window.
    #[arg(long, value_enum, default_value = "grant")]
    pub year_basis: BasisArg,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    /// Comma-separated model ids.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    pub models: Vec<u8>,
    /// Comma-separated families: ols, poisson, negbin.
    #[arg(long, value_delimiter = ',', default_value = "poisson")]
    pub family: Vec<String>,
    /// Patent numbers to drop, one per line.
    #[arg(long)]
    pub exclude_file: Option<PathBuf>,
    /// Also drop the bundled list of early highly cited patents.
    #[arg(long)]
    pub exclude_default: bool,
    /// Model table CSV used instead of deriving it from the dataset.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "grant")]
    pub year_basis: BasisArg,
}

/// Settings shared across commands, loadable from `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset_dir: Option<PathBuf>,
    pub exclusion_list: BTreeSet<String>,
    pub filed_year_cutoff: Option<i32>,
    pub highly_cited_threshold: f64,
    pub control_min_years: usize,
    pub state_schema: FieldSchema,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset_dir: None,
            exclusion_list: BTreeSet::new(),
            filed_year_cutoff: None,
            highly_cited_threshold: constants().default_highly_cited_threshold,
            control_min_years: constants().default_control_min_years,
            state_schema: FieldSchema::IllinoisLike,
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.highly_cited_threshold > 0.0 && self.highly_cited_threshold < 1.0) {
            return Err(Error::InvalidInput(format!(
                "highly_cited_threshold {} outside (0, 1)",
                self.highly_cited_threshold
            )));
        }
        if self.control_min_years < 2 {
            return Err(Error::InvalidInput("control_min_years must be at least 2".into()));
        }
        Ok(())
    }
}

struct Ctx {
    cfg: RunConfig,
    dataset: Option<PathBuf>,
    out: Option<PathBuf>,
    timestamp: Option<String>,
}

impl Ctx {
    fn dataset(&self) -> Result<Dataset> {
        let dir = self
            .dataset
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("--dataset is required for this command".into()))?;
        load_dataset(dir)
    }

    fn provenance(&self) -> Value {
        json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "constants": constants(),
            "created_utc": self.timestamp,
        })
    }

    /// Attaches provenance, writes `<name>.json` under `--out` and returns the text.
    fn finish(&self, name: &str, mut doc: Value) -> Result<String> {
        doc["provenance"] = self.provenance();
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        self.write(&format!("{name}.json"), &text)?;
        Ok(text)
    }

    fn write(&self, file: &str, contents: &str) -> Result<()> {
        let Some(dir) = &self.out else {
            return Ok(());
        };
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(file);
        fs::write(&path, contents).map_err(|e| Error::io(path, e))
    }
}

/// Runs one parsed command line and returns the JSON printed to stdout.
pub fn run(cli: Cli) -> Result<String> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let ctx = Ctx {
        dataset: cli.dataset.clone().or_else(|| cfg.dataset_dir.clone()),
        out: cli.out.clone().or_else(|| cfg.output_dir.clone()),
        timestamp: (!cli.no_timestamp).then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        cfg,
    };
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(&ctx, a),
        Command::Trend(a) => cmd_trend(&ctx, a),
        Command::Predict(a) => cmd_predict(&ctx, a),
        Command::Regress(a) => cmd_regress(&ctx, a),
        Command::Report => cmd_report(&ctx),
    }
}

/// JSON body printed to stderr on failure.
pub fn error_json(e: &Error) -> String {
    let doc = json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    });
    serde_json::to_string_pretty(&doc).expect("static shape")
}

fn file_report(path: &Path, report: &IngestReport) -> Value {
    json!({
        "path": path.display().to_string(),
        "rows_read": report.rows_read,
        "rows_accepted": report.rows_accepted,
        "rows_skipped": report.rows_skipped,
        "errors": report.errors,
    })
}

fn cmd_ingest(ctx: &Ctx, a: &IngestArgs) -> Result<String> {
    let out = ctx
        .out
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("ingest needs --out for the dataset directory".into()))?;
    let schema = match &a.schema {
        Some(s) => s.parse()?,
        None => ctx.cfg.state_schema,
    };
    let table = match &a.prefix_table {
        Some(p) => PrefixTable::from_path(p)?,
        None => PrefixTable::default(),
    };
    let mut files = Vec::new();

    let loaded = load_patents(&a.patents)?;
    files.push(file_report(&a.patents, &loaded.report));
    let mut patents = if a.strict {
        loaded.into_strict(&a.patents)?
    } else {
        loaded.records
    };
    let unmatched_titles = annotate_patents(&mut patents, &table);
    let known: BTreeSet<String> = patents.iter().map(|p| p.patent_number.clone()).collect();

    let mut trial_sets = Vec::new();
    let mut orphan_trial_sets = Vec::new();
    if let Some(path) = &a.trials {
        let loaded = load_trial_sets(path)?;
        files.push(file_report(path, &loaded.report));
        let sets = if a.strict {
            loaded.into_strict(path)?
        } else {
            loaded.records
        };
        for ts in sets {
            if known.contains(&ts.patent_number) {
                trial_sets.push(ts);
            } else if a.strict {
                return Err(Error::InvalidInput(format!(
                    "trial set references unknown patent {}",
                    ts.patent_number
                )));
            } else {
                orphan_trial_sets.push(ts.patent_number);
            }
        }
    }

    let mut field_tests = Vec::new();
    if let Some(path) = &a.fieldtests {
        let loaded = load_field_tests(path, schema)?;
        files.push(file_report(path, &loaded.report));
        field_tests = if a.strict {
            loaded.into_strict(path)?
        } else {
            loaded.records
        };
    }

    let matching = match_patented_varieties(&patents, &field_tests);
    let cutoff = a.citation_cutoff.unwrap_or(DEFAULT_CITATION_CUTOFF_YEAR);
    let d = Dataset::new(patents, trial_sets, field_tests, cutoff)?;
    save_dataset_stamped(&d, out, ctx.timestamp.clone())?;

    let doc = json!({
        "command": "ingest",
        "dataset_dir": out.display().to_string(),
        "schema": schema,
        "files": files,
        "patents": d.patents().len(),
        "trial_sets": d.trial_sets().len(),
        "field_tests": d.field_tests().len(),
        "citation_cutoff_year": cutoff,
        "titles_without_pattern": unmatched_titles,
        "orphan_trial_sets": orphan_trial_sets,
        "varieties_matched": matching.matches.len(),
        "varieties_unmatched": matching.unmatched,
    });
    ctx.finish("ingest", doc)
}

fn fit_json(fit: &FitResult) -> Value {
    json!({
        "rate_k": fit.k,
        "r_squared": fit.r_squared,
        "p_value": fit.p_value,
        "n": fit.n,
        "t0": fit.t0,
        "q0": fit.q0,
        "k_std_error": fit.k_std_error,
    })
}

fn nonempty(series: TrendSeries, what: &str) -> Result<TrendSeries> {
    if series.is_empty() {
        Err(Error::InsufficientData(format!(
            "{what}: no points in the requested year range"
        )))
    } else {
        Ok(series)
    }
}

fn safe_name(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

fn cmd_trend(ctx: &Ctx, a: &TrendArgs) -> Result<String> {
    let name = a.series.name();
    let single = |series: TrendSeries| -> Result<(TrendSeries, Value)> {
        let series = nonempty(series.restrict(a.from, a.to), name)?;
        let fit = fit_exponential(&series)?;
        Ok((series, fit_json(&fit)))
    };
    let mut doc = match a.series {
        SeriesKind::UsdaFile => {
            let s = match &a.input {
                Some(p) => TrendSeries::read_csv(p)?,
                None => TrendSeries::usda_us_corn_yield(),
            };
            let (s, fit) = single(s)?;
            ctx.write(&format!("trend_{}.csv", safe_name(name)), &s.to_csv_string())?;
            fit
        }
        SeriesKind::PatentYearlyMax => {
            let d = ctx.dataset()?;
            let mut summaries = Vec::new();
            for ts in d.trial_sets() {
                let filed = d
                    .patent(&ts.patent_number)
                    .map(|p| p.filed_year)
                    .expect("validated dataset");
                summaries.push((filed, YieldSummary::from_trial_set(ts)?));
            }
            let (s, fit) = single(yearly_max_yield(&summaries)?)?;
            ctx.write(&format!("trend_{}.csv", safe_name(name)), &s.to_csv_string())?;
            fit
        }
        SeriesKind::StateAverage => {
            let d = ctx.dataset()?;
            let mode = if a.pooled {
                Averaging::Pooled
            } else {
                Averaging::TwoStage
            };
            let (s, fit) = single(state_yearly_average_with(d.field_tests(), mode)?)?;
            ctx.write(&format!("trend_{}.csv", safe_name(name)), &s.to_csv_string())?;
            let mut fit = fit;
            fit["averaging"] = json!(mode);
            fit
        }
        SeriesKind::WeatherCorrected => {
            let d = ctx.dataset()?;
            let tests = d.field_tests();
            match (&a.region, &a.control) {
                (Some(region), Some(control)) => {
                    let (s, mut fit) = single(weather_corrected_series(tests, region, control)?)?;
                    ctx.write(
                        &format!(
                            "trend_weather_corrected_{}_{}.csv",
                            safe_name(region),
                            safe_name(control)
                        ),
                        &s.to_csv_string(),
                    )?;
                    fit["region"] = json!(region);
                    fit["control"] = json!(control);
                    fit
                }
                (None, None) | (Some(_), None) => {
                    let min_years = a.min_years.unwrap_or(ctx.cfg.control_min_years);
                    let candidates: Vec<_> = find_control_varieties(tests, min_years)?
                        .into_iter()
                        .filter(|c| a.region.as_ref().is_none_or(|r| *r == c.region))
                        .collect();
                    if candidates.is_empty() {
                        return Err(Error::InsufficientData(format!(
                            "no control variety tested {min_years} consecutive years"
                        )));
                    }
                    let mut fits = Vec::new();
                    for c in candidates {
                        let (s, mut fit) = single(weather_corrected_series(tests, &c.region, &c.variety)?)?;
                        ctx.write(
                            &format!(
                                "trend_weather_corrected_{}_{}.csv",
                                safe_name(&c.region),
                                safe_name(&c.variety)
                            ),
                            &s.to_csv_string(),
                        )?;
                        fit["region"] = json!(c.region);
                        fit["control"] = json!(c.variety);
                        fit["control_years"] = json!([c.first_year, c.last_year]);
                        fits.push(fit);
                    }
                    json!({ "fits": fits, "min_years": min_years })
                }
                (None, Some(_)) => {
                    return Err(Error::InvalidInput("--control needs --region".into()));
                }
            }
        }
    };
    doc["command"] = json!("trend");
    doc["series"] = json!(name);
    doc["from"] = json!(a.from);
    doc["to"] = json!(a.to);
    ctx.finish(&format!("trend_{}", safe_name(name)), doc)
}

/// Patents filed up to `until` (all when `None`).
fn as_of(d: &Dataset, until: Option<i32>) -> Vec<&PatentRecord> {
    d.patents()
        .filter(|p| until.is_none_or(|u| p.filed_year <= u))
        .collect()
}

fn cmd_predict(ctx: &Ctx, a: &PredictArgs) -> Result<String> {
    let d = ctx.dataset()?;
    let until = a.filed_until.or(ctx.cfg.filed_year_cutoff);
    let visible = as_of(&d, until);
    let domain: Vec<&PatentRecord> = visible.iter().copied().filter(|p| a.kind.accepts(p.kind)).collect();
    if domain.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no {} patents filed up to {}",
            a.kind.name(),
            until.map_or("the end of the data".to_string(), |u| u.to_string())
        )));
    }
    let mut doc = json!({
        "command": "predict",
        "model": match a.model { Predictor::K1 => "k1", Predictor::K2 => "k2" },
        "kind": a.kind.name(),
        "filed_until": until,
    });
    match a.model {
        Predictor::K1 => {
            let numbers: BTreeSet<&str> = visible.iter().map(|p| p.patent_number.as_str()).collect();
            let edges: Vec<(String, String)> = d
                .internal_citations()
                .into_iter()
                .filter(|(citing, cited)| numbers.contains(citing.as_str()) && numbers.contains(cited.as_str()))
                .collect();
            let basis = YearBasis::from(a.year_basis);
            let years = publication_years(visible.iter().copied(), basis);
            let stats = domain_citation_stats(&domain, &edges, &years)?;
            doc["year_basis"] = json!(basis);
            doc["k1"] = json!(stats.k1());
            doc["ave_pub_year"] = json!(stats.ave_pub_year);
            doc["cite3"] = json!(stats.cite3);
            doc["cite3_total"] = json!(stats.cite3_total);
            doc["spc"] = json!(stats.spc);
            ctx.finish("predict_k1", doc)
        }
        Predictor::K2 => {
            let threshold = a.threshold.unwrap_or(ctx.cfg.highly_cited_threshold);
            let (full, skipped_edges, external) = match (&a.nodes, &a.edges) {
                (Some(n), Some(e)) => {
                    let files = load_network(n, e)?;
                    (files.network, files.skipped_edges, 0)
                }
                _ => {
                    let (net, external) = CitationNetwork::from_dataset(&d)?;
                    (net, 0, external)
                }
            };
            let net = match until {
                Some(u) => restrict_network(&full, u)?,
                None => full,
            };
            let ids: Vec<String> = domain
                .iter()
                .filter(|p| net.contains(&p.patent_number))
                .map(|p| p.patent_number.clone())
                .collect();
            if ids.is_empty() {
                return Err(Error::InsufficientData(
                    "no domain patent is in the citation network".into(),
                ));
            }
            let mode = if a.log_spnp {
                SpnpMode::LogApprox
            } else {
                SpnpMode::Exact
            };
            let r = analyze_domain(&net, &ids, threshold, mode)?;
            doc["spnp_mode"] = json!(mode);
            doc["highly_cited_threshold"] = json!(threshold);
            doc["spc"] = json!(ids.len());
            if !a.centrality_only {
                doc["k2"] = json!(r.k2);
            }
            doc["centrality"] = json!(r.centrality.centrality);
            doc["z"] = json!(r.growth.z);
            doc["n_highly_cited"] = json!(r.growth.n_highly_cited);
            doc["centrality_included"] = json!(r.centrality.included);
            doc["excluded_no_citations"] = json!(r.centrality.excluded_no_citations);
            doc["skipped_cited"] = json!(r.centrality.skipped_cited);
            doc["network"] = json!({
                "nodes": net.len(),
                "edges": net.edge_count(),
                "skipped_edges": skipped_edges,
                "external_citations": external,
            });

            let mut csv = String::from("patent_number,application_year,spnp,spnp_rank_percentile,highly_cited\n");
            for id in &ids {
                csv.push_str(&format!(
                    "{id},{},{},{},{}\n",
                    net.application_year(id).expect("domain node"),
                    r.spnp.display(id).unwrap_or_default(),
                    r.rank_percentile[id],
                    r.highly_cited.get(id).copied().unwrap_or(false)
                ));
            }
            ctx.write("predict_k2_patents.csv", &csv)?;
            let mut cum = String::from("year,cumulative_highly_cited\n");
            for (y, c) in &r.growth.cumsum {
                cum.push_str(&format!("{y},{c}\n"));
            }
            ctx.write("predict_k2_cumulative.csv", &cum)?;
            ctx.finish("predict_k2", doc)
        }
    }
}

fn restrict_network(net: &CitationNetwork, until: i32) -> Result<CitationNetwork> {
    let years = net.application_years();
    let keep: BTreeSet<&str> = years
        .iter()
        .filter(|(_, y)| **y <= until)
        .map(|(k, _)| k.as_str())
        .collect();
    let nodes = years
        .iter()
        .filter(|(k, _)| keep.contains(k.as_str()))
        .map(|(k, y)| (k.clone(), *y))
        .collect();
    let mut edges = Vec::new();
    for id in &keep {
        for cited in net.cited(id).expect("known node") {
            if keep.contains(cited) {
                edges.push((id.to_string(), cited.to_string()));
            }
        }
    }
    CitationNetwork::new(nodes, edges)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Terms × models layout: coefficient, standard error and p-value rows per
/// term, then fit statistics.
fn combined_table(results: &[RegressionResult]) -> (Value, String) {
    let mut terms: Vec<String> = Vec::new();
    for r in results {
        for t in &r.terms {
            if !terms.contains(t) {
                terms.push(t.clone());
            }
        }
    }
    let columns: Vec<String> = results
        .iter()
        .map(|r| format!("model{}_{}", r.model_id.unwrap_or(0), r.family))
        .collect();
    let mut csv = format!("term,statistic,{}\n", columns.join(","));
    let mut rows = Vec::new();
    for t in &terms {
        for (stat, pick) in [
            (
                "coefficient",
                &(|r: &RegressionResult, t: &str| r.coefficients.get(t).copied())
                    as &dyn Fn(&RegressionResult, &str) -> Option<f64>,
            ),
            ("std_error", &|r: &RegressionResult, t: &str| {
                r.std_errors.get(t).copied()
            }),
            ("p_value", &|r: &RegressionResult, t: &str| r.p_values.get(t).copied()),
        ] {
            let cells: Vec<Option<f64>> = results.iter().map(|r| pick(r, t)).collect();
            csv.push_str(&format!(
                "{t},{stat},{}\n",
                cells.iter().map(|c| fmt_opt(*c)).collect::<Vec<_>>().join(",")
            ));
            rows.push(json!({ "term": t, "statistic": stat, "values": cells }));
        }
    }
    for (stat, pick) in [
        (
            "n",
            &(|r: &RegressionResult| Some(r.n as f64)) as &dyn Fn(&RegressionResult) -> Option<f64>,
        ),
        ("r_squared", &|r: &RegressionResult| r.r_squared),
        ("aic", &|r: &RegressionResult| r.aic),
        ("two_log_likelihood", &|r: &RegressionResult| Some(r.two_log_likelihood)),
        ("dispersion", &|r: &RegressionResult| r.dispersion),
    ] {
        let cells: Vec<Option<f64>> = results.iter().map(pick).collect();
        csv.push_str(&format!(
            ",{stat},{}\n",
            cells.iter().map(|c| fmt_opt(*c)).collect::<Vec<_>>().join(",")
        ));
        rows.push(json!({ "term": null, "statistic": stat, "values": cells }));
    }
    (json!({ "columns": columns, "rows": rows }), csv)
}

fn cmd_regress(ctx: &Ctx, a: &RegressArgs) -> Result<String> {
    let rows: Vec<AnalysisRow> = match &a.table {
        Some(p) => read_analysis_table(p)?,
        None => analysis_table(&ctx.dataset()?, a.year_basis.into())?,
    };
    let mut requested = ctx.cfg.exclusion_list.clone();
    if let Some(p) = &a.exclude_file {
        requested.extend(read_exclusions(p)?);
    }
    if a.exclude_default {
        requested.extend(constants().highly_cited_exclusions.iter().cloned());
    }
    let present: BTreeSet<&str> = rows.iter().map(|r| r.patent_number.as_str()).collect();
    let matched: Vec<&String> = requested.iter().filter(|n| present.contains(n.as_str())).collect();

    let families = a
        .family
        .iter()
        .map(|f| f.parse::<Family>())
        .collect::<Result<Vec<_>>>()?;
    let mut results = Vec::new();
    for &id in &a.models {
        for &family in &families {
            let spec = ModelSpec::table(id, family)?;
            results.push(run_model(&spec, &rows, &requested, &GlmOptions::default())?);
        }
    }
    let (table, csv) = combined_table(&results);
    ctx.write("regress_table.csv", &csv)?;
    ctx.write("analysis_table.csv", &analysis_table_csv(&rows)?)?;
    let doc = json!({
        "command": "regress",
        "rows": rows.len(),
        "exclusions": { "requested": requested, "matched": matched },
        "results": results,
        "table": table,
    });
    ctx.finish("regress", doc)
}

fn cmd_report(ctx: &Ctx) -> Result<String> {
    let d = ctx.dataset()?;

    let mut per_year: BTreeMap<i32, [usize; 3]> = BTreeMap::new();
    for p in d.patents() {
        let slot = match p.kind {
            Some(PatentKind::Hybrid) => 0,
            Some(PatentKind::Inbred) => 1,
            _ => 2,
        };
        per_year.entry(p.filed_year).or_default()[slot] += 1;
    }
    let mut csv = String::from("filed_year,hybrid,inbred,other,total\n");
    for (y, c) in &per_year {
        csv.push_str(&format!("{y},{},{},{},{}\n", c[0], c[1], c[2], c.iter().sum::<usize>()));
    }
    ctx.write("report_patents_per_year.csv", &csv)?;

    let mut by_assignee: BTreeMap<&str, usize> = BTreeMap::new();
    for p in d.patents() {
        *by_assignee.entry(p.assignee.as_str()).or_default() += 1;
    }
    let total = d.patents().len();
    let mut shares: Vec<(&str, usize)> = by_assignee.into_iter().collect();
    shares.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let mut csv = String::from("assignee,patents,share\n");
    let mut share_sum = 0.0;
    for (name, n) in &shares {
        let share = *n as f64 / total as f64;
        share_sum += share;
        let quoted = if name.contains(',') || name.contains('"') {
            format!("\"{}\"", name.replace('"', "\"\""))
        } else {
            name.to_string()
        };
        csv.push_str(&format!("{quoted},{n},{share}\n"));
    }
    ctx.write("report_assignee_shares.csv", &csv)?;

    let mut backward: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for p in d.patents() {
        backward
            .entry(p.filed_year)
            .or_default()
            .push(p.cited_patents.len() as f64);
    }
    let mut csv = String::from("filed_year,patents,mean_backward_citations,std_backward_citations\n");
    for (y, v) in &backward {
        csv.push_str(&format!(
            "{y},{},{},{}\n",
            v.len(),
            stats::mean(v).expect("nonempty"),
            stats::sample_std(v).expect("nonempty")
        ));
    }
    ctx.write("report_backward_citations.csv", &csv)?;

    let mut tests: BTreeMap<(i32, &str), usize> = BTreeMap::new();
    for t in d.field_tests() {
        *tests.entry((t.year, t.region.as_str())).or_default() += 1;
    }
    let mut csv = String::from("year,region,rows\n");
    for ((y, r), n) in &tests {
        csv.push_str(&format!("{y},{r},{n}\n"));
    }
    ctx.write("report_field_tests.csv", &csv)?;

    let kinds: BTreeMap<&str, usize> = [PatentKind::Hybrid, PatentKind::Inbred, PatentKind::Other]
        .iter()
        .map(|k| {
            (
                k.as_str(),
                d.patents()
                    .filter(|p| p.kind.unwrap_or(PatentKind::Other) == *k)
                    .count(),
            )
        })
        .collect();
    let doc = json!({
        "command": "report",
        "patents": total,
        "trial_sets": d.trial_sets().len(),
        "field_tests": d.field_tests().len(),
        "patents_by_kind": kinds,
        "assignees": shares.len(),
        "assignee_share_sum": if total == 0 { 0.0 } else { share_sum },
        "filed_years": per_year.keys().next().map(|first| [*first, *per_year.keys().last().expect("nonempty")]),
    });
    ctx.finish("report", doc)
}
