//! Domain records and CSV ingestion for patents, patent trial tables and
//! state field tests, plus the on-disk dataset store.
//!
//! Loaders are lenient by default: structurally broken input (missing file,
//! missing column) is an `Err`, while rows that violate a record invariant
//! are collected in an [`IngestReport`] next to the accepted records. Call
//! [`Ingest::into_strict`] to turn any rejected row into an error.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Current on-disk dataset layout version.
pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_CITATION_CUTOFF_YEAR: i32 = 2015;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatentKind {
    Hybrid,
    Inbred,
    Other,
}

impl PatentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PatentKind::Hybrid => "hybrid",
            PatentKind::Inbred => "inbred",
            PatentKind::Other => "other",
        }
    }
}

impl FromStr for PatentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hybrid" => Ok(PatentKind::Hybrid),
            "inbred" => Ok(PatentKind::Inbred),
            "other" => Ok(PatentKind::Other),
            other => Err(Error::InvalidInput(format!("unknown patent kind `{other}`"))),
        }
    }
}

/// One granted patent.
#[derive(Debug, Clone, PartialEq)]
pub struct PatentRecord {
    pub patent_number: String,
    pub title: String,
    pub assignee: String,
    pub filed_year: i32,
    pub granted_year: i32,
    /// Backward citations (patents this one cites).
    pub cited_patents: Vec<String>,
    /// Citations received up to the dataset's cutoff year.
    pub forward_citation_count: u32,
    pub variety_name: Option<String>,
    pub kind: Option<PatentKind>,
}

/// A single head-to-head yield comparison reported inside a patent.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialComparison {
    pub patented_yield: f64,
    pub control_yield: f64,
    pub control_name: String,
    pub patented_moisture: Option<f64>,
    pub control_moisture: Option<f64>,
}

/// All comparisons reported for one patent, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct PatentTrialSet {
    pub patent_number: String,
    pub patented_variety: Option<String>,
    pub comparisons: Vec<TrialComparison>,
}

impl PatentTrialSet {
    pub fn n_tests(&self) -> usize {
        self.comparisons.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Maturity {
    Early,
    Medium,
    Late,
}

impl FromStr for Maturity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "EARLY" => Ok(Maturity::Early),
            "MEDIUM" => Ok(Maturity::Medium),
            "LATE" => Ok(Maturity::Late),
            other => Err(format!("unknown maturity `{other}`")),
        }
    }
}

/// One row of a state field-trial report.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTestRecord {
    pub state: String,
    pub year: i32,
    pub region: String,
    pub brand: String,
    pub hybrid: String,
    pub yield_bu: f64,
    pub moisture: f64,
    pub maturity: Option<Maturity>,
    pub stand: Option<f64>,
    /// Yield carried a trailing `*` significance marker in the source report.
    pub significant: bool,
}

/// Column layout of a state field-test report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldSchema {
    /// `Year, Region, Brand, Hybrid, Yield, Moisture`
    #[serde(rename = "illinois")]
    IllinoisLike,
    /// `Maturity, Year, Brand, Hybrid, Yield, Moist, Stand`, one state-wide region.
    #[serde(rename = "kentucky")]
    KentuckyLike,
}

impl FieldSchema {
    pub fn default_state(self) -> &'static str {
        match self {
            FieldSchema::IllinoisLike => "IL",
            FieldSchema::KentuckyLike => "KY",
        }
    }
}

impl FromStr for FieldSchema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "illinois" | "illinois-like" | "il" => Ok(FieldSchema::IllinoisLike),
            "kentucky" | "kentucky-like" | "ky" => Ok(FieldSchema::KentuckyLike),
            other => Err(Error::UnknownSchema(other.to_string())),
        }
    }
}

pub const KENTUCKY_REGION: &str = "STATE_AVG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorScope {
    Row,
    /// A whole patent group was rejected (trial tables only).
    Group,
}

/// A rejected input row, indexed from 1 over data rows (header excluded).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowError {
    pub row: usize,
    pub scope: ErrorScope,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}: {}", self.row, self.message)
    }
}

/// Row accounting for one ingested file.
///
/// `rows_read == rows_accepted + rows_skipped + (row-scoped errors)` always.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_accepted: usize,
    pub rows_skipped: usize,
    pub errors: Vec<RowError>,
}

impl IngestReport {
    pub fn row_errors(&self) -> usize {
        self.errors.iter().filter(|e| e.scope == ErrorScope::Row).count()
    }

    fn reject(&mut self, row: usize, message: impl Into<String>) {
        self.errors.push(RowError {
            row,
            scope: ErrorScope::Row,
            message: message.into(),
        });
    }
}

#[derive(Debug, Clone)]
pub struct Ingest<T> {
    pub records: Vec<T>,
    pub report: IngestReport,
}

impl<T> Ingest<T> {
    /// Fails if any row or group was rejected.
    pub fn into_strict(self, path: impl AsRef<Path>) -> Result<Vec<T>> {
        if self.report.errors.is_empty() {
            Ok(self.records)
        } else {
            Err(Error::Rows {
                path: path.as_ref().to_path_buf(),
                errors: self.report.errors,
            })
        }
    }
}

/// Parses a decimal that may use a comma as the decimal separator.
pub fn parse_decimal(raw: &str) -> std::result::Result<f64, String> {
    let s = raw.trim();
    if s.is_empty() {
        return Err("empty numeric field".into());
    }
    let normalized;
    let s = if !s.contains('.') && s.matches(',').count() == 1 {
        normalized = s.replace(',', ".");
        normalized.as_str()
    } else {
        s
    };
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("unparsable number `{}`", raw.trim())),
    }
}

fn parse_year(raw: &str) -> std::result::Result<i32, String> {
    raw.trim()
        .parse::<i32>()
        .map_err(|_| format!("unparsable year `{}`", raw.trim()))
}

fn parse_optional(raw: Option<&str>) -> std::result::Result<Option<f64>, String> {
    match raw.map(str::trim) {
        None | Some("") => Ok(None),
        Some(s) => parse_decimal(s).map(Some),
    }
}

fn parse_yield(raw: &str) -> std::result::Result<f64, String> {
    let v = parse_decimal(raw)?;
    if v <= 0.0 {
        return Err("nonpositive yield".into());
    }
    Ok(v)
}

/// Case-insensitive header lookup over one CSV file.
struct Columns {
    index: HashMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord) -> Self {
        let index = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().trim_start_matches('\u{feff}').to_ascii_lowercase(), i))
            .collect();
        Columns { index }
    }

    fn require(&self, path: &Path, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: name.to_string(),
        })
    }

    fn optional(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

fn open_csv(path: &Path) -> Result<(csv::Reader<fs::File>, Columns)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    Ok((reader, Columns::new(&headers)))
}

fn field(rec: &csv::StringRecord, idx: usize) -> &str {
    rec.get(idx).unwrap_or("").trim()
}

/// Reads a patent CSV. `variety_name` and `kind` are left unset.
pub fn load_patents(path: impl AsRef<Path>) -> Result<Ingest<PatentRecord>> {
    let path = path.as_ref();
    let (mut reader, cols) = open_csv(path)?;
    let c_number = cols.require(path, "patent_number")?;
    let c_title = cols.require(path, "title")?;
    let c_assignee = cols.require(path, "assignee")?;
    let c_filed = cols.require(path, "filed_year")?;
    let c_granted = cols.require(path, "granted_year")?;
    let c_fwd = cols.require(path, "forward_citations")?;
    let c_cited = cols.require(path, "cited_patents")?;

    let mut report = IngestReport::default();
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        report.rows_read += 1;
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let parsed = (|| -> std::result::Result<PatentRecord, String> {
            let patent_number = field(&rec, c_number).to_string();
            if patent_number.is_empty() {
                return Err("empty patent_number".into());
            }
            let filed_year = parse_year(field(&rec, c_filed))?;
            let granted_year = parse_year(field(&rec, c_granted))?;
            if granted_year < filed_year {
                return Err("year order violated".into());
            }
            let fwd = field(&rec, c_fwd);
            let forward_citation_count = fwd
                .parse::<u32>()
                .map_err(|_| format!("unparsable forward citation count `{fwd}`"))?;
            Ok(PatentRecord {
                patent_number,
                title: field(&rec, c_title).to_string(),
                assignee: field(&rec, c_assignee).to_string(),
                filed_year,
                granted_year,
                cited_patents: split_citations(field(&rec, c_cited)),
                forward_citation_count,
                variety_name: None,
                kind: None,
            })
        })();
        match parsed {
            Ok(p) if !seen.insert(p.patent_number.clone()) => {
                report.reject(row, format!("duplicate patent_number {}", p.patent_number))
            }
            Ok(p) => {
                report.rows_accepted += 1;
                records.push(p);
            }
            Err(msg) => report.reject(row, msg),
        }
    }
    Ok(Ingest { records, report })
}

fn split_citations(raw: &str) -> Vec<String> {
    raw.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Strips a trailing significance asterisk. Returns the bare value and the flag.
fn strip_significance(raw: &str) -> (&str, bool) {
    let s = raw.trim();
    match s.strip_suffix('*') {
        Some(rest) => (rest.trim_end(), true),
        None => (s, false),
    }
}

/// Reads a state field-test CSV in one of the supported layouts.
pub fn load_field_tests(path: impl AsRef<Path>, schema: FieldSchema) -> Result<Ingest<FieldTestRecord>> {
    let path = path.as_ref();
    let (mut reader, cols) = open_csv(path)?;
    let c_year = cols.require(path, "year")?;
    let c_brand = cols.require(path, "brand")?;
    let c_hybrid = cols.require(path, "hybrid")?;
    let c_yield = cols.require(path, "yield")?;
    let (c_region, c_moist, c_maturity, c_stand) = match schema {
        FieldSchema::IllinoisLike => (
            Some(cols.require(path, "region")?),
            cols.require(path, "moisture")?,
            cols.optional("maturity"),
            cols.optional("stand"),
        ),
        FieldSchema::KentuckyLike => (
            None,
            cols.require(path, "moist")?,
            Some(cols.require(path, "maturity")?),
            Some(cols.require(path, "stand")?),
        ),
    };
    // Explicit flag column, as written by `save_dataset`.
    let c_significant = cols.optional("significant");

    let mut report = IngestReport::default();
    let mut records = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        report.rows_read += 1;
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let parsed = (|| -> std::result::Result<FieldTestRecord, String> {
            let year = parse_year(field(&rec, c_year))?;
            let (yield_raw, marked) = strip_significance(field(&rec, c_yield));
            let flagged = match c_significant.map(|c| field(&rec, c).to_ascii_lowercase()) {
                None => false,
                Some(v) => match v.as_str() {
                    "" | "false" | "0" => false,
                    "true" | "1" => true,
                    other => return Err(format!("invalid significant flag `{other}`")),
                },
            };
            let significant = marked || flagged;
            let yield_bu = parse_yield(yield_raw)?;
            let (moist_raw, _) = strip_significance(field(&rec, c_moist));
            let moisture = parse_decimal(moist_raw)?;
            if !(0.0..=100.0).contains(&moisture) {
                return Err(format!("moisture {moisture} outside [0, 100]"));
            }
            let maturity = match c_maturity.map(|c| field(&rec, c)) {
                None | Some("") => None,
                Some(m) => Some(m.parse::<Maturity>()?),
            };
            let stand = parse_optional(c_stand.map(|c| strip_significance(field(&rec, c)).0))?;
            let region = match c_region {
                Some(c) => field(&rec, c).to_string(),
                None => KENTUCKY_REGION.to_string(),
            };
            Ok(FieldTestRecord {
                state: schema.default_state().to_string(),
                year,
                region,
                brand: field(&rec, c_brand).to_string(),
                hybrid: field(&rec, c_hybrid).to_string(),
                yield_bu,
                moisture,
                maturity,
                stand,
                significant,
            })
        })();
        match parsed {
            Ok(r) => {
                report.rows_accepted += 1;
                records.push(r);
            }
            Err(msg) => report.reject(row, msg),
        }
    }
    Ok(Ingest { records, report })
}

/// Reads per-patent trial comparisons.
///
/// Rows are grouped by `patent_number`; a blank number continues the
/// previous group, matching the spreadsheet layout patents are transcribed
/// into. Rows whose control is the `AVG` summary marker are skipped.
pub fn load_trial_sets(path: impl AsRef<Path>) -> Result<Ingest<PatentTrialSet>> {
    let path = path.as_ref();
    let (mut reader, cols) = open_csv(path)?;
    let c_number = cols.require(path, "patent_number")?;
    let c_variety = cols.require(path, "patented_variety")?;
    let c_control = cols.require(path, "control_variety")?;
    let c_pat = cols.require(path, "patented_yield")?;
    let c_ctl = cols.require(path, "control_yield")?;
    let c_pat_m = cols.optional("patented_moisture");
    let c_ctl_m = cols.optional("control_moisture");

    struct Group {
        first_row: usize,
        set: PatentTrialSet,
    }

    let mut report = IngestReport::default();
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Group> = HashMap::new();
    let mut current: Option<String> = None;

    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        report.rows_read += 1;
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let number = field(&rec, c_number);
        let number = if number.is_empty() {
            match &current {
                Some(n) => n.clone(),
                None => {
                    report.reject(row, "missing patent_number");
                    continue;
                }
            }
        } else {
            number.to_string()
        };
        current = Some(number.clone());
        let group = groups.entry(number.clone()).or_insert_with(|| {
            order.push(number.clone());
            Group {
                first_row: row,
                set: PatentTrialSet {
                    patent_number: number.clone(),
                    patented_variety: None,
                    comparisons: Vec::new(),
                },
            }
        });

        let control = field(&rec, c_control);
        if control.eq_ignore_ascii_case("AVG") {
            report.rows_skipped += 1;
            continue;
        }
        let parsed = (|| -> std::result::Result<TrialComparison, String> {
            Ok(TrialComparison {
                patented_yield: parse_yield(field(&rec, c_pat))?,
                control_yield: parse_yield(field(&rec, c_ctl))?,
                control_name: control.to_string(),
                patented_moisture: parse_optional(c_pat_m.map(|c| field(&rec, c)))?,
                control_moisture: parse_optional(c_ctl_m.map(|c| field(&rec, c)))?,
            })
        })();
        match parsed {
            Ok(cmp) => {
                let variety = field(&rec, c_variety);
                if group.set.patented_variety.is_none() && !variety.is_empty() {
                    group.set.patented_variety = Some(variety.to_string());
                }
                group.set.comparisons.push(cmp);
                report.rows_accepted += 1;
            }
            Err(msg) => report.reject(row, msg),
        }
    }

    let mut records = Vec::new();
    for number in order {
        let group = groups.remove(&number).expect("group recorded in order");
        if group.set.comparisons.is_empty() {
            report.errors.push(RowError {
                row: group.first_row,
                scope: ErrorScope::Group,
                message: format!("no comparisons for patent {number}"),
            });
        } else {
            records.push(group.set);
        }
    }
    Ok(Ingest { records, report })
}

/// Patents, trial tables and field tests for one analysis.
///
/// Constructed once and read-only afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    patents: BTreeMap<String, PatentRecord>,
    trial_sets: Vec<PatentTrialSet>,
    field_tests: Vec<FieldTestRecord>,
    citation_cutoff_year: i32,
}

impl Default for Dataset {
    fn default() -> Self {
        Dataset {
            patents: BTreeMap::new(),
            trial_sets: Vec::new(),
            field_tests: Vec::new(),
            citation_cutoff_year: DEFAULT_CITATION_CUTOFF_YEAR,
        }
    }
}

impl Dataset {
    pub fn new(
        patents: Vec<PatentRecord>,
        trial_sets: Vec<PatentTrialSet>,
        field_tests: Vec<FieldTestRecord>,
        citation_cutoff_year: i32,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for p in patents {
            if p.patent_number.is_empty() {
                return Err(Error::InvalidInput("empty patent_number".into()));
            }
            if p.granted_year < p.filed_year {
                return Err(Error::InvalidInput(format!(
                    "patent {}: year order violated",
                    p.patent_number
                )));
            }
            if let Some(dup) = map.insert(p.patent_number.clone(), p) {
                return Err(Error::InvalidInput(format!(
                    "duplicate patent_number {}",
                    dup.patent_number
                )));
            }
        }
        let mut seen = HashSet::new();
        for ts in &trial_sets {
            if !map.contains_key(&ts.patent_number) {
                return Err(Error::InvalidInput(format!(
                    "trial set references unknown patent {}",
                    ts.patent_number
                )));
            }
            if ts.comparisons.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "trial set for {} has no comparisons",
                    ts.patent_number
                )));
            }
            if !seen.insert(ts.patent_number.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "two trial sets for patent {}",
                    ts.patent_number
                )));
            }
        }
        Ok(Dataset {
            patents: map,
            trial_sets,
            field_tests,
            citation_cutoff_year,
        })
    }

    pub fn patents(&self) -> impl ExactSizeIterator<Item = &PatentRecord> + Clone {
        self.patents.values()
    }

    pub fn patent(&self, number: &str) -> Option<&PatentRecord> {
        self.patents.get(number)
    }

    pub fn trial_sets(&self) -> &[PatentTrialSet] {
        &self.trial_sets
    }

    pub fn field_tests(&self) -> &[FieldTestRecord] {
        &self.field_tests
    }

    pub fn citation_cutoff_year(&self) -> i32 {
        self.citation_cutoff_year
    }

    pub fn is_empty(&self) -> bool {
        self.patents.is_empty() && self.trial_sets.is_empty() && self.field_tests.is_empty()
    }

    /// Citation links `(citing, cited)` where both ends are in the dataset.
    pub fn internal_citations(&self) -> Vec<(String, String)> {
        self.patents
            .values()
            .flat_map(|p| {
                p.cited_patents
                    .iter()
                    .filter(|c| self.patents.contains_key(c.as_str()))
                    .map(move |c| (p.patent_number.clone(), c.clone()))
            })
            .collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    schema_version: u32,
    citation_cutoff_year: i32,
    created_utc: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PatentRow {
    patent_number: String,
    title: String,
    assignee: String,
    filed_year: i32,
    granted_year: i32,
    forward_citations: u32,
    cited_patents: String,
    variety_name: Option<String>,
    kind: Option<PatentKind>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TrialRow {
    patent_number: String,
    patented_variety: Option<String>,
    control_variety: String,
    patented_yield: f64,
    control_yield: f64,
    patented_moisture: Option<f64>,
    control_moisture: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldTestRow {
    state: String,
    year: i32,
    region: String,
    brand: String,
    hybrid: String,
    #[serde(rename = "yield")]
    yield_bu: f64,
    moisture: f64,
    maturity: Option<Maturity>,
    stand: Option<f64>,
    significant: bool,
}

fn write_rows<T: Serialize>(path: &Path, headers: &[&str], rows: impl Iterator<Item = T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    // Written explicitly so empty collections still carry a header.
    w.write_record(headers).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::csv(path, e))
}

/// Writes `d` under `dir` stamped with the current UTC time.
pub fn save_dataset(d: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let now = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    save_dataset_stamped(d, dir, Some(now))
}

/// Writes `d` under `dir`; `created_utc = None` gives byte-stable output.
pub fn save_dataset_stamped(d: &Dataset, dir: impl AsRef<Path>, created_utc: Option<String>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    write_rows(
        &dir.join("patents.csv"),
        &[
            "patent_number",
            "title",
            "assignee",
            "filed_year",
            "granted_year",
            "forward_citations",
            "cited_patents",
            "variety_name",
            "kind",
        ],
        d.patents.values().map(|p| PatentRow {
            patent_number: p.patent_number.clone(),
            title: p.title.clone(),
            assignee: p.assignee.clone(),
            filed_year: p.filed_year,
            granted_year: p.granted_year,
            forward_citations: p.forward_citation_count,
            cited_patents: p.cited_patents.join(";"),
            variety_name: p.variety_name.clone(),
            kind: p.kind,
        }),
    )?;

    write_rows(
        &dir.join("trials.csv"),
        &[
            "patent_number",
            "patented_variety",
            "control_variety",
            "patented_yield",
            "control_yield",
            "patented_moisture",
            "control_moisture",
        ],
        d.trial_sets.iter().flat_map(|ts| {
            ts.comparisons.iter().map(|c| TrialRow {
                patent_number: ts.patent_number.clone(),
                patented_variety: ts.patented_variety.clone(),
                control_variety: c.control_name.clone(),
                patented_yield: c.patented_yield,
                control_yield: c.control_yield,
                patented_moisture: c.patented_moisture,
                control_moisture: c.control_moisture,
            })
        }),
    )?;

    write_rows(
        &dir.join("fieldtests.csv"),
        &[
            "state",
            "year",
            "region",
            "brand",
            "hybrid",
            "yield",
            "moisture",
            "maturity",
            "stand",
            "significant",
        ],
        d.field_tests.iter().map(|f| FieldTestRow {
            state: f.state.clone(),
            year: f.year,
            region: f.region.clone(),
            brand: f.brand.clone(),
            hybrid: f.hybrid.clone(),
            yield_bu: f.yield_bu,
            moisture: f.moisture,
            maturity: f.maturity,
            stand: f.stand,
            significant: f.significant,
        }),
    )?;

    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        citation_cutoff_year: d.citation_cutoff_year,
        created_utc,
    };
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(path, e))
}

/// Reads a dataset previously written by [`save_dataset`].
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let manifest_path = dir.join("manifest.json");
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Manifest(e.to_string()))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: manifest.schema_version,
            expected: SCHEMA_VERSION,
        });
    }

    let patents = read_rows::<PatentRow>(&dir.join("patents.csv"))?
        .into_iter()
        .map(|r| PatentRecord {
            patent_number: r.patent_number,
            title: r.title,
            assignee: r.assignee,
            filed_year: r.filed_year,
            granted_year: r.granted_year,
            cited_patents: split_citations(&r.cited_patents),
            forward_citation_count: r.forward_citations,
            variety_name: r.variety_name,
            kind: r.kind,
        })
        .collect();

    let mut trial_sets: Vec<PatentTrialSet> = Vec::new();
    for r in read_rows::<TrialRow>(&dir.join("trials.csv"))? {
        let cmp = TrialComparison {
            patented_yield: r.patented_yield,
            control_yield: r.control_yield,
            control_name: r.control_variety,
            patented_moisture: r.patented_moisture,
            control_moisture: r.control_moisture,
        };
        match trial_sets.last_mut() {
            Some(ts) if ts.patent_number == r.patent_number => ts.comparisons.push(cmp),
            _ => trial_sets.push(PatentTrialSet {
                patent_number: r.patent_number,
                patented_variety: r.patented_variety,
                comparisons: vec![cmp],
            }),
        }
    }

    let field_tests = read_rows::<FieldTestRow>(&dir.join("fieldtests.csv"))?
        .into_iter()
        .map(|r| FieldTestRecord {
            state: r.state,
            year: r.year,
            region: r.region,
            brand: r.brand,
            hybrid: r.hybrid,
            yield_bu: r.yield_bu,
            moisture: r.moisture,
            maturity: r.maturity,
            stand: r.stand,
            significant: r.significant,
        })
        .collect();

    Dataset::new(patents, trial_sets, field_tests, manifest.citation_cutoff_year)
}

/// Value of the one missing year in an `m`-year average.
#[derive(Debug, Clone, PartialEq)]
pub struct InferredYear {
    pub value: f64,
    /// Set when the inferred value is zero or negative, which no real harvest can be.
    pub warning: Option<String>,
}

/// Recovers the missing year's mean from an `m`-year summary mean and the
/// `m - 1` known annual means: `m * summary_mean - sum(known)`.
pub fn infer_missing_year_average(summary_mean: f64, known_year_means: &[f64], m: usize) -> Result<InferredYear> {
    if m < 2 {
        return Err(Error::InvalidInput(format!(
            "summary must span at least 2 years, got {m}"
        )));
    }
    if known_year_means.len() != m - 1 {
        return Err(Error::InvalidInput(format!(
            "expected {} known annual means for a {m}-year summary, got {}",
            m - 1,
            known_year_means.len()
        )));
    }
    let value = m as f64 * summary_mean - known_year_means.iter().sum::<f64>();
    let warning = (value <= 0.0).then(|| format!("inferred yield {value} is not positive"));
    Ok(InferredYear { value, warning })
}
