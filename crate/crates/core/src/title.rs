//! Variety names from patent titles, hybrid/inbred classification and
//! linking of patented varieties to field-test rows.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::data::{FieldTestRecord, PatentKind, PatentRecord};
use crate::error::{Error, Result};

/// Default title pattern table, shipped with the crate.
pub const DEFAULT_PREFIX_TABLE: &str = include_str!("../data/prefix_table.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Prefix,
    Suffix,
    Infix,
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "prefix" => Ok(Position::Prefix),
            "suffix" => Ok(Position::Suffix),
            "infix" => Ok(Position::Infix),
            other => Err(Error::InvalidInput(format!("unknown pattern position `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixEntry {
    pub pattern: String,
    pub position: Position,
}

/// Title boilerplate to strip, held longest pattern first.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixTable {
    entries: Vec<PrefixEntry>,
}

impl PrefixTable {
    /// Sorts `entries` longest-first; equal lengths keep their given order.
    pub fn new(mut entries: Vec<PrefixEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("prefix table is empty".into()));
        }
        if entries.iter().any(|e| e.pattern.trim().is_empty()) {
            return Err(Error::InvalidInput("prefix table contains an empty pattern".into()));
        }
        entries.sort_by_key(|e| std::cmp::Reverse(e.pattern.chars().count()));
        Ok(PrefixTable { entries })
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::None)
            .from_reader(text.as_bytes());
        let mut entries = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::InvalidInput(format!("prefix table: {e}")))?;
            let pattern = rec.get(0).unwrap_or("").to_string();
            let position = rec.get(1).unwrap_or("").parse()?;
            entries.push(PrefixEntry { pattern, position });
        }
        Self::new(entries)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }

    pub fn entries(&self) -> &[PrefixEntry] {
        &self.entries
    }
}

impl Default for PrefixTable {
    fn default() -> Self {
        Self::from_csv_str(DEFAULT_PREFIX_TABLE).expect("bundled prefix table is valid")
    }
}

fn starts_with_ci(s: &str, pat: &str) -> bool {
    s.len() >= pat.len() && s.is_char_boundary(pat.len()) && s[..pat.len()].eq_ignore_ascii_case(pat)
}

fn ends_with_ci(s: &str, pat: &str) -> bool {
    let cut = s.len().wrapping_sub(pat.len());
    s.len() >= pat.len() && s.is_char_boundary(cut) && s[cut..].eq_ignore_ascii_case(pat)
}

fn find_ci(s: &str, pat: &str) -> Option<usize> {
    (0..=s.len().saturating_sub(pat.len()))
        .filter(|&i| s.is_char_boundary(i))
        .find(|&i| starts_with_ci(&s[i..], pat))
}

fn remove_all_ci(s: &str, pat: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = find_ci(rest, pat) {
        out.push_str(&rest[..i]);
        rest = &rest[i + pat.len()..];
    }
    out.push_str(rest);
    out
}

/// Strips the longest applicable title pattern (ASCII case-insensitive) and
/// trims the remainder. `matched == false` flags a title for manual review;
/// the trimmed title is then returned unchanged.
pub fn extract_variety_name(title: &str, table: &PrefixTable) -> (String, bool) {
    let trimmed = title.trim();
    for entry in &table.entries {
        let pat = entry.pattern.as_str();
        let stripped = match entry.position {
            Position::Prefix if starts_with_ci(trimmed, pat) => Some(trimmed[pat.len()..].to_string()),
            Position::Suffix if ends_with_ci(trimmed, pat) => Some(trimmed[..trimmed.len() - pat.len()].to_string()),
            Position::Infix if find_ci(trimmed, pat).is_some() => Some(remove_all_ci(trimmed, pat)),
            _ => None,
        };
        if let Some(s) = stripped {
            let s = s.trim();
            if !s.is_empty() {
                return (s.to_string(), true);
            }
        }
    }
    (trimmed.to_string(), false)
}

const HYBRID_MARKERS: [&str; 4] = ["hybrid corn", "hybrid maize", "maize variety", "corn variety"];

fn has_word(haystack: &str, word: &str) -> bool {
    haystack.split(|c: char| !c.is_alphanumeric()).any(|w| w == word)
}

/// Inbred if the title mentions "inbred" or the whole word "line"; otherwise
/// Hybrid on any hybrid marker phrase; otherwise Other.
pub fn classify_patent_kind(title: &str) -> PatentKind {
    let t = title.to_lowercase();
    if t.contains("inbred") || has_word(&t, "line") {
        PatentKind::Inbred
    } else if HYBRID_MARKERS.iter().any(|m| t.contains(m)) {
        PatentKind::Hybrid
    } else {
        PatentKind::Other
    }
}

/// Fills `variety_name` and `kind` from each title. Returns the numbers of
/// patents whose title matched no pattern.
pub fn annotate_patents(patents: &mut [PatentRecord], table: &PrefixTable) -> Vec<String> {
    let mut unmatched = Vec::new();
    for p in patents.iter_mut() {
        let (variety, matched) = extract_variety_name(&p.title, table);
        p.kind = Some(classify_patent_kind(&p.title));
        if matched {
            p.variety_name = Some(variety);
        } else {
            p.variety_name = None;
            unmatched.push(p.patent_number.clone());
        }
    }
    unmatched
}

/// Uppercase with spaces and hyphens removed.
pub fn normalize_variety(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace() && *c != '-')
        .flat_map(char::to_uppercase)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MatchReport {
    /// Patent number → indices into the field-test slice.
    pub matches: BTreeMap<String, Vec<usize>>,
    /// Patents with a variety name but no field-test row.
    pub unmatched: Vec<String>,
    /// Patents that carry no variety name at all.
    pub missing_variety: Vec<String>,
}

/// Exact matching on normalized variety names.
pub fn match_patented_varieties<'a>(
    patents: impl IntoIterator<Item = &'a PatentRecord>,
    tests: &[FieldTestRecord],
) -> MatchReport {
    let mut by_name: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, t) in tests.iter().enumerate() {
        by_name.entry(normalize_variety(&t.hybrid)).or_default().push(i);
    }
    let mut report = MatchReport::default();
    for p in patents {
        let Some(name) = p.variety_name.as_deref() else {
            report.missing_variety.push(p.patent_number.clone());
            continue;
        };
        match by_name.get(&normalize_variety(name)) {
            Some(rows) => {
                report.matches.insert(p.patent_number.clone(), rows.clone());
            }
            None => report.unmatched.push(p.patent_number.clone()),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn patent(number: &str, variety: &str) -> PatentRecord {
        PatentRecord {
            patent_number: number.into(),
            title: String::new(),
            assignee: String::new(),
            filed_year: 1994,
            granted_year: 1996,
            cited_patents: vec![],
            forward_citation_count: 0,
            variety_name: Some(variety.into()),
            kind: None,
        }
    }

    fn field(hybrid: &str) -> FieldTestRecord {
        FieldTestRecord {
            state: "IL".into(),
            year: 1995,
            region: "1_Woodstoc".into(),
            brand: "X".into(),
            hybrid: hybrid.into(),
            yield_bu: 150.0,
            moisture: 20.0,
            maturity: None,
            stand: None,
            significant: false,
        }
    }

    #[test]
    fn extracts_documented_titles() {
        let t = PrefixTable::default();
        assert_eq!(
            extract_variety_name("Inbred corn line NP2073", &t),
            ("NP2073".into(), true)
        );
        assert_eq!(
            extract_variety_name("Hybrid maize variety X13088", &t),
            ("X13088".into(), true)
        );
        assert_eq!(
            extract_variety_name("Method of making popcorn", &t),
            ("Method of making popcorn".into(), false)
        );
        assert_eq!(
            extract_variety_name("Hybrid corn plant and seed 3563", &t),
            ("3563".into(), true)
        );
        assert_eq!(
            extract_variety_name("Imbred corn line PH24E", &t),
            ("PH24E".into(), true)
        );
        assert!(extract_variety_name("Maize seed designated 5NV611 and seeds thereof", &t).1);
    }

    #[test]
    fn table_is_longest_first() {
        let t = PrefixTable::default();
        let lens: Vec<_> = t.entries().iter().map(|e| e.pattern.chars().count()).collect();
        assert!(lens.windows(2).all(|w| w[0] >= w[1]));
        let inbred_line = t
            .entries()
            .iter()
            .position(|e| e.pattern == "Inbred corn line ")
            .unwrap();
        let inbred = t.entries().iter().position(|e| e.pattern == "inbred ").unwrap();
        assert!(inbred_line < inbred);
    }

    #[test]
    fn table_rejects_empty() {
        assert!(PrefixTable::new(vec![]).is_err());
        assert!(PrefixTable::new(vec![PrefixEntry {
            pattern: " ".into(),
            position: Position::Prefix
        }])
        .is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(classify_patent_kind("Inbred corn line NP2073"), PatentKind::Inbred);
        assert_eq!(classify_patent_kind("Hybrid corn variety 3489"), PatentKind::Hybrid);
        assert_eq!(classify_patent_kind("Corn transformation method"), PatentKind::Other);
        assert_eq!(classify_patent_kind("Maize lineage tracing"), PatentKind::Other);
        assert_eq!(classify_patent_kind("Hybrid corn line 33"), PatentKind::Inbred);
    }

    #[test]
    fn matching_and_gap_report() {
        let patents = [
            patent("5502272", "3563"),
            patent("7000001", "CH123456"),
            patent("7000002", "dk 535"),
        ];
        let mut nameless = patent("7000003", "");
        nameless.variety_name = None;
        let tests = vec![field("3563"), field("DK5353"), field("DK535"), field("3563")];
        let report = match_patented_varieties(patents.iter().chain([&nameless]), &tests);
        assert_eq!(report.matches["5502272"], vec![0, 3]);
        assert_eq!(report.matches["7000002"], vec![2]);
        assert_eq!(report.unmatched, vec!["7000001"]);
        assert_eq!(report.missing_variety, vec!["7000003"]);
    }

    fn designator() -> impl Strategy<Value = String> {
        "[A-Z0-9]{2,8}"
    }

    proptest! {
        #[test]
        fn pattern_plus_designator(idx in 0usize..200, d in designator()) {
            let t = PrefixTable::default();
            let prefixes: Vec<_> = t.entries().iter().filter(|e| e.position == Position::Prefix).collect();
            let e = prefixes[idx % prefixes.len()];
            let sep = if e.pattern.ends_with(' ') { "" } else { " " };
            let title = format!("{}{sep}{d}", e.pattern);
            let (v, matched) = extract_variety_name(&title, &t);
            prop_assert!(matched);
            prop_assert_eq!(&v, &d);
            prop_assert_eq!(extract_variety_name(&v, &t).0, v);
        }

        #[test]
        fn classify_ignores_case(title in "[a-zA-Z ]{0,40}") {
            prop_assert_eq!(classify_patent_kind(&title), classify_patent_kind(&title.to_uppercase()));
        }

        #[test]
        fn match_iff_normalized_equal(a in "[a-zA-Z0-9 -]{1,8}", b in "[a-zA-Z0-9 -]{1,8}") {
            let report = match_patented_varieties([&patent("1", &a)], &[field(&b)]);
            prop_assert_eq!(report.matches.contains_key("1"), normalize_variety(&a) == normalize_variety(&b));
        }
    }
}
