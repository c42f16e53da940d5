//! Seeded synthetic corpus standing in for the unpublished trial dataset.
//!
//! The generator plants known effects: lifetime forward citations of trial
//! patents follow a Poisson law whose log-mean rises with the performance
//! ratio and falls with filing year, and citations arrive with a lag so
//! that the citation cutoff truncates recent patents. Field tests carry a
//! planted yearly yield gain, shared weather shocks and three long-running
//! control varieties.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::constants::constants;
use crate::data::{Dataset, FieldTestRecord, Maturity, PatentKind, PatentRecord, PatentTrialSet, TrialComparison};
use crate::error::Result;

pub const DEFAULT_SEED: u64 = 20_150_601;
pub const TRIAL_PATENTS: usize = 70;

/// Log-mean of lifetime citations: `BASE + PERFORMANCE * (ratio - 1) + YEAR * (filed - 1995)`.
pub const PLANTED_CITATION_BASE: f64 = 2.0;
pub const PLANTED_PERFORMANCE_EFFECT: f64 = 8.0;
pub const PLANTED_YEAR_EFFECT: f64 = -0.04;
/// Yearly field-test yield gain, as an exponential rate.
pub const PLANTED_FIELD_RATE: f64 = 0.012;

pub const FIELD_REGIONS: [&str; 4] = ["North", "Central", "West Central", "South"];
pub const FIELD_FIRST_YEAR: i32 = 1995;
pub const FIELD_LAST_YEAR: i32 = 2015;

/// (region, variety, brand, first year, years tested)
const CONTROLS: [(&str, &str, &str, i32, i32); 3] = [
    ("North", "Whata 5656", "Whata", 2000, 7),
    ("North", "4373", "Stewart", 2000, 7),
    ("West Central", "33P67", "Pioneer", 2001, 8),
];

/// (control, patented yield, control yield)
type TrialPair = (&'static str, f64, f64);

/// Trial pairs transcribed from a published trial table (patent, variety, pairs).
const PUBLISHED_TRIALS: [(&str, &str, &[TrialPair]); 3] = [
    (
        "5502272",
        "3563",
        &[
            ("3615", 99.7, 99.6),
            ("3578", 146.3, 144.2),
            ("3475", 146.0, 146.5),
            ("DK535", 144.9, 143.0),
        ],
    ),
    (
        "5491290",
        "3525",
        &[
            ("3417", 156.8, 154.5),
            ("3398", 159.9, 158.1),
            ("3394", 156.7, 159.7),
            ("3379", 154.5, 150.2),
            ("3362", 155.3, 148.1),
            ("WYF627", 155.4, 144.1),
        ],
    ),
    (
        "5557035",
        "3489",
        &[("3563", 151.8, 138.1), ("3417", 152.7, 150.0), ("3394", 141.6, 146.9)],
    ),
];

const HYBRID_TITLES: [&str; 4] = [
    "Hybrid corn plant and seed ",
    "Hybrid maize plant and seed ",
    "Hybrid corn variety ",
    "Plants and seeds of hybrid corn ",
];

const ASSIGNEES: [(&str, f64); 5] = [
    ("Pioneer Hi-Bred International", 0.45),
    ("Monsanto Technology", 0.25),
    ("Syngenta Participations", 0.12),
    ("Dow Agrosciences", 0.10),
    ("Stine Seed Farm", 0.08),
];

const OTHER_TITLES: [&str; 4] = [
    "Method for increasing grain yield",
    "Seed treatment composition",
    "Transgenic event and detection method",
    "Method of plant breeding using markers",
];

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

fn pick_assignee(rng: &mut ChaCha8Rng) -> &'static str {
    let mut u: f64 = rng.random();
    for (name, share) in ASSIGNEES {
        if u < share {
            return name;
        }
        u -= share;
    }
    ASSIGNEES[0].0
}

/// First utility patent number of some grant years, roughly.
const FIRST_NUMBER: [(i32, u32); 9] = [
    (1976, 3_930_000),
    (1980, 4_180_000),
    (1985, 4_490_000),
    (1990, 4_890_000),
    (1995, 5_380_000),
    (2000, 6_010_000),
    (2005, 6_980_000),
    (2010, 7_640_000),
    (2016, 9_230_000),
];

/// Hands out increasing patent numbers within each grant year, skipping
/// numbers reserved for fixed patents.
struct Numbers {
    last: std::collections::BTreeMap<i32, u32>,
    reserved: BTreeSet<u32>,
}

impl Numbers {
    fn new(reserved: impl IntoIterator<Item = u32>) -> Self {
        Numbers {
            last: Default::default(),
            reserved: reserved.into_iter().collect(),
        }
    }

    fn first_of(year: i32) -> u32 {
        let i = FIRST_NUMBER
            .partition_point(|(y, _)| *y <= year)
            .clamp(1, FIRST_NUMBER.len() - 1);
        let ((y0, n0), (y1, n1)) = (FIRST_NUMBER[i - 1], FIRST_NUMBER[i]);
        let per_year = f64::from(n1 - n0) / f64::from(y1 - y0);
        (f64::from(n0) + per_year * f64::from(year - y0)) as u32
    }

    fn next(&mut self, granted: i32, rng: &mut ChaCha8Rng) -> String {
        let last = self.last.entry(granted).or_insert_with(|| Self::first_of(granted));
        *last += rng.random_range(1..400);
        while self.reserved.contains(last) {
            *last += 1;
        }
        last.to_string()
    }
}

fn patent(number: String, title: String, assignee: &str, filed: i32, granted: i32) -> PatentRecord {
    PatentRecord {
        patent_number: number,
        title,
        assignee: assignee.to_string(),
        filed_year: filed,
        granted_year: granted,
        cited_patents: Vec::new(),
        forward_citation_count: 0,
        variety_name: None,
        kind: None,
    }
}

/// Hybrid filing counts: three a year, then a fourfold jump.
fn hybrid_filings(year: i32) -> usize {
    if year >= constants().hybrid_filing_jump_year {
        12
    } else {
        3
    }
}

/// Builds the full synthetic dataset for `seed`.
pub fn synthetic_dataset(seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cutoff = constants().citation_cutoff_year;
    let reserved = constants()
        .highly_cited_exclusions
        .iter()
        .map(|n| n.parse::<u32>().expect("numeric patent number"))
        .chain(
            PUBLISHED_TRIALS
                .iter()
                .map(|(n, _, _)| n.parse::<u32>().expect("numeric patent number")),
        );
    let mut numbers = Numbers::new(reserved);

    // Inbred parents, cited by hybrids.
    let mut inbreds = Vec::new();
    for filed in 1980..=2013 {
        for _ in 0..3 {
            let granted = filed + rng.random_range(1..=3);
            let code = format!(
                "PH{}{}",
                (b'A' + rng.random_range(0..26u8)) as char,
                rng.random_range(100..999)
            );
            let mut p = patent(
                String::new(),
                format!("Inbred corn line {code}"),
                pick_assignee(&mut rng),
                filed,
                granted,
            );
            let earlier: Vec<usize> = (0..inbreds.len())
                .filter(|&i| {
                    let q: &PatentRecord = &inbreds[i];
                    q.granted_year <= filed
                })
                .collect();
            if !earlier.is_empty() && rng.random_bool(0.6) {
                let j = earlier[rng.random_range(0..earlier.len())];
                p.cited_patents.push(j.to_string());
            }
            inbreds.push(p);
        }
    }

    // Hybrids.
    let mut hybrids = Vec::new();
    for filed in 1984..=2013 {
        for _ in 0..hybrid_filings(filed) {
            let granted = filed + rng.random_range(1..=3);
            let variety = format!(
                "{}{}{}",
                rng.random_range(30..40),
                (b'A' + rng.random_range(0..26u8)) as char,
                rng.random_range(10..99)
            );
            let prefix = HYBRID_TITLES[rng.random_range(0..HYBRID_TITLES.len())];
            hybrids.push(patent(
                String::new(),
                format!("{prefix}{variety}"),
                pick_assignee(&mut rng),
                filed,
                granted,
            ));
        }
    }

    // Numbers increase with grant year across all kinds.
    let mut order: Vec<(i32, u8, usize)> = inbreds
        .iter()
        .enumerate()
        .map(|(i, p)| (p.granted_year, 0, i))
        .chain(hybrids.iter().enumerate().map(|(i, p)| (p.granted_year, 1, i)))
        .collect();
    order.sort();
    let inbred_index: Vec<String> = {
        let mut ids = vec![String::new(); inbreds.len()];
        let mut hy = vec![String::new(); hybrids.len()];
        for &(granted, kind, i) in &order {
            let n = numbers.next(granted, &mut rng);
            if kind == 0 {
                ids[i] = n;
            } else {
                hy[i] = n;
            }
        }
        for (p, n) in hybrids.iter_mut().zip(hy) {
            p.patent_number = n;
        }
        ids
    };
    for (i, p) in inbreds.iter_mut().enumerate() {
        p.patent_number = inbred_index[i].clone();
        p.cited_patents = p
            .cited_patents
            .iter()
            .map(|j| inbred_index[j.parse::<usize>().expect("index")].clone())
            .collect();
    }

    // Hybrids cite one or two inbred parents granted before filing.
    for h in &mut hybrids {
        let parents: Vec<&PatentRecord> = inbreds.iter().filter(|q| q.granted_year <= h.filed_year).collect();
        let k = rng.random_range(0..=2).min(parents.len());
        let mut chosen = BTreeSet::new();
        while chosen.len() < k {
            chosen.insert(parents[rng.random_range(0..parents.len())].patent_number.clone());
        }
        h.cited_patents = chosen.into_iter().collect();
    }

    // Trial patents: the four early highly cited ones, three with published
    // trial tables, and a draw from the rest filed through 2010.
    let exclusions: Vec<String> = constants()
        .highly_cited_exclusions
        .iter()
        .map(|n| n.to_string())
        .collect();
    let mut trial_idx: Vec<usize> = Vec::new();
    let early: Vec<usize> = (0..hybrids.len()).filter(|&i| hybrids[i].filed_year <= 1985).collect();
    for (slot, number) in early.iter().zip(&exclusions) {
        hybrids[*slot].patent_number = number.clone();
        hybrids[*slot].granted_year = if number.as_str() < "4700000" { 1986 } else { 1988 };
        hybrids[*slot].assignee = ASSIGNEES[0].0.to_string();
        trial_idx.push(*slot);
    }
    let mid: Vec<usize> = (0..hybrids.len()).filter(|&i| hybrids[i].filed_year == 1994).collect();
    for (slot, (number, variety, _)) in mid.iter().zip(PUBLISHED_TRIALS.iter()) {
        let h = &mut hybrids[*slot];
        h.patent_number = number.to_string();
        h.title = format!("Hybrid corn plant and seed {variety}");
        h.assignee = ASSIGNEES[0].0.to_string();
        h.granted_year = 1996;
        trial_idx.push(*slot);
    }
    let mut rest: Vec<usize> = (0..hybrids.len())
        .filter(|&i| hybrids[i].filed_year <= 2010 && !trial_idx.contains(&i))
        .collect();
    rest.shuffle(&mut rng);
    trial_idx.extend(rest.into_iter().take(TRIAL_PATENTS - trial_idx.len()));
    trial_idx.sort_by_key(|&i| (hybrids[i].filed_year, i));

    // One Monsanto patent keeps an internal code never seen in field tests.
    let ch = *trial_idx
        .iter()
        .find(|&&i| hybrids[i].filed_year >= 2000)
        .expect("recent trial patent");
    hybrids[ch].title = "Hybrid maize variety CH010372".to_string();
    hybrids[ch].assignee = ASSIGNEES[1].0.to_string();

    let noise = Normal::new(0.0, 0.012).expect("sd > 0");
    let edge = Normal::new(0.03, 0.035).expect("sd > 0");
    let mut trial_sets = Vec::new();
    let mut trial_varieties = Vec::new();
    for &i in &trial_idx {
        let h = &hybrids[i];
        let variety = h.title.rsplit(' ').next().unwrap_or_default().to_string();
        let comparisons = match PUBLISHED_TRIALS.iter().find(|(n, _, _)| *n == h.patent_number) {
            Some((_, _, rows)) => rows
                .iter()
                .map(|&(c, p, q)| TrialComparison {
                    patented_yield: p,
                    control_yield: q,
                    control_name: c.to_string(),
                    patented_moisture: None,
                    control_moisture: None,
                })
                .collect(),
            None => {
                let advantage = edge.sample(&mut rng);
                let level = 125.0 * (0.015 * f64::from(h.filed_year - 1985)).exp();
                (0..rng.random_range(2..=8))
                    .map(|_| {
                        let control = round1(level * (1.0 + 0.08 * rng.random::<f64>()));
                        let patented = round1(control * (1.0 + advantage + noise.sample(&mut rng)));
                        let moisture = round1(rng.random_range(16.0..22.0));
                        TrialComparison {
                            patented_yield: patented,
                            control_yield: control,
                            control_name: format!("{}{}", rng.random_range(30..40), rng.random_range(100..999)),
                            patented_moisture: Some(moisture),
                            control_moisture: Some(round1(moisture + rng.random_range(-1.0..1.0))),
                        }
                    })
                    .collect()
            }
        };
        trial_varieties.push((variety.clone(), h.filed_year));
        trial_sets.push(PatentTrialSet {
            patent_number: h.patent_number.clone(),
            patented_variety: Some(variety),
            comparisons,
        });
    }

    // Citing patents, forty per grant year.
    let mut others = Vec::new();
    for granted in 1986..=cutoff {
        for _ in 0..40 {
            let filed = granted - rng.random_range(1..=3);
            let title = OTHER_TITLES[rng.random_range(0..OTHER_TITLES.len())].to_string();
            others.push(patent(String::new(), title, pick_assignee(&mut rng), filed, granted));
        }
    }
    others.sort_by_key(|p| p.granted_year);
    for p in &mut others {
        p.patent_number = numbers.next(p.granted_year, &mut rng);
    }

    // Planted citation process for trial patents.
    let lag = Poisson::new(3.0).expect("rate > 0");
    for (ts, &i) in trial_sets.iter().zip(&trial_idx) {
        let h = &hybrids[i];
        let ratio = crate::yields::performance_ratio(ts)?;
        let mut log_mean = PLANTED_CITATION_BASE
            + PLANTED_PERFORMANCE_EFFECT * (ratio - 1.0)
            + PLANTED_YEAR_EFFECT * f64::from(h.filed_year - 1995);
        if exclusions.contains(&h.patent_number) {
            log_mean += 1.5;
        }
        let lifetime = Poisson::new(log_mean.exp()).expect("rate > 0").sample(&mut rng) as u64;
        for _ in 0..lifetime {
            let year = h.granted_year + 1 + lag.sample(&mut rng) as i32;
            if year > cutoff {
                continue;
            }
            let pool: Vec<usize> = (0..others.len())
                .filter(|&j| {
                    let o = &others[j];
                    o.granted_year == year
                        && o.filed_year >= h.granted_year
                        && !o.cited_patents.contains(&h.patent_number)
                })
                .collect();
            if let Some(&j) = pool.get(rng.random_range(0..pool.len().max(1))) {
                others[j].cited_patents.push(h.patent_number.clone());
            }
        }
    }

    // Hybrids outside the trial set are cited too, more in earlier years.
    for h in hybrids
        .iter()
        .enumerate()
        .filter(|(i, _)| !trial_idx.contains(i))
        .map(|(_, h)| h)
    {
        let mean = (1.2 + PLANTED_YEAR_EFFECT * f64::from(h.filed_year - 1995)).exp();
        let count = Poisson::new(mean).expect("rate > 0").sample(&mut rng) as u64;
        for _ in 0..count {
            let year = h.granted_year + 1 + lag.sample(&mut rng) as i32;
            let pool: Vec<usize> = (0..others.len())
                .filter(|&j| {
                    let o = &others[j];
                    o.granted_year == year
                        && o.filed_year >= h.granted_year
                        && !o.cited_patents.contains(&h.patent_number)
                })
                .collect();
            if let Some(&j) = pool.get(rng.random_range(0..pool.len().max(1))) {
                others[j].cited_patents.push(h.patent_number.clone());
            }
        }
    }

    let mut patents: Vec<PatentRecord> = inbreds.into_iter().chain(hybrids).chain(others).collect();
    for p in &mut patents {
        p.cited_patents.sort();
    }
    let table = crate::title::PrefixTable::default();
    crate::title::annotate_patents(&mut patents, &table);
    for p in &mut patents {
        if p.kind == Some(PatentKind::Other) {
            p.variety_name = None;
        }
    }
    let mut counts = std::collections::HashMap::new();
    for p in &patents {
        for c in &p.cited_patents {
            if p.granted_year <= cutoff {
                *counts.entry(c.clone()).or_insert(0u32) += 1;
            }
        }
    }
    for p in &mut patents {
        p.forward_citation_count = counts.get(&p.patent_number).copied().unwrap_or(0);
    }

    let field_tests = field_tests(&mut rng, &trial_varieties);

    Dataset::new(patents, trial_sets, field_tests, cutoff)
}

/// Illinois-style field tests with shared yearly weather.
fn field_tests(rng: &mut ChaCha8Rng, trial_varieties: &[(String, i32)]) -> Vec<FieldTestRecord> {
    let weather_sd = Normal::new(0.0, 0.08).expect("sd > 0");
    let noise = Normal::new(0.0, 0.03).expect("sd > 0");
    let region_level = [1.03, 1.06, 1.0, 0.94];
    let level = |year: i32| 150.0 * (PLANTED_FIELD_RATE * f64::from(year - FIELD_FIRST_YEAR)).exp();
    let brands = ["Pioneer", "DeKalb", "Golden Harvest", "Beck's", "Wyffels", "NK"];
    let mut rows = Vec::new();
    for year in FIELD_FIRST_YEAR..=FIELD_LAST_YEAR {
        let weather = f64::exp(weather_sd.sample(rng)).min(1.25);
        for (r, region) in FIELD_REGIONS.iter().enumerate() {
            // (brand, hybrid, genetic level); controls keep the level of
            // their first season.
            let mut entries: Vec<(String, String, f64)> = Vec::new();
            for (creg, name, brand, first, span) in CONTROLS {
                if creg == *region && (first..first + span).contains(&year) {
                    entries.push((brand.to_string(), name.to_string(), level(first)));
                }
            }
            for (variety, filed) in trial_varieties {
                if year > *filed && year <= filed + 3 && variety.bytes().map(usize::from).sum::<usize>() % 4 == r {
                    entries.push(("Pioneer".to_string(), variety.clone(), level(*filed + 1)));
                }
            }
            for k in 0..10 {
                let brand = brands[(k + r) % brands.len()];
                entries.push((
                    brand.to_string(),
                    format!("{}{:02}{}", &brand[..1], year % 100, k * 7 + r),
                    level(year),
                ));
            }
            let maturity = [Maturity::Early, Maturity::Medium, Maturity::Late];
            for (brand, hybrid, genetic_level) in entries {
                let genetic = 1.0 + 0.04 * rng.random::<f64>();
                let y = genetic_level * region_level[r] * weather * genetic * (1.0 + noise.sample(rng));
                rows.push(FieldTestRecord {
                    state: "IL".to_string(),
                    year,
                    region: region.to_string(),
                    brand,
                    hybrid,
                    yield_bu: round1(y),
                    moisture: round1(rng.random_range(15.5..23.0)),
                    maturity: Some(maturity[rng.random_range(0..3)]),
                    stand: None,
                    significant: rng.random_bool(0.1),
                });
            }
        }
    }
    rows
}
