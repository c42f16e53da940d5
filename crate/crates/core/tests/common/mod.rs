//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cornrate::data::FieldTestRecord;
use cornrate::regression::Design;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, Uniform};

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture_dir() -> PathBuf {
    manifest_dir().join("data/synthetic")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs the built binary with `args`.
pub fn cornrate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cornrate"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn x_design(x: &[f64]) -> Design {
    Design::with_intercept(vec![("x".to_string(), x.to_vec())], x.len()).unwrap()
}

/// `(X'X)^-1 X'y` by Gauss-Jordan elimination on the augmented normal equations.
pub fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = rows[0].len();
    let mut a = vec![vec![0.0; p + 1]; p];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += row[i] * row[j];
            }
            a[i][p] += row[i] * yi;
        }
    }
    for c in 0..p {
        let piv = (c..p).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        for r in 0..p {
            if r != c {
                let f = a[r][c] / a[c][c];
                let pivot_row = a[c].clone();
                for (x, v) in a[r][c..].iter_mut().zip(&pivot_row[c..]) {
                    *x -= f * v;
                }
            }
        }
    }
    (0..p).map(|i| a[i][p] / a[i][i]).collect()
}

/// x ~ U(-1, 2), y ~ Poisson(exp(b0 + b1 x)).
pub fn simulate_poisson(n: usize, b0: f64, b1: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let u = Uniform::new(-1.0, 2.0).unwrap();
    let x: Vec<f64> = (0..n).map(|_| u.sample(&mut r)).collect();
    let y = x
        .iter()
        .map(|v| Poisson::new((b0 + b1 * v).exp()).unwrap().sample(&mut r))
        .collect();
    (x, y)
}

/// NB2 draws as a gamma-Poisson mixture with mean exp(b0 + b1 x) and shape `theta`.
pub fn simulate_negbin(n: usize, b0: f64, b1: f64, theta: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let u = Uniform::new(-1.0, 2.0).unwrap();
    let x: Vec<f64> = (0..n).map(|_| u.sample(&mut r)).collect();
    let y = x
        .iter()
        .map(|v| {
            let mu = (b0 + b1 * v).exp();
            let lambda: f64 = Gamma::new(theta, mu / theta).unwrap().sample(&mut r);
            if lambda > 0.0 {
                Poisson::new(lambda).unwrap().sample(&mut r)
            } else {
                0.0
            }
        })
        .collect();
    (x, y)
}

/// Nodes with application years, and (citing, cited) edges.
pub type Graph = (Vec<(String, i32)>, Vec<(String, String)>);

/// Random DAG where node `i` may only cite lower-numbered nodes; years equal indices.
pub fn random_dag(r: &mut impl Rng, max_nodes: usize) -> Graph {
    let n = r.random_range(1..=max_nodes);
    let density: f64 = r.random_range(0.1..0.7);
    let nodes = (0..n).map(|i| (format!("n{i}"), i as i32)).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..i {
            if r.random_bool(density) {
                edges.push((format!("n{i}"), format!("n{j}")));
            }
        }
    }
    (nodes, edges)
}

/// Enumerates every directed path (including single-node paths) and counts, per
/// node, how many of them pass through it.
pub fn spnp_by_enumeration(nodes: &[(String, i32)], edges: &[(String, String)]) -> BTreeMap<String, u128> {
    let mut out: BTreeMap<&str, Vec<&str>> = nodes.iter().map(|(id, _)| (id.as_str(), Vec::new())).collect();
    for (from, to) in edges {
        out.get_mut(from.as_str()).unwrap().push(to.as_str());
    }
    let mut counts: BTreeMap<String, u128> = nodes.iter().map(|(id, _)| (id.clone(), 0)).collect();
    fn walk<'a>(path: &mut Vec<&'a str>, out: &BTreeMap<&'a str, Vec<&'a str>>, counts: &mut BTreeMap<String, u128>) {
        for id in path.iter() {
            *counts.get_mut(*id).unwrap() += 1;
        }
        let last = *path.last().unwrap();
        for &next in &out[last] {
            path.push(next);
            walk(path, out, counts);
            path.pop();
        }
    }
    for (id, _) in nodes {
        walk(&mut vec![id.as_str()], &out, &mut counts);
    }
    counts
}

pub fn field_row(year: i32, region: &str, hybrid: &str, yield_bu: f64) -> FieldTestRecord {
    FieldTestRecord {
        state: "IL".into(),
        year,
        region: region.into(),
        brand: "B".into(),
        hybrid: hybrid.into(),
        yield_bu,
        moisture: 18.0,
        maturity: None,
        stand: None,
        significant: false,
    }
}

pub fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

/// One invocation per command and notable flag combination on the bundled fixture.
pub fn command_matrix() -> Vec<(&'static str, Vec<String>)> {
    let fx = fixture_dir();
    let f = |name: &str| fx.join(name).display().to_string();
    let usda = manifest_dir().join("data/usda_us_corn_yield.csv").display().to_string();
    let s = |v: &[&str]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>();
    vec![
        ("ingest", {
            let mut v = s(&["ingest", "--schema", "illinois", "--patents"]);
            v.extend([
                f("patents.csv"),
                "--trials".into(),
                f("trials.csv"),
                "--fieldtests".into(),
                f("fieldtests.csv"),
            ]);
            v
        }),
        (
            "trend_max",
            s(&[
                "trend",
                "--series",
                "patent-yearly-max",
                "--from",
                "1985",
                "--to",
                "2010",
            ]),
        ),
        ("trend_state", s(&["trend", "--series", "state-average"])),
        (
            "trend_usda",
            vec![
                "trend".into(),
                "--series".into(),
                "usda-file".into(),
                "--input".into(),
                usda,
            ],
        ),
        ("trend_weather_all", s(&["trend", "--series", "weather-corrected"])),
        (
            "trend_weather_one",
            s(&[
                "trend",
                "--series",
                "weather-corrected",
                "--region",
                "North",
                "--control",
                "Whata 5656",
            ]),
        ),
        (
            "k1_hybrid_2005",
            s(&["predict", "k1", "--kind", "hybrid", "--filed-until", "2005"]),
        ),
        (
            "k1_both",
            s(&["predict", "k1", "--kind", "both", "--year-basis", "filing"]),
        ),
        (
            "k2_hybrid_2005",
            s(&["predict", "k2", "--kind", "hybrid", "--filed-until", "2005"]),
        ),
        ("k2_files_log", {
            let mut v = s(&["predict", "k2", "--log-spnp", "--nodes"]);
            v.extend([f("nodes.csv"), "--edges".into(), f("edges.csv")]);
            v
        }),
        (
            "k2_centrality",
            s(&["predict", "k2", "--centrality-only", "--kind", "inbred"]),
        ),
        ("regress_default", s(&["regress"])),
        (
            "regress_families",
            s(&[
                "regress",
                "--models",
                "1",
                "--family",
                "ols,poisson,negbin",
                "--exclude-default",
            ]),
        ),
        ("report", s(&["report"])),
    ]
}

/// Runs `args` against the fixture with `--no-timestamp`, writing into `out`.
pub fn run_in(out: &Path, args: &[String]) -> Output {
    let fx = fixture_dir().display().to_string();
    let out_s = out.display().to_string();
    let mut full: Vec<&str> = vec!["--no-timestamp", "--dataset", &fx, "--out", &out_s];
    full.extend(args.iter().map(String::as_str));
    cornrate(&full)
}

/// Every file under `dir` with its bytes, sorted by name.
pub fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map(|rd| {
            rd.map(|e| e.unwrap().path())
                .filter(|p| p.is_file())
                .map(|p| {
                    (
                        p.file_name().unwrap().to_string_lossy().into_owned(),
                        std::fs::read(&p).unwrap(),
                    )
                })
                .collect()
        })
        .unwrap_or_default();
    files.sort();
    files
}
