//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use cornrate::citation::{predict_k1, YearBasis};
use cornrate::data::{infer_missing_year_average, load_dataset, load_trial_sets};
use cornrate::network::{compute_spnp, predict_k2, CitationNetwork};
use cornrate::regression::{
    analysis_table, fit_negative_binomial, fit_ols, fit_poisson, run_model, Design, Family, GlmOptions, ModelSpec,
};
use cornrate::trend::{fit_exponential, weather_corrected_series, TrendSeries};
use cornrate::yields::{performance_ratio, yield_a};
use num_bigint::BigUint;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, format!("took {elapsed:?}, limit {limit:?}"))
}

fn usda_reproduction() -> Outcome {
    let start = Instant::now();
    let s = TrendSeries::usda_us_corn_yield().restrict(Some(1930), Some(2015));
    let fit = fit_exponential(&s).map_err(|e| e.to_string())?;
    let r2 = fit.r_squared.ok_or("no r_squared")?;
    within(start.elapsed(), Duration::from_secs(1))?;
    check(s.len() == 86, format!("{} points, expected 86", s.len()))?;
    check((0.020..=0.028).contains(&fit.k), format!("k = {}", fit.k))?;
    check(r2 >= 0.90, format!("r_squared = {r2}"))?;
    Ok(format!("k = {:.4}, R² = {r2:.3}", fit.k))
}

fn exact_exponential_recovery() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let q0 = r.random_range(1.0..1000.0);
        let k = r.random_range(-0.1..0.1);
        let n = r.random_range(2..120);
        let t0 = r.random_range(1800..2000);
        let points = (0..n).map(|t| (t0 + t, q0 * (k * f64::from(t)).exp())).collect();
        let fit = fit_exponential(&TrendSeries::new(points).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        worst = worst.max((fit.k - k).abs());
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    check(worst < 1e-12, format!("max |Δk| = {worst:e}"))?;
    Ok(format!("100 draws, max |Δk| = {worst:.1e}"))
}

fn spnp_matches(nodes: Vec<(String, i32)>, edges: Vec<(String, String)>) -> Result<(), String> {
    let oracle = spnp_by_enumeration(&nodes, &edges);
    let net = CitationNetwork::new(nodes, edges).map_err(|e| e.to_string())?;
    let got = compute_spnp(&net);
    for (id, want) in &oracle {
        check(got[id] == BigUint::from(*want), format!("{id}: {} vs {want}", got[id]))?;
    }
    Ok(())
}

fn spnp_oracle() -> Outcome {
    let start = Instant::now();
    let named = |ids: &[(&str, i32)], es: &[(&str, &str)]| {
        (
            ids.iter().map(|(a, y)| (a.to_string(), *y)).collect::<Vec<_>>(),
            es.iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect::<Vec<_>>(),
        )
    };
    let (n, e) = named(&[("A", 1), ("B", 2), ("C", 3)], &[("C", "B"), ("B", "A")]);
    let chain = compute_spnp(&CitationNetwork::new(n, e).map_err(|e| e.to_string())?);
    let expect = [("A", 3u32), ("B", 4), ("C", 3)];
    check(
        expect.iter().all(|(id, v)| chain[*id] == BigUint::from(*v)),
        "chain values",
    )?;
    let (n, e) = named(
        &[("A", 1), ("B", 2), ("C", 2), ("D", 3)],
        &[("D", "B"), ("D", "C"), ("B", "A"), ("C", "A")],
    );
    let diamond = compute_spnp(&CitationNetwork::new(n, e).map_err(|e| e.to_string())?);
    let expect = [("A", 5u32), ("B", 4), ("C", 4), ("D", 5)];
    check(
        expect.iter().all(|(id, v)| diamond[*id] == BigUint::from(*v)),
        "diamond values",
    )?;

    let mut r = rng(3);
    let dags = 150;
    for _ in 0..dags {
        let (n, e) = random_dag(&mut r, 12);
        spnp_matches(n, e)?;
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("chain, diamond and {dags} random DAGs agree"))
}

fn formula_checks() -> Outcome {
    let a = predict_k1(2000.0, 0.0);
    check((a + 0.1285).abs() <= 1e-12, format!("predict_k1(2000, 0) = {a}"))?;
    let b = predict_k2(0.0, 0.0);
    check(
        (b - (-5.8486f64).exp()).abs() <= 1e-12,
        format!("predict_k2(0, 0) = {b}"),
    )?;
    let c = predict_k2(0.3261, 0.0);
    check((c - 0.015).abs() <= 5e-4, format!("predict_k2(0.3261, 0) = {c}"))?;
    Ok(format!("K1 = {a:.4}, K2(0,0) = {b:.5}, K2(0.3261,0) = {c:.4}"))
}

fn glm_recovery() -> Outcome {
    let start = Instant::now();
    let opts = GlmOptions::default();
    let err = |e: cornrate::Error| e.to_string();

    let (x, y) = simulate_poisson(5000, 0.5, 0.3, 42);
    let b = fit_poisson(&y, &x_design(&x), &opts).map_err(err)?.beta();
    check(
        (b[0] - 0.5).abs() < 0.05 && (b[1] - 0.3).abs() < 0.05,
        format!("poisson {b:?}"),
    )?;

    let mut r = rng(5);
    let counts: Vec<f64> = (0..40).map(|_| f64::from(r.random_range(0u32..12))).collect();
    let only = Design::with_intercept(Vec::new(), counts.len()).map_err(err)?;
    let b0 = fit_poisson(&counts, &only, &opts).map_err(err)?.beta()[0];
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    check(
        (b0 - mean.ln()).abs() < 1e-8,
        format!("intercept {b0} vs ln(mean) {}", mean.ln()),
    )?;

    let (x, y) = simulate_negbin(5000, 1.0, 0.2, 2.0, 7);
    let nb = fit_negative_binomial(&y, &x_design(&x), &opts).map_err(err)?;
    let (b, theta) = (nb.beta(), nb.dispersion.ok_or("no dispersion")?);
    check(
        (b[0] - 1.0).abs() < 0.05 && (b[1] - 0.2).abs() < 0.05,
        format!("negbin {b:?}"),
    )?;
    check((theta - 2.0).abs() < 0.3, format!("theta {theta}"))?;

    let x: Vec<f64> = (0..50).map(|_| r.random_range(-3.0..3.0)).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 + 0.5 * v + r.random_range(-1.0..1.0)).collect();
    let rows: Vec<Vec<f64>> = x.iter().map(|v| vec![1.0, *v]).collect();
    let oracle = normal_equations(&rows, &y);
    let got = fit_ols(&y, &x_design(&x)).map_err(err)?.beta();
    let gap = got.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(gap < 1e-10, format!("ols gap {gap:e}"))?;

    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "negbin beta {:.3}/{:.3}, theta {theta:.3}, ols gap {gap:.1e}",
        b[0], b[1]
    ))
}

fn weather_cancellation() -> Outcome {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        // Keeps the planted variety on top: 200·e^(-0.02·24) > 90.
        let k = r.random_range(-0.02..0.08);
        let years = r.random_range(3..25);
        let mut tests = Vec::new();
        for t in 0..years {
            let w = r.random_range(0.3..1.7);
            let year = 1990 + t;
            tests.push(field_row(year, "N", "best", 200.0 * (k * f64::from(t)).exp() * w));
            tests.push(field_row(year, "N", "ctrl", 90.0 * w));
            tests.push(field_row(year, "N", "other", 60.0 * w * r.random_range(0.5..1.0)));
        }
        let s = weather_corrected_series(&tests, "N", "ctrl").map_err(|e| e.to_string())?;
        let fit = fit_exponential(&s).map_err(|e| e.to_string())?;
        worst = worst.max((fit.k - k).abs());
    }
    check(worst < 1e-12, format!("max |Δk| = {worst:e}"))?;
    Ok(format!("50 regions, max |Δk| = {worst:.1e}"))
}

fn published_trial_pairs() -> Outcome {
    let path = manifest_dir().join("data/published_trials.csv");
    let sets = load_trial_sets(&path).map_err(|e| e.to_string())?.records;
    let find = |n: &str| sets.iter().find(|s| s.patent_number == n).ok_or(format!("{n} missing"));
    let a = yield_a(find("5502272")?);
    let b = yield_a(find("5491290")?);
    let pr = performance_ratio(find("5502272")?).map_err(|e| e.to_string())?;
    check((a - 134.225).abs() < 1e-3, format!("5502272 yield_a {a}"))?;
    check((b - 156.4333).abs() < 1e-3, format!("5491290 yield_a {b}"))?;
    check((pr - 1.00636).abs() < 1e-4, format!("5502272 performance_ratio {pr}"))?;
    Ok(format!("yield_a {a:.4} / {b:.4}, ratio {pr:.5}"))
}

fn missing_year_algebra() -> Outcome {
    let worked = infer_missing_year_average(150.0, &[155.0], 2)
        .map_err(|e| e.to_string())?
        .value;
    check(worked == 145.0, format!("worked case {worked}"))?;
    let mut r = rng(8);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = r.random_range(2..12);
        let known: Vec<f64> = (1..m).map(|_| r.random_range(50.0..250.0)).collect();
        let summary = r.random_range(50.0..250.0);
        let v = infer_missing_year_average(summary, &known, m)
            .map_err(|e| e.to_string())?
            .value;
        let back = (known.iter().sum::<f64>() + v) / m as f64;
        worst = worst.max((back - summary).abs());
    }
    check(worst <= 1e-12, format!("max re-average error {worst:e}"))?;
    Ok(format!("worked case 145, 1000 random cases within {worst:.1e}"))
}

fn synthetic_pipeline() -> Outcome {
    let d = load_dataset(fixture_dir()).map_err(|e| e.to_string())?;
    let rows = analysis_table(&d, YearBasis::Grant).map_err(|e| e.to_string())?;
    let spec = ModelSpec::table(1, Family::Poisson).map_err(|e| e.to_string())?;
    let r = run_model(&spec, &rows, &BTreeSet::new(), &GlmOptions::default()).map_err(|e| e.to_string())?;
    let (coef, p) = (r.coefficient("performance_ratio"), r.p_value("performance_ratio"));
    check(coef > 0.0 && p < 0.01, format!("coefficient {coef}, p {p}"))?;
    Ok(format!("n = {}, performance_ratio {coef:.3} (p = {p:.1e})", r.n))
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let matrix = command_matrix();
    for (label, args) in &matrix {
        let dir = root.path().join(label);
        let first = run_in(&dir, args);
        check(
            first.status.success(),
            format!("{label} failed: {}", String::from_utf8_lossy(&first.stderr)),
        )?;
        let files = dir_contents(&dir);
        std::fs::remove_dir_all(&dir).map_err(|e| e.to_string())?;
        let second = run_in(&dir, args);
        check(first.stdout == second.stdout, format!("{label}: stdout differs"))?;
        check(files == dir_contents(&dir), format!("{label}: output files differ"))?;
    }
    Ok(format!("{} invocations reproduced byte for byte", matrix.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("USDA reproduction", usda_reproduction),
        ("exact-exponential recovery", exact_exponential_recovery),
        ("SPNP oracle equivalence", spnp_oracle),
        ("formula checks", formula_checks),
        ("GLM recovery", glm_recovery),
        ("weather-cancellation identity", weather_cancellation),
        ("published trial pairs", published_trial_pairs),
        ("missing-year algebra", missing_year_algebra),
        ("end-to-end synthetic pipeline", synthetic_pipeline),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
