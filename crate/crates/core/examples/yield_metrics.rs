//! Per-patent yield summaries from transcribed trial comparisons, plus the
//! missing-year inference used when a report only gives a multi-year mean.

use cornrate::data::{infer_missing_year_average, load_trial_sets};
use cornrate::yields::YieldSummary;

fn main() -> cornrate::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/published_trials.csv");
    let sets = load_trial_sets(&path)?;
    println!(
        "{} trial sets, {} summary rows skipped",
        sets.records.len(),
        sets.report.rows_skipped
    );
    println!(
        "{:<10} {:>6} {:>10} {:>10} {:>10}",
        "patent", "tests", "yield_a", "yield_b", "ratio"
    );
    for ts in &sets.records {
        let s = YieldSummary::from_trial_set(ts)?;
        println!(
            "{:<10} {:>6} {:>10.4} {:>10.1} {:>10.5}",
            s.patent_number, s.n_tests, s.yield_a, s.yield_b, s.performance_ratio
        );
    }

    let inferred = infer_missing_year_average(150.0, &[155.0], 2)?;
    println!("two-year mean 150 with one year at 155 implies {}", inferred.value);
    Ok(())
}
