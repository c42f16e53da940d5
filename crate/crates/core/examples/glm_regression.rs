//! The four citation models under every family on the synthetic trial patents.

use cornrate::citation::YearBasis;
use cornrate::data::load_dataset;
use cornrate::regression::{analysis_table, parse_exclusions, run_model, Family, GlmOptions, ModelSpec};

const EXCLUSIONS: &str = include_str!("../data/exclusions.txt");

fn main() -> cornrate::Result<()> {
    let d = load_dataset(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic"))?;
    let rows = analysis_table(&d, YearBasis::Grant)?;
    let excluded = parse_exclusions(EXCLUSIONS);
    for id in 1..=4 {
        for family in [Family::Ols, Family::Poisson, Family::NegativeBinomial] {
            let r = run_model(&ModelSpec::table(id, family)?, &rows, &excluded, &GlmOptions::default())?;
            let terms: Vec<String> = r
                .terms
                .iter()
                .map(|t| format!("{t} {:+.4} (p {:.3})", r.coefficient(t), r.p_value(t)))
                .collect();
            println!(
                "model {id} {:<8} n={} {:?}: {}",
                family.to_string(),
                r.n,
                r.status,
                terms.join(", ")
            );
            for w in &r.warnings {
                println!("    warning: {w}");
            }
        }
    }
    Ok(())
}
