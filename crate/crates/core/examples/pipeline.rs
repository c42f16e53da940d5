//! Generates a fresh synthetic dataset in a temporary directory and drives the
//! whole command-line pipeline over it.

use clap::Parser;
use cornrate::cli::{run, Cli};
use cornrate::data::save_dataset_stamped;
use cornrate::synthetic::synthetic_dataset;

fn main() -> cornrate::Result<()> {
    let seed = std::env::args().nth(1).map_or(7, |s| s.parse().expect("seed"));
    let root = std::env::temp_dir().join(format!("cornrate-pipeline-{seed}"));
    let dataset = root.join("dataset");
    save_dataset_stamped(&synthetic_dataset(seed)?, &dataset, None)?;

    let steps: [&[&str]; 5] = [
        &["trend", "--series", "state-average"],
        &["trend", "--series", "weather-corrected"],
        &["predict", "k1", "--kind", "both", "--filed-until", "2013"],
        &["predict", "k2", "--filed-until", "2013"],
        &[
            "regress",
            "--models",
            "1",
            "--family",
            "poisson,negbin",
            "--exclude-default",
        ],
    ];
    for step in steps {
        let mut argv = vec!["cornrate", "--no-timestamp", "--dataset"];
        let (ds, out) = (dataset.display().to_string(), root.join("out").display().to_string());
        argv.extend([ds.as_str(), "--out", out.as_str()]);
        argv.extend(step);
        let cli = Cli::try_parse_from(&argv).expect("valid arguments");
        let json = run(cli)?;
        println!("{}: {} bytes of JSON", step.join(" "), json.len());
    }
    println!("outputs in {}", root.join("out").display());
    Ok(())
}
