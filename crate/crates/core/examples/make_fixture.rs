//! Regenerates the bundled synthetic dataset under `data/synthetic`.
//!
//! `cargo run --example make_fixture [-- <dir> [seed]]`

use std::path::PathBuf;

use cornrate::data::save_dataset_stamped;
use cornrate::network::{write_network, CitationNetwork};
use cornrate::synthetic::{synthetic_dataset, DEFAULT_SEED};

fn main() -> cornrate::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic"));
    let seed = args
        .next()
        .map_or(DEFAULT_SEED, |s| s.parse().expect("seed is an integer"));

    let d = synthetic_dataset(seed)?;
    save_dataset_stamped(&d, &dir, None)?;
    let (net, _) = CitationNetwork::from_dataset(&d)?;
    write_network(&net, dir.join("nodes.csv"), dir.join("edges.csv"))?;
    println!(
        "wrote {} patents, {} trial sets, {} field-test rows, {} citation edges to {}",
        d.patents().len(),
        d.trial_sets().len(),
        d.field_tests().len(),
        net.edge_count(),
        dir.display()
    );
    Ok(())
}
