//! The bundled synthetic dataset is exactly what the generator produces.

mod common;

use std::fs;

use common::*;
use cornrate::citation::YearBasis;
use cornrate::data::{load_dataset, save_dataset_stamped, PatentKind};
use cornrate::network::{load_network, write_network, CitationNetwork};
use cornrate::regression::{analysis_table, run_model, Family, GlmOptions, ModelSpec};
use cornrate::synthetic::{synthetic_dataset, DEFAULT_SEED, TRIAL_PATENTS};
use cornrate::trend::find_control_varieties;

#[test]
fn regenerated_fixture_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = synthetic_dataset(DEFAULT_SEED).unwrap();
    save_dataset_stamped(&d, dir.path(), None).unwrap();
    let (net, _) = CitationNetwork::from_dataset(&d).unwrap();
    write_network(&net, dir.path().join("nodes.csv"), dir.path().join("edges.csv")).unwrap();
    for name in [
        "patents.csv",
        "trials.csv",
        "fieldtests.csv",
        "manifest.json",
        "nodes.csv",
        "edges.csv",
    ] {
        let fresh = fs::read(dir.path().join(name)).unwrap();
        let shipped = fs::read(fixture_dir().join(name)).unwrap();
        assert!(fresh == shipped, "{name} differs from the regenerated copy");
    }
}

#[test]
fn fixture_loads_and_round_trips() {
    let d = load_dataset(fixture_dir()).unwrap();
    assert_eq!(d.trial_sets().len(), TRIAL_PATENTS);
    let dir = tempfile::tempdir().unwrap();
    save_dataset_stamped(&d, dir.path(), None).unwrap();
    assert_eq!(load_dataset(dir.path()).unwrap(), d);

    let files = load_network(fixture_dir().join("nodes.csv"), fixture_dir().join("edges.csv")).unwrap();
    assert_eq!(files.skipped_edges, 0);
    assert_eq!(files.network.len(), d.patents().len());
}

#[test]
fn fixture_carries_the_planted_structure() {
    let d = load_dataset(fixture_dir()).unwrap();

    let hybrids = |year| {
        d.patents()
            .filter(|p| p.kind == Some(PatentKind::Hybrid) && p.filed_year == year)
            .count()
    };
    assert!(hybrids(2008) >= 3 * hybrids(2007));

    let controls: Vec<_> = find_control_varieties(d.field_tests(), 7)
        .unwrap()
        .into_iter()
        .map(|c| (c.region, c.variety))
        .collect();
    for want in [("North", "Whata 5656"), ("North", "4373"), ("West Central", "33P67")] {
        assert!(
            controls.iter().any(|(r, v)| r == want.0 && v == want.1),
            "{want:?} missing"
        );
    }

    let rows = analysis_table(&d, YearBasis::Grant).unwrap();
    let spec = ModelSpec::table(1, Family::Poisson).unwrap();
    let r = run_model(&spec, &rows, &Default::default(), &GlmOptions::default()).unwrap();
    assert!(r.coefficient("performance_ratio") > 0.0);
    assert!(r.p_value("performance_ratio") < 0.01);
}
