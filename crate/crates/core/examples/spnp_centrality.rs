//! Search-path node-pair counts and the K2 pipeline on a toy network, then on
//! the synthetic citation network.

use cornrate::data::{load_dataset, PatentKind};
use cornrate::network::{analyze_domain, compute_spnp, CitationNetwork, SpnpMode};

fn main() -> cornrate::Result<()> {
    let nodes = [("A", 1990), ("B", 1992), ("C", 1992), ("D", 1995)];
    let edges = [("D", "B"), ("D", "C"), ("B", "A"), ("C", "A")];
    let net = CitationNetwork::new(
        nodes.iter().map(|(id, y)| (id.to_string(), *y)).collect(),
        edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
    )?;
    for (id, v) in compute_spnp(&net) {
        println!("SPNP({id}) = {v}");
    }

    let d = load_dataset(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic"))?;
    let (net, external) = CitationNetwork::from_dataset(&d)?;
    let domain: Vec<String> = d
        .patents()
        .filter(|p| p.kind == Some(PatentKind::Hybrid))
        .map(|p| p.patent_number.clone())
        .collect();
    for mode in [SpnpMode::Exact, SpnpMode::LogApprox] {
        let r = analyze_domain(&net, &domain, 0.9, mode)?;
        println!(
            "{mode:?}: {} nodes, {} edges ({external} external), centrality {:.4}, Z {:.4}, {} highly cited, K2 {:.4}",
            net.len(),
            net.edge_count(),
            r.centrality.centrality,
            r.growth.z,
            r.growth.n_highly_cited,
            r.k2
        );
    }
    Ok(())
}
