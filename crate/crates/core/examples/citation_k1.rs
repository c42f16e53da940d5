//! Three-year forward citations and the K1 rate for each patent kind.

use cornrate::citation::{domain_citation_stats, publication_years, YearBasis};
use cornrate::data::{load_dataset, PatentKind, PatentRecord};

fn main() -> cornrate::Result<()> {
    let d = load_dataset(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic"))?;
    let edges = d.internal_citations();
    let years = publication_years(d.patents(), YearBasis::Grant);
    for kind in [PatentKind::Hybrid, PatentKind::Inbred] {
        for until in [2005, 2013] {
            let domain: Vec<&PatentRecord> = d
                .patents()
                .filter(|p| p.kind == Some(kind) && p.filed_year <= until)
                .collect();
            let s = domain_citation_stats(&domain, &edges, &years)?;
            println!(
                "{:<7} filed <= {until}: {:>3} patents, mean year {:.1}, Cite3 {:.2}, K1 {:.4}",
                kind.as_str(),
                s.spc,
                s.ave_pub_year,
                s.cite3,
                s.k1()
            );
        }
    }
    Ok(())
}
