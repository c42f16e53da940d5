//! Variety extraction and patent-kind classification from titles.

use cornrate::title::{classify_patent_kind, extract_variety_name, PrefixTable, DEFAULT_PREFIX_TABLE};

fn main() -> cornrate::Result<()> {
    let table = PrefixTable::from_csv_str(DEFAULT_PREFIX_TABLE)?;
    let titles = [
        "Inbred corn line NP2073",
        "Imbred corn line PH24E",
        "Hybrid maize variety X13088",
        "Hybrid corn plant and seed 3563",
        "Method of making popcorn",
        "Maize lineage tracing",
    ];
    for title in titles {
        let (variety, matched) = extract_variety_name(title, &table);
        let flag = if matched { "" } else { "  (needs review)" };
        println!("{:<34} {:<8?} {variety}{flag}", title, classify_patent_kind(title));
    }
    Ok(())
}
