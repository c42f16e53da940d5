//! Control discovery and weather-corrected trends on the synthetic field tests.

use cornrate::data::load_dataset;
use cornrate::trend::{find_control_varieties, fit_exponential, weather_corrected_series};

fn main() -> cornrate::Result<()> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic");
    let d = load_dataset(dir)?;
    for c in find_control_varieties(d.field_tests(), 7)? {
        let series = weather_corrected_series(d.field_tests(), &c.region, &c.variety)?;
        let fit = fit_exponential(&series)?;
        println!(
            "{:<13} {:<11} {}-{}  k = {:.4}  R² = {:.2}",
            c.region,
            c.variety,
            c.first_year,
            c.last_year,
            fit.k,
            fit.r_squared.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
