//! Fits the exponential trend to the bundled USDA US corn yield series.
//!
//! `cargo run --example usda_trend [-- <from> <to>]`

use cornrate::trend::{fit_exponential, TrendSeries};

fn main() -> cornrate::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<i32>().expect("year"));
    let (from, to) = (args.next().unwrap_or(1930), args.next().unwrap_or(2015));
    let series = TrendSeries::usda_us_corn_yield().restrict(Some(from), Some(to));
    let fit = fit_exponential(&series)?;
    println!("USDA US corn yield {from}-{to}, {} years", fit.n);
    println!("  rate k      {:.4} per year", fit.k);
    println!("  R²          {:.3}", fit.r_squared.unwrap_or(f64::NAN));
    println!("  p-value     {:.2e}", fit.p_value.unwrap_or(f64::NAN));
    println!("  fitted {to}  {:.1} bu/acre", fit.predict(to));
    Ok(())
}
