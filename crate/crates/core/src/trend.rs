//! Exponential improvement-rate fitting, `q_t = q0 * exp(k * (t - t0))`,
//! by least squares on `ln q_t`, plus the control-variety construction that
//! cancels shared weather effects before fitting.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::data::FieldTestRecord;
use crate::error::{Error, Result};
use crate::stats;

pub const USDA_US_CORN_YIELD_CSV: &str = include_str!("../data/usda_us_corn_yield.csv");

/// Yearly observations with strictly increasing years and positive values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendSeries {
    points: Vec<(i32, f64)>,
}

impl TrendSeries {
    pub fn new(points: Vec<(i32, f64)>) -> Result<Self> {
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidInput(format!(
                    "series years must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(year, v)) = points.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput(format!("nonpositive value {v} in {year}")));
        }
        Ok(TrendSeries { points })
    }

    pub fn points(&self) -> &[(i32, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points with `from <= year <= to`.
    pub fn restrict(&self, from: Option<i32>, to: Option<i32>) -> TrendSeries {
        TrendSeries {
            points: self
                .points
                .iter()
                .copied()
                .filter(|(y, _)| from.is_none_or(|f| *y >= f) && to.is_none_or(|t| *y <= t))
                .collect(),
        }
    }

    /// Reads a two-column `year,value` CSV (header required).
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        Self::from_reader(reader, path)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        Self::from_reader(csv::Reader::from_reader(text.as_bytes()), Path::new("<memory>"))
    }

    fn from_reader<R: std::io::Read>(mut reader: csv::Reader<R>, path: &Path) -> Result<Self> {
        let mut points = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            let year = rec.get(0).unwrap_or("").trim();
            let year = year.parse::<i32>().map_err(|_| {
                Error::InvalidInput(format!("{}: row {}: unparsable year `{year}`", path.display(), i + 1))
            })?;
            let value = crate::data::parse_decimal(rec.get(1).unwrap_or(""))
                .map_err(|m| Error::InvalidInput(format!("{}: row {}: {m}", path.display(), i + 1)))?;
            points.push((year, value));
        }
        Self::new(points)
    }

    /// National average corn yield (bushels per acre) as bundled with the crate.
    pub fn usda_us_corn_yield() -> Self {
        Self::from_csv_str(USDA_US_CORN_YIELD_CSV).expect("bundled USDA series is valid")
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("year,value\n");
        for (y, v) in &self.points {
            out.push_str(&format!("{y},{v}\n"));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

/// Output of [`fit_exponential`]. Inference fields need at least 3 points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// Yearly improvement rate.
    pub k: f64,
    /// Fitted value at `t0`.
    pub q0: f64,
    /// Reference year: the first year of the series.
    pub t0: i32,
    pub r_squared: Option<f64>,
    pub p_value: Option<f64>,
    pub k_std_error: Option<f64>,
    /// Residual standard deviation of `ln q`.
    pub residual_std: Option<f64>,
    pub n: usize,
}

impl FitResult {
    pub fn predict(&self, year: i32) -> f64 {
        self.q0 * (self.k * f64::from(year - self.t0)).exp()
    }
}

pub fn fit_exponential(s: &TrendSeries) -> Result<FitResult> {
    let n = s.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "exponential fit needs at least 2 points, got {n}"
        )));
    }
    let t0 = s.points[0].0;
    // Offsets from t0 are exact integers, so shifting all years leaves
    // the regression inputs bit-identical.
    let xs: Vec<f64> = s.points.iter().map(|(y, _)| f64::from(y - t0)).collect();
    let ys: Vec<f64> = s.points.iter().map(|(_, v)| v.ln()).collect();

    if n == 2 {
        let k = (ys[1] - ys[0]) / xs[1];
        return Ok(FitResult {
            k,
            q0: s.points[0].1,
            t0,
            r_squared: None,
            p_value: None,
            k_std_error: None,
            residual_std: None,
            n,
        });
    }

    let line = stats::fit_line(&xs, &ys).expect("distinct years");
    Ok(FitResult {
        k: line.slope,
        q0: line.value_at(0.0).exp(),
        t0,
        r_squared: Some(line.r_squared()),
        p_value: line.slope_p_value(),
        k_std_error: line.slope_std_error(),
        residual_std: Some((line.ssr / (n - 2) as f64).sqrt()),
        n,
    })
}

/// A variety tested in consecutive years within one region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ControlCandidate {
    pub region: String,
    pub variety: String,
    pub first_year: i32,
    pub last_year: i32,
    pub years: usize,
}

/// Every (region, variety) whose longest run of consecutive test years is at
/// least `min_years`, sorted by region then variety.
pub fn find_control_varieties(tests: &[FieldTestRecord], min_years: usize) -> Result<Vec<ControlCandidate>> {
    if min_years < 2 {
        return Err(Error::InvalidInput(format!(
            "min_years must be at least 2, got {min_years}"
        )));
    }
    let mut seen: BTreeMap<(&str, &str), BTreeSet<i32>> = BTreeMap::new();
    for t in tests {
        seen.entry((t.region.as_str(), t.hybrid.as_str()))
            .or_default()
            .insert(t.year);
    }
    let mut out = Vec::new();
    for ((region, variety), years) in seen {
        let mut best: Option<(i32, i32)> = None;
        let mut run: Option<(i32, i32)> = None;
        for y in years {
            run = match run {
                Some((start, end)) if y == end + 1 => Some((start, y)),
                _ => Some((y, y)),
            };
            let (s, e) = run.unwrap();
            if best.is_none_or(|(bs, be)| e - s > be - bs) {
                best = Some((s, e));
            }
        }
        if let Some((first_year, last_year)) = best {
            let len = (last_year - first_year + 1) as usize;
            if len >= min_years {
                out.push(ControlCandidate {
                    region: region.to_string(),
                    variety: variety.to_string(),
                    first_year,
                    last_year,
                    years: len,
                });
            }
        }
    }
    Ok(out)
}

/// Best yield in `region` divided by the control's yield, for each year the
/// control was tested there. Any factor shared by all varieties in a given
/// year cancels in the ratio.
pub fn weather_corrected_series(tests: &[FieldTestRecord], region: &str, control: &str) -> Result<TrendSeries> {
    let mut best: BTreeMap<i32, f64> = BTreeMap::new();
    let mut ctrl: BTreeMap<i32, (f64, usize)> = BTreeMap::new();
    for t in tests.iter().filter(|t| t.region == region) {
        let b = best.entry(t.year).or_insert(f64::NEG_INFINITY);
        *b = b.max(t.yield_bu);
        if t.hybrid == control {
            let c = ctrl.entry(t.year).or_default();
            c.0 += t.yield_bu;
            c.1 += 1;
        }
    }
    if ctrl.is_empty() {
        return Err(Error::ControlAbsent {
            region: region.to_string(),
            control: control.to_string(),
        });
    }
    let points = ctrl
        .into_iter()
        .map(|(year, (sum, n))| (year, best[&year] / (sum / n as f64)))
        .collect();
    TrendSeries::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(points: &[(i32, f64)]) -> TrendSeries {
        TrendSeries::new(points.to_vec()).unwrap()
    }

    fn row(year: i32, region: &str, hybrid: &str, y: f64) -> FieldTestRecord {
        FieldTestRecord {
            state: "IL".into(),
            year,
            region: region.into(),
            brand: "B".into(),
            hybrid: hybrid.into(),
            yield_bu: y,
            moisture: 18.0,
            maturity: None,
            stand: None,
            significant: false,
        }
    }

    #[test]
    fn series_invariants() {
        assert!(TrendSeries::new(vec![(2000, 1.0), (2000, 2.0)]).is_err());
        assert!(TrendSeries::new(vec![(2001, 1.0), (2000, 2.0)]).is_err());
        assert!(TrendSeries::new(vec![(2000, 0.0)]).is_err());
        let s = series(&[(1990, 1.0), (2000, 2.0), (2010, 3.0)]);
        assert_eq!(s.restrict(Some(1995), Some(2010)).points(), &[(2000, 2.0), (2010, 3.0)]);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = series(&[(1930, 20.5), (1931, 0.1 + 0.2)]);
        let p = dir.path().join("s.csv");
        s.write_csv(&p).unwrap();
        assert_eq!(TrendSeries::read_csv(&p).unwrap(), s);
    }

    #[test]
    fn exact_exponential() {
        let pts: Vec<_> = (2000..2003)
            .map(|y| (y, 100.0 * (0.02 * f64::from(y - 2000)).exp()))
            .collect();
        let fit = fit_exponential(&series(&pts)).unwrap();
        assert!((fit.k - 0.02).abs() < 1e-12);
        assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-12);
        assert!((fit.q0 - 100.0).abs() < 1e-9);
        assert_eq!(fit.t0, 2000);
    }

    #[test]
    fn flat_series() {
        let fit = fit_exponential(&series(&[(1, 7.0), (2, 7.0), (3, 7.0), (4, 7.0), (5, 7.0)])).unwrap();
        assert_eq!(fit.k, 0.0);
        assert_eq!(fit.r_squared, Some(0.0));
        assert_eq!(fit.p_value, Some(1.0));
    }

    #[test]
    fn two_points_and_too_few() {
        let fit = fit_exponential(&series(&[(2000, 100.0), (2004, 200.0)])).unwrap();
        assert!((fit.k - 2f64.ln() / 4.0).abs() < 1e-15);
        assert!(fit.r_squared.is_none() && fit.p_value.is_none());
        assert!(matches!(
            fit_exponential(&series(&[(2000, 1.0)])),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn control_discovery() {
        let mut tests = Vec::new();
        for y in 2002..2009 {
            tests.push(row(y, "North", "Whata 5656", 150.0));
        }
        tests.push(row(2000, "North", "gap", 1.0));
        tests.push(row(2002, "North", "gap", 1.0));
        tests.push(row(2005, "North", "once", 1.0));
        tests.push(row(2003, "South", "Whata 5656", 1.0));
        let found = find_control_varieties(&tests, 2).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].variety, "Whata 5656");
        assert_eq!(
            (found[0].first_year, found[0].last_year, found[0].years),
            (2002, 2008, 7)
        );
        assert!(find_control_varieties(&tests, 8).unwrap().is_empty());
        assert!(find_control_varieties(&tests, 1).is_err());
    }

    #[test]
    fn longest_run_is_reported() {
        let tests: Vec<_> = [2000, 2001, 2005, 2006, 2007, 2010]
            .iter()
            .map(|&y| row(y, "R", "v", 1.0))
            .collect();
        let found = find_control_varieties(&tests, 2).unwrap();
        assert_eq!((found[0].first_year, found[0].last_year), (2005, 2007));
    }

    #[test]
    fn weather_cancels() {
        let weather = [1.0, 0.7, 1.3, 0.9, 1.1, 0.6, 1.25];
        let mut tests = Vec::new();
        for (i, w) in weather.iter().enumerate() {
            let y = 2000 + i as i32;
            let t = f64::from(i as i32);
            tests.push(row(y, "N", "best", 180.0 * (0.02 * t).exp() * w));
            tests.push(row(y, "N", "ctrl", 150.0 * w));
            tests.push(row(y, "N", "filler", 120.0 * w));
            tests.push(row(y, "S", "elsewhere", 999.0));
        }
        let s = weather_corrected_series(&tests, "N", "ctrl").unwrap();
        assert_eq!(s.len(), weather.len());
        assert!((fit_exponential(&s).unwrap().k - 0.02).abs() < 1e-12);

        let own = weather_corrected_series(&tests, "N", "best").unwrap();
        assert!(own.points().iter().all(|(_, v)| *v == 1.0));
        assert_eq!(fit_exponential(&own).unwrap().k, 0.0);

        assert!(matches!(
            weather_corrected_series(&tests, "S", "ctrl"),
            Err(Error::ControlAbsent { .. })
        ));
    }

    fn noisy_series() -> impl Strategy<Value = Vec<(i32, f64)>> {
        (1900i32..2000, proptest::collection::vec(1.0f64..500.0, 3..20)).prop_map(|(start, vals)| {
            vals.into_iter()
                .enumerate()
                .map(|(i, v)| (start + i as i32, v))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn shift_invariant(pts in noisy_series(), delta in -500i32..500) {
            let a = fit_exponential(&series(&pts)).unwrap();
            let shifted: Vec<_> = pts.iter().map(|&(y, v)| (y + delta, v)).collect();
            let b = fit_exponential(&series(&shifted)).unwrap();
            prop_assert_eq!(a.k, b.k);
            prop_assert_eq!(a.r_squared, b.r_squared);
            prop_assert_eq!(a.p_value, b.p_value);
            prop_assert_eq!(b.t0, a.t0 + delta);
        }

        #[test]
        fn scale_equivariant(pts in noisy_series(), s in 0.01f64..100.0) {
            let a = fit_exponential(&series(&pts)).unwrap();
            let scaled: Vec<_> = pts.iter().map(|&(y, v)| (y, v * s)).collect();
            let b = fit_exponential(&series(&scaled)).unwrap();
            prop_assert!((a.k - b.k).abs() < 1e-10);
            prop_assert!((a.r_squared.unwrap() - b.r_squared.unwrap()).abs() < 1e-9);
            prop_assert!((a.p_value.unwrap() - b.p_value.unwrap()).abs() < 1e-7);
            prop_assert!((b.q0 / (a.q0 * s) - 1.0).abs() < 1e-9);
        }

        #[test]
        fn weather_factor_invariance(factors in proptest::collection::vec(0.3f64..3.0, 5)) {
            let mut base = Vec::new();
            let mut perturbed = Vec::new();
            for (i, f) in factors.iter().enumerate() {
                let y = 2000 + i as i32;
                for (name, v) in [("a", 150.0 + 3.0 * i as f64), ("ctrl", 140.0), ("b", 145.0 - i as f64)] {
                    base.push(row(y, "R", name, v));
                    perturbed.push(row(y, "R", name, v * f));
                }
            }
            let s0 = weather_corrected_series(&base, "R", "ctrl").unwrap();
            let s1 = weather_corrected_series(&perturbed, "R", "ctrl").unwrap();
            for (p, q) in s0.points().iter().zip(s1.points()) {
                prop_assert!((p.1 - q.1).abs() < 1e-12);
            }
        }
    }
}
