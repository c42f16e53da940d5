//! Small numeric helpers shared by the trend, network and regression code.
//!
//! All sums run in slice order so results are bit-identical across runs.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// Simple linear regression of `ys` on `xs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    /// Intercept at `x = x_mean`.
    pub y_mean: f64,
    pub x_mean: f64,
    pub sxx: f64,
    pub ssr: f64,
    pub sst: f64,
    pub n: usize,
}

impl LineFit {
    pub fn value_at(&self, x: f64) -> f64 {
        self.y_mean + self.slope * (x - self.x_mean)
    }

    /// Coefficient of determination; 0 for a flat response.
    pub fn r_squared(&self) -> f64 {
        if self.sst == 0.0 {
            0.0
        } else {
            (1.0 - self.ssr / self.sst).clamp(0.0, 1.0)
        }
    }

    /// Standard error of the slope (needs n >= 3).
    pub fn slope_std_error(&self) -> Option<f64> {
        (self.n >= 3).then(|| (self.ssr / (self.n - 2) as f64 / self.sxx).sqrt())
    }

    /// Two-sided t-test of slope = 0 with n - 2 degrees of freedom.
    pub fn slope_p_value(&self) -> Option<f64> {
        let se = self.slope_std_error()?;
        Some(t_test_p_value(self.slope, se, (self.n - 2) as f64))
    }
}

/// Least-squares line through `(xs, ys)`, computed on centered data.
///
/// Returns `None` with fewer than two points or zero spread in `xs`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let x_mean = xs.iter().sum::<f64>() / n as f64;
    let y_mean = ys.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut sst = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - x_mean;
        let dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        sst += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let ssr = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - y_mean - slope * (x - x_mean);
            r * r
        })
        .sum();
    Some(LineFit {
        slope,
        y_mean,
        x_mean,
        sxx,
        ssr,
        sst,
        n,
    })
}

/// Two-sided p-value for `estimate / std_error` under Student's t.
///
/// A zero standard error gives 1 for a zero estimate and 0 otherwise.
pub fn t_test_p_value(estimate: f64, std_error: f64, df: f64) -> f64 {
    if std_error == 0.0 || !std_error.is_finite() {
        return if estimate == 0.0 { 1.0 } else { 0.0 };
    }
    let t = (estimate / std_error).abs();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.sf(t)).clamp(0.0, 1.0)
}

/// Two-sided Wald p-value under the standard normal.
pub fn z_test_p_value(estimate: f64, std_error: f64) -> f64 {
    if std_error == 0.0 || !std_error.is_finite() {
        return if estimate == 0.0 { 1.0 } else { 0.0 };
    }
    let z = (estimate / std_error).abs();
    let dist = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * dist.sf(z)).clamp(0.0, 1.0)
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub fn sample_std(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    if xs.len() < 2 {
        return Some(0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + 2.0 * x).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert_eq!(f.slope, 2.0);
        assert_eq!(f.value_at(0.0), 1.0);
        assert_eq!(f.r_squared(), 1.0);
        assert_eq!(f.slope_p_value(), Some(0.0));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0], &[1.0]).is_none());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_none());
        let flat = fit_line(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).unwrap();
        assert_eq!((flat.slope, flat.r_squared()), (0.0, 0.0));
        assert_eq!(flat.slope_p_value(), Some(1.0));
    }

    #[test]
    fn p_values_match_tables() {
        // t = 2.228 at 10 df is the 97.5% quantile.
        assert!((t_test_p_value(2.228, 1.0, 10.0) - 0.05).abs() < 1e-3);
        assert!((z_test_p_value(1.959964, 1.0) - 0.05).abs() < 1e-6);
    }

    #[test]
    fn spread() {
        assert_eq!(sample_std(&[3.0]), Some(0.0));
        assert!((sample_std(&[1.0, 2.0, 3.0, 4.0]).unwrap() - 1.2909944487358056).abs() < 1e-15);
        assert_eq!(mean(&[]), None);
    }
}
