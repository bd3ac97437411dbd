//! Log-log least-squares slope fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// residual sum of squares in log space
    pub rss: f64,
    /// 95% confidence band for the slope; infinite for a perfect fit with
    /// fewer than three points
    pub band: [f64; 2],
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_order(xs: &[f64], ys: &[f64]) -> Result<Fit> {
    if xs.len() != ys.len() {
        return Err(Error::domain("fit needs equally many x and y values"));
    }
    if xs.len() < 3 {
        return Err(Error::domain(format!("fit needs at least 3 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::domain("fit needs strictly positive finite values"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("fit needs at least two distinct x values"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let dof = n - 2.0;
    let se = (rss / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Numerical(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(Fit { slope, intercept, rss, band: [slope - t * se, slope + t * se] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let xs = [1.0, 0.5, 0.25, 0.125];
        let f = fit_order(&xs, &xs).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-14);
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let f = fit_order(&xs, &sq).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!(f.rss < 1e-25);
        assert!((f.band[1] - f.band[0]).abs() < 1e-10);
    }

    #[test]
    fn hand_computed_slope() {
        let f = fit_order(&[1.0, 0.5, 0.25], &[1e-2, 2.5e-3, 6.3e-4]).unwrap();
        assert!((f.slope - 1.99).abs() < 0.01, "{}", f.slope);
        assert!(f.band[0] < f.slope && f.slope < f.band[1]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_order(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_order(&[1.0, 2.0, 3.0], &[1.0, 0.0, 3.0]).is_err());
        assert!(fit_order(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
