use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Least-squares line through `(ln n, ln mse)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_grid: Vec<usize>,
    pub mse_values: Vec<f64>,
}

impl RateFitResult {
    pub fn predict(&self, n: f64) -> f64 {
        (self.intercept + self.slope * n.ln()).exp()
    }
}

pub fn rate_fit(n_grid: &[usize], mse: &[f64]) -> Result<RateFitResult, AnalysisError> {
    if n_grid.len() != mse.len() {
        return Err(AnalysisError::InvalidInput(format!(
            "{} grid points but {} MSE values",
            n_grid.len(),
            mse.len()
        )));
    }
    if n_grid.len() < 4 {
        return Err(AnalysisError::TooFewPoints(n_grid.len()));
    }
    if let Some((index, &value)) = mse.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(AnalysisError::NonPositiveMse { index, value });
    }
    if let Some(index) = n_grid.iter().position(|&n| n == 0) {
        return Err(AnalysisError::InvalidInput(format!("n_grid[{index}] is zero")));
    }
    let xs: Vec<f64> = n_grid.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = mse.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(AnalysisError::InvalidInput("n_grid has no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(RateFitResult {
        slope,
        intercept,
        r_squared,
        n_grid: n_grid.to_vec(),
        mse_values: mse.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_inverse() {
        let n = [10, 100, 1000, 10000];
        let mse: Vec<f64> = n.iter().map(|&v| 1.0 / v as f64).collect();
        let fit = rate_fit(&n, &mse).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.predict(50.0) - 0.02).abs() < 1e-14);
    }

    #[test]
    fn constant() {
        let fit = rate_fit(&[1, 2, 4, 8], &[0.3; 4]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn power_law_with_prefactor() {
        let n = [1 << 10, 1 << 12, 1 << 14, 1 << 16, 1 << 18];
        let mse: Vec<f64> = n.iter().map(|&v| 2.35 * (v as f64).powf(-0.5)).collect();
        let fit = rate_fit(&n, &mse).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 2.35f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(rate_fit(&[1, 2, 3], &[1.0; 3]), Err(AnalysisError::TooFewPoints(3))));
        assert!(matches!(
            rate_fit(&[1, 2, 3, 4], &[1.0, 0.0, 1.0, 1.0]),
            Err(AnalysisError::NonPositiveMse { index: 1, .. })
        ));
        assert!(matches!(
            rate_fit(&[1, 2, 3, 4], &[1.0, 1.0, -2.0, 1.0]),
            Err(AnalysisError::NonPositiveMse { index: 2, .. })
        ));
        assert!(rate_fit(&[1, 2, 3, 4], &[1.0; 3]).is_err());
    }

    #[test]
    fn noisy_fit_has_r_squared_below_one() {
        let n = [10, 100, 1000, 10000, 100000];
        let mse = [0.1, 0.012, 0.0009, 0.00011, 0.000009];
        let fit = rate_fit(&n, &mse).unwrap();
        assert!(fit.r_squared < 1.0 && fit.r_squared > 0.99);
        assert!((fit.slope + 1.0).abs() < 0.05);
    }
}
