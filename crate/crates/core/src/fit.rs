//! Ordinary least squares on scatter data, used for log-log slope reports.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath;

#[derive(Debug, Clone)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope estimate.
    pub std_err: f64,
    /// Half-width of the reported confidence interval (2 standard errors).
    pub ci_half_width: f64,
    pub residuals: Vec<f64>,
}

/// Fits `y = intercept + slope * x` by ordinary least squares.
/// Requires at least three points so the residual variance is defined.
pub fn least_squares(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::Domain("all x values coincide"));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residuals: Vec<f64> = points
        .iter()
        .map(|&(x, y)| y - (intercept + slope * x))
        .collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let std_err = fmath::sqrt(sse / (n - 2.0) / sxx);
    Ok(FitResult {
        slope,
        intercept,
        std_err,
        ci_half_width: 2.0 * std_err,
        residuals,
    })
}
