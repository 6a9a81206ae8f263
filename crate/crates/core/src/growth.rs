//! Log-log growth fits for realized type counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    /// Size of the parameter set.
    pub m: usize,
    /// Realized type count.
    pub count: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub points: Vec<GrowthPoint>,
    pub fitted_exponent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    /// `ln t - (intercept + exponent · ln m)` per input point, in input order.
    pub residuals: Vec<f64>,
}

impl GrowthSeries {
    pub fn push(&mut self, point: GrowthPoint) {
        self.points.push(point);
        self.fitted_exponent = None;
    }

    /// Fits and stores the exponent.
    pub fn fit(&mut self) -> Result<ExponentFit> {
        let fit = fit_codensity_exponent(self)?;
        self.fitted_exponent = Some(fit.exponent);
        Ok(fit)
    }
}

/// Unweighted least-squares slope of `ln t` against `ln m`.
pub fn fit_codensity_exponent(series: &GrowthSeries) -> Result<ExponentFit> {
    let mut distinct: Vec<usize> = series.points.iter().map(|p| p.m).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::domain(format!(
            "exponent fit needs at least 3 distinct sizes, got {}",
            distinct.len()
        )));
    }
    if let Some(p) = series.points.iter().find(|p| p.m < 2 || p.count < 1) {
        return Err(Error::domain(format!(
            "growth points need m >= 2 and t >= 1, got m = {}, t = {}",
            p.m, p.count
        )));
    }
    let xs: Vec<f64> = series.points.iter().map(|p| (p.m as f64).ln()).collect();
    let ys: Vec<f64> = series
        .points
        .iter()
        .map(|p| (p.count as f64).ln())
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residuals = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (intercept + exponent * x))
        .collect();
    Ok(ExponentFit {
        exponent,
        intercept,
        residuals,
    })
}

/// Median of a non-empty slice; the mean of the middle pair for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}
