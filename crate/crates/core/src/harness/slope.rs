//! Log-log slope fitting for cumulative regret curves.

use crate::error::{Error, Result};

/// Ordinary least-squares slope of `log(series)` on `log(t)` over the
/// iteration window `[t0, t1]` (1-based, inclusive). `series[k]` holds the
/// value at iteration `k + 1`. When any value in the window is nonpositive,
/// the whole window is shifted by +1 so logarithms exist.
pub fn fit_regret_slope(series: &[f64], window: (usize, usize)) -> Result<f64> {
    let (t0, t1) = window;
    if t0 < 1 || t1 < t0 || t1 > series.len() {
        return Err(Error::ParameterOutOfRange(format!(
            "window [{t0}, {t1}] outside series of length {}",
            series.len()
        )));
    }
    let values = &series[t0 - 1..t1];
    let shift = if values.iter().any(|v| *v <= 0.0) {
        1.0
    } else {
        0.0
    };
    let points: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .map(|(offset, v)| (((t0 + offset) as f64).ln(), (v + shift).ln()))
        .collect();
    let count = points.len() as f64;
    let mean_x: f64 = points.iter().map(|(x, _)| x).sum::<f64>() / count;
    let mean_y: f64 = points.iter().map(|(_, y)| y).sum::<f64>() / count;
    let sxx: f64 = points.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    if sxx <= 0.0 {
        return Err(Error::ParameterOutOfRange(
            "window too narrow to fit a slope".to_string(),
        ));
    }
    let sxy: f64 = points
        .iter()
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    Ok(sxy / sxx)
}
