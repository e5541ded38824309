//! Small aggregation helpers: linear-interpolation quantiles and the
//! box-and-whisker summary used by the horizon study.

use serde::{Deserialize, Serialize};

/// Rounds to two decimals (the precision reported in all tables).
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Quantile by linear interpolation between order statistics:
/// h = (n - 1) p, value = x[floor(h)] + frac(h) (x[floor(h)+1] - x[floor(h)]).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

/// Five-number summary with whiskers at Q1 - 1.5 IQR and Q3 + 1.5 IQR
/// clipped to the data range; values beyond the whiskers are listed as
/// outliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub count: usize,
    pub data_min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub data_max: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

pub fn box_stats(values: &[f64]) -> BoxStats {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN gaps"));
    let q1 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let low_fence = q1 - 1.5 * iqr;
    let high_fence = q3 + 1.5 * iqr;
    let data_min = sorted[0];
    let data_max = *sorted.last().unwrap();
    let whisker_low = low_fence.max(data_min);
    let whisker_high = high_fence.min(data_max);
    let outliers = sorted
        .iter()
        .copied()
        .filter(|&v| v < low_fence || v > high_fence)
        .collect();
    BoxStats {
        count: sorted.len(),
        data_min,
        q1,
        median,
        q3,
        data_max,
        whisker_low,
        whisker_high,
        outliers,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_of_zero_to_four() {
        let data = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&data, 0.25), 1.0);
        assert_eq!(quantile(&data, 0.5), 2.0);
        assert_eq!(quantile(&data, 0.75), 3.0);
    }

    #[test]
    fn quantiles_interpolate_between_order_statistics() {
        let data = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&data, 0.25), 1.75);
        assert_eq!(quantile(&data, 0.5), 2.5);
    }

    #[test]
    fn whiskers_clip_to_data_and_outliers_split_off() {
        let mut values = vec![10.0, 11.0, 12.0, 13.0, 14.0];
        values.push(100.0); // far outlier
        let s = box_stats(&values);
        assert_eq!(s.data_max, 100.0);
        assert!(s.whisker_high < 100.0);
        assert_eq!(s.outliers, vec![100.0]);
        assert_eq!(s.whisker_low, 10.0);
    }

    #[test]
    fn round2_behaves() {
        assert_eq!(round2(12.504), 12.5);
        assert_eq!(round2(12.346), 12.35);
        assert_eq!(round2(0.0), 0.0);
    }
}
