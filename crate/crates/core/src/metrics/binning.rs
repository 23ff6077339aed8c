use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinPoint {
    pub center: f64,
    pub accuracy: f64,
    pub count: usize,
}

/// Index of the equal-width bin centred on a multiple of `width`.
pub(crate) fn bin_index(v: f64, width: f64) -> i64 {
    (v / width + 0.5).floor() as i64
}

/// Accuracy per equal-width bin of a feature. Bins are centred on
/// multiples of `bin_width`; bins with fewer than `min_count` records are
/// omitted. With `mean_center` the feature mean is subtracted first.
pub fn binned_accuracy(
    records: &[(f64, bool)],
    bin_width: f64,
    min_count: usize,
    mean_center: bool,
) -> Result<Vec<BinPoint>> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::invalid("bin width must be positive"));
    }
    if records.iter().any(|r| !r.0.is_finite()) {
        return Err(Error::invalid("non-finite feature value"));
    }
    let shift = if mean_center && !records.is_empty() {
        records.iter().map(|r| r.0).sum::<f64>() / records.len() as f64
    } else {
        0.0
    };
    let mut bins: std::collections::BTreeMap<i64, (usize, usize)> = Default::default();
    for &(v, correct) in records {
        let e = bins.entry(bin_index(v - shift, bin_width)).or_default();
        e.0 += 1;
        e.1 += usize::from(correct);
    }
    Ok(bins
        .into_iter()
        .filter(|(_, (n, _))| *n >= min_count && *n > 0)
        .map(|(i, (n, c))| BinPoint {
            center: i as f64 * bin_width,
            accuracy: c as f64 / n as f64,
            count: n,
        })
        .collect())
}
