use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    /// Lower edge in percent; the bin is `[lo, lo + 10)`, the last one closed at 100.
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub mean_confidence_pct: f64,
    pub empirical_accuracy_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    /// Non-empty decile bins in ascending order.
    pub bins: Vec<CalibrationBin>,
    pub calibration_error_pct: f64,
}

fn decile(conf: f64) -> usize {
    ((conf / 10.0).floor() as usize).min(9)
}

/// Unweighted mean over non-empty confidence deciles of
/// |mean confidence − empirical accuracy|, in percentage points.
pub fn calibration_error(records: &[(f64, bool)]) -> Result<CalibrationReport> {
    if records.is_empty() {
        return Err(Error::invalid("calibration needs at least one record"));
    }
    let mut sums = [(0usize, 0.0f64, 0usize); 10];
    for &(conf, correct) in records {
        if !(0.0..=100.0).contains(&conf) {
            return Err(Error::invalid(format!("confidence {conf} outside [0, 100]")));
        }
        let b = &mut sums[decile(conf)];
        b.0 += 1;
        b.1 += conf;
        b.2 += usize::from(correct);
    }
    let bins: Vec<CalibrationBin> = sums
        .iter()
        .enumerate()
        .filter(|(_, s)| s.0 > 0)
        .map(|(i, &(n, conf_sum, correct))| CalibrationBin {
            lo: i as f64 * 10.0,
            hi: (i + 1) as f64 * 10.0,
            count: n,
            mean_confidence_pct: conf_sum / n as f64,
            empirical_accuracy_pct: 100.0 * correct as f64 / n as f64,
        })
        .collect();
    let err = bins
        .iter()
        .map(|b| (b.mean_confidence_pct - b.empirical_accuracy_pct).abs())
        .sum::<f64>()
        / bins.len() as f64;
    Ok(CalibrationReport {
        bins,
        calibration_error_pct: err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfectly_confident_and_right() {
        let r = calibration_error(&[(100.0, true); 5]).unwrap();
        assert_eq!(r.calibration_error_pct, 0.0);
        assert_eq!(r.bins.len(), 1);
        assert_eq!(r.bins[0].lo, 90.0);
    }

    #[test]
    fn single_top_bin_hand_value() {
        let r = calibration_error(&[(90.0, false), (95.0, false), (100.0, true)]).unwrap();
        assert_eq!(r.bins.len(), 1);
        assert!((r.calibration_error_pct - (95.0 - 100.0 / 3.0)).abs() < 1e-9);
        assert!((r.calibration_error_pct - 61.67).abs() < 0.005);
    }

    #[test]
    fn bins_are_unweighted() {
        // bin [0,10): conf 5, accuracy 0 -> 5; bin [50,60): 3 records at 50, all right -> 50
        let r = calibration_error(&[(5.0, false), (50.0, true), (50.0, true), (50.0, true)]).unwrap();
        assert_eq!(r.bins.len(), 2);
        assert!((r.calibration_error_pct - 27.5).abs() < 1e-12);
    }

    #[test]
    fn edges() {
        let r = calibration_error(&[(10.0, true), (9.999, true)]).unwrap();
        assert_eq!(r.bins.len(), 2);
        assert!(calibration_error(&[]).is_err());
        assert!(calibration_error(&[(101.0, true)]).is_err());
    }

    proptest! {
        #[test]
        fn order_invariant(mut recs in proptest::collection::vec((0.0f64..=100.0, any::<bool>()), 1..60), seed in any::<u64>()) {
            let a = calibration_error(&recs).unwrap().calibration_error_pct;
            use rand::seq::SliceRandom;
            let mut rng = crate::seed::seeded_rng(seed);
            recs.shuffle(&mut rng);
            let b = calibration_error(&recs).unwrap().calibration_error_pct;
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!((0.0..=100.0).contains(&a));
        }
    }
}
