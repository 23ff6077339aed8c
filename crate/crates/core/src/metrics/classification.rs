use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary confusion counts. Class 1 is "correct", class 0 "incorrect".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tp: u64,
}

impl ConfusionMatrix {
    pub fn new(tn: u64, fp: u64, fn_: u64, tp: u64) -> Self {
        ConfusionMatrix { tn, fp, fn_, tp }
    }

    pub fn total(&self) -> u64 {
        self.tn + self.fp + self.fn_ + self.tp
    }

    pub fn accuracy(&self) -> f64 {
        (self.tn + self.tp) as f64 / self.total() as f64
    }

    /// Swaps the meaning of the two classes on both axes.
    pub fn swap_classes(&self) -> Self {
        ConfusionMatrix::new(self.tp, self.fn_, self.fp, self.tn)
    }

    /// Inverts every prediction.
    pub fn flip_predictions(&self) -> Self {
        ConfusionMatrix::new(self.fp, self.tn, self.tp, self.fn_)
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: Self) -> Self {
        ConfusionMatrix::new(self.tn + o.tn, self.fp + o.fp, self.fn_ + o.fn_, self.tp + o.tp)
    }
}

pub fn confusion(preds: &[bool], labels: &[bool]) -> Result<ConfusionMatrix> {
    if preds.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: preds.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::invalid("confusion matrix of zero predictions"));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &y) in preds.iter().zip(labels) {
        match (y, p) {
            (false, false) => cm.tn += 1,
            (false, true) => cm.fp += 1,
            (true, false) => cm.fn_ += 1,
            (true, true) => cm.tp += 1,
        }
    }
    Ok(cm)
}

/// Matthews correlation coefficient; 0 when any marginal is empty.
pub fn mcc(cm: &ConfusionMatrix) -> f64 {
    let (tn, fp, fn_, tp) = (cm.tn as f64, cm.fp as f64, cm.fn_ as f64, cm.tp as f64);
    let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if denom == 0.0 {
        return 0.0;
    }
    (tp * tn - fp * fn_) / denom.sqrt()
}

pub fn accuracy(preds: &[bool], labels: &[bool]) -> Result<f64> {
    Ok(confusion(preds, labels)?.accuracy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_cases() {
        let cm = confusion(&[true, false, true], &[true, false, true]).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(1, 0, 0, 2));
        assert_eq!(mcc(&cm), 1.0);
        let cm = confusion(&[true; 4], &[true, false, true, false]).unwrap();
        assert_eq!(cm.fp, 2);
        assert_eq!(mcc(&cm), 0.0);
        assert!(confusion(&[true], &[true, false]).is_err());
        assert!(confusion(&[], &[]).is_err());
    }

    #[test]
    fn published_matrices() {
        let cases = [
            ((40, 30, 24, 46), 0.229),
            ((241, 276, 123, 394), 0.239),
            ((355, 162, 172, 345), 0.354),
            ((57, 13, 40, 30), 0.263),
            ((46, 24, 31, 39), 0.215),
            ((317, 200, 160, 357), 0.305),
            ((1, 69, 0, 70), 0.085),
            ((35, 482, 20, 497), 0.065),
        ];
        for ((tn, fp, fn_, tp), want) in cases {
            let got = mcc(&ConfusionMatrix::new(tn, fp, fn_, tp));
            assert_eq!(format!("{got:.3}"), format!("{want:.3}"), "{tn} {fp} {fn_} {tp}");
        }
    }

    proptest! {
        #[test]
        fn matches_pairwise_count(pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..200)) {
            let preds: Vec<bool> = pairs.iter().map(|p| p.0).collect();
            let labels: Vec<bool> = pairs.iter().map(|p| p.1).collect();
            let cm = confusion(&preds, &labels).unwrap();
            let count = |p: bool, y: bool| pairs.iter().filter(|&&(a, b)| a == p && b == y).count() as u64;
            prop_assert_eq!(cm, ConfusionMatrix::new(count(false, false), count(true, false), count(false, true), count(true, true)));
        }

        #[test]
        fn mcc_symmetries(tn in 0u64..500, fp in 0u64..500, fn_ in 0u64..500, tp in 0u64..500) {
            prop_assume!(tn + fp + fn_ + tp > 0);
            let cm = ConfusionMatrix::new(tn, fp, fn_, tp);
            let m = mcc(&cm);
            prop_assert!((-1.0..=1.0).contains(&m));
            prop_assert!((mcc(&cm.swap_classes()) - m).abs() < 1e-12);
            prop_assert!((mcc(&cm.flip_predictions()) + m).abs() < 1e-12);
        }
    }
}
