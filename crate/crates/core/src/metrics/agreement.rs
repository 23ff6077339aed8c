use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub kappa: f64,
    /// Observed agreement.
    pub agreement: f64,
}

/// Cohen's kappa for two binary raters.
pub fn cohen_kappa(a: &[bool], b: &[bool]) -> Result<Kappa> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::invalid("kappa of empty rating lists"));
    }
    let n = a.len() as f64;
    let po = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let pa = a.iter().filter(|&&x| x).count() as f64 / n;
    let pb = b.iter().filter(|&&x| x).count() as f64 / n;
    let pe = pa * pb + (1.0 - pa) * (1.0 - pb);
    let kappa = if (1.0 - pe).abs() < f64::EPSILON {
        if po == 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (po - pe) / (1.0 - pe)
    };
    Ok(Kappa { kappa, agreement: po })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_lists() {
        let a = [true, false, false, true, false];
        let k = cohen_kappa(&a, &a).unwrap();
        assert_eq!(k.kappa, 1.0);
        assert_eq!(k.agreement, 1.0);
        let all = [true; 4];
        assert_eq!(cohen_kappa(&all, &all).unwrap().kappa, 1.0);
    }

    #[test]
    fn chance_level() {
        let k = cohen_kappa(&[true, true, false, false], &[true, false, true, false]).unwrap();
        assert_eq!(k.agreement, 0.5);
        assert_eq!(k.kappa, 0.0);
    }

    #[test]
    fn hand_computed() {
        // 10 items: both yes 4, both no 4, a-only 1, b-only 1
        let a = [true, true, true, true, false, false, false, false, true, false];
        let b = [true, true, true, true, false, false, false, false, false, true];
        let k = cohen_kappa(&a, &b).unwrap();
        // po = 0.8, pe = 0.5*0.5 + 0.5*0.5 = 0.5
        assert!((k.kappa - 0.6).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch() {
        assert!(cohen_kappa(&[true], &[true, false]).is_err());
        assert!(cohen_kappa(&[], &[]).is_err());
    }

    proptest! {
        #[test]
        fn kappa_bounded_by_agreement(pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..100)) {
            let a: Vec<bool> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<bool> = pairs.iter().map(|p| p.1).collect();
            let k = cohen_kappa(&a, &b).unwrap();
            prop_assert!(k.kappa <= k.agreement + 1e-12);
            let pa = a.iter().filter(|&&x| x).count();
            if (k.kappa - 1.0).abs() < 1e-12 && pa > 0 && pa < a.len() {
                prop_assert_eq!(&a, &b);
            }
        }
    }
}
