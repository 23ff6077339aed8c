//! Evaluation mathematics.

mod agreement;
mod binning;
mod calibration;
mod classification;
mod correlation;
mod roc;
mod split;

pub use agreement::{cohen_kappa, Kappa};
pub use binning::{binned_accuracy, BinPoint};
pub use calibration::{calibration_error, CalibrationBin, CalibrationReport};
pub use classification::{accuracy, confusion, mcc, ConfusionMatrix};
pub use correlation::{length_slope, length_slope_binned, pointbiserial, Correlation, LengthSlope};
pub use roc::{roc_auc, roc_band, Roc, RocBand};
pub use split::{balanced_sample, split_train_balanced_test, SplitPlan};
