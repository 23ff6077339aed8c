use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roc {
    pub auc: f64,
    /// (false positive rate, true positive rate) from (0,0) to (1,1).
    pub curve: Vec<(f64, f64)>,
}

/// ROC curve by sweeping a threshold over the distinct scores, highest
/// first. Tied scores move together, producing a diagonal segment.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<Roc> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("non-finite score"));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::invalid("ROC needs both classes"));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut curve = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let (x0, y0) = *curve.last().unwrap();
        let (x1, y1) = (fp as f64 / neg as f64, tp as f64 / pos as f64);
        auc += (x1 - x0) * (y0 + y1) / 2.0;
        curve.push((x1, y1));
    }
    Ok(Roc { auc, curve })
}

/// Mean ROC over several curves on a shared FPR grid with a normal-theory
/// 95% band (mean ± 1.96·sd/√n per grid point).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocBand {
    pub fpr: Vec<f64>,
    pub mean_tpr: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub n_curves: usize,
}

/// TPR of a curve at `x`. At a vertical jump the highest TPR reached at
/// that FPR is used.
pub(crate) fn interpolate(curve: &[(f64, f64)], x: f64) -> f64 {
    let mut best_at_x: Option<f64> = None;
    for &(fx, ty) in curve {
        if fx == x {
            best_at_x = Some(best_at_x.map_or(ty, |b: f64| b.max(ty)));
        }
    }
    if let Some(t) = best_at_x {
        return t;
    }
    for w in curve.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x0 < x && x < x1 {
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    if x < curve[0].0 {
        curve[0].1
    } else {
        curve.last().unwrap().1
    }
}

pub fn roc_band(curves: &[Vec<(f64, f64)>], grid_points: usize) -> Result<RocBand> {
    if curves.len() < 2 {
        return Err(Error::invalid("ROC band needs at least two curves"));
    }
    if curves.iter().any(Vec::is_empty) {
        return Err(Error::invalid("empty ROC curve"));
    }
    if grid_points < 2 {
        return Err(Error::invalid("ROC band grid needs at least two points"));
    }
    let n = curves.len() as f64;
    let fpr: Vec<f64> = (0..grid_points).map(|i| i as f64 / (grid_points - 1) as f64).collect();
    let mut mean_tpr = Vec::with_capacity(grid_points);
    let mut lower = Vec::with_capacity(grid_points);
    let mut upper = Vec::with_capacity(grid_points);
    for &x in &fpr {
        let ys: Vec<f64> = curves.iter().map(|c| interpolate(c, x)).collect();
        let mean = ys.iter().sum::<f64>() / n;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let half = 1.96 * var.sqrt() / n.sqrt();
        mean_tpr.push(mean);
        lower.push(mean - half);
        upper.push(mean + half);
    }
    Ok(RocBand {
        fpr,
        mean_tpr,
        lower,
        upper,
        n_curves: curves.len(),
    })
}
