use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::seeded_rng;

/// Imbalanced training positions plus a class-balanced test set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

impl SplitPlan {
    pub fn ids<'a>(&self, ids: &'a [String]) -> (Vec<&'a str>, Vec<&'a str>) {
        (
            self.train.iter().map(|&i| ids[i].as_str()).collect(),
            self.test.iter().map(|&i| ids[i].as_str()).collect(),
        )
    }
}

/// Seeded stratified split: `⌊ratio·N⌋` positions go to training with the
/// class mix of the full data; in the held-out remainder the majority class
/// is downsampled to the minority count.
///
/// Per-class training quotas are `⌊ratio·n_c⌋`, topped up by largest
/// remainder until they sum to `⌊ratio·N⌋`.
pub fn split_train_balanced_test(labels: &[bool], ratio: f64, seed: u64) -> Result<SplitPlan> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid(format!("split ratio {ratio} not in (0, 1)")));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        by_class[usize::from(l)].push(i);
    }
    if by_class.iter().any(|c| c.len() < 2) {
        return Err(Error::invalid("split needs at least two records of each class"));
    }

    let n = labels.len();
    let n_train = (ratio * n as f64).floor() as usize;
    let exact: Vec<f64> = by_class.iter().map(|c| ratio * c.len() as f64).collect();
    let mut quota: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut deficit = n_train - quota.iter().sum::<usize>();
    // class with the larger fractional part first; ties go to class 0
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    for &c in order.iter().cycle() {
        if deficit == 0 {
            break;
        }
        if quota[c] < by_class[c].len() {
            quota[c] += 1;
            deficit -= 1;
        }
    }

    let mut rng = seeded_rng(seed);
    let mut train = Vec::with_capacity(n_train);
    let mut held: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (c, members) in by_class.iter().enumerate() {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        train.extend_from_slice(&shuffled[..quota[c]]);
        held[c] = shuffled[quota[c]..].to_vec();
    }
    let per_class = held[0].len().min(held[1].len());
    if per_class == 0 {
        return Err(Error::invalid("held-out portion is missing a class"));
    }
    let mut test: Vec<usize> = held[0][..per_class]
        .iter()
        .chain(&held[1][..per_class])
        .copied()
        .collect();
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan { train, test, seed })
}

/// Seeded class-balanced sample of all positions: the majority class is
/// downsampled to the minority count.
pub fn balanced_sample(labels: &[bool], seed: u64) -> Result<Vec<usize>> {
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        by_class[usize::from(l)].push(i);
    }
    let per_class = by_class[0].len().min(by_class[1].len());
    if per_class == 0 {
        return Err(Error::invalid("balanced sample needs both classes"));
    }
    let mut rng = seeded_rng(seed);
    let mut out = Vec::with_capacity(2 * per_class);
    for members in &mut by_class {
        members.shuffle(&mut rng);
        out.extend_from_slice(&members[..per_class]);
    }
    out.sort_unstable();
    Ok(out)
}
