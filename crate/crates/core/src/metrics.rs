//! Binary classification metrics and seeded k-fold splits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no examples to evaluate")]
    Empty,
    #[error("predictions ({predictions}) and labels ({labels}) differ in length")]
    Length { predictions: usize, labels: usize },
    #[error("cannot split {n} examples into {k} folds")]
    Folds { n: usize, k: usize },
}

/// Confusion counts with respect to one positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub r#fn: usize,
}

impl Confusion {
    /// `positive[i]` is the prediction, `actual[i]` the label.
    pub fn from_pairs(predicted: &[bool], actual: &[bool]) -> Result<Self, MetricsError> {
        if predicted.len() != actual.len() {
            return Err(MetricsError::Length {
                predictions: predicted.len(),
                labels: actual.len(),
            });
        }
        if predicted.is_empty() {
            return Err(MetricsError::Empty);
        }
        let mut c = Confusion::default();
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p, a) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.r#fn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.r#fn
    }

    /// Zero when nothing was predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// Zero when there are no positive labels.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.r#fn)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// Same counts seen from the other class.
    pub fn flipped(&self) -> Self {
        Confusion {
            tp: self.tn,
            fp: self.r#fn,
            tn: self.tp,
            r#fn: self.fp,
        }
    }

    /// Micro-averaged F1 over both classes, which for single-label binary
    /// data equals accuracy.
    pub fn micro_f1(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    /// Unweighted mean of the two per-class F1 scores.
    pub fn macro_f1(&self) -> f64 {
        (self.f1() + self.flipped().f1()) / 2.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Area under the ROC curve via the Mann-Whitney rank statistic with
/// average ranks for ties. `None` unless both classes are present.
pub fn auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    if scores.len() != positive.len() {
        return None;
    }
    let n_pos = positive.iter().filter(|p| **p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    let pos_rank_sum: f64 = ranks.iter().zip(positive).filter(|(_, p)| **p).map(|(r, _)| r).sum();
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos * n_neg) as f64)
}

/// Held-out index sets for `k` folds. Indices are shuffled with `seed`
/// and dealt round-robin, so fold sizes differ by at most one.
pub fn k_fold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, MetricsError> {
    if k < 2 || n < k {
        return Err(MetricsError::Folds { n, k });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (pos, i) in idx.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Complement of a held-out fold.
pub fn training_indices(n: usize, held_out: &[usize]) -> Vec<usize> {
    let mut mask = vec![true; n];
    for &i in held_out {
        mask[i] = false;
    }
    (0..n).filter(|&i| mask[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_and_degenerate() {
        let c = Confusion::from_pairs(&[true, true], &[true, true]).unwrap();
        assert_eq!((c.precision(), c.recall()), (1.0, 1.0));
        let c = Confusion::from_pairs(&[false, false], &[true, true]).unwrap();
        assert_eq!(c.recall(), 0.0);
        assert_eq!(c.precision(), 0.0);
        assert_eq!(Confusion::from_pairs(&[], &[]), Err(MetricsError::Empty));
    }

    #[test]
    fn macro_f1_hand_computed() {
        // tp=2 fp=1 tn=3 fn=2: F1(pos)=4/7, F1(neg)=2/3
        let pred = [true, true, true, false, false, false, false, false];
        let act = [true, true, false, false, false, false, true, true];
        let c = Confusion::from_pairs(&pred, &act).unwrap();
        assert!((c.macro_f1() - (4.0 / 7.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
        assert!((c.micro_f1() - 5.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn auc_cases() {
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]), Some(1.0));
        assert_eq!(auc(&[0.5; 4], &[true, false, true, false]), Some(0.5));
        assert_eq!(auc(&[0.1, 0.9], &[true, false]), Some(0.0));
        assert_eq!(auc(&[0.1, 0.9], &[true, true]), None);
    }

    fn brute_auc(scores: &[f64], pos: &[bool]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if pos[i] && !pos[j] {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        wins += 1.0;
                    } else if scores[i] == scores[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        wins / pairs
    }

    proptest! {
        #[test]
        fn auc_matches_pair_counting(
            data in prop::collection::vec((0u8..5, any::<bool>()), 2..40)
        ) {
            let scores: Vec<f64> = data.iter().map(|(s, _)| *s as f64 / 4.0).collect();
            let pos: Vec<bool> = data.iter().map(|(_, p)| *p).collect();
            if let Some(a) = auc(&scores, &pos) {
                prop_assert!((a - brute_auc(&scores, &pos)).abs() < 1e-12);
            }
        }

        #[test]
        fn folds_partition(n in 5usize..60, k in 2usize..6, seed in any::<u64>()) {
            prop_assume!(n >= k);
            let folds = k_fold_indices(n, k, seed).unwrap();
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }
}
