use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::rng_for;
use crate::{Error, Result};

/// Fold index of every clip, in input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub clip_ids: Vec<String>,
    pub fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded shuffle, then round-robin into `k` folds whose sizes differ by at
/// most one.
pub fn kfold_split(clip_ids: &[String], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::invalid(format!("k = {k}; need at least 2 folds")));
    }
    if clip_ids.len() < k {
        return Err(Error::invalid(format!("{} clips cannot fill {k} folds", clip_ids.len())));
    }
    let mut order: Vec<usize> = (0..clip_ids.len()).collect();
    order.shuffle(&mut rng_for(seed, "kfold"));
    let mut fold_of = vec![0; clip_ids.len()];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % k;
    }
    Ok(FoldAssignment {
        k,
        clip_ids: clip_ids.to_vec(),
        fold_of,
    })
}
