use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub test: Vec<String>,
    pub validation: Vec<String>,
    pub train: Vec<String>,
}

/// Participant-level outer folds, each with an inner train/validation
/// split of the remaining participants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub folds: Vec<Fold>,
}

/// Shuffles the sorted participant ids with the seed; outer fold `i` tests
/// the participants at shuffled positions `p` with `p mod k == i`. Of the
/// rest, the first third (rounded up, in shuffled order) validates and the
/// others train. Sets are reported sorted.
pub fn make_split_plan(participant_ids: &[String], k: usize, seed: u64) -> Result<SplitPlan> {
    if k < 2 {
        return Err(Error::input("need at least 2 outer folds"));
    }
    let mut ids = participant_ids.to_vec();
    ids.sort();
    ids.dedup();
    if ids.len() < k {
        return Err(Error::input(format!(
            "{} participants cannot fill {k} folds",
            ids.len()
        )));
    }
    ids.shuffle(&mut rng::stream(seed, "split-plan", 0));
    let folds = (0..k)
        .map(|i| {
            let mut test = Vec::new();
            let mut rest = Vec::new();
            for (p, id) in ids.iter().enumerate() {
                if p % k == i {
                    test.push(id.clone());
                } else {
                    rest.push(id.clone());
                }
            }
            let n_val = rest.len().div_ceil(3);
            let mut train = rest.split_off(n_val);
            let mut validation = rest;
            test.sort();
            validation.sort();
            train.sort();
            Fold {
                test,
                validation,
                train,
            }
        })
        .collect();
    Ok(SplitPlan { seed, folds })
}

/// Train/validation split of all participants for fitting a final model:
/// the first third (rounded up) of the seeded shuffle validates.
pub fn holdout_split(participant_ids: &[String], seed: u64) -> Result<(Vec<String>, Vec<String>)> {
    let mut ids = participant_ids.to_vec();
    ids.sort();
    ids.dedup();
    if ids.len() < 2 {
        return Err(Error::input("need at least 2 participants for a train/validation split"));
    }
    ids.shuffle(&mut rng::stream(seed, "holdout", 0));
    let mut train = ids.split_off(ids.len().div_ceil(3));
    let mut validation = ids;
    train.sort();
    validation.sort();
    Ok((train, validation))
}
