use std::collections::HashSet;

use log::warn;

use crate::error::{Error, Result};
use crate::numerics::Rng;
use crate::scalar::Real;

use super::VectorSet;

/// One verification trial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trial {
    pub enroll: String,
    pub test: String,
    pub target: bool,
}

/// Ordered list of verification trials.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrialList {
    pub trials: Vec<Trial>,
}

impl TrialList {
    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn num_targets(&self) -> usize {
        self.trials.iter().filter(|t| t.target).count()
    }

    pub fn num_nontargets(&self) -> usize {
        self.len() - self.num_targets()
    }
}

/// Pairwise trials over a labeled set.
///
/// Every same-class pair becomes a target trial. Cross-class pairs are
/// imposters; when `max_imposter_per_target > 0` at most that many imposters
/// per target trial are drawn without replacement, otherwise all are kept.
/// Trials are ordered by record position of (enroll, test).
pub fn make_trials<T: Real>(
    set: &VectorSet<T>,
    max_imposter_per_target: usize,
    seed: u64,
) -> Result<TrialList> {
    let classes = set.class_indices();
    if classes.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "trial construction needs at least 2 classes, found {}",
            classes.len()
        )));
    }
    for (label, idx) in &classes {
        if idx.len() < 2 {
            warn!("class {label} has a single sample and contributes no target trials");
        }
    }
    let n = set.len();
    let labels = set.labels();
    let mut pairs: Vec<(usize, usize, bool)> = Vec::new();
    for idx in classes.values() {
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                pairs.push((i.min(j), i.max(j), true));
            }
        }
    }
    let n_targets = pairs.len();
    let total_pairs = n * (n - 1) / 2;
    let total_imposters = total_pairs - n_targets;
    let wanted = if max_imposter_per_target == 0 {
        total_imposters
    } else {
        (n_targets.saturating_mul(max_imposter_per_target)).min(total_imposters)
    };

    if wanted == total_imposters {
        for i in 0..n {
            for j in (i + 1)..n {
                if labels[i] != labels[j] {
                    pairs.push((i, j, false));
                }
            }
        }
    } else {
        // rejection sampling over the triangular pair index
        let mut rng = Rng::new(seed);
        let mut chosen: HashSet<(usize, usize)> = HashSet::with_capacity(wanted);
        while chosen.len() < wanted {
            let i = rng.below(n);
            let j = rng.below(n);
            if i == j || labels[i] == labels[j] {
                continue;
            }
            chosen.insert((i.min(j), i.max(j)));
        }
        pairs.extend(chosen.into_iter().map(|(i, j)| (i, j, false)));
    }
    pairs.sort_unstable();
    let ids = set.ids();
    Ok(TrialList {
        trials: pairs
            .into_iter()
            .map(|(i, j, target)| Trial {
                enroll: ids[i].clone(),
                test: ids[j].clone(),
                target,
            })
            .collect(),
    })
}
