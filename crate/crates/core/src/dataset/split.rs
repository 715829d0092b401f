use std::io::{self, Write};

use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// A `(user, item)` index pair.
pub type Pair = (usize, usize);

/// Holdout split of the known-rating set, optionally with a k-fold
/// assignment of the training pairs.
///
/// `train` and `test` are sorted by `(user, item)`; `folds[i]` is the fold of
/// `train[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub train: Vec<(usize, usize)>,
    pub test: Vec<(usize, usize)>,
    pub folds: Option<Vec<usize>>,
}

impl SplitPlan {
    /// Attach a k-fold assignment of the training pairs.
    pub fn with_folds(mut self, k: usize, seed: u64) -> Result<Self> {
        self.folds = Some(kfold(&self.train, k, seed)?);
        Ok(self)
    }

    pub fn num_folds(&self) -> usize {
        self.folds
            .as_ref()
            .and_then(|f| f.iter().max())
            .map_or(0, |&m| m + 1)
    }

    /// `(training pairs, validation pairs)` for fold `fold`.
    pub fn fold(&self, fold: usize) -> (Vec<Pair>, Vec<Pair>) {
        let folds = self.folds.as_deref().unwrap_or(&[]);
        let mut fit = Vec::new();
        let mut validate = Vec::new();
        for (pair, &f) in self.train.iter().zip(folds) {
            if f == fold {
                validate.push(*pair);
            } else {
                fit.push(*pair);
            }
        }
        (fit, validate)
    }

    /// `user_id \t item_id \t {train|test|fold:<n>}` per line, training
    /// pairs first.
    pub fn write_tsv<W: Write>(&self, d: &Dataset, mut w: W) -> io::Result<()> {
        for (i, &(u, it)) in self.train.iter().enumerate() {
            match &self.folds {
                Some(f) => writeln!(w, "{}\t{}\tfold:{}", d.user_id(u), d.item_id(it), f[i])?,
                None => writeln!(w, "{}\t{}\ttrain", d.user_id(u), d.item_id(it))?,
            }
        }
        for &(u, it) in &self.test {
            writeln!(w, "{}\t{}\ttest", d.user_id(u), d.item_id(it))?;
        }
        Ok(())
    }
}

/// Uniformly sample `round(test_fraction * |O|)` rated pairs as the test
/// set; the rest is the training set.
pub fn split_holdout(d: &Dataset, test_fraction: f64, seed: u64) -> Result<SplitPlan> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut pairs = d.rated_pairs();
    if pairs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "holdout split needs at least 2 ratings, got {}",
            pairs.len()
        )));
    }
    let n_test = (test_fraction * pairs.len() as f64).round() as usize;
    pairs.shuffle(&mut rng::stream(seed, rng::STREAM_HOLDOUT));
    let mut test = pairs.split_off(pairs.len() - n_test);
    pairs.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan {
        train: pairs,
        test,
        folds: None,
    })
}

/// Assign each of `train` to one of `k` folds. Fold sizes differ by at most
/// one, with the larger folds first.
pub fn kfold(train: &[(usize, usize)], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k-fold needs k >= 2, got {k}")));
    }
    if k > train.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the {} training pairs",
            train.len()
        )));
    }
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut rng::stream(seed, rng::STREAM_FOLDS));
    let mut folds = vec![0; train.len()];
    for (pos, idx) in order.into_iter().enumerate() {
        folds[idx] = pos % k;
    }
    Ok(folds)
}
