//! Clustering accuracy under the best one-to-one matching of predicted
//! groups to true classes.

use std::collections::{BTreeMap, BTreeSet};

use pathfinding::prelude::{kuhn_munkres, Matrix};
use serde::{Deserialize, Serialize};

use crate::features::PartialLabels;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// Predicted id → true id, for every predicted group that got a partner.
    pub mapping: BTreeMap<usize, usize>,
    /// Number of instances whose prediction maps to their true class.
    pub matched: usize,
}

/// Optimal assignment between predicted ids and true ids maximizing the
/// number of agreeing instances. The contingency table is zero-padded to a
/// square when the two id counts differ.
pub fn hungarian_match(pred: &[usize], truth: &[usize]) -> Result<Matching> {
    if pred.len() != truth.len() {
        return Err(Error::dim(format!(
            "{} predictions for {} ground-truth labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::domain("cannot match empty labelings"));
    }
    let pred_ids: Vec<usize> = pred.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let true_ids: Vec<usize> = truth.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let size = pred_ids.len().max(true_ids.len());
    let mut table = Matrix::new(size, size, 0i64);
    for (&p, &t) in pred.iter().zip(truth) {
        let r = pred_ids.binary_search(&p).unwrap();
        let c = true_ids.binary_search(&t).unwrap();
        table[(r, c)] += 1;
    }
    let (total, cols) = kuhn_munkres(&table);
    let mapping = cols
        .iter()
        .enumerate()
        .filter(|&(r, &c)| r < pred_ids.len() && c < true_ids.len())
        .map(|(r, &c)| (pred_ids[r], true_ids[c]))
        .collect();
    Ok(Matching {
        mapping,
        matched: total as usize,
    })
}

/// Accuracy breakdown over the unlabeled instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccReport {
    pub all_acc: f64,
    pub old_acc: f64,
    pub new_acc: f64,
    pub num_predicted_groups: usize,
    pub num_true_classes: usize,
    pub class_count_error_rate: f64,
}

/// Matches once over all unlabeled instances, then scores the known-class
/// ("old") and novel-class ("new") subsets under that single matching.
/// A subset with no instances scores 0.
///
/// `pred` and `truth` cover the whole dataset; group and class counts are
/// taken over all of it.
pub fn acc_report(
    pred: &[usize],
    truth: &[usize],
    labels: &PartialLabels,
    known_classes: &BTreeSet<usize>,
) -> Result<AccReport> {
    if pred.len() != truth.len() || labels.len() != truth.len() {
        return Err(Error::dim(format!(
            "lengths differ: pred {}, truth {}, labels {}",
            pred.len(),
            truth.len(),
            labels.len()
        )));
    }
    let unlabeled = labels.unlabeled_indices();
    if unlabeled.is_empty() {
        return Err(Error::domain("no unlabeled instances to evaluate"));
    }
    let up: Vec<usize> = unlabeled.iter().map(|&i| pred[i]).collect();
    let ut: Vec<usize> = unlabeled.iter().map(|&i| truth[i]).collect();
    let matching = hungarian_match(&up, &ut)?;

    let (mut old_hit, mut old_n, mut new_hit, mut new_n) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &t) in up.iter().zip(&ut) {
        let hit = matching.mapping.get(&p) == Some(&t);
        if known_classes.contains(&t) {
            old_n += 1;
            old_hit += hit as usize;
        } else {
            new_n += 1;
            new_hit += hit as usize;
        }
    }
    let frac = |h: usize, n: usize| if n == 0 { 0.0 } else { h as f64 / n as f64 };
    let num_predicted_groups = pred.iter().collect::<BTreeSet<_>>().len();
    let num_true_classes = truth.iter().collect::<BTreeSet<_>>().len();
    Ok(AccReport {
        all_acc: frac(matching.matched, up.len()),
        old_acc: frac(old_hit, old_n),
        new_acc: frac(new_hit, new_n),
        num_predicted_groups,
        num_true_classes,
        class_count_error_rate: class_count_error_rate(num_predicted_groups, num_true_classes),
    })
}

/// `|predicted − true| / true`.
pub fn class_count_error_rate(predicted: usize, truth: usize) -> f64 {
    (predicted as f64 - truth as f64).abs() / truth as f64
}
