//! Semi-supervised clustering baselines: Semi-KMeans and Semi-DBSCAN (with
//! and without the prior constraint).

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::association::GroupCenters;
use crate::distance::DistanceMatrix;
use crate::features::{FeatureMatrix, PartialLabels};
use crate::util::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmeansParams {
    pub k: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbscanParams {
    pub eps: f64,
    pub min_pts: usize,
    /// Refuse to grow a cluster over a second known class.
    pub constrained: bool,
}

impl Default for DbscanParams {
    fn default() -> Self {
        Self {
            eps: 0.35,
            min_pts: 4,
            constrained: false,
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// K-means in which labeled instances are pinned to their class's cluster.
///
/// Centers `0..C1` start at the labeled class means; the rest are seeded
/// k-means++ style from the unlabeled instances. Stops when no center moves
/// more than `tol` (Euclidean) or after `max_iters` rounds.
pub fn semi_kmeans(
    feats: &FeatureMatrix,
    labels: &PartialLabels,
    params: &KmeansParams,
) -> Result<Vec<usize>> {
    labels.check_rows(feats)?;
    let n = feats.rows();
    let c1 = labels.num_known_classes();
    if n == 0 {
        return Err(Error::domain("empty input"));
    }
    if params.k < c1.max(1) {
        return Err(Error::domain(format!(
            "k = {} is below the number of known classes {c1}",
            params.k
        )));
    }
    if params.max_iters < 1 {
        return Err(Error::domain("max_iters must be at least 1"));
    }
    let d = feats.dim();
    let k = params.k;
    let mut centers = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for i in 0..n {
        if let Some(c) = labels.get(i) {
            counts[c] += 1;
            add_into(&mut centers[c * d..(c + 1) * d], feats.row(i));
        }
    }
    for c in 0..c1 {
        scale(&mut centers[c * d..(c + 1) * d], 1.0 / counts[c] as f64);
    }

    // k-means++ seeding of the remaining centers
    let mut pool = labels.unlabeled_indices();
    if pool.is_empty() {
        pool = (0..n).collect();
    }
    let mut rng = rng(params.seed);
    let mut nearest: Vec<f64> = pool
        .iter()
        .map(|&i| {
            (0..c1)
                .map(|c| sq_dist(feats.row(i), &centers[c * d..(c + 1) * d]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    for c in c1..k {
        let total: f64 = nearest.iter().filter(|v| v.is_finite()).sum();
        let pick = if c == 0 || !(total > 0.0) {
            rng.gen_range(0..pool.len())
        } else {
            let mut r = rng.gen::<f64>() * total;
            let mut chosen = pool.len() - 1;
            for (k, &w) in nearest.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                if r < w {
                    chosen = k;
                    break;
                }
                r -= w;
            }
            chosen
        };
        centers[c * d..(c + 1) * d].copy_from_slice(feats.row(pool[pick]));
        for (k, &i) in pool.iter().enumerate() {
            let dd = sq_dist(feats.row(i), &centers[c * d..(c + 1) * d]);
            nearest[k] = nearest[k].min(dd);
        }
    }

    let mut assign = vec![0usize; n];
    for _ in 0..params.max_iters {
        for (i, a) in assign.iter_mut().enumerate() {
            *a = match labels.get(i) {
                Some(c) => c,
                None => {
                    let x = feats.row(i);
                    let mut best = (0, f64::INFINITY);
                    for c in 0..k {
                        let dd = sq_dist(x, &centers[c * d..(c + 1) * d]);
                        if dd < best.1 {
                            best = (c, dd);
                        }
                    }
                    best.0
                }
            };
        }
        let mut sums = vec![0.0; k * d];
        counts.fill(0);
        for (i, &c) in assign.iter().enumerate() {
            counts[c] += 1;
            add_into(&mut sums[c * d..(c + 1) * d], feats.row(i));
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let s = &mut sums[c * d..(c + 1) * d];
            scale(s, 1.0 / counts[c] as f64);
            shift = shift.max(sq_dist(s, &centers[c * d..(c + 1) * d]).sqrt());
            centers[c * d..(c + 1) * d].copy_from_slice(s);
        }
        if shift < params.tol {
            break;
        }
    }
    Ok(assign)
}

fn add_into(acc: &mut [f64], x: &[f64]) {
    acc.iter_mut().zip(x).for_each(|(a, v)| *a += v);
}

fn scale(v: &mut [f64], s: f64) {
    v.iter_mut().for_each(|x| *x *= s);
}

/// Density-based clustering on a precomputed distance matrix.
///
/// Distances between instances of two different known classes are first
/// raised to `eps + 1`. Points within `eps` (inclusive) are neighbors and a
/// point with at least `min_pts` neighbors (itself included) is a core
/// point. Clusters grow from core points in ascending index order. With
/// `constrained`, a labeled point whose class differs from the cluster's
/// class is skipped: it is neither added nor expanded through, and stays
/// free for a later cluster.
///
/// Returns `None` for noise.
pub fn semi_dbscan(
    dist: &DistanceMatrix,
    labels: &PartialLabels,
    params: &DbscanParams,
) -> Result<Vec<Option<usize>>> {
    let n = dist.size();
    if labels.len() != n {
        return Err(Error::dim(format!("{} labels for a {n}-node matrix", labels.len())));
    }
    if !(params.eps > 0.0) {
        return Err(Error::domain("eps must be positive"));
    }
    if params.min_pts < 1 {
        return Err(Error::domain("min_pts must be at least 1"));
    }
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| refined(dist, labels, params.eps, i, j) <= params.eps)
                .collect()
        })
        .collect();
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= params.min_pts).collect();

    let mut cluster: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    for seed in 0..n {
        if cluster[seed].is_some() || !core[seed] {
            continue;
        }
        let id = next;
        next += 1;
        let mut class = labels.get(seed);
        cluster[seed] = Some(id);
        let mut queue: VecDeque<usize> = neighbors[seed].iter().copied().collect();
        while let Some(q) = queue.pop_front() {
            if cluster[q].is_some() {
                continue;
            }
            if params.constrained {
                match (class, labels.get(q)) {
                    (Some(a), Some(b)) if a != b => continue,
                    (None, Some(b)) => class = Some(b),
                    _ => {}
                }
            }
            cluster[q] = Some(id);
            if core[q] {
                queue.extend(neighbors[q].iter().copied().filter(|&r| cluster[r].is_none()));
            }
        }
    }
    Ok(cluster)
}

fn refined(dist: &DistanceMatrix, labels: &PartialLabels, eps: f64, i: usize, j: usize) -> f64 {
    match (labels.get(i), labels.get(j)) {
        (Some(a), Some(b)) if a != b => eps + 1.0,
        _ => dist.get(i, j),
    }
}

/// Replaces noise with the cluster whose normalized mean is most similar.
pub fn assign_noise(feats: &FeatureMatrix, clusters: &[Option<usize>]) -> Result<Vec<usize>> {
    let centers = GroupCenters::compute(feats, clusters)?;
    clusters
        .iter()
        .enumerate()
        .map(|(i, c)| match c {
            Some(c) => Ok(*c),
            None => centers
                .nearest(feats.row(i))
                .ok_or_else(|| Error::domain("every point is noise; nothing to assign to")),
        })
        .collect()
}

/// True when no cluster holds two distinct known labels.
pub fn clusters_respect_labels(clusters: &[Option<usize>], labels: &PartialLabels) -> bool {
    let mut class_of: std::collections::HashMap<usize, usize> = Default::default();
    clusters.iter().zip(labels.as_slice()).all(|(c, l)| match (c, l) {
        (Some(c), Some(l)) => *class_of.entry(*c).or_insert(*l) == *l,
        _ => true,
    })
}
