//! Brute-force reference implementations and random instance generators
//! shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use std::collections::BTreeSet;

use gcd_core::distance::DistanceMatrix;
use gcd_core::features::{FeatureMatrix, PartialLabels};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_unit_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> FeatureMatrix {
    loop {
        let data: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Ok(m) = FeatureMatrix::normalized(n, d, data) {
            return m;
        }
    }
}

/// Random labels with classes `0..c1`, each present at least once, and
/// the rest unlabeled with probability `p_unlabeled`.
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, c1: usize, p_unlabeled: f64) -> PartialLabels {
    assert!(c1 <= n);
    let mut v: Vec<Option<usize>> = (0..n)
        .map(|_| {
            if c1 == 0 || rng.gen_bool(p_unlabeled) {
                None
            } else {
                Some(rng.gen_range(0..c1))
            }
        })
        .collect();
    let mut slots: Vec<usize> = (0..n).collect();
    for c in 0..c1 {
        let k = rng.gen_range(0..slots.len());
        v[slots.swap_remove(k)] = Some(c);
    }
    PartialLabels::new(v).unwrap()
}

/// Symmetric matrix with zero diagonal and off-diagonal entries in `[0, 1)`.
pub fn random_distance(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            // coarse grid so equal distances (tie ordering) actually occur
            let v = (rng.gen_range(0..40) as f64) / 40.0;
            w[i][j] = v;
            w[j][i] = v;
        }
    }
    w
}

pub fn to_matrix(w: &[Vec<f64>]) -> DistanceMatrix {
    let n = w.len();
    DistanceMatrix::from_dense(n, w.concat(), gcd_core::distance::DistanceKind::Jaccard).unwrap()
}

/// Greedy association transcribed statement by statement: `-1` marks an
/// unassigned node, merges relabel the whole array. Candidates are the
/// upper-triangle pairs strictly below the threshold, stably sorted by
/// distance.
pub fn greedy_oracle(w: &[Vec<f64>], thresh: f64, c1: usize) -> Vec<i64> {
    let n = w.len();
    let mut w = w.to_vec();
    let mut grp_label = vec![-1i64; n];
    for (c, g) in grp_label.iter_mut().enumerate().take(c1) {
        *g = c as i64;
    }
    let mut count = c1 as i64;
    for row in w.iter_mut().take(c1) {
        for v in row.iter_mut().take(c1) {
            *v = thresh + 1.0;
        }
    }
    let mut inds = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if w[i][j] < thresh {
                inds.push((i, j));
            }
        }
    }
    inds.sort_by(|a, b| w[a.0][a.1].partial_cmp(&w[b.0][b.1]).unwrap());
    let c1 = c1 as i64;
    for (i, j) in inds {
        if grp_label[i] == -1 && grp_label[j] == -1 {
            grp_label[i] = count;
            grp_label[j] = count;
            count += 1;
        } else if grp_label[i] != -1 && grp_label[j] == -1 {
            grp_label[j] = grp_label[i];
        } else if grp_label[i] == -1 && grp_label[j] != -1 {
            grp_label[i] = grp_label[j];
        } else if grp_label[i] != -1 && grp_label[j] != -1 && grp_label[i] != grp_label[j] {
            if grp_label[i] >= c1 || grp_label[j] >= c1 {
                let min_l = grp_label[i].min(grp_label[j]);
                let max_l = grp_label[i].max(grp_label[j]);
                for g in grp_label.iter_mut() {
                    if *g == max_l {
                        *g = min_l;
                    }
                }
            }
        }
    }
    grp_label
}

/// k-reciprocal Jaccard distance computed with dense vectors and nested
/// loops. Same conventions as the library: a node's neighbor list starts
/// with itself, ties go to the lower index, kernel weights are normalized
/// to sum to one, and query expansion averages over the first `k2`
/// entries of the neighbor list.
pub fn jaccard_oracle(x: &FeatureMatrix, k1: usize, k2: usize) -> Vec<Vec<f64>> {
    let n = x.rows();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let dot: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| a * b).sum();
                d[i][j] = (1.0 - dot).clamp(0.0, 2.0);
            }
        }
    }
    let order = |p: usize| -> Vec<usize> {
        let mut o: Vec<usize> = (0..n).collect();
        o.sort_by(|&a, &b| {
            let ka = (a != p, d[p][a], a);
            let kb = (b != p, d[p][b], b);
            ka.partial_cmp(&kb).unwrap()
        });
        o
    };
    let orders: Vec<Vec<usize>> = (0..n).map(order).collect();
    let knn = |p: usize, k: usize| -> Vec<usize> { orders[p][..=k].to_vec() };
    let recip = |p: usize, k: usize| -> BTreeSet<usize> {
        knn(p, k).into_iter().filter(|&q| knn(q, k).contains(&p)).collect()
    };
    let half = k1.div_ceil(2);
    let mut v = vec![vec![0.0; n]; n];
    for p in 0..n {
        let r = recip(p, k1);
        let mut star = r.clone();
        for &q in &r {
            let rq = recip(q, half);
            let shared = rq.intersection(&r).count();
            if 3 * shared >= 2 * rq.len() {
                star.extend(rq);
            }
        }
        for &q in &star {
            v[p][q] = (-d[p][q]).exp();
        }
        let s: f64 = v[p].iter().sum();
        for e in v[p].iter_mut() {
            *e /= s;
        }
    }
    let mut vq = vec![vec![0.0; n]; n];
    for p in 0..n {
        for &q in &orders[p][..k2] {
            for j in 0..n {
                vq[p][j] += v[q][j] / k2 as f64;
            }
        }
    }
    let mut out = vec![vec![0.0; n]; n];
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            let (mut mn, mut mx) = (0.0, 0.0);
            for j in 0..n {
                mn += vq[p][j].min(vq[q][j]);
                mx += vq[p][j].max(vq[q][j]);
            }
            out[p][q] = if mx > 0.0 { 1.0 - mn / mx } else { 1.0 };
        }
    }
    out
}

/// Largest number of agreeing instances over every partial injective map
/// from predicted ids to true ids.
pub fn exhaustive_matched(pred: &[usize], truth: &[usize]) -> usize {
    let p_ids: Vec<usize> = pred.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let t_ids: Vec<usize> = truth.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut table = vec![vec![0usize; t_ids.len()]; p_ids.len()];
    for (p, t) in pred.iter().zip(truth) {
        let r = p_ids.binary_search(p).unwrap();
        let c = t_ids.binary_search(t).unwrap();
        table[r][c] += 1;
    }
    fn go(row: usize, used: &mut Vec<bool>, table: &[Vec<usize>]) -> usize {
        if row == table.len() {
            return 0;
        }
        let mut best = go(row + 1, used, table);
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                best = best.max(table[row][c] + go(row + 1, used, table));
                used[c] = false;
            }
        }
        best
    }
    go(0, &mut vec![false; t_ids.len()], &table)
}

/// Loss of a single feature against prototype rows, evaluated directly.
pub fn direct_loss(protos: &[Vec<f64>], f: &[f64], y: usize, tau: f64) -> f64 {
    let logits: Vec<f64> = protos
        .iter()
        .map(|k| k.iter().zip(f).map(|(a, b)| a * b).sum::<f64>() / tau)
        .collect();
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
    lse - logits[y]
}
