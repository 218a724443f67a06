//! Cosine distances and k-reciprocal re-ranked Jaccard distances.

use serde::{Deserialize, Serialize};

use crate::features::FeatureMatrix;
use crate::util::dot;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Cosine,
    Jaccard,
}

/// Dense symmetric `n × n` distance matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
    kind: DistanceKind,
}

impl DistanceMatrix {
    /// Wraps a row-major square matrix. Checks shape, finiteness, symmetry
    /// (within 1e-6) and a zero diagonal.
    pub fn from_dense(n: usize, data: Vec<f64>, kind: DistanceKind) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::dim(format!("{} entries for a {n}x{n} matrix", data.len())));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if !(a.is_finite() && b.is_finite() && a >= 0.0) || (a - b).abs() > 1e-6 {
                    return Err(Error::invalid(format!("entry ({i},{j}) not symmetric/nonnegative")));
                }
            }
        }
        Ok(Self { n, data, kind })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Neighborhood sizes for re-ranking. `k1` is the k-reciprocal neighborhood,
/// `k2` the local query-expansion size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RerankParams {
    pub k1: usize,
    pub k2: usize,
}

impl Default for RerankParams {
    fn default() -> Self {
        Self { k1: 20, k2: 6 }
    }
}

impl RerankParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k2 < 1 {
            return Err(Error::domain("k2 must be at least 1"));
        }
        if self.k2 > self.k1 {
            return Err(Error::domain(format!("k2 = {} exceeds k1 = {}", self.k2, self.k1)));
        }
        if self.k1 >= n {
            return Err(Error::domain(format!("k1 = {} must be below n = {n}", self.k1)));
        }
        Ok(())
    }

    /// Clips `k1` to `n - 1` and `k2` to `k1` so the parameters fit `n` nodes.
    /// Requires `n >= 2`.
    pub fn clipped(&self, n: usize) -> Self {
        let k1 = self.k1.min(n.saturating_sub(1)).max(1);
        Self {
            k1,
            k2: self.k2.clamp(1, k1),
        }
    }
}

/// `D[i][j] = 1 - <x_i, x_j>`, clamped to `[0, 2]`, zero diagonal.
pub fn cosine_distance_matrix(feats: &FeatureMatrix) -> Result<DistanceMatrix> {
    let n = feats.rows();
    if n == 0 {
        return Err(Error::domain("empty feature matrix"));
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        let xi = feats.row(i);
        for j in (i + 1)..n {
            let d = (1.0 - dot(xi, feats.row(j))).clamp(0.0, 2.0);
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix {
        n,
        data,
        kind: DistanceKind::Cosine,
    })
}

/// k-reciprocal Jaccard distance of unit-norm features. See
/// [`k_reciprocal_jaccard_from_cosine`].
pub fn k_reciprocal_jaccard(feats: &FeatureMatrix, params: RerankParams) -> Result<DistanceMatrix> {
    params.validate(feats.rows())?;
    let cos = cosine_distance_matrix(feats)?;
    k_reciprocal_jaccard_from_cosine(&cos, params)
}

/// Re-ranked Jaccard distance from a precomputed base distance.
///
/// Each node `p` is encoded as a sparse vector over nodes. Its support is the
/// k-reciprocal set `R(p, k1)` grown by every `R(q, ⌈k1/2⌉)` (for `q` in
/// `R(p, k1)`) that shares at least two thirds of its members with
/// `R(p, k1)`. Entries are `exp(-d(p, q))`, scaled to sum to one, then
/// averaged over the `k2` nearest neighbors of `p`. The distance is one minus
/// the weighted intersection over union of two such vectors.
///
/// `kNN(p, k)` is the first `k + 1` entries of `p`'s ranking: `p` itself,
/// then the rest by ascending distance, ties by ascending index.
pub fn k_reciprocal_jaccard_from_cosine(
    base: &DistanceMatrix,
    params: RerankParams,
) -> Result<DistanceMatrix> {
    let n = base.size();
    params.validate(n)?;
    let k1 = params.k1;
    let k_half = k1.div_ceil(2);

    let ranking: Vec<Vec<usize>> = (0..n).map(|p| top_ranked(base.row(p), p, k1 + 1)).collect();
    let knn = |p: usize, k: usize| &ranking[p][..=k];
    let reciprocal = |p: usize, k: usize| -> Vec<usize> {
        let mut r: Vec<usize> = knn(p, k)
            .iter()
            .copied()
            .filter(|&q| knn(q, k).contains(&p))
            .collect();
        r.sort_unstable();
        r
    };

    let half: Vec<Vec<usize>> = (0..n).map(|q| reciprocal(q, k_half)).collect();
    let mut encoded: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for p in 0..n {
        let r = reciprocal(p, k1);
        let mut support = r.clone();
        for &q in &r {
            let cand = &half[q];
            let shared = cand.iter().filter(|c| r.binary_search(c).is_ok()).count();
            if 3 * shared >= 2 * cand.len() {
                support.extend_from_slice(cand);
            }
        }
        support.sort_unstable();
        support.dedup();
        let weights: Vec<f64> = support.iter().map(|&q| (-base.get(p, q)).exp()).collect();
        let total: f64 = weights.iter().sum();
        encoded.push(support.into_iter().zip(weights.into_iter().map(|w| w / total)).collect());
    }

    if params.k2 > 1 {
        let mut acc = vec![0.0; n];
        let mut in_set = vec![false; n];
        let mut touched = Vec::new();
        let scale = 1.0 / params.k2 as f64;
        let expanded: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|p| {
                for &q in &ranking[p][..params.k2] {
                    for &(j, v) in &encoded[q] {
                        if !in_set[j] {
                            in_set[j] = true;
                            touched.push(j);
                        }
                        acc[j] += v;
                    }
                }
                touched.sort_unstable();
                let out = touched.iter().map(|&j| (j, acc[j] * scale)).collect();
                for &j in &touched {
                    acc[j] = 0.0;
                    in_set[j] = false;
                }
                touched.clear();
                out
            })
            .collect();
        encoded = expanded;
    }

    Ok(jaccard_from_encoding(&encoded))
}

/// Indices of the `count` best-ranked nodes from `p`'s point of view.
fn top_ranked(dist: &[f64], p: usize, count: usize) -> Vec<usize> {
    let key = |&q: &usize| (dist[q], q);
    let cmp = |a: &usize, b: &usize| key(a).partial_cmp(&key(b)).unwrap();
    let mut others: Vec<usize> = (0..dist.len()).filter(|&q| q != p).collect();
    let want = count - 1;
    if want < others.len() {
        others.select_nth_unstable_by(want, cmp);
        others.truncate(want);
    }
    others.sort_unstable_by(cmp);
    let mut out = Vec::with_capacity(count);
    out.push(p);
    out.extend(others);
    out
}

fn jaccard_from_encoding(encoded: &[Vec<(usize, f64)>]) -> DistanceMatrix {
    let n = encoded.len();
    let mut postings: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (p, v) in encoded.iter().enumerate() {
        for &(j, w) in v {
            postings[j].push((p, w));
        }
    }
    let mass: Vec<f64> = encoded.iter().map(|v| v.iter().map(|e| e.1).sum()).collect();

    let mut data = vec![1.0; n * n];
    let mut overlap = vec![0.0; n];
    let mut hit = vec![false; n];
    let mut touched = Vec::new();
    for p in 0..n {
        for &(j, w) in &encoded[p] {
            for &(q, u) in &postings[j] {
                if !hit[q] {
                    hit[q] = true;
                    touched.push(q);
                }
                overlap[q] += w.min(u);
            }
        }
        for &q in &touched {
            let inter = overlap[q];
            let union = mass[p] + mass[q] - inter;
            data[p * n + q] = if union > 0.0 {
                (1.0 - inter / union).clamp(0.0, 1.0)
            } else {
                1.0
            };
            overlap[q] = 0.0;
            hit[q] = false;
        }
        touched.clear();
        data[p * n + p] = 0.0;
    }
    DistanceMatrix {
        n,
        data,
        kind: DistanceKind::Jaccard,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<f64>]) -> FeatureMatrix {
        FeatureMatrix::from_rows_normalized(rows).unwrap()
    }

    #[test]
    fn cosine_basic_values() {
        let x = m(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![1.0, 0.0]]);
        let d = cosine_distance_matrix(&x).unwrap();
        assert_eq!(d.get(0, 3), 0.0);
        assert_eq!(d.get(0, 1), 1.0);
        assert_eq!(d.get(0, 2), 2.0);
        assert_eq!(d.get(2, 2), 0.0);
        assert_eq!(d.kind(), DistanceKind::Cosine);
    }

    #[test]
    fn cosine_rejects_empty() {
        let x = FeatureMatrix::new(0, 0, vec![]).unwrap();
        assert!(cosine_distance_matrix(&x).is_err());
    }

    #[test]
    fn params_domain() {
        assert!(RerankParams { k1: 3, k2: 4 }.validate(10).is_err());
        assert!(RerankParams { k1: 10, k2: 1 }.validate(10).is_err());
        assert!(RerankParams { k1: 3, k2: 0 }.validate(10).is_err());
        assert!(RerankParams { k1: 9, k2: 9 }.validate(10).is_ok());
        assert_eq!(RerankParams { k1: 20, k2: 6 }.clipped(5), RerankParams { k1: 4, k2: 4 });
        assert!(k_reciprocal_jaccard(&m(&[vec![1.0, 0.0], vec![0.0, 1.0]]), RerankParams { k1: 2, k2: 1 }).is_err());
    }

    #[test]
    fn coincident_points_have_zero_jaccard() {
        let x = m(&[
            vec![1.0, 0.1],
            vec![1.0, 0.1],
            vec![0.9, 0.5],
            vec![0.2, 1.0],
            vec![-1.0, 0.3],
            vec![-0.7, -0.7],
        ]);
        let d = k_reciprocal_jaccard(&x, RerankParams { k1: 3, k2: 2 }).unwrap();
        assert!(d.get(0, 1).abs() < 1e-12, "{}", d.get(0, 1));
    }

    #[test]
    fn separated_clumps_are_at_jaccard_one() {
        let x = m(&[
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.05, 0.0],
            vec![1.0, 0.0, 0.05],
            vec![0.0, 0.0, 1.0],
            vec![0.05, 0.0, 1.0],
            vec![0.0, 0.05, 1.0],
        ]);
        let d = k_reciprocal_jaccard(&x, RerankParams { k1: 2, k2: 2 }).unwrap();
        for i in 0..3 {
            for j in 3..6 {
                assert_eq!(d.get(i, j), 1.0);
            }
        }
        assert!(d.get(0, 1) < 1.0);
    }

    #[test]
    fn top_ranked_puts_self_first_and_breaks_ties_by_index() {
        let dist = [0.5, 0.0, 0.5, 0.1, 0.5];
        assert_eq!(top_ranked(&dist, 1, 4), vec![1, 3, 0, 2]);
        assert_eq!(top_ranked(&dist, 1, 5), vec![1, 3, 0, 2, 4]);
    }
}
