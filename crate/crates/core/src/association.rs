//! Prior-constrained greedy association.
//!
//! Labeled instances are collapsed into one proxy per known class. Proxies
//! and unlabeled instances form the "hybrid" node set; nodes `0..C1` are the
//! proxies. Candidate pairs below a distance threshold are processed in
//! ascending order: a pair either opens a new group, absorbs a loose node
//! into an existing group, or merges two groups. A merge between two groups
//! that both carry a known class is refused, so no group ever holds two
//! proxies.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::distance::{k_reciprocal_jaccard, DistanceMatrix, RerankParams};
use crate::features::{FeatureMatrix, PartialLabels};
use crate::util::{ceil_fraction, dot, normalize_in_place, rng};
use crate::{Error, Result};

/// Proxies followed by unlabeled instances.
#[derive(Debug, Clone)]
pub struct HybridSet {
    features: FeatureMatrix,
    num_proxies: usize,
    unlabeled_index_map: Vec<usize>,
}

impl HybridSet {
    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn num_proxies(&self) -> usize {
        self.num_proxies
    }

    /// Original dataset index of unlabeled row `C1 + k`, at position `k`.
    pub fn unlabeled_index_map(&self) -> &[usize] {
        &self.unlabeled_index_map
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// Per-class normalized mean of the labeled rows, stacked on top of the
/// unlabeled rows in dataset order.
pub fn build_hybrid(feats: &FeatureMatrix, labels: &PartialLabels) -> Result<HybridSet> {
    labels.check_rows(feats)?;
    let c1 = labels.num_known_classes();
    let d = feats.dim();
    let mut sums = vec![0.0; c1 * d];
    let mut counts = vec![0usize; c1];
    for (i, l) in labels.as_slice().iter().enumerate() {
        if let Some(c) = *l {
            counts[c] += 1;
            sums[c * d..(c + 1) * d]
                .iter_mut()
                .zip(feats.row(i))
                .for_each(|(s, x)| *s += x);
        }
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::invalid(format!("class {c} has no labeled instance")));
    }
    for c in 0..c1 {
        if !normalize_in_place(&mut sums[c * d..(c + 1) * d]) {
            return Err(Error::invalid(format!("labeled features of class {c} average to zero")));
        }
    }
    let proxies = FeatureMatrix::new(c1, d, sums)?;
    let unlabeled_index_map = labels.unlabeled_indices();
    let features = proxies.vstack(&feats.select_rows(&unlabeled_index_map))?;
    Ok(HybridSet {
        features,
        num_proxies: c1,
        unlabeled_index_map,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidatePair {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

/// Association candidates sorted by ascending distance, ties by `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePairs {
    pairs: Vec<CandidatePair>,
    threshold: f64,
}

impl CandidatePairs {
    pub fn as_slice(&self) -> &[CandidatePair] {
        &self.pairs
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Upper-triangle pairs with `W[i][j] < threshold`, skipping proxy–proxy pairs.
pub fn select_candidates(
    w: &DistanceMatrix,
    threshold: f64,
    num_proxies: usize,
) -> Result<CandidatePairs> {
    if !(threshold > 0.0) {
        return Err(Error::domain(format!("threshold must be positive, got {threshold}")));
    }
    let n = w.size();
    if num_proxies > n {
        return Err(Error::dim(format!("{num_proxies} proxies in a {n}-node matrix")));
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        let row = w.row(i);
        let start = (i + 1).max(if i < num_proxies { num_proxies } else { 0 });
        for (j, &d) in row.iter().enumerate().skip(start) {
            if d < threshold {
                pairs.push(CandidatePair { i, j, distance: d });
            }
        }
    }
    // rows are scanned in (i, j) order, so a stable sort keeps lexicographic ties
    pairs.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    Ok(CandidatePairs { pairs, threshold })
}

/// Group id per hybrid node; `None` for nodes never touched by a pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    group_of: Vec<Option<usize>>,
    num_known_classes: usize,
}

impl Grouping {
    pub fn new(group_of: Vec<Option<usize>>, num_known_classes: usize) -> Self {
        Self {
            group_of,
            num_known_classes,
        }
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.group_of
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.group_of[i]
    }

    pub fn len(&self) -> usize {
        self.group_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.group_of.is_empty()
    }

    pub fn num_known_classes(&self) -> usize {
        self.num_known_classes
    }

    pub fn num_groups(&self) -> usize {
        estimate_class_count(self)
    }

    pub fn num_unassigned(&self) -> usize {
        self.group_of.iter().filter(|g| g.is_none()).count()
    }

    /// Signed encoding, `-1` for unassigned.
    pub fn to_signed(&self) -> Vec<i64> {
        self.group_of
            .iter()
            .map(|g| g.map_or(-1, |v| v as i64))
            .collect()
    }

    /// Checks the prior constraint: proxy `c` sits in group `c`.
    pub fn check_prior_constraint(&self) -> Result<()> {
        for c in 0..self.num_known_classes.min(self.group_of.len()) {
            if self.group_of[c] != Some(c) {
                return Err(Error::Invariant(format!(
                    "proxy {c} ended in group {:?}",
                    self.group_of[c]
                )));
            }
        }
        Ok(())
    }
}

/// Union-find over nodes with an explicit group id on every root. Merging
/// two groups keeps the smaller id, which is what relabeling every member
/// of the larger id would produce.
struct LabeledForest {
    nodes: Vec<Node>,
}

/// One record per node so a lookup touches a single cache line. `size` and
/// `label` are only meaningful on roots.
#[derive(Clone, Copy)]
struct Node {
    parent: u32,
    size: u32,
    label: u32,
}

const NO_GROUP: u32 = u32::MAX;

impl LabeledForest {
    fn new(n: usize) -> Self {
        Self {
            nodes: (0..n as u32)
                .map(|i| Node { parent: i, size: 1, label: NO_GROUP })
                .collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut x = x as u32;
        let mut root = x;
        while self.nodes[root as usize].parent != root {
            root = self.nodes[root as usize].parent;
        }
        while self.nodes[x as usize].parent != root {
            let next = self.nodes[x as usize].parent;
            self.nodes[x as usize].parent = root;
            x = next;
        }
        root as usize
    }

    fn group(&mut self, x: usize) -> Option<usize> {
        let r = self.find(x);
        match self.nodes[r].label {
            NO_GROUP => None,
            g => Some(g as usize),
        }
    }

    fn set_label(&mut self, root: usize, label: usize) {
        self.nodes[root].label = label as u32;
    }

    /// Attaches `x` (a loose singleton) to the set of `y`.
    fn attach(&mut self, x: usize, y: usize) {
        let ry = self.find(y);
        self.nodes[x].parent = ry as u32;
        self.nodes[ry].size += 1;
    }

    fn union(&mut self, a: usize, b: usize, label: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if self.nodes[ra].size < self.nodes[rb].size {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.nodes[rb].parent = ra as u32;
        self.nodes[ra].size += self.nodes[rb].size;
        self.set_label(ra, label);
    }
}

/// Runs the prior-constrained greedy association over `pairs`.
///
/// Proxies start in their own groups `0..C1` and fresh groups are numbered
/// from `C1` upward in order of creation. Group ids are not compacted after
/// merges.
pub fn greedy_associate(
    pairs: &CandidatePairs,
    num_proxies: usize,
    total_nodes: usize,
) -> Result<Grouping> {
    if num_proxies > total_nodes {
        return Err(Error::dim(format!("{num_proxies} proxies among {total_nodes} nodes")));
    }
    // group ids never exceed the node count, and NO_GROUP must stay free
    if total_nodes >= NO_GROUP as usize {
        return Err(Error::domain(format!("{total_nodes} nodes exceed the supported maximum")));
    }
    let mut forest = LabeledForest::new(total_nodes);
    for c in 0..num_proxies {
        forest.set_label(c, c);
    }
    let mut next_id = num_proxies;
    for p in pairs.as_slice() {
        let (i, j) = (p.i, p.j);
        if i >= total_nodes || j >= total_nodes {
            return Err(Error::dim(format!("pair ({i}, {j}) outside {total_nodes} nodes")));
        }
        match (forest.group(i), forest.group(j)) {
            (None, None) => {
                forest.set_label(i, next_id);
                forest.attach(j, i);
                next_id += 1;
            }
            (Some(_), None) => forest.attach(j, i),
            (None, Some(_)) => forest.attach(i, j),
            (Some(gi), Some(gj)) if gi != gj => {
                // two known classes never share a group
                if gi >= num_proxies || gj >= num_proxies {
                    forest.union(i, j, gi.min(gj));
                }
            }
            _ => {}
        }
    }
    let group_of = (0..total_nodes).map(|x| forest.group(x)).collect();
    Ok(Grouping::new(group_of, num_proxies))
}

/// Number of distinct assigned group ids.
pub fn estimate_class_count(grouping: &Grouping) -> usize {
    let mut ids: Vec<usize> = grouping.as_slice().iter().flatten().copied().collect();
    ids.sort_unstable();
    ids.dedup();
    ids.len()
}

/// Normalized mean feature of each group, keyed by ascending group id.
#[derive(Debug, Clone)]
pub struct GroupCenters {
    ids: Vec<usize>,
    centers: FeatureMatrix,
}

impl GroupCenters {
    /// Centers of the groups in `group_of`, where `group_of[k]` is the group
    /// of row `k` of `feats`. Unassigned rows are ignored.
    pub fn compute(feats: &FeatureMatrix, group_of: &[Option<usize>]) -> Result<Self> {
        if group_of.len() != feats.rows() {
            return Err(Error::dim(format!(
                "{} group ids for {} rows",
                group_of.len(),
                feats.rows()
            )));
        }
        let d = feats.dim();
        let mut sums: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (k, g) in group_of.iter().enumerate() {
            if let Some(g) = g {
                let s = sums.entry(*g).or_insert_with(|| vec![0.0; d]);
                s.iter_mut().zip(feats.row(k)).for_each(|(a, x)| *a += x);
            }
        }
        let ids: Vec<usize> = sums.keys().copied().collect();
        let mut data = Vec::with_capacity(ids.len() * d);
        for (g, mut s) in sums {
            if !normalize_in_place(&mut s) {
                return Err(Error::invalid(format!("members of group {g} average to zero")));
            }
            data.extend(s);
        }
        let centers = FeatureMatrix::new(ids.len(), d, data)?;
        Ok(Self { ids, centers })
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn centers(&self) -> &FeatureMatrix {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Group whose center has the largest cosine similarity to `x`; ties go
    /// to the smaller id.
    pub fn nearest(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (k, &id) in self.ids.iter().enumerate() {
            let s = dot(self.centers.row(k), x);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((id, s));
            }
        }
        best.map(|(id, _)| id)
    }
}

/// Gives every unassigned node the group with the most similar center.
/// Centers are taken from the assigned nodes only.
pub fn assign_unassociated(grouping: &Grouping, hybrid: &HybridSet) -> Result<Grouping> {
    if grouping.len() != hybrid.len() {
        return Err(Error::dim(format!(
            "grouping over {} nodes, hybrid set has {}",
            grouping.len(),
            hybrid.len()
        )));
    }
    if grouping.num_unassigned() == 0 {
        return Ok(grouping.clone());
    }
    let centers = GroupCenters::compute(hybrid.features(), grouping.as_slice())?;
    fill_unassigned(grouping, hybrid.features(), &centers)
}

fn fill_unassigned(
    grouping: &Grouping,
    feats: &FeatureMatrix,
    centers: &GroupCenters,
) -> Result<Grouping> {
    let group_of = grouping
        .as_slice()
        .iter()
        .enumerate()
        .map(|(k, g)| match g {
            Some(g) => Ok(*g),
            None => centers
                .nearest(feats.row(k))
                .ok_or_else(|| Error::domain("no group to assign unassociated nodes to")),
        })
        .map(|r| r.map(Some))
        .collect::<Result<Vec<_>>>()?;
    Ok(Grouping::new(group_of, grouping.num_known_classes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssociationConfig {
    /// Candidate threshold on the Jaccard distance.
    pub threshold: f64,
    pub rerank: RerankParams,
    /// Fraction of unlabeled instances that take part in association.
    pub subset_ratio: f64,
    pub seed: u64,
}

impl Default for AssociationConfig {
    fn default() -> Self {
        Self {
            threshold: 0.35,
            rerank: RerankParams::default(),
            subset_ratio: 1.0,
            seed: 0,
        }
    }
}

impl AssociationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::domain(format!("threshold must be positive, got {}", self.threshold)));
        }
        if !(self.subset_ratio > 0.0 && self.subset_ratio <= 1.0) {
            return Err(Error::domain(format!(
                "subset_ratio must be in (0, 1], got {}",
                self.subset_ratio
            )));
        }
        if self.rerank.k2 < 1 || self.rerank.k2 > self.rerank.k1 {
            return Err(Error::domain("rerank parameters need 1 <= k2 <= k1"));
        }
        Ok(())
    }
}

/// Dataset-level association result.
#[derive(Debug, Clone)]
pub struct Association {
    /// Group of every dataset instance. Known classes keep ids `0..C1`;
    /// discovered groups are renumbered densely from `C1`.
    pub group_of: Vec<usize>,
    /// Centers of the groups formed by direct association, indexed like
    /// `group_of`'s ids.
    pub centers: FeatureMatrix,
    pub num_groups: usize,
    pub num_known_classes: usize,
    pub candidate_pair_count: usize,
    /// Hybrid nodes (among those sampled) that no candidate pair reached.
    pub num_unassigned_before_assign: usize,
    /// True where the instance's group came from a candidate pair (or a
    /// label) rather than nearest-center assignment.
    pub directly_associated: Vec<bool>,
}

impl Association {
    pub fn groups_as_options(&self) -> Vec<Option<usize>> {
        self.group_of.iter().map(|&g| Some(g)).collect()
    }
}

/// Full association pipeline over a dataset.
///
/// Builds proxies, samples `⌈subset_ratio·M⌉` unlabeled instances (at least
/// one when any exist), re-ranks the sampled hybrid set, selects candidates,
/// runs the greedy association, and assigns all remaining unlabeled
/// instances to the nearest group center. Labeled instances always get
/// their class id.
pub fn associate_dataset(
    feats: &FeatureMatrix,
    labels: &PartialLabels,
    cfg: &AssociationConfig,
) -> Result<Association> {
    cfg.validate()?;
    let hybrid = build_hybrid(feats, labels)?;
    let c1 = hybrid.num_proxies();
    let unlabeled = hybrid.unlabeled_index_map();
    let m = unlabeled.len();

    // positions (within the unlabeled block) taking part in association
    let sampled: Vec<usize> = if cfg.subset_ratio >= 1.0 {
        (0..m).collect()
    } else {
        let count = ceil_fraction(cfg.subset_ratio, m).clamp(m.min(1), m);
        let mut s = sample(&mut rng(cfg.seed), m, count).into_vec();
        s.sort_unstable();
        s
    };
    let mut node_rows: Vec<usize> = (0..c1).collect();
    node_rows.extend(sampled.iter().map(|&k| c1 + k));
    let nodes = hybrid.features().select_rows(&node_rows);
    let n = nodes.rows();

    let (grouping, candidate_pair_count) = if n >= 2 {
        let w = k_reciprocal_jaccard(&nodes, cfg.rerank.clipped(n))?;
        let pairs = select_candidates(&w, cfg.threshold, c1)?;
        (greedy_associate(&pairs, c1, n)?, pairs.len())
    } else {
        let g = (0..n).map(|k| (k < c1).then_some(k)).collect();
        (Grouping::new(g, c1), 0)
    };
    grouping.check_prior_constraint()?;
    let num_unassigned_before_assign = grouping.num_unassigned();

    let raw_centers = GroupCenters::compute(&nodes, grouping.as_slice())?;
    if raw_centers.is_empty() && m > 0 {
        return Err(Error::domain(
            "association produced no group; raise the threshold or provide labels",
        ));
    }

    // Raw ids are ascending and include every proxy id 0..C1, so an id's
    // rank is its dense id: known classes keep theirs, fresh groups follow.
    let dense = |raw: usize| raw_centers.ids().binary_search(&raw).unwrap();

    let mut group_of = vec![usize::MAX; feats.rows()];
    let mut direct = vec![false; feats.rows()];
    for (i, l) in labels.as_slice().iter().enumerate() {
        if let Some(c) = l {
            group_of[i] = *c;
            direct[i] = true;
        }
    }
    let mut node_of_unlabeled = vec![None; m];
    for (node, &k) in sampled.iter().enumerate() {
        node_of_unlabeled[k] = Some(c1 + node);
    }
    for (k, &i) in unlabeled.iter().enumerate() {
        let assoc = node_of_unlabeled[k].and_then(|node| grouping.get(node));
        let raw = match assoc {
            Some(g) => {
                direct[i] = true;
                g
            }
            None => raw_centers
                .nearest(feats.row(i))
                .ok_or_else(|| Error::Invariant("no centers for assignment".into()))?,
        };
        group_of[i] = dense(raw);
    }

    let centers = raw_centers.centers().clone();

    let num_groups = {
        let mut ids = group_of.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    };
    Ok(Association {
        group_of,
        centers,
        num_groups,
        num_known_classes: c1,
        candidate_pair_count,
        num_unassigned_before_assign,
        directly_associated: direct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::DistanceKind;

    fn pairs(list: &[(usize, usize, f64)]) -> CandidatePairs {
        CandidatePairs {
            pairs: list
                .iter()
                .map(|&(i, j, distance)| CandidatePair { i, j, distance })
                .collect(),
            threshold: 1.0,
        }
    }

    fn groups(g: &Grouping) -> Vec<i64> {
        g.to_signed()
    }

    #[test]
    fn hybrid_proxy_is_normalized_mean() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = FeatureMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![s, -s]]).unwrap();
        let l = PartialLabels::from_signed(&[0, 0, -1]).unwrap();
        let h = build_hybrid(&x, &l).unwrap();
        assert_eq!(h.num_proxies(), 1);
        assert!((h.features().row(0)[0] - s).abs() < 1e-12);
        assert!((h.features().row(0)[1] - s).abs() < 1e-12);
        assert_eq!(h.features().row(1), x.row(2));
        assert_eq!(h.unlabeled_index_map(), &[2]);
    }

    #[test]
    fn hybrid_single_instance_proxy_and_unsupervised_case() {
        let x = FeatureMatrix::from_rows(&[vec![0.6, 0.8], vec![1.0, 0.0]]).unwrap();
        let h = build_hybrid(&x, &PartialLabels::from_signed(&[-1, 0]).unwrap()).unwrap();
        assert_eq!(h.features().row(0), &[1.0, 0.0]);
        let h = build_hybrid(&x, &PartialLabels::from_signed(&[-1, -1]).unwrap()).unwrap();
        assert_eq!(h.num_proxies(), 0);
        assert_eq!(h.len(), 2);
    }

    fn matrix(n: usize, entries: &[(usize, usize, f64)], fill: f64) -> DistanceMatrix {
        let mut data = vec![fill; n * n];
        for i in 0..n {
            data[i * n + i] = 0.0;
        }
        for &(i, j, d) in entries {
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
        DistanceMatrix::from_dense(n, data, DistanceKind::Jaccard).unwrap()
    }

    #[test]
    fn candidates_empty_when_nothing_below_threshold() {
        let w = matrix(4, &[], 0.9);
        assert!(select_candidates(&w, 0.35, 1).unwrap().is_empty());
    }

    #[test]
    fn candidates_mask_proxy_pairs() {
        let w = matrix(3, &[(0, 1, 0.01)], 0.9);
        assert!(select_candidates(&w, 0.35, 2).unwrap().is_empty());
        assert_eq!(select_candidates(&w, 0.35, 1).unwrap().len(), 1);
    }

    #[test]
    fn candidates_sorted_ascending() {
        let w = matrix(3, &[(0, 2, 0.2), (1, 2, 0.1)], 0.9);
        let p = select_candidates(&w, 0.35, 2).unwrap();
        let ij: Vec<_> = p.as_slice().iter().map(|c| (c.i, c.j)).collect();
        assert_eq!(ij, vec![(1, 2), (0, 2)]);
    }

    #[test]
    fn candidates_ties_are_lexicographic() {
        let w = matrix(4, &[(2, 3, 0.1), (0, 3, 0.1), (1, 2, 0.1), (0, 1, 0.05)], 0.9);
        let p = select_candidates(&w, 0.35, 0).unwrap();
        let ij: Vec<_> = p.as_slice().iter().map(|c| (c.i, c.j)).collect();
        assert_eq!(ij, vec![(0, 1), (0, 3), (1, 2), (2, 3)]);
    }

    #[test]
    fn candidates_reject_nonpositive_threshold() {
        let w = matrix(2, &[], 0.5);
        assert!(select_candidates(&w, 0.0, 0).is_err());
        assert!(select_candidates(&w, -1.0, 0).is_err());
    }

    #[test]
    fn greedy_no_pairs() {
        let g = greedy_associate(&pairs(&[]), 2, 5).unwrap();
        assert_eq!(groups(&g), vec![0, 1, -1, -1, -1]);
    }

    #[test]
    fn greedy_blocks_indirect_false_association() {
        let g = greedy_associate(&pairs(&[(0, 2, 0.10), (2, 3, 0.15), (1, 3, 0.20)]), 2, 5).unwrap();
        assert_eq!(groups(&g), vec![0, 1, 0, 0, -1]);
    }

    #[test]
    fn greedy_opens_and_grows_a_new_group() {
        let g = greedy_associate(&pairs(&[(2, 3, 0.10), (3, 4, 0.12)]), 2, 5).unwrap();
        assert_eq!(groups(&g), vec![0, 1, 2, 2, 2]);
        assert_eq!(estimate_class_count(&g), 3);
    }

    #[test]
    fn greedy_merges_into_smaller_id() {
        // groups 2 = {2,3}, 3 = {4,5}, then 5 joins proxy 0, then 3 bridges 2 into 0
        let p = pairs(&[(2, 3, 0.1), (4, 5, 0.1), (0, 5, 0.2), (3, 4, 0.3), (1, 2, 0.3)]);
        let g = greedy_associate(&p, 2, 6).unwrap();
        assert_eq!(groups(&g), vec![0, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn greedy_rejects_out_of_range_pairs() {
        assert!(greedy_associate(&pairs(&[(0, 7, 0.1)]), 1, 3).is_err());
    }

    #[test]
    fn class_count_counts_distinct_ids() {
        let g = Grouping::new(vec![Some(0), Some(1), Some(0), Some(0), Some(2)], 2);
        assert_eq!(estimate_class_count(&g), 3);
    }

    fn unit(x: f64, y: f64) -> Vec<f64> {
        let n = (x * x + y * y).sqrt();
        vec![x / n, y / n]
    }

    fn hybrid(rows: &[Vec<f64>], c1: usize) -> HybridSet {
        HybridSet {
            features: FeatureMatrix::from_rows(rows).unwrap(),
            num_proxies: c1,
            unlabeled_index_map: (c1..rows.len()).collect(),
        }
    }

    #[test]
    fn assign_is_identity_without_unassigned() {
        let h = hybrid(&[unit(1.0, 0.0), unit(0.0, 1.0)], 1);
        let g = Grouping::new(vec![Some(0), Some(3)], 1);
        assert_eq!(assign_unassociated(&g, &h).unwrap(), g);
    }

    #[test]
    fn assign_single_group_takes_everything() {
        let h = hybrid(&[unit(1.0, 0.0), unit(-1.0, 0.2), unit(0.0, -1.0)], 1);
        let g = Grouping::new(vec![Some(0), None, None], 1);
        assert_eq!(groups(&assign_unassociated(&g, &h).unwrap()), vec![0, 0, 0]);
    }

    #[test]
    fn assign_picks_most_similar_center() {
        let h = hybrid(&[unit(1.0, 0.0), unit(0.0, 1.0), unit(0.9, 0.1)], 2);
        let g = Grouping::new(vec![Some(0), Some(1), None], 2);
        assert_eq!(groups(&assign_unassociated(&g, &h).unwrap()), vec![0, 1, 0]);
        // exact tie goes to the smaller id
        let h = hybrid(&[unit(1.0, 0.0), unit(0.0, 1.0), unit(1.0, 1.0)], 2);
        assert_eq!(groups(&assign_unassociated(&g, &h).unwrap()), vec![0, 1, 0]);
    }

    #[test]
    fn assign_without_groups_is_an_error() {
        let h = hybrid(&[unit(1.0, 0.0)], 0);
        assert!(assign_unassociated(&Grouping::new(vec![None], 0), &h).is_err());
    }
}
