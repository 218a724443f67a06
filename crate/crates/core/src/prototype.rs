//! Non-parametric prototype learning: a memory of unit-norm group
//! prototypes, the temperature-scaled contrastive loss against it, the
//! moving-average memory update, a PK batch sampler, and a toy trainer that
//! alternates association with representation learning.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::association::{associate_dataset, AssociationConfig};
use crate::distance::RerankParams;
use crate::evaluation::{acc_report, AccReport};
use crate::features::{known_classes, FeatureMatrix, PartialLabels};
use crate::util::{dot, normalize_in_place, rng};
use crate::{Error, Result};

pub const DEFAULT_TEMPERATURE: f64 = 0.05;
pub const DEFAULT_MOMENTUM: f64 = 0.2;

/// One unit-norm prototype per group.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxyMemory {
    prototypes: FeatureMatrix,
    momentum: f64,
    temperature: f64,
}

impl ProxyMemory {
    pub fn new(prototypes: FeatureMatrix, momentum: f64, temperature: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&momentum) {
            return Err(Error::domain(format!("momentum must be in [0, 1], got {momentum}")));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::domain(format!("temperature must be positive, got {temperature}")));
        }
        for (c, row) in prototypes.iter_rows().enumerate() {
            if (dot(row, row).sqrt() - 1.0).abs() > 1e-6 {
                return Err(Error::invalid(format!("prototype {c} is not unit-norm")));
            }
        }
        Ok(Self {
            prototypes,
            momentum,
            temperature,
        })
    }

    pub fn prototypes(&self) -> &FeatureMatrix {
        &self.prototypes
    }

    pub fn num_prototypes(&self) -> usize {
        self.prototypes.rows()
    }

    pub fn dim(&self) -> usize {
        self.prototypes.dim()
    }

    pub fn momentum(&self) -> f64 {
        self.momentum
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn row(&self, g: usize) -> &[f64] {
        self.prototypes.row(g)
    }

    /// Softmax over `K f / τ`.
    pub fn probabilities(&self, feature: &[f64]) -> Vec<f64> {
        let logits: Vec<f64> = self
            .prototypes
            .iter_rows()
            .map(|k| dot(k, feature) / self.temperature)
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / z).collect()
    }
}

/// Prototype `g` is the normalized mean of the rows assigned to group `g`.
/// Group ids must be dense: every id below the maximum needs a member.
pub fn init_memory(
    feats: &FeatureMatrix,
    group_of: &[usize],
    momentum: f64,
    temperature: f64,
) -> Result<ProxyMemory> {
    if group_of.len() != feats.rows() {
        return Err(Error::dim(format!(
            "{} group ids for {} rows",
            group_of.len(),
            feats.rows()
        )));
    }
    let Some(&max) = group_of.iter().max() else {
        return Err(Error::domain("no groups to build a memory from"));
    };
    let g = max + 1;
    let d = feats.dim();
    let mut sums = vec![0.0; g * d];
    let mut counts = vec![0usize; g];
    for (i, &grp) in group_of.iter().enumerate() {
        counts[grp] += 1;
        sums[grp * d..(grp + 1) * d]
            .iter_mut()
            .zip(feats.row(i))
            .for_each(|(s, x)| *s += x);
    }
    if let Some(e) = counts.iter().position(|&c| c == 0) {
        return Err(Error::invalid(format!("group {e} has no members")));
    }
    for k in 0..g {
        if !normalize_in_place(&mut sums[k * d..(k + 1) * d]) {
            return Err(Error::invalid(format!("members of group {k} average to zero")));
        }
    }
    ProxyMemory::new(FeatureMatrix::new(g, d, sums)?, momentum, temperature)
}

/// Contrastive loss of a batch against the memory and its gradient with
/// respect to each batch feature.
///
/// `loss = -(1/B) Σ_i log softmax(K f_i / τ)[y_i]`, and row `i` of the
/// gradient is `(Σ_j p_ij K_j − K_{y_i}) / (τ B)`. `features` is row-major
/// `B × d`; the vectors are used as given (not renormalized).
pub fn npa_loss_and_grad(
    memory: &ProxyMemory,
    features: &[f64],
    labels: &[usize],
) -> Result<(f64, Vec<f64>)> {
    let d = memory.dim();
    let b = labels.len();
    if features.len() != b * d {
        return Err(Error::dim(format!(
            "{} feature values for a batch of {b} in dimension {d}",
            features.len()
        )));
    }
    let c = memory.num_prototypes();
    if let Some(&bad) = labels.iter().find(|&&y| y >= c) {
        return Err(Error::domain(format!("label {bad} outside memory of {c} prototypes")));
    }
    if b == 0 {
        return Ok((0.0, Vec::new()));
    }
    let tau = memory.temperature();
    let mut loss = 0.0;
    let mut grad = vec![0.0; b * d];
    for (i, &y) in labels.iter().enumerate() {
        let f = &features[i * d..(i + 1) * d];
        let logits: Vec<f64> = memory.prototypes.iter_rows().map(|k| dot(k, f) / tau).collect();
        // log-sum-exp as max + ln(1 + s), with s summing every term but the
        // largest, so a confident prediction keeps full relative precision
        let top = (0..c).fold(0, |a, j| if logits[j] > logits[a] { j } else { a });
        let max = logits[top];
        let s: f64 = (0..c)
            .filter(|&j| j != top)
            .map(|j| (logits[j] - max).exp())
            .sum();
        loss += (max - logits[y]) + s.ln_1p();

        let g = &mut grad[i * d..(i + 1) * d];
        for (j, l) in logits.iter().enumerate() {
            let p = (l - max).exp() / (1.0 + s);
            g.iter_mut().zip(memory.row(j)).for_each(|(a, k)| *a += p * k);
        }
        g.iter_mut().zip(memory.row(y)).for_each(|(a, k)| *a -= k);
        let s = 1.0 / (tau * b as f64);
        g.iter_mut().for_each(|a| *a *= s);
    }
    Ok((loss / b as f64, grad))
}

/// `K[label] ← normalize(μ K[label] + (1 − μ) feature)`. Other rows are
/// untouched.
pub fn ema_update(memory: &mut ProxyMemory, feature: &[f64], label: usize) -> Result<()> {
    let c = memory.num_prototypes();
    if label >= c {
        return Err(Error::domain(format!("label {label} outside memory of {c} prototypes")));
    }
    let d = memory.dim();
    if feature.len() != d {
        return Err(Error::dim(format!("feature of length {} for dimension {d}", feature.len())));
    }
    let mu = memory.momentum;
    let mut row: Vec<f64> = memory
        .row(label)
        .iter()
        .zip(feature)
        .map(|(k, f)| mu * k + (1.0 - mu) * f)
        .collect();
    if !normalize_in_place(&mut row) {
        // antipodal cancellation; leave the prototype where it was
        return Ok(());
    }
    memory.prototypes.row_mut(label).copy_from_slice(&row);
    Ok(())
}

/// A mini-batch of dataset indices with their pseudo-labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Batch {
    pub indices: Vec<usize>,
    pub labels: Vec<usize>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// PK sampling for one epoch.
///
/// The epoch is a sequence of rounds. A round shuffles all non-empty groups
/// and cuts the permutation into `⌈G/P⌉` batches of `P` distinct groups;
/// a short last batch is topped up with other groups drawn at random.
/// Each selected group contributes `K` members, drawn without replacement
/// when it has at least `K` and with replacement otherwise. Enough rounds
/// are run for the epoch to draw roughly one sample per instance.
pub fn pk_sample(group_of: &[usize], p: usize, k: usize, seed: u64) -> Result<Vec<Batch>> {
    if p == 0 || k == 0 {
        return Err(Error::domain("P and K must be positive"));
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &g) in group_of.iter().enumerate() {
        members.entry(g).or_default().push(i);
    }
    let groups: Vec<usize> = members.keys().copied().collect();
    if groups.len() < p {
        return Err(Error::domain(format!(
            "{} groups cannot fill batches of {p} distinct groups",
            groups.len()
        )));
    }
    let per_round = groups.len().div_ceil(p);
    let rounds = group_of.len().div_ceil(per_round * p * k).max(1);
    let mut rng = rng(seed);
    let mut batches = Vec::with_capacity(rounds * per_round);
    for _ in 0..rounds {
        let mut order = groups.clone();
        order.shuffle(&mut rng);
        for chunk in order.chunks(p) {
            let mut chosen: Vec<usize> = chunk.to_vec();
            if chosen.len() < p {
                let taken: BTreeSet<usize> = chosen.iter().copied().collect();
                let mut rest: Vec<usize> =
                    groups.iter().copied().filter(|g| !taken.contains(g)).collect();
                rest.shuffle(&mut rng);
                chosen.extend_from_slice(&rest[..p - chosen.len()]);
            }
            let mut batch = Batch {
                indices: Vec::with_capacity(p * k),
                labels: Vec::with_capacity(p * k),
            };
            for g in chosen {
                let m = &members[&g];
                if m.len() >= k {
                    batch.indices.extend(m.choose_multiple(&mut rng, k).copied());
                } else {
                    batch.indices.extend((0..k).map(|_| m[rng.gen_range(0..m.len())]));
                }
                batch.labels.extend(std::iter::repeat_n(g, k));
            }
            batches.push(batch);
        }
    }
    Ok(batches)
}

/// Linear embedding followed by normalization: `x ↦ Wx / ‖Wx‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    /// Row-major `d_out × d_in`.
    weights: Vec<f64>,
    d_in: usize,
    d_out: usize,
}

impl ToyModel {
    pub fn new(d_out: usize, d_in: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != d_out * d_in {
            return Err(Error::dim("weight count does not match d_out x d_in"));
        }
        if d_in == 0 || d_out == 0 {
            return Err(Error::dim("zero-sized model"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("non-finite weight"));
        }
        Ok(Self {
            weights,
            d_in,
            d_out,
        })
    }

    /// Identity on the first `min(d_in, d_out)` coordinates.
    pub fn identity(d_out: usize, d_in: usize) -> Self {
        let mut w = vec![0.0; d_out * d_in];
        for i in 0..d_out.min(d_in) {
            w[i * d_in + i] = 1.0;
        }
        Self {
            weights: w,
            d_in,
            d_out,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        self.weights.chunks(self.d_in).map(|w| dot(w, x)).collect()
    }

    /// Embeds every row. Fails if some row projects to zero.
    pub fn embed(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.dim() != self.d_in {
            return Err(Error::dim(format!("input dim {} for model d_in {}", x.dim(), self.d_in)));
        }
        let mut data = Vec::with_capacity(x.rows() * self.d_out);
        for row in x.iter_rows() {
            data.extend(self.project(row));
        }
        FeatureMatrix::normalized(x.rows(), self.d_out, data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub threshold: f64,
    pub temperature: f64,
    pub momentum: f64,
    pub subset_ratio: f64,
    pub rerank: RerankParams,
    pub seed: u64,
    pub epochs: usize,
    pub lr: f64,
    /// Pseudo-classes per batch (P).
    pub pk_classes: usize,
    /// Instances per pseudo-class (K).
    pub pk_instances: usize,
    /// Also train on instances whose group came from nearest-center
    /// assignment rather than direct association.
    pub include_assigned: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            threshold: 0.35,
            temperature: DEFAULT_TEMPERATURE,
            momentum: DEFAULT_MOMENTUM,
            subset_ratio: 1.0,
            rerank: RerankParams::default(),
            seed: 0,
            epochs: 30,
            lr: 0.05,
            pk_classes: 8,
            pk_instances: 16,
            include_assigned: true,
        }
    }
}

impl TrainConfig {
    pub fn association(&self, epoch: usize) -> AssociationConfig {
        AssociationConfig {
            threshold: self.threshold,
            rerank: self.rerank,
            subset_ratio: self.subset_ratio,
            seed: self.seed.wrapping_add(epoch as u64),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.association(0).validate()?;
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::domain("learning rate must be finite and nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.momentum) {
            return Err(Error::domain("momentum must be in [0, 1]"));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::domain("temperature must be positive"));
        }
        if self.pk_classes == 0 || self.pk_instances == 0 {
            return Err(Error::domain("P and K must be positive"));
        }
        Ok(())
    }
}

/// One line of training history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean batch loss over the epoch.
    pub loss: f64,
    /// Accuracy of the association the epoch trained on; `None` without
    /// ground truth.
    pub all_acc: Option<f64>,
    pub old_acc: Option<f64>,
    pub new_acc: Option<f64>,
    pub num_groups: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ToyModel,
    /// Association on the final embedding.
    pub final_groups: Vec<usize>,
    pub final_report: Option<AccReport>,
    pub history: Vec<EpochRecord>,
}

/// Alternates association and representation learning.
///
/// Each epoch embeds all instances, associates them, builds the memory from
/// the groups, then runs PK batches: contrastive loss on the embeddings,
/// backpropagation through the normalization into `W`, a plain gradient
/// step, and a moving-average update of each instance's prototype. After
/// the last epoch the final embedding is associated once more.
///
/// When `truth` is given, every epoch and the final association are scored.
pub fn train_stage1(
    raw: &FeatureMatrix,
    labels: &PartialLabels,
    truth: Option<&[usize]>,
    mut model: ToyModel,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    labels.check_rows(raw)?;
    if let Some(t) = truth {
        if t.len() != raw.rows() {
            return Err(Error::dim("ground truth length differs from feature rows"));
        }
    }
    let known = truth.map(|t| known_classes(t, labels));
    let score = |groups: &[usize]| -> Result<Option<AccReport>> {
        match (truth, &known) {
            (Some(t), Some(k)) if labels.num_labeled() < labels.len() => {
                acc_report(groups, t, labels, k).map(Some)
            }
            _ => Ok(None),
        }
    };

    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let emb = model.embed(raw)?;
        let assoc = associate_dataset(&emb, labels, &cfg.association(epoch))?;
        let report = score(&assoc.group_of)?;
        let mut memory = init_memory(&emb, &assoc.group_of, cfg.momentum, cfg.temperature)?;

        let (sample_groups, sample_index): (Vec<usize>, Vec<usize>) = (0..raw.rows())
            .filter(|&i| cfg.include_assigned || assoc.directly_associated[i])
            .map(|i| (assoc.group_of[i], i))
            .unzip();
        let distinct = sample_groups.iter().collect::<BTreeSet<_>>().len();
        let p = cfg.pk_classes.min(distinct);
        let batches = if p == 0 {
            Vec::new()
        } else {
            let seed = cfg.seed.wrapping_mul(0x9E37_79B9).wrapping_add(epoch as u64);
            pk_sample(&sample_groups, p, cfg.pk_instances, seed)?
        };

        let mut loss_sum = 0.0;
        for batch in &batches {
            let idx: Vec<usize> = batch.indices.iter().map(|&k| sample_index[k]).collect();
            loss_sum += train_batch(&mut model, &mut memory, raw, &idx, &batch.labels, cfg.lr)?;
        }
        let loss = if batches.is_empty() {
            0.0
        } else {
            loss_sum / batches.len() as f64
        };
        history.push(EpochRecord {
            epoch,
            loss,
            all_acc: report.as_ref().map(|r| r.all_acc),
            old_acc: report.as_ref().map(|r| r.old_acc),
            new_acc: report.as_ref().map(|r| r.new_acc),
            num_groups: assoc.num_groups,
        });
    }

    let emb = model.embed(raw)?;
    let assoc = associate_dataset(&emb, labels, &cfg.association(cfg.epochs))?;
    let final_report = score(&assoc.group_of)?;
    Ok(TrainOutcome {
        model,
        final_groups: assoc.group_of,
        final_report,
        history,
    })
}

/// Batch loss, embedded batch features and the loss gradient with respect
/// to the model weights, backpropagated through `normalize(Wx)`.
fn forward_backward(
    model: &ToyModel,
    memory: &ProxyMemory,
    raw: &FeatureMatrix,
    indices: &[usize],
    labels: &[usize],
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let (d_in, d_out) = (model.d_in, model.d_out);
    let mut feats = Vec::with_capacity(indices.len() * d_out);
    let mut norms = Vec::with_capacity(indices.len());
    for &i in indices {
        let mut z = model.project(raw.row(i));
        let n = dot(&z, &z).sqrt();
        if !(n > 0.0) {
            return Err(Error::invalid(format!("instance {i} embeds to the zero vector")));
        }
        z.iter_mut().for_each(|v| *v /= n);
        feats.extend(z);
        norms.push(n);
    }
    let (loss, grad_f) = npa_loss_and_grad(memory, &feats, labels)?;

    let mut grad_w = vec![0.0; d_out * d_in];
    for (b, &i) in indices.iter().enumerate() {
        let f = &feats[b * d_out..(b + 1) * d_out];
        let gf = &grad_f[b * d_out..(b + 1) * d_out];
        // d normalize(z) / dz = (I - f fᵀ) / ‖z‖
        let proj = dot(f, gf);
        let x = raw.row(i);
        for r in 0..d_out {
            let gz = (gf[r] - proj * f[r]) / norms[b];
            if gz != 0.0 {
                grad_w[r * d_in..(r + 1) * d_in]
                    .iter_mut()
                    .zip(x)
                    .for_each(|(g, xv)| *g += gz * xv);
            }
        }
    }
    Ok((loss, feats, grad_w))
}

/// SGD step on the weights, then EMA of the memory with the forward-pass
/// features. Returns the batch loss.
fn train_batch(
    model: &mut ToyModel,
    memory: &mut ProxyMemory,
    raw: &FeatureMatrix,
    indices: &[usize],
    labels: &[usize],
    lr: f64,
) -> Result<f64> {
    let (loss, feats, grad_w) = forward_backward(model, memory, raw, indices, labels)?;
    if lr > 0.0 {
        model
            .weights
            .iter_mut()
            .zip(&grad_w)
            .for_each(|(w, g)| *w -= lr * g);
        if model.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Invariant("weights diverged".into()));
        }
    }
    let d_out = model.d_out;
    for (b, &y) in labels.iter().enumerate() {
        ema_update(memory, &feats[b * d_out..(b + 1) * d_out], y)?;
    }
    Ok(loss)
}
