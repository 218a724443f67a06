//! Data model and file formats.
//!
//! Features are kept in memory as `f64` and stored on disk in the PALF
//! binary format (little-endian `f32` payload). Labels, ground truth and
//! group assignments travel as two-column CSV files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::util::{ceil_fraction, norm, normalize_in_place, rng};
use crate::{Error, Result};

/// Allowed deviation of a row norm from 1.
pub const UNIT_NORM_TOL: f64 = 1e-4;

pub const PALF_MAGIC: &[u8; 4] = b"PALF";
pub const PALF_VERSION: u16 = 1;
const PALF_HEADER_LEN: usize = 4 + 2 + 4 + 4;

/// Row-major matrix of unit-length embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    /// Wraps `data` after checking that every entry is finite and every row
    /// has unit norm within [`UNIT_NORM_TOL`].
    pub fn new(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        let m = Self::unchecked(rows, dim, data)?;
        for (i, row) in m.iter_rows().enumerate() {
            let n = norm(row);
            if (n - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::invalid(format!("row {i} has norm {n}, expected 1")));
            }
        }
        Ok(m)
    }

    /// Wraps `data`, scaling every row to unit length.
    pub fn normalized(rows: usize, dim: usize, mut data: Vec<f64>) -> Result<Self> {
        if dim > 0 {
            for (i, row) in data.chunks_mut(dim).enumerate() {
                if !normalize_in_place(row) {
                    return Err(Error::invalid(format!("row {i} has zero norm")));
                }
            }
        }
        Self::unchecked(rows, dim, data)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::dim("ragged rows"));
        }
        Self::new(rows.len(), dim, rows.concat())
    }

    pub fn from_rows_normalized(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::dim("ragged rows"));
        }
        Self::normalized(rows.len(), dim, rows.concat())
    }

    fn unchecked(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::dim(format!(
                "{} values for a {rows}x{dim} matrix",
                data.len()
            )));
        }
        if rows > 0 && dim == 0 {
            return Err(Error::dim("rows of dimension zero"));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at row {}",
                pos / dim.max(1)
            )));
        }
        Ok(Self { rows, dim, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Callers must keep the row unit-norm.
    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks(0) panics, and a 0-row matrix may have dim 0
        self.data.chunks(self.dim.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// New matrix made of the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: indices.len(),
            dim: self.dim,
            data,
        }
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &FeatureMatrix) -> Result<FeatureMatrix> {
        if self.rows > 0 && other.rows > 0 && self.dim != other.dim {
            return Err(Error::dim(format!("cannot stack dim {} on dim {}", other.dim, self.dim)));
        }
        let dim = if self.rows > 0 { self.dim } else { other.dim };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(FeatureMatrix {
            rows: self.rows + other.rows,
            dim,
            data,
        })
    }
}

/// Per-instance known-class label, `None` for unlabeled instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialLabels {
    labels: Vec<Option<usize>>,
    num_known_classes: usize,
}

impl PartialLabels {
    /// Builds labels whose known classes are `0..C1` with `C1 = 1 + max label`.
    /// Every class in that range must have at least one labeled instance.
    pub fn new(labels: Vec<Option<usize>>) -> Result<Self> {
        let num_known_classes = labels.iter().flatten().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; num_known_classes];
        for &l in labels.iter().flatten() {
            seen[l] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!(
                "known class {c} has no labeled instance"
            )));
        }
        Ok(Self {
            labels,
            num_known_classes,
        })
    }

    /// Builds from the signed encoding used on disk: `-1` means unlabeled.
    pub fn from_signed(values: &[i64]) -> Result<Self> {
        let labels = values
            .iter()
            .enumerate()
            .map(|(i, &v)| match v {
                -1 => Ok(None),
                v if v >= 0 => Ok(Some(v as usize)),
                v => Err(Error::invalid(format!("label {v} at index {i} is below -1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.labels[i]
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn num_known_classes(&self) -> usize {
        self.num_known_classes
    }

    pub fn num_labeled(&self) -> usize {
        self.labels.iter().flatten().count()
    }

    pub fn unlabeled_indices(&self) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i].is_none())
            .collect()
    }

    pub fn to_signed(&self) -> Vec<i64> {
        self.labels
            .iter()
            .map(|l| l.map_or(-1, |v| v as i64))
            .collect()
    }

    /// Errors unless there is exactly one label per feature row.
    pub fn check_rows(&self, feats: &FeatureMatrix) -> Result<()> {
        if self.len() != feats.rows() {
            return Err(Error::dim(format!(
                "{} labels for {} feature rows",
                self.len(),
                feats.rows()
            )));
        }
        Ok(())
    }
}

/// The set of ground-truth classes that have at least one labeled instance.
pub fn known_classes(truth: &[usize], labels: &PartialLabels) -> BTreeSet<usize> {
    truth
        .iter()
        .zip(labels.as_slice())
        .filter(|(_, l)| l.is_some())
        .map(|(&t, _)| t)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub known_class_ratio: f64,
    pub labeled_sample_ratio: f64,
    pub seed: u64,
}

impl DatasetSplit {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("known_class_ratio", self.known_class_ratio),
            ("labeled_sample_ratio", self.labeled_sample_ratio),
        ] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::domain(format!("{name} must be in (0, 1], got {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub num_classes: usize,
    pub points_per_class: usize,
    pub ambient_dim: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::domain("num_classes must be at least 2"));
        }
        if self.points_per_class < 2 {
            return Err(Error::domain("points_per_class must be at least 2"));
        }
        if self.ambient_dim < 2 {
            return Err(Error::domain("ambient_dim must be at least 2"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::domain("noise_sigma must be a finite nonnegative number"));
        }
        Ok(())
    }
}

/// Draws class means uniformly on the unit sphere and perturbs them with
/// isotropic Gaussian noise, renormalizing every sample.
///
/// Rows are ordered class by class; the returned labels are the class ids.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(FeatureMatrix, Vec<usize>)> {
    spec.validate()?;
    let d = spec.ambient_dim;
    let mut rng = rng(spec.seed);
    let mut means = Vec::with_capacity(spec.num_classes);
    while means.len() < spec.num_classes {
        let mut m: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        if normalize_in_place(&mut m) {
            means.push(m);
        }
    }

    let n = spec.num_classes * spec.points_per_class;
    let mut data = Vec::with_capacity(n * d);
    let mut truth = Vec::with_capacity(n);
    for (c, mean) in means.iter().enumerate() {
        for _ in 0..spec.points_per_class {
            if spec.noise_sigma == 0.0 {
                data.extend_from_slice(mean);
            } else {
                let mut x: Vec<f64> = mean
                    .iter()
                    .map(|&m| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        m + spec.noise_sigma * z
                    })
                    .collect();
                if !normalize_in_place(&mut x) {
                    return Err(Error::Invariant("sampled a zero vector".into()));
                }
                data.extend_from_slice(&x);
            }
            truth.push(c);
        }
    }
    Ok((FeatureMatrix::new(n, d, data)?, truth))
}

/// Chooses the known classes and, within them, the labeled instances.
///
/// `⌈known_class_ratio·C⌉` classes become known and are renumbered
/// `0..C1` in ascending order of their original id; within each known class
/// `⌈labeled_sample_ratio·n_c⌉` instances get labeled.
pub fn make_split(truth: &[usize], split: &DatasetSplit) -> Result<PartialLabels> {
    split.validate()?;
    if truth.is_empty() {
        return Err(Error::domain("ground truth is empty"));
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in truth.iter().enumerate() {
        members.entry(c).or_default().push(i);
    }
    let mut rng = rng(split.seed);
    let mut classes: Vec<usize> = members.keys().copied().collect();
    classes.shuffle(&mut rng);
    let num_known = ceil_fraction(split.known_class_ratio, classes.len()).min(classes.len());
    let mut known: Vec<usize> = classes[..num_known].to_vec();
    known.sort_unstable();

    let mut labels = vec![None; truth.len()];
    for (new_id, c) in known.iter().enumerate() {
        let mut idx = members[c].clone();
        idx.shuffle(&mut rng);
        let take = ceil_fraction(split.labeled_sample_ratio, idx.len()).min(idx.len());
        for &i in &idx[..take] {
            labels[i] = Some(new_id);
        }
    }
    PartialLabels::new(labels)
}

/// Writes `matrix` in PALF format. Values are narrowed to `f32`.
pub fn save_features(matrix: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_palf(matrix.rows(), matrix.dim(), matrix.as_slice()))
        .map_err(|e| Error::io(path, e))
}

/// PALF bytes for an arbitrary row-major `rows × cols` block. Used for
/// weight matrices too, which are not unit-row.
pub fn encode_palf(rows: usize, cols: usize, values: &[f64]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(PALF_HEADER_LEN + 4 * values.len());
    buf.extend_from_slice(PALF_MAGIC);
    buf.extend_from_slice(&PALF_VERSION.to_le_bytes());
    buf.extend_from_slice(&(rows as u32).to_le_bytes());
    buf.extend_from_slice(&(cols as u32).to_le_bytes());
    for &v in values {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    buf
}

/// Reads a PALF file.
///
/// Rows whose norm is off by more than [`UNIT_NORM_TOL`] are an error unless
/// `normalize` is set, in which case those rows (and only those) are scaled
/// to unit length. Zero rows are always an error.
pub fn load_features(path: impl AsRef<Path>, normalize: bool) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (rows, cols, mut data) = decode_palf(&bytes).map_err(|msg| Error::format(path, msg))?;
    for i in 0..rows {
        let row = &mut data[i * cols..(i + 1) * cols];
        let n = norm(row);
        if n == 0.0 {
            return Err(Error::format(path, format!("row {i} has zero norm")));
        }
        if (n - 1.0).abs() > UNIT_NORM_TOL {
            if !normalize {
                return Err(Error::format(
                    path,
                    format!("row {i} has norm {n}; pass the normalize flag to rescale"),
                ));
            }
            row.iter_mut().for_each(|x| *x /= n);
        }
    }
    FeatureMatrix::new(rows, cols, data).map_err(|e| Error::format(path, e.to_string()))
}

fn decode_palf(bytes: &[u8]) -> std::result::Result<(usize, usize, Vec<f64>), String> {
    if bytes.len() < PALF_HEADER_LEN {
        return Err("truncated header".into());
    }
    if &bytes[0..4] != PALF_MAGIC {
        return Err(format!("bad magic {:?}", String::from_utf8_lossy(&bytes[0..4])));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != PALF_VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let rows = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or("header size overflow")?;
    let payload = &bytes[PALF_HEADER_LEN..];
    if payload.len() < expected {
        return Err(format!(
            "truncated payload: {} bytes, expected {expected}",
            payload.len()
        ));
    }
    if payload.len() > expected {
        return Err(format!("{} trailing bytes", payload.len() - expected));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (k, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(format!("non-finite value at row {}", k / cols.max(1)));
        }
        data.push(v as f64);
    }
    Ok((rows, cols, data))
}

/// Reads an `index,<value>` CSV into a dense vector indexed by `index`.
/// Indices must cover `0..n` exactly once.
fn read_indexed_csv(path: &Path, value_col: &str) -> Result<Vec<i64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    if headers.len() != 2 || &headers[0] != "index" || &headers[1] != value_col {
        return Err(Error::format(
            path,
            format!("expected header `index,{value_col}`"),
        ));
    }
    let mut by_index: BTreeMap<usize, i64> = BTreeMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| Error::format(path, format!("record {}: bad integer {s:?}", line + 1)))
        };
        let idx = parse(&rec[0])?;
        let val = parse(&rec[1])?;
        if idx < 0 {
            return Err(Error::format(path, format!("negative index {idx}")));
        }
        if by_index.insert(idx as usize, val).is_some() {
            return Err(Error::format(path, format!("duplicate index {idx}")));
        }
    }
    let n = by_index.len();
    if let Some((&last, _)) = by_index.last_key_value() {
        if last >= n {
            return Err(Error::format(
                path,
                format!("index {last} out of range for {n} records"),
            ));
        }
    }
    Ok(by_index.into_values().collect())
}

/// Reads a label CSV (`index,label`, `-1` for unlabeled). When `rows` is
/// given the file must describe exactly that many instances.
pub fn load_labels(path: impl AsRef<Path>, rows: Option<usize>) -> Result<PartialLabels> {
    let path = path.as_ref();
    let values = read_indexed_csv(path, "label")?;
    if let Some(r) = rows {
        if values.len() != r {
            return Err(Error::format(
                path,
                format!("{} labels for {r} feature rows", values.len()),
            ));
        }
    }
    PartialLabels::from_signed(&values).map_err(|e| Error::format(path, e.to_string()))
}

pub fn save_labels(labels: &PartialLabels, path: impl AsRef<Path>) -> Result<()> {
    write_indexed_csv(path.as_ref(), "label", &labels.to_signed())
}

/// Ground truth uses the label CSV shape, with no `-1` entries.
pub fn load_truth(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    read_indexed_csv(path, "label")?
        .into_iter()
        .map(|v| {
            usize::try_from(v)
                .map_err(|_| Error::format(path, format!("negative class id {v}")))
        })
        .collect()
}

pub fn save_truth(truth: &[usize], path: impl AsRef<Path>) -> Result<()> {
    let v: Vec<i64> = truth.iter().map(|&t| t as i64).collect();
    write_indexed_csv(path.as_ref(), "label", &v)
}

/// Reads an `index,group` CSV. `-1` (noise / unassigned) maps to `None`.
pub fn load_groups(path: impl AsRef<Path>) -> Result<Vec<Option<usize>>> {
    let path = path.as_ref();
    read_indexed_csv(path, "group")?
        .into_iter()
        .map(|v| match v {
            -1 => Ok(None),
            v if v >= 0 => Ok(Some(v as usize)),
            v => Err(Error::format(path, format!("group id {v} is below -1"))),
        })
        .collect()
}

pub fn save_groups(groups: &[Option<usize>], path: impl AsRef<Path>) -> Result<()> {
    let v: Vec<i64> = groups.iter().map(|g| g.map_or(-1, |x| x as i64)).collect();
    write_indexed_csv(path.as_ref(), "group", &v)
}

fn write_indexed_csv(path: &Path, value_col: &str, values: &[i64]) -> Result<()> {
    let mut out = Vec::with_capacity(16 + values.len() * 8);
    writeln!(out, "index,{value_col}").unwrap();
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{v}").unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::dot;

    fn spec(c: usize, n: usize, d: usize, sigma: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            num_classes: c,
            points_per_class: n,
            ambient_dim: d,
            noise_sigma: sigma,
            seed,
        }
    }

    #[test]
    fn zero_noise_rows_equal_their_class_mean() {
        let (x, truth) = generate_synthetic(&spec(2, 3, 4, 0.0, 1)).unwrap();
        assert_eq!(x.rows(), 6);
        assert_eq!(truth, vec![0, 0, 0, 1, 1, 1]);
        for i in 0..6 {
            let first = if i < 3 { 0 } else { 3 };
            assert_eq!(x.row(i), x.row(first));
        }
        assert_ne!(x.row(0), x.row(3));
    }

    #[test]
    fn synthetic_is_deterministic() {
        let s = spec(20, 50, 32, 0.3, 7);
        let a = generate_synthetic(&s).unwrap();
        let b = generate_synthetic(&s).unwrap();
        assert_eq!(a.1, b.1);
        let bits = |m: &FeatureMatrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.0), bits(&b.0));
    }

    #[test]
    fn synthetic_within_class_more_similar_than_across() {
        let (x, truth) = generate_synthetic(&spec(3, 10, 8, 0.05, 3)).unwrap();
        let (mut within, mut nw, mut across, mut na) = (0.0, 0, 0.0, 0);
        for i in 0..x.rows() {
            for j in (i + 1)..x.rows() {
                let s = dot(x.row(i), x.row(j));
                if truth[i] == truth[j] {
                    within += s;
                    nw += 1;
                } else {
                    across += s;
                    na += 1;
                }
            }
        }
        assert!(within / nw as f64 > across / na as f64);
    }

    #[test]
    fn synthetic_rejects_bad_spec() {
        assert!(generate_synthetic(&spec(2, 3, 1, 0.1, 0)).is_err());
        assert!(generate_synthetic(&spec(2, 1, 4, 0.1, 0)).is_err());
        assert!(generate_synthetic(&spec(1, 3, 4, 0.1, 0)).is_err());
        assert!(generate_synthetic(&spec(2, 3, 4, -0.1, 0)).is_err());
    }

    fn truth(classes: usize, per: usize) -> Vec<usize> {
        (0..classes * per).map(|i| i / per).collect()
    }

    fn split(k: f64, l: f64) -> DatasetSplit {
        DatasetSplit {
            known_class_ratio: k,
            labeled_sample_ratio: l,
            seed: 11,
        }
    }

    #[test]
    fn full_supervision_labels_everything() {
        let t = truth(4, 5);
        let labels = make_split(&t, &split(1.0, 1.0)).unwrap();
        assert_eq!(labels.num_known_classes(), 4);
        assert_eq!(labels.num_labeled(), 20);
        // ascending renumbering of all classes is the identity
        for (i, &c) in t.iter().enumerate() {
            assert_eq!(labels.get(i), Some(c));
        }
    }

    #[test]
    fn split_counts_follow_ceiling_rule() {
        let labels = make_split(&truth(20, 50), &split(0.5, 0.5)).unwrap();
        assert_eq!(labels.num_known_classes(), 10);
        assert_eq!(labels.num_labeled(), 250);

        let labels = make_split(&truth(20, 40), &split(0.25, 0.25)).unwrap();
        assert_eq!(labels.num_known_classes(), 5);
        assert_eq!(labels.num_labeled(), 50);
    }

    #[test]
    fn split_relabeling_is_dense_and_consistent() {
        let t = truth(9, 7);
        let labels = make_split(&t, &split(0.4, 0.3)).unwrap();
        let mut map: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, l) in labels.as_slice().iter().enumerate() {
            if let Some(l) = l {
                let prev = map.insert(*l, t[i]);
                assert!(prev.is_none() || prev == Some(t[i]));
            }
        }
        assert_eq!(map.keys().copied().collect::<Vec<_>>(), (0..4).collect::<Vec<_>>());
        let originals: BTreeSet<_> = map.values().collect();
        assert_eq!(originals.len(), 4);
        assert_eq!(make_split(&t, &split(0.4, 0.3)).unwrap(), labels);
    }

    #[test]
    fn split_rejects_bad_ratios() {
        assert!(make_split(&truth(2, 2), &split(0.0, 0.5)).is_err());
        assert!(make_split(&truth(2, 2), &split(0.5, 1.5)).is_err());
        assert!(make_split(&[], &split(0.5, 0.5)).is_err());
    }

    #[test]
    fn labels_require_every_known_class() {
        assert!(PartialLabels::from_signed(&[0, 2, -1]).is_err());
        assert!(PartialLabels::from_signed(&[0, -2]).is_err());
        let l = PartialLabels::from_signed(&[-1, 0, 1]).unwrap();
        assert_eq!(l.num_known_classes(), 2);
        assert_eq!(l.unlabeled_indices(), vec![0]);
        let l = PartialLabels::from_signed(&[-1, -1]).unwrap();
        assert_eq!(l.num_known_classes(), 0);
    }

    #[test]
    fn feature_matrix_rejects_non_unit_and_non_finite() {
        assert!(FeatureMatrix::new(1, 2, vec![0.5, 0.0]).is_err());
        assert!(FeatureMatrix::new(1, 2, vec![f64::NAN, 1.0]).is_err());
        assert!(FeatureMatrix::normalized(1, 2, vec![0.0, 0.0]).is_err());
        let m = FeatureMatrix::normalized(1, 2, vec![3.0, 4.0]).unwrap();
        assert_eq!(m.row(0), &[0.6, 0.8]);
    }
}
