//! Timing of the two association stages and log-log scaling fits.
//!
//! The distance stage covers everything up to a sorted candidate list
//! (cosine matrix, re-ranking, thresholding and sorting). The greedy stage
//! is the pass over the candidates.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::association::{build_hybrid, greedy_associate, select_candidates, CandidatePairs};
use crate::distance::{cosine_distance_matrix, k_reciprocal_jaccard_from_cosine, RerankParams};
use crate::features::{generate_synthetic, make_split, DatasetSplit, FeatureMatrix, SyntheticSpec};
use crate::{Error, Result};

pub const MIN_BENCH_SIZE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub reps: usize,
    pub seed: u64,
    pub threshold: f64,
    pub rerank: RerankParams,
    pub points_per_class: usize,
    pub dim: usize,
    pub sigma: f64,
    /// Minimum wall time per greedy-stage measurement; short runs are
    /// repeated until they reach it and the mean is taken.
    pub min_greedy_time_ms: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            reps: 5,
            seed: 0,
            threshold: 0.35,
            rerank: RerankParams::default(),
            points_per_class: 50,
            dim: 128,
            // noise norm about 0.85, as with sigma 0.15 in 32 dimensions
            sigma: 0.075,
            min_greedy_time_ms: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchPoint {
    pub n: usize,
    pub hybrid_nodes: usize,
    pub candidate_pair_count: usize,
    pub distance_ms: f64,
    pub greedy_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub points: Vec<BenchPoint>,
    /// Slope of log(distance time) against log(N); absent for one size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_slope: Option<f64>,
    /// Slope of log(greedy time) against log(candidate pair count).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub greedy_slope: Option<f64>,
}

/// Hybrid node set and proxy count for a synthetic dataset of `n`
/// instances, about `points_per_class` per class, half the classes known
/// and half of their instances labeled.
fn bench_data(n: usize, cfg: &BenchConfig) -> Result<(FeatureMatrix, usize)> {
    let classes = n.div_ceil(cfg.points_per_class).max(2);
    let per = n.div_ceil(classes);
    let (x, truth) = generate_synthetic(&SyntheticSpec {
        num_classes: classes,
        points_per_class: per,
        ambient_dim: cfg.dim,
        noise_sigma: cfg.sigma,
        seed: cfg.seed.wrapping_add(n as u64),
    })?;
    let x = x.select_rows(&(0..n).collect::<Vec<_>>());
    let labels = make_split(
        &truth[..n],
        &DatasetSplit {
            known_class_ratio: 0.5,
            labeled_sample_ratio: 0.5,
            seed: cfg.seed,
        },
    )?;
    let hybrid = build_hybrid(&x, &labels)?;
    Ok((hybrid.features().clone(), hybrid.num_proxies()))
}

fn distance_stage(nodes: &FeatureMatrix, c1: usize, cfg: &BenchConfig) -> Result<CandidatePairs> {
    let cos = cosine_distance_matrix(nodes)?;
    let w = k_reciprocal_jaccard_from_cosine(&cos, cfg.rerank.clipped(nodes.rows()))?;
    select_candidates(&w, cfg.threshold, c1)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Least-squares slope of `log y` against `log x`. `None` with fewer than
/// two distinct x values.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

pub fn run_bench(sizes: &[usize], cfg: &BenchConfig) -> Result<BenchReport> {
    if sizes.is_empty() {
        return Err(Error::domain("no benchmark sizes given"));
    }
    if let Some(&s) = sizes.iter().find(|&&s| s < MIN_BENCH_SIZE) {
        return Err(Error::domain(format!("size {s} is below the minimum of {MIN_BENCH_SIZE}")));
    }
    if cfg.reps < 1 {
        return Err(Error::domain("reps must be at least 1"));
    }
    let data = sizes
        .iter()
        .map(|&n| bench_data(n, cfg))
        .collect::<Result<Vec<_>>>()?;
    // repetitions go round-robin over the sizes so that slow phases of the
    // host are spread across all of them
    let mut dist_times = vec![Vec::with_capacity(cfg.reps); sizes.len()];
    let mut greedy_times = vec![Vec::with_capacity(cfg.reps); sizes.len()];
    let mut pairs: Vec<Option<CandidatePairs>> = vec![None; sizes.len()];
    for _ in 0..cfg.reps {
        for (k, (nodes, c1)) in data.iter().enumerate() {
            let t = Instant::now();
            let p = distance_stage(nodes, *c1, cfg)?;
            dist_times[k].push(ms(t.elapsed()));

            let mut runs = 0u32;
            let t = Instant::now();
            loop {
                std::hint::black_box(greedy_associate(&p, *c1, nodes.rows())?);
                runs += 1;
                if ms(t.elapsed()) >= cfg.min_greedy_time_ms {
                    break;
                }
            }
            greedy_times[k].push(ms(t.elapsed()) / runs as f64);
            pairs[k] = Some(p);
        }
    }
    let points: Vec<BenchPoint> = sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| BenchPoint {
            n,
            hybrid_nodes: data[k].0.rows(),
            candidate_pair_count: pairs[k].as_ref().map_or(0, CandidatePairs::len),
            distance_ms: median(std::mem::take(&mut dist_times[k])),
            greedy_ms: median(std::mem::take(&mut greedy_times[k])),
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let distance_slope =
        loglog_slope(&xs, &points.iter().map(|p| p.distance_ms).collect::<Vec<_>>());
    let greedy_slope = if points.iter().all(|p| p.candidate_pair_count > 0) {
        loglog_slope(
            &points.iter().map(|p| p.candidate_pair_count as f64).collect::<Vec<_>>(),
            &points.iter().map(|p| p.greedy_ms).collect::<Vec<_>>(),
        )
    } else {
        None
    };
    Ok(BenchReport {
        points,
        distance_slope,
        greedy_slope,
    })
}
