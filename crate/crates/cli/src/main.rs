use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gcd_core::association::{associate_dataset, AssociationConfig};
use gcd_core::baselines::{assign_noise, semi_dbscan, semi_kmeans, DbscanParams, KmeansParams};
use gcd_core::bench::{run_bench, BenchConfig};
use gcd_core::distance::{cosine_distance_matrix, k_reciprocal_jaccard, RerankParams};
use gcd_core::evaluation::acc_report;
use gcd_core::features::{
    encode_palf, generate_synthetic, known_classes, load_features, load_groups, load_labels,
    load_truth, make_split, save_groups, DatasetSplit, SyntheticSpec,
};
use gcd_core::prototype::{train_stage1, ToyModel, TrainConfig};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "gcd", version, about = "Constrained association for category discovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Group unlabeled instances with the labeled classes and write `index,group` CSV.
    Associate(AssociateArgs),
    /// Score a predicted grouping against ground truth.
    Eval(EvalArgs),
    /// Run a Semi-KMeans or Semi-DBSCAN baseline.
    Baseline(BaselineArgs),
    /// Train the linear toy model with association-driven prototypes.
    TrainToy(TrainArgs),
    /// Time the distance and greedy stages over dataset sizes.
    Bench(BenchArgs),
}

#[derive(Args)]
struct AssociateArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 0.35)]
    threshold: f64,
    #[arg(long, default_value_t = 20)]
    k1: usize,
    #[arg(long, default_value_t = 6)]
    k2: usize,
    #[arg(long, default_value_t = 1.0)]
    subset_ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the JSON summary here.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Rescale feature rows to unit length on load.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    SemiKmeans,
    SemiDbscan,
    SemiDbscanConstrained,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Cosine,
    Jaccard,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Cluster count for Semi-KMeans.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.35)]
    eps: f64,
    #[arg(long, default_value_t = 4)]
    min_pts: usize,
    #[arg(long, value_enum, default_value_t = Metric::Jaccard)]
    metric: Metric,
    #[arg(long, default_value_t = 20)]
    k1: usize,
    #[arg(long, default_value_t = 6)]
    k2: usize,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Leave DBSCAN noise unassigned (written as -1).
    #[arg(long)]
    keep_noise: bool,
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Raw features; without it a synthetic dataset is generated.
    #[arg(long, requires = "labels")]
    features: Option<PathBuf>,
    #[arg(long, requires = "features")]
    labels: Option<PathBuf>,
    #[arg(long, requires = "features")]
    truth: Option<PathBuf>,
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value_t = 20)]
    classes: usize,
    #[arg(long, default_value_t = 50)]
    points_per_class: usize,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    #[arg(long, default_value_t = 0.3)]
    sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    known_ratio: f64,
    #[arg(long, default_value_t = 0.5)]
    labeled_ratio: f64,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long, default_value_t = 0.35)]
    threshold: f64,
    #[arg(long, default_value_t = 0.05)]
    tau: f64,
    #[arg(long, default_value_t = 0.2)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    subset_ratio: f64,
    #[arg(long, default_value_t = 20)]
    k1: usize,
    #[arg(long, default_value_t = 6)]
    k2: usize,
    #[arg(long, default_value_t = 8)]
    pk_classes: usize,
    #[arg(long, default_value_t = 16)]
    pk_instances: usize,
    /// Output dimension of the model; defaults to the input dimension.
    #[arg(long)]
    d_out: Option<usize>,
    /// Train only on instances reached by a candidate pair or a label.
    #[arg(long)]
    exclude_assigned: bool,
    #[arg(long)]
    weights_out: Option<PathBuf>,
    #[arg(long)]
    history_out: Option<PathBuf>,
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000,4000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<gcd_core::Error> for Failure {
    fn from(e: gcd_core::Error) -> Self {
        Failure {
            code: if e.is_user_error() { 1 } else { 2 },
            msg: e.to_string(),
        }
    }
}

fn user(msg: impl Into<String>) -> Failure {
    Failure { code: 1, msg: msg.into() }
}

type CliResult = Result<(), Failure>;

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| user(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &Value) -> CliResult {
    write_text(path, &format!("{}\n", serde_json::to_string_pretty(value).expect("json")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Associate(a) => associate(a),
        Command::Eval(a) => eval(a),
        Command::Baseline(a) => baseline(a),
        Command::TrainToy(a) => train_toy(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}

fn associate(a: AssociateArgs) -> CliResult {
    let cfg = AssociationConfig {
        threshold: a.threshold,
        rerank: RerankParams { k1: a.k1, k2: a.k2 },
        subset_ratio: a.subset_ratio,
        seed: a.seed,
    };
    cfg.validate()?;
    let feats = load_features(&a.features, a.normalize)?;
    let labels = load_labels(&a.labels, Some(feats.rows()))?;
    let start = Instant::now();
    let assoc = associate_dataset(&feats, &labels, &cfg)?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    save_groups(&assoc.groups_as_options(), &a.out)?;
    let summary = json!({
        "num_groups": assoc.num_groups,
        "num_unassigned_before_assign": assoc.num_unassigned_before_assign,
        "candidate_pair_count": assoc.candidate_pair_count,
        "wall_time_ms": wall_time_ms,
    });
    println!("{summary}");
    if let Some(p) = &a.summary {
        write_json(p, &summary)?;
    }
    Ok(())
}

fn eval(a: EvalArgs) -> CliResult {
    let truth = load_truth(&a.truth)?;
    let labels = load_labels(&a.labels, Some(truth.len()))?;
    let pred = load_groups(&a.pred)?
        .into_iter()
        .enumerate()
        .map(|(i, g)| g.ok_or_else(|| user(format!("{}: instance {i} has no group", a.pred.display()))))
        .collect::<Result<Vec<usize>, Failure>>()?;
    let report = acc_report(&pred, &truth, &labels, &known_classes(&truth, &labels))?;
    let value = serde_json::to_value(&report).expect("json");
    println!("{value}");
    if let Some(p) = &a.out {
        write_json(p, &value)?;
    }
    Ok(())
}

fn baseline(a: BaselineArgs) -> CliResult {
    let feats = load_features(&a.features, a.normalize)?;
    let labels = load_labels(&a.labels, Some(feats.rows()))?;
    let clusters: Vec<Option<usize>> = match a.algo {
        Algo::SemiKmeans => {
            let k = a.k.ok_or_else(|| user("--k is required for semi-kmeans"))?;
            let params = KmeansParams { k, max_iters: a.max_iters, seed: a.seed, tol: a.tol };
            semi_kmeans(&feats, &labels, &params)?.into_iter().map(Some).collect()
        }
        Algo::SemiDbscan | Algo::SemiDbscanConstrained => {
            let dist = match a.metric {
                Metric::Cosine => cosine_distance_matrix(&feats)?,
                Metric::Jaccard => k_reciprocal_jaccard(&feats, RerankParams { k1: a.k1, k2: a.k2 })?,
            };
            let params = DbscanParams {
                eps: a.eps,
                min_pts: a.min_pts,
                constrained: matches!(a.algo, Algo::SemiDbscanConstrained),
            };
            let c = semi_dbscan(&dist, &labels, &params)?;
            if a.keep_noise {
                c
            } else {
                assign_noise(&feats, &c)?.into_iter().map(Some).collect()
            }
        }
    };
    save_groups(&clusters, &a.out)?;
    let mut ids: Vec<usize> = clusters.iter().flatten().copied().collect();
    ids.sort_unstable();
    ids.dedup();
    let noise = clusters.iter().filter(|c| c.is_none()).count();
    println!("{}", json!({ "num_clusters": ids.len(), "num_noise": noise }));
    Ok(())
}

fn train_toy(a: TrainArgs) -> CliResult {
    let (raw, labels, truth) = match (&a.features, &a.labels) {
        (Some(f), Some(l)) => {
            let raw = load_features(f, a.normalize)?;
            let labels = load_labels(l, Some(raw.rows()))?;
            let truth = match &a.truth {
                Some(t) => Some(load_truth(t)?),
                None => None,
            };
            (raw, labels, truth)
        }
        _ => {
            let spec = SyntheticSpec {
                num_classes: a.classes,
                points_per_class: a.points_per_class,
                ambient_dim: a.dim,
                noise_sigma: a.sigma,
                seed: a.seed,
            };
            let (raw, truth) = generate_synthetic(&spec)?;
            let split = DatasetSplit {
                known_class_ratio: a.known_ratio,
                labeled_sample_ratio: a.labeled_ratio,
                seed: a.seed,
            };
            let labels = make_split(&truth, &split)?;
            (raw, labels, Some(truth))
        }
    };
    let cfg = TrainConfig {
        threshold: a.threshold,
        temperature: a.tau,
        momentum: a.mu,
        subset_ratio: a.subset_ratio,
        rerank: RerankParams { k1: a.k1, k2: a.k2 },
        seed: a.seed,
        epochs: a.epochs,
        lr: a.lr,
        pk_classes: a.pk_classes,
        pk_instances: a.pk_instances,
        include_assigned: !a.exclude_assigned,
    };
    let d_in = raw.dim();
    let d_out = a.d_out.unwrap_or(d_in);
    if d_out == 0 {
        return Err(user("--d-out must be positive"));
    }
    let out = train_stage1(&raw, &labels, truth.as_deref(), ToyModel::identity(d_out, d_in), &cfg)?;

    if let Some(p) = &a.weights_out {
        fs::write(p, encode_palf(d_out, d_in, out.model.weights()))
            .map_err(|e| user(format!("{}: {e}", p.display())))?;
    }
    if let Some(p) = &a.history_out {
        let mut text = String::new();
        for rec in &out.history {
            text.push_str(&serde_json::to_string(rec).expect("json"));
            text.push('\n');
        }
        write_text(p, &text)?;
    }
    let mut final_ids = out.final_groups.clone();
    final_ids.sort_unstable();
    final_ids.dedup();
    let report = json!({
        "epochs": out.history.len(),
        "initial_all_acc": out.history.first().and_then(|h| h.all_acc),
        "final": out.final_report,
        "final_num_groups": final_ids.len(),
    });
    println!("{report}");
    if let Some(p) = &a.report_out {
        write_json(p, &report)?;
    }
    Ok(())
}

fn bench(a: BenchArgs) -> CliResult {
    let cfg = BenchConfig { reps: a.reps, seed: a.seed, ..Default::default() };
    let report = run_bench(&a.sizes, &cfg)?;
    let value = serde_json::to_value(&report).expect("json");
    println!("{value}");
    if let Some(p) = &a.out {
        write_json(p, &value)?;
    }
    Ok(())
}
