//! Monte-Carlo experiments: synthetic Cauchy populations, simulated
//! reports, and per-length error of range and quantile answers.

mod data;
mod method;
mod predict;
mod queries;
mod simulate;

pub use data::{sample_cauchy, DataSpec};
pub use method::{MethodKind, MethodSpec};
pub use predict::{flat_hh_crossover, predictor_table, PredictorRow, PredictorTable};
pub use queries::{build_query_set, QuerySet, EXHAUSTIVE_LIMIT};
pub use simulate::{
    simulate_flat, simulate_haar, simulate_hierarchy, simulate_method, Simulation, OLH_MAX_DOMAIN,
};

use std::collections::HashMap;

use queries::LengthErrors;

use crate::consistency::enforce;
use crate::error::{domain, Result};
use crate::freq_oracle::PrivacySpec;
use crate::hierarchy::{walk_cover, NodeEstimates, TreeLayout};
use crate::query::{true_quantile, Estimator, QuantileSearch};
use crate::rng::derived_stream;

const DATA_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: DataSpec,
    pub epsilons: Vec<f64>,
    pub methods: Vec<MethodSpec>,
    pub queries: QuerySet,
    pub reps: usize,
    pub seed: u64,
    pub simulation: Simulation,
}

impl ExperimentConfig {
    /// Default data shape and query set for `d` items and `n` users.
    pub fn new(d: usize, n: u64, epsilons: Vec<f64>, methods: Vec<MethodSpec>) -> Result<Self> {
        Ok(Self {
            data: DataSpec::new(d, n),
            epsilons,
            methods,
            queries: QuerySet::default_for(d)?,
            reps: 5,
            seed: 0,
            simulation: Simulation::Fast,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.data.validate()?;
        if self.methods.is_empty() {
            return domain("no methods requested");
        }
        if self.epsilons.is_empty() {
            return domain("no privacy budgets requested");
        }
        for &eps in &self.epsilons {
            PrivacySpec::new(eps)?;
        }
        if self.reps == 0 {
            return domain("at least one repetition is required");
        }
        if self.queries.d() != self.data.d {
            return domain(format!(
                "query set covers {} items but the data has {}",
                self.queries.d(),
                self.data.d
            ));
        }
        Ok(())
    }
}

/// Mean over repetitions and its sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub stddev: f64,
}

impl Stat {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let stddev = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, stddev }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthStat {
    pub r: usize,
    pub queries: u64,
    pub mse: Stat,
}

/// Errors of one method at one privacy level. Answers are fractions of the
/// population.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub method: MethodSpec,
    pub epsilon: f64,
    /// Lengths present in the query set, ascending.
    pub per_length: Vec<LengthStat>,
    /// Mean squared error over every query in the set.
    pub overall: Stat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// Ordered by ε, then by method as configured.
    pub cells: Vec<CellResult>,
}

impl ExperimentResult {
    pub fn cell(&self, method: &MethodSpec, epsilon: f64) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.method == *method && c.epsilon == epsilon)
    }
}

/// Per-repetition squared-error totals for one cell.
struct CellRuns {
    per_length: Vec<Vec<f64>>,
    overall: Vec<f64>,
}

/// Simulate every configured method on the same data in each repetition
/// and evaluate all queries in the set.
///
/// Every repetition draws its population from a stream derived from the seed
/// and repetition only, so all methods and privacy levels see identical
/// data; each method draws its noise from its own derived stream.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let d = cfg.data.d;
    let n = cfg.data.n as f64;
    let cells_len = cfg.epsilons.len() * cfg.methods.len();
    let mut runs: Vec<CellRuns> = (0..cells_len)
        .map(|_| CellRuns { per_length: vec![Vec::new(); d + 1], overall: Vec::new() })
        .collect();
    let length_counts = cfg.queries.length_counts();

    for rep in 0..cfg.reps {
        let counts = sample_cauchy(&cfg.data, &mut derived_stream(cfg.seed, &[DATA_STREAM, rep as u64]))?;
        let truth: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
        for (ei, &eps) in cfg.epsilons.iter().enumerate() {
            let privacy = PrivacySpec::new(eps)?;
            let mut trees: HashMap<[u64; 3], NodeEstimates> = HashMap::new();
            for (mi, method) in cfg.methods.iter().enumerate() {
                let est = estimate(cfg, rep, &privacy, method, &counts, &mut trees, &[])?;
                let errors = evaluate(&cfg.queries, &est, &truth);
                let cell = &mut runs[ei * cfg.methods.len() + mi];
                for (r, &count) in length_counts.iter().enumerate() {
                    if count > 0 {
                        cell.per_length[r].push(errors.sse[r] / count as f64);
                    }
                }
                cell.overall.push(errors.overall());
            }
        }
    }

    let mut cells = Vec::with_capacity(cells_len);
    for (ei, &epsilon) in cfg.epsilons.iter().enumerate() {
        for (mi, method) in cfg.methods.iter().enumerate() {
            let run = &runs[ei * cfg.methods.len() + mi];
            let per_length = length_counts
                .iter()
                .enumerate()
                .filter(|&(_, &c)| c > 0)
                .map(|(r, &queries)| LengthStat { r, queries, mse: Stat::of(&run.per_length[r]) })
                .collect();
            cells.push(CellResult { method: *method, epsilon, per_length, overall: Stat::of(&run.overall) });
        }
    }
    Ok(ExperimentResult { config: cfg.clone(), cells })
}

/// Build one method's estimator, reusing a noisy tree already drawn for the
/// raw or consistent variant with the same branching factor and oracle.
fn estimate(
    cfg: &ExperimentConfig,
    rep: usize,
    privacy: &PrivacySpec,
    method: &MethodSpec,
    counts: &[u64],
    trees: &mut HashMap<[u64; 3], NodeEstimates>,
    extra_label: &[u64],
) -> Result<Estimator> {
    let label = method.stream_label();
    let mut path = vec![NOISE_STREAM, rep as u64, privacy.epsilon().to_bits()];
    path.extend_from_slice(&label);
    path.extend_from_slice(extra_label);
    let mut rng = derived_stream(cfg.seed, &path);
    match method.kind {
        MethodKind::Hierarchical { branching } | MethodKind::Consistent { branching } => {
            let raw = match trees.get(&label) {
                Some(t) => t.clone(),
                None => {
                    let layout = TreeLayout::covering(counts.len(), branching)?;
                    let t = simulate_hierarchy(counts, &layout, method.oracle, privacy, cfg.simulation, &mut rng)?;
                    trees.insert(label, t.clone());
                    t
                }
            };
            Ok(if matches!(method.kind, MethodKind::Consistent { .. }) {
                Estimator::Consistent(enforce(&raw)?)
            } else {
                Estimator::Hierarchical(raw)
            })
        }
        _ => simulate_method(method, counts, privacy, cfg.simulation, &mut rng),
    }
}

fn evaluate(set: &QuerySet, est: &Estimator, truth: &[f64]) -> LengthErrors {
    match est {
        Estimator::Hierarchical(nodes) => {
            let layout = *nodes.layout();
            let mut padded = truth.to_vec();
            padded.resize(layout.leaves(), 0.0);
            let node_err: Vec<Vec<f64>> = (1..=layout.height())
                .map(|l| {
                    let w = layout.block_size(l);
                    nodes
                        .level(l)
                        .iter()
                        .zip(padded.chunks(w))
                        .map(|(e, block)| e - block.iter().sum::<f64>())
                        .collect()
                })
                .collect();
            LengthErrors::from_fn(set, |a, b| {
                let mut e = 0.0;
                walk_cover(a, b, &layout, |level, index| e += node_err[level - 1][index]);
                e
            })
        }
        additive => {
            let mut prefix = Vec::with_capacity(truth.len() + 1);
            prefix.push(0.0);
            let mut acc = 0.0;
            for (x, t) in additive.point_estimates().iter().zip(truth) {
                acc += x - t;
                prefix.push(acc);
            }
            LengthErrors::from_prefix_errors(set, &prefix)
        }
    }
}

/// One quantile answer from one repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileRow {
    pub method: MethodSpec,
    pub epsilon: f64,
    pub center: f64,
    pub rep: usize,
    pub phi: f64,
    pub true_value: usize,
    pub est_value: usize,
    pub value_error: f64,
    pub quantile_error: f64,
}

/// The deciles `0.1, ..., 0.9`.
pub fn deciles() -> Vec<f64> {
    (1..10).map(|k| k as f64 / 10.0).collect()
}

/// Quantile queries for every configured method, privacy level and data
/// centre. The query set in `cfg` is unused.
pub fn run_quantiles(cfg: &ExperimentConfig, centers: &[f64], phis: &[f64]) -> Result<Vec<QuantileRow>> {
    cfg.validate()?;
    if centers.is_empty() || phis.is_empty() {
        return domain("quantile runs need at least one centre and one quantile");
    }
    let mut rows = Vec::new();
    for &center in centers {
        let data = cfg.data.with_center(center);
        for rep in 0..cfg.reps {
            let counts = sample_cauchy(
                &data,
                &mut derived_stream(cfg.seed, &[DATA_STREAM, rep as u64, center.to_bits()]),
            )?;
            let truth: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            for &epsilon in &cfg.epsilons {
                let privacy = PrivacySpec::new(epsilon)?;
                let mut trees = HashMap::new();
                for method in &cfg.methods {
                    let est = estimate(cfg, rep, &privacy, method, &counts, &mut trees, &[center.to_bits()])?;
                    let search = QuantileSearch::new(&est)?;
                    for &phi in phis {
                        let q = search.quantile(phi, Some(&truth))?;
                        rows.push(QuantileRow {
                            method: *method,
                            epsilon,
                            center,
                            rep,
                            phi,
                            true_value: true_quantile(&truth, phi)?,
                            est_value: q.index,
                            value_error: q.value_error.unwrap_or(0.0),
                            quantile_error: q.quantile_error.unwrap_or(0.0),
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}
