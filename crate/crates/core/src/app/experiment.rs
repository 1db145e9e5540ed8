//! Simulation harness: repeated draws from a true model, tuning-parameter
//! selection for each penalty/criterion pair, and edge-recovery summaries.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::app::reference::{reference_cell, ReferenceCell};
use crate::error::{Error, Result};
use crate::estimators::{FitOptions, PenaltyKind};
use crate::metrics::{confusion, mcc, sensitivity, specificity, ConfusionCounts};
use crate::simdata::{sample_mvn, true_precision, GraphModel, ModelKind, TrueModel};
use crate::tuning::{
    select, Criterion, GridSpec, DEFAULT_FOLDS, DEFAULT_GRID_COUNT, DEFAULT_GRID_RATIO,
};

/// Largest tolerated share of failed replications.
pub const MAX_FAILURE_RATE: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionKind {
    Bic,
    Cv,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 2] = [CriterionKind::Bic, CriterionKind::Cv];

    pub fn label(self) -> &'static str {
        match self {
            CriterionKind::Bic => "BIC",
            CriterionKind::Cv => "CV",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub model: GraphModel,
    pub n: usize,
    pub reps: usize,
    pub penalties: Vec<PenaltyKind>,
    pub criteria: Vec<CriterionKind>,
    pub folds: usize,
    pub grid_count: usize,
    pub grid_ratio: f64,
    pub base_seed: u64,
    /// Worker threads; results do not depend on it.
    #[serde(skip)]
    pub parallelism: usize,
    #[serde(skip)]
    pub fit: FitOptions,
}

impl ExperimentConfig {
    pub fn new(model: GraphModel, n: usize, reps: usize) -> Self {
        Self {
            model,
            n,
            reps,
            penalties: PenaltyKind::ALL.to_vec(),
            criteria: CriterionKind::ALL.to_vec(),
            folds: DEFAULT_FOLDS,
            grid_count: DEFAULT_GRID_COUNT,
            grid_ratio: DEFAULT_GRID_RATIO,
            base_seed: 0,
            parallelism: 1,
            fit: FitOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.reps == 0 {
            return bad("reps must be >= 1");
        }
        if self.folds < 2 {
            return bad("folds must be >= 2");
        }
        if self.penalties.is_empty() || self.criteria.is_empty() {
            return bad("at least one penalty and one criterion are required");
        }
        if self.n < 2 {
            return bad("n must be >= 2");
        }
        if self.criteria.contains(&CriterionKind::Cv) && self.n < 2 * self.folds {
            return bad("n is too small for the requested number of folds");
        }
        if self.parallelism == 0 {
            return bad("parallelism must be >= 1");
        }
        self.fit.validate()
    }

    pub fn rep_seed(&self, rep: usize) -> u64 {
        self.base_seed.wrapping_add(rep as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellMetrics {
    pub lambda: f64,
    pub edges: usize,
    pub counts: ConfusionCounts,
    pub specificity: f64,
    pub sensitivity: f64,
    pub mcc: f64,
    pub exact_recovery: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellRecord {
    pub penalty: PenaltyKind,
    pub criterion: CriterionKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<CellMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RepRecord {
    pub rep: usize,
    pub seed: u64,
    pub cells: Vec<CellRecord>,
}

impl RepRecord {
    pub fn failed(&self) -> bool {
        self.cells.iter().any(|c| c.metrics.is_none())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    /// Mean and sample standard deviation (divisor `len − 1`; 0 for a single value).
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                mean: f64::NAN,
                sd: f64::NAN,
            };
        }
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let sd = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        };
        Self { mean, sd }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub penalty: PenaltyKind,
    pub criterion: CriterionKind,
    pub reps_used: usize,
    pub specificity: MeanSd,
    pub sensitivity: MeanSd,
    pub mcc: MeanSd,
    pub exact_recovery_rate: f64,
    pub mean_edges: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub true_edges: usize,
    pub cells: Vec<CellSummary>,
    pub failed_reps: usize,
    pub records: Vec<RepRecord>,
    pub notes: Vec<String>,
    pub wall_time_seconds: f64,
}

impl ExperimentReport {
    pub fn cell(&self, penalty: PenaltyKind, criterion: CriterionKind) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.penalty == penalty && c.criterion == criterion)
    }
}

pub const SD_NOTE: &str = "Spread values are per-replication sample standard deviations \
(divisor reps-1). The reference tables label their parenthesized values as standard errors, \
but their magnitudes match per-replication standard deviations, so no division by sqrt(reps) is applied.";

fn run_cell(
    x: &crate::numerics::DataMatrix,
    truth: &TrueModel,
    cfg: &ExperimentConfig,
    penalty: PenaltyKind,
    criterion: CriterionKind,
    seed: u64,
) -> Result<CellMetrics> {
    let criterion = match criterion {
        CriterionKind::Bic => Criterion::Bic,
        CriterionKind::Cv => Criterion::Cv {
            folds: cfg.folds,
            seed,
        },
    };
    let grid = GridSpec::Auto {
        count: cfg.grid_count,
        ratio: cfg.grid_ratio,
    };
    let result = select(x, penalty.into(), criterion, &grid, &cfg.fit)?;
    let edges = &result.best_fit.edges;
    let counts = confusion(edges, &truth.edges, truth.p())?;
    Ok(CellMetrics {
        lambda: result.best_lambda,
        edges: edges.len(),
        counts,
        specificity: specificity(&counts),
        sensitivity: sensitivity(&counts),
        mcc: mcc(&counts),
        exact_recovery: *edges == truth.edges,
    })
}

fn run_rep(cfg: &ExperimentConfig, truth: &TrueModel, rep: usize) -> RepRecord {
    let seed = cfg.rep_seed(rep);
    let data = sample_mvn(truth, cfg.n, seed);
    let mut cells = Vec::with_capacity(cfg.penalties.len() * cfg.criteria.len());
    for &penalty in &cfg.penalties {
        for &criterion in &cfg.criteria {
            let outcome = data.as_ref().map_err(|e| e.to_string()).and_then(|x| {
                run_cell(x, truth, cfg, penalty, criterion, seed).map_err(|e| e.to_string())
            });
            let (metrics, error) = match outcome {
                Ok(m) => (Some(m), None),
                Err(e) => {
                    log::warn!("rep {rep} {penalty}/{}: {e}", criterion.label());
                    (None, Some(e))
                }
            };
            cells.push(CellRecord {
                penalty,
                criterion,
                metrics,
                error,
            });
        }
    }
    RepRecord { rep, seed, cells }
}

/// Aggregates successful replications into per-cell summaries.
pub fn summarize(cfg: &ExperimentConfig, records: &[RepRecord]) -> Vec<CellSummary> {
    let ok: Vec<&RepRecord> = records.iter().filter(|r| !r.failed()).collect();
    let mut out = Vec::new();
    for &penalty in &cfg.penalties {
        for &criterion in &cfg.criteria {
            let metrics: Vec<&CellMetrics> = ok
                .iter()
                .filter_map(|r| {
                    r.cells
                        .iter()
                        .find(|c| c.penalty == penalty && c.criterion == criterion)
                        .and_then(|c| c.metrics.as_ref())
                })
                .collect();
            let collect =
                |f: fn(&CellMetrics) -> f64| metrics.iter().map(|m| f(m)).collect::<Vec<_>>();
            let k = metrics.len().max(1) as f64;
            out.push(CellSummary {
                penalty,
                criterion,
                reps_used: metrics.len(),
                specificity: MeanSd::of(&collect(|m| m.specificity)),
                sensitivity: MeanSd::of(&collect(|m| m.sensitivity)),
                mcc: MeanSd::of(&collect(|m| m.mcc)),
                exact_recovery_rate: metrics.iter().filter(|m| m.exact_recovery).count() as f64 / k,
                mean_edges: metrics.iter().map(|m| m.edges as f64).sum::<f64>() / k,
            });
        }
    }
    out
}

/// Runs every replication and aggregates the results.
///
/// One true model is built per experiment; replication `r` draws its data
/// (and its fold split) from seed `base_seed + r`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let started = Instant::now();
    let truth = true_precision(&cfg.model)?;
    let records: Vec<RepRecord> = if cfg.parallelism > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallelism)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            (0..cfg.reps)
                .into_par_iter()
                .map(|r| run_rep(cfg, &truth, r))
                .collect()
        })
    } else {
        (0..cfg.reps).map(|r| run_rep(cfg, &truth, r)).collect()
    };
    let failed = records.iter().filter(|r| r.failed()).count();
    if failed as f64 > MAX_FAILURE_RATE * cfg.reps as f64 {
        return Err(Error::TooManyFailures {
            failed,
            reps: cfg.reps,
        });
    }
    if failed > 0 {
        log::warn!(
            "{failed} of {} replications failed and were excluded",
            cfg.reps
        );
    }
    let mut notes = vec![SD_NOTE.to_string()];
    if failed > 0 {
        notes.push(format!(
            "{failed} failed replications excluded from the summaries"
        ));
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        true_edges: truth.edges.len(),
        cells: summarize(cfg, &records),
        failed_reps: failed,
        records,
        notes,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// The published sizes.
    Full,
    /// Reduced sizes that finish in minutes on one core.
    Desk,
}

/// `(p, n)` settings of the published tables, in order.
pub const FULL_SETTINGS: [(usize, usize); 3] = [(35, 100), (75, 100), (35, 10_000)];
/// Desk-scale stand-ins for [`FULL_SETTINGS`].
pub const DESK_SETTINGS: [(usize, usize); 3] = [(20, 100), (40, 60), (20, 5_000)];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub penalty: PenaltyKind,
    pub criterion: CriterionKind,
    pub observed: CellSummary,
    /// Published values, present at full scale only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceCell>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableBlock {
    pub table: u8,
    pub scale: Scale,
    pub p: usize,
    pub n: usize,
    pub reference_p: usize,
    pub reference_n: usize,
    pub comparisons: Vec<Comparison>,
    pub report: ExperimentReport,
}

pub fn table_model(table: u8, p: usize, seed: u64) -> Result<GraphModel> {
    match table {
        1 => Ok(GraphModel::ar1(p)),
        2 => Ok(GraphModel::ar2(p)),
        3 => Ok(GraphModel::geometric(p, 3, seed)),
        _ => Err(Error::InvalidArgument(format!(
            "table must be 1, 2 or 3, got {table}"
        ))),
    }
}

/// Re-runs one of the three simulation tables (three `(p, n)` settings, all
/// penalties, BIC and CV) and pairs each cell with its reference values.
pub fn replicate_table(
    table: u8,
    reps: usize,
    scale: Scale,
    base_seed: u64,
    parallelism: usize,
) -> Result<Vec<TableBlock>> {
    table_model(table, 3, base_seed)?;
    let settings = match scale {
        Scale::Full => FULL_SETTINGS,
        Scale::Desk => DESK_SETTINGS,
    };
    let mut blocks = Vec::with_capacity(settings.len());
    for (idx, &(p, n)) in settings.iter().enumerate() {
        let (reference_p, reference_n) = FULL_SETTINGS[idx];
        let mut cfg = ExperimentConfig::new(table_model(table, p, base_seed)?, n, reps);
        cfg.base_seed = base_seed;
        cfg.parallelism = parallelism;
        let report = run_experiment(&cfg)?;
        let comparisons = report
            .cells
            .iter()
            .map(|cell| Comparison {
                penalty: cell.penalty,
                criterion: cell.criterion,
                observed: cell.clone(),
                reference: match scale {
                    Scale::Full => reference_cell(table, idx, cell.criterion, cell.penalty),
                    Scale::Desk => None,
                },
            })
            .collect();
        blocks.push(TableBlock {
            table,
            scale,
            p,
            n,
            reference_p,
            reference_n,
            comparisons,
            report,
        });
    }
    Ok(blocks)
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Ar1 => "ar1",
            ModelKind::Ar2 => "ar2",
            ModelKind::SparseGeometric => "geo",
        }
    }
}
