use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::app::experiment::{
    replicate_table, run_experiment, CriterionKind, ExperimentConfig, Scale,
};
use crate::app::io::{emit, read_csv, render_document};
use crate::app::AppError;
use crate::estimators::{
    fit_penalized, penalized_objective, FitOptions, PathFitter, Penalty, PenaltyKind,
};
use crate::glasso::GlassoSolution;
use crate::numerics::sample_covariance;
use crate::penalty::{adaptive_weights, PenaltySpec};
use crate::simdata::GraphModel;
use crate::tuning::{default_grid, select, Criterion, GridSpec, LambdaGrid, SelectionResult};

#[derive(Debug, Parser)]
#[command(
    name = "sparse-ggm",
    version,
    about = "Sparse Gaussian graphical models with LASSO, SCAD and adaptive LASSO penalties"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one penalized precision matrix at a fixed lambda.
    Estimate(EstimateArgs),
    /// Choose lambda by BIC or K-fold cross-validation and report the fit.
    Select(SelectArgs),
    /// Run a simulation study on a synthetic graph model.
    Simulate(SimulateArgs),
    /// Re-run one of the three reference simulation tables.
    Replicate(ReplicateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PenaltyArg {
    Lasso,
    Scad,
    #[value(alias = "adap")]
    Adaptive,
}

impl From<PenaltyArg> for PenaltyKind {
    fn from(p: PenaltyArg) -> Self {
        match p {
            PenaltyArg::Lasso => PenaltyKind::Lasso,
            PenaltyArg::Scad => PenaltyKind::Scad,
            PenaltyArg::Adaptive => PenaltyKind::Adaptive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Bic,
    Cv,
}

impl From<CriterionArg> for CriterionKind {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Bic => CriterionKind::Bic,
            CriterionArg::Cv => CriterionKind::Cv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Ar1,
    Ar2,
    Geo,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with one observation per row.
    #[arg(long)]
    pub input: PathBuf,
    /// The first CSV row is a header.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct PenaltyArgs {
    #[arg(long, value_enum)]
    pub penalty: PenaltyArg,
    /// SCAD shape parameter.
    #[arg(long, default_value_t = 3.7)]
    pub a: f64,
    /// Adaptive LASSO weight exponent.
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
}

impl PenaltyArgs {
    fn penalty(&self) -> Result<Penalty, AppError> {
        if !(self.a > 2.0) {
            return Err(AppError::Usage(format!(
                "--a must exceed 2, got {}",
                self.a
            )));
        }
        if !(self.gamma > 0.0) {
            return Err(AppError::Usage(format!(
                "--gamma must be positive, got {}",
                self.gamma
            )));
        }
        Ok(Penalty {
            kind: self.penalty.into(),
            a: self.a,
            gamma: self.gamma,
        })
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    #[arg(long)]
    pub lambda: f64,
    /// Subtract the sample mean before forming the covariance.
    #[arg(long)]
    pub center: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    #[arg(long, value_enum)]
    pub criterion: CriterionArg,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 50)]
    pub grid_count: usize,
    #[arg(long, default_value_t = 0.01)]
    pub grid_ratio: f64,
    /// Append lambda = 0 to the grid.
    #[arg(long)]
    pub include_zero: bool,
    /// Fold-shuffling seed (cross-validation only).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub reps: usize,
    #[arg(long, default_value_t = 3)]
    pub neighbors: usize,
    /// Comma-separated subset of lasso, scad, adaptive.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub penalties: Vec<PenaltyArg>,
    /// Comma-separated subset of bic, cv.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub criteria: Vec<CriterionArg>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 50)]
    pub grid_count: usize,
    #[arg(long, default_value_t = 0.01)]
    pub grid_ratio: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplicateArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub table: u8,
    #[arg(long, value_enum, default_value_t = Scale::Desk)]
    pub scale: Scale,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn dedup<T: PartialEq + Copy>(items: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

fn check_lambda(lambda: f64) -> Result<(), AppError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(AppError::Usage(format!(
            "--lambda must be a finite value >= 0, got {lambda}"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct EstimateConfig<'a> {
    command: &'static str,
    input: &'a std::path::Path,
    penalty: PenaltyKind,
    lambda: f64,
    a: f64,
    gamma: f64,
    center: bool,
}

#[derive(Serialize)]
struct EstimateResult<'a> {
    n: usize,
    p: usize,
    edge_count: usize,
    penalized_objective: f64,
    #[serde(flatten)]
    fit: &'a GlassoSolution,
}

fn estimate(args: &EstimateArgs) -> Result<String, AppError> {
    check_lambda(args.lambda)?;
    let penalty = args.penalty.penalty()?;
    let x = read_csv(&args.input.input, args.input.header)?;
    let a = sample_covariance(&x, args.center);
    let opts = FitOptions::default();
    let fitter = PathFitter::new(&a, penalty, &opts).map_err(AppError::context("estimate"))?;
    let spec = match penalty.kind {
        PenaltyKind::Lasso => PenaltySpec::Lasso {
            lambda: args.lambda,
        },
        PenaltyKind::Scad => PenaltySpec::Scad {
            lambda: args.lambda,
            a: penalty.a,
        },
        PenaltyKind::Adaptive => PenaltySpec::AdaptiveLasso {
            lambda: args.lambda,
            gamma: penalty.gamma,
            weights: fitter
                .pilot()
                .map(|c| adaptive_weights(c, penalty.gamma, opts.weight_cap)),
        },
    };
    let fit =
        fit_penalized(&a, penalty, args.lambda, &opts).map_err(AppError::context("estimate"))?;
    let penalized_objective =
        penalized_objective(&fit.c_hat, &a, &spec).map_err(AppError::context("estimate"))?;
    let config = EstimateConfig {
        command: "estimate",
        input: &args.input.input,
        penalty: penalty.kind,
        lambda: args.lambda,
        a: penalty.a,
        gamma: penalty.gamma,
        center: args.center,
    };
    let result = EstimateResult {
        n: x.n(),
        p: x.p(),
        edge_count: fit.edge_count(),
        penalized_objective,
        fit: &fit,
    };
    render_document(&config, &result)
}

#[derive(Serialize)]
struct SelectConfig<'a> {
    command: &'static str,
    input: &'a std::path::Path,
    penalty: PenaltyKind,
    criterion: CriterionKind,
    a: f64,
    gamma: f64,
    folds: usize,
    seed: u64,
    grid_count: usize,
    grid_ratio: f64,
    include_zero: bool,
}

#[derive(Serialize)]
struct SelectOutput<'a> {
    n: usize,
    p: usize,
    #[serde(flatten)]
    selection: &'a SelectionResult,
}

fn select_cmd(args: &SelectArgs) -> Result<String, AppError> {
    let penalty = args.penalty.penalty()?;
    if args.grid_count == 0 {
        return Err(AppError::Usage("--grid-count must be >= 1".into()));
    }
    if !(args.grid_ratio > 0.0 && args.grid_ratio < 1.0) {
        return Err(AppError::Usage("--grid-ratio must lie in (0, 1)".into()));
    }
    if args.criterion == CriterionArg::Cv && args.folds < 2 {
        return Err(AppError::Usage("--folds must be >= 2".into()));
    }
    let x = read_csv(&args.input.input, args.input.header)?;
    let criterion = match args.criterion {
        CriterionArg::Bic => Criterion::Bic,
        CriterionArg::Cv => Criterion::Cv {
            folds: args.folds,
            seed: args.seed,
        },
    };
    let grid = if args.include_zero {
        let a = sample_covariance(&x, true);
        let mut values = default_grid(&a, args.grid_count, args.grid_ratio)
            .map_err(AppError::context("select"))?
            .values()
            .to_vec();
        values.push(0.0);
        GridSpec::Explicit(LambdaGrid::with_zero(values).map_err(AppError::context("select"))?)
    } else {
        GridSpec::Auto {
            count: args.grid_count,
            ratio: args.grid_ratio,
        }
    };
    let result = select(&x, penalty, criterion, &grid, &FitOptions::default())
        .map_err(AppError::context("select"))?;
    let config = SelectConfig {
        command: "select",
        input: &args.input.input,
        penalty: penalty.kind,
        criterion: args.criterion.into(),
        a: penalty.a,
        gamma: penalty.gamma,
        folds: args.folds,
        seed: args.seed,
        grid_count: args.grid_count,
        grid_ratio: args.grid_ratio,
        include_zero: args.include_zero,
    };
    render_document(
        &config,
        &SelectOutput {
            n: x.n(),
            p: x.p(),
            selection: &result,
        },
    )
}

fn simulate(args: &SimulateArgs) -> Result<String, AppError> {
    let model = match args.model {
        ModelArg::Ar1 => GraphModel::ar1(args.p),
        ModelArg::Ar2 => GraphModel::ar2(args.p),
        ModelArg::Geo => GraphModel::geometric(args.p, args.neighbors, args.seed),
    };
    let mut cfg = ExperimentConfig::new(model, args.n, args.reps);
    cfg.penalties = dedup(args.penalties.iter().map(|&p| p.into()));
    cfg.criteria = dedup(args.criteria.iter().map(|&c| c.into()));
    cfg.folds = args.folds;
    cfg.grid_count = args.grid_count;
    cfg.grid_ratio = args.grid_ratio;
    cfg.base_seed = args.seed;
    cfg.parallelism = args.parallelism;
    cfg.validate().map_err(|e| AppError::Usage(e.to_string()))?;
    let report = run_experiment(&cfg).map_err(AppError::context("simulate"))?;
    #[derive(Serialize)]
    struct SimulateConfig<'a> {
        command: &'static str,
        #[serde(flatten)]
        experiment: &'a ExperimentConfig,
    }
    render_document(
        &SimulateConfig {
            command: "simulate",
            experiment: &cfg,
        },
        &report,
    )
}

fn replicate(args: &ReplicateArgs) -> Result<String, AppError> {
    if args.reps == 0 || args.parallelism == 0 {
        return Err(AppError::Usage(
            "--reps and --parallelism must be >= 1".into(),
        ));
    }
    let blocks = replicate_table(
        args.table,
        args.reps,
        args.scale,
        args.seed,
        args.parallelism,
    )
    .map_err(AppError::context("replicate"))?;
    #[derive(Serialize)]
    struct ReplicateConfig {
        command: &'static str,
        table: u8,
        scale: Scale,
        reps: usize,
        seed: u64,
    }
    render_document(
        &ReplicateConfig {
            command: "replicate",
            table: args.table,
            scale: args.scale,
            reps: args.reps,
            seed: args.seed,
        },
        &blocks,
    )
}

/// Executes a parsed command and writes its JSON document.
pub fn run(cli: &Cli) -> Result<(), AppError> {
    let (text, out) = match &cli.command {
        Command::Estimate(a) => (estimate(a)?, a.out.as_deref()),
        Command::Select(a) => (select_cmd(a)?, a.out.as_deref()),
        Command::Simulate(a) => (simulate(a)?, a.out.as_deref()),
        Command::Replicate(a) => (replicate(a)?, a.out.as_deref()),
    };
    emit(&text, out)
}
