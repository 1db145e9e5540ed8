//! Tuning-parameter selection: λ grids, BIC and K-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{FitOptions, PathFitter, Penalty, PenaltyKind};
use crate::glasso::GlassoSolution;
use crate::numerics::{cholesky, sample_covariance, trace_product, DataMatrix, SymmetricMatrix};

/// Grid point used when the covariance has no off-diagonal signal.
pub const DEGENERATE_LAMBDA: f64 = 1e-8;

pub const DEFAULT_GRID_COUNT: usize = 50;
pub const DEFAULT_GRID_RATIO: f64 = 0.01;
pub const DEFAULT_FOLDS: usize = 5;

/// Strictly descending, positive λ values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaGrid {
    values: Vec<f64>,
}

impl LambdaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("lambda grid is empty".into()));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(
                "lambda grid values must be positive and finite".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument(
                "lambda grid must be strictly descending".into(),
            ));
        }
        Ok(Self { values })
    }

    /// Like [`LambdaGrid::new`] but also admits a trailing `λ = 0`.
    pub fn with_zero(mut values: Vec<f64>) -> Result<Self> {
        let has_zero = values.last() == Some(&0.0);
        if has_zero {
            values.pop();
        }
        let mut grid = if values.is_empty() {
            Self { values: Vec::new() }
        } else {
            Self::new(values)?
        };
        if has_zero {
            grid.values.push(0.0);
        }
        Ok(grid)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `count` log-spaced values from `max_{i≠j} |a_ij|` down to `ratio` times that.
pub fn default_grid(a: &SymmetricMatrix, count: usize, ratio: f64) -> Result<LambdaGrid> {
    if count == 0 {
        return Err(Error::InvalidArgument("grid count must be >= 1".into()));
    }
    if count > 1 && !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "grid ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let lambda_max = a.max_abs_off_diagonal();
    if lambda_max == 0.0 {
        return LambdaGrid::new(vec![DEGENERATE_LAMBDA]);
    }
    let values = (0..count)
        .map(|k| {
            if k == 0 {
                lambda_max
            } else {
                lambda_max * ratio.powf(k as f64 / (count - 1) as f64)
            }
        })
        .collect();
    LambdaGrid::new(values)
}

/// How the λ grid of a selection run is obtained.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridSpec {
    /// [`default_grid`] on the full-sample covariance.
    Auto {
        count: usize,
        ratio: f64,
    },
    Explicit(LambdaGrid),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Auto {
            count: DEFAULT_GRID_COUNT,
            ratio: DEFAULT_GRID_RATIO,
        }
    }
}

impl GridSpec {
    pub fn resolve(&self, a: &SymmetricMatrix) -> Result<LambdaGrid> {
        match self {
            GridSpec::Auto { count, ratio } => default_grid(a, *count, *ratio),
            GridSpec::Explicit(grid) => Ok(grid.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Criterion {
    Bic,
    Cv { folds: usize, seed: u64 },
}

impl Criterion {
    pub fn label(&self) -> &'static str {
        match self {
            Criterion::Bic => "BIC",
            Criterion::Cv { .. } => "CV",
        }
    }
}

/// `−log|Ĉ| + tr(Ĉ·A)`.
pub fn neg_log_likelihood(c_hat: &SymmetricMatrix, a: &SymmetricMatrix) -> Result<f64> {
    Ok(-cholesky(c_hat)?.log_det() + trace_product(c_hat, a)?)
}

/// The BIC complexity term `(log n / n) · edges`.
pub fn bic_edge_penalty(n: usize, edges: usize) -> f64 {
    (n as f64).ln() / n as f64 * edges as f64
}

/// `−log|Ĉ| + tr(Ĉ·A) + (log n / n) · #{i < j : ĉ_ij ≠ 0}`.
pub fn bic_score(c_hat: &SymmetricMatrix, a: &SymmetricMatrix, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("BIC needs n >= 2, got {n}")));
    }
    Ok(neg_log_likelihood(c_hat, a)? + bic_edge_penalty(n, c_hat.off_diagonal_nonzeros()))
}

/// Seeded partition of `0..n` into `folds` groups whose sizes differ by at
/// most one. Indices within each fold are sorted.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!(
            "cross-validation needs at least 2 folds, got {folds}"
        )));
    }
    if n < 2 * folds {
        return Err(Error::InvalidArgument(format!(
            "{n} observations cannot fill {folds} folds of at least 2"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for k in 0..folds {
        let size = base + usize::from(k < extra);
        let mut fold = order[start..start + size].to_vec();
        fold.sort_unstable();
        out.push(fold);
        start += size;
    }
    Ok(out)
}

/// Per-fold, per-λ held-out scores `n_k (−log|Ĉ_{−k}| + tr(Ĉ_{−k} A_k))`.
fn fold_scores(
    x: &DataMatrix,
    grid: &[f64],
    penalty: Penalty,
    folds: &[Vec<usize>],
    opts: &FitOptions,
) -> Result<Vec<Vec<Option<f64>>>> {
    let n = x.n();
    let mut out = Vec::with_capacity(folds.len());
    for (k, held) in folds.iter().enumerate() {
        if held.len() < 2 {
            return Err(Error::FoldTooSmall {
                fold: k,
                size: held.len(),
            });
        }
        let mut in_fold = vec![false; n];
        held.iter().for_each(|&i| in_fold[i] = true);
        let train: Vec<usize> = (0..n).filter(|&i| !in_fold[i]).collect();
        let wrap = |e: Error| Error::Fold {
            fold: k,
            source: Box::new(e),
        };
        let a_train = sample_covariance(&x.select_rows(&train).map_err(wrap)?, true);
        let a_held = sample_covariance(&x.select_rows(held).map_err(wrap)?, true);
        let mut fitter = PathFitter::new(&a_train, penalty, opts).map_err(wrap)?;
        let scores = grid
            .iter()
            .map(|&lambda| match fitter.fit(lambda) {
                Ok(sol) => neg_log_likelihood(&sol.c_hat, &a_held)
                    .ok()
                    .map(|s| held.len() as f64 * s)
                    .filter(|s| s.is_finite()),
                Err(e) => {
                    log::debug!("fold {k}, lambda {lambda}: {e}");
                    None
                }
            })
            .collect();
        out.push(scores);
    }
    Ok(out)
}

/// K-fold cross-validation score at a single λ. Each training fold gets its
/// own pilot estimate and reweighting, so nothing leaks from the held-out rows.
pub fn cv_score(
    x: &DataMatrix,
    lambda: f64,
    penalty: Penalty,
    folds: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<f64> {
    let assignment = fold_assignment(x.n(), folds, seed)?;
    let scores = fold_scores(x, &[lambda], penalty, &assignment, opts)?;
    let mut total = 0.0;
    for (k, fold) in scores.iter().enumerate() {
        total += fold[0].ok_or_else(|| Error::Fold {
            fold: k,
            source: Box::new(Error::AllFitsFailed {
                last: format!("fit at lambda {lambda} failed"),
            }),
        })?;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathPoint {
    pub lambda: f64,
    /// `None` when the fit or score failed at this λ.
    pub score: Option<f64>,
    /// Edge count of the full-sample fit.
    pub edge_count: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionResult {
    pub criterion: Criterion,
    pub penalty: PenaltyKind,
    pub best_lambda: f64,
    pub best_score: f64,
    pub best_fit: GlassoSolution,
    pub path: Vec<PathPoint>,
}

/// Fits every grid point (largest λ first, warm-started), scores each one by
/// `criterion` and returns the minimizer; ties go to the larger λ.
pub fn select(
    x: &DataMatrix,
    penalty: Penalty,
    criterion: Criterion,
    grid: &GridSpec,
    opts: &FitOptions,
) -> Result<SelectionResult> {
    let n = x.n();
    let a = sample_covariance(x, true);
    let grid = grid.resolve(&a)?;
    let lambdas = grid.values();

    let mut fitter = PathFitter::new(&a, penalty, opts)?;
    let mut fits: Vec<Option<GlassoSolution>> = Vec::with_capacity(lambdas.len());
    let mut last_error = String::from("no grid points");
    for &lambda in lambdas {
        match fitter.fit(lambda) {
            Ok(sol) => fits.push(Some(sol)),
            Err(e) => {
                log::debug!("{} fit at lambda {lambda} failed: {e}", penalty.kind);
                last_error = e.to_string();
                fits.push(None);
            }
        }
    }

    let scores: Vec<Option<f64>> = match criterion {
        Criterion::Bic => fits
            .iter()
            .map(|f| {
                f.as_ref()
                    .and_then(|s| bic_score(&s.c_hat, &a, n).ok())
                    .filter(|s| s.is_finite())
            })
            .collect(),
        Criterion::Cv { folds, seed } => {
            let assignment = fold_assignment(n, folds, seed)?;
            let per_fold = fold_scores(x, lambdas, penalty, &assignment, opts)?;
            (0..lambdas.len())
                .map(|l| {
                    fits[l].as_ref()?;
                    per_fold.iter().map(|f| f[l]).sum::<Option<f64>>()
                })
                .collect()
        }
    };

    let mut best: Option<(usize, f64)> = None;
    for (l, score) in scores.iter().enumerate() {
        if let Some(s) = *score {
            if best.is_none_or(|(_, b)| s < b) {
                best = Some((l, s));
            }
        }
    }
    let (best_index, best_score) = best.ok_or(Error::AllFitsFailed { last: last_error })?;
    let path = lambdas
        .iter()
        .zip(&scores)
        .zip(&fits)
        .map(|((&lambda, &score), fit)| PathPoint {
            lambda,
            score,
            edge_count: fit.as_ref().map(GlassoSolution::edge_count),
        })
        .collect();
    let best_fit = fits
        .swap_remove(best_index)
        .expect("scored grid point has a fit");
    Ok(SelectionResult {
        criterion,
        penalty: penalty.kind,
        best_lambda: lambdas[best_index],
        best_score,
        best_fit,
        path,
    })
}
