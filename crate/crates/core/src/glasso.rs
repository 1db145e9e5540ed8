//! Weighted-L1 graphical lasso.
//!
//! Minimizes `−log|C| + tr(C·A) + Σ_{i≠j} w_ij |c_ij|` over positive-definite
//! `C` by block coordinate descent on the covariance iterate `Ŵ ≈ C⁻¹`. The
//! diagonal is unpenalized, so `Ŵ_ii = A_ii` throughout. Each column update
//! solves an L1-penalized quadratic by cyclic coordinate descent; exact zeros
//! in `Ĉ` come from soft-thresholding there.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::EdgeSet;
use crate::numerics::{cholesky, inverse_spd, trace_product, SymmetricMatrix};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlassoOptions {
    /// Outer stopping rule: mean `|ΔŴ_ij|` per sweep relative to mean `|A_ij|`, `i ≠ j`.
    pub outer_tol: f64,
    /// Inner stopping rule for the per-column lasso, on the same relative scale.
    pub inner_tol: f64,
    pub max_outer_sweeps: usize,
    pub max_inner_sweeps: usize,
    /// Symmetrized entries with magnitude at or below this are set to exactly zero.
    pub zero_threshold: f64,
}

impl Default for GlassoOptions {
    fn default() -> Self {
        Self {
            outer_tol: 1e-4,
            inner_tol: 1e-6,
            max_outer_sweeps: 100,
            max_inner_sweeps: 1000,
            zero_threshold: 1e-8,
        }
    }
}

impl GlassoOptions {
    pub fn validate(&self) -> Result<()> {
        let tols = [self.outer_tol, self.inner_tol];
        if tols.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidArgument(
                "glasso tolerances must be positive".into(),
            ));
        }
        if !(self.zero_threshold >= 0.0) {
            return Err(Error::InvalidArgument(
                "zero threshold must be nonnegative".into(),
            ));
        }
        if self.max_outer_sweeps == 0 || self.max_inner_sweeps == 0 {
            return Err(Error::InvalidArgument("sweep limits must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlassoSolution {
    pub c_hat: SymmetricMatrix,
    pub w_hat: SymmetricMatrix,
    /// Pairs `(i, j)`, `i < j`, zero-based, with `ĉ_ij ≠ 0`. Serialized one-based.
    #[serde(serialize_with = "crate::metrics::serialize_one_based")]
    pub edges: EdgeSet,
    /// Weighted objective at `c_hat` under the weights of the last solve.
    pub objective: f64,
    pub outer_sweeps: usize,
    pub converged: bool,
    /// Number of reweighting steps applied after the initial solve (SCAD only).
    pub reweight_iterations: usize,
}

impl GlassoSolution {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

#[inline]
fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

fn validate_problem(a: &SymmetricMatrix, w: &SymmetricMatrix) -> Result<()> {
    let p = a.dim();
    if p == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if w.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: w.dim(),
        });
    }
    for i in 0..p {
        let d = a.get(i, i);
        if !(d > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "diagonal entry {i} of the covariance must be positive, got {d}"
            )));
        }
        if w.get(i, i) != 0.0 {
            return Err(Error::InvalidWeights(format!(
                "diagonal weight {i} must be zero (diagonal is unpenalized)"
            )));
        }
    }
    crate::penalty::validate_weight_matrix(w)
}

/// Solves the weighted graphical lasso from a cold start.
pub fn solve_weighted_glasso(
    a: &SymmetricMatrix,
    weights: &SymmetricMatrix,
    opts: &GlassoOptions,
) -> Result<GlassoSolution> {
    solve_weighted_glasso_from(a, weights, opts, None)
}

/// Solves the weighted graphical lasso, optionally warm-started from an
/// earlier solution of the same dimension (e.g. the previous grid point).
pub fn solve_weighted_glasso_from(
    a: &SymmetricMatrix,
    weights: &SymmetricMatrix,
    opts: &GlassoOptions,
    warm: Option<&GlassoSolution>,
) -> Result<GlassoSolution> {
    opts.validate()?;
    validate_problem(a, weights)?;
    let p = a.dim();
    if let Some(ws) = warm {
        if ws.c_hat.dim() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: ws.c_hat.dim(),
            });
        }
    }
    if weights.max_abs_off_diagonal() == 0.0 {
        // unpenalized MLE exists only for PD A
        cholesky(a)?;
    }

    let ad = a.to_dense();
    let wd = weights.to_dense();
    let scale = a.mean_abs_off_diagonal();

    let mut cov = match warm {
        Some(ws) => ws.w_hat.to_dense(),
        None => ad.clone(),
    };
    for i in 0..p {
        cov[i * p + i] = ad[i * p + i];
    }
    // beta[j * p + k]: regression coefficient of variable k in column j's subproblem
    let mut beta = vec![0.0; p * p];

    let mut sweeps = 0;
    let mut converged = true;
    if p > 1 && scale > 0.0 {
        if let Some(ws) = warm {
            for j in 0..p {
                let cjj = ws.c_hat.get(j, j);
                for k in 0..p {
                    if k != j {
                        beta[j * p + k] = -ws.c_hat.get(k, j) / cjj;
                    }
                }
            }
        }
        converged = false;
        let off_count = (p * (p - 1)) as f64;
        let mut vb = vec![0.0; p];
        let mut snapshot = cov.clone();
        while sweeps < opts.max_outer_sweeps {
            snapshot.copy_from_slice(&cov);
            for j in 0..p {
                solve_column(j, p, &cov, &ad, &wd, &mut beta, &mut vb, opts, scale);
                for k in 0..p {
                    if k != j {
                        cov[k * p + j] = vb[k];
                        cov[j * p + k] = vb[k];
                    }
                }
            }
            sweeps += 1;
            let change: f64 = cov
                .iter()
                .zip(&snapshot)
                .map(|(x, y)| (x - y).abs())
                .sum::<f64>()
                / off_count;
            if change <= opts.outer_tol * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            log::debug!("glasso hit the sweep limit of {}", opts.max_outer_sweeps);
        }
    } else {
        for j in 0..p {
            for k in 0..p {
                if k != j {
                    cov[j * p + k] = 0.0;
                }
            }
        }
    }

    // column-wise precision recovery, then symmetrize
    let mut directed = vec![0.0; p * p];
    for j in 0..p {
        let mut denom = ad[j * p + j];
        for k in 0..p {
            if k != j {
                denom -= cov[k * p + j] * beta[j * p + k];
            }
        }
        if !(denom > 0.0 && denom.is_finite()) {
            return Err(Error::NotPositiveDefinite {
                index: j,
                pivot: denom,
            });
        }
        let cjj = 1.0 / denom;
        directed[j * p + j] = cjj;
        for k in 0..p {
            if k != j {
                directed[k * p + j] = -beta[j * p + k] * cjj;
            }
        }
    }
    let c_hat = SymmetricMatrix::from_fn(p, |i, j| {
        let v = 0.5 * (directed[i * p + j] + directed[j * p + i]);
        if i != j && v.abs() <= opts.zero_threshold {
            0.0
        } else {
            v
        }
    })
    .map_err(|_| Error::NotPositiveDefinite {
        index: 0,
        pivot: f64::NAN,
    })?;
    cholesky(&c_hat)?;

    let w_hat = SymmetricMatrix::from_dense_averaged(p, &cov)?;
    let edges = c_hat
        .upper_off_diagonal()
        .filter(|&(_, _, v)| v != 0.0)
        .map(|(i, j, _)| (i, j))
        .collect();
    let objective = objective(&c_hat, a, weights)?;
    Ok(GlassoSolution {
        c_hat,
        w_hat,
        edges,
        objective,
        outer_sweeps: sweeps,
        converged,
        reweight_iterations: 0,
    })
}

/// Cyclic coordinate descent for
/// `min_β ½ βᵀ V β − sᵀ β + Σ_k w_kj |β_k|`, where `V` is `cov` without
/// row/column `j` and `s` is column `j` of `A` without entry `j`.
/// On return `vb = V·β` (entry `j` unused).
#[allow(clippy::too_many_arguments)]
fn solve_column(
    j: usize,
    p: usize,
    cov: &[f64],
    a: &[f64],
    w: &[f64],
    beta: &mut [f64],
    vb: &mut [f64],
    opts: &GlassoOptions,
    scale: f64,
) {
    let b = &mut beta[j * p..(j + 1) * p];
    for k in 0..p {
        vb[k] = if k == j {
            0.0
        } else {
            (0..p)
                .filter(|&l| l != j)
                .map(|l| cov[k * p + l] * b[l])
                .sum()
        };
    }
    let tol = opts.inner_tol * scale;
    for _ in 0..opts.max_inner_sweeps {
        let mut max_change = 0.0f64;
        for k in 0..p {
            if k == j {
                continue;
            }
            let vkk = cov[k * p + k];
            let old = b[k];
            let r = a[k * p + j] - (vb[k] - vkk * old);
            let new = soft_threshold(r, w[k * p + j]) / vkk;
            if new != old {
                let delta = new - old;
                b[k] = new;
                let row = &cov[k * p..(k + 1) * p];
                for (l, v) in vb.iter_mut().enumerate() {
                    *v += row[l] * delta;
                }
                max_change = max_change.max(vkk * delta.abs());
            }
        }
        if max_change <= tol {
            break;
        }
    }
    vb[j] = 0.0;
}

/// `−log|C| + tr(C·A) + Σ_{i≠j} w_ij |c_ij|`.
pub fn objective(c: &SymmetricMatrix, a: &SymmetricMatrix, w: &SymmetricMatrix) -> Result<f64> {
    let factor = cholesky(c)?;
    if w.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: w.dim(),
        });
    }
    let penalty: f64 = c
        .upper_off_diagonal()
        .map(|(i, j, v)| 2.0 * w.get(i, j) * v.abs())
        .sum();
    Ok(-factor.log_det() + trace_product(c, a)? + penalty)
}

/// Largest violation of the optimality conditions at `sol.c_hat`.
///
/// With `G = A − Ĉ⁻¹`: `|G_ij + w_ij sign(ĉ_ij)|` on nonzero off-diagonal
/// entries, `max(0, |G_ij| − w_ij)` on zero ones, and `|G_ii|` on the diagonal.
/// Returns `+∞` if `ĉ` is not positive definite.
pub fn kkt_residual(sol: &GlassoSolution, a: &SymmetricMatrix, w: &SymmetricMatrix) -> f64 {
    let Ok(sigma) = inverse_spd(&sol.c_hat) else {
        return f64::INFINITY;
    };
    let p = a.dim();
    let mut worst = 0.0f64;
    for j in 0..p {
        for i in 0..=j {
            let g = a.get(i, j) - sigma.get(i, j);
            let r = if i == j {
                g.abs()
            } else {
                let c = sol.c_hat.get(i, j);
                if c != 0.0 {
                    (g + w.get(i, j) * c.signum()).abs()
                } else {
                    (g.abs() - w.get(i, j)).max(0.0)
                }
            };
            worst = worst.max(r);
        }
    }
    worst
}
