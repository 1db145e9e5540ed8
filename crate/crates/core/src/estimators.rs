//! Penalty-specific fit drivers on top of the weighted graphical lasso.
//!
//! * LASSO: one solve with uniform weights `λ`.
//! * SCAD: LASSO start, then local linear approximation: re-solve with weights
//!   `p'_λ(|ĉ_ij|)` until the edge set and values settle.
//! * Adaptive LASSO: one solve with weights `λ·|c̃_ij|^(-γ)`, where `c̃` is the
//!   inverse of the (ridged, if singular) sample covariance.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glasso::{solve_weighted_glasso_from, GlassoOptions, GlassoSolution};
use crate::numerics::{cholesky, inverse_spd, trace_product, SymmetricMatrix};
use crate::penalty::{
    adaptive_weights, check_gamma, check_scad_a, lla_weight_matrix, penalty_value, uniform_weights,
    PenaltySpec, DEFAULT_ADAPTIVE_GAMMA, DEFAULT_SCAD_A, DEFAULT_WEIGHT_CAP,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitOptions {
    pub glasso: GlassoOptions,
    pub max_lla_iterations: usize,
    pub lla_tol: f64,
    pub ridge_epsilon_scale: f64,
    pub weight_cap: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            glasso: GlassoOptions::default(),
            max_lla_iterations: 10,
            lla_tol: 1e-4,
            ridge_epsilon_scale: 1e-3,
            weight_cap: DEFAULT_WEIGHT_CAP,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        self.glasso.validate()?;
        if self.max_lla_iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_lla_iterations must be >= 1".into(),
            ));
        }
        if !(self.lla_tol > 0.0) || !(self.ridge_epsilon_scale > 0.0) || !(self.weight_cap > 0.0) {
            return Err(Error::InvalidArgument(
                "lla_tol, ridge_epsilon_scale and weight_cap must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyKind {
    Lasso,
    Scad,
    Adaptive,
}

impl PenaltyKind {
    pub const ALL: [PenaltyKind; 3] =
        [PenaltyKind::Lasso, PenaltyKind::Scad, PenaltyKind::Adaptive];

    /// Short label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            PenaltyKind::Lasso => "LASSO",
            PenaltyKind::Scad => "SCAD",
            PenaltyKind::Adaptive => "ADAP",
        }
    }
}

impl fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Penalty family plus its shape parameters (`a` for SCAD, `gamma` for adaptive).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Penalty {
    pub kind: PenaltyKind,
    pub a: f64,
    pub gamma: f64,
}

impl Penalty {
    pub fn new(kind: PenaltyKind) -> Self {
        Self {
            kind,
            a: DEFAULT_SCAD_A,
            gamma: DEFAULT_ADAPTIVE_GAMMA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PenaltyKind::Lasso => Ok(()),
            PenaltyKind::Scad => check_scad_a(self.a),
            PenaltyKind::Adaptive => check_gamma(self.gamma),
        }
    }
}

impl From<PenaltyKind> for Penalty {
    fn from(kind: PenaltyKind) -> Self {
        Penalty::new(kind)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    Ok(())
}

pub fn fit_lasso(a: &SymmetricMatrix, lambda: f64, opts: &FitOptions) -> Result<GlassoSolution> {
    fit_lasso_from(a, lambda, opts, None)
}

pub fn fit_lasso_from(
    a: &SymmetricMatrix,
    lambda: f64,
    opts: &FitOptions,
    warm: Option<&GlassoSolution>,
) -> Result<GlassoSolution> {
    check_lambda(lambda)?;
    solve_weighted_glasso_from(a, &uniform_weights(a.dim(), lambda), &opts.glasso, warm)
}

pub fn fit_scad(
    a: &SymmetricMatrix,
    lambda: f64,
    scad_a: f64,
    opts: &FitOptions,
) -> Result<GlassoSolution> {
    fit_scad_from(a, lambda, scad_a, opts, None).map(|(sol, _)| sol)
}

/// SCAD by iterated LLA. Returns the final iterate and the LASSO start.
pub fn fit_scad_from(
    a: &SymmetricMatrix,
    lambda: f64,
    scad_a: f64,
    opts: &FitOptions,
    warm: Option<&GlassoSolution>,
) -> Result<(GlassoSolution, GlassoSolution)> {
    check_lambda(lambda)?;
    check_scad_a(scad_a)?;
    opts.validate()?;
    let start = fit_lasso_from(a, lambda, opts, warm)?;
    if lambda == 0.0 {
        return Ok((start.clone(), start));
    }
    let scale = a.mean_abs_off_diagonal();
    let mut current = start.clone();
    let mut settled = false;
    let mut steps = 0;
    let mut inner_converged = current.converged;
    while steps < opts.max_lla_iterations {
        let weights = lla_weight_matrix(lambda, scad_a, &current.c_hat);
        let next = solve_weighted_glasso_from(a, &weights, &opts.glasso, Some(&current))?;
        steps += 1;
        inner_converged &= next.converged;
        let stable_edges = next.edges == current.edges;
        let change = next
            .c_hat
            .upper_off_diagonal()
            .map(|(i, j, v)| (v - current.c_hat.get(i, j)).abs())
            .sum::<f64>()
            / (a.dim() * a.dim().saturating_sub(1) / 2).max(1) as f64;
        current = next;
        if stable_edges && change <= opts.lla_tol * scale {
            settled = true;
            break;
        }
    }
    if !settled {
        log::debug!("SCAD reweighting reached {steps} iterations at lambda {lambda}");
    }
    current.reweight_iterations = steps;
    current.converged = inner_converged && settled;
    Ok((current, start))
}

pub fn fit_adaptive(
    a: &SymmetricMatrix,
    lambda: f64,
    gamma: f64,
    c_tilde: &SymmetricMatrix,
    opts: &FitOptions,
) -> Result<GlassoSolution> {
    fit_adaptive_from(a, lambda, gamma, c_tilde, opts, None)
}

pub fn fit_adaptive_from(
    a: &SymmetricMatrix,
    lambda: f64,
    gamma: f64,
    c_tilde: &SymmetricMatrix,
    opts: &FitOptions,
    warm: Option<&GlassoSolution>,
) -> Result<GlassoSolution> {
    check_lambda(lambda)?;
    check_gamma(gamma)?;
    if c_tilde.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: c_tilde.dim(),
        });
    }
    let weights = adaptive_weights(c_tilde, gamma, opts.weight_cap).scaled(lambda);
    solve_weighted_glasso_from(a, &weights, &opts.glasso, warm)
}

/// Pilot precision estimate `(A + εI)⁻¹` for adaptive weights, with `ε = 0`
/// when `A` is positive definite and `ε = ridge_epsilon_scale · tr(A)/p` otherwise.
pub fn initial_estimate(a: &SymmetricMatrix, opts: &FitOptions) -> Result<SymmetricMatrix> {
    if cholesky(a).is_ok() {
        return inverse_spd(a);
    }
    let eps = opts.ridge_epsilon_scale * a.trace() / a.dim() as f64;
    inverse_spd(&a.add_diagonal(eps))
}

/// `−log|C| + tr(C·A) + Σ_{i≠j} p_λ(|c_ij|)` with the exact (non-linearized) penalty.
pub fn penalized_objective(
    c: &SymmetricMatrix,
    a: &SymmetricMatrix,
    spec: &PenaltySpec,
) -> Result<f64> {
    spec.validate()?;
    let factor = cholesky(c)?;
    let mut penalty = 0.0;
    for (i, j, v) in c.upper_off_diagonal() {
        penalty += 2.0 * penalty_value(spec, v.abs(), (i, j))?;
    }
    Ok(-factor.log_det() + trace_product(c, a)? + penalty)
}

/// Fits one penalty family along a sequence of `λ` values on a fixed
/// covariance, warm-starting each solve from the previous one.
#[derive(Clone, Debug)]
pub struct PathFitter<'a> {
    a: &'a SymmetricMatrix,
    penalty: Penalty,
    opts: &'a FitOptions,
    c_tilde: Option<SymmetricMatrix>,
    warm: Option<GlassoSolution>,
}

impl<'a> PathFitter<'a> {
    pub fn new(a: &'a SymmetricMatrix, penalty: Penalty, opts: &'a FitOptions) -> Result<Self> {
        penalty.validate()?;
        opts.validate()?;
        let c_tilde = match penalty.kind {
            PenaltyKind::Adaptive => Some(initial_estimate(a, opts)?),
            _ => None,
        };
        Ok(Self {
            a,
            penalty,
            opts,
            c_tilde,
            warm: None,
        })
    }

    /// Pilot estimate used for adaptive weights, if any.
    pub fn pilot(&self) -> Option<&SymmetricMatrix> {
        self.c_tilde.as_ref()
    }

    pub fn fit(&mut self, lambda: f64) -> Result<GlassoSolution> {
        let warm = self.warm.as_ref();
        let (sol, next_warm) = match self.penalty.kind {
            PenaltyKind::Lasso => {
                let s = fit_lasso_from(self.a, lambda, self.opts, warm)?;
                (s.clone(), s)
            }
            PenaltyKind::Scad => {
                let (s, start) = fit_scad_from(self.a, lambda, self.penalty.a, self.opts, warm)?;
                (s, start)
            }
            PenaltyKind::Adaptive => {
                let c_tilde = self
                    .c_tilde
                    .as_ref()
                    .expect("pilot computed at construction");
                let s = fit_adaptive_from(
                    self.a,
                    lambda,
                    self.penalty.gamma,
                    c_tilde,
                    self.opts,
                    warm,
                )?;
                (s.clone(), s)
            }
        };
        self.warm = Some(next_warm);
        Ok(sol)
    }
}

/// One-off fit of any penalty family at a single `λ`.
pub fn fit_penalized(
    a: &SymmetricMatrix,
    penalty: Penalty,
    lambda: f64,
    opts: &FitOptions,
) -> Result<GlassoSolution> {
    PathFitter::new(a, penalty, opts)?.fit(lambda)
}
