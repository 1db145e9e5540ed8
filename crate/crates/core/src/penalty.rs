//! Penalty functions and weight matrices for reweighted graphical lasso solves.
//!
//! Every penalty acts on off-diagonal entries only; diagonal weights are zero.

use crate::error::{Error, Result};
use crate::numerics::SymmetricMatrix;

pub const DEFAULT_SCAD_A: f64 = 3.7;
pub const DEFAULT_ADAPTIVE_GAMMA: f64 = 0.5;
pub const DEFAULT_WEIGHT_CAP: f64 = 1e6;

/// A fully specified penalty.
#[derive(Clone, Debug, PartialEq)]
pub enum PenaltySpec {
    Lasso {
        lambda: f64,
    },
    Scad {
        lambda: f64,
        a: f64,
    },
    /// `weights` are the raw `|c̃_ij|^(-γ)` factors; the slope at `(i, j)` is
    /// `lambda · weights[i, j]`.
    AdaptiveLasso {
        lambda: f64,
        gamma: f64,
        weights: Option<SymmetricMatrix>,
    },
}

impl PenaltySpec {
    pub fn lambda(&self) -> f64 {
        match *self {
            PenaltySpec::Lasso { lambda }
            | PenaltySpec::Scad { lambda, .. }
            | PenaltySpec::AdaptiveLasso { lambda, .. } => lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lambda = self.lambda();
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        match self {
            PenaltySpec::Lasso { .. } => Ok(()),
            PenaltySpec::Scad { a, .. } => check_scad_a(*a),
            PenaltySpec::AdaptiveLasso { gamma, weights, .. } => {
                check_gamma(*gamma)?;
                if let Some(w) = weights {
                    validate_weight_matrix(w)?;
                }
                Ok(())
            }
        }
    }
}

pub(crate) fn check_scad_a(a: f64) -> Result<()> {
    if !(a > 2.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "SCAD a must exceed 2, got {a}"
        )));
    }
    Ok(())
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "adaptive gamma must be positive, got {gamma}"
        )));
    }
    Ok(())
}

/// Weights must be finite and nonnegative.
pub fn validate_weight_matrix(w: &SymmetricMatrix) -> Result<()> {
    for j in 0..w.dim() {
        for i in 0..=j {
            let v = w.get(i, j);
            if !(v >= 0.0) {
                return Err(Error::InvalidWeights(format!(
                    "weight ({i}, {j}) = {v} is negative"
                )));
            }
        }
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "penalty argument must be >= 0, got {theta}"
        )));
    }
    Ok(())
}

/// SCAD slope `p'_λ(θ) = λ{ I(θ ≤ λ) + (aλ − θ)₊ / ((a − 1)λ) · I(θ > λ) }`.
///
/// At `θ = 0` the right limit `λ` is returned.
pub fn scad_derivative(theta: f64, lambda: f64, a: f64) -> Result<f64> {
    check_theta(theta)?;
    if lambda <= 0.0 {
        return Ok(0.0);
    }
    if theta <= lambda {
        Ok(lambda)
    } else {
        Ok((a * lambda - theta).max(0.0) / (a - 1.0))
    }
}

/// SCAD value, the integral of [`scad_derivative`] from 0.
pub fn scad_value(theta: f64, lambda: f64, a: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(if theta <= lambda {
        lambda * theta
    } else if theta <= a * lambda {
        -(theta * theta - 2.0 * a * lambda * theta + lambda * lambda) / (2.0 * (a - 1.0))
    } else {
        (a + 1.0) * lambda * lambda / 2.0
    })
}

/// Slope of the penalty at `|c_ij| = theta`, used as the L1 weight of entry `(i, j)`.
pub fn penalty_derivative(spec: &PenaltySpec, theta: f64, at: (usize, usize)) -> Result<f64> {
    check_theta(theta)?;
    match spec {
        PenaltySpec::Lasso { lambda } => Ok(*lambda),
        PenaltySpec::Scad { lambda, a } => scad_derivative(theta, *lambda, *a),
        PenaltySpec::AdaptiveLasso {
            lambda, weights, ..
        } => {
            let w = weights.as_ref().ok_or_else(|| {
                Error::InvalidWeights("adaptive LASSO penalty has no weight matrix".into())
            })?;
            let (i, j) = at;
            if i >= w.dim() || j >= w.dim() {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i}, {j}) outside a {0}x{0} weight matrix",
                    w.dim()
                )));
            }
            Ok(lambda * w.get(i, j))
        }
    }
}

/// Penalty value `p_λ(θ)` at entry `(i, j)`.
pub fn penalty_value(spec: &PenaltySpec, theta: f64, at: (usize, usize)) -> Result<f64> {
    match spec {
        PenaltySpec::Scad { lambda, a } => scad_value(theta, *lambda, *a),
        _ => Ok(penalty_derivative(spec, theta, at)? * theta),
    }
}

/// Adaptive LASSO factors `min(|c̃_ij|^(-γ), cap)` off the diagonal, zero on it.
pub fn adaptive_weights(c_tilde: &SymmetricMatrix, gamma: f64, cap: f64) -> SymmetricMatrix {
    let p = c_tilde.dim();
    let mut w = SymmetricMatrix::zeros(p);
    for (i, j, c) in c_tilde.upper_off_diagonal() {
        let raw = c.abs().powf(-gamma);
        w.set(i, j, if raw.is_finite() { raw.min(cap) } else { cap });
    }
    w
}

/// LLA weights `p'_λ(|ĉ_ij|)` for a SCAD penalty at the current estimate.
pub fn lla_weight_matrix(lambda: f64, a: f64, current: &SymmetricMatrix) -> SymmetricMatrix {
    let p = current.dim();
    let mut w = SymmetricMatrix::zeros(p);
    for (i, j, c) in current.upper_off_diagonal() {
        w.set(
            i,
            j,
            scad_derivative(c.abs(), lambda, a).expect("absolute value is nonnegative"),
        );
    }
    w
}

/// Uniform off-diagonal weights `lambda`, zero diagonal.
pub fn uniform_weights(dim: usize, lambda: f64) -> SymmetricMatrix {
    let mut w = SymmetricMatrix::zeros(dim);
    for j in 1..dim {
        for i in 0..j {
            w.set(i, j, lambda);
        }
    }
    w
}

/// Weight matrix of the linearized penalty at `current` (only the SCAD slope
/// depends on `current`).
pub fn weight_matrix(spec: &PenaltySpec, current: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    spec.validate()?;
    let p = current.dim();
    match spec {
        PenaltySpec::Lasso { lambda } => Ok(uniform_weights(p, *lambda)),
        PenaltySpec::Scad { lambda, a } => Ok(lla_weight_matrix(*lambda, *a, current)),
        PenaltySpec::AdaptiveLasso {
            lambda, weights, ..
        } => {
            let w = weights.as_ref().ok_or_else(|| {
                Error::InvalidWeights("adaptive LASSO penalty has no weight matrix".into())
            })?;
            if w.dim() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: w.dim(),
                });
            }
            let mut out = w.scaled(*lambda);
            for i in 0..p {
                out.set(i, i, 0.0);
            }
            Ok(out)
        }
    }
}
