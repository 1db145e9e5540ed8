//! True precision matrices for the simulation models and a seeded
//! multivariate normal sampler.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::EdgeSet;
use crate::numerics::{cholesky, inverse_spd, DataMatrix, SymmetricMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Tridiagonal: `c_ii = 1`, `c_{i,i±1} = 0.5`.
    Ar1,
    /// Pentadiagonal: `c_ii = 1.5`, `c_{i,i±1} = 0.5`, `c_{i,i±2} = 0.4`.
    Ar2,
    /// Random points in the unit square joined to their nearest neighbours.
    #[serde(rename = "geo")]
    SparseGeometric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphModel {
    pub kind: ModelKind,
    pub p: usize,
    /// Nearest neighbours per node (geometric model only).
    pub neighbors: usize,
    /// Layout and edge-value seed (geometric model only).
    pub seed: u64,
}

impl GraphModel {
    pub fn ar1(p: usize) -> Self {
        Self {
            kind: ModelKind::Ar1,
            p,
            neighbors: 3,
            seed: 0,
        }
    }

    pub fn ar2(p: usize) -> Self {
        Self {
            kind: ModelKind::Ar2,
            ..Self::ar1(p)
        }
    }

    pub fn geometric(p: usize, neighbors: usize, seed: u64) -> Self {
        Self {
            kind: ModelKind::SparseGeometric,
            p,
            neighbors,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let min_p = match self.kind {
            ModelKind::Ar1 => 2,
            ModelKind::Ar2 => 3,
            ModelKind::SparseGeometric => 2,
        };
        if self.p < min_p {
            return Err(Error::InvalidArgument(format!(
                "{:?} needs p >= {min_p}, got {}",
                self.kind, self.p
            )));
        }
        if self.kind == ModelKind::SparseGeometric && !(1..self.p).contains(&self.neighbors) {
            return Err(Error::InvalidArgument(format!(
                "neighbors must be in 1..{}, got {}",
                self.p, self.neighbors
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrueModel {
    pub precision: SymmetricMatrix,
    pub covariance: SymmetricMatrix,
    #[serde(serialize_with = "crate::metrics::serialize_one_based")]
    pub edges: EdgeSet,
}

impl TrueModel {
    pub fn p(&self) -> usize {
        self.precision.dim()
    }
}

fn banded(p: usize, bands: &[f64]) -> Result<SymmetricMatrix> {
    SymmetricMatrix::from_fn(p, |i, j| bands.get(j - i).copied().unwrap_or(0.0))
}

fn geometric_precision(model: &GraphModel) -> Result<SymmetricMatrix> {
    let p = model.p;
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let points: Vec<(f64, f64)> = (0..p)
        .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    let mut edges = EdgeSet::new();
    for i in 0..p {
        let mut others: Vec<(f64, usize)> = (0..p)
            .filter(|&j| j != i)
            .map(|j| {
                let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
                (dx.hypot(dy), j)
            })
            .collect();
        others.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for &(_, j) in others.iter().take(model.neighbors) {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    let mut c = SymmetricMatrix::zeros(p);
    for &(i, j) in &edges {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let magnitude = rng.random_range(0.5..=1.0);
        c.set(i, j, sign * magnitude);
    }
    for i in 0..p {
        let row_sum: f64 = (0..p).filter(|&j| j != i).map(|j| c.get(i, j).abs()).sum();
        c.set(i, i, if row_sum > 0.0 { 2.0 * row_sum } else { 1.0 });
    }
    Ok(c)
}

/// Builds the true precision matrix, its inverse and its edge set.
pub fn true_precision(model: &GraphModel) -> Result<TrueModel> {
    model.validate()?;
    let precision = match model.kind {
        ModelKind::Ar1 => banded(model.p, &[1.0, 0.5])?,
        ModelKind::Ar2 => banded(model.p, &[1.5, 0.5, 0.4])?,
        ModelKind::SparseGeometric => geometric_precision(model)?,
    };
    let covariance = inverse_spd(&precision).map_err(|e| {
        Error::InvalidArgument(format!("internal error: true precision is not PD ({e})"))
    })?;
    let edges = precision
        .upper_off_diagonal()
        .filter(|&(_, _, v)| v != 0.0)
        .map(|(i, j, _)| (i, j))
        .collect();
    Ok(TrueModel {
        precision,
        covariance,
        edges,
    })
}

/// Draws `n` rows `L·z` with `Σ₀ = L·Lᵀ` and `z` standard normal (ChaCha8, Ziggurat).
pub fn sample_mvn(truth: &TrueModel, n: usize, seed: u64) -> Result<DataMatrix> {
    let factor = cholesky(&truth.covariance)?;
    let p = truth.p();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * p);
    let mut z = vec![0.0; p];
    for _ in 0..n {
        for v in &mut z {
            *v = rng.sample(StandardNormal);
        }
        data.extend(factor.mul_vec(&z));
    }
    DataMatrix::from_row_major(n, p, data)
}
