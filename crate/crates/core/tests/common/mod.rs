#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_ggm::SymmetricMatrix;

/// A random positive definite `p × p` matrix `BBᵀ/p + 0.1·I`.
pub fn random_pd(p: usize, rng: &mut ChaCha8Rng) -> SymmetricMatrix {
    let b: Vec<f64> = (0..p * p).map(|_| rng.random_range(-1.0..1.0)).collect();
    SymmetricMatrix::from_fn(p, |i, j| {
        let dot: f64 = (0..p).map(|k| b[i * p + k] * b[j * p + k]).sum();
        dot / p as f64 + if i == j { 0.1 } else { 0.0 }
    })
    .unwrap()
}

/// Symmetric nonnegative weights with zero diagonal, off-diagonals drawn from `[0, hi]`.
pub fn random_weights(p: usize, hi: f64, rng: &mut ChaCha8Rng) -> SymmetricMatrix {
    let mut w = SymmetricMatrix::zeros(p);
    for j in 0..p {
        for i in 0..j {
            w.set(i, j, rng.random_range(0.0..=hi));
        }
    }
    w
}

/// One weighted problem `(A, W)` derived from `seed`.
pub fn random_problem(p: usize, w_hi: f64, seed: u64) -> (SymmetricMatrix, SymmetricMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_pd(p, &mut rng);
    let w = random_weights(p, w_hi, &mut rng);
    (a, w)
}

fn dense(m: &SymmetricMatrix) -> DMatrix<f64> {
    let p = m.dim();
    DMatrix::from_fn(p, p, |i, j| m.get(i, j))
}

/// `−log|C| + tr(CA) + Σ_{i≠j} w_ij |c_ij|`, or `None` if `C` is not PD.
pub fn dense_objective(c: &DMatrix<f64>, a: &DMatrix<f64>, w: &DMatrix<f64>) -> Option<f64> {
    let chol = c.clone().cholesky()?;
    let logdet = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let p = c.nrows();
    let mut pen = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                pen += w[(i, j)] * c[(i, j)].abs();
            }
        }
    }
    Some(-logdet + (c * a).trace() + pen)
}

/// Minimizes `−log|C| + tr(CB)` over PD `C` supported on the diagonal plus
/// `free` by damped Newton steps.
fn newton_on_face(b: &DMatrix<f64>, free: &[(usize, usize)], start: &DMatrix<f64>) -> DMatrix<f64> {
    let p = b.nrows();
    let mut basis: Vec<DMatrix<f64>> = (0..p)
        .map(|i| {
            let mut e = DMatrix::zeros(p, p);
            e[(i, i)] = 1.0;
            e
        })
        .collect();
    for &(i, j) in free {
        let mut e = DMatrix::zeros(p, p);
        e[(i, j)] = 1.0;
        e[(j, i)] = 1.0;
        basis.push(e);
    }
    let f = |c: &DMatrix<f64>| -> Option<f64> {
        let chol = c.clone().cholesky()?;
        let logdet = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Some(-logdet + (c * b).trace())
    };
    let m = basis.len();
    let mut c = start.clone();
    for _ in 0..200 {
        let Some(inv) = c.clone().try_inverse() else {
            break;
        };
        let g = b - &inv;
        let grad = DVector::from_fn(m, |k, _| (&g * &basis[k]).trace());
        if grad.amax() < 1e-13 {
            break;
        }
        let ie: Vec<DMatrix<f64>> = basis.iter().map(|e| &inv * e).collect();
        let hess = DMatrix::from_fn(m, m, |k, l| (&ie[k] * &ie[l]).trace());
        let step = match hess.clone().cholesky() {
            Some(h) => h.solve(&grad),
            None => grad.clone(),
        };
        let f0 = f(&c).unwrap();
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let mut trial = c.clone();
            for k in 0..m {
                trial -= &basis[k] * (t * step[k]);
            }
            if let Some(ft) = f(&trial) {
                if ft <= f0 - 1e-4 * t * grad.dot(&step) {
                    c = trial;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    c
}

/// Global minimum of the weighted objective for small `p`, found by solving
/// the smooth problem on every sign/zero face of the off-diagonal entries.
///
/// Every evaluated point is PD, so each candidate bounds the minimum from
/// above; the face containing the minimizer attains it.
pub fn oracle_minimum(a: &SymmetricMatrix, w: &SymmetricMatrix) -> f64 {
    let p = a.dim();
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let ad = dense(a);
    let wd = dense(w);
    let start = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 / ad[(i, i)] } else { 0.0 });
    let mut best = dense_objective(&start, &ad, &wd).unwrap();
    let faces = 3usize.pow(pairs.len() as u32);
    for face in 0..faces {
        let mut code = face;
        let mut b = ad.clone();
        let mut free = Vec::new();
        for &(i, j) in &pairs {
            let s = match code % 3 {
                0 => 0.0,
                1 => 1.0,
                _ => -1.0,
            };
            code /= 3;
            if s != 0.0 {
                b[(i, j)] += s * wd[(i, j)];
                b[(j, i)] += s * wd[(i, j)];
                free.push((i, j));
            }
        }
        let c = newton_on_face(&b, &free, &start);
        if let Some(v) = dense_objective(&c, &ad, &wd) {
            best = best.min(v);
        }
    }
    best
}
