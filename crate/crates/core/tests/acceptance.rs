//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.

mod common;

use std::io::Write;
use std::process::Command;
use std::sync::OnceLock;

use common::{oracle_minimum, random_problem};
use serde_json::Value;
use sparse_ggm::app::experiment::{
    run_experiment, CriterionKind, ExperimentConfig, ExperimentReport,
};
use sparse_ggm::estimators::{fit_adaptive, fit_lasso, fit_scad, initial_estimate};
use sparse_ggm::glasso::{kkt_residual, objective, solve_weighted_glasso};
use sparse_ggm::metrics::{confusion, mcc, sensitivity, specificity, ConfusionCounts, EdgeSet};
use sparse_ggm::numerics::{cholesky, inverse_spd, log_det, sample_covariance, trace_product};
use sparse_ggm::penalty::{
    adaptive_weights, lla_weight_matrix, penalty_derivative, scad_derivative, scad_value,
    uniform_weights, PenaltySpec,
};
use sparse_ggm::simdata::{sample_mvn, true_precision, GraphModel, TrueModel};
use sparse_ggm::tuning::{bic_score, cv_score, default_grid, fold_assignment, select};
use sparse_ggm::{
    Criterion, DataMatrix, FitOptions, GlassoOptions, GridSpec, LambdaGrid, Penalty, PenaltyKind,
    SymmetricMatrix,
};

/// Prints the verdict line for `id` and fails the test when any check failed.
fn report(id: u8, title: &str, failures: &[String], detail: &str) {
    let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "criterion {id} [{verdict}] {title}: {detail}");
    for f in failures {
        let _ = writeln!(err, "    - {f}");
    }
    drop(err);
    assert!(failures.is_empty(), "criterion {id} failed: {failures:?}");
}

struct Checks(Vec<String>);

impl Checks {
    fn new() -> Self {
        Checks(Vec::new())
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.0.push(what.into());
        }
    }

    fn close(&mut self, got: f64, want: f64, tol: f64, what: &str) {
        self.check(
            (got - want).abs() <= tol,
            format!("{what}: got {got}, want {want} ± {tol}"),
        );
    }
}

fn bic_report(
    model: GraphModel,
    n: usize,
    reps: usize,
    penalties: &[PenaltyKind],
) -> ExperimentReport {
    let mut cfg = ExperimentConfig::new(model, n, reps);
    cfg.penalties = penalties.to_vec();
    cfg.criteria = vec![CriterionKind::Bic];
    run_experiment(&cfg).expect("experiment runs")
}

fn ar1_desk() -> &'static ExperimentReport {
    static R: OnceLock<ExperimentReport> = OnceLock::new();
    R.get_or_init(|| bic_report(GraphModel::ar1(20), 5000, 20, &PenaltyKind::ALL))
}

fn ar2_desk() -> &'static ExperimentReport {
    static R: OnceLock<ExperimentReport> = OnceLock::new();
    R.get_or_init(|| bic_report(GraphModel::ar2(20), 5000, 20, &PenaltyKind::ALL))
}

fn bic_means(r: &ExperimentReport, penalty: PenaltyKind) -> (f64, f64, f64) {
    let c = r.cell(penalty, CriterionKind::Bic).expect("cell present");
    (c.specificity.mean, c.sensitivity.mean, c.mcc.mean)
}

fn dense_eq(m: &SymmetricMatrix, rows: &[&[f64]], tol: f64) -> bool {
    rows.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, &v)| (m.get(i, j) - v).abs() <= tol)
    })
}

fn sym(rows: &[&[f64]]) -> SymmetricMatrix {
    SymmetricMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn diag(d: &[f64]) -> SymmetricMatrix {
    SymmetricMatrix::from_diagonal(d).unwrap()
}

#[test]
fn criterion_1_oracle_equivalence() {
    let opts = GlassoOptions::default();
    let mut c = Checks::new();
    let (mut worst_gap, mut worst_kkt) = (f64::NEG_INFINITY, 0.0f64);
    for seed in 0..50 {
        let (a, w) = random_problem(3, 0.5, 1000 + seed);
        let sol = solve_weighted_glasso(&a, &w, &opts).unwrap();
        let got = objective(&sol.c_hat, &a, &w).unwrap();
        let best = oracle_minimum(&a, &w);
        let kkt = kkt_residual(&sol, &a, &w);
        worst_gap = worst_gap.max(got - best);
        worst_kkt = worst_kkt.max(kkt);
        c.check(
            got <= best + 1e-4,
            format!("seed {seed}: objective {got} > oracle {best} + 1e-4"),
        );
        c.check(kkt <= 1e-3, format!("seed {seed}: KKT residual {kkt}"));
    }
    report(
        1,
        "oracle equivalence, 50 random p=3 problems",
        &c.0,
        &format!("max objective gap {worst_gap:.2e}, max KKT {worst_kkt:.2e}"),
    );
}

#[test]
fn criterion_2_closed_forms() {
    let opts = FitOptions::default();
    let mut c = Checks::new();
    let mut worst = 0.0f64;
    let mut problems: Vec<SymmetricMatrix> = (0..10)
        .map(|s| random_problem(2 + s as usize % 7, 0.0, s).0)
        .collect();
    problems.push(true_precision(&GraphModel::ar1(8)).unwrap().covariance);
    for a in &problems {
        let inv = inverse_spd(a).unwrap();
        let c_tilde = initial_estimate(a, &opts).unwrap();
        let fits = [
            ("lasso", fit_lasso(a, 0.0, &opts).unwrap()),
            ("scad", fit_scad(a, 0.0, 3.7, &opts).unwrap()),
            (
                "adaptive",
                fit_adaptive(a, 0.0, 0.5, &c_tilde, &opts).unwrap(),
            ),
        ];
        for (name, fit) in &fits {
            let err = fit.c_hat.max_abs_diff(&inv).unwrap();
            worst = worst.max(err);
            c.check(
                err <= 1e-4,
                format!("{name} lambda=0, p={}: max error {err}", a.dim()),
            );
        }
        let lambda_max = a.max_abs_off_diagonal();
        for lambda in [lambda_max, 2.0 * lambda_max] {
            for (name, fit) in [
                ("lasso", fit_lasso(a, lambda, &opts).unwrap()),
                ("scad", fit_scad(a, lambda, 3.7, &opts).unwrap()),
            ] {
                c.check(
                    fit.edges.is_empty(),
                    format!("{name} at lambda {lambda}: {} edges", fit.edges.len()),
                );
                let exact = (0..a.dim()).all(|i| fit.c_hat.get(i, i) == 1.0 / a.get(i, i))
                    && fit.c_hat.off_diagonal_nonzeros() == 0;
                c.check(
                    exact,
                    format!("{name} at lambda {lambda}: not exactly diag(1/a_ii)"),
                );
            }
        }
    }
    report(
        2,
        "closed-form solutions at lambda = 0 and lambda >= max|a_ij|",
        &c.0,
        &format!(
            "{} matrices, max |C - inv(A)| = {worst:.2e}",
            problems.len()
        ),
    );
}

#[test]
fn criterion_3_ar1_desk_consistency() {
    let r = ar1_desk();
    let mut c = Checks::new();
    let mut detail = Vec::new();
    for penalty in [PenaltyKind::Scad, PenaltyKind::Adaptive] {
        let (spec, sens, _) = bic_means(r, penalty);
        c.check(
            sens >= 0.99,
            format!("{penalty}+BIC mean SENS {sens:.4} < 0.99"),
        );
        c.check(
            spec >= 0.93,
            format!("{penalty}+BIC mean SPEC {spec:.4} < 0.93"),
        );
        detail.push(format!("{penalty} SPEC {spec:.3} SENS {sens:.3}"));
    }
    report(
        3,
        "AR(1) p=20 n=5000 reps=20, BIC",
        &c.0,
        &detail.join("; "),
    );
}

#[test]
fn criterion_4_ar2_desk_consistency() {
    let (spec, sens, _) = bic_means(ar2_desk(), PenaltyKind::Scad);
    let mut c = Checks::new();
    c.check(spec >= 0.98, format!("SCAD+BIC mean SPEC {spec:.4} < 0.98"));
    c.check(sens >= 0.99, format!("SCAD+BIC mean SENS {sens:.4} < 0.99"));
    report(
        4,
        "AR(2) p=20 n=5000 reps=20, SCAD+BIC",
        &c.0,
        &format!("SPEC {spec:.3} SENS {sens:.3}"),
    );
}

#[test]
fn criterion_5_lasso_bic_over_selects() {
    let mut c = Checks::new();
    let mut detail = Vec::new();
    for (name, r) in [("AR(1)", ar1_desk()), ("AR(2)", ar2_desk())] {
        let (spec, sens, _) = bic_means(r, PenaltyKind::Lasso);
        c.check(
            spec <= 0.93,
            format!("{name} LASSO+BIC mean SPEC {spec:.4} > 0.93"),
        );
        c.close(sens, 1.0, 0.01, &format!("{name} LASSO+BIC mean SENS"));
        detail.push(format!("{name} SPEC {spec:.3} SENS {sens:.3}"));
    }
    report(
        5,
        "LASSO+BIC at p=20 n=5000 reps=20",
        &c.0,
        &detail.join("; "),
    );
}

#[test]
fn criterion_6_small_sample_adaptive() {
    let r = bic_report(GraphModel::ar1(35), 100, 20, &[PenaltyKind::Adaptive]);
    let (spec, sens, m) = bic_means(&r, PenaltyKind::Adaptive);
    let mut c = Checks::new();
    c.check(sens >= 0.97, format!("mean SENS {sens:.4} < 0.97"));
    c.close(spec, 0.849, 0.15, "mean SPEC");
    c.close(m, 0.568, 0.15, "mean MCC");
    report(
        6,
        "AR(1) p=35 n=100 reps=20, ADAP+BIC (published 0.849 / 1.000 / 0.568)",
        &c.0,
        &format!("SPEC {spec:.3} SENS {sens:.3} MCC {m:.3}"),
    );
}

#[test]
fn criterion_7_exact_recovery_trend() {
    let ns = [100, 1000, 10_000];
    let reports: Vec<ExperimentReport> = ns
        .iter()
        .map(|&n| {
            bic_report(
                GraphModel::ar1(10),
                n,
                20,
                &[PenaltyKind::Scad, PenaltyKind::Adaptive],
            )
        })
        .collect();
    let mut c = Checks::new();
    let mut detail = Vec::new();
    for penalty in [PenaltyKind::Scad, PenaltyKind::Adaptive] {
        let rates: Vec<f64> = reports
            .iter()
            .map(|r| {
                r.cell(penalty, CriterionKind::Bic)
                    .unwrap()
                    .exact_recovery_rate
            })
            .collect();
        c.check(
            rates.windows(2).all(|w| w[0] <= w[1]),
            format!("{penalty}: recovery rates {rates:?} decrease in n"),
        );
        c.check(
            rates[2] >= 0.95,
            format!("{penalty}: rate {} at n=10000 < 0.95", rates[2]),
        );
        detail.push(format!("{penalty} {rates:?}"));
    }
    report(
        7,
        "AR(1) p=10 exact recovery over n = 100, 1000, 10000",
        &c.0,
        &detail.join("; "),
    );
}

fn metric_and_penalty_examples(c: &mut Checks) {
    let opts = FitOptions::default();
    let gopts = GlassoOptions::default();
    let ar1_3 = [&[1.0, 0.5, 0.0][..], &[0.5, 1.0, 0.5], &[0.0, 0.5, 1.0]];

    // sample covariance
    let cov = |rows: &[&[f64]]| {
        sample_covariance(
            &DataMatrix::new(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap(),
            true,
        )
    };
    c.check(
        dense_eq(&cov(&[&[1.0], &[-1.0]]), &[&[1.0]], 0.0),
        "cov [[1],[-1]]",
    );
    c.check(
        dense_eq(
            &cov(&[&[0.0, 0.0], &[0.0, 0.0]]),
            &[&[0.0, 0.0], &[0.0, 0.0]],
            0.0,
        ),
        "cov zeros",
    );
    c.check(
        dense_eq(&cov(&[&[2.0], &[0.0]]), &[&[1.0]], 0.0),
        "cov [[2],[0]]",
    );

    // cholesky, log-det, inverse, trace
    let l = cholesky(&SymmetricMatrix::identity(3)).unwrap();
    c.check(
        (0..3).all(|i| (0..3).all(|j| l.get(i, j) == if i == j { 1.0 } else { 0.0 })),
        "chol I",
    );
    let l = cholesky(&diag(&[4.0, 9.0])).unwrap();
    c.check(
        l.get(0, 0) == 2.0 && l.get(1, 1) == 3.0 && l.get(1, 0) == 0.0,
        "chol diag(4,9)",
    );
    c.check(
        cholesky(&sym(&[&[1.0, 0.99999999], &[0.99999999, 1.0]])).is_ok(),
        "chol near-singular",
    );
    c.check(
        cholesky(&sym(&[&[1.0, 1.1], &[1.1, 1.0]])).is_err(),
        "chol indefinite",
    );
    c.close(
        log_det(&SymmetricMatrix::identity(5)).unwrap(),
        0.0,
        0.0,
        "logdet I5",
    );
    c.close(
        log_det(&diag(&[2.0, 4.0])).unwrap(),
        8f64.ln(),
        1e-12,
        "logdet diag(2,4)",
    );
    c.close(
        log_det(&sym(&ar1_3)).unwrap(),
        0.5f64.ln(),
        1e-12,
        "logdet AR1 p=3",
    );
    c.check(
        inverse_spd(&SymmetricMatrix::identity(4)).unwrap() == SymmetricMatrix::identity(4),
        "inv I4",
    );
    c.check(
        dense_eq(
            &inverse_spd(&diag(&[2.0, 5.0])).unwrap(),
            &[&[0.5, 0.0], &[0.0, 0.2]],
            1e-15,
        ),
        "inv diag",
    );
    c.check(
        dense_eq(
            &inverse_spd(&sym(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap(),
            &[&[2.0 / 3.0, -1.0 / 3.0], &[-1.0 / 3.0, 2.0 / 3.0]],
            1e-15,
        ),
        "inv [[2,1],[1,2]]",
    );
    let i3 = SymmetricMatrix::identity(3);
    c.close(trace_product(&i3, &i3).unwrap(), 3.0, 0.0, "tr(I I)");
    c.close(
        trace_product(&diag(&[1.0, 2.0]), &diag(&[3.0, 4.0])).unwrap(),
        11.0,
        0.0,
        "tr diag",
    );
    let tp = trace_product(
        &sym(&[&[1.0, 2.0], &[2.0, 1.0]]),
        &sym(&[&[0.0, 1.0], &[1.0, 0.0]]),
    )
    .unwrap();
    c.close(tp, 4.0, 0.0, "tr(AB)");

    // penalties
    c.close(
        scad_derivative(0.5, 1.0, 3.7).unwrap(),
        1.0,
        0.0,
        "scad' first branch",
    );
    c.close(
        scad_derivative(1.0, 0.5, 3.7).unwrap(),
        0.5 * 0.85 / 1.35,
        1e-12,
        "scad' second branch",
    );
    c.close(
        scad_derivative(1.0, 0.5, 3.7).unwrap(),
        0.31481,
        1e-5,
        "scad' 0.31481",
    );
    c.close(
        scad_derivative(4.0, 1.0, 3.7).unwrap(),
        0.0,
        0.0,
        "scad' flat",
    );
    c.close(scad_value(0.0, 1.0, 3.7).unwrap(), 0.0, 0.0, "scad(0)");
    c.close(
        scad_value(1.0, 1.0, 3.7).unwrap(),
        1.0,
        1e-15,
        "scad(lambda)",
    );
    c.close(
        scad_value(10.0, 1.0, 3.7).unwrap(),
        2.35,
        1e-12,
        "scad plateau",
    );
    let mut worst_fd = 0.0f64;
    for k in 1..400 {
        let theta = k as f64 * 0.0125;
        if [1.0, 3.7].iter().any(|knot| (theta - knot).abs() < 1e-3) {
            continue;
        }
        let h = 1e-6;
        let fd = (scad_value(theta + h, 1.0, 3.7).unwrap()
            - scad_value(theta - h, 1.0, 3.7).unwrap())
            / (2.0 * h);
        worst_fd = worst_fd.max((fd - scad_derivative(theta, 1.0, 3.7).unwrap()).abs());
    }
    c.check(
        worst_fd <= 1e-6,
        format!("SCAD finite-difference gap {worst_fd:.2e}"),
    );
    for knot in [1.0, 3.7] {
        let e = 1e-8;
        let gap = (scad_derivative(knot - e, 1.0, 3.7).unwrap()
            - scad_derivative(knot + e, 1.0, 3.7).unwrap())
        .abs();
        c.check(gap <= 1e-6, format!("SCAD derivative jump {gap} at {knot}"));
    }
    let lasso = PenaltySpec::Lasso { lambda: 0.2 };
    c.close(
        penalty_derivative(&lasso, 3.0, (0, 1)).unwrap(),
        0.2,
        0.0,
        "lasso slope",
    );
    let adaptive = PenaltySpec::AdaptiveLasso {
        lambda: 0.1,
        gamma: 0.5,
        weights: Some(SymmetricMatrix::from_fn(2, |i, j| if i == j { 0.0 } else { 4.0 }).unwrap()),
    };
    c.close(
        penalty_derivative(&adaptive, 1.0, (0, 1)).unwrap(),
        0.4,
        1e-15,
        "adaptive slope",
    );
    let scad = PenaltySpec::Scad {
        lambda: 1.0,
        a: 3.7,
    };
    c.close(
        penalty_derivative(&scad, 0.5, (0, 1)).unwrap(),
        1.0,
        0.0,
        "scad slope",
    );
    let ones = SymmetricMatrix::from_fn(3, |_, _| 1.0).unwrap();
    let w = adaptive_weights(&ones, 0.5, 1e6);
    c.check(
        w.upper_off_diagonal().all(|(_, _, v)| v == 1.0),
        "adaptive weights of ones",
    );
    let quarter = SymmetricMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 0.25 }).unwrap();
    c.close(
        adaptive_weights(&quarter, 0.5, 1e6).get(0, 1),
        2.0,
        0.0,
        "weight 0.25^-0.5",
    );
    c.close(
        adaptive_weights(&SymmetricMatrix::identity(2), 0.5, 1e6).get(0, 1),
        1e6,
        0.0,
        "weight cap",
    );
    let big = SymmetricMatrix::from_fn(3, |i, j| if i == j { 10.0 } else { 5.0 }).unwrap();
    c.check(
        lla_weight_matrix(1.0, 3.7, &big)
            .upper_off_diagonal()
            .all(|(_, _, v)| v == 0.0),
        "LLA flat",
    );
    c.close(
        lla_weight_matrix(0.5, 3.7, &SymmetricMatrix::identity(2)).get(0, 1),
        0.5,
        0.0,
        "LLA at zero",
    );
    let unit = SymmetricMatrix::from_fn(2, |i, j| if i == j { 2.0 } else { 1.0 }).unwrap();
    c.close(
        lla_weight_matrix(0.5, 3.7, &unit).get(0, 1),
        0.31481,
        1e-5,
        "LLA second branch",
    );

    // glasso
    let d24 = diag(&[2.0, 4.0]);
    for lam in [0.0, 0.3, 5.0] {
        let sol = solve_weighted_glasso(&d24, &uniform_weights(2, lam), &gopts).unwrap();
        c.check(
            dense_eq(&sol.c_hat, &[&[0.5, 0.0], &[0.0, 0.25]], 0.0) && sol.edges.is_empty(),
            format!("glasso diag(2,4) weight {lam}"),
        );
        c.check(
            kkt_residual(&sol, &d24, &uniform_weights(2, lam)) <= 1e-8,
            "kkt diagonal",
        );
    }
    let a2 = sym(&[&[2.0, 0.3], &[0.3, 1.0]]);
    let w2 = uniform_weights(2, 0.5);
    let sol = solve_weighted_glasso(&a2, &w2, &gopts).unwrap();
    c.check(
        dense_eq(&sol.c_hat, &[&[0.5, 0.0], &[0.0, 1.0]], 0.0) && sol.edges.is_empty(),
        "full shrinkage",
    );
    c.check(kkt_residual(&sol, &a2, &w2) <= 1e-6, "kkt full shrinkage");
    let sigma3 = true_precision(&GraphModel::ar1(3)).unwrap().covariance;
    let sol = solve_weighted_glasso(&sigma3, &SymmetricMatrix::zeros(3), &gopts).unwrap();
    c.check(
        dense_eq(&sol.c_hat, &ar1_3, 1e-4),
        "glasso recovers AR1 precision",
    );
    for seed in 0..5 {
        let (a, w) = random_problem(3, 0.5, 77 + seed);
        let sol = solve_weighted_glasso(&a, &w, &gopts).unwrap();
        let kkt = kkt_residual(&sol, &a, &w);
        c.check(kkt <= 10.0 * gopts.outer_tol, format!("random kkt {kkt}"));
    }
    let i2 = SymmetricMatrix::identity(2);
    c.close(
        objective(&i2, &i2, &SymmetricMatrix::zeros(2)).unwrap(),
        2.0,
        1e-15,
        "objective I",
    );
    c.close(
        objective(&i2, &i2, &uniform_weights(2, 3.0)).unwrap(),
        2.0,
        1e-15,
        "objective I weighted",
    );
    let c2 = sym(&[&[2.0, 0.5], &[0.5, 2.0]]);
    c.close(
        objective(&c2, &i2, &SymmetricMatrix::zeros(2)).unwrap(),
        2.67824,
        1e-5,
        "objective 2x2",
    );

    // estimators
    let truth5 = true_precision(&GraphModel::ar1(5)).unwrap();
    let sigma5 = &truth5.covariance;
    let fit = fit_lasso(sigma5, 0.05, &opts).unwrap();
    c.check(
        truth5.edges.is_subset(&fit.edges),
        "lasso 0.05 keeps AR1 band",
    );
    c.check(
        fit_scad(sigma5, 0.0, 3.7, &opts).unwrap() == fit_lasso(sigma5, 0.0, &opts).unwrap(),
        "scad(0) = lasso(0)",
    );
    let lmax = sigma5.max_abs_off_diagonal();
    c.check(
        fit_lasso(sigma5, lmax, &opts).unwrap().edges.is_empty(),
        "lasso full shrinkage",
    );
    c.check(
        fit_scad(sigma5, lmax, 3.7, &opts).unwrap().edges.is_empty(),
        "scad full shrinkage",
    );
    let equal = SymmetricMatrix::from_fn(5, |i, j| if i == j { 1.0 } else { 0.25 }).unwrap();
    let ad = fit_adaptive(sigma5, 0.05, 0.5, &equal, &opts).unwrap();
    let la = fit_lasso(sigma5, 0.05 * 2.0, &opts).unwrap();
    c.check(
        ad.edges == la.edges,
        "adaptive with equal pilot = scaled lasso",
    );
    let mut holed = initial_estimate(sigma5, &opts).unwrap();
    holed.set(0, 1, 0.0);
    let ad = fit_adaptive(sigma5, 0.01, 0.5, &holed, &opts).unwrap();
    c.check(ad.c_hat.get(0, 1) == 0.0, "capped weight zeroes entry");
    let pilot = initial_estimate(sigma5, &opts).unwrap();
    let ad = fit_adaptive(sigma5, 0.1, 0.5, &pilot, &opts).unwrap();
    c.check(
        ad.edges == truth5.edges,
        "adaptive recovers AR1 band exactly on exact covariance",
    );
    c.check(
        initial_estimate(&SymmetricMatrix::identity(3), &opts).unwrap()
            == SymmetricMatrix::identity(3),
        "pilot I",
    );
    c.check(
        dense_eq(
            &initial_estimate(&d24, &opts).unwrap(),
            &[&[0.5, 0.0], &[0.0, 0.25]],
            1e-15,
        ),
        "pilot diag",
    );
    let wide = sample_mvn(&true_precision(&GraphModel::ar1(75)).unwrap(), 100, 3).unwrap();
    let a_wide = sample_covariance(&wide, true);
    c.check(
        cholesky(&initial_estimate(&a_wide, &opts).unwrap()).is_ok(),
        "pilot PD at p=75 n=100",
    );

    // tuning
    let g = default_grid(&SymmetricMatrix::identity(4), 50, 0.01).unwrap();
    c.check(g.values() == [1e-8], "degenerate grid");
    let half = SymmetricMatrix::from_fn(3, |i, j| {
        if i == j {
            1.0
        } else if i + j == 1 {
            0.5
        } else {
            0.1
        }
    })
    .unwrap();
    let g = default_grid(&half, 3, 0.01).unwrap();
    c.check(
        g.values().len() == 3
            && [0.5, 0.05, 0.005]
                .iter()
                .zip(g.values())
                .all(|(w, v)| (w - v).abs() < 1e-15),
        format!("grid {:?}", g.values()),
    );
    c.close(bic_score(&i2, &i2, 100).unwrap(), 2.0, 1e-15, "BIC I");
    c.close(bic_score(&c2, &i2, 100).unwrap(), 2.72429, 1e-5, "BIC 2x2");
    let sizes: Vec<usize> = fold_assignment(100, 5, 0)
        .unwrap()
        .iter()
        .map(Vec::len)
        .collect();
    c.check(sizes == [20; 5], format!("fold sizes {sizes:?}"));
    let folds = fold_assignment(10, 5, 9).unwrap();
    let mut v = vec![0.0; 10];
    for f in &folds {
        v[f[0]] = 1.0;
        v[f[1]] = -1.0;
    }
    let x = DataMatrix::from_row_major(10, 1, v).unwrap();
    let lasso_pen = Penalty::new(PenaltyKind::Lasso);
    let s1 = cv_score(&x, 0.0, lasso_pen, 5, 9, &opts).unwrap();
    c.close(s1, 10.0, 1e-12, "exact-variance CV");
    c.check(
        s1.to_bits() == cv_score(&x, 0.0, lasso_pen, 5, 9, &opts).unwrap().to_bits(),
        "CV determinism",
    );
    let r3 = 3f64.sqrt();
    let rows: Vec<Vec<f64>> = (0..3)
        .flat_map(|k| {
            [1.0, -1.0].map(|s| {
                (0..3)
                    .map(|j| if j == k { s * r3 } else { 0.0 })
                    .collect::<Vec<_>>()
            })
        })
        .collect();
    let indep = DataMatrix::new(&rows).unwrap();
    let dev = sample_covariance(&indep, true)
        .max_abs_diff(&SymmetricMatrix::identity(3))
        .unwrap();
    c.check(dev <= 1e-15, "independent data has A = I");
    for kind in PenaltyKind::ALL {
        let r = select(
            &indep,
            Penalty::new(kind),
            Criterion::Bic,
            &GridSpec::default(),
            &opts,
        )
        .unwrap();
        c.check(
            r.best_fit.edges.is_empty(),
            format!("{kind} BIC on independent data"),
        );
    }
    let single = GridSpec::Explicit(LambdaGrid::new(vec![0.3]).unwrap());
    let ar_data = sample_mvn(&truth5, 200, 1).unwrap();
    let r = select(&ar_data, lasso_pen, Criterion::Bic, &single, &opts).unwrap();
    c.check(r.best_lambda == 0.3, "single-value grid");
    let truth10 = true_precision(&GraphModel::ar1(10)).unwrap();
    let hits = (0..20)
        .filter(|&seed| {
            let x = sample_mvn(&truth10, 10_000, 500 + seed).unwrap();
            let r = select(
                &x,
                Penalty::new(PenaltyKind::Scad),
                Criterion::Bic,
                &GridSpec::default(),
                &opts,
            )
            .unwrap();
            r.best_fit.edges == truth10.edges
        })
        .count();
    c.check(
        hits >= 19,
        format!("SCAD+BIC AR1 p=10 n=10000 recovered {hits}/20"),
    );

    // simulated models
    let t3 = true_precision(&GraphModel::ar1(3)).unwrap();
    c.check(dense_eq(&t3.precision, &ar1_3, 0.0), "AR1 p=3 matrix");
    c.check(
        t3.edges == [(0, 1), (1, 2)].into_iter().collect(),
        "AR1 p=3 edges",
    );
    let t = true_precision(&GraphModel::ar2(5)).unwrap();
    let ar2_ok = (0..5usize).all(|i| {
        (0..5usize).all(|j| {
            let want = [1.5, 0.5, 0.4].get(i.abs_diff(j)).copied().unwrap_or(0.0);
            t.precision.get(i, j) == want
        })
    });
    c.check(ar2_ok && t.edges.len() == 7, "AR2 p=5");
    let g = true_precision(&GraphModel::geometric(10, 3, 42)).unwrap();
    let degrees_ok =
        (0..10).all(|i| g.edges.iter().filter(|&&(a, b)| a == i || b == i).count() >= 3);
    let dominant = (0..10).all(|i| {
        let off: f64 = (0..10)
            .filter(|&j| j != i)
            .map(|j| g.precision.get(i, j).abs())
            .sum();
        g.precision.get(i, i) > off
    });
    c.check(
        degrees_ok && dominant && cholesky(&g.precision).is_ok(),
        "geometric p=10 construction",
    );
    let unit_truth = TrueModel {
        precision: SymmetricMatrix::identity(1),
        covariance: SymmetricMatrix::identity(1),
        edges: EdgeSet::new(),
    };
    let two = sample_mvn(&unit_truth, 2, 5).unwrap();
    c.check(
        two.n() == 2 && two.p() == 1 && two.rows().all(|r| r[0].is_finite()),
        "n=2 p=1 sample",
    );
    let iid = sample_mvn(&true_precision(&GraphModel::ar1(3)).unwrap(), 100_000, 8).unwrap();
    let a_iid = sample_covariance(&iid, true);
    let sigma_true = true_precision(&GraphModel::ar1(3)).unwrap().covariance;
    let bound = 5.0 * sigma_true.get(0, 0) / (100_000f64).sqrt();
    c.check(
        a_iid.max_abs_diff(&sigma_true).unwrap() <= bound,
        "sample covariance near truth at n=1e5",
    );
    c.check(
        sample_mvn(&truth5, 50, 3).unwrap() == sample_mvn(&truth5, 50, 3).unwrap(),
        "sampler determinism",
    );

    // metrics
    let t4 = true_precision(&GraphModel::ar1(4)).unwrap();
    let counts = |tp, tn, fp, fn_| ConfusionCounts { tp, tn, fp, fn_ };
    c.check(
        confusion(&t4.edges, &t4.edges, 4).unwrap() == counts(3, 3, 0, 0),
        "confusion exact",
    );
    c.check(
        confusion(&EdgeSet::new(), &t4.edges, 4).unwrap() == counts(0, 3, 0, 3),
        "confusion empty",
    );
    let est: EdgeSet = [(0, 1), (0, 2)].into_iter().collect();
    let tru: EdgeSet = [(0, 1), (1, 2)].into_iter().collect();
    c.check(
        confusion(&est, &tru, 3).unwrap() == counts(1, 0, 1, 1),
        "confusion p=3",
    );
    let perfect = counts(3, 3, 0, 0);
    c.check(
        sensitivity(&perfect) == 1.0 && specificity(&perfect) == 1.0 && mcc(&perfect) == 1.0,
        "perfect",
    );
    c.close(mcc(&counts(3, 90, 2, 5)), 0.43974, 1e-5, "MCC hand value");
    c.close(
        sensitivity(&counts(0, 10, 0, 0)),
        0.0,
        0.0,
        "sensitivity without true edges",
    );

    // experiment harness
    let mut cfg = ExperimentConfig::new(GraphModel::ar1(10), 10_000, 20);
    cfg.penalties = vec![PenaltyKind::Scad];
    cfg.criteria = vec![CriterionKind::Bic];
    let r = run_experiment(&cfg).unwrap();
    let (spec, sens, _) = bic_means(&r, PenaltyKind::Scad);
    c.check(
        sens >= 0.99 && spec >= 0.95,
        format!("harness AR1 p=10: SPEC {spec} SENS {sens}"),
    );
    cfg.reps = 1;
    let one = run_experiment(&cfg).unwrap();
    let cell = one.cell(PenaltyKind::Scad, CriterionKind::Bic).unwrap();
    c.check(
        cell.specificity.sd == 0.0 && cell.sensitivity.sd == 0.0 && cell.mcc.sd == 0.0,
        "reps=1 SDs",
    );
    let mut again = run_experiment(&cfg).unwrap();
    again.wall_time_seconds = one.wall_time_seconds;
    c.check(again == one, "harness determinism");
}

#[test]
fn criterion_8_unit_examples() {
    let mut c = Checks::new();
    metric_and_penalty_examples(&mut c);
    report(
        8,
        "documented examples for numerics, penalties, solver, estimators, tuning, data and metrics",
        &c.0,
        "library examples checked (unit suites run under `cargo test --lib`)",
    );
}

fn strip_wall_time(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("wall_time_seconds");
            map.values_mut().for_each(strip_wall_time);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_wall_time),
        _ => {}
    }
}

#[test]
fn criterion_9_replicate_determinism() {
    let dir = tempfile::TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for (run, parallelism) in [(0, "1"), (1, "1"), (2, "4"), (3, "4")] {
        let path = dir.path().join(format!("run{run}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_sparse-ggm"))
            .args([
                "replicate",
                "--table",
                "1",
                "--scale",
                "desk",
                "--reps",
                "5",
                "--seed",
                "7",
            ])
            .args([
                "--parallelism",
                parallelism,
                "--out",
                path.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        let mut doc: Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        strip_wall_time(&mut doc);
        outputs.push((parallelism, serde_json::to_string_pretty(&doc).unwrap()));
    }
    let mut c = Checks::new();
    for (k, (par, text)) in outputs.iter().enumerate().skip(1) {
        c.check(
            *text == outputs[0].1,
            format!("run {k} (parallelism {par}) differs from run 0"),
        );
    }
    report(
        9,
        "replicate --table 1 --scale desk --reps 5 --seed 7, twice at parallelism 1 and 4",
        &c.0,
        &format!(
            "{} runs, {} bytes each after removing wall time",
            outputs.len(),
            outputs[0].1.len()
        ),
    );
}
