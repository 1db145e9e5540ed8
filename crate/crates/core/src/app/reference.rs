//! Published simulation results (100 replications each) used as side-by-side
//! references for full-scale runs.

use serde::Serialize;

use crate::app::experiment::CriterionKind;
use crate::estimators::PenaltyKind;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceCell {
    pub specificity: f64,
    pub sensitivity: f64,
    pub mcc: f64,
    pub specificity_sd: f64,
    pub sensitivity_sd: f64,
    pub mcc_sd: f64,
}

/// One `(p, n, criterion)` row: means then spreads, each ordered
/// LASSO (SPEC, SENS, MCC), SCAD (...), ADAP (...).
type Row = ([f64; 9], [f64; 9]);

// [table][setting][criterion: BIC, CV]
#[allow(clippy::approx_constant)]
const TABLES: [[[Row; 2]; 3]; 3] = [
    // AR(1)
    [
        [
            (
                [
                    0.695, 1.000, 0.402, 0.710, 1.000, 0.413, 0.849, 1.000, 0.568,
                ],
                [
                    0.032, 0.000, 0.025, 0.020, 0.000, 0.017, 0.021, 0.000, 0.030,
                ],
            ),
            (
                [
                    0.620, 1.000, 0.348, 0.705, 1.000, 0.410, 0.824, 1.000, 0.533,
                ],
                [
                    0.025, 0.000, 0.016, 0.016, 0.000, 0.013, 0.016, 0.000, 0.021,
                ],
            ),
        ],
        [
            (
                [
                    0.791, 1.000, 0.362, 0.739, 1.000, 0.318, 0.867, 0.998, 0.453,
                ],
                [
                    0.018, 0.000, 0.017, 0.015, 0.000, 0.011, 0.011, 0.005, 0.016,
                ],
            ),
            (
                [
                    0.712, 1.000, 0.299, 0.749, 1.000, 0.325, 0.901, 0.997, 0.515,
                ],
                [
                    0.017, 0.000, 0.012, 0.006, 0.000, 0.005, 0.007, 0.005, 0.015,
                ],
            ),
        ],
        [
            (
                [
                    0.721, 1.000, 0.424, 0.981, 1.000, 0.902, 0.965, 1.000, 0.839,
                ],
                [
                    0.025, 0.000, 0.022, 0.006, 0.000, 0.028, 0.008, 0.000, 0.029,
                ],
            ),
            (
                [
                    0.521, 1.000, 0.290, 0.976, 1.000, 0.880, 0.917, 1.000, 0.697,
                ],
                [
                    0.030, 0.000, 0.016, 0.007, 0.000, 0.031, 0.017, 0.000, 0.040,
                ],
            ),
        ],
    ],
    // AR(2)
    [
        [
            (
                [
                    0.986, 0.459, 0.585, 0.982, 0.519, 0.616, 0.954, 0.754, 0.703,
                ],
                [
                    0.013, 0.113, 0.055, 0.016, 0.114, 0.050, 0.029, 0.135, 0.051,
                ],
            ),
            (
                [
                    0.657, 0.960, 0.432, 0.812, 0.905, 0.554, 0.865, 0.910, 0.627,
                ],
                [
                    0.050, 0.026, 0.036, 0.058, 0.056, 0.045, 0.028, 0.039, 0.039,
                ],
            ),
        ],
        [
            (
                [
                    0.996, 0.382, 0.563, 0.995, 0.420, 0.579, 0.992, 0.486, 0.610,
                ],
                [
                    0.003, 0.065, 0.035, 0.003, 0.065, 0.032, 0.005, 0.091, 0.041,
                ],
            ),
            (
                [
                    0.837, 0.887, 0.445, 0.895, 0.829, 0.503, 0.998, 0.362, 0.563,
                ],
                [
                    0.043, 0.031, 0.036, 0.024, 0.045, 0.027, 0.002, 0.058, 0.039,
                ],
            ),
        ],
        [
            (
                [
                    0.806, 1.000, 0.606, 1.000, 1.000, 1.000, 0.984, 1.000, 0.954,
                ],
                [
                    0.031, 0.000, 0.038, 0.000, 0.000, 0.000, 0.006, 0.000, 0.020,
                ],
            ),
            (
                [
                    0.470, 1.000, 0.330, 0.997, 1.000, 0.991, 0.931, 1.000, 0.810,
                ],
                [
                    0.032, 0.000, 0.019, 0.007, 0.000, 0.023, 0.020, 0.000, 0.045,
                ],
            ),
        ],
    ],
    // sparse geometric, 3 neighbours
    [
        [
            (
                [
                    0.983, 0.460, 0.562, 0.992, 0.366, 0.538, 0.988, 0.458, 0.584,
                ],
                [
                    0.012, 0.073, 0.044, 0.015, 0.117, 0.052, 0.011, 0.092, 0.053,
                ],
            ),
            (
                [
                    0.988, 0.363, 0.546, 0.998, 0.354, 0.558, 0.995, 0.423, 0.591,
                ],
                [
                    0.067, 0.095, 0.049, 0.003, 0.059, 0.042, 0.003, 0.060, 0.051,
                ],
            ),
        ],
        [
            (
                [
                    0.992, 0.416, 0.539, 0.997, 0.339, 0.534, 0.995, 0.389, 0.541,
                ],
                [
                    0.003, 0.040, 0.032, 0.006, 0.072, 0.026, 0.003, 0.045, 0.030,
                ],
            ),
            (
                [
                    0.998, 0.353, 0.555, 0.998, 0.353, 0.549, 1.000, 0.303, 0.536,
                ],
                [
                    0.001, 0.030, 0.027, 0.001, 0.030, 0.023, 0.000, 0.024, 0.019,
                ],
            ),
        ],
        [
            (
                [
                    0.932, 1.000, 0.769, 0.999, 1.000, 0.996, 0.992, 1.000, 0.966,
                ],
                [
                    0.017, 0.000, 0.044, 0.002, 0.000, 0.009, 0.004, 0.000, 0.019,
                ],
            ),
            (
                [
                    0.657, 1.000, 0.407, 0.997, 1.000, 0.991, 0.959, 1.000, 0.851,
                ],
                [
                    0.045, 0.000, 0.034, 0.003, 0.000, 0.017, 0.029, 0.000, 0.081,
                ],
            ),
        ],
    ],
];

/// Published cell for `table` (1–3) and setting index (0: p=35,n=100;
/// 1: p=75,n=100; 2: p=35,n=10000).
pub fn reference_cell(
    table: u8,
    setting: usize,
    criterion: CriterionKind,
    penalty: PenaltyKind,
) -> Option<ReferenceCell> {
    let t = TABLES.get(usize::from(table).checked_sub(1)?)?;
    let row = t.get(setting)?;
    let (means, sds) = match criterion {
        CriterionKind::Bic => row[0],
        CriterionKind::Cv => row[1],
    };
    let base = match penalty {
        PenaltyKind::Lasso => 0,
        PenaltyKind::Scad => 3,
        PenaltyKind::Adaptive => 6,
    };
    Some(ReferenceCell {
        specificity: means[base],
        sensitivity: means[base + 1],
        mcc: means[base + 2],
        specificity_sd: sds[base],
        sensitivity_sd: sds[base + 1],
        mcc_sd: sds[base + 2],
    })
}
