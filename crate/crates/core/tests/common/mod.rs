//! Fixtures and generators shared by the integration tests.
#![allow(dead_code)]

pub mod oracle;

use occmob_core::estimation::TransitionCounts;
use occmob_core::ModelParams;
use proptest::prelude::*;
use rand::Rng;

/// Father×child counts for the three cohorts, consistent with the
/// two-decimal reference matrices and the reported row and column totals.
pub const COUNTS: [[[f64; 3]; 3]; 3] = [
    [[937.0, 789.0, 168.0], [353.0, 984.0, 302.0], [17.0, 74.0, 121.0]],
    [[2298.0, 1827.0, 323.0], [752.0, 2038.0, 566.0], [54.0, 255.0, 212.0]],
    [[1048.0, 603.0, 85.0], [370.0, 798.0, 159.0], [33.0, 141.0, 82.0]],
];

pub const REF_P: [[[f64; 3]; 3]; 3] = [
    [[0.49, 0.42, 0.09], [0.22, 0.60, 0.18], [0.08, 0.35, 0.57]],
    [[0.52, 0.41, 0.07], [0.22, 0.61, 0.17], [0.10, 0.49, 0.41]],
    [[0.60, 0.35, 0.05], [0.28, 0.60, 0.12], [0.13, 0.55, 0.32]],
];

pub const REF_R: [[[f64; 3]; 3]; 3] = [
    [[0.74, 0.15, 0.10], [0.0, 0.95, 0.05], [0.01, 0.01, 0.99]],
    [[0.72, 0.19, 0.09], [0.0, 0.97, 0.03], [0.01, 0.01, 0.98]],
    [[0.84, 0.12, 0.04], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
];

pub const REF_Q: [[[f64; 3]; 3]; 3] = [
    [[0.67, 0.33, 0.0], [0.29, 0.59, 0.12], [0.10, 0.35, 0.55]],
    [[0.72, 0.28, 0.0], [0.31, 0.56, 0.13], [0.14, 0.47, 0.39]],
    [[0.72, 0.26, 0.02], [0.33, 0.56, 0.11], [0.15, 0.53, 0.31]],
];

/// (i_obs, i_os, i_true) per cohort.
pub const REF_INDEXES: [[f64; 3]; 3] = [[0.45, 1.11, 0.40], [0.49, 1.10, 0.44], [0.49, 1.05, 0.47]];

/// (lambda_M, lambda_U, theta_max, theta_min, theta_M_max, theta_M_min).
pub const REF_PARAMS: [[f64; 6]; 3] =
    [[0.44, 0.66, 0.66, 0.38, 0.71, 0.33], [0.58, 0.81, 0.81, 0.52, 0.86, 0.46], [0.64, 0.87, 0.89, 0.58, 0.91, 0.51]];

/// (i_opp, i_loi) per cohort.
pub const REF_OPP_LOI: [[f64; 2]; 3] = [[0.55, 0.15], [0.57, 0.12], [0.57, 0.10]];

pub fn counts(cohort: usize) -> TransitionCounts {
    TransitionCounts::new(COUNTS[cohort]).unwrap()
}

pub fn max_diff(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Parameters built from uniforms in `[0,1)`. Every inequality holds with
/// a margin so the diagonal of `Q` stays away from zero.
pub fn params_from_unit(u: [f64; 6]) -> ModelParams {
    let lambda_m = 0.05 + 0.80 * u[0];
    let lambda_u = lambda_m + 0.02 + (0.97 - lambda_m - 0.02) * u[1];
    let theta_max = lambda_u + (1.0 - lambda_u) * u[2];
    let theta_min = lambda_m * u[3];
    let theta_m_max = lambda_u + (1.0 - lambda_u) * u[4];
    let theta_m_min = lambda_m * u[5];
    ModelParams { lambda_m, lambda_u, theta_max, theta_min, theta_m_max, theta_m_min }
}

pub fn valid_params() -> impl Strategy<Value = ModelParams> {
    proptest::array::uniform6(0.0..1.0f64).prop_map(params_from_unit)
}

pub fn random_valid_params<R: Rng>(rng: &mut R) -> ModelParams {
    params_from_unit(std::array::from_fn(|_| rng.random::<f64>()))
}
