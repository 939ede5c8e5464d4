//! The random-utility model of occupational choice.
//!
//! Children draw an endowment `θ ∈ [0,1]` from a uniform distribution whose
//! support depends on the father's class, and pick a class by comparing `θ`
//! with two income-incentive thresholds `λ_M ≤ λ_U`:
//!
//! ```text
//! θ <  λ_M          → Working
//! λ_M ≤ θ < λ_U     → Middle
//! θ ≥  λ_U          → Upper
//! ```
//!
//! With supports `[0, θ^max]`, `[θ_M^min, θ_M^max]` and `[θ^min, 1]` for
//! Working, Middle and Upper fathers, the true-mobility matrix `Q` is a
//! closed-form function of six parameters, and the map is invertible from
//! the six free entries of `Q`.

use std::fmt;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::class::OccClass;
use crate::matrix::TransitionMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(ValidityReport),
    #[error("degenerate endowment support for {0:?} fathers")]
    DegenerateSupport(OccClass),
    #[error("invalid primitives: {0}")]
    InvalidPrimitives(String),
    #[error("threshold ordering violated: need 0 <= lambda_M ({lambda_m}) <= lambda_U ({lambda_u}) <= 1")]
    InvalidThresholds { lambda_m: f64, lambda_u: f64 },
    #[error("Q is not identifiable: diagonal entry for {0:?} is zero")]
    NonIdentifiable(OccClass),
    #[error("identification is numerically degenerate: {0}")]
    Degenerate(String),
    #[error("true-mobility index is zero (Q is the identity); the occupational-shift index is undefined")]
    StructuralIndexUndefined,
}

/// The six identified parameters: two income-incentive thresholds and the
/// four endowment support bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda_m: f64,
    pub lambda_u: f64,
    pub theta_max: f64,
    pub theta_min: f64,
    pub theta_m_max: f64,
    pub theta_m_min: f64,
}

impl ModelParams {
    /// Names in reporting order.
    pub const NAMES: [&'static str; 6] =
        ["lambda_M", "lambda_U", "theta_max", "theta_min", "theta_M_max", "theta_M_min"];

    pub fn to_array(&self) -> [f64; 6] {
        [self.lambda_m, self.lambda_u, self.theta_max, self.theta_min, self.theta_m_max, self.theta_m_min]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self { lambda_m: v[0], lambda_u: v[1], theta_max: v[2], theta_min: v[3], theta_m_max: v[4], theta_m_min: v[5] }
    }

    /// Combines thresholds derived from primitives with support bounds.
    pub fn from_thresholds(
        thresholds: &Thresholds,
        theta_max: f64,
        theta_min: f64,
        theta_m_max: f64,
        theta_m_min: f64,
    ) -> Self {
        Self {
            lambda_m: thresholds.lambda_m,
            lambda_u: thresholds.lambda_u,
            theta_max,
            theta_min,
            theta_m_max,
            theta_m_min,
        }
    }

    /// Checks ranges and the inequalities that make every entry of `Q` a
    /// probability. Never modifies the parameters.
    pub fn validate(&self) -> ValidityReport {
        let mut violations = Vec::new();
        let in_range = |name: &'static str, v: f64, lo_open: bool, hi_open: bool, out: &mut Vec<Violation>| {
            let lo_ok = if lo_open { v > 0.0 } else { v >= 0.0 };
            let hi_ok = if hi_open { v < 1.0 } else { v <= 1.0 };
            if !(v.is_finite() && lo_ok && hi_ok) {
                out.push(Violation::OutOfRange { name, value: v });
            }
        };
        in_range("lambda_M", self.lambda_m, false, false, &mut violations);
        in_range("lambda_U", self.lambda_u, false, false, &mut violations);
        in_range("theta_max", self.theta_max, true, false, &mut violations);
        in_range("theta_min", self.theta_min, false, true, &mut violations);
        in_range("theta_M_max", self.theta_m_max, true, false, &mut violations);
        in_range("theta_M_min", self.theta_m_min, false, true, &mut violations);

        if !(self.theta_m_min < self.theta_m_max) {
            violations.push(Violation::MiddleSupportEmpty);
        }
        if !(self.theta_max >= self.lambda_u) {
            violations.push(Violation::ThetaMaxBelowLambdaU);
        }
        if !(self.theta_m_max >= self.lambda_u) {
            violations.push(Violation::ThetaMMaxBelowLambdaU);
        }
        if !(self.lambda_u >= self.lambda_m) {
            violations.push(Violation::LambdaUBelowLambdaM);
        }
        if !(self.lambda_m >= self.theta_m_min) {
            violations.push(Violation::LambdaMBelowThetaMMin);
        }
        if !(self.lambda_m >= self.theta_min) {
            violations.push(Violation::LambdaMBelowThetaMin);
        }
        ValidityReport { violations }
    }

    fn check_supports(&self) -> Result<(), ModelError> {
        if !(self.theta_max > 0.0) {
            return Err(ModelError::DegenerateSupport(OccClass::Working));
        }
        if !(self.theta_m_max > self.theta_m_min) {
            return Err(ModelError::DegenerateSupport(OccClass::Middle));
        }
        if !(self.theta_min < 1.0) {
            return Err(ModelError::DegenerateSupport(OccClass::Upper));
        }
        Ok(())
    }
}

/// A single failed condition on [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    OutOfRange {
        name: &'static str,
        value: f64,
    },
    MiddleSupportEmpty,
    ThetaMaxBelowLambdaU,
    ThetaMMaxBelowLambdaU,
    LambdaUBelowLambdaM,
    LambdaMBelowThetaMMin,
    LambdaMBelowThetaMin,
    /// `q12 = q32 = 0`: the ratio defining `λ_M` is 0/0 and is reported as 0.
    NotIdentified,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutOfRange { name, value } => write!(f, "{name} = {value} is outside its admissible range"),
            Violation::MiddleSupportEmpty => f.write_str("theta_M_min < theta_M_max"),
            Violation::ThetaMaxBelowLambdaU => f.write_str("theta_max >= lambda_U"),
            Violation::ThetaMMaxBelowLambdaU => f.write_str("theta_M_max >= lambda_U"),
            Violation::LambdaUBelowLambdaM => f.write_str("lambda_U >= lambda_M"),
            Violation::LambdaMBelowThetaMMin => f.write_str("lambda_M >= theta_M_min"),
            Violation::LambdaMBelowThetaMin => f.write_str("lambda_M >= theta_min"),
            Violation::NotIdentified => f.write_str("q12 = q32 = 0, lambda_M not identified (reported as 0)"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        f.write_str("violated: ")?;
        f.write_str(&self.messages().join("; "))
    }
}

/// Deep parameters of the utility model. Only used in the forward direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Primitives {
    pub mu_w: f64,
    pub mu_m: f64,
    pub mu_u: f64,
    pub sigma2_w: f64,
    pub sigma2_m: f64,
    pub sigma2_u: f64,
    pub c_m_e: f64,
    pub c_u_e: f64,
    pub delta: f64,
    pub kappa: f64,
}

impl Primitives {
    pub fn validate(&self) -> Result<(), ModelError> {
        let all = [
            self.mu_w,
            self.mu_m,
            self.mu_u,
            self.sigma2_w,
            self.sigma2_m,
            self.sigma2_u,
            self.c_m_e,
            self.c_u_e,
            self.delta,
            self.kappa,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidPrimitives("non-finite value".into()));
        }
        if !(self.mu_w <= self.mu_m && self.mu_m <= self.mu_u) {
            return Err(ModelError::InvalidPrimitives("need mu_W <= mu_M <= mu_U".into()));
        }
        if !(self.c_u_e > self.c_m_e) {
            return Err(ModelError::InvalidPrimitives("need c_U_e > c_M_e".into()));
        }
        if !(self.sigma2_w > 0.0 && self.sigma2_m > 0.0 && self.sigma2_u > 0.0) {
            return Err(ModelError::InvalidPrimitives("variances must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(ModelError::InvalidPrimitives("need delta in [0, 1]".into()));
        }
        if self.kappa < 0.0 {
            return Err(ModelError::InvalidPrimitives("need kappa >= 0".into()));
        }
        Ok(())
    }

    /// Risk premium for moving to a class whose utility variance is `ratio`
    /// times the current one. Nondecreasing, zero at `ratio = 1`.
    pub fn risk_premium(&self, ratio: f64) -> f64 {
        self.kappa * (ratio - 1.0)
    }

    /// Mean log utility of the chosen class given the endowment.
    pub fn systematic_utility(&self, class: OccClass, theta: f64) -> f64 {
        match class {
            OccClass::Working => self.mu_w,
            OccClass::Middle => 2.0 * theta * self.mu_m,
            OccClass::Upper => 2.0 * theta * self.mu_u,
        }
    }

    pub fn variance(&self, class: OccClass) -> f64 {
        match class {
            OccClass::Working => self.sigma2_w,
            OccClass::Middle => self.sigma2_m,
            OccClass::Upper => self.sigma2_u,
        }
    }
}

/// Income-incentive thresholds. `lambda_wu` (Upper versus Working) does not
/// enter `Q`; it is only used to check the ordering `λ_U > λ^W_U > λ_M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub lambda_m: f64,
    pub lambda_u: f64,
    pub lambda_wu: f64,
    /// Strict ordering holds and all three lie in `[0,1]`.
    pub valid: bool,
}

pub fn thresholds_from_primitives(p: &Primitives) -> Result<Thresholds, ModelError> {
    p.validate()?;
    let denom_m = 2.0 * p.mu_m + p.delta * p.c_m_e;
    let denom_u = 2.0 * p.mu_u + p.delta * p.c_u_e;
    if denom_m == 0.0 || denom_u == 0.0 {
        return Err(ModelError::InvalidPrimitives("zero threshold denominator (2 mu + delta c_e)".into()));
    }
    let lambda_m = (p.mu_w + p.risk_premium(p.sigma2_m / p.sigma2_w) + p.c_m_e) / denom_m;
    let lambda_u = (p.mu_m + p.risk_premium(p.sigma2_u / p.sigma2_m) + p.c_u_e) / denom_u;
    let lambda_wu = (p.mu_w + p.risk_premium(p.sigma2_u / p.sigma2_w) + p.c_u_e) / denom_u;
    let unit = |v: f64| (0.0..=1.0).contains(&v);
    let valid = lambda_u > lambda_wu && lambda_wu > lambda_m && unit(lambda_m) && unit(lambda_u) && unit(lambda_wu);
    Ok(Thresholds { lambda_m, lambda_u, lambda_wu, valid })
}

/// Closed-form true-mobility matrix implied by the parameters.
pub fn build_true_matrix(params: &ModelParams) -> Result<TransitionMatrix, ModelError> {
    params.check_supports()?;
    let report = params.validate();
    if !report.is_valid() {
        return Err(ModelError::InvalidParams(report));
    }
    let ModelParams { lambda_m, lambda_u, theta_max, theta_min, theta_m_max, theta_m_min } = *params;
    let width_m = theta_m_max - theta_m_min;
    let width_u = 1.0 - theta_min;
    #[rustfmt::skip]
    let m = Matrix3::new(
        lambda_m / theta_max,               (lambda_u - lambda_m) / theta_max, (theta_max - lambda_u) / theta_max,
        (lambda_m - theta_m_min) / width_m, (lambda_u - lambda_m) / width_m,   (theta_m_max - lambda_u) / width_m,
        (lambda_m - theta_min) / width_u,   (lambda_u - lambda_m) / width_u,   (1.0 - lambda_u) / width_u,
    );
    Ok(TransitionMatrix::from_exact(m))
}

/// Parameters recovered from `Q` together with their validity report.
#[derive(Debug, Clone, PartialEq)]
pub struct Identification {
    pub params: ModelParams,
    pub validity: ValidityReport,
}

/// Inverts [`build_true_matrix`]. Out-of-range results are returned as-is
/// and flagged in the validity report.
pub fn identify_params(q: &TransitionMatrix) -> Result<Identification, ModelError> {
    let m = q.as_matrix();
    for class in OccClass::ALL {
        let i = class.index();
        if !(m[(i, i)] > 0.0) {
            return Err(ModelError::NonIdentifiable(class));
        }
    }
    let up_from_w = m[(0, 1)] / m[(0, 0)];
    let mid_from_u = m[(2, 1)] / m[(2, 2)];
    let denom = (1.0 + up_from_w) * (1.0 + mid_from_u) - 1.0;
    let mut not_identified = false;
    let lambda_m = if denom == 0.0 {
        // Only possible when q12 = q32 = 0.
        not_identified = true;
        0.0
    } else {
        mid_from_u / denom
    };
    if !lambda_m.is_finite() {
        return Err(ModelError::Degenerate(format!("lambda_M = {lambda_m}")));
    }
    let lambda_u = lambda_m * (1.0 + up_from_w);
    let theta_max = lambda_m / m[(0, 0)];
    let theta_min = 1.0 - (1.0 - lambda_u) / m[(2, 2)];
    let theta_m_min = lambda_m - (lambda_u - lambda_m) * (m[(1, 0)] / m[(1, 1)]);
    let theta_m_max = theta_m_min + (lambda_u - lambda_m) / m[(1, 1)];
    let params = ModelParams::from_array(
        [lambda_m, lambda_u, theta_max, theta_min, theta_m_max, theta_m_min].map(snap_to_unit_bounds),
    );
    let mut validity = params.validate();
    if not_identified {
        validity.violations.insert(0, Violation::NotIdentified);
    }
    Ok(Identification { params, validity })
}

/// Rounding residue at 0 or 1 would otherwise be reported as a range violation.
fn snap_to_unit_bounds(v: f64) -> f64 {
    const EPS: f64 = 1e-12;
    if v.abs() < EPS {
        0.0
    } else if (v - 1.0).abs() < EPS {
        1.0
    } else {
        v
    }
}

/// The five summary indexes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityIndexes {
    /// Observed mobility, `1 − tr(P)/3`.
    pub i_obs: f64,
    /// Occupational shifts, `I_OBS / I_TRUE`.
    pub i_os: f64,
    /// True mobility, `1 − tr(Q)/3`.
    pub i_true: f64,
    /// Equality of opportunity.
    pub i_opp: f64,
    /// Lack of incentives, `I_OPP − I_TRUE`.
    pub i_loi: f64,
}

impl MobilityIndexes {
    pub const NAMES: [&'static str; 5] = ["i_obs", "i_os", "i_true", "i_opp", "i_loi"];

    pub fn to_array(&self) -> [f64; 5] {
        [self.i_obs, self.i_os, self.i_true, self.i_opp, self.i_loi]
    }
}

pub fn mobility_indexes(p: &TransitionMatrix, q: &TransitionMatrix) -> Result<MobilityIndexes, ModelError> {
    let id = identify_params(q)?;
    indexes_with_params(p, q, &id.params)
}

/// Same as [`mobility_indexes`] with the identified parameters supplied.
pub fn indexes_with_params(
    p: &TransitionMatrix,
    q: &TransitionMatrix,
    params: &ModelParams,
) -> Result<MobilityIndexes, ModelError> {
    let i_obs = 1.0 - p.trace() / 3.0;
    let i_true = 1.0 - q.trace() / 3.0;
    if i_true.abs() < f64::EPSILON {
        return Err(ModelError::StructuralIndexUndefined);
    }
    let i_opp = i_opp_from_params(params);
    Ok(MobilityIndexes { i_obs, i_os: i_obs / i_true, i_true, i_opp, i_loi: i_opp - i_true })
}

pub fn i_opp_from_params(params: &ModelParams) -> f64 {
    (1.0 + params.theta_max + params.theta_m_max - params.theta_min - params.theta_m_min) / 3.0
}

fn persistence_sum(params: &ModelParams) -> Result<f64, ModelError> {
    params.check_supports()?;
    Ok(params.lambda_m / params.theta_max
        + (params.lambda_u - params.lambda_m) / (params.theta_m_max - params.theta_m_min)
        + (1.0 - params.lambda_u) / (1.0 - params.theta_min))
}

/// True-mobility index written directly in the parameters.
pub fn i_true_from_params(params: &ModelParams) -> Result<f64, ModelError> {
    Ok(1.0 - persistence_sum(params)? / 3.0)
}

/// Lack-of-incentives index written directly in the parameters.
pub fn i_loi_from_params(params: &ModelParams) -> Result<f64, ModelError> {
    let opp_sum = 1.0 + params.theta_max + params.theta_m_max - params.theta_min - params.theta_m_min;
    Ok((opp_sum + persistence_sum(params)?) / 3.0 - 1.0)
}

/// Perfectly mobile society: the child's class is independent of the father's.
pub fn pms_matrix(lambda_m: f64, lambda_u: f64) -> Result<TransitionMatrix, ModelError> {
    if !(0.0 <= lambda_m && lambda_m <= lambda_u && lambda_u <= 1.0) {
        return Err(ModelError::InvalidThresholds { lambda_m, lambda_u });
    }
    let row = [lambda_m, lambda_u - lambda_m, 1.0 - lambda_u];
    Ok(TransitionMatrix::from_exact(Matrix3::from_fn(|_, j| row[j])))
}

/// Perfectly immobile society.
pub fn pis_matrix() -> TransitionMatrix {
    TransitionMatrix::identity()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cohort_one() -> ModelParams {
        ModelParams {
            lambda_m: 0.44,
            lambda_u: 0.66,
            theta_max: 0.66,
            theta_min: 0.38,
            theta_m_max: 0.71,
            theta_m_min: 0.33,
        }
    }

    #[test]
    fn thresholds_risk_neutral_direct_substitution() {
        let p = Primitives {
            mu_w: 1.0,
            mu_m: 1.0,
            mu_u: 1.0,
            sigma2_w: 0.3,
            sigma2_m: 2.0,
            sigma2_u: 7.0,
            c_m_e: 1.0,
            c_u_e: 2.0,
            delta: 0.0,
            kappa: 0.0,
        };
        let t = thresholds_from_primitives(&p).unwrap();
        assert_eq!(t.lambda_m, 1.0);
        assert_eq!(t.lambda_u, 1.5);
        assert!(!t.valid);
    }

    #[test]
    fn equal_variances_cancel_risk_premium() {
        let base = Primitives {
            mu_w: 0.5,
            mu_m: 1.0,
            mu_u: 2.0,
            sigma2_w: 1.0,
            sigma2_m: 1.0,
            sigma2_u: 1.0,
            c_m_e: 0.3,
            c_u_e: 0.8,
            delta: 0.5,
            kappa: 0.0,
        };
        let averse = Primitives { kappa: 5.0, ..base };
        assert_eq!(thresholds_from_primitives(&base).unwrap(), thresholds_from_primitives(&averse).unwrap());
    }

    // Hand evaluation: denominators 2·1 + 0.5·0.3 = 2.15 and 2·2 + 0.5·0.8 = 4.4;
    // premia 0.2·(0.5−1) = −0.1, 0.2·(1.1−1) = 0.02, 0.2·(0.55−1) = −0.09.
    // λ_M = 0.7/2.15, λ_U = 1.82/4.4, λ^W_U = 1.21/4.4. Here λ^W_U < λ_M, so
    // the threshold ordering fails at this point.
    #[test]
    fn thresholds_hand_evaluated_point() {
        let p = Primitives {
            mu_w: 0.5,
            mu_m: 1.0,
            mu_u: 2.0,
            sigma2_w: 1.0,
            sigma2_m: 0.5,
            sigma2_u: 0.55,
            c_m_e: 0.3,
            c_u_e: 0.8,
            delta: 0.5,
            kappa: 0.2,
        };
        let t = thresholds_from_primitives(&p).unwrap();
        assert_abs_diff_eq!(t.lambda_m, 0.325_581_395_348_837_2, epsilon = 1e-15);
        assert_abs_diff_eq!(t.lambda_u, 0.413_636_363_636_363_6, epsilon = 1e-15);
        assert_abs_diff_eq!(t.lambda_wu, 0.275, epsilon = 1e-15);
        assert!(!t.valid);

        // Raising the Upper access cost to 1.5: denominator 4.75,
        // λ_U = 2.52/4.75, λ^W_U = 1.91/4.75, and the ordering holds.
        let t = thresholds_from_primitives(&Primitives { c_u_e: 1.5, ..p }).unwrap();
        assert_abs_diff_eq!(t.lambda_u, 2.52 / 4.75, epsilon = 1e-15);
        assert_abs_diff_eq!(t.lambda_wu, 1.91 / 4.75, epsilon = 1e-15);
        assert!(t.lambda_u > t.lambda_wu && t.lambda_wu > t.lambda_m);
        assert!(t.valid);
    }

    #[test]
    fn zero_denominator_is_rejected() {
        let p = Primitives {
            mu_w: 0.0,
            mu_m: 0.0,
            mu_u: 0.0,
            sigma2_w: 1.0,
            sigma2_m: 1.0,
            sigma2_u: 1.0,
            c_m_e: 0.1,
            c_u_e: 0.2,
            delta: 0.0,
            kappa: 0.0,
        };
        assert!(matches!(thresholds_from_primitives(&p), Err(ModelError::InvalidPrimitives(_))));
    }

    #[test]
    fn cohort_one_parameters_give_reference_q() {
        let q = build_true_matrix(&cohort_one()).unwrap();
        let expected = [[0.67, 0.33, 0.00], [0.29, 0.58, 0.13], [0.10, 0.35, 0.55]];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(q.entry(i, j), expected[i][j], epsilon = 0.02);
            }
        }
    }

    #[test]
    fn full_supports_give_pms_rows() {
        let params = ModelParams {
            lambda_m: 0.2,
            lambda_u: 0.7,
            theta_max: 1.0,
            theta_min: 0.0,
            theta_m_max: 1.0,
            theta_m_min: 0.0,
        };
        let q = build_true_matrix(&params).unwrap();
        for row in q.rows() {
            assert_abs_diff_eq!(row[0], 0.2, epsilon = 1e-15);
            assert_abs_diff_eq!(row[1], 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(row[2], 0.3, epsilon = 1e-15);
        }
        let sym = build_true_matrix(&ModelParams { lambda_m: 1.0 / 3.0, lambda_u: 2.0 / 3.0, ..params }).unwrap();
        for row in sym.rows() {
            for v in row {
                assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn violated_assumption_is_named() {
        let bad = ModelParams { theta_max: 0.5, ..cohort_one() };
        match build_true_matrix(&bad) {
            Err(ModelError::InvalidParams(report)) => {
                assert_eq!(report.violations, vec![Violation::ThetaMaxBelowLambdaU]);
                assert!(report.to_string().contains("theta_max >= lambda_U"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let degenerate = ModelParams { theta_min: 1.0, ..cohort_one() };
        assert_eq!(build_true_matrix(&degenerate), Err(ModelError::DegenerateSupport(OccClass::Upper)));
    }

    #[test]
    fn identify_reference_cohort_one() {
        let q =
            TransitionMatrix::from_row_weights([[0.67, 0.33, 0.0], [0.29, 0.59, 0.12], [0.10, 0.35, 0.55]]).unwrap();
        let id = identify_params(&q).unwrap();
        let got = id.params.to_array();
        for (g, e) in got.iter().zip(cohort_one().to_array()) {
            assert_abs_diff_eq!(*g, e, epsilon = 0.01);
        }
        assert!(id.validity.is_valid());
    }

    #[test]
    fn identify_uniform_matrix_gives_full_supports() {
        let q = pms_matrix(1.0 / 3.0, 2.0 / 3.0).unwrap();
        let p = identify_params(&q).unwrap().params;
        assert_abs_diff_eq!(p.lambda_m, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.lambda_u, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.theta_max, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.theta_min, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.theta_m_min, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.theta_m_max, 1.0, epsilon = 1e-15);

        let third = 1.0 / 3.0;
        let decimal = TransitionMatrix::new([[third, third, 1.0 - 2.0 * third]; 3]).unwrap();
        let id = identify_params(&decimal).unwrap();
        assert!(id.validity.is_valid(), "{:?}", id.validity);
        assert_eq!(id.params.theta_min, 0.0);
        assert_eq!(id.params.theta_max, 1.0);
    }

    #[test]
    fn identify_identity_is_flagged_not_clamped() {
        let id = identify_params(&pis_matrix()).unwrap();
        assert_eq!(id.params.to_array(), [0.0; 6]);
        assert!(!id.validity.is_valid());
        assert_eq!(id.validity.violations[0], Violation::NotIdentified);
    }

    #[test]
    fn zero_diagonal_is_not_identifiable() {
        let q = TransitionMatrix::new([[0.0, 1.0, 0.0], [0.2, 0.5, 0.3], [0.1, 0.3, 0.6]]).unwrap();
        assert_eq!(identify_params(&q), Err(ModelError::NonIdentifiable(OccClass::Working)));
    }

    #[test]
    fn indexes_for_symmetric_pms() {
        let q = pms_matrix(1.0 / 3.0, 2.0 / 3.0).unwrap();
        let idx = mobility_indexes(&q, &q).unwrap();
        assert_abs_diff_eq!(idx.i_obs, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(idx.i_true, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(idx.i_os, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(idx.i_opp, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(idx.i_loi, 1.0 / 3.0, epsilon = 1e-15);
    }

    // Identity perturbed by ε = 0.01 on every off-diagonal: trace = 3·0.98,
    // so I_OBS = I_TRUE = 1 − 0.98 = 0.02 and I_OS = 1.
    #[test]
    fn perturbed_pis_has_unit_shift_index() {
        let e = 0.01;
        let m = TransitionMatrix::new([[1.0 - 2.0 * e, e, e], [e, 1.0 - 2.0 * e, e], [e, e, 1.0 - 2.0 * e]]).unwrap();
        let idx = mobility_indexes(&m, &m).unwrap();
        assert_abs_diff_eq!(idx.i_obs, 0.02, epsilon = 1e-12);
        assert_abs_diff_eq!(idx.i_true, 0.02, epsilon = 1e-12);
        assert_abs_diff_eq!(idx.i_os, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_q_makes_shift_index_undefined() {
        let p = pms_matrix(0.3, 0.6).unwrap();
        assert_eq!(mobility_indexes(&p, &pis_matrix()), Err(ModelError::StructuralIndexUndefined));
    }

    #[test]
    fn pms_and_pis_constructors() {
        let upward = pms_matrix(0.0, 0.0).unwrap();
        for row in upward.rows() {
            assert_eq!(row, [0.0, 0.0, 1.0]);
        }
        assert!(pms_matrix(0.7, 0.3).is_err());
        assert_eq!(1.0 - pis_matrix().trace() / 3.0, 0.0);
    }

    #[test]
    fn i_true_closed_form_cohort_one() {
        assert_abs_diff_eq!(i_true_from_params(&cohort_one()).unwrap(), 0.40, epsilon = 0.01);
        let full = ModelParams {
            lambda_m: 1.0 / 3.0,
            lambda_u: 2.0 / 3.0,
            theta_max: 1.0,
            theta_min: 0.0,
            theta_m_max: 1.0,
            theta_m_min: 0.0,
        };
        assert_abs_diff_eq!(i_true_from_params(&full).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert!(i_true_from_params(&ModelParams { theta_max: 0.0, ..full }).is_err());
    }
}
