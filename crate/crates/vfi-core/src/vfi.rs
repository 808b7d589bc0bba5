//! Vector-field-inequality constraint rows.
//!
//! A zone turns a [`DistancePair`] into one linear row over the split joint
//! velocities `(q̇_P, q̇_N)`:
//!
//! * keep-out (`d̃ = d − d_safe`): `−J q̇_P + J q̇_N + z = η_d d̃`, i.e.
//!   `J q̇ ≥ −η_d d̃`. The approach speed toward the boundary is capped in
//!   proportion to the remaining distance, and any motion away from the
//!   boundary is always allowed;
//! * keep-in (`d̃ = d_safe − d`): `J q̇_P − J q̇_N + z = η_d d̃`, i.e.
//!   `J q̇ ≤ η_d d̃`.
//!
//! The slack `z ≥ 0` is appended by the program builder; rows here carry only
//! the velocity coefficients and the right-hand side `η_d · d̃`.

use crate::distance::DistancePair;
use crate::kinematics::KinematicChain;
use nalgebra::{DVector, RowDVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VfiError {
    #[error("eta_d must be positive (got {0})")]
    BadGain(f64),
    #[error("d_safe must be non-negative (got {0})")]
    BadSafeDistance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoneDirection {
    /// Keep the distance above `d_safe` (restricted zone).
    KeepOut,
    /// Keep the distance below `d_safe` (safe region).
    KeepIn,
}

/// Parameters of one vector-field-inequality zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneSpec {
    pub direction: ZoneDirection,
    /// Boundary distance in meters.
    pub d_safe: f64,
    /// Error gain in 1/s; bounds the worst-case approach to the boundary by
    /// `exp(−eta_d t)`.
    pub eta_d: f64,
}

impl ZoneSpec {
    pub fn new(direction: ZoneDirection, d_safe: f64, eta_d: f64) -> Result<Self, VfiError> {
        if !(eta_d > 0.0) {
            return Err(VfiError::BadGain(eta_d));
        }
        if !(d_safe >= 0.0) {
            return Err(VfiError::BadSafeDistance(d_safe));
        }
        Ok(Self {
            direction,
            d_safe,
            eta_d,
        })
    }

    /// Distance error `d̃`: positive when compliant, negative when violating.
    pub fn distance_error(&self, distance: f64) -> f64 {
        match self.direction {
            ZoneDirection::KeepOut => distance - self.d_safe,
            ZoneDirection::KeepIn => self.d_safe - distance,
        }
    }

    /// Build the constraint row for this zone from an evaluated pair.
    pub fn row(&self, pair: &DistancePair) -> ConstraintRow {
        match self.direction {
            ZoneDirection::KeepOut => keep_out_row(pair, self),
            ZoneDirection::KeepIn => keep_in_row(pair, self),
        }
    }
}

/// One linear constraint over the split velocities, awaiting its slack.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRow {
    /// 1×2n coefficients acting on `(q̇_P, q̇_N)`.
    pub coefficients: RowDVector<f64>,
    pub rhs: f64,
}

impl ConstraintRow {
    pub fn dof(&self) -> usize {
        self.coefficients.len() / 2
    }

    /// Slack value of this row at a joint velocity: `rhs − w·(q̇_P, q̇_N)`.
    ///
    /// Non-negative exactly when the velocity satisfies the inequality; the
    /// value does not depend on how `q̇` is split.
    pub fn slack_at(&self, qdot: &DVector<f64>) -> f64 {
        let n = self.dof();
        assert_eq!(qdot.len(), n, "velocity length mismatch");
        let mut acc = 0.0;
        for i in 0..n {
            let (p, neg) = if qdot[i] >= 0.0 {
                (qdot[i], 0.0)
            } else {
                (0.0, -qdot[i])
            };
            acc += self.coefficients[i] * p + self.coefficients[n + i] * neg;
        }
        self.rhs - acc
    }

    pub fn admits(&self, qdot: &DVector<f64>) -> bool {
        self.slack_at(qdot) >= -1e-12
    }
}

fn split_row(jacobian: &RowDVector<f64>, sign: f64, rhs: f64) -> ConstraintRow {
    let n = jacobian.len();
    let mut coefficients = RowDVector::zeros(2 * n);
    for i in 0..n {
        coefficients[i] = sign * jacobian[i];
        coefficients[n + i] = -sign * jacobian[i];
    }
    ConstraintRow { coefficients, rhs }
}

/// Keep-out row: `−J q̇_P + J q̇_N + z = η_d (d − d_safe)`.
///
/// A negative `d̃` is legal; the feasible set then forces motion that pushes
/// the system back to the boundary at least exponentially.
pub fn keep_out_row(pair: &DistancePair, spec: &ZoneSpec) -> ConstraintRow {
    assert_eq!(
        spec.direction,
        ZoneDirection::KeepOut,
        "keep_out_row called with a keep-in spec"
    );
    split_row(
        &pair.jacobian,
        -1.0,
        spec.eta_d * spec.distance_error(pair.distance),
    )
}

/// Keep-in row: `J q̇_P − J q̇_N + z = η_d (d_safe − d)`.
pub fn keep_in_row(pair: &DistancePair, spec: &ZoneSpec) -> ConstraintRow {
    assert_eq!(
        spec.direction,
        ZoneDirection::KeepIn,
        "keep_in_row called with a keep-out spec"
    );
    split_row(
        &pair.jacobian,
        1.0,
        spec.eta_d * spec.distance_error(pair.distance),
    )
}

/// Velocity-damper rows for the joint limits: per joint `i`,
/// `q̇_i ≥ −η (q_i − q_min,i)` and `q̇_i ≤ η (q_max,i − q_i)`, in split form
/// with one row each (lower, then upper, in joint order).
pub fn joint_limit_rows(
    q: &[f64],
    chain: &KinematicChain,
    eta_joint: f64,
) -> Result<Vec<ConstraintRow>, VfiError> {
    if !(eta_joint > 0.0) {
        return Err(VfiError::BadGain(eta_joint));
    }
    let n = chain.dof();
    assert_eq!(q.len(), n, "configuration length mismatch");
    let mut rows = Vec::with_capacity(2 * n);
    for (i, joint) in chain.joints().iter().enumerate() {
        let mut axis = RowDVector::zeros(n);
        axis[i] = 1.0;
        // Lower limit is a keep-out on d = q_i − q_min; upper limit is the
        // mirrored keep-in form on d = q_max − q_i.
        rows.push(split_row(&axis, -1.0, eta_joint * (q[i] - joint.q_min)));
        rows.push(split_row(&axis, 1.0, eta_joint * (joint.q_max - q[i])));
    }
    Ok(rows)
}
