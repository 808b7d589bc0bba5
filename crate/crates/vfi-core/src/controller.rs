//! Constrained differential inverse kinematics: per control tick, assemble
//! the canonical-form program
//!
//! ```text
//! min  [−1ᵀJ  1ᵀJ  2·1ᵀ  0ᵀ  0  0ᵀ] g  −  η 1ᵀ x̃
//! s.t. J q̇_P − J q̇_N − y + z_A = −η x̃          (error convergence)
//!      1ᵀ q̇_P + 1ᵀ q̇_N + z_B  = β ‖x̃‖₁        (stop at the goal)
//!      one row + slack per constraint            (joint limits, zones)
//!      g ≥ 0
//! ```
//!
//! and return the joint velocities `q̇ = q̇_P − q̇_N`.

use crate::distance::{self, DistanceError, DistancePair};
use crate::dq::{DualQuaternion, Vec8};
use crate::geom::{Plane, PluckerLine, Point};
use crate::kinematics::{translation_jacobian, ChainError, Frame, KinematicChain};
use crate::lp::{self, CanonicalLp, LpError, LpStatus};
use crate::vfi::{joint_limit_rows, ConstraintRow, VfiError, ZoneSpec};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Vfi(#[from] VfiError),
    #[error("task Jacobian must be 8×n (got {rows}×{cols})")]
    BadTaskJacobian { rows: usize, cols: usize },
    #[error("constraint row has {got} coefficients, expected {expected}")]
    RowWidth { got: usize, expected: usize },
    #[error("gain must be positive (got {0})")]
    BadGain(f64),
    #[error("zone `{zone}` is singular: {source}")]
    SingularZone {
        zone: String,
        source: DistanceError,
    },
}

/// Task tracking gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    /// Error feedback gain η (1/s).
    pub eta: f64,
    /// Stop-at-goal speed budget gain β.
    pub beta: f64,
}

impl Gains {
    pub fn new(eta: f64, beta: f64) -> Result<Self, ControlError> {
        if !(eta > 0.0) {
            return Err(ControlError::BadGain(eta));
        }
        if !(beta > 0.0) {
            return Err(ControlError::BadGain(beta));
        }
        Ok(Self { eta, beta })
    }
}

/// Which point of the robot a point-type zone watches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RobotPoint {
    /// End-effector origin.
    Effector,
    /// A named attachment point of the chain.
    Attachment(String),
}

/// Robot-side / static-side pairing of one zone.
#[derive(Debug, Clone)]
pub enum ZoneGeometry {
    /// Tool shaft line against a static line.
    ShaftToLine { line: PluckerLine },
    /// Tool shaft line against a static point.
    ShaftToPoint { point: Point },
    /// A robot point against a static line.
    PointToLine { point: RobotPoint, line: PluckerLine },
    /// A robot point against a static plane.
    PointToPlane { point: RobotPoint, plane: Plane },
}

/// One active constraint: geometry plus the vector-field-inequality spec.
#[derive(Debug, Clone)]
pub struct Zone {
    pub name: String,
    pub geometry: ZoneGeometry,
    pub spec: ZoneSpec,
}

impl Zone {
    fn robot_point(
        chain: &KinematicChain,
        q: &[f64],
        which: &RobotPoint,
    ) -> Result<(Point, DMatrix<f64>), ControlError> {
        let (x, j_x) = match which {
            RobotPoint::Effector => {
                let x = chain.fkm(q, Frame::End)?;
                (x, chain.pose_jacobian(q, Frame::End)?)
            }
            RobotPoint::Attachment(name) => chain.attachment_pose_jacobian(q, name)?,
        };
        let j_t = translation_jacobian(&j_x, &x).map_err(ChainError::from)?;
        let point = Point::from_quaternion(&x.translation().im()).map_err(ChainError::from)?;
        Ok((point, j_t))
    }

    /// Distance and Jacobian row for this zone at configuration `q`.
    pub fn evaluate(
        &self,
        chain: &KinematicChain,
        q: &[f64],
    ) -> Result<DistancePair, ControlError> {
        let singular = |source| ControlError::SingularZone {
            zone: self.name.clone(),
            source,
        };
        match &self.geometry {
            ZoneGeometry::ShaftToLine { line } => {
                let (lz, j_lz) = chain.shaft_line_jacobian(q)?;
                distance::line_line(&j_lz, &lz, line).map_err(singular)
            }
            ZoneGeometry::ShaftToPoint { point } => {
                let (lz, j_lz) = chain.shaft_line_jacobian(q)?;
                distance::line_point(&j_lz, &lz, point).map_err(singular)
            }
            ZoneGeometry::PointToLine { point, line } => {
                let (t, j_t) = Self::robot_point(chain, q, point)?;
                distance::point_line(&j_t, &t, line).map_err(singular)
            }
            ZoneGeometry::PointToPlane { point, plane } => {
                let (t, j_t) = Self::robot_point(chain, q, point)?;
                Ok(distance::point_plane(&j_t, &t, plane))
            }
        }
    }

    /// Raw distance only (no Jacobian); well-defined even in configurations
    /// where the Jacobian is singular, so it can always be logged.
    pub fn distance(&self, chain: &KinematicChain, q: &[f64]) -> Result<f64, ControlError> {
        Ok(match &self.geometry {
            ZoneGeometry::ShaftToLine { line } => {
                crate::geom::line_line_distance(&chain.shaft_line_jacobian(q)?.0, line)
            }
            ZoneGeometry::ShaftToPoint { point } => {
                crate::geom::point_line_distance(point, &chain.shaft_line_jacobian(q)?.0)
            }
            ZoneGeometry::PointToLine { point, line } => {
                let (t, _) = Self::robot_point(chain, q, point)?;
                crate::geom::point_line_distance(&t, line)
            }
            ZoneGeometry::PointToPlane { point, plane } => {
                let (t, _) = Self::robot_point(chain, q, point)?;
                crate::geom::point_plane_distance(&t, plane)
            }
        })
    }
}

/// Double-cover corrected task error `vec8(x − s·x_d)` with `s ∈ {+1, −1}`
/// chosen to minimize the error norm.
pub fn task_error(x: &DualQuaternion, x_d: &DualQuaternion) -> Vec8 {
    let minus = x.vec8() - x_d.vec8();
    let plus = x.vec8() + x_d.vec8();
    if minus.norm() <= plus.norm() {
        minus
    } else {
        plus
    }
}

/// One tick's task data plus constraint rows, ready to be assembled.
pub struct ControlProblem<'a> {
    pub task_jacobian: &'a DMatrix<f64>,
    pub task_error: &'a Vec8,
    pub gains: Gains,
    pub rows: &'a [ConstraintRow],
}

/// Decision-vector layout of the assembled program.
///
/// Columns are `[q̇_P (n) | q̇_N (n) | y (8) | z_A (8) | z_B (1) | z per row]`.
pub fn build_program(p: &ControlProblem) -> Result<CanonicalLp, ControlError> {
    let n = p.task_jacobian.ncols();
    if p.task_jacobian.nrows() != 8 {
        return Err(ControlError::BadTaskJacobian {
            rows: p.task_jacobian.nrows(),
            cols: n,
        });
    }
    for row in p.rows {
        if row.coefficients.len() != 2 * n {
            return Err(ControlError::RowWidth {
                got: row.coefficients.len(),
                expected: 2 * n,
            });
        }
    }
    let r = p.rows.len();
    let cols = 2 * n + 17 + r;
    let rows = 9 + r;
    let mut a = DMatrix::zeros(rows, cols);
    let mut b = DVector::zeros(rows);
    let mut cost = DVector::zeros(cols);

    // Block 1: J q̇_P − J q̇_N − y + z_A = −η x̃.
    for i in 0..8 {
        for j in 0..n {
            a[(i, j)] = p.task_jacobian[(i, j)];
            a[(i, n + j)] = -p.task_jacobian[(i, j)];
        }
        a[(i, 2 * n + i)] = -1.0;
        a[(i, 2 * n + 8 + i)] = 1.0;
        b[i] = -p.gains.eta * p.task_error[i];
    }
    // Block 2: 1ᵀ q̇_P + 1ᵀ q̇_N + z_B = β ‖x̃‖₁.
    for j in 0..2 * n {
        a[(8, j)] = 1.0;
    }
    a[(8, 2 * n + 16)] = 1.0;
    b[8] = p.gains.beta * p.task_error.iter().map(|v| v.abs()).sum::<f64>();
    // Constraint rows, one slack each.
    for (k, row) in p.rows.iter().enumerate() {
        for j in 0..2 * n {
            a[(9 + k, j)] = row.coefficients[j];
        }
        a[(9 + k, 2 * n + 17 + k)] = 1.0;
        b[9 + k] = row.rhs;
    }
    // Cost: −1ᵀJ on q̇_P, +1ᵀJ on q̇_N, 2 on the residuals y.
    for j in 0..n {
        let col_sum: f64 = (0..8).map(|i| p.task_jacobian[(i, j)]).sum();
        cost[j] = -col_sum;
        cost[n + j] = col_sum;
    }
    for i in 0..8 {
        cost[2 * n + i] = 2.0;
    }
    Ok(CanonicalLp::new(cost, a, b))
}

#[derive(Debug, Clone)]
pub struct StepStatus {
    pub lp: LpStatus,
    /// Zones omitted this tick because their Jacobian was singular.
    pub omitted: Vec<String>,
    /// True when the program was not optimal and zero velocity was returned.
    pub fail_safe: bool,
}

#[derive(Debug, Clone)]
pub struct ControlOutput {
    pub qdot: DVector<f64>,
    /// Objective residuals `y`.
    pub residual: DVector<f64>,
    /// Task slack `z_A`.
    pub task_slack: DVector<f64>,
    /// Speed-budget slack `z_B`.
    pub speed_slack: f64,
    /// One slack per constraint row (joint limits first, then zones).
    pub constraint_slacks: Vec<f64>,
    /// Full cost including the constant `−η 1ᵀ x̃` term (NaN on fail-safe).
    pub objective: f64,
    pub error_l1: f64,
    pub status: StepStatus,
}

/// Controller behaviour switches.
#[derive(Debug, Clone, Copy)]
pub struct ControllerConfig {
    pub gains: Gains,
    /// Joint-limit damper gain (1/s).
    pub eta_joint: f64,
    /// Abort on singular zones instead of omitting the row.
    pub strict_singular: bool,
}

/// Stateful per-arm controller (keeps the previous pose sign so the error
/// stays on one sheet of the double cover along a trajectory).
pub struct Controller {
    chain: KinematicChain,
    zones: Vec<Zone>,
    config: ControllerConfig,
    prev_pose: Option<DualQuaternion>,
}

impl Controller {
    pub fn new(
        chain: KinematicChain,
        zones: Vec<Zone>,
        config: ControllerConfig,
    ) -> Result<Self, ControlError> {
        if !(config.eta_joint > 0.0) {
            return Err(ControlError::BadGain(config.eta_joint));
        }
        Ok(Self {
            chain,
            zones,
            config,
            prev_pose: None,
        })
    }

    pub fn chain(&self) -> &KinematicChain {
        &self.chain
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn reset(&mut self) {
        self.prev_pose = None;
    }

    /// Raw zone distances at `q` (always well-defined; for logging).
    pub fn zone_distances(&self, q: &[f64]) -> Result<Vec<f64>, ControlError> {
        self.zones
            .iter()
            .map(|z| z.distance(&self.chain, q))
            .collect()
    }

    /// One control tick: returns the joint velocities for configuration `q`
    /// tracking the target pose `x_d`.
    pub fn step(&mut self, q: &[f64], x_d: &DualQuaternion) -> Result<ControlOutput, ControlError> {
        let n = self.chain.dof();
        let mut x = self.chain.fkm(q, Frame::End)?;
        let mut j_x = self.chain.pose_jacobian(q, Frame::End)?;
        if let Some(prev) = &self.prev_pose {
            if x.vec8().dot(&prev.vec8()) < 0.0 {
                x = -x;
                j_x = -j_x;
            }
        }
        self.prev_pose = Some(x);

        let err = task_error(&x, x_d);
        let error_l1: f64 = err.iter().map(|v| v.abs()).sum();

        let mut rows = joint_limit_rows(q, &self.chain, self.config.eta_joint)?;
        let mut omitted = Vec::new();
        for zone in &self.zones {
            match zone.evaluate(&self.chain, q) {
                Ok(pair) => rows.push(zone.spec.row(&pair)),
                Err(ControlError::SingularZone { zone: name, source }) => {
                    if self.config.strict_singular {
                        return Err(ControlError::SingularZone { zone: name, source });
                    }
                    log::warn!("omitting singular zone `{name}`: {source}");
                    omitted.push(name);
                }
                Err(other) => return Err(other),
            }
        }

        let lp = build_program(&ControlProblem {
            task_jacobian: &j_x,
            task_error: &err,
            gains: self.config.gains,
            rows: &rows,
        })?;
        let sol = lp::solve(&lp)?;

        let output = match sol.status {
            LpStatus::Optimal => {
                let g = &sol.g;
                let mut qdot = DVector::zeros(n);
                if error_l1 > 0.0 {
                    for j in 0..n {
                        qdot[j] = g[j] - g[n + j];
                    }
                }
                // With ‖x̃‖₁ = 0 the speed-budget row pins q̇ to zero; return
                // exact zeros rather than the solver's roundoff.
                let residual = DVector::from_fn(8, |i, _| g[2 * n + i]);
                let task_slack = DVector::from_fn(8, |i, _| g[2 * n + 8 + i]);
                let speed_slack = g[2 * n + 16];
                let constraint_slacks = (0..rows.len()).map(|k| g[2 * n + 17 + k]).collect();
                ControlOutput {
                    qdot,
                    residual,
                    task_slack,
                    speed_slack,
                    constraint_slacks,
                    objective: sol.objective - self.config.gains.eta * err.iter().sum::<f64>(),
                    error_l1,
                    status: StepStatus {
                        lp: LpStatus::Optimal,
                        omitted,
                        fail_safe: false,
                    },
                }
            }
            status @ (LpStatus::Infeasible | LpStatus::Unbounded) => {
                log::warn!("control program {status:?}; holding zero velocity");
                ControlOutput {
                    qdot: DVector::zeros(n),
                    residual: DVector::zeros(8),
                    task_slack: DVector::zeros(8),
                    speed_slack: 0.0,
                    constraint_slacks: vec![0.0; rows.len()],
                    objective: f64::NAN,
                    error_l1,
                    status: StepStatus {
                        lp: status,
                        omitted,
                        fail_safe: true,
                    },
                }
            }
        };
        Ok(output)
    }
}
