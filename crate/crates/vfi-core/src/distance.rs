//! Distance Jacobians pairing one robot-driven entity with one static
//! entity.
//!
//! Every operation returns a [`DistancePair`]: the scalar distance together
//! with the 1×n row mapping joint velocities to the distance rate. These rows
//! are what the vector-field-inequality constraints are built from.

use crate::dq::{norm_derivative_row, AlgebraError};
use crate::geom::{Plane, PluckerLine, Point, PARALLEL_SIN_TOL};
use nalgebra::{DMatrix, RowDVector};
use thiserror::Error;

/// Distances below this are singular for the Jacobians that divide by them.
pub const DISTANCE_SINGULAR_TOL: f64 = 1e-9;

/// `|sin φ|` band just above the parallel dispatch threshold in which the
/// non-parallel line-line Jacobian is used but numerically fragile.
pub const LOW_CONFIDENCE_SIN_BAND: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistanceError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("{pair:?} distance is zero; its Jacobian is singular")]
    ZeroDistance { pair: PairKind },
    #[error("lines intersect (dual part of the inner product vanishes); the non-parallel Jacobian is singular")]
    IntersectingLines,
    #[error("lines are coincident; the parallel Jacobian is singular")]
    CoincidentLines,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    PointPlane,
    LinePoint,
    PointLine,
    LineLine,
}

/// A scalar distance and its 1×n Jacobian row.
#[derive(Debug, Clone)]
pub struct DistancePair {
    /// Distance in meters; signed for point–plane, non-negative otherwise.
    pub distance: f64,
    /// Row mapping joint velocities to the distance time derivative.
    pub jacobian: RowDVector<f64>,
    pub kind: PairKind,
}

/// Point–static-plane: signed distance `⟨t, n_π⟩ − d_π` and row
/// `(vec4 n_π)ᵀ J_t`.
pub fn point_plane(j_t: &DMatrix<f64>, t: &Point, plane: &Plane) -> DistancePair {
    let distance = crate::geom::point_plane_distance(t, plane);
    let row = plane.normal().vec4().transpose() * j_t;
    DistancePair {
        distance,
        jacobian: RowDVector::from_row_slice(row.as_slice()),
        kind: PairKind::PointPlane,
    }
}

/// Robot-line–static-point: distance `‖p × l_z − m_z‖` and row
/// `(1/d) vec4(p×l_z − m_z)ᵀ (S̄(p) J_rz − J_mz)`.
///
/// `j_lz` is the 8×n line Jacobian (direction rows over moment rows).
pub fn line_point(
    j_lz: &DMatrix<f64>,
    lz: &PluckerLine,
    p: &Point,
) -> Result<DistancePair, DistanceError> {
    let residual = p.quaternion().cross(&lz.direction()) - lz.moment();
    let distance = residual.norm();
    if distance <= DISTANCE_SINGULAR_TOL {
        return Err(DistanceError::ZeroDistance {
            pair: PairKind::LinePoint,
        });
    }
    let j_dir = j_lz.rows(0, 4);
    let j_moment = j_lz.rows(4, 4);
    let inner = p.quaternion().cross_matrix()? * j_dir - j_moment;
    let row = (residual.vec4() / distance).transpose() * inner;
    Ok(DistancePair {
        distance,
        jacobian: RowDVector::from_row_slice(row.as_slice()),
        kind: PairKind::LinePoint,
    })
}

/// Robot-point–static-line: distance `‖t × l − m‖` and row
/// `(1/d) vec4(t×l − m)ᵀ S̄(l)ᵀ J_t`.
pub fn point_line(
    j_t: &DMatrix<f64>,
    t: &Point,
    line: &PluckerLine,
) -> Result<DistancePair, DistanceError> {
    let residual = t.quaternion().cross(&line.direction()) - line.moment();
    let distance = residual.norm();
    if distance <= DISTANCE_SINGULAR_TOL {
        return Err(DistanceError::ZeroDistance {
            pair: PairKind::PointLine,
        });
    }
    let row = (residual.vec4() / distance).transpose()
        * (line.direction().cross_matrix()?.transpose() * j_t);
    Ok(DistancePair {
        distance,
        jacobian: RowDVector::from_row_slice(row.as_slice()),
        kind: PairKind::PointLine,
    })
}

/// Jacobian of the inner product `⟨l_z(q), l⟩` with `l` static:
/// `−½ (H₈⁺(l) + H₈⁻(l)) J_lz`, an 8×n matrix whose top/bottom 4-row blocks
/// differentiate the primary and dual parts.
pub fn inner_product_jacobian(j_lz: &DMatrix<f64>, l: &PluckerLine) -> DMatrix<f64> {
    let ldq = l.as_dual_quaternion();
    let op = (ldq.hamilton_plus() + ldq.hamilton_minus()) * -0.5;
    let mut out = DMatrix::zeros(8, j_lz.ncols());
    out.copy_from(&(op * j_lz));
    out
}

/// Jacobian of the cross product `l_z(q) × l` with `l` static:
/// `½ (H₈⁻(l) − H₈⁺(l)) J_lz`.
pub fn cross_product_jacobian(j_lz: &DMatrix<f64>, l: &PluckerLine) -> DMatrix<f64> {
    let ldq = l.as_dual_quaternion();
    let op = (ldq.hamilton_minus() - ldq.hamilton_plus()) * 0.5;
    let mut out = DMatrix::zeros(8, j_lz.ncols());
    out.copy_from(&(op * j_lz));
    out
}

/// Robot-line–static-line distance and Jacobian.
///
/// Dispatches on `‖P(l_z × l)‖ = |sin φ|`: below [`PARALLEL_SIN_TOL`] the
/// parallel branch `d = ‖D(l_z × l)‖` is used, otherwise the non-parallel
/// branch `d = ‖D⟨l_z, l⟩‖ / ‖P(l_z × l)‖`. Within a guard band above the
/// threshold the non-parallel Jacobian divides by `sin²φ` and is flagged as
/// low-confidence in the log.
pub fn line_line(
    j_lz: &DMatrix<f64>,
    lz: &PluckerLine,
    l: &PluckerLine,
) -> Result<DistancePair, DistanceError> {
    let cross = crate::geom::line_cross(lz, l);
    let sin_phi = cross.p.norm();
    let j_cross = cross_product_jacobian(j_lz, l);

    if sin_phi < PARALLEL_SIN_TOL {
        // Parallel branch: d = ‖D(l_z × l)‖.
        let dual = cross.d;
        let distance = dual.norm();
        if distance <= DISTANCE_SINGULAR_TOL {
            return Err(DistanceError::CoincidentLines);
        }
        let jacobian = norm_derivative_row(&dual, &j_cross.rows(4, 4).into_owned())?;
        return Ok(DistancePair {
            distance,
            jacobian,
            kind: PairKind::LineLine,
        });
    }

    if sin_phi < LOW_CONFIDENCE_SIN_BAND {
        log::warn!(
            "line-line Jacobian low confidence: |sin φ| = {sin_phi:.3e} is near the parallel dispatch threshold"
        );
    }

    // Non-parallel branch: d = ‖D⟨l_z,l⟩‖ / ‖P(l_z×l)‖.
    let inner = lz
        .as_dual_quaternion()
        .inner(&l.as_dual_quaternion())
        .expect("lines are pure");
    let numerator = inner.d.norm();
    if numerator <= DISTANCE_SINGULAR_TOL * sin_phi {
        return Err(DistanceError::IntersectingLines);
    }
    let distance = numerator / sin_phi;

    let j_inner = inner_product_jacobian(j_lz, l);
    let num_row = norm_derivative_row(&inner.d, &j_inner.rows(4, 4).into_owned())?;
    let den_row = norm_derivative_row(&cross.p, &j_cross.rows(0, 4).into_owned())?;
    let a = 1.0 / sin_phi;
    let b = -numerator / (sin_phi * sin_phi);
    let jacobian = num_row * a + den_row * b;
    Ok(DistancePair {
        distance,
        jacobian,
        kind: PairKind::LineLine,
    })
}
