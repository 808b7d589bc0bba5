//! Geometric primitives (points, Plücker lines, planes) and the static
//! distance functions between them.
//!
//! Lines are pure unit dual quaternions `l + ε m` with unit direction `l` and
//! moment `m = p × l` for any point `p` on the line. Planes are a pure unit
//! normal plus the signed offset of the plane from the reference origin.

use crate::dq::{AlgebraError, DualQuaternion, DualScalar, Quaternion};
use thiserror::Error;

/// `|sin φ|` below which two lines are treated as parallel.
///
/// The non-parallel distance formula divides by `‖P(l₁×l₂)‖ = |sin φ|` and
/// loses precision near zero, so dispatch happens slightly before that.
pub const PARALLEL_SIN_TOL: f64 = 1e-6;

/// Tolerance for the Plücker constraint `⟨l, m⟩ = 0` and unit checks when
/// building lines from raw parts (transformed lines carry some roundoff).
const LINE_BUILD_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("line moment is not orthogonal to its direction (⟨l,m⟩ = {0})")]
    PluckerConstraint(f64),
}

// ---------------------------------------------------------------------------
// Point
// ---------------------------------------------------------------------------

/// A point in R³ stored as a pure quaternion (meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    q: Quaternion,
}

impl Point {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self {
            q: Quaternion::pure(x, y, z),
        }
    }

    pub fn from_quaternion(q: &Quaternion) -> Result<Self, GeomError> {
        q.check_pure()?;
        Ok(Self { q: q.im() })
    }

    pub fn quaternion(&self) -> Quaternion {
        self.q
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.q.x, self.q.y, self.q.z]
    }

    pub fn transformed(&self, x: &DualQuaternion) -> Self {
        Self {
            q: x.transform_point(&self.q).im(),
        }
    }
}

// ---------------------------------------------------------------------------
// Plücker line
// ---------------------------------------------------------------------------

/// An infinite oriented line in Plücker coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PluckerLine {
    direction: Quaternion,
    moment: Quaternion,
}

impl PluckerLine {
    /// Line through `point` with pure unit `direction`; moment is
    /// `point × direction`.
    pub fn from_point_direction(
        point: &Point,
        direction: &Quaternion,
    ) -> Result<Self, GeomError> {
        direction.check_pure()?;
        direction.check_unit()?;
        Ok(Self {
            direction: direction.im(),
            moment: point.quaternion().cross(direction),
        })
    }

    /// Build from raw direction and moment, validating the line invariants.
    pub fn from_parts(direction: &Quaternion, moment: &Quaternion) -> Result<Self, GeomError> {
        direction.check_pure()?;
        moment.check_pure()?;
        let dev = (direction.norm() - 1.0).abs();
        if dev > LINE_BUILD_TOL {
            return Err(AlgebraError::NotUnit(dev).into());
        }
        let plucker = direction.dot(moment);
        if plucker.abs() > LINE_BUILD_TOL {
            return Err(GeomError::PluckerConstraint(plucker));
        }
        Ok(Self {
            direction: direction.im(),
            moment: moment.im(),
        })
    }

    pub fn from_dual_quaternion(h: &DualQuaternion) -> Result<Self, GeomError> {
        Self::from_parts(&h.p, &h.d)
    }

    pub fn as_dual_quaternion(&self) -> DualQuaternion {
        DualQuaternion::new(self.direction, self.moment)
    }

    pub fn direction(&self) -> Quaternion {
        self.direction
    }

    pub fn moment(&self) -> Quaternion {
        self.moment
    }

    /// The point of the line closest to the origin: `l × m`.
    pub fn closest_point_to_origin(&self) -> Point {
        Point {
            q: self.direction.cross(&self.moment),
        }
    }

    /// Rigid transform of the line: `x l x*`.
    pub fn transformed(&self, x: &DualQuaternion) -> Result<Self, GeomError> {
        let moved = x.adjoint(&self.as_dual_quaternion());
        Self::from_dual_quaternion(&moved)
    }
}

// ---------------------------------------------------------------------------
// Plane
// ---------------------------------------------------------------------------

/// A plane `{p : ⟨p, normal⟩ = offset}` with pure unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    normal: Quaternion,
    offset: f64,
}

impl Plane {
    /// Plane through `point` with pure unit `normal`; the offset is
    /// `⟨point, normal⟩`.
    pub fn from_point_normal(point: &Point, normal: &Quaternion) -> Result<Self, GeomError> {
        normal.check_pure()?;
        normal.check_unit()?;
        Ok(Self {
            normal: normal.im(),
            offset: point.quaternion().dot(normal),
        })
    }

    pub fn from_parts(normal: &Quaternion, offset: f64) -> Result<Self, GeomError> {
        normal.check_pure()?;
        normal.check_unit()?;
        Ok(Self {
            normal: normal.im(),
            offset,
        })
    }

    pub fn normal(&self) -> Quaternion {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn transformed(&self, x: &DualQuaternion) -> Self {
        let normal = x.rotation().rotate(&self.normal).im();
        let point = x.transform_point(&(self.normal * self.offset));
        Self {
            normal,
            offset: point.dot(&normal),
        }
    }
}

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

/// Signed distance `⟨t, n_π⟩ − d_π`; positive on the normal side.
pub fn point_plane_distance(t: &Point, plane: &Plane) -> f64 {
    t.quaternion().dot(&plane.normal()) - plane.offset()
}

/// Euclidean distance `‖t × l − m‖` from a point to a line.
pub fn point_line_distance(t: &Point, line: &PluckerLine) -> f64 {
    (t.quaternion().cross(&line.direction()) - line.moment()).norm()
}

/// Dual cosine `⟨l₁, l₂⟩ = cos φ − ε d sin φ` between unit Plücker lines.
pub fn line_inner(a: &PluckerLine, b: &PluckerLine) -> DualScalar {
    let inner = a
        .as_dual_quaternion()
        .inner(&b.as_dual_quaternion())
        .expect("line parts are pure by construction");
    // The inner product of pure dual quaternions has real parts only.
    DualScalar::new(inner.p.w, inner.d.w)
}

/// Dual sine `l₁ × l₂ = s sin φ + ε (m_s sin φ + s d cos φ)`, a pure dual
/// quaternion along the common perpendicular `s + ε m_s`.
pub fn line_cross(a: &PluckerLine, b: &PluckerLine) -> DualQuaternion {
    a.as_dual_quaternion()
        .cross(&b.as_dual_quaternion())
        .expect("line parts are pure by construction")
}

/// Distance between two lines, composing the non-parallel formula
/// `‖D(⟨a,b⟩)‖ / ‖P(a×b)‖` with the parallel formula `‖D(a×b)‖`.
pub fn line_line_distance(a: &PluckerLine, b: &PluckerLine) -> f64 {
    let cross = line_cross(a, b);
    let sin_phi = cross.p.norm();
    if sin_phi < PARALLEL_SIN_TOL {
        cross.d.norm()
    } else {
        let inner = line_inner(a, b);
        inner.dual.abs() / sin_phi
    }
}
