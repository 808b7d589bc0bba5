//! Quaternion and dual quaternion algebra.
//!
//! Coefficient layout is `(w, x, y, z)` for quaternions and
//! `(w, x, y, z, w', x', y', z')` for dual quaternions, so the Hamilton
//! operator matrices returned here act directly on [`Quaternion::vec4`] /
//! [`DualQuaternion::vec8`] coordinate vectors.

use nalgebra::{DMatrix, RowDVector};
use thiserror::Error;

/// Coordinates of a quaternion.
pub type Vec4 = nalgebra::Vector4<f64>;
/// Coordinates of a dual quaternion.
pub type Vec8 = nalgebra::SVector<f64, 8>;
/// 4×4 real matrix (Hamilton / cross-product operators).
pub type Mat4 = nalgebra::Matrix4<f64>;
/// 8×8 real matrix (dual quaternion Hamilton operators).
pub type Mat8 = nalgebra::SMatrix<f64, 8, 8>;

/// Tolerance below which a quaternion is accepted as pure (zero real part).
pub const PURE_TOL: f64 = 1e-9;
/// Tolerance below which a (dual) quaternion is accepted as unit norm.
pub const UNIT_TOL: f64 = 1e-8;
/// Rotation half-angle sine below which the screw decomposition switches to
/// its pure-translation branch (avoids 0/0 in the pitch formula).
const SCREW_SIN_TOL: f64 = 1e-8;
/// |cos(θ/2)| below which a relative rotation counts as a π rotation, for
/// which both interpolation branches are equally short.
const ANTIPODAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("operand must be a pure quaternion (real part {0})")]
    NotPure(f64),
    #[error("operand must be unit norm (norm deviation {0})")]
    NotUnit(f64),
    #[error("norm is zero; the requested quantity is undefined")]
    DegenerateNorm,
    #[error("relative rotation angle is π; interpolation branch is ambiguous")]
    AntipodalRotation,
}

/// `C4 = diag(1, -1, -1, -1)`, the coordinate form of quaternion conjugation.
pub fn conjugation_matrix() -> Mat4 {
    Mat4::from_diagonal(&Vec4::new(1.0, -1.0, -1.0, -1.0))
}

// ---------------------------------------------------------------------------
// Quaternion
// ---------------------------------------------------------------------------

/// Quaternion `w + x î + y ĵ + z k̂` with `î² = ĵ² = k̂² = îĵk̂ = −1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// Pure quaternion `x î + y ĵ + z k̂`, the point `(x, y, z)`.
    pub const fn pure(x: f64, y: f64, z: f64) -> Self {
        Self::new(0.0, x, y, z)
    }

    pub const fn scalar(w: f64) -> Self {
        Self::new(w, 0.0, 0.0, 0.0)
    }

    pub fn from_vec4(v: &Vec4) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn vec4(&self) -> Vec4 {
        Vec4::new(self.w, self.x, self.y, self.z)
    }

    /// Rotation of `angle` radians about a pure unit `axis`.
    pub fn from_axis_angle(axis: &Quaternion, angle: f64) -> Result<Self, AlgebraError> {
        axis.check_pure()?;
        axis.check_unit()?;
        let (s, c) = (angle / 2.0).sin_cos();
        Ok(Self::new(c, s * axis.x, s * axis.y, s * axis.z))
    }

    pub fn rotation_x(angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        Self::new(c, s, 0.0, 0.0)
    }

    pub fn rotation_y(angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        Self::new(c, 0.0, s, 0.0)
    }

    pub fn rotation_z(angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        Self::new(c, 0.0, 0.0, s)
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_squared(&self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Coefficient-wise dot product; equals `⟨a, b⟩` for pure quaternions.
    pub fn dot(&self, other: &Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// `(ab − ba) / 2`; the R³ cross product when both operands are pure.
    pub fn cross(&self, other: &Self) -> Self {
        Self::pure(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn re(&self) -> f64 {
        self.w
    }

    pub fn im(&self) -> Self {
        Self::pure(self.x, self.y, self.z)
    }

    pub fn is_pure(&self) -> bool {
        self.w.abs() <= PURE_TOL
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_TOL
    }

    pub(crate) fn check_pure(&self) -> Result<(), AlgebraError> {
        if self.is_pure() {
            Ok(())
        } else {
            Err(AlgebraError::NotPure(self.w))
        }
    }

    pub(crate) fn check_unit(&self) -> Result<(), AlgebraError> {
        let dev = (self.norm() - 1.0).abs();
        if dev <= UNIT_TOL {
            Ok(())
        } else {
            Err(AlgebraError::NotUnit(dev))
        }
    }

    pub fn normalized(&self) -> Result<Self, AlgebraError> {
        let n = self.norm();
        if n == 0.0 {
            return Err(AlgebraError::DegenerateNorm);
        }
        Ok(*self * (1.0 / n))
    }

    /// `H₄⁺(a)`: `vec4(ab) = H₄⁺(a) · vec4(b)`.
    #[rustfmt::skip]
    pub fn hamilton_plus(&self) -> Mat4 {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Mat4::new(
            w, -x, -y, -z,
            x,  w, -z,  y,
            y,  z,  w, -x,
            z, -y,  x,  w,
        )
    }

    /// `H₄⁻(b)`: `vec4(ab) = H₄⁻(b) · vec4(a)`.
    #[rustfmt::skip]
    pub fn hamilton_minus(&self) -> Mat4 {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Mat4::new(
            w, -x, -y, -z,
            x,  w,  z, -y,
            y, -z,  w,  x,
            z,  y, -x,  w,
        )
    }

    /// `S̄(a)` with `vec4(a×b) = S̄(a) vec4(b) = S̄(b)ᵀ vec4(a)`.
    ///
    /// Defined for pure quaternions only; the first row and column are zero.
    pub fn cross_matrix(&self) -> Result<Mat4, AlgebraError> {
        self.check_pure()?;
        Ok(self.cross_matrix_unchecked())
    }

    #[rustfmt::skip]
    pub(crate) fn cross_matrix_unchecked(&self) -> Mat4 {
        let (x, y, z) = (self.x, self.y, self.z);
        Mat4::new(
            0.0, 0.0, 0.0, 0.0,
            0.0, 0.0,  -z,   y,
            0.0,   z, 0.0,  -x,
            0.0,  -y,   x, 0.0,
        )
    }

    /// Rotate a pure quaternion: `r a r*`.
    pub fn rotate(&self, a: &Quaternion) -> Quaternion {
        (*self * *a) * self.conjugate()
    }
}

impl std::ops::Add for Quaternion {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.w + rhs.w,
            self.x + rhs.x,
            self.y + rhs.y,
            self.z + rhs.z,
        )
    }
}

impl std::ops::Sub for Quaternion {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(
            self.w - rhs.w,
            self.x - rhs.x,
            self.y - rhs.y,
            self.z - rhs.z,
        )
    }
}

impl std::ops::Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl std::ops::Mul for Quaternion {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.w * rhs.w - self.x * rhs.x - self.y * rhs.y - self.z * rhs.z,
            self.w * rhs.x + self.x * rhs.w + self.y * rhs.z - self.z * rhs.y,
            self.w * rhs.y - self.x * rhs.z + self.y * rhs.w + self.z * rhs.x,
            self.w * rhs.z + self.x * rhs.y - self.y * rhs.x + self.z * rhs.w,
        )
    }
}

impl std::ops::Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

// ---------------------------------------------------------------------------
// Dual scalar
// ---------------------------------------------------------------------------

/// A dual number `real + ε dual` with real coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualScalar {
    pub real: f64,
    pub dual: f64,
}

impl DualScalar {
    pub const fn new(real: f64, dual: f64) -> Self {
        Self { real, dual }
    }
}

// ---------------------------------------------------------------------------
// Dual quaternion
// ---------------------------------------------------------------------------

/// Dual quaternion `h = p + ε d` with `ε² = 0`.
///
/// Unit elements represent rigid poses `x = r + ε (1/2) t r` where `r` is a
/// unit rotation quaternion and `t` a pure translation quaternion.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualQuaternion {
    /// Primary part `P(h)`.
    pub p: Quaternion,
    /// Dual part `D(h)`.
    pub d: Quaternion,
}

impl DualQuaternion {
    pub const ZERO: Self = Self::new(Quaternion::ZERO, Quaternion::ZERO);
    pub const ONE: Self = Self::new(Quaternion::ONE, Quaternion::ZERO);

    pub const fn new(p: Quaternion, d: Quaternion) -> Self {
        Self { p, d }
    }

    /// Pose with rotation `r` (unit) and translation `t` (pure): `r + ε ½ t r`.
    pub fn from_rotation_translation(
        r: &Quaternion,
        t: &Quaternion,
    ) -> Result<Self, AlgebraError> {
        r.check_unit()?;
        t.check_pure()?;
        Ok(Self::new(*r, (*t * *r) * 0.5))
    }

    pub fn from_rotation(r: &Quaternion) -> Result<Self, AlgebraError> {
        r.check_unit()?;
        Ok(Self::new(*r, Quaternion::ZERO))
    }

    pub fn from_translation(t: &Quaternion) -> Result<Self, AlgebraError> {
        t.check_pure()?;
        Ok(Self::new(Quaternion::ONE, *t * 0.5))
    }

    pub fn from_vec8(v: &Vec8) -> Self {
        Self::new(
            Quaternion::new(v[0], v[1], v[2], v[3]),
            Quaternion::new(v[4], v[5], v[6], v[7]),
        )
    }

    pub fn vec8(&self) -> Vec8 {
        Vec8::from_column_slice(&[
            self.p.w, self.p.x, self.p.y, self.p.z, self.d.w, self.d.x, self.d.y, self.d.z,
        ])
    }

    /// Conjugate `Re(h) − Im(h)`, i.e. both parts quaternion-conjugated.
    pub fn conjugate(&self) -> Self {
        Self::new(self.p.conjugate(), self.d.conjugate())
    }

    /// Real part `h₁ + ε h₁'` as a dual quaternion.
    pub fn re(&self) -> Self {
        Self::new(
            Quaternion::scalar(self.p.w),
            Quaternion::scalar(self.d.w),
        )
    }

    /// Imaginary part, so that `h = Re(h) + Im(h)`.
    pub fn im(&self) -> Self {
        Self::new(self.p.im(), self.d.im())
    }

    /// Norm `‖h‖ = √(h h*) = ‖P(h)‖ + ε ⟨P(h), D(h)⟩ / ‖P(h)‖`.
    ///
    /// Fails when the primary part has zero norm, in which case the dual
    /// component is undefined.
    pub fn norm(&self) -> Result<DualScalar, AlgebraError> {
        let np = self.p.norm();
        if np == 0.0 {
            return Err(AlgebraError::DegenerateNorm);
        }
        Ok(DualScalar::new(np, self.p.dot(&self.d) / np))
    }

    pub fn is_unit(&self) -> bool {
        (self.p.norm() - 1.0).abs() <= UNIT_TOL && self.p.dot(&self.d).abs() <= UNIT_TOL
    }

    pub fn is_pure(&self) -> bool {
        self.p.is_pure() && self.d.is_pure()
    }

    pub(crate) fn check_unit(&self) -> Result<(), AlgebraError> {
        if self.is_unit() {
            Ok(())
        } else {
            let n = self.norm()?;
            Err(AlgebraError::NotUnit(
                (n.real - 1.0).abs().max(n.dual.abs()),
            ))
        }
    }

    pub(crate) fn check_pure(&self) -> Result<(), AlgebraError> {
        if self.p.w.abs() > PURE_TOL {
            return Err(AlgebraError::NotPure(self.p.w));
        }
        if self.d.w.abs() > PURE_TOL {
            return Err(AlgebraError::NotPure(self.d.w));
        }
        Ok(())
    }

    /// Renormalize a near-unit dual quaternion: rescales the primary part and
    /// removes the component of the dual part parallel to it.
    pub fn normalized(&self) -> Result<Self, AlgebraError> {
        let n = self.p.norm();
        if n == 0.0 {
            return Err(AlgebraError::DegenerateNorm);
        }
        let p = self.p * (1.0 / n);
        let d = self.d * (1.0 / n);
        let d = d - p * p.dot(&d);
        Ok(Self::new(p, d))
    }

    /// Inner product `−(ab + ba)/2` of pure dual quaternions.
    pub fn inner(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_pure()?;
        other.check_pure()?;
        Ok((*self * *other + *other * *self) * (-0.5))
    }

    /// Cross product `(ab − ba)/2` of pure dual quaternions.
    pub fn cross(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_pure()?;
        other.check_pure()?;
        Ok((*self * *other - *other * *self) * 0.5)
    }

    /// `H₈⁺(h)`: `vec8(h g) = H₈⁺(h) · vec8(g)`.
    pub fn hamilton_plus(&self) -> Mat8 {
        let hp = self.p.hamilton_plus();
        let hd = self.d.hamilton_plus();
        let mut m = Mat8::zeros();
        m.fixed_view_mut::<4, 4>(0, 0).copy_from(&hp);
        m.fixed_view_mut::<4, 4>(4, 0).copy_from(&hd);
        m.fixed_view_mut::<4, 4>(4, 4).copy_from(&hp);
        m
    }

    /// `H₈⁻(g)`: `vec8(h g) = H₈⁻(g) · vec8(h)`.
    pub fn hamilton_minus(&self) -> Mat8 {
        let hp = self.p.hamilton_minus();
        let hd = self.d.hamilton_minus();
        let mut m = Mat8::zeros();
        m.fixed_view_mut::<4, 4>(0, 0).copy_from(&hp);
        m.fixed_view_mut::<4, 4>(4, 0).copy_from(&hd);
        m.fixed_view_mut::<4, 4>(4, 4).copy_from(&hp);
        m
    }

    /// Rotation part of a unit dual quaternion.
    pub fn rotation(&self) -> Quaternion {
        self.p
    }

    /// Translation `t = 2 D(x) P(x)*` of a unit dual quaternion.
    pub fn translation(&self) -> Quaternion {
        (self.d * self.p.conjugate()) * 2.0
    }

    /// Apply a unit pose to a point (pure quaternion): `r t r* + translation`.
    pub fn transform_point(&self, point: &Quaternion) -> Quaternion {
        self.p.rotate(point) + self.translation()
    }

    /// Adjoint transform `x h x*`; maps lines/twists between frames.
    pub fn adjoint(&self, h: &Self) -> Self {
        (*self * *h) * self.conjugate()
    }

    /// Screw decomposition of a unit dual quaternion.
    pub fn screw_parameters(&self) -> Result<ScrewParameters, AlgebraError> {
        self.check_unit()?;
        let sin_half = self.p.im().norm();
        let cos_half = self.p.w;
        if sin_half < SCREW_SIN_TOL {
            if cos_half < 0.0 {
                // −1-like primary part: a 2π screw with undefined axis.
                return Err(AlgebraError::AntipodalRotation);
            }
            // Pure translation: direction along t, zero angle.
            let t = self.translation();
            let nt = t.norm();
            let dir = if nt == 0.0 {
                Quaternion::K
            } else {
                t * (1.0 / nt)
            };
            return Ok(ScrewParameters {
                angle: 0.0,
                displacement: nt,
                direction: dir,
                moment: Quaternion::ZERO,
            });
        }
        let angle = 2.0 * sin_half.atan2(cos_half);
        let direction = self.p.im() * (1.0 / sin_half);
        let t = self.translation();
        let displacement = t.dot(&direction);
        // D(x) = −(d/2) sin(θ/2) + [ m sin(θ/2) + v (d/2) cos(θ/2) ]
        let moment =
            (self.d.im() - direction * (0.5 * displacement * cos_half)) * (1.0 / sin_half);
        Ok(ScrewParameters {
            angle,
            displacement,
            direction,
            moment,
        })
    }

    /// Screw power `h^τ` of a unit dual quaternion.
    pub fn pow(&self, tau: f64) -> Result<Self, AlgebraError> {
        let s = self.screw_parameters()?;
        if s.angle == 0.0 {
            let t = self.translation();
            return Self::from_translation(&(t * tau));
        }
        Ok(s.scaled(tau).into_unit_dq())
    }

    /// Screw-linear interpolation `x₁ (x₁* x₂)^τ`.
    ///
    /// The shorter rotation branch is taken (the relative pose is negated when
    /// its primary scalar part is negative), so `sclerp(x1, x2, 1)` equals
    /// `x2` up to the double-cover sign. A relative rotation of exactly π has
    /// no shorter branch and is reported as [`AlgebraError::AntipodalRotation`];
    /// use [`DualQuaternion::sclerp_branch`] to choose one explicitly.
    pub fn sclerp(x1: &Self, x2: &Self, tau: f64) -> Result<Self, AlgebraError> {
        let rel = x1.conjugate() * *x2;
        if rel.p.w.abs() <= ANTIPODAL_TOL && rel.p.im().norm() >= SCREW_SIN_TOL {
            return Err(AlgebraError::AntipodalRotation);
        }
        Self::sclerp_branch(x1, x2, tau, false)
    }

    /// Screw-linear interpolation with an explicit branch choice.
    ///
    /// `long_way = false` follows the shorter rotation, `true` the longer one.
    pub fn sclerp_branch(
        x1: &Self,
        x2: &Self,
        tau: f64,
        long_way: bool,
    ) -> Result<Self, AlgebraError> {
        x1.check_unit()?;
        x2.check_unit()?;
        let mut rel = x1.conjugate() * *x2;
        let mut flip = rel.p.w < 0.0;
        if long_way {
            flip = !flip;
        }
        if flip {
            rel = -rel;
        }
        Ok(*x1 * rel.pow(tau)?)
    }
}

impl From<Quaternion> for DualQuaternion {
    fn from(q: Quaternion) -> Self {
        Self::new(q, Quaternion::ZERO)
    }
}

impl std::ops::Add for DualQuaternion {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.p + rhs.p, self.d + rhs.d)
    }
}

impl std::ops::Sub for DualQuaternion {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.p - rhs.p, self.d - rhs.d)
    }
}

impl std::ops::Neg for DualQuaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.p, -self.d)
    }
}

impl std::ops::Mul for DualQuaternion {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        // ε² = 0: D(ab) = P(a)D(b) + D(a)P(b).
        Self::new(self.p * rhs.p, self.p * rhs.d + self.d * rhs.p)
    }
}

impl std::ops::Mul<f64> for DualQuaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.p * s, self.d * s)
    }
}

/// Screw parameters of a unit dual quaternion: rotation `angle` about the
/// axis line (`direction`, `moment`) with `displacement` translation along it.
#[derive(Debug, Clone, Copy)]
pub struct ScrewParameters {
    pub angle: f64,
    pub displacement: f64,
    pub direction: Quaternion,
    pub moment: Quaternion,
}

impl ScrewParameters {
    fn scaled(&self, tau: f64) -> Self {
        Self {
            angle: self.angle * tau,
            displacement: self.displacement * tau,
            direction: self.direction,
            moment: self.moment,
        }
    }

    /// Recompose `cos(θ̂/2) + ŝ sin(θ̂/2)` with `θ̂ = θ + ε d`, `ŝ = v + ε m`.
    fn into_unit_dq(self) -> DualQuaternion {
        let (sin_half, cos_half) = (self.angle / 2.0).sin_cos();
        let p = Quaternion::scalar(cos_half) + self.direction * sin_half;
        let d = Quaternion::scalar(-0.5 * self.displacement * sin_half)
            + self.moment * sin_half
            + self.direction * (0.5 * self.displacement * cos_half);
        DualQuaternion::new(p, d)
    }
}

/// Row mapping joint velocities to `d‖a(q)‖/dt`: `(1/‖a‖) vec4(a)ᵀ J_a`.
///
/// `j_a` is the 4×n Jacobian of `vec4(a)` with respect to the joints.
pub fn norm_derivative_row(
    a: &Quaternion,
    j_a: &DMatrix<f64>,
) -> Result<RowDVector<f64>, AlgebraError> {
    let n = a.norm();
    if n <= 1e-12 {
        return Err(AlgebraError::DegenerateNorm);
    }
    assert_eq!(j_a.nrows(), 4, "norm derivative expects a 4×n Jacobian");
    let row = (a.vec4() * (1.0 / n)).transpose() * j_a;
    Ok(RowDVector::from_row_slice(row.as_slice()))
}
