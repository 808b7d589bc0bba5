//! Serial-chain forward kinematics and analytical Jacobians in dual
//! quaternion form.
//!
//! Chains are described by standard Denavit–Hartenberg parameters with a base
//! pose and a tool (effector) transform. Joint `i` contributes
//! `Rz(θ) Tz(d) Tx(a) Rx(α)`, where the joint variable adds to `θ` for
//! revolute joints and to `d` for prismatic joints. The derivative of each
//! joint transform is `½ g a(q)` with generator `g = k̂` (revolute) or
//! `g = ε k̂` (prismatic), which gives every Jacobian column in closed form.

use crate::dq::{conjugation_matrix, AlgebraError, DualQuaternion, Quaternion};
use crate::geom::{GeomError, PluckerLine, Point};
use nalgebra::DMatrix;
use serde::Deserialize;
use thiserror::Error;

/// Unit tolerance accepted for poses in hand-written chain files; poses are
/// renormalized exactly after the check.
const CONFIG_UNIT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("chain must have at least one joint")]
    Empty,
    #[error("joint {index}: q_min {min} is not below q_max {max}")]
    BadLimits { index: usize, min: f64, max: f64 },
    #[error("configuration has {got} values but the chain has {expected} joints")]
    ConfigurationLength { expected: usize, got: usize },
    #[error("frame index {index} out of range (chain has {joints} joints)")]
    FrameOutOfRange { index: usize, joints: usize },
    #[error("unknown attachment point `{0}`")]
    UnknownAttachment(String),
    #[error("attachment `{name}` references frame {index} beyond {joints} joints")]
    AttachmentOutOfRange {
        name: String,
        index: usize,
        joints: usize,
    },
    #[error("pose in chain description is not unit (deviation {0})")]
    NonUnitPose(f64),
    #[error("failed to parse chain description: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Revolute,
    Prismatic,
}

/// Standard Denavit–Hartenberg parameters (radians, meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhParams {
    pub theta: f64,
    pub d: f64,
    pub a: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone)]
pub struct JointDescriptor {
    pub kind: JointKind,
    pub dh: DhParams,
    pub q_min: f64,
    pub q_max: f64,
}

impl JointDescriptor {
    /// Joint transform at joint value `q`.
    pub fn transform(&self, q: f64) -> DualQuaternion {
        let (theta, d) = match self.kind {
            JointKind::Revolute => (self.dh.theta + q, self.dh.d),
            JointKind::Prismatic => (self.dh.theta, self.dh.d + q),
        };
        let rz = DualQuaternion::new(Quaternion::rotation_z(theta), Quaternion::ZERO);
        let tz = DualQuaternion::new(Quaternion::ONE, Quaternion::K * (d / 2.0));
        let tx = DualQuaternion::new(Quaternion::ONE, Quaternion::I * (self.dh.a / 2.0));
        let rx = DualQuaternion::new(Quaternion::rotation_x(self.dh.alpha), Quaternion::ZERO);
        rz * tz * tx * rx
    }

    /// Twist generator `g` with `∂a/∂q = ½ g a(q)`.
    fn generator(&self) -> DualQuaternion {
        match self.kind {
            JointKind::Revolute => DualQuaternion::new(Quaternion::K, Quaternion::ZERO),
            JointKind::Prismatic => DualQuaternion::new(Quaternion::ZERO, Quaternion::K),
        }
    }
}

/// A point rigidly attached to an intermediate frame of the chain.
#[derive(Debug, Clone)]
pub struct AttachmentPoint {
    pub name: String,
    /// Frame index in `0..=n`: the pose after this many joints.
    pub joint_index: usize,
    /// Offset from the frame origin, expressed in the frame (meters).
    pub local_offset: [f64; 3],
}

/// Frame selector for forward kinematics and Jacobians.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Pose after the first `i` joints (`0 ≤ i ≤ n`); tool transform excluded.
    Joint(usize),
    /// Full chain including the effector transform.
    End,
}

#[derive(Debug, Clone)]
pub struct KinematicChain {
    base: DualQuaternion,
    joints: Vec<JointDescriptor>,
    effector: DualQuaternion,
    attachment_points: Vec<AttachmentPoint>,
    /// Frame whose z-axis carries the tool shaft line (defaults to `n`).
    shaft_frame: usize,
}

impl KinematicChain {
    pub fn new(
        base: DualQuaternion,
        joints: Vec<JointDescriptor>,
        effector: DualQuaternion,
        attachment_points: Vec<AttachmentPoint>,
        shaft_frame: Option<usize>,
    ) -> Result<Self, ChainError> {
        if joints.is_empty() {
            return Err(ChainError::Empty);
        }
        let n = joints.len();
        for (index, j) in joints.iter().enumerate() {
            if !(j.q_min < j.q_max) {
                return Err(ChainError::BadLimits {
                    index,
                    min: j.q_min,
                    max: j.q_max,
                });
            }
        }
        for a in &attachment_points {
            if a.joint_index > n {
                return Err(ChainError::AttachmentOutOfRange {
                    name: a.name.clone(),
                    index: a.joint_index,
                    joints: n,
                });
            }
        }
        let shaft_frame = shaft_frame.unwrap_or(n);
        if shaft_frame > n {
            return Err(ChainError::FrameOutOfRange {
                index: shaft_frame,
                joints: n,
            });
        }
        Ok(Self {
            base: normalize_config_pose(&base)?,
            joints,
            effector: normalize_config_pose(&effector)?,
            attachment_points,
            shaft_frame,
        })
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[JointDescriptor] {
        &self.joints
    }

    pub fn base(&self) -> &DualQuaternion {
        &self.base
    }

    pub fn effector(&self) -> &DualQuaternion {
        &self.effector
    }

    pub fn shaft_frame(&self) -> usize {
        self.shaft_frame
    }

    pub fn attachment(&self, name: &str) -> Result<&AttachmentPoint, ChainError> {
        self.attachment_points
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| ChainError::UnknownAttachment(name.to_string()))
    }

    fn check_configuration(&self, q: &[f64]) -> Result<(), ChainError> {
        if q.len() != self.joints.len() {
            return Err(ChainError::ConfigurationLength {
                expected: self.joints.len(),
                got: q.len(),
            });
        }
        Ok(())
    }

    fn frame_joints(&self, frame: Frame) -> Result<usize, ChainError> {
        let n = self.joints.len();
        match frame {
            Frame::Joint(i) if i <= n => Ok(i),
            Frame::Joint(i) => Err(ChainError::FrameOutOfRange { index: i, joints: n }),
            Frame::End => Ok(n),
        }
    }

    /// Forward kinematics: `base · a₁(q₁) ⋯ a_i(q_i) [· effector]`.
    pub fn fkm(&self, q: &[f64], frame: Frame) -> Result<DualQuaternion, ChainError> {
        self.check_configuration(q)?;
        let upto = self.frame_joints(frame)?;
        let mut x = self.base;
        for (joint, &qi) in self.joints.iter().zip(q).take(upto) {
            x = x * joint.transform(qi);
        }
        if frame == Frame::End {
            x = x * self.effector;
        }
        Ok(x)
    }

    /// Analytical pose Jacobian: column `j` is `∂ vec8(x)/∂ q_j`.
    ///
    /// Always has `n` columns; columns of joints beyond the requested frame
    /// are exactly zero.
    pub fn pose_jacobian(&self, q: &[f64], frame: Frame) -> Result<DMatrix<f64>, ChainError> {
        self.check_configuration(q)?;
        let n = self.joints.len();
        let upto = self.frame_joints(frame)?;
        let tail = if frame == Frame::End {
            self.effector
        } else {
            DualQuaternion::ONE
        };

        // prefix[j] = base · a₁ ⋯ a_j ; suffix[j] = a_{j+1} ⋯ a_upto · tail
        let mut prefix = Vec::with_capacity(upto + 1);
        prefix.push(self.base);
        for (joint, &qi) in self.joints.iter().zip(q).take(upto) {
            let last = *prefix.last().unwrap();
            prefix.push(last * joint.transform(qi));
        }
        let mut suffix = vec![tail; upto + 1];
        for j in (0..upto).rev() {
            suffix[j] = self.joints[j].transform(q[j]) * suffix[j + 1];
        }

        let mut jac = DMatrix::zeros(8, n);
        for j in 0..upto {
            let col = prefix[j] * (self.joints[j].generator() * 0.5) * suffix[j];
            jac.column_mut(j).copy_from(&col.vec8());
        }
        Ok(jac)
    }

    /// Pose and pose Jacobian of a named attachment frame (the joint frame
    /// composed with the attachment's constant local offset).
    pub fn attachment_pose_jacobian(
        &self,
        q: &[f64],
        name: &str,
    ) -> Result<(DualQuaternion, DMatrix<f64>), ChainError> {
        let att = self.attachment(name)?.clone();
        let offset = Quaternion::pure(att.local_offset[0], att.local_offset[1], att.local_offset[2]);
        let shift = DualQuaternion::from_translation(&offset)?;
        let frame = Frame::Joint(att.joint_index);
        let x = self.fkm(q, frame)? * shift;
        // x_att(q) = x_frame(q) · c  ⇒  J_att = H₈⁻(c) J_frame
        let j_frame = self.pose_jacobian(q, frame)?;
        let j_att = shift.hamilton_minus() * j_frame;
        let mut jac = DMatrix::zeros(8, self.joints.len());
        jac.copy_from(&j_att);
        Ok((x, jac))
    }

    /// World position of a named attachment point.
    pub fn attachment_point(&self, q: &[f64], name: &str) -> Result<Point, ChainError> {
        let (x, _) = self.attachment_pose_jacobian(q, name)?;
        Ok(Point::from_quaternion(&x.translation().im())?)
    }

    /// Plücker line along `axis` of the requested frame together with its
    /// 8×n Jacobian (direction rows stacked over moment rows).
    pub fn line_jacobian(
        &self,
        q: &[f64],
        frame: Frame,
        axis: &Quaternion,
    ) -> Result<(PluckerLine, DMatrix<f64>), ChainError> {
        axis.check_pure()?;
        axis.check_unit()?;
        let x = self.fkm(q, frame)?;
        let j_x = self.pose_jacobian(q, frame)?;
        line_jacobian_from_pose(&x, &j_x, axis)
    }

    /// Line along the z-axis of the shaft frame (see chain description).
    pub fn shaft_line_jacobian(
        &self,
        q: &[f64],
    ) -> Result<(PluckerLine, DMatrix<f64>), ChainError> {
        self.line_jacobian(q, Frame::Joint(self.shaft_frame), &Quaternion::K)
    }
}

fn normalize_config_pose(x: &DualQuaternion) -> Result<DualQuaternion, ChainError> {
    let n = x.norm()?;
    let dev = (n.real - 1.0).abs().max(n.dual.abs());
    if dev > CONFIG_UNIT_TOL {
        return Err(ChainError::NonUnitPose(dev));
    }
    Ok(x.normalized()?)
}

/// Rotation Jacobian `J_r`: the top 4×n block of the pose Jacobian.
pub fn rotation_jacobian(j_x: &DMatrix<f64>) -> DMatrix<f64> {
    j_x.rows(0, 4).into_owned()
}

/// Translation Jacobian from the pose Jacobian and the matching pose.
///
/// From `t = 2 D(x) P(x)*`:
/// `J_t = 2 ( H₄⁻(r*) J_D + H₄⁺(D(x)) C₄ J_r )`.
pub fn translation_jacobian(
    j_x: &DMatrix<f64>,
    x: &DualQuaternion,
) -> Result<DMatrix<f64>, AlgebraError> {
    x.check_unit()?;
    let j_r = j_x.rows(0, 4);
    let j_d = j_x.rows(4, 4);
    let c4 = conjugation_matrix();
    let a = x.p.conjugate().hamilton_minus() * j_d;
    let b = x.d.hamilton_plus() * c4 * j_r;
    let mut out = DMatrix::zeros(4, j_x.ncols());
    out.copy_from(&((a + b) * 2.0));
    Ok(out)
}

/// Line (direction + moment) and line Jacobian for the `axis` of a frame with
/// pose `x` and pose Jacobian `j_x`.
pub fn line_jacobian_from_pose(
    x: &DualQuaternion,
    j_x: &DMatrix<f64>,
    axis: &Quaternion,
) -> Result<(PluckerLine, DMatrix<f64>), ChainError> {
    let r = x.rotation();
    let t = x.translation();
    let dir = r.rotate(axis).im();
    let moment = t.cross(&dir);
    let line = PluckerLine::from_parts(&dir, &moment)?;

    let j_r = rotation_jacobian(j_x);
    let j_t = translation_jacobian(j_x, x)?;
    let c4 = conjugation_matrix();

    // J_rz = ( H₄⁻(axis·r*) + H₄⁺(r·axis) C₄ ) J_r
    let j_dir =
        ((*axis * r.conjugate()).hamilton_minus() + (r * *axis).hamilton_plus() * c4) * &j_r;
    // J_mz = ½ [ (H₄⁻(l) − H₄⁺(l)) J_t + (H₄⁺(t) − H₄⁻(t)) J_dir ]
    let j_moment = ((dir.hamilton_minus() - dir.hamilton_plus()) * &j_t
        + (t.hamilton_plus() - t.hamilton_minus()) * &j_dir)
        * 0.5;

    let mut jac = DMatrix::zeros(8, j_x.ncols());
    jac.rows_mut(0, 4).copy_from(&j_dir);
    jac.rows_mut(4, 4).copy_from(&j_moment);
    Ok((line, jac))
}

// ---------------------------------------------------------------------------
// Chain description file
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct ChainFile {
    base_pose: [f64; 8],
    effector_pose: [f64; 8],
    #[serde(default)]
    shaft_frame: Option<usize>,
    joints: Vec<JointFile>,
    #[serde(default)]
    attachment_points: Vec<AttachmentFile>,
}

#[derive(Deserialize)]
struct JointFile {
    kind: JointKind,
    theta: f64,
    d: f64,
    a: f64,
    alpha: f64,
    q_min: f64,
    q_max: f64,
}

#[derive(Deserialize)]
struct AttachmentFile {
    name: String,
    joint_index: usize,
    local_offset: [f64; 3],
}

impl KinematicChain {
    /// Parse a chain description from TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self, ChainError> {
        let file: ChainFile = toml::from_str(text)?;
        let joints = file
            .joints
            .into_iter()
            .map(|j| JointDescriptor {
                kind: j.kind,
                dh: DhParams {
                    theta: j.theta,
                    d: j.d,
                    a: j.a,
                    alpha: j.alpha,
                },
                q_min: j.q_min,
                q_max: j.q_max,
            })
            .collect();
        let attachments = file
            .attachment_points
            .into_iter()
            .map(|a| AttachmentPoint {
                name: a.name,
                joint_index: a.joint_index,
                local_offset: a.local_offset,
            })
            .collect();
        Self::new(
            DualQuaternion::from_vec8(&file.base_pose.into()),
            joints,
            DualQuaternion::from_vec8(&file.effector_pose.into()),
            attachments,
            file.shaft_frame,
        )
    }

    /// Load a chain description from a TOML file.
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, ChainError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dq::Vec8;
    use nalgebra::Matrix4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0xf0f1)
    }

    fn revolute(theta: f64, d: f64, a: f64, alpha: f64) -> JointDescriptor {
        JointDescriptor {
            kind: JointKind::Revolute,
            dh: DhParams { theta, d, a, alpha },
            q_min: -3.0,
            q_max: 3.0,
        }
    }

    fn prismatic(theta: f64, d: f64, a: f64, alpha: f64) -> JointDescriptor {
        JointDescriptor {
            kind: JointKind::Prismatic,
            dh: DhParams { theta, d, a, alpha },
            q_min: -1.0,
            q_max: 1.0,
        }
    }

    fn chain_of(joints: Vec<JointDescriptor>) -> KinematicChain {
        KinematicChain::new(
            DualQuaternion::ONE,
            joints,
            DualQuaternion::ONE,
            vec![],
            None,
        )
        .unwrap()
    }

    fn random_chain(rng: &mut ChaCha8Rng) -> KinematicChain {
        let n = rng.random_range(3..=8);
        let joints = (0..n)
            .map(|_| {
                let p = [
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-0.3..0.3),
                    rng.random_range(-0.3..0.3),
                    rng.random_range(-3.0..3.0),
                ];
                if rng.random_bool(0.7) {
                    revolute(p[0], p[1], p[2], p[3])
                } else {
                    prismatic(p[0], p[1], p[2], p[3])
                }
            })
            .collect();
        let base = random_pose(rng);
        let effector = random_pose(rng);
        KinematicChain::new(base, joints, effector, vec![], None).unwrap()
    }

    fn random_pose(rng: &mut ChaCha8Rng) -> DualQuaternion {
        let r = loop {
            let q = Quaternion::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if q.norm() > 1e-2 {
                break q.normalized().unwrap();
            }
        };
        let t = Quaternion::pure(
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
        );
        DualQuaternion::from_rotation_translation(&r, &t).unwrap()
    }

    fn random_q(chain: &KinematicChain, rng: &mut ChaCha8Rng) -> Vec<f64> {
        chain
            .joints()
            .iter()
            .map(|j| {
                let span = (j.q_max - j.q_min).min(2.0);
                let mid = (j.q_max + j.q_min) / 2.0;
                mid + rng.random_range(-0.45..0.45) * span
            })
            .collect()
    }

    // Independent forward kinematics oracle on homogeneous matrices.
    fn dh_matrix(theta: f64, d: f64, a: f64, alpha: f64) -> Matrix4<f64> {
        let (st, ct) = theta.sin_cos();
        let (sa, ca) = alpha.sin_cos();
        #[rustfmt::skip]
        let m = Matrix4::new(
            ct, -st * ca,  st * sa, a * ct,
            st,  ct * ca, -ct * sa, a * st,
            0.0,      sa,       ca,      d,
            0.0,     0.0,      0.0,    1.0,
        );
        m
    }

    fn quat_to_matrix(q: &Quaternion) -> Matrix4<f64> {
        let (w, x, y, z) = (q.w, q.x, q.y, q.z);
        #[rustfmt::skip]
        let m = Matrix4::new(
            1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y), 0.0,
            2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x), 0.0,
            2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y), 0.0,
            0.0, 0.0, 0.0, 1.0,
        );
        m
    }

    fn pose_to_matrix(x: &DualQuaternion) -> Matrix4<f64> {
        let mut m = quat_to_matrix(&x.rotation());
        let t = x.translation();
        m[(0, 3)] = t.x;
        m[(1, 3)] = t.y;
        m[(2, 3)] = t.z;
        m
    }

    fn fk_matrix_oracle(chain: &KinematicChain, q: &[f64]) -> Matrix4<f64> {
        let mut m = pose_to_matrix(chain.base());
        for (joint, &qi) in chain.joints().iter().zip(q) {
            let (theta, d) = match joint.kind {
                JointKind::Revolute => (joint.dh.theta + qi, joint.dh.d),
                JointKind::Prismatic => (joint.dh.theta, joint.dh.d + qi),
            };
            m *= dh_matrix(theta, d, joint.dh.a, joint.dh.alpha);
        }
        m * pose_to_matrix(chain.effector())
    }

    #[test]
    fn fkm_identity_chain() {
        let chain = chain_of(vec![revolute(0.0, 0.0, 0.0, 0.0)]);
        let x = chain.fkm(&[0.0], Frame::End).unwrap();
        assert!((x.vec8() - DualQuaternion::ONE.vec8()).amax() <= 1e-15);
    }

    #[test]
    fn fkm_single_prismatic_translates_along_z() {
        let chain = chain_of(vec![prismatic(0.0, 0.0, 0.0, 0.0)]);
        let x = chain.fkm(&[0.1], Frame::End).unwrap();
        assert!((x.translation() - Quaternion::K * 0.1).norm() <= 1e-15);
        assert!((x.rotation() - Quaternion::ONE).norm() <= 1e-15);
    }

    #[test]
    fn fkm_matches_matrix_oracle() {
        let mut rng = rng();
        for _ in 0..200 {
            let chain = random_chain(&mut rng);
            let q = random_q(&chain, &mut rng);
            let x = chain.fkm(&q, Frame::End).unwrap();
            let n = x.norm().unwrap();
            assert!((n.real - 1.0).abs() <= 1e-10 && n.dual.abs() <= 1e-10);
            let diff = pose_to_matrix(&x) - fk_matrix_oracle(&chain, &q);
            assert!(diff.amax() <= 1e-10, "FK mismatch: {diff}");
        }
    }

    #[test]
    fn fkm_respects_frame_bounds() {
        let chain = chain_of(vec![revolute(0.0, 0.0, 0.0, 0.0); 3]);
        assert!(chain.fkm(&[0.0; 3], Frame::Joint(3)).is_ok());
        assert!(matches!(
            chain.fkm(&[0.0; 3], Frame::Joint(4)),
            Err(ChainError::FrameOutOfRange { .. })
        ));
        assert!(matches!(
            chain.fkm(&[0.0; 2], Frame::End),
            Err(ChainError::ConfigurationLength { .. })
        ));
    }

    #[test]
    fn single_revolute_jacobian_column() {
        // x(q) = Rz(q); at q = 0 the column is vec8(½ k̂).
        let chain = chain_of(vec![revolute(0.0, 0.0, 0.0, 0.0)]);
        let jac = chain.pose_jacobian(&[0.0], Frame::End).unwrap();
        let expected = Vec8::from_column_slice(&[0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0]);
        assert!((jac.column(0) - expected).amax() <= 1e-15);
    }

    fn fd_pose_jacobian(chain: &KinematicChain, q: &[f64], frame: Frame) -> DMatrix<f64> {
        let n = q.len();
        let h = 1e-6;
        let mut jac = DMatrix::zeros(8, n);
        for j in 0..n {
            let mut qp = q.to_vec();
            let mut qm = q.to_vec();
            qp[j] += h;
            qm[j] -= h;
            let fp = chain.fkm(&qp, frame).unwrap().vec8();
            let fm = chain.fkm(&qm, frame).unwrap().vec8();
            jac.column_mut(j).copy_from(&((fp - fm) / (2.0 * h)));
        }
        jac
    }

    #[test]
    fn pose_jacobian_matches_finite_differences() {
        let mut rng = rng();
        for _ in 0..120 {
            let chain = random_chain(&mut rng);
            let q = random_q(&chain, &mut rng);
            let frame = if rng.random_bool(0.5) {
                Frame::End
            } else {
                Frame::Joint(rng.random_range(0..=chain.dof()))
            };
            let analytic = chain.pose_jacobian(&q, frame).unwrap();
            let fd = fd_pose_jacobian(&chain, &q, frame);
            let scale = analytic.amax().max(1.0);
            assert!(
                (&analytic - &fd).amax() <= 1e-5 * scale,
                "pose Jacobian mismatch: {}",
                (&analytic - &fd).amax()
            );
            // q̇ = 0 maps to zero velocity.
            assert!((&analytic * DMatrix::zeros(chain.dof(), 1)).amax() == 0.0);
        }
    }

    #[test]
    fn pose_jacobian_zero_columns_beyond_frame() {
        let mut rng = rng();
        let chain = random_chain(&mut rng);
        let q = random_q(&chain, &mut rng);
        let upto = chain.dof() - 1;
        let jac = chain.pose_jacobian(&q, Frame::Joint(upto)).unwrap();
        assert_eq!(jac.ncols(), chain.dof());
        assert!(jac.column(chain.dof() - 1).amax() == 0.0);
    }

    #[test]
    fn translation_and_rotation_jacobians() {
        let mut rng = rng();
        let h = 1e-6;
        for _ in 0..120 {
            let chain = random_chain(&mut rng);
            let q = random_q(&chain, &mut rng);
            let x = chain.fkm(&q, Frame::End).unwrap();
            let j_x = chain.pose_jacobian(&q, Frame::End).unwrap();
            let j_t = translation_jacobian(&j_x, &x).unwrap();
            let j_r = rotation_jacobian(&j_x);

            for j in 0..chain.dof() {
                let mut qp = q.to_vec();
                let mut qm = q.to_vec();
                qp[j] += h;
                qm[j] -= h;
                let (xp, xm) = (
                    chain.fkm(&qp, Frame::End).unwrap(),
                    chain.fkm(&qm, Frame::End).unwrap(),
                );
                let fd_t = (xp.translation().vec4() - xm.translation().vec4()) / (2.0 * h);
                let fd_r = (xp.rotation().vec4() - xm.rotation().vec4()) / (2.0 * h);
                assert!((j_t.column(j) - fd_t).amax() <= 1e-5 * fd_t.amax().max(1.0));
                assert!((j_r.column(j) - fd_r).amax() <= 1e-5 * fd_r.amax().max(1.0));
            }
        }
    }

    #[test]
    fn prismatic_only_chain_has_axis_columns_and_no_rotation() {
        let chain = chain_of(vec![
            prismatic(0.0, 0.0, 0.0, -std::f64::consts::FRAC_PI_2),
            prismatic(-std::f64::consts::FRAC_PI_2, 0.0, 0.0, std::f64::consts::FRAC_PI_2),
            prismatic(0.0, 0.1, 0.0, 0.0),
        ]);
        let q = [0.2, -0.1, 0.3];
        let x = chain.fkm(&q, Frame::End).unwrap();
        let j_x = chain.pose_jacobian(&q, Frame::End).unwrap();
        let j_r = rotation_jacobian(&j_x);
        assert!(j_r.amax() <= 1e-15, "prismatic chain must not rotate");
        let j_t = translation_jacobian(&j_x, &x).unwrap();
        // Each column is the world direction of that prismatic axis: unit,
        // pure, and constant in q.
        for j in 0..3 {
            let col = j_t.column(j);
            assert!(col[0].abs() <= 1e-12);
            let norm = (col[1] * col[1] + col[2] * col[2] + col[3] * col[3]).sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn pose_jacobian_preserves_unit_norm_differentially() {
        let mut rng = rng();
        for _ in 0..100 {
            let chain = random_chain(&mut rng);
            let q = random_q(&chain, &mut rng);
            let x = chain.fkm(&q, Frame::End).unwrap();
            let j_x = chain.pose_jacobian(&q, Frame::End).unwrap();
            let qdot =
                DMatrix::from_fn(chain.dof(), 1, |_, _| rng.random_range(-1.0..1.0_f64));
            let xdot = &j_x * &qdot;
            let p = x.p.vec4();
            let d = x.d.vec4();
            // d‖P‖/dt = 0 and d⟨P,D⟩/dt = 0 for unit poses.
            let dp: f64 = (0..4).map(|i| p[i] * xdot[(i, 0)]).sum();
            let dpd: f64 = (0..4)
                .map(|i| d[i] * xdot[(i, 0)] + p[i] * xdot[(i + 4, 0)])
                .sum();
            assert!(dp.abs() <= 1e-8, "primary norm drift {dp}");
            assert!(dpd.abs() <= 1e-8, "unit coupling drift {dpd}");
        }
    }

    #[test]
    fn line_jacobian_identity_pose_and_fd() {
        let chain = chain_of(vec![revolute(0.0, 0.0, 0.0, 0.0)]);
        let (line, _) = chain
            .line_jacobian(&[0.0], Frame::End, &Quaternion::K)
            .unwrap();
        assert!((line.direction() - Quaternion::K).norm() <= 1e-15);
        assert!(line.moment().norm() <= 1e-15);

        let mut rng = rng();
        let h = 1e-6;
        for _ in 0..120 {
            let chain = random_chain(&mut rng);
            let q = random_q(&chain, &mut rng);
            let (_, jac) = chain.line_jacobian(&q, Frame::End, &Quaternion::K).unwrap();
            for j in 0..chain.dof() {
                let mut qp = q.to_vec();
                let mut qm = q.to_vec();
                qp[j] += h;
                qm[j] -= h;
                let (lp, _) = chain.line_jacobian(&qp, Frame::End, &Quaternion::K).unwrap();
                let (lm, _) = chain.line_jacobian(&qm, Frame::End, &Quaternion::K).unwrap();
                let fd =
                    (lp.as_dual_quaternion().vec8() - lm.as_dual_quaternion().vec8()) / (2.0 * h);
                let col = jac.column(j);
                assert!(
                    (col - fd).amax() <= 1e-5 * fd.amax().max(1.0),
                    "line Jacobian mismatch col {j}"
                );
            }
        }
    }

    #[test]
    fn line_direction_fixed_under_pure_translation() {
        let chain = chain_of(vec![
            prismatic(0.0, 0.0, 0.0, -std::f64::consts::FRAC_PI_2),
            prismatic(-std::f64::consts::FRAC_PI_2, 0.0, 0.0, std::f64::consts::FRAC_PI_2),
        ]);
        let (_, jac) = chain
            .line_jacobian(&[0.1, -0.2], Frame::End, &Quaternion::K)
            .unwrap();
        // Direction rows are zero: translations cannot turn the line.
        assert!(jac.rows(0, 4).amax() <= 1e-15);
    }

    #[test]
    fn attachment_points_follow_their_frame() {
        let mut chain = chain_of(vec![
            prismatic(0.0, 0.0, 0.0, 0.0),
            revolute(0.0, 0.0, 0.0, 0.0),
        ]);
        chain.attachment_points.push(AttachmentPoint {
            name: "probe".into(),
            joint_index: 1,
            local_offset: [0.0, 0.0, -0.04],
        });
        let q = [0.25, 1.3];
        let p = chain.attachment_point(&q, "probe").unwrap();
        // Frame 1 translates by q₀ along z; the offset stays along −z and the
        // second joint must have no influence.
        assert!((p.coords()[2] - (0.25 - 0.04)).abs() <= 1e-12);
        let (_, jac) = chain.attachment_pose_jacobian(&q, "probe").unwrap();
        assert!(jac.column(1).amax() <= 1e-15);
        assert!(chain.attachment_point(&q, "nope").is_err());
    }

    #[test]
    fn chain_description_round_trip() {
        let text = r#"
            base_pose = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
            effector_pose = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.05]
            shaft_frame = 1

            [[joints]]
            kind = "prismatic"
            theta = 0.0
            d = 0.0
            a = 0.0
            alpha = 0.0
            q_min = -0.2
            q_max = 0.2

            [[joints]]
            kind = "revolute"
            theta = 0.5
            d = 0.1
            a = 0.02
            alpha = -1.5707963267948966
            q_min = -2.0
            q_max = 2.0

            [[attachment_points]]
            name = "t6"
            joint_index = 2
            local_offset = [0.0, 0.0, -0.03]
        "#;
        let chain = KinematicChain::from_toml_str(text).unwrap();
        assert_eq!(chain.dof(), 2);
        assert_eq!(chain.shaft_frame(), 1);
        assert_eq!(chain.joints()[0].kind, JointKind::Prismatic);
        assert!((chain.effector().translation() - Quaternion::K * 0.1).norm() <= 1e-12);
        assert!(chain.attachment("t6").is_ok());

        let bad = text.replace("q_min = -2.0", "q_min = 3.0");
        assert!(matches!(
            KinematicChain::from_toml_str(&bad),
            Err(ChainError::BadLimits { .. })
        ));
    }
}
