//! Constrained differential inverse kinematics built on dual quaternion algebra.
//!
//! The crate provides, bottom up:
//!
//! * [`dq`]: quaternion / dual quaternion arithmetic, Hamilton operators and
//!   screw-linear pose interpolation,
//! * [`geom`]: Plücker lines, planes and the static distance functions
//!   between them,
//! * [`kinematics`]: serial-chain forward kinematics and analytical
//!   Jacobians (pose, translation, rotation, line),
//! * [`distance`]: distance Jacobians pairing one robot-driven entity with
//!   one static entity,
//! * [`vfi`]: vector-field-inequality constraint rows (keep-out / keep-in
//!   zones and joint limits),
//! * [`lp`]: a dense two-phase simplex solver for canonical-form linear
//!   programs,
//! * [`controller`]: the per-tick constrained kinematic controller,
//! * [`sim`]: a batch scenario runner with CSV logging for a twin-arm
//!   workspace.

pub mod controller;
pub mod distance;
pub mod dq;
pub mod geom;
pub mod kinematics;
pub mod lp;
pub mod sim;
pub mod vfi;

pub use dq::{DualQuaternion, DualScalar, Quaternion};
pub use geom::{Plane, PluckerLine, Point};
pub use kinematics::KinematicChain;
