//! Browser bindings for the active-constraint toolkit.
//!
//! Three demos are exposed to JavaScript:
//!
//! * [`run_scenario`]: replay one of the embedded twin-arm scenarios and
//!   return the logged curves (distances, errors, tip path) as a flat array,
//! * [`sclerp_frames`]: sample the screw-linear interpolation between two
//!   poses as renderable frames,
//! * [`PlanarSandbox`]: an interactive planar point robot chasing a target
//!   through keep-out zones, stepped live by the page.
//!
//! The bodies live in plain functions returning `Result<_, String>` so they
//! stay callable (and testable) on non-wasm targets; the `wasm_bindgen`
//! exports only translate errors.

use vfi_core::controller::{Controller, ControllerConfig, Gains, RobotPoint, Zone, ZoneGeometry};
use vfi_core::dq::{DualQuaternion, Quaternion};
use vfi_core::geom::{Plane, PluckerLine, Point};
use vfi_core::kinematics::{DhParams, Frame, JointDescriptor, JointKind, KinematicChain};
use vfi_core::sim::{self, reference};
use vfi_core::vfi::{ZoneDirection, ZoneSpec};
use wasm_bindgen::prelude::*;

/// Values per row in the [`run_scenario`] output.
pub const SCENARIO_ROW_STRIDE: usize = 17;
/// Values per frame in the [`sclerp_frames`] output.
pub const FRAME_STRIDE: usize = 12;

fn err_str(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn err_js(e: String) -> JsError {
    JsError::new(&e)
}

/// Run an embedded scenario (`"S1"`..`"S5"`) and return one row per logged
/// tick (subsampled by `stride` ticks), flattened:
/// `[t, d_C1..d_C4, dtil_C1..dtil_C4, err_l1, qdot_l2, tip xyz, t6 xyz]`.
#[wasm_bindgen]
pub fn run_scenario(name: &str, stride: usize) -> Result<Vec<f64>, JsError> {
    scenario_rows(name, stride).map_err(err_js)
}

pub fn scenario_rows(name: &str, stride: usize) -> Result<Vec<f64>, String> {
    let config = reference::config().map_err(err_str)?;
    let scenario = config.scenario(name).map_err(err_str)?.clone();
    let result = sim::run_scenario(&config, &scenario).map_err(err_str)?;
    let stride = stride.max(1);
    let mut out = Vec::with_capacity(result.records.len() / stride * SCENARIO_ROW_STRIDE);
    for record in result.records.iter().step_by(stride) {
        let tip = config
            .moving_arm
            .fkm(&record.q, Frame::End)
            .map_err(err_str)?
            .translation();
        let t6 = config
            .moving_arm
            .attachment_point(&record.q, "t6")
            .map_err(err_str)?;
        out.push(record.t);
        out.extend_from_slice(&record.distances);
        out.extend_from_slice(&record.errors);
        out.push(record.error_l1);
        out.push(record.qdot_norm);
        out.extend_from_slice(&[tip.x, tip.y, tip.z]);
        out.extend_from_slice(&t6.coords());
    }
    Ok(out)
}

/// Static geometry of the embedded world, for drawing:
/// `[cyl_x, cyl_y, radius, depth, entry xyz, plane_z, d_safe C1..C4,
///   static shaft point xyz, static shaft dir xyz]`.
#[wasm_bindgen]
pub fn world_info() -> Result<Vec<f64>, JsError> {
    world_data().map_err(err_js)
}

pub fn world_data() -> Result<Vec<f64>, String> {
    let config = reference::config().map_err(err_str)?;
    let ws = &config.workspace;
    let axis_point = ws.cylinder_axis.closest_point_to_origin();
    let (static_shaft, _) = config
        .static_arm
        .shaft_line_jacobian(&config.static_q)
        .map_err(err_str)?;
    let anchor = static_shaft.closest_point_to_origin();
    let mut out = vec![
        axis_point.coords()[0],
        axis_point.coords()[1],
        ws.cylinder_radius,
        ws.cylinder_depth,
    ];
    out.extend_from_slice(&ws.entry_point.coords());
    // Plane height z solving n_z·z = offset; the reference plane has a
    // vertical normal.
    out.push(ws.lower_plane.offset() / ws.lower_plane.normal().z);
    for c in &config.constraints {
        out.push(c.spec.d_safe);
    }
    out.extend_from_slice(&anchor.coords());
    let d = static_shaft.direction();
    out.extend_from_slice(&[d.x, d.y, d.z]);
    Ok(out)
}

/// Build a unit pose from an axis-angle rotation plus translation, returned
/// as its eight coefficients.
#[wasm_bindgen]
pub fn pose_coefficients(
    axis_x: f64,
    axis_y: f64,
    axis_z: f64,
    angle: f64,
    tx: f64,
    ty: f64,
    tz: f64,
) -> Result<Vec<f64>, JsError> {
    build_pose(axis_x, axis_y, axis_z, angle, tx, ty, tz).map_err(err_js)
}

pub fn build_pose(
    axis_x: f64,
    axis_y: f64,
    axis_z: f64,
    angle: f64,
    tx: f64,
    ty: f64,
    tz: f64,
) -> Result<Vec<f64>, String> {
    let axis = Quaternion::pure(axis_x, axis_y, axis_z);
    let axis = if axis.norm() < 1e-12 {
        Quaternion::K
    } else {
        axis.normalized().map_err(err_str)?
    };
    let r = Quaternion::from_axis_angle(&axis, angle).map_err(err_str)?;
    let t = Quaternion::pure(tx, ty, tz);
    let x = DualQuaternion::from_rotation_translation(&r, &t).map_err(err_str)?;
    Ok(x.vec8().as_slice().to_vec())
}

/// Sample the screw interpolation between two poses (eight coefficients
/// each). Each frame is `[origin xyz, x-axis xyz, y-axis xyz, z-axis xyz]`.
#[wasm_bindgen]
pub fn sclerp_frames(x1: &[f64], x2: &[f64], samples: usize) -> Result<Vec<f64>, JsError> {
    interpolation_frames(x1, x2, samples).map_err(err_js)
}

pub fn interpolation_frames(x1: &[f64], x2: &[f64], samples: usize) -> Result<Vec<f64>, String> {
    let x1 = pose_from_slice(x1)?;
    let x2 = pose_from_slice(x2)?;
    let samples = samples.max(2);
    let mut out = Vec::with_capacity(samples * FRAME_STRIDE);
    for k in 0..samples {
        let tau = k as f64 / (samples - 1) as f64;
        let x = DualQuaternion::sclerp(&x1, &x2, tau).map_err(err_str)?;
        let t = x.translation();
        out.extend_from_slice(&[t.x, t.y, t.z]);
        for axis in [Quaternion::I, Quaternion::J, Quaternion::K] {
            let a = x.rotation().rotate(&axis);
            out.extend_from_slice(&[a.x, a.y, a.z]);
        }
    }
    Ok(out)
}

fn pose_from_slice(v: &[f64]) -> Result<DualQuaternion, String> {
    if v.len() != 8 {
        return Err("pose needs exactly 8 coefficients".to_string());
    }
    let mut c = [0.0; 8];
    c.copy_from_slice(v);
    let x = DualQuaternion::from_vec8(&c.into());
    x.normalized().map_err(err_str)
}

// ---------------------------------------------------------------------------
// Planar sandbox
// ---------------------------------------------------------------------------

/// An interactive planar point robot (two prismatic joints spanning the
/// canvas plane) with keep-out zones. The page feeds it target positions; it
/// integrates the constrained controller and reports both the constrained
/// and the unconstrained velocities for drawing.
#[wasm_bindgen]
pub struct PlanarSandbox {
    constrained: Controller,
    unconstrained: Controller,
    zones: Vec<Zone>,
    q: Vec<f64>,
    vfi_enabled: bool,
}

fn xy_stage() -> KinematicChain {
    let fp = std::f64::consts::FRAC_PI_2;
    // Base rotation makes J1 slide along world x̂ and J2 along world ŷ; the
    // effector transform cancels the accumulated frame rotation.
    let base = DualQuaternion::from_rotation(&Quaternion::rotation_y(fp)).unwrap();
    let joints = vec![
        JointDescriptor {
            kind: JointKind::Prismatic,
            dh: DhParams {
                theta: 0.0,
                d: 0.0,
                a: 0.0,
                alpha: -fp,
            },
            q_min: -10.0,
            q_max: 10.0,
        },
        JointDescriptor {
            kind: JointKind::Prismatic,
            dh: DhParams {
                theta: 0.0,
                d: 0.0,
                a: 0.0,
                alpha: 0.0,
            },
            q_min: -10.0,
            q_max: 10.0,
        },
    ];
    let net_rotation = base.rotation() * Quaternion::rotation_x(-fp);
    let effector = DualQuaternion::from_rotation(&net_rotation.conjugate()).unwrap();
    KinematicChain::new(base, joints, effector, vec![], None).unwrap()
}

/// Zone layout mirrored to JavaScript by [`PlanarSandbox::zone_data`]:
/// circles as `[1, cx, cy, r]`, half-planes as `[2, nx, ny, offset]`.
fn sandbox_zones() -> Vec<(Zone, [f64; 4])> {
    let eta_d = 1.2;
    let circle = |name: &str, cx: f64, cy: f64, r: f64| {
        let line =
            PluckerLine::from_point_direction(&Point::new(cx, cy, 0.0), &Quaternion::K).unwrap();
        (
            Zone {
                name: name.into(),
                geometry: ZoneGeometry::PointToLine {
                    point: RobotPoint::Effector,
                    line,
                },
                spec: ZoneSpec::new(ZoneDirection::KeepOut, r, eta_d).unwrap(),
            },
            [1.0, cx, cy, r],
        )
    };
    let wall = {
        let plane = Plane::from_parts(&Quaternion::J, -0.85).unwrap();
        (
            Zone {
                name: "wall".into(),
                geometry: ZoneGeometry::PointToPlane {
                    point: RobotPoint::Effector,
                    plane,
                },
                spec: ZoneSpec::new(ZoneDirection::KeepOut, 0.0, eta_d).unwrap(),
            },
            [2.0, 0.0, 1.0, -0.85],
        )
    };
    vec![
        circle("left", -0.35, 0.10, 0.28),
        circle("right", 0.40, -0.25, 0.22),
        wall,
    ]
}

impl PlanarSandbox {
    pub fn create() -> Result<PlanarSandbox, String> {
        let chain = xy_stage();
        let zones: Vec<Zone> = sandbox_zones().into_iter().map(|(z, _)| z).collect();
        let config = ControllerConfig {
            gains: Gains::new(8.0, 12.0).map_err(err_str)?,
            eta_joint: 2.0,
            strict_singular: false,
        };
        Ok(PlanarSandbox {
            constrained: Controller::new(chain.clone(), zones.clone(), config).map_err(err_str)?,
            unconstrained: Controller::new(chain, vec![], config).map_err(err_str)?,
            zones,
            q: vec![0.0, 0.0],
            vfi_enabled: true,
        })
    }

    pub fn advance(&mut self, tx: f64, ty: f64, dt: f64) -> Result<Vec<f64>, String> {
        let chain = self.constrained.chain().clone();
        let target = chain.fkm(&[tx, ty], Frame::End).map_err(err_str)?;
        let raw = self.unconstrained.step(&self.q, &target).map_err(err_str)?;
        let out = if self.vfi_enabled {
            self.constrained.step(&self.q, &target).map_err(err_str)?
        } else {
            raw.clone()
        };

        for (qi, v) in self.q.iter_mut().zip(out.qdot.iter()) {
            *qi += dt * v;
        }

        let mut min_margin = f64::INFINITY;
        for zone in &self.zones {
            let d = zone.distance(&chain, &self.q).map_err(err_str)?;
            min_margin = min_margin.min(zone.spec.distance_error(d));
        }
        Ok(vec![
            self.q[0],
            self.q[1],
            out.qdot[0],
            out.qdot[1],
            raw.qdot[0],
            raw.qdot[1],
            if out.status.fail_safe { 1.0 } else { 0.0 },
            min_margin,
        ])
    }
}

#[wasm_bindgen]
impl PlanarSandbox {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Result<PlanarSandbox, JsError> {
        Self::create().map_err(err_js)
    }

    pub fn set_vfi(&mut self, enabled: bool) {
        self.vfi_enabled = enabled;
    }

    pub fn reset(&mut self, x: f64, y: f64) {
        self.q = vec![x, y];
        self.constrained.reset();
        self.unconstrained.reset();
    }

    /// Zone geometry for drawing, 4 values per zone: circles as
    /// `[1, cx, cy, r]`, half-planes as `[2, nx, ny, offset]`.
    pub fn zone_data(&self) -> Vec<f64> {
        sandbox_zones().into_iter().flat_map(|(_, d)| d).collect()
    }

    /// Advance by `dt` chasing `(tx, ty)`. Returns
    /// `[x, y, vx, vy, raw_vx, raw_vy, fail_safe, min_margin]` where `raw` is
    /// the unconstrained velocity and `min_margin` the smallest distance
    /// error over the zones.
    pub fn step(&mut self, tx: f64, ty: f64, dt: f64) -> Result<Vec<f64>, JsError> {
        self.advance(tx, ty, dt).map_err(err_js)
    }
}
