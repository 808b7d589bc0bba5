//! Batch scenario runner: a twin-arm workspace with four active constraints,
//! a piecewise screw-interpolated tool trajectory, and CSV logging.
//!
//! The four constraints are wired to fixed geometry from the configuration:
//!
//! * `C1`: moving tool shaft line against the static arm's shaft line,
//! * `C2`: moving tool shaft line against the entry point,
//! * `C3`: a shaft attachment point against the workspace cylinder axis,
//! * `C4`: the tool tip against the lower workspace plane.
//!
//! Scenarios enable subsets of these; all four distances are evaluated and
//! logged every tick regardless, so that disabled constraints still report
//! their violations.

use crate::controller::{
    ControlError, Controller, ControllerConfig, Gains, RobotPoint, Zone, ZoneGeometry,
};
use crate::dq::{AlgebraError, DualQuaternion, Quaternion};
use crate::geom::{GeomError, Plane, PluckerLine, Point};
use crate::kinematics::{ChainError, KinematicChain};
use crate::lp::LpStatus;
use crate::vfi::{ZoneDirection, ZoneSpec};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;
use thiserror::Error;

pub const CONSTRAINT_NAMES: [&str; 4] = ["C1", "C2", "C3", "C4"];

/// A constraint counts as violated when its distance error drops below −0.1 mm.
pub const VIOLATION_TOL: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("failed to parse scenario config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("time {t} outside the trajectory range [0, {total}]")]
    TimeOutOfRange { t: f64, total: f64 },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("log line {line}: {reason}")]
    BadLogLine { line: usize, reason: String },
}

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

/// Piecewise screw-linear interpolation through a pose list.
#[derive(Debug, Clone)]
pub struct Trajectory {
    poses: Vec<DualQuaternion>,
    durations: Vec<f64>,
}

impl Trajectory {
    pub fn new(poses: Vec<DualQuaternion>, durations: Vec<f64>) -> Result<Self, SimError> {
        if poses.len() < 2 || durations.len() != poses.len() - 1 {
            return Err(SimError::Invalid(format!(
                "trajectory needs n ≥ 2 poses and n−1 durations (got {} and {})",
                poses.len(),
                durations.len()
            )));
        }
        if durations.iter().any(|&d| !(d > 0.0)) {
            return Err(SimError::Invalid(
                "segment durations must be positive".into(),
            ));
        }
        for pose in &poses {
            if !pose.is_unit() {
                let dq = pose
                    .norm()
                    .map(|n| (n.real - 1.0).abs().max(n.dual.abs()))
                    .unwrap_or(f64::INFINITY);
                if dq > 1e-6 {
                    return Err(SimError::Invalid(format!(
                        "trajectory pose is not unit (deviation {dq:.2e})"
                    )));
                }
            }
        }
        let poses = poses
            .iter()
            .map(|p| p.normalized())
            .collect::<Result<Vec<_>, _>>()?;
        // Surface antipodal segments at build time rather than mid-run.
        for w in poses.windows(2) {
            DualQuaternion::sclerp(&w[0], &w[1], 0.5)?;
        }
        Ok(Self { poses, durations })
    }

    pub fn total_duration(&self) -> f64 {
        self.durations.iter().sum()
    }

    pub fn poses(&self) -> &[DualQuaternion] {
        &self.poses
    }

    /// Target pose at time `t` (piecewise sclerp, continuous at the knots).
    pub fn sample(&self, t: f64) -> Result<DualQuaternion, SimError> {
        let total = self.total_duration();
        if !(0.0..=total + 1e-12).contains(&t) {
            return Err(SimError::TimeOutOfRange { t, total });
        }
        let mut remaining = t;
        for (i, &seg) in self.durations.iter().enumerate() {
            if remaining <= seg || i == self.durations.len() - 1 {
                let tau = (remaining / seg).clamp(0.0, 1.0);
                return Ok(DualQuaternion::sclerp(
                    &self.poses[i],
                    &self.poses[i + 1],
                    tau,
                )?);
            }
            remaining -= seg;
        }
        unreachable!("durations are non-empty");
    }
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct ControlParams {
    pub eta: f64,
    pub beta: f64,
    pub eta_joint: f64,
    pub dt: f64,
    pub duration: f64,
    /// Abort a run on singular constraint rows instead of omitting them.
    pub strict_singular: bool,
}

#[derive(Debug, Clone)]
pub struct ConstraintDef {
    pub spec: ZoneSpec,
    /// Attachment point watched by C3.
    pub attachment: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ScenarioDef {
    pub name: String,
    pub enabled: [bool; 4],
    pub expected_violations: [bool; 4],
}

#[derive(Debug, Clone)]
pub struct Workspace {
    pub cylinder_axis: PluckerLine,
    pub cylinder_radius: f64,
    pub cylinder_depth: f64,
    pub entry_point: Point,
    pub lower_plane: Plane,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub moving_arm: KinematicChain,
    pub static_arm: KinematicChain,
    pub moving_q0: Vec<f64>,
    pub static_q: Vec<f64>,
    pub trajectory: Trajectory,
    pub workspace: Workspace,
    pub control: ControlParams,
    pub constraints: [ConstraintDef; 4],
    pub scenarios: Vec<ScenarioDef>,
}

#[derive(Deserialize)]
struct ConfigFile {
    arms: ArmsFile,
    trajectory: TrajectoryFile,
    workspace: WorkspaceFile,
    control: ControlFile,
    constraints: BTreeMap<String, ConstraintFile>,
    scenarios: BTreeMap<String, ScenarioFile>,
}

#[derive(Deserialize)]
struct ArmsFile {
    moving: String,
    #[serde(rename = "static")]
    static_arm: String,
    moving_q0: Vec<f64>,
    static_q: Vec<f64>,
}

#[derive(Deserialize)]
struct TrajectoryFile {
    poses: Vec<[f64; 8]>,
    durations: Vec<f64>,
}

#[derive(Deserialize)]
struct WorkspaceFile {
    cylinder_point: [f64; 3],
    cylinder_axis: [f64; 3],
    cylinder_radius: f64,
    cylinder_depth: f64,
    entry_point: [f64; 3],
    plane_point: [f64; 3],
    plane_normal: [f64; 3],
}

#[derive(Deserialize)]
struct ControlFile {
    eta: f64,
    beta: f64,
    eta_joint: f64,
    dt: f64,
    duration: f64,
    #[serde(default)]
    strict_singular: bool,
}

#[derive(Deserialize)]
struct ConstraintFile {
    direction: ZoneDirection,
    d_safe: f64,
    eta_d: f64,
    #[serde(default)]
    attachment: Option<String>,
}

#[derive(Deserialize)]
struct ScenarioFile {
    enabled: Vec<String>,
    expected_violations: Vec<String>,
}

fn pure(v: [f64; 3]) -> Quaternion {
    Quaternion::pure(v[0], v[1], v[2])
}

fn constraint_mask(names: &[String], context: &str) -> Result<[bool; 4], SimError> {
    let mut mask = [false; 4];
    for name in names {
        let idx = CONSTRAINT_NAMES
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| {
                SimError::Invalid(format!("{context}: unknown constraint `{name}`"))
            })?;
        mask[idx] = true;
    }
    Ok(mask)
}

impl SimConfig {
    /// Parse a scenario configuration; `resolve` maps the arm file names
    /// referenced by the config to their TOML contents.
    pub fn from_toml_str(
        text: &str,
        mut resolve: impl FnMut(&str) -> Result<String, SimError>,
    ) -> Result<Self, SimError> {
        let file: ConfigFile = toml::from_str(text)?;

        let moving_arm = KinematicChain::from_toml_str(&resolve(&file.arms.moving)?)?;
        let static_arm = KinematicChain::from_toml_str(&resolve(&file.arms.static_arm)?)?;
        if file.arms.moving_q0.len() != moving_arm.dof() {
            return Err(SimError::Invalid(format!(
                "moving_q0 has {} values for a {}-DOF arm",
                file.arms.moving_q0.len(),
                moving_arm.dof()
            )));
        }
        if file.arms.static_q.len() != static_arm.dof() {
            return Err(SimError::Invalid(format!(
                "static_q has {} values for a {}-DOF arm",
                file.arms.static_q.len(),
                static_arm.dof()
            )));
        }

        let poses = file
            .trajectory
            .poses
            .iter()
            .map(|p| DualQuaternion::from_vec8(&(*p).into()))
            .collect();
        let trajectory = Trajectory::new(poses, file.trajectory.durations)?;

        let ws = &file.workspace;
        if !(ws.cylinder_radius > 0.0) || !(ws.cylinder_depth > 0.0) {
            return Err(SimError::Invalid(
                "cylinder radius and depth must be positive".into(),
            ));
        }
        let workspace = Workspace {
            cylinder_axis: PluckerLine::from_point_direction(
                &Point::new(ws.cylinder_point[0], ws.cylinder_point[1], ws.cylinder_point[2]),
                &pure(ws.cylinder_axis).normalized()?,
            )?,
            cylinder_radius: ws.cylinder_radius,
            cylinder_depth: ws.cylinder_depth,
            entry_point: Point::new(ws.entry_point[0], ws.entry_point[1], ws.entry_point[2]),
            lower_plane: Plane::from_point_normal(
                &Point::new(ws.plane_point[0], ws.plane_point[1], ws.plane_point[2]),
                &pure(ws.plane_normal).normalized()?,
            )?,
        };

        let c = &file.control;
        if !(c.dt > 0.0) || !(c.duration > 0.0) {
            return Err(SimError::Invalid(
                "control period and duration must be positive".into(),
            ));
        }
        let control = ControlParams {
            eta: c.eta,
            beta: c.beta,
            eta_joint: c.eta_joint,
            dt: c.dt,
            duration: c.duration,
            strict_singular: c.strict_singular,
        };

        let mut constraints = Vec::with_capacity(4);
        for name in CONSTRAINT_NAMES {
            let cf = file.constraints.get(name).ok_or_else(|| {
                SimError::Invalid(format!("missing [constraints.{name}] section"))
            })?;
            let spec = ZoneSpec::new(cf.direction, cf.d_safe, cf.eta_d)
                .map_err(|e| SimError::Invalid(format!("constraints.{name}: {e}")))?;
            if spec.eta_d * control.dt > 1.0 {
                log::warn!(
                    "constraints.{name}: eta_d·dt = {} > 1 can overshoot in discrete time",
                    spec.eta_d * control.dt
                );
            }
            constraints.push(ConstraintDef {
                spec,
                attachment: cf.attachment.clone(),
            });
        }
        let constraints: [ConstraintDef; 4] = constraints.try_into().expect("four constraints");

        let mut scenarios = Vec::new();
        for (name, sf) in &file.scenarios {
            scenarios.push(ScenarioDef {
                name: name.clone(),
                enabled: constraint_mask(&sf.enabled, &format!("scenarios.{name}.enabled"))?,
                expected_violations: constraint_mask(
                    &sf.expected_violations,
                    &format!("scenarios.{name}.expected_violations"),
                )?,
            });
        }
        if scenarios.is_empty() {
            return Err(SimError::Invalid("no scenarios defined".into()));
        }

        Ok(Self {
            moving_arm,
            static_arm,
            moving_q0: file.arms.moving_q0,
            static_q: file.arms.static_q,
            trajectory,
            workspace,
            control,
            constraints,
            scenarios,
        })
    }

    /// Load a configuration file; arm file paths resolve relative to it.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, |rel| Ok(std::fs::read_to_string(dir.join(rel))?))
    }

    pub fn scenario(&self, name: &str) -> Result<&ScenarioDef, SimError> {
        self.scenarios
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| SimError::UnknownScenario(name.to_string()))
    }

    /// Build the four constraint zones (C1..C4) against the static geometry.
    pub fn build_zones(&self) -> Result<[Zone; 4], SimError> {
        let (static_shaft, _) = self.static_arm.shaft_line_jacobian(&self.static_q)?;
        let c3_attachment = self.constraints[2]
            .attachment
            .clone()
            .unwrap_or_else(|| "t6".to_string());
        let zones = [
            Zone {
                name: "C1".into(),
                geometry: ZoneGeometry::ShaftToLine { line: static_shaft },
                spec: self.constraints[0].spec,
            },
            Zone {
                name: "C2".into(),
                geometry: ZoneGeometry::ShaftToPoint {
                    point: self.workspace.entry_point,
                },
                spec: self.constraints[1].spec,
            },
            Zone {
                name: "C3".into(),
                geometry: ZoneGeometry::PointToLine {
                    point: RobotPoint::Attachment(c3_attachment),
                    line: self.workspace.cylinder_axis,
                },
                spec: self.constraints[2].spec,
            },
            Zone {
                name: "C4".into(),
                geometry: ZoneGeometry::PointToPlane {
                    point: RobotPoint::Effector,
                    plane: self.workspace.lower_plane,
                },
                spec: self.constraints[3].spec,
            },
        ];
        Ok(zones)
    }
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

/// One control tick's log entry. CSV columns follow the field order.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub t: f64,
    pub q: Vec<f64>,
    pub error_l1: f64,
    pub qdot_norm: f64,
    /// Raw distances d_C1..d_C4 (meters), logged even for disabled rows.
    pub distances: [f64; 4],
    /// Distance errors d̃_C1..d̃_C4 under each constraint's direction.
    pub errors: [f64; 4],
    pub lp_status: LpStatus,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioSummary {
    pub name: String,
    pub enabled: [bool; 4],
    pub min_distance: [f64; 4],
    pub min_error: [f64; 4],
    /// Ticks on which each constraint's distance error was below tolerance.
    pub violation_ticks: [usize; 4],
    pub violated: [bool; 4],
    pub expected_violations: [bool; 4],
    pub matches_expected: bool,
    pub max_error_l1: f64,
    pub final_error_l1: f64,
    pub fail_safe_ticks: usize,
    pub omitted_row_ticks: usize,
    /// High-frequency energy of ‖q̇‖₂ over the final quarter of the run:
    /// mean squared tick-to-tick difference, a residual-vibration indicator.
    pub vibration: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub records: Vec<LogRecord>,
    pub summary: ScenarioSummary,
}

/// Run one scenario to completion with explicit Euler integration.
pub fn run_scenario(config: &SimConfig, scenario: &ScenarioDef) -> Result<ScenarioResult, SimError> {
    let zones = config.build_zones()?;
    let enabled_zones: Vec<Zone> = zones
        .iter()
        .zip(scenario.enabled)
        .filter(|(_, on)| *on)
        .map(|(z, _)| z.clone())
        .collect();
    let mut controller = Controller::new(
        config.moving_arm.clone(),
        enabled_zones,
        ControllerConfig {
            gains: Gains::new(config.control.eta, config.control.beta)?,
            eta_joint: config.control.eta_joint,
            strict_singular: config.control.strict_singular,
        },
    )?;

    let dt = config.control.dt;
    let steps = (config.control.duration / dt).round() as usize;
    let horizon = config.trajectory.total_duration();
    let mut q = config.moving_q0.clone();
    let mut records = Vec::with_capacity(steps);
    let mut fail_safe_ticks = 0;
    let mut omitted_row_ticks = 0;

    for k in 0..steps {
        let t = k as f64 * dt;
        let x_d = config.trajectory.sample(t.min(horizon))?;
        let out = controller.step(&q, &x_d)?;
        if out.status.fail_safe {
            fail_safe_ticks += 1;
        }
        if !out.status.omitted.is_empty() {
            omitted_row_ticks += 1;
        }

        let mut distances = [0.0; 4];
        let mut errors = [0.0; 4];
        for (i, zone) in zones.iter().enumerate() {
            distances[i] = zone.distance(&config.moving_arm, &q)?;
            errors[i] = config.constraints[i].spec.distance_error(distances[i]);
        }
        records.push(LogRecord {
            t,
            q: q.clone(),
            error_l1: out.error_l1,
            qdot_norm: out.qdot.norm(),
            distances,
            errors,
            lp_status: out.status.lp,
            objective: out.objective,
        });

        for (qi, v) in q.iter_mut().zip(out.qdot.iter()) {
            *qi += dt * v;
        }
    }

    let summary = summarize_records(scenario, &records, fail_safe_ticks, omitted_row_ticks);
    Ok(ScenarioResult { records, summary })
}

fn summarize_records(
    scenario: &ScenarioDef,
    records: &[LogRecord],
    fail_safe_ticks: usize,
    omitted_row_ticks: usize,
) -> ScenarioSummary {
    let mut min_distance = [f64::INFINITY; 4];
    let mut min_error = [f64::INFINITY; 4];
    let mut violation_ticks = [0usize; 4];
    let mut max_error_l1 = 0.0_f64;
    for r in records {
        for i in 0..4 {
            min_distance[i] = min_distance[i].min(r.distances[i]);
            min_error[i] = min_error[i].min(r.errors[i]);
            if r.errors[i] < -VIOLATION_TOL {
                violation_ticks[i] += 1;
            }
        }
        max_error_l1 = max_error_l1.max(r.error_l1);
    }
    let violated = [
        violation_ticks[0] > 0,
        violation_ticks[1] > 0,
        violation_ticks[2] > 0,
        violation_ticks[3] > 0,
    ];
    let tail_start = records.len() - records.len() / 4;
    let tail: Vec<f64> = records[tail_start..].iter().map(|r| r.qdot_norm).collect();
    let vibration = if tail.len() > 1 {
        tail.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / (tail.len() - 1) as f64
    } else {
        0.0
    };
    ScenarioSummary {
        name: scenario.name.clone(),
        enabled: scenario.enabled,
        min_distance,
        min_error,
        violation_ticks,
        violated,
        expected_violations: scenario.expected_violations,
        matches_expected: violated == scenario.expected_violations,
        max_error_l1,
        final_error_l1: records.last().map_or(0.0, |r| r.error_l1),
        fail_safe_ticks,
        omitted_row_ticks,
        vibration,
    }
}

// ---------------------------------------------------------------------------
// CSV log
// ---------------------------------------------------------------------------

fn lp_status_str(s: LpStatus) -> &'static str {
    match s {
        LpStatus::Optimal => "optimal",
        LpStatus::Infeasible => "infeasible",
        LpStatus::Unbounded => "unbounded",
    }
}

fn lp_status_parse(s: &str) -> Option<LpStatus> {
    match s {
        "optimal" => Some(LpStatus::Optimal),
        "infeasible" => Some(LpStatus::Infeasible),
        "unbounded" => Some(LpStatus::Unbounded),
        _ => None,
    }
}

/// Write records as CSV with 9 significant digits per value.
pub fn write_log(records: &[LogRecord], dof: usize, mut w: impl Write) -> std::io::Result<()> {
    let mut header = String::from("t");
    for j in 0..dof {
        header.push_str(&format!(",q{j}"));
    }
    header.push_str(",err_l1,qdot_l2");
    for c in CONSTRAINT_NAMES {
        header.push_str(&format!(",d_{}", c.to_lowercase()));
    }
    for c in CONSTRAINT_NAMES {
        header.push_str(&format!(",dtil_{}", c.to_lowercase()));
    }
    header.push_str(",lp_status,objective");
    writeln!(w, "{header}")?;

    let num = |v: f64| format!("{v:.8e}");
    for r in records {
        let mut line = num(r.t);
        for qv in &r.q {
            line.push(',');
            line.push_str(&num(*qv));
        }
        line.push(',');
        line.push_str(&num(r.error_l1));
        line.push(',');
        line.push_str(&num(r.qdot_norm));
        for d in r.distances {
            line.push(',');
            line.push_str(&num(d));
        }
        for e in r.errors {
            line.push(',');
            line.push_str(&num(e));
        }
        line.push(',');
        line.push_str(lp_status_str(r.lp_status));
        line.push(',');
        line.push_str(&num(r.objective));
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_log_file(
    records: &[LogRecord],
    dof: usize,
    path: impl AsRef<Path>,
) -> Result<(), SimError> {
    let file = std::fs::File::create(path)?;
    write_log(records, dof, std::io::BufWriter::new(file))?;
    Ok(())
}

/// Parse a CSV produced by [`write_log`] back into records.
pub fn read_log(r: impl BufRead) -> Result<Vec<LogRecord>, SimError> {
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => {
            return Err(SimError::BadLogLine {
                line: 0,
                reason: "empty file".into(),
            })
        }
    };
    let dof = header
        .split(',')
        .filter(|c| {
            c.len() > 1 && c.starts_with('q') && c[1..].chars().all(|ch| ch.is_ascii_digit())
        })
        .count();
    let expected_fields = 1 + dof + 2 + 4 + 4 + 2;
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected_fields {
            return Err(SimError::BadLogLine {
                line: idx + 2,
                reason: format!("{} fields, expected {expected_fields}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| {
            s.parse::<f64>().map_err(|_| SimError::BadLogLine {
                line: idx + 2,
                reason: format!("bad {what}: `{s}`"),
            })
        };
        let mut it = fields.iter();
        let t = parse(it.next().unwrap(), "t")?;
        let mut q = Vec::with_capacity(dof);
        for _ in 0..dof {
            q.push(parse(it.next().unwrap(), "q")?);
        }
        let error_l1 = parse(it.next().unwrap(), "err_l1")?;
        let qdot_norm = parse(it.next().unwrap(), "qdot_l2")?;
        let mut distances = [0.0; 4];
        for d in &mut distances {
            *d = parse(it.next().unwrap(), "distance")?;
        }
        let mut errors = [0.0; 4];
        for e in &mut errors {
            *e = parse(it.next().unwrap(), "error")?;
        }
        let status_str = it.next().unwrap();
        let lp_status = lp_status_parse(status_str).ok_or_else(|| SimError::BadLogLine {
            line: idx + 2,
            reason: format!("bad lp_status: `{status_str}`"),
        })?;
        let objective = parse(it.next().unwrap(), "objective")?;
        records.push(LogRecord {
            t,
            q,
            error_l1,
            qdot_norm,
            distances,
            errors,
            lp_status,
            objective,
        });
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Summary report
// ---------------------------------------------------------------------------

/// Text table over all scenario summaries, one block per scenario.
pub fn summary_report(summaries: &[ScenarioSummary]) -> String {
    let mut out = String::new();
    for s in summaries {
        out.push_str(&format!("scenario {}\n", s.name));
        out.push_str(&format!(
            "  enabled: {}\n",
            mask_names(&s.enabled).join(" ").trim()
        ));
        for i in 0..4 {
            out.push_str(&format!(
                "  {}: min d = {:>12.6} m, min d~ = {:>12.6} m, {}\n",
                CONSTRAINT_NAMES[i],
                s.min_distance[i],
                s.min_error[i],
                if s.violated[i] {
                    format!("VIOLATED ({} ticks)", s.violation_ticks[i])
                } else {
                    "ok".to_string()
                }
            ));
        }
        out.push_str(&format!(
            "  violations: [{}], expected: [{}] -> {}\n",
            mask_names(&s.violated).join(" "),
            mask_names(&s.expected_violations).join(" "),
            if s.matches_expected {
                "MATCH"
            } else {
                "MISMATCH"
            }
        ));
        out.push_str(&format!(
            "  max |x~|_1 = {:.6}, final |x~|_1 = {:.6}\n",
            s.max_error_l1, s.final_error_l1
        ));
        out.push_str(&format!(
            "  fail-safe ticks: {}, ticks with omitted rows: {}, vibration: {:.3e}\n",
            s.fail_safe_ticks, s.omitted_row_ticks, s.vibration
        ));
    }
    out
}

fn mask_names(mask: &[bool; 4]) -> Vec<&'static str> {
    CONSTRAINT_NAMES
        .iter()
        .zip(mask)
        .filter_map(|(n, &on)| on.then_some(*n))
        .collect()
}

// ---------------------------------------------------------------------------
// Reference configuration
// ---------------------------------------------------------------------------

/// The shipped twin-arm reference configuration, embedded so the scenarios
/// can run without touching the filesystem.
pub mod reference {
    use super::{SimConfig, SimError};

    pub const CONFIG_TOML: &str = include_str!("../assets/reference.toml");
    pub const ARM_MOVING_TOML: &str = include_str!("../assets/arm_moving.toml");
    pub const ARM_STATIC_TOML: &str = include_str!("../assets/arm_static.toml");

    pub fn config() -> Result<SimConfig, SimError> {
        SimConfig::from_toml_str(CONFIG_TOML, |name| match name {
            "arm_moving.toml" => Ok(ARM_MOVING_TOML.to_string()),
            "arm_static.toml" => Ok(ARM_STATIC_TOML.to_string()),
            other => Err(SimError::Invalid(format!(
                "embedded reference config has no arm file `{other}`"
            ))),
        })
    }
}
