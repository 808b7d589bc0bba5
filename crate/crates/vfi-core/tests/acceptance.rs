//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Run with
//! `cargo test -p vfi-core --test acceptance -- --nocapture`.

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use vfi_core::controller::{Controller, ControllerConfig, Gains, RobotPoint, Zone, ZoneGeometry};
use vfi_core::distance;
use vfi_core::dq::{DualQuaternion, Quaternion};
use vfi_core::geom::{self, Plane, PluckerLine, Point};
use vfi_core::kinematics::{
    translation_jacobian, DhParams, Frame, JointDescriptor, JointKind, KinematicChain,
};
use vfi_core::lp::{self, CanonicalLp, LpStatus};
use vfi_core::sim::{self, reference};
use vfi_core::vfi::{ZoneDirection, ZoneSpec};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_unit_pure(rng: &mut ChaCha8Rng) -> Quaternion {
    loop {
        let v = Quaternion::pure(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm() > 1e-2 {
            return v.normalized().unwrap();
        }
    }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Quaternion {
    loop {
        let q = Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if q.norm() > 1e-2 {
            return q.normalized().unwrap();
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng) -> Point {
    Point::new(
        rng.random_range(-0.6..0.6),
        rng.random_range(-0.6..0.6),
        rng.random_range(-0.6..0.6),
    )
}

fn random_pose(rng: &mut ChaCha8Rng) -> DualQuaternion {
    let r = random_rotation(rng);
    let t = random_point(rng).quaternion();
    DualQuaternion::from_rotation_translation(&r, &t).unwrap()
}

fn random_dq(rng: &mut ChaCha8Rng) -> DualQuaternion {
    DualQuaternion::new(
        Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ),
        Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ),
    )
}

fn random_chain(rng: &mut ChaCha8Rng) -> KinematicChain {
    let n = rng.random_range(3..=8);
    let joints = (0..n)
        .map(|_| JointDescriptor {
            kind: if rng.random_bool(0.7) {
                JointKind::Revolute
            } else {
                JointKind::Prismatic
            },
            dh: DhParams {
                theta: rng.random_range(-3.0..3.0),
                d: rng.random_range(-0.3..0.3),
                a: rng.random_range(-0.3..0.3),
                alpha: rng.random_range(-3.0..3.0),
            },
            q_min: -3.0,
            q_max: 3.0,
        })
        .collect();
    KinematicChain::new(random_pose(rng), joints, random_pose(rng), vec![], None).unwrap()
}

fn random_q(chain: &KinematicChain, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..chain.dof())
        .map(|_| rng.random_range(-1.2..1.2))
        .collect()
}

/// Central finite difference of a scalar function of the configuration.
fn fd_row(n: usize, q: &[f64], f: impl Fn(&[f64]) -> f64) -> RowDVector<f64> {
    let h = 1e-6;
    let mut row = RowDVector::zeros(n);
    for j in 0..n {
        let mut qp = q.to_vec();
        let mut qm = q.to_vec();
        qp[j] += h;
        qm[j] -= h;
        row[j] = (f(&qp) - f(&qm)) / (2.0 * h);
    }
    row
}

fn rows_close(analytic: &RowDVector<f64>, fd: &RowDVector<f64>, rel: f64) -> bool {
    (analytic - fd).amax() <= rel * fd.amax().max(1.0)
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_1_algebra_identities() {
    let started = Instant::now();
    let mut rng = rng(1);

    // Hamilton factorizations, 4- and 8-dimensional.
    for _ in 0..1000 {
        let a = random_dq(&mut rng);
        let b = random_dq(&mut rng);
        let direct = (a * b).vec8();
        assert!((a.hamilton_plus() * b.vec8() - direct).amax() <= 1e-12);
        assert!((b.hamilton_minus() * a.vec8() - direct).amax() <= 1e-12);
        let d4 = (a.p * b.p).vec4();
        assert!((a.p.hamilton_plus() * b.p.vec4() - d4).amax() <= 1e-12);
        assert!((b.p.hamilton_minus() * a.p.vec4() - d4).amax() <= 1e-12);
    }

    // Double cover: x and −x act identically on points.
    for _ in 0..1000 {
        let x = random_pose(&mut rng);
        let p = random_point(&mut rng).quaternion();
        let diff = x.transform_point(&p) - (-x).transform_point(&p);
        assert!(diff.norm() <= 1e-12);
    }

    // ε-nilpotency: D(ab) = P(a)D(b) + D(a)P(b), and products of pure-dual
    // elements vanish.
    for _ in 0..1000 {
        let a = random_dq(&mut rng);
        let b = random_dq(&mut rng);
        let prod = a * b;
        assert!((prod.d - (a.p * b.d + a.d * b.p)).norm() <= 1e-12);
        let ea = DualQuaternion::new(Quaternion::ZERO, a.d);
        let eb = DualQuaternion::new(Quaternion::ZERO, b.d);
        assert!((ea * eb).vec8().amax() == 0.0);
    }

    // Plücker constraint, also after rigid transforms.
    for _ in 0..1000 {
        let line =
            PluckerLine::from_point_direction(&random_point(&mut rng), &random_unit_pure(&mut rng))
                .unwrap();
        assert!(line.direction().dot(&line.moment()).abs() <= 1e-12);
        let moved = line.transformed(&random_pose(&mut rng)).unwrap();
        assert!(moved.direction().dot(&moved.moment()).abs() <= 1e-12);
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("criterion 1 (algebra identities, 1000 cases each, <5 s): PASS ({elapsed:?})");
}

#[test]
fn criterion_2_jacobians_match_finite_differences() {
    let started = Instant::now();
    let mut rng = rng(2);
    let samples = 100;

    // J_x, J_t, J_r and J_lz column-by-column against vec-valued central
    // differences.
    let h = 1e-6;
    for _ in 0..samples {
        let chain = random_chain(&mut rng);
        let q = random_q(&chain, &mut rng);
        let x = chain.fkm(&q, Frame::End).unwrap();
        let j_x = chain.pose_jacobian(&q, Frame::End).unwrap();
        let j_t = translation_jacobian(&j_x, &x).unwrap();
        let j_r = vfi_core::kinematics::rotation_jacobian(&j_x);
        let (_, j_lz) = chain.line_jacobian(&q, Frame::End, &Quaternion::K).unwrap();
        for j in 0..chain.dof() {
            let mut qp = q.to_vec();
            let mut qm = q.to_vec();
            qp[j] += h;
            qm[j] -= h;
            let (xp, xm) = (
                chain.fkm(&qp, Frame::End).unwrap(),
                chain.fkm(&qm, Frame::End).unwrap(),
            );
            let fd_x = (xp.vec8() - xm.vec8()) / (2.0 * h);
            assert!((j_x.column(j) - fd_x).amax() <= 1e-5 * fd_x.amax().max(1.0));
            let fd_t = (xp.translation().vec4() - xm.translation().vec4()) / (2.0 * h);
            assert!((j_t.column(j) - fd_t).amax() <= 1e-5 * fd_t.amax().max(1.0));
            let fd_r = (xp.rotation().vec4() - xm.rotation().vec4()) / (2.0 * h);
            assert!((j_r.column(j) - fd_r).amax() <= 1e-5 * fd_r.amax().max(1.0));
            let (lp, _) = chain.line_jacobian(&qp, Frame::End, &Quaternion::K).unwrap();
            let (lm, _) = chain.line_jacobian(&qm, Frame::End, &Quaternion::K).unwrap();
            let fd_l = (lp.as_dual_quaternion().vec8() - lm.as_dual_quaternion().vec8())
                / (2.0 * h);
            assert!((j_lz.column(j) - fd_l).amax() <= 1e-5 * fd_l.amax().max(1.0));
        }
    }

    // Scalar distance rows: point-plane, line-point, point-line, line-line
    // (non-parallel), away from the singular sets.
    let mut done = [0usize; 4];
    while done.iter().any(|&d| d < samples) {
        let chain = random_chain(&mut rng);
        let q = random_q(&chain, &mut rng);
        let n = chain.dof();
        let x = chain.fkm(&q, Frame::End).unwrap();
        let j_x = chain.pose_jacobian(&q, Frame::End).unwrap();
        let j_t = translation_jacobian(&j_x, &x).unwrap();
        let t = Point::from_quaternion(&x.translation().im()).unwrap();
        let (lz, j_lz) = chain.line_jacobian(&q, Frame::End, &Quaternion::K).unwrap();

        let plane =
            Plane::from_point_normal(&random_point(&mut rng), &random_unit_pure(&mut rng))
                .unwrap();
        if done[0] < samples {
            let pair = distance::point_plane(&j_t, &t, &plane);
            let fd = fd_row(n, &q, |q| {
                let x = chain.fkm(q, Frame::End).unwrap();
                geom::point_plane_distance(
                    &Point::from_quaternion(&x.translation().im()).unwrap(),
                    &plane,
                )
            });
            assert!(rows_close(&pair.jacobian, &fd, 1e-5), "point-plane row");
            done[0] += 1;
        }

        let p = random_point(&mut rng);
        if done[1] < samples && geom::point_line_distance(&p, &lz) > 1e-2 {
            let pair = distance::line_point(&j_lz, &lz, &p).unwrap();
            let fd = fd_row(n, &q, |q| {
                let (lz, _) = chain.line_jacobian(q, Frame::End, &Quaternion::K).unwrap();
                geom::point_line_distance(&p, &lz)
            });
            assert!(rows_close(&pair.jacobian, &fd, 1e-5), "line-point row");
            done[1] += 1;
        }

        let line =
            PluckerLine::from_point_direction(&random_point(&mut rng), &random_unit_pure(&mut rng))
                .unwrap();
        if done[2] < samples && geom::point_line_distance(&t, &line) > 1e-2 {
            let pair = distance::point_line(&j_t, &t, &line).unwrap();
            let fd = fd_row(n, &q, |q| {
                let x = chain.fkm(q, Frame::End).unwrap();
                geom::point_line_distance(
                    &Point::from_quaternion(&x.translation().im()).unwrap(),
                    &line,
                )
            });
            assert!(rows_close(&pair.jacobian, &fd, 1e-5), "point-line row");
            done[2] += 1;
        }

        let sin_phi = geom::line_cross(&lz, &line).p.norm();
        if done[3] < samples && sin_phi > 1e-3 && geom::line_line_distance(&lz, &line) > 1e-3 {
            let pair = distance::line_line(&j_lz, &lz, &line).unwrap();
            let fd = fd_row(n, &q, |q| {
                let (lz, _) = chain.line_jacobian(q, Frame::End, &Quaternion::K).unwrap();
                geom::line_line_distance(&lz, &line)
            });
            assert!(rows_close(&pair.jacobian, &fd, 1e-4), "line-line row");
            done[3] += 1;
        }
    }

    // Parallel branch of the line-line Jacobian: a prismatic pair keeps the
    // robot line parallel to a static line for every q.
    let fp = std::f64::consts::FRAC_PI_2;
    let chain = KinematicChain::new(
        DualQuaternion::ONE,
        vec![
            JointDescriptor {
                kind: JointKind::Prismatic,
                dh: DhParams {
                    theta: 0.0,
                    d: 0.0,
                    a: 0.0,
                    alpha: -fp,
                },
                q_min: -1.0,
                q_max: 1.0,
            },
            JointDescriptor {
                kind: JointKind::Prismatic,
                dh: DhParams {
                    theta: -fp,
                    d: 0.0,
                    a: 0.0,
                    alpha: fp,
                },
                q_min: -1.0,
                q_max: 1.0,
            },
        ],
        DualQuaternion::ONE,
        vec![],
        None,
    )
    .unwrap();
    let static_line =
        PluckerLine::from_point_direction(&Point::new(0.0, 0.0, 0.0), &Quaternion::K).unwrap();
    let mut done_parallel = 0;
    while done_parallel < samples {
        let q = [rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8)];
        let (lz, j_lz) = chain.line_jacobian(&q, Frame::End, &Quaternion::K).unwrap();
        if geom::line_line_distance(&lz, &static_line) < 1e-2 {
            continue;
        }
        let pair = distance::line_line(&j_lz, &lz, &static_line).unwrap();
        let fd = fd_row(2, &q, |q| {
            let (lz, _) = chain.line_jacobian(q, Frame::End, &Quaternion::K).unwrap();
            geom::line_line_distance(&lz, &static_line)
        });
        assert!(rows_close(&pair.jacobian, &fd, 1e-5), "parallel branch row");
        done_parallel += 1;
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 2 (all Jacobians vs finite differences, ≥100 samples each, <30 s): PASS ({elapsed:?})"
    );
}

#[test]
fn criterion_3_distance_oracles() {
    let mut rng = rng(3);
    for _ in 0..1000 {
        // Point-plane against n·(t − anchor).
        let n = random_unit_pure(&mut rng);
        let anchor = random_point(&mut rng);
        let plane = Plane::from_point_normal(&anchor, &n).unwrap();
        let t = random_point(&mut rng);
        let oracle = n.dot(&(t.quaternion() - anchor.quaternion()));
        assert!((geom::point_plane_distance(&t, &plane) - oracle).abs() <= 1e-9);

        // Point-line against the projection formula.
        let dir = random_unit_pure(&mut rng);
        let on_line = random_point(&mut rng);
        let line = PluckerLine::from_point_direction(&on_line, &dir).unwrap();
        let rel = on_line.quaternion() - t.quaternion();
        let oracle = (rel - dir * rel.dot(&dir)).norm();
        assert!((geom::point_line_distance(&t, &line) - oracle).abs() <= 1e-9);

        // Line-line against the closed-form skew/parallel formula.
        let dir2 = random_unit_pure(&mut rng);
        let on_line2 = random_point(&mut rng);
        let line2 = PluckerLine::from_point_direction(&on_line2, &dir2).unwrap();
        let cross = dir.cross(&dir2);
        let oracle = if cross.norm() < 1e-9 {
            let rel = on_line2.quaternion() - on_line.quaternion();
            (rel - dir * rel.dot(&dir)).norm()
        } else {
            ((on_line2.quaternion() - on_line.quaternion()).dot(&cross) / cross.norm()).abs()
        };
        assert!(
            (geom::line_line_distance(&line, &line2) - oracle).abs() <= 1e-9,
            "line-line {} vs {}",
            geom::line_line_distance(&line, &line2),
            oracle
        );
    }
    println!("criterion 3 (distance oracles, 1000 cases, 1e-9): PASS");
}

#[test]
fn criterion_4_lp_solver() {
    let mut rng = rng(4);

    // 200 random bounded feasible LPs with K ≤ 15, M ≤ 30, entries U[−1,1],
    // b from a random feasible g; objective against exhaustive basic-feasible
    // enumeration.
    for i in 0..200 {
        let lp = random_bounded_lp(&mut rng, 14, 29);
        assert!(lp.a.nrows() <= 15 && lp.a.ncols() <= 30);
        let sol = lp::solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal, "instance {i} not optimal");
        let oracle = enumerate_best_objective(&lp).expect("feasible by construction");
        assert!(
            (sol.objective - oracle).abs() <= 1e-6 * (1.0 + oracle.abs()),
            "instance {i}: objective {} vs enumerated {}",
            sol.objective,
            oracle
        );
    }

    // Degenerate crafted instances terminate: Klee-Minty cube and Beale's
    // cycling example.
    let n = 8;
    let mut a = DMatrix::zeros(n, 2 * n);
    let mut b = DVector::zeros(n);
    let mut c = DVector::zeros(2 * n);
    for i in 0..n {
        for j in 0..i {
            a[(i, j)] = 2.0 * 2f64.powi((i - j) as i32);
        }
        a[(i, i)] = 1.0;
        a[(i, n + i)] = 1.0;
        b[i] = 5f64.powi(i as i32 + 1);
        c[i] = -(2f64.powi((n - 1 - i) as i32));
    }
    let klee_minty = CanonicalLp::new(c, a, b);
    let sol = lp::solve(&klee_minty).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    let expected = -(5f64.powi(n as i32));
    assert!((sol.objective - expected).abs() <= 1e-6 * expected.abs());
    assert!(sol.pivots <= 50 * 2 * n + 200 * 2 * n + 10_000);

    let beale = CanonicalLp::new(
        DVector::from_row_slice(&[-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0]),
        DMatrix::from_row_slice(
            3,
            7,
            &[
                0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0, //
                0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0,
            ],
        ),
        DVector::from_row_slice(&[0.0, 0.0, 1.0]),
    );
    let sol = lp::solve(&beale).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective + 0.05).abs() <= 1e-9);

    println!("criterion 4 (LP vs vertex enumeration, 200 instances + degenerate): PASS");
}

/// Random LP with a bounded feasible region (a 1ᵀg + s = R row is appended).
fn random_bounded_lp(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize) -> CanonicalLp {
    loop {
        let k = rng.random_range(1..=max_rows);
        let m = rng.random_range((k + 1).max(2)..=(2 * k + 6).min(max_cols));
        let combos = {
            let mut c: f64 = 1.0;
            for i in 0..k + 1 {
                c *= (m + 1 - i) as f64 / (i + 1) as f64;
            }
            c
        };
        if combos > 6000.0 {
            continue;
        }
        let a = DMatrix::from_fn(k, m, |_, _| rng.random_range(-1.0..1.0));
        let g0 = DVector::from_fn(m, |_, _| rng.random_range(0.0..1.0));
        let b = &a * &g0;
        let cost = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
        let r_bound = g0.sum() + rng.random_range(1.0..10.0);
        let mut a2 = DMatrix::zeros(k + 1, m + 1);
        a2.view_mut((0, 0), (k, m)).copy_from(&a);
        for j in 0..m {
            a2[(k, j)] = 1.0;
        }
        a2[(k, m)] = 1.0;
        let mut b2 = DVector::zeros(k + 1);
        b2.rows_mut(0, k).copy_from(&b);
        b2[k] = r_bound;
        let mut c2 = DVector::zeros(m + 1);
        c2.rows_mut(0, m).copy_from(&cost);
        return CanonicalLp::new(c2, a2, b2);
    }
}

/// Best objective over all basic feasible solutions (exhaustive).
fn enumerate_best_objective(lp: &CanonicalLp) -> Option<f64> {
    let m = lp.a.nrows();
    let n = lp.a.ncols();
    if m > n {
        return None;
    }
    let mut best: Option<f64> = None;
    let mut combo: Vec<usize> = (0..m).collect();
    loop {
        let cols = DMatrix::from_fn(m, m, |i, j| lp.a[(i, combo[j])]);
        if let Some(x) = cols.clone().lu().solve(&lp.b) {
            let residual = (&cols * &x - &lp.b).amax();
            if residual <= 1e-8 * (1.0 + lp.b.amax()) && x.iter().all(|&v| v >= -1e-9) {
                let obj: f64 = (0..m).map(|j| lp.cost[combo[j]] * x[j]).sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if combo[i] != i + n - m {
                break;
            }
        }
        combo[i] += 1;
        for j in i + 1..m {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

#[test]
fn criterion_5_s5_forward_invariance() {
    let started = Instant::now();
    let config = reference::config().unwrap();
    assert_eq!(config.control.dt, 0.004);
    assert!(config.control.duration >= 20.0);
    let scenario = config.scenario("S5").unwrap().clone();
    let result = sim::run_scenario(&config, &scenario).unwrap();
    assert_eq!(result.records.len(), 5000);
    let mut prev: Option<[f64; 4]> = None;
    for r in &result.records {
        for (i, e) in r.errors.iter().enumerate() {
            assert!(
                *e >= -1e-4,
                "constraint C{} violated at t = {}: d~ = {}",
                i + 1,
                r.t,
                e
            );
            // Discrete forward invariance with 0.1 mm slack for the
            // linearization error: d~(k+1) ≥ (1 − η_d T) d~(k) − 1e-4.
            if let Some(p) = prev {
                let eta_d = config.constraints[i].spec.eta_d;
                let bound = (1.0 - eta_d * config.control.dt) * p[i] - 1e-4;
                assert!(
                    *e >= bound,
                    "C{} decayed faster than the field allows at t = {}: {} < {}",
                    i + 1,
                    r.t,
                    e,
                    bound
                );
            }
        }
        prev = Some(r.errors);
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 5 (S5 forward invariance, all d~ ≥ -1e-4 over 20 s at 4 ms, <60 s): PASS ({elapsed:?})"
    );
}

#[test]
fn criterion_6_scenario_violation_matrix() {
    let config = reference::config().unwrap();
    let expected: [(&str, [bool; 4]); 5] = [
        ("S1", [true, true, true, true]),
        ("S2", [false, true, true, true]),
        ("S3", [false, false, true, true]),
        ("S4", [false, false, false, true]),
        ("S5", [false, false, false, false]),
    ];
    for (name, violations) in expected {
        let scenario = config.scenario(name).unwrap().clone();
        assert_eq!(
            scenario.expected_violations, violations,
            "{name} config expectation drifted"
        );
        let result = sim::run_scenario(&config, &scenario).unwrap();
        assert_eq!(
            result.summary.violated, violations,
            "{name} violated {:?}, expected {:?}",
            result.summary.violated, violations
        );
        assert!(result.summary.matches_expected);
    }
    println!("criterion 6 (scenario violation matrix S1..S5): PASS");
}

fn zy_stage() -> KinematicChain {
    let fp = std::f64::consts::FRAC_PI_2;
    let unrotate = DualQuaternion::from_rotation(&Quaternion::rotation_x(fp)).unwrap();
    KinematicChain::new(
        DualQuaternion::ONE,
        vec![
            JointDescriptor {
                kind: JointKind::Prismatic,
                dh: DhParams {
                    theta: 0.0,
                    d: 0.0,
                    a: 0.0,
                    alpha: -fp,
                },
                q_min: -1.0,
                q_max: 1.0,
            },
            JointDescriptor {
                kind: JointKind::Prismatic,
                dh: DhParams {
                    theta: 0.0,
                    d: 0.0,
                    a: 0.0,
                    alpha: 0.0,
                },
                q_min: -1.0,
                q_max: 1.0,
            },
        ],
        unrotate,
        vec![],
        None,
    )
    .unwrap()
}

fn controller_config() -> ControllerConfig {
    ControllerConfig {
        gains: Gains::new(50.0, 40.0).unwrap(),
        eta_joint: 2.0,
        strict_singular: false,
    }
}

#[test]
fn criterion_7_tangential_non_disturbance() {
    // J1 moves along ẑ (the plane normal), J2 along ŷ (tangential). The
    // commanded target is offset along ŷ only.
    let chain = zy_stage();
    let q = [0.0, 0.0];
    let x_d = chain.fkm(&[0.0, 0.12], Frame::End).unwrap();
    let plane = Plane::from_parts(&Quaternion::K, -0.05).unwrap();
    let zone = Zone {
        name: "floor".into(),
        geometry: ZoneGeometry::PointToPlane {
            point: RobotPoint::Effector,
            plane,
        },
        spec: ZoneSpec::new(ZoneDirection::KeepOut, 0.0, 0.5).unwrap(),
    };

    let mut unconstrained = Controller::new(chain.clone(), vec![], controller_config()).unwrap();
    let free = unconstrained.step(&q, &x_d).unwrap();
    let pair = zone.evaluate(&chain, &q).unwrap();
    let rate = (pair.jacobian.clone() * &free.qdot)[0];
    assert!(
        rate.abs() <= 1e-9,
        "unconstrained command is not tangential: {rate}"
    );

    let mut constrained = Controller::new(chain, vec![zone], controller_config()).unwrap();
    let held = constrained.step(&q, &x_d).unwrap();
    assert!(
        (free.qdot - held.qdot).amax() <= 1e-6,
        "tangential velocities disturbed"
    );
    println!("criterion 7 (tangential non-disturbance, 1e-6): PASS");
}

#[test]
fn criterion_8_stop_at_goal() {
    let chain = zy_stage();
    let q = [0.15, -0.3];
    let x_d = chain.fkm(&q, Frame::End).unwrap();
    let mut controller = Controller::new(chain, vec![], controller_config()).unwrap();
    let out = controller.step(&q, &x_d).unwrap();
    assert_eq!(out.error_l1, 0.0);
    assert!(
        out.qdot.iter().all(|&v| v == 0.0),
        "q̇ not exactly zero: {:?}",
        out.qdot
    );
    println!("criterion 8 (stop at goal, exact zero velocity): PASS");
}

#[test]
fn criterion_9_remark_recovery_from_inside() {
    // Keep-out plane z ≥ 0 on a vertical prismatic axis; start 10 mm inside
    // with the target deeper inside. The constraint must push the system back
    // to the boundary at least exponentially.
    let chain = zy_stage();
    let plane = Plane::from_parts(&Quaternion::K, 0.0).unwrap();
    let eta_d = 0.5;
    let zone = Zone {
        name: "recovery".into(),
        geometry: ZoneGeometry::PointToPlane {
            point: RobotPoint::Effector,
            plane,
        },
        spec: ZoneSpec::new(ZoneDirection::KeepOut, 0.0, eta_d).unwrap(),
    };
    let x_d = chain.fkm(&[-0.05, 0.0], Frame::End).unwrap();
    let mut controller = Controller::new(chain.clone(), vec![zone.clone()], controller_config())
        .unwrap();

    let dt = 0.004;
    let mut q = vec![-0.010, 0.0];
    let d0 = zone.distance(&chain, &q).unwrap();
    assert!((d0 + 0.010).abs() <= 1e-12);
    let mut prev = d0;
    let mut t = 0.0;
    for _ in 0..5000 {
        let out = controller.step(&q, &x_d).unwrap();
        assert!(!out.status.fail_safe, "controller gave up at t = {t}");
        for j in 0..2 {
            q[j] += dt * out.qdot[j];
        }
        t += dt;
        let d = zone.distance(&chain, &q).unwrap();
        assert!(d >= prev - 1e-6, "d~ not monotone at t = {t}: {prev} -> {d}");
        let bound = d0 * (-eta_d * t).exp() - 1e-4;
        assert!(
            d >= bound,
            "recovery slower than exponential at t = {t}: {d} < {bound}"
        );
        prev = d;
    }
    assert!(
        prev >= -1e-5,
        "did not return to the boundary: d~ = {prev}"
    );
    println!("criterion 9 (recovery from inside the zone, exponential bound): PASS");
}
