//! Randomized invariants for screws, clouds, the metric and the partitioner.

use std::f64::consts::PI;
use std::path::Path;

use proptest::prelude::*;
use regrasp_core::cloud::{antipodal_pairs, transform_point_cloud, ContactPair, PointCloud};
use regrasp_core::linalg::{Mat3, Vec3};
use regrasp_core::metric::{eta_for_pair, EnvironmentContact, TaskContext};
use regrasp_core::pipeline::{compute_regions, run_pipeline, PipelineParams, RegraspReport};
use regrasp_core::plan::PlanSpec;
use regrasp_core::regrasp::{compute_score, greedy_partition, optimal_partition_bruteforce};
use regrasp_core::screws::{
    pose_inverse, screw_exp, screw_from_poses, screw_interpolate, screw_transform, Pitch, Pose, ScrewSegment, UnitScrew,
};
use regrasp_core::synth::{density_for_count, generate_synthetic, Shape};
use regrasp_core::Error;

fn vec3(scale: f64) -> impl Strategy<Value = Vec3<f64>> {
    (-scale..scale, -scale..scale, -scale..scale).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = Vec3<f64>> {
    vec3(1.0).prop_filter_map("too short", |v| v.try_normalize(0.1))
}

fn pose() -> impl Strategy<Value = Pose<f64>> {
    (unit(), -PI..PI, vec3(1.0)).prop_map(|(axis, angle, t)| Pose::new(Mat3::from_axis_angle(axis, angle), t))
}

fn screw() -> impl Strategy<Value = UnitScrew<f64>> {
    prop_oneof![
        4 => (unit(), vec3(1.0), -0.5..0.5f64).prop_map(|(l, p, h)| UnitScrew::through_point(l, p, h).unwrap()),
        1 => unit().prop_map(|l| UnitScrew::translation(l).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn screw_round_trip(l in unit(), point in vec3(1.0), h in -0.5..0.5f64, theta in 1e-3..PI - 1e-3) {
        let s = UnitScrew::through_point(l, point, h).unwrap();
        let (back, angle) = screw_from_poses(&Pose::identity(), &screw_exp(&s, theta)).unwrap();
        prop_assert!((back.direction() - l).max_abs() < 1e-6);
        prop_assert!((back.axis_point() - s.axis_point()).max_abs() < 1e-6);
        prop_assert!((back.pitch().finite().unwrap() - h).abs() < 1e-6);
        prop_assert!((angle - theta).abs() < 1e-9);
    }

    #[test]
    fn translation_round_trip(l in unit(), d in 1e-3..2.0f64) {
        let s = UnitScrew::translation(l).unwrap();
        let (back, dist) = screw_from_poses(&Pose::identity(), &screw_exp(&s, d)).unwrap();
        prop_assert_eq!(back.pitch(), Pitch::Infinite);
        prop_assert!((back.direction() - l).max_abs() < 1e-9);
        prop_assert!((dist - d).abs() < 1e-12);
    }

    #[test]
    fn frame_change_conjugates(s in screw(), theta in -3.0..3.0f64, g in pose()) {
        let lhs = screw_exp(&screw_transform(&s, &g), theta);
        let rhs = g * screw_exp(&s, theta) * pose_inverse(&g);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-9);
    }

    #[test]
    fn interpolation_composes(a in pose(), b in pose(), t in 0.0..1.0f64) {
        prop_assume!(a.max_abs_diff(&b) > 1e-3);
        let seg = ScrewSegment::from_poses(a, b).unwrap();
        let mid = screw_interpolate(&seg, t);
        let end = mid * screw_exp(&seg.screw, (1.0 - t) * seg.magnitude);
        prop_assert!(end.max_abs_diff(&b) < 1e-6);
    }
}

fn random_cloud() -> impl Strategy<Value = PointCloud<f64>> {
    prop::collection::vec((vec3(0.1), unit()), 2..40).prop_map(|pts| {
        let (p, n): (Vec<_>, Vec<_>) = pts.into_iter().unzip();
        PointCloud::new(p, n).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn transformed_clouds_are_rigid_copies(cloud in random_cloud(), plan in prop::collection::vec(pose(), 1..5)) {
        let clouds = transform_point_cloud(&cloud, &plan);
        prop_assert_eq!(clouds.len(), plan.len());
        let base_inv = pose_inverse(&plan[0]);
        for (c, g) in clouds.iter().zip(&plan) {
            prop_assert_eq!(c.len(), cloud.len());
            for i in 0..cloud.len() {
                for j in (i + 1)..cloud.len() {
                    let before = (cloud.point(i) - cloud.point(j)).norm();
                    let after = (c.point(i) - c.point(j)).norm();
                    prop_assert!((before - after).abs() < 1e-9);
                }
            }
            let back = c.transformed(&pose_inverse(&(base_inv * *g)));
            for i in 0..cloud.len() {
                prop_assert!((back.point(i) - cloud.point(i)).max_abs() < 1e-9);
                prop_assert!((back.normal(i) - cloud.normal(i)).max_abs() < 1e-9);
            }
        }
    }

    #[test]
    fn antipodal_pairs_ignore_rigid_motion(cloud in random_cloud(), g in pose()) {
        let tol = 40f64.to_radians();
        let ids = |c: &PointCloud<f64>| -> Vec<(usize, usize)> {
            antipodal_pairs(c, 0.15, tol).iter().map(|p| (p.index_a, p.index_b)).collect()
        };
        let here = ids(&cloud);
        prop_assert_eq!(&here, &ids(&cloud.transformed(&g)));
        for p in antipodal_pairs(&cloud, 0.15, tol) {
            // the defect is symmetric in the two endpoints
            let ab = ContactPair::defect(&cloud, p.index_a, p.index_b).unwrap();
            let ba = ContactPair::defect(&cloud, p.index_b, p.index_a).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!(p.index_a < p.index_b);
        }
    }
}

/// A two-finger contact scene with floor contacts and gravity.
#[derive(Clone, Debug)]
struct Scene {
    cloud: PointCloud<f64>,
    pair: ContactPair<f64>,
    ctx: TaskContext<f64>,
}

fn gravity(mass: f64, c: Vec3<f64>) -> [f64; 6] {
    let f = Vec3::new(0.0, 0.0, -9.81 * mass);
    let m = c.cross(f);
    [f.x, f.y, f.z, m.x, m.y, m.z]
}

fn scene() -> impl Strategy<Value = Scene> {
    (
        vec3(0.1),
        vec3(0.1),
        screw(),
        prop::collection::vec((vec3(0.1), 0.1..0.9f64), 0..3),
        0.0..0.5f64,
        0.2..1.0f64,
        0.5..30.0f64,
    )
        .prop_filter_map("coincident contacts", |(a, b, task_screw, floor, mass, mu, cap)| {
            let u = (b - a).try_normalize(1e-3)?;
            let cloud = PointCloud::new(vec![a, b], vec![-u, u]).ok()?;
            let environment_contacts = floor
                .into_iter()
                .map(|(p, m)| EnvironmentContact::new(p, Vec3::new(0.0, 0.0, 1.0), m).unwrap())
                .collect();
            let ctx = TaskContext {
                task_screw,
                environment_contacts,
                gravity_wrench: gravity(mass, (a + b) * 0.5),
                mu_robot: mu,
                cone_facets: 16,
                force_cap: cap,
            };
            Some(Scene { cloud, pair: ContactPair { index_a: 0, index_b: 1, axis: u }, ctx })
        })
}

/// `None` when the environment contacts alone can drive the task motion.
fn eta(s: &Scene) -> Option<f64> {
    match eta_for_pair(&s.pair, &s.cloud, &s.ctx) {
        Ok(v) => Some(v),
        Err(Error::ModelUnbounded) => None,
        Err(e) => panic!("{e}"),
    }
}

fn at_least(big: Option<f64>, small: Option<f64>) -> bool {
    match (big, small) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(b), Some(s)) => b >= s - 1e-9 * s.max(1.0),
    }
}

fn same(a: Option<f64>, b: Option<f64>, rel: f64) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => close(a, b, rel),
        _ => false,
    }
}

fn moved(s: &Scene, g: &Pose<f64>) -> Scene {
    let r = g.rotation;
    let gw = &s.ctx.gravity_wrench;
    let f = r * Vec3::new(gw[0], gw[1], gw[2]);
    let m = r * Vec3::new(gw[3], gw[4], gw[5]) + g.translation.cross(f);
    let mut ctx = s.ctx.clone();
    ctx.task_screw = screw_transform(&s.ctx.task_screw, g);
    ctx.gravity_wrench = [f.x, f.y, f.z, m.x, m.y, m.z];
    ctx.environment_contacts = s
        .ctx
        .environment_contacts
        .iter()
        .map(|c| EnvironmentContact::new(g.transform_point(c.position), r * c.normal, c.mu).unwrap())
        .collect();
    Scene { cloud: s.cloud.transformed(g), pair: ContactPair { axis: r * s.pair.axis, ..s.pair }, ctx }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn metric_grows_with_friction(s in scene(), k in 1.0..3.0f64) {
        let base = eta(&s);
        let mut robot = s.clone();
        robot.ctx.mu_robot *= k;
        prop_assert!(at_least(eta(&robot), base));
        let mut env = s.clone();
        for c in &mut env.ctx.environment_contacts {
            c.mu *= k;
        }
        prop_assert!(at_least(eta(&env), base));
    }

    #[test]
    fn metric_scales_with_the_force_budget(s in scene(), k in 0.1..10.0f64) {
        // weightless: raw metric is homogeneous in the cap
        let mut free = s.clone();
        free.ctx.gravity_wrench = [0.0; 6];
        let mut scaled = free.clone();
        scaled.ctx.force_cap *= k;
        prop_assert!(same(eta(&scaled), eta(&free).map(|v| k * v), 1e-7));
        // with weight, cap and load must scale together
        let mut both = s.clone();
        both.ctx.force_cap *= k;
        both.ctx.gravity_wrench = s.ctx.gravity_wrench.map(|v| v * k);
        prop_assert!(same(eta(&both), eta(&s).map(|v| k * v), 1e-7));
    }

    #[test]
    fn metric_ignores_rigid_motion(s in scene(), g in pose()) {
        let (a, b) = (eta(&s), eta(&moved(&s, &g)));
        prop_assert!(same(a, b, 1e-6), "{:?} vs {:?}", a, b);
    }
}

fn region_sets() -> impl Strategy<Value = (Vec<Vec<usize>>, f64)> {
    let region = prop::collection::btree_set(0usize..40, 0..40).prop_map(|s| s.into_iter().collect::<Vec<_>>());
    (prop::collection::vec(region, 1..=10), prop::sample::select(vec![0.1, 0.25, 0.5]))
}

/// Region chains drawn around a shared core so that long groups do occur.
fn correlated_sets() -> impl Strategy<Value = (Vec<Vec<usize>>, f64)> {
    (prop::collection::btree_set(0usize..40, 5..30), 1usize..=10, any::<u64>(), prop::sample::select(vec![0.1, 0.25, 0.5]))
        .prop_map(|(core, k, seed, th)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let sets = (0..k)
                .map(|_| {
                    let keep = rng.gen_range(0.4..1.0);
                    let mut r: Vec<usize> = core.iter().copied().filter(|_| rng.gen_bool(keep)).collect();
                    r.extend((0..40).filter(|i| !core.contains(i) && rng.gen_bool(0.15)));
                    r.sort_unstable();
                    r
                })
                .collect();
            (sets, th)
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, ..ProptestConfig::default() })]

    #[test]
    fn greedy_is_optimal((regions, th) in prop_oneof![region_sets(), correlated_sets()]) {
        let greedy = greedy_partition(&regions, th);
        let best = optimal_partition_bruteforce(&regions, th).unwrap();
        prop_assert_eq!(greedy.alpha(), best.alpha());
        // contiguous, ordered, covering
        let mut next = 0;
        for g in &greedy.groups {
            prop_assert_eq!(g.first, next);
            prop_assert!(g.last >= g.first);
            next = g.last + 1;
            if g.segment_count() > 1 {
                prop_assert!(g.score.gamma >= th);
            }
        }
        prop_assert_eq!(next, regions.len());
    }

    #[test]
    fn feasibility_is_closed_under_shrinking((regions, th) in correlated_sets()) {
        let whole = compute_score(&regions).unwrap();
        if whole.gamma >= th {
            for a in 0..regions.len() {
                for b in a..regions.len() {
                    prop_assert!(compute_score(&regions[a..=b]).unwrap().gamma >= th);
                }
            }
        }
    }

    #[test]
    fn score_never_rises_as_a_group_grows((regions, _) in prop_oneof![region_sets(), correlated_sets()]) {
        let mut prev = f64::INFINITY;
        for end in 1..=regions.len() {
            let s = compute_score(&regions[..end]).unwrap();
            prop_assert!(s.gamma <= prev);
            prop_assert!((0.0..=1.0).contains(&s.gamma));
            // positive score exactly when a common point exists
            prop_assert_eq!(s.gamma > 0.0, !s.intersection.is_empty());
            prev = s.gamma;
        }
    }
}

fn small_box() -> PointCloud<f64> {
    let shape = Shape::Box { extents: [0.16, 0.06, 0.21] };
    generate_synthetic(&shape, density_for_count(&shape, 1500), 2).unwrap()
}

fn plan(name: &str) -> PlanSpec {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../plans").join(name);
    PlanSpec::load(path).unwrap()
}

#[test]
fn regions_survive_force_cap_scaling() {
    let cloud = small_box();
    let spec = plan("slide_pivot_pickup.json");
    let weightless = PipelineParams { mass: 0.0, ..Default::default() };
    let base = compute_regions(&cloud, &spec, &weightless).unwrap();
    for k in [0.3, 2.0, 7.5] {
        let p = PipelineParams { force_cap: weightless.force_cap * k, ..weightless };
        let scaled = compute_regions(&cloud, &spec, &p).unwrap();
        for (a, b) in base.regions.iter().zip(&scaled.regions) {
            assert_eq!(a.member_indices, b.member_indices, "factor {k}");
            assert!(close(b.raw_max, k * a.raw_max, 1e-7));
        }
    }
}

#[test]
fn index_intersection_matches_geometric_matching() {
    let cloud = small_box();
    let stage = compute_regions(&cloud, &plan("pivot_pivot_pivot.json"), &PipelineParams::default()).unwrap();
    let sets: Vec<&[usize]> = stage.regions.iter().map(|r| r.member_indices.as_slice()).collect();
    let by_index = compute_score(&sets[..2]).unwrap().intersection;

    // pull region 2's points back into the canonical frame and match by position
    let rel = pose_inverse(&stage.plan.poses[0]) * stage.plan.poses[1];
    let back = pose_inverse(&rel);
    let mut by_position = Vec::new();
    for &i in sets[0] {
        let target = cloud.point(i);
        let hit = sets[1].iter().any(|&j| (back.transform_point(stage.clouds[1].point(j)) - target).max_abs() < 1e-9);
        if hit {
            by_position.push(i);
        }
    }
    assert_eq!(by_index, by_position);
    assert!(!by_index.is_empty());
}

#[test]
fn reports_round_trip_and_repeat() {
    let cloud = small_box();
    let spec = plan("pivot_pivot_pivot.json");
    let params = PipelineParams::default();
    let a = run_pipeline(&cloud, &spec, &params, Some(2)).unwrap().report;
    let b = run_pipeline(&cloud, &spec, &params, Some(2)).unwrap().report;
    let text = a.to_json().unwrap();
    assert_eq!(text, b.to_json().unwrap());
    assert_eq!(RegraspReport::from_json(&text).unwrap(), a);
}
