//! Motion plans: explicit pose lists or skeletons of primitives compiled into
//! constant screw segments.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cloud::BoundingBox;
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::metric::{build_task_context, ContextParams, TaskContext, TaskKind, GRAVITY};
use crate::scalar::Real;
use crate::screws::{pose_inverse, screw_exp, Pitch, Pose, PoseRecord, ScrewSegment, UnitScrew};

/// Distance (m) within which an edge selector must hit real box corners.
pub const EDGE_TOLERANCE: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub direction: [f64; 3],
    pub point: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub enum Primitive {
    /// Rotation about a box edge (e.g. `"min_y_min_z"`) or an explicit axis.
    Pivot {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edge: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axis: Option<AxisSpec>,
        #[serde(default = "quarter_turn")]
        angle: f64,
    },
    Slide { direction: [f64; 3], distance: f64 },
    /// Straight up along `+z`.
    Pickup { distance: f64 },
    /// Arbitrary screw; `h = null` is a pure translation.
    FreeScrew {
        l: [f64; 3],
        #[serde(default)]
        m: [f64; 3],
        #[serde(default)]
        h: Option<f64>,
        magnitude: f64,
    },
}

fn quarter_turn() -> f64 {
    std::f64::consts::FRAC_PI_2
}

impl Primitive {
    pub fn kind(&self) -> TaskKind {
        match self {
            Primitive::Pivot { .. } => TaskKind::Pivot,
            Primitive::Slide { .. } => TaskKind::Slide,
            Primitive::Pickup { .. } => TaskKind::Pickup,
            Primitive::FreeScrew { .. } => TaskKind::Free,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poses: Option<Vec<PoseRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skeleton: Option<Vec<Primitive>>,
}

impl PlanSpec {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let spec: PlanSpec = serde_json::from_str(text)
            .map_err(|e| Error::Parse { path: path.to_path_buf(), line: e.line(), msg: e.to_string() })?;
        match (&spec.poses, &spec.skeleton) {
            (Some(p), None) if p.len() >= 2 => Ok(spec),
            (Some(_), None) => Err(Error::InvalidPlan("a pose plan needs at least two poses".into())),
            (None, Some(s)) if !s.is_empty() => Ok(spec),
            (None, Some(_)) => Err(Error::InvalidPlan("empty skeleton".into())),
            _ => Err(Error::InvalidPlan("give exactly one of `poses` or `skeleton`".into())),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&text, path)
    }
}

#[derive(Clone, Debug)]
pub struct CompiledPlan<T> {
    /// Object poses `g_1 .. g_k`.
    pub poses: Vec<Pose<T>>,
    /// Poses relative to `g_1`; the canonical cloud moved by `relative[i]` is
    /// the object at `g_i`.
    pub relative: Vec<Pose<T>>,
    pub kinds: Vec<TaskKind>,
    pub contexts: Vec<TaskContext<T>>,
}

impl<T: Real> CompiledPlan<T> {
    pub fn segment_count(&self) -> usize {
        self.contexts.len()
    }
}

fn axis_index(name: &str) -> Option<usize> {
    match name {
        "x" => Some(0),
        "y" => Some(1),
        "z" => Some(2),
        _ => None,
    }
}

/// World axis of a named box edge, e.g. `min_y_min_z`. One clamp must be on
/// `z`; the axis is oriented so that a positive angle tips the box outward
/// over that edge.
pub fn edge_axis<T: Real>(selector: &str, bbox: &BoundingBox<T>) -> Result<(Vec3<T>, Vec3<T>)> {
    let bad = |why: &str| Error::BadEdgeSelector(format!("`{selector}`: {why}"));
    let parts: Vec<&str> = selector.split('_').collect();
    let [s1, a1, s2, a2] = parts.as_slice() else {
        return Err(bad("expected the form min_y_min_z"));
    };
    let clamp = |side: &str, axis: &str| -> Result<(usize, bool)> {
        let a = axis_index(axis).ok_or_else(|| bad("unknown axis"))?;
        match side {
            "min" => Ok((a, false)),
            "max" => Ok((a, true)),
            _ => Err(bad("side must be min or max")),
        }
    };
    let (c1, c2) = (clamp(s1, a1)?, clamp(s2, a2)?);
    if c1.0 == c2.0 {
        return Err(bad("both clamps name the same axis"));
    }
    let (side, vertical) = match (c1.0, c2.0) {
        (2, _) => (c2, c1),
        (_, 2) => (c1, c2),
        _ => return Err(bad("one clamp must be on z")),
    };
    let corners = bbox.corners();
    let mut lo = [T::infinity(); 3];
    let mut hi = [T::neg_infinity(); 3];
    for c in &corners {
        for i in 0..3 {
            lo[i] = lo[i].min(c[i]);
            hi[i] = hi[i].max(c[i]);
        }
    }
    let target = |(a, max): (usize, bool)| if max { hi[a] } else { lo[a] };
    let tol = T::lit(EDGE_TOLERANCE);
    let hits: Vec<Vec3<T>> = corners
        .iter()
        .copied()
        .filter(|c| (c[side.0] - target(side)).abs() <= tol && (c[vertical.0] - target(vertical)).abs() <= tol)
        .collect();
    if hits.len() != 2 {
        return Err(bad(&format!("matches {} box corners, not an edge", hits.len())));
    }
    let mut outward = Vec3::zeros();
    outward[side.0] = if side.1 { T::one() } else { -T::one() };
    let mut dir = (hits[1] - hits[0]).normalize();
    let want = Vec3::unit(2).cross(outward);
    let want = if vertical.1 { -want } else { want };
    if dir.dot(want) < T::zero() {
        dir = -dir;
    }
    Ok((dir, hits[0]))
}

fn vec3<T: Real>(v: [f64; 3]) -> Vec3<T> {
    Vec3::from_f64(v)
}

/// Compiles a plan against the object's box at `g_1`. `bbox` lives in the
/// canonical frame, which is the world frame for skeletons (`g_1 = I`).
pub fn compile_plan<T: Real>(spec: &PlanSpec, bbox: &BoundingBox<T>, params: &ContextParams<T>) -> Result<CompiledPlan<T>> {
    let (poses, kinds) = match (&spec.poses, &spec.skeleton) {
        (Some(records), _) => {
            let poses = records.iter().map(Pose::from_record).collect::<Result<Vec<_>>>()?;
            let kinds = vec![TaskKind::Free; poses.len().saturating_sub(1)];
            (poses, kinds)
        }
        (None, Some(skeleton)) => compile_skeleton(skeleton, bbox)?,
        (None, None) => return Err(Error::InvalidPlan("plan has neither poses nor skeleton".into())),
    };
    if poses.len() < 2 {
        return Err(Error::InvalidPlan("a plan needs at least two poses".into()));
    }
    let base_inv = pose_inverse(&poses[0]);
    let relative: Vec<Pose<T>> = poses.iter().map(|g| base_inv * *g).collect();
    let mut contexts = Vec::with_capacity(kinds.len());
    for (i, kind) in kinds.iter().enumerate() {
        let segment = ScrewSegment::from_poses(relative[i], relative[i + 1]).map_err(|e| match e {
            Error::IdentityDisplacement => Error::ZeroMagnitude(i + 1),
            other => other,
        })?;
        let placed = bbox.transformed(&relative[i]);
        let mut ctx = build_task_context(&segment, &placed, *kind, params)?;
        // clouds live in g_1's frame, where world "down" may be tilted
        let f = base_inv.rotation * Vec3::new(T::zero(), T::zero(), -T::lit(GRAVITY) * params.mass);
        let m = placed.center.cross(f);
        ctx.gravity_wrench = [f.x, f.y, f.z, m.x, m.y, m.z];
        contexts.push(ctx);
    }
    Ok(CompiledPlan { poses, relative, kinds, contexts })
}

/// Poses `g_1 = I, g_2, …` produced by applying each primitive in the world
/// frame to the current pose.
pub fn compile_skeleton<T: Real>(skeleton: &[Primitive], bbox: &BoundingBox<T>) -> Result<(Vec<Pose<T>>, Vec<TaskKind>)> {
    let mut poses = vec![Pose::identity()];
    let mut kinds = Vec::with_capacity(skeleton.len());
    for (i, prim) in skeleton.iter().enumerate() {
        let number = i + 1;
        let g = *poses.last().unwrap();
        let zero = |m: f64| !m.is_finite() || m.abs() < 1e-12;
        let (screw, magnitude) = match prim {
            Primitive::Pivot { edge, axis, angle } => {
                if zero(*angle) {
                    return Err(Error::ZeroMagnitude(number));
                }
                let (dir, point) = match (edge, axis) {
                    (Some(sel), None) => edge_axis(sel, &bbox.transformed(&g))?,
                    (None, Some(a)) => (vec3(a.direction), vec3(a.point)),
                    _ => return Err(Error::InvalidPlan(format!("primitive {number}: pivot needs exactly one of edge or axis"))),
                };
                (UnitScrew::through_point(dir, point, T::zero())?, T::lit(*angle))
            }
            Primitive::Slide { direction, distance } => {
                if zero(*distance) {
                    return Err(Error::ZeroMagnitude(number));
                }
                (UnitScrew::translation(vec3(*direction))?, T::lit(*distance))
            }
            Primitive::Pickup { distance } => {
                if zero(*distance) {
                    return Err(Error::ZeroMagnitude(number));
                }
                (UnitScrew::translation(Vec3::unit(2))?, T::lit(*distance))
            }
            Primitive::FreeScrew { l, m, h, magnitude } => {
                if zero(*magnitude) {
                    return Err(Error::ZeroMagnitude(number));
                }
                let pitch = match h {
                    Some(h) => Pitch::Finite(T::lit(*h)),
                    None => Pitch::Infinite,
                };
                (UnitScrew::new(vec3(*l), vec3(*m), pitch)?, T::lit(*magnitude))
            }
        };
        poses.push(screw_exp(&screw, magnitude) * g);
        kinds.push(prim.kind());
    }
    Ok((poses, kinds))
}
