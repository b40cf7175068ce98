use serde::{Deserialize, Serialize};

use super::{EnvironmentContact, TaskContext};
use crate::cloud::BoundingBox;
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;
use crate::screws::{Pitch, ScrewSegment};

pub const GRAVITY: f64 = 9.81;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TaskKind {
    Pivot,
    Slide,
    Pickup,
    Free,
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TaskKind::Pivot => "PIVOT",
            TaskKind::Slide => "SLIDE",
            TaskKind::Pickup => "PICKUP",
            TaskKind::Free => "FREE",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContextParams<T> {
    /// kg
    pub mass: T,
    pub mu_robot: T,
    pub mu_env: T,
    pub cone_facets: usize,
    /// N
    pub force_cap: T,
    /// Largest distance (m) between a pivot axis and the box edge it turns about.
    pub axis_tolerance: T,
}

impl<T: Real> Default for ContextParams<T> {
    fn default() -> Self {
        Self {
            mass: T::lit(0.5),
            mu_robot: T::lit(0.8),
            mu_env: T::lit(0.3),
            cone_facets: 16,
            force_cap: T::lit(20.0),
            axis_tolerance: T::lit(0.01),
        }
    }
}

/// Task context for one segment. `segment` and `bbox` must be in the same
/// frame, with `bbox` placed at the segment's start pose; the supporting
/// surface is the plane with normal `+z`.
pub fn build_task_context<T: Real>(
    segment: &ScrewSegment<T>,
    bbox: &BoundingBox<T>,
    kind: TaskKind,
    params: &ContextParams<T>,
) -> Result<TaskContext<T>> {
    let screw = segment.spatial_screw();
    let up = Vec3::unit(2);
    let environment_contacts = match kind {
        TaskKind::Pivot => {
            if screw.pitch().is_infinite() {
                return Err(Error::InvalidContext("a pivot needs a rotation axis".into()));
            }
            let corners = bbox.corners();
            let mut best: Option<(T, usize, usize)> = None;
            for (a, b) in BoundingBox::<T>::edges() {
                let d = screw.distance_to_axis(corners[a]).max(screw.distance_to_axis(corners[b]));
                if best.map_or(true, |(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
            let (d, a, b) = best.unwrap();
            if d > params.axis_tolerance {
                return Err(Error::AxisNotOnBody { distance: d.to_f64_lossy() });
            }
            vec![
                EnvironmentContact::new(corners[a], up, params.mu_env)?,
                EnvironmentContact::new(corners[b], up, params.mu_env)?,
            ]
        }
        TaskKind::Slide => vec![EnvironmentContact::new(bbox.bottom_face_center(), up, params.mu_env)?],
        TaskKind::Pickup | TaskKind::Free => Vec::new(),
    };
    if kind == TaskKind::Slide && !matches!(screw.pitch(), Pitch::Infinite) {
        return Err(Error::InvalidContext("a slide must be a pure translation".into()));
    }
    let f = Vec3::new(T::zero(), T::zero(), -T::lit(GRAVITY) * params.mass);
    let m = bbox.center.cross(f);
    let ctx = TaskContext {
        task_screw: screw,
        environment_contacts,
        gravity_wrench: [f.x, f.y, f.z, m.x, m.y, m.z],
        mu_robot: params.mu_robot,
        cone_facets: params.cone_facets,
        force_cap: params.force_cap,
    };
    ctx.validate()?;
    Ok(ctx)
}
