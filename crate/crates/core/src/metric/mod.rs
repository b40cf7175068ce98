//! Task-dependent grasp metric and grasping regions.
//!
//! All geometry for a segment (cloud, contacts, task screw, gravity) is
//! expressed in one common frame: the frame of the transformed cloud for that
//! segment. Wrenches are 6-vectors `[force; moment]`.

mod context;
mod eta;

pub use context::{build_task_context, ContextParams, TaskKind, GRAVITY};
pub use eta::{contact_wrench_rows, eta_for_pair, friction_generators, tangent_basis, unit_task_wrench};

use rayon::prelude::*;
use serde::Serialize;

use crate::cloud::{ContactPair, PointCloud};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;
use crate::screws::UnitScrew;

pub type Wrench<T> = [T; 6];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvironmentContact<T> {
    pub position: Vec3<T>,
    /// Unit normal pointing into the object.
    pub normal: Vec3<T>,
    pub mu: T,
}

impl<T: Real> EnvironmentContact<T> {
    pub fn new(position: Vec3<T>, normal: Vec3<T>, mu: T) -> Result<Self> {
        let c = Self { position, normal, mu };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if (self.normal.norm() - T::one()).abs() > T::identity_tolerance() {
            return Err(Error::InvalidContext("environment normal is not unit length".into()));
        }
        if !(self.mu >= T::zero()) || !self.position.is_finite() {
            return Err(Error::InvalidContext("environment contact has negative friction or bad position".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskContext<T> {
    pub task_screw: UnitScrew<T>,
    pub environment_contacts: Vec<EnvironmentContact<T>>,
    /// External wrench about the frame origin.
    pub gravity_wrench: Wrench<T>,
    pub mu_robot: T,
    pub cone_facets: usize,
    /// Bound on the summed normal force of the two jaws.
    pub force_cap: T,
}

impl<T: Real> TaskContext<T> {
    pub fn validate(&self) -> Result<()> {
        if self.cone_facets < 4 {
            return Err(Error::InvalidContext(format!("cone_facets must be >= 4, got {}", self.cone_facets)));
        }
        if !(self.force_cap > T::zero()) || !self.force_cap.is_finite() {
            return Err(Error::InvalidContext("force_cap must be positive and finite".into()));
        }
        if !(self.mu_robot >= T::zero()) {
            return Err(Error::InvalidContext("mu_robot must be nonnegative".into()));
        }
        if !self.gravity_wrench.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidContext("non-finite gravity wrench".into()));
        }
        for c in &self.environment_contacts {
            c.validate()?;
        }
        Ok(())
    }

    /// Same context with a different force cap.
    pub fn with_force_cap(mut self, force_cap: T) -> Self {
        self.force_cap = force_cap;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraspRegion<T> {
    pub segment_index: usize,
    /// Sorted indices into the canonical cloud.
    pub member_indices: Vec<usize>,
    /// Normalized metric per point, in `[0, 1]`.
    pub eta: Vec<T>,
    pub eta_threshold: T,
    /// Largest raw metric on the segment (the normalizer).
    pub raw_max: T,
}

impl<T: Real> GraspRegion<T> {
    pub fn is_empty(&self) -> bool {
        self.member_indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.member_indices.binary_search(&i).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum MetricWarning {
    /// No point reaches the threshold on this segment.
    EmptyRegion { segment_index: usize },
    /// Pairs dropped because the solver broke down on them.
    SolverBreakdown { segment_index: usize, pairs: usize },
}

#[derive(Clone, Debug)]
pub struct MetricOutput<T> {
    pub regions: Vec<GraspRegion<T>>,
    /// Raw metric per pair, per segment, in the order of the input pairs.
    pub pair_eta: Vec<Vec<T>>,
    pub warnings: Vec<MetricWarning>,
}

/// Raw metric of every pair on one cloud. Pairs on which the simplex breaks
/// down count as infeasible; their number is returned alongside.
pub fn pair_metrics<T: Real>(pairs: &[ContactPair<T>], cloud: &PointCloud<T>, ctx: &TaskContext<T>) -> Result<(Vec<T>, usize)> {
    ctx.validate()?;
    let results: Vec<Result<T>> = pairs.par_iter().map(|p| eta_for_pair(p, cloud, ctx)).collect();
    let mut out = Vec::with_capacity(results.len());
    let mut broken = 0;
    for r in results {
        match r {
            Ok(v) => out.push(v),
            Err(Error::NumericalBreakdown(_)) => {
                broken += 1;
                out.push(T::zero());
            }
            Err(e) => return Err(e),
        }
    }
    Ok((out, broken))
}

/// Per-point regions from per-pair metrics: each point takes the best pair
/// touching it, values are divided by the segment maximum and thresholded.
pub fn region_from_pairs<T: Real>(
    segment_index: usize,
    n_points: usize,
    pairs: &[ContactPair<T>],
    pair_eta: &[T],
    eta_threshold: T,
) -> GraspRegion<T> {
    let mut eta = vec![T::zero(); n_points];
    for (p, &v) in pairs.iter().zip(pair_eta) {
        for i in [p.index_a, p.index_b] {
            if v > eta[i] {
                eta[i] = v;
            }
        }
    }
    let raw_max = eta.iter().fold(T::zero(), |a, &b| a.max(b));
    if raw_max > T::zero() {
        for v in eta.iter_mut() {
            *v = (*v / raw_max).min(T::one());
        }
    }
    let member_indices = eta
        .iter()
        .enumerate()
        .filter(|(_, &v)| raw_max > T::zero() && v >= eta_threshold)
        .map(|(i, _)| i)
        .collect();
    GraspRegion { segment_index, member_indices, eta, eta_threshold, raw_max }
}

/// Grasping region for every segment. `clouds[i]` is the object at the start
/// of segment `i`; `pairs` index into all clouds alike.
pub fn compute_metric<T: Real>(
    clouds: &[PointCloud<T>],
    contexts: &[TaskContext<T>],
    pairs: &[ContactPair<T>],
    eta_threshold: T,
) -> Result<MetricOutput<T>> {
    if contexts.is_empty() || clouds.len() < contexts.len() {
        return Err(Error::InvalidContext(format!(
            "{} clouds cannot cover {} segments",
            clouds.len(),
            contexts.len()
        )));
    }
    if !(eta_threshold > T::zero() && eta_threshold <= T::one()) {
        return Err(Error::InvalidContext("eta threshold must lie in (0, 1]".into()));
    }
    let mut regions = Vec::with_capacity(contexts.len());
    let mut all_eta = Vec::with_capacity(contexts.len());
    let mut warnings = Vec::new();
    for (i, ctx) in contexts.iter().enumerate() {
        let (eta, broken) = pair_metrics(pairs, &clouds[i], ctx)?;
        if broken > 0 {
            warnings.push(MetricWarning::SolverBreakdown { segment_index: i, pairs: broken });
        }
        let region = region_from_pairs(i, clouds[i].len(), pairs, &eta, eta_threshold);
        if region.is_empty() {
            warnings.push(MetricWarning::EmptyRegion { segment_index: i });
        }
        regions.push(region);
        all_eta.push(eta);
    }
    Ok(MetricOutput { regions, pair_eta: all_eta, warnings })
}
