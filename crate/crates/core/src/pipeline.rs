//! End-to-end run: cloud and plan in, grasp groups and a JSON report out.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cloud::{antipodal_pairs, oriented_bounding_box, transform_point_cloud, write_ply, ContactPair, PointCloud};
use crate::error::{Error, Result};
use crate::metric::{compute_metric, ContextParams, GraspRegion, MetricWarning, TaskKind};
use crate::plan::{compile_plan, CompiledPlan, PlanSpec};
use crate::regrasp::{grasp_contact_selection, greedy_partition, RegraspPlan};
use crate::scalar::Real;
use crate::screws::Pitch;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub gamma_th: f64,
    pub eta_th: f64,
    pub mu_robot: f64,
    pub mu_env: f64,
    /// kg
    pub mass: f64,
    /// N
    pub force_cap: f64,
    pub cone_facets: usize,
    /// m
    pub gripper_width: f64,
    pub antipodal_tolerance_deg: f64,
    /// m
    pub pivot_axis_tolerance: f64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            gamma_th: 0.25,
            eta_th: 0.75,
            mu_robot: 0.8,
            mu_env: 0.3,
            mass: 0.5,
            force_cap: 20.0,
            cone_facets: 16,
            gripper_width: 0.08,
            antipodal_tolerance_deg: 15.0,
            pivot_axis_tolerance: 0.01,
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.gamma_th) || !unit(self.eta_th) {
            return Err(Error::InvalidContext("thresholds must lie in (0, 1]".into()));
        }
        if !(self.gripper_width > 0.0) || !(self.antipodal_tolerance_deg >= 0.0) || !(self.mass >= 0.0) {
            return Err(Error::InvalidContext("gripper width, tolerance and mass must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn context_params<T: Real>(&self) -> ContextParams<T> {
        ContextParams {
            mass: T::lit(self.mass),
            mu_robot: T::lit(self.mu_robot),
            mu_env: T::lit(self.mu_env),
            cone_facets: self.cone_facets,
            force_cap: T::lit(self.force_cap),
            axis_tolerance: T::lit(self.pivot_axis_tolerance),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactReport {
    pub index_a: usize,
    pub index_b: usize,
    /// Coordinates in the canonical cloud frame.
    pub point_a: [f64; 3],
    pub point_b: [f64; 3],
    /// Weaker endpoint's normalized metric over the group's segments.
    pub min_eta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    /// 1-based inclusive segment range.
    pub segments: [usize; 2],
    pub gamma: f64,
    pub gamma_list: Vec<f64>,
    pub intersection_size: usize,
    pub contact: Option<ContactReport>,
    pub no_feasible_pair: bool,
    pub empty_region: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub index: usize,
    pub kind: TaskKind,
    /// `None` for a pure translation.
    pub pitch: Option<f64>,
    pub direction: [f64; 3],
    pub region_size: usize,
    pub raw_eta_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudSummary {
    pub points: usize,
    pub antipodal_pairs: usize,
    pub bbox_extents: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegraspReport {
    pub schema_version: u32,
    pub alpha: usize,
    pub regrasp_count: usize,
    pub executable: bool,
    pub groups: Vec<GroupReport>,
    pub segments: Vec<SegmentReport>,
    pub warnings: Vec<String>,
    pub parameters: PipelineParams,
    pub seed: Option<u64>,
    pub cloud: CloudSummary,
}

impl RegraspReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Everything a run produces, for callers that need more than the report.
#[derive(Clone, Debug)]
pub struct PipelineOutput<T> {
    pub report: RegraspReport,
    pub plan: CompiledPlan<T>,
    pub clouds: Vec<PointCloud<T>>,
    pub pairs: Vec<ContactPair<T>>,
    pub regions: Vec<GraspRegion<T>>,
    pub partition: RegraspPlan,
    /// Chosen pair per group (index into `pairs`).
    pub contacts: Vec<Option<usize>>,
}

/// Metric-only stage: regions for every segment of a compiled plan.
pub struct RegionStage<T> {
    pub plan: CompiledPlan<T>,
    pub clouds: Vec<PointCloud<T>>,
    pub pairs: Vec<ContactPair<T>>,
    pub regions: Vec<GraspRegion<T>>,
    pub warnings: Vec<MetricWarning>,
    pub bbox_extents: [f64; 3],
}

pub fn compute_regions<T: Real>(cloud: &PointCloud<T>, spec: &PlanSpec, params: &PipelineParams) -> Result<RegionStage<T>> {
    params.validate()?;
    let bbox = oriented_bounding_box(cloud)?;
    let plan = compile_plan(spec, &bbox, &params.context_params())?;
    let clouds = transform_point_cloud(cloud, &plan.poses);
    let pairs = antipodal_pairs(cloud, T::lit(params.gripper_width), T::lit(params.antipodal_tolerance_deg.to_radians()));
    let metric = compute_metric(&clouds, &plan.contexts, &pairs, T::lit(params.eta_th))?;
    let bbox_extents = bbox.half_extents.map(|h| 2.0 * h.to_f64_lossy());
    Ok(RegionStage { plan, clouds, pairs, regions: metric.regions, warnings: metric.warnings, bbox_extents })
}

/// One segment's grasping region as saved by the metric-only stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub index: usize,
    pub kind: TaskKind,
    pub member_indices: Vec<usize>,
    pub raw_eta_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionsReport {
    pub schema_version: u32,
    pub segments: Vec<RegionRecord>,
    pub warnings: Vec<String>,
    pub parameters: PipelineParams,
    pub seed: Option<u64>,
    pub cloud: CloudSummary,
}

impl RegionsReport {
    pub fn new<T: Real>(stage: &RegionStage<T>, points: usize, params: &PipelineParams, seed: Option<u64>) -> Self {
        let segments = stage
            .regions
            .iter()
            .zip(&stage.plan.kinds)
            .enumerate()
            .map(|(i, (r, kind))| RegionRecord {
                index: i + 1,
                kind: *kind,
                member_indices: r.member_indices.clone(),
                raw_eta_max: r.raw_max.to_f64_lossy(),
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            segments,
            warnings: stage.warnings.iter().map(describe).collect(),
            parameters: *params,
            seed,
            cloud: CloudSummary { points, antipodal_pairs: stage.pairs.len(), bbox_extents: stage.bbox_extents },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(Error::UnsupportedSchema(report.schema_version));
        }
        Ok(report)
    }

    pub fn member_sets(&self) -> Vec<&[usize]> {
        self.segments.iter().map(|s| s.member_indices.as_slice()).collect()
    }
}

fn describe(w: &MetricWarning) -> String {
    match w {
        MetricWarning::EmptyRegion { segment_index } => {
            format!("segment {} has an empty grasping region; no grasp can execute it", segment_index + 1)
        }
        MetricWarning::SolverBreakdown { segment_index, pairs } => {
            format!("segment {}: {pairs} contact pairs dropped after solver breakdown", segment_index + 1)
        }
    }
}

pub fn run_pipeline<T: Real>(
    cloud: &PointCloud<T>,
    spec: &PlanSpec,
    params: &PipelineParams,
    seed: Option<u64>,
) -> Result<PipelineOutput<T>> {
    let stage = compute_regions(cloud, spec, params)?;
    let member_sets: Vec<&[usize]> = stage.regions.iter().map(|r| r.member_indices.as_slice()).collect();
    let partition = greedy_partition(&member_sets, params.gamma_th);
    let mut warnings: Vec<String> = stage.warnings.iter().map(describe).collect();

    let mut groups = Vec::new();
    let mut contacts = Vec::new();
    for (gi, g) in partition.groups.iter().enumerate() {
        let etas: Vec<&[T]> = g.segments().map(|s| stage.regions[s].eta.as_slice()).collect();
        let chosen = if g.empty_region {
            None
        } else {
            match grasp_contact_selection(&g.score.intersection, &stage.pairs, &etas) {
                Ok(c) => Some(c),
                Err(Error::NoFeasiblePair) => {
                    warnings.push(format!("group {}: no antipodal pair inside the common region", gi + 1));
                    None
                }
                Err(e) => return Err(e),
            }
        };
        let contact = chosen.map(|(k, v)| {
            let p = &stage.pairs[k];
            ContactReport {
                index_a: p.index_a,
                index_b: p.index_b,
                point_a: cloud.point(p.index_a).to_f64(),
                point_b: cloud.point(p.index_b).to_f64(),
                min_eta: v.to_f64_lossy(),
            }
        });
        groups.push(GroupReport {
            segments: [g.first + 1, g.last + 1],
            gamma: g.score.gamma,
            gamma_list: g.score.gamma_list.clone(),
            intersection_size: g.score.intersection.len(),
            no_feasible_pair: !g.empty_region && contact.is_none(),
            empty_region: g.empty_region,
            contact,
        });
        contacts.push(chosen.map(|(k, _)| k));
    }

    let segments = stage
        .plan
        .contexts
        .iter()
        .zip(&stage.plan.kinds)
        .zip(&stage.regions)
        .enumerate()
        .map(|(i, ((ctx, kind), region))| SegmentReport {
            index: i + 1,
            kind: *kind,
            pitch: match ctx.task_screw.pitch() {
                Pitch::Finite(h) => Some(h.to_f64_lossy()),
                Pitch::Infinite => None,
            },
            direction: ctx.task_screw.direction().to_f64(),
            region_size: region.member_indices.len(),
            raw_eta_max: region.raw_max.to_f64_lossy(),
        })
        .collect();

    let executable = groups.iter().all(|g| g.contact.is_some());
    let report = RegraspReport {
        schema_version: SCHEMA_VERSION,
        alpha: partition.alpha(),
        regrasp_count: partition.regrasp_count(),
        executable,
        groups,
        segments,
        warnings,
        parameters: *params,
        seed,
        cloud: CloudSummary { points: cloud.len(), antipodal_pairs: stage.pairs.len(), bbox_extents: stage.bbox_extents },
    };
    Ok(PipelineOutput {
        report,
        plan: stage.plan,
        clouds: stage.clouds,
        pairs: stage.pairs,
        regions: stage.regions,
        partition,
        contacts,
    })
}

const PALETTE: [[u8; 3]; 8] = [
    [255, 200, 0],
    [0, 120, 255],
    [200, 0, 200],
    [0, 190, 190],
    [255, 120, 0],
    [120, 80, 255],
    [150, 200, 0],
    [255, 0, 120],
];
const BACKGROUND: [u8; 3] = [170, 170, 170];
const CONTACT_A: [u8; 3] = [255, 0, 0];
const CONTACT_B: [u8; 3] = [0, 255, 0];

fn muted(c: [u8; 3]) -> [u8; 3] {
    c.map(|v| ((v as u16 + 255) / 2) as u8)
}

/// Per-point colors for group `g`: members of any of its regions in a pale
/// palette color, the common region in the full color, contacts red and green.
pub fn group_colors<T: Real>(output: &PipelineOutput<T>, g: usize) -> Vec<[u8; 3]> {
    let group = &output.partition.groups[g];
    let color = PALETTE[g % PALETTE.len()];
    let mut colors = vec![BACKGROUND; output.clouds[0].len()];
    for s in group.segments() {
        for &i in &output.regions[s].member_indices {
            colors[i] = muted(color);
        }
    }
    for &i in &group.score.intersection {
        colors[i] = color;
    }
    if let Some(k) = output.contacts[g] {
        colors[output.pairs[k].index_a] = CONTACT_A;
        colors[output.pairs[k].index_b] = CONTACT_B;
    }
    colors
}

/// Writes `group_<n>.ply` per group into `dir`, each cloud placed at the
/// group's first pose.
pub fn export_group_clouds<T: Real>(output: &PipelineOutput<T>, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut written = Vec::new();
    for (g, group) in output.partition.groups.iter().enumerate() {
        let path = dir.join(format!("group_{}.ply", g + 1));
        let colors = group_colors(output, g);
        write_ply(&path, &output.clouds[group.first], Some(&colors))?;
        written.push(path);
    }
    Ok(written)
}
