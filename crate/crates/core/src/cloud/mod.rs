//! Point clouds in the object's canonical frame.
//!
//! Point indices are the identity of a surface sample: every cloud derived
//! from a canonical cloud by rigid motion keeps the same ordering, so an
//! index set selected on one cloud names the same physical points on all
//! of them.

mod antipodal;
mod bbox;
mod normals;
mod ply;

pub use antipodal::{antipodal_pairs, ContactPair};
pub use bbox::{oriented_bounding_box, BoundingBox};
pub use normals::{estimate_normals, NormalEstimate, DEFAULT_K_NEIGHBORS};
pub use ply::{load_ply, parse_ply, write_ply, write_ply_string};

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;
use crate::screws::{pose_inverse, Pose};

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud<T> {
    points: Vec<Vec3<T>>,
    normals: Vec<Vec3<T>>,
    /// Index of the plan pose whose body frame the coordinates are in.
    pub frame_tag: usize,
}

impl<T: Real> PointCloud<T> {
    /// Validates equal, nonzero lengths and unit normals (to `1e-6`).
    pub fn new(points: Vec<Vec3<T>>, normals: Vec<Vec3<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if points.len() != normals.len() {
            return Err(Error::InvalidCloud(format!(
                "{} points but {} normals",
                points.len(),
                normals.len()
            )));
        }
        let tol = T::lit(1e-6).max(T::lit(16.0) * T::epsilon());
        for (i, (p, n)) in points.iter().zip(&normals).enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidCloud(format!("point {i} is not finite")));
            }
            if (n.norm() - T::one()).abs() > tol {
                return Err(Error::InvalidCloud(format!("normal {i} is not unit length")));
            }
        }
        Ok(Self { points, normals, frame_tag: 0 })
    }

    /// Cloud from bare points; normals are estimated from `k` neighbors.
    pub fn from_points(points: Vec<Vec3<T>>, k_neighbors: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let placeholder = vec![Vec3::unit(2); points.len()];
        let cloud = Self::new(points, placeholder)?;
        Ok(estimate_normals(&cloud, k_neighbors.min(cloud.len()).max(3))?.cloud)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3<T>] {
        &self.points
    }

    pub fn normals(&self) -> &[Vec3<T>] {
        &self.normals
    }

    pub fn point(&self, i: usize) -> Vec3<T> {
        self.points[i]
    }

    pub fn normal(&self, i: usize) -> Vec3<T> {
        self.normals[i]
    }

    pub fn centroid(&self) -> Vec3<T> {
        let sum = self.points.iter().fold(Vec3::zeros(), |acc, p| acc + *p);
        sum * (T::one() / T::from_usize(self.len()).unwrap())
    }

    /// Applies `g` to every point and normal, keeping indices.
    pub fn transformed(&self, g: &Pose<T>) -> Self {
        Self {
            points: self.points.iter().map(|p| g.transform_point(*p)).collect(),
            normals: self.normals.iter().map(|n| g.transform_vector(*n)).collect(),
            frame_tag: self.frame_tag,
        }
    }
}

/// Clouds of the object at every plan pose, in the frame of `plan[0]`:
/// point `j` of cloud `i` is `plan[0]⁻¹ plan[i] p_j`.
pub fn transform_point_cloud<T: Real>(cloud: &PointCloud<T>, plan: &[Pose<T>]) -> Vec<PointCloud<T>> {
    let Some(first) = plan.first() else {
        return Vec::new();
    };
    let base_inv = pose_inverse(first);
    plan.iter()
        .enumerate()
        .map(|(i, g)| {
            let mut out = if i == 0 { cloud.clone() } else { cloud.transformed(&(base_inv * *g)) };
            out.frame_tag = i;
            out
        })
        .collect()
}
