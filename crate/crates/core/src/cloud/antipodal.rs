use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use super::PointCloud;
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Parallel-jaw contact pair; `axis` points from `index_a` toward `index_b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactPair<T> {
    pub index_a: usize,
    pub index_b: usize,
    pub axis: Vec3<T>,
}

impl<T: Real> ContactPair<T> {
    pub fn contains(&self, i: usize) -> bool {
        self.index_a == i || self.index_b == i
    }

    /// Antipodality defect: the larger of the angles between each inward
    /// surface direction and the jaw axis.
    pub fn defect(cloud: &PointCloud<T>, a: usize, b: usize) -> Option<T> {
        let d = cloud.point(b) - cloud.point(a);
        let u = d.try_normalize(T::epsilon() * T::lit(16.0))?;
        let ang_a = (-cloud.normal(a)).angle_to(u);
        let ang_b = cloud.normal(b).angle_to(u);
        Some(ang_a.max(ang_b))
    }
}

/// Candidate grasps: every point picks the partner within `max_gripper_width`
/// with the smallest antipodality defect (ties: nearer, then lower index),
/// provided the defect is within `antipodal_tolerance`. Unordered duplicates
/// are merged and pairs come back sorted with `index_a < index_b`.
pub fn antipodal_pairs<T: Real>(cloud: &PointCloud<T>, max_gripper_width: T, antipodal_tolerance: T) -> Vec<ContactPair<T>> {
    let n = cloud.len();
    if n < 2 || max_gripper_width <= T::zero() {
        return Vec::new();
    }
    let cell = max_gripper_width;
    let key = |p: Vec3<T>| -> (i64, i64, i64) {
        let f = |v: T| (v / cell).floor().to_i64().unwrap_or(0);
        (f(p.x), f(p.y), f(p.z))
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in cloud.points().iter().enumerate() {
        grid.entry(key(*p)).or_default().push(i);
    }
    let width_sq = max_gripper_width * max_gripper_width;

    let partners: Vec<Option<usize>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let pa = cloud.point(a);
            let (cx, cy, cz) = key(pa);
            let mut best: Option<(T, T, usize)> = None;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let Some(bucket) = grid.get(&(cx + dx, cy + dy, cz + dz)) else {
                            continue;
                        };
                        for &b in bucket {
                            if b == a {
                                continue;
                            }
                            let d2 = (cloud.point(b) - pa).norm_squared();
                            if d2 > width_sq {
                                continue;
                            }
                            let Some(defect) = ContactPair::defect(cloud, a, b) else {
                                continue;
                            };
                            if defect > antipodal_tolerance {
                                continue;
                            }
                            let better = match best {
                                None => true,
                                Some((bd, bd2, bi)) => (defect, d2, b) < (bd, bd2, bi),
                            };
                            if better {
                                best = Some((defect, d2, b));
                            }
                        }
                    }
                }
            }
            best.map(|(_, _, b)| b)
        })
        .collect();

    let unique: BTreeSet<(usize, usize)> = partners
        .iter()
        .enumerate()
        .filter_map(|(a, b)| b.map(|b| (a.min(b), a.max(b))))
        .collect();
    unique
        .into_iter()
        .map(|(a, b)| ContactPair { index_a: a, index_b: b, axis: (cloud.point(b) - cloud.point(a)).normalize() })
        .collect()
}
