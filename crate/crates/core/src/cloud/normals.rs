use rayon::prelude::*;

use super::PointCloud;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Mat3, Vec3};
use crate::scalar::Real;

pub const DEFAULT_K_NEIGHBORS: usize = 20;

/// Estimated normals plus the indices whose neighborhood was rank deficient.
/// Those points received the centroid-outward direction instead.
#[derive(Clone, Debug)]
pub struct NormalEstimate<T> {
    pub cloud: PointCloud<T>,
    pub degenerate: Vec<usize>,
}

impl<T: Real> NormalEstimate<T> {
    /// Fails with `DegenerateNeighborhood` naming the first degenerate point.
    pub fn strict(self) -> Result<PointCloud<T>> {
        match self.degenerate.first() {
            Some(&i) => Err(Error::DegenerateNeighborhood(i)),
            None => Ok(self.cloud),
        }
    }
}

/// PCA normals from the `k` nearest neighbors (the point itself included),
/// flipped to point away from the cloud centroid.
pub fn estimate_normals<T: Real>(cloud: &PointCloud<T>, k_neighbors: usize) -> Result<NormalEstimate<T>> {
    let n = cloud.len();
    if k_neighbors < 3 || k_neighbors > n {
        return Err(Error::InvalidCloud(format!(
            "normal estimation needs 3 <= k <= N, got k = {k_neighbors}, N = {n}"
        )));
    }
    let centroid = cloud.centroid();
    let pts = cloud.points();
    let rank_tol = T::lit(1e-12);

    let results: Vec<(Vec3<T>, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = pts[i];
            let mut dist: Vec<(T, usize)> = pts.iter().enumerate().map(|(j, q)| ((*q - p).norm_squared(), j)).collect();
            dist.select_nth_unstable_by(k_neighbors - 1, |a, b| {
                a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1))
            });
            let neigh = &dist[..k_neighbors];
            let inv_k = T::one() / T::from_usize(k_neighbors).unwrap();
            let mean = neigh.iter().fold(Vec3::zeros(), |acc, &(_, j)| acc + pts[j]) * inv_k;
            let cov = neigh.iter().fold(Mat3::zeros(), |acc, &(_, j)| {
                let d = pts[j] - mean;
                acc + Mat3::outer(d, d)
            });
            let cov = cov.scale(inv_k);
            let (vals, vecs) = symmetric_eigen(&cov);
            let outward = p - centroid;
            if vals[1] <= rank_tol * vals[2].max(T::one()) {
                let fallback = outward.try_normalize(T::epsilon()).unwrap_or(Vec3::unit(2));
                return (fallback, true);
            }
            let mut normal = vecs.col(0).normalize();
            if normal.dot(outward) < T::zero() {
                normal = -normal;
            }
            (normal, false)
        })
        .collect();

    let degenerate = results.iter().enumerate().filter(|(_, r)| r.1).map(|(i, _)| i).collect();
    let normals = results.into_iter().map(|r| r.0).collect();
    let mut out = PointCloud::new(cloud.points().to_vec(), normals)?;
    out.frame_tag = cloud.frame_tag;
    Ok(NormalEstimate { cloud: out, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_points(points: Vec<Vec3<f64>>) -> PointCloud<f64> {
        let n = points.len();
        PointCloud::new(points, vec![Vec3::unit(2); n]).unwrap()
    }

    #[test]
    fn plane_normals_point_away_from_centroid() {
        // a plane z = 0 plus a few points above it shift the centroid up
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                pts.push(Vec3::new(i as f64 * 0.01, j as f64 * 0.01, 0.0));
            }
        }
        for i in 0..5 {
            pts.push(Vec3::new(0.05, 0.05 + i as f64 * 0.001, 1.0 + i as f64 * 0.01));
        }
        let est = estimate_normals(&from_points(pts), 8).unwrap();
        for i in 0..100 {
            let n = est.cloud.normal(i);
            assert!((n - Vec3::new(0.0, 0.0, -1.0)).max_abs() < 1e-9, "{i}: {n:?}");
        }
    }

    #[test]
    fn collinear_neighborhood_is_flagged() {
        let pts = (0..6).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        let est = estimate_normals(&from_points(pts), 3).unwrap();
        assert_eq!(est.degenerate.len(), 6);
        for n in est.cloud.normals() {
            assert!((n.norm() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(est.strict(), Err(Error::DegenerateNeighborhood(0))));
    }

    #[test]
    fn k_out_of_range() {
        let pts = (0..4).map(|i| Vec3::new(i as f64, (i * i) as f64, 0.0)).collect();
        let c = from_points(pts);
        assert!(estimate_normals(&c, 2).is_err());
        assert!(estimate_normals(&c, 5).is_err());
    }
}
